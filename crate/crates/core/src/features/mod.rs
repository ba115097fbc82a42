//! Candidate phrases, synonym clustering and TF-IDF term selection.

mod embeddings;
mod synonyms;
mod tfidf;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use embeddings::{
    load_embeddings, load_embeddings_as, write_embeddings_binary, write_embeddings_text,
    EmbeddingFormat, EmbeddingTable,
};
pub use synonyms::{candidate_vector, cluster_synonyms, cosine, SynonymCluster};
pub use tfidf::{select_terms, TermCorpus, TermScore};

use crate::error::{Error, Result};
use crate::textprep::{CleanArticle, DayDocs, Pos};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// An adjective/noun phrase of lemmas with its frequency on `date`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub phrase: Vec<String>,
    pub date: NaiveDate,
    pub freq: usize,
}

impl Candidate {
    pub fn key(&self) -> String {
        self.phrase.join(" ")
    }
}

/// Every sub-span of at most `max_len` tokens inside a maximal ADJ/NOUN run
/// that contains at least one NOUN, counted with multiplicity.
pub fn extract_candidates(doc: &CleanArticle, max_len: usize) -> Vec<Candidate> {
    let mut counts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    let n = doc.tokens.len();
    let mut start = 0;
    while start < n {
        if !matches!(doc.tokens[start].pos, Pos::Adj | Pos::Noun) {
            start += 1;
            continue;
        }
        let mut end = start;
        while end < n && matches!(doc.tokens[end].pos, Pos::Adj | Pos::Noun) {
            end += 1;
        }
        for i in start..end {
            for j in i + 1..=(i + max_len).min(end) {
                if doc.tokens[i..j].iter().any(|t| t.pos == Pos::Noun) {
                    *counts.entry(doc.lemmas[i..j].to_vec()).or_default() += 1;
                }
            }
        }
        start = end;
    }
    counts
        .into_iter()
        .map(|(phrase, freq)| Candidate {
            phrase,
            date: doc.date,
            freq,
        })
        .collect()
}

/// Sum candidate frequencies by (date, phrase).
pub fn merge_candidates(candidates: impl IntoIterator<Item = Candidate>) -> Vec<Candidate> {
    let mut acc: BTreeMap<(NaiveDate, Vec<String>), usize> = BTreeMap::new();
    for c in candidates {
        *acc.entry((c.date, c.phrase)).or_default() += c.freq;
    }
    acc.into_iter()
        .map(|((date, phrase), freq)| Candidate { phrase, date, freq })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopList(HashSet<String>);

impl StopList {
    /// One word per line; `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect(),
        )
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<String> for StopList {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Drop candidates made up entirely of stop words.
pub fn stopword_filter(candidates: &[Candidate], stoplist: &StopList) -> Vec<Candidate> {
    candidates
        .iter()
        .filter(|c| !c.phrase.iter().all(|w| stoplist.contains(w)))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub max_phrase_len: usize,
    pub synonym_tau: f64,
    pub terms_per_day: usize,
    /// Only the most frequent phrases take part in synonym clustering; the
    /// rest stay singletons. Bounds the quadratic pair scan.
    pub synonym_vocab_limit: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            max_phrase_len: 4,
            synonym_tau: 0.70,
            terms_per_day: 50,
            synonym_vocab_limit: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayTerms {
    pub date: NaiveDate,
    pub terms: Vec<TermScore>,
}

/// Candidate extraction through TF-IDF selection for a whole market.
///
/// Every selected article is one TF-IDF document. Without an embedding table
/// no synonyms are merged.
pub fn select_day_terms(
    days: &[DayDocs],
    stoplist: &StopList,
    table: Option<&EmbeddingTable>,
    cfg: &FeatureConfig,
) -> Result<Vec<DayTerms>> {
    let per_doc: Vec<(NaiveDate, Vec<Candidate>)> = days
        .iter()
        .flat_map(|d| d.selected.iter())
        .map(|doc| {
            let cands = extract_candidates(doc, cfg.max_phrase_len);
            (doc.date, stopword_filter(&cands, stoplist))
        })
        .collect();

    let representative: HashMap<String, String> = match table {
        Some(table) => {
            let pooled = merge_candidates(per_doc.iter().flat_map(|(_, c)| c.iter().cloned()).map(
                |mut c| {
                    c.date = NaiveDate::MIN;
                    c
                },
            ));
            let mut by_freq = pooled;
            by_freq.sort_by(|a, b| b.freq.cmp(&a.freq).then_with(|| a.phrase.cmp(&b.phrase)));
            by_freq.truncate(cfg.synonym_vocab_limit);
            cluster_synonyms(&by_freq, table, cfg.synonym_tau)?
                .into_iter()
                .flat_map(|cl| {
                    let rep = cl.representative.join(" ");
                    cl.members
                        .into_iter()
                        .map(move |m| (m.join(" "), rep.clone()))
                })
                .collect()
        }
        None => HashMap::new(),
    };

    let docs = per_doc.into_iter().map(|(date, cands)| {
        let mut terms: BTreeMap<String, usize> = BTreeMap::new();
        for c in cands {
            let key = c.key();
            let key = representative.get(&key).cloned().unwrap_or(key);
            *terms.entry(key).or_default() += c.freq;
        }
        (date, terms)
    });
    let corpus = TermCorpus::new(docs);
    Ok(days
        .iter()
        .map(|d| DayTerms {
            date: d.date,
            terms: select_terms(&corpus.score_day(d.date), cfg.terms_per_day),
        })
        .collect())
}
