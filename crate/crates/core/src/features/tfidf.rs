use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermScore {
    pub term: String,
    pub date: NaiveDate,
    pub tfidf: f64,
    /// Raw term count summed over the day's documents.
    pub freq: usize,
}

/// Documents of term counts, each tagged with the trading day it belongs to.
#[derive(Debug, Clone, Default)]
pub struct TermCorpus {
    docs: Vec<(NaiveDate, BTreeMap<String, usize>)>,
    df: HashMap<String, usize>,
}

impl TermCorpus {
    pub fn new(docs: impl IntoIterator<Item = (NaiveDate, BTreeMap<String, usize>)>) -> Self {
        let docs: Vec<_> = docs.into_iter().collect();
        let mut df: HashMap<String, usize> = HashMap::new();
        for (_, terms) in &docs {
            for (t, &n) in terms {
                if n > 0 {
                    *df.entry(t.clone()).or_default() += 1;
                }
            }
        }
        Self { docs, df }
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn df(&self, term: &str) -> usize {
        self.df.get(term).copied().unwrap_or(0)
    }

    fn idf(&self, term: &str) -> Result<f64> {
        match self.df(term) {
            0 => Err(Error::UnknownTerm(term.to_string())),
            df => Ok((self.n_docs() as f64 / df as f64).ln()),
        }
    }

    /// Summed tf * ln(N / df) over every document of `date`.
    pub fn score(&self, term: &str, date: NaiveDate) -> Result<TermScore> {
        let idf = self.idf(term)?;
        let freq: usize = self
            .docs
            .iter()
            .filter(|(d, _)| *d == date)
            .filter_map(|(_, t)| t.get(term))
            .sum();
        Ok(TermScore {
            term: term.to_string(),
            date,
            tfidf: freq as f64 * idf,
            freq,
        })
    }

    /// Scores for every term occurring on `date`.
    pub fn score_day(&self, date: NaiveDate) -> Vec<TermScore> {
        let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
        for (_, terms) in self.docs.iter().filter(|(d, _)| *d == date) {
            for (t, &n) in terms {
                *freq.entry(t.as_str()).or_default() += n;
            }
        }
        freq.into_iter()
            .filter(|&(_, n)| n > 0)
            .map(|(t, n)| TermScore {
                term: t.to_string(),
                date,
                tfidf: n as f64 * self.idf(t).expect("term occurs in corpus"),
                freq: n,
            })
            .collect()
    }
}

/// Top `k` terms per day by TF-IDF, then raw frequency, then term.
pub fn select_terms(scores: &[TermScore], k: usize) -> Vec<TermScore> {
    let mut by_day: BTreeMap<NaiveDate, Vec<TermScore>> = BTreeMap::new();
    for s in scores {
        by_day.entry(s.date).or_default().push(s.clone());
    }
    by_day
        .into_values()
        .flat_map(|mut day| {
            day.sort_by(|a, b| {
                b.tfidf
                    .total_cmp(&a.tfidf)
                    .then(b.freq.cmp(&a.freq))
                    .then_with(|| a.term.cmp(&b.term))
            });
            day.truncate(k);
            day
        })
        .collect()
}
