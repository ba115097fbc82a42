//! Article filtering and text normalization ahead of term extraction.
//!
//! The chain runs: length filter, title dedup, keyword counting and
//! filtering, top-k selection, then cleaning, tagging and lemmatization.

mod clean;
mod filter;
mod lemma;
mod tagger;

use std::collections::HashMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use clean::{clean_text, tokenize_and_tag};
pub use filter::{
    dedup_by_title, keyword_count, keyword_filter, length_filter, levenshtein, select_top,
    title_similarity, CountedArticle,
};
pub use lemma::Lemmatizer;
pub use tagger::{LexiconTagger, PosTagger};

use crate::error::Result;
use crate::ingest::Article;

/// Coarse part-of-speech classes; only ADJ/NOUN matter downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Adj,
    Verb,
    Adv,
    Other,
}

impl Pos {
    pub fn parse(s: &str) -> Option<Pos> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NOUN" => Some(Pos::Noun),
            "ADJ" => Some(Pos::Adj),
            "VERB" => Some(Pos::Verb),
            "ADV" => Some(Pos::Adv),
            "OTHER" => Some(Pos::Other),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanArticle {
    pub article_id: String,
    pub date: NaiveDate,
    pub tokens: Vec<Token>,
    pub lemmas: Vec<String>,
    pub keyword_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayDocs {
    pub date: NaiveDate,
    pub selected: Vec<CleanArticle>,
}

/// Tagger and lemmatizer bundle used to turn raw text into a [`CleanArticle`].
pub struct TextTools {
    pub tagger: Box<dyn PosTagger>,
    pub lemmatizer: Lemmatizer,
}

impl Default for TextTools {
    fn default() -> Self {
        Self {
            tagger: Box::new(LexiconTagger::default()),
            lemmatizer: Lemmatizer::default(),
        }
    }
}

impl TextTools {
    /// Clean, tag and lemmatize title and body of an article.
    pub fn process(&self, article: &Article, date: NaiveDate, keyword_count: usize) -> CleanArticle {
        let cleaned = clean_text(&format!("{} {}", article.title, article.body));
        let tokens = tokenize_and_tag(&cleaned, self.tagger.as_ref());
        let lemmas = tokens.iter().map(|t| self.lemmatizer.lemmatize(t)).collect();
        CleanArticle {
            article_id: article.id.clone(),
            date,
            tokens,
            lemmas,
            keyword_count,
        }
    }
}

/// Whether top-k article selection happens per trading day or over the corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionScope {
    #[default]
    PerDay,
    Corpus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepConfig {
    pub min_chars: usize,
    pub max_chars: usize,
    pub dedup_threshold: f64,
    pub top_k: usize,
    pub selection: SelectionScope,
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self {
            min_chars: 400,
            max_chars: 20_000,
            dedup_threshold: 0.8,
            top_k: 25,
            selection: SelectionScope::PerDay,
        }
    }
}

/// Runs the filtering chain over articles already attached to trading days.
///
/// `days` pairs each trading date with its articles. Length filtering and
/// dedup run over the whole corpus (dedup in publication order); keyword
/// filtering and top-k selection follow.
pub fn prepare_days(
    days: &[(NaiveDate, Vec<Article>)],
    aliases: &[String],
    min_keyword_count: usize,
    cfg: &PrepConfig,
    tools: &TextTools,
) -> Result<Vec<DayDocs>> {
    let mut all: Vec<(NaiveDate, Article)> = days
        .iter()
        .flat_map(|(d, arts)| arts.iter().map(move |a| (*d, a.clone())))
        .collect();
    all.sort_by(|a, b| {
        (a.1.published_date, &a.1.id).cmp(&(b.1.published_date, &b.1.id))
    });
    let articles: Vec<Article> = all.iter().map(|(_, a)| a.clone()).collect();
    let day_of: HashMap<&str, NaiveDate> = all.iter().map(|(d, a)| (a.id.as_str(), *d)).collect();
    let trading_day = |id: &str| day_of[id];

    let kept = length_filter(&articles, cfg.min_chars, cfg.max_chars);
    let kept = dedup_by_title(&kept, cfg.dedup_threshold);
    let counted: Vec<CountedArticle> = kept
        .into_iter()
        .map(|a| {
            let n = keyword_count(&a, aliases);
            CountedArticle {
                article: a,
                keyword_count: n,
            }
        })
        .collect();
    let counted = keyword_filter(&counted, min_keyword_count);

    let selected: Vec<CountedArticle> = match cfg.selection {
        SelectionScope::Corpus => select_top(&counted, cfg.top_k),
        SelectionScope::PerDay => days
            .iter()
            .flat_map(|(d, _)| {
                let of_day: Vec<CountedArticle> = counted
                    .iter()
                    .filter(|c| trading_day(&c.article.id) == *d)
                    .cloned()
                    .collect();
                select_top(&of_day, cfg.top_k)
            })
            .collect(),
    };

    Ok(days
        .iter()
        .map(|(d, _)| DayDocs {
            date: *d,
            selected: selected
                .iter()
                .filter(|c| trading_day(&c.article.id) == *d)
                .map(|c| tools.process(&c.article, *d, c.keyword_count))
                .collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::MarketProfile;

    fn art(url: &str, date: &str, title: &str, body: &str) -> Article {
        Article::new(
            &MarketProfile::tesla(),
            "src",
            url,
            NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap(),
            title,
            body,
        )
        .unwrap()
    }

    #[test]
    fn prepare_days_runs_the_chain() {
        let d1 = NaiveDate::from_ymd_opt(2019, 7, 1).unwrap();
        let d2 = NaiveDate::from_ymd_opt(2019, 7, 2).unwrap();
        let days = vec![
            (
                d1,
                vec![
                    art("a", "2019-06-30", "Tesla deliveries beat forecasts", "Tesla and TSLA shares: Tesla wins."),
                    art("b", "2019-07-01", "Tesla deliveries beat forecast", "Tesla and TSLA shares: Tesla wins."),
                    art("c", "2019-07-01", "Unrelated market wrap", "Stocks were flat, Tesla quiet."),
                ],
            ),
            (d2, vec![art("d", "2019-07-02", "Tesla strong quarter", "Tesla Tesla Tesla good results")]),
        ];
        let cfg = PrepConfig {
            min_chars: 0,
            ..PrepConfig::default()
        };
        let out = prepare_days(&days, &MarketProfile::tesla().aliases, 3, &cfg, &TextTools::default()).unwrap();
        assert_eq!(out.len(), 2);
        // b is a near-duplicate of a; c has too few keyword mentions.
        assert_eq!(out[0].selected.len(), 1);
        assert_eq!(out[0].selected[0].article_id, crate::ingest::article_id("a"));
        assert_eq!(out[1].selected.len(), 1);
        let doc = &out[1].selected[0];
        assert_eq!(doc.tokens.len(), doc.lemmas.len());
        assert_eq!(doc.lemmas.last().unwrap(), "result");
    }
}
