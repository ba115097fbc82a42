//! Lexicon sentiment scoring, daily aggregation and series transforms.

use std::collections::HashSet;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::TermScore;
use crate::textprep::DayDocs;

const POSITIVE_WORDS: &str = include_str!("../data/positive-words.txt");
const NEGATIVE_WORDS: &str = include_str!("../data/negative-words.txt");

/// Positive and negative opinion words. Words listed on both sides are
/// dropped from both so the sets stay disjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

fn parse_word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with(';'))
        .map(str::to_lowercase)
        .collect()
}

impl Lexicon {
    pub fn new(
        positive: impl IntoIterator<Item = String>,
        negative: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let mut positive: HashSet<String> = positive.into_iter().map(|w| w.to_lowercase()).collect();
        let mut negative: HashSet<String> = negative.into_iter().map(|w| w.to_lowercase()).collect();
        let both: Vec<String> = positive.intersection(&negative).cloned().collect();
        for w in &both {
            positive.remove(w);
            negative.remove(w);
        }
        if positive.is_empty() || negative.is_empty() {
            return Err(Error::Validation(
                "lexicon needs at least one positive and one negative word".into(),
            ));
        }
        Ok(Self { positive, negative })
    }

    /// Parses the opinion-list layout: one word per line, `;` comment lines.
    pub fn parse(positive: &str, negative: &str) -> Result<Self> {
        Self::new(parse_word_list(positive), parse_word_list(negative))
    }

    pub fn from_files(positive: impl AsRef<Path>, negative: impl AsRef<Path>) -> Result<Self> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p, e));
        Self::parse(&read(positive.as_ref())?, &read(negative.as_ref())?)
    }

    pub fn bundled() -> Self {
        Self::parse(POSITIVE_WORDS, NEGATIVE_WORDS).expect("bundled lexicon is valid")
    }

    pub fn is_positive(&self, word: &str) -> bool {
        self.positive.contains(word)
    }

    pub fn is_negative(&self, word: &str) -> bool {
        self.negative.contains(word)
    }

    /// +1, -1 or 0.
    pub fn polarity(&self, word: &str) -> i64 {
        if self.is_positive(word) {
            1
        } else if self.is_negative(word) {
            -1
        } else {
            0
        }
    }

    pub fn positive_words(&self) -> impl Iterator<Item = &str> {
        self.positive.iter().map(String::as_str)
    }

    pub fn negative_words(&self) -> impl Iterator<Item = &str> {
        self.negative.iter().map(String::as_str)
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::bundled()
    }
}

/// Positive minus negative word count over every whitespace-separated word of
/// every phrase, with multiplicity.
pub fn score_terms<S: AsRef<str>>(terms: &[S], lex: &Lexicon) -> i64 {
    terms
        .iter()
        .flat_map(|t| t.as_ref().split_whitespace())
        .map(|w| lex.polarity(&w.to_lowercase()))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SentimentTag {
    Positive,
    Negative,
    Neutral,
}

impl SentimentTag {
    pub fn of(score: i64) -> Self {
        match score.signum() {
            1 => Self::Positive,
            -1 => Self::Negative,
            _ => Self::Neutral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailySentiment {
    pub date: NaiveDate,
    pub score: i64,
    pub article_count: usize,
    pub tag: SentimentTag,
}

impl DailySentiment {
    pub fn new(date: NaiveDate, score: i64, article_count: usize) -> Self {
        Self {
            date,
            score,
            article_count,
            tag: SentimentTag::of(score),
        }
    }
}

/// What a day's sentiment is counted over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentMode {
    /// The day's selected TF-IDF terms.
    #[default]
    Terms,
    /// Every lemma of every selected article.
    Document,
}

pub fn daily_sentiment(
    day: &DayDocs,
    terms: &[TermScore],
    lex: &Lexicon,
    mode: SentimentMode,
) -> DailySentiment {
    let score = match mode {
        SentimentMode::Terms => {
            let phrases: Vec<&str> = terms.iter().map(|t| t.term.as_str()).collect();
            score_terms(&phrases, lex)
        }
        SentimentMode::Document => day
            .selected
            .iter()
            .map(|doc| score_terms(&doc.lemmas, lex))
            .sum(),
    };
    DailySentiment::new(day.date, score, day.selected.len())
}

/// How the change rate treats a zero previous value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeRateMode {
    /// `100 (cur - prev) / |prev|`, with the denominator replaced by 1 when
    /// `prev` is zero.
    #[default]
    Fallback,
    /// `100 (cur - prev) / prev`; a zero `prev` is an error.
    Literal,
}

/// Percent change with the zero-denominator fallback.
pub fn change_rate(prev: f64, cur: f64) -> f64 {
    let denom = if prev == 0.0 { 1.0 } else { prev.abs() };
    100.0 * (cur - prev) / denom
}

pub fn change_rate_with(prev: f64, cur: f64, mode: ChangeRateMode) -> Result<f64> {
    match mode {
        ChangeRateMode::Fallback => Ok(change_rate(prev, cur)),
        ChangeRateMode::Literal if prev == 0.0 => Err(Error::ZeroBase(format!(
            "change rate from a zero value (cur = {cur})"
        ))),
        ChangeRateMode::Literal => Ok(100.0 * (cur - prev) / prev),
    }
}

/// Day-over-day change rates; one shorter than the input.
pub fn change_rates(values: &[f64], mode: ChangeRateMode) -> Result<Vec<f64>> {
    values
        .windows(2)
        .map(|w| change_rate_with(w[0], w[1], mode))
        .collect()
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Maps to `[-1, 1]` by min-max over the whole series; a constant series maps
/// to zeros.
pub fn normalize_series(values: &[f64]) -> Vec<f64> {
    normalize_fitted(values, values.len())
}

/// Min-max normalization fit on the first `fit_len` values only, clamped to
/// `[-1, 1]` so later values outside the fitted range stay in bounds.
pub fn normalize_fitted(values: &[f64], fit_len: usize) -> Vec<f64> {
    let fit = &values[..fit_len.clamp(1.min(values.len()), values.len())];
    let (lo, hi) = min_max(fit);
    if !(hi > lo) {
        return vec![0.0; values.len()];
    }
    values
        .iter()
        .map(|&x| (2.0 * (x - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0))
        .collect()
}

/// Maps to `[0, 1]` by min-max; a constant series maps to 0.5.
pub fn scale_unit(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = min_max(values);
    if !(hi > lo) {
        return vec![0.5; values.len()];
    }
    values.iter().map(|&x| (x - lo) / (hi - lo)).collect()
}

/// Which part of a series the `[-1, 1]` normalization is fit on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeScope {
    #[default]
    Full,
    /// Fit on the leading fraction of the series (the training prefix).
    TrainPrefix(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub date: NaiveDate,
    pub raw: f64,
    pub change_rate: f64,
    pub normalized: f64,
}

/// Change rate and normalized change rate for every day but the first.
pub fn series_points(
    dates: &[NaiveDate],
    raw: &[f64],
    mode: ChangeRateMode,
    scope: NormalizeScope,
) -> Result<Vec<SeriesPoint>> {
    if dates.len() != raw.len() {
        return Err(Error::Misaligned(format!(
            "{} dates for {} values",
            dates.len(),
            raw.len()
        )));
    }
    if raw.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: raw.len(),
        });
    }
    let rates = change_rates(raw, mode)?;
    let normalized = match scope {
        NormalizeScope::Full => normalize_series(&rates),
        NormalizeScope::TrainPrefix(frac) => {
            normalize_fitted(&rates, (frac * rates.len() as f64).floor() as usize)
        }
    };
    Ok(dates[1..]
        .iter()
        .zip(&raw[1..])
        .zip(rates.into_iter().zip(normalized))
        .map(|((&date, &raw), (change_rate, normalized))| SeriesPoint {
            date,
            raw,
            change_rate,
            normalized,
        })
        .collect())
}
