//! TOML run configuration.
//!
//! Relative paths are resolved against the directory holding the config
//! file. Validation checks value ranges and that every referenced input
//! file exists; all problems are reported together.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetOptions;
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::harness::{GridSpec, SynthParams};
use crate::ingest::{MarketProfile, WeekendPolicy};
use crate::models::Hyperparams;
use crate::sentiment::{NormalizeScope, SentimentMode};
use crate::textprep::PrepConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    /// Machine tag; also the output subdirectory and report row label.
    pub name: String,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub shift_days: u32,
    #[serde(default = "one")]
    pub min_keyword_count: usize,
    /// News JSONL files.
    #[serde(default)]
    pub news: Vec<PathBuf>,
    /// Stock CSV files; several are averaged into a composite.
    #[serde(default)]
    pub stock: Vec<PathBuf>,
    /// A ready-made `date,close,volume,sentiment,article_count` series.
    /// Replaces `news` and `stock` when given.
    #[serde(default)]
    pub series: Option<PathBuf>,
}

fn one() -> usize {
    1
}

impl MarketConfig {
    pub fn profile(&self) -> MarketProfile {
        MarketProfile {
            tag: self.name.clone(),
            label: self.label.clone().unwrap_or_else(|| self.name.clone()),
            aliases: self.aliases.clone(),
            shift_days: self.shift_days,
            min_keyword_count: self.min_keyword_count,
        }
    }
}

/// Optional replacements for the bundled linguistic resources.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Resources {
    pub stopwords: Option<PathBuf>,
    /// word2vec text or binary file; without it no synonyms are merged.
    pub embeddings: Option<PathBuf>,
    pub positive_words: Option<PathBuf>,
    pub negative_words: Option<PathBuf>,
    pub tagger_lexicon: Option<PathBuf>,
    pub lemma_exceptions: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub weekend_policy: WeekendPolicy,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SentimentConfig {
    pub mode: SentimentMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_days: usize,
    pub lag: usize,
    pub coupling: f64,
    pub noise_sd: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let p = SynthParams::default();
        Self {
            n_days: p.n_days,
            lag: p.lag,
            coupling: p.coupling,
            noise_sd: p.noise_sd,
        }
    }
}

impl SynthConfig {
    pub fn params(&self, seed: u64) -> SynthParams {
        SynthParams {
            seed,
            n_days: self.n_days,
            lag: self.lag,
            coupling: self.coupling,
            noise_sd: self.noise_sd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    /// Also run the grid without auxiliary features and report both arms.
    pub ablation: bool,
    /// Write per-market normalized stock/sentiment curves.
    pub plots: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            ablation: false,
            plots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "one_u64")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub markets: Vec<MarketConfig>,
    #[serde(default)]
    pub resources: Resources,
    #[serde(default)]
    pub ingest: IngestConfig,
    #[serde(default)]
    pub prep: PrepConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub sentiment: SentimentConfig,
    #[serde(default)]
    pub dataset: DatasetOptions,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub models: Hyperparams,
    #[serde(default)]
    pub synth: SynthConfig,
    #[serde(default)]
    pub report: ReportConfig,
}

fn one_u64() -> u64 {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read, resolve relative paths against the file's directory, and validate.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out_dir);
        for m in &mut self.markets {
            m.news.iter_mut().for_each(fix);
            m.stock.iter_mut().for_each(fix);
            m.series.iter_mut().for_each(fix);
        }
        let r = &mut self.resources;
        for p in [
            &mut r.stopwords,
            &mut r.embeddings,
            &mut r.positive_words,
            &mut r.negative_words,
            &mut r.tagger_lexicon,
            &mut r.lemma_exceptions,
        ] {
            p.iter_mut().for_each(fix);
        }
    }

    /// Every problem found, one diagnostic per line.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut need_file = |field: String, p: &Path| {
            if !p.is_file() {
                out.push(format!("{field}: file not found: {}", p.display()));
            }
        };
        for (i, m) in self.markets.iter().enumerate() {
            match &m.series {
                Some(p) => need_file(format!("markets[{i}].series"), p),
                None => {
                    for p in &m.news {
                        need_file(format!("markets[{i}].news"), p);
                    }
                    for p in &m.stock {
                        need_file(format!("markets[{i}].stock"), p);
                    }
                }
            }
        }
        let r = &self.resources;
        for (name, p) in [
            ("stopwords", &r.stopwords),
            ("embeddings", &r.embeddings),
            ("positive_words", &r.positive_words),
            ("negative_words", &r.negative_words),
            ("tagger_lexicon", &r.tagger_lexicon),
            ("lemma_exceptions", &r.lemma_exceptions),
        ] {
            if let Some(p) = p {
                need_file(format!("resources.{name}"), p);
            }
        }

        let mut names = std::collections::HashSet::new();
        for (i, m) in self.markets.iter().enumerate() {
            let valid_name = !m.name.is_empty()
                && m.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
            if !valid_name {
                out.push(format!(
                    "markets[{i}].name: {:?} must be non-empty ASCII letters, digits, '-' or '_'",
                    m.name
                ));
            }
            if !names.insert(m.name.as_str()) {
                out.push(format!("markets[{i}].name: duplicate market {:?}", m.name));
            }
            if m.series.is_none() {
                if m.stock.is_empty() {
                    out.push(format!("markets[{i}].stock: at least one stock file is required"));
                }
                if m.news.is_empty() {
                    out.push(format!("markets[{i}].news: at least one news file is required"));
                }
                if m.aliases.is_empty() {
                    out.push(format!("markets[{i}].aliases: at least one keyword alias is required"));
                }
            }
        }

        let p = &self.prep;
        if !(0.0..=1.0).contains(&p.dedup_threshold) {
            out.push(format!("prep.dedup_threshold: {} not in [0, 1]", p.dedup_threshold));
        }
        if p.min_chars > p.max_chars {
            out.push(format!(
                "prep.min_chars: {} exceeds prep.max_chars {}",
                p.min_chars, p.max_chars
            ));
        }
        if p.top_k == 0 {
            out.push("prep.top_k: must be >= 1".into());
        }
        let f = &self.features;
        if !(f.synonym_tau > 0.0 && f.synonym_tau <= 1.0) {
            out.push(format!("features.synonym_tau: {} not in (0, 1]", f.synonym_tau));
        }
        if f.max_phrase_len == 0 {
            out.push("features.max_phrase_len: must be >= 1".into());
        }
        if f.terms_per_day == 0 {
            out.push("features.terms_per_day: must be >= 1".into());
        }
        if let NormalizeScope::TrainPrefix(frac) = self.dataset.normalize {
            if !(frac > 0.0 && frac <= 1.0) {
                out.push(format!("dataset.normalize: train prefix {frac} not in (0, 1]"));
            }
        }
        if let Err(e) = self.grid.validate() {
            out.push(e.to_string());
        }
        if let Err(e) = self.models.validate() {
            out.push(format!("models: {e}"));
        }
        let s = &self.synth;
        if s.n_days <= s.lag + 10 {
            out.push(format!("synth.n_days: {} must exceed synth.lag + 10", s.n_days));
        }
        if !(s.noise_sd >= 0.0 && s.noise_sd.is_finite() && s.coupling.is_finite()) {
            out.push("synth: coupling must be finite and noise_sd finite and >= 0".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("\n")))
        }
    }
}
