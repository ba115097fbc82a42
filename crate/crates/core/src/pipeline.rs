//! Stage-wise execution of a [`RunConfig`].
//!
//! Every stage reads and writes plain files under the output directory, so a
//! full run is exactly the stages executed in order:
//!
//! ```text
//! <out>/<market>/articles.jsonl   ingest    shifted, validated articles
//! <out>/<market>/stock.csv        ingest    (composite) OHLCV
//! <out>/<market>/clean.jsonl      prep      one selected-day record per line
//! <out>/<market>/terms.csv        features  term,date,tfidf,freq
//! <out>/<market>/series.csv       sentiment date,close,volume,sentiment,article_count
//! <out>/<market>/datasets/*.csv   dataset   one file per task/direction/window
//! <out>/grid.json                 train     every cell of the grid
//! <out>/report.{txt,csv}          report    plus cells.csv, plot.csv, ablation.txt
//! <out>/synthetic/series.csv      synth
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::config::{MarketConfig, RunConfig};
use crate::dataset::{build_dataset, DatasetInputs, MarketSeries};
use crate::error::{Error, Result};
use crate::features::{load_embeddings, select_day_terms, StopList, TermScore};
use crate::harness::{ablation, gen_synthetic, plot_csv, run_grid, Ablation, ReportTable};
use crate::ingest::{align, composite_close, load_articles, load_stock_csv, write_stock_csv, Article};
use crate::sentiment::{daily_sentiment, Lexicon};
use crate::textprep::{prepare_days, DayDocs, Lemmatizer, LexiconTagger, TextTools};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Ingest,
    Prep,
    Features,
    Sentiment,
    Dataset,
    Train,
    Report,
    Synth,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Prep,
        Stage::Features,
        Stage::Sentiment,
        Stage::Dataset,
        Stage::Train,
        Stage::Report,
        Stage::Synth,
    ];

    /// Stages of a full run, in order.
    pub const RUN: [Stage; 7] = [
        Stage::Ingest,
        Stage::Prep,
        Stage::Features,
        Stage::Sentiment,
        Stage::Dataset,
        Stage::Train,
        Stage::Report,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Prep => "prep",
            Stage::Features => "features",
            Stage::Sentiment => "sentiment",
            Stage::Dataset => "dataset",
            Stage::Train => "train",
            Stage::Report => "report",
            Stage::Synth => "synth",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.as_str() == s)
    }

    fn needs_markets(&self) -> bool {
        !matches!(self, Stage::Synth)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A pipeline error tagged with the stage it came from.
#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {} failed: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub struct Pipeline {
    cfg: RunConfig,
}

impl Pipeline {
    /// `cfg` should already be validated and have absolute or cwd-relative paths.
    pub fn new(cfg: RunConfig) -> Self {
        Self { cfg }
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn out_dir(&self) -> &Path {
        &self.cfg.out_dir
    }

    fn market_dir(&self, name: &str) -> Result<PathBuf> {
        let dir = self.cfg.out_dir.join(name);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(dir)
    }

    fn news_markets(&self) -> impl Iterator<Item = &MarketConfig> {
        self.cfg.markets.iter().filter(|m| m.series.is_none())
    }

    /// Runs the full pipeline and returns the report table.
    pub fn run(&self) -> std::result::Result<ReportTable, StageError> {
        for stage in Stage::RUN {
            self.run_stage(stage)?;
        }
        self.load_table().map_err(|error| StageError {
            stage: Stage::Report,
            error,
        })
    }

    pub fn run_stage(&self, stage: Stage) -> std::result::Result<(), StageError> {
        log::info!("stage {stage}");
        let tag = |error| StageError { stage, error };
        if stage.needs_markets() && self.cfg.markets.is_empty() {
            return Err(tag(Error::Config("no [[markets]] configured".into())));
        }
        std::fs::create_dir_all(&self.cfg.out_dir)
            .map_err(|e| tag(Error::io(&self.cfg.out_dir, e)))?;
        match stage {
            Stage::Ingest => self.ingest(),
            Stage::Prep => self.prep(),
            Stage::Features => self.features(),
            Stage::Sentiment => self.sentiment(),
            Stage::Dataset => self.dataset(),
            Stage::Train => self.train(),
            Stage::Report => self.report(),
            Stage::Synth => self.synth().map(|_| ()),
        }
        .map_err(tag)
    }

    fn ingest(&self) -> Result<()> {
        for m in &self.cfg.markets {
            let dir = self.market_dir(&m.name)?;
            if let Some(series) = &m.series {
                MarketSeries::load_csv(series, &m.name)?.save_csv(dir.join("series.csv"))?;
                continue;
            }
            let profile = m.profile();
            let stocks = m
                .stock
                .iter()
                .map(|p| load_stock_csv(p, &m.name))
                .collect::<Result<Vec<_>>>()?;
            write_stock_csv(dir.join("stock.csv"), &composite_close(&stocks)?)?;
            let mut articles = Vec::new();
            for p in &m.news {
                articles.extend(load_articles(p, &profile)?);
            }
            articles.sort_by(|a, b| (a.published_date, &a.id).cmp(&(b.published_date, &b.id)));
            articles.dedup_by(|a, b| a.id == b.id);
            write_jsonl(&dir.join("articles.jsonl"), &articles)?;
            log::info!("{}: {} articles, {} stock files", m.name, articles.len(), stocks.len());
        }
        Ok(())
    }

    fn text_tools(&self) -> Result<TextTools> {
        let r = &self.cfg.resources;
        let mut tools = TextTools::default();
        if let Some(p) = &r.tagger_lexicon {
            tools.tagger = Box::new(LexiconTagger::from_file(p)?);
        }
        if let Some(p) = &r.lemma_exceptions {
            tools.lemmatizer = Lemmatizer::from_file(p)?;
        }
        Ok(tools)
    }

    fn prep(&self) -> Result<()> {
        let tools = self.text_tools()?;
        for m in self.news_markets() {
            let dir = self.market_dir(&m.name)?;
            let stock = load_stock_csv(dir.join("stock.csv"), &m.name)?;
            let articles: Vec<Article> = read_jsonl(&dir.join("articles.jsonl"))?;
            let aligned = align(&stock, &articles, self.cfg.ingest.weekend_policy)?;
            let days: Vec<(NaiveDate, Vec<Article>)> =
                aligned.into_iter().map(|d| (d.date, d.articles)).collect();
            let docs = prepare_days(&days, &m.aliases, m.min_keyword_count, &self.cfg.prep, &tools)?;
            write_jsonl(&dir.join("clean.jsonl"), &docs)?;
        }
        Ok(())
    }

    fn features(&self) -> Result<()> {
        let r = &self.cfg.resources;
        let stoplist = match &r.stopwords {
            Some(p) => StopList::from_file(p)?,
            None => StopList::bundled(),
        };
        let table = r.embeddings.as_ref().map(load_embeddings).transpose()?;
        for m in self.news_markets() {
            let dir = self.market_dir(&m.name)?;
            let docs: Vec<DayDocs> = read_jsonl(&dir.join("clean.jsonl"))?;
            let days = select_day_terms(&docs, &stoplist, table.as_ref(), &self.cfg.features)?;
            let path = dir.join("terms.csv");
            let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
            for t in days.iter().flat_map(|d| &d.terms) {
                w.serialize(t).map_err(|e| csv_err(&path, e))?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    fn lexicon(&self) -> Result<Lexicon> {
        let r = &self.cfg.resources;
        match (&r.positive_words, &r.negative_words) {
            (None, None) => Ok(Lexicon::bundled()),
            (Some(p), Some(n)) => Lexicon::from_files(p, n),
            _ => Err(Error::Config(
                "resources.positive_words and resources.negative_words must be given together".into(),
            )),
        }
    }

    fn sentiment(&self) -> Result<()> {
        let lex = self.lexicon()?;
        for m in self.news_markets() {
            let dir = self.market_dir(&m.name)?;
            let docs: Vec<DayDocs> = read_jsonl(&dir.join("clean.jsonl"))?;
            let terms = read_terms(&dir.join("terms.csv"))?;
            let daily: Vec<_> = docs
                .iter()
                .map(|d| {
                    let t = terms.get(&d.date).map_or(&[][..], Vec::as_slice);
                    daily_sentiment(d, t, &lex, self.cfg.sentiment.mode)
                })
                .collect();
            let stock = load_stock_csv(dir.join("stock.csv"), &m.name)?;
            let bars: Vec<(NaiveDate, f64, f64)> = stock
                .bars
                .iter()
                .map(|b| (b.date, b.close, b.volume as f64))
                .collect();
            MarketSeries::from_parts(&m.name, &bars, &daily)?.save_csv(dir.join("series.csv"))?;
        }
        Ok(())
    }

    fn load_markets(&self) -> Result<Vec<MarketSeries>> {
        self.cfg
            .markets
            .iter()
            .map(|m| MarketSeries::load_csv(self.cfg.out_dir.join(&m.name).join("series.csv"), &m.name))
            .collect()
    }

    fn dataset(&self) -> Result<()> {
        let g = &self.cfg.grid;
        for series in self.load_markets()? {
            let dir = self.market_dir(&series.market)?.join("datasets");
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let inputs = DatasetInputs::from_series(&series, &self.cfg.dataset)?;
            for &task in &g.tasks {
                for &direction in &g.directions {
                    for &window in &g.windows {
                        let name = dataset_file_name(task.as_str(), direction.as_str(), &window.label());
                        match build_dataset(&inputs, direction, task, window, g.include_aux, self.cfg.dataset.zero_label) {
                            Ok(ds) => ds.save_csv(dir.join(name))?,
                            // Too-short series surface as ERROR cells in the grid.
                            Err(e @ Error::SeriesTooShort { .. }) => {
                                log::warn!("{}: skipping {name}: {e}", series.market)
                            }
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn train(&self) -> Result<()> {
        let markets = self.load_markets()?;
        let (hp, opts, seed) = (&self.cfg.models, &self.cfg.dataset, self.cfg.seed);
        let table = run_grid(&markets, &self.cfg.grid, hp, opts, seed)?;
        write_json(&self.cfg.out_dir.join("grid.json"), &table)?;
        if self.cfg.report.ablation {
            let ab = ablation(&markets, &self.cfg.grid, hp, opts, seed)?;
            write_json(&self.cfg.out_dir.join("ablation.json"), &ab)?;
        }
        Ok(())
    }

    pub fn load_table(&self) -> Result<ReportTable> {
        read_json(&self.cfg.out_dir.join("grid.json"))
    }

    fn report(&self) -> Result<()> {
        let out = &self.cfg.out_dir;
        let table = self.load_table()?;
        write_text(&out.join("report.txt"), &table.render_text())?;
        write_text(&out.join("report.csv"), &table.render_csv())?;
        write_text(&out.join("cells.csv"), &table.render_cells_csv())?;
        if self.cfg.report.ablation {
            let ab: Ablation = read_json(&out.join("ablation.json"))?;
            write_text(&out.join("ablation.txt"), &ab.render_text())?;
        }
        if self.cfg.report.plots {
            for series in self.load_markets()? {
                let dir = self.market_dir(&series.market)?;
                write_text(&dir.join("plot.csv"), &plot_csv(&series, &self.cfg.dataset)?)?;
            }
        }
        Ok(())
    }

    /// Writes `<out>/synthetic/series.csv` and returns its path.
    pub fn synth(&self) -> Result<PathBuf> {
        let series = gen_synthetic(&self.cfg.synth.params(self.cfg.seed))?;
        let path = self.market_dir(&series.market)?.join("series.csv");
        series.save_csv(&path)?;
        Ok(path)
    }
}

pub fn dataset_file_name(task: &str, direction: &str, window: &str) -> String {
    format!("{task}_{direction}_{window}.csv")
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Other(format!("{}: {other:?}", path.display())),
    }
}

fn create(path: &Path) -> Result<BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Other(e.to_string()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::Malformed {
        line: e.line(),
        message: format!("{}: {e}", path.display()),
    })
}

fn write_jsonl<T: serde::Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| Error::Other(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: i + 1,
            message: format!("{}: {e}", path.display()),
        })?);
    }
    Ok(out)
}

fn read_terms(path: &Path) -> Result<BTreeMap<NaiveDate, Vec<TermScore>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut out: BTreeMap<NaiveDate, Vec<TermScore>> = BTreeMap::new();
    for (i, row) in r.deserialize::<TermScore>().enumerate() {
        let t = row.map_err(|e| Error::Malformed {
            line: i + 2,
            message: format!("{}: {e}", path.display()),
        })?;
        out.entry(t.date).or_default().push(t);
    }
    Ok(out)
}
