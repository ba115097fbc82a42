//! Lag-windowed supervised datasets in both causal directions.

use std::fmt;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sentiment::{
    scale_unit, series_points, ChangeRateMode, DailySentiment, NormalizeScope, SeriesPoint,
};

/// Days before the base date plus an optional day after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindowSpec {
    pub past_days: usize,
    pub include_future_day: bool,
}

impl WindowSpec {
    pub const fn new(past_days: usize, include_future_day: bool) -> Self {
        Self {
            past_days,
            include_future_day,
        }
    }

    pub const BASE_ONLY: WindowSpec = WindowSpec::new(0, false);

    /// The three lagged ranges followed by base-date-only.
    pub fn standard_grid() -> Vec<WindowSpec> {
        vec![
            Self::new(5, true),
            Self::new(6, true),
            Self::new(7, true),
            Self::BASE_ONLY,
        ]
    }

    pub fn future_days(&self) -> usize {
        usize::from(self.include_future_day)
    }

    /// Number of days the window covers.
    pub fn span(&self) -> usize {
        self.past_days + 1 + self.future_days()
    }

    pub fn n_features(&self, include_aux: bool) -> usize {
        self.span() * if include_aux { 2 } else { 1 }
    }

    /// Short label such as `past5+base+future1` or `base`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.past_days > 0 {
            parts.push(format!("past{}", self.past_days));
        }
        parts.push("base".to_string());
        if self.include_future_day {
            parts.push("future1".to_string());
        }
        parts.join("+")
    }

    pub fn parse_label(s: &str) -> Option<WindowSpec> {
        let mut past = 0;
        let mut future = false;
        let mut base = false;
        for part in s.trim().split('+') {
            if part == "base" {
                base = true;
            } else if part == "future1" {
                future = true;
            } else if let Some(n) = part.strip_prefix("past") {
                past = n.parse().ok()?;
            } else {
                return None;
            }
        }
        base.then_some(Self::new(past, future))
    }
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Direction {
    /// Sentiment change rate and article count predict the stock change rate.
    ArticleToStock,
    /// Stock change rate and volume predict the sentiment change rate.
    StockToArticle,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::ArticleToStock, Direction::StockToArticle];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ArticleToStock => "articleToStock",
            Self::StockToArticle => "stockToArticle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Regression,
    Classification,
}

impl TaskKind {
    pub const ALL: [TaskKind; 2] = [TaskKind::Regression, TaskKind::Classification];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Regression => "regression",
            Self::Classification => "classification",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What to do with a base date whose target change rate is exactly zero
/// in a classification dataset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroLabel {
    #[default]
    Positive,
    Drop,
}

/// -1 below zero, +1 otherwise.
pub fn labelize(rate: f64) -> f64 {
    if rate < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub base_date: NaiveDate,
    pub x: Vec<f64>,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedDataset {
    pub instances: Vec<Instance>,
    pub split_index: usize,
    pub feature_names: Vec<String>,
}

/// `floor(0.66 n)`, computed in integers.
pub fn split_point(n: usize) -> usize {
    n * 66 / 100
}

impl SupervisedDataset {
    pub fn new(instances: Vec<Instance>, feature_names: Vec<String>) -> Self {
        Self {
            split_index: split_point(instances.len()),
            instances,
            feature_names,
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Writes `base_date,f1..fk,target`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["base_date".to_string()];
        header.extend((1..=self.n_features()).map(|i| format!("f{i}")));
        header.push("target".to_string());
        w.write_record(&header).map_err(csv_err)?;
        for inst in &self.instances {
            let mut row = vec![inst.base_date.to_string()];
            row.extend(inst.x.iter().map(f64::to_string));
            row.push(inst.y.to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Other(e.to_string()))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Other(format!("csv: {e}"))
}

/// Chronological train/test views: first `floor(0.66 n)` instances train.
pub fn split(ds: &SupervisedDataset) -> Result<(&[Instance], &[Instance])> {
    if ds.len() < 3 {
        return Err(Error::SeriesTooShort {
            needed: 3,
            got: ds.len(),
        });
    }
    Ok(ds.instances.split_at(split_point(ds.len())))
}

/// One trading day of a market after ingest and sentiment scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketDay {
    pub date: NaiveDate,
    pub close: f64,
    pub volume: f64,
    pub sentiment: i64,
    pub article_count: usize,
}

/// Daily closes, volumes, sentiment scores and article counts of one market
/// on a shared trading-date axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSeries {
    pub market: String,
    pub days: Vec<MarketDay>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SeriesRow {
    date: NaiveDate,
    close: f64,
    volume: f64,
    sentiment: i64,
    article_count: usize,
}

impl MarketSeries {
    /// Pairs stock closes/volumes with daily sentiment on identical dates.
    pub fn from_parts(
        market: impl Into<String>,
        stock: &[(NaiveDate, f64, f64)],
        sentiment: &[DailySentiment],
    ) -> Result<Self> {
        if stock.len() != sentiment.len()
            || stock.iter().zip(sentiment).any(|(s, d)| s.0 != d.date)
        {
            return Err(Error::Misaligned(
                "stock and sentiment series cover different dates".into(),
            ));
        }
        Ok(Self {
            market: market.into(),
            days: stock
                .iter()
                .zip(sentiment)
                .map(|(&(date, close, volume), s)| MarketDay {
                    date,
                    close,
                    volume,
                    sentiment: s.score,
                    article_count: s.article_count,
                })
                .collect(),
        })
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.days.iter().map(|d| d.date).collect()
    }

    /// CSV with header `date,close,volume,sentiment,article_count`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for d in &self.days {
            w.serialize(SeriesRow {
                date: d.date,
                close: d.close,
                volume: d.volume,
                sentiment: d.sentiment,
                article_count: d.article_count,
            })
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Other(e.to_string()))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load_csv(path: impl AsRef<Path>, market: impl Into<String>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Other(format!("{}: {other:?}", path.display())),
        })?;
        let mut days = Vec::new();
        for (i, row) in r.deserialize::<SeriesRow>().enumerate() {
            let row = row.map_err(|e| Error::Malformed {
                line: i + 2,
                message: e.to_string(),
            })?;
            if let Some(prev) = days.last().map(|d: &MarketDay| d.date) {
                if row.date <= prev {
                    return Err(Error::Malformed {
                        line: i + 2,
                        message: format!("date {} not after {prev}", row.date),
                    });
                }
            }
            days.push(MarketDay {
                date: row.date,
                close: row.close,
                volume: row.volume,
                sentiment: row.sentiment,
                article_count: row.article_count,
            });
        }
        Ok(Self {
            market: market.into(),
            days,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetOptions {
    pub change_rate: ChangeRateMode,
    pub normalize: NormalizeScope,
    pub zero_label: ZeroLabel,
}

/// Transformed series ready for windowing. All vectors share `stock`'s dates,
/// which start at the second trading day (the first has no change rate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInputs {
    pub stock: Vec<SeriesPoint>,
    pub sentiment: Vec<SeriesPoint>,
    /// Trading volume scaled to `[0, 1]`.
    pub volume: Vec<f64>,
    /// Article count scaled to `[0, 1]`.
    pub articles: Vec<f64>,
}

impl DatasetInputs {
    pub fn from_series(series: &MarketSeries, opts: &DatasetOptions) -> Result<Self> {
        let dates = series.dates();
        let closes: Vec<f64> = series.days.iter().map(|d| d.close).collect();
        let scores: Vec<f64> = series.days.iter().map(|d| d.sentiment as f64).collect();
        let stock = series_points(&dates, &closes, opts.change_rate, opts.normalize)?;
        let sentiment = series_points(&dates, &scores, opts.change_rate, opts.normalize)?;
        let volume: Vec<f64> = series.days[1..].iter().map(|d| d.volume).collect();
        let articles: Vec<f64> = series.days[1..].iter().map(|d| d.article_count as f64).collect();
        Ok(Self {
            stock,
            sentiment,
            volume: scale_unit(&volume),
            articles: scale_unit(&articles),
        })
    }

    pub fn len(&self) -> usize {
        self.stock.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stock.is_empty()
    }
}

/// One instance per base date whose whole window exists.
///
/// Features run day by day over the window: the driving series' normalized
/// change rate, then (with `include_aux`) its scaled volume or article count.
/// Regression targets are the target series' normalized change rate at the
/// base date; classification targets are the sign label of its raw change rate.
pub fn build_dataset(
    inputs: &DatasetInputs,
    dir: Direction,
    task: TaskKind,
    win: WindowSpec,
    include_aux: bool,
    zero_label: ZeroLabel,
) -> Result<SupervisedDataset> {
    let n = inputs.stock.len();
    if inputs.sentiment.len() != n
        || inputs.volume.len() != n
        || inputs.articles.len() != n
        || inputs
            .stock
            .iter()
            .zip(&inputs.sentiment)
            .any(|(a, b)| a.date != b.date)
    {
        return Err(Error::Misaligned(
            "stock and sentiment points are not on the same date axis".into(),
        ));
    }
    if n < win.span() {
        return Err(Error::SeriesTooShort {
            needed: win.span(),
            got: n,
        });
    }
    let (driver, aux, target, names) = match dir {
        Direction::ArticleToStock => (
            &inputs.sentiment,
            &inputs.articles,
            &inputs.stock,
            ("sentiment", "articles"),
        ),
        Direction::StockToArticle => (&inputs.stock, &inputs.volume, &inputs.sentiment, ("stock", "volume")),
    };

    let offsets: Vec<isize> = (-(win.past_days as isize)..=win.future_days() as isize).collect();
    let mut feature_names = Vec::with_capacity(win.n_features(include_aux));
    for &o in &offsets {
        let at = match o {
            0 => "t".to_string(),
            o => format!("t{o:+}"),
        };
        feature_names.push(format!("{}[{at}]", names.0));
        if include_aux {
            feature_names.push(format!("{}[{at}]", names.1));
        }
    }

    let mut instances = Vec::with_capacity(n + 1 - win.span());
    for t in win.past_days..n - win.future_days() {
        let point = &target[t];
        let y = match task {
            TaskKind::Regression => point.normalized,
            TaskKind::Classification => {
                if point.change_rate == 0.0 && zero_label == ZeroLabel::Drop {
                    continue;
                }
                labelize(point.change_rate)
            }
        };
        let mut x = Vec::with_capacity(feature_names.len());
        for &o in &offsets {
            let i = (t as isize + o) as usize;
            x.push(driver[i].normalized);
            if include_aux {
                x.push(aux[i]);
            }
        }
        instances.push(Instance {
            base_date: point.date,
            x,
            y,
        });
    }
    Ok(SupervisedDataset::new(instances, feature_names))
}
