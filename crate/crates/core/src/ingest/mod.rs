//! Loading, validation and calendar alignment of news articles and price series.
//!
//! News arrive as JSONL (one article per line), prices as an OHLCV CSV. Each
//! market carries a day shift applied to article publication dates so that
//! news line up with the trading day they can influence.

mod fetch;

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use fetch::{
    FixtureFetcher, HttpResponse, HttpTransport, NewsFetcher, NewsQuery, NEWS_API_KEY_ENV,
};
#[cfg(feature = "http")]
pub use fetch::{NewsApiFetcher, UreqTransport};

/// Per-market settings shared by ingest and text preprocessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketProfile {
    /// Short machine tag, e.g. `nkorea`.
    pub tag: String,
    /// Display label used in reports, e.g. `NKorea`.
    pub label: String,
    /// Keyword aliases counted when filtering articles.
    pub aliases: Vec<String>,
    /// Days added to an article's publication date to get its effective date.
    pub shift_days: u32,
    /// Minimum alias occurrences for an article to be kept.
    pub min_keyword_count: usize,
}

impl MarketProfile {
    /// North Korea: US news are a day behind the Seoul session.
    pub fn nkorea() -> Self {
        Self {
            tag: "nkorea".into(),
            label: "NKorea".into(),
            aliases: vec!["North Korea".into(), "N.Korea".into(), "NKorea".into()],
            shift_days: 1,
            min_keyword_count: 1,
        }
    }

    pub fn tesla() -> Self {
        Self {
            tag: "tesla".into(),
            label: "Tesla".into(),
            aliases: vec!["Tesla".into(), "Tsla".into()],
            shift_days: 0,
            min_keyword_count: 3,
        }
    }

    pub fn effective_date(&self, published: NaiveDate) -> NaiveDate {
        published
            .checked_add_days(Days::new(u64::from(self.shift_days)))
            .unwrap_or(NaiveDate::MAX)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub source: String,
    pub url: String,
    pub published_date: NaiveDate,
    pub title: String,
    pub body: String,
    pub market: String,
    pub effective_date: NaiveDate,
}

impl Article {
    /// Build a validated article. The id is derived from the URL.
    pub fn new(
        profile: &MarketProfile,
        source: impl Into<String>,
        url: impl Into<String>,
        published_date: NaiveDate,
        title: impl Into<String>,
        body: impl Into<String>,
    ) -> Result<Self> {
        let url = url.into();
        let title = title.into();
        let body = body.into().trim().to_string();
        if title.trim().is_empty() {
            return Err(Error::Validation(format!("article {url} has an empty title")));
        }
        if body.is_empty() {
            return Err(Error::Validation(format!("article {url} has an empty body")));
        }
        Ok(Self {
            id: article_id(&url),
            source: source.into(),
            url,
            published_date,
            title,
            body,
            market: profile.tag.clone(),
            effective_date: profile.effective_date(published_date),
        })
    }
}

/// Stable article identifier: the first 16 hex digits of SHA-256(url).
pub fn article_id(url: &str) -> String {
    let digest = Sha256::digest(url.as_bytes());
    hex::encode(&digest[..8])
}

/// Parse `YYYY-MM-DD`, or the date part of an RFC 3339 timestamp.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().or_else(|| {
        chrono::DateTime::parse_from_rfc3339(s)
            .ok()
            .map(|dt| dt.date_naive())
    })
}

const ARTICLE_FIELDS: [&str; 5] = ["source", "url", "published_date", "title", "body"];

/// Parse one JSONL article record. `line` is 1-based and only used in errors.
pub(crate) fn parse_article_line(
    text: &str,
    line: usize,
    profile: &MarketProfile,
) -> Result<Article> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Malformed {
        line,
        message: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| Error::Malformed {
        line,
        message: "expected a JSON object".into(),
    })?;
    if let Some(extra) = obj.keys().find(|k| !ARTICLE_FIELDS.contains(&k.as_str())) {
        return Err(Error::Malformed {
            line,
            message: format!("unexpected field {extra}"),
        });
    }
    let field = |name: &str| -> Result<&str> {
        match obj.get(name) {
            None | Some(serde_json::Value::Null) => Err(Error::MissingField {
                field: name.to_string(),
                line,
            }),
            Some(serde_json::Value::String(s)) => Ok(s.as_str()),
            Some(_) => Err(Error::Malformed {
                line,
                message: format!("field {name} must be a string"),
            }),
        }
    };
    let source = field("source")?;
    let url = field("url")?;
    let date_text = field("published_date")?;
    let title = field("title")?;
    let body = field("body")?;
    let published = parse_date(date_text).ok_or_else(|| Error::Malformed {
        line,
        message: format!("invalid published_date {date_text:?}"),
    })?;
    Article::new(profile, source, url, published, title, body).map_err(|e| Error::Malformed {
        line,
        message: e.to_string(),
    })
}

/// Load a news JSONL file. Blank lines are skipped.
pub fn load_articles(path: impl AsRef<Path>, profile: &MarketProfile) -> Result<Vec<Article>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let text = line.map_err(|e| Error::io(path, e))?;
        if text.trim().is_empty() {
            continue;
        }
        out.push(parse_article_line(&text, line_no, profile)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StockBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: u64,
}

impl StockBar {
    pub fn validate(&self) -> Result<()> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite()) {
            return Err(Error::Validation(format!("{}: non-finite price", self.date)));
        }
        if self.close <= 0.0 {
            return Err(Error::Validation(format!(
                "{}: close must be positive, got {}",
                self.date, self.close
            )));
        }
        if self.low > self.high {
            return Err(Error::Validation(format!(
                "{}: low {} above high {}",
                self.date, self.low, self.high
            )));
        }
        for (name, p) in [("open", self.open), ("close", self.close)] {
            if p < self.low || p > self.high {
                return Err(Error::Validation(format!(
                    "{}: {name} {p} outside [low {}, high {}]",
                    self.date, self.low, self.high
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockSeries {
    pub market: String,
    pub bars: Vec<StockBar>,
}

impl StockSeries {
    /// Sorts bars by date and rejects duplicates or invalid bars.
    pub fn new(market: impl Into<String>, mut bars: Vec<StockBar>) -> Result<Self> {
        for bar in &bars {
            bar.validate()?;
        }
        bars.sort_by_key(|b| b.date);
        if let Some(w) = bars.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(Error::Validation(format!("duplicate date {}", w[0].date)));
        }
        Ok(Self {
            market: market.into(),
            bars,
        })
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.bars.iter().map(|b| b.date)
    }
}

#[derive(Debug, Deserialize)]
struct StockRow {
    date: String,
    open: f64,
    high: f64,
    low: f64,
    close: f64,
    volume: u64,
}

const STOCK_HEADER: [&str; 6] = ["date", "open", "high", "low", "close", "volume"];

/// Load an OHLCV CSV with header `date,open,high,low,close,volume`.
pub fn load_stock_csv(path: impl AsRef<Path>, market: &str) -> Result<StockSeries> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(STOCK_HEADER.iter().copied()) {
        return Err(Error::Malformed {
            line: 1,
            message: format!(
                "expected header {}, got {}",
                STOCK_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut bars = Vec::new();
    for (idx, row) in reader.deserialize::<StockRow>().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| Error::Malformed {
            line,
            message: e.to_string(),
        })?;
        let date = parse_date(&row.date).ok_or_else(|| Error::Malformed {
            line,
            message: format!("invalid date {:?}", row.date),
        })?;
        bars.push(StockBar {
            date,
            open: row.open,
            high: row.high,
            low: row.low,
            close: row.close,
            volume: row.volume,
        });
    }
    StockSeries::new(market, bars)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Malformed {
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Write a series in the same CSV layout `load_stock_csv` reads.
pub fn write_stock_csv(path: impl AsRef<Path>, series: &StockSeries) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(STOCK_HEADER).map_err(|e| csv_error(path, e))?;
    for b in &series.bars {
        w.write_record([
            b.date.to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Equal-weight composite of several tickers over their common dates.
///
/// Prices are averaged; volumes are summed.
pub fn composite_close(series_list: &[StockSeries]) -> Result<StockSeries> {
    let first = series_list
        .first()
        .ok_or_else(|| Error::Validation("composite of zero series".into()))?;
    if series_list.len() == 1 {
        return Ok(first.clone());
    }
    let mut common: HashSet<NaiveDate> = first.dates().collect();
    for s in &series_list[1..] {
        let dates: HashSet<NaiveDate> = s.dates().collect();
        common.retain(|d| dates.contains(d));
    }
    if common.is_empty() {
        return Err(Error::Validation(
            "composite inputs share no common date".into(),
        ));
    }
    let k = series_list.len() as f64;
    let mut acc: BTreeMap<NaiveDate, StockBar> = BTreeMap::new();
    for s in series_list {
        for b in s.bars.iter().filter(|b| common.contains(&b.date)) {
            let e = acc.entry(b.date).or_insert(StockBar {
                date: b.date,
                open: 0.0,
                high: 0.0,
                low: 0.0,
                close: 0.0,
                volume: 0,
            });
            e.open += b.open;
            e.high += b.high;
            e.low += b.low;
            e.close += b.close;
            e.volume = e.volume.saturating_add(b.volume);
        }
    }
    let bars = acc
        .into_values()
        .map(|mut b| {
            b.open /= k;
            b.high /= k;
            b.low /= k;
            b.close /= k;
            b
        })
        .collect();
    StockSeries::new(first.market.clone(), bars)
}

/// How articles whose effective date is not a trading day are handled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeekendPolicy {
    /// Attach to the next trading day.
    #[default]
    RollForward,
    /// Discard the article.
    Drop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignedDay {
    pub date: NaiveDate,
    pub close: f64,
    pub volume: u64,
    pub articles: Vec<Article>,
}

/// Attach articles to trading days. Every trading day appears in the output,
/// with an empty article list when no news map onto it.
pub fn align(
    series: &StockSeries,
    articles: &[Article],
    policy: WeekendPolicy,
) -> Result<Vec<AlignedDay>> {
    if let Some(a) = articles.iter().find(|a| a.market != series.market) {
        return Err(Error::Validation(format!(
            "article {} belongs to market {}, series is {}",
            a.id, a.market, series.market
        )));
    }
    let mut days: Vec<AlignedDay> = series
        .bars
        .iter()
        .map(|b| AlignedDay {
            date: b.date,
            close: b.close,
            volume: b.volume,
            articles: Vec::new(),
        })
        .collect();
    for a in articles {
        let idx = days.partition_point(|d| d.date < a.effective_date);
        let Some(day) = days.get_mut(idx) else {
            continue;
        };
        match policy {
            WeekendPolicy::RollForward => day.articles.push(a.clone()),
            WeekendPolicy::Drop if day.date == a.effective_date => day.articles.push(a.clone()),
            WeekendPolicy::Drop => {}
        }
    }
    Ok(days)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn bar(date: &str, close: f64, volume: u64) -> StockBar {
        StockBar {
            date: d(date),
            open: close,
            high: close + 1.0,
            low: close - 1.0,
            close,
            volume,
        }
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_three_articles() {
        let f = write_tmp(concat!(
            r#"{"source":"a","url":"u1","published_date":"2019-07-01","title":"t1","body":"b1"}"#,
            "\n",
            r#"{"source":"a","url":"u2","published_date":"2019-07-02","title":"t2","body":"b2"}"#,
            "\n",
            r#"{"source":"a","url":"u3","published_date":"2019-07-03","title":"t3","body":"b3"}"#,
            "\n"
        ));
        let arts = load_articles(f.path(), &MarketProfile::tesla()).unwrap();
        assert_eq!(arts.len(), 3);
        assert_eq!(arts[0].id, article_id("u1"));
    }

    #[test]
    fn missing_title_names_field_and_line() {
        let f = write_tmp(concat!(
            r#"{"source":"a","url":"u1","published_date":"2019-07-01","title":"t1","body":"b1"}"#,
            "\n",
            r#"{"source":"a","url":"u2","published_date":"2019-07-02","body":"b2"}"#,
            "\n"
        ));
        let err = load_articles(f.path(), &MarketProfile::tesla()).unwrap_err();
        assert_eq!(err.to_string(), "missing field title at line 2");
    }

    #[test]
    fn malformed_json_names_line() {
        let f = write_tmp("{\"source\":\n");
        match load_articles(f.path(), &MarketProfile::tesla()).unwrap_err() {
            Error::Malformed { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nkorea_shift_is_one_day() {
        let a = Article::new(
            &MarketProfile::nkorea(),
            "s",
            "u",
            d("2019-07-01"),
            "t",
            "b",
        )
        .unwrap();
        assert_eq!(a.effective_date, d("2019-07-02"));
    }

    #[test]
    fn empty_body_after_trim_rejected() {
        assert!(Article::new(&MarketProfile::tesla(), "s", "u", d("2019-07-01"), "t", "  ").is_err());
    }

    #[test]
    fn stock_rows_are_sorted() {
        let f = write_tmp(
            "date,open,high,low,close,volume\n\
             2019-07-03,10,11,9,10.5,100\n\
             2019-07-01,10,11,9,10,100\n\
             2019-07-02,10,11,9,10.2,100\n",
        );
        let s = load_stock_csv(f.path(), "tesla").unwrap();
        let dates: Vec<_> = s.dates().collect();
        assert_eq!(dates, vec![d("2019-07-01"), d("2019-07-02"), d("2019-07-03")]);
    }

    #[test]
    fn stock_validation_errors() {
        let zero = write_tmp("date,open,high,low,close,volume\n2019-07-01,0,0,0,0,1\n");
        assert!(matches!(
            load_stock_csv(zero.path(), "x"),
            Err(Error::Validation(_))
        ));
        let inverted = write_tmp("date,open,high,low,close,volume\n2019-07-01,10,9,11,10,1\n");
        assert!(matches!(
            load_stock_csv(inverted.path(), "x"),
            Err(Error::Validation(_))
        ));
        let dup = write_tmp(
            "date,open,high,low,close,volume\n2019-07-01,10,11,9,10,1\n2019-07-01,10,11,9,10,1\n",
        );
        assert!(load_stock_csv(dup.path(), "x").is_err());
    }

    #[test]
    fn sixty_six_rows() {
        let mut text = String::from("date,open,high,low,close,volume\n");
        let start = d("2019-04-01");
        for i in 0..66u64 {
            let date = start + Days::new(i);
            text.push_str(&format!("{date},10,11,9,10,{i}\n"));
        }
        let f = write_tmp(&text);
        assert_eq!(load_stock_csv(f.path(), "x").unwrap().len(), 66);
    }

    #[test]
    fn composite_rules() {
        let a = StockSeries::new("nk", vec![bar("2019-07-01", 10.0, 5), bar("2019-07-02", 12.0, 5)]).unwrap();
        assert_eq!(composite_close(std::slice::from_ref(&a)).unwrap(), a);

        let b = StockSeries::new("nk", vec![bar("2019-07-01", 20.0, 7)]).unwrap();
        let c = composite_close(&[a.clone(), b]).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.bars[0].close, 15.0);
        assert_eq!(c.bars[0].volume, 12);

        let far = StockSeries::new("nk", vec![bar("2020-01-01", 20.0, 7)]).unwrap();
        assert!(composite_close(&[a, far]).is_err());
        assert!(composite_close(&[]).is_err());
    }

    #[test]
    fn composite_of_copies_is_identity() {
        let a = StockSeries::new(
            "nk",
            vec![bar("2019-07-01", 10.3, 5), bar("2019-07-02", 12.7, 5)],
        )
        .unwrap();
        let c = composite_close(&vec![a.clone(); 5]).unwrap();
        for (x, y) in c.bars.iter().zip(&a.bars) {
            assert_eq!(x.close, y.close);
        }
    }

    fn weekend_fixture() -> (StockSeries, Article, Article) {
        // 2019-07-05 is a Friday, 2019-07-08 a Monday.
        let s = StockSeries::new(
            "tesla",
            vec![bar("2019-07-05", 10.0, 1), bar("2019-07-08", 11.0, 1)],
        )
        .unwrap();
        let p = MarketProfile::tesla();
        let sat = Article::new(&p, "s", "sat", d("2019-07-06"), "t", "b").unwrap();
        let fri = Article::new(&p, "s", "fri", d("2019-07-05"), "t", "b").unwrap();
        (s, sat, fri)
    }

    #[test]
    fn roll_forward_and_drop() {
        let (s, sat, fri) = weekend_fixture();
        let rolled = align(&s, &[sat.clone(), fri.clone()], WeekendPolicy::RollForward).unwrap();
        assert_eq!(rolled[0].articles, vec![fri.clone()]);
        assert_eq!(rolled[1].articles, vec![sat.clone()]);

        let dropped = align(&s, &[sat, fri.clone()], WeekendPolicy::Drop).unwrap();
        assert_eq!(dropped[0].articles, vec![fri]);
        assert!(dropped[1].articles.is_empty());
    }

    #[test]
    fn align_rejects_other_market() {
        let (s, _, _) = weekend_fixture();
        let nk = Article::new(&MarketProfile::nkorea(), "s", "u", d("2019-07-05"), "t", "b").unwrap();
        assert!(align(&s, &[nk], WeekendPolicy::RollForward).is_err());
    }
}
