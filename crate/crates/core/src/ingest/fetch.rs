use std::path::{Path, PathBuf};

use chrono::NaiveDate;

#[cfg(feature = "http")]
use super::parse_date;
use super::{parse_article_line, Article, MarketProfile};
#[cfg(feature = "http")]
use crate::error::FetchErrorKind;
use crate::error::{Error, Result};

/// Environment variable holding the NewsAPI key. Only the HTTP fetcher reads it.
pub const NEWS_API_KEY_ENV: &str = "NEWS_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewsQuery {
    /// Articles must mention at least one keyword (case-insensitive).
    /// An empty set matches everything.
    pub keywords: Vec<String>,
    pub from: NaiveDate,
    pub to: NaiveDate,
}

impl NewsQuery {
    fn in_range(&self, date: NaiveDate) -> bool {
        self.from <= date && date <= self.to
    }

    fn matches(&self, article: &Article) -> bool {
        if self.keywords.is_empty() {
            return true;
        }
        let title = article.title.to_lowercase();
        let body = article.body.to_lowercase();
        self.keywords.iter().any(|k| {
            let k = k.to_lowercase();
            title.contains(&k) || body.contains(&k)
        })
    }
}

/// Source of news articles. Implementations are shareable across threads.
pub trait NewsFetcher: Send + Sync {
    fn fetch(&self, query: &NewsQuery, profile: &MarketProfile) -> Result<Vec<Article>>;
}

/// Reads articles from a local directory.
///
/// `*.json` files hold a single article object, `*.jsonl` files hold one
/// article per line; both use the news-file schema. Files are visited in
/// name order so results are deterministic.
#[derive(Debug, Clone)]
pub struct FixtureFetcher {
    dir: PathBuf,
}

impl FixtureFetcher {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    fn read_file(path: &Path, profile: &MarketProfile) -> Result<Vec<Article>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let wrap = |e: Error| Error::Other(format!("{}: {e}", path.display()));
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Ok(vec![
                parse_article_line(text.trim(), 1, profile).map_err(wrap)?
            ]),
            _ => text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| parse_article_line(l, i + 1, profile).map_err(wrap))
                .collect(),
        }
    }
}

impl NewsFetcher for FixtureFetcher {
    fn fetch(&self, query: &NewsQuery, profile: &MarketProfile) -> Result<Vec<Article>> {
        let entries = std::fs::read_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.is_file()
                    && matches!(
                        p.extension().and_then(|e| e.to_str()),
                        Some("json") | Some("jsonl")
                    )
            })
            .collect();
        files.sort();
        let mut out = Vec::new();
        for f in files {
            out.extend(
                Self::read_file(&f, profile)?
                    .into_iter()
                    .filter(|a| query.in_range(a.published_date) && query.matches(a)),
            );
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Minimal blocking GET used by the NewsAPI fetcher. Swappable for tests.
pub trait HttpTransport: Send + Sync {
    /// Returns the response for any HTTP status; `Err` only for transport failures.
    fn get(
        &self,
        url: &str,
        query: &[(String, String)],
        headers: &[(String, String)],
    ) -> std::result::Result<HttpResponse, String>;
}

#[cfg(feature = "http")]
#[derive(Debug, Clone)]
pub struct UreqTransport {
    agent: ureq::Agent,
}

#[cfg(feature = "http")]
impl Default for UreqTransport {
    fn default() -> Self {
        Self {
            agent: ureq::AgentBuilder::new()
                .timeout(std::time::Duration::from_secs(30))
                .build(),
        }
    }
}

#[cfg(feature = "http")]
impl HttpTransport for UreqTransport {
    fn get(
        &self,
        url: &str,
        query: &[(String, String)],
        headers: &[(String, String)],
    ) -> std::result::Result<HttpResponse, String> {
        let mut req = self.agent.get(url);
        for (k, v) in query {
            req = req.query(k, v);
        }
        for (k, v) in headers {
            req = req.set(k, v);
        }
        let resp = match req.call() {
            Ok(r) => r,
            Err(ureq::Error::Status(_, r)) => r,
            Err(e) => return Err(e.to_string()),
        };
        let status = resp.status();
        let body = resp.into_string().map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

/// Fetcher for the NewsAPI `/v2/everything` endpoint.
///
/// All pages are collected before returning; any failure discards what was
/// already downloaded.
#[cfg(feature = "http")]
pub struct NewsApiFetcher<T: HttpTransport = UreqTransport> {
    transport: T,
    api_key: String,
    pub base_url: String,
    pub page_size: usize,
    pub max_pages: usize,
}

#[cfg(feature = "http")]
impl NewsApiFetcher<UreqTransport> {
    /// Reads the key from `NEWS_API_KEY`.
    pub fn from_env() -> Result<Self> {
        let key = std::env::var(NEWS_API_KEY_ENV).map_err(|_| Error::Fetch {
            kind: FetchErrorKind::Auth,
            message: format!("{NEWS_API_KEY_ENV} is not set"),
        })?;
        Ok(Self::with_transport(UreqTransport::default(), key))
    }
}

#[cfg(feature = "http")]
impl<T: HttpTransport> NewsApiFetcher<T> {
    pub fn with_transport(transport: T, api_key: impl Into<String>) -> Self {
        Self {
            transport,
            api_key: api_key.into(),
            base_url: "https://newsapi.org/v2/everything".into(),
            page_size: 100,
            max_pages: 5,
        }
    }

    fn page(&self, query: &NewsQuery, page: usize) -> Result<serde_json::Value> {
        let q = query
            .keywords
            .iter()
            .map(|k| format!("\"{k}\""))
            .collect::<Vec<_>>()
            .join(" OR ");
        let params = vec![
            ("q".to_string(), q),
            ("from".to_string(), query.from.to_string()),
            ("to".to_string(), query.to.to_string()),
            ("language".to_string(), "en".to_string()),
            ("sortBy".to_string(), "publishedAt".to_string()),
            ("pageSize".to_string(), self.page_size.to_string()),
            ("page".to_string(), page.to_string()),
        ];
        let headers = vec![("X-Api-Key".to_string(), self.api_key.clone())];
        let resp = self
            .transport
            .get(&self.base_url, &params, &headers)
            .map_err(|message| Error::Fetch {
                kind: FetchErrorKind::Network,
                message,
            })?;
        let kind = match resp.status {
            200 => None,
            401 | 403 => Some(FetchErrorKind::Auth),
            429 | 500..=599 => Some(FetchErrorKind::Network),
            _ => Some(FetchErrorKind::Protocol),
        };
        if let Some(kind) = kind {
            return Err(Error::Fetch {
                kind,
                message: format!("HTTP {}: {}", resp.status, resp.body),
            });
        }
        serde_json::from_str(&resp.body).map_err(|e| Error::Fetch {
            kind: FetchErrorKind::Protocol,
            message: e.to_string(),
        })
    }
}

#[cfg(feature = "http")]
impl<T: HttpTransport> NewsFetcher for NewsApiFetcher<T> {
    fn fetch(&self, query: &NewsQuery, profile: &MarketProfile) -> Result<Vec<Article>> {
        if query.from > query.to {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for page in 1..=self.max_pages {
            let json = self.page(query, page)?;
            if json["status"] != "ok" {
                let code = json["code"].as_str().unwrap_or("unknown");
                let kind = if code.starts_with("apiKey") {
                    FetchErrorKind::Auth
                } else {
                    FetchErrorKind::Protocol
                };
                return Err(Error::Fetch {
                    kind,
                    message: json["message"].as_str().unwrap_or(code).to_string(),
                });
            }
            let items = json["articles"].as_array().cloned().unwrap_or_default();
            let n = items.len();
            for item in items {
                let text = |k: &str| item[k].as_str().map(str::to_string);
                let (Some(url), Some(title), Some(published)) =
                    (text("url"), text("title"), text("publishedAt"))
                else {
                    continue;
                };
                let Some(date) = parse_date(&published) else {
                    continue;
                };
                let body = text("content").or_else(|| text("description"));
                let source = item["source"]["name"].as_str().unwrap_or("").to_string();
                // Removed or body-less entries are skipped, not fatal.
                if let Some(body) = body {
                    if let Ok(a) = Article::new(profile, source, url, date, title, body) {
                        if query.in_range(a.published_date) {
                            out.push(a);
                        }
                    }
                }
            }
            let total = json["totalResults"].as_u64().unwrap_or(0) as usize;
            if n < self.page_size || page * self.page_size >= total {
                break;
            }
        }
        Ok(out)
    }
}
