use serde::{Deserialize, Serialize};

use crate::ingest::Article;

/// Article paired with its keyword-alias count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountedArticle {
    pub article: Article,
    pub keyword_count: usize,
}

/// Edit distance over Unicode scalar values (insert, delete, substitute).
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - levenshtein / max(len)`; two empty strings are identical.
pub fn title_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

// Similarities this close to the threshold count as equal to it.
const SIMILARITY_EPS: f64 = 1e-12;

/// Greedy keep-list dedup. An article survives iff its title similarity to
/// every previously kept title is at most `threshold`. Input order matters:
/// callers pass articles sorted by (published_date, id).
pub fn dedup_by_title(articles: &[Article], threshold: f64) -> Vec<Article> {
    let mut kept: Vec<Article> = Vec::new();
    for a in articles {
        let dup = kept
            .iter()
            .any(|k| title_similarity(&k.title, &a.title) > threshold + SIMILARITY_EPS);
        if !dup {
            kept.push(a.clone());
        }
    }
    kept
}

/// Keep articles whose body length in characters lies in `[min_chars, max_chars]`.
pub fn length_filter(articles: &[Article], min_chars: usize, max_chars: usize) -> Vec<Article> {
    articles
        .iter()
        .filter(|a| {
            let n = a.body.chars().count();
            min_chars <= n && n <= max_chars
        })
        .cloned()
        .collect()
}

/// Case-insensitive, non-overlapping alias count over title and body.
/// At each position the longest matching alias wins.
pub fn keyword_count(article: &Article, aliases: &[String]) -> usize {
    let mut lowered: Vec<String> = aliases
        .iter()
        .map(|a| a.to_lowercase())
        .filter(|a| !a.is_empty())
        .collect();
    lowered.sort_by_key(|a| std::cmp::Reverse(a.len()));
    // Newline separator keeps matches from spanning title and body.
    let text = format!("{}\n{}", article.title, article.body).to_lowercase();
    let bytes = text.as_bytes();
    let mut count = 0;
    let mut i = 0;
    while i < bytes.len() {
        match lowered.iter().find(|a| bytes[i..].starts_with(a.as_bytes())) {
            Some(a) => {
                count += 1;
                i += a.len();
            }
            None => i += 1,
        }
    }
    count
}

pub fn keyword_filter(articles: &[CountedArticle], min_count: usize) -> Vec<CountedArticle> {
    articles
        .iter()
        .filter(|c| c.keyword_count >= min_count)
        .cloned()
        .collect()
}

/// Top `k` by keyword count; ties go to the earlier publication date, then id.
pub fn select_top(articles: &[CountedArticle], k: usize) -> Vec<CountedArticle> {
    let mut sorted = articles.to_vec();
    sorted.sort_by(|a, b| {
        b.keyword_count
            .cmp(&a.keyword_count)
            .then(a.article.published_date.cmp(&b.article.published_date))
            .then(a.article.id.cmp(&b.article.id))
    });
    sorted.truncate(k);
    sorted
}
