use std::collections::HashMap;
use std::path::Path;

use super::Pos;
use crate::error::{Error, Result};

const DEFAULT_LEXICON: &str = include_str!("../../data/tagger_lexicon.tsv");

/// Assigns a coarse part of speech to a single cleaned word.
pub trait PosTagger: Send + Sync {
    fn tag(&self, word: &str) -> Pos;
}

/// Lexicon lookup with suffix fallbacks; unknown words default to NOUN.
#[derive(Debug, Clone)]
pub struct LexiconTagger {
    table: HashMap<String, Pos>,
}

impl Default for LexiconTagger {
    fn default() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("bundled tagger lexicon is well formed")
    }
}

// Checked in order; the first matching suffix decides.
const SUFFIX_RULES: &[(&str, usize, Pos)] = &[
    ("ly", 5, Pos::Adv),
    ("ous", 5, Pos::Adj),
    ("ful", 5, Pos::Adj),
    ("less", 6, Pos::Adj),
    ("ive", 5, Pos::Adj),
    ("able", 6, Pos::Adj),
    ("ible", 6, Pos::Adj),
    ("ical", 6, Pos::Adj),
    ("ic", 5, Pos::Adj),
    ("al", 5, Pos::Adj),
    ("ish", 5, Pos::Adj),
    ("ing", 6, Pos::Verb),
    ("ed", 5, Pos::Verb),
    ("ize", 5, Pos::Verb),
    ("ise", 6, Pos::Verb),
];

impl LexiconTagger {
    /// Parse `word<TAB>POS` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line.split_once('\t').ok_or_else(|| Error::Malformed {
                line: i + 1,
                message: "expected word<TAB>POS".into(),
            })?;
            let pos = Pos::parse(tag).ok_or_else(|| Error::Malformed {
                line: i + 1,
                message: format!("unknown POS {tag:?}"),
            })?;
            table.insert(word.trim().to_lowercase(), pos);
        }
        Ok(Self { table })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.table.keys().map(String::as_str)
    }
}

impl PosTagger for LexiconTagger {
    fn tag(&self, word: &str) -> Pos {
        if let Some(p) = self.table.get(word) {
            return *p;
        }
        if word.chars().any(|c| c.is_ascii_digit()) {
            return Pos::Other;
        }
        SUFFIX_RULES
            .iter()
            .find(|(suffix, min_len, _)| word.len() >= *min_len && word.ends_with(suffix))
            .map(|(_, _, p)| *p)
            .unwrap_or(Pos::Noun)
    }
}
