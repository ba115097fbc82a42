use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::{LexiconTagger, Pos, Token};
use crate::error::{Error, Result};

const DEFAULT_EXCEPTIONS: &str = include_str!("../../data/lemma_exceptions.tsv");

/// Dictionary-plus-suffix-rules lemmatizer.
///
/// Irregular forms come from an exception table. Regular nouns and verbs
/// lose their inflectional suffix; when a rule is ambiguous the stem found
/// in the known-word set wins. Rules are applied until the word stops
/// changing, so the result is always a fixed point.
#[derive(Debug, Clone)]
pub struct Lemmatizer {
    exceptions: HashMap<String, String>,
    known: HashSet<String>,
}

impl Default for Lemmatizer {
    fn default() -> Self {
        let tagger = LexiconTagger::default();
        Self::new(
            parse_exceptions(DEFAULT_EXCEPTIONS).expect("bundled exceptions are well formed"),
            tagger.words().map(str::to_string),
        )
    }
}

fn parse_exceptions(text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (form, base) = line.split_once('\t').ok_or_else(|| Error::Malformed {
            line: i + 1,
            message: "expected form<TAB>lemma".into(),
        })?;
        map.insert(form.trim().to_lowercase(), base.trim().to_lowercase());
    }
    Ok(map)
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

impl Lemmatizer {
    pub fn new(exceptions: HashMap<String, String>, known: impl IntoIterator<Item = String>) -> Self {
        let mut known: HashSet<String> = known.into_iter().collect();
        known.extend(exceptions.values().cloned());
        Self { exceptions, known }
    }

    /// Load the exception table from a `form<TAB>lemma` file.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(
            parse_exceptions(&text)?,
            LexiconTagger::default().words().map(str::to_string),
        ))
    }

    pub fn lemmatize(&self, token: &Token) -> String {
        let mut word = token.text.clone();
        // Every rule shortens the word, so this terminates well before the cap.
        for _ in 0..16 {
            let next = self.step(&word, token.pos);
            if next == word {
                break;
            }
            word = next;
        }
        word
    }

    fn step(&self, w: &str, pos: Pos) -> String {
        if let Some(base) = self.exceptions.get(w) {
            return base.clone();
        }
        match pos {
            Pos::Noun => self.strip_plural(w),
            Pos::Verb => self.strip_verb(w),
            _ => w.to_string(),
        }
    }

    fn strip_plural(&self, w: &str) -> String {
        if w.len() <= 3 || w.ends_with("ss") || w.ends_with("us") || w.ends_with("is") {
            return w.to_string();
        }
        if let Some(stem) = w.strip_suffix("ies") {
            if stem.len() >= 2 {
                return format!("{stem}y");
            }
        }
        for suffix in ["sses", "shes", "ches", "xes", "zes"] {
            if w.ends_with(suffix) {
                let drop_s = &w[..w.len() - 1];
                if self.known.contains(drop_s) {
                    return drop_s.to_string();
                }
                return w[..w.len() - 2].to_string();
            }
        }
        if w.ends_with("ses") {
            let drop_es = &w[..w.len() - 2];
            if self.known.contains(drop_es) {
                return drop_es.to_string();
            }
        }
        match w.strip_suffix('s') {
            Some(stem) => stem.to_string(),
            None => w.to_string(),
        }
    }

    fn strip_verb(&self, w: &str) -> String {
        if w.len() <= 3 {
            return w.to_string();
        }
        if let Some(stem) = w.strip_suffix("ied") {
            if stem.len() >= 2 {
                return format!("{stem}y");
            }
        }
        for suffix in ["ing", "ed"] {
            if let Some(stem) = w.strip_suffix(suffix) {
                if stem.len() >= 3 && stem.bytes().any(is_vowel) {
                    return self.repair_stem(stem);
                }
                return w.to_string();
            }
        }
        if w.ends_with('s') {
            return self.strip_plural(w);
        }
        w.to_string()
    }

    // Undo consonant doubling ("stopp" -> "stop") or restore a dropped "e".
    fn repair_stem(&self, stem: &str) -> String {
        if self.known.contains(stem) {
            return stem.to_string();
        }
        let with_e = format!("{stem}e");
        if self.known.contains(&with_e) {
            return with_e;
        }
        let b = stem.as_bytes();
        let n = b.len();
        if n >= 2 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
            return stem[..n - 1].to_string();
        }
        stem.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::{PosTagger, tokenize_and_tag};

    fn lemma(word: &str, pos: Pos) -> String {
        Lemmatizer::default().lemmatize(&Token {
            text: word.into(),
            pos,
        })
    }

    #[test]
    fn examples() {
        assert_eq!(lemma("cars", Pos::Noun), "car");
        assert_eq!(lemma("data", Pos::Noun), "data");
        assert_eq!(lemma("good", Pos::Adj), "good");
    }

    #[test]
    fn noun_rules() {
        assert_eq!(lemma("companies", Pos::Noun), "company");
        assert_eq!(lemma("classes", Pos::Noun), "class");
        assert_eq!(lemma("buses", Pos::Noun), "bus");
        assert_eq!(lemma("cases", Pos::Noun), "case");
        assert_eq!(lemma("taxes", Pos::Noun), "tax");
        assert_eq!(lemma("status", Pos::Noun), "status");
        assert_eq!(lemma("women", Pos::Noun), "woman");
    }

    #[test]
    fn verb_rules() {
        assert_eq!(lemma("stopped", Pos::Verb), "stop");
        assert_eq!(lemma("making", Pos::Verb), "make");
        assert_eq!(lemma("rallied", Pos::Verb), "rally");
        assert_eq!(lemma("called", Pos::Verb), "call");
        assert_eq!(lemma("need", Pos::Verb), "need");
        assert_eq!(lemma("was", Pos::Other), "be");
    }

    #[test]
    fn idempotent_over_bundled_vocabulary() {
        let lem = Lemmatizer::default();
        let tagger = LexiconTagger::default();
        let mut words: Vec<String> = tagger.words().map(str::to_string).collect();
        words.extend(lem.exceptions.keys().cloned());
        words.extend(
            tokenize_and_tag("investors watched missiles launching while sales slipped", &tagger)
                .into_iter()
                .map(|t| t.text),
        );
        for w in words {
            for pos in [Pos::Noun, Pos::Verb, Pos::Adj, tagger.tag(&w)] {
                let t = Token { text: w.clone(), pos };
                let once = lem.lemmatize(&t);
                let twice = lem.lemmatize(&Token { text: once.clone(), pos });
                assert_eq!(once, twice, "{w} / {pos:?}");
            }
        }
    }
}
