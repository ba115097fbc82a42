use super::{PosTagger, Token};

/// Lowercase, map everything outside `[a-z0-9 ]` to a space, collapse runs
/// of spaces and trim.
pub fn clean_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars().flat_map(char::to_lowercase) {
        if c.is_ascii_lowercase() || c.is_ascii_digit() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            pending_space = true;
        }
    }
    out
}

/// Whitespace tokenization followed by per-token tagging.
pub fn tokenize_and_tag(clean: &str, tagger: &dyn PosTagger) -> Vec<Token> {
    clean
        .split_whitespace()
        .map(|w| Token {
            text: w.to_string(),
            pos: tagger.tag(w),
        })
        .collect()
}
