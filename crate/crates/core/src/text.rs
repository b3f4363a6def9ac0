//! Shared text utilities: character-offset slicing, word segmentation,
//! sentence boundaries and negation markers.
//!
//! All offsets in this crate are Unicode scalar-value indices, never bytes.

use sha2::{Digest, Sha256};

/// The negation markers recognised everywhere in the toolkit.
pub const NEGATION_MARKERS: [&str; 17] = [
    "not", "no", "never", "none", "n't", "cannot", "can't", "didn't", "doesn't", "don't", "won't", "wasn't", "weren't",
    "isn't", "aren't", "neither", "nor",
];

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "st", "jr", "sr", "inc", "corp", "ltd", "co", "vs", "prof", "gen", "mt", "ft",
];

pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Slice `s` by character offsets. Returns `None` when out of bounds or reversed.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut it = s.char_indices().map(|(b, _)| b).chain(std::iter::once(s.len()));
    let bs = it.nth(start)?;
    let be = if end == start { bs } else { it.nth(end - start - 1)? };
    Some(&s[bs..be])
}

/// Byte offset of every character plus a trailing sentinel, for repeated slicing.
#[derive(Debug, Clone)]
pub struct CharIndex<'a> {
    text: &'a str,
    bytes: Vec<usize>,
}

impl<'a> CharIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bytes.push(text.len());
        CharIndex { text, bytes }
    }

    pub fn len(&self) -> usize {
        self.bytes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice(&self, start: usize, end: usize) -> Option<&'a str> {
        if start > end || end > self.len() {
            return None;
        }
        Some(&self.text[self.bytes[start]..self.bytes[end]])
    }

    pub fn byte_to_char(&self, byte: usize) -> usize {
        match self.bytes.binary_search(&byte) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }
}

/// A word with its character range in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Alphanumeric runs; an apostrophe between two alphanumerics stays inside the word
/// so that contractions like "didn't" and possessives like "World's" survive.
pub fn words(text: &str) -> Vec<Word<'_>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        i += 1;
        while i < chars.len() {
            let c = chars[i].1;
            if c.is_alphanumeric() {
                i += 1;
            } else if is_apostrophe(c) && i + 1 < chars.len() && chars[i + 1].1.is_alphanumeric() {
                i += 2;
            } else {
                break;
            }
        }
        let bs = chars[start].0;
        let be = chars.get(i).map_or(text.len(), |&(b, _)| b);
        out.push(Word {
            text: &text[bs..be],
            start,
            end: i,
        });
    }
    out
}

/// Lowercased words with curly apostrophes folded to ASCII.
pub fn lower_words(text: &str) -> Vec<String> {
    words(text)
        .into_iter()
        .map(|w| w.text.to_lowercase().replace('\u{2019}', "'"))
        .collect()
}

pub fn is_negation_word(lower: &str) -> bool {
    NEGATION_MARKERS.contains(&lower) || lower.ends_with("n't")
}

pub fn contains_negation(text: &str) -> bool {
    lower_words(text).iter().any(|w| is_negation_word(w))
}

/// Sentence ranges (character offsets, end exclusive, trailing whitespace excluded).
///
/// A boundary is `.`, `!` or `?` followed by whitespace and an uppercase letter.
/// A period after a known abbreviation ("Mr.", "Inc.") is not a boundary.
pub fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut spans = Vec::new();
    let mut start = 0;
    while start < n && chars[start].is_whitespace() {
        start += 1;
    }
    let mut i = start;
    while i < n {
        let c = chars[i];
        if matches!(c, '.' | '!' | '?') && !(c == '.' && follows_abbreviation(&chars, i)) {
            let mut j = i + 1;
            while j < n && chars[j].is_whitespace() {
                j += 1;
            }
            if j > i + 1 && j < n && chars[j].is_uppercase() {
                spans.push((start, i + 1));
                start = j;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    if start < n {
        let mut end = n;
        while end > start && chars[end - 1].is_whitespace() {
            end -= 1;
        }
        if end > start {
            spans.push((start, end));
        }
    }
    spans
}

fn follows_abbreviation(chars: &[char], dot: usize) -> bool {
    let mut s = dot;
    while s > 0 && chars[s - 1].is_alphabetic() {
        s -= 1;
    }
    if s == dot {
        return false;
    }
    let word: String = chars[s..dot].iter().collect::<String>().to_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
}

/// Index of the sentence containing character `pos`. Whitespace between two
/// sentences belongs to the earlier one.
pub fn sentence_index(spans: &[(usize, usize)], pos: usize) -> usize {
    spans.iter().rposition(|&(s, _)| s <= pos).unwrap_or_default()
}

/// Numbers written with digits ("1,200", "3.5", "24"). Spelled-out numbers are ignored.
pub fn numeric_values(text: &str) -> Vec<f64> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let mut buf = String::new();
        while i < chars.len() {
            let c = chars[i];
            if c.is_ascii_digit() {
                buf.push(c);
                i += 1;
            } else if (c == ',' || c == '.') && i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                if c == '.' {
                    buf.push('.');
                }
                i += 1;
            } else {
                break;
            }
        }
        if let Ok(v) = buf.parse::<f64>() {
            out.push(v);
        }
    }
    out
}

/// Stable per-key seed: first eight bytes of SHA-256 over the global seed and the key.
pub fn derive_seed(global: u64, key: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    h.update(key.as_bytes());
    let digest = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(b)
}

/// `round(rate * n)` with halves rounded up.
pub fn round_count(rate: f64, n: usize) -> usize {
    (rate * n as f64 + 0.5 + 1e-9).floor() as usize
}

/// Format a percentage with two decimals, rounding halves up on the decimal expansion.
pub fn format_pct(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let neg = x < 0.0;
    let s = format!("{:.9}", x.abs());
    let (int_part, frac) = s.split_once('.').unwrap_or((&s, "0"));
    let frac: Vec<u32> = frac.chars().filter_map(|c| c.to_digit(10)).collect();
    let mut hundredths: u64 = int_part.parse::<u64>().unwrap_or(0) * 100
        + u64::from(frac.first().copied().unwrap_or(0)) * 10
        + u64::from(frac.get(1).copied().unwrap_or(0));
    if frac.get(2).copied().unwrap_or(0) >= 5 {
        hundredths += 1;
    }
    let sign = if neg && hundredths > 0 { "-" } else { "" };
    format!("{sign}{}.{:02}", hundredths / 100, hundredths % 100)
}

/// Neumaier-compensated sum; the result depends only on the order of `values`.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
