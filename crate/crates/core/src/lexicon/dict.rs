//! Reader for CMU-format pronouncing dictionaries.
//!
//! Lines look like `WORD  PH0 PH1 ...` with two spaces between the headword
//! and its pronunciation. Alternate pronunciations carry a `(n)` suffix on
//! the headword and lines starting with `;;;` are comments.

use serde::{Deserialize, Serialize};

use super::phoneme::Phoneme;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PronEntry {
    pub word: String,
    /// 1 for the primary pronunciation.
    pub variant: u32,
    pub phonemes: Vec<Phoneme>,
}

impl PronEntry {
    pub fn is_primary(&self) -> bool {
        self.variant == 1
    }

    /// Abbreviations and entries with digits are kept out of training.
    pub fn is_trainable(&self) -> bool {
        !self.word.chars().any(|c| c.is_ascii_digit() || c == '.')
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LineErrorKind {
    MissingSeparator,
    EmptyWord,
    EmptyPronunciation,
    BadVariant { suffix: String },
    UnknownSymbol { symbol: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineError {
    /// 1-based line number.
    pub line: usize,
    pub text: String,
    #[serde(flatten)]
    pub kind: LineErrorKind,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ParseReport {
    pub entries: Vec<PronEntry>,
    pub errors: Vec<LineError>,
    pub comments: usize,
}

pub fn parse_dictionary(text: &str) -> ParseReport {
    let mut report = ParseReport::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.starts_with(";;;") {
            report.comments += 1;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(entry) => report.entries.push(entry),
            Err(kind) => report.errors.push(LineError {
                line: idx + 1,
                text: line.to_string(),
                kind,
            }),
        }
    }
    report
}

fn parse_line(line: &str) -> Result<PronEntry, LineErrorKind> {
    let (head, pron) = line
        .split_once("  ")
        .ok_or(LineErrorKind::MissingSeparator)?;
    let head = head.trim();
    if head.is_empty() {
        return Err(LineErrorKind::EmptyWord);
    }
    let (word, variant) = split_variant(head)?;

    let mut phonemes = Vec::new();
    for tok in pron.split_whitespace() {
        let bare = tok.trim_end_matches(['0', '1', '2']);
        let ph = bare
            .parse::<Phoneme>()
            .map_err(|_| LineErrorKind::UnknownSymbol {
                symbol: tok.to_string(),
            })?;
        phonemes.push(ph);
    }
    if phonemes.is_empty() {
        return Err(LineErrorKind::EmptyPronunciation);
    }
    Ok(PronEntry {
        word: word.to_uppercase(),
        variant,
        phonemes,
    })
}

fn split_variant(head: &str) -> Result<(&str, u32), LineErrorKind> {
    let Some(open) = head.rfind('(') else {
        return Ok((head, 1));
    };
    if !head.ends_with(')') || open == 0 {
        return Ok((head, 1));
    }
    let suffix = &head[open + 1..head.len() - 1];
    match suffix.parse::<u32>() {
        Ok(n) if n >= 1 => Ok((&head[..open], n)),
        _ => Err(LineErrorKind::BadVariant {
            suffix: suffix.to_string(),
        }),
    }
}
