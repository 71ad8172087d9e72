use serde::{Deserialize, Serialize};

use crate::lexicon::{Lexicon, Phoneme, Position};

use super::g2p::LetterModel;

/// How a rendering was obtained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Rendering {
    pub chunks: Vec<String>,
    /// The lexicon word whose spelling was used, if any.
    pub word: Option<String>,
    /// Other spellable words with the same pronunciation.
    pub alternatives: Vec<String>,
}

impl Rendering {
    pub fn spelling(&self) -> String {
        self.chunks.concat()
    }
}

/// Spells a phoneme sequence.
pub fn render_phonemes(phonemes: &[Phoneme], lexicon: &Lexicon) -> Vec<String> {
    render_detailed(phonemes, lexicon).chunks
}

/// Like [`render_phonemes`] but also reports the homophone choice.
pub fn render_detailed(phonemes: &[Phoneme], lexicon: &Lexicon) -> Rendering {
    if phonemes.is_empty() {
        return Rendering {
            chunks: Vec::new(),
            word: None,
            alternatives: Vec::new(),
        };
    }
    let mut homophones = lexicon.homophones(phonemes);
    if let Some(first) = homophones.next() {
        let mut alternatives: Vec<String> = homophones
            .map(|a| a.word.clone())
            .filter(|w| *w != first.word)
            .collect();
        alternatives.dedup();
        return Rendering {
            chunks: first.chunks.clone(),
            word: Some(first.word.clone()),
            alternatives,
        };
    }
    let len = phonemes.len();
    let chunks = phonemes
        .iter()
        .enumerate()
        .map(|(i, &ph)| default_chunk(ph, Position::of(i, len), lexicon))
        .collect();
    Rendering {
        chunks,
        word: None,
        alternatives: Vec::new(),
    }
}

/// The most frequent spelling of `phoneme` at `position`; ties go to the
/// larger overall count, then to the lexicographically first chunk.
pub fn default_chunk(phoneme: Phoneme, position: Position, lexicon: &Lexicon) -> String {
    lexicon
        .pairs_for(phoneme)
        .iter()
        .max_by(|a, b| {
            a.positional
                .get(position)
                .cmp(&b.positional.get(position))
                .then(a.count.cmp(&b.count))
                .then_with(|| b.chunk.cmp(&a.chunk))
        })
        .map(|p| p.chunk.clone())
        .or_else(|| {
            lexicon
                .creature(phoneme)
                .map(|c| c.canonical_grapheme().to_string())
        })
        .unwrap_or_else(|| phoneme.symbol().to_string())
}

/// Reads a spelling aloud: the primary pronunciation if the word is in the
/// lexicon, otherwise the fallback decoder.
pub fn pronounce_letters(letters: &str, lexicon: &Lexicon) -> Vec<Phoneme> {
    let word = letters.trim().to_ascii_uppercase();
    if word.is_empty() {
        return Vec::new();
    }
    if let Some(entry) = lexicon.primary(&word) {
        return entry.phonemes.clone();
    }
    letter_model(lexicon).decode(&word)
}

pub(crate) fn letter_model(lexicon: &Lexicon) -> &LetterModel {
    lexicon.letter_model.get_or_init(|| {
        LetterModel::new(lexicon.pair_table(), lexicon.aligned(), lexicon.max_chunk())
    })
}
