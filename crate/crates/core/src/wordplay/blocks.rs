//! Blocks and the word box.
//!
//! Every operation here takes a box by reference and returns a new one;
//! nothing is mutated in place, so a session can keep its history.

use serde::{Deserialize, Serialize};

use crate::lexicon::{Lexicon, Phoneme};

use super::render::{pronounce_letters, render_detailed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Payload {
    Phoneme { phoneme: Phoneme },
    Letter { letter: char },
}

impl Payload {
    pub fn phoneme(self) -> Option<Phoneme> {
        match self {
            Payload::Phoneme { phoneme } => Some(phoneme),
            Payload::Letter { .. } => None,
        }
    }

    pub fn letter(self) -> Option<char> {
        match self {
            Payload::Letter { letter } => Some(letter),
            Payload::Phoneme { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Block {
    pub id: u32,
    pub payload: Payload,
    /// Chunk currently spelled by a phoneme block, or a letter block's letter.
    pub display_form: String,
    pub creature_glyph: Option<String>,
    /// Text drawn on the block; `None` when letters are hidden.
    pub label: Option<String>,
}

impl Block {
    pub fn phoneme(id: u32, phoneme: Phoneme) -> Self {
        Self::new(id, Payload::Phoneme { phoneme })
    }

    pub fn letter(id: u32, letter: char) -> Self {
        Self::new(id, Payload::Letter {
            letter: letter.to_ascii_uppercase(),
        })
    }

    fn new(id: u32, payload: Payload) -> Self {
        let display_form = match payload {
            Payload::Letter { letter } => letter.to_string(),
            Payload::Phoneme { phoneme } => phoneme.symbol().to_string(),
        };
        Self {
            id,
            payload,
            label: Some(display_form.clone()),
            display_form,
            creature_glyph: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BoxMode {
    Letter,
    Phoneme,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DisplayMode {
    #[default]
    Letters,
    CreaturesWithLetters,
    CreaturesOnly,
}

impl DisplayMode {
    pub fn shows_creatures(self) -> bool {
        !matches!(self, DisplayMode::Letters)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WordBoxError {
    #[error("{payload:?} does not fit a {mode:?}-mode word box")]
    WrongPayload { payload: Payload, mode: BoxMode },
    #[error("letter blocks hold a single letter A-Z, got {0:?}")]
    BadLetter(char),
    #[error("no block with id {0}")]
    NoSuchBlock(u32),
    #[error("index {index} out of range for {len} blocks")]
    BadIndex { index: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WordBox {
    pub blocks: Vec<Block>,
    pub mode: BoxMode,
    pub display_mode: DisplayMode,
    /// Pronunciation of the box contents.
    pub pronunciation: Vec<Phoneme>,
    /// Lexicon word spelled by the box, if any.
    pub word: Option<String>,
    /// Other words with the same pronunciation (phoneme mode).
    pub homophones: Vec<String>,
    next_id: u32,
}

impl WordBox {
    pub fn new(mode: BoxMode) -> Self {
        Self {
            blocks: Vec::new(),
            mode,
            display_mode: DisplayMode::Letters,
            pronunciation: Vec::new(),
            word: None,
            homophones: Vec::new(),
            next_id: 1,
        }
    }

    /// Id the next inserted block will get.
    pub fn next_id(&self) -> u32 {
        self.next_id
    }

    pub fn phonemes(&self) -> Vec<Phoneme> {
        self.blocks.iter().filter_map(|b| b.payload.phoneme()).collect()
    }

    pub fn chunks(&self) -> Vec<String> {
        self.blocks.iter().map(|b| b.display_form.clone()).collect()
    }

    pub fn spelling(&self) -> String {
        self.blocks.iter().map(|b| b.display_form.as_str()).collect()
    }

    pub fn find(&self, id: u32) -> Option<usize> {
        self.blocks.iter().position(|b| b.id == id)
    }

    fn check_payload(&self, payload: Payload) -> Result<Payload, WordBoxError> {
        match (self.mode, payload) {
            (BoxMode::Phoneme, Payload::Phoneme { .. }) => Ok(payload),
            (BoxMode::Letter, Payload::Letter { letter }) => {
                let up = letter.to_ascii_uppercase();
                if up.is_ascii_uppercase() {
                    Ok(Payload::Letter { letter: up })
                } else {
                    Err(WordBoxError::BadLetter(letter))
                }
            }
            _ => Err(WordBoxError::WrongPayload {
                payload,
                mode: self.mode,
            }),
        }
    }
}

/// Inserts a new block at `index` (the end when `None`).
pub fn insert(
    wb: &WordBox,
    index: Option<usize>,
    payload: Payload,
    lexicon: &Lexicon,
) -> Result<WordBox, WordBoxError> {
    let payload = wb.check_payload(payload)?;
    let index = index.unwrap_or(wb.blocks.len());
    if index > wb.blocks.len() {
        return Err(WordBoxError::BadIndex {
            index,
            len: wb.blocks.len(),
        });
    }
    let mut out = wb.clone();
    let block = Block::new(out.next_id, payload);
    out.next_id += 1;
    out.blocks.insert(index, block);
    Ok(reflow(&out, lexicon))
}

pub fn remove(wb: &WordBox, id: u32, lexicon: &Lexicon) -> Result<WordBox, WordBoxError> {
    let at = wb.find(id).ok_or(WordBoxError::NoSuchBlock(id))?;
    let mut out = wb.clone();
    out.blocks.remove(at);
    Ok(reflow(&out, lexicon))
}

/// Moves block `id` so that it ends up at position `to`.
pub fn move_block(
    wb: &WordBox,
    id: u32,
    to: usize,
    lexicon: &Lexicon,
) -> Result<WordBox, WordBoxError> {
    let at = wb.find(id).ok_or(WordBoxError::NoSuchBlock(id))?;
    if to >= wb.blocks.len() {
        return Err(WordBoxError::BadIndex {
            index: to,
            len: wb.blocks.len(),
        });
    }
    let mut out = wb.clone();
    let block = out.blocks.remove(at);
    out.blocks.insert(to, block);
    Ok(reflow(&out, lexicon))
}

pub fn clear(wb: &WordBox) -> WordBox {
    let mut out = wb.clone();
    out.blocks.clear();
    out.pronunciation.clear();
    out.word = None;
    out.homophones.clear();
    out
}

/// Recomputes everything derived from the block sequence.
pub fn reflow(wb: &WordBox, lexicon: &Lexicon) -> WordBox {
    let mut out = wb.clone();
    match out.mode {
        BoxMode::Phoneme => {
            let phonemes = out.phonemes();
            let rendering = render_detailed(&phonemes, lexicon);
            for (block, chunk) in out.blocks.iter_mut().zip(rendering.chunks) {
                block.display_form = chunk;
            }
            out.pronunciation = phonemes;
            out.word = rendering.word;
            out.homophones = rendering.alternatives;
        }
        BoxMode::Letter => {
            for block in &mut out.blocks {
                if let Payload::Letter { letter } = block.payload {
                    block.display_form = letter.to_string();
                }
            }
            let spelling = out.spelling();
            out.pronunciation = pronounce_letters(&spelling, lexicon);
            out.word = lexicon.contains_word(&spelling).then_some(spelling);
            out.homophones.clear();
        }
    }
    decorate(&mut out, lexicon);
    out
}

/// Switches presentation only; payloads and chunks are untouched.
pub fn toggle_display(wb: &WordBox, mode: DisplayMode, lexicon: &Lexicon) -> WordBox {
    let mut out = wb.clone();
    out.display_mode = mode;
    decorate(&mut out, lexicon);
    out
}

fn decorate(wb: &mut WordBox, lexicon: &Lexicon) {
    let mode = wb.display_mode;
    for block in &mut wb.blocks {
        let creature = block
            .payload
            .phoneme()
            .filter(|_| mode.shows_creatures())
            .map(|ph| {
                lexicon
                    .creature(ph)
                    .map(|c| c.glyph_id.clone())
                    .unwrap_or_else(|| crate::lexicon::creatures::glyph_id(ph))
            });
        block.label = match (mode, creature.is_some()) {
            (DisplayMode::CreaturesOnly, true) => None,
            _ => Some(block.display_form.clone()),
        };
        block.creature_glyph = creature;
    }
}
