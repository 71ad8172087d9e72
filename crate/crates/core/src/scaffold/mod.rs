//! Guided word building over fixed phoneme+grapheme blocks.
//!
//! A plan fixes, per chunk of the target word, whether the chunk is given
//! away up front and which blocks the keyboard offers. The machine in
//! [`machine`] then walks the plan one pick at a time.

mod learner;
mod machine;
mod topics;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lexicon::{KeyGroup, Lexicon, PairStat, Phoneme, Position};
use crate::wordplay::default_chunk;

pub use learner::{simulate, LearnerPolicy, PairKnowledge, Transcript};
pub use machine::{start, step, Action, EventDetail, EventKind, ScaffoldEvent, ScaffoldState};
pub use topics::{topics, word_suggestions};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ScaffoldError {
    #[error("empty target word")]
    EmptyWord,
    #[error("{0:?} is not in the lexicon")]
    NotInLexicon(String),
    #[error("block {0} is not on the offered keyboard")]
    NotOffered(u32),
    #[error("the word is already complete")]
    Complete,
    #[error("invalid scaffold config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct ScaffoldConfig {
    pub keyboard_size: usize,
    /// Pairs rarer than this percentile of pair tokens are preassembled.
    pub difficulty_percentile: f64,
    /// Chunks at least this long are preassembled.
    pub preassemble_chunk_len: usize,
    pub cue_threshold: u32,
    pub auto_threshold: u32,
    pub seed: u64,
}

impl Default for ScaffoldConfig {
    fn default() -> Self {
        Self {
            keyboard_size: 6,
            difficulty_percentile: 10.0,
            preassemble_chunk_len: 3,
            cue_threshold: 2,
            auto_threshold: 4,
            seed: 0,
        }
    }
}

impl ScaffoldConfig {
    pub fn validate(&self) -> Result<(), ScaffoldError> {
        let bad = |m: &str| Err(ScaffoldError::InvalidConfig(m.to_string()));
        if self.keyboard_size == 0 || self.keyboard_size > Phoneme::ALL.len() {
            return bad("keyboardSize must be between 1 and 39");
        }
        if !(0.0..=100.0).contains(&self.difficulty_percentile) {
            return bad("difficultyPercentile must lie in [0, 100]");
        }
        if self.preassemble_chunk_len == 0 {
            return bad("preassembleChunkLen must be positive");
        }
        if self.cue_threshold == 0 || self.auto_threshold == 0 {
            return bad("thresholds must be positive");
        }
        if self.cue_threshold > self.auto_threshold {
            return bad("cueThreshold must not exceed autoThreshold");
        }
        Ok(())
    }
}

/// One block offered on the scaffold keyboard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KeyBlock {
    pub id: u32,
    pub phoneme: Phoneme,
    pub chunk: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlanStep {
    pub chunk: String,
    pub phoneme: Phoneme,
    pub preassembled: bool,
    /// Empty for preassembled steps.
    pub keyboard: Vec<KeyBlock>,
}

impl PlanStep {
    pub fn target(&self) -> Option<&KeyBlock> {
        self.keyboard
            .iter()
            .find(|b| b.phoneme == self.phoneme && b.chunk == self.chunk)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScaffoldPlan {
    pub target_word: String,
    pub steps: Vec<PlanStep>,
    pub keyboard_size: usize,
    /// Pair count below which a step counts as difficult.
    pub difficulty_cutoff: u64,
    pub cue_threshold: u32,
    pub auto_threshold: u32,
}

impl ScaffoldPlan {
    pub fn chunks(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.chunk.as_str()).collect()
    }

    /// Upper bound on learner actions before completion.
    pub fn action_bound(&self) -> usize {
        self.steps.iter().filter(|s| !s.preassembled).count() * self.auto_threshold as usize
    }
}

/// Pair count at the given percentile of pair tokens: pairs below it
/// together account for less than `percentile` percent of all tokens.
pub fn difficulty_cutoff(pairs: &[PairStat], percentile: f64) -> u64 {
    let mut counts: Vec<u64> = pairs.iter().map(|p| p.count).collect();
    counts.sort_unstable();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0;
    }
    let target = percentile / 100.0 * total as f64;
    let mut cum = 0u64;
    for &c in &counts {
        cum += c;
        if cum as f64 >= target {
            return c;
        }
    }
    counts[counts.len() - 1]
}

pub fn plan(word: &str, lexicon: &Lexicon, cfg: &ScaffoldConfig) -> Result<ScaffoldPlan, ScaffoldError> {
    cfg.validate()?;
    let word = word.trim().to_ascii_uppercase();
    if word.is_empty() {
        return Err(ScaffoldError::EmptyWord);
    }
    let entry = lexicon
        .aligned_entry(&word, 1)
        .ok_or_else(|| ScaffoldError::NotInLexicon(word.clone()))?;
    let cutoff = difficulty_cutoff(lexicon.pair_table(), cfg.difficulty_percentile);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let len = entry.phonemes.len();
    let mut next_id = 1u32;
    let mut steps = Vec::with_capacity(len);
    for (i, (chunk, &ph)) in entry.chunks.iter().zip(&entry.phonemes).enumerate() {
        let count = lexicon.pair(ph, chunk).map_or(0, |p| p.count);
        let preassembled = count < cutoff || chunk.len() >= cfg.preassemble_chunk_len;
        let keyboard = if preassembled {
            Vec::new()
        } else {
            let pos = Position::of(i, len);
            let mut blocks = vec![(ph, chunk.clone())];
            blocks.extend(
                distractors(ph, cfg.keyboard_size - 1, &mut rng)
                    .into_iter()
                    .map(|d| (d, default_chunk(d, pos, lexicon))),
            );
            blocks.shuffle(&mut rng);
            blocks
                .into_iter()
                .map(|(phoneme, chunk)| {
                    next_id += 1;
                    KeyBlock {
                        id: next_id - 1,
                        phoneme,
                        chunk,
                    }
                })
                .collect()
        };
        steps.push(PlanStep {
            chunk: chunk.clone(),
            phoneme: ph,
            preassembled,
            keyboard,
        });
    }
    Ok(ScaffoldPlan {
        target_word: word,
        steps,
        keyboard_size: cfg.keyboard_size,
        difficulty_cutoff: cutoff,
        cue_threshold: cfg.cue_threshold,
        auto_threshold: cfg.auto_threshold,
    })
}

/// Draws `n` distinct phonemes other than `target`, from the target's
/// group first and from the remaining phonemes when the group runs out.
fn distractors(target: Phoneme, n: usize, rng: &mut ChaCha8Rng) -> Vec<Phoneme> {
    let group: KeyGroup = target.group();
    let mut same: Vec<Phoneme> = group.members().into_iter().filter(|&p| p != target).collect();
    same.shuffle(rng);
    if same.len() < n {
        let mut rest: Vec<Phoneme> = Phoneme::ALL
            .into_iter()
            .filter(|p| p.group() != group)
            .collect();
        rest.shuffle(rng);
        same.extend(rest);
    }
    same.truncate(n);
    same
}
