//! Pronouncing-dictionary ingestion, grapheme/phoneme alignment, pair
//! statistics and the sound-creature registry.

pub mod align;
pub mod artifacts;
pub mod creatures;
pub mod dict;
pub mod pairs;
pub mod phoneme;

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use align::{
    align, is_alignable, train_alignment, AlignError, AlignedEntry, AlignmentConfig,
    AlignmentModel, Excluded, ExclusionReason, TrainingReport,
};
pub use artifacts::{load_artifacts, write_artifacts, Manifest};
pub use creatures::{creature_registry, glyph_id, CreatureSpec};
pub use dict::{parse_dictionary, LineError, LineErrorKind, ParseReport, PronEntry};
pub use pairs::{pair_table, pairs_to_tsv, top_pairs, PairStat, Position, Positional};
pub use phoneme::{
    join_phonemes, parse_phonemes, KeyGroup, Phoneme, PhonemeClass, UnknownPhoneme,
};

use crate::wordplay::g2p::LetterModel;
use crate::wordplay::interpret::InterpreterIndex;

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("no trainable entries in the dictionary")]
    EmptyCorpus,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid alignment model: {0}")]
    InvalidModel(String),
    #[error("unsupported schema {0:?}")]
    Schema(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no lexicon artifacts in {0}; run `phonoblocks build-lexicon --dict <path> --out {0}` first")]
    MissingArtifacts(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LexiconConfig {
    pub alignment: AlignmentConfig,
    /// Size of the pair table behind the creature forms.
    pub top_pairs: usize,
}

impl Default for LexiconConfig {
    fn default() -> Self {
        Self {
            alignment: AlignmentConfig::default(),
            top_pairs: 80,
        }
    }
}

/// Log10 relative word frequencies, used as a word prior by the interpreter.
#[derive(Debug, Clone, Default)]
pub struct WordFrequencies {
    log10: HashMap<String, f64>,
    floor: f64,
}

impl WordFrequencies {
    /// Parses `WORD<TAB>log10freq` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        let mut log10 = HashMap::new();
        for line in text.lines() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            if let Some((w, f)) = line.split_once('\t') {
                if let Ok(v) = f.trim().parse::<f64>() {
                    log10.entry(w.trim().to_uppercase()).or_insert(v);
                }
            }
        }
        let min = log10.values().copied().fold(f64::INFINITY, f64::min);
        let floor = if min.is_finite() { min - 0.5 } else { -9.0 };
        Self { log10, floor }
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        Ok(Self::parse(&read_file(path)?))
    }

    pub fn is_empty(&self) -> bool {
        self.log10.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.log10.contains_key(word)
    }

    /// Natural-log frequency, with unlisted words at the floor.
    pub fn ln_freq(&self, word: &str) -> f64 {
        self.log10.get(word).copied().unwrap_or(self.floor) * std::f64::consts::LN_10
    }

    /// Words ordered from most to least frequent.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<_> = self.log10.iter().map(|(w, f)| (w.as_str(), *f)).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, LexiconError> {
    std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A trained lexicon: dictionary, alignment model, aligned entries, pair
/// tables and creature registry. Immutable once built.
#[derive(Debug)]
pub struct Lexicon {
    entries: Vec<PronEntry>,
    model: AlignmentModel,
    aligned: Vec<AlignedEntry>,
    pairs: Vec<PairStat>,
    top: Vec<PairStat>,
    creatures: Vec<CreatureSpec>,
    frequencies: WordFrequencies,
    by_word: HashMap<String, Vec<usize>>,
    aligned_by_key: HashMap<(String, u32), usize>,
    /// Display-only segmentations of entries that did not align; indexed
    /// after `aligned` by `by_pronunciation`.
    relaxed: Vec<AlignedEntry>,
    by_pronunciation: HashMap<Vec<Phoneme>, Vec<usize>>,
    pub(crate) letter_model: OnceLock<LetterModel>,
    pub(crate) interpreter_index: OnceLock<InterpreterIndex>,
}

impl Lexicon {
    /// Trains the alignment model on `entries` and derives everything else.
    pub fn build(
        entries: Vec<PronEntry>,
        cfg: &LexiconConfig,
    ) -> Result<(Self, TrainingReport), LexiconError> {
        let (model, report) = train_alignment(&entries, &cfg.alignment)?;
        let lex = Self::from_model(entries, model, cfg.top_pairs)?;
        Ok((lex, report))
    }

    /// Rebuilds a lexicon from a previously trained model.
    pub fn from_model(
        entries: Vec<PronEntry>,
        model: AlignmentModel,
        top_n: usize,
    ) -> Result<Self, LexiconError> {
        if top_n == 0 {
            return Err(LexiconError::InvalidConfig("top pairs must be >= 1".into()));
        }
        model.validate()?;
        let aligned: Vec<AlignedEntry> = entries
            .iter()
            .filter(|e| e.is_trainable())
            .filter_map(|e| align(e, &model).ok())
            .collect();
        let pairs = pair_table(&aligned);
        let top = top_pairs(&pairs, top_n);
        let creatures = creature_registry(&top, &pairs)?;

        let mut by_word: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_word.entry(e.word.clone()).or_default().push(i);
        }
        for idx in by_word.values_mut() {
            idx.sort_by_key(|&i| entries[i].variant);
        }
        let mut aligned_by_key = HashMap::new();
        for (i, a) in aligned.iter().enumerate() {
            aligned_by_key.insert((a.word.clone(), a.variant), i);
        }
        let relaxed: Vec<AlignedEntry> = entries
            .iter()
            .filter(|e| !aligned_by_key.contains_key(&(e.word.clone(), e.variant)))
            .filter_map(|e| align::align_relaxed(e, &model))
            .collect();
        let mut by_pronunciation: HashMap<Vec<Phoneme>, Vec<usize>> = HashMap::new();
        for (i, a) in aligned.iter().chain(&relaxed).enumerate() {
            by_pronunciation.entry(a.phonemes.clone()).or_default().push(i);
        }
        let get = |i: usize| aligned.get(i).unwrap_or_else(|| &relaxed[i - aligned.len()]);
        for idx in by_pronunciation.values_mut() {
            idx.sort_by_cached_key(|&i| {
                let a = get(i);
                let punctuated = !a.word.bytes().all(|b| b.is_ascii_uppercase());
                (a.variant, punctuated, a.word.clone())
            });
        }

        Ok(Self {
            entries,
            model,
            aligned,
            pairs,
            top,
            creatures,
            frequencies: WordFrequencies::default(),
            by_word,
            aligned_by_key,
            relaxed,
            by_pronunciation,
            letter_model: OnceLock::new(),
            interpreter_index: OnceLock::new(),
        })
    }

    /// A lexicon with no words.
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
            model: AlignmentModel {
                schema: align::ALIGNMENT_SCHEMA.to_string(),
                max_chunk: AlignmentConfig::default().max_chunk,
                probs: Default::default(),
            },
            aligned: Vec::new(),
            pairs: Vec::new(),
            top: Vec::new(),
            creatures: Vec::new(),
            frequencies: WordFrequencies::default(),
            by_word: HashMap::new(),
            aligned_by_key: HashMap::new(),
            relaxed: Vec::new(),
            by_pronunciation: HashMap::new(),
            letter_model: OnceLock::new(),
            interpreter_index: OnceLock::new(),
        }
    }

    pub fn with_frequencies(mut self, frequencies: WordFrequencies) -> Self {
        self.frequencies = frequencies;
        self.interpreter_index = OnceLock::new();
        self
    }

    pub fn entries(&self) -> &[PronEntry] {
        &self.entries
    }

    pub fn model(&self) -> &AlignmentModel {
        &self.model
    }

    pub fn max_chunk(&self) -> usize {
        self.model.max_chunk
    }

    pub fn aligned(&self) -> &[AlignedEntry] {
        &self.aligned
    }

    pub fn pair_table(&self) -> &[PairStat] {
        &self.pairs
    }

    pub fn top_pairs(&self) -> &[PairStat] {
        &self.top
    }

    pub fn creatures(&self) -> &[CreatureSpec] {
        &self.creatures
    }

    pub fn creature(&self, phoneme: Phoneme) -> Option<&CreatureSpec> {
        self.creatures.get(phoneme.index()).filter(|c| c.phoneme == phoneme)
    }

    pub fn frequencies(&self) -> &WordFrequencies {
        &self.frequencies
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of distinct headwords.
    pub fn word_count(&self) -> usize {
        self.by_word.len()
    }

    pub fn contains_word(&self, word: &str) -> bool {
        self.by_word.contains_key(word)
    }

    /// All pronunciations of `word`, primary first.
    pub fn lookup(&self, word: &str) -> impl Iterator<Item = &PronEntry> {
        self.by_word
            .get(word)
            .into_iter()
            .flatten()
            .map(|&i| &self.entries[i])
    }

    pub fn primary(&self, word: &str) -> Option<&PronEntry> {
        self.lookup(word).next()
    }

    pub fn aligned_entry(&self, word: &str, variant: u32) -> Option<&AlignedEntry> {
        self.aligned_by_key
            .get(&(word.to_string(), variant))
            .map(|&i| &self.aligned[i])
    }

    /// Entries with exactly this pronunciation, ordered by variant, then
    /// letters-only words before punctuated ones, then word. Entries that
    /// did not align carry a relaxed segmentation whose chunks may be
    /// empty.
    pub fn homophones(&self, phonemes: &[Phoneme]) -> impl Iterator<Item = &AlignedEntry> {
        self.by_pronunciation
            .get(phonemes)
            .into_iter()
            .flatten()
            .map(|&i| self.aligned.get(i).unwrap_or_else(|| &self.relaxed[i - self.aligned.len()]))
    }

    pub fn pair(&self, phoneme: Phoneme, chunk: &str) -> Option<&PairStat> {
        self.pairs
            .binary_search_by(|p| p.phoneme.cmp(&phoneme).then_with(|| p.chunk.as_str().cmp(chunk)))
            .ok()
            .map(|i| &self.pairs[i])
    }

    /// Rows of the full table for one phoneme.
    pub fn pairs_for(&self, phoneme: Phoneme) -> &[PairStat] {
        let start = self.pairs.partition_point(|p| p.phoneme < phoneme);
        let end = self.pairs.partition_point(|p| p.phoneme <= phoneme);
        &self.pairs[start..end]
    }
}

/// Reads and parses a dictionary file.
pub fn load_dictionary(path: &Path) -> Result<ParseReport, LexiconError> {
    Ok(parse_dictionary(&read_file(path)?))
}
