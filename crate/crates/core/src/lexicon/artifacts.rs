//! On-disk lexicon artifacts written by `build-lexicon` and read at startup.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    pairs_to_tsv, parse_dictionary, read_file, AlignmentModel, Lexicon, LexiconError, TrainingReport,
    WordFrequencies,
};

pub const MANIFEST_SCHEMA: &str = "phonoblocks.lexicon/1";
pub const MANIFEST_FILE: &str = "manifest.json";
const DICTIONARY_FILE: &str = "dictionary.txt";
const FREQUENCIES_FILE: &str = "wordfreq.tsv";
const MODEL_FILE: &str = "alignment.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Manifest {
    pub schema: String,
    pub top_pairs: usize,
    pub entries: usize,
    pub words: usize,
    pub trained_entries: usize,
    pub excluded_entries: usize,
    pub em_iterations: usize,
    pub has_frequencies: bool,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LexiconError + '_ {
    move |source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write(path: &Path, text: &str) -> Result<(), LexiconError> {
    fs::write(path, text).map_err(io_err(path))
}

/// Writes the dictionary copy, alignment model, pair tables, creature
/// registry and a manifest into `out`.
pub fn write_artifacts(
    out: &Path,
    lexicon: &Lexicon,
    report: &TrainingReport,
    dictionary_text: &str,
    frequencies_text: Option<&str>,
) -> Result<Manifest, LexiconError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    write(&out.join(DICTIONARY_FILE), dictionary_text)?;
    if let Some(f) = frequencies_text {
        write(&out.join(FREQUENCIES_FILE), f)?;
    }
    write(&out.join(MODEL_FILE), &serde_json::to_string_pretty(lexicon.model())?)?;
    write(&out.join("pairs.tsv"), &pairs_to_tsv(lexicon.pair_table()))?;
    write(&out.join("pairs.json"), &serde_json::to_string(lexicon.pair_table())?)?;
    write(&out.join("top_pairs.tsv"), &pairs_to_tsv(lexicon.top_pairs()))?;
    write(&out.join("top_pairs.json"), &serde_json::to_string_pretty(lexicon.top_pairs())?)?;
    write(&out.join("creatures.json"), &serde_json::to_string_pretty(lexicon.creatures())?)?;
    write(&out.join("training_report.json"), &serde_json::to_string_pretty(report)?)?;
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA.to_string(),
        top_pairs: lexicon.top_pairs().len(),
        entries: lexicon.entries().len(),
        words: lexicon.word_count(),
        trained_entries: report.trained_entries,
        excluded_entries: report.excluded.len(),
        em_iterations: report.iterations,
        has_frequencies: frequencies_text.is_some(),
    };
    write(&out.join(MANIFEST_FILE), &serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Rebuilds the lexicon from a directory written by [`write_artifacts`]
/// without retraining.
pub fn load_artifacts(dir: &Path) -> Result<Lexicon, LexiconError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(LexiconError::MissingArtifacts(dir.display().to_string()));
    }
    let manifest: Manifest = serde_json::from_str(&read_file(&manifest_path)?)?;
    if manifest.schema != MANIFEST_SCHEMA {
        return Err(LexiconError::Schema(manifest.schema));
    }
    let model: AlignmentModel = serde_json::from_str(&read_file(&dir.join(MODEL_FILE))?)?;
    let entries = parse_dictionary(&read_file(&dir.join(DICTIONARY_FILE))?).entries;
    let lexicon = Lexicon::from_model(entries, model, manifest.top_pairs)?;
    Ok(if manifest.has_frequencies {
        lexicon.with_frequencies(WordFrequencies::load(&dir.join(FREQUENCIES_FILE))?)
    } else {
        lexicon
    })
}
