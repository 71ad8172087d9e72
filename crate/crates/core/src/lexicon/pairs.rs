use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::align::AlignedEntry;
use super::phoneme::Phoneme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Initial,
    Medial,
    Final,
}

impl Position {
    /// Position of phoneme `index` in a pronunciation of length `len`.
    /// A single-phoneme word counts as initial.
    pub fn of(index: usize, len: usize) -> Position {
        if index == 0 {
            Position::Initial
        } else if index + 1 == len {
            Position::Final
        } else {
            Position::Medial
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Positional {
    pub initial: u64,
    pub medial: u64,
    #[serde(rename = "final")]
    pub final_: u64,
}

impl Positional {
    pub fn get(&self, pos: Position) -> u64 {
        match pos {
            Position::Initial => self.initial,
            Position::Medial => self.medial,
            Position::Final => self.final_,
        }
    }

    fn bump(&mut self, pos: Position) {
        match pos {
            Position::Initial => self.initial += 1,
            Position::Medial => self.medial += 1,
            Position::Final => self.final_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.initial + self.medial + self.final_
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairStat {
    pub phoneme: Phoneme,
    pub chunk: String,
    pub count: u64,
    pub positional: Positional,
}

/// Aggregates (phoneme, chunk) occurrences over primary pronunciations.
/// The result is ordered by (phoneme, chunk).
pub fn pair_table(aligned: &[AlignedEntry]) -> Vec<PairStat> {
    let mut acc: BTreeMap<(Phoneme, &str), Positional> = BTreeMap::new();
    for entry in aligned.iter().filter(|e| e.variant == 1) {
        let len = entry.phonemes.len();
        for (i, (ph, chunk)) in entry.phonemes.iter().zip(&entry.chunks).enumerate() {
            acc.entry((*ph, chunk.as_str()))
                .or_default()
                .bump(Position::of(i, len));
        }
    }
    acc.into_iter()
        .map(|((phoneme, chunk), positional)| PairStat {
            phoneme,
            chunk: chunk.to_string(),
            count: positional.total(),
            positional,
        })
        .collect()
}

/// The `n` most frequent pairs, by count descending then (phoneme, chunk).
pub fn top_pairs(table: &[PairStat], n: usize) -> Vec<PairStat> {
    let mut rows = table.to_vec();
    rows.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then(a.phoneme.cmp(&b.phoneme))
            .then_with(|| a.chunk.cmp(&b.chunk))
    });
    rows.truncate(n);
    rows
}

pub fn pairs_to_tsv(rows: &[PairStat]) -> String {
    let mut out = String::from("phoneme\tchunk\tcount\tinitial\tmedial\tfinal\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.phoneme, r.chunk, r.count, r.positional.initial, r.positional.medial, r.positional.final_
        );
    }
    out
}
