//! Fallback letter-to-sound decoding for spellings outside the lexicon.
//!
//! A spelling is segmented into chunks and each chunk read as a phoneme.
//! The score of a path is the product of `P(phoneme | chunk)` from the pair
//! table and a segmentation prior. Without the prior, long chunks always
//! win (FES would read as FE/S, like the end of KNIFE). The prior is a
//! chunk-end hazard: reading left to right from a chunk start, the chance
//! that the chunk stops after the current letters given the next letter and
//! whether the chunk starts the word. It is estimated from the aligned
//! lexicon with backoff to coarser contexts.

use std::collections::HashMap;

use crate::lexicon::{AlignedEntry, PairStat, Phoneme};

/// Pseudo-count used at each backoff level.
const BACKOFF: f64 = 2.0;
/// Log-penalty for skipping a character no chunk accounts for.
const SKIP_PENALTY: f64 = -20.0;

#[derive(Debug, Clone, Copy, Default)]
struct StopCount {
    stop: f64,
    seen: f64,
}

impl StopCount {
    fn add(&mut self, stop: bool) {
        self.seen += 1.0;
        if stop {
            self.stop += 1.0;
        }
    }

    fn smooth(&self, prior: f64) -> f64 {
        (self.stop + BACKOFF * prior) / (self.seen + BACKOFF)
    }
}

/// Chunk readings and the segmentation prior, derived once per lexicon.
#[derive(Debug, Clone, Default)]
pub struct LetterModel {
    max_chunk: usize,
    /// Readings per chunk as `(phoneme, P(phoneme | chunk))`, most likely first.
    readings: HashMap<String, Vec<(Phoneme, f64)>>,
    chunk_counts: HashMap<String, u64>,
    by_length: Vec<StopCount>,
    by_prefix: HashMap<String, StopCount>,
    by_next: HashMap<(String, u8), StopCount>,
    by_context: HashMap<(String, u8, bool), StopCount>,
}

impl LetterModel {
    pub fn new(pairs: &[PairStat], aligned: &[AlignedEntry], max_chunk: usize) -> Self {
        let mut chunk_counts: HashMap<String, u64> = HashMap::new();
        for p in pairs {
            *chunk_counts.entry(p.chunk.clone()).or_default() += p.count;
        }
        let mut readings: HashMap<String, Vec<(Phoneme, f64)>> = HashMap::new();
        for p in pairs {
            let total = chunk_counts[&p.chunk] as f64;
            readings
                .entry(p.chunk.clone())
                .or_default()
                .push((p.phoneme, p.count as f64 / total));
        }
        for r in readings.values_mut() {
            r.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        }

        let mut model = Self {
            max_chunk,
            readings,
            chunk_counts,
            by_length: vec![StopCount::default(); max_chunk + 1],
            ..Self::default()
        };
        for entry in aligned.iter().filter(|e| e.variant == 1) {
            let word = entry.word.as_bytes();
            let mut start = 0;
            for chunk in &entry.chunks {
                let len = chunk.len();
                for l in 1..=len {
                    let end = start + l;
                    // Forced stops carry no information.
                    if end == word.len() || l == max_chunk {
                        break;
                    }
                    let prefix = &entry.word[start..end];
                    let next = word[end];
                    let stop = l == len;
                    model.by_length[l].add(stop);
                    model.by_prefix.entry(prefix.to_string()).or_default().add(stop);
                    model
                        .by_next
                        .entry((prefix.to_string(), next))
                        .or_default()
                        .add(stop);
                    model
                        .by_context
                        .entry((prefix.to_string(), next, start == 0))
                        .or_default()
                        .add(stop);
                }
                start += len;
            }
        }
        model
    }

    pub fn max_chunk(&self) -> usize {
        self.max_chunk
    }

    /// Readings of `chunk` ordered by probability.
    pub fn readings(&self, chunk: &str) -> &[(Phoneme, f64)] {
        self.readings.get(chunk).map(Vec::as_slice).unwrap_or(&[])
    }

    /// How often `chunk` occurs as a chunk in primary alignments.
    pub fn chunk_count(&self, chunk: &str) -> u64 {
        self.chunk_counts.get(chunk).copied().unwrap_or(0)
    }

    /// Probability that a chunk starting with `prefix` stops right after it.
    fn hazard(&self, prefix: &str, next: u8, initial: bool) -> f64 {
        let l = prefix.len();
        let h0 = self
            .by_length
            .get(l)
            .filter(|c| c.seen > 0.0)
            .map(|c| c.stop / c.seen)
            .unwrap_or(0.5);
        let h1 = self.by_prefix.get(prefix).map_or(h0, |c| c.smooth(h0));
        let key = (prefix.to_string(), next);
        let h2 = self.by_next.get(&key).map_or(h1, |c| c.smooth(h1));
        self.by_context
            .get(&(key.0, next, initial))
            .map_or(h2, |c| c.smooth(h2))
    }

    /// Log-probability that the chunk at `start` is exactly `letters[start..end]`.
    pub(crate) fn segment_log_prior(&self, letters: &[u8], start: usize, end: usize) -> f64 {
        let word = std::str::from_utf8(letters).expect("ascii input");
        let mut lp = 0.0;
        for l in 1..=end - start {
            let stop_at = start + l;
            if stop_at == letters.len() || l == self.max_chunk {
                break;
            }
            let h = self
                .hazard(&word[start..stop_at], letters[stop_at], start == 0)
                .clamp(1e-6, 1.0 - 1e-6);
            lp += if stop_at == end { h.ln() } else { (1.0 - h).ln() };
        }
        lp
    }

    /// Viterbi decoding of an uppercase spelling into phonemes.
    ///
    /// Equal scores prefer shorter earlier chunks.
    pub fn decode(&self, spelling: &str) -> Vec<Phoneme> {
        let letters = spelling.as_bytes();
        let n = letters.len();
        if n == 0 || !spelling.is_ascii() {
            return Vec::new();
        }
        // best[j]: best score for letters[j..]; choice[j]: (end, phoneme).
        let mut best = vec![f64::NEG_INFINITY; n + 1];
        let mut choice: Vec<Option<(usize, Option<Phoneme>)>> = vec![None; n + 1];
        best[n] = 0.0;
        for start in (0..n).rev() {
            for end in start + 1..=(start + self.max_chunk).min(n) {
                if best[end] == f64::NEG_INFINITY {
                    continue;
                }
                let chunk = &spelling[start..end];
                let Some(&(ph, p)) = self.readings(chunk).first() else {
                    continue;
                };
                let v = p.ln() + self.segment_log_prior(letters, start, end) + best[end];
                if v > best[start] {
                    best[start] = v;
                    choice[start] = Some((end, Some(ph)));
                }
            }
            if choice[start].is_none() {
                best[start] = best[start + 1] + SKIP_PENALTY;
                choice[start] = Some((start + 1, None));
            }
        }
        let mut out = Vec::new();
        let mut j = 0;
        while j < n {
            let (end, ph) = choice[j].expect("every position has a choice");
            out.extend(ph);
            j = end;
        }
        out
    }
}
