//! Monotone grapheme/phoneme alignment.
//!
//! Every phoneme of a pronunciation consumes between one and `max_chunk`
//! letters of the spelling, in order, and every letter is consumed. The
//! chunk probabilities `P(chunk | phoneme)` are learned by EM with
//! forward-backward expected counts over the segmentation lattice.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::dict::PronEntry;
use super::phoneme::Phoneme;
use super::LexiconError;

pub const ALIGNMENT_SCHEMA: &str = "phonoblocks.alignment/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AlignmentConfig {
    pub max_chunk: usize,
    pub max_iterations: usize,
    /// Stop when the mean per-entry log-likelihood improves by less than this.
    pub tolerance: f64,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            max_chunk: 4,
            max_iterations: 50,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AlignmentModel {
    pub schema: String,
    pub max_chunk: usize,
    /// `P(chunk | phoneme)` over each phoneme's support.
    pub probs: BTreeMap<Phoneme, BTreeMap<String, f64>>,
}

impl AlignmentModel {
    pub fn prob(&self, phoneme: Phoneme, chunk: &str) -> f64 {
        self.probs
            .get(&phoneme)
            .and_then(|m| m.get(chunk))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn log_prob(&self, phoneme: Phoneme, chunk: &str) -> f64 {
        self.prob(phoneme, chunk).ln()
    }

    /// Checks the normalization invariant: every phoneme's chunk
    /// distribution is strictly positive and sums to one.
    pub fn validate(&self) -> Result<(), LexiconError> {
        if self.schema != ALIGNMENT_SCHEMA {
            return Err(LexiconError::Schema(self.schema.clone()));
        }
        for (ph, dist) in &self.probs {
            let total: f64 = dist.values().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(LexiconError::InvalidModel(format!(
                    "chunk probabilities for {ph} sum to {total}"
                )));
            }
            if let Some((chunk, p)) = dist.iter().find(|(_, p)| !(**p > 0.0)) {
                return Err(LexiconError::InvalidModel(format!(
                    "P({chunk:?} | {ph}) = {p} on support"
                )));
            }
            if let Some(chunk) = dist
                .keys()
                .find(|c| c.is_empty() || c.len() > self.max_chunk)
            {
                return Err(LexiconError::InvalidModel(format!(
                    "chunk {chunk:?} for {ph} violates max chunk {}",
                    self.max_chunk
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedEntry {
    pub word: String,
    pub variant: u32,
    pub phonemes: Vec<Phoneme>,
    pub chunks: Vec<String>,
    /// Log-probability of the chosen segmentation.
    pub score: f64,
}

impl AlignedEntry {
    pub fn spelling(&self) -> String {
        self.chunks.concat()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlignError {
    #[error("{word} ({letters} letters) cannot be split into {phonemes} chunks of 1..={max_chunk} letters")]
    Unalignable {
        word: String,
        letters: usize,
        phonemes: usize,
        max_chunk: usize,
    },
    #[error("no segmentation of {word} has nonzero probability under the model")]
    NoPath { word: String },
}

/// Whether a spelling of `letters` letters can be split into `phonemes`
/// chunks of 1..=`max_chunk` letters each.
pub fn is_alignable(letters: usize, phonemes: usize, max_chunk: usize) -> bool {
    phonemes >= 1 && letters >= phonemes && letters <= max_chunk * phonemes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    /// Abbreviation, digits, or non-ASCII headword.
    NotTrainable,
    Unalignable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Excluded {
    pub word: String,
    pub variant: u32,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrainingReport {
    /// Number of completed EM updates.
    pub iterations: usize,
    /// Corpus log-likelihood before each update, plus the final model's.
    pub log_likelihoods: Vec<f64>,
    pub trained_entries: usize,
    pub excluded: Vec<Excluded>,
}

#[derive(Clone, Copy)]
struct Edge {
    phone: u8,
    start: u8,
    len: u8,
    pair: u32,
}

struct Lattice {
    phonemes: usize,
    letters: usize,
    edges: std::ops::Range<usize>,
}

fn exclusion(entry: &PronEntry, max_chunk: usize) -> Option<ExclusionReason> {
    if !entry.is_trainable() || !entry.word.is_ascii() || entry.word.len() > 255 {
        return Some(ExclusionReason::NotTrainable);
    }
    if !is_alignable(entry.word.len(), entry.phonemes.len(), max_chunk) {
        return Some(ExclusionReason::Unalignable);
    }
    None
}

/// Whether state (i phonemes, j letters) lies on some complete path.
fn feasible(i: usize, j: usize, n: usize, m: usize, max_chunk: usize) -> bool {
    j >= i && j <= max_chunk * i && m - j >= n - i && m - j <= max_chunk * (n - i)
}

#[inline]
fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn train_alignment(
    entries: &[PronEntry],
    cfg: &AlignmentConfig,
) -> Result<(AlignmentModel, TrainingReport), LexiconError> {
    if cfg.max_chunk == 0 {
        return Err(LexiconError::InvalidConfig("maxChunk must be >= 1".into()));
    }
    if entries.is_empty() {
        return Err(LexiconError::EmptyCorpus);
    }

    let mut pair_ids: HashMap<(Phoneme, &[u8]), u32> = HashMap::new();
    let mut pairs: Vec<(Phoneme, &[u8])> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut lattices: Vec<Lattice> = Vec::new();
    let mut excluded = Vec::new();

    for entry in entries {
        if let Some(reason) = exclusion(entry, cfg.max_chunk) {
            excluded.push(Excluded {
                word: entry.word.clone(),
                variant: entry.variant,
                reason,
            });
            continue;
        }
        let letters = entry.word.as_bytes();
        let (n, m) = (entry.phonemes.len(), letters.len());
        let first = edges.len();
        for (i, &ph) in entry.phonemes.iter().enumerate() {
            for j in i..=m {
                if !feasible(i, j, n, m, cfg.max_chunk) {
                    continue;
                }
                for len in 1..=cfg.max_chunk.min(m - j) {
                    if !feasible(i + 1, j + len, n, m, cfg.max_chunk) {
                        continue;
                    }
                    let chunk = &letters[j..j + len];
                    let next = pairs.len() as u32;
                    let id = *pair_ids.entry((ph, chunk)).or_insert_with(|| {
                        pairs.push((ph, chunk));
                        next
                    });
                    edges.push(Edge {
                        phone: i as u8,
                        start: j as u8,
                        len: len as u8,
                        pair: id,
                    });
                }
            }
        }
        lattices.push(Lattice {
            phonemes: n,
            letters: m,
            edges: first..edges.len(),
        });
    }
    if lattices.is_empty() {
        return Err(LexiconError::EmptyCorpus);
    }

    // Uniform initialization over each phoneme's support.
    let mut support = [0usize; 39];
    for (ph, _) in &pairs {
        support[ph.index()] += 1;
    }
    let mut log_theta: Vec<f64> = pairs
        .iter()
        .map(|(ph, _)| -(support[ph.index()] as f64).ln())
        .collect();

    let mut counts = vec![0.0f64; pairs.len()];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut log_likelihoods = Vec::new();
    let mut iterations = 0;
    let per_entry = 1.0 / lattices.len() as f64;

    loop {
        counts.iter_mut().for_each(|c| *c = 0.0);
        let mut ll = 0.0;
        for lat in &lattices {
            ll += expected_counts(
                lat,
                &edges[lat.edges.clone()],
                &log_theta,
                &mut alpha,
                &mut beta,
                &mut counts,
            );
        }
        let converged = log_likelihoods
            .last()
            .is_some_and(|prev: &f64| (ll - prev) * per_entry < cfg.tolerance);
        log_likelihoods.push(ll);
        if converged || iterations >= cfg.max_iterations {
            break;
        }

        let mut totals = [0.0f64; 39];
        for (k, (ph, _)) in pairs.iter().enumerate() {
            totals[ph.index()] += counts[k];
        }
        for (k, (ph, _)) in pairs.iter().enumerate() {
            log_theta[k] = (counts[k] / totals[ph.index()]).ln();
        }
        iterations += 1;
    }

    let mut probs: BTreeMap<Phoneme, BTreeMap<String, f64>> = BTreeMap::new();
    for (k, (ph, chunk)) in pairs.iter().enumerate() {
        let p = log_theta[k].exp();
        if p > 0.0 {
            let chunk = std::str::from_utf8(chunk).expect("ascii chunk").to_string();
            probs.entry(*ph).or_default().insert(chunk, p);
        }
    }
    // Renormalize so dropped (underflowed) pairs do not break the sum invariant.
    for dist in probs.values_mut() {
        let total: f64 = dist.values().sum();
        dist.values_mut().for_each(|p| *p /= total);
    }

    let model = AlignmentModel {
        schema: ALIGNMENT_SCHEMA.to_string(),
        max_chunk: cfg.max_chunk,
        probs,
    };
    let report = TrainingReport {
        iterations,
        log_likelihoods,
        trained_entries: lattices.len(),
        excluded,
    };
    Ok((model, report))
}

/// Forward-backward over one entry's lattice. Adds posterior edge counts to
/// `counts` and returns the entry's log-likelihood.
fn expected_counts(
    lat: &Lattice,
    edges: &[Edge],
    log_theta: &[f64],
    alpha: &mut Vec<f64>,
    beta: &mut Vec<f64>,
    counts: &mut [f64],
) -> f64 {
    let width = lat.letters + 1;
    let cells = (lat.phonemes + 1) * width;
    alpha.clear();
    alpha.resize(cells, f64::NEG_INFINITY);
    beta.clear();
    beta.resize(cells, f64::NEG_INFINITY);
    let at = |i: usize, j: usize| i * width + j;

    alpha[0] = 0.0;
    for e in edges {
        let (i, j, l) = (e.phone as usize, e.start as usize, e.len as usize);
        let v = alpha[at(i, j)] + log_theta[e.pair as usize];
        let dst = at(i + 1, j + l);
        alpha[dst] = log_add(alpha[dst], v);
    }
    beta[at(lat.phonemes, lat.letters)] = 0.0;
    for e in edges.iter().rev() {
        let (i, j, l) = (e.phone as usize, e.start as usize, e.len as usize);
        let v = beta[at(i + 1, j + l)] + log_theta[e.pair as usize];
        let src = at(i, j);
        beta[src] = log_add(beta[src], v);
    }

    let log_z = alpha[at(lat.phonemes, lat.letters)];
    if log_z == f64::NEG_INFINITY {
        return 0.0;
    }
    for e in edges {
        let (i, j, l) = (e.phone as usize, e.start as usize, e.len as usize);
        let post =
            alpha[at(i, j)] + log_theta[e.pair as usize] + beta[at(i + 1, j + l)] - log_z;
        if post > f64::NEG_INFINITY {
            counts[e.pair as usize] += post.exp();
        }
    }
    log_z
}

/// Viterbi segmentation of `entry` under `model`.
///
/// Among equally scored segmentations the one whose chunk lengths are
/// lexicographically smallest (shorter earlier chunks) wins.
pub fn align(entry: &PronEntry, model: &AlignmentModel) -> Result<AlignedEntry, AlignError> {
    let word = entry.word.as_str();
    let (n, m) = (entry.phonemes.len(), word.len());
    let max_chunk = model.max_chunk;
    if !word.is_ascii() || !is_alignable(m, n, max_chunk) {
        return Err(AlignError::Unalignable {
            word: word.to_string(),
            letters: m,
            phonemes: n,
            max_chunk,
        });
    }

    // best[i][j]: best log-probability of aligning phonemes i.. to letters j..
    let width = m + 1;
    let mut best = vec![f64::NEG_INFINITY; (n + 1) * width];
    best[n * width + m] = 0.0;
    for i in (0..n).rev() {
        let dist = model.probs.get(&entry.phonemes[i]);
        for j in (0..m).rev() {
            if !feasible(i, j, n, m, max_chunk) {
                continue;
            }
            let mut b = f64::NEG_INFINITY;
            for len in 1..=max_chunk.min(m - j) {
                let rest = best[(i + 1) * width + j + len];
                if rest == f64::NEG_INFINITY {
                    continue;
                }
                let p = dist.and_then(|d| d.get(&word[j..j + len])).copied();
                if let Some(p) = p {
                    let v = p.ln() + rest;
                    if v > b {
                        b = v;
                    }
                }
            }
            best[i * width + j] = b;
        }
    }
    if best[0] == f64::NEG_INFINITY {
        return Err(AlignError::NoPath {
            word: word.to_string(),
        });
    }

    let mut chunks = Vec::with_capacity(n);
    let mut score = 0.0;
    let mut j = 0;
    for i in 0..n {
        let dist = model.probs.get(&entry.phonemes[i]);
        let target = best[i * width + j];
        let mut chosen = None;
        for len in 1..=max_chunk.min(m - j) {
            let rest = best[(i + 1) * width + j + len];
            if rest == f64::NEG_INFINITY {
                continue;
            }
            if let Some(p) = dist.and_then(|d| d.get(&word[j..j + len])) {
                if p.ln() + rest == target {
                    chosen = Some((len, p.ln()));
                    break;
                }
            }
        }
        let (len, lp) = chosen.expect("viterbi backtrace follows an optimal edge");
        chunks.push(word[j..j + len].to_string());
        score += lp;
        j += len;
    }

    Ok(AlignedEntry {
        word: word.to_string(),
        variant: entry.variant,
        phonemes: entry.phonemes.clone(),
        chunks,
        score,
    })
}

/// Penalty for a phoneme spelled by no letters at all, as in the K of
/// EXTORTED whose X also covers the S.
const SILENT_LOG_PROB: f64 = -12.0;
/// Penalty for a chunk the model never saw for that phoneme.
const UNSEEN_LOG_PROB: f64 = -20.0;

/// Segmentation for words that [`align`] rejects, used only for display.
///
/// A phoneme may take zero letters, and any chunk is allowed at a fixed
/// penalty, so every ASCII word of at most `max_chunk` letters per
/// phoneme gets a segmentation whose chunks concatenate to the word.
pub fn align_relaxed(entry: &PronEntry, model: &AlignmentModel) -> Option<AlignedEntry> {
    let word = entry.word.as_str();
    let (n, m) = (entry.phonemes.len(), word.len());
    let max_chunk = model.max_chunk;
    if !word.is_ascii() || n == 0 || m > max_chunk * n {
        return None;
    }
    let width = m + 1;
    let edge = |i: usize, j: usize, len: usize| -> f64 {
        if len == 0 {
            return SILENT_LOG_PROB;
        }
        match model.probs.get(&entry.phonemes[i]).and_then(|d| d.get(&word[j..j + len])) {
            Some(&p) if p > 0.0 => p.ln(),
            _ => UNSEEN_LOG_PROB,
        }
    };
    let mut best = vec![f64::NEG_INFINITY; (n + 1) * width];
    best[n * width + m] = 0.0;
    for i in (0..n).rev() {
        for j in (0..=m).rev() {
            let mut b = f64::NEG_INFINITY;
            for len in 0..=max_chunk.min(m - j) {
                let rest = best[(i + 1) * width + j + len];
                if rest > f64::NEG_INFINITY {
                    b = b.max(edge(i, j, len) + rest);
                }
            }
            best[i * width + j] = b;
        }
    }
    if best[0] == f64::NEG_INFINITY {
        return None;
    }
    let mut chunks = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let target = best[i * width + j];
        let len = (0..=max_chunk.min(m - j))
            .find(|&len| {
                let rest = best[(i + 1) * width + j + len];
                rest > f64::NEG_INFINITY && edge(i, j, len) + rest == target
            })
            .expect("backtrace follows an optimal edge");
        chunks.push(word[j..j + len].to_string());
        j += len;
    }
    Some(AlignedEntry {
        word: word.to_string(),
        variant: entry.variant,
        phonemes: entry.phonemes.clone(),
        chunks,
        score: best[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::dict::parse_dictionary;
    use Phoneme::*;

    fn entries(text: &str) -> Vec<PronEntry> {
        parse_dictionary(text).entries
    }

    fn all_segmentations(m: usize, n: usize, max_chunk: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return if m == 0 { vec![vec![]] } else { vec![] };
        }
        let mut out = Vec::new();
        for len in 1..=max_chunk.min(m) {
            for mut rest in all_segmentations(m - len, n - 1, max_chunk) {
                rest.insert(0, len);
                out.push(rest);
            }
        }
        out
    }

    #[test]
    fn relaxed_alignment_lets_one_letter_cover_two_sounds() {
        let corpus = entries("TAX  T AE1 K S\nAT  AE1 T\nSAT  S AE1 T\nKIT  K IH1 T\n");
        let (model, _) = train_alignment(&corpus, &AlignmentConfig::default()).unwrap();
        let tax = &corpus[0];
        assert!(align(tax, &model).is_err());
        let a = align_relaxed(tax, &model).unwrap();
        assert_eq!(a.spelling(), "TAX");
        assert_eq!(a.chunks.len(), 4);
        assert_eq!(a.chunks.iter().filter(|c| c.is_empty()).count(), 1);
        assert_eq!(&a.chunks[..2], ["T", "A"]);
        // Too many letters for the phonemes stays unspellable.
        let long = &entries("ABCDEFGHIJ  AH0\n")[0];
        assert!(align_relaxed(long, &model).is_none());
    }

    #[test]
    fn single_entry_forces_probability_one() {
        let (model, _) = train_alignment(&entries("A  AH0\n"), &AlignmentConfig::default()).unwrap();
        assert_eq!(model.prob(AH, "A"), 1.0);
        model.validate().unwrap();
    }

    #[test]
    fn three_word_corpus_learns_t() {
        let corpus = entries("CAT  K AE1 T\nAT  AE1 T\nTAT  T AE1 T\n");
        let (model, _) = train_alignment(&corpus, &AlignmentConfig::default()).unwrap();
        assert!((model.prob(T, "T") - 1.0).abs() < 1e-12);
        model.validate().unwrap();
    }

    #[test]
    fn iteration_cap_is_respected() {
        let corpus = entries("CAT  K AE1 T\nCHAT  CH AE1 T\nTHAT  DH AE1 T\nSHE  SH IY1\n");
        let cfg = AlignmentConfig {
            max_iterations: 1,
            tolerance: 0.0,
            ..Default::default()
        };
        let (_, report) = train_alignment(&corpus, &cfg).unwrap();
        assert_eq!(report.iterations, 1);
        assert_eq!(report.log_likelihoods.len(), 2);
    }

    #[test]
    fn em_is_monotone() {
        let corpus = entries(
            "CAT  K AE1 T\nCHAT  CH AE1 T\nTHAT  DH AE1 T\nSHE  SH IY1\nSHEET  SH IY1 T\nCHEAT  CH IY1 T\nKITE  K AY1 T\nTHE  DH AH0\n",
        );
        let cfg = AlignmentConfig {
            max_iterations: 30,
            tolerance: 0.0,
            ..Default::default()
        };
        let (_, report) = train_alignment(&corpus, &cfg).unwrap();
        for w in report.log_likelihoods.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{:?}", report.log_likelihoods);
        }
    }

    #[test]
    fn unalignable_entries_are_reported() {
        let corpus = entries("BOX  B AA1 K S\nA.  EY1\nCAT  K AE1 T\n");
        let (_, report) = train_alignment(&corpus, &AlignmentConfig::default()).unwrap();
        assert_eq!(report.trained_entries, 1);
        assert_eq!(
            report.excluded,
            vec![
                Excluded {
                    word: "BOX".into(),
                    variant: 1,
                    reason: ExclusionReason::Unalignable
                },
                Excluded {
                    word: "A.".into(),
                    variant: 1,
                    reason: ExclusionReason::NotTrainable
                },
            ]
        );
    }

    #[test]
    fn empty_corpus_and_bad_config() {
        assert!(matches!(
            train_alignment(&[], &AlignmentConfig::default()),
            Err(LexiconError::EmptyCorpus)
        ));
        let cfg = AlignmentConfig {
            max_chunk: 0,
            ..Default::default()
        };
        assert!(train_alignment(&entries("A  AH0\n"), &cfg).is_err());
    }

    #[test]
    fn viterbi_matches_enumeration_on_small_corpus() {
        let corpus = entries(
            "FISH  F IH1 SH\nSHIP  SH IH1 P\nFIT  F IH1 T\nDISH  D IH1 SH\nPIT  P IH1 T\nHIP  HH IH1 P\nWISH  W IH1 SH\n",
        );
        let (model, _) = train_alignment(&corpus, &AlignmentConfig::default()).unwrap();
        for e in &corpus {
            let aligned = align(e, &model).unwrap();
            assert_eq!(aligned.spelling(), e.word);
            let mut best = f64::NEG_INFINITY;
            for seg in all_segmentations(e.word.len(), e.phonemes.len(), 4) {
                let mut j = 0;
                let mut s = 0.0;
                for (ph, len) in e.phonemes.iter().zip(&seg) {
                    s += model.log_prob(*ph, &e.word[j..j + len]);
                    j += len;
                }
                best = best.max(s);
            }
            assert!((aligned.score - best).abs() < 1e-12, "{}", e.word);
        }
        let fish = align(&corpus[0], &model).unwrap();
        assert_eq!(fish.chunks, vec!["F", "I", "SH"]);
    }

    #[test]
    fn align_rejects_impossible_lengths() {
        let (model, _) = train_alignment(&entries("A  AH0\n"), &AlignmentConfig::default()).unwrap();
        let e = PronEntry {
            word: "X".into(),
            variant: 1,
            phonemes: vec![EH, K, S],
        };
        assert!(matches!(align(&e, &model), Err(AlignError::Unalignable { .. })));
        let e = PronEntry {
            word: "B".into(),
            variant: 1,
            phonemes: vec![B],
        };
        assert!(matches!(align(&e, &model), Err(AlignError::NoPath { .. })));
    }

    #[test]
    fn training_is_deterministic() {
        let corpus = entries("CAT  K AE1 T\nCHAT  CH AE1 T\nTHAT  DH AE1 T\nSHE  SH IY1\n");
        let a = train_alignment(&corpus, &AlignmentConfig::default()).unwrap().0;
        let b = train_alignment(&corpus, &AlignmentConfig::default()).unwrap().0;
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
