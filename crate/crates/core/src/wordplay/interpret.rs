//! Invented-spelling interpreter.
//!
//! The blocks are turned into a small acyclic automaton of phoneme readings:
//! a letter can be read through the pair table (alone or merged with its
//! neighbours into a multi-letter chunk) or by its letter name, and a
//! phoneme block reads as itself. Lexicon pronunciations are stored in a
//! trie, and a weighted edit distance between trie paths and automaton paths
//! is computed one trie level at a time. Words may also match as extensions
//! of the input at a per-phoneme penalty. A subtree is abandoned once its
//! cost lower bound plus its best word prior cannot reach the current top-k.
//!
//! A word's score is `-cost + lambda * ln(freq)`, plus a bonus when the
//! letters spell the word exactly (logographic channel) or the phoneme blocks
//! match its pronunciation exactly.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::lexicon::{Lexicon, Phoneme};

use super::blocks::{Block, Payload};
use super::names::letter_name;
use super::render::letter_model;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct InterpreterConfig {
    /// Multiplier on feature distance for a substitution.
    pub substitution_scale: f64,
    pub insertion_cost: f64,
    pub deletion_cost: f64,
    /// Cost per word phoneme beyond the end of the input.
    pub prefix_penalty: f64,
    /// Multiplier on `-ln P(phoneme | chunk)` for pair-table readings.
    pub reading_weight: f64,
    /// Cost of reading a letter by its name.
    pub letter_name_cost: f64,
    /// Weight of the natural-log word frequency prior.
    pub frequency_weight: f64,
    /// Log10 frequency above which words count as familiar; the prior does
    /// not distinguish between familiar words.
    pub familiar_log10: f64,
    /// Bonus when the letters spell the word exactly.
    pub logographic_bonus: f64,
    /// Bonus when phoneme blocks match the pronunciation exactly.
    pub exact_phonetic_bonus: f64,
    /// Readings with `P(phoneme | chunk)` below this are ignored.
    pub min_reading_prob: f64,
    /// Multi-letter chunks seen fewer times than this are not offered.
    pub min_chunk_count: u64,
    /// Candidates costing more than this are dropped.
    pub max_cost: f64,
}

impl Default for InterpreterConfig {
    fn default() -> Self {
        Self {
            substitution_scale: 4.5,
            insertion_cost: 1.0,
            deletion_cost: 3.0,
            prefix_penalty: 0.5,
            reading_weight: 0.6,
            letter_name_cost: 0.55,
            frequency_weight: 0.5,
            familiar_log10: -3.6,
            logographic_bonus: 12.0,
            exact_phonetic_bonus: 12.0,
            min_reading_prob: 0.02,
            min_chunk_count: 20,
            max_cost: 10.0,
        }
    }
}

impl InterpreterConfig {
    pub fn validate(&self) -> Result<(), String> {
        let nonneg = [
            ("substitutionScale", self.substitution_scale),
            ("insertionCost", self.insertion_cost),
            ("deletionCost", self.deletion_cost),
            ("prefixPenalty", self.prefix_penalty),
            ("readingWeight", self.reading_weight),
            ("letterNameCost", self.letter_name_cost),
            ("frequencyWeight", self.frequency_weight),
            ("logographicBonus", self.logographic_bonus),
            ("exactPhoneticBonus", self.exact_phonetic_bonus),
            ("maxCost", self.max_cost),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("{name} must be a finite non-negative number, got {v}"));
            }
        }
        if !self.familiar_log10.is_finite() || self.familiar_log10 > 0.0 {
            return Err(format!(
                "familiarLog10 must be a finite number <= 0, got {}",
                self.familiar_log10
            ));
        }
        if !(0.0..1.0).contains(&self.min_reading_prob) {
            return Err(format!(
                "minReadingProb must be in [0, 1), got {}",
                self.min_reading_prob
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Channel {
    Phonetic,
    LetterName,
    Logographic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Interpretation {
    pub word: String,
    pub phonemes: Vec<Phoneme>,
    pub score: f64,
    pub channel: Channel,
}

#[derive(Debug, Default)]
struct TrieNode {
    children: Vec<(Phoneme, u32)>,
    /// Indices into `InterpreterIndex::prons` ending here.
    prons: Vec<u32>,
    /// Largest log-frequency of any word in the subtree.
    best_prior: f64,
}

/// Pronunciation trie over the spellable lexicon words.
#[derive(Debug, Default)]
pub struct InterpreterIndex {
    nodes: Vec<TrieNode>,
    words: Vec<String>,
    ln_freq: Vec<f64>,
    word_ids: HashMap<String, u32>,
    /// (word id, pronunciation)
    prons: Vec<(u32, Vec<Phoneme>)>,
}

impl InterpreterIndex {
    pub fn new(lexicon: &Lexicon) -> Self {
        let mut idx = InterpreterIndex {
            nodes: vec![TrieNode::default()],
            ..Default::default()
        };
        for entry in lexicon.entries() {
            if !entry.word.bytes().all(|b| b.is_ascii_uppercase()) {
                continue;
            }
            let next = idx.words.len() as u32;
            let wid = *idx.word_ids.entry(entry.word.clone()).or_insert(next);
            if wid == next {
                idx.words.push(entry.word.clone());
                idx.ln_freq.push(lexicon.frequencies().ln_freq(&entry.word));
            }
            let mut node = 0usize;
            for &ph in &entry.phonemes {
                node = match idx.nodes[node].children.iter().find(|c| c.0 == ph) {
                    Some(&(_, child)) => child as usize,
                    None => {
                        let child = idx.nodes.len();
                        idx.nodes.push(TrieNode::default());
                        idx.nodes[node].children.push((ph, child as u32));
                        child
                    }
                };
            }
            let pid = idx.prons.len() as u32;
            idx.prons.push((wid, entry.phonemes.clone()));
            idx.nodes[node].prons.push(pid);
        }
        for node in &mut idx.nodes {
            node.children.sort_by_key(|c| c.0);
        }
        // Children always have larger indices than their parent.
        for i in (0..idx.nodes.len()).rev() {
            let own = idx.nodes[i]
                .prons
                .iter()
                .map(|&p| idx.ln_freq[idx.prons[p as usize].0 as usize])
                .fold(f64::NEG_INFINITY, f64::max);
            let below = idx.nodes[i]
                .children
                .iter()
                .map(|&(_, c)| idx.nodes[c as usize].best_prior)
                .fold(f64::NEG_INFINITY, f64::max);
            idx.nodes[i].best_prior = own.max(below);
        }
        idx
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }
}

fn index(lexicon: &Lexicon) -> &InterpreterIndex {
    lexicon
        .interpreter_index
        .get_or_init(|| InterpreterIndex::new(lexicon))
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    from: usize,
    phoneme: Phoneme,
    cost: f64,
    /// Cost of skipping this arc: one deletion per letter it consumes.
    skip: f64,
    name: bool,
}

/// Reading automaton. States are topologically numbered; state 0 is the
/// start and `last` the accepting state.
#[derive(Debug)]
struct Automaton {
    incoming: Vec<Vec<Arc>>,
    last: usize,
}

impl Automaton {
    fn build(blocks: &[Block], lexicon: &Lexicon, cfg: &InterpreterConfig) -> Self {
        let model = letter_model(lexicon);
        // (start block, end block, phonemes, cost, is letter name)
        let mut edges: Vec<(usize, usize, Vec<Phoneme>, f64, bool)> = Vec::new();
        // For each block, the start and text of the run of letter blocks
        // containing it; chunk boundaries are scored within the run.
        let mut runs: Vec<(usize, String)> = Vec::with_capacity(blocks.len());
        let mut i = 0;
        while i < blocks.len() {
            let mut j = i;
            let mut text = String::new();
            while let Some(l) = blocks.get(j).and_then(|b| b.payload.letter()) {
                text.push(l.to_ascii_uppercase());
                j += 1;
            }
            let end = j.max(i + 1);
            runs.extend((i..end).map(|_| (i, text.clone())));
            i = end;
        }
        for (i, block) in blocks.iter().enumerate() {
            match block.payload {
                Payload::Phoneme { phoneme } => edges.push((i, i + 1, vec![phoneme], 0.0, false)),
                Payload::Letter { letter } => {
                    let (run_start, run) = &runs[i];
                    let offset = i - run_start;
                    let mut chunk = String::new();
                    for (len, b) in blocks[i..].iter().take(model.max_chunk()).enumerate() {
                        let Some(l) = b.payload.letter() else { break };
                        chunk.push(l);
                        if len > 0 && model.chunk_count(&chunk) < cfg.min_chunk_count {
                            continue;
                        }
                        let seg = model.segment_log_prior(run.as_bytes(), offset, offset + len + 1);
                        for &(ph, p) in model.readings(&chunk) {
                            if p >= cfg.min_reading_prob {
                                edges.push((i, i + len + 1, vec![ph], -cfg.reading_weight * (p.ln() + seg), false));
                            }
                        }
                    }
                    if let Some(name) = letter_name(letter) {
                        edges.push((i, i + 1, name.to_vec(), cfg.letter_name_cost, true));
                    }
                }
            }
        }

        // Block boundaries get ids 0..=n; chain interiors are appended after
        // and then everything is renumbered in (boundary, edge, step) order.
        let n = blocks.len();
        let mut keys: Vec<(usize, usize, usize)> = (0..=n).map(|b| (b, 0, 0)).collect();
        let mut raw: Vec<(usize, usize, Phoneme, f64, f64, bool)> = Vec::new();
        for (e, (start, end, phs, cost, name)) in edges.iter().enumerate() {
            let letters = (end - start) as f64;
            let mut from = *start;
            for (k, &ph) in phs.iter().enumerate() {
                let to = if k + 1 == phs.len() {
                    *end
                } else {
                    keys.push((*start, e + 1, k + 1));
                    keys.len() - 1
                };
                let (c, skip) = if k == 0 {
                    (*cost, *cost + cfg.deletion_cost * letters)
                } else {
                    (0.0, cfg.deletion_cost)
                };
                raw.push((from, to, ph, c, skip, *name));
                from = to;
            }
        }
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by_key(|&i| keys[i]);
        let mut rank = vec![0; keys.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let mut incoming = vec![Vec::new(); keys.len()];
        for (from, to, phoneme, cost, skip, name) in raw {
            incoming[rank[to]].push(Arc {
                from: rank[from],
                phoneme,
                cost,
                skip,
                name,
            });
        }
        Automaton {
            incoming,
            last: rank[n],
        }
    }

    fn len(&self) -> usize {
        self.incoming.len()
    }

    fn without_names(&self) -> Automaton {
        Automaton {
            incoming: self
                .incoming
                .iter()
                .map(|arcs| arcs.iter().filter(|a| !a.name).copied().collect())
                .collect(),
            last: self.last,
        }
    }
}

struct Scorer<'a> {
    cfg: &'a InterpreterConfig,
    sub: [[f64; 39]; 39],
}

impl<'a> Scorer<'a> {
    fn new(cfg: &'a InterpreterConfig) -> Self {
        let mut sub = [[0.0; 39]; 39];
        for a in Phoneme::ALL {
            for b in Phoneme::ALL {
                sub[a.index()][b.index()] = cfg.substitution_scale * a.feature_distance(b);
            }
        }
        Self { cfg, sub }
    }

    fn root(&self, aut: &Automaton, out: &mut [f64]) {
        out[0] = 0.0;
        for s in 1..aut.len() {
            out[s] = aut.incoming[s]
                .iter()
                .map(|a| out[a.from] + a.skip)
                .fold(f64::INFINITY, f64::min);
        }
    }

    /// Extends the alignment by one word phoneme `q`.
    fn step(&self, aut: &Automaton, parent: &[f64], q: Phoneme, out: &mut [f64]) {
        let row = &self.sub[q.index()];
        for s in 0..aut.len() {
            let mut v = parent[s] + self.cfg.insertion_cost;
            for a in &aut.incoming[s] {
                let m = parent[a.from] + a.cost + row[a.phoneme.index()];
                let d = out[a.from] + a.skip;
                v = v.min(m).min(d);
            }
            out[s] = v;
        }
    }

    /// Cost of matching one pronunciation, whole or as an extension.
    fn cost(&self, aut: &Automaton, phonemes: &[Phoneme]) -> f64 {
        let mut cur = vec![0.0; aut.len()];
        let mut next = vec![0.0; aut.len()];
        self.root(aut, &mut cur);
        let mut ext = cur[aut.last];
        for &q in phonemes {
            self.step(aut, &cur, q, &mut next);
            std::mem::swap(&mut cur, &mut next);
            ext = (ext + self.cfg.prefix_penalty).min(cur[aut.last]);
        }
        ext
    }
}

/// Ranked interpretations of a block sequence, best first.
pub fn interpret(blocks: &[Block], lexicon: &Lexicon, k: usize) -> Vec<Interpretation> {
    interpret_with(blocks, lexicon, k, &InterpreterConfig::default())
}

pub fn interpret_with(
    blocks: &[Block],
    lexicon: &Lexicon,
    k: usize,
    cfg: &InterpreterConfig,
) -> Vec<Interpretation> {
    if blocks.is_empty() || k == 0 || lexicon.is_empty() {
        return Vec::new();
    }
    let idx = index(lexicon);
    let aut = Automaton::build(blocks, lexicon, cfg);
    let scorer = Scorer::new(cfg);
    let lambda = cfg.frequency_weight;
    let cap = cfg.familiar_log10 * std::f64::consts::LN_10;
    let prior = |ln_f: f64| ln_f.min(cap);
    let all_phonemes = blocks.iter().all(|b| b.payload.phoneme().is_some());
    let spelled: Option<String> = blocks.iter().map(|b| b.payload.letter()).collect();
    let spelled_id = spelled.as_ref().and_then(|s| idx.word_ids.get(s)).copied();

    let mut top = TopK::new(k);
    if let Some(wid) = spelled_id {
        top.offer(
            cfg.logographic_bonus + lambda * prior(idx.ln_freq[wid as usize]),
            wid,
            u32::MAX,
            &idx.words,
        );
    }

    let width = aut.len();
    let mut rows: Vec<Vec<f64>> = vec![vec![0.0; width]];
    let mut ext: Vec<f64> = vec![0.0];
    scorer.root(&aut, &mut rows[0]);
    ext[0] = rows[0][aut.last];

    // Depth-first over the trie; rows[d] holds the alignment of the current
    // depth-d node.
    let mut stack: Vec<(u32, usize, Phoneme)> = idx.nodes[0]
        .children
        .iter()
        .rev()
        .map(|&(ph, c)| (c, 1, ph))
        .collect();
    while let Some((node, depth, q)) = stack.pop() {
        if rows.len() <= depth {
            rows.push(vec![0.0; width]);
            ext.push(0.0);
        }
        let (head, tail) = rows.split_at_mut(depth);
        scorer.step(&aut, &head[depth - 1], q, &mut tail[0]);
        let row = &rows[depth];
        ext[depth] = (ext[depth - 1] + cfg.prefix_penalty).min(row[aut.last]);

        let bound = row.iter().copied().fold(ext[depth], f64::min);
        let n = &idx.nodes[node as usize];
        if bound > cfg.max_cost
            || -bound + lambda * prior(n.best_prior) + bonus_cap(cfg, all_phonemes, bound) < top.threshold()
        {
            continue;
        }
        for &pid in &n.prons {
            let (wid, _) = idx.prons[pid as usize];
            let mut score = -ext[depth] + lambda * prior(idx.ln_freq[wid as usize]);
            if all_phonemes && ext[depth] == 0.0 {
                score += cfg.exact_phonetic_bonus;
            }
            if ext[depth] <= cfg.max_cost {
                top.offer(score, wid, pid, &idx.words);
            }
        }
        for &(ph, child) in n.children.iter().rev() {
            stack.push((child, depth + 1, ph));
        }
    }

    let plain = aut.without_names();
    top.into_items()
        .into_iter()
        .map(|(score, wid, pid)| {
            let word = idx.words[wid as usize].clone();
            if pid == u32::MAX {
                let phonemes = lexicon
                    .primary(&word)
                    .map(|e| e.phonemes.clone())
                    .unwrap_or_default();
                return Interpretation {
                    word,
                    phonemes,
                    score,
                    channel: Channel::Logographic,
                };
            }
            let phonemes = idx.prons[pid as usize].1.clone();
            let with_names = scorer.cost(&aut, &phonemes);
            let channel = if scorer.cost(&plain, &phonemes) > with_names + 1e-9 {
                Channel::LetterName
            } else {
                Channel::Phonetic
            };
            Interpretation {
                word,
                phonemes,
                score,
                channel,
            }
        })
        .collect()
}

fn bonus_cap(cfg: &InterpreterConfig, all_phonemes: bool, bound: f64) -> f64 {
    if all_phonemes && bound == 0.0 {
        cfg.exact_phonetic_bonus
    } else {
        0.0
    }
}

/// Best `k` distinct words by (score desc, word asc).
struct TopK {
    k: usize,
    items: Vec<(f64, u32, u32)>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    fn threshold(&self) -> f64 {
        if self.items.len() < self.k {
            f64::NEG_INFINITY
        } else {
            self.items[self.k - 1].0
        }
    }

    fn offer(&mut self, score: f64, wid: u32, pid: u32, words: &[String]) {
        if score < self.threshold() {
            return;
        }
        if let Some(pos) = self.items.iter().position(|it| it.1 == wid) {
            if self.items[pos].0 >= score {
                return;
            }
            self.items.remove(pos);
        }
        let at = self
            .items
            .iter()
            .position(|it| {
                it.0 < score || (it.0 == score && words[it.1 as usize] > words[wid as usize])
            })
            .unwrap_or(self.items.len());
        self.items.insert(at, (score, wid, pid));
        self.items.truncate(self.k);
    }

    fn into_items(self) -> Vec<(f64, u32, u32)> {
        self.items
    }
}

/// Edit cost of reading `blocks` as `phonemes` (whole or as an extension),
/// without the word prior.
pub fn match_cost(
    blocks: &[Block],
    phonemes: &[Phoneme],
    lexicon: &Lexicon,
    cfg: &InterpreterConfig,
) -> f64 {
    let aut = Automaton::build(blocks, lexicon, cfg);
    Scorer::new(cfg).cost(&aut, phonemes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{parse_dictionary, LexiconConfig, Phoneme::*, WordFrequencies};

    fn lex() -> Lexicon {
        let text = "FISH  F IH1 SH\nFISHES  F IH1 SH IH0 Z\nFEET  F IY1 T\nBUT  B AH1 T\n\
                    BUTTER  B AH1 T ER0\nBEAUTY  B Y UW1 T IY0\nSET  S EH1 T\nSAT  S AE1 T\n\
                    CAT  K AE1 T\nCUT  K AH1 T\nTRUCK  T R AH1 K\nREAD  R IY1 D\nREAD(1)  R EH1 D\n\
                    RED  R EH1 D\nSHED  SH EH1 D\n";
        let freq = "FISH\t-4.5\nBUT\t-2.5\nCAT\t-4.8\nRED\t-4.0\nSET\t-3.9\nFEET\t-4.6\n";
        let (lex, _) = Lexicon::build(parse_dictionary(text).entries, &LexiconConfig::default()).unwrap();
        lex.with_frequencies(WordFrequencies::parse(freq))
    }

    fn phoneme_blocks(phs: &[Phoneme]) -> Vec<Block> {
        phs.iter().enumerate().map(|(i, &p)| Block::phoneme(i as u32, p)).collect()
    }

    fn letter_blocks(s: &str) -> Vec<Block> {
        s.chars().enumerate().map(|(i, c)| Block::letter(i as u32, c)).collect()
    }

    /// Plain weighted edit distance of `input` against every prefix of
    /// `word`, plus the per-phoneme extension penalty.
    fn oracle_cost(input: &[Phoneme], word: &[Phoneme], cfg: &InterpreterConfig) -> f64 {
        let (n, m) = (input.len(), word.len());
        let mut d = vec![vec![0.0; m + 1]; n + 1];
        for i in 1..=n {
            d[i][0] = i as f64 * cfg.deletion_cost;
        }
        for j in 1..=m {
            d[0][j] = j as f64 * cfg.insertion_cost;
        }
        for i in 1..=n {
            for j in 1..=m {
                let sub = cfg.substitution_scale * input[i - 1].feature_distance(word[j - 1]);
                d[i][j] = (d[i - 1][j - 1] + sub)
                    .min(d[i - 1][j] + cfg.deletion_cost)
                    .min(d[i][j - 1] + cfg.insertion_cost);
            }
        }
        (0..=m)
            .map(|j| d[n][j] + cfg.prefix_penalty * (m - j) as f64)
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn phoneme_input_matches_plain_edit_distance() {
        let lex = lex();
        let cfg = InterpreterConfig::default();
        let inputs: [&[Phoneme]; 5] = [&[F, IH, SH], &[F, EH, S], &[B, AH, T], &[K, T], &[SH, EH, D, Z]];
        for input in inputs {
            for e in lex.entries() {
                let got = match_cost(&phoneme_blocks(input), &e.phonemes, &lex, &cfg);
                let want = oracle_cost(input, &e.phonemes, &cfg);
                assert!((got - want).abs() < 1e-9, "{input:?} vs {}: {got} != {want}", e.word);
            }
        }
    }

    #[test]
    fn pruned_search_equals_exhaustive_ranking() {
        let lex = lex();
        let cfg = InterpreterConfig::default();
        let cap = cfg.familiar_log10 * std::f64::consts::LN_10;
        for input in ["FES", "BUT", "KAT", "RD", "SHD"] {
            let blocks = letter_blocks(input);
            let mut best: HashMap<String, f64> = HashMap::new();
            for e in lex.entries() {
                let cost = match_cost(&blocks, &e.phonemes, &lex, &cfg);
                if cost > cfg.max_cost {
                    continue;
                }
                let mut score = -cost + cfg.frequency_weight * lex.frequencies().ln_freq(&e.word).min(cap);
                if e.word == input {
                    score = score.max(cfg.logographic_bonus + cfg.frequency_weight * lex.frequencies().ln_freq(&e.word).min(cap));
                }
                let slot = best.entry(e.word.clone()).or_insert(f64::NEG_INFINITY);
                *slot = slot.max(score);
            }
            let mut want: Vec<(String, f64)> = best.into_iter().collect();
            want.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            want.truncate(5);
            let got = interpret_with(&blocks, &lex, 5, &cfg);
            assert_eq!(got.len(), want.len(), "{input}");
            for (g, w) in got.iter().zip(&want) {
                assert_eq!(g.word, w.0, "{input}");
                assert!((g.score - w.1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn exact_spelling_ranks_first() {
        let lex = lex();
        for w in ["FISH", "BUT", "CAT", "TRUCK", "READ"] {
            let r = interpret(&letter_blocks(w), &lex, 3);
            assert_eq!(r[0].word, w);
            assert_eq!(r[0].channel, Channel::Logographic);
        }
    }

    #[test]
    fn exact_phonemes_rank_first_up_to_homophones() {
        let lex = lex();
        let r = interpret(&phoneme_blocks(&[R, EH, D]), &lex, 3);
        assert_eq!(r[0].word, "RED");
        assert_eq!(r[1].word, "READ");
        assert!(r[1].score < r[0].score);
    }

    #[test]
    fn results_are_distinct_and_ordered() {
        let lex = lex();
        let r = interpret(&letter_blocks("RED"), &lex, 10);
        let mut words: Vec<&str> = r.iter().map(|x| x.word.as_str()).collect();
        for w in r.windows(2) {
            assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].word < w[1].word));
        }
        words.sort();
        words.dedup();
        assert_eq!(words.len(), r.len());
    }

    #[test]
    fn letter_names_are_reported() {
        let lex = lex();
        let r = interpret(&letter_blocks("BUT"), &lex, 10);
        let beauty = r.iter().find(|x| x.word == "BEAUTY").unwrap();
        assert_eq!(beauty.channel, Channel::LetterName);
        let butter = r.iter().find(|x| x.word == "BUTTER").unwrap();
        assert_eq!(butter.channel, Channel::Phonetic);
    }

    #[test]
    fn empty_inputs() {
        let lex = lex();
        assert!(interpret(&[], &lex, 5).is_empty());
        assert!(interpret(&letter_blocks("CAT"), &lex, 0).is_empty());
        assert!(interpret(&letter_blocks("CAT"), &Lexicon::empty(), 5).is_empty());
    }

    #[test]
    fn config_rejects_bad_values_and_unknown_keys() {
        let cfg = InterpreterConfig {
            prefix_penalty: -1.0,
            ..InterpreterConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(InterpreterConfig::default().validate().is_ok());
        let bad = serde_json::from_str::<InterpreterConfig>(r#"{"substitutionScale": 1, "bogus": 2}"#);
        assert!(bad.is_err());
    }
}
