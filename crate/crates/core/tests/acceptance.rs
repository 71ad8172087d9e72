//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Every tolerance lives in the constants below.
//!
//! Runs against the full dictionary in `data/`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use phonoblocks::layout::{mds_2d, phoneme_keyboard, similarity, GridConfig, MdsConfig, MdsMethod, SimilarityMatrix};
use phonoblocks::lexicon::{
    align, is_alignable, load_dictionary, Lexicon, LexiconConfig, Phoneme, PronEntry, WordFrequencies,
};
use phonoblocks::scaffold::{plan, simulate, EventKind, LearnerPolicy, ScaffoldConfig};
use phonoblocks::session::{replay, Command, LogHeader, LogWriter, SessionInit, SessionState, LOG_SCHEMA};
use phonoblocks::study::{
    child_ids, design_trials, fit_model, point_mass, simulate_minigame, virtual_population, Condition, GenParams,
    McmcConfig, Minigame, MinigameConfig, Response, DEFAULT_THRESHOLDS, TEST_PHONEMES,
};
use phonoblocks::wordplay::{interpret, pronounce_letters, render_phonemes, Block, BoxMode, DisplayMode, Payload};
use phonoblocks::Action;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

// Alignment.
const ALIGN_SAMPLE: usize = 1000;
const ALIGN_MAX_LETTERS: usize = 6;
const ALIGN_SCORE_TOL: f64 = 1e-9;
const ALIGN_RUNTIME: Duration = Duration::from_secs(120);
// Pair table.
const ATTESTED: [(&str, Phoneme); 9] = [
    ("A", Phoneme::AE),
    ("A", Phoneme::EY),
    ("A", Phoneme::AH),
    ("U", Phoneme::AH),
    ("O", Phoneme::AH),
    ("C", Phoneme::K),
    ("C", Phoneme::S),
    ("K", Phoneme::K),
    ("CK", Phoneme::K),
];
const ATTESTED_MIN: usize = 8;
// Round trip.
const ROUND_TRIP_SAMPLE: usize = 1000;
const ROUND_TRIP_MIN: f64 = 0.99;
// Interpreter.
const FISH_MAX_RANK: usize = 3;
const BEAUTIFUL_MAX_RANK: usize = 10;
const EXACT_SAMPLE: usize = 500;
const EXACT_MIN: f64 = 0.95;
// Scaffold.
const SCAFFOLD_CASES: usize = 10_000;
const PERFECT_WORDS: usize = 500;
// Layout.
const MDS_CASES: usize = 100;
const MDS_TOL: f64 = 1e-9;
const STRESS_SLACK: f64 = 1e-12;
const LAYOUT_SEEDS: u64 = 100;
const CONSONANT_REGIONS: usize = 3;
// Synthetic recovery.
const RECOVERY_CHILDREN: usize = 26;
const RECOVERY_REPLICATES: u32 = 10;
const RECOVERY_SEED: u64 = 1;
const RHAT_MAX: f64 = 1.05;
const FIT_RUNTIME: Duration = Duration::from_secs(600);
const TIME_TRUTH: (f64, f64) = (-0.14, 0.28);
const ERROR_TRUTH: (f64, f64) = (-0.38, 0.94);
// Virtual population.
const POPULATION: usize = 100_000;
const ORACLE_TOL_PP: f64 = 1.0;
const LETTER_FASTER_PCT: f64 = 69.1;
const CREATURE_ERRORS_PCT: f64 = 34.3;
const QUOTED_TOL_PP: f64 = 0.1;
/// Published expectations for the error model: (threshold, creature %, letter %).
const ERROR_EXPECTATIONS: [(f64, f64, f64); 4] = [(1.0, 36.7, 63.3), (1.25, 22.9, 50.3), (1.5, 14.0, 41.3), (2.0, 5.9, 29.7)];
const REFERENCE_TOL_PP: f64 = 10.0;
// Minigame design.
const DESIGN_CHILDREN: usize = 26;
const DESIGN_TEST_TRIALS: usize = 416;
const DESIGN_SEEDS: u64 = 50;
// Event sourcing.
const REPLAY_SESSIONS: usize = 1000;
const REPLAY_MAX_COMMANDS: usize = 40;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

/// Spellable primary entries: A-Z headwords the lexicon aligned.
fn word_pool(lex: &Lexicon) -> Vec<String> {
    lex.aligned()
        .iter()
        .filter(|a| a.variant == 1 && a.word.bytes().all(|b| b.is_ascii_uppercase()))
        .map(|a| a.word.clone())
        .collect()
}

fn letters(s: &str) -> Vec<Block> {
    s.chars().enumerate().map(|(i, c)| Block::letter(i as u32, c)).collect()
}

fn rank(lex: &Lexicon, input: &str, word: &str, k: usize) -> Option<usize> {
    interpret(&letters(input), lex, k).iter().position(|r| r.word == word).map(|p| p + 1)
}

/// Best segmentation score by listing every split of the spelling.
fn exhaustive_best(word: &[u8], phonemes: &[Phoneme], lex: &Lexicon) -> f64 {
    let model = lex.model();
    if phonemes.is_empty() {
        return if word.is_empty() { 0.0 } else { f64::NEG_INFINITY };
    }
    let mut best = f64::NEG_INFINITY;
    for len in 1..=model.max_chunk.min(word.len()) {
        let chunk = std::str::from_utf8(&word[..len]).unwrap();
        let head = model.log_prob(phonemes[0], chunk);
        if head == f64::NEG_INFINITY {
            continue;
        }
        best = best.max(head + exhaustive_best(&word[len..], &phonemes[1..], lex));
    }
    best
}

fn alignment_oracle(lex: &Lexicon, entries: &[PronEntry], build_time: Duration) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let short: Vec<&PronEntry> = entries
        .iter()
        .filter(|e| e.is_trainable() && e.word.is_ascii() && e.word.len() <= ALIGN_MAX_LETTERS)
        .filter(|e| is_alignable(e.word.len(), e.phonemes.len(), lex.model().max_chunk))
        .collect();
    let sample: Vec<&&PronEntry> = short.choose_multiple(&mut rng, ALIGN_SAMPLE).collect();
    let (mut alignable, mut agree) = (0, 0);
    for e in &sample {
        let oracle = exhaustive_best(e.word.as_bytes(), &e.phonemes, lex);
        if oracle == f64::NEG_INFINITY {
            if align(e, lex.model()).is_err() {
                alignable += 1;
                agree += 1;
            }
            continue;
        }
        alignable += 1;
        if let Ok(a) = align(e, lex.model()) {
            let tol = ALIGN_SCORE_TOL * oracle.abs().max(1.0);
            let scored = a.phonemes.iter().zip(&a.chunks).map(|(p, c)| lex.model().log_prob(*p, c)).sum::<f64>();
            if (a.score - oracle).abs() <= tol && (scored - oracle).abs() <= tol {
                agree += 1;
            }
        }
    }
    let violations = lex
        .aligned()
        .iter()
        .filter(|a| a.chunks.concat() != a.word || a.chunks.len() != a.phonemes.len() || a.chunks.iter().any(|c| c.is_empty()))
        .count();
    let elapsed = build_time + start.elapsed();
    outcome(
        agree == alignable && alignable > 0 && violations == 0 && elapsed < ALIGN_RUNTIME,
        format!(
            "viterbi = exhaustive on {agree}/{alignable} sampled words; {violations} concatenation violations in {} entries; {:.1}s",
            lex.aligned().len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn pair_attestation(lex: &Lexicon) -> Outcome {
    let found: Vec<String> = ATTESTED
        .iter()
        .filter(|(c, p)| lex.top_pairs().iter().any(|s| s.phoneme == *p && s.chunk == *c))
        .map(|(c, p)| format!("{c}->{p}"))
        .collect();
    outcome(
        found.len() >= ATTESTED_MIN && lex.top_pairs().len() == 80,
        format!("{}/9 attested pairs in the top {}: {}", found.len(), lex.top_pairs().len(), found.join(" ")),
    )
}

fn round_trip(lex: &Lexicon) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let primaries: Vec<&PronEntry> = lex.entries().iter().filter(|e| e.is_primary()).collect();
    let sample: Vec<&&PronEntry> = primaries.choose_multiple(&mut rng, ROUND_TRIP_SAMPLE).collect();
    let ok = sample
        .iter()
        .filter(|e| pronounce_letters(&render_phonemes(&e.phonemes, lex).concat(), lex) == e.phonemes)
        .count();
    let rate = ok as f64 / sample.len() as f64;
    outcome(rate >= ROUND_TRIP_MIN, format!("{ok}/{} pronunciations survive render then pronounce", sample.len()))
}

fn interpreter(lex: &Lexicon, pool: &[String]) -> Outcome {
    let fish = rank(lex, "FES", "FISH", 25);
    let but = rank(lex, "BUT", "BUT", 25);
    let beautiful = rank(lex, "BUT", "BEAUTIFUL", 25);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sample: Vec<&String> = pool.choose_multiple(&mut rng, EXACT_SAMPLE).collect();
    let first = sample.iter().filter(|w| rank(lex, w, w, 1) == Some(1)).count();
    let rate = first as f64 / sample.len() as f64;
    let within = |r: Option<usize>, max: usize| r.is_some_and(|r| r <= max);
    outcome(
        within(fish, FISH_MAX_RANK) && but == Some(1) && within(beautiful, BEAUTIFUL_MAX_RANK) && rate >= EXACT_MIN,
        format!(
            "FES->FISH rank {fish:?}; BUT->BUT rank {but:?}, BEAUTIFUL rank {beautiful:?}; exact spelling first for {first}/{}",
            sample.len()
        ),
    )
}

fn scaffold(lex: &Lexicon, pool: &[String]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut cases, mut over_bound, mut prefix_violations, mut plan_errors) = (0, 0, 0, 0);
    while cases < SCAFFOLD_CASES {
        let word = pool.choose(&mut rng).unwrap();
        let cue = rng.random_range(1..=3);
        let cfg = ScaffoldConfig {
            keyboard_size: rng.random_range(2..=8),
            cue_threshold: cue,
            auto_threshold: rng.random_range(cue..=6),
            seed: rng.random(),
            ..ScaffoldConfig::default()
        };
        let Ok(p) = plan(word, lex, &cfg) else {
            plan_errors += 1;
            if plan_errors > SCAFFOLD_CASES {
                break;
            }
            continue;
        };
        let policy = LearnerPolicy {
            default_knowledge: rng.random_range(0.0..=1.0),
            slip_rate: rng.random_range(0.0..0.5),
            seed: rng.random(),
            ..LearnerPolicy::default()
        };
        let t = simulate(&p, &policy);
        cases += 1;
        if t.actions > p.action_bound() {
            over_bound += 1;
        }
        let chunks = p.chunks();
        let mut placed: Vec<String> = Vec::new();
        let mut ok = true;
        for e in &t.events {
            if matches!(e.kind, EventKind::Place | EventKind::AutoPlace | EventKind::Preassemble) {
                placed.push(e.detail.chunk.clone().unwrap_or_default());
                ok &= e.step_index + 1 == placed.len() && placed.iter().zip(&chunks).all(|(a, b)| a == b);
            }
        }
        ok &= t.placed == chunks && placed == chunks;
        if !ok {
            prefix_violations += 1;
        }
    }

    let mut perfect_rng = ChaCha8Rng::seed_from_u64(12);
    let words: Vec<&String> = pool.choose_multiple(&mut perfect_rng, PERFECT_WORDS).collect();
    let mut helped = 0;
    let mut perfect = 0;
    for (i, w) in words.iter().enumerate() {
        let Ok(p) = plan(w, lex, &ScaffoldConfig::default()) else { continue };
        perfect += 1;
        let t = simulate(&p, &LearnerPolicy::with_knowledge(1.0, i as u64));
        helped += t.events.iter().filter(|e| matches!(e.kind, EventKind::Cue | EventKind::AutoPlace)).count();
    }
    outcome(
        cases == SCAFFOLD_CASES && over_bound == 0 && prefix_violations == 0 && perfect == PERFECT_WORDS && helped == 0,
        format!(
            "{cases} cases: {over_bound} over the action bound, {prefix_violations} prefix violations ({plan_errors} words without a plan); perfect learner on {perfect} words: {helped} cues/auto-places"
        ),
    )
}

fn distances(points: &[[f64; 2]]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|a| points.iter().map(|b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()).collect())
        .collect()
}

fn layout() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    for _ in 0..MDS_CASES {
        let n = rng.random_range(3..=40);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let d = distances(&pts);
        let m = SimilarityMatrix::new((0..n).map(|i| format!("p{i}")).collect(), d.clone()).unwrap();
        let fit = mds_2d(&m, &MdsConfig::default()).unwrap();
        let back = distances(&fit.coords);
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((back[i][j] - d[i][j]).abs());
            }
        }
    }

    let mut stress_rises = 0;
    let mut matrices = vec![similarity(&Phoneme::ALL)];
    for _ in 0..MDS_CASES - 1 {
        let n = rng.random_range(4..=30);
        let mut v = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..i {
                let x = rng.random_range(0.1..3.0);
                v[i][j] = x;
                v[j][i] = x;
            }
        }
        matrices.push(SimilarityMatrix::new((0..n).map(|i| format!("q{i}")).collect(), v).unwrap());
    }
    for (k, m) in matrices.iter().enumerate() {
        let cfg = MdsConfig {
            method: MdsMethod::Smacof,
            seed: k as u64,
            ..MdsConfig::default()
        };
        let h = mds_2d(m, &cfg).unwrap().stress_history;
        if h.windows(2).any(|w| w[1] > w[0] * (1.0 + STRESS_SLACK) + STRESS_SLACK) {
            stress_rises += 1;
        }
    }

    let mut bad_layouts = 0;
    for seed in 0..LAYOUT_SEEDS {
        let cfg = MdsConfig {
            method: if seed % 2 == 0 { MdsMethod::Smacof } else { MdsMethod::Classical },
            seed,
            anchor: (seed as usize) % 39,
            ..MdsConfig::default()
        };
        let kb = phoneme_keyboard(&cfg, GridConfig::default()).unwrap();
        let g = &kb.grid;
        let mut groups: Vec<u8> = g.cells.iter().filter_map(|c| c.group).collect();
        groups.sort_unstable();
        groups.dedup();
        let all_placed = Phoneme::ALL.iter().all(|p| g.position(p.symbol()).is_some());
        if !(g.cells.len() == 39 && all_placed && g.is_injective() && g.groups_connected() && groups.len() == CONSONANT_REGIONS) {
            bad_layouts += 1;
        }
    }
    outcome(
        worst < MDS_TOL && stress_rises == 0 && bad_layouts == 0,
        format!(
            "classical MDS max distance error {worst:.1e} over {MDS_CASES} configurations; {stress_rises} non-monotone SMACOF runs; {bad_layouts}/{LAYOUT_SEEDS} bad keyboards"
        ),
    )
}

fn recovery() -> Outcome {
    let specs = design_trials(&child_ids(RECOVERY_CHILDREN), RECOVERY_SEED).unwrap();
    let params = GenParams {
        replicates: RECOVERY_REPLICATES,
        ..GenParams::default()
    };
    let records = simulate_minigame(&specs, &params, RECOVERY_SEED + 100).unwrap();
    let cfg = McmcConfig {
        seed: RECOVERY_SEED,
        ..McmcConfig::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (response, (b, sd)) in [(Response::Time, TIME_TRUTH), (Response::Errors, ERROR_TRUTH)] {
        let start = Instant::now();
        let fit = fit_model(&records, response, &cfg).unwrap();
        let elapsed = start.elapsed();
        let bi = fit.interval("bCond", 0.95).unwrap();
        let si = fit.interval("sdChildSlope", 0.95).unwrap();
        let covered = bi.0 <= b && b <= bi.1 && si.0 <= sd && sd <= si.1;
        let rhat_ok = fit.rhat.values().all(|r| *r < RHAT_MAX);
        pass &= covered && rhat_ok && elapsed < FIT_RUNTIME;
        parts.push(format!(
            "{response:?}: bCond {b} in [{:.2}, {:.2}], sdChildSlope {sd} in [{:.2}, {:.2}], max R-hat {:.3}, {:.0}s",
            bi.0,
            bi.1,
            si.0,
            si.1,
            fit.max_rhat(),
            elapsed.as_secs_f64()
        ));
    }
    outcome(pass, parts.join("; "))
}

/// Closed-form shares in percent: (creature-lover, letter-lover).
fn closed_form(b: f64, sd: f64, t: f64) -> (f64, f64) {
    let phi = Normal::new(0.0, 1.0).unwrap();
    (100.0 * (1.0 - phi.cdf((t.ln() - b) / sd)), 100.0 * phi.cdf((-t.ln() - b) / sd))
}

fn virtual_population_check() -> Outcome {
    let mut worst = 0.0f64;
    let mut tables = BTreeMap::new();
    for (response, (b, sd)) in [(Response::Time, TIME_TRUTH), (Response::Errors, ERROR_TRUTH)] {
        let t = virtual_population(&point_mass(response, b, sd), &DEFAULT_THRESHOLDS, POPULATION, 17, None).unwrap();
        for row in &t.rows {
            let (c, l) = closed_form(b, sd, row.threshold);
            worst = worst.max((row.creature.expectation - c).abs()).max((row.letter.expectation - l).abs());
        }
        tables.insert(format!("{response:?}"), t);
    }
    let letter_faster = tables["Time"].row(1.0).unwrap().letter.expectation;
    let creature_errors = tables["Errors"].row(1.0).unwrap().creature.expectation;
    let quoted_ok = (closed_form(TIME_TRUTH.0, TIME_TRUTH.1, 1.0).1 - LETTER_FASTER_PCT).abs() < QUOTED_TOL_PP
        && (closed_form(ERROR_TRUTH.0, ERROR_TRUTH.1, 1.0).0 - CREATURE_ERRORS_PCT).abs() < QUOTED_TOL_PP
        && (letter_faster - LETTER_FASTER_PCT).abs() < ORACLE_TOL_PP
        && (creature_errors - CREATURE_ERRORS_PCT).abs() < ORACLE_TOL_PP;
    let mut reference_gap = 0.0f64;
    for (t, c, l) in ERROR_EXPECTATIONS {
        let row = tables["Errors"].row(t).unwrap();
        reference_gap = reference_gap.max((row.creature.expectation - c).abs()).max((row.letter.expectation - l).abs());
    }
    outcome(
        worst < ORACLE_TOL_PP && quoted_ok && reference_gap <= REFERENCE_TOL_PP,
        format!(
            "max gap to the normal-CDF oracle {worst:.2}pp at M={POPULATION}; letter-faster {letter_faster:.1}%, creature-lover on errors {creature_errors:.1}%; max gap to reference error rows {reference_gap:.1}pp"
        ),
    )
}

fn design() -> Outcome {
    let mut failures = Vec::new();
    for seed in 0..DESIGN_SEEDS {
        let specs = design_trials(&child_ids(DESIGN_CHILDREN), seed).unwrap();
        let tests: Vec<_> = specs.iter().filter(|s| !s.is_practice()).collect();
        let mut by_pair: BTreeMap<(&str, Phoneme), Vec<(Condition, u8)>> = BTreeMap::new();
        for s in &tests {
            by_pair.entry((s.child_id.as_str(), s.phoneme)).or_default().push((s.condition, s.session));
        }
        let paired = by_pair.len() == DESIGN_CHILDREN * TEST_PHONEMES.len()
            && by_pair.values().all(|v| {
                v.len() == 2 && v[0].0 != v[1].0 && v[0].1 != v[1].1
            })
            && tests.iter().all(|s| TEST_PHONEMES.contains(&s.phoneme));
        if tests.len() != DESIGN_TEST_TRIALS || !paired {
            failures.push(seed);
        }
    }
    let n = design_trials(&child_ids(DESIGN_CHILDREN), 0).unwrap().iter().filter(|s| !s.is_practice()).count();
    outcome(
        failures.is_empty(),
        format!("{n} test trials for {DESIGN_CHILDREN} children; pairing broken for seeds {failures:?} of {DESIGN_SEEDS}"),
    )
}

fn random_command(state: &SessionState, rng: &mut ChaCha8Rng) -> Command {
    let toggle = |rng: &mut ChaCha8Rng| Command::ToggleDisplay {
        display_mode: *[DisplayMode::Letters, DisplayMode::CreaturesWithLetters, DisplayMode::CreaturesOnly]
            .choose(rng)
            .unwrap(),
    };
    match state {
        SessionState::Freeplay { word_box } => {
            let ids: Vec<u32> = word_box.blocks.iter().map(|b| b.id).collect();
            let some_id = |rng: &mut ChaCha8Rng| ids.choose(rng).copied().unwrap_or(0).max(rng.random_range(0..2) * 99);
            match rng.random_range(0..10) {
                0..=4 => {
                    let payload = if rng.random_bool(0.5) {
                        Payload::Phoneme {
                            phoneme: *Phoneme::ALL.choose(rng).unwrap(),
                        }
                    } else {
                        Payload::Letter {
                            letter: rng.random_range(b'A'..=b'Z') as char,
                        }
                    };
                    let index = rng.random_bool(0.5).then(|| rng.random_range(0..=ids.len() + 1));
                    Command::Insert { payload, index }
                }
                5 | 6 => Command::Remove { block_id: some_id(rng) },
                7 => Command::Move {
                    block_id: some_id(rng),
                    to: rng.random_range(0..=ids.len()),
                },
                8 => toggle(rng),
                _ => Command::Clear,
            }
        }
        SessionState::Scaffolded { scaffold, .. } => {
            if rng.random_range(0..8) == 0 {
                return toggle(rng);
            }
            let action = match rng.random_range(0..6) {
                0 => Action::Timeout,
                1 | 2 => match scaffold.target() {
                    Some(t) => Action::Pick { block_id: t.id },
                    None => Action::Timeout,
                },
                _ => Action::Pick {
                    block_id: scaffold.keyboard.choose(rng).map_or(7, |b| b.id),
                },
            };
            Command::Place { action }
        }
        SessionState::Minigame { minigame } => {
            let symbol = match minigame.trials.get(minigame.current) {
                Some(spec) if rng.random_bool(0.6) => Minigame::key_for(spec),
                _ => minigame
                    .prompt()
                    .and_then(|p| p.keyboard.cells.choose(rng).map(|c| c.symbol.clone()))
                    .unwrap_or_else(|| "A".into()),
            };
            let elapsed_ms = if rng.random_range(0..20) == 0 { 0.0 } else { rng.random_range(50.0..20_000.0) };
            Command::Answer { symbol, elapsed_ms }
        }
    }
}

fn event_sourcing(lex: &Lexicon, pool: &[String]) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let (mut mismatches, mut accepted, mut rejected) = (0, 0u64, 0u64);
    let mut kinds = [0usize; 3];
    for s in 0..REPLAY_SESSIONS {
        let k = rng.random_range(0..3);
        kinds[k] += 1;
        let init = match k {
            0 => SessionInit::Freeplay {
                mode: if rng.random_bool(0.5) { BoxMode::Phoneme } else { BoxMode::Letter },
            },
            1 => SessionInit::Scaffolded {
                word: pool.choose(&mut rng).unwrap().clone(),
                config: ScaffoldConfig {
                    seed: rng.random(),
                    ..ScaffoldConfig::default()
                },
            },
            _ => SessionInit::Minigame {
                config: MinigameConfig {
                    child_id: format!("c{s:04}"),
                    session: rng.random_range(1..=2),
                    seed: rng.random(),
                    keyboard_width: 7,
                },
            },
        };
        let Ok((mut state, _)) = SessionState::init(&init, lex) else {
            kinds[k] -= 1;
            continue;
        };
        let path = dir.path().join(format!("s{s:06}.jsonl"));
        let mut log = LogWriter::create(
            &path,
            &LogHeader {
                schema: LOG_SCHEMA.into(),
                session_id: format!("s{s:06}"),
                init: init.clone(),
            },
        )
        .unwrap();
        let mut logged = 0;
        for _ in 0..rng.random_range(0..=REPLAY_MAX_COMMANDS) {
            let cmd = random_command(&state, &mut rng);
            match state.apply(&cmd, lex) {
                Ok((next, _)) => {
                    log.append(&cmd).unwrap();
                    state = next;
                    logged += 1;
                }
                Err(_) => rejected += 1,
            }
        }
        log.sync().unwrap();
        accepted += logged;
        match replay(&path, lex) {
            Ok(r) if r.state == state && r.commands == logged && !r.truncated_tail => {}
            _ => mismatches += 1,
        }
    }
    let total: usize = kinds.iter().sum();
    outcome(
        mismatches == 0 && total == REPLAY_SESSIONS,
        format!(
            "{total} sessions (freeplay {}, scaffolded {}, minigame {}), {accepted} logged and {rejected} rejected commands: {mismatches} replay mismatches",
            kinds[0], kinds[1], kinds[2]
        ),
    )
}

fn main() {
    let start = Instant::now();
    let entries = load_dictionary(&data("cmudict.txt")).expect("data/cmudict.txt").entries;
    let (lex, _) = Lexicon::build(entries.clone(), &LexiconConfig::default()).expect("lexicon builds");
    let build_time = start.elapsed();
    let lex = lex.with_frequencies(WordFrequencies::load(&data("wordfreq_en.tsv")).expect("data/wordfreq_en.tsv"));
    let mut pool = word_pool(&lex);
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(1));

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("alignment oracle", Box::new(|| alignment_oracle(&lex, &entries, build_time))),
        ("pair-table attestation", Box::new(|| pair_attestation(&lex))),
        ("render/pronounce round trip", Box::new(|| round_trip(&lex))),
        ("interpreter ranking", Box::new(|| interpreter(&lex, &pool))),
        ("scaffold termination and prefixes", Box::new(|| scaffold(&lex, &pool))),
        ("keyboard layout", Box::new(layout)),
        ("synthetic recovery", Box::new(recovery)),
        ("virtual population", Box::new(virtual_population_check)),
        ("minigame design", Box::new(design)),
        ("session replay", Box::new(|| event_sourcing(&lex, &pool))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
