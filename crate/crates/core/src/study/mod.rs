//! The sound-finding minigame and its statistical analysis.

mod descriptives;
mod game;
mod io;
mod model;
mod population;
mod simulate;
pub mod stats;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lexicon::Phoneme;

pub use descriptives::{descriptives, DescriptiveRow, DescriptiveTable, QuartileMethod, Summary};
pub use game::{AnswerOutcome, Minigame, MinigameConfig, Prompt};
pub use io::{read_draws_csv, read_trials_jsonl, write_draws_csv, write_trials_jsonl};
pub use model::{
    fit_error_model, fit_model, fit_time_model, McmcConfig, ModelFit, PosteriorDraw, Response,
    PARAMETER_NAMES,
};
pub use population::{
    point_mass, virtual_population, FractionRow, FractionTable, Interval, DEFAULT_THRESHOLDS,
};
pub use simulate::{simulate_minigame, EffectParams, GenParams};

pub const TEST_PHONEMES: [Phoneme; 8] = [
    Phoneme::R,
    Phoneme::W,
    Phoneme::K,
    Phoneme::Z,
    Phoneme::M,
    Phoneme::S,
    Phoneme::D,
    Phoneme::F,
];
pub const PRACTICE_PHONEMES: [Phoneme; 2] = [Phoneme::T, Phoneme::B];
/// Attempts per trial; a trial with this many errors was never solved.
pub const MAX_ATTEMPTS: u32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("{0}")]
    Precondition(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("minigame: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Letter,
    Creature,
}

impl Condition {
    /// Predictor value: 1 for the letter condition.
    pub fn x(self) -> f64 {
        match self {
            Condition::Letter => 1.0,
            Condition::Creature => 0.0,
        }
    }

    pub fn other(self) -> Condition {
        match self {
            Condition::Letter => Condition::Creature,
            Condition::Creature => Condition::Letter,
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Condition::Letter => "letter",
            Condition::Creature => "creature",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Sim,
    Live,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialSpec {
    pub child_id: String,
    pub phoneme: Phoneme,
    pub condition: Condition,
    pub session: u8,
}

impl TrialSpec {
    pub fn is_practice(&self) -> bool {
        PRACTICE_PHONEMES.contains(&self.phoneme)
    }
}

/// One finished trial. `time_ms` is the time to the correct tap and is
/// absent exactly when the phoneme was never found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub child_id: String,
    pub phoneme: Phoneme,
    pub condition: Condition,
    pub session: u8,
    pub errors: u32,
    pub censored: bool,
    pub time_ms: Option<f64>,
    pub seed: u64,
    pub source: Source,
}

impl TrialRecord {
    pub fn seconds(&self) -> Option<f64> {
        self.time_ms.map(|t| t / 1000.0)
    }

    pub fn is_practice(&self) -> bool {
        PRACTICE_PHONEMES.contains(&self.phoneme)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.errors > MAX_ATTEMPTS {
            return Err(format!("errors {} exceed {MAX_ATTEMPTS}", self.errors));
        }
        if self.censored != (self.errors == MAX_ATTEMPTS) {
            return Err("censored must hold exactly when errors = 3".into());
        }
        match self.time_ms {
            Some(t) if self.censored || !(t > 0.0 && t.is_finite()) => {
                Err(format!("time {t} is invalid for this trial"))
            }
            None if !self.censored => Err("uncensored trial without a time".into()),
            _ => Ok(()),
        }
    }
}

/// Two-session schedule: every child meets every test phoneme once per
/// condition, in different sessions. Each child has half the phonemes in
/// the letter condition in session 1. Practice trials open each session.
pub fn design_trials(child_ids: &[String], seed: u64) -> Result<Vec<TrialSpec>, StudyError> {
    if child_ids.is_empty() {
        return Err(StudyError::Precondition("no children given".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(child_ids.len() * 20);
    for child in child_ids {
        let mut phonemes = TEST_PHONEMES;
        phonemes.shuffle(&mut rng);
        let half = phonemes.len() / 2;
        let first: Vec<Condition> = (0..phonemes.len())
            .map(|k| if k < half { Condition::Letter } else { Condition::Creature })
            .collect();
        for session in [1u8, 2] {
            let practice_first = if session == 1 { Condition::Letter } else { Condition::Creature };
            for (k, &ph) in PRACTICE_PHONEMES.iter().enumerate() {
                let condition = if k == 0 { practice_first } else { practice_first.other() };
                out.push(TrialSpec {
                    child_id: child.clone(),
                    phoneme: ph,
                    condition,
                    session,
                });
            }
            let mut tests: Vec<TrialSpec> = phonemes
                .iter()
                .zip(&first)
                .map(|(&ph, &c)| TrialSpec {
                    child_id: child.clone(),
                    phoneme: ph,
                    condition: if session == 1 { c } else { c.other() },
                    session,
                })
                .collect();
            tests.shuffle(&mut rng);
            out.extend(tests);
        }
    }
    Ok(out)
}

/// Checks that each (child, test phoneme) has one trial per condition in
/// different sessions, and nothing else.
pub fn check_pairing<'a, I>(trials: I) -> Result<(), String>
where
    I: IntoIterator<Item = (&'a str, Phoneme, Condition, u8)>,
{
    let mut seen: BTreeMap<(&str, Phoneme), Vec<(Condition, u8)>> = BTreeMap::new();
    for (child, ph, cond, session) in trials {
        if TEST_PHONEMES.contains(&ph) {
            seen.entry((child, ph)).or_default().push((cond, session));
        }
    }
    for ((child, ph), mut v) in seen {
        v.sort();
        let ok = v.len() == 2
            && v[0].0 == Condition::Letter
            && v[1].0 == Condition::Creature
            && v[0].1 != v[1].1;
        if !ok {
            return Err(format!("child {child} phoneme {ph}: {v:?}"));
        }
    }
    Ok(())
}

pub fn child_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("c{i:02}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_six_children_give_416_test_trials() {
        let specs = design_trials(&child_ids(26), 5).unwrap();
        let tests: Vec<&TrialSpec> = specs.iter().filter(|s| !s.is_practice()).collect();
        assert_eq!(tests.len(), 416);
        assert_eq!(specs.len(), 416 + 26 * 4);
        check_pairing(tests.iter().map(|s| (s.child_id.as_str(), s.phoneme, s.condition, s.session))).unwrap();
    }

    #[test]
    fn sessions_are_balanced_and_open_with_practice() {
        let specs = design_trials(&child_ids(3), 1).unwrap();
        for child in child_ids(3) {
            for session in [1u8, 2] {
                let s: Vec<&TrialSpec> = specs
                    .iter()
                    .filter(|t| t.child_id == child && t.session == session)
                    .collect();
                assert_eq!(s.len(), 10);
                assert!(s[0].is_practice() && s[1].is_practice());
                let letters = s[2..].iter().filter(|t| t.condition == Condition::Letter).count();
                assert_eq!(letters, 4);
            }
        }
    }

    #[test]
    fn design_is_seeded() {
        let ids = child_ids(4);
        assert_eq!(design_trials(&ids, 3).unwrap(), design_trials(&ids, 3).unwrap());
        assert_ne!(design_trials(&ids, 3).unwrap(), design_trials(&ids, 4).unwrap());
        assert!(design_trials(&[], 3).is_err());
    }

    #[test]
    fn pairing_check_catches_violations() {
        let bad = [("a", Phoneme::R, Condition::Letter, 1u8), ("a", Phoneme::R, Condition::Creature, 1)];
        assert!(check_pairing(bad).is_err());
        let bad = [("a", Phoneme::R, Condition::Letter, 1u8)];
        assert!(check_pairing(bad).is_err());
    }

    #[test]
    fn record_validation() {
        let mut r = TrialRecord {
            child_id: "c01".into(),
            phoneme: Phoneme::R,
            condition: Condition::Letter,
            session: 1,
            errors: 1,
            censored: false,
            time_ms: Some(1200.0),
            seed: 0,
            source: Source::Sim,
        };
        assert!(r.validate().is_ok());
        r.errors = 3;
        assert!(r.validate().is_err());
        r.censored = true;
        assert!(r.validate().is_err());
        r.time_ms = None;
        assert!(r.validate().is_ok());
    }
}
