use serde::{Deserialize, Serialize};

use crate::layout::{alphabetic_layout, letters, LayoutGrid};
use crate::lexicon::{glyph_id, Phoneme};

use super::{design_trials, Condition, Source, StudyError, TrialRecord, TrialSpec, MAX_ATTEMPTS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MinigameConfig {
    pub child_id: String,
    pub session: u8,
    pub seed: u64,
    #[serde(default = "default_width")]
    pub keyboard_width: usize,
}

fn default_width() -> usize {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Prompt {
    pub trial_index: usize,
    pub total_trials: usize,
    pub phoneme: Phoneme,
    pub condition: Condition,
    pub practice: bool,
    /// 1-based attempt number.
    pub attempt: u32,
    pub keyboard: LayoutGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "camelCase")]
pub enum AnswerOutcome {
    Correct { record: TrialRecord },
    Wrong { attempts_left: u32 },
    /// Third wrong answer; the trial is recorded as censored.
    NotFound { record: TrialRecord },
}

impl AnswerOutcome {
    pub fn record(&self) -> Option<&TrialRecord> {
        match self {
            AnswerOutcome::Correct { record } | AnswerOutcome::NotFound { record } => Some(record),
            AnswerOutcome::Wrong { .. } => None,
        }
    }
}

/// One child's live session: the prompts of one design session, answered
/// by tapping keys on an alphabetic keyboard of letters or creatures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Minigame {
    pub config: MinigameConfig,
    pub trials: Vec<TrialSpec>,
    pub current: usize,
    pub errors: u32,
    pub records: Vec<TrialRecord>,
    letter_keys: LayoutGrid,
    creature_keys: LayoutGrid,
}

impl Minigame {
    /// `creature_symbols` is the creature keyboard in display order.
    pub fn start(config: MinigameConfig, creature_symbols: &[String]) -> Result<Minigame, StudyError> {
        if config.child_id.trim().is_empty() {
            return Err(StudyError::Precondition("childId is empty".into()));
        }
        if !matches!(config.session, 1 | 2) {
            return Err(StudyError::Precondition("session must be 1 or 2".into()));
        }
        if config.keyboard_width == 0 {
            return Err(StudyError::Precondition("keyboardWidth must be positive".into()));
        }
        let trials: Vec<TrialSpec> = design_trials(std::slice::from_ref(&config.child_id), config.seed)?
            .into_iter()
            .filter(|t| t.session == config.session)
            .collect();
        let letter_keys = alphabetic_layout(&letters(), config.keyboard_width);
        let creature_keys = alphabetic_layout(creature_symbols, config.keyboard_width);
        for t in &trials {
            let keys = match t.condition {
                Condition::Letter => &letter_keys,
                Condition::Creature => &creature_keys,
            };
            if keys.position(&Self::key_for(t)).is_none() {
                return Err(StudyError::Precondition(format!(
                    "keyboard lacks the key for {} in the {} condition",
                    t.phoneme, t.condition
                )));
            }
        }
        Ok(Minigame {
            config,
            trials,
            current: 0,
            errors: 0,
            records: Vec::new(),
            letter_keys,
            creature_keys,
        })
    }

    /// The key that finds `spec.phoneme`: its single-letter spelling or its creature.
    pub fn key_for(spec: &TrialSpec) -> String {
        match spec.condition {
            Condition::Letter => spec.phoneme.symbol()[..1].to_string(),
            Condition::Creature => glyph_id(spec.phoneme),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.current >= self.trials.len()
    }

    pub fn keyboard(&self, condition: Condition) -> &LayoutGrid {
        match condition {
            Condition::Letter => &self.letter_keys,
            Condition::Creature => &self.creature_keys,
        }
    }

    pub fn prompt(&self) -> Option<Prompt> {
        let t = self.trials.get(self.current)?;
        Some(Prompt {
            trial_index: self.current,
            total_trials: self.trials.len(),
            phoneme: t.phoneme,
            condition: t.condition,
            practice: t.is_practice(),
            attempt: self.errors + 1,
            keyboard: self.keyboard(t.condition).clone(),
        })
    }

    /// `elapsed_ms` is measured from when the current prompt was shown.
    pub fn answer(&mut self, symbol: &str, elapsed_ms: f64) -> Result<AnswerOutcome, StudyError> {
        let spec = self
            .trials
            .get(self.current)
            .ok_or_else(|| StudyError::Protocol("the session is complete".into()))?
            .clone();
        if !(elapsed_ms > 0.0 && elapsed_ms.is_finite()) {
            return Err(StudyError::Protocol("elapsedMs must be positive".into()));
        }
        if self.keyboard(spec.condition).position(symbol).is_none() {
            return Err(StudyError::Protocol(format!("{symbol:?} is not on the keyboard")));
        }
        let solved = symbol == Self::key_for(&spec);
        if !solved {
            self.errors += 1;
            if self.errors < MAX_ATTEMPTS {
                return Ok(AnswerOutcome::Wrong {
                    attempts_left: MAX_ATTEMPTS - self.errors,
                });
            }
        }
        let record = TrialRecord {
            child_id: spec.child_id,
            phoneme: spec.phoneme,
            condition: spec.condition,
            session: spec.session,
            errors: self.errors,
            censored: !solved,
            time_ms: solved.then_some(elapsed_ms),
            seed: self.config.seed,
            source: Source::Live,
        };
        self.records.push(record.clone());
        self.current += 1;
        self.errors = 0;
        Ok(if solved {
            AnswerOutcome::Correct { record }
        } else {
            AnswerOutcome::NotFound { record }
        })
    }
}
