//! Simulated learner for closed-loop runs of the scaffold machine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::lexicon::Phoneme;

use super::machine::{start, step, Action, ScaffoldEvent};
use super::ScaffoldPlan;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairKnowledge {
    pub phoneme: Phoneme,
    pub chunk: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct LearnerPolicy {
    /// Per-pair success probabilities; pairs not listed use `default_knowledge`.
    pub pair_knowledge: Vec<PairKnowledge>,
    pub default_knowledge: f64,
    pub slip_rate: f64,
    /// Log-normal parameters of one action's latency in seconds.
    pub latency_mu: f64,
    pub latency_sigma: f64,
    pub seed: u64,
}

impl Default for LearnerPolicy {
    fn default() -> Self {
        Self {
            pair_knowledge: Vec::new(),
            default_knowledge: 0.7,
            slip_rate: 0.0,
            latency_mu: 1.0,
            latency_sigma: 0.5,
            seed: 0,
        }
    }
}

impl LearnerPolicy {
    pub fn with_knowledge(knowledge: f64, seed: u64) -> Self {
        Self {
            default_knowledge: knowledge,
            seed,
            ..Self::default()
        }
    }

    pub fn knowledge(&self, phoneme: Phoneme, chunk: &str) -> f64 {
        self.pair_knowledge
            .iter()
            .find(|k| k.phoneme == phoneme && k.chunk == chunk)
            .map_or(self.default_knowledge, |k| k.p)
    }

    pub fn validate(&self) -> Result<(), String> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.default_knowledge) || !unit(self.slip_rate) {
            return Err("probabilities must lie in [0, 1]".into());
        }
        if let Some(k) = self.pair_knowledge.iter().find(|k| !unit(k.p)) {
            return Err(format!("knowledge for {} {:?} outside [0, 1]", k.phoneme, k.chunk));
        }
        if !self.latency_mu.is_finite() || !(self.latency_sigma > 0.0 && self.latency_sigma.is_finite()) {
            return Err("latency parameters must be finite with positive sigma".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Transcript {
    pub events: Vec<ScaffoldEvent>,
    /// Seconds spent on each step, preassembled steps included as zero.
    pub step_latencies: Vec<f64>,
    pub actions: usize,
    pub placed: Vec<String>,
}

/// Runs `plan` to completion. Each action picks the target with probability
/// `knowledge * (1 - slip)` and otherwise a uniformly drawn distractor.
pub fn simulate(plan: &ScaffoldPlan, policy: &LearnerPolicy) -> Transcript {
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let latency = LogNormal::new(policy.latency_mu, policy.latency_sigma.max(1e-12))
        .expect("finite log-normal parameters");
    let mut state = start(plan.clone());
    let mut step_latencies = vec![0.0; plan.steps.len()];
    let mut actions = 0;
    while !state.complete {
        let i = state.step_index;
        let s = &state.plan.steps[i];
        let target = s.target().expect("open steps offer their target").id;
        let p = (policy.knowledge(s.phoneme, &s.chunk) * (1.0 - policy.slip_rate)).clamp(0.0, 1.0);
        let others: Vec<u32> = state.keyboard.iter().map(|b| b.id).filter(|&id| id != target).collect();
        let action = if rng.random_bool(p) {
            Action::Pick { block_id: target }
        } else if others.is_empty() {
            Action::Timeout
        } else {
            Action::Pick {
                block_id: others[rng.random_range(0..others.len())],
            }
        };
        step_latencies[i] += latency.sample(&mut rng);
        state = step(&state, action).expect("simulated actions stay on the keyboard").0;
        actions += 1;
    }
    Transcript {
        events: state.log,
        step_latencies,
        actions,
        placed: state.placed,
    }
}
