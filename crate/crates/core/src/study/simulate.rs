use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::lexicon::Phoneme;

use super::{StudyError, Source, TrialRecord, TrialSpec, MAX_ATTEMPTS};

/// Parameters of one mixed-effects linear predictor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EffectParams {
    pub b0: f64,
    pub b_cond: f64,
    pub sd_child_int: f64,
    pub sd_child_slope: f64,
    pub corr_child: f64,
    pub sd_item_int: f64,
    pub sd_item_slope: f64,
    pub corr_item: f64,
    /// Residual sd of log seconds; unused by the error model.
    #[serde(default)]
    pub sigma: f64,
}

impl EffectParams {
    fn validate(&self, name: &str) -> Result<(), StudyError> {
        let sds = [self.sd_child_int, self.sd_child_slope, self.sd_item_int, self.sd_item_slope, self.sigma];
        let ok = [self.b0, self.b_cond].iter().all(|v| v.is_finite())
            && sds.iter().all(|v| v.is_finite() && *v >= 0.0)
            && self.corr_child.abs() <= 1.0
            && self.corr_item.abs() <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(StudyError::Precondition(format!("invalid {name} parameters")))
        }
    }

    fn draw_pair(sd_a: f64, sd_b: f64, rho: f64, rng: &mut ChaCha8Rng) -> [f64; 2] {
        let z0: f64 = StandardNormal.sample(rng);
        let z1: f64 = StandardNormal.sample(rng);
        [sd_a * z0, sd_b * (rho * z0 + (1.0 - rho * rho).max(0.0).sqrt() * z1)]
    }
}

/// Generating parameters for both responses; the two models get
/// independent random effects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GenParams {
    pub time: EffectParams,
    pub errors: EffectParams,
    /// Independent repetitions of every trial, sharing the random effects.
    #[serde(default = "one")]
    pub replicates: u32,
}

fn one() -> u32 {
    1
}

impl Default for GenParams {
    /// Fixed effects and child slope sds at the reference point estimates;
    /// the remaining values are chosen to give plausible raw scales.
    fn default() -> Self {
        Self {
            time: EffectParams {
                b0: 1.1,
                b_cond: -0.14,
                sd_child_int: 0.5,
                sd_child_slope: 0.28,
                corr_child: 0.0,
                sd_item_int: 0.3,
                sd_item_slope: 0.1,
                corr_item: 0.0,
                sigma: 0.9,
            },
            errors: EffectParams {
                b0: -0.6,
                b_cond: -0.38,
                sd_child_int: 0.6,
                sd_child_slope: 0.94,
                corr_child: 0.0,
                sd_item_int: 0.4,
                sd_item_slope: 0.2,
                corr_item: 0.0,
                sigma: 0.0,
            },
            replicates: 1,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), StudyError> {
        self.time.validate("time")?;
        self.errors.validate("errors")?;
        if self.time.sigma <= 0.0 {
            return Err(StudyError::Precondition("time sigma must be positive".into()));
        }
        if self.replicates == 0 {
            return Err(StudyError::Precondition("replicates must be positive".into()));
        }
        Ok(())
    }
}

/// Draws one record per spec and replicate.
///
/// Errors are geometric failures before success with mean `exp(eta)`,
/// capped at three (censored). Times are log-normal and kept only for
/// solved trials.
pub fn simulate_minigame(specs: &[TrialSpec], params: &GenParams, seed: u64) -> Result<Vec<TrialRecord>, StudyError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Effects are drawn in sorted key order so they do not depend on trial order.
    let children: Vec<&str> = {
        let mut v: Vec<&str> = specs.iter().map(|s| s.child_id.as_str()).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let items: Vec<Phoneme> = {
        let mut v: Vec<Phoneme> = specs.iter().map(|s| s.phoneme).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut child_fx: BTreeMap<&str, [[f64; 2]; 2]> = BTreeMap::new();
    for c in children {
        let t = &params.time;
        let e = &params.errors;
        child_fx.insert(
            c,
            [
                EffectParams::draw_pair(t.sd_child_int, t.sd_child_slope, t.corr_child, &mut rng),
                EffectParams::draw_pair(e.sd_child_int, e.sd_child_slope, e.corr_child, &mut rng),
            ],
        );
    }
    let mut item_fx: BTreeMap<Phoneme, [[f64; 2]; 2]> = BTreeMap::new();
    for i in items {
        let t = &params.time;
        let e = &params.errors;
        item_fx.insert(
            i,
            [
                EffectParams::draw_pair(t.sd_item_int, t.sd_item_slope, t.corr_item, &mut rng),
                EffectParams::draw_pair(e.sd_item_int, e.sd_item_slope, e.corr_item, &mut rng),
            ],
        );
    }

    let mut out = Vec::with_capacity(specs.len() * params.replicates as usize);
    for spec in specs {
        let x = spec.condition.x();
        let cf = child_fx[spec.child_id.as_str()];
        let itf = item_fx[&spec.phoneme];
        let eta = |p: &EffectParams, k: usize| {
            p.b0 + p.b_cond * x + cf[k][0] + cf[k][1] * x + itf[k][0] + itf[k][1] * x
        };
        let eta_t = eta(&params.time, 0);
        let eta_e = eta(&params.errors, 1);
        let p_success = 1.0 / (1.0 + eta_e.exp());
        for _ in 0..params.replicates {
            let mut errors = 0;
            while errors < MAX_ATTEMPTS && !rng.random_bool(p_success.clamp(0.0, 1.0)) {
                errors += 1;
            }
            let z: f64 = StandardNormal.sample(&mut rng);
            let censored = errors == MAX_ATTEMPTS;
            out.push(TrialRecord {
                child_id: spec.child_id.clone(),
                phoneme: spec.phoneme,
                condition: spec.condition,
                session: spec.session,
                errors,
                censored,
                time_ms: (!censored).then(|| 1000.0 * (eta_t + params.time.sigma * z).exp()),
                seed,
                source: Source::Sim,
            });
        }
    }
    Ok(out)
}
