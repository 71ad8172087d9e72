use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::model::{ModelFit, PosteriorDraw, Response};
use super::stats::quantile_type7;
use super::StudyError;

pub const DEFAULT_THRESHOLDS: [f64; 4] = [1.0, 1.25, 1.5, 2.0];
const MIN_POPULATION: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Interval {
    pub low90: f64,
    pub expectation: f64,
    pub high90: f64,
}

impl Interval {
    fn of(mut values: Vec<f64>) -> Interval {
        values.sort_by(f64::total_cmp);
        let expectation = values.iter().sum::<f64>() / values.len() as f64;
        Interval {
            low90: quantile_type7(&values, 0.05).min(expectation),
            expectation,
            high90: quantile_type7(&values, 0.95).max(expectation),
        }
    }
}

/// Percentages of children whose letter:creature ratio is beyond a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FractionRow {
    pub threshold: f64,
    pub creature: Interval,
    pub letter: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FractionTable {
    pub response: Response,
    pub population: usize,
    pub draws: usize,
    pub seed: u64,
    pub rows: Vec<FractionRow>,
}

impl FractionTable {
    pub fn row(&self, threshold: f64) -> Option<&FractionRow> {
        self.rows.iter().find(|r| (r.threshold - threshold).abs() < 1e-12)
    }

    fn label(&self, t: f64) -> String {
        let what = match self.response {
            Response::Time => "faster",
            Response::Errors => "less err.",
        };
        if t == 1.0 {
            match self.response {
                Response::Time => "faster".into(),
                Response::Errors => "less errors".into(),
            }
        } else {
            format!(">{t}x {what}")
        }
    }

    /// Aligned text with one row per threshold, percentages to one decimal.
    pub fn to_text(&self) -> String {
        let lw = self.rows.iter().map(|r| self.label(r.threshold).len()).max().unwrap_or(6).max(9);
        let mut out = format!(
            "{:<lw$}  {:>7} {:>7} {:>7}    {:>7} {:>7} {:>7}\n",
            "", "", "Creature", "", "", "Letter", ""
        );
        let _ = writeln!(
            out,
            "{:<lw$}  {:>7} {:>7} {:>7}    {:>7} {:>7} {:>7}",
            "Threshold", "low90", "exp.", "high90", "low90", "exp.", "high90"
        );
        for r in &self.rows {
            let _ = write!(out, "{:<lw$} ", self.label(r.threshold));
            for i in [r.creature, r.letter] {
                let _ = write!(out, " {:>6.1}% {:>6.1}% {:>6.1}%  ", i.low90, i.expectation, i.high90);
            }
            out.truncate(out.trim_end().len());
            out.push('\n');
        }
        out
    }
}

/// A fit holding a single draw, for checks against closed forms.
pub fn point_mass(response: Response, b_cond: f64, sd_child_slope: f64) -> ModelFit {
    let draw = PosteriorDraw {
        chain: 0,
        iter: 0,
        b0: 0.0,
        b_cond,
        sd_child_int: 0.0,
        sd_child_slope,
        corr_child: 0.0,
        sd_item_int: 0.0,
        sd_item_slope: None,
        corr_item: None,
        sigma: (response == Response::Time).then_some(1.0),
    };
    ModelFit {
        response,
        config: Default::default(),
        n_obs: 0,
        n_children: 0,
        n_items: 0,
        chains: 1,
        kept_per_chain: 1,
        draws: vec![draw],
        rhat: Default::default(),
        converged: true,
        acceptance: 1.0,
    }
}

/// Simulates `population` children per posterior draw and reports the share
/// of letter-lovers (`exp(d) <= 1/t`) and creature-lovers (`exp(d) >= t`)
/// with `d ~ Normal(bCond, sdChildSlope)`. `max_draws` thins the posterior
/// evenly when set.
pub fn virtual_population(
    fit: &ModelFit,
    thresholds: &[f64],
    population: usize,
    seed: u64,
    max_draws: Option<usize>,
) -> Result<FractionTable, StudyError> {
    if !fit.converged {
        return Err(StudyError::Precondition("fit did not converge".into()));
    }
    if population < MIN_POPULATION {
        return Err(StudyError::Precondition(format!("population must be at least {MIN_POPULATION}")));
    }
    if fit.draws.is_empty() {
        return Err(StudyError::Precondition("fit has no draws".into()));
    }
    if thresholds.is_empty() || thresholds.iter().any(|t| !(t.is_finite() && *t >= 1.0)) {
        return Err(StudyError::Precondition("thresholds must be at least 1".into()));
    }
    let stride = match max_draws {
        Some(0) => return Err(StudyError::Precondition("maxDraws must be positive".into())),
        Some(m) if m < fit.draws.len() => fit.draws.len().div_ceil(m),
        _ => 1,
    };
    let draws: Vec<&PosteriorDraw> = fit.draws.iter().step_by(stride).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_t: Vec<f64> = thresholds.iter().map(|t| t.ln()).collect();
    let mut creature = vec![Vec::with_capacity(draws.len()); thresholds.len()];
    let mut letter = vec![Vec::with_capacity(draws.len()); thresholds.len()];
    for d in draws.iter() {
        if !(d.sd_child_slope >= 0.0 && d.b_cond.is_finite()) {
            return Err(StudyError::Precondition("draw with invalid slope parameters".into()));
        }
        let mut c_count = vec![0usize; thresholds.len()];
        let mut l_count = vec![0usize; thresholds.len()];
        let normal = Normal::new(d.b_cond, d.sd_child_slope).expect("checked parameters");
        for _ in 0..population {
            // Comparing on the log scale is the same as exp(d) against t.
            let v: f64 = normal.sample(&mut rng);
            for (k, lt) in log_t.iter().enumerate() {
                if v >= *lt {
                    c_count[k] += 1;
                }
                if v <= -lt {
                    l_count[k] += 1;
                }
            }
        }
        for k in 0..thresholds.len() {
            creature[k].push(100.0 * c_count[k] as f64 / population as f64);
            letter[k].push(100.0 * l_count[k] as f64 / population as f64);
        }
    }
    let rows = thresholds
        .iter()
        .enumerate()
        .map(|(k, &t)| FractionRow {
            threshold: t,
            creature: Interval::of(std::mem::take(&mut creature[k])),
            letter: Interval::of(std::mem::take(&mut letter[k])),
        })
        .collect();
    Ok(FractionTable {
        response: fit.response,
        population,
        draws: draws.len(),
        seed,
        rows,
    })
}
