//! Mixed-effects models for the minigame and their sampler.
//!
//! Both responses share the linear predictor
//! `eta = b0 + bCond*x + u0[child] + u1[child]*x + v0[item] + v1[item]*x`
//! with `x = 1` in the letter condition. Child and item effects are
//! bivariate normal. The time model puts `ln(seconds) ~ Normal(eta, sigma)`;
//! the error model is geometric with mean `exp(eta)`, censored at three.
//!
//! Sampling is random-walk Metropolis within Gibbs with per-coordinate step
//! sizes tuned during warmup. Two joint moves help mixing: ridge moves shift
//! a fixed effect and the matching random effects in opposite directions
//! (the likelihood is unchanged), and scale moves stretch one random-effect
//! component together with its standard deviation.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::lexicon::Phoneme;

use super::stats::{bvn_ln_pdf, geometric_ln_pmf, half_normal_ln_pdf, lkj2_ln_pdf, normal_ln_pdf, split_rhat};
use super::{StudyError, TrialRecord, MAX_ATTEMPTS};

const FIXED_SD: f64 = 2.5;
const SD_SCALE: f64 = 1.0;
const LKJ_ETA: f64 = 2.0;
const ADAPT_BATCH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Response {
    #[serde(alias = "times")]
    Time,
    Errors,
}

impl std::str::FromStr for Response {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "times" | "time" => Ok(Response::Time),
            "errors" => Ok(Response::Errors),
            other => Err(format!("unknown model {other:?}, expected times or errors")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct McmcConfig {
    pub chains: usize,
    /// Iterations per chain, warmup included.
    pub iters: usize,
    pub warmup: usize,
    pub seed: u64,
    /// Include item random slopes (and their correlation).
    pub item_slopes: bool,
    /// Sample from the prior only.
    pub prior_only: bool,
    pub target_accept: f64,
    pub rhat_threshold: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            iters: 4000,
            warmup: 1000,
            seed: 11,
            item_slopes: true,
            prior_only: false,
            target_accept: 0.44,
            rhat_threshold: 1.05,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<(), StudyError> {
        let bad = |m: &str| Err(StudyError::Precondition(m.to_string()));
        if self.chains < 2 {
            return bad("at least two chains are needed for convergence checks");
        }
        if self.warmup >= self.iters || self.iters - self.warmup < 4 {
            return bad("iters must exceed warmup by at least 4");
        }
        if !(0.05..0.95).contains(&self.target_accept) {
            return bad("targetAccept must lie in (0.05, 0.95)");
        }
        Ok(())
    }
}

/// One posterior sample. Absent fields do not apply to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PosteriorDraw {
    pub chain: u32,
    pub iter: u32,
    pub b0: f64,
    pub b_cond: f64,
    pub sd_child_int: f64,
    pub sd_child_slope: f64,
    pub corr_child: f64,
    pub sd_item_int: f64,
    pub sd_item_slope: Option<f64>,
    pub corr_item: Option<f64>,
    pub sigma: Option<f64>,
}

pub const PARAMETER_NAMES: [&str; 9] = [
    "b0",
    "bCond",
    "sdChildInt",
    "sdChildSlope",
    "corrChild",
    "sdItemInt",
    "sdItemSlope",
    "corrItem",
    "sigma",
];

impl PosteriorDraw {
    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "b0" => Some(self.b0),
            "bCond" => Some(self.b_cond),
            "sdChildInt" => Some(self.sd_child_int),
            "sdChildSlope" => Some(self.sd_child_slope),
            "corrChild" => Some(self.corr_child),
            "sdItemInt" => Some(self.sd_item_int),
            "sdItemSlope" => self.sd_item_slope,
            "corrItem" => self.corr_item,
            "sigma" => self.sigma,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelFit {
    pub response: Response,
    pub config: McmcConfig,
    pub n_obs: usize,
    pub n_children: usize,
    pub n_items: usize,
    pub chains: usize,
    pub kept_per_chain: usize,
    pub draws: Vec<PosteriorDraw>,
    pub rhat: BTreeMap<String, f64>,
    /// False when any R-hat is above the threshold or not finite.
    pub converged: bool,
    pub acceptance: f64,
}

impl ModelFit {
    pub fn values(&self, name: &str) -> Vec<f64> {
        self.draws.iter().filter_map(|d| d.get(name)).collect()
    }

    /// Central interval holding `level` of the draws.
    pub fn interval(&self, name: &str, level: f64) -> Option<(f64, f64)> {
        let mut v = self.values(name);
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let a = (1.0 - level) / 2.0;
        Some((super::stats::quantile_type7(&v, a), super::stats::quantile_type7(&v, 1.0 - a)))
    }

    pub fn mean(&self, name: &str) -> Option<f64> {
        let v = self.values(name);
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn max_rhat(&self) -> f64 {
        self.rhat.values().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn rhat_table(chains: &[&[PosteriorDraw]], kept: usize) -> BTreeMap<String, f64> {
    let mut rhat = BTreeMap::new();
    for name in PARAMETER_NAMES {
        let values: Vec<Vec<f64>> = chains
            .iter()
            .map(|c| c.iter().filter_map(|d| d.get(name)).collect())
            .collect();
        if values.iter().all(|c| c.len() == kept) {
            rhat.insert(name.to_string(), split_rhat(&values));
        }
    }
    rhat
}

impl ModelFit {
    /// Rebuilds a fit from saved draws, recomputing R-hat per chain. Data
    /// sizes are unknown and left at zero.
    pub fn from_draws(
        response: Response,
        mut draws: Vec<PosteriorDraw>,
        rhat_threshold: f64,
    ) -> Result<ModelFit, StudyError> {
        draws.sort_by_key(|d| (d.chain, d.iter));
        let per_chain: Vec<&[PosteriorDraw]> = draws.chunk_by(|a, b| a.chain == b.chain).collect();
        let kept = per_chain.first().map_or(0, |c| c.len());
        if per_chain.len() < 2 || per_chain.iter().any(|c| c.len() != kept) || kept < 4 {
            return Err(StudyError::Precondition(
                "draws need at least two chains of equal length (4 or more each)".into(),
            ));
        }
        let rhat = rhat_table(&per_chain, kept);
        let converged = rhat.values().all(|r| r.is_finite() && *r <= rhat_threshold);
        let chains = per_chain.len();
        Ok(ModelFit {
            response,
            config: McmcConfig {
                chains,
                rhat_threshold,
                ..McmcConfig::default()
            },
            n_obs: 0,
            n_children: 0,
            n_items: 0,
            chains,
            kept_per_chain: kept,
            draws,
            rhat,
            converged,
            acceptance: f64::NAN,
        })
    }
}

pub fn fit_time_model(records: &[TrialRecord], cfg: &McmcConfig) -> Result<ModelFit, StudyError> {
    fit_model(records, Response::Time, cfg)
}

pub fn fit_error_model(records: &[TrialRecord], cfg: &McmcConfig) -> Result<ModelFit, StudyError> {
    fit_model(records, Response::Errors, cfg)
}

pub fn fit_model(records: &[TrialRecord], response: Response, cfg: &McmcConfig) -> Result<ModelFit, StudyError> {
    cfg.validate()?;
    let data = Data::new(records, response)?;
    let results: Vec<ChainOutput> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..cfg.chains)
            .map(|c| {
                let data = &data;
                s.spawn(move || run_chain(data, cfg, c))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    });

    let kept = cfg.iters - cfg.warmup;
    let draws: Vec<PosteriorDraw> = results.iter().flat_map(|r| r.draws.iter().cloned()).collect();
    let per_chain: Vec<&[PosteriorDraw]> = results.iter().map(|r| r.draws.as_slice()).collect();
    let rhat = rhat_table(&per_chain, kept);
    let converged = rhat.values().all(|r| r.is_finite() && *r <= cfg.rhat_threshold);
    let acceptance = results.iter().map(|r| r.acceptance).sum::<f64>() / results.len() as f64;
    Ok(ModelFit {
        response,
        config: cfg.clone(),
        n_obs: data.x.len(),
        n_children: data.by_child.len(),
        n_items: data.by_item.len(),
        chains: cfg.chains,
        kept_per_chain: kept,
        draws,
        rhat,
        converged,
        acceptance,
    })
}

struct Data {
    response: Response,
    /// Log seconds for the time model.
    log_time: Vec<f64>,
    errors: Vec<u32>,
    x: Vec<f64>,
    child: Vec<usize>,
    item: Vec<usize>,
    by_child: Vec<Vec<usize>>,
    by_item: Vec<Vec<usize>>,
    letter: Vec<usize>,
}

impl Data {
    fn new(records: &[TrialRecord], response: Response) -> Result<Self, StudyError> {
        let used: Vec<&TrialRecord> = records
            .iter()
            .filter(|r| !r.is_practice())
            .filter(|r| response == Response::Errors || r.time_ms.is_some())
            .collect();
        for r in &used {
            r.validate().map_err(StudyError::Precondition)?;
        }
        let mut children: Vec<&str> = used.iter().map(|r| r.child_id.as_str()).collect();
        children.sort_unstable();
        children.dedup();
        let mut items: Vec<Phoneme> = used.iter().map(|r| r.phoneme).collect();
        items.sort_unstable();
        items.dedup();
        if children.len() < 2 || items.len() < 2 {
            return Err(StudyError::Precondition(format!(
                "need at least two children and two items with usable trials, got {} and {}",
                children.len(),
                items.len()
            )));
        }
        let mut d = Data {
            response,
            log_time: Vec::with_capacity(used.len()),
            errors: Vec::with_capacity(used.len()),
            x: Vec::with_capacity(used.len()),
            child: Vec::with_capacity(used.len()),
            item: Vec::with_capacity(used.len()),
            by_child: vec![Vec::new(); children.len()],
            by_item: vec![Vec::new(); items.len()],
            letter: Vec::new(),
        };
        for (n, r) in used.iter().enumerate() {
            let c = children.binary_search(&r.child_id.as_str()).expect("child indexed");
            let i = items.binary_search(&r.phoneme).expect("item indexed");
            d.log_time.push(r.seconds().map_or(0.0, f64::ln));
            d.errors.push(r.errors.min(MAX_ATTEMPTS));
            d.x.push(r.condition.x());
            d.child.push(c);
            d.item.push(i);
            d.by_child[c].push(n);
            d.by_item[i].push(n);
            if r.condition.x() > 0.0 {
                d.letter.push(n);
            }
        }
        Ok(d)
    }

    fn center(&self) -> f64 {
        match self.response {
            Response::Time => self.log_time.iter().sum::<f64>() / self.log_time.len() as f64,
            Response::Errors => {
                let m = self.errors.iter().map(|&e| f64::from(e)).sum::<f64>() / self.errors.len() as f64;
                (m + 0.1).ln()
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Params {
    b: [f64; 2],
    u: Vec<[f64; 2]>,
    v: Vec<[f64; 2]>,
    lsd_c: [f64; 2],
    z_c: f64,
    lsd_i: [f64; 2],
    z_i: f64,
    lsigma: f64,
}

impl Params {
    fn sd_c(&self) -> [f64; 2] {
        [self.lsd_c[0].exp(), self.lsd_c[1].exp()]
    }

    fn sd_i(&self) -> [f64; 2] {
        [self.lsd_i[0].exp(), self.lsd_i[1].exp()]
    }
}

/// Random-walk step size with batch acceptance counts.
#[derive(Debug, Clone, Copy)]
struct Step {
    log_scale: f64,
    accepted: u32,
    tried: u32,
}

impl Step {
    fn new(scale: f64) -> Self {
        Self {
            log_scale: scale.ln(),
            accepted: 0,
            tried: 0,
        }
    }

    fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    fn record(&mut self, accepted: bool) {
        self.tried += 1;
        if accepted {
            self.accepted += 1;
        }
    }

    fn adapt(&mut self, target: f64, batch: usize) {
        if self.tried == 0 {
            return;
        }
        let rate = f64::from(self.accepted) / f64::from(self.tried);
        let delta = (1.0 / (batch as f64).sqrt()).min(0.5);
        self.log_scale += if rate > target { delta } else { -delta };
        self.log_scale = self.log_scale.clamp(-12.0, 3.0);
        self.accepted = 0;
        self.tried = 0;
    }
}

struct Steps {
    fixed: [Step; 2],
    child: Vec<[Step; 2]>,
    item: Vec<[Step; 2]>,
    hyper: [Step; 7],
    ridge: [Step; 4],
    scale: [Step; 4],
}

impl Steps {
    fn all_mut(&mut self) -> impl Iterator<Item = &mut Step> {
        self.fixed
            .iter_mut()
            .chain(self.child.iter_mut().flatten())
            .chain(self.item.iter_mut().flatten())
            .chain(self.hyper.iter_mut())
            .chain(self.ridge.iter_mut())
            .chain(self.scale.iter_mut())
    }
}

struct ChainOutput {
    draws: Vec<PosteriorDraw>,
    acceptance: f64,
}

struct Sampler<'a> {
    data: &'a Data,
    cfg: &'a McmcConfig,
    p: Params,
    eta: Vec<f64>,
    scratch: Vec<f64>,
    rng: ChaCha8Rng,
    accepted: u64,
    proposed: u64,
}

fn run_chain(data: &Data, cfg: &McmcConfig, chain: usize) -> ChainOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64 + 1);
    let nc = data.by_child.len();
    let ni = data.by_item.len();
    let jitter = |rng: &mut ChaCha8Rng, s: f64| -> f64 { let z: f64 = StandardNormal.sample(rng);
        s * z };
    let p = Params {
        b: [data.center() + jitter(&mut rng, 0.3), jitter(&mut rng, 0.3)],
        u: vec![[0.0; 2]; nc],
        v: vec![[0.0; 2]; ni],
        lsd_c: [rng.random_range(0.2f64..1.2).ln(), rng.random_range(0.2f64..1.2).ln()],
        z_c: 0.0,
        lsd_i: [
            rng.random_range(0.2f64..1.2).ln(),
            if cfg.item_slopes { rng.random_range(0.2f64..1.2).ln() } else { 0.0 },
        ],
        z_i: 0.0,
        lsigma: rng.random_range(0.5f64..1.5).ln(),
    };
    let mut s = Sampler {
        data,
        cfg,
        eta: vec![0.0; data.x.len()],
        scratch: vec![0.0; data.x.len()],
        p,
        rng,
        accepted: 0,
        proposed: 0,
    };
    s.recompute_eta();
    let mut steps = Steps {
        fixed: [Step::new(0.1); 2],
        child: vec![[Step::new(0.3); 2]; nc],
        item: vec![[Step::new(0.3); 2]; ni],
        hyper: [Step::new(0.3); 7],
        ridge: [Step::new(0.2); 4],
        scale: [Step::new(0.1); 4],
    };
    let mut draws = Vec::with_capacity(cfg.iters - cfg.warmup);
    for it in 0..cfg.iters {
        s.sweep(&mut steps);
        if it < cfg.warmup {
            if (it + 1) % ADAPT_BATCH == 0 {
                let batch = (it + 1) / ADAPT_BATCH;
                for st in steps.all_mut() {
                    st.adapt(cfg.target_accept, batch);
                }
            }
            if it + 1 == cfg.warmup {
                s.accepted = 0;
                s.proposed = 0;
            }
        } else {
            draws.push(s.draw(chain as u32, (it - cfg.warmup) as u32));
        }
    }
    ChainOutput {
        draws,
        acceptance: s.accepted as f64 / s.proposed.max(1) as f64,
    }
}

impl Sampler<'_> {
    fn recompute_eta(&mut self) {
        let d = self.data;
        for n in 0..d.x.len() {
            let (x, c, i) = (d.x[n], d.child[n], d.item[n]);
            self.eta[n] = self.p.b[0]
                + self.p.b[1] * x
                + self.p.u[c][0]
                + self.p.u[c][1] * x
                + self.p.v[i][0]
                + self.p.v[i][1] * x;
        }
    }

    fn ll_obs(&self, n: usize, eta: f64) -> f64 {
        match self.data.response {
            Response::Time => normal_ln_pdf(self.data.log_time[n], eta, self.p.lsigma.exp()),
            Response::Errors => geometric_ln_pmf(self.data.errors[n], eta, MAX_ATTEMPTS),
        }
    }

    /// Log-likelihood change when `eta[n]` moves by `delta * x[n]^k`.
    fn ll_shift(&self, idx: &[usize], delta: f64, k: usize) -> f64 {
        if self.cfg.prior_only {
            return 0.0;
        }
        let d = self.data;
        idx.iter()
            .map(|&n| {
                let w = if k == 0 { 1.0 } else { d.x[n] };
                if w == 0.0 {
                    0.0
                } else {
                    self.ll_obs(n, self.eta[n] + delta * w) - self.ll_obs(n, self.eta[n])
                }
            })
            .sum()
    }

    fn apply_shift(&mut self, idx: &[usize], delta: f64, k: usize) {
        for &n in idx {
            let w = if k == 0 { 1.0 } else { self.data.x[n] };
            self.eta[n] += delta * w;
        }
    }

    fn accept(&mut self, log_ratio: f64, step: &mut Step) -> bool {
        let ok = log_ratio.is_finite() && (log_ratio >= 0.0 || self.rng.random::<f64>().ln() < log_ratio);
        step.record(ok);
        self.proposed += 1;
        if ok {
            self.accepted += 1;
        }
        ok
    }

    fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    fn child_prior(&self, u: [f64; 2], sd: [f64; 2], rho: f64) -> f64 {
        bvn_ln_pdf(u[0], u[1], sd, rho)
    }

    fn item_prior(&self, v: [f64; 2], sd: [f64; 2], rho: f64) -> f64 {
        if self.cfg.item_slopes {
            bvn_ln_pdf(v[0], v[1], sd, rho)
        } else {
            normal_ln_pdf(v[0], 0.0, sd[0])
        }
    }

    fn children_prior(&self, u: &[[f64; 2]], sd: [f64; 2], rho: f64) -> f64 {
        u.iter().map(|&e| self.child_prior(e, sd, rho)).sum()
    }

    fn items_prior(&self, v: &[[f64; 2]], sd: [f64; 2], rho: f64) -> f64 {
        v.iter().map(|&e| self.item_prior(e, sd, rho)).sum()
    }

    fn sweep(&mut self, steps: &mut Steps) {
        let d = self.data;
        let all: Vec<usize> = (0..d.x.len()).collect();
        let slopes = if self.cfg.item_slopes { 2 } else { 1 };

        for k in 0..2 {
            let delta = steps.fixed[k].scale() * self.normal();
            let idx = if k == 0 { &all } else { &d.letter };
            let old = self.p.b[k];
            let lr = self.ll_shift(idx, delta, k) + normal_ln_pdf(old + delta, 0.0, FIXED_SD)
                - normal_ln_pdf(old, 0.0, FIXED_SD);
            if self.accept(lr, &mut steps.fixed[k]) {
                self.p.b[k] += delta;
                self.apply_shift(idx, delta, k);
            }
        }

        let (sd_c, rho_c) = (self.p.sd_c(), self.p.z_c.tanh());
        for c in 0..d.by_child.len() {
            for k in 0..2 {
                let delta = steps.child[c][k].scale() * self.normal();
                let old = self.p.u[c];
                let mut new = old;
                new[k] += delta;
                let lr = self.ll_shift(&d.by_child[c], delta, k) + self.child_prior(new, sd_c, rho_c)
                    - self.child_prior(old, sd_c, rho_c);
                if self.accept(lr, &mut steps.child[c][k]) {
                    self.p.u[c] = new;
                    self.apply_shift(&d.by_child[c], delta, k);
                }
            }
        }

        let (sd_i, rho_i) = (self.p.sd_i(), self.p.z_i.tanh());
        for i in 0..d.by_item.len() {
            for k in 0..slopes {
                let delta = steps.item[i][k].scale() * self.normal();
                let old = self.p.v[i];
                let mut new = old;
                new[k] += delta;
                let lr = self.ll_shift(&d.by_item[i], delta, k) + self.item_prior(new, sd_i, rho_i)
                    - self.item_prior(old, sd_i, rho_i);
                if self.accept(lr, &mut steps.item[i][k]) {
                    self.p.v[i] = new;
                    self.apply_shift(&d.by_item[i], delta, k);
                }
            }
        }

        self.update_hyper(steps);
        self.update_ridges(steps);
        self.update_scales(steps);

        if d.response == Response::Time {
            let delta = steps.hyper[6].scale() * self.normal();
            let old = self.p.lsigma;
            let new = old + delta;
            let ll = if self.cfg.prior_only {
                0.0
            } else {
                let (so, sn) = (old.exp(), new.exp());
                (0..d.x.len())
                    .map(|n| normal_ln_pdf(d.log_time[n], self.eta[n], sn) - normal_ln_pdf(d.log_time[n], self.eta[n], so))
                    .sum()
            };
            // Half-normal prior on sigma, sampled on the log scale.
            let lr = ll + half_normal_ln_pdf(new.exp(), SD_SCALE) + new - half_normal_ln_pdf(old.exp(), SD_SCALE) - old;
            if self.accept(lr, &mut steps.hyper[6]) {
                self.p.lsigma = new;
            }
        }
    }

    /// Standard deviations and correlations given the effects.
    fn update_hyper(&mut self, steps: &mut Steps) {
        let hyper_lp = |lsd: f64| half_normal_ln_pdf(lsd.exp(), SD_SCALE) + lsd;
        let corr_lp = |z: f64| {
            let r = z.tanh();
            lkj2_ln_pdf(r, LKJ_ETA) + (1.0 - r * r).ln()
        };
        for k in 0..2 {
            let delta = steps.hyper[k].scale() * self.normal();
            let mut lsd = self.p.lsd_c;
            lsd[k] += delta;
            let rho = self.p.z_c.tanh();
            let sd_new = [lsd[0].exp(), lsd[1].exp()];
            let lr = self.children_prior(&self.p.u, sd_new, rho) - self.children_prior(&self.p.u, self.p.sd_c(), rho)
                + hyper_lp(lsd[k])
                - hyper_lp(self.p.lsd_c[k]);
            if self.accept(lr, &mut steps.hyper[k]) {
                self.p.lsd_c = lsd;
            }
        }
        {
            let delta = steps.hyper[2].scale() * self.normal();
            let z = self.p.z_c + delta;
            let sd = self.p.sd_c();
            let lr = self.children_prior(&self.p.u, sd, z.tanh()) - self.children_prior(&self.p.u, sd, self.p.z_c.tanh())
                + corr_lp(z)
                - corr_lp(self.p.z_c);
            if self.accept(lr, &mut steps.hyper[2]) {
                self.p.z_c = z;
            }
        }
        let slopes = if self.cfg.item_slopes { 2 } else { 1 };
        for k in 0..slopes {
            let delta = steps.hyper[3 + k].scale() * self.normal();
            let mut lsd = self.p.lsd_i;
            lsd[k] += delta;
            let rho = self.p.z_i.tanh();
            let sd_new = [lsd[0].exp(), lsd[1].exp()];
            let lr = self.items_prior(&self.p.v, sd_new, rho) - self.items_prior(&self.p.v, self.p.sd_i(), rho)
                + hyper_lp(lsd[k])
                - hyper_lp(self.p.lsd_i[k]);
            if self.accept(lr, &mut steps.hyper[3 + k]) {
                self.p.lsd_i = lsd;
            }
        }
        if self.cfg.item_slopes {
            let delta = steps.hyper[5].scale() * self.normal();
            let z = self.p.z_i + delta;
            let sd = self.p.sd_i();
            let lr = self.items_prior(&self.p.v, sd, z.tanh()) - self.items_prior(&self.p.v, sd, self.p.z_i.tanh())
                + corr_lp(z)
                - corr_lp(self.p.z_i);
            if self.accept(lr, &mut steps.hyper[5]) {
                self.p.z_i = z;
            }
        }
    }

    /// Moves along directions where the likelihood is flat.
    fn update_ridges(&mut self, steps: &mut Steps) {
        let slopes = if self.cfg.item_slopes { 2 } else { 1 };
        for r in 0..4 {
            let (k, children) = (r % 2, r < 2);
            if !children && k >= slopes {
                continue;
            }
            let delta = steps.ridge[r].scale() * self.normal();
            let fixed = self.p.b[k];
            let lr_fixed = normal_ln_pdf(fixed + delta, 0.0, FIXED_SD) - normal_ln_pdf(fixed, 0.0, FIXED_SD);
            let shifted = |effects: &[[f64; 2]]| -> Vec<[f64; 2]> {
                effects
                    .iter()
                    .map(|e| {
                        let mut e = *e;
                        e[k] -= delta;
                        e
                    })
                    .collect()
            };
            let lr = if children {
                let new = shifted(&self.p.u);
                let (sd, rho) = (self.p.sd_c(), self.p.z_c.tanh());
                let lr = lr_fixed + self.children_prior(&new, sd, rho) - self.children_prior(&self.p.u, sd, rho);
                if self.accept(lr, &mut steps.ridge[r]) {
                    self.p.u = new;
                    self.p.b[k] += delta;
                }
                continue;
            } else {
                let new = shifted(&self.p.v);
                let (sd, rho) = (self.p.sd_i(), self.p.z_i.tanh());
                (lr_fixed + self.items_prior(&new, sd, rho) - self.items_prior(&self.p.v, sd, rho), new)
            };
            if self.accept(lr.0, &mut steps.ridge[r]) {
                self.p.v = lr.1;
                self.p.b[k] += delta;
            }
        }
    }

    /// Stretches one effect component and its sd by the same factor.
    fn update_scales(&mut self, steps: &mut Steps) {
        let d = self.data;
        let slopes = if self.cfg.item_slopes { 2 } else { 1 };
        let hyper_lp = |lsd: f64| half_normal_ln_pdf(lsd.exp(), SD_SCALE) + lsd;
        for r in 0..4 {
            let (k, children) = (r % 2, r < 2);
            if !children && k >= slopes {
                continue;
            }
            let s = steps.scale[r].scale() * self.normal();
            let f = s.exp();
            let (effects, lsd_old, rho) = if children {
                (&self.p.u, self.p.lsd_c, self.p.z_c.tanh())
            } else {
                (&self.p.v, self.p.lsd_i, self.p.z_i.tanh())
            };
            let new: Vec<[f64; 2]> = effects
                .iter()
                .map(|e| {
                    let mut e = *e;
                    e[k] *= f;
                    e
                })
                .collect();
            let mut lsd_new = lsd_old;
            lsd_new[k] += s;
            let sd_old = [lsd_old[0].exp(), lsd_old[1].exp()];
            let sd_new = [lsd_new[0].exp(), lsd_new[1].exp()];
            let prior = if children {
                self.children_prior(&new, sd_new, rho) - self.children_prior(effects, sd_old, rho)
            } else {
                self.items_prior(&new, sd_new, rho) - self.items_prior(effects, sd_old, rho)
            };
            let groups = if children { d.child.as_slice() } else { d.item.as_slice() };
            let mut ll = 0.0;
            for n in 0..d.x.len() {
                let w = if k == 0 { 1.0 } else { d.x[n] };
                let e = effects[groups[n]][k];
                self.scratch[n] = self.eta[n] + (f - 1.0) * e * w;
                if !self.cfg.prior_only && w != 0.0 {
                    ll += self.ll_obs(n, self.scratch[n]) - self.ll_obs(n, self.eta[n]);
                }
            }
            let jacobian = effects.len() as f64 * s;
            let lr = ll + prior + hyper_lp(lsd_new[k]) - hyper_lp(lsd_old[k]) + jacobian;
            if self.accept(lr, &mut steps.scale[r]) {
                if children {
                    self.p.u = new;
                    self.p.lsd_c = lsd_new;
                } else {
                    self.p.v = new;
                    self.p.lsd_i = lsd_new;
                }
                std::mem::swap(&mut self.eta, &mut self.scratch);
            }
        }
    }

    fn draw(&self, chain: u32, iter: u32) -> PosteriorDraw {
        let sd_c = self.p.sd_c();
        let sd_i = self.p.sd_i();
        PosteriorDraw {
            chain,
            iter,
            b0: self.p.b[0],
            b_cond: self.p.b[1],
            sd_child_int: sd_c[0],
            sd_child_slope: sd_c[1],
            corr_child: self.p.z_c.tanh(),
            sd_item_int: sd_i[0],
            sd_item_slope: self.cfg.item_slopes.then_some(sd_i[1]),
            corr_item: self.cfg.item_slopes.then(|| self.p.z_i.tanh()),
            sigma: (self.data.response == Response::Time).then(|| self.p.lsigma.exp()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{child_ids, design_trials, simulate_minigame, GenParams};
    use super::*;

    fn quick() -> McmcConfig {
        McmcConfig {
            iters: 1500,
            warmup: 500,
            ..McmcConfig::default()
        }
    }

    #[test]
    fn prior_only_recovers_fixed_effect_prior() {
        let specs = design_trials(&child_ids(4), 1).unwrap();
        let recs = simulate_minigame(&specs, &GenParams::default(), 2).unwrap();
        let cfg = McmcConfig {
            prior_only: true,
            iters: 6000,
            warmup: 1000,
            ..McmcConfig::default()
        };
        let fit = fit_error_model(&recs, &cfg).unwrap();
        let v = fit.values("bCond");
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
        assert!((sd - 2.5).abs() < 0.25, "prior sd {sd}");
    }

    #[test]
    fn time_model_finds_the_condition_effect() {
        let mut p = GenParams::default();
        p.time.b_cond = -0.5;
        p.replicates = 4;
        let specs = design_trials(&child_ids(12), 3).unwrap();
        let recs = simulate_minigame(&specs, &p, 4).unwrap();
        let fit = fit_time_model(&recs, &quick()).unwrap();
        let (lo, hi) = fit.interval("bCond", 0.95).unwrap();
        assert!(lo < -0.5 && -0.5 < hi, "({lo}, {hi})");
        assert!(hi < 0.0);
        assert_eq!(fit.draws.len(), 4 * 1000);
        assert!(fit.values("sigma").iter().all(|s| *s > 0.0));
        assert!(fit.values("corrChild").iter().all(|r| r.abs() <= 1.0));
    }

    #[test]
    fn all_zero_errors_push_the_mean_down() {
        let specs = design_trials(&child_ids(6), 3).unwrap();
        let mut recs = simulate_minigame(&specs, &GenParams::default(), 4).unwrap();
        for r in &mut recs {
            r.errors = 0;
            r.censored = false;
            r.time_ms.get_or_insert(1000.0);
        }
        let fit = fit_error_model(&recs, &quick()).unwrap();
        assert!(fit.mean("b0").unwrap() < -2.0);
        let (lo, hi) = fit.interval("bCond", 0.95).unwrap();
        assert!(hi - lo > 1.0);
    }

    #[test]
    fn preconditions_and_determinism() {
        assert!(fit_time_model(&[], &quick()).is_err());
        let bad = McmcConfig {
            chains: 1,
            ..quick()
        };
        let specs = design_trials(&child_ids(3), 3).unwrap();
        let recs = simulate_minigame(&specs, &GenParams::default(), 4).unwrap();
        assert!(fit_error_model(&recs, &bad).is_err());
        let small = McmcConfig {
            iters: 200,
            warmup: 100,
            ..McmcConfig::default()
        };
        assert_eq!(fit_error_model(&recs, &small).unwrap(), fit_error_model(&recs, &small).unwrap());
        let no_slopes = McmcConfig {
            item_slopes: false,
            ..small
        };
        let fit = fit_error_model(&recs, &no_slopes).unwrap();
        assert!(fit.draws.iter().all(|d| d.sd_item_slope.is_none() && d.sigma.is_none()));
        assert!(!fit.rhat.contains_key("sdItemSlope"));
    }

    #[test]
    fn from_draws_recovers_the_rhat_table() {
        let specs = design_trials(&child_ids(4), 8).unwrap();
        let recs = simulate_minigame(&specs, &GenParams::default(), 2).unwrap();
        let cfg = McmcConfig {
            iters: 300,
            warmup: 100,
            ..McmcConfig::default()
        };
        let fit = fit_time_model(&recs, &cfg).unwrap();
        let mut shuffled = fit.draws.clone();
        shuffled.reverse();
        let back = ModelFit::from_draws(Response::Time, shuffled, cfg.rhat_threshold).unwrap();
        assert_eq!(back.rhat, fit.rhat);
        assert_eq!(back.converged, fit.converged);
        assert_eq!(back.draws, fit.draws);
        let one_chain: Vec<_> = fit.draws.iter().filter(|d| d.chain == 0).cloned().collect();
        assert!(ModelFit::from_draws(Response::Time, one_chain, 1.05).is_err());
    }
}
