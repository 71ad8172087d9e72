//! Small numeric helpers shared by the study code.

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending and non-empty.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty sample");
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(sorted: &[f64]) -> f64 {
    quantile_type7(sorted, 0.5)
}

/// First and third quartiles as medians of the lower and upper halves,
/// the overall median excluded when the count is odd.
pub fn quartiles_median_exclusive(sorted: &[f64]) -> (f64, f64) {
    let n = sorted.len();
    assert!(n > 0, "quartiles of empty sample");
    if n == 1 {
        return (sorted[0], sorted[0]);
    }
    let half = n / 2;
    (median(&sorted[..half]), median(&sorted[n - half..]))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the n - 1 denominator.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn normal_ln_pdf(x: f64, mu: f64, sd: f64) -> f64 {
    let z = (x - mu) / sd;
    -0.5 * z * z - sd.ln() - LN_SQRT_2PI
}

/// Half-normal on `[0, inf)` with scale `s`.
pub fn half_normal_ln_pdf(x: f64, s: f64) -> f64 {
    if x < 0.0 {
        f64::NEG_INFINITY
    } else {
        normal_ln_pdf(x, 0.0, s) + std::f64::consts::LN_2
    }
}

/// LKJ density on a 2x2 correlation matrix, up to a constant.
pub fn lkj2_ln_pdf(rho: f64, eta: f64) -> f64 {
    if rho.abs() >= 1.0 {
        f64::NEG_INFINITY
    } else {
        (eta - 1.0) * (1.0 - rho * rho).ln()
    }
}

/// Zero-mean bivariate normal with standard deviations `s` and correlation `rho`.
pub fn bvn_ln_pdf(a: f64, b: f64, s: [f64; 2], rho: f64) -> f64 {
    let z0 = a / s[0];
    let z1 = b / s[1];
    let om = 1.0 - rho * rho;
    -(z0 * z0 - 2.0 * rho * z0 * z1 + z1 * z1) / (2.0 * om) - s[0].ln() - s[1].ln() - 0.5 * om.ln()
        - 2.0 * LN_SQRT_2PI
}

/// Log-probability of `k` failures before the first success in a geometric
/// with mean `exp(eta)`; `k >= cap` is treated as right-censored.
pub fn geometric_ln_pmf(k: u32, eta: f64, cap: u32) -> f64 {
    // p = 1 / (1 + mu): ln p = -softplus(eta), ln(1 - p) = eta - softplus(eta).
    let sp = softplus(eta);
    let ln_q = eta - sp;
    if k >= cap {
        f64::from(cap) * ln_q
    } else {
        -sp + f64::from(k) * ln_q
    }
}

/// Split potential scale reduction factor over equal-length chains.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0) / 2;
    if n < 2 || chains.is_empty() {
        return f64::NAN;
    }
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| [&c[..n], &c[c.len() - n..]])
        .collect();
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let w = mean(&halves.iter().map(|h| variance(h)).collect::<Vec<_>>());
    let b = n as f64 * variance(&means);
    if w <= 0.0 {
        return if b <= 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var_plus = (n as f64 - 1.0) / n as f64 * w + b / n as f64;
    (var_plus / w).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_matches_hand_values() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_type7(&x, 0.25), 1.75);
        assert_eq!(quantile_type7(&x, 0.5), 2.5);
        assert_eq!(quantile_type7(&x, 1.0), 4.0);
        assert_eq!(quantile_type7(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn median_exclusive_quartiles() {
        assert_eq!(quartiles_median_exclusive(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]), (2.0, 6.0));
        assert_eq!(quartiles_median_exclusive(&[1.0, 2.0, 3.0, 4.0]), (1.5, 3.5));
    }

    #[test]
    fn censored_geometric_mass_is_one() {
        // p = 0.5 at eta = 0.
        let masses: Vec<f64> = (0..=3).map(|k| geometric_ln_pmf(k, 0.0, 3).exp()).collect();
        assert!((masses[0] - 0.5).abs() < 1e-15);
        assert!((masses[3] - 0.125).abs() < 1e-15);
        for eta in [-4.0, -0.3, 0.0, 1.7, 25.0, 40.0] {
            let total: f64 = (0..=3).map(|k| geometric_ln_pmf(k, eta, 3).exp()).sum();
            assert!((total - 1.0).abs() < 1e-12, "{eta}: {total}");
        }
    }

    #[test]
    fn bvn_reduces_to_product_when_uncorrelated() {
        let a = bvn_ln_pdf(0.3, -1.2, [0.5, 2.0], 0.0);
        let b = normal_ln_pdf(0.3, 0.0, 0.5) + normal_ln_pdf(-1.2, 0.0, 2.0);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn rhat_of_identical_chains_is_near_one() {
        let c: Vec<f64> = (0..400).map(|i| ((i * 7919) % 101) as f64).collect();
        assert!((split_rhat(&[c.clone(), c.clone(), c.clone(), c]) - 1.0).abs() < 0.05);
        let shifted = vec![vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0], vec![10.0, 11.0, 10.0, 11.0, 10.0, 11.0]];
        assert!(split_rhat(&shifted) > 1.5);
    }
}
