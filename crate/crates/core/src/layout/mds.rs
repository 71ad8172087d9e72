//! Two-dimensional scaling of a dissimilarity matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{LayoutError, SimilarityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MdsMethod {
    #[default]
    Classical,
    Smacof,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct MdsConfig {
    pub method: MdsMethod,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    /// Symbol index whose coordinates fix the reflection.
    pub anchor: usize,
}

impl Default for MdsConfig {
    fn default() -> Self {
        Self {
            method: MdsMethod::Classical,
            max_iter: 500,
            tol: 1e-10,
            seed: 0,
            anchor: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MdsResult {
    pub coords: Vec<[f64; 2]>,
    /// Raw stress, the sum over pairs of squared distance residuals.
    pub stress: f64,
    /// Stress after each SMACOF iteration, starting with the initial layout.
    pub stress_history: Vec<f64>,
    pub iterations: usize,
    /// Set when the centered matrix has rank below two.
    pub degenerate: bool,
}

pub fn mds_2d(matrix: &SimilarityMatrix, cfg: &MdsConfig) -> Result<MdsResult, LayoutError> {
    matrix.validate()?;
    let n = matrix.len();
    if n == 0 {
        return Ok(MdsResult {
            coords: Vec::new(),
            stress: 0.0,
            stress_history: Vec::new(),
            iterations: 0,
            degenerate: true,
        });
    }
    let delta = DMatrix::from_fn(n, n, |i, j| matrix.values[i][j]);
    let (coords, degenerate, history) = match cfg.method {
        MdsMethod::Classical => {
            let (x, degenerate) = classical(&delta);
            (x, degenerate, Vec::new())
        }
        MdsMethod::Smacof => {
            let (x, history) = smacof(&delta, cfg);
            let degenerate = rank_below_two(&x);
            (x, degenerate, history)
        }
    };
    let coords = canonicalize(coords, cfg.anchor.min(n - 1));
    let stress = raw_stress(&delta, &coords);
    Ok(MdsResult {
        iterations: history.len().saturating_sub(1),
        coords,
        stress,
        stress_history: history,
        degenerate,
    })
}

/// Top two eigenpairs of the double-centered squared-distance matrix.
fn classical(delta: &DMatrix<f64>) -> (Vec<[f64; 2]>, bool) {
    let n = delta.nrows();
    let d2 = delta.map(|d| d * d);
    let row_mean: Vec<f64> = (0..n).map(|i| d2.row(i).mean()).collect();
    let total = d2.mean();
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (d2[(i, j)] - row_mean[i] - row_mean[j] + total));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut lam: Vec<f64> = order.iter().take(2).map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    let scale = lam.first().copied().unwrap_or(0.0).max(1.0);
    let degenerate = lam.len() < 2 || lam[1] <= 1e-10 * scale;
    if degenerate {
        // Keep the layout exactly collinear rather than amplifying noise.
        lam.iter_mut().skip(1).for_each(|l| *l = 0.0);
    }
    let coords = (0..n)
        .map(|i| {
            let mut p = [0.0; 2];
            for (k, &idx) in order.iter().take(2).enumerate() {
                p[k] = eig.eigenvectors[(i, idx)] * lam[k].sqrt();
            }
            p
        })
        .collect();
    (coords, degenerate)
}

/// Stress majorization with unit weights.
fn smacof(delta: &DMatrix<f64>, cfg: &MdsConfig) -> (Vec<[f64; 2]>, Vec<f64>) {
    let n = delta.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let spread = delta.max().max(1e-12);
    let mut x: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(-spread..spread), rng.random_range(-spread..spread)])
        .collect();
    let mut history = vec![raw_stress(delta, &x)];
    for _ in 0..cfg.max_iter {
        // Guttman transform: X <- B(X) X / n.
        let mut next = vec![[0.0; 2]; n];
        for i in 0..n {
            let mut bii = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = dist(x[i], x[j]);
                let bij = if d > 1e-15 { -delta[(i, j)] / d } else { 0.0 };
                bii -= bij;
                next[i][0] += bij * x[j][0];
                next[i][1] += bij * x[j][1];
            }
            next[i][0] += bii * x[i][0];
            next[i][1] += bii * x[i][1];
        }
        for p in &mut next {
            p[0] /= n as f64;
            p[1] /= n as f64;
        }
        x = next;
        let s = raw_stress(delta, &x);
        let prev = *history.last().expect("history starts non-empty");
        history.push(s);
        if prev - s < cfg.tol {
            break;
        }
    }
    (x, history)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn raw_stress(delta: &DMatrix<f64>, x: &[[f64; 2]]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += (dist(x[i], x[j]) - delta[(i, j)]).powi(2);
        }
    }
    s
}

fn rank_below_two(x: &[[f64; 2]]) -> bool {
    let (_, vals) = principal_axes(x);
    vals[1] <= 1e-12 * vals[0].max(1.0)
}

/// Principal directions of a centered point set and their variances, the
/// larger first.
fn principal_axes(x: &[[f64; 2]]) -> ([[f64; 2]; 2], [f64; 2]) {
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in x {
        sxx += p[0] * p[0];
        sxy += p[0] * p[1];
        syy += p[1] * p[1];
    }
    let eig = SymmetricEigen::new(nalgebra::Matrix2::new(sxx, sxy, sxy, syy));
    let (a, b) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let v = |k: usize| [eig.eigenvectors[(0, k)], eig.eigenvectors[(1, k)]];
    ([v(a), v(b)], [eig.eigenvalues[a], eig.eigenvalues[b]])
}

/// Centers, rotates the first principal axis onto x, and picks signs so
/// the anchor point has non-negative coordinates.
pub fn canonicalize(mut x: Vec<[f64; 2]>, anchor: usize) -> Vec<[f64; 2]> {
    let n = x.len() as f64;
    if x.is_empty() {
        return x;
    }
    let cx = x.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = x.iter().map(|p| p[1]).sum::<f64>() / n;
    for p in &mut x {
        p[0] -= cx;
        p[1] -= cy;
    }
    let (axes, _) = principal_axes(&x);
    let mut out: Vec<[f64; 2]> = x
        .iter()
        .map(|p| {
            [
                p[0] * axes[0][0] + p[1] * axes[0][1],
                p[0] * axes[1][0] + p[1] * axes[1][1],
            ]
        })
        .collect();
    let scale = out.iter().flat_map(|p| p.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-9 * scale.max(1e-300);
    for k in 0..2 {
        // The anchor decides; if it sits on the axis, the first point off it does.
        let sign = std::iter::once(anchor)
            .chain(0..out.len())
            .map(|i| out[i][k])
            .find(|v| v.abs() > eps)
            .map_or(1.0, f64::signum);
        for p in &mut out {
            p[k] *= sign;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Phoneme;
    use crate::layout::similarity;

    fn from_points(points: &[[f64; 2]]) -> SimilarityMatrix {
        let n = points.len();
        SimilarityMatrix::new(
            (0..n).map(|i| format!("p{i}")).collect(),
            (0..n).map(|i| (0..n).map(|j| dist(points[i], points[j])).collect()).collect(),
        )
        .unwrap()
    }

    fn max_distance_error(m: &SimilarityMatrix, x: &[[f64; 2]]) -> f64 {
        let n = x.len();
        let mut e: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                e = e.max((dist(x[i], x[j]) - m.values[i][j]).abs());
            }
        }
        e
    }

    #[test]
    fn classical_recovers_planar_points() {
        let pts = [[0.0, 0.0], [3.0, 1.0], [-1.0, 4.0], [2.5, -2.0], [5.0, 5.0], [-3.0, -1.5]];
        let m = from_points(&pts);
        let r = mds_2d(&m, &MdsConfig::default()).unwrap();
        assert!(max_distance_error(&m, &r.coords) < 1e-9);
        assert!(r.stress < 1e-9);
        assert!(!r.degenerate);
    }

    #[test]
    fn equilateral_triangle() {
        let m = SimilarityMatrix::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
        )
        .unwrap();
        let r = mds_2d(&m, &MdsConfig::default()).unwrap();
        assert!(max_distance_error(&m, &r.coords) < 1e-9);
        let cx: f64 = r.coords.iter().map(|p| p[0]).sum();
        assert!(cx.abs() < 1e-12);
    }

    #[test]
    fn collinear_input_is_flagged() {
        let m = from_points(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [7.0, 0.0]]);
        let r = mds_2d(&m, &MdsConfig::default()).unwrap();
        assert!(r.degenerate);
        assert!(r.coords.iter().all(|p| p[1].abs() < 1e-9));
        assert!(max_distance_error(&m, &r.coords) < 1e-9);
    }

    #[test]
    fn smacof_stress_never_increases() {
        let m = similarity(&Phoneme::ALL);
        for seed in 0..5 {
            let cfg = MdsConfig {
                method: MdsMethod::Smacof,
                seed,
                ..MdsConfig::default()
            };
            let r = mds_2d(&m, &cfg).unwrap();
            for w in r.stress_history.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{} > {}", w[1], w[0]);
            }
            assert!(r.iterations > 0);
        }
    }

    #[test]
    fn canonical_output_ignores_rotation_and_reflection() {
        let pts = [[0.0, 0.0], [4.0, 1.0], [-1.0, 3.0], [2.0, -2.0], [1.0, 1.5]];
        let moved: Vec<[f64; 2]> = pts
            .iter()
            .map(|p| {
                let (s, c) = 0.7f64.sin_cos();
                [-(c * p[0] - s * p[1]) + 10.0, s * p[0] + c * p[1] - 3.0]
            })
            .collect();
        let a = canonicalize(pts.to_vec(), 1);
        let b = canonicalize(moved, 1);
        for (p, q) in a.iter().zip(&b) {
            assert!((p[0] - q[0]).abs() < 1e-9 && (p[1] - q[1]).abs() < 1e-9);
        }
        assert!(a[1][0] >= 0.0 && a[1][1] >= 0.0);
    }

    #[test]
    fn empty_and_single() {
        let m = SimilarityMatrix::new(vec![], vec![]).unwrap();
        assert!(mds_2d(&m, &MdsConfig::default()).unwrap().coords.is_empty());
        let m = SimilarityMatrix::new(vec!["x".into()], vec![vec![0.0]]).unwrap();
        assert_eq!(mds_2d(&m, &MdsConfig::default()).unwrap().coords, vec![[0.0, 0.0]]);
    }
}
