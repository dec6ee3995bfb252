//! Similarity dimension, the entropy map `Λ` and the optimisation
//! `f(λ) = max_{p ∈ C(λ)} Λ(p)`.
//!
//! `Λ(p) = H(p) / L(p)` with `H(p) = -Σ p_j ln p_j` and
//! `L(p) = -Σ p_j ln r_j > 0`; `C(λ)` is the part of the simplex with
//! `p_j <= λ r_j^s` for `j < m` (the last coordinate is only bounded by the
//! simplex).

use crate::error::{Error, Result};

/// Tolerance on `Σ p_j = 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// A point of the probability simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::NotProbabilityVector("no entries".into()));
        }
        if entries.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::NotProbabilityVector(format!("negative or non-finite entry in {entries:?}")));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::NotProbabilityVector(format!("entries sum to {total}")));
        }
        Ok(ProbVector(entries))
    }

    /// Rescales nonnegative weights onto the simplex.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::NotProbabilityVector(format!("negative or non-finite entry in {weights:?}")));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::NotProbabilityVector("all entries are zero".into()));
        }
        Ok(ProbVector(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub(crate) fn check_ratios(ratios: &[f64]) -> Result<()> {
    if ratios.len() < 2 {
        return Err(Error::InvalidRatios(format!("need at least two ratios, got {}", ratios.len())));
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Error::InvalidRatios(format!("ratio {r} outside (0, 1)")));
    }
    Ok(())
}

/// The root `s` of `Σ r_i^s = 1`, by bisection to `1e-12`.
pub fn similarity_dimension(ratios: &[f64]) -> Result<f64> {
    check_ratios(ratios)?;
    let pressure = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let r_max = ratios.iter().cloned().fold(0.0, f64::max);
    let mut lo = 0.0;
    let mut hi = (ratios.len() as f64).ln() / -r_max.ln() + 1.0;
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if pressure(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

fn log_cost(p: &[f64], ratios: &[f64]) -> f64 {
    -p.iter().zip(ratios).map(|(x, r)| x * r.ln()).sum::<f64>()
}

fn lambda_raw(p: &[f64], ratios: &[f64]) -> f64 {
    entropy(p) / log_cost(p, ratios)
}

/// `Λ(p) = Σ p_j log p_j / Σ p_j log r_j`, with `0 log 0 = 0`.
pub fn entropy_dim(p: &ProbVector, ratios: &[f64]) -> Result<f64> {
    check_ratios(ratios)?;
    if p.len() != ratios.len() {
        return Err(Error::DimensionMismatch {
            expected: ratios.len(),
            found: p.len(),
        });
    }
    Ok(lambda_raw(p.entries(), ratios))
}

/// Caps `λ r_j^s` for `j < m`, and `1` for the last coordinate.
fn caps(lambda: f64, ratios: &[f64], s: f64) -> Vec<f64> {
    let m = ratios.len();
    ratios
        .iter()
        .enumerate()
        .map(|(j, r)| if j + 1 < m { (lambda * r.powf(s)).min(1.0) } else { 1.0 })
        .collect()
}

/// Maximiser of `H(p) - t L(p)` over the capped simplex.
///
/// Stationarity gives `p_j = min(u_j, c r_j^t)`; `c` is fixed by `Σ p_j = 1`
/// and found by walking the sorted breakpoints `u_j / r_j^t`.
fn parametric_argmax(t: f64, ratios: &[f64], caps: &[f64]) -> Vec<f64> {
    let weights: Vec<f64> = ratios.iter().map(|r| r.powf(t)).collect();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| (caps[a] / weights[a]).total_cmp(&(caps[b] / weights[b])));
    let mut capped_mass = 0.0;
    let mut free_weight: f64 = weights.iter().sum();
    let mut c = 0.0;
    for (k, &j) in order.iter().enumerate() {
        c = (1.0 - capped_mass) / free_weight;
        if c * weights[j] <= caps[j] {
            break;
        }
        capped_mass += caps[j];
        free_weight -= weights[j];
        if k + 1 == order.len() {
            c = f64::INFINITY;
        }
    }
    weights
        .iter()
        .zip(caps)
        .map(|(w, u)| (c * w).min(*u))
        .collect()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    Ok(())
}

/// `f(λ)` by Dinkelbach iteration; returns the value and a maximiser.
pub fn f_of_lambda_argmax(lambda: f64, ratios: &[f64], s: f64) -> Result<(f64, Vec<f64>)> {
    check_ratios(ratios)?;
    check_lambda(lambda)?;
    let u = caps(lambda, ratios, s);
    let mut t = 0.0;
    let mut p = parametric_argmax(t, ratios, &u);
    for _ in 0..200 {
        p = parametric_argmax(t, ratios, &u);
        let next = lambda_raw(&p, ratios);
        // F(t) = H - tL >= 0 and vanishes exactly at the optimum
        if next - t <= 1e-15 {
            t = t.max(next);
            break;
        }
        t = next;
    }
    Ok((t, p))
}

/// `f(λ) = max_{p ∈ C(λ)} Λ(p)`.
pub fn f_of_lambda(lambda: f64, ratios: &[f64], s: f64) -> Result<f64> {
    f_of_lambda_argmax(lambda, ratios, s).map(|(v, _)| v)
}

/// Grid pitch of the cross-check.
pub const GRID_PITCH: f64 = 1e-3;

/// `f(λ)` from Dinkelbach and from the dense grid search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckedF {
    pub dinkelbach: f64,
    /// `None` for `m > 3`, where the grid is not run.
    pub grid: Option<f64>,
}

impl CheckedF {
    pub fn value(&self) -> f64 {
        self.grid.map_or(self.dinkelbach, |g| g.max(self.dinkelbach))
    }

    pub fn discrepancy(&self) -> Option<f64> {
        self.grid.map(|g| (g - self.dinkelbach).abs())
    }
}

/// `f(λ)` with the grid cross-check for `m <= 3`.
pub fn f_of_lambda_checked(lambda: f64, ratios: &[f64], s: f64) -> Result<CheckedF> {
    let dinkelbach = f_of_lambda(lambda, ratios, s)?;
    let grid = if ratios.len() <= 3 {
        Some(grid_max(lambda, ratios, s, GRID_PITCH)?)
    } else {
        None
    };
    Ok(CheckedF { dinkelbach, grid })
}

/// Maximum of `Λ` over `C(λ)` by a dense grid (pitch `pitch`, plus the cap
/// values) followed by a compass search from the best grid point. Only for
/// `m <= 3`.
pub fn grid_max(lambda: f64, ratios: &[f64], s: f64, pitch: f64) -> Result<f64> {
    check_ratios(ratios)?;
    check_lambda(lambda)?;
    let m = ratios.len();
    if m > 3 {
        return Err(Error::InvalidArgument("grid search supports at most three maps".into()));
    }
    let u = caps(lambda, ratios, s);
    let axis = |cap: f64| -> Vec<f64> {
        let n = (cap / pitch).floor() as usize;
        let mut v: Vec<f64> = (0..=n).map(|i| i as f64 * pitch).collect();
        v.push(cap);
        v
    };
    let feasible = |free: &[f64]| -> Option<Vec<f64>> {
        let rest = 1.0 - free.iter().sum::<f64>();
        if rest < -1e-15 || free.iter().zip(&u).any(|(x, c)| *x < 0.0 || *x > *c) {
            return None;
        }
        let mut p = free.to_vec();
        p.push(rest.max(0.0));
        Some(p)
    };
    let score = |free: &[f64]| feasible(free).map_or(f64::NEG_INFINITY, |p| lambda_raw(&p, ratios));
    let mut best = (f64::NEG_INFINITY, vec![0.0; m - 1]);
    if m == 2 {
        for x in axis(u[0]) {
            let v = score(&[x]);
            if v > best.0 {
                best = (v, vec![x]);
            }
        }
    } else {
        let ys = axis(u[1]);
        for x in axis(u[0]) {
            for &y in &ys {
                if x + y > 1.0 {
                    break;
                }
                let v = score(&[x, y]);
                if v > best.0 {
                    best = (v, vec![x, y]);
                }
            }
        }
    }
    let (mut value, mut point) = best;
    let mut step = pitch;
    while step > 1e-12 {
        let mut improved = false;
        for i in 0..m - 1 {
            for sign in [-1.0, 1.0] {
                let mut cand = point.clone();
                cand[i] = (cand[i] + sign * step).clamp(0.0, u[i]);
                let v = score(&cand);
                if v > value {
                    value = v;
                    point = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok(value)
}

/// `g(α) = sup{λ ∈ [0,1] : f(λ) = α}` by bisection on `f(λ) <= α`.
pub fn g_of_alpha(alpha: f64, ratios: &[f64], s: f64) -> Result<f64> {
    check_ratios(ratios)?;
    if !(alpha > 0.0 && alpha < s) {
        return Err(Error::AlphaOutOfRange { alpha, s });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f_of_lambda(mid, ratios, s)? <= alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn similarity_dimension_examples() {
        assert!((similarity_dimension(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-10);
        let cantor = similarity_dimension(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((cantor - 2f64.ln() / 3f64.ln()).abs() < 1e-10);
        let tri = similarity_dimension(&[0.5, 0.5, 0.5]).unwrap();
        assert!((tri - 3f64.log2()).abs() < 1e-10);
        assert!(similarity_dimension(&[0.5]).is_err());
        assert!(similarity_dimension(&[0.5, 1.0]).is_err());
    }

    #[test]
    fn entropy_dim_examples() {
        let half = [0.5, 0.5];
        let p = ProbVector::new(vec![0.5, 0.5]).unwrap();
        assert!((entropy_dim(&p, &half).unwrap() - 1.0).abs() < 1e-12);
        let p = ProbVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(entropy_dim(&p, &half).unwrap(), 0.0);
        let p = ProbVector::new(vec![0.25, 0.75]).unwrap();
        let binary_entropy = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert!((entropy_dim(&p, &half).unwrap() - binary_entropy).abs() < 1e-12);
        assert!((binary_entropy - 0.811_278_1).abs() < 1e-6);
        assert!(ProbVector::normalized(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn f_examples() {
        let r = [0.5, 0.5];
        assert_eq!(f_of_lambda(0.0, &r, 1.0).unwrap(), 0.0);
        assert!((f_of_lambda(1.0, &r, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let v = f_of_lambda(0.5, &r, 1.0).unwrap();
        assert!((v - 0.811_278_1).abs() < 1e-4, "{v}");
        assert!(matches!(f_of_lambda(1.5, &r, 1.0), Err(Error::LambdaOutOfRange(_))));
    }

    #[test]
    fn f_matches_one_dimensional_scan() {
        let r = [0.3, 0.6];
        let s = similarity_dimension(&r).unwrap();
        for i in 0..=20 {
            let lambda = i as f64 / 20.0;
            let cap = lambda * r[0].powf(s);
            let scan = (0..=100_000)
                .map(|k| cap * k as f64 / 100_000.0)
                .map(|x| lambda_raw(&[x, 1.0 - x], &r))
                .fold(f64::NEG_INFINITY, f64::max);
            let v = f_of_lambda(lambda, &r, s).unwrap();
            assert!(v >= scan - 1e-9 && v <= scan + 1e-6, "{lambda}: {v} vs {scan}");
        }
    }

    #[test]
    fn g_examples() {
        let r = [0.5, 0.5];
        let g = g_of_alpha(0.811_278_1, &r, 1.0).unwrap();
        assert!((g - 0.5).abs() < 1e-3, "{g}");
        assert!(g_of_alpha(1e-9, &r, 1.0).unwrap() < 1e-3);
        assert!(g_of_alpha(1.0 - 1e-9, &r, 1.0).unwrap() > 0.99);
        assert!(matches!(g_of_alpha(1.0, &r, 1.0), Err(Error::AlphaOutOfRange { .. })));
        assert!(matches!(g_of_alpha(0.0, &r, 1.0), Err(Error::AlphaOutOfRange { .. })));
    }

    #[test]
    fn f_nondecreasing_on_fine_grid() {
        let r = [0.2, 0.3, 0.45];
        let s = similarity_dimension(&r).unwrap();
        let mut last = 0.0;
        for i in 0..=1000 {
            let v = f_of_lambda(i as f64 / 1000.0, &r, s).unwrap();
            assert!(v >= last - 1e-12);
            last = v;
        }
        assert!((last - s).abs() < 1e-9);
    }

    fn ratio_list() -> impl Strategy<Value = Vec<f64>> {
        (2usize..=4).prop_flat_map(|m| prop::collection::vec(0.05f64..0.6, m))
    }

    proptest! {
        #[test]
        fn natural_weights_realise_similarity_dimension(r in ratio_list()) {
            let s = similarity_dimension(&r).unwrap();
            let residual: f64 = r.iter().map(|x| x.powf(s)).sum::<f64>() - 1.0;
            prop_assert!(residual.abs() < 1e-10);
            let p = ProbVector::normalized(r.iter().map(|x| x.powf(s)).collect()).unwrap();
            prop_assert!((entropy_dim(&p, &r).unwrap() - s).abs() < 1e-9);
        }

        #[test]
        fn entropy_dim_bounded_by_s(r in ratio_list(), w in prop::collection::vec(0.0f64..1.0, 4)) {
            let s = similarity_dimension(&r).unwrap();
            let w: Vec<f64> = w[..r.len()].to_vec();
            prop_assume!(w.iter().sum::<f64>() > 1e-6);
            let p = ProbVector::normalized(w).unwrap();
            let v = entropy_dim(&p, &r).unwrap();
            prop_assert!(v >= 0.0 && v <= s + 1e-9);
        }

        #[test]
        fn dinkelbach_agrees_with_grid(r in (2usize..=3).prop_flat_map(|m| prop::collection::vec(0.05f64..0.6, m)), lambda in 0.0f64..=1.0) {
            let s = similarity_dimension(&r).unwrap();
            let c = f_of_lambda_checked(lambda, &r, s).unwrap();
            let g = c.grid.unwrap();
            prop_assert!(c.dinkelbach >= g - 1e-6);
            prop_assert!(c.discrepancy().unwrap() <= 1e-4);
        }
    }
}
