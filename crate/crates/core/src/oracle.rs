//! Slow reference implementations used to cross-check the fast paths.
//!
//! Each routine here solves its problem by direct enumeration and shares no
//! code with the production algorithm it checks. They are exported so the
//! integration and acceptance tests can use them.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::{distance, DigitalSet, DyadicCube};
use crate::measures::AtomicMeasure;

/// `M^s_{2^-j0}` by enumerating every admissible cover.
///
/// Every dyadic cover of a digital set by cubes of depth in `[j0, D]` is
/// obtained by assigning each leaf one of its ancestors so that the chosen
/// cubes form an antichain; the cover value is the sum over distinct chosen
/// cubes. Intended for at most a handful of leaves.
pub fn brute_force_net_measure(set: &DigitalSet, s: f64, j0: u32) -> f64 {
    let leaves: Vec<DyadicCube> = set.cubes().collect();
    if leaves.is_empty() {
        return 0.0;
    }
    let depth = set.depth();
    let choices = (depth - j0 + 1) as usize;
    let total = choices.checked_pow(leaves.len() as u32).expect("too many leaves for enumeration");
    let mut best = f64::INFINITY;
    let mut chosen: Vec<DyadicCube> = Vec::with_capacity(leaves.len());
    for mut index in 0..total {
        chosen.clear();
        for leaf in &leaves {
            let k = j0 + (index % choices) as u32;
            index /= choices;
            chosen.push(leaf.ancestor(k));
        }
        let distinct: BTreeSet<&DyadicCube> = chosen.iter().collect();
        let antichain = distinct
            .iter()
            .all(|a| distinct.iter().all(|b| a == b || !a.contains(b)));
        if antichain {
            let value: f64 = distinct.iter().map(|c| c.side().powf(s)).sum();
            best = best.min(value);
        }
    }
    best
}

/// Largest slab step count (at the resolution of `e`) whose restriction has
/// `M^α_{2^-j0} <= threshold`, by scanning the whole face grid.
pub fn exhaustive_admissible_steps(e: &DigitalSet, cube: &DyadicCube, alpha: f64, threshold: f64, j0: u32) -> u64 {
    let depth = e.depth();
    let max_steps = 1u64 << (depth - cube.depth());
    let base = cube.coords()[0] << (depth - cube.depth());
    let inside: Vec<DyadicCube> = e.cubes().filter(|c| cube.contains(c)).collect();
    let mut best = 0;
    for steps in 0..=max_steps {
        let kept = inside.iter().filter(|c| c.coords()[0] < base + steps).cloned();
        let piece = DigitalSet::new(e.dim(), depth, kept).expect("cubes share the set depth");
        let value = crate::net_measure::net_measure_of(&piece, alpha, j0).expect("valid query");
        if value <= threshold + 1e-12 {
            best = steps;
        }
    }
    best
}

/// Maximises `c·x` subject to `A x <= b`, `x >= 0`, for `b >= 0`, with a
/// dense tableau and Bland's rule. Returns the optimal value.
pub fn dense_simplex_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<f64> {
    let (m, n) = (a.len(), c.len());
    if b.iter().any(|&v| v < 0.0) {
        return Err(Error::LinearProgram("origin is infeasible".into()));
    }
    let width = n + m + 1;
    // rows 0..m: constraints with slacks; row m: reduced costs
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        t[i][..n].copy_from_slice(&a[i]);
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    let mut basic: Vec<usize> = (n..n + m).collect();
    loop {
        let Some(enter) = (0..n + m).find(|&j| t[m][j] < -1e-12) else {
            return Ok(t[m][width - 1]);
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][enter] > 1e-12 {
                let ratio = t[i][width - 1] / t[i][enter];
                leave = match leave {
                    Some((r, best)) if ratio > best || (ratio == best && basic[i] > basic[r]) => Some((r, best)),
                    _ => Some((i, ratio)),
                };
            }
        }
        let (r, _) = leave.ok_or_else(|| Error::LinearProgram("unbounded".into()))?;
        let pivot = t[r][enter];
        t[r].iter_mut().for_each(|v| *v /= pivot);
        let row = t[r].clone();
        for (i, line) in t.iter_mut().enumerate() {
            if i != r && line[enter] != 0.0 {
                let f = line[enter];
                line.iter_mut().zip(&row).for_each(|(v, w)| *v -= f * w);
            }
        }
        basic[r] = enter;
    }
}

/// The Fortet–Mourier distance from the primal program: with `g = f + 1`,
/// maximise `Σ c_i g_i - Σ c_i` over `0 <= g_i <= 2`, `g_i - g_j <= ‖z_i - z_j‖`.
pub fn dense_fortet_mourier(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<f64> {
    let mut support: Vec<Vec<f64>> = mu.points().iter().chain(nu.points()).cloned().collect();
    support.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    support.dedup();
    let n = support.len();
    let mass_at = |m: &AtomicMeasure, z: &[f64]| -> f64 { m.atoms().filter(|(p, _)| *p == z).map(|(_, w)| w).sum() };
    let c: Vec<f64> = support.iter().map(|z| mass_at(mu, z) - mass_at(nu, z)).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        a.push(row);
        b.push(2.0);
        for j in 0..n {
            if i != j {
                let mut row = vec![0.0; n];
                row[i] = 1.0;
                row[j] = -1.0;
                a.push(row);
                b.push(distance(&support[i], &support[j]));
            }
        }
    }
    Ok(dense_simplex_max(&c, &a, &b)? - c.iter().sum::<f64>())
}

