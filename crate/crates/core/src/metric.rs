//! The Fortet–Mourier distance
//! `L(μ, ν) = sup { ∫ f dμ - ∫ f dν : |f| <= 1, Lip(f) <= 1 }` on atomic measures.
//!
//! The supremum is a linear program over the values of `f` on the merged
//! support. Its dual is a transportation problem: mass moves between atoms at
//! cost `min(‖x - y‖, 2)`, and any imbalance is discharged at unit cost. The
//! transportation problem is solved by the simplex method on a spanning-tree
//! basis with Bland's rule.

use crate::error::{Error, Result};
use crate::geometry::{distance, enlargement, DigitalSet};
use crate::measures::AtomicMeasure;

/// Largest merged support solved by the linear program.
pub const MAX_SUPPORT: usize = 400;

/// Reduced costs above `-OPTIMALITY_TOLERANCE` count as nonnegative.
const OPTIMALITY_TOLERANCE: f64 = 1e-12;

const MAX_PIVOTS: usize = 1_000_000;

/// `min(‖x - y‖, 2)`, the distance between `δ_x` and `δ_y`.
pub fn dirac_distance(x: &[f64], y: &[f64]) -> f64 {
    distance(x, y).min(2.0)
}

fn check_pair(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<()> {
    if !(mu.is_probability() && nu.is_probability()) {
        return Err(Error::NotProbabilityMeasures(mu.total_mass(), nu.total_mass()));
    }
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    Ok(())
}

/// Signed mass `μ - ν` on the merged support, zero entries dropped.
///
/// Both atom lists are sorted, so the merge is linear.
pub fn signed_difference(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Vec<(Vec<f64>, f64)> {
    let (a, b) = (mu.points(), nu.points());
    let (wa, wb) = (mu.weights(), nu.weights());
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some(p), Some(q)) => p
                .iter()
                .zip(q)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal),
            (Some(_), None) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        };
        let (p, c) = match ord {
            std::cmp::Ordering::Less => {
                i += 1;
                (&a[i - 1], wa[i - 1])
            }
            std::cmp::Ordering::Greater => {
                j += 1;
                (&b[j - 1], -wb[j - 1])
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
                (&a[i - 1], wa[i - 1] - wb[j - 1])
            }
        };
        if c != 0.0 {
            out.push((p.clone(), c));
        }
    }
    out
}

fn canonical_less(a: &AtomicMeasure, b: &AtomicMeasure) -> bool {
    let key = |m: &AtomicMeasure| -> Vec<f64> {
        m.atoms().flat_map(|(p, w)| p.iter().copied().chain([w])).collect()
    };
    let (ka, kb) = (key(a), key(b));
    ka.iter()
        .zip(&kb)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(ka.len().cmp(&kb.len()))
        .is_lt()
}

/// The Fortet–Mourier distance between two probability measures.
///
/// When one measure is a single atom every coupling is forced and the value
/// is the closed form `Σ_y ν(y) min(‖x - y‖, 2)`, with no size limit.
/// Otherwise the merged support may hold at most [`MAX_SUPPORT`] points.
pub fn fortet_mourier(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<f64> {
    check_pair(mu, nu)?;
    for (single, other) in [(mu, nu), (nu, mu)] {
        if single.len() == 1 {
            let x = &single.points()[0];
            return Ok(other.atoms().map(|(y, w)| w * dirac_distance(x, y)).sum());
        }
    }
    fortet_mourier_lp(mu, nu)
}

/// [`fortet_mourier`] without the single-atom shortcut: always solves the
/// transportation program.
pub fn fortet_mourier_lp(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<f64> {
    check_pair(mu, nu)?;
    // a fixed argument order makes the value exactly symmetric
    let (mu, nu) = if canonical_less(nu, mu) { (nu, mu) } else { (mu, nu) };
    let diff = signed_difference(mu, nu);
    if diff.len() > MAX_SUPPORT {
        return Err(Error::SupportTooLarge(diff.len(), MAX_SUPPORT));
    }
    let (sources, sinks): (Vec<_>, Vec<_>) = diff.into_iter().partition(|(_, c)| *c > 0.0);
    transport_value(&sources, &sinks)
}

/// Minimum cost of moving the positive masses onto the negative ones at cost
/// `min(d, 2)`, with unit cost for unmatched mass.
fn transport_value(sources: &[(Vec<f64>, f64)], sinks: &[(Vec<f64>, f64)]) -> Result<f64> {
    let mut supply: Vec<f64> = sources.iter().map(|s| s.1).collect();
    let mut demand: Vec<f64> = sinks.iter().map(|s| -s.1).collect();
    let (ts, td): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    // rows and columns beyond the atoms form the unit-cost ground node
    let ground_row = td > ts;
    let ground_col = ts > td;
    if ground_row {
        supply.push(td - ts);
    }
    if ground_col {
        demand.push(ts - td);
    }
    let (p, q) = (supply.len(), demand.len());
    if p == 0 || q == 0 {
        return Ok(supply.iter().chain(&demand).sum());
    }
    let mut cost = vec![0.0; p * q];
    for i in 0..p {
        for j in 0..q {
            cost[i * q + j] = match (sources.get(i), sinks.get(j)) {
                (Some(a), Some(b)) => dirac_distance(&a.0, &b.0),
                _ => 1.0,
            };
        }
    }
    let mut t = Transport::northwest(supply, demand, cost);
    t.solve()?;
    Ok(t.value())
}

/// Transportation simplex on a `p × q` cost matrix.
struct Transport {
    p: usize,
    q: usize,
    cost: Vec<f64>,
    flow: Vec<f64>,
    /// Basic cells (always `p + q - 1`, forming a spanning tree).
    basis: Vec<usize>,
    is_basic: Vec<bool>,
}

impl Transport {
    fn northwest(mut supply: Vec<f64>, mut demand: Vec<f64>, cost: Vec<f64>) -> Self {
        let (p, q) = (supply.len(), demand.len());
        let mut flow = vec![0.0; p * q];
        let mut basis = Vec::with_capacity(p + q - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = supply[i].min(demand[j]);
            flow[i * q + j] = x;
            basis.push(i * q + j);
            supply[i] -= x;
            demand[j] -= x;
            if i == p - 1 && j == q - 1 {
                break;
            }
            if j == q - 1 || (i < p - 1 && supply[i] <= demand[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        let mut is_basic = vec![false; p * q];
        basis.iter().for_each(|&c| is_basic[c] = true);
        Transport {
            p,
            q,
            cost,
            flow,
            basis,
            is_basic,
        }
    }

    fn value(&self) -> f64 {
        self.basis.iter().map(|&c| self.cost[c] * self.flow[c]).sum()
    }

    /// Tree adjacency: nodes `0..p` are rows, `p..p+q` columns.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.p + self.q];
        for &c in &self.basis {
            let (i, j) = (c / self.q, c % self.q);
            adj[i].push((self.p + j, c));
            adj[self.p + j].push((i, c));
        }
        adj
    }

    fn potentials(&self, adj: &[Vec<(usize, usize)>]) -> (Vec<f64>, Vec<f64>) {
        let mut pot = vec![f64::NAN; self.p + self.q];
        pot[0] = 0.0;
        let mut stack = vec![0];
        while let Some(n) = stack.pop() {
            for &(m, c) in &adj[n] {
                if pot[m].is_nan() {
                    pot[m] = self.cost[c] - pot[n];
                    stack.push(m);
                }
            }
        }
        let v = pot.split_off(self.p);
        (pot, v)
    }

    /// Basic cells on the tree path from row `i` to column `j`, in order.
    fn tree_path(&self, adj: &[Vec<(usize, usize)>], i: usize, j: usize) -> Vec<usize> {
        let target = self.p + j;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.p + self.q];
        let mut seen = vec![false; self.p + self.q];
        seen[i] = true;
        let mut stack = vec![i];
        while let Some(n) = stack.pop() {
            if n == target {
                break;
            }
            for &(m, c) in &adj[n] {
                if !seen[m] {
                    seen[m] = true;
                    parent[m] = Some((n, c));
                    stack.push(m);
                }
            }
        }
        let mut path = Vec::new();
        let mut n = target;
        while n != i {
            let (prev, c) = parent[n].expect("basis is a spanning tree");
            path.push(c);
            n = prev;
        }
        path.reverse();
        path
    }

    fn solve(&mut self) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            let adj = self.adjacency();
            let (u, v) = self.potentials(&adj);
            // Bland: the lowest-indexed improving cell enters
            let entering = (0..self.p * self.q)
                .find(|&c| !self.is_basic[c] && self.cost[c] - u[c / self.q] - v[c % self.q] < -OPTIMALITY_TOLERANCE);
            let Some(enter) = entering else {
                return Ok(());
            };
            let (i, j) = (enter / self.q, enter % self.q);
            // cycle: enter (+), then alternating -, +, ... along the path
            let path = self.tree_path(&adj, i, j);
            let minus: Vec<usize> = path.iter().copied().step_by(2).collect();
            let theta = minus.iter().map(|&c| self.flow[c]).fold(f64::INFINITY, f64::min);
            // Bland: among the tied blocking cells the lowest index leaves
            let leave = minus
                .iter()
                .copied()
                .filter(|&c| self.flow[c] == theta)
                .min()
                .expect("cycle has a blocking cell");
            for (k, &c) in path.iter().enumerate() {
                if k % 2 == 0 {
                    self.flow[c] -= theta;
                } else {
                    self.flow[c] += theta;
                }
            }
            self.flow[enter] = theta;
            self.flow[leave] = 0.0;
            self.is_basic[leave] = false;
            self.is_basic[enter] = true;
            let pos = self.basis.iter().position(|&c| c == leave).expect("leaving cell is basic");
            self.basis[pos] = enter;
        }
        Err(Error::LinearProgram(format!("no convergence after {MAX_PIVOTS} pivots")))
    }
}

/// Output of [`lemma_topo1_probe`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeResult {
    /// `μ(E) - ν(E(γ))`.
    pub excess: f64,
    /// `L(μ, ν)`.
    pub distance: f64,
}

/// Measures how far `μ(E) <= ν(E(γ)) + β` is from failing for this pair.
pub fn lemma_topo1_probe(mu: &AtomicMeasure, nu: &AtomicMeasure, e: &DigitalSet, gamma: f64) -> Result<ProbeResult> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma = {gamma} must be positive")));
    }
    let distance = fortet_mourier(mu, nu)?;
    let grown = enlargement(e, gamma)?;
    Ok(ProbeResult {
        excess: mu.set_mass(e) - nu.set_mass(&grown),
        distance,
    })
}
