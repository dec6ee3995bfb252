//! Atomic measures and the explicit witness constructions built from them.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{deinterleave, distance, side, DigitalSet, DyadicCube};
use crate::net_measure::{optimal_cover, NetMeasureQuery};

/// Tolerance on the total mass of a probability measure.
pub const MASS_TOLERANCE: f64 = 1e-10;

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// A finite weighted point set.
///
/// Atoms are kept sorted lexicographically, exact duplicates are merged and
/// zero weights dropped, so equal measures have equal representations.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl AtomicMeasure {
    /// A measure with arbitrary nonnegative total mass.
    pub fn unnormalized(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMeasure("dimension must be positive".into()));
        }
        for (p, w) in &atoms {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMeasure(format!("non-finite atom {p:?}")));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidMeasure(format!("weight {w} is not a nonnegative number")));
            }
        }
        let mut atoms: Vec<(Vec<f64>, f64)> = atoms.into_iter().filter(|(_, w)| *w > 0.0).collect();
        atoms.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        let mut points: Vec<Vec<f64>> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            match points.last() {
                Some(last) if lex_cmp(last, &p).is_eq() => *weights.last_mut().expect("paired") += w,
                _ => {
                    points.push(p);
                    weights.push(w);
                }
            }
        }
        Ok(AtomicMeasure { dim, points, weights })
    }

    /// A probability measure; the weights must sum to one within [`MASS_TOLERANCE`].
    pub fn new(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let m = Self::unnormalized(dim, atoms)?;
        m.require_probability()?;
        Ok(m)
    }

    /// Rescales positive total mass to one.
    pub fn normalized(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let mut m = Self::unnormalized(dim, atoms)?;
        let total = m.total_mass();
        if !(total > 0.0) {
            return Err(Error::NotProbabilityMeasure(total));
        }
        m.weights.iter_mut().for_each(|w| *w /= total);
        Ok(m)
    }

    pub fn dirac(x: Vec<f64>) -> Result<Self> {
        let dim = x.len();
        Self::new(dim, vec![(x, 1.0)])
    }

    /// Equal weights on the given points.
    pub fn uniform(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let w = 1.0 / n as f64;
        Self::new(dim, points.into_iter().map(|p| (p, w)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.iter().map(Vec::as_slice).zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= MASS_TOLERANCE
    }

    fn require_probability(&self) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(Error::NotProbabilityMeasure(self.total_mass()))
        }
    }

    /// Mass of the open ball `B(x, r)`, by direct summation.
    pub fn ball_mass(&self, x: &[f64], r: f64) -> f64 {
        self.atoms().filter(|(p, _)| distance(p, x) < r).map(|(_, w)| w).sum()
    }

    /// Mass of the cube set: atoms lying in a cube of `set`.
    pub fn set_mass(&self, set: &DigitalSet) -> f64 {
        self.atoms().filter(|(p, _)| set.contains_point(p)).map(|(_, w)| w).sum()
    }

    pub fn index(&self) -> MassIndex<'_> {
        MassIndex::new(self)
    }

    /// Text form: header `dim=<d> atoms=<n>`, then `w x_1 ... x_d` per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("dim={} atoms={}\n", self.dim, self.len());
        for (p, w) in self.atoms() {
            out.push_str(&w.to_string());
            for c in p {
                out.push(' ');
                out.push_str(&c.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text form; weights are normalised on load.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut atoms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((dim, _)) = header else {
                let (mut dim, mut n) = (None, None);
                for field in line.split_whitespace() {
                    match field.split_once('=') {
                        Some(("dim", v)) => dim = v.parse().ok(),
                        Some(("atoms", v)) => n = v.parse().ok(),
                        _ => return Err(Error::parse(line_no, format!("bad header field `{field}`"))),
                    }
                }
                match (dim, n) {
                    (Some(d), Some(n)) if d > 0 => header = Some((d, n)),
                    _ => return Err(Error::parse(line_no, "header must be `dim=<d> atoms=<n>`")),
                }
                continue;
            };
            let nums: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
            let nums = nums.map_err(|e| Error::parse(line_no, e.to_string()))?;
            if nums.len() != dim + 1 {
                return Err(Error::parse(line_no, format!("expected {} fields, found {}", dim + 1, nums.len())));
            }
            atoms.push((nums[1..].to_vec(), nums[0]));
        }
        let (dim, n) = header.ok_or_else(|| Error::parse(0, "missing header"))?;
        if atoms.len() != n {
            return Err(Error::parse(0, format!("header announces {n} atoms, found {}", atoms.len())));
        }
        AtomicMeasure::normalized(dim, atoms)
    }
}

/// Exact compensated addition `a + b = s + e`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Fast ball-mass queries.
///
/// In one dimension the atoms are already sorted, so a ball is an index
/// range and its mass a difference of double-double prefix sums. In higher
/// dimensions atoms are bucketed on a uniform grid over their bounding box.
pub struct MassIndex<'a> {
    measure: &'a AtomicMeasure,
    kind: IndexKind,
}

enum IndexKind {
    Line { xs: Vec<f64>, prefix: Vec<(f64, f64)> },
    Grid(Grid),
}

struct Grid {
    lo: Vec<f64>,
    cell: f64,
    cells_per_axis: usize,
    /// Atom indices bucketed by cell, in increasing index order.
    buckets: Vec<Vec<usize>>,
}

impl<'a> MassIndex<'a> {
    pub fn new(measure: &'a AtomicMeasure) -> Self {
        let kind = if measure.dim == 1 {
            let xs: Vec<f64> = measure.points.iter().map(|p| p[0]).collect();
            let mut prefix = Vec::with_capacity(xs.len() + 1);
            let (mut hi, mut lo) = (0.0, 0.0);
            prefix.push((0.0, 0.0));
            for &w in &measure.weights {
                let (s, e) = two_sum(hi, w);
                let (s2, e2) = two_sum(s, lo + e);
                hi = s2;
                lo = e2;
                prefix.push((hi, lo));
            }
            IndexKind::Line { xs, prefix }
        } else {
            IndexKind::Grid(Grid::new(measure))
        };
        MassIndex { measure, kind }
    }

    pub fn measure(&self) -> &AtomicMeasure {
        self.measure
    }

    /// Mass of the open ball `B(x, r)`.
    pub fn ball_mass(&self, x: &[f64], r: f64) -> f64 {
        match &self.kind {
            IndexKind::Line { xs, prefix } => {
                let x0 = x[0];
                // |y - x| < r, with the difference rounded exactly as in `distance`
                let a = xs.partition_point(|&y| y - x0 <= -r);
                let b = xs.partition_point(|&y| y - x0 < r);
                if b <= a {
                    return 0.0;
                }
                let (h1, l1) = prefix[b];
                let (h0, l0) = prefix[a];
                (h1 - h0) + (l1 - l0)
            }
            IndexKind::Grid(grid) => grid.ball_mass(self.measure, x, r),
        }
    }
}

impl Grid {
    fn new(m: &AtomicMeasure) -> Self {
        let d = m.dim;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in &m.points {
            for i in 0..d {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        if m.points.is_empty() {
            lo = vec![0.0; d];
            hi = vec![1.0; d];
        }
        let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max).max(1e-300);
        let cells_per_axis = ((m.len() as f64).powf(1.0 / d as f64).ceil() as usize).clamp(1, 1 << 10);
        let cell = extent / cells_per_axis as f64 * (1.0 + 1e-12);
        let mut grid = Grid {
            lo,
            cell,
            cells_per_axis,
            buckets: Vec::new(),
        };
        grid.buckets = vec![Vec::new(); cells_per_axis.pow(d as u32)];
        for (i, p) in m.points.iter().enumerate() {
            let b = grid.bucket_of(p);
            grid.buckets[b].push(i);
        }
        grid
    }

    fn axis_cell(&self, v: f64, axis: usize) -> i64 {
        ((v - self.lo[axis]) / self.cell).floor() as i64
    }

    fn bucket_of(&self, p: &[f64]) -> usize {
        let n = self.cells_per_axis as i64;
        p.iter()
            .enumerate()
            .fold(0usize, |acc, (axis, &v)| acc * self.cells_per_axis + self.axis_cell(v, axis).clamp(0, n - 1) as usize)
    }

    fn ball_mass(&self, m: &AtomicMeasure, x: &[f64], r: f64) -> f64 {
        let d = x.len();
        let n = self.cells_per_axis as i64;
        let ranges: Vec<(i64, i64)> = (0..d)
            .map(|axis| {
                let a = self.axis_cell(x[axis] - r, axis).clamp(0, n - 1);
                let b = self.axis_cell(x[axis] + r, axis).clamp(0, n - 1);
                (a, b)
            })
            .collect();
        let cells: i64 = ranges.iter().map(|(a, b)| b - a + 1).product();
        if cells as usize >= self.buckets.len() {
            return m.ball_mass(x, r);
        }
        let mut hits: Vec<usize> = Vec::new();
        let mut coords: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        'cells: loop {
            let b = coords.iter().fold(0usize, |acc, &c| acc * self.cells_per_axis + c as usize);
            hits.extend(self.buckets[b].iter().copied().filter(|&i| distance(&m.points[i], x) < r));
            for axis in (0..d).rev() {
                if coords[axis] < ranges[axis].1 {
                    coords[axis] += 1;
                    continue 'cells;
                }
                coords[axis] = ranges[axis].0;
            }
            break;
        }
        hits.sort_unstable();
        hits.iter().map(|&i| m.weights[i]).sum()
    }
}

/// `(1 - t) ν + t μ₀`.
pub fn blend(nu: &AtomicMeasure, mu0: &AtomicMeasure, t: f64) -> Result<AtomicMeasure> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidBlendWeight(t));
    }
    if nu.dim != mu0.dim {
        return Err(Error::DimensionMismatch {
            expected: nu.dim,
            found: mu0.dim,
        });
    }
    nu.require_probability()?;
    mu0.require_probability()?;
    let atoms = nu
        .atoms()
        .map(|(p, w)| (p.to_vec(), (1.0 - t) * w))
        .chain(mu0.atoms().map(|(p, w)| (p.to_vec(), t * w)))
        .collect();
    AtomicMeasure::unnormalized(nu.dim, atoms)
}

/// `Σ_{k=1}^{K} 2^-k μ_k`, renormalised by `1 / (1 - 2^-K)`.
pub fn geometric_mixture(measures: &[AtomicMeasure]) -> Result<AtomicMeasure> {
    let first = measures.first().ok_or(Error::EmptyMixture)?;
    let k = measures.len() as i32;
    let norm = 1.0 / (1.0 - 0.5f64.powi(k));
    let mut atoms = Vec::new();
    for (i, m) in measures.iter().enumerate() {
        if m.dim != first.dim {
            return Err(Error::DimensionMismatch {
                expected: first.dim,
                found: m.dim,
            });
        }
        m.require_probability()?;
        let c = 0.5f64.powi(i as i32 + 1) * norm;
        atoms.extend(m.atoms().map(|(p, w)| (p.to_vec(), c * w)));
    }
    AtomicMeasure::unnormalized(first.dim, atoms)
}

/// The factor `2^-k / (1 - 2^-K)` with which component `k` (1-based) enters
/// [`geometric_mixture`].
pub fn mixture_coefficient(k: usize, count: usize) -> f64 {
    0.5f64.powi(k as i32) / (1.0 - 0.5f64.powi(count as i32))
}

/// One cover level of [`prop41_measure`].
#[derive(Clone, Debug, PartialEq)]
pub struct CoverLevel {
    pub n: usize,
    /// Cover depth `j0` used, so every cube has side at most `2^-j0`.
    pub delta_depth: u32,
    /// `σ_n = Σ_{B ∈ B_n} |B|^α <= 2^-(n+1)`.
    pub sigma: f64,
    /// Smallest cube side in the cover.
    pub rho: f64,
    /// `ω_n = c 2^(n/2)`.
    pub omega: f64,
    /// Cover cubes with their representative points.
    pub cubes: Vec<(DyadicCube, Vec<f64>)>,
}

/// Diagnostics of [`prop41_measure`].
#[derive(Clone, Debug, PartialEq)]
pub struct Prop41Diagnostics {
    pub alpha: f64,
    /// Normalising constant `c` in `ω_n = c 2^(n/2)`.
    pub c: f64,
    pub levels: Vec<CoverLevel>,
    /// Upper bound on `Σ_{n > n_max} ω_n σ_n`, the mass an untruncated
    /// series would still carry relative to the truncated normalisation.
    pub tail_bound: f64,
}

/// Lexicographically smallest cube center of `k` inside `cube`.
fn representative(k: &DigitalSet, cube: &DyadicCube) -> Option<Vec<f64>> {
    let range = k.range_within(cube);
    k.codes()[range]
        .iter()
        .map(|&c| deinterleave(c, k.depth(), k.dim()))
        .min()
        .map(|coords| DyadicCube::new(k.depth(), coords).expect("grid cube").center())
}

/// The cover measure `μ₀ = Σ_n ω_n Σ_{B ∈ B_n} |B|^α δ_{x_B}`, truncated at `n_max`.
///
/// `B_n` is an optimal dyadic cover of `E` by cubes of side at most `2^-n`;
/// it must satisfy `Σ |B|^α <= 2^-(n+1)`. Net measures only grow as the cover
/// depth increases, so cover depth `n` is the only candidate.
pub fn prop41_measure(k: &DigitalSet, e: &DigitalSet, alpha: f64, n_max: usize) -> Result<(AtomicMeasure, Prop41Diagnostics)> {
    if e.is_empty() {
        return Err(Error::EmptyTarget);
    }
    if !e.is_subset(k) {
        return Err(Error::TargetNotInK);
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if n_max as u64 > u64::from(e.depth()) {
        return Err(Error::InsufficientResolution(format!(
            "n_max = {n_max} exceeds the set depth {}",
            e.depth()
        )));
    }
    let mut levels = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let j0 = n as u32;
        let q = NetMeasureQuery::new(e, alpha, j0)?;
        let cert = optimal_cover(&q);
        let budget = 0.5f64.powi(n as i32 + 1);
        if cert.value > budget + crate::net_measure::TIE_TOLERANCE {
            return Err(Error::BudgetUnreachable {
                n,
                value: cert.value,
                budget,
            });
        }
        let rho = cert.min_side().expect("nonempty cover");
        let cubes = cert
            .cubes
            .into_iter()
            .map(|b| {
                let x = representative(k, &b).expect("cover cubes meet E inside K");
                (b, x)
            })
            .collect();
        levels.push(CoverLevel {
            n,
            delta_depth: j0,
            sigma: cert.value,
            rho,
            omega: 0.0,
            cubes,
        });
    }
    let weighted: f64 = levels.iter().map(|l| (l.n as f64 / 2.0).exp2() * l.sigma).sum();
    let c = 1.0 / weighted;
    let mut atoms = Vec::new();
    for level in &mut levels {
        level.omega = c * (level.n as f64 / 2.0).exp2();
        for (b, x) in &level.cubes {
            atoms.push((x.clone(), level.omega * b.side().powf(alpha)));
        }
    }
    // Σ_{n > N} c 2^(n/2) 2^-(n+1) = (c/2) 2^(-(N+1)/2) / (1 - 2^(-1/2))
    let tail_bound = 0.5 * c * (-(n_max as f64 + 1.0) / 2.0).exp2() / (1.0 - 0.5f64.sqrt());
    let mu0 = AtomicMeasure::normalized(k.dim(), atoms)?;
    Ok((
        mu0,
        Prop41Diagnostics {
            alpha,
            c,
            levels,
            tail_bound,
        },
    ))
}

/// `μ_ν = (1 - 1/N) ν + (1/N) μ₀` with `N` the support size of `ν`.
pub fn cover_blend(nu: &AtomicMeasure, mu0: &AtomicMeasure) -> Result<AtomicMeasure> {
    if nu.is_empty() {
        return Err(Error::InvalidMeasure("empty support".into()));
    }
    blend(nu, mu0, 1.0 / nu.len() as f64)
}

/// Minimum separation of the spray points around an atom: `8 N^(-1/s)`.
pub fn spray_gap(n: usize, s: f64) -> f64 {
    8.0 * (n as f64).powf(-1.0 / s)
}

/// Replaces atom `x_i` of `μ` by `N_i` equal atoms at grid points of `K`
/// within distance `ρ` of `x_i`, pairwise farther apart than `8 N_i^(-1/s)`.
///
/// `counts` holds one `N_i` per atom, or a single value used for all.
/// Candidates are accepted greedily in order of distance to `x_i`.
pub fn spray_measure(mu: &AtomicMeasure, k: &DigitalSet, s: f64, rho: f64, counts: &[usize]) -> Result<AtomicMeasure> {
    mu.require_probability()?;
    if mu.dim != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            found: mu.dim,
        });
    }
    if !(s > 0.0) {
        return Err(Error::InvalidSpray(format!("exponent s = {s} must be positive")));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidSpray(format!("radius rho = {rho} must be positive")));
    }
    let n_atoms = mu.len();
    let counts: Vec<usize> = match counts.len() {
        1 => vec![counts[0]; n_atoms],
        l if l == n_atoms => counts.to_vec(),
        l => return Err(Error::InvalidSpray(format!("{l} counts for {n_atoms} atoms"))),
    };
    if counts.contains(&0) {
        return Err(Error::InvalidSpray("counts must be positive".into()));
    }
    for i in 0..n_atoms {
        for j in i + 1..n_atoms {
            let dist = distance(&mu.points[i], &mu.points[j]);
            if rho >= dist / 4.0 {
                return Err(Error::InvalidSpray(format!(
                    "rho = {rho} not below a quarter of the atom separation {dist}"
                )));
            }
            let reach = 2.0 * rho + (spray_gap(counts[i], s) + spray_gap(counts[j], s)) / 2.0;
            if reach >= dist {
                return Err(Error::InvalidSpray(format!("spray balls around atoms {i} and {j} overlap")));
            }
        }
    }
    let centers: Vec<Vec<f64>> = k.centers().collect();
    let sprays: Vec<Result<Vec<Vec<f64>>>> = (0..n_atoms)
        .into_par_iter()
        .map(|i| {
            let x = &mu.points[i];
            let gap = spray_gap(counts[i], s);
            let mut candidates: Vec<(f64, usize)> = centers
                .iter()
                .enumerate()
                .map(|(c, p)| (distance(p, x), c))
                .filter(|(dist, _)| *dist < rho)
                .collect();
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let packed = greedy_pack(&centers, &candidates, gap, counts[i]);
            if packed.len() < counts[i] {
                return Err(Error::SprayPacking {
                    atom: i,
                    packed: packed.len(),
                    requested: counts[i],
                });
            }
            Ok(packed.into_iter().map(|c| centers[c].clone()).collect())
        })
        .collect();
    let mut atoms = Vec::new();
    for (i, spray) in sprays.into_iter().enumerate() {
        let w = mu.weights[i] / counts[i] as f64;
        atoms.extend(spray?.into_iter().map(|p| (p, w)));
    }
    AtomicMeasure::unnormalized(mu.dim, atoms)
}

/// Accepts candidates in order while they stay more than `gap` from every
/// accepted point; a hash grid of cell `gap` limits the comparisons.
fn greedy_pack(points: &[Vec<f64>], candidates: &[(f64, usize)], gap: f64, want: usize) -> Vec<usize> {
    use std::collections::HashMap;
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|v| (v / gap).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut accepted = Vec::new();
    for &(_, c) in candidates {
        if accepted.len() == want {
            break;
        }
        let p = &points[c];
        let base = key(p);
        let d = base.len();
        let mut clear = true;
        'scan: for offset in 0..3usize.pow(d as u32) {
            let mut cell = base.clone();
            let mut o = offset;
            for v in cell.iter_mut() {
                *v += (o % 3) as i64 - 1;
                o /= 3;
            }
            if let Some(list) = grid.get(&cell) {
                for &q in list {
                    if distance(&points[q], p) <= gap {
                        clear = false;
                        break 'scan;
                    }
                }
            }
        }
        if clear {
            grid.entry(base).or_default().push(c);
            accepted.push(c);
        }
    }
    accepted
}

/// Result of [`check_ulm`].
#[derive(Clone, Debug, PartialEq)]
pub struct UlmReport {
    /// Every grid point of `K` has a certified witness radius.
    pub certified: bool,
    /// Per cube center of `K`: the first grid radius with `μ(B(x,r)) < r^s`.
    pub witnesses: Vec<(Vec<f64>, Option<f64>)>,
    pub radii: Vec<f64>,
}

impl UlmReport {
    pub fn missing(&self) -> usize {
        self.witnesses.iter().filter(|w| w.1.is_none()).count()
    }
}

/// The geometric grid of `count` radii strictly inside `(1/m, 1/l)`.
pub fn ulm_radii(l: u64, m: u64, count: usize) -> Result<Vec<f64>> {
    if l == 0 || m <= l {
        return Err(Error::EmptyRadiusInterval { l, m });
    }
    if count == 0 {
        return Err(Error::InvalidArgument("radius grid must be nonempty".into()));
    }
    let lo = 1.0 / m as f64;
    let ratio = m as f64 / l as f64;
    Ok((1..=count)
        .map(|i| lo * ratio.powf(i as f64 / (count + 1) as f64))
        .collect())
}

/// Searches, for every cube center `x` of `K`, a radius `r ∈ (1/m, 1/l)` on a
/// geometric grid with `μ(B(x,r)) < r^s`. A `true` answer is certified; a
/// `false` one only means no witness lies on the grid.
pub fn check_ulm(mu: &AtomicMeasure, k: &DigitalSet, l: u64, m: u64, s: f64, r_grid: usize) -> Result<UlmReport> {
    let radii = ulm_radii(l, m, r_grid)?;
    if mu.dim != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            found: mu.dim,
        });
    }
    let index = mu.index();
    let centers: Vec<Vec<f64>> = k.centers().collect();
    let witnesses: Vec<(Vec<f64>, Option<f64>)> = centers
        .into_par_iter()
        .map(|x| {
            let w = radii.iter().copied().find(|&r| index.ball_mass(&x, r) < r.powf(s));
            (x, w)
        })
        .collect();
    let certified = witnesses.iter().all(|w| w.1.is_some());
    Ok(UlmReport {
        certified,
        witnesses,
        radii,
    })
}

/// Uniform measure on the `2^depth` cell midpoints of the unit interval.
pub fn lebesgue_proxy(depth: u32) -> Result<AtomicMeasure> {
    if depth > 28 {
        return Err(Error::DepthTooLargeForDim { depth, dim: 1 });
    }
    let n = 1u64 << depth;
    let h = side(depth);
    AtomicMeasure::uniform(1, (0..n).map(|i| vec![(i as f64 + 0.5) * h]).collect())
}

/// Binomial cascade with weights `(p, 1 - p)` on the two halves, discretised
/// at `depth` as atoms on the cylinder midpoints.
pub fn binomial_cascade(p: f64, depth: u32) -> Result<AtomicMeasure> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::NotProbabilityVector(format!("p = {p} outside [0, 1]")));
    }
    if depth > 28 {
        return Err(Error::DepthTooLargeForDim { depth, dim: 1 });
    }
    let mut weights = vec![1.0f64];
    for _ in 0..depth {
        weights = weights.iter().flat_map(|&w| [w * p, w * (1.0 - p)]).collect();
    }
    let h = side(depth);
    let atoms = weights
        .into_iter()
        .enumerate()
        .map(|(i, w)| (vec![(i as f64 + 0.5) * h], w))
        .collect();
    AtomicMeasure::normalized(1, atoms)
}

/// Cube side at the resolution of `k`, for callers picking spray radii.
pub fn grid_spacing(k: &DigitalSet) -> f64 {
    side(k.depth())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dyadic_cantor_set, rasterize_points, Point};
    use proptest::prelude::*;

    fn dirac(x: f64) -> AtomicMeasure {
        AtomicMeasure::dirac(vec![x]).unwrap()
    }

    #[test]
    fn ball_mass_examples() {
        assert_eq!(dirac(0.0).ball_mass(&[0.0], 1e-9), 1.0);
        assert_eq!(dirac(0.0).ball_mass(&[1.0], 0.5), 0.0);
        let u = AtomicMeasure::uniform(1, vec![vec![0.0], vec![0.25], vec![0.5], vec![0.75]]).unwrap();
        assert_eq!(u.ball_mass(&[0.0], 0.3), 0.5);
        assert_eq!(u.index().ball_mass(&[0.0], 0.3), 0.5);
        // open ball
        assert_eq!(u.ball_mass(&[0.0], 0.25), 0.25);
        assert_eq!(u.index().ball_mass(&[0.0], 0.25), 0.25);
    }

    #[test]
    fn canonical_form() {
        let m = AtomicMeasure::new(1, vec![(vec![0.5], 0.25), (vec![0.1], 0.5), (vec![0.5], 0.25), (vec![0.9], 0.0)]).unwrap();
        assert_eq!(m.points(), &[vec![0.1], vec![0.5]]);
        assert_eq!(m.weights(), &[0.5, 0.5]);
        assert!(matches!(
            AtomicMeasure::new(1, vec![(vec![0.5], 0.3)]),
            Err(Error::NotProbabilityMeasure(_))
        ));
    }

    #[test]
    fn text_roundtrip() {
        let m = AtomicMeasure::new(2, vec![(vec![0.1, 0.2], 0.3), (vec![0.7, 0.125], 0.7)]).unwrap();
        assert_eq!(AtomicMeasure::from_text(&m.to_text()).unwrap(), m);
        let loaded = AtomicMeasure::from_text("dim=1 atoms=2\n2 0.5\n6 0.25\n").unwrap();
        assert_eq!(loaded.weights(), &[0.75, 0.25]);
        assert!(AtomicMeasure::from_text("dim=1 atoms=3\n2 0.5\n").is_err());
    }

    #[test]
    fn blend_examples() {
        let (a, b) = (dirac(0.0), dirac(1.0));
        assert_eq!(blend(&a, &b, 0.0).unwrap(), a);
        assert_eq!(blend(&a, &b, 1.0).unwrap(), b);
        let m = blend(&a, &b, 0.25).unwrap();
        assert_eq!(m.weights(), &[0.75, 0.25]);
        assert_eq!(blend(&a, &b, 1.5), Err(Error::InvalidBlendWeight(1.5)));
    }

    #[test]
    fn mixture_examples() {
        let a = dirac(0.0);
        assert_eq!(geometric_mixture(std::slice::from_ref(&a)).unwrap(), a);
        let m = geometric_mixture(&[dirac(0.0), dirac(1.0)]).unwrap();
        assert!((m.weights()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.weights()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(geometric_mixture(&[]), Err(Error::EmptyMixture));
    }

    #[test]
    fn prop41_single_point() {
        let k = DigitalSet::full(1, 20).unwrap();
        let e = rasterize_points(&[Point::from(0.0)], 20).unwrap();
        let (mu0, diag) = prop41_measure(&k, &e, 0.5, 3).unwrap();
        assert!(mu0.is_probability());
        assert_eq!(diag.levels.len(), 3);
        for level in &diag.levels {
            assert_eq!(level.cubes.len(), 1);
            let (b, x) = &level.cubes[0];
            assert!(b.depth() >= 2 * (level.n as u32 + 1));
            assert!(level.sigma <= 0.5f64.powi(level.n as i32 + 1));
            assert_eq!(x[0], 0.5 * side(20));
            assert!(mu0.ball_mass(x, 2.0 * b.side()) >= level.omega * b.side().powf(0.5));
        }
        // one location, so the atoms merge
        assert_eq!(mu0.len(), 1);
        assert!(diag.levels.windows(2).all(|w| w[0].omega < w[1].omega));
    }

    #[test]
    fn prop41_errors() {
        let k = DigitalSet::full(1, 8).unwrap();
        assert_eq!(prop41_measure(&k, &DigitalSet::empty(1, 8).unwrap(), 0.5, 2).unwrap_err(), Error::EmptyTarget);
        let cantor = dyadic_cantor_set(16).unwrap();
        let full = DigitalSet::full(1, 16).unwrap();
        assert!(matches!(
            prop41_measure(&full, &cantor, 0.6, 1),
            Err(Error::BudgetUnreachable { n: 1, .. })
        ));
        let outside = rasterize_points(&[Point::from(0.3)], 16).unwrap();
        assert_eq!(prop41_measure(&cantor, &outside, 0.6, 1).unwrap_err(), Error::TargetNotInK);
    }

    #[test]
    fn prop41_on_deep_cantor_set() {
        let cantor = dyadic_cantor_set(32).unwrap();
        let (mu0, diag) = prop41_measure(&cantor, &cantor, 0.6, 2).unwrap();
        assert!(mu0.is_probability());
        let index = mu0.index();
        for level in &diag.levels {
            for (b, x) in &level.cubes {
                assert!(index.ball_mass(x, 2.0 * b.side()) >= level.omega * b.side().powf(0.6));
            }
        }
    }

    #[test]
    fn spray_example() {
        let k = DigitalSet::full(1, 16).unwrap();
        let mu = dirac(0.5);
        let nu = spray_measure(&mu, &k, 0.5, 0.1, &[10_000]).unwrap();
        assert_eq!(nu.len(), 10_000);
        assert!((nu.total_mass() - 1.0).abs() < 1e-10);
        assert!(nu.points().iter().all(|p| (p[0] - 0.5).abs() < 0.1));
        let gaps = nu.points().windows(2).map(|w| w[1][0] - w[0][0]).fold(f64::INFINITY, f64::min);
        assert!(gaps > spray_gap(10_000, 0.5));
    }

    #[test]
    fn spray_packing_failure() {
        let k = DigitalSet::full(1, 6).unwrap();
        let r = spray_measure(&dirac(0.5), &k, 0.5, 0.1, &[50]);
        assert!(matches!(r, Err(Error::SprayPacking { atom: 0, .. })));
        // K with a gap around the atom
        let far = rasterize_points(&[Point::from(0.05)], 10).unwrap();
        let r = spray_measure(&dirac(0.5), &far, 0.5, 0.1, &[4]);
        assert!(matches!(r, Err(Error::SprayPacking { packed: 0, .. })));
    }

    #[test]
    fn spray_rejects_wide_radius() {
        let k = DigitalSet::full(1, 10).unwrap();
        let mu = AtomicMeasure::uniform(1, vec![vec![0.2], vec![0.4]]).unwrap();
        assert!(matches!(spray_measure(&mu, &k, 0.5, 0.06, &[4]), Err(Error::InvalidSpray(_))));
    }

    #[test]
    fn ulm_examples() {
        let k = DigitalSet::full(1, 8).unwrap();
        let report = check_ulm(&dirac(0.5), &k, 1, 4, 0.5, 16).unwrap();
        let near = report.witnesses.iter().find(|(x, _)| (x[0] - 0.5).abs() < 0.01).unwrap();
        assert!(near.1.is_none());
        assert!(!report.certified);
        assert_eq!(check_ulm(&dirac(0.5), &k, 3, 3, 0.5, 4).unwrap_err(), Error::EmptyRadiusInterval { l: 3, m: 3 });
    }

    #[test]
    fn ulm_on_small_spray() {
        // 16 atoms need gap 8/256; witness radius 2/256 sits in (1/m, 1/l)
        let k = DigitalSet::full(1, 12).unwrap();
        let nu = spray_measure(&dirac(0.5), &k, 0.5, 0.4, &[16]).unwrap();
        let report = check_ulm(&nu, &k, 64, 256, 0.5, 8).unwrap();
        assert!(report.certified, "{} missing", report.missing());
    }

    #[test]
    fn ulm_agrees_with_direct_enumeration() {
        let k = DigitalSet::full(1, 6).unwrap();
        let mu = AtomicMeasure::uniform(1, (0..8).map(|i| vec![i as f64 / 8.0 + 1.0 / 16.0]).collect()).unwrap();
        let report = check_ulm(&mu, &k, 4, 64, 0.7, 12).unwrap();
        for (x, w) in &report.witnesses {
            let direct = report.radii.iter().copied().find(|&r| {
                let mass: f64 = mu.atoms().filter(|(p, _)| (p[0] - x[0]).abs() < r).map(|(_, w)| w).sum();
                mass < r.powf(0.7)
            });
            assert_eq!(*w, direct);
        }
    }

    fn measure(dim: usize) -> impl Strategy<Value = AtomicMeasure> {
        prop::collection::vec((prop::collection::vec(0.0f64..1.0, dim), 0.01f64..1.0), 1..40)
            .prop_map(move |atoms| AtomicMeasure::normalized(dim, atoms).unwrap())
    }

    proptest! {
        #[test]
        fn index_matches_direct_sum(m in measure(1), x in 0.0f64..1.0, r in 0.0f64..0.6) {
            let direct = m.ball_mass(&[x], r);
            prop_assert!((m.index().ball_mass(&[x], r) - direct).abs() < 1e-15);
        }

        #[test]
        fn grid_index_matches_direct_sum(m in measure(2), x in prop::collection::vec(0.0f64..1.0, 2), r in 0.0f64..0.6) {
            let direct = m.ball_mass(&x, r);
            prop_assert!((m.index().ball_mass(&x, r) - direct).abs() < 1e-15);
        }

        #[test]
        fn index_exact_on_atom_distances(m in measure(1)) {
            let idx = m.index();
            for p in m.points() {
                for q in m.points() {
                    let r = (p[0] - q[0]).abs();
                    prop_assert!((idx.ball_mass(p, r) - m.ball_mass(p, r)).abs() < 1e-14);
                }
            }
        }

        #[test]
        fn ball_mass_monotone(m in measure(2), x in prop::collection::vec(0.0f64..1.0, 2), r1 in 0.0f64..1.0, r2 in 0.0f64..1.0) {
            let (a, b) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            prop_assert!(m.ball_mass(&x, a) <= m.ball_mass(&x, b));
        }

        #[test]
        fn blend_is_linear_in_ball_mass(a in measure(1), b in measure(1), t in 0.0f64..=1.0, x in 0.0f64..1.0, r in 0.0f64..0.5) {
            let m = blend(&a, &b, t).unwrap();
            prop_assert!((m.total_mass() - 1.0).abs() < 1e-10);
            let expect = (1.0 - t) * a.ball_mass(&[x], r) + t * b.ball_mass(&[x], r);
            prop_assert!((m.ball_mass(&[x], r) - expect).abs() < 1e-12);
        }

        #[test]
        fn mixture_dominates_components(ms in prop::collection::vec(measure(1), 1..5), x in 0.0f64..1.0, r in 0.0f64..0.5) {
            let mix = geometric_mixture(&ms).unwrap();
            prop_assert!((mix.total_mass() - 1.0).abs() < 1e-10);
            for (k, m) in ms.iter().enumerate() {
                let bound = mixture_coefficient(k + 1, ms.len()) * m.ball_mass(&[x], r);
                prop_assert!(mix.ball_mass(&[x], r) >= bound - 1e-12);
            }
        }
    }
}
