//! Nested families `E_α ⊆ K` with prescribed net-measure decay.
//!
//! Stage `k` refines stage `k-1` inside every depth-`(k-1)` cube `I`: either
//! the piece `E_α^(k-1) ∩ I` is kept, or it is cut down to the slab
//! `I_{|u}` (the part of `I` whose first coordinate stays below `a_1 + u`)
//! with the largest grid value `u` such that
//! `M^α_{2^-k}(E_α^k ∩ I) <= 2^(-α(k-1))`. Slab parameters live on the face
//! grid of depth `K.depth()`, measured in integer steps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{axis_coord, side, DigitalSet, DyadicCube};
use crate::net_measure::{net_measure_codes, solve_levels, Level, TIE_TOLERANCE};

/// The part of `cube` whose first coordinate lies below `a_1 + u`, where
/// `u = steps · 2^-resolution`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slab {
    pub cube: DyadicCube,
    pub steps: u64,
    pub resolution: u32,
}

impl Slab {
    /// Builds a slab from a real `u`, which must be a multiple of `2^-resolution`.
    pub fn new(cube: DyadicCube, u: f64, resolution: u32) -> Result<Self> {
        if resolution < cube.depth() || resolution > 62 {
            return Err(Error::UNotOnFaceGrid(format!(
                "resolution {resolution} incompatible with cube depth {}",
                cube.depth()
            )));
        }
        let scaled = u * (1u64 << resolution) as f64;
        let steps = scaled.round();
        let max_steps = 1u64 << (resolution - cube.depth());
        if scaled != steps || steps < 0.0 || steps as u64 > max_steps {
            return Err(Error::UNotOnFaceGrid(format!(
                "u = {u} is not a multiple of 2^-{resolution} in [0, {}]",
                cube.side()
            )));
        }
        Ok(Slab {
            cube,
            steps: steps as u64,
            resolution,
        })
    }

    /// The full cube.
    pub fn whole(cube: DyadicCube, resolution: u32) -> Self {
        let steps = 1u64 << (resolution - cube.depth());
        Slab {
            cube,
            steps,
            resolution,
        }
    }

    pub fn u(&self) -> f64 {
        self.steps as f64 * side(self.resolution)
    }

    pub fn is_whole(&self) -> bool {
        self.steps == 1u64 << (self.resolution - self.cube.depth())
    }

    /// Exclusive bound on first-axis leaf coordinates at depth `depth`.
    fn cut(&self, depth: u32) -> u64 {
        (self.cube.coords()[0] << (depth - self.cube.depth())) + (self.steps << (depth - self.resolution))
    }
}

/// `E ∩ I_{|u}`.
pub fn slab_restrict(e: &DigitalSet, slab: &Slab) -> Result<DigitalSet> {
    if slab.cube.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: slab.cube.dim(),
        });
    }
    if slab.resolution > e.depth() {
        return Err(Error::UNotOnFaceGrid(format!(
            "slab resolution {} finer than set depth {}",
            slab.resolution,
            e.depth()
        )));
    }
    let range = e.range_within(&slab.cube);
    let codes = cut_codes(&e.codes()[range], slab.cut(e.depth()), e.dim(), e.depth());
    Ok(DigitalSet::from_sorted_codes(e.dim(), e.depth(), codes))
}

fn cut_codes(codes: &[u64], cut: u64, dim: usize, depth: u32) -> Vec<u64> {
    codes
        .iter()
        .copied()
        .filter(|&c| axis_coord(c, 0, depth, dim) < cut)
        .collect()
}

/// Net-measure recursion of a fixed piece, re-evaluable under any slab cut.
///
/// Nodes entirely below the cut keep their precomputed values and nodes
/// entirely above contribute nothing, so a cut only re-evaluates the nodes it
/// straddles.
struct SlabTree {
    dim: usize,
    depth: u32,
    j0: u32,
    s: f64,
    levels: Vec<Level>,
}

impl SlabTree {
    fn new(codes: &[u64], dim: usize, depth: u32, s: f64, j0: u32) -> Self {
        let levels = if codes.is_empty() {
            Vec::new()
        } else {
            solve_levels(codes, dim, depth, s, j0)
        };
        SlabTree {
            dim,
            depth,
            j0,
            s,
            levels,
        }
    }

    fn value(&self) -> f64 {
        self.levels.first().map_or(0.0, |l| l.values.iter().sum())
    }

    fn value_below(&self, cut: u64) -> f64 {
        match self.levels.first() {
            Some(top) => (0..top.codes.len()).map(|i| self.eval(0, i, cut)).sum(),
            None => 0.0,
        }
    }

    fn eval(&self, li: usize, idx: usize, cut: u64) -> f64 {
        let level = &self.levels[li];
        let j = self.j0 + li as u32;
        let code = level.codes[idx];
        let c0 = axis_coord(code, 0, j, self.dim);
        let shift = self.depth - j;
        if (c0 + 1) << shift <= cut {
            return level.values[idx];
        }
        if c0 << shift >= cut {
            return 0.0;
        }
        let children = &self.levels[li + 1];
        let d = self.dim as u32;
        let lo = children.codes.partition_point(|&c| c < code << d);
        let hi = children.codes.partition_point(|&c| c < (code + 1) << d);
        let sum: f64 = (lo..hi).map(|ci| self.eval(li + 1, ci, cut)).sum();
        if sum == 0.0 {
            return 0.0;
        }
        let own = side(j).powf(self.s);
        if own <= sum + TIE_TOLERANCE {
            own
        } else {
            sum
        }
    }

    /// Largest `steps <= cap` whose cut keeps the value within `threshold`.
    fn largest_steps(&self, cube: &DyadicCube, cap: u64, threshold: f64) -> u64 {
        let base = cube.coords()[0] << (self.depth - cube.depth());
        let ok = |steps: u64| self.value_below(base + steps) <= threshold + TIE_TOLERANCE;
        if ok(cap) {
            return cap;
        }
        let (mut lo, mut hi) = (0u64, cap);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Result of [`largest_admissible_u`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleSlab {
    pub slab: Slab,
    /// Net measure of the restricted piece.
    pub value: f64,
    /// Set when even the smallest positive step exceeds the threshold.
    pub trimmed_to_face: bool,
}

/// The largest grid `u` with `M^α_{2^-cover_depth}(E ∩ I_{|u}) <= threshold`.
///
/// The face grid has the resolution of `e`.
pub fn largest_admissible_u(
    e: &DigitalSet,
    cube: &DyadicCube,
    alpha: f64,
    threshold: f64,
    cover_depth: u32,
) -> Result<AdmissibleSlab> {
    crate::net_measure::NetMeasureQuery::new(e, alpha, cover_depth)?;
    if cube.depth() > e.depth() {
        return Err(Error::ResolutionExceeded {
            requested: cube.depth(),
            available: e.depth(),
        });
    }
    let range = e.range_within(cube);
    let tree = SlabTree::new(&e.codes()[range], e.dim(), e.depth(), alpha, cover_depth);
    let full = tree.value();
    if full <= threshold + TIE_TOLERANCE {
        return Err(Error::NoTrimmingNeeded {
            value: full,
            threshold,
        });
    }
    let max_steps = 1u64 << (e.depth() - cube.depth());
    let steps = tree.largest_steps(cube, max_steps, threshold);
    let slab = Slab {
        cube: cube.clone(),
        steps,
        resolution: e.depth(),
    };
    let value = tree.value_below(slab.cut(e.depth()));
    Ok(AdmissibleSlab {
        slab,
        value,
        trimmed_to_face: steps == 0,
    })
}

/// Per-stage bookkeeping for one exponent.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StageRecord {
    /// Cubes `I` whose piece was kept whole.
    pub kept: usize,
    /// Cubes `I` whose piece was cut to a proper slab.
    pub trimmed: usize,
    /// Trimmed cubes whose slab collapsed to the face.
    pub to_face: usize,
}

/// The nested family: `stages[a][k]` is `E_{alphas[a]}^k`, with stage 0 = `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrescribedFamily {
    pub alphas: Vec<f64>,
    pub k_max: u32,
    pub stages: Vec<Vec<DigitalSet>>,
    pub records: Vec<Vec<StageRecord>>,
}

impl PrescribedFamily {
    /// The finest stage, standing in for `E_α`.
    pub fn limit(&self, a: usize) -> &DigitalSet {
        self.stages[a].last().expect("stage 0 always present")
    }
}

fn threshold(alpha: f64, k: u32) -> f64 {
    (-alpha * f64::from(k - 1)).exp2()
}

/// Builds the family for increasing `alphas` over stages `1..=k_max`.
///
/// Exponents are processed from the largest down; each slab is clamped to
/// the slab already chosen for the next larger exponent in the same cube,
/// which makes the family increasing in `α`.
pub fn build_prescribed_family(k: &DigitalSet, alphas: &[f64], k_max: u32) -> Result<PrescribedFamily> {
    let d = k.dim() as f64;
    if alphas.is_empty() {
        return Err(Error::InvalidAlphas("empty list".into()));
    }
    if let Some(a) = alphas.iter().find(|&&a| !(a > 0.0 && a <= d)) {
        return Err(Error::InvalidAlphas(format!("{a} outside (0, {d}]")));
    }
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidAlphas("exponents must be strictly increasing".into()));
    }
    if k_max == 0 || k_max + 1 > k.depth() {
        return Err(Error::InsufficientResolution(format!(
            "k_max = {k_max} needs 1 <= k_max <= depth - 1 = {}",
            k.depth().saturating_sub(1)
        )));
    }
    if k.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let (dim, depth) = (k.dim(), k.depth());
    let n = alphas.len();
    let mut stages: Vec<Vec<DigitalSet>> = vec![vec![k.clone()]; n];
    let mut records = vec![vec![StageRecord::default()]; n];
    for stage in 1..=k_max {
        let cube_depth = stage - 1;
        let full_steps = 1u64 << (depth - cube_depth);
        // (cube code, steps) of the next larger exponent, sorted by code
        let mut caps: Option<Vec<(u64, u64)>> = None;
        for a in (0..n).rev() {
            let alpha = alphas[a];
            let thr = threshold(alpha, stage);
            let prev = &stages[a][stage as usize - 1];
            let parents = prev.coarsen(cube_depth)?;
            let results: Vec<(u64, u64, Vec<u64>)> = parents
                .codes()
                .par_iter()
                .map(|&pc| {
                    let cube = DyadicCube::from_code(pc, cube_depth, dim);
                    let codes = &prev.codes()[prev.range_within(&cube)];
                    let cap = caps.as_ref().map_or(full_steps, |cs| {
                        let i = cs.binary_search_by_key(&pc, |&(c, _)| c).expect("nested family");
                        cs[i].1
                    });
                    let tree = SlabTree::new(codes, dim, depth, alpha, stage);
                    let steps = if cap == full_steps && tree.value() <= thr + TIE_TOLERANCE {
                        full_steps
                    } else {
                        tree.largest_steps(&cube, cap, thr)
                    };
                    let cut = Slab {
                        cube,
                        steps,
                        resolution: depth,
                    }
                    .cut(depth);
                    (pc, steps, cut_codes(codes, cut, dim, depth))
                })
                .collect();
            let mut record = StageRecord::default();
            let mut next = Vec::new();
            let mut chosen = Vec::with_capacity(results.len());
            for (pc, steps, codes) in results {
                if steps == full_steps {
                    record.kept += 1;
                } else {
                    record.trimmed += 1;
                    if steps == 0 {
                        record.to_face += 1;
                    }
                }
                next.extend(codes);
                chosen.push((pc, steps));
            }
            stages[a].push(DigitalSet::from_sorted_codes(dim, depth, next));
            records[a].push(record);
            caps = Some(chosen);
        }
    }
    Ok(PrescribedFamily {
        alphas: alphas.to_vec(),
        k_max,
        stages,
        records,
    })
}

/// The four family conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    /// Monotone in the exponent.
    A,
    /// Each piece is `K` cut by a slab.
    B,
    /// Decreasing in the stage.
    C,
    /// Net-measure bound `2^(-α(k-1))` per depth-`(k-1)` cube.
    D,
}

/// Outcome of one condition at one stage.
#[derive(Clone, Debug, PartialEq)]
pub struct StageCheck {
    pub condition: Condition,
    pub stage: u32,
    pub pass: bool,
    /// First offending exponent and cube, if any.
    pub violation: Option<(f64, DyadicCube)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyReport {
    pub checks: Vec<StageCheck>,
}

impl FamilyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn passes(&self, condition: Condition) -> bool {
        self.checks.iter().filter(|c| c.condition == condition).all(|c| c.pass)
    }

    pub fn first_violation(&self, condition: Condition) -> Option<&StageCheck> {
        self.checks.iter().find(|c| c.condition == condition && !c.pass)
    }

    /// `key=value` lines, one per condition and stage.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("{:?}.stage{}={}", c.condition, c.stage, if c.pass { "pass" } else { "fail" }));
            if let Some((alpha, cube)) = &c.violation {
                out.push_str(&format!(" alpha={alpha} cube_depth={} cube={:?}", cube.depth(), cube.coords()));
            }
            out.push('\n');
        }
        out.push_str(&format!("all={}\n", if self.all_pass() { "pass" } else { "fail" }));
        out
    }
}

fn first_missing(a: &DigitalSet, b: &DigitalSet) -> Option<DyadicCube> {
    a.cubes().find(|c| !b.contains_cube(c))
}

/// Replays conditions (A)–(D) on every stage.
pub fn verify_family(fam: &PrescribedFamily, k: &DigitalSet) -> FamilyReport {
    let mut checks = Vec::new();
    let n = fam.alphas.len();
    let stages = fam.stages.first().map_or(0, |s| s.len() as u32);
    let mut push = |condition, stage, violation: Option<(f64, DyadicCube)>| {
        checks.push(StageCheck {
            condition,
            stage,
            pass: violation.is_none(),
            violation,
        })
    };
    for stage in 0..stages {
        let st = stage as usize;
        let mut v = None;
        for a in 0..n.saturating_sub(1) {
            if fam.alphas[a] > fam.alphas[a + 1] {
                v = Some((fam.alphas[a], DyadicCube::unit(k.dim())));
                break;
            }
            if let Some(c) = first_missing(&fam.stages[a][st], &fam.stages[a + 1][st]) {
                v = Some((fam.alphas[a], c));
                break;
            }
        }
        push(Condition::A, stage, v);
    }
    for stage in 1..stages {
        let st = stage as usize;
        let (mut vb, mut vc, mut vd) = (None, None, None);
        for a in 0..n {
            let alpha = fam.alphas[a];
            let cur = &fam.stages[a][st];
            if vc.is_none() {
                vc = first_missing(cur, &fam.stages[a][st - 1]).map(|c| (alpha, c));
            }
            if cur.is_empty() || cur.depth() != k.depth() {
                if !cur.is_empty() && vb.is_none() {
                    vb = Some((alpha, DyadicCube::unit(k.dim())));
                }
                continue;
            }
            let Ok(parents) = cur.coarsen(stage - 1) else {
                continue;
            };
            let thr = threshold(alpha, stage);
            for cube in parents.cubes() {
                let codes = &cur.codes()[cur.range_within(&cube)];
                if vb.is_none() {
                    let end = codes
                        .iter()
                        .map(|&c| axis_coord(c, 0, k.depth(), k.dim()) + 1)
                        .max()
                        .expect("cube meets the stage");
                    let base = cube.coords()[0] << (k.depth() - cube.depth());
                    let slab = Slab {
                        cube: cube.clone(),
                        steps: end - base,
                        resolution: k.depth(),
                    };
                    let same = slab_restrict(k, &slab).map(|s| s.codes() == codes).unwrap_or(false);
                    if !same {
                        vb = Some((alpha, cube.clone()));
                    }
                }
                if vd.is_none() {
                    let value = net_measure_codes(codes, k.dim(), k.depth(), alpha, stage);
                    if value > thr + TIE_TOLERANCE {
                        vd = Some((alpha, cube.clone()));
                    }
                }
            }
        }
        push(Condition::B, stage, vb);
        push(Condition::C, stage, vc);
        push(Condition::D, stage, vd);
    }
    checks.sort_by_key(|a| (a.condition, a.stage));
    FamilyReport { checks }
}
