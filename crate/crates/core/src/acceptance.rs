//! The acceptance suite: one self-contained check per criterion.
//!
//! Each check builds its inputs from fixed seeds, runs the production code
//! against an independent oracle or closed form, and reports pass/fail with
//! the measured quantities. Tolerances are constants of this module.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{
    coarse_spectrum, legendre_transform, local_dims, lq_spectrum, reference_curve, CoarseOptions, LevelMode,
    SpectrumCurve, Window,
};
use crate::error::Result;
use crate::geometry::{dyadic_cantor_set, upper_box_dim_estimate, DigitalSet, DyadicCube};
use crate::ifs::{entropy_dim, f_of_lambda, f_of_lambda_checked, g_of_alpha, similarity_dimension, ProbVector};
use crate::measures::{
    binomial_cascade, check_ulm, geometric_mixture, lebesgue_proxy, prop41_measure, spray_measure, AtomicMeasure,
};
use crate::metric::{dirac_distance, fortet_mourier, fortet_mourier_lp};
use crate::net_measure::net_measure_of;
use crate::oracle::{brute_force_net_measure, dense_fortet_mourier};
use crate::prescribed::{build_prescribed_family, verify_family};

/// Outcome of one criterion.
#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CriterionReport {
    /// `[PASS] 3 prescribed family: ...`
    pub fn line(&self) -> String {
        format!(
            "[{}] {} {}: {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

fn timed(id: u8, title: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CriterionReport {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionReport {
        id,
        title,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

pub const NET_MEASURE_TOLERANCE: f64 = 1e-12;
pub const NET_MEASURE_BUDGET: Duration = Duration::from_secs(10);

fn random_set(rng: &mut ChaCha8Rng, dim: usize, depth: u32, leaves: usize) -> DigitalSet {
    let side = 1u64 << depth;
    let cubes: Vec<DyadicCube> = (0..leaves)
        .map(|_| DyadicCube::new(depth, (0..dim).map(|_| rng.random_range(0..side)).collect()).expect("in range"))
        .collect();
    DigitalSet::new(dim, depth, cubes).expect("valid cubes")
}

/// Dynamic program against exhaustive cover enumeration.
pub fn net_measure_exactness() -> CriterionReport {
    timed(1, "net-measure exactness", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cases: Vec<(DigitalSet, f64, u32)> = (0..200)
            .map(|_| {
                let dim = rng.random_range(1..=2);
                let depth = rng.random_range(1..=6);
                let leaves = rng.random_range(1..=5);
                let set = random_set(&mut rng, dim, depth, leaves);
                let s = rng.random_range(0.05..=dim as f64);
                let j0 = rng.random_range(0..=depth);
                (set, s, j0)
            })
            .collect();
        let start = Instant::now();
        let mut worst = 0.0f64;
        for (set, s, j0) in &cases {
            let dp = net_measure_of(set, *s, *j0)?;
            worst = worst.max((dp - brute_force_net_measure(set, *s, *j0)).abs());
        }
        let elapsed = start.elapsed();
        Ok((
            worst <= NET_MEASURE_TOLERANCE && elapsed < NET_MEASURE_BUDGET,
            format!("200 sets, max |DP - enumeration| = {worst:.1e}, {:.2}s", elapsed.as_secs_f64()),
        ))
    })
}

/// Relative slack for the exponent inequalities.
pub const EXPONENT_SLACK: f64 = 1e-12;

/// Both forms of the exponent comparison between net measures, on covers
/// with sides at most one.
pub fn exponent_comparison() -> CriterionReport {
    timed(2, "net-measure exponent comparison", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (mut printed, mut derived, mut derived_cases) = (0, 0, 0);
        for _ in 0..500 {
            let dim = rng.random_range(1..=2);
            let depth = rng.random_range(1..=if dim == 1 { 12 } else { 7 });
            let leaves = rng.random_range(1..=(1usize << (dim as u32 * depth)).min(300));
            let set = random_set(&mut rng, dim, depth, leaves);
            let a = rng.random_range(0.05..=dim as f64);
            let b = rng.random_range(0.05..=dim as f64);
            let (alpha, beta) = (a.min(b), a.max(b));
            let ma = net_measure_of(&set, alpha, 0)?;
            let mb = net_measure_of(&set, beta, 0)?;
            if ma < mb.powf(beta / alpha) * (1.0 - EXPONENT_SLACK) {
                printed += 1;
            }
            if mb <= 1.0 {
                derived_cases += 1;
                if ma < mb.powf(alpha / beta) * (1.0 - EXPONENT_SLACK) {
                    derived += 1;
                }
            }
        }
        Ok((
            printed == 0 && derived == 0,
            format!("500 sets: {printed} violations of M^a >= (M^b)^(b/a), {derived} of M^a >= (M^b)^(a/b) over {derived_cases} cases with M^b <= 1"),
        ))
    })
}

pub const FAMILY_DIM_TOLERANCE: f64 = 0.1;
pub const FAMILY_BUDGET: Duration = Duration::from_secs(30);

/// Prescribed family on the depth-10 interval.
pub fn prescribed_family() -> CriterionReport {
    timed(3, "prescribed family", || {
        let start = Instant::now();
        let k = DigitalSet::full(1, 10)?;
        let alphas = [0.3, 0.6, 0.9];
        let fam = build_prescribed_family(&k, &alphas, 6)?;
        let report = verify_family(&fam, &k);
        let mut dims = Vec::new();
        for (a, alpha) in alphas.iter().enumerate() {
            let est = upper_box_dim_estimate(fam.limit(a), 0, fam.k_max)?.slope;
            dims.push((alpha, est));
        }
        let elapsed = start.elapsed();
        let dims_ok = dims.iter().all(|(a, e)| (*a - e).abs() <= FAMILY_DIM_TOLERANCE);
        let shown: Vec<String> = dims.iter().map(|(a, e)| format!("{a}->{e:.3}")).collect();
        Ok((
            report.all_pass() && dims_ok && elapsed < FAMILY_BUDGET,
            format!(
                "conditions A-D {}, box dims {}, {:.2}s",
                if report.all_pass() { "hold" } else { "violated" },
                shown.join(" "),
                elapsed.as_secs_f64()
            ),
        ))
    })
}

pub const ENTROPY_TOLERANCE: f64 = 1e-9;
pub const F_ENDPOINT_TOLERANCE: f64 = 1e-6;
pub const G_TOLERANCE: f64 = 1e-4;
pub const GRID_TOLERANCE: f64 = 1e-4;

fn random_ratios(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(0.05..0.7)).collect()
}

/// Identities of the entropy map and its constrained maximum.
pub fn entropy_identities() -> CriterionReport {
    timed(4, "entropy identities", || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (mut lam_err, mut end_err) = (0.0f64, 0.0f64);
        for _ in 0..100 {
            let m = rng.random_range(2..=6);
            let ratios = random_ratios(&mut rng, m);
            let s = similarity_dimension(&ratios)?;
            let p = ProbVector::normalized(ratios.iter().map(|r| r.powf(s)).collect())?;
            lam_err = lam_err.max((entropy_dim(&p, &ratios)? - s).abs());
            end_err = end_err.max(f_of_lambda(0.0, &ratios, s)?.abs());
            end_err = end_err.max((f_of_lambda(1.0, &ratios, s)? - s).abs());
        }
        let mut g_err = 0.0f64;
        for _ in 0..50 {
            let m = rng.random_range(2..=5);
            let ratios = random_ratios(&mut rng, m);
            let s = similarity_dimension(&ratios)?;
            let alpha = s * rng.random_range(0.02..0.98);
            let lambda = g_of_alpha(alpha, &ratios, s)?;
            g_err = g_err.max((f_of_lambda(lambda, &ratios, s)? - alpha).abs());
        }
        let cases: Vec<(Vec<f64>, f64)> = (0..20)
            .map(|i| (random_ratios(&mut rng, 2 + i % 2), rng.random_range(0.0..=1.0)))
            .collect();
        let grid_err = cases
            .par_iter()
            .map(|(ratios, lambda)| {
                let s = similarity_dimension(ratios)?;
                Ok(f_of_lambda_checked(*lambda, ratios, s)?.discrepancy().unwrap_or(0.0))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok((
            lam_err <= ENTROPY_TOLERANCE && end_err <= F_ENDPOINT_TOLERANCE && g_err <= G_TOLERANCE && grid_err <= GRID_TOLERANCE,
            format!(
                "|Lambda(r^s)-s| {lam_err:.1e}, endpoints {end_err:.1e}, |f(g(a))-a| {g_err:.1e}, grid gap {grid_err:.1e}"
            ),
        ))
    })
}

pub const LOCAL_DIM_CEILING: f64 = 0.7;

/// Cover-measure witness on a dyadic Cantor set of the given depth.
pub fn cover_witness_on_cantor(depth: u32, alpha: f64, n_max: usize) -> Result<(bool, String)> {
    let cantor = dyadic_cantor_set(depth)?;
    let (mu0, diag) = prop41_measure(&cantor, &cantor, alpha, n_max)?;
    let index = mu0.index();
    let mut ball_failures = 0;
    let mut atoms = 0;
    for level in &diag.levels {
        for (b, x) in &level.cubes {
            atoms += 1;
            if index.ball_mass(x, 2.0 * b.side()) < level.omega * b.side().powf(alpha) {
                ball_failures += 1;
            }
        }
    }
    let window = Window::new(2, depth / 2)?;
    let step = (cantor.len() / 20).max(1);
    let lowers: Vec<f64> = cantor
        .centers()
        .step_by(step)
        .take(20)
        .map(|x| local_dims(&index, &x, window).lower)
        .collect();
    let worst = lowers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((
        ball_failures == 0 && worst <= LOCAL_DIM_CEILING,
        format!("{atoms} cover atoms, {ball_failures} ball-bound failures, max lower local dim {worst:.3} at 20 points"),
    ))
}

/// Cover-measure witness on the depth-16 dyadic Cantor set at `α = 0.6`.
pub fn cover_witness() -> CriterionReport {
    timed(5, "cover-measure witness", || {
        let main = cover_witness_on_cantor(16, 0.6, 4);
        let deep = match cover_witness_on_cantor(32, 0.6, 2) {
            Ok((pass, detail)) => format!("depth 32, n_max 2: {} ({detail})", if pass { "holds" } else { "fails" }),
            Err(e) => format!("depth 32, n_max 2: {e}"),
        };
        match main {
            Ok((pass, detail)) => Ok((pass, format!("depth 16: {detail}; {deep}"))),
            Err(e) => Ok((false, format!("depth 16: {e}; {deep}"))),
        }
    })
}

pub const SPRAY_TOLERANCE: f64 = 1e-9;

/// Spray of `δ_{1/2}` and the `U_{l,m}` membership certificate.
pub fn spray_membership() -> CriterionReport {
    timed(6, "spray and U_lm", || {
        let k = DigitalSet::full(1, 16)?;
        let mu = AtomicMeasure::dirac(vec![0.5])?;
        let (n, s, rho) = (10_000usize, 0.5, 0.1);
        let nu = spray_measure(&mu, &k, s, rho, &[n])?;
        // witness radius 2 N^(-1/s) = 2e-8 lies in (1/m, 1/l)
        let report = check_ulm(&nu, &k, 10_000_000, 100_000_000, s, 16)?;
        let dist = fortet_mourier(&mu, &nu)?;
        Ok((
            report.certified && dist <= rho + SPRAY_TOLERANCE,
            format!(
                "{} atoms, {} of {} grid points certified, L(mu, spray) = {dist:.4} <= {rho}",
                nu.len(),
                report.witnesses.len() - report.missing(),
                report.witnesses.len()
            ),
        ))
    })
}

pub const METRIC_TOLERANCE: f64 = 1e-9;

fn random_measure(rng: &mut ChaCha8Rng) -> AtomicMeasure {
    let dim = 2;
    let n = rng.random_range(1..=6);
    // a coarse lattice makes shared atoms common
    let atoms = (0..n)
        .map(|_| {
            let p = (0..dim).map(|_| f64::from(rng.random_range(0..12u32)) / 4.0).collect();
            (p, rng.random_range(0.05..1.0))
        })
        .collect();
    AtomicMeasure::normalized(dim, atoms).expect("positive weights")
}

/// Metric axioms and the two-Dirac closed form.
pub fn fortet_mourier_checks() -> CriterionReport {
    timed(7, "Fortet-Mourier metric", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let triples: Vec<[AtomicMeasure; 3]> = (0..1000)
            .map(|_| [random_measure(&mut rng), random_measure(&mut rng), random_measure(&mut rng)])
            .collect();
        let violations: usize = triples
            .par_iter()
            .map(|[a, b, c]| -> Result<usize> {
                let ab = fortet_mourier(a, b)?;
                let ba = fortet_mourier(b, a)?;
                let ac = fortet_mourier(a, c)?;
                let cb = fortet_mourier(c, b)?;
                let aa = fortet_mourier(a, a)?;
                let mut bad = 0;
                bad += usize::from(ab < 0.0 || ab != ba || aa != 0.0);
                bad += usize::from((ab == 0.0) != (a == b));
                bad += usize::from(ab > ac + cb + METRIC_TOLERANCE);
                Ok(bad)
            })
            .collect::<Result<Vec<usize>>>()?
            .into_iter()
            .sum();
        let mut dirac_err = 0.0f64;
        for _ in 0..200 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
            let (dx, dy) = (AtomicMeasure::dirac(x.clone())?, AtomicMeasure::dirac(y.clone())?);
            let closed = dirac_distance(&x, &y);
            dirac_err = dirac_err
                .max((fortet_mourier_lp(&dx, &dy)? - closed).abs())
                .max((dense_fortet_mourier(&dx, &dy)? - closed).abs());
        }
        Ok((
            violations == 0 && dirac_err <= METRIC_TOLERANCE,
            format!("1000 triples, {violations} axiom violations; 200 Dirac pairs, max |LP - min(2,d)| = {dirac_err:.1e}"),
        ))
    })
}

pub const LQ_TOLERANCE: f64 = 0.1;
pub const LOCAL_DIM_TOLERANCE: f64 = 0.05;

/// Legendre transform, `L^q` spectrum and local dimensions on reference measures.
pub fn spectrum_machinery() -> CriterionReport {
    timed(8, "spectrum machinery", || {
        let q_grid: Vec<f64> = (-300..=400).map(|i| f64::from(i) / 100.0).collect();
        let mut legendre_misses = 0;
        for s in [0.5, 1.0, 1.585] {
            let curve = reference_curve(s, &q_grid)?;
            for i in 0..=100 {
                let alpha = s * f64::from(i) / 100.0;
                if legendre_transform(&curve, alpha)? != alpha {
                    legendre_misses += 1;
                }
            }
        }
        let leb = lebesgue_proxy(16)?;
        let qs: Vec<f64> = (0..=20).map(|i| f64::from(i) / 10.0).collect();
        let lq = lq_spectrum(&leb, &qs, Window::new(2, 10)?)?;
        let lq_err = lq.fit.points().map(|(q, d)| (d - (q - 1.0)).abs()).fold(0.0, f64::max);
        let bin = binomial_cascade(0.25, 20)?;
        let index = bin.index();
        let window = Window::new(4, 14)?;
        let oracle = [
            ([0.0], 2.0),
            ([1.0 / 3.0], -0.5 * (3.0f64 / 16.0).log2()),
            ([1.0], (4.0f64 / 3.0).log2()),
        ];
        let mut dim_err = 0.0f64;
        for (x, expect) in oracle {
            let fit = local_dims(&index, &x, window).fit.unwrap_or(f64::INFINITY);
            dim_err = dim_err.max((fit - expect).abs());
        }
        Ok((
            legendre_misses == 0 && lq_err <= LQ_TOLERANCE && dim_err <= LOCAL_DIM_TOLERANCE,
            format!("Legendre misses {legendre_misses}/303, Lebesgue L^q error {lq_err:.3}, binomial local dim error {dim_err:.3}"),
        ))
    })
}

/// Parameters of the coarse-spectrum experiment on the depth-20 interval.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowParams {
    pub alphas: Vec<f64>,
    /// Cover exponent is `α + beta_offset`.
    pub beta_offset: f64,
    pub n_max: usize,
    /// Depth of the unit-interval family copied into each slot.
    pub family_depth: u32,
    pub k_max: u32,
    pub opts: CoarseOptions,
}

impl Default for ShadowParams {
    fn default() -> Self {
        ShadowParams {
            alphas: (2..=8).map(|i| f64::from(i) / 10.0).collect(),
            beta_offset: 0.2,
            n_max: 4,
            family_depth: 16,
            k_max: 14,
            opts: CoarseOptions {
                eps: 0.1,
                radius_window: Window { lo: 5, hi: 18 },
                box_window: Window { lo: 4, hi: 16 },
                mode: LevelMode::Fit,
            },
        }
    }
}

pub const SHADOW_DEPTH: u32 = 20;

/// Geometric mixture of cover measures for sets of prescribed dimension.
///
/// The set for the `i`-th exponent is a copy of the prescribed-family member
/// on `[0,1)` at `family_depth`, scaled into the dyadic slot `2i + 1` of depth
/// `SHADOW_DEPTH - family_depth`; empty slots keep the sets apart.
pub fn shadow_mixture(p: &ShadowParams) -> Result<AtomicMeasure> {
    let slot_depth = SHADOW_DEPTH - p.family_depth;
    if 2 * p.alphas.len() as u64 > 1 << slot_depth {
        return Err(crate::Error::InvalidArgument("too many exponents for the slots".into()));
    }
    let base = DigitalSet::full(1, p.family_depth)?;
    let fam = build_prescribed_family(&base, &p.alphas, p.k_max)?;
    let k = DigitalSet::full(1, SHADOW_DEPTH)?;
    let measures = p
        .alphas
        .par_iter()
        .enumerate()
        .map(|(i, alpha)| {
            let slot = 2 * i as u64 + 1;
            let cubes = fam
                .limit(i)
                .cubes()
                .map(|c| DyadicCube::new(SHADOW_DEPTH, vec![(slot << p.family_depth) | c.coords()[0]]))
                .collect::<Result<Vec<_>>>()?;
            let e = DigitalSet::new(1, SHADOW_DEPTH, cubes)?;
            Ok(prop41_measure(&k, &e, alpha + p.beta_offset, p.n_max)?.0)
        })
        .collect::<Result<Vec<_>>>()?;
    geometric_mixture(&measures)
}

/// The coarse spectrum of [`shadow_mixture`] on the exponent grid.
pub fn shadow_spectrum(p: &ShadowParams) -> Result<SpectrumCurve> {
    let mu = shadow_mixture(p)?;
    let k = DigitalSet::full(1, SHADOW_DEPTH)?;
    coarse_spectrum(&mu, &k, &p.alphas, &p.opts)
}

pub const SHADOW_TOLERANCE: f64 = 0.15;
pub const SHADOW_BUDGET: Duration = Duration::from_secs(300);

/// The coarse spectrum of the mixture follows the diagonal.
pub fn spectrum_diagonal() -> CriterionReport {
    timed(9, "coarse spectrum diagonal", || {
        let start = Instant::now();
        let curve = shadow_spectrum(&ShadowParams::default())?;
        let dev = curve.points().map(|(a, v)| (v - a).abs()).fold(0.0, f64::max);
        let elapsed = start.elapsed();
        let shown: Vec<String> = curve.points().map(|(a, v)| format!("{a}->{v:.2}")).collect();
        Ok((
            dev <= SHADOW_TOLERANCE && elapsed < SHADOW_BUDGET,
            format!("{} (max deviation {dev:.3}), {:.1}s", shown.join(" "), elapsed.as_secs_f64()),
        ))
    })
}

/// All criteria in order.
pub fn run_all() -> Vec<CriterionReport> {
    vec![
        net_measure_exactness(),
        exponent_comparison(),
        prescribed_family(),
        entropy_identities(),
        cover_witness(),
        spray_membership(),
        fortet_mourier_checks(),
        spectrum_machinery(),
        spectrum_diagonal(),
    ]
}

/// Runs the criteria with the given ids, in the given order.
pub fn run_selected(ids: &[u8]) -> Vec<CriterionReport> {
    ids.iter()
        .filter_map(|&id| match id {
            1 => Some(net_measure_exactness()),
            2 => Some(exponent_comparison()),
            3 => Some(prescribed_family()),
            4 => Some(entropy_identities()),
            5 => Some(cover_witness()),
            6 => Some(spray_membership()),
            7 => Some(fortet_mourier_checks()),
            8 => Some(spectrum_machinery()),
            9 => Some(spectrum_diagonal()),
            _ => None,
        })
        .collect()
}
