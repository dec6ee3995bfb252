//! Local dimensions, coarse singularity spectra and `L^q` spectra of atomic
//! measures, estimated on dyadic radius windows.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{consecutive_slopes, least_squares_slope};
use crate::geometry::{upper_box_dim_estimate, DigitalSet};
use crate::measures::{AtomicMeasure, MassIndex};

/// A dyadic window `j_lo..=j_hi` of radii `2^-j` or depths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub lo: u32,
    pub hi: u32,
}

impl Window {
    pub fn new(lo: u32, hi: u32) -> Result<Self> {
        if lo >= hi {
            return Err(Error::WindowTooSmall { lo, hi });
        }
        Ok(Window { lo, hi })
    }

    fn radii(self) -> impl Iterator<Item = (f64, f64)> {
        (self.lo..=self.hi).map(|j| (-f64::from(j), (-f64::from(j)).exp2()))
    }
}

/// Status attached to a curve sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveFlag {
    Ok,
    /// No finite value exists: empty level set or no admissible term.
    Empty,
    /// Fewer than two usable radii.
    Undefined,
}

impl CurveFlag {
    fn as_str(self) -> &'static str {
        match self {
            CurveFlag::Ok => "ok",
            CurveFlag::Empty => "empty",
            CurveFlag::Undefined => "undefined",
        }
    }
}

/// Samples of an extended-real function on an increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub flags: Vec<CurveFlag>,
}

impl SpectrumCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let flags = vec![CurveFlag::Ok; values.len()];
        Self::with_flags(grid, values, flags)
    }

    pub fn with_flags(grid: Vec<f64>, values: Vec<f64>, flags: Vec<CurveFlag>) -> Result<Self> {
        check_grid(&grid)?;
        if values.len() != grid.len() || flags.len() != grid.len() {
            return Err(Error::InvalidArgument("curve values do not match the grid".into()));
        }
        Ok(SpectrumCurve { grid, values, flags })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.iter().copied().zip(self.values.iter().copied())
    }

    /// CSV with columns `grid,value,flag`; infinities print as `inf`/`-inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("grid,value,flag\n");
        for ((g, v), f) in self.grid.iter().zip(&self.values).zip(&self.flags) {
            writeln!(out, "{g},{v},{}", f.as_str()).expect("string write");
        }
        out
    }
}

impl SpectrumCurve {
    /// Parses [`SpectrumCurve::to_csv`] output; `#` lines are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let (mut grid, mut values, mut flags) = (Vec::new(), Vec::new(), Vec::new());
        let mut header_seen = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                if line != "grid,value,flag" {
                    return Err(Error::parse(idx + 1, "header must be `grid,value,flag`"));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [g, v, f] = fields[..] else {
                return Err(Error::parse(idx + 1, "expected three fields"));
            };
            let num = |t: &str| t.parse::<f64>().map_err(|e| Error::parse(idx + 1, format!("`{t}`: {e}")));
            grid.push(num(g)?);
            values.push(num(v)?);
            flags.push(match f {
                "ok" => CurveFlag::Ok,
                "empty" => CurveFlag::Empty,
                "undefined" => CurveFlag::Undefined,
                _ => return Err(Error::parse(idx + 1, format!("unknown flag `{f}`"))),
            });
        }
        if !header_seen {
            return Err(Error::parse(0, "missing CSV header"));
        }
        Self::with_flags(grid, values, flags)
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|g| !g.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Finite-scale proxies for the lower and upper local dimension at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalDimEstimate {
    /// Smallest two-point slope of `log μ(B(x,r))` against `log r`.
    pub lower: f64,
    /// Largest two-point slope; `+inf` once a radius carries no mass.
    pub upper: f64,
    /// Least-squares slope over the radii with positive mass.
    pub fit: Option<f64>,
    pub window: Window,
    /// Radii of the window whose ball carries no mass.
    pub zero_mass_radii: u32,
}

/// Local dimension proxies of `μ` at `x` over radii `2^-j`, `j ∈ window`.
///
/// Ball masses are monotone in `r`, so the zero-mass radii are the smallest
/// ones and the fit runs over a contiguous block of scales; `lower <= fit <= upper`.
pub fn local_dims(index: &MassIndex<'_>, x: &[f64], window: Window) -> LocalDimEstimate {
    let mut log_r = Vec::new();
    let mut log_m = Vec::new();
    let mut zero = 0;
    for (lr, r) in window.radii() {
        let m = index.ball_mass(x, r);
        if m > 0.0 {
            log_r.push(lr);
            log_m.push(m.log2());
        } else {
            zero += 1;
        }
    }
    let slopes = consecutive_slopes(&log_r, &log_m);
    let fit = least_squares_slope(&log_r, &log_m);
    let (lower, upper) = match fit {
        None => (f64::INFINITY, f64::INFINITY),
        Some(f) => {
            let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min).min(f);
            let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(f);
            (lo, if zero > 0 { f64::INFINITY } else { hi })
        }
    };
    LocalDimEstimate {
        lower,
        upper,
        fit,
        window,
        zero_mass_radii: zero,
    }
}

/// Which estimate a coarse level set tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelMode {
    /// `fit ∈ [α - ε, α + ε]`.
    Fit,
    /// `lower <= α`, a surrogate for the sublevel set `E_-(μ; α)`.
    Lower,
}

/// Parameters of the coarse level sets and spectra.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoarseOptions {
    pub eps: f64,
    /// Radius window of the local dimension estimates.
    pub radius_window: Window,
    /// Depth window of the box-dimension estimate of each level set.
    pub box_window: Window,
    pub mode: LevelMode,
}

/// Local dimension estimates at every cube center of `k`, in cube order.
pub fn local_dim_field(mu: &AtomicMeasure, k: &DigitalSet, window: Window) -> Result<Vec<LocalDimEstimate>> {
    if mu.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            found: mu.dim(),
        });
    }
    let index = mu.index();
    let centers: Vec<Vec<f64>> = k.centers().collect();
    Ok(centers.par_iter().map(|x| local_dims(&index, x, window)).collect())
}

/// Points whose ball mass vanishes at some radius of the window lie outside
/// the support at that scale and have infinite local dimension.
fn in_level(est: &LocalDimEstimate, alpha: f64, eps: f64, mode: LevelMode) -> bool {
    if est.zero_mass_radii > 0 {
        return false;
    }
    match mode {
        LevelMode::Fit => est.fit.is_some_and(|f| (f - alpha).abs() <= eps),
        LevelMode::Lower => est.lower <= alpha,
    }
}

fn level_from_field(k: &DigitalSet, field: &[LocalDimEstimate], alpha: f64, eps: f64, mode: LevelMode) -> DigitalSet {
    let codes = k
        .codes()
        .iter()
        .zip(field)
        .filter(|(_, est)| in_level(est, alpha, eps, mode))
        .map(|(&c, _)| c)
        .collect();
    DigitalSet::from_sorted_codes(k.dim(), k.depth(), codes)
}

/// Cubes of `k` whose center has local dimension estimate near `α`.
pub fn coarse_level_set(mu: &AtomicMeasure, k: &DigitalSet, alpha: f64, opts: &CoarseOptions) -> Result<DigitalSet> {
    check_eps(opts.eps)?;
    let field = local_dim_field(mu, k, opts.radius_window)?;
    Ok(level_from_field(k, &field, alpha, opts.eps, opts.mode))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must be positive")));
    }
    Ok(())
}

/// Box-dimension estimates of the coarse level sets along `alpha_grid`.
///
/// Values are clamped to `[0, d]`; empty level sets give `-inf`.
pub fn coarse_spectrum(mu: &AtomicMeasure, k: &DigitalSet, alpha_grid: &[f64], opts: &CoarseOptions) -> Result<SpectrumCurve> {
    check_grid(alpha_grid)?;
    check_eps(opts.eps)?;
    if opts.box_window.hi > k.depth() {
        return Err(Error::ResolutionExceeded {
            requested: opts.box_window.hi,
            available: k.depth(),
        });
    }
    let field = local_dim_field(mu, k, opts.radius_window)?;
    let mut values = Vec::with_capacity(alpha_grid.len());
    let mut flags = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        let level = level_from_field(k, &field, alpha, opts.eps, opts.mode);
        if level.is_empty() {
            values.push(f64::NEG_INFINITY);
            flags.push(CurveFlag::Empty);
        } else {
            let est = upper_box_dim_estimate(&level, opts.box_window.lo, opts.box_window.hi)?;
            values.push(est.slope.clamp(0.0, k.dim() as f64));
            flags.push(CurveFlag::Ok);
        }
    }
    SpectrumCurve::with_flags(alpha_grid.to_vec(), values, flags)
}

/// Estimates of the lower `L^q` spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct LqSpectrum {
    /// Least-squares slope of `log S_r(q)` against `log r`.
    pub fit: SpectrumCurve,
    /// Smallest two-point slope, the liminf proxy.
    pub lower: SpectrumCurve,
}

fn log_sum_exp2(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp2()).sum::<f64>().log2()
}

/// `S_r(q) = Σ_i w_i μ(B(x_i, r))^(q-1)` over the atoms, on radii `2^-j`.
///
/// Sums are formed in log space, so large negative powers of small masses
/// cannot overflow. Every atom lies in its own ball, so no mass vanishes.
pub fn lq_spectrum(mu: &AtomicMeasure, q_grid: &[f64], window: Window) -> Result<LqSpectrum> {
    check_grid(q_grid)?;
    if !mu.is_probability() {
        return Err(Error::NotProbabilityMeasure(mu.total_mass()));
    }
    let index = mu.index();
    let log_w: Vec<f64> = mu.weights().iter().map(|w| w.log2()).collect();
    let radii: Vec<(f64, f64)> = window.radii().collect();
    let log_masses: Vec<Vec<f64>> = radii
        .iter()
        .map(|&(_, r)| mu.points().par_iter().map(|x| index.ball_mass(x, r).log2()).collect())
        .collect();
    let log_r: Vec<f64> = radii.iter().map(|r| r.0).collect();
    let (mut fit, mut lower) = (Vec::new(), Vec::new());
    for &q in q_grid {
        if q == 1.0 {
            fit.push(0.0);
            lower.push(0.0);
            continue;
        }
        let log_s: Vec<f64> = log_masses
            .iter()
            .map(|lm| log_sum_exp2(log_w.iter().zip(lm).map(|(w, m)| w + (q - 1.0) * m)))
            .collect();
        fit.push(least_squares_slope(&log_r, &log_s).expect("window has two radii"));
        lower.push(consecutive_slopes(&log_r, &log_s).into_iter().fold(f64::INFINITY, f64::min));
    }
    Ok(LqSpectrum {
        fit: SpectrumCurve::new(q_grid.to_vec(), fit)?,
        lower: SpectrumCurve::new(q_grid.to_vec(), lower)?,
    })
}

/// `inf_q (q α - D(q))` over the curve samples; `-inf` samples of `D` are
/// skipped, and a curve with no finite term yields `+inf`.
pub fn legendre_transform(curve: &SpectrumCurve, alpha: f64) -> Result<f64> {
    if curve.is_empty() {
        return Err(Error::InvalidArgument("empty curve".into()));
    }
    let values: Vec<(f64, f64)> = curve
        .points()
        .filter(|(_, d)| *d != f64::NEG_INFINITY)
        .map(|(q, d)| (q, q * alpha - d))
        .collect();
    let min = values.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Ok(min);
    }
    // Near-ties are rounding noise of the sampled curve. They resolve to the
    // largest q, whose term is exact when the curve vanishes there.
    let slack = LEGENDRE_TIE_TOLERANCE * min.abs().max(1.0);
    Ok(values
        .into_iter()
        .filter(|(_, v)| *v <= min + slack)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map_or(min, |(_, v)| v))
}

/// Relative width of a tie in [`legendre_transform`].
pub const LEGENDRE_TIE_TOLERANCE: f64 = 1e-12;

/// The `L^q` spectrum of a typical measure on a set of upper box dimension `s`:
/// `0` for `q >= 1`, `-s (1 - q)` on `[0, 1)` and `-inf` for `q < 0`.
pub fn reference_typical_spectrum(s: f64, q: f64) -> f64 {
    if q >= 1.0 {
        0.0
    } else if q >= 0.0 {
        -s * (1.0 - q)
    } else {
        f64::NEG_INFINITY
    }
}

/// [`reference_typical_spectrum`] sampled on a grid.
pub fn reference_curve(s: f64, q_grid: &[f64]) -> Result<SpectrumCurve> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("s = {s} must be positive")));
    }
    let values: Vec<f64> = q_grid.iter().map(|&q| reference_typical_spectrum(s, q)).collect();
    let flags = values
        .iter()
        .map(|v| if v.is_finite() { CurveFlag::Ok } else { CurveFlag::Empty })
        .collect();
    SpectrumCurve::with_flags(q_grid.to_vec(), values, flags)
}

/// Largest amount by which an interior sample lies below the chord of its
/// neighbours; zero for concave samples.
pub fn concavity_defect(curve: &SpectrumCurve) -> f64 {
    let pts: Vec<(f64, f64)> = curve.points().filter(|(_, v)| v.is_finite()).collect();
    pts.windows(3)
        .map(|w| {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            let (x2, y2) = w[2];
            let chord = y0 + (y2 - y0) * (x1 - x0) / (x2 - x0);
            chord - y1
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{binomial_cascade, lebesgue_proxy};
    use proptest::prelude::*;

    fn w(lo: u32, hi: u32) -> Window {
        Window::new(lo, hi).unwrap()
    }

    #[test]
    fn lebesgue_local_dims() {
        let mu = lebesgue_proxy(16).unwrap();
        let est = local_dims(&mu.index(), &[0.5], w(2, 10));
        for v in [est.lower, est.upper, est.fit.unwrap()] {
            assert!((v - 1.0).abs() < 0.05, "{est:?}");
        }
    }

    #[test]
    fn binomial_local_dims() {
        let mu = binomial_cascade(0.25, 20).unwrap();
        let index = mu.index();
        let at_zero = local_dims(&index, &[0.0], w(4, 14));
        assert!((at_zero.fit.unwrap() - 2.0).abs() < 0.05, "{at_zero:?}");
        let alternating = local_dims(&index, &[1.0 / 3.0], w(4, 14));
        assert!((alternating.fit.unwrap() - 1.2075187).abs() < 0.05, "{alternating:?}");
        let ones = local_dims(&index, &[1.0], w(4, 14));
        assert!((ones.fit.unwrap() - (4.0f64 / 3.0).log2()).abs() < 0.05, "{ones:?}");
    }

    #[test]
    fn zero_mass_radii_are_flagged() {
        let mu = AtomicMeasure::dirac(vec![0.0]).unwrap();
        let est = local_dims(&mu.index(), &[0.9], w(0, 6));
        assert_eq!(est.zero_mass_radii, 6);
        assert_eq!(est.upper, f64::INFINITY);
        assert!(est.fit.is_none());
        let at_atom = local_dims(&mu.index(), &[0.0], w(0, 6));
        assert_eq!(at_atom.fit, Some(0.0));
    }

    #[test]
    fn level_sets_of_lebesgue() {
        let mu = lebesgue_proxy(12).unwrap();
        let k = DigitalSet::full(1, 12).unwrap();
        let opts = CoarseOptions {
            eps: 0.1,
            radius_window: w(2, 10),
            box_window: w(0, 12),
            mode: LevelMode::Fit,
        };
        let full = coarse_level_set(&mu, &k, 1.0, &opts).unwrap();
        assert!(full.len() as f64 >= 0.95 * k.len() as f64);
        let half = coarse_level_set(&mu, &k, 0.5, &opts).unwrap();
        assert!(half.len() as f64 <= 0.01 * k.len() as f64);
        let curve = coarse_spectrum(&mu, &k, &[0.5, 1.0, 1.5], &opts).unwrap();
        assert_eq!(curve.values[0], f64::NEG_INFINITY);
        assert!((curve.values[1] - 1.0).abs() < 0.05);
        assert_eq!(curve.values[2], f64::NEG_INFINITY);
    }

    #[test]
    fn binomial_spectrum_shape() {
        let mu = binomial_cascade(0.25, 14).unwrap();
        let k = DigitalSet::full(1, 14).unwrap();
        let opts = CoarseOptions {
            eps: 0.1,
            radius_window: w(2, 12),
            box_window: w(0, 10),
            mode: LevelMode::Fit,
        };
        // at the entropy dimension the spectrum touches the diagonal
        let entropy_dim = 0.8112781;
        let level = coarse_level_set(&mu, &k, entropy_dim, &opts).unwrap();
        let dim = upper_box_dim_estimate(&level, 0, 10).unwrap().slope;
        assert!((dim - entropy_dim).abs() < 0.1, "level dimension {dim}");
        let grid: Vec<f64> = (0..=24).map(|i| 0.1 * i as f64).collect();
        let curve = coarse_spectrum(&mu, &k, &grid, &opts).unwrap();
        let (argmax, max) = curve
            .points()
            .fold((0.0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
        // the maximum 1 sits at the most frequent exponent -(log2 p1 + log2 p2)/2
        assert!((argmax - 1.2075).abs() <= 0.15 && (max - 1.0).abs() < 0.1, "{curve:?}");
        for (a, v) in curve.points() {
            // level sets admit estimates within eps of the support
            if !(0.415 - 0.2..=2.0 + 0.2).contains(&a) {
                assert_eq!(v, f64::NEG_INFINITY, "alpha {a}");
            }
        }
    }

    #[test]
    fn dirac_spectrum() {
        let mu = AtomicMeasure::dirac(vec![0.5 + 1.0 / 512.0]).unwrap();
        let k = DigitalSet::full(1, 8).unwrap();
        let opts = CoarseOptions {
            eps: 0.1,
            radius_window: w(2, 8),
            box_window: w(0, 8),
            mode: LevelMode::Fit,
        };
        let curve = coarse_spectrum(&mu, &k, &[0.0, 0.5, 1.0], &opts).unwrap();
        assert!(curve.values[0].is_finite());
        assert_eq!(&curve.values[1..], &[f64::NEG_INFINITY; 2]);
    }

    #[test]
    fn lq_examples() {
        let dirac = AtomicMeasure::dirac(vec![0.3]).unwrap();
        let curve = lq_spectrum(&dirac, &[-1.0, 0.0, 1.0, 2.0], w(2, 10)).unwrap();
        assert!(curve.fit.values.iter().all(|&v| v.abs() < 1e-12));

        let leb = lebesgue_proxy(16).unwrap();
        let curve = lq_spectrum(&leb, &[0.0, 0.5, 1.0, 2.0], w(2, 10)).unwrap();
        for (q, v) in curve.fit.points() {
            assert!((v - (q - 1.0)).abs() < 0.1, "q = {q}: {v}");
        }
        assert_eq!(curve.fit.values[2], 0.0);

        let bin = binomial_cascade(0.25, 16).unwrap();
        let curve = lq_spectrum(&bin, &[2.0], w(4, 12)).unwrap();
        let expect = -(10.0f64 / 16.0).log2();
        assert!((curve.fit.values[0] - expect).abs() < 0.05, "{curve:?}");
    }

    #[test]
    fn lq_spectra_are_concave() {
        let grid: Vec<f64> = (0..=20).map(|i| -1.0 + 0.2 * i as f64).collect();
        for mu in [lebesgue_proxy(14).unwrap(), binomial_cascade(0.25, 14).unwrap()] {
            let curve = lq_spectrum(&mu, &grid, w(3, 11)).unwrap();
            assert!(concavity_defect(&curve.fit) <= 0.05, "{curve:?}");
        }
    }

    #[test]
    fn legendre_examples() {
        let grid: Vec<f64> = (-20..=40).map(|i| 0.1 * i as f64).collect();
        let reference = reference_curve(1.0, &grid).unwrap();
        assert_eq!(legendre_transform(&reference, 0.5).unwrap(), 0.5);
        assert_eq!(legendre_transform(&reference, 0.0).unwrap(), 0.0);
        let line = SpectrumCurve::new(grid.clone(), grid.iter().map(|q| q - 1.0).collect()).unwrap();
        assert!((legendre_transform(&line, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let void = SpectrumCurve::new(vec![0.0], vec![f64::NEG_INFINITY]).unwrap();
        assert_eq!(legendre_transform(&void, 0.3).unwrap(), f64::INFINITY);
    }

    #[test]
    fn reference_values() {
        assert_eq!(reference_typical_spectrum(1.0, 2.0), 0.0);
        assert_eq!(reference_typical_spectrum(1.0, 0.5), -0.5);
        assert_eq!(reference_typical_spectrum(1.0, -1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn csv_literals() {
        let c = SpectrumCurve::new(vec![0.0, 1.0], vec![f64::NEG_INFINITY, f64::INFINITY]).unwrap();
        assert_eq!(c.to_csv(), "grid,value,flag\n0,-inf,ok\n1,inf,ok\n");
        assert!(SpectrumCurve::new(vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn estimate_ordering(
            atoms in prop::collection::vec((0.0f64..1.0, 0.01f64..1.0), 1..60),
            x in 0.0f64..1.0,
            lo in 0u32..6,
            span in 1u32..10,
        ) {
            let mu = AtomicMeasure::normalized(1, atoms.into_iter().map(|(p, w)| (vec![p], w)).collect()).unwrap();
            let est = local_dims(&mu.index(), &[x], w(lo, lo + span));
            if let Some(f) = est.fit {
                prop_assert!(est.lower <= f && f <= est.upper);
            }
        }

        #[test]
        fn lq_is_zero_at_one(atoms in prop::collection::vec((0.0f64..1.0, 0.01f64..1.0), 1..30)) {
            let mu = AtomicMeasure::normalized(1, atoms.into_iter().map(|(p, w)| (vec![p], w)).collect()).unwrap();
            let c = lq_spectrum(&mu, &[1.0], w(1, 6)).unwrap();
            prop_assert_eq!(c.fit.values[0], 0.0);
            prop_assert_eq!(c.lower.values[0], 0.0);
        }

        #[test]
        fn legendre_of_reference_is_identity(s in 0.1f64..3.0, t in 0.0f64..=1.0) {
            let grid: Vec<f64> = (-10..=30).map(|i| 0.1 * i as f64).collect();
            let alpha = s * t;
            let v = legendre_transform(&reference_curve(s, &grid).unwrap(), alpha).unwrap();
            prop_assert_eq!(v, alpha);
        }
    }

    #[test]
    fn csv_roundtrip_keeps_infinities_and_flags() {
        let curve = SpectrumCurve::with_flags(
            vec![0.0, 0.5, 1.0],
            vec![f64::NEG_INFINITY, 0.25, f64::INFINITY],
            vec![CurveFlag::Empty, CurveFlag::Ok, CurveFlag::Undefined],
        )
        .unwrap();
        let text = format!("# produced elsewhere\n{}", curve.to_csv());
        assert_eq!(SpectrumCurve::from_csv(&text).unwrap(), curve);
        assert!(SpectrumCurve::from_csv("grid,value,flag\n0,1,maybe\n").is_err());
    }

}
