//! Execution of parsed commands. Nothing here prints; results are returned
//! as an [`Output`] and written by the caller.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fractal_core::acceptance;
use fractal_core::analysis::{
    coarse_level_set, coarse_spectrum, legendre_transform, local_dim_field, lq_spectrum, reference_curve,
    CoarseOptions, CurveFlag, LevelMode, SpectrumCurve, Window,
};
use fractal_core::geometry::{upper_box_dim_estimate, DigitalSet};
use fractal_core::ifs::{
    entropy_dim, f_of_lambda_checked, g_of_alpha, ifs_digital_set, similarity_dimension, IFSystem, ProbVector,
};
use fractal_core::measures::{blend, geometric_mixture, prop41_measure, spray_measure, AtomicMeasure};
use fractal_core::metric::{fortet_mourier, lemma_topo1_probe};
use fractal_core::net_measure::{optimal_cover, NetMeasureQuery};
use fractal_core::prescribed::{build_prescribed_family, verify_family};

use crate::args::{
    AcceptanceArgs, AnalyzeCommand, CoarseArgs, Command, ConstructCommand, DistCommand, FamilyArgs, IfsCommand, Mode,
    NetmeasureArgs, RatioSource,
};
use crate::error::{CliError, CliResult};

/// What a command produced.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
    /// The command ran but a check it performs did not hold.
    pub failed: Option<String>,
}

impl Output {
    fn text(stdout: String) -> Self {
        Output {
            stdout,
            ..Output::default()
        }
    }

    /// Body goes to `path` when given, else to stdout.
    fn routed(path: Option<&PathBuf>, body: String) -> Self {
        match path {
            Some(p) => Output {
                files: vec![(p.clone(), body)],
                ..Output::default()
            },
            None => Output::text(body),
        }
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_set(path: &Path) -> CliResult<DigitalSet> {
    DigitalSet::from_text(&read_text(path)?).map_err(|e| CliError::input(path, e))
}

fn load_measure(path: &Path) -> CliResult<AtomicMeasure> {
    AtomicMeasure::from_text(&read_text(path)?).map_err(|e| CliError::input(path, e))
}

fn load_system(path: &Path) -> CliResult<IFSystem> {
    IFSystem::from_text(&read_text(path)?).map_err(|e| CliError::input(path, e))
}

pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|e| CliError::Usage(format!("{what}: `{}`: {e}", t.trim())))
        })
        .collect()
}

/// `lo:hi:step` or a comma list. Grid points are rounded to 12 decimals so
/// that `0.1` steps print as written.
pub fn parse_grid(text: &str, what: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts[..] {
        [_] => parse_list(text, what),
        [lo, hi, step] => {
            let [lo, hi, step]: [f64; 3] = [lo, hi, step]
                .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("{what}: `{t}`: {e}"))))
                .into_iter()
                .collect::<CliResult<Vec<_>>>()?
                .try_into()
                .expect("three parts");
            if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(CliError::Usage(format!("{what}: need lo <= hi and step > 0")));
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=count)
                .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => Err(CliError::Usage(format!("{what}: expected `lo:hi:step` or a comma list"))),
    }
}

pub fn parse_window(text: &str, what: &str) -> CliResult<Window> {
    match parse_list::<u32>(text, what)?[..] {
        [lo, hi] => Ok(Window::new(lo, hi)?),
        _ => Err(CliError::Usage(format!("{what}: expected `lo,hi`"))),
    }
}

fn level_mode(mode: Mode) -> LevelMode {
    match mode {
        Mode::Fit => LevelMode::Fit,
        Mode::Lower => LevelMode::Lower,
    }
}

fn coarse_options(c: &CoarseArgs, box_window: Window) -> CliResult<CoarseOptions> {
    Ok(CoarseOptions {
        eps: c.eps,
        radius_window: parse_window(&c.radius_window, "radius-window")?,
        box_window,
        mode: level_mode(c.mode),
    })
}

fn ratios(source: &RatioSource) -> CliResult<Vec<f64>> {
    match (&source.ratios, &source.system) {
        (Some(r), _) => parse_list(r, "ratios"),
        (None, Some(path)) => Ok(load_system(path)?.ratios()),
        (None, None) => Err(CliError::Usage("one of --ratios or --system is required".into())),
    }
}

pub fn execute(command: &Command) -> CliResult<Output> {
    match command {
        Command::Netmeasure(a) => netmeasure(a),
        Command::Family(a) => family(a),
        Command::Ifs(c) => ifs(c),
        Command::Construct(c) => construct(c),
        Command::Analyze(c) => analyze(c),
        Command::Dist(c) => dist(c),
        Command::Acceptance(a) => run_acceptance(a),
        Command::Run(_) => Err(CliError::Usage("`run` cannot be nested".into())),
    }
}

fn netmeasure(a: &NetmeasureArgs) -> CliResult<Output> {
    let set = load_set(&a.set)?;
    let query = NetMeasureQuery::new(&set, a.s, a.delta_depth)?;
    let cover = optimal_cover(&query);
    let mut out = Output::text(format!("value={}\ncubes={}\n", cover.value, cover.cubes.len()));
    if let Some(path) = &a.cover {
        out.files.push((path.clone(), cover.to_text(set.dim(), set.depth())));
    }
    Ok(out)
}

fn family(a: &FamilyArgs) -> CliResult<Output> {
    let k = load_set(&a.set)?;
    let alphas: Vec<f64> = parse_list(&a.alphas, "alphas")?;
    let fam = build_prescribed_family(&k, &alphas, a.kmax)?;
    let report = verify_family(&fam, &k);
    let mut out = Output::default();
    let mut summary = String::new();
    for (i, alpha) in fam.alphas.iter().enumerate() {
        for (stage, set) in fam.stages[i].iter().enumerate() {
            let body = format!("# alpha={alpha} stage={stage}\n{}", set.to_text());
            out.files.push((a.out.join(format!("alpha{i}_stage{stage}.txt")), body));
        }
        let est = upper_box_dim_estimate(fam.limit(i), 0, fam.k_max)?;
        writeln!(summary, "alpha={alpha} cubes={} box_dim={}", fam.limit(i).len(), est.slope).expect("string write");
    }
    summary.push_str(&report.to_text());
    out.files.push((a.out.join("report.txt"), summary.clone()));
    out.stdout = summary;
    if !report.all_pass() {
        out.failed = Some("family verification failed".into());
    }
    Ok(out)
}

fn ifs(c: &IfsCommand) -> CliResult<Output> {
    let text = match c {
        IfsCommand::Dim(source) => format!("s={}\n", similarity_dimension(&ratios(source)?)?),
        IfsCommand::Lambda { source, p } => {
            let p = ProbVector::new(parse_list(p, "p")?)?;
            format!("lambda={}\n", entropy_dim(&p, &ratios(source)?)?)
        }
        IfsCommand::F { source, lambda } => {
            let r = ratios(source)?;
            let s = similarity_dimension(&r)?;
            let checked = f_of_lambda_checked(*lambda, &r, s)?;
            let mut t = format!("s={s}\nf={}\n", checked.dinkelbach);
            if let Some(grid) = checked.grid {
                writeln!(t, "grid={grid}").expect("string write");
            }
            t
        }
        IfsCommand::G { source, alpha } => {
            let r = ratios(source)?;
            let s = similarity_dimension(&r)?;
            format!("s={s}\ng={}\n", g_of_alpha(*alpha, &r, s)?)
        }
        IfsCommand::Raster { system, depth, out } => {
            let set = ifs_digital_set(&load_system(system)?, *depth)?;
            return Ok(Output::routed(out.as_ref(), set.to_text()));
        }
    };
    Ok(Output::text(text))
}

fn construct(c: &ConstructCommand) -> CliResult<Output> {
    match c {
        ConstructCommand::Prop41 { k, e, alpha, nmax, out } => {
            let (mu, diag) = prop41_measure(&load_set(k)?, &load_set(e)?, *alpha, *nmax)?;
            let mut summary = format!("alpha={} c={} tail_bound={}\n", diag.alpha, diag.c, diag.tail_bound);
            for level in &diag.levels {
                writeln!(
                    summary,
                    "n={} delta_depth={} sigma={} rho={} omega={} cubes={}",
                    level.n,
                    level.delta_depth,
                    level.sigma,
                    level.rho,
                    level.omega,
                    level.cubes.len()
                )
                .expect("string write");
            }
            Ok(with_summary(Output::routed(out.as_ref(), mu.to_text()), out.is_some(), summary))
        }
        ConstructCommand::Spray { mu, k, s, rho, counts, out } => {
            let counts: Vec<usize> = parse_list(counts, "counts")?;
            let nu = spray_measure(&load_measure(mu)?, &load_set(k)?, *s, *rho, &counts)?;
            Ok(Output::routed(out.as_ref(), nu.to_text()))
        }
        ConstructCommand::Mixture { measures, out } => {
            let parts = measures
                .split(',')
                .map(|p| load_measure(Path::new(p.trim())))
                .collect::<CliResult<Vec<_>>>()?;
            Ok(Output::routed(out.as_ref(), geometric_mixture(&parts)?.to_text()))
        }
        ConstructCommand::Blend { nu, mu0, t, out } => {
            let mixed = blend(&load_measure(nu)?, &load_measure(mu0)?, *t)?;
            Ok(Output::routed(out.as_ref(), mixed.to_text()))
        }
    }
}

/// Prints `summary` only when the main body went to a file.
fn with_summary(mut out: Output, to_file: bool, summary: String) -> Output {
    if to_file {
        out.stdout = summary;
    }
    out
}

fn csv_number(v: f64) -> String {
    v.to_string()
}

fn analyze(c: &AnalyzeCommand) -> CliResult<Output> {
    match c {
        AnalyzeCommand::Localdim { mu, k, window, out } => {
            let k = load_set(k)?;
            let mu = load_measure(mu)?;
            let field = local_dim_field(&mu, &k, parse_window(window, "window")?)?;
            let mut csv: Vec<String> = (1..=k.dim()).map(|i| format!("x{i}")).collect();
            csv.extend(["lower", "upper", "fit", "zero_mass_radii"].map(String::from));
            let mut body = csv.join(",") + "\n";
            for (x, est) in k.centers().zip(&field) {
                let mut row: Vec<String> = x.iter().copied().map(csv_number).collect();
                row.push(csv_number(est.lower));
                row.push(csv_number(est.upper));
                row.push(est.fit.map_or_else(|| "nan".to_string(), csv_number));
                row.push(est.zero_mass_radii.to_string());
                body.push_str(&row.join(","));
                body.push('\n');
            }
            Ok(Output::routed(out.as_ref(), body))
        }
        AnalyzeCommand::Levelset { coarse, alpha, out } => {
            let k = load_set(&coarse.k)?;
            let mu = load_measure(&coarse.mu)?;
            // the box window plays no part in a single level set
            let opts = coarse_options(coarse, Window { lo: 0, hi: k.depth() })?;
            let set = coarse_level_set(&mu, &k, *alpha, &opts)?;
            Ok(with_summary(
                Output::routed(out.as_ref(), set.to_text()),
                out.is_some(),
                format!("cubes={}\n", set.len()),
            ))
        }
        AnalyzeCommand::Spectrum {
            coarse,
            alphas,
            box_window,
            out,
        } => {
            let k = load_set(&coarse.k)?;
            let mu = load_measure(&coarse.mu)?;
            let opts = coarse_options(coarse, parse_window(box_window, "box-window")?)?;
            let curve = coarse_spectrum(&mu, &k, &parse_grid(alphas, "alphas")?, &opts)?;
            Ok(Output::routed(out.as_ref(), curve.to_csv()))
        }
        AnalyzeCommand::Lq {
            mu,
            q,
            window,
            estimator,
            out,
        } => {
            let spectrum = lq_spectrum(&load_measure(mu)?, &parse_grid(q, "q")?, parse_window(window, "window")?)?;
            let curve = match estimator {
                Mode::Fit => spectrum.fit,
                Mode::Lower => spectrum.lower,
            };
            Ok(Output::routed(out.as_ref(), curve.to_csv()))
        }
        AnalyzeCommand::Legendre { curve, alphas, out } => {
            let curve = SpectrumCurve::from_csv(&read_text(curve)?).map_err(|e| CliError::input(curve, e))?;
            let grid = parse_grid(alphas, "alphas")?;
            let values = grid
                .iter()
                .map(|&a| legendre_transform(&curve, a))
                .collect::<Result<Vec<f64>, _>>()?;
            let flags = values
                .iter()
                .map(|v| if v.is_finite() { CurveFlag::Ok } else { CurveFlag::Empty })
                .collect();
            let transformed = SpectrumCurve::with_flags(grid, values, flags)?;
            Ok(Output::routed(out.as_ref(), transformed.to_csv()))
        }
        AnalyzeCommand::Reference { s, q, out } => {
            let curve = reference_curve(*s, &parse_grid(q, "q")?)?;
            Ok(Output::routed(out.as_ref(), curve.to_csv()))
        }
    }
}

fn dist(c: &DistCommand) -> CliResult<Output> {
    match c {
        DistCommand::Fm { mu, nu } => {
            let d = fortet_mourier(&load_measure(mu)?, &load_measure(nu)?)?;
            Ok(Output::text(format!("distance={d}\n")))
        }
        DistCommand::Probe { mu, nu, set, gamma } => {
            let r = lemma_topo1_probe(&load_measure(mu)?, &load_measure(nu)?, &load_set(set)?, *gamma)?;
            Ok(Output::text(format!("excess={}\ndistance={}\n", r.excess, r.distance)))
        }
    }
}

fn run_acceptance(a: &AcceptanceArgs) -> CliResult<Output> {
    let reports = match &a.only {
        Some(list) => {
            let ids: Vec<u8> = parse_list(list, "only")?;
            if let Some(bad) = ids.iter().find(|&&i| !(1..=9).contains(&i)) {
                return Err(CliError::Usage(format!("only: no criterion {bad}")));
            }
            acceptance::run_selected(&ids)
        }
        None => acceptance::run_all(),
    };
    let mut body = String::new();
    for r in &reports {
        body.push_str(&r.line());
        body.push('\n');
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    writeln!(body, "{passed}/{} criteria pass", reports.len()).expect("string write");
    let mut out = Output::text(body.clone());
    if let Some(path) = &a.out {
        out.files.push((path.clone(), body));
    }
    if passed < reports.len() {
        out.failed = Some(format!("{} criteria failed", reports.len() - passed));
    }
    Ok(out)
}
