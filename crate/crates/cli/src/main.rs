//! `fwlds` experiment driver.
//!
//! Exit codes: 0 ok, 1 config or input error, 2 a runtime check or
//! reproduction verdict failed, 3 numeric failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fwlds::analysis::rates::gap_series_from_rows;
use fwlds::analysis::{
    check_h_decay, estimate_lds, estimate_uc_alpha, fit_exponent, lds_from_uc,
    validate_certificate, CertificateCheck, ExponentFit, HDecay, LdsEstimate, LdsSampler,
    UcSampler, WindowPolicy,
};
use fwlds::experiment::{
    scenario, sweep, ExperimentConfig, RunSummary, OUTPUT_ROOT_ENV, SCENARIOS,
};
use fwlds::geometry::{ConvexSet, FeasibleSet, SuperflatBody, UcParams};
use fwlds::objectives::MinimizerSet;
use fwlds::{trace, Error, Vector};

const EXIT_CONFIG: u8 = 1;
const EXIT_ASSERTION: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fwlds",
    version,
    about = "Frank-Wolfe experiments and local dual sharpness checks"
)]
struct Cli {
    /// Root directory for traces and summaries.
    #[arg(long, global = true, env = OUTPUT_ROOT_ENV, default_value = "fwlds-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config or a named scenario.
    Run {
        /// TOML experiment config.
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "config")]
        scenario: Option<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run several experiments in parallel.
    Sweep {
        configs: Vec<PathBuf>,
        #[arg(long = "scenario")]
        scenarios: Vec<String>,
        /// Every registered scenario.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Estimate local dual sharpness constants.
    LdsCheck(LdsArgs),
    /// Fit the tail exponent of a trace CSV.
    RateFit {
        trace: PathBuf,
        /// `h_t = (t + ell) F_t` offset.
        #[arg(long, default_value_t = 2)]
        ell: u32,
        #[arg(long, requires = "t_hi")]
        t_lo: Option<u64>,
        #[arg(long, requires = "t_lo")]
        t_hi: Option<u64>,
    },
    /// Re-run a named reproduction and check its verdicts.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
        #[arg(long)]
        t_max: Option<u64>,
    },
    /// List the registered scenarios.
    Scenarios,
}

#[derive(clap::Args, Clone, Default)]
struct Overrides {
    /// Step rules (`ss`, `ls`, `ol:<ell>`), replacing the configured ones.
    #[arg(long = "step")]
    steps: Vec<String>,
    #[arg(long)]
    t_max: Option<u64>,
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    #[arg(long)]
    gap_tol: Option<f64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> fwlds::Result<()> {
        if !self.steps.is_empty() {
            cfg.rules = self.steps.clone();
        }
        if let Some(t) = self.t_max {
            cfg.t_max = t;
        }
        if !self.seeds.is_empty() {
            cfg.seeds = self.seeds.clone();
        }
        if self.gap_tol.is_some() {
            cfg.gap_tol = self.gap_tol;
        }
        cfg.validate()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    #[value(name = "stadium-fig1")]
    StadiumFig1,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SetName {
    Stadium,
    Superflat,
    L2ball,
}

#[derive(clap::Args)]
struct LdsArgs {
    #[arg(long, value_enum)]
    set: SetName,
    /// Reference point: `cap-point`, `origin` or comma-separated coordinates.
    #[arg(long = "M", alias = "m")]
    m: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 0.3)]
    rho: f64,
    /// Evaluate at each radius of a comma-separated list (default 0.3,0.1,0.03).
    #[arg(long, num_args = 0..=1, default_missing_value = "0.3,0.1,0.03")]
    rho_sweep: Option<String>,
    /// Only sample points with `dist(x, M) >= shell * rho`.
    #[arg(long)]
    shell: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    n_x: usize,
    #[arg(long, default_value_t = 500)]
    n_g: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Estimate the uniform convexity modulus and validate `A = alpha / 2`.
    #[arg(long)]
    uc_bruteforce: bool,
    #[arg(long, default_value_t = 2000)]
    uc_samples: usize,
    /// Directions probed around each chord midpoint.
    #[arg(long, default_value_t = 90)]
    uc_directions: usize,
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Usage(String),
    Verdict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_CONFIG,
            Failure::Verdict(_) => EXIT_ASSERTION,
            Failure::Lib(e) => match e {
                Error::NonFinite(_)
                | Error::NegativePrimalGap(_)
                | Error::NegativeFwGap { .. }
                | Error::NumericBreakdown { .. }
                | Error::NonConvergence { .. }
                | Error::EmptyNeighborhood { .. }
                | Error::LinearProgram(_) => EXIT_NUMERIC,
                _ => EXIT_CONFIG,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Usage(m) | Failure::Verdict(m) => f.write_str(m),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            scenario,
            overrides,
        } => cmd_run(&cli.out, config, scenario, &overrides),
        Command::Sweep {
            configs,
            scenarios,
            all,
            overrides,
        } => cmd_sweep(&cli.out, &configs, &scenarios, all, &overrides),
        Command::LdsCheck(args) => cmd_lds_check(&args),
        Command::RateFit {
            trace,
            ell,
            t_lo,
            t_hi,
        } => cmd_rate_fit(&trace, ell, t_lo.zip(t_hi)),
        Command::Reproduce { target, t_max } => cmd_reproduce(&cli.out, target, t_max),
        Command::Scenarios => {
            SCENARIOS.iter().for_each(|s| println!("{s}"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fwlds: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn named(name: &str) -> Result<ExperimentConfig, Failure> {
    scenario(name).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown scenario `{name}` (known: {})",
            SCENARIOS.join(", ")
        ))
    })
}

#[derive(Serialize)]
struct RunReport<'a> {
    runs: &'a [RunSummary],
    clean: bool,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, format!("{text}\n"))?;
    println!("{text}");
    Ok(())
}

/// Writes the summary and turns runtime-check violations into a failure.
fn report(runs: &[RunSummary], path: &Path) -> Outcome {
    let clean = runs.iter().all(RunSummary::clean);
    write_json(path, &RunReport { runs, clean })?;
    if clean {
        Ok(())
    } else {
        let dirty: Vec<String> = runs
            .iter()
            .filter(|r| !r.clean())
            .map(|r| {
                format!(
                    "{} {} seed {}: {:?}",
                    r.scenario, r.rule, r.seed, r.violations
                )
            })
            .collect();
        Err(Failure::Verdict(format!(
            "runtime checks failed: {}",
            dirty.join("; ")
        )))
    }
}

fn cmd_run(
    out: &Path,
    config: Option<PathBuf>,
    name: Option<String>,
    overrides: &Overrides,
) -> Outcome {
    let mut cfg = match (config, name) {
        (Some(path), None) => ExperimentConfig::load(&path)?,
        (None, Some(name)) => named(&name)?,
        _ => return Err(Failure::Usage("give a config path or --scenario".into())),
    };
    overrides.apply(&mut cfg)?;
    let dir = out.join(&cfg.name);
    let runs = sweep(std::slice::from_ref(&cfg), Some(&dir))?;
    report(&runs, &dir.join("summary.json"))
}

fn cmd_sweep(
    out: &Path,
    paths: &[PathBuf],
    names: &[String],
    all: bool,
    overrides: &Overrides,
) -> Outcome {
    let mut configs = Vec::new();
    for p in paths {
        configs.push(ExperimentConfig::load(p)?);
    }
    let names: Vec<String> = if all {
        SCENARIOS.iter().map(|s| s.to_string()).collect()
    } else {
        names.to_vec()
    };
    for n in &names {
        configs.push(named(n)?);
    }
    if configs.is_empty() {
        return Err(Failure::Usage("nothing to sweep".into()));
    }
    for cfg in &mut configs {
        overrides.apply(cfg)?;
    }
    let runs = sweep(&configs, Some(out))?;
    report(&runs, &out.join("summary.json"))
}

fn parse_point(text: &str, dim: usize) -> Result<Vector, Failure> {
    let coords = text
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(format!("bad point `{text}`: {e}")))?;
    if coords.len() != dim {
        return Err(Failure::Usage(format!(
            "point `{text}` must have {dim} coordinates"
        )));
    }
    Ok(Vector::from_vec(coords))
}

fn reference_point(set: SetName, m: Option<&str>) -> Result<Vector, Failure> {
    let m = m.unwrap_or(match set {
        SetName::Stadium => "cap-point",
        SetName::Superflat => "origin",
        SetName::L2ball => "0,-1",
    });
    match (set, m) {
        (SetName::Stadium, "cap-point") => Ok(Vector::from_vec(vec![2.0, 0.0])),
        (SetName::L2ball, "cap-point") => Ok(Vector::from_vec(vec![0.0, -1.0])),
        (_, "origin") => Ok(Vector::zeros(2)),
        (SetName::Superflat, "cap-point") => {
            Err(Failure::Usage("the superflat body has no cap point".into()))
        }
        (_, text) => parse_point(text, 2),
    }
}

#[derive(Serialize)]
struct UcReport {
    alpha_hat: f64,
    samples: usize,
    check: CertificateCheck,
}

#[derive(Serialize)]
struct LdsReport {
    set: String,
    reference: Vec<f64>,
    q: f64,
    estimates: Vec<LdsEstimate>,
    /// `a_hat` at each radius over the one before it.
    ratios: Vec<f64>,
    uc: Option<UcReport>,
}

fn cmd_lds_check(args: &LdsArgs) -> Outcome {
    let set: Box<dyn ConvexSet> = match args.set {
        SetName::Stadium => Box::new(FeasibleSet::stadium(1.0)?),
        SetName::Superflat => Box::new(SuperflatBody::new(1.0)?),
        SetName::L2ball => Box::new(FeasibleSet::l2_ball(Vector::zeros(2), 1.0)?),
    };
    let m = reference_point(args.set, args.m.as_deref())?;
    if !set.contains(&m, 1e-9)? {
        return Err(Failure::Usage("reference point is not in the set".into()));
    }
    let reference = MinimizerSet::Point {
        point: m.as_slice().to_vec(),
    };
    let radii = match &args.rho_sweep {
        Some(list) => list
            .split(',')
            .map(|r| r.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::Usage(format!("bad radius list `{list}`: {e}")))?,
        None => vec![args.rho],
    };
    let mut sampler = LdsSampler::new(args.n_x, args.n_g, args.seed);
    if let Some(f) = args.shell {
        sampler = sampler.with_shell(f);
    }
    let estimates = radii
        .iter()
        .map(|&rho| estimate_lds(set.as_ref(), &reference, args.q, rho, &sampler))
        .collect::<fwlds::Result<Vec<_>>>()?;
    let ratios = estimates
        .windows(2)
        .map(|w| w[1].a_hat / w[0].a_hat)
        .collect();
    let uc = if args.uc_bruteforce {
        let uc_sampler = UcSampler {
            n: args.uc_samples,
            seed: args.seed,
        };
        let alpha_hat = estimate_uc_alpha(set.as_ref(), args.q, &uc_sampler, args.uc_directions)?;
        let mut cert = lds_from_uc(&UcParams::new(alpha_hat, args.q)?);
        cert.rho = radii[0];
        let check = validate_certificate(set.as_ref(), &reference, &cert, &sampler)?;
        Some(UcReport {
            alpha_hat,
            samples: args.uc_samples,
            check,
        })
    } else {
        None
    };
    let report = LdsReport {
        set: set.describe(),
        reference: m.as_slice().to_vec(),
        q: args.q,
        estimates,
        ratios,
        uc,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

#[derive(Serialize)]
struct FitReport {
    trace: PathBuf,
    records: usize,
    fit: Option<ExponentFit>,
    /// First iteration with a zero primal gap, if the run converged exactly.
    exact_convergence: Option<u64>,
    h_decay: Option<HDecay>,
    /// Fitted slope at most -1.05, or exact convergence.
    o_one_over_t: bool,
}

fn cmd_rate_fit(path: &Path, ell: u32, range: Option<(u64, u64)>) -> Outcome {
    let rows = trace::read_trace_file(path)?;
    let series = gap_series_from_rows(&rows);
    if series.is_empty() {
        return Err(Failure::Usage(format!(
            "{} has no primal gap column values",
            path.display()
        )));
    }
    let policy = match range {
        Some((t_lo, t_hi)) => WindowPolicy::Range { t_lo, t_hi },
        None => WindowPolicy::LastDecade,
    };
    let (fit, exact) = match fit_exponent(&series, policy) {
        Ok(fit) => (Some(fit), None),
        Err(Error::ExactConvergence { t }) => (None, Some(t)),
        Err(e) => return Err(e.into()),
    };
    let report = FitReport {
        trace: path.to_path_buf(),
        records: rows.len(),
        o_one_over_t: exact.is_some() || fit.is_some_and(|f| f.slope <= -1.05),
        fit,
        exact_convergence: exact,
        h_decay: check_h_decay(&series, ell).ok(),
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

#[derive(Serialize)]
struct Verdict {
    rule: String,
    slope: Option<f64>,
    h_ratio: Option<f64>,
    pass: bool,
}

fn cmd_reproduce(out: &Path, target: Target, t_max: Option<u64>) -> Outcome {
    let Target::StadiumFig1 = target;
    let mut cfg = named("stadium-fig1")?;
    if let Some(t) = t_max {
        cfg.t_max = t;
        cfg.validate()?;
    }
    let dir = out.join(&cfg.name);
    let runs = sweep(std::slice::from_ref(&cfg), Some(&dir))?;
    let verdicts: Vec<Verdict> = runs
        .iter()
        .map(|r| {
            let slope = r.fit.map(|f| f.slope);
            let h_ratio = r.h_decay.map(|h| h.ratio);
            Verdict {
                rule: r.rule.clone(),
                slope,
                h_ratio,
                pass: r.clean()
                    && slope.is_some_and(|s| s <= -1.05)
                    && h_ratio.is_some_and(|h| h <= 0.5),
            }
        })
        .collect();
    for v in &verdicts {
        eprintln!(
            "[{}] {}: slope {:?}, h ratio {:?}",
            if v.pass { "PASS" } else { "FAIL" },
            v.rule,
            v.slope,
            v.h_ratio
        );
    }
    #[derive(Serialize)]
    struct Reproduction<'a> {
        runs: &'a [RunSummary],
        verdicts: &'a [Verdict],
    }
    write_json(
        &dir.join("summary.json"),
        &Reproduction {
            runs: &runs,
            verdicts: &verdicts,
        },
    )?;
    if verdicts.iter().all(|v| v.pass) {
        Ok(())
    } else {
        Err(Failure::Verdict("stadium-fig1 verdicts failed".into()))
    }
}
