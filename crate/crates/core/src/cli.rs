//! Command-line front end: `solve`, `sweep`, `table`, `gen`.
//!
//! Exit codes: 0 success, 1 usage error, 2 solver failure, 3 I/O or input error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::active_sets::EstimationThresholds;
use crate::error::Error;
use crate::harness::{
    fit_slope, generate, iteration_table, mean_std, mu_ladder, run_seeds, sweep_csv, sweep_seeds, sweep_svg, table_csv,
    BoundStyle, ErrorField, GeneratorSpec,
};
use crate::ipm::{solve, Algorithm, Outcome, PartialStepRule, SolverConfig};
use crate::problem::QuadraticProblem;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "boxipm", version, about = "Interior-point methods with approximate Newton directions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem file and print the convergence table.
    Solve(SolveArgs),
    /// Approximation-error sweep over seeded random problems; writes CSV and SVG.
    Sweep(SweepArgs),
    /// Per-decade iteration counts of several algorithms; writes CSV.
    Table(TableArgs),
    /// Generate a certified random problem file.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 100.0)]
    mu0: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Termination tolerance on the KKT residual.
    #[arg(long, default_value = "1e-10")]
    epsilon: f64,
    /// Fraction-to-boundary factor.
    #[arg(long, default_value_t = 0.98)]
    fraction: f64,
    #[arg(long, default_value_t = 50)]
    max_iters_per_mu: usize,
    #[arg(long, default_value = "1e-12")]
    mu_min: f64,
    /// Active threshold exponent (tau_A = mu^e); default depends on the algorithm.
    #[arg(long)]
    tau_a: Option<f64>,
    /// Inactive-multiplier threshold exponent (tau_I = mu^e); default depends on the algorithm.
    #[arg(long)]
    tau_i: Option<f64>,
    /// Newton fallback after the per-mu cap: on or off (default: on except for newton).
    #[arg(long, value_parser = parse_on_off)]
    fallback: Option<bool>,
    /// Intermediate-step rule: schur, schur-lambda or comp-lambda.
    #[arg(long, default_value = "schur-lambda")]
    step_rule: String,
}

#[derive(Debug, Clone, Args)]
struct GeneratorArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    frac_inactive: f64,
    #[arg(long, default_value_t = 0.4)]
    density: f64,
    /// lower, two-sided or mixed.
    #[arg(long, default_value = "mixed")]
    bound_style: String,
    #[arg(long, default_value_t = 1.0)]
    magnitude: f64,
    #[arg(long, default_value_t = 1.0)]
    diag_shift: f64,
}

#[derive(Debug, Clone, Args)]
struct SeedArgs {
    /// Number of seeded problems.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 1)]
    seed_start: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// newton, aNS, aNC, intermediate or higher.
    #[arg(long = "alg", default_value = "newton", action = clap::ArgAction::Append)]
    alg: Vec<String>,
    file: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    seeds: SeedArgs,
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Barrier values as A:B, expanded to the sigma ladder from A down to B.
    #[arg(long, default_value = "1e-2:1e-8")]
    mus: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[command(flatten)]
    seeds: SeedArgs,
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Comma-separated algorithms.
    #[arg(long, default_value = "newton,aNS,aNC,intermediate,higher")]
    algs: String,
    /// Decade checkpoints as A:B.
    #[arg(long, default_value = "1e-1:1e-10")]
    mus: String,
    /// Extra problem files to include.
    #[arg(long = "problem")]
    problems: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Overrides as key=value pairs, comma-separated (keys as the long flags, e.g. n=20,seed=3).
    #[arg(long)]
    spec: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_on_off(s: &str) -> Result<bool, String> {
    match s {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        _ => Err(format!("expected on or off, got '{s}'")),
    }
}

/// A failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(m: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: m.into() }
    }

    fn io(m: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: m.into() }
    }

    fn solver(m: impl Into<String>) -> Self {
        Self { code: EXIT_SOLVER, message: m.into() }
    }
}

fn from_lib(e: Error) -> Failure {
    match e {
        Error::InvalidArgument(_) | Error::Validation(_) => Failure::usage(e.to_string()),
        Error::Parse(_) => Failure::io(e.to_string()),
        _ => Failure::solver(e.to_string()),
    }
}

type CliResult<T> = Result<T, Failure>;

impl SolverArgs {
    fn config(&self) -> CliResult<SolverConfig> {
        let thresholds = match (self.tau_a, self.tau_i) {
            (None, None) => None,
            (a, i) => Some(EstimationThresholds::new(a.unwrap_or(0.5), i.unwrap_or(0.75)).map_err(from_lib)?),
        };
        let cfg = SolverConfig {
            mu0: self.mu0,
            sigma: self.sigma,
            epsilon: self.epsilon,
            boundary_fraction: self.fraction,
            max_iters_per_mu: self.max_iters_per_mu,
            mu_min: self.mu_min,
            thresholds,
            newton_fallback: self.fallback,
        };
        cfg.validate().map_err(from_lib)?;
        Ok(cfg)
    }

    fn rule(&self) -> CliResult<PartialStepRule> {
        self.step_rule.parse().map_err(from_lib)
    }
}

impl GeneratorArgs {
    fn spec(&self, seed: u64) -> CliResult<GeneratorSpec> {
        let spec = GeneratorSpec {
            n: self.n,
            frac_inactive: self.frac_inactive,
            density: self.density,
            bound_style: self.bound_style.parse::<BoundStyle>().map_err(from_lib)?,
            magnitude: self.magnitude,
            diag_shift: self.diag_shift,
            seed,
        };
        spec.validate().map_err(from_lib)?;
        Ok(spec)
    }
}

impl SeedArgs {
    fn list(&self) -> CliResult<Vec<u64>> {
        if self.seeds == 0 {
            return Err(Failure::usage("--seeds must be at least 1"));
        }
        Ok((self.seed_start..self.seed_start + self.seeds).collect())
    }
}

fn parse_range(s: &str, sigma: f64) -> CliResult<Vec<f64>> {
    let (a, b) = s.split_once(':').ok_or_else(|| Failure::usage(format!("expected A:B for --mus, got '{s}'")))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Failure::usage(format!("bad number '{t}' in --mus")));
    mu_ladder(num(a)?, num(b)?, sigma).map_err(from_lib)
}

fn describe_config(cfg: &SolverConfig) -> String {
    let th = cfg
        .thresholds
        .map_or_else(|| "default".to_string(), |t| format!("{}/{}", t.tau_a_exponent, t.tau_i_exponent));
    let fb = cfg.newton_fallback.map_or("default", |b| if b { "on" } else { "off" });
    format!(
        "mu0={} sigma={} epsilon={:e} fraction={} max_iters_per_mu={} mu_min={:e} tau_a/tau_i={th} fallback={fb}",
        cfg.mu0, cfg.sigma, cfg.epsilon, cfg.boundary_fraction, cfg.max_iters_per_mu, cfg.mu_min
    )
}

fn describe_spec(spec: &GeneratorSpec) -> String {
    format!(
        "n={} frac_inactive={} density={} bound_style={} magnitude={} diag_shift={}",
        spec.n, spec.frac_inactive, spec.density, spec.bound_style, spec.magnitude, spec.diag_shift
    )
}

fn solver_flags(s: &SolverArgs) -> String {
    let mut f = format!(
        "--mu0 {} --sigma {} --epsilon {:e} --fraction {} --max-iters-per-mu {} --mu-min {:e} --step-rule {}",
        s.mu0, s.sigma, s.epsilon, s.fraction, s.max_iters_per_mu, s.mu_min, s.step_rule
    );
    if let Some(a) = s.tau_a {
        f += &format!(" --tau-a {a}");
    }
    if let Some(i) = s.tau_i {
        f += &format!(" --tau-i {i}");
    }
    if let Some(b) = s.fallback {
        f += if b { " --fallback on" } else { " --fallback off" };
    }
    f
}

fn generator_flags(g: &GeneratorArgs) -> String {
    format!(
        "--n {} --frac-inactive {} --density {} --bound-style {} --magnitude {} --diag-shift {}",
        g.n, g.frac_inactive, g.density, g.bound_style, g.magnitude, g.diag_shift
    )
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))
}

fn ensure_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| Failure::io(format!("cannot create {}: {e}", path.display())))
}

fn read_problem(path: &Path) -> CliResult<QuadraticProblem> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))?;
    QuadraticProblem::parse(&text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.alg.len() > 1 {
        return Err(Failure::usage("--alg options are mutually exclusive; give exactly one algorithm"));
    }
    let cfg = a.solver.config()?;
    let alg = Algorithm::parse(&a.alg[0], a.solver.rule()?).map_err(from_lib)?;
    let problem = read_problem(&a.file)?;
    let _ = writeln!(out, "# boxipm solve --alg {} {} {}", alg.name(), a.file.display(), solver_flags(&a.solver));
    let _ = writeln!(out, "# algorithm: {alg}");
    let _ = writeln!(out, "# config: {}", describe_config(&cfg));
    let trace = solve(&problem, alg, &cfg).map_err(from_lib)?;
    let _ = writeln!(out, "# initial Newton steps: {}", trace.initial_steps);
    let _ = writeln!(out, "{:>5} {:>10} {:>12} {:>12} {:>10} {:>10} {:>6} kind", "iter", "mu", "|F_mu|", "|F_0|", "alpha_P", "alpha_D", "|I_x|");
    for r in &trace.records {
        let ix = r.inactive_estimate.map_or_else(|| "-".to_string(), |k| k.to_string());
        let _ = writeln!(
            out,
            "{:>5} {:>10.3e} {:>12.4e} {:>12.4e} {:>10.4} {:>10.4} {:>6} {:?}",
            r.iteration, r.mu, r.f_mu, r.f_0, r.alpha_p, r.alpha_d, ix, r.kind
        );
    }
    let _ = writeln!(out, "outcome: {:?}", trace.outcome);
    let _ = writeln!(out, "iterations: {} (fallback engaged {} times)", trace.iterations(), trace.fallback_count);
    let _ = writeln!(out, "final ||F_0|| = {:.6e}", trace.final_kkt);
    match trace.outcome {
        Outcome::Converged => Ok(()),
        ref o => Err(Failure::solver(format!("solver did not converge: {o:?}"))),
    }
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = a.solver.config()?;
    let seeds = a.seeds.list()?;
    let spec = a.generator.spec(seeds[0])?;
    let mus = parse_range(&a.mus, cfg.sigma)?;
    let command = format!(
        "boxipm sweep --seeds {} --seed-start {} {} --mus {} {}",
        a.seeds.seeds,
        a.seeds.seed_start,
        generator_flags(&a.generator),
        a.mus,
        solver_flags(&a.solver)
    );
    let preamble = vec![
        format!("command: {command}"),
        format!("config: {}", describe_config(&cfg)),
        format!("generator: {}", describe_spec(&spec)),
        format!("seeds: {}..={}", seeds[0], seeds[seeds.len() - 1]),
        "values: mean over seeds".to_string(),
    ];
    for line in &preamble {
        let _ = writeln!(out, "# {line}");
    }
    let summary = sweep_seeds(&spec, &seeds, &mus, &cfg, a.seeds.jobs).map_err(from_lib)?;
    ensure_dir(&a.out)?;
    let csv_path = a.out.join("sweep.csv");
    write_file(&csv_path, &sweep_csv(&summary.mean, &preamble))?;
    let err_svg = a.out.join("sweep_errors.svg");
    write_file(&err_svg, &sweep_svg(&summary.mean, &ErrorField::ERRORS, "Mean approximation error"))?;
    let prog_svg = a.out.join("sweep_progress.svg");
    write_file(&prog_svg, &sweep_svg(&summary.mean, &ErrorField::PROGRESS, "Mean progress"))?;
    let _ = writeln!(out, "wrote {}, {}, {}", csv_path.display(), err_svg.display(), prog_svg.display());
    if mus.len() >= 3 {
        let (lo, hi) = (mus[mus.len() - 1], mus[0]);
        let _ = writeln!(out, "log-log slopes over mu in [{lo:e}, {hi:e}] (per-seed mean +- std):");
        for f in ErrorField::ERRORS {
            let slopes: Vec<f64> = summary.per_seed.iter().filter_map(|r| fit_slope(r, f, lo, hi).ok()).collect();
            let (m, s) = mean_std(&slopes);
            let _ = writeln!(out, "  {:<12} {m:.3} +- {s:.3}", f.column());
        }
    }
    Ok(())
}

fn cmd_table(a: &TableArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = a.solver.config()?;
    let rule = a.solver.rule()?;
    let seeds = a.seeds.list()?;
    let checkpoints = parse_range(&a.mus, cfg.sigma)?;
    let algorithms: Vec<Algorithm> = a
        .algs
        .split(',')
        .map(|s| Algorithm::parse(s.trim(), rule))
        .collect::<Result<_, _>>()
        .map_err(from_lib)?;
    let spec = a.generator.spec(seeds[0])?;
    let generated = run_seeds(&seeds, a.seeds.jobs, |s| generate(&spec.with_seed(s))).map_err(from_lib)?;
    let mut problems: Vec<(String, QuadraticProblem)> =
        generated.into_iter().map(|(s, c)| (format!("gen-{s}"), c.problem)).collect();
    for path in &a.problems {
        problems.push((path.display().to_string(), read_problem(path)?));
    }
    let names: Vec<&str> = algorithms.iter().map(|a| a.name()).collect();
    let extra: String = a.problems.iter().map(|p| format!(" --problem {}", p.display())).collect();
    let preamble = vec![
        format!(
            "command: boxipm table --seeds {} --seed-start {} {} --algs {} --mus {}{extra} {}",
            a.seeds.seeds,
            a.seeds.seed_start,
            generator_flags(&a.generator),
            names.join(","),
            a.mus,
            solver_flags(&a.solver)
        ),
        format!("config: {}", describe_config(&cfg)),
        format!("generator: {}", describe_spec(&spec)),
        format!("seeds: {}..={}", seeds[0], seeds[seeds.len() - 1]),
    ];
    for line in &preamble {
        let _ = writeln!(out, "# {line}");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.seeds.jobs)
        .build()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))?;
    let (rows, traces) =
        pool.install(|| iteration_table(&problems, &algorithms, &checkpoints, &cfg)).map_err(from_lib)?;
    ensure_dir(&a.out)?;
    let path = a.out.join("table.csv");
    let csv = table_csv(&rows, &preamble);
    write_file(&path, &csv)?;
    for line in csv.lines().filter(|l| !l.starts_with('#')) {
        let _ = writeln!(out, "{line}");
    }
    let failed = traces.iter().filter(|t| !t.outcome.is_converged()).count();
    let _ = writeln!(out, "wrote {} ({} runs, {failed} not converged)", path.display(), traces.len());
    Ok(())
}

fn apply_spec_overrides(g: &mut GeneratorArgs, seed: &mut u64, spec: &str) -> CliResult<()> {
    for pair in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').ok_or_else(|| Failure::usage(format!("expected key=value in --spec, got '{pair}'")))?;
        let bad = || Failure::usage(format!("bad value '{v}' for '{k}' in --spec"));
        match k.trim().replace('_', "-").as_str() {
            "n" => g.n = v.parse().map_err(|_| bad())?,
            "frac-inactive" => g.frac_inactive = v.parse().map_err(|_| bad())?,
            "density" => g.density = v.parse().map_err(|_| bad())?,
            "bound-style" => g.bound_style = v.to_string(),
            "magnitude" => g.magnitude = v.parse().map_err(|_| bad())?,
            "diag-shift" => g.diag_shift = v.parse().map_err(|_| bad())?,
            "seed" => *seed = v.parse().map_err(|_| bad())?,
            other => return Err(Failure::usage(format!("unknown key '{other}' in --spec"))),
        }
    }
    Ok(())
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut g = a.generator.clone();
    let mut seed = a.seed;
    if let Some(s) = &a.spec {
        apply_spec_overrides(&mut g, &mut seed, s)?;
    }
    let spec = g.spec(seed)?;
    let c = generate(&spec).map_err(from_lib)?;
    let text = format!(
        "# boxipm gen {} --seed {seed}\n# certified KKT residual {:.3e}, |A_x| = {}, |I_x| = {}\n{}",
        generator_flags(&g),
        c.kkt_residual,
        c.partition_star.a_x.len(),
        c.partition_star.i_x.len(),
        c.problem.serialize()
    );
    match &a.out {
        Some(path) => {
            write_file(path, &text)?;
            let _ = writeln!(out, "wrote {}", path.display());
        }
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Table(a) => cmd_table(a, out),
        Command::Gen(a) => cmd_gen(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
