//! Interior-point drivers: the Newton reference method, the approximate-direction
//! method, and the two variants that take an approximate intermediate step.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::DVector;

use crate::active_sets::{estimate_active, estimate_inactive_multipliers, EstimationThresholds, IndexPartition};
use crate::approx::{full_approximate_direction, partial_step_direction, ApproxVariant, DxSource};
use crate::error::{Error, Result};
use crate::newton::{
    apply_step, back_substitute, newton_direction_at, solve_condensed, ComplementarityDiagonals, Direction,
    StepLengths, Source,
};
use crate::problem::{interior_guess, BoundedProblem, Bounds};
use crate::residual::{Iterate, LocalModel};

/// Newton steps allowed when searching for the initial point.
pub const MAX_INIT_STEPS: usize = 100;

/// How the intermediate step is formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum PartialStepRule {
    /// `dx^S` on the active estimate, no multiplier step. `tau_A = mu^(1/2)`.
    Schur,
    /// `dx^S` plus `dlambda^C`. `tau_A = mu^(1/2)`, `tau_I = mu^(3/4)`.
    #[default]
    SchurMultipliers,
    /// `dx^C` plus `dlambda^C`. `tau_A = tau_I = mu^(3/4)`.
    CompMultipliers,
}

impl PartialStepRule {
    pub const ALL: [PartialStepRule; 3] = [Self::Schur, Self::SchurMultipliers, Self::CompMultipliers];

    pub fn dx_source(self) -> DxSource {
        match self {
            Self::Schur | Self::SchurMultipliers => DxSource::Schur,
            Self::CompMultipliers => DxSource::Comp,
        }
    }

    pub fn includes_multipliers(self) -> bool {
        !matches!(self, Self::Schur)
    }

    pub fn thresholds(self) -> EstimationThresholds {
        match self {
            Self::Schur | Self::SchurMultipliers => EstimationThresholds { tau_a_exponent: 0.5, tau_i_exponent: 0.75 },
            Self::CompMultipliers => EstimationThresholds { tau_a_exponent: 0.75, tau_i_exponent: 0.75 },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Schur => "schur",
            Self::SchurMultipliers => "schur-lambda",
            Self::CompMultipliers => "comp-lambda",
        }
    }
}

impl FromStr for PartialStepRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown step rule '{s}' (schur, schur-lambda, comp-lambda)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Newton,
    ApproxSchur,
    ApproxComp,
    Intermediate(PartialStepRule),
    HigherOrder(PartialStepRule),
}

impl Algorithm {
    pub fn default_thresholds(self) -> EstimationThresholds {
        match self {
            Algorithm::Newton => EstimationThresholds { tau_a_exponent: 0.5, tau_i_exponent: 0.75 },
            Algorithm::ApproxSchur => EstimationThresholds { tau_a_exponent: 2.0 / 3.0, tau_i_exponent: 0.75 },
            Algorithm::ApproxComp => EstimationThresholds { tau_a_exponent: 0.75, tau_i_exponent: 0.75 },
            Algorithm::Intermediate(r) | Algorithm::HigherOrder(r) => r.thresholds(),
        }
    }

    pub fn default_fallback(self) -> bool {
        self != Algorithm::Newton
    }

    pub fn uses_estimates(self) -> bool {
        self != Algorithm::Newton
    }

    /// Short name as accepted on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Newton => "newton",
            Algorithm::ApproxSchur => "aNS",
            Algorithm::ApproxComp => "aNC",
            Algorithm::Intermediate(_) => "intermediate",
            Algorithm::HigherOrder(_) => "higher",
        }
    }

    /// Parses a command-line name; the step rule applies to the two intermediate-step methods.
    pub fn parse(name: &str, rule: PartialStepRule) -> Result<Self> {
        Ok(match name {
            "newton" => Algorithm::Newton,
            "aNS" => Algorithm::ApproxSchur,
            "aNC" => Algorithm::ApproxComp,
            "intermediate" => Algorithm::Intermediate(rule),
            "higher" => Algorithm::HigherOrder(rule),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown algorithm '{name}' (newton, aNS, aNC, intermediate, higher)"
                )))
            }
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Intermediate(r) | Algorithm::HigherOrder(r) => write!(f, "{}[{}]", self.name(), r.name()),
            _ => f.write_str(self.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub mu0: f64,
    pub sigma: f64,
    /// Termination tolerance on `||F_0||`.
    pub epsilon: f64,
    pub boundary_fraction: f64,
    pub max_iters_per_mu: usize,
    pub mu_min: f64,
    /// Overrides the algorithm's default estimation thresholds.
    pub thresholds: Option<EstimationThresholds>,
    /// Overrides the algorithm's default Newton fallback setting.
    pub newton_fallback: Option<bool>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu0: 100.0,
            sigma: 0.1,
            epsilon: 1e-10,
            boundary_fraction: 0.98,
            max_iters_per_mu: 50,
            mu_min: 1e-12,
            thresholds: None,
            newton_fallback: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidArgument(format!("{what} out of range: {v}")));
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad("sigma", self.sigma);
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon", self.epsilon);
        }
        if !(self.boundary_fraction > 0.0 && self.boundary_fraction < 1.0) {
            return bad("boundary fraction", self.boundary_fraction);
        }
        if !(self.mu0 > 0.0 && self.mu0.is_finite()) {
            return bad("mu0", self.mu0);
        }
        if !(self.mu_min > 0.0 && self.mu_min < self.mu0) {
            return bad("mu_min", self.mu_min);
        }
        if self.max_iters_per_mu == 0 {
            return Err(Error::InvalidArgument("max iterations per mu must be positive".into()));
        }
        if let Some(t) = self.thresholds {
            EstimationThresholds::new(t.tau_a_exponent, t.tau_i_exponent)?;
        }
        Ok(())
    }

    pub fn thresholds_for(&self, algorithm: Algorithm) -> EstimationThresholds {
        self.thresholds.unwrap_or_else(|| algorithm.default_thresholds())
    }

    pub fn fallback_for(&self, algorithm: Algorithm) -> bool {
        self.newton_fallback.unwrap_or_else(|| algorithm.default_fallback())
    }
}

/// What produced the step of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    Newton,
    Approximate,
    Intermediate,
    HigherOrder,
    /// Newton step taken after the approximate method stalled at this `mu`.
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Barrier parameter the direction was computed for.
    pub mu: f64,
    /// `||F_mu||` at the new iterate.
    pub f_mu: f64,
    /// `||F_0||` at the new iterate.
    pub f_0: f64,
    pub alpha_p: f64,
    pub alpha_d: f64,
    /// Step lengths of the intermediate step, when one was taken.
    pub intermediate: Option<StepLengths>,
    /// Size of the estimated inactive set, for methods that estimate one.
    pub inactive_estimate: Option<usize>,
    pub kind: StepKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Converged,
    MuFloor,
    IterationCap,
    NumericalFailure(Error),
}

impl Outcome {
    pub fn is_converged(&self) -> bool {
        matches!(self, Outcome::Converged)
    }
}

/// One decade (one value of `mu`) of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct DecadeSummary {
    pub mu: f64,
    pub iterations: usize,
    pub fallback_steps: usize,
    /// Mean inactive estimate over the non-fallback iterations, if any were recorded.
    pub mean_inactive: Option<f64>,
    /// True when the approximate method hit the iteration cap at this `mu`.
    pub failed: bool,
}

/// Full record of one run. Wall-clock timings are kept apart from the
/// deterministic content and ignored by `PartialEq`.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub algorithm: Algorithm,
    pub config: SolverConfig,
    pub initial_steps: usize,
    pub records: Vec<IterationRecord>,
    pub outcome: Outcome,
    /// Number of times the Newton fallback engaged.
    pub fallback_count: usize,
    /// Values of `mu` at which the approximate method hit the cap.
    pub failed_mus: Vec<f64>,
    pub final_iterate: Iterate,
    pub final_kkt: f64,
    pub timings: Vec<Duration>,
}

impl PartialEq for RunTrace {
    fn eq(&self, other: &Self) -> bool {
        self.algorithm == other.algorithm
            && self.config == other.config
            && self.initial_steps == other.initial_steps
            && self.records == other.records
            && self.outcome == other.outcome
            && self.fallback_count == other.fallback_count
            && self.failed_mus == other.failed_mus
            && self.final_iterate == other.final_iterate
            && self.final_kkt.to_bits() == other.final_kkt.to_bits()
    }
}

impl RunTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Iterations whose direction targeted a `mu` in `[lo, hi]` (relative slack 1e-9).
    pub fn iterations_in(&self, lo: f64, hi: f64) -> usize {
        self.records.iter().filter(|r| r.mu >= lo * (1.0 - 1e-9) && r.mu <= hi * (1.0 + 1e-9)).count()
    }

    /// Groups consecutive records by `mu`.
    pub fn decades(&self) -> Vec<DecadeSummary> {
        let mut out: Vec<DecadeSummary> = Vec::new();
        let mut sums: Vec<(f64, usize)> = Vec::new();
        for r in &self.records {
            if out.last().is_none_or(|d| d.mu != r.mu) {
                out.push(DecadeSummary {
                    mu: r.mu,
                    iterations: 0,
                    fallback_steps: 0,
                    mean_inactive: None,
                    failed: self.failed_mus.contains(&r.mu),
                });
                sums.push((0.0, 0));
            }
            let d = out.last_mut().expect("pushed above");
            let s = sums.last_mut().expect("pushed above");
            d.iterations += 1;
            if r.kind == StepKind::Fallback {
                d.fallback_steps += 1;
            }
            if let (Some(k), false) = (r.inactive_estimate, r.kind == StepKind::Fallback) {
                s.0 += k as f64;
                s.1 += 1;
            }
        }
        for (d, (sum, count)) in out.iter_mut().zip(sums) {
            if count > 0 {
                d.mean_inactive = Some(sum / count as f64);
            }
        }
        out
    }

    pub fn total_time(&self) -> Duration {
        self.timings.iter().sum()
    }
}

fn lambda_for(gap: f64, mu: f64) -> f64 {
    if gap.is_finite() { mu / gap } else { 0.0 }
}

/// Strictly interior iterate with `||F_mu0|| < mu0` and the number of Newton
/// steps spent reaching it.
pub fn initial_point_with_steps<P: BoundedProblem + ?Sized>(problem: &P, mu0: f64) -> Result<(Iterate, usize)> {
    if !(mu0 > 0.0) {
        return Err(Error::InvalidArgument(format!("mu0 must be positive, got {mu0}")));
    }
    let bounds = Bounds::of(problem);
    let n = bounds.dim();
    let x = DVector::from_fn(n, |i, _| interior_guess(bounds.lower[i], bounds.upper[i]));
    let lambda_l = DVector::from_fn(n, |i, _| {
        if bounds.has_lower(i) { lambda_for(x[i] - bounds.lower[i], mu0) } else { 0.0 }
    });
    let lambda_u = DVector::from_fn(n, |i, _| {
        if bounds.has_upper(i) { lambda_for(bounds.upper[i] - x[i], mu0) } else { 0.0 }
    });
    warm_start(problem, Iterate::new(x, lambda_l, lambda_u), mu0, 0.98, MAX_INIT_STEPS)
}

pub fn initial_point<P: BoundedProblem + ?Sized>(problem: &P, mu0: f64) -> Result<Iterate> {
    initial_point_with_steps(problem, mu0).map(|(it, _)| it)
}

/// Newton steps at fixed `mu` from `start` until `||F_mu|| < mu`.
/// Returns the point and the number of steps taken.
pub fn warm_start<P: BoundedProblem + ?Sized>(
    problem: &P,
    start: Iterate,
    mu: f64,
    fraction: f64,
    max_steps: usize,
) -> Result<(Iterate, usize)> {
    let bounds = Bounds::of(problem);
    let mut it = start;
    for k in 0..=max_steps {
        let model = LocalModel::with_bounds(problem, bounds.clone(), &it)?;
        if model.residual(mu).norm < mu {
            return Ok((it, k));
        }
        if k == max_steps {
            break;
        }
        let d = newton_direction_at(&model, mu)?;
        it = apply_step(&it, &d, &bounds, fraction)?.0;
    }
    Err(Error::InitFailure(max_steps))
}

struct StepResult {
    next: Iterate,
    steps: StepLengths,
    intermediate: Option<StepLengths>,
    inactive_estimate: Option<usize>,
}

fn newton_step(model: &LocalModel, mu: f64, fraction: f64) -> Result<StepResult> {
    let d = newton_direction_at(model, mu)?;
    let (next, steps) = apply_step(&model.iterate, &d, &model.bounds, fraction)?;
    Ok(StepResult { next, steps, intermediate: None, inactive_estimate: None })
}

fn estimated_partition(model: &LocalModel, mu: f64, thresholds: &EstimationThresholds) -> Result<IndexPartition> {
    let active = estimate_active(&model.bounds, &model.iterate, mu, thresholds);
    let (i_l, i_u) = estimate_inactive_multipliers(&model.bounds, &model.iterate, mu, thresholds);
    IndexPartition::with_multiplier_sets(&model.bounds, active.a_l, active.a_u, i_l, i_u)
}

/// Approximate intermediate point `z^E` from a partial-step direction.
fn intermediate_point(
    model: &LocalModel,
    mu: f64,
    rule: PartialStepRule,
    thresholds: &EstimationThresholds,
    fraction: f64,
) -> Result<(Iterate, StepLengths, usize)> {
    let partition = estimated_partition(model, mu, thresholds)?;
    let d = partial_step_direction(model, mu, &partition, rule.dx_source(), rule.includes_multipliers())?;
    let (ze, steps) = apply_step(&model.iterate, &d, &model.bounds, fraction)?;
    Ok((ze, steps, partition.i_x.len()))
}

fn algorithm_step<P: BoundedProblem + ?Sized>(
    problem: &P,
    model: &LocalModel,
    algorithm: Algorithm,
    mu: f64,
    thresholds: &EstimationThresholds,
    fraction: f64,
) -> Result<StepResult> {
    match algorithm {
        Algorithm::Newton => newton_step(model, mu, fraction),
        Algorithm::ApproxSchur | Algorithm::ApproxComp => {
            let source = if algorithm == Algorithm::ApproxSchur { DxSource::Schur } else { DxSource::Comp };
            let partition = estimate_active(&model.bounds, &model.iterate, mu, thresholds);
            let d = full_approximate_direction(model, mu, &partition, ApproxVariant::least_squares(source))?;
            let (next, steps) = apply_step(&model.iterate, &d, &model.bounds, fraction)?;
            Ok(StepResult { next, steps, intermediate: None, inactive_estimate: Some(partition.i_x.len()) })
        }
        Algorithm::Intermediate(rule) => {
            let (ze, e_steps, ix) = intermediate_point(model, mu, rule, thresholds, fraction)?;
            let model_e = LocalModel::with_bounds(problem, model.bounds.clone(), &ze)?;
            let d = newton_direction_at(&model_e, mu)?;
            let (next, steps) = apply_step(&ze, &d, &model.bounds, fraction)?;
            Ok(StepResult { next, steps, intermediate: Some(e_steps), inactive_estimate: Some(ix) })
        }
        Algorithm::HigherOrder(rule) => {
            let (ze, e_steps, ix) = intermediate_point(model, mu, rule, thresholds, fraction)?;
            let d = higher_order_direction(model, &ze, mu)?;
            let (next, steps) = apply_step(&model.iterate, &d, &model.bounds, fraction)?;
            Ok(StepResult { next, steps, intermediate: Some(e_steps), inactive_estimate: Some(ix) })
        }
    }
}

/// Solves the Newton system at `model` with the complementarity blocks replaced
/// by those of `ze`; the right-hand side stays `-F_mu` at the original point.
pub fn higher_order_direction(model: &LocalModel, ze: &Iterate, mu: f64) -> Result<Direction> {
    let bounds = &model.bounds;
    ze.check_interior(bounds)?;
    let n = bounds.dim();
    let gap_l = DVector::from_fn(n, |i, _| if bounds.has_lower(i) { ze.x[i] - bounds.lower[i] } else { f64::INFINITY });
    let gap_u = DVector::from_fn(n, |i, _| if bounds.has_upper(i) { bounds.upper[i] - ze.x[i] } else { f64::INFINITY });
    let diag = ComplementarityDiagonals { lambda_l: &ze.lambda_l, gap_l: &gap_l, lambda_u: &ze.lambda_u, gap_u: &gap_u };
    let rhs = model.residual(mu);
    let dx = solve_condensed(&model.hessian, bounds, &diag, &rhs)?;
    Ok(back_substitute(bounds, dx, &diag, &rhs, Source::Newton))
}

/// Runs one algorithm from the standard initial point.
pub fn solve<P: BoundedProblem + ?Sized>(problem: &P, algorithm: Algorithm, config: &SolverConfig) -> Result<RunTrace> {
    config.validate()?;
    let (start, initial_steps) = initial_point_with_steps(problem, config.mu0)?;
    Ok(run_from(problem, algorithm, config, start, initial_steps))
}

/// Main loop from a point satisfying `||F_mu0|| < mu0`.
pub fn run_from<P: BoundedProblem + ?Sized>(
    problem: &P,
    algorithm: Algorithm,
    config: &SolverConfig,
    start: Iterate,
    initial_steps: usize,
) -> RunTrace {
    let bounds = Bounds::of(problem);
    let thresholds = config.thresholds_for(algorithm);
    let fallback_enabled = config.fallback_for(algorithm);
    let mut trace = RunTrace {
        algorithm,
        config: *config,
        initial_steps,
        records: Vec::new(),
        outcome: Outcome::IterationCap,
        fallback_count: 0,
        failed_mus: Vec::new(),
        final_iterate: start.clone(),
        final_kkt: f64::NAN,
        timings: Vec::new(),
    };
    let mut it = start;
    let mut mu = config.sigma * config.mu0;
    let mut iters_at_mu = 0;
    let mut in_fallback = false;

    let outcome = loop {
        let model = match LocalModel::with_bounds(problem, bounds.clone(), &it) {
            Ok(m) => m,
            Err(e) => break Outcome::NumericalFailure(e),
        };
        if trace.records.is_empty() {
            trace.final_kkt = model.residual(0.0).norm;
            if trace.final_kkt <= config.epsilon {
                break Outcome::Converged;
            }
        }
        if iters_at_mu >= config.max_iters_per_mu {
            if fallback_enabled && !in_fallback {
                in_fallback = true;
                iters_at_mu = 0;
                trace.fallback_count += 1;
                trace.failed_mus.push(mu);
            } else {
                break Outcome::IterationCap;
            }
        }
        let started = Instant::now();
        let step = if in_fallback {
            newton_step(&model, mu, config.boundary_fraction)
        } else {
            algorithm_step(problem, &model, algorithm, mu, &thresholds, config.boundary_fraction)
        };
        let step = match step {
            Ok(s) => s,
            Err(e) => break Outcome::NumericalFailure(e),
        };
        let next_model = match LocalModel::with_bounds(problem, bounds.clone(), &step.next) {
            Ok(m) => m,
            Err(e) => break Outcome::NumericalFailure(e),
        };
        let f_mu = next_model.residual(mu).norm;
        let f_0 = next_model.residual(0.0).norm;
        trace.timings.push(started.elapsed());
        let kind = match (in_fallback, algorithm) {
            (true, _) => StepKind::Fallback,
            (false, Algorithm::Newton) => StepKind::Newton,
            (false, Algorithm::ApproxSchur | Algorithm::ApproxComp) => StepKind::Approximate,
            (false, Algorithm::Intermediate(_)) => StepKind::Intermediate,
            (false, Algorithm::HigherOrder(_)) => StepKind::HigherOrder,
        };
        trace.records.push(IterationRecord {
            iteration: trace.records.len(),
            mu,
            f_mu,
            f_0,
            alpha_p: step.steps.alpha_p,
            alpha_d: step.steps.alpha_d,
            intermediate: step.intermediate,
            inactive_estimate: if in_fallback { None } else { step.inactive_estimate },
            kind,
        });
        it = step.next;
        trace.final_kkt = f_0;
        iters_at_mu += 1;
        if f_0 <= config.epsilon {
            break Outcome::Converged;
        }
        if f_mu < mu {
            if mu <= config.mu_min * (1.0 + 1e-9) {
                break Outcome::MuFloor;
            }
            mu *= config.sigma;
            iters_at_mu = 0;
            in_fallback = false;
        }
    };
    trace.outcome = outcome;
    trace.final_iterate = it;
    trace
}

pub fn solve_reference<P: BoundedProblem + ?Sized>(problem: &P, config: &SolverConfig) -> Result<RunTrace> {
    solve(problem, Algorithm::Newton, config)
}

pub fn solve_approx<P: BoundedProblem + ?Sized>(problem: &P, config: &SolverConfig, source: DxSource) -> Result<RunTrace> {
    let alg = match source {
        DxSource::Schur => Algorithm::ApproxSchur,
        DxSource::Comp => Algorithm::ApproxComp,
    };
    solve(problem, alg, config)
}

pub fn solve_intermediate<P: BoundedProblem + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    rule: PartialStepRule,
) -> Result<RunTrace> {
    solve(problem, Algorithm::Intermediate(rule), config)
}

pub fn solve_higher_order<P: BoundedProblem + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    rule: PartialStepRule,
) -> Result<RunTrace> {
    solve(problem, Algorithm::HigherOrder(rule), config)
}
