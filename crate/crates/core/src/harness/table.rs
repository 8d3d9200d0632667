//! Iteration counts per barrier decade for several algorithms on several problems.

use rayon::prelude::*;

use crate::error::Result;
use crate::ipm::{solve, Algorithm, RunTrace, SolverConfig};
use crate::problem::BoundedProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub problem: String,
    pub algorithm: Algorithm,
    pub mu_decade: f64,
    /// `None` when the method hit the iteration cap at this decade.
    pub iters: Option<usize>,
    /// Mean estimated `|I_x|`; `None` for methods that do not estimate it.
    pub mean_ix: Option<f64>,
    /// Newton steps taken by the fallback at this decade.
    pub fallback: usize,
}

fn same_mu(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs())
}

/// Rows for each checkpoint from one finished run. Decades never visited report zero iterations.
pub fn rows_from_trace(problem: &str, trace: &RunTrace, checkpoints: &[f64]) -> Vec<TableRow> {
    let decades = trace.decades();
    checkpoints
        .iter()
        .map(|&mu| {
            let d = decades.iter().find(|d| same_mu(d.mu, mu));
            TableRow {
                problem: problem.to_string(),
                algorithm: trace.algorithm,
                mu_decade: mu,
                iters: match d {
                    Some(d) if d.failed => None,
                    Some(d) => Some(d.iterations),
                    None => Some(0),
                },
                mean_ix: d.and_then(|d| d.mean_inactive),
                fallback: d.map_or(0, |d| d.fallback_steps),
            }
        })
        .collect()
}

/// Runs every algorithm on every problem. Runs execute in parallel on the
/// current rayon pool; rows come back ordered by problem, then algorithm.
pub fn iteration_table<P: BoundedProblem>(
    problems: &[(String, P)],
    algorithms: &[Algorithm],
    checkpoints: &[f64],
    config: &SolverConfig,
) -> Result<(Vec<TableRow>, Vec<RunTrace>)> {
    let jobs: Vec<(usize, Algorithm)> =
        (0..problems.len()).flat_map(|p| algorithms.iter().map(move |&a| (p, a))).collect();
    let traces: Vec<RunTrace> =
        jobs.par_iter().map(|&(p, a)| solve(&problems[p].1, a, config)).collect::<Result<_>>()?;
    let rows = jobs
        .iter()
        .zip(&traces)
        .flat_map(|(&(p, _), t)| rows_from_trace(&problems[p].0, t, checkpoints))
        .collect();
    Ok((rows, traces))
}
