//! Experiments: certified random problems, error sweeps, iteration tables,
//! slope fits and CSV/SVG output.

pub mod export;
pub mod generator;
pub mod slope;
pub mod sweep;
pub mod table;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ipm::SolverConfig;

pub use export::{sweep_csv, sweep_svg, table_csv, SWEEP_HEADER, TABLE_HEADER};
pub use generator::{generate, BoundStyle, CertifiedProblem, GeneratorSpec};
pub use slope::{fit_slope, fit_slope_points, mean_std};
pub use sweep::{error_sweep, errors_at, ErrorField, ErrorRecord, SweepSummary};
pub use table::{iteration_table, rows_from_trace, TableRow};

/// Geometric ladder `a, sigma a, sigma^2 a, ...` down to `b` inclusive.
/// Values are rounded to 12 significant digits so decades print cleanly.
pub fn mu_ladder(a: f64, b: f64, sigma: f64) -> Result<Vec<f64>> {
    if !(a > 0.0 && b > 0.0 && b <= a && sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidArgument(format!("invalid mu range {a}:{b} with sigma {sigma}")));
    }
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let v: f64 = format!("{:.11e}", a * sigma.powi(k)).parse().expect("formatted float parses");
        if v < b * (1.0 - 1e-9) {
            break;
        }
        out.push(v);
        k += 1;
    }
    Ok(out)
}

/// Runs `f` for each seed on a pool of `jobs` threads (0 = rayon default).
/// Results are returned in seed order.
pub fn run_seeds<T, F>(seeds: &[u64], jobs: usize, f: F) -> Result<Vec<(u64, T)>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    pool.install(|| sorted.par_iter().map(|&s| f(s).map(|t| (s, t))).collect())
}

/// Sweeps one certified problem per seed and aggregates the records.
pub fn sweep_seeds(
    spec: &GeneratorSpec,
    seeds: &[u64],
    mus: &[f64],
    config: &SolverConfig,
    jobs: usize,
) -> Result<SweepSummary> {
    let runs = run_seeds(seeds, jobs, |seed| {
        let c = generate(&spec.with_seed(seed))?;
        error_sweep(&c, mus, config)
    })?;
    SweepSummary::aggregate(runs)
}
