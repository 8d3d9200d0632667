//! Writes sweep CSV and SVG panels for one seed into a directory.
//!
//!     cargo run --example export_plots -- out_dir

use std::path::PathBuf;

use boxipm::harness::{error_sweep, generate, mu_ladder, sweep_csv, sweep_svg, ErrorField, GeneratorSpec};
use boxipm::ipm::SolverConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "sweep-out".into()));
    std::fs::create_dir_all(&dir)?;
    let spec = GeneratorSpec { n: 60, seed: 2, ..Default::default() };
    let records = error_sweep(&generate(&spec)?, &mu_ladder(1e-1, 1e-9, 0.1)?, &SolverConfig::default())?;

    std::fs::write(dir.join("sweep.csv"), sweep_csv(&records, &[format!("n = {}, seed = {}", spec.n, spec.seed)]))?;
    std::fs::write(dir.join("errors.svg"), sweep_svg(&records, &ErrorField::ERRORS, "Approximation error"))?;
    std::fs::write(dir.join("progress.svg"), sweep_svg(&records, &ErrorField::PROGRESS, "||F|| after one step"))?;
    println!("wrote sweep.csv, errors.svg and progress.svg to {}", dir.display());
    Ok(())
}
