//! Error sweep over seeded certified problems with fitted log-log slopes.
//!
//!     cargo run --release --example error_sweep -- [seeds] [n]

use boxipm::harness::{fit_slope, mean_std, mu_ladder, sweep_seeds, ErrorField, GeneratorSpec};
use boxipm::ipm::SolverConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let k: u64 = args.next().map_or(Ok(20), |s| s.parse())?;
    let n: usize = args.next().map_or(Ok(100), |s| s.parse())?;
    let seeds: Vec<u64> = (1..=k).collect();
    let mus = mu_ladder(1e-2, 1e-8, 0.1)?;
    let summary = sweep_seeds(&GeneratorSpec { n, ..Default::default() }, &seeds, &mus, &SolverConfig::default(), 0)?;

    print!("{:>8}", "mu");
    for f in ErrorField::ERRORS {
        print!(" {:>11}", f.column());
    }
    println!();
    for r in &summary.mean {
        print!("{:>8.0e}", r.mu);
        for f in ErrorField::ERRORS {
            print!(" {:>11.3e}", r.get(f));
        }
        println!();
    }
    println!("\nslopes over mu in [1e-8, 1e-4], mean +- std over {k} seeds:");
    for f in ErrorField::ERRORS {
        let slopes: Vec<f64> = summary.per_seed.iter().map(|r| fit_slope(r, f, 1e-8, 1e-4)).collect::<Result<_, _>>()?;
        let (m, s) = mean_std(&slopes);
        println!("  {:<12} {m:.3} +- {s:.3}", f.column());
    }
    Ok(())
}
