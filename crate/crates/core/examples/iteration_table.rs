//! Iteration counts per decade of mu for several drivers over seeded problems.

use boxipm::harness::{generate, iteration_table, mu_ladder, table_csv, GeneratorSpec};
use boxipm::ipm::{Algorithm, PartialStepRule, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problems = (1..=3)
        .map(|seed| Ok((format!("gen-{seed}"), generate(&GeneratorSpec { n: 80, seed, ..Default::default() })?.problem)))
        .collect::<boxipm::Result<Vec<_>>>()?;
    let algorithms = [
        Algorithm::Newton,
        Algorithm::ApproxSchur,
        Algorithm::Intermediate(PartialStepRule::default()),
        Algorithm::HigherOrder(PartialStepRule::default()),
    ];
    let checkpoints = mu_ladder(1e-5, 1e-10, 0.1)?;
    let (rows, traces) = iteration_table(&problems, &algorithms, &checkpoints, &SolverConfig::default())?;
    print!("{}", table_csv(&rows, &["iterations per decade, mu from 1e-5 to 1e-10".into()]));
    for t in &traces {
        println!("# {} total {} iterations", t.algorithm, t.iterations_in(1e-10, 1e-5));
    }
    Ok(())
}
