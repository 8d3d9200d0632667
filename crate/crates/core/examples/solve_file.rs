//! Solve a QP stored in the text format and print the iteration log.
//!
//!     cargo run --example solve_file -- path/to/problem.txt [algorithm]
//!
//! Without arguments the bundled four-variable problem is used.

use boxipm::ipm::{solve, Algorithm, PartialStepRule, SolverConfig};
use boxipm::problem::QuadraticProblem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/qp_mixed.txt").to_string());
    let alg = Algorithm::parse(&args.next().unwrap_or_else(|| "newton".into()), PartialStepRule::default())?;

    let problem = QuadraticProblem::parse(&std::fs::read_to_string(&path)?)?;
    let trace = solve(&problem, alg, &SolverConfig::default())?;

    println!("{path}: {alg}, {} initial Newton steps", trace.initial_steps);
    println!("{:>4} {:>9} {:>11} {:>11} {:>7}", "it", "mu", "|F_mu|", "|F_0|", "alpha_P");
    for r in &trace.records {
        println!("{:>4} {:>9.1e} {:>11.3e} {:>11.3e} {:>7.4}", r.iteration, r.mu, r.f_mu, r.f_0, r.alpha_p);
    }
    let z = &trace.final_iterate;
    println!("{:?} after {} iterations", trace.outcome, trace.iterations());
    println!("x        = {:.8?}", z.x.as_slice());
    println!("lambda_l = {:.8?}", z.lambda_l.as_slice());
    println!("lambda_u = {:.8?}", z.lambda_u.as_slice());
    Ok(())
}
