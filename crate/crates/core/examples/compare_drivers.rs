//! All drivers on one certified problem: per-decade iteration counts,
//! inactive-set estimates and fallback use.

use boxipm::harness::{generate, GeneratorSpec};
use boxipm::ipm::{solve, Algorithm, PartialStepRule, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = generate(&GeneratorSpec { n: 150, seed: 5, ..Default::default() })?;
    let cfg = SolverConfig::default();
    let mut algorithms = vec![Algorithm::Newton, Algorithm::ApproxSchur, Algorithm::ApproxComp];
    for rule in PartialStepRule::ALL {
        algorithms.push(Algorithm::Intermediate(rule));
        algorithms.push(Algorithm::HigherOrder(rule));
    }
    println!("n = 150, true |I_x| = {}", c.partition_star.i_x.len());
    for alg in algorithms {
        let t = solve(&c.problem, alg, &cfg)?;
        let per_decade: Vec<String> = t.decades().iter().map(|d| d.iterations.to_string()).collect();
        let last_ix = t.decades().last().and_then(|d| d.mean_inactive).map_or("-".into(), |m| format!("{m:.1}"));
        println!(
            "{:<26} {:?}: {:>2} iterations [{}], |I_x| at last mu {last_ix}, fallback {}, {:.1} ms",
            alg.to_string(),
            t.outcome,
            t.iterations(),
            per_decade.join(" "),
            t.fallback_count,
            t.total_time().as_secs_f64() * 1e3
        );
    }
    Ok(())
}
