//! Active-set estimates along the barrier trajectory compared with the
//! certified solution's sets.

use boxipm::active_sets::{estimate_active, estimate_inactive_multipliers};
use boxipm::harness::{generate, mu_ladder, GeneratorSpec};
use boxipm::ipm::{initial_point, warm_start, Algorithm, PartialStepRule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = generate(&GeneratorSpec { n: 60, seed: 11, ..Default::default() })?;
    let bounds = c.bounds();
    let truth = &c.partition_star;
    println!("true |A_x| = {}, |I_x| = {}", truth.a_x.len(), truth.i_x.len());
    println!("{:>8} {:>26} {:>26}", "mu", "aNS (mu^2/3): |A| missed extra", "intermediate (mu^1/2): |A| missed extra");

    let rules = [Algorithm::ApproxSchur.default_thresholds(), Algorithm::Intermediate(PartialStepRule::Schur).default_thresholds()];
    let mut z = initial_point(&c.problem, 100.0)?;
    for mu in mu_ladder(10.0, 1e-10, 0.1)? {
        z = warm_start(&c.problem, z, mu, 0.98, 50)?.0;
        print!("{mu:>8.0e}");
        for th in &rules {
            let est = estimate_active(&bounds, &z, mu, th);
            let missed = truth.a_x.iter().filter(|i| !est.a_x.contains(i)).count();
            let extra = est.a_x.iter().filter(|i| !truth.a_x.contains(i)).count();
            print!(" {:>14} {:>5} {:>5}", est.a_x.len(), missed, extra);
        }
        let (il, iu) = estimate_inactive_multipliers(&bounds, &z, mu, &rules[0]);
        println!("   inactive multipliers: {}", il.len() + iu.len());
    }
    Ok(())
}
