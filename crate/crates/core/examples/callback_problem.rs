//! A non-quadratic objective given by closures.
//!
//! f(x) = sum_i exp(x_i) - 2 x_i + 0.1 x_i x_{i+1} on the box [-1, 0.5]^n.

use boxipm::ipm::{solve, Algorithm, PartialStepRule, SolverConfig};
use boxipm::problem::CallbackProblem;
use nalgebra::{DMatrix, DVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 6;
    let coupling = 0.1;
    let problem = CallbackProblem::new(
        DVector::from_element(n, -1.0),
        DVector::from_element(n, 0.5),
        move |x| {
            let sep: f64 = x.iter().map(|v| v.exp() - 2.0 * v).sum();
            sep + coupling * (0..n - 1).map(|i| x[i] * x[i + 1]).sum::<f64>()
        },
        move |x| {
            DVector::from_fn(n, |i, _| {
                let left = if i > 0 { x[i - 1] } else { 0.0 };
                let right = if i + 1 < n { x[i + 1] } else { 0.0 };
                x[i].exp() - 2.0 + coupling * (left + right)
            })
        },
        move |x| {
            DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
                0 => x[i].exp(),
                1 => coupling,
                _ => 0.0,
            })
        },
    );

    for alg in [Algorithm::Newton, Algorithm::ApproxSchur, Algorithm::HigherOrder(PartialStepRule::default())] {
        let t = solve(&problem, alg, &SolverConfig::default())?;
        println!("{:<28} {:?} in {:>2} iterations, ||F_0|| = {:.2e}", alg.to_string(), t.outcome, t.iterations(), t.final_kkt);
    }
    let t = solve(&problem, Algorithm::Newton, &SolverConfig::default())?;
    println!("x        = {:.6?}", t.final_iterate.x.as_slice());
    println!("lambda_u = {:.6?}", t.final_iterate.lambda_u.as_slice());
    Ok(())
}
