//! Newton direction against the full approximate directions near the barrier
//! trajectory, for the true active set of a certified problem.

use boxipm::approx::{full_approximate_direction, ActiveMultiplierSource, ApproxVariant, DxSource, InactiveMultiplierSource};
use boxipm::harness::{generate, GeneratorSpec};
use boxipm::ipm::{initial_point, warm_start};
use boxipm::newton::newton_direction_at;
use boxipm::residual::LocalModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = generate(&GeneratorSpec { n: 80, seed: 3, ..Default::default() })?;
    let p = &c.partition_star;
    println!("n = 80, |A_x| = {}, |I_x| = {}", p.a_x.len(), p.i_x.len());

    let variants = [
        ("S, ls, ls", ApproxVariant::least_squares(DxSource::Schur)),
        ("C, ls, ls", ApproxVariant::least_squares(DxSource::Comp)),
        (
            "S, b, ls",
            ApproxVariant::new(DxSource::Schur, ActiveMultiplierSource::Stationarity, InactiveMultiplierSource::LeastSquares),
        ),
        ("C, ls, C", ApproxVariant::new(DxSource::Comp, ActiveMultiplierSource::LeastSquares, InactiveMultiplierSource::Comp)),
    ];
    print!("{:>8} {:>11}", "mu", "|d_N|");
    for (name, _) in &variants {
        print!(" {name:>11}");
    }
    println!();

    let mut z = initial_point(&c.problem, 100.0)?;
    let mut mu = 100.0;
    while mu > 1e-9 {
        mu *= 0.1;
        z = warm_start(&c.problem, z, mu, 0.98, 50)?.0;
        let model = LocalModel::new(&c.problem, &z)?;
        let target = 0.1 * mu;
        let newton = newton_direction_at(&model, target)?;
        print!("{mu:>8.0e} {:>11.3e}", newton.norm());
        for (_, v) in &variants {
            let d = full_approximate_direction(&model, target, p, *v)?;
            print!(" {:>11.3e}", d.distance(&newton));
        }
        println!();
    }
    println!("distances to Newton shrink like mu^2 once the iterate is close to the trajectory");
    Ok(())
}
