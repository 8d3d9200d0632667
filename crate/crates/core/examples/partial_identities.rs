//! Closed-form partial approximations and their exact error identities,
//! checked against an LU solve of the full Newton system.

use boxipm::active_sets::IndexPartition;
use boxipm::approx::{dlambda_comp_partial, dx_active, DxSource};
use boxipm::newton::{Direction, Source};
use boxipm::problem::{BoundedProblem, Bounds, QuadraticProblem};
use boxipm::residual::{Iterate, LocalModel};
use boxipm::sparse::SymmetricMatrix;
use nalgebra::DVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inf = f64::INFINITY;
    let h = SymmetricMatrix::from_lower_triplets(
        4,
        vec![(0, 0, 3.0), (1, 0, 0.5), (1, 1, 2.0), (2, 1, -0.3), (2, 2, 4.0), (3, 0, 0.2), (3, 3, 1.0)],
    )?;
    let problem = QuadraticProblem::new(
        h,
        DVector::from_column_slice(&[1.0, -0.5, 0.2, 0.3]),
        0.0,
        DVector::from_column_slice(&[0.0, -1.0, -inf, 0.0]),
        DVector::from_column_slice(&[2.0, inf, 1.0, inf]),
    )?;
    let bounds = Bounds::of(&problem);
    let z = Iterate::new(
        DVector::from_column_slice(&[1e-3, 0.4, 0.998, 0.7]),
        DVector::from_column_slice(&[0.9, 2e-3, 0.0, 1e-3]),
        DVector::from_column_slice(&[4e-4, 0.0, 1.2, 0.0]),
    );
    let mu = 1e-3;
    // x0 near its lower bound, x2 near its upper bound.
    let part = IndexPartition::complete(&bounds, vec![0], vec![2])?;

    let model = LocalModel::new(&problem, &z)?;
    let sol = model.jacobian().to_dense().lu().solve(&-model.residual(mu).to_vector()).ok_or("singular")?;
    let newton = Direction::from_system_vector(&bounds, &sol, Source::Newton);

    let s = dx_active(&model, mu, &part, DxSource::Schur)?;
    let c = dx_active(&model, mu, &part, DxSource::Comp)?;
    let hess = problem.hessian(&z.x);
    for &i in &part.a_x {
        let d = hess[(i, i)] + model.ratio_l(i) + model.ratio_u(i);
        let coupling: f64 = (0..4).filter(|&j| j != i).map(|j| hess[(i, j)] * newton.dx[j]).sum();
        println!("dx^S - dx^N at {i}: {:+.6e}   predicted {:+.6e}", s[i] - newton.dx[i], coupling / d);
        let pred = if part.is_active_lower(i) {
            model.gap_l[i] / z.lambda_l[i] * newton.dlambda_l[i]
        } else {
            -model.gap_u[i] / z.lambda_u[i] * newton.dlambda_u[i]
        };
        println!("dx^C - dx^N at {i}: {:+.6e}   predicted {:+.6e}", c[i] - newton.dx[i], pred);
    }
    let (cl, _) = dlambda_comp_partial(&model, mu, &part);
    for &i in &part.i_l {
        let pred = z.lambda_l[i] / model.gap_l[i] * newton.dx[i];
        println!("dlambda_l^C - dlambda_l^N at {i}: {:+.6e}   predicted {:+.6e}", cl[i] - newton.dlambda_l[i], pred);
    }
    Ok(())
}
