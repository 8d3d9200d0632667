#![allow(dead_code)]

use boxipm::active_sets::IndexPartition;
use boxipm::newton::{Direction, Source};
use boxipm::problem::{BoundedProblem, Bounds};
use boxipm::residual::{residual, Iterate, LocalModel};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Newton direction from an LU solve of the assembled full Jacobian.
pub fn dense_newton<P: BoundedProblem + ?Sized>(problem: &P, it: &Iterate, mu: f64) -> Direction {
    let model = LocalModel::new(problem, it).unwrap();
    let jac = model.jacobian().to_dense();
    let rhs = -residual(problem, it, mu).unwrap().to_vector();
    let sol = jac.lu().solve(&rhs).expect("nonsingular Jacobian");
    Direction::from_system_vector(&model.bounds, &sol, Source::Newton)
}

/// Strictly interior iterate with gaps and multipliers spread over several orders of magnitude.
pub fn random_iterate(rng: &mut ChaCha8Rng, bounds: &Bounds) -> Iterate {
    let n = bounds.dim();
    let mut x = DVector::zeros(n);
    let mut ll = DVector::zeros(n);
    let mut lu = DVector::zeros(n);
    let spread = |rng: &mut ChaCha8Rng| 10f64.powf(rng.gen_range(-4.0..0.5));
    for i in 0..n {
        let (l, u) = (bounds.lower[i], bounds.upper[i]);
        x[i] = match (bounds.has_lower(i), bounds.has_upper(i)) {
            (true, true) => l + (u - l) * rng.gen_range(0.001..0.999),
            (true, false) => l + spread(rng),
            (false, true) => u - spread(rng),
            (false, false) => rng.gen_range(-2.0..2.0),
        };
        if bounds.has_lower(i) {
            ll[i] = spread(rng);
        }
        if bounds.has_upper(i) {
            lu[i] = spread(rng);
        }
    }
    Iterate::new(x, ll, lu)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `max |a - b| <= tol * max(|a|, |b|, tiny)` over the given indices.
pub fn close_on(a: &DVector<f64>, b: &DVector<f64>, idx: &[usize], tol: f64) -> bool {
    let scale = idx.iter().map(|&i| a[i].abs().max(b[i].abs())).fold(1e-300, f64::max);
    idx.iter().all(|&i| (a[i] - b[i]).abs() <= tol * scale)
}

pub fn rel_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1e-300)
}

pub fn corpus(name: &str) -> String {
    format!("{}/tests/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Random complete partition: each finite bound active with probability 1/3,
/// never both bounds of one variable.
pub fn random_partition(rng: &mut ChaCha8Rng, b: &Bounds) -> IndexPartition {
    let (mut a_l, mut a_u) = (Vec::new(), Vec::new());
    for i in 0..b.dim() {
        if rng.gen_range(0..3) == 0 {
            if b.has_lower(i) && (!b.has_upper(i) || rng.gen::<bool>()) {
                a_l.push(i);
            } else if b.has_upper(i) {
                a_u.push(i);
            }
        }
    }
    IndexPartition::complete(b, a_l, a_u).unwrap()
}
