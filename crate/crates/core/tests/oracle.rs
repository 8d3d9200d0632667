//! Approximate directions checked against a dense LU solve of the full Newton system.

mod common;

use boxipm::active_sets::IndexPartition;
use boxipm::approx::*;
use boxipm::harness::{generate, BoundStyle, GeneratorSpec};
use boxipm::newton::{newton_direction_at, Source};
use boxipm::problem::{BoundedProblem, Bounds, QuadraticProblem};
use boxipm::residual::{Iterate, LocalModel};
use boxipm::sparse::SymmetricMatrix;
use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const INF: f64 = f64::INFINITY;

fn problem(n: usize, seed: u64, style: BoundStyle) -> QuadraticProblem {
    generate(&GeneratorSpec { n, seed, bound_style: style, ..Default::default() }).unwrap().problem
}

#[test]
fn condensed_newton_matches_dense_lu() {
    for seed in 0..20 {
        let p = problem(12, seed, BoundStyle::Mixed);
        let it = random_iterate(&mut rng(seed), &Bounds::of(&p));
        let m = LocalModel::new(&p, &it).unwrap();
        let d = newton_direction_at(&m, 1e-3).unwrap();
        let o = dense_newton(&p, &it, 1e-3);
        assert!(d.distance(&o) <= 1e-9 * o.norm());
        let res = d.linear_residual(&m.jacobian(), &m.bounds, &m.residual(1e-3));
        assert!(res <= 1e-9 * (1.0 + m.residual(1e-3).norm));
    }
}

#[test]
fn schur_error_identity_three_dimensional() {
    // Two-sided, lower-only and upper-only variables with coupling.
    let h = SymmetricMatrix::from_lower_triplets(3, vec![(0, 0, 3.0), (1, 0, 0.7), (1, 1, 2.0), (2, 0, -0.4), (2, 2, 1.5)])
        .unwrap();
    let p = QuadraticProblem::new(
        h,
        DVector::from_column_slice(&[0.3, -0.2, 1.0]),
        0.0,
        DVector::from_column_slice(&[0.0, -1.0, -INF]),
        DVector::from_column_slice(&[1.0, INF, 2.0]),
    )
    .unwrap();
    let it = Iterate::new(
        DVector::from_column_slice(&[0.01, 0.5, 1.9]),
        DVector::from_column_slice(&[2.0, 0.01, 0.0]),
        DVector::from_column_slice(&[0.003, 0.0, 0.8]),
    );
    let mu = 1e-3;
    let m = LocalModel::new(&p, &it).unwrap();
    let n = dense_newton(&p, &it, mu);
    let s = dx_schur_partial(&m, mu, &[0, 1, 2]).unwrap();
    let hm = p.hessian(&it.x);
    for i in 0..3 {
        let d = hm[(i, i)] + m.ratio_l(i) + m.ratio_u(i);
        let off: f64 = (0..3).filter(|&j| j != i).map(|j| hm[(i, j)] * n.dx[j]).sum();
        let lhs = s[i] - n.dx[i];
        assert!((lhs - off / d).abs() <= 1e-10 * lhs.abs().max(1e-14), "index {i}: {lhs} vs {}", off / d);
    }
}

#[test]
fn reduced_backward_error_formula() {
    let p = problem(4, 11, BoundStyle::LowerOnly);
    let b = Bounds::of(&p);
    let it = random_iterate(&mut rng(5), &b);
    let mu = 1e-2;
    let m = LocalModel::new(&p, &it).unwrap();
    let n = dense_newton(&p, &it, mu);
    let part = IndexPartition::complete(&b, vec![0, 2], vec![]).unwrap();
    let mut dxa = DVector::zeros(4);
    dxa[0] = n.dx[0] + 0.3;
    dxa[2] = n.dx[2] - 0.1;
    let dx = reduced_schur_solve(&m, mu, &part, &dxa).unwrap();
    let h = p.hessian(&it.x);
    let ix = &part.i_x;
    let ax = &part.a_x;
    let mut red = DMatrix::zeros(ix.len(), ix.len());
    for (r, &i) in ix.iter().enumerate() {
        for (c, &j) in ix.iter().enumerate() {
            red[(r, c)] = h[(i, j)];
        }
        red[(r, r)] += m.ratio_l(i) + m.ratio_u(i);
    }
    let delta_a = DVector::from_iterator(ax.len(), ax.iter().map(|&j| dxa[j] - n.dx[j]));
    let h_ia = DMatrix::from_fn(ix.len(), ax.len(), |r, c| h[(ix[r], ax[c])]);
    let predicted = -red.lu().solve(&(h_ia * delta_a)).unwrap();
    for (r, &i) in ix.iter().enumerate() {
        assert!((dx[i] - n.dx[i] - predicted[r]).abs() <= 1e-9 * predicted.amax());
    }
    // Inactive multipliers: error equals -(lambda / gap) times the dx error.
    let (dl, _) = recover_inactive_multipliers(&m, mu, &part, &dx);
    for &i in &part.i_l {
        let expect = -(it.lambda_l[i] / m.gap_l[i]) * (dx[i] - n.dx[i]);
        assert!((dl[i] - n.dlambda_l[i] - expect).abs() <= 1e-9 * (expect.abs() + 1e-12));
    }
}

#[test]
fn stationarity_recovery_error_bound() {
    let p = problem(4, 3, BoundStyle::LowerOnly);
    let b = Bounds::of(&p);
    let it = random_iterate(&mut rng(9), &b);
    let mu = 1e-2;
    let m = LocalModel::new(&p, &it).unwrap();
    let n = dense_newton(&p, &it, mu);
    let part = IndexPartition::complete(&b, vec![1, 3], vec![]).unwrap();
    let mut dxa = DVector::zeros(4);
    dxa[1] = n.dx[1] * 1.1;
    dxa[3] = n.dx[3] - 0.05;
    let dx = reduced_schur_solve(&m, mu, &part, &dxa).unwrap();
    let (il, iu) = recover_inactive_multipliers(&m, mu, &part, &dx);
    let (al, _) = recover_active_multipliers(&m, mu, &part, &dx, &il, &iu, ActiveMultiplierSource::Stationarity);
    let h = p.hessian(&it.x);
    let sub = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |r, c| h[(rows[r], cols[c])]);
    let err = |idx: &[usize]| idx.iter().map(|&i| (dx[i] - n.dx[i]).powi(2)).sum::<f64>().sqrt();
    let lhs = part.a_l.iter().map(|&i| (al[i] - n.dlambda_l[i]).powi(2)).sum::<f64>().sqrt();
    let rhs = sub(&part.a_x, &part.a_x).norm() * err(&part.a_x) + sub(&part.a_x, &part.i_x).norm() * err(&part.i_x);
    assert!(lhs <= rhs * (1.0 + 1e-12));
}

#[test]
fn second_block_recovery_is_exact_only_with_exact_inputs() {
    // -q/g recovers the Newton active multipliers when dx is exact.
    let p = problem(6, 2, BoundStyle::LowerOnly);
    let b = Bounds::of(&p);
    let it = random_iterate(&mut rng(1), &b);
    let mu = 1e-3;
    let m = LocalModel::new(&p, &it).unwrap();
    let n = dense_newton(&p, &it, mu);
    for &i in &[0usize, 4] {
        let g = m.gap_l[i];
        let q = it.lambda_l[i] * g - mu + it.lambda_l[i] * n.dx[i];
        assert!((-q / g - n.dlambda_l[i]).abs() <= 1e-9 * n.dlambda_l[i].abs().max(1e-12));
    }
}

#[test]
fn empty_active_set_reproduces_newton() {
    for seed in 0..10 {
        let p = problem(15, seed, BoundStyle::Mixed);
        let b = Bounds::of(&p);
        let it = random_iterate(&mut rng(seed + 100), &b);
        let m = LocalModel::new(&p, &it).unwrap();
        let n = dense_newton(&p, &it, 1e-2);
        let d = full_approximate_direction(&m, 1e-2, &IndexPartition::all_inactive(&b), ApproxVariant::least_squares(DxSource::Comp))
            .unwrap();
        assert!(d.distance(&n) <= 1e-10 * n.norm());
        assert!(d.source_x.iter().all(|&s| s == Source::LeastSquares));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn partial_error_identities(seed in 0u64..10_000, n in 2usize..10, mu_exp in -8.0f64..0.0) {
        let p = problem(n, seed, BoundStyle::Mixed);
        let b = Bounds::of(&p);
        let mut r = rng(seed ^ 0xABCD);
        let it = random_iterate(&mut r, &b);
        let part = random_partition(&mut r, &b);
        let mu = 10f64.powf(mu_exp);
        let m = LocalModel::new(&p, &it).unwrap();
        let nd = dense_newton(&p, &it, mu);
        let h = p.hessian(&it.x);

        let s = dx_active(&m, mu, &part, DxSource::Schur).unwrap();
        let c = dx_active(&m, mu, &part, DxSource::Comp).unwrap();
        let (cl, cu) = dlambda_comp_partial(&m, mu, &part);
        let mut es = DVector::zeros(n);
        let mut ps = DVector::zeros(n);
        let mut ec = DVector::zeros(n);
        let mut pc = DVector::zeros(n);
        for &i in &part.a_x {
            let d = h[(i, i)] + m.ratio_l(i) + m.ratio_u(i);
            es[i] = s[i] - nd.dx[i];
            ps[i] = (0..n).filter(|&j| j != i).map(|j| h[(i, j)] * nd.dx[j]).sum::<f64>() / d;
            ec[i] = c[i] - nd.dx[i];
            pc[i] = if part.is_active_lower(i) {
                m.gap_l[i] / it.lambda_l[i] * nd.dlambda_l[i]
            } else {
                -m.gap_u[i] / it.lambda_u[i] * nd.dlambda_u[i]
            };
        }
        prop_assert!(rel_diff(&es, &ps) <= 1e-9 || (&es - &ps).amax() <= 1e-9 * nd.dx.amax());
        prop_assert!(rel_diff(&ec, &pc) <= 1e-9 || (&ec - &pc).amax() <= 1e-9 * nd.dx.amax());
        for &i in &part.i_l {
            let pred = it.lambda_l[i] / m.gap_l[i] * nd.dx[i];
            let got = cl[i] - nd.dlambda_l[i];
            prop_assert!((got - pred).abs() <= 1e-9 * (pred.abs() + cl[i].abs() + nd.dlambda_l[i].abs()));
        }
        for &i in &part.i_u {
            let pred = -it.lambda_u[i] / m.gap_u[i] * nd.dx[i];
            let got = cu[i] - nd.dlambda_u[i];
            prop_assert!((got - pred).abs() <= 1e-9 * (pred.abs() + cu[i].abs() + nd.dlambda_u[i].abs()));
        }
    }

    #[test]
    fn exact_active_dx_reproduces_newton(seed in 0u64..10_000, n in 2usize..12) {
        let p = problem(n, seed, BoundStyle::Mixed);
        let b = Bounds::of(&p);
        let mut r = rng(seed);
        let it = random_iterate(&mut r, &b);
        let part = random_partition(&mut r, &b);
        let mu = 1e-3;
        let m = LocalModel::new(&p, &it).unwrap();
        let nd = dense_newton(&p, &it, mu);
        let mut dxa = DVector::zeros(n);
        for &i in &part.a_x {
            dxa[i] = nd.dx[i];
        }
        for mode in [ActiveMultiplierSource::LeastSquares, ActiveMultiplierSource::Stationarity] {
            let d = complete_direction(&m, mu, &part, &dxa, &vec![Source::Newton; n], mode, InactiveMultiplierSource::LeastSquares)
                .unwrap();
            prop_assert!(d.distance(&nd) <= 1e-9 * nd.norm(), "{:?}: {}", mode, d.distance(&nd) / nd.norm());
        }
    }
}
