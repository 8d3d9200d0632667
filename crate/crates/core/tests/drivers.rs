mod common;

use boxipm::harness::{generate, GeneratorSpec};
use boxipm::ipm::*;
use boxipm::problem::{BoundedProblem, Bounds, CallbackProblem, QuadraticProblem};
use boxipm::residual::residual;
use common::corpus;
use nalgebra::{DMatrix, DVector};

fn load(name: &str) -> QuadraticProblem {
    QuadraticProblem::parse(&std::fs::read_to_string(corpus(name)).unwrap()).unwrap()
}

fn all_algorithms() -> Vec<Algorithm> {
    let mut v = vec![Algorithm::Newton, Algorithm::ApproxSchur, Algorithm::ApproxComp];
    for r in PartialStepRule::ALL {
        v.push(Algorithm::Intermediate(r));
        v.push(Algorithm::HigherOrder(r));
    }
    v
}

fn check_trace(problem: &dyn BoundedProblem, t: &RunTrace) {
    let cfg = &t.config;
    t.final_iterate.check_interior(&Bounds::of(problem)).unwrap();
    for w in t.records.windows(2) {
        let r = w[1].mu / w[0].mu;
        assert!((r - 1.0).abs() < 1e-12 || (r - cfg.sigma).abs() < 1e-12, "mu ratio {r}");
    }
    for r in &t.records {
        assert!(r.alpha_p > 0.0 && r.alpha_p <= 1.0 && r.alpha_d > 0.0 && r.alpha_d <= 1.0);
        assert!(r.mu >= cfg.mu_min * (1.0 - 1e-9));
    }
    if t.outcome.is_converged() {
        assert!(t.final_kkt <= cfg.epsilon);
        assert_eq!(t.records.last().unwrap().f_0, t.final_kkt);
    }
}

#[test]
fn interior_minimizer_found_by_every_driver() {
    let p = load("qp_interior.txt");
    let x_star = DVector::from_column_slice(&[1.0, -1.0, 0.5]);
    for alg in all_algorithms() {
        let t = solve(&p, alg, &SolverConfig::default()).unwrap();
        assert!(t.outcome.is_converged(), "{alg}: {:?}", t.outcome);
        assert!((&t.final_iterate.x - &x_star).amax() < 1e-6, "{alg}");
        check_trace(&p, &t);
    }
}

#[test]
fn mixed_bounds_solution_and_multipliers() {
    let p = load("qp_mixed.txt");
    let x_star = DVector::from_column_slice(&[0.0, 0.5, 1.0, -0.3]);
    for alg in all_algorithms() {
        let t = solve(&p, alg, &SolverConfig::default()).unwrap();
        assert!(t.outcome.is_converged(), "{alg}: {:?}", t.outcome);
        let z = &t.final_iterate;
        assert!((&z.x - &x_star).amax() < 1e-6, "{alg}");
        assert!((z.lambda_l[0] - 1.0).abs() < 1e-6);
        assert!((z.lambda_u[2] - 2.0).abs() < 1e-6);
        assert!(z.lambda_l[3] < 1e-6 && z.lambda_u[3] < 1e-6);
        check_trace(&p, &t);
    }
}

#[test]
fn degenerate_problem_still_converges() {
    let p = load("qp_degenerate.txt");
    for alg in all_algorithms() {
        let t = solve(&p, alg, &SolverConfig::default()).unwrap();
        assert!(t.outcome.is_converged(), "{alg}: {:?}", t.outcome);
        assert!(t.final_iterate.x.amax() < 1e-4, "{alg}: {}", t.final_iterate.x);
        assert!((t.final_iterate.lambda_l[1] - 1.0).abs() < 1e-6);
        check_trace(&p, &t);
    }
}

#[test]
fn generated_problem_matches_certificate() {
    let c = generate(&GeneratorSpec { n: 50, seed: 1, ..Default::default() }).unwrap();
    for alg in all_algorithms() {
        let t = solve(&c.problem, alg, &SolverConfig::default()).unwrap();
        assert!(t.outcome.is_converged(), "{alg}: {:?}", t.outcome);
        assert!((&t.final_iterate.x - &c.x_star).amax() < 1e-6, "{alg}");
        check_trace(&c.problem, &t);
    }
}

#[test]
fn nonquadratic_objective() {
    // f = sum exp(x_i) - 2 x_i on [-1, 0.5]: unconstrained minimizer ln 2 > 0.5 so
    // every upper bound is active with multiplier 2 - e^0.5.
    let n = 5;
    let p = CallbackProblem::new(
        DVector::from_element(n, -1.0),
        DVector::from_element(n, 0.5),
        |x| x.iter().map(|v| v.exp() - 2.0 * v).sum(),
        |x| x.map(|v| v.exp() - 2.0),
        |x| DMatrix::from_diagonal(&x.map(f64::exp)),
    );
    for alg in all_algorithms() {
        let t = solve(&p, alg, &SolverConfig::default()).unwrap();
        assert!(t.outcome.is_converged(), "{alg}");
        assert!(t.final_iterate.x.iter().all(|v| (v - 0.5).abs() < 1e-6));
        assert!(t.final_iterate.lambda_u.iter().all(|v| (v - (2.0 - 0.5f64.exp())).abs() < 1e-6));
        check_trace(&p, &t);
    }
}

#[test]
fn runs_are_deterministic() {
    let c = generate(&GeneratorSpec { n: 40, seed: 7, ..Default::default() }).unwrap();
    for alg in all_algorithms() {
        let a = solve(&c.problem, alg, &SolverConfig::default()).unwrap();
        let b = solve(&c.problem, alg, &SolverConfig::default()).unwrap();
        assert_eq!(a, b, "{alg}");
    }
}

#[test]
fn initial_point_reaches_first_neighborhood() {
    for seed in 1..=10 {
        let c = generate(&GeneratorSpec { n: 30, seed, ..Default::default() }).unwrap();
        let (z, steps) = initial_point_with_steps(&c.problem, 100.0).unwrap();
        assert!(steps <= MAX_INIT_STEPS);
        assert!(residual(&c.problem, &z, 100.0).unwrap().norm < 100.0);
        z.check_interior(&c.bounds()).unwrap();
    }
}

#[test]
fn iteration_cap_and_fallback() {
    // One iteration per mu is too few for the approximate method here.
    let c = generate(&GeneratorSpec { n: 60, seed: 3, ..Default::default() }).unwrap();
    let off = SolverConfig { max_iters_per_mu: 1, newton_fallback: Some(false), ..Default::default() };
    let t = solve(&c.problem, Algorithm::ApproxComp, &off).unwrap();
    assert_eq!(t.outcome, Outcome::IterationCap);
    assert_eq!(t.fallback_count, 0);

    let on = SolverConfig { newton_fallback: Some(true), ..off };
    let t = solve(&c.problem, Algorithm::ApproxComp, &on).unwrap();
    assert!(t.fallback_count > 0);
    assert_eq!(t.failed_mus.len(), t.fallback_count);
    assert!(t.records.iter().any(|r| r.kind == StepKind::Fallback));
    check_trace(&c.problem, &t);
}

#[test]
fn invalid_config_rejected() {
    let p = load("qp_interior.txt");
    for cfg in [
        SolverConfig { sigma: 1.0, ..Default::default() },
        SolverConfig { boundary_fraction: 1.0, ..Default::default() },
        SolverConfig { mu0: -1.0, ..Default::default() },
    ] {
        assert!(solve(&p, Algorithm::Newton, &cfg).is_err());
    }
}
