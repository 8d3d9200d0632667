//! Acceptance suite. Each criterion prints one PASS/FAIL line straight to stdout
//! (bypassing the test harness capture) and then asserts.

mod common;

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use boxipm::active_sets::{exact_partition, IndexPartition, ACTIVE_TOL, DEGENERATE_TOL};
use boxipm::approx::*;
use boxipm::harness::*;
use boxipm::ipm::*;
use boxipm::newton::Source;
use boxipm::problem::{BoundedProblem, Bounds};
use boxipm::residual::LocalModel;
use common::*;
use nalgebra::DVector;

fn report(id: u32, pass: bool, detail: String) {
    let status = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "acceptance criterion {id}: {status} | {detail}");
}

fn norm_on(v: &DVector<f64>, idx: &[usize]) -> f64 {
    idx.iter().map(|&i| v[i] * v[i]).sum::<f64>().sqrt()
}

/// Mismatch of two vectors on `idx`, relative to the larger of them and of the
/// Newton component `reference` they are derived from.
fn rel_on(a: &DVector<f64>, b: &DVector<f64>, reference: &DVector<f64>, idx: &[usize]) -> f64 {
    let diff = idx.iter().map(|&i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt();
    let scale = norm_on(a, idx).max(norm_on(b, idx)).max(norm_on(reference, idx));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn problem(n: usize, seed: u64) -> boxipm::problem::QuadraticProblem {
    generate(&GeneratorSpec { n, seed, ..Default::default() }).unwrap().problem
}

#[test]
fn criterion_1_exact_error_identities() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in [4usize, 50] {
        for seed in 0..100u64 {
            let p = problem(n, seed + 1);
            let b = Bounds::of(&p);
            let mut r = rng(seed * 31 + n as u64);
            let it = random_iterate(&mut r, &b);
            let part = random_partition(&mut r, &b);
            let mu = 10f64.powi(-((seed % 8) as i32));
            let m = LocalModel::new(&p, &it).unwrap();
            let nd = dense_newton(&p, &it, mu);
            let h = &m.hessian;

            let s = dx_active(&m, mu, &part, DxSource::Schur).unwrap();
            let c = dx_active(&m, mu, &part, DxSource::Comp).unwrap();
            let (cl, cu) = dlambda_comp_partial(&m, mu, &part);
            let (mut es, mut ps, mut ec, mut pc) = (DVector::zeros(n), DVector::zeros(n), DVector::zeros(n), DVector::zeros(n));
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
            let (mut el, mut pl, mut eu, mut pu) = (DVector::zeros(n), DVector::zeros(n), DVector::zeros(n), DVector::zeros(n));
            for &i in &part.i_l {
                el[i] = cl[i] - nd.dlambda_l[i];
                pl[i] = it.lambda_l[i] / m.gap_l[i] * nd.dx[i];
            }
            for &i in &part.i_u {
                eu[i] = cu[i] - nd.dlambda_u[i];
                pu[i] = -it.lambda_u[i] / m.gap_u[i] * nd.dx[i];
            }
            worst = worst
                .max(rel_on(&es, &ps, &nd.dx, &part.a_x))
                .max(rel_on(&ec, &pc, &nd.dx, &part.a_x))
                .max(rel_on(&el, &pl, &nd.dlambda_l, &part.i_l))
                .max(rel_on(&eu, &pu, &nd.dlambda_u, &part.i_u));
            cases += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && elapsed < Duration::from_secs(10);
    report(1, pass, format!("{cases} iterates (n = 4 and 50), max relative identity error {worst:.2e}, {:.2}s", elapsed.as_secs_f64()));
    assert!(pass);
}

#[test]
fn criterion_2_consistency_with_newton() {
    let start = Instant::now();
    let (mut worst_exact, mut worst_empty): (f64, f64) = (0.0, 0.0);
    for seed in 0..50u64 {
        let n = 5 + (seed as usize * 7) % 60;
        let p = problem(n, seed + 100);
        let b = Bounds::of(&p);
        let mut r = rng(seed);
        let it = random_iterate(&mut r, &b);
        let part = random_partition(&mut r, &b);
        let mu = 10f64.powi(-((seed % 9) as i32));
        let m = LocalModel::new(&p, &it).unwrap();
        let nd = dense_newton(&p, &it, mu);
        let mut dxa = DVector::zeros(n);
        for &i in &part.a_x {
            dxa[i] = nd.dx[i];
        }
        for mode in [ActiveMultiplierSource::LeastSquares, ActiveMultiplierSource::Stationarity] {
            let d = complete_direction(&m, mu, &part, &dxa, &vec![Source::Newton; n], mode, InactiveMultiplierSource::LeastSquares)
                .unwrap();
            worst_exact = worst_exact.max(d.distance(&nd) / nd.norm());
        }
        let empty = IndexPartition::all_inactive(&b);
        for src in [DxSource::Schur, DxSource::Comp] {
            let d = full_approximate_direction(&m, mu, &empty, ApproxVariant::least_squares(src)).unwrap();
            worst_empty = worst_empty.max(d.distance(&nd) / nd.norm());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_exact <= 1e-9 && worst_empty <= 1e-10 && elapsed < Duration::from_secs(10);
    report(
        2,
        pass,
        format!(
            "50 problems, exact dx_A max rel {worst_exact:.2e}, empty A_x max rel {worst_empty:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

const SWEEP_SEEDS: u64 = 20;

struct SweepRun {
    summary: SweepSummary,
    elapsed: Duration,
}

/// Certified suite shared by criteria 3, 4 and 5: n = 100, 20 seeds, mu from 1e-2 to 1e-8.
fn suite() -> &'static SweepRun {
    static RUN: OnceLock<SweepRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let seeds: Vec<u64> = (1..=SWEEP_SEEDS).collect();
        let mus = mu_ladder(1e-2, 1e-8, 0.1).unwrap();
        let spec = GeneratorSpec { n: 100, ..Default::default() };
        let summary = sweep_seeds(&spec, &seeds, &mus, &SolverConfig::default(), 0).unwrap();
        SweepRun { summary, elapsed: start.elapsed() }
    })
}

#[test]
fn criterion_3_asymptotic_slopes() {
    let run = suite();
    let bands = [
        (ErrorField::DxActiveSchur, 1.8, 2.5),
        (ErrorField::DxActiveComp, 1.8, 2.5),
        (ErrorField::Total, 1.8, 2.5),
        (ErrorField::DlambdaInactiveLs, 2.6, 3.5),
    ];
    let mut pass = run.elapsed < Duration::from_secs(120);
    let mut parts = Vec::new();
    for (field, lo, hi) in bands {
        let slopes: Vec<f64> =
            run.summary.per_seed.iter().map(|recs| fit_slope(recs, field, 1e-8, 1e-4).unwrap()).collect();
        let (m, s) = mean_std(&slopes);
        let inside = slopes.iter().all(|&k| (lo..=hi).contains(&k));
        pass &= inside;
        parts.push(format!("{} {m:.3}+-{s:.3} in [{lo},{hi}]: {inside}", field.column()));
    }
    report(3, pass, format!("{} seeds; {}; {:.1}s", run.summary.seeds.len(), parts.join("; "), run.elapsed.as_secs_f64()));
    assert!(pass);
}

#[test]
fn criterion_4_progress_parity() {
    let run = suite();
    let (mut ok, mut total) = (0, 0);
    for recs in &run.summary.per_seed {
        for r in recs.iter().filter(|r| r.mu <= 1e-5 * (1.0 + 1e-9)) {
            let n = r.get(ErrorField::ProgressNewton);
            total += 1;
            if r.get(ErrorField::ProgressSchur) <= 10.0 * n && r.get(ErrorField::ProgressComp) <= 10.0 * n {
                ok += 1;
            }
        }
    }
    let pass = ok * 100 >= 95 * total;
    report(4, pass, format!("{ok}/{total} (seed, mu) pairs within a factor 10 of Newton for mu <= 1e-5"));
    assert!(pass);
}

#[test]
fn criterion_5_intermediate_step() {
    let run = suite();
    let (mut ok, mut total) = (0, 0);
    for recs in &run.summary.per_seed {
        for r in recs.iter().filter(|r| r.mu <= 1e-6 * (1.0 + 1e-9)) {
            total += 1;
            if r.dist_intermediate <= r.dist_current {
                ok += 1;
            }
        }
    }
    let pass = ok * 100 >= 95 * total;
    report(5, pass, format!("{ok}/{total} trials with ||z_N - z_E|| <= ||z_N - z|| for mu <= 1e-6"));
    assert!(pass);
}

const DRIVER_SEEDS: u64 = 50;

fn driver_n(seed: u64) -> usize {
    20 + (seed as usize * 53) % 181
}

struct DriverRun {
    seed: u64,
    certified: CertifiedProblem,
    newton: RunTrace,
    approx: RunTrace,
    intermediate: RunTrace,
    higher: RunTrace,
}

fn driver_suite() -> &'static (Vec<DriverRun>, Duration) {
    static RUN: OnceLock<(Vec<DriverRun>, Duration)> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let seeds: Vec<u64> = (1..=DRIVER_SEEDS).collect();
        let cfg = SolverConfig::default();
        let runs = run_seeds(&seeds, 0, |seed| {
            let certified = generate(&GeneratorSpec { n: driver_n(seed), seed, ..Default::default() })?;
            let p = &certified.problem;
            Ok(DriverRun {
                seed,
                newton: solve_reference(p, &cfg)?,
                approx: solve_approx(p, &cfg, DxSource::Schur)?,
                intermediate: solve(p, Algorithm::Intermediate(PartialStepRule::default()), &cfg)?,
                higher: solve(p, Algorithm::HigherOrder(PartialStepRule::default()), &cfg)?,
                certified,
            })
        })
        .unwrap();
        (runs.into_iter().map(|(_, r)| r).collect(), start.elapsed())
    })
}

#[test]
fn criterion_6_driver_convergence_and_parity() {
    let (runs, elapsed) = driver_suite();
    let mut converged = 0;
    let mut max_iters = 0;
    let mut parity = 0;
    let mut ix_ok = 0;
    let mut failures = Vec::new();
    for r in runs {
        let t = &r.newton;
        // Initial-point Newton steps count toward the budget as well.
        let total_iters = t.iterations() + t.initial_steps;
        max_iters = max_iters.max(total_iters);
        if t.outcome.is_converged() && t.final_kkt <= 1e-10 && total_iters <= 60 {
            converged += 1;
        } else {
            failures.push(format!("seed {} newton {:?}", r.seed, t.outcome));
        }
        let newton_dec = t.decades();
        let approx_dec = r.approx.decades();
        let matched = newton_dec.iter().filter(|d| d.mu <= 1e-6 * (1.0 + 1e-9)).all(|d| {
            let other = approx_dec.iter().find(|e| (e.mu / d.mu - 1.0).abs() < 1e-9).map_or(0, |e| e.iterations);
            other.abs_diff(d.iterations) <= 1
        });
        if matched && r.approx.outcome.is_converged() {
            parity += 1;
        }
        let c = &r.certified;
        let (_, degenerate) =
            exact_partition(&c.bounds(), &c.x_star, &c.lambda_l_star, &c.lambda_u_star, ACTIVE_TOL, DEGENERATE_TOL);
        let limit = (c.partition_star.i_x.len() + degenerate.len()) as f64;
        let n = c.problem.dim() as f64;
        let at_1e8 = approx_dec.iter().find(|d| (d.mu / 1e-8 - 1.0).abs() < 1e-9).and_then(|d| d.mean_inactive);
        match at_1e8 {
            Some(m) if m <= n && m <= limit + 1e-12 => ix_ok += 1,
            other => failures.push(format!("seed {} mean |I_x| at 1e-8 {:?} limit {limit}", r.seed, other)),
        }
    }
    let total = runs.len();
    let pass = converged == total && parity * 100 >= 90 * total && ix_ok == total && *elapsed < Duration::from_secs(120);
    report(
        6,
        pass,
        format!(
            "Newton converged {converged}/{total} (max {max_iters} iterations incl. initial steps); aNS per-decade parity {parity}/{total}; \
             mean |I_x| bound {ix_ok}/{total}; {:.1}s{}",
            elapsed.as_secs_f64(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_newton_like_totals() {
    let (runs, _) = driver_suite();
    let (mut both, mut higher_le) = (0, 0);
    for r in runs {
        let count = |t: &RunTrace| t.iterations_in(1e-10, 1e-5);
        let (n, i, h) = (count(&r.newton), count(&r.intermediate), count(&r.higher));
        let ok = r.intermediate.outcome.is_converged() && r.higher.outcome.is_converged();
        if ok && i <= n && h <= n {
            both += 1;
        }
        if ok && h <= i {
            higher_le += 1;
        }
    }
    let total = runs.len();
    let pass = both * 100 >= 90 * total && higher_le * 100 >= 75 * total;
    report(
        7,
        pass,
        format!("mu in [1e-10, 1e-5]: intermediate and higher-order <= Newton on {both}/{total} seeds; higher-order <= intermediate on {higher_le}/{total}"),
    );
    assert!(pass);
}

fn run_cli(args: &[&str]) -> i32 {
    let mut out = Vec::new();
    let mut err = Vec::new();
    boxipm::cli::run(args.iter().copied(), &mut out, &mut err)
}

#[test]
fn criterion_8_determinism_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for tag in ["a", "b"] {
        let sweep = dir.path().join(format!("sweep-{tag}"));
        let table = dir.path().join(format!("table-{tag}"));
        let s = sweep.to_str().unwrap();
        let t = table.to_str().unwrap();
        assert_eq!(run_cli(&["boxipm", "sweep", "--seeds", "3", "--n", "40", "--mus", "1e-2:1e-6", "--jobs", "3", "--out", s]), 0);
        assert_eq!(run_cli(&["boxipm", "table", "--seeds", "3", "--n", "40", "--mus", "1e-1:1e-6", "--jobs", "2", "--out", t]), 0);
        let read = |p: std::path::PathBuf| std::fs::read(p).unwrap();
        let strip = |bytes: Vec<u8>, path: &str| String::from_utf8(bytes).unwrap().replace(path, "OUT");
        files.push([
            strip(read(sweep.join("sweep.csv")), s),
            strip(read(sweep.join("sweep_errors.svg")), s),
            strip(read(sweep.join("sweep_progress.svg")), s),
            strip(read(table.join("table.csv")), t),
        ]);
    }
    let identical = files[0] == files[1];
    let header = |csv: &str| csv.lines().find(|l| !l.starts_with('#')).unwrap_or("").to_string();
    let sweep_schema = header(&files[0][0])
        == "mu,err_dxA_S,err_dxA_C,err_dxI_ls,err_dlA_ls,err_dlA_b,err_dlI_ls,err_dlI_C,err_total,F_z,F_zS,F_zC,F_zN";
    let table_schema = header(&files[0][3]) == "problem,algorithm,mu_decade,iters,mean_Ix,fallback";
    let rows_ok = files[0][0].lines().filter(|l| !l.starts_with('#')).all(|l| l.split(',').count() == 13)
        && files[0][3].lines().filter(|l| !l.starts_with('#')).all(|l| l.split(',').count() == 6);
    let svg_ok = files[0][1].contains(r#"width="640" height="480""#);
    let pass = identical && sweep_schema && table_schema && rows_ok && svg_ok;
    report(
        8,
        pass,
        format!(
            "byte-identical reruns: {identical}; sweep schema: {sweep_schema}; table schema: {table_schema}; \
             row widths: {rows_ok}; svg 640x480: {svg_ok}"
        ),
    );
    assert!(pass);
}
