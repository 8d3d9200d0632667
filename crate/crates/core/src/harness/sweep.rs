//! Error sweep: approximation errors against the Newton direction along the
//! barrier trajectory, using the true active sets of a certified problem.

use nalgebra::DVector;

use crate::active_sets::IndexPartition;
use crate::approx::{
    dlambda_comp_partial, dx_active, full_approximate_direction, partial_step_direction, recover_active_multipliers,
    ActiveMultiplierSource, ApproxVariant, DxSource,
};
use crate::error::{Error, Result};
use crate::harness::generator::CertifiedProblem;
use crate::ipm::{initial_point_with_steps, warm_start, SolverConfig};
use crate::newton::{apply_step, newton_direction_at, Direction};
use crate::problem::BoundedProblem;
use crate::residual::{Iterate, LocalModel};

/// One column of the sweep output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorField {
    DxActiveSchur,
    DxActiveComp,
    DxInactiveLs,
    DlambdaActiveLs,
    DlambdaActiveB,
    DlambdaInactiveLs,
    DlambdaInactiveComp,
    Total,
    ProgressCurrent,
    ProgressSchur,
    ProgressComp,
    ProgressNewton,
}

impl ErrorField {
    pub const ALL: [ErrorField; 12] = [
        Self::DxActiveSchur,
        Self::DxActiveComp,
        Self::DxInactiveLs,
        Self::DlambdaActiveLs,
        Self::DlambdaActiveB,
        Self::DlambdaInactiveLs,
        Self::DlambdaInactiveComp,
        Self::Total,
        Self::ProgressCurrent,
        Self::ProgressSchur,
        Self::ProgressComp,
        Self::ProgressNewton,
    ];

    pub const ERRORS: [ErrorField; 8] = [
        Self::DxActiveSchur,
        Self::DxActiveComp,
        Self::DxInactiveLs,
        Self::DlambdaActiveLs,
        Self::DlambdaActiveB,
        Self::DlambdaInactiveLs,
        Self::DlambdaInactiveComp,
        Self::Total,
    ];

    pub const PROGRESS: [ErrorField; 4] =
        [Self::ProgressCurrent, Self::ProgressSchur, Self::ProgressComp, Self::ProgressNewton];

    pub fn column(self) -> &'static str {
        match self {
            Self::DxActiveSchur => "err_dxA_S",
            Self::DxActiveComp => "err_dxA_C",
            Self::DxInactiveLs => "err_dxI_ls",
            Self::DlambdaActiveLs => "err_dlA_ls",
            Self::DlambdaActiveB => "err_dlA_b",
            Self::DlambdaInactiveLs => "err_dlI_ls",
            Self::DlambdaInactiveComp => "err_dlI_C",
            Self::Total => "err_total",
            Self::ProgressCurrent => "F_z",
            Self::ProgressSchur => "F_zS",
            Self::ProgressComp => "F_zC",
            Self::ProgressNewton => "F_zN",
        }
    }

    pub fn from_column(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.column() == name)
    }
}

/// Errors of every approximation family at one `mu`, plus progress measures
/// `||F_{mu+}||` at the current point and after each kind of step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRecord {
    pub mu: f64,
    pub values: [f64; 12],
    /// `||z_+^N - z^E||` with unit steps.
    pub dist_intermediate: f64,
    /// `||z_+^N - z||` with a unit step.
    pub dist_current: f64,
}

impl ErrorRecord {
    pub fn get(&self, field: ErrorField) -> f64 {
        let k = ErrorField::ALL.iter().position(|&f| f == field).expect("field listed in ALL");
        self.values[k]
    }
}

fn masked_norm(a: &DVector<f64>, b: &DVector<f64>, idx: &[usize]) -> f64 {
    idx.iter().map(|&i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

fn pair_norm(
    (al, au): (&DVector<f64>, &DVector<f64>),
    newton: &Direction,
    idx_l: &[usize],
    idx_u: &[usize],
) -> f64 {
    masked_norm(al, &newton.dlambda_l, idx_l).hypot(masked_norm(au, &newton.dlambda_u, idx_u))
}

fn progress<P: BoundedProblem + ?Sized>(
    problem: &P,
    model: &LocalModel,
    d: &Direction,
    mu_plus: f64,
    fraction: f64,
) -> Result<f64> {
    let (next, _) = apply_step(&model.iterate, d, &model.bounds, fraction)?;
    Ok(LocalModel::with_bounds(problem, model.bounds.clone(), &next)?.residual(mu_plus).norm)
}

/// Errors of all families at iterate `z` for target `mu_plus`, with the given partition.
pub fn errors_at<P: BoundedProblem + ?Sized>(
    problem: &P,
    partition: &IndexPartition,
    z: &Iterate,
    mu: f64,
    mu_plus: f64,
    fraction: f64,
) -> Result<ErrorRecord> {
    let model = LocalModel::new(problem, z)?;
    let newton = newton_direction_at(&model, mu_plus)?;
    let p = partition;
    let dx_s = dx_active(&model, mu_plus, p, DxSource::Schur)?;
    let dx_c = dx_active(&model, mu_plus, p, DxSource::Comp)?;
    let full_s = full_approximate_direction(&model, mu_plus, p, ApproxVariant::least_squares(DxSource::Schur))?;
    let full_c = full_approximate_direction(&model, mu_plus, p, ApproxVariant::least_squares(DxSource::Comp))?;
    let (bl, bu) = recover_active_multipliers(
        &model,
        mu_plus,
        p,
        &full_s.dx,
        &full_s.dlambda_l,
        &full_s.dlambda_u,
        ActiveMultiplierSource::Stationarity,
    );
    let (cl, cu) = dlambda_comp_partial(&model, mu_plus, p);
    let partial = partial_step_direction(&model, mu_plus, p, DxSource::Schur, true)?;

    let values = [
        masked_norm(&dx_s, &newton.dx, &p.a_x),
        masked_norm(&dx_c, &newton.dx, &p.a_x),
        masked_norm(&full_s.dx, &newton.dx, &p.i_x),
        pair_norm((&full_s.dlambda_l, &full_s.dlambda_u), &newton, &p.a_l, &p.a_u),
        pair_norm((&bl, &bu), &newton, &p.a_l, &p.a_u),
        pair_norm((&full_s.dlambda_l, &full_s.dlambda_u), &newton, &p.i_l, &p.i_u),
        pair_norm((&cl, &cu), &newton, &p.i_l, &p.i_u),
        full_s.distance(&newton),
        model.residual(mu_plus).norm,
        progress(problem, &model, &full_s, mu_plus, fraction)?,
        progress(problem, &model, &full_c, mu_plus, fraction)?,
        progress(problem, &model, &newton, mu_plus, fraction)?,
    ];
    Ok(ErrorRecord { mu, values, dist_intermediate: newton.distance(&partial), dist_current: newton.norm() })
}

/// Follows the trajectory with Newton steps and records errors at each `mu` in
/// `mus` (strictly decreasing, at most `config.mu0`). At each `mu` the iterate
/// satisfies `||F_mu|| < mu` and directions target `sigma * mu`.
pub fn error_sweep(certified: &CertifiedProblem, mus: &[f64], config: &SolverConfig) -> Result<Vec<ErrorRecord>> {
    config.validate()?;
    if mus.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("sweep values of mu must be strictly decreasing".into()));
    }
    if let Some(&first) = mus.first() {
        if !(first > 0.0 && first <= config.mu0) || !(mus[mus.len() - 1] > 0.0) {
            return Err(Error::InvalidArgument(format!("sweep values of mu must lie in (0, {}]", config.mu0)));
        }
    }
    let problem = &certified.problem;
    let fraction = config.boundary_fraction;
    let cap = config.max_iters_per_mu;
    let (mut z, _) = initial_point_with_steps(problem, config.mu0)?;
    let mut level = config.mu0;
    let mut out = Vec::with_capacity(mus.len());
    for &mu in mus {
        while level > mu * (1.0 + 1e-12) {
            level = f64::max(level * config.sigma, mu);
            z = warm_start(problem, z, level, fraction, cap)?.0;
        }
        z = warm_start(problem, z, mu, fraction, cap)?.0;
        out.push(errors_at(problem, &certified.partition_star, &z, mu, config.sigma * mu, fraction)?);
    }
    Ok(out)
}

/// Per-`mu` mean and standard deviation over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub seeds: Vec<u64>,
    pub per_seed: Vec<Vec<ErrorRecord>>,
    pub mean: Vec<ErrorRecord>,
    pub std: Vec<ErrorRecord>,
}

impl SweepSummary {
    /// Aggregates runs that share the same `mu` list. Seeds are sorted first so
    /// the result does not depend on completion order.
    pub fn aggregate(mut runs: Vec<(u64, Vec<ErrorRecord>)>) -> Result<Self> {
        runs.sort_by_key(|(s, _)| *s);
        let len = runs.first().map_or(0, |(_, r)| r.len());
        if runs.iter().any(|(_, r)| r.len() != len) {
            return Err(Error::InvalidArgument("sweep runs have different lengths".into()));
        }
        let k = runs.len() as f64;
        let mut mean = Vec::with_capacity(len);
        let mut std = Vec::with_capacity(len);
        for j in 0..len {
            let mu = runs[0].1[j].mu;
            let col = |f: &dyn Fn(&ErrorRecord) -> f64| -> (f64, f64) {
                let m = runs.iter().map(|(_, r)| f(&r[j])).sum::<f64>() / k;
                let v = runs.iter().map(|(_, r)| (f(&r[j]) - m).powi(2)).sum::<f64>() / k;
                (m, v.sqrt())
            };
            let mut mv = [0.0; 12];
            let mut sv = [0.0; 12];
            for c in 0..12 {
                (mv[c], sv[c]) = col(&|r: &ErrorRecord| r.values[c]);
            }
            let (mi, si) = col(&|r: &ErrorRecord| r.dist_intermediate);
            let (mc, sc) = col(&|r: &ErrorRecord| r.dist_current);
            mean.push(ErrorRecord { mu, values: mv, dist_intermediate: mi, dist_current: mc });
            std.push(ErrorRecord { mu, values: sv, dist_intermediate: si, dist_current: sc });
        }
        let (seeds, per_seed) = runs.into_iter().unzip();
        Ok(Self { seeds, per_seed, mean, std })
    }
}
