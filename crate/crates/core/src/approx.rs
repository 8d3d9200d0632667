//! Approximate Newton directions built from an active/inactive partition.
//!
//! Partial approximations are closed-form per index: `dx^S` keeps only the
//! diagonal of the condensed system, `dx^C` and `dlambda^C` drop the vanishing
//! coefficient of a complementarity row. A full approximation fixes `dx` on the
//! active set from one of those, solves the condensed system restricted to the
//! inactive set, and recovers the multipliers row by row.

use nalgebra::{DMatrix, DVector};

use crate::active_sets::IndexPartition;
use crate::error::{Error, Result};
use crate::newton::{Direction, Source};
use crate::residual::LocalModel;

/// Approximation used for `dx` on the active set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DxSource {
    Schur,
    Comp,
}

/// Recovery of active multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActiveMultiplierSource {
    /// Least-squares fit of the stationarity and complementarity rows.
    LeastSquares,
    /// Stationarity row only.
    Stationarity,
}

/// Recovery of inactive multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InactiveMultiplierSource {
    /// Complementarity row with the full `dx`.
    LeastSquares,
    /// Complementarity row with the `dx` term dropped.
    Comp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ApproxVariant {
    pub dx_a_source: DxSource,
    pub dlambda_a_source: ActiveMultiplierSource,
    pub dlambda_i_source: InactiveMultiplierSource,
}

impl ApproxVariant {
    pub const fn new(
        dx_a_source: DxSource,
        dlambda_a_source: ActiveMultiplierSource,
        dlambda_i_source: InactiveMultiplierSource,
    ) -> Self {
        Self { dx_a_source, dlambda_a_source, dlambda_i_source }
    }

    /// `(dx_source, ls, ls)`, the variant used by the approximate-direction driver.
    pub const fn least_squares(dx_a_source: DxSource) -> Self {
        Self::new(dx_a_source, ActiveMultiplierSource::LeastSquares, InactiveMultiplierSource::LeastSquares)
    }
}

impl From<DxSource> for Source {
    fn from(s: DxSource) -> Self {
        match s {
            DxSource::Schur => Source::Schur,
            DxSource::Comp => Source::Comp,
        }
    }
}

fn check_mu(mu_plus: f64) -> Result<()> {
    if mu_plus > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("direction target mu must be positive, got {mu_plus}")))
    }
}

fn check_partition(model: &LocalModel, partition: &IndexPartition) -> Result<()> {
    if partition.dim() == model.dim() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "partition has dimension {}, problem has {}",
            partition.dim(),
            model.dim()
        )))
    }
}

/// Diagonal of the condensed matrix at index `i`.
fn condensed_diagonal(model: &LocalModel, i: usize) -> f64 {
    model.hessian[(i, i)] + model.ratio_l(i) + model.ratio_u(i)
}

/// Right-hand side of the condensed system at index `i`.
fn condensed_rhs(model: &LocalModel, i: usize, mu_plus: f64) -> f64 {
    -model.gradient[i] + model.barrier_l(i, mu_plus) - model.barrier_u(i, mu_plus)
}

/// Schur-based `dx_i^S` for each requested index, in the order given.
pub fn dx_schur_partial(model: &LocalModel, mu_plus: f64, indices: &[usize]) -> Result<Vec<f64>> {
    indices
        .iter()
        .map(|&i| {
            let h = model.hessian[(i, i)];
            let den = condensed_diagonal(model, i);
            if den.abs() < 1e-14 * (1.0 + h.abs()) {
                return Err(Error::ZeroDenominator(i));
            }
            Ok(condensed_rhs(model, i, mu_plus) / den)
        })
        .collect()
}

/// Complementarity-based `dx_i^C` on `a_l` and `a_u`; zero elsewhere.
pub fn dx_comp_partial(model: &LocalModel, mu_plus: f64, partition: &IndexPartition) -> DVector<f64> {
    let it = &model.iterate;
    let mut dx = DVector::zeros(model.dim());
    for &i in &partition.a_l {
        dx[i] = -model.gap_l[i] + mu_plus / it.lambda_l[i];
    }
    for &i in &partition.a_u {
        dx[i] = model.gap_u[i] - mu_plus / it.lambda_u[i];
    }
    dx
}

/// Complementarity-based `(dlambda_l^C, dlambda_u^C)` on `i_l` and `i_u`; zero elsewhere.
pub fn dlambda_comp_partial(
    model: &LocalModel,
    mu_plus: f64,
    partition: &IndexPartition,
) -> (DVector<f64>, DVector<f64>) {
    let it = &model.iterate;
    let n = model.dim();
    let mut dl = DVector::zeros(n);
    let mut du = DVector::zeros(n);
    for &i in &partition.i_l {
        dl[i] = -it.lambda_l[i] + mu_plus / model.gap_l[i];
    }
    for &i in &partition.i_u {
        du[i] = -it.lambda_u[i] + mu_plus / model.gap_u[i];
    }
    (dl, du)
}

/// `dx` on the active set from the chosen partial approximation, zero elsewhere.
pub fn dx_active(model: &LocalModel, mu_plus: f64, partition: &IndexPartition, source: DxSource) -> Result<DVector<f64>> {
    match source {
        DxSource::Comp => Ok(dx_comp_partial(model, mu_plus, partition)),
        DxSource::Schur => {
            let vals = dx_schur_partial(model, mu_plus, &partition.a_x)?;
            let mut dx = DVector::zeros(model.dim());
            for (&i, v) in partition.a_x.iter().zip(vals) {
                dx[i] = v;
            }
            Ok(dx)
        }
    }
}

/// Per-index choice between the two active approximations. Returns the values
/// and the source used at each active index.
pub fn dx_active_mixed<F>(
    model: &LocalModel,
    mu_plus: f64,
    partition: &IndexPartition,
    mut choose: F,
) -> Result<(DVector<f64>, Vec<Source>)>
where
    F: FnMut(usize) -> DxSource,
{
    let comp = dx_comp_partial(model, mu_plus, partition);
    let mut dx = DVector::zeros(model.dim());
    let mut sources = vec![Source::Zero; model.dim()];
    for &i in &partition.a_x {
        let s = choose(i);
        dx[i] = match s {
            DxSource::Comp => comp[i],
            DxSource::Schur => dx_schur_partial(model, mu_plus, &[i])?[0],
        };
        sources[i] = s.into();
    }
    Ok((dx, sources))
}

/// Solves the condensed system restricted to `i_x` with `dx` fixed on `a_x`:
/// `(H_II + D_I) dx_I = -grad_I - H_IA dx_A + mu/(x-l) - mu/(u-x)`.
///
/// Returns the full `dx`: `dx_active` on `a_x` and the reduced solution on `i_x`.
pub fn reduced_schur_solve(
    model: &LocalModel,
    mu_plus: f64,
    partition: &IndexPartition,
    dx_active: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_mu(mu_plus)?;
    check_partition(model, partition)?;
    let n = model.dim();
    let mut dx = DVector::zeros(n);
    for &i in &partition.a_x {
        dx[i] = dx_active[i];
    }
    let ix = &partition.i_x;
    if ix.is_empty() {
        return Ok(dx);
    }
    let m = ix.len();
    let h = &model.hessian;
    let mut mat = DMatrix::zeros(m, m);
    let mut rhs = DVector::zeros(m);
    for (r, &i) in ix.iter().enumerate() {
        for (c, &j) in ix.iter().enumerate() {
            mat[(r, c)] = h[(i, j)];
        }
        mat[(r, r)] += model.ratio_l(i) + model.ratio_u(i);
        let coupling: f64 = partition.a_x.iter().map(|&j| h[(i, j)] * dx[j]).sum();
        rhs[r] = condensed_rhs(model, i, mu_plus) - coupling;
    }
    let sol = mat.cholesky().ok_or(Error::IndefiniteReduced)?.solve(&rhs);
    for (r, &i) in ix.iter().enumerate() {
        dx[i] = sol[r];
    }
    Ok(dx)
}

/// Multiplier steps on `i_l` and `i_u` from the complementarity rows with the full `dx`.
pub fn recover_inactive_multipliers(
    model: &LocalModel,
    mu_plus: f64,
    partition: &IndexPartition,
    dx: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let it = &model.iterate;
    let n = model.dim();
    let mut dl = DVector::zeros(n);
    let mut du = DVector::zeros(n);
    for &i in &partition.i_l {
        dl[i] = -it.lambda_l[i] + (mu_plus - it.lambda_l[i] * dx[i]) / model.gap_l[i];
    }
    for &i in &partition.i_u {
        du[i] = -it.lambda_u[i] + (mu_plus + it.lambda_u[i] * dx[i]) / model.gap_u[i];
    }
    (dl, du)
}

/// Multiplier steps on `a_l` and `a_u`, given the full `dx` and the inactive
/// multiplier steps (entries on `i_l`/`i_u` of `dlambda_l`/`dlambda_u`).
///
/// Returns vectors holding only the active entries.
pub fn recover_active_multipliers(
    model: &LocalModel,
    mu_plus: f64,
    partition: &IndexPartition,
    dx: &DVector<f64>,
    dlambda_l: &DVector<f64>,
    dlambda_u: &DVector<f64>,
    mode: ActiveMultiplierSource,
) -> (DVector<f64>, DVector<f64>) {
    let it = &model.iterate;
    let n = model.dim();
    let h = &model.hessian;
    // Stationarity residual of row i with the active multiplier step left out.
    let row = |i: usize| -> f64 {
        let mut r = model.gradient[i] - it.lambda_l[i] + it.lambda_u[i] + (0..n).map(|j| h[(i, j)] * dx[j]).sum::<f64>();
        if partition.is_inactive_lower(i) {
            r -= dlambda_l[i];
        }
        if partition.is_inactive_upper(i) {
            r += dlambda_u[i];
        }
        r
    };
    let mut al = DVector::zeros(n);
    let mut au = DVector::zeros(n);
    for &i in &partition.a_l {
        let r = row(i);
        al[i] = match mode {
            ActiveMultiplierSource::Stationarity => r,
            ActiveMultiplierSource::LeastSquares => {
                let g = model.gap_l[i];
                let q = it.lambda_l[i] * g - mu_plus + it.lambda_l[i] * dx[i];
                (r - g * q) / (1.0 + g * g)
            }
        };
    }
    for &i in &partition.a_u {
        let r = row(i);
        au[i] = match mode {
            ActiveMultiplierSource::Stationarity => -r,
            ActiveMultiplierSource::LeastSquares => {
                let g = model.gap_u[i];
                let q = it.lambda_u[i] * g - mu_plus - it.lambda_u[i] * dx[i];
                -(r + g * q) / (1.0 + g * g)
            }
        };
    }
    (al, au)
}

/// Completes a direction from given active `dx` values: reduced solve on `i_x`,
/// then inactive and active multiplier recovery.
pub fn complete_direction(
    model: &LocalModel,
    mu_plus: f64,
    partition: &IndexPartition,
    dx_active: &DVector<f64>,
    dx_active_sources: &[Source],
    dlambda_a_source: ActiveMultiplierSource,
    dlambda_i_source: InactiveMultiplierSource,
) -> Result<Direction> {
    let n = model.dim();
    let dx = reduced_schur_solve(model, mu_plus, partition, dx_active)?;
    let (mut dl, mut du) = match dlambda_i_source {
        InactiveMultiplierSource::LeastSquares => recover_inactive_multipliers(model, mu_plus, partition, &dx),
        InactiveMultiplierSource::Comp => dlambda_comp_partial(model, mu_plus, partition),
    };
    let (al, au) = recover_active_multipliers(model, mu_plus, partition, &dx, &dl, &du, dlambda_a_source);
    let i_source = match dlambda_i_source {
        InactiveMultiplierSource::LeastSquares => Source::LeastSquares,
        InactiveMultiplierSource::Comp => Source::Comp,
    };
    let a_source = match dlambda_a_source {
        ActiveMultiplierSource::LeastSquares => Source::LeastSquares,
        ActiveMultiplierSource::Stationarity => Source::Stationarity,
    };
    let mut d = Direction::zeros(n);
    for i in 0..n {
        d.source_x[i] = if partition.is_active(i) { dx_active_sources[i] } else { Source::LeastSquares };
    }
    for &i in &partition.a_l {
        dl[i] = al[i];
        d.source_l[i] = a_source;
    }
    for &i in &partition.a_u {
        du[i] = au[i];
        d.source_u[i] = a_source;
    }
    for &i in &partition.i_l {
        d.source_l[i] = i_source;
    }
    for &i in &partition.i_u {
        d.source_u[i] = i_source;
    }
    d.dx = dx;
    d.dlambda_l = dl;
    d.dlambda_u = du;
    Ok(d)
}

/// Full approximate direction for a uniform variant.
pub fn full_approximate_direction(
    model: &LocalModel,
    mu_plus: f64,
    partition: &IndexPartition,
    variant: ApproxVariant,
) -> Result<Direction> {
    check_mu(mu_plus)?;
    check_partition(model, partition)?;
    let dx_a = dx_active(model, mu_plus, partition, variant.dx_a_source)?;
    let sources = vec![variant.dx_a_source.into(); model.dim()];
    complete_direction(
        model,
        mu_plus,
        partition,
        &dx_a,
        &sources,
        variant.dlambda_a_source,
        variant.dlambda_i_source,
    )
}

/// Intermediate-step direction: `dx` from a partial approximation on `a_x` and
/// zero on `i_x`; `dlambda` zero on the active bounds and, if requested,
/// complementarity-based on `i_l`/`i_u`.
pub fn partial_step_direction(
    model: &LocalModel,
    mu_plus: f64,
    partition: &IndexPartition,
    dx_source: DxSource,
    include_dlambda: bool,
) -> Result<Direction> {
    check_mu(mu_plus)?;
    check_partition(model, partition)?;
    let mut d = Direction::zeros(model.dim());
    d.dx = dx_active(model, mu_plus, partition, dx_source)?;
    for &i in &partition.a_x {
        d.source_x[i] = dx_source.into();
    }
    if include_dlambda {
        let (dl, du) = dlambda_comp_partial(model, mu_plus, partition);
        for &i in &partition.i_l {
            d.source_l[i] = Source::Comp;
        }
        for &i in &partition.i_u {
            d.source_u[i] = Source::Comp;
        }
        d.dlambda_l = dl;
        d.dlambda_u = du;
    }
    Ok(d)
}

/// Error factors of the two active approximations at one index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionFactors {
    pub index: usize,
    /// `1 / D_ii`, multiplying the off-diagonal coupling in the Schur error.
    pub schur: f64,
    /// `gap / lambda`, multiplying the multiplier step in the complementarity error.
    pub comp: f64,
}

/// Diagnostic only: the factors that scale each active approximation's error.
pub fn selection_factors(model: &LocalModel, partition: &IndexPartition) -> Vec<SelectionFactors> {
    partition
        .a_x
        .iter()
        .map(|&i| {
            let comp = if partition.is_active_lower(i) {
                model.gap_l[i] / model.iterate.lambda_l[i]
            } else {
                model.gap_u[i] / model.iterate.lambda_u[i]
            };
            SelectionFactors { index: i, schur: 1.0 / condensed_diagonal(model, i), comp }
        })
        .collect()
}
