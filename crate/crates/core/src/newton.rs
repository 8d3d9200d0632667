//! Exact Newton directions via the condensed (Schur complement) system, and
//! fraction-to-boundary steps.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::{BoundedProblem, Bounds};
use crate::residual::{Iterate, Jacobian, LocalModel, Residual};

/// Where a direction component came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Newton,
    /// Diagonal of the condensed system (`dx^S`).
    Schur,
    /// Complementarity rows with the vanishing coefficient dropped (`dx^C`, `dlambda^C`).
    Comp,
    /// Reduced solve or least-squares recovery (`ls`).
    LeastSquares,
    /// Stationarity-row recovery of active multipliers (`b`).
    Stationarity,
    Zero,
}

/// A candidate step `(dx, dlambda_l, dlambda_u)` with per-component provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub dx: DVector<f64>,
    pub dlambda_l: DVector<f64>,
    pub dlambda_u: DVector<f64>,
    pub source_x: Vec<Source>,
    pub source_l: Vec<Source>,
    pub source_u: Vec<Source>,
}

impl Direction {
    pub fn zeros(n: usize) -> Self {
        Self {
            dx: DVector::zeros(n),
            dlambda_l: DVector::zeros(n),
            dlambda_u: DVector::zeros(n),
            source_x: vec![Source::Zero; n],
            source_l: vec![Source::Zero; n],
            source_u: vec![Source::Zero; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.dx.len()
    }

    pub fn norm(&self) -> f64 {
        (self.dx.norm_squared() + self.dlambda_l.norm_squared() + self.dlambda_u.norm_squared()).sqrt()
    }

    /// `||self - other||` over all stacked components.
    pub fn distance(&self, other: &Direction) -> f64 {
        ((&self.dx - &other.dx).norm_squared()
            + (&self.dlambda_l - &other.dlambda_l).norm_squared()
            + (&self.dlambda_u - &other.dlambda_u).norm_squared())
        .sqrt()
    }

    /// Stacks into the residual row ordering: `(dx, dlambda_l[lower_idx], dlambda_u[upper_idx])`.
    pub fn to_system_vector(&self, bounds: &Bounds) -> DVector<f64> {
        let n = self.dim();
        let ml = bounds.lower_idx.len();
        let mut v = DVector::zeros(bounds.system_size());
        v.rows_mut(0, n).copy_from(&self.dx);
        for (k, &i) in bounds.lower_idx.iter().enumerate() {
            v[n + k] = self.dlambda_l[i];
        }
        for (k, &i) in bounds.upper_idx.iter().enumerate() {
            v[n + ml + k] = self.dlambda_u[i];
        }
        v
    }

    /// Inverse of [`Direction::to_system_vector`], tagging every present component with `source`.
    pub fn from_system_vector(bounds: &Bounds, v: &DVector<f64>, source: Source) -> Self {
        let n = bounds.dim();
        let ml = bounds.lower_idx.len();
        let mut d = Direction::zeros(n);
        d.dx.copy_from(&v.rows(0, n));
        d.source_x = vec![source; n];
        for (k, &i) in bounds.lower_idx.iter().enumerate() {
            d.dlambda_l[i] = v[n + k];
            d.source_l[i] = source;
        }
        for (k, &i) in bounds.upper_idx.iter().enumerate() {
            d.dlambda_u[i] = v[n + ml + k];
            d.source_u[i] = source;
        }
        d
    }

    /// `||F' d + F||`, the linear-system residual of this direction.
    pub fn linear_residual(&self, jacobian: &Jacobian, bounds: &Bounds, rhs: &Residual) -> f64 {
        (jacobian.apply(&self.to_system_vector(bounds)) + rhs.to_vector()).norm()
    }
}

/// Complementarity-block coefficients of a primal-dual matrix. Vectors are
/// full length; entries at absent bounds are ignored.
#[derive(Debug, Clone, Copy)]
pub struct ComplementarityDiagonals<'a> {
    pub lambda_l: &'a DVector<f64>,
    pub gap_l: &'a DVector<f64>,
    pub lambda_u: &'a DVector<f64>,
    pub gap_u: &'a DVector<f64>,
}

impl<'a> ComplementarityDiagonals<'a> {
    pub fn of(model: &'a LocalModel) -> Self {
        Self {
            lambda_l: &model.iterate.lambda_l,
            gap_l: &model.gap_l,
            lambda_u: &model.iterate.lambda_u,
            gap_u: &model.gap_u,
        }
    }
}

/// Solves `[H, -I, I; Lambda_l, G_l, 0; -Lambda_u, 0, G_u] d = -r` by eliminating
/// the multiplier blocks:
/// `(H + G_l^{-1} Lambda_l + G_u^{-1} Lambda_u) dx = -r_s - G_l^{-1} r_l + G_u^{-1} r_u`.
///
/// With the diagonals taken at the current iterate this is the Newton system; the
/// higher-order variant passes diagonals from a different point.
pub fn solve_condensed(
    hessian: &DMatrix<f64>,
    bounds: &Bounds,
    diag: &ComplementarityDiagonals<'_>,
    rhs: &Residual,
) -> Result<DVector<f64>> {
    let ComplementarityDiagonals { lambda_l, gap_l, lambda_u, gap_u } = *diag;
    let mut m = hessian.clone();
    let mut b = -&rhs.stationarity;
    for (k, &i) in bounds.lower_idx.iter().enumerate() {
        m[(i, i)] += lambda_l[i] / gap_l[i];
        b[i] -= rhs.comp_lower[k] / gap_l[i];
    }
    for (k, &i) in bounds.upper_idx.iter().enumerate() {
        m[(i, i)] += lambda_u[i] / gap_u[i];
        b[i] += rhs.comp_upper[k] / gap_u[i];
    }
    let chol = m.cholesky().ok_or(Error::IndefiniteSystem)?;
    Ok(chol.solve(&b))
}

/// Recovers the multiplier steps from the complementarity rows once `dx` is known.
pub fn back_substitute(
    bounds: &Bounds,
    dx: DVector<f64>,
    diag: &ComplementarityDiagonals<'_>,
    rhs: &Residual,
    source: Source,
) -> Direction {
    let ComplementarityDiagonals { lambda_l, gap_l, lambda_u, gap_u } = *diag;
    let n = bounds.dim();
    let mut d = Direction::zeros(n);
    for (k, &i) in bounds.lower_idx.iter().enumerate() {
        d.dlambda_l[i] = (-rhs.comp_lower[k] - lambda_l[i] * dx[i]) / gap_l[i];
        d.source_l[i] = source;
    }
    for (k, &i) in bounds.upper_idx.iter().enumerate() {
        d.dlambda_u[i] = (-rhs.comp_upper[k] + lambda_u[i] * dx[i]) / gap_u[i];
        d.source_u[i] = source;
    }
    d.dx = dx;
    d.source_x = vec![source; n];
    d
}

/// Newton direction for `F'(x, lambda) d = -F_{mu_plus}(x, lambda)` at a prepared model.
pub fn newton_direction_at(model: &LocalModel, mu_plus: f64) -> Result<Direction> {
    if !(mu_plus > 0.0) {
        return Err(Error::InvalidArgument(format!("direction target mu must be positive, got {mu_plus}")));
    }
    let rhs = model.residual(mu_plus);
    let diag = ComplementarityDiagonals::of(model);
    let dx = solve_condensed(&model.hessian, &model.bounds, &diag, &rhs)?;
    Ok(back_substitute(&model.bounds, dx, &diag, &rhs, Source::Newton))
}

pub fn newton_direction<P: BoundedProblem + ?Sized>(problem: &P, iterate: &Iterate, mu_plus: f64) -> Result<Direction> {
    newton_direction_at(&LocalModel::new(problem, iterate)?, mu_plus)
}

/// Primal and dual step lengths. Raw maxima may be `+inf`; applied lengths lie in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLengths {
    pub alpha_p: f64,
    pub alpha_d: f64,
}

/// Largest `alpha` keeping `l < x + alpha dx < u` and `lambda + alpha dlambda >= 0`
/// on every finite bound (exact ratio tests).
pub fn max_feasible_steps(iterate: &Iterate, direction: &Direction, bounds: &Bounds) -> StepLengths {
    let mut alpha_p = f64::INFINITY;
    let mut alpha_d = f64::INFINITY;
    for &i in &bounds.lower_idx {
        let dx = direction.dx[i];
        if dx < 0.0 {
            alpha_p = alpha_p.min((iterate.x[i] - bounds.lower[i]) / -dx);
        }
        let dl = direction.dlambda_l[i];
        if dl < 0.0 {
            alpha_d = alpha_d.min(iterate.lambda_l[i] / -dl);
        }
    }
    for &i in &bounds.upper_idx {
        let dx = direction.dx[i];
        if dx > 0.0 {
            alpha_p = alpha_p.min((bounds.upper[i] - iterate.x[i]) / dx);
        }
        let du = direction.dlambda_u[i];
        if du < 0.0 {
            alpha_d = alpha_d.min(iterate.lambda_u[i] / -du);
        }
    }
    StepLengths { alpha_p, alpha_d }
}

/// Fraction-to-boundary step: `alpha = min(1, fraction * alpha_max)` for the primal
/// and (shared) dual parts.
pub fn apply_step(
    iterate: &Iterate,
    direction: &Direction,
    bounds: &Bounds,
    fraction: f64,
) -> Result<(Iterate, StepLengths)> {
    let max = max_feasible_steps(iterate, direction, bounds);
    let steps = StepLengths {
        alpha_p: f64::min(1.0, fraction * max.alpha_p),
        alpha_d: f64::min(1.0, fraction * max.alpha_d),
    };
    let next = Iterate::new(
        &iterate.x + steps.alpha_p * &direction.dx,
        &iterate.lambda_l + steps.alpha_d * &direction.dlambda_l,
        &iterate.lambda_u + steps.alpha_d * &direction.dlambda_u,
    );
    next.check_interior(bounds).map_err(|_| Error::DegenerateStep)?;
    Ok((next, steps))
}
