//! The barrier residual `F_mu`, its Jacobian, and component-order diagnostics.
//!
//! Row layout is fixed: stationarity rows `0..n`, then one complementarity row
//! per finite lower bound in increasing index order, then one per finite upper
//! bound. Rows for infinite bounds do not exist and their multipliers are
//! pinned to zero.

use nalgebra::{DMatrix, DVector};

use crate::active_sets::IndexPartition;
use crate::error::{Error, Result};
use crate::problem::{BoundedProblem, Bounds};

/// A strictly interior primal-dual point.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub x: DVector<f64>,
    /// Multipliers of the lower bounds; exactly zero where `l_i = -inf`.
    pub lambda_l: DVector<f64>,
    /// Multipliers of the upper bounds; exactly zero where `u_i = +inf`.
    pub lambda_u: DVector<f64>,
}

impl Iterate {
    pub fn new(x: DVector<f64>, lambda_l: DVector<f64>, lambda_u: DVector<f64>) -> Self {
        Self { x, lambda_l, lambda_u }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Checks strict interiority and the zero pattern of the multipliers.
    pub fn check_interior(&self, bounds: &Bounds) -> Result<()> {
        let n = bounds.dim();
        if self.x.len() != n || self.lambda_l.len() != n || self.lambda_u.len() != n {
            return Err(Error::InvalidArgument(format!(
                "iterate dimensions ({}, {}, {}) do not match n = {n}",
                self.x.len(),
                self.lambda_l.len(),
                self.lambda_u.len()
            )));
        }
        for i in 0..n {
            let x = self.x[i];
            if !x.is_finite() {
                return Err(Error::NonInterior(i));
            }
            if bounds.has_lower(i) {
                if !(x - bounds.lower[i] > 0.0) || !(self.lambda_l[i] > 0.0) {
                    return Err(Error::NonInterior(i));
                }
            } else if self.lambda_l[i] != 0.0 {
                return Err(Error::NonInterior(i));
            }
            if bounds.has_upper(i) {
                if !(bounds.upper[i] - x > 0.0) || !(self.lambda_u[i] > 0.0) {
                    return Err(Error::NonInterior(i));
                }
            } else if self.lambda_u[i] != 0.0 {
                return Err(Error::NonInterior(i));
            }
        }
        Ok(())
    }

    /// Euclidean distance in the stacked `(x, lambda_l, lambda_u)` space.
    pub fn distance(&self, other: &Iterate) -> f64 {
        ((&self.x - &other.x).norm_squared()
            + (&self.lambda_l - &other.lambda_l).norm_squared()
            + (&self.lambda_u - &other.lambda_u).norm_squared())
        .sqrt()
    }
}

/// `F_mu(x, lambda)` split into its blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    /// `grad f - lambda_l + lambda_u`.
    pub stationarity: DVector<f64>,
    /// `lambda_l_i (x_i - l_i) - mu` over finite lower bounds.
    pub comp_lower: DVector<f64>,
    /// `lambda_u_i (u_i - x_i) - mu` over finite upper bounds.
    pub comp_upper: DVector<f64>,
    pub norm: f64,
}

impl Residual {
    pub fn from_blocks(stationarity: DVector<f64>, comp_lower: DVector<f64>, comp_upper: DVector<f64>) -> Self {
        let norm = (stationarity.norm_squared() + comp_lower.norm_squared() + comp_upper.norm_squared()).sqrt();
        Self { stationarity, comp_lower, comp_upper, norm }
    }

    /// The concatenation `[stationarity; comp_lower; comp_upper]`.
    pub fn to_vector(&self) -> DVector<f64> {
        let (n, a, b) = (self.stationarity.len(), self.comp_lower.len(), self.comp_upper.len());
        let mut v = DVector::zeros(n + a + b);
        v.rows_mut(0, n).copy_from(&self.stationarity);
        v.rows_mut(n, a).copy_from(&self.comp_lower);
        v.rows_mut(n + a, b).copy_from(&self.comp_upper);
        v
    }
}

/// Everything needed to evaluate `F_mu` and `F'` at one strictly interior point.
#[derive(Debug, Clone)]
pub struct LocalModel {
    pub bounds: Bounds,
    pub iterate: Iterate,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
    /// `x_i - l_i`, or `+inf` where the lower bound is absent.
    pub gap_l: DVector<f64>,
    /// `u_i - x_i`, or `+inf` where the upper bound is absent.
    pub gap_u: DVector<f64>,
}

impl LocalModel {
    pub fn new<P: BoundedProblem + ?Sized>(problem: &P, iterate: &Iterate) -> Result<Self> {
        Self::with_bounds(problem, Bounds::of(problem), iterate)
    }

    pub fn with_bounds<P: BoundedProblem + ?Sized>(problem: &P, bounds: Bounds, iterate: &Iterate) -> Result<Self> {
        iterate.check_interior(&bounds)?;
        let n = bounds.dim();
        let gap_l = DVector::from_fn(n, |i, _| {
            if bounds.has_lower(i) { iterate.x[i] - bounds.lower[i] } else { f64::INFINITY }
        });
        let gap_u = DVector::from_fn(n, |i, _| {
            if bounds.has_upper(i) { bounds.upper[i] - iterate.x[i] } else { f64::INFINITY }
        });
        Ok(Self {
            gradient: problem.gradient(&iterate.x),
            hessian: problem.hessian(&iterate.x),
            bounds,
            iterate: iterate.clone(),
            gap_l,
            gap_u,
        })
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    /// `lambda_l_i / (x_i - l_i)`, zero for an absent bound.
    pub fn ratio_l(&self, i: usize) -> f64 {
        if self.bounds.has_lower(i) { self.iterate.lambda_l[i] / self.gap_l[i] } else { 0.0 }
    }

    /// `lambda_u_i / (u_i - x_i)`, zero for an absent bound.
    pub fn ratio_u(&self, i: usize) -> f64 {
        if self.bounds.has_upper(i) { self.iterate.lambda_u[i] / self.gap_u[i] } else { 0.0 }
    }

    /// `mu / (x_i - l_i)`, zero for an absent bound.
    pub fn barrier_l(&self, i: usize, mu: f64) -> f64 {
        if self.bounds.has_lower(i) { mu / self.gap_l[i] } else { 0.0 }
    }

    /// `mu / (u_i - x_i)`, zero for an absent bound.
    pub fn barrier_u(&self, i: usize, mu: f64) -> f64 {
        if self.bounds.has_upper(i) { mu / self.gap_u[i] } else { 0.0 }
    }

    pub fn residual(&self, mu: f64) -> Residual {
        let it = &self.iterate;
        let stationarity = &self.gradient - &it.lambda_l + &it.lambda_u;
        let comp_lower = DVector::from_iterator(
            self.bounds.lower_idx.len(),
            self.bounds.lower_idx.iter().map(|&i| it.lambda_l[i] * self.gap_l[i] - mu),
        );
        let comp_upper = DVector::from_iterator(
            self.bounds.upper_idx.len(),
            self.bounds.upper_idx.iter().map(|&i| it.lambda_u[i] * self.gap_u[i] - mu),
        );
        Residual::from_blocks(stationarity, comp_lower, comp_upper)
    }

    pub fn jacobian(&self) -> Jacobian {
        let it = &self.iterate;
        Jacobian {
            hessian: self.hessian.clone(),
            lower_idx: self.bounds.lower_idx.clone(),
            upper_idx: self.bounds.upper_idx.clone(),
            lambda_l: self.bounds.lower_idx.iter().map(|&i| it.lambda_l[i]).collect(),
            gap_l: self.bounds.lower_idx.iter().map(|&i| self.gap_l[i]).collect(),
            lambda_u: self.bounds.upper_idx.iter().map(|&i| it.lambda_u[i]).collect(),
            gap_u: self.bounds.upper_idx.iter().map(|&i| self.gap_u[i]).collect(),
        }
    }
}

/// `F_mu` at a strictly interior iterate. `mu = 0` gives the KKT residual used for termination.
pub fn residual<P: BoundedProblem + ?Sized>(problem: &P, iterate: &Iterate, mu: f64) -> Result<Residual> {
    if !(mu >= 0.0) {
        return Err(Error::InvalidArgument(format!("mu must be nonnegative, got {mu}")));
    }
    let bounds = Bounds::of(problem);
    iterate.check_interior(&bounds)?;
    let it = iterate;
    let stationarity = problem.gradient(&it.x) - &it.lambda_l + &it.lambda_u;
    let comp_lower = DVector::from_iterator(
        bounds.lower_idx.len(),
        bounds.lower_idx.iter().map(|&i| it.lambda_l[i] * (it.x[i] - bounds.lower[i]) - mu),
    );
    let comp_upper = DVector::from_iterator(
        bounds.upper_idx.len(),
        bounds.upper_idx.iter().map(|&i| it.lambda_u[i] * (bounds.upper[i] - it.x[i]) - mu),
    );
    Ok(Residual::from_blocks(stationarity, comp_lower, comp_upper))
}

/// `||F_0||` at a feasible point that may sit on its bounds (used to certify solutions).
pub fn kkt_residual_norm<P: BoundedProblem + ?Sized>(problem: &P, iterate: &Iterate) -> f64 {
    let bounds = Bounds::of(problem);
    let it = iterate;
    let mut sq = (problem.gradient(&it.x) - &it.lambda_l + &it.lambda_u).norm_squared();
    for &i in &bounds.lower_idx {
        sq += (it.lambda_l[i] * (it.x[i] - bounds.lower[i])).powi(2);
    }
    for &i in &bounds.upper_idx {
        sq += (it.lambda_u[i] * (bounds.upper[i] - it.x[i])).powi(2);
    }
    sq.sqrt()
}

/// `F'(x, lambda)` in block form. Unknown ordering matches the residual rows:
/// `(dx, dlambda_l over finite lower bounds, dlambda_u over finite upper bounds)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub hessian: DMatrix<f64>,
    pub lower_idx: Vec<usize>,
    pub upper_idx: Vec<usize>,
    pub lambda_l: Vec<f64>,
    pub gap_l: Vec<f64>,
    pub lambda_u: Vec<f64>,
    pub gap_u: Vec<f64>,
}

impl Jacobian {
    pub fn size(&self) -> usize {
        self.hessian.nrows() + self.lower_idx.len() + self.upper_idx.len()
    }

    /// Assembles
    /// `[H, -I, I; Lambda_l, X - L, 0; -Lambda_u, 0, U - X]` with absent rows dropped.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.hessian.nrows();
        let ml = self.lower_idx.len();
        let m = self.size();
        let mut j = DMatrix::zeros(m, m);
        j.view_mut((0, 0), (n, n)).copy_from(&self.hessian);
        for (k, &i) in self.lower_idx.iter().enumerate() {
            let r = n + k;
            j[(i, r)] = -1.0;
            j[(r, i)] = self.lambda_l[k];
            j[(r, r)] = self.gap_l[k];
        }
        for (k, &i) in self.upper_idx.iter().enumerate() {
            let r = n + ml + k;
            j[(i, r)] = 1.0;
            j[(r, i)] = -self.lambda_u[k];
            j[(r, r)] = self.gap_u[k];
        }
        j
    }

    /// Matrix-vector product with a stacked system vector.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = self.hessian.nrows();
        let ml = self.lower_idx.len();
        let dx = v.rows(0, n).into_owned();
        let mut out = DVector::zeros(self.size());
        out.rows_mut(0, n).copy_from(&(&self.hessian * &dx));
        for (k, &i) in self.lower_idx.iter().enumerate() {
            let dl = v[n + k];
            out[i] -= dl;
            out[n + k] = self.lambda_l[k] * dx[i] + self.gap_l[k] * dl;
        }
        for (k, &i) in self.upper_idx.iter().enumerate() {
            let du = v[n + ml + k];
            out[i] += du;
            out[n + ml + k] = -self.lambda_u[k] * dx[i] + self.gap_u[k] * du;
        }
        out
    }
}

pub fn jacobian<P: BoundedProblem + ?Sized>(problem: &P, iterate: &Iterate) -> Result<Jacobian> {
    Ok(LocalModel::new(problem, iterate)?.jacobian())
}

/// Order class of a gap or multiplier relative to the barrier parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderClass {
    /// Within `sqrt(mu)`, i.e. on the `mu` side of the geometric midpoint between `mu` and 1.
    SmallMu,
    Unit,
}

impl OrderClass {
    pub fn classify(value: f64, mu: f64) -> Self {
        if value.abs() <= mu.sqrt() { OrderClass::SmallMu } else { OrderClass::Unit }
    }
}

/// Diagnostic for one bound of one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOrders {
    /// Gap divided by `mu`.
    pub gap_ratio: f64,
    /// Multiplier divided by `mu`.
    pub multiplier_ratio: f64,
    pub gap_class: OrderClass,
    pub multiplier_class: OrderClass,
    /// Active bounds expect a small gap and a unit multiplier; inactive ones the reverse.
    pub active: bool,
}

impl BoundOrders {
    pub fn gap_violation(&self) -> bool {
        (self.gap_class == OrderClass::SmallMu) != self.active
    }

    pub fn multiplier_violation(&self) -> bool {
        (self.multiplier_class == OrderClass::Unit) != self.active
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentOrders {
    pub index: usize,
    pub lower: Option<BoundOrders>,
    pub upper: Option<BoundOrders>,
}

impl ComponentOrders {
    pub fn consistent(&self) -> bool {
        [self.lower, self.upper]
            .iter()
            .flatten()
            .all(|b| !b.gap_violation() && !b.multiplier_violation())
    }
}

/// Reports gap and multiplier magnitudes normalized by `mu`, classified against
/// the orders expected for the given partition. Purely informational.
pub fn component_orders(bounds: &Bounds, iterate: &Iterate, partition: &IndexPartition, mu: f64) -> Vec<ComponentOrders> {
    let orders = |gap: f64, lam: f64, active: bool| BoundOrders {
        gap_ratio: gap / mu,
        multiplier_ratio: lam / mu,
        gap_class: OrderClass::classify(gap, mu),
        multiplier_class: OrderClass::classify(lam, mu),
        active,
    };
    (0..bounds.dim())
        .map(|i| ComponentOrders {
            index: i,
            lower: bounds.has_lower(i).then(|| {
                orders(iterate.x[i] - bounds.lower[i], iterate.lambda_l[i], partition.is_active_lower(i))
            }),
            upper: bounds.has_upper(i).then(|| {
                orders(bounds.upper[i] - iterate.x[i], iterate.lambda_u[i], partition.is_active_upper(i))
            }),
        })
        .collect()
}
