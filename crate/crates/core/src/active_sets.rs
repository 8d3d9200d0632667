//! Active/inactive index sets: exact sets from a known solution, and the
//! threshold heuristics used while iterating.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::problem::Bounds;
use crate::residual::Iterate;

/// The six index sets `A_l, A_u, A_x, I_l, I_u, I_x`.
///
/// `a_x = a_l ∪ a_u` and `i_x` is its complement. For a *complete* partition
/// `i_l` holds every finite-lower index outside `a_l` (and likewise `i_u`);
/// estimated multiplier sets may leave some indices in neither.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexPartition {
    pub a_l: Vec<usize>,
    pub a_u: Vec<usize>,
    pub i_l: Vec<usize>,
    pub i_u: Vec<usize>,
    pub a_x: Vec<usize>,
    pub i_x: Vec<usize>,
    lower_state: Vec<Membership>,
    upper_state: Vec<Membership>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Membership {
    Absent,
    Active,
    Inactive,
    Neither,
}

fn sorted_unique(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

impl IndexPartition {
    /// Partition where `i_l`/`i_u` are the complements of `a_l`/`a_u` among the finite bounds.
    pub fn complete(bounds: &Bounds, a_l: Vec<usize>, a_u: Vec<usize>) -> Result<Self> {
        let a_l = sorted_unique(a_l);
        let a_u = sorted_unique(a_u);
        let i_l = bounds.lower_idx.iter().copied().filter(|i| a_l.binary_search(i).is_err()).collect();
        let i_u = bounds.upper_idx.iter().copied().filter(|i| a_u.binary_search(i).is_err()).collect();
        Self::with_multiplier_sets(bounds, a_l, a_u, i_l, i_u)
    }

    /// Every index inactive.
    pub fn all_inactive(bounds: &Bounds) -> Self {
        Self::complete(bounds, Vec::new(), Vec::new()).expect("empty active set is always valid")
    }

    /// General partition with explicitly given inactive-multiplier sets.
    pub fn with_multiplier_sets(
        bounds: &Bounds,
        a_l: Vec<usize>,
        a_u: Vec<usize>,
        i_l: Vec<usize>,
        i_u: Vec<usize>,
    ) -> Result<Self> {
        let n = bounds.dim();
        let (a_l, a_u, i_l, i_u) = (sorted_unique(a_l), sorted_unique(a_u), sorted_unique(i_l), sorted_unique(i_u));
        let mut lower_state: Vec<Membership> =
            (0..n).map(|i| if bounds.has_lower(i) { Membership::Neither } else { Membership::Absent }).collect();
        let mut upper_state: Vec<Membership> =
            (0..n).map(|i| if bounds.has_upper(i) { Membership::Neither } else { Membership::Absent }).collect();
        let mark = |state: &mut Vec<Membership>, set: &[usize], m: Membership, what: &str| -> Result<()> {
            for &i in set {
                match state.get(i) {
                    Some(Membership::Neither) => state[i] = m,
                    Some(Membership::Absent) => {
                        return Err(Error::InvalidArgument(format!("{what} contains index {i} without that bound")))
                    }
                    Some(_) => return Err(Error::InvalidArgument(format!("index {i} is both active and inactive"))),
                    None => return Err(Error::InvalidArgument(format!("{what} index {i} out of range"))),
                }
            }
            Ok(())
        };
        mark(&mut lower_state, &a_l, Membership::Active, "a_l")?;
        mark(&mut upper_state, &a_u, Membership::Active, "a_u")?;
        mark(&mut lower_state, &i_l, Membership::Inactive, "i_l")?;
        mark(&mut upper_state, &i_u, Membership::Inactive, "i_u")?;
        if let Some(&i) = a_l.iter().find(|i| a_u.binary_search(i).is_ok()) {
            return Err(Error::InvalidArgument(format!("index {i} cannot be active at both bounds")));
        }
        let a_x = sorted_unique(a_l.iter().chain(a_u.iter()).copied().collect());
        let i_x = (0..n).filter(|i| a_x.binary_search(i).is_err()).collect();
        Ok(Self { a_l, a_u, i_l, i_u, a_x, i_x, lower_state, upper_state })
    }

    pub fn dim(&self) -> usize {
        self.lower_state.len()
    }

    pub fn is_active_lower(&self, i: usize) -> bool {
        self.lower_state[i] == Membership::Active
    }

    pub fn is_active_upper(&self, i: usize) -> bool {
        self.upper_state[i] == Membership::Active
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.is_active_lower(i) || self.is_active_upper(i)
    }

    pub fn is_inactive_lower(&self, i: usize) -> bool {
        self.lower_state[i] == Membership::Inactive
    }

    pub fn is_inactive_upper(&self, i: usize) -> bool {
        self.upper_state[i] == Membership::Inactive
    }

    /// True when every finite bound is classified active or inactive.
    pub fn is_complete(&self) -> bool {
        !self.lower_state.iter().chain(self.upper_state.iter()).any(|&m| m == Membership::Neither)
    }
}

/// Exponents of the estimation thresholds `tau_A = mu^a`, `tau_I = mu^b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationThresholds {
    pub tau_a_exponent: f64,
    pub tau_i_exponent: f64,
}

impl EstimationThresholds {
    pub fn new(tau_a_exponent: f64, tau_i_exponent: f64) -> Result<Self> {
        for e in [tau_a_exponent, tau_i_exponent] {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::InvalidArgument(format!("threshold exponent {e} not in (0, 1]")));
            }
        }
        Ok(Self { tau_a_exponent, tau_i_exponent })
    }

    pub fn tau_a(&self, mu: f64) -> f64 {
        mu.powf(self.tau_a_exponent)
    }

    pub fn tau_i(&self, mu: f64) -> f64 {
        mu.powf(self.tau_i_exponent)
    }
}

/// Tolerances used to read active sets off a computed solution.
pub const ACTIVE_TOL: f64 = 1e-10;
pub const DEGENERATE_TOL: f64 = 1e-6;

/// Exact sets at a solution: a bound is active when its gap is below `tol_active`;
/// an active bound is degenerate when its multiplier is below `tol_degenerate`.
/// Returns the partition and the sorted degenerate indices.
pub fn exact_partition(
    bounds: &Bounds,
    x_star: &DVector<f64>,
    lambda_l_star: &DVector<f64>,
    lambda_u_star: &DVector<f64>,
    tol_active: f64,
    tol_degenerate: f64,
) -> (IndexPartition, Vec<usize>) {
    let mut a_l = Vec::new();
    let mut a_u = Vec::new();
    let mut degenerate = Vec::new();
    for i in 0..bounds.dim() {
        let gl = if bounds.has_lower(i) { x_star[i] - bounds.lower[i] } else { f64::INFINITY };
        let gu = if bounds.has_upper(i) { bounds.upper[i] - x_star[i] } else { f64::INFINITY };
        let lower = gl < tol_active;
        let upper = gu < tol_active;
        if lower && (!upper || gl <= gu) {
            a_l.push(i);
            if lambda_l_star[i] < tol_degenerate {
                degenerate.push(i);
            }
        } else if upper {
            a_u.push(i);
            if lambda_u_star[i] < tol_degenerate {
                degenerate.push(i);
            }
        }
    }
    let partition = IndexPartition::complete(bounds, a_l, a_u).expect("sets built from the bounds");
    (partition, degenerate)
}

/// Runtime estimate of the active set: bound `i` is active when its gap is
/// strictly below `min(multiplier, tau_A)`. When both bounds qualify the nearer
/// one wins, ties going to the lower bound. Free variables are always inactive.
pub fn estimate_active(bounds: &Bounds, iterate: &Iterate, mu: f64, thresholds: &EstimationThresholds) -> IndexPartition {
    let tau = thresholds.tau_a(mu);
    let mut a_l = Vec::new();
    let mut a_u = Vec::new();
    for i in 0..bounds.dim() {
        let gl = iterate.x[i] - bounds.lower[i];
        let gu = bounds.upper[i] - iterate.x[i];
        let lower = bounds.has_lower(i) && gl < f64::min(iterate.lambda_l[i], tau);
        let upper = bounds.has_upper(i) && gu < f64::min(iterate.lambda_u[i], tau);
        match (lower, upper) {
            (true, true) if gl <= gu => a_l.push(i),
            (true, true) => a_u.push(i),
            (true, false) => a_l.push(i),
            (false, true) => a_u.push(i),
            (false, false) => {}
        }
    }
    IndexPartition::complete(bounds, a_l, a_u).expect("sets built from the bounds")
}

/// Runtime estimate of inactive multipliers: `lambda_i` is inactive when it is
/// strictly below `min(gap_i, tau_I)`. Returns sorted `(i_l, i_u)`; indices may be
/// classified neither active nor inactive.
pub fn estimate_inactive_multipliers(
    bounds: &Bounds,
    iterate: &Iterate,
    mu: f64,
    thresholds: &EstimationThresholds,
) -> (Vec<usize>, Vec<usize>) {
    let tau = thresholds.tau_i(mu);
    let i_l = bounds
        .lower_idx
        .iter()
        .copied()
        .filter(|&i| iterate.lambda_l[i] < f64::min(iterate.x[i] - bounds.lower[i], tau))
        .collect();
    let i_u = bounds
        .upper_idx
        .iter()
        .copied()
        .filter(|&i| iterate.lambda_u[i] < f64::min(bounds.upper[i] - iterate.x[i], tau))
        .collect();
    (i_l, i_u)
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn lower_only(n: usize) -> Bounds {
        Bounds::new(DVector::zeros(n), DVector::from_element(n, INF))
    }

    fn point(gap: f64, lam: f64) -> Iterate {
        Iterate::new(dv(&[gap]), dv(&[lam]), dv(&[0.0]))
    }

    #[test]
    fn exact_sets_and_degeneracy() {
        let b = lower_only(3);
        let x = dv(&[1e-12, 1e-12, 0.2]);
        let lam = dv(&[0.3, 1e-8, 0.0]);
        let (p, deg) = exact_partition(&b, &x, &lam, &DVector::zeros(3), ACTIVE_TOL, DEGENERATE_TOL);
        assert_eq!(p.a_l, vec![0, 1]);
        assert_eq!(p.i_x, vec![2]);
        assert_eq!(deg, vec![1]);
    }

    #[test]
    fn active_estimate_rule() {
        let b = lower_only(1);
        let th = EstimationThresholds::new(2.0 / 3.0, 0.75).unwrap();
        assert_eq!(estimate_active(&b, &point(1e-6, 0.5), 1e-4, &th).a_l, vec![0]);
        assert!(estimate_active(&b, &point(1e-6, 1e-8), 1e-4, &th).a_x.is_empty());
        assert!(estimate_active(&b, &point(0.3, 0.5), 1e-2, &th).a_x.is_empty());
    }

    #[test]
    fn ties_are_inactive() {
        let b = lower_only(1);
        let th = EstimationThresholds::new(1.0, 1.0).unwrap();
        // gap == multiplier and below tau
        assert!(estimate_active(&b, &point(0.01, 0.01), 0.5, &th).a_x.is_empty());
    }

    #[test]
    fn nearer_bound_wins_for_two_sided() {
        let b = Bounds::new(dv(&[0.0, 0.0]), dv(&[1.0, 1.0]));
        let it = Iterate::new(dv(&[0.4, 0.5]), dv(&[5.0, 5.0]), dv(&[5.0, 5.0]));
        let th = EstimationThresholds::new(0.01, 0.01).unwrap();
        let p = estimate_active(&b, &it, 0.5, &th);
        assert_eq!(p.a_l, vec![0, 1]);
        assert!(p.a_u.is_empty());
        let it = Iterate::new(dv(&[0.6, 0.5]), dv(&[5.0, 5.0]), dv(&[5.0, 5.0]));
        let p = estimate_active(&b, &it, 0.5, &th);
        assert_eq!(p.a_u, vec![0]);
        assert_eq!(p.a_l, vec![1]);
    }

    #[test]
    fn free_variables_are_inactive() {
        let b = Bounds::new(dv(&[-INF]), dv(&[INF]));
        let it = Iterate::new(dv(&[0.0]), dv(&[0.0]), dv(&[0.0]));
        let th = EstimationThresholds::new(0.5, 0.5).unwrap();
        let p = estimate_active(&b, &it, 1.0, &th);
        assert_eq!(p.i_x, vec![0]);
        assert!(p.i_l.is_empty() && p.i_u.is_empty());
    }

    #[test]
    fn inactive_multiplier_rule() {
        let b = lower_only(1);
        let th = EstimationThresholds::new(0.75, 0.75).unwrap();
        assert_eq!(estimate_inactive_multipliers(&b, &point(0.4, 1e-7), 1e-6, &th).0, vec![0]);
        assert!(estimate_inactive_multipliers(&b, &point(0.4, 0.2), 1e-6, &th).0.is_empty());
        assert!(estimate_inactive_multipliers(&b, &point(1e-9, 1e-7), 1e-6, &th).0.is_empty());
    }

    #[test]
    fn partition_rejects_overlap() {
        let b = lower_only(2);
        assert!(IndexPartition::with_multiplier_sets(&b, vec![0], vec![], vec![0], vec![]).is_err());
        assert!(IndexPartition::complete(&b, vec![], vec![1]).is_err());
        let p = IndexPartition::with_multiplier_sets(&b, vec![0], vec![], vec![], vec![]).unwrap();
        assert!(!p.is_complete());
        assert!(IndexPartition::complete(&b, vec![0], vec![]).unwrap().is_complete());
    }

    #[test]
    fn bad_exponents() {
        assert!(EstimationThresholds::new(0.0, 0.5).is_err());
        assert!(EstimationThresholds::new(0.5, 1.5).is_err());
    }
}
