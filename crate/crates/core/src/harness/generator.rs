//! Random strictly complementary convex QPs with a known KKT pair.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::active_sets::IndexPartition;
use crate::error::{Error, Result};
use crate::problem::{Bounds, QuadraticProblem};
use crate::residual::{kkt_residual_norm, Iterate};
use crate::sparse::SymmetricMatrix;

/// Certification tolerance on `||F_0(x*, lambda*)||`.
pub const KKT_TOL: f64 = 1e-12;
const MAX_ATTEMPTS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundStyle {
    LowerOnly,
    TwoSided,
    /// Each variable draws lower-only, upper-only, two-sided or (if inactive) free.
    Mixed,
}

impl BoundStyle {
    pub fn name(self) -> &'static str {
        match self {
            BoundStyle::LowerOnly => "lower",
            BoundStyle::TwoSided => "two-sided",
            BoundStyle::Mixed => "mixed",
        }
    }
}

impl fmt::Display for BoundStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" => Ok(BoundStyle::LowerOnly),
            "two-sided" => Ok(BoundStyle::TwoSided),
            "mixed" => Ok(BoundStyle::Mixed),
            _ => Err(Error::InvalidArgument(format!("unknown bound style '{s}' (lower, two-sided, mixed)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub n: usize,
    /// Fraction of variables strictly inside their bounds at the solution.
    pub frac_inactive: f64,
    /// Fill fraction of the off-diagonal Hessian entries.
    pub density: f64,
    pub bound_style: BoundStyle,
    /// Scale of the nonzero gaps and multipliers at the solution.
    pub magnitude: f64,
    /// Added to the diagonal on top of diagonal dominance.
    pub diag_shift: f64,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            n: 50,
            frac_inactive: 0.5,
            density: 0.4,
            bound_style: BoundStyle::Mixed,
            magnitude: 1.0,
            diag_shift: 1.0,
            seed: 1,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidArgument(m));
        if self.n == 0 {
            return fail("generator dimension must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.frac_inactive) {
            return fail(format!("frac_inactive {} not in [0, 1]", self.frac_inactive));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return fail(format!("density {} not in (0, 1]", self.density));
        }
        if !(self.diag_shift > 0.0 && self.diag_shift.is_finite()) {
            return fail(format!("diag_shift {} must be positive", self.diag_shift));
        }
        if !(self.magnitude > 0.0 && self.magnitude.is_finite()) {
            return fail(format!("magnitude {} must be positive", self.magnitude));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// A generated problem together with its certified solution.
#[derive(Debug, Clone)]
pub struct CertifiedProblem {
    pub spec: GeneratorSpec,
    pub problem: QuadraticProblem,
    pub x_star: DVector<f64>,
    pub lambda_l_star: DVector<f64>,
    pub lambda_u_star: DVector<f64>,
    pub partition_star: IndexPartition,
    pub kkt_residual: f64,
}

impl CertifiedProblem {
    pub fn bounds(&self) -> Bounds {
        Bounds::of(&self.problem)
    }

    /// Smallest active multiplier and smallest inactive gap.
    pub fn complementarity_margin(&self) -> f64 {
        let b = self.bounds();
        let mut m = f64::INFINITY;
        for i in 0..b.dim() {
            if b.has_lower(i) {
                let v = if self.partition_star.is_active_lower(i) {
                    self.lambda_l_star[i]
                } else {
                    self.x_star[i] - b.lower[i]
                };
                m = m.min(v);
            }
            if b.has_upper(i) {
                let v = if self.partition_star.is_active_upper(i) {
                    self.lambda_u_star[i]
                } else {
                    b.upper[i] - self.x_star[i]
                };
                m = m.min(v);
            }
        }
        m
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Lower,
    Upper,
    Two,
    Free,
}

fn draw_hessian(rng: &mut ChaCha8Rng, spec: &GeneratorSpec) -> SymmetricMatrix {
    let n = spec.n;
    let mut triplets = Vec::new();
    let mut row_abs = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            if rng.gen::<f64>() < spec.density {
                let v: f64 = rng.gen_range(-1.0..=1.0);
                triplets.push((i, j, v));
                row_abs[i] += v.abs();
                row_abs[j] += v.abs();
            }
        }
    }
    for (i, s) in row_abs.into_iter().enumerate() {
        triplets.push((i, i, s + spec.diag_shift));
    }
    SymmetricMatrix::from_lower_triplets(n, triplets).expect("generated entries are in range")
}

fn draw(rng: &mut ChaCha8Rng, spec: &GeneratorSpec) -> Result<CertifiedProblem> {
    let n = spec.n;
    let mag = spec.magnitude;
    let hessian = draw_hessian(rng, spec);
    if !hessian.is_strictly_diagonally_dominant() || hessian.to_dense().cholesky().is_none() {
        return Err(Error::GenerationFailure("Hessian is not positive definite".into()));
    }

    let n_inactive = (spec.frac_inactive * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut inactive = vec![false; n];
    for &i in &order[..n_inactive] {
        inactive[i] = true;
    }

    let mut lower = DVector::from_element(n, f64::NEG_INFINITY);
    let mut upper = DVector::from_element(n, f64::INFINITY);
    let mut x = DVector::zeros(n);
    let mut lam_l = DVector::zeros(n);
    let mut lam_u = DVector::zeros(n);
    let (mut a_l, mut a_u) = (Vec::new(), Vec::new());
    let theta = |rng: &mut ChaCha8Rng| mag * rng.gen_range(0.5..1.5);
    for i in 0..n {
        let kind = match spec.bound_style {
            BoundStyle::LowerOnly => Kind::Lower,
            BoundStyle::TwoSided => Kind::Two,
            BoundStyle::Mixed => {
                let options: &[Kind] =
                    if inactive[i] { &[Kind::Lower, Kind::Upper, Kind::Two, Kind::Free] } else { &[Kind::Lower, Kind::Upper, Kind::Two] };
                options[rng.gen_range(0..options.len())]
            }
        };
        let anchor: f64 = rng.gen_range(-1.0..1.0);
        match (kind, inactive[i]) {
            (Kind::Free, _) => x[i] = anchor,
            (Kind::Lower, true) => {
                lower[i] = anchor;
                x[i] = anchor + theta(rng);
            }
            (Kind::Upper, true) => {
                upper[i] = anchor;
                x[i] = anchor - theta(rng);
            }
            (Kind::Two, true) => {
                lower[i] = anchor;
                x[i] = anchor + theta(rng);
                upper[i] = x[i] + theta(rng);
            }
            (Kind::Lower, false) => {
                lower[i] = anchor;
                x[i] = anchor;
                lam_l[i] = theta(rng);
                a_l.push(i);
            }
            (Kind::Upper, false) => {
                upper[i] = anchor;
                x[i] = anchor;
                lam_u[i] = theta(rng);
                a_u.push(i);
            }
            (Kind::Two, false) => {
                let width = theta(rng) + theta(rng);
                if rng.gen::<bool>() {
                    lower[i] = anchor;
                    upper[i] = anchor + width;
                    x[i] = anchor;
                    lam_l[i] = theta(rng);
                    a_l.push(i);
                } else {
                    upper[i] = anchor;
                    lower[i] = anchor - width;
                    x[i] = anchor;
                    lam_u[i] = theta(rng);
                    a_u.push(i);
                }
            }
        }
    }

    let linear = -hessian.mul_vec(&x) + &lam_l - &lam_u;
    let problem = QuadraticProblem::new(hessian, linear, 0.0, lower, upper)?;
    let bounds = Bounds::of(&problem);
    let partition_star = IndexPartition::complete(&bounds, a_l, a_u)?;
    let star = Iterate::new(x, lam_l, lam_u);
    let kkt_residual = kkt_residual_norm(&problem, &star);
    let certified = CertifiedProblem {
        spec: *spec,
        problem,
        x_star: star.x,
        lambda_l_star: star.lambda_l,
        lambda_u_star: star.lambda_u,
        partition_star,
        kkt_residual,
    };
    if !(kkt_residual <= KKT_TOL) {
        return Err(Error::GenerationFailure(format!("KKT residual {kkt_residual:e} exceeds {KKT_TOL:e}")));
    }
    if certified.complementarity_margin() < 0.1 * mag {
        return Err(Error::GenerationFailure("strict complementarity margin too small".into()));
    }
    Ok(certified)
}

/// Draws a certified problem. Each attempt reseeds deterministically from `spec.seed`.
pub fn generate(spec: &GeneratorSpec) -> Result<CertifiedProblem> {
    spec.validate()?;
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        match draw(&mut rng, spec) {
            Ok(p) => return Ok(p),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::GenerationFailure("no attempts made".into())))
}
