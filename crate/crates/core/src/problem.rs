//! Bound-constrained problems `min f(x) s.t. l <= x <= u`.
//!
//! Bounds are extended reals: `-inf` lower and `+inf` upper entries mean the
//! bound is absent. A [`QuadraticProblem`] stores its Hessian as canonical
//! lower-triangle triplets and reads/writes the line-oriented text format
//! documented in `docs/problem-format.md`:
//!
//! ```text
//! # comment
//! qp 2
//! H
//! 0 0 2
//! 1 1 2
//! c
//! -1 -1
//! l
//! 0 0
//! u
//! inf inf
//! ```

use std::fmt::{self, Write as _};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::sparse::{SymmetricMatrix, TripletError};

/// Objective plus bounds. Implementations must be deterministic and reentrant.
pub trait BoundedProblem: Send + Sync {
    fn dim(&self) -> usize;
    fn lower(&self) -> &DVector<f64>;
    fn upper(&self) -> &DVector<f64>;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    /// Dense symmetric Hessian at `x`.
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundClass {
    LowerOnly,
    UpperOnly,
    TwoSided,
    Free,
}

impl BoundClass {
    pub fn of(lower: f64, upper: f64) -> Self {
        match (lower.is_finite(), upper.is_finite()) {
            (true, true) => BoundClass::TwoSided,
            (true, false) => BoundClass::LowerOnly,
            (false, true) => BoundClass::UpperOnly,
            (false, false) => BoundClass::Free,
        }
    }

    pub fn has_lower(self) -> bool {
        matches!(self, BoundClass::LowerOnly | BoundClass::TwoSided)
    }

    pub fn has_upper(self) -> bool {
        matches!(self, BoundClass::UpperOnly | BoundClass::TwoSided)
    }
}

pub fn bound_classes<P: BoundedProblem + ?Sized>(problem: &P) -> Vec<BoundClass> {
    problem
        .lower()
        .iter()
        .zip(problem.upper().iter())
        .map(|(&l, &u)| BoundClass::of(l, u))
        .collect()
}

/// Bound data shared by every routine that touches complementarity rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
    pub classes: Vec<BoundClass>,
    /// Indices with a finite lower bound, increasing.
    pub lower_idx: Vec<usize>,
    /// Indices with a finite upper bound, increasing.
    pub upper_idx: Vec<usize>,
}

impl Bounds {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Self {
        let classes: Vec<BoundClass> = lower
            .iter()
            .zip(upper.iter())
            .map(|(&l, &u)| BoundClass::of(l, u))
            .collect();
        let lower_idx = (0..classes.len()).filter(|&i| classes[i].has_lower()).collect();
        let upper_idx = (0..classes.len()).filter(|&i| classes[i].has_upper()).collect();
        Self { lower, upper, classes, lower_idx, upper_idx }
    }

    pub fn of<P: BoundedProblem + ?Sized>(problem: &P) -> Self {
        Self::new(problem.lower().clone(), problem.upper().clone())
    }

    pub fn dim(&self) -> usize {
        self.classes.len()
    }

    pub fn has_lower(&self, i: usize) -> bool {
        self.classes[i].has_lower()
    }

    pub fn has_upper(&self, i: usize) -> bool {
        self.classes[i].has_upper()
    }

    /// Number of rows of the primal-dual system: `n` stationarity rows plus one
    /// complementarity row per finite bound.
    pub fn system_size(&self) -> usize {
        self.dim() + self.lower_idx.len() + self.upper_idx.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("crossed bounds at index {0}: lower bound must be strictly below upper bound")]
    CrossedBounds(usize),
    #[error("asymmetric Hessian at ({0}, {1}): |H_ij - H_ji| = {2}")]
    AsymmetricHessian(usize, usize, f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

const SYMMETRY_TOL: f64 = 1e-12;

fn probe_point(lower: &DVector<f64>, upper: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        lower.len(),
        lower.iter().zip(upper.iter()).map(|(&l, &u)| interior_guess(l, u)),
    )
}

/// A point strictly inside `(l, u)`: zero clipped to `[l + d, u - d]` with
/// `d = min(1, (u - l) / 4)`.
pub fn interior_guess(l: f64, u: f64) -> f64 {
    match (l.is_finite(), u.is_finite()) {
        (true, true) => {
            let d = f64::min(1.0, (u - l) / 4.0);
            0.0_f64.clamp(l + d, u - d)
        }
        (true, false) => f64::max(0.0, l + 1.0),
        (false, true) => f64::min(0.0, u - 1.0),
        (false, false) => 0.0,
    }
}

fn check_symmetric(h: &DMatrix<f64>) -> Result<(), ValidationError> {
    let n = h.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (h[(i, j)], h[(j, i)]);
            let delta = (a - b).abs();
            if delta > SYMMETRY_TOL * f64::max(1.0, f64::max(a.abs(), b.abs())) {
                return Err(ValidationError::AsymmetricHessian(i, j, delta));
            }
        }
    }
    Ok(())
}

/// Checks `l < u` componentwise and probes Hessian symmetry at one interior point.
pub fn validate<P: BoundedProblem + ?Sized>(problem: &P) -> Result<(), ValidationError> {
    let n = problem.dim();
    let (l, u) = (problem.lower(), problem.upper());
    if l.len() != n || u.len() != n {
        return Err(ValidationError::DimensionMismatch(format!(
            "n = {n} but bounds have lengths {} and {}",
            l.len(),
            u.len()
        )));
    }
    for i in 0..n {
        if l[i].is_nan() || u[i].is_nan() || !(l[i] < u[i]) || l[i] == f64::INFINITY || u[i] == f64::NEG_INFINITY {
            return Err(ValidationError::CrossedBounds(i));
        }
    }
    let h = problem.hessian(&probe_point(l, u));
    if h.nrows() != n || h.ncols() != n {
        return Err(ValidationError::DimensionMismatch(format!(
            "Hessian is {}x{}, expected {n}x{n}",
            h.nrows(),
            h.ncols()
        )));
    }
    check_symmetric(&h)
}

/// `f(x) = 1/2 x'Hx + c'x + constant` with bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    hessian: SymmetricMatrix,
    dense: DMatrix<f64>,
    linear: DVector<f64>,
    constant: f64,
    lower: DVector<f64>,
    upper: DVector<f64>,
}

impl QuadraticProblem {
    pub fn new(
        hessian: SymmetricMatrix,
        linear: DVector<f64>,
        constant: f64,
        lower: DVector<f64>,
        upper: DVector<f64>,
    ) -> Result<Self, ValidationError> {
        let n = hessian.dim();
        if linear.len() != n || lower.len() != n || upper.len() != n {
            return Err(ValidationError::DimensionMismatch(format!(
                "Hessian is {n}x{n}; c, l, u have lengths {}, {}, {}",
                linear.len(),
                lower.len(),
                upper.len()
            )));
        }
        let dense = hessian.to_dense();
        Ok(Self { hessian, dense, linear, constant, lower, upper })
    }

    /// Builds from triplets covering both triangles. The matrix must be symmetric;
    /// it is folded into the canonical lower triangle afterwards.
    pub fn from_full_triplets(
        n: usize,
        triplets: &[(usize, usize, f64)],
        linear: DVector<f64>,
        lower: DVector<f64>,
        upper: DVector<f64>,
    ) -> Result<Self, ValidationError> {
        let mut full = DMatrix::zeros(n, n);
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(ValidationError::DimensionMismatch(format!(
                    "triplet ({i}, {j}) outside {n}x{n}"
                )));
            }
            full[(i, j)] += v;
        }
        check_symmetric(&full)?;
        Self::new(SymmetricMatrix::from_dense_lower(&full), linear, 0.0, lower, upper)
    }

    pub fn hessian_matrix(&self) -> &SymmetricMatrix {
        &self.hessian
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.linear
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Parses the text format; see the module docs.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_problem(text)
    }

    /// Canonical text form. `parse(serialize(p)) == p`.
    pub fn serialize(&self) -> String {
        let n = self.dim();
        let mut out = String::new();
        let _ = writeln!(out, "qp {n}");
        out.push_str("H\n");
        for &(i, j, v) in self.hessian.triplets() {
            let _ = writeln!(out, "{i} {j} {}", Real(v));
        }
        if self.constant != 0.0 {
            let _ = writeln!(out, "const\n{}", Real(self.constant));
        }
        for (name, vec) in [("c", &self.linear), ("l", &self.lower), ("u", &self.upper)] {
            let _ = writeln!(out, "{name}");
            let row: Vec<String> = vec.iter().map(|&v| Real(v).to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

impl BoundedProblem for QuadraticProblem {
    fn dim(&self) -> usize {
        self.hessian.dim()
    }

    fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&self.hessian.mul_vec(x)) + self.linear.dot(x) + self.constant
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.hessian.mul_vec(x) + &self.linear
    }

    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.dense.clone()
    }
}

type ValueFn = dyn Fn(&DVector<f64>) -> f64 + Send + Sync;
type GradFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
type HessFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// A bounded problem backed by user closures for `f`, `grad f` and `hess f`.
pub struct CallbackProblem {
    lower: DVector<f64>,
    upper: DVector<f64>,
    value: Box<ValueFn>,
    gradient: Box<GradFn>,
    hessian: Box<HessFn>,
}

impl CallbackProblem {
    pub fn new(
        lower: DVector<f64>,
        upper: DVector<f64>,
        value: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        hessian: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            lower,
            upper,
            value: Box::new(value),
            gradient: Box::new(gradient),
            hessian: Box::new(hessian),
        }
    }
}

impl fmt::Debug for CallbackProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CallbackProblem")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish_non_exhaustive()
    }
}

impl BoundedProblem for CallbackProblem {
    fn dim(&self) -> usize {
        self.lower.len()
    }
    fn lower(&self) -> &DVector<f64> {
        &self.lower
    }
    fn upper(&self) -> &DVector<f64> {
        &self.upper
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.gradient)(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.hessian)(x)
    }
}

/// Prints reals so they parse back bit-exactly, with `inf`/`-inf` tokens.
struct Real(f64);

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            f.write_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            f.write_str("-inf")
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("index ({row}, {col}) out of range for n = {n}")]
    IndexOutOfRange { row: usize, col: usize, n: usize },
    #[error("entry ({row}, {col}) is above the diagonal; only the lower triangle is stored")]
    UpperTriangle { row: usize, col: usize },
    #[error("missing section `{0}`")]
    MissingField(&'static str),
    #[error("section `{section}` expects {expected} values, found {found}")]
    WrongLength { section: &'static str, expected: usize, found: usize },
    #[error("invalid problem: {0}")]
    Invalid(ValidationError),
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Hessian,
    Constant,
    Vector(usize),
}

const VECTOR_SECTIONS: [&str; 3] = ["c", "l", "u"];

fn parse_real(tok: &str, line: usize) -> Result<f64, ParseError> {
    let v = match tok {
        "inf" | "+inf" => f64::INFINITY,
        "-inf" => f64::NEG_INFINITY,
        _ => tok.parse::<f64>().map_err(|_| ParseError {
            line,
            kind: ParseErrorKind::Syntax(format!("`{tok}` is not a number")),
        })?,
    };
    if v.is_nan() {
        return Err(ParseError { line, kind: ParseErrorKind::Syntax("NaN is not allowed".into()) });
    }
    Ok(v)
}

fn parse_index(tok: &str, line: usize) -> Result<usize, ParseError> {
    tok.parse::<usize>().map_err(|_| ParseError {
        line,
        kind: ParseErrorKind::Syntax(format!("`{tok}` is not a non-negative index")),
    })
}

pub fn parse_problem(text: &str) -> Result<QuadraticProblem, ParseError> {
    let mut n: Option<usize> = None;
    let mut section: Option<Section> = None;
    let mut triplets = Vec::new();
    let mut seen_hessian = false;
    let mut constant: Option<f64> = None;
    let mut vectors: [Option<Vec<f64>>; 3] = [None, None, None];
    let mut last_line = 0;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some(dim) = n else {
            match toks.as_slice() {
                ["qp", d] => {
                    n = Some(parse_index(d, line)?);
                    continue;
                }
                _ => {
                    return Err(ParseError {
                        line,
                        kind: ParseErrorKind::Syntax("expected header `qp <n>`".into()),
                    })
                }
            }
        };
        if toks.len() == 1 {
            let next = match toks[0] {
                "H" => Some(Section::Hessian),
                "const" => Some(Section::Constant),
                s => VECTOR_SECTIONS.iter().position(|&v| v == s).map(Section::Vector),
            };
            if let Some(next) = next {
                let dup = match next {
                    Section::Hessian => std::mem::replace(&mut seen_hessian, true),
                    Section::Constant => constant.is_some(),
                    Section::Vector(v) => vectors[v].is_some(),
                };
                if dup {
                    return Err(ParseError {
                        line,
                        kind: ParseErrorKind::Syntax(format!("duplicate section `{}`", toks[0])),
                    });
                }
                match next {
                    Section::Vector(v) => vectors[v] = Some(Vec::with_capacity(dim)),
                    Section::Constant => constant = Some(0.0),
                    Section::Hessian => {}
                }
                section = Some(next);
                continue;
            }
        }
        match section {
            None => {
                return Err(ParseError {
                    line,
                    kind: ParseErrorKind::Syntax("data before any section keyword".into()),
                })
            }
            Some(Section::Hessian) => {
                let [i, j, v] = toks.as_slice() else {
                    return Err(ParseError {
                        line,
                        kind: ParseErrorKind::Syntax("Hessian lines are `i j value`".into()),
                    });
                };
                let (i, j, v) = (parse_index(i, line)?, parse_index(j, line)?, parse_real(v, line)?);
                if i >= dim || j >= dim {
                    return Err(ParseError {
                        line,
                        kind: ParseErrorKind::IndexOutOfRange { row: i, col: j, n: dim },
                    });
                }
                if j > i {
                    return Err(ParseError { line, kind: ParseErrorKind::UpperTriangle { row: i, col: j } });
                }
                if !v.is_finite() {
                    return Err(ParseError {
                        line,
                        kind: ParseErrorKind::Syntax("Hessian entries must be finite".into()),
                    });
                }
                triplets.push((i, j, v));
            }
            Some(Section::Constant) => {
                let [v] = toks.as_slice() else {
                    return Err(ParseError {
                        line,
                        kind: ParseErrorKind::Syntax("`const` takes a single value".into()),
                    });
                };
                constant = Some(parse_real(v, line)?);
            }
            Some(Section::Vector(s)) => {
                let buf = vectors[s].as_mut().expect("section opened");
                for t in toks {
                    buf.push(parse_real(t, line)?);
                }
                if buf.len() > dim {
                    return Err(ParseError {
                        line,
                        kind: ParseErrorKind::WrongLength {
                            section: VECTOR_SECTIONS[s],
                            expected: dim,
                            found: buf.len(),
                        },
                    });
                }
            }
        }
    }

    let end = last_line.max(1);
    let Some(dim) = n else {
        return Err(ParseError { line: end, kind: ParseErrorKind::MissingField("qp") });
    };
    if !seen_hessian {
        return Err(ParseError { line: end, kind: ParseErrorKind::MissingField("H") });
    }
    let mut vecs = Vec::with_capacity(3);
    for (s, v) in vectors.into_iter().enumerate() {
        let Some(v) = v else {
            return Err(ParseError { line: end, kind: ParseErrorKind::MissingField(VECTOR_SECTIONS[s]) });
        };
        if v.len() != dim {
            return Err(ParseError {
                line: end,
                kind: ParseErrorKind::WrongLength { section: VECTOR_SECTIONS[s], expected: dim, found: v.len() },
            });
        }
        vecs.push(DVector::from_vec(v));
    }
    let hessian = SymmetricMatrix::from_lower_triplets(dim, triplets).map_err(|e| ParseError {
        line: end,
        kind: match e {
            TripletError::OutOfRange { row, col, n } => ParseErrorKind::IndexOutOfRange { row, col, n },
            TripletError::UpperTriangle { row, col } => ParseErrorKind::UpperTriangle { row, col },
            TripletError::NonFinite { .. } => ParseErrorKind::Syntax("non-finite Hessian entry".into()),
        },
    })?;
    let u = vecs.pop().unwrap();
    let l = vecs.pop().unwrap();
    let c = vecs.pop().unwrap();
    let problem = QuadraticProblem::new(hessian, c, constant.unwrap_or(0.0), l, u)
        .map_err(|e| ParseError { line: end, kind: ParseErrorKind::Invalid(e) })?;
    validate(&problem).map_err(|e| ParseError { line: end, kind: ParseErrorKind::Invalid(e) })?;
    Ok(problem)
}
