//! Minimax objectives, the saddle-gradient operator `F = (∇ₓf, −∇ᵧf)` and its
//! Jacobian `H = [[A, C], [−Cᵀ, −B]]`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Largest tolerated `|M − Mᵀ|` entry (relative to `max(1, ‖M‖)`) before a
/// block is rejected as non-symmetric.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Second-derivative blocks `A = ∇²ₓₓf`, `B = ∇²ᵧᵧf`, `C = ∇²ₓᵧf` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianBlocks {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl HessianBlocks {
    /// Validates shapes and symmetry, then replaces `A`, `B` by their
    /// symmetric parts.
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let d1 = a.nrows();
        let d2 = b.nrows();
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidProblem("d1 and d2 must be positive".into()));
        }
        if a.ncols() != d1 || b.ncols() != d2 || c.nrows() != d1 || c.ncols() != d2 {
            return Err(Error::InvalidProblem(format!(
                "block shapes A {}x{}, B {}x{}, C {}x{} are inconsistent",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        let finite = |m: &DMatrix<f64>| m.iter().all(|x| x.is_finite());
        if !(finite(&a) && finite(&b) && finite(&c)) {
            return Err(Error::InvalidProblem("blocks contain non-finite entries".into()));
        }
        for (name, m) in [("A", &a), ("B", &b)] {
            let scale = linalg::spectral_norm(m).max(1.0);
            let asym = linalg::asymmetry(m);
            if asym > SYMMETRY_TOL * scale {
                return Err(Error::InvalidProblem(format!(
                    "{name} is not symmetric (asymmetry {asym:.3e})"
                )));
            }
        }
        Ok(Self { a: linalg::symmetrize(&a), b: linalg::symmetrize(&b), c })
    }

    /// Splits a Jacobian `H` of the saddle gradient back into blocks.
    pub fn from_jacobian(h: &DMatrix<f64>, d1: usize) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n || d1 == 0 || d1 >= n {
            return Err(Error::InvalidProblem(format!(
                "cannot split a {}x{} Jacobian with d1 = {d1}",
                h.nrows(),
                h.ncols()
            )));
        }
        let d2 = n - d1;
        let a = h.view((0, 0), (d1, d1)).into_owned();
        let c = h.view((0, d1), (d1, d2)).into_owned();
        let b = -h.view((d1, d1), (d2, d2)).into_owned();
        Self::new(a, b, c)
    }

    pub fn d1(&self) -> usize {
        self.a.nrows()
    }

    pub fn d2(&self) -> usize {
        self.b.nrows()
    }

    /// `H = [[A, C], [−Cᵀ, −B]]`.
    pub fn jacobian(&self) -> DMatrix<f64> {
        let (d1, d2) = (self.d1(), self.d2());
        let mut h = DMatrix::zeros(d1 + d2, d1 + d2);
        h.view_mut((0, 0), (d1, d1)).copy_from(&self.a);
        h.view_mut((0, d1), (d1, d2)).copy_from(&self.c);
        h.view_mut((d1, 0), (d2, d1)).copy_from(&(-self.c.transpose()));
        h.view_mut((d1, d1), (d2, d2)).copy_from(&(-&self.b));
        h
    }
}

/// A smooth objective `f(x, y)` supplying values and gradients, and
/// optionally analytic second-derivative blocks. Implementations must be
/// pure.
pub trait Objective: Send + Sync {
    fn dims(&self) -> (usize, usize);
    fn value(&self, z: &DVector<f64>) -> Result<f64>;
    /// `(∇ₓf(z), ∇ᵧf(z))` stacked.
    fn gradient(&self, z: &DVector<f64>) -> Result<DVector<f64>>;
    fn hessian_blocks(&self, _z: &DVector<f64>) -> Option<Result<HessianBlocks>> {
        None
    }
}

/// `f(x, y) = ½xᵀAx + xᵀCy + ½yᵀBy`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpec {
    blocks: HessianBlocks,
}

impl QuadraticSpec {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        Ok(Self { blocks: HessianBlocks::new(a, b, c)? })
    }

    /// Builds from row-major nested vectors.
    pub fn from_rows(a: &[Vec<f64>], b: &[Vec<f64>], c: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(a)?, matrix_from_rows(b)?, matrix_from_rows(c)?)
    }

    pub fn scalar(a: f64, b: f64, c: f64) -> Self {
        Self::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, b),
            DMatrix::from_element(1, 1, c),
        )
        .expect("scalar blocks are always valid")
    }

    pub fn blocks(&self) -> &HessianBlocks {
        &self.blocks
    }

    /// `‖H‖₂`, a global bound on `‖DF‖` for a quadratic.
    pub fn lipschitz(&self) -> f64 {
        linalg::spectral_norm(&self.blocks.jacobian())
    }
}

impl Objective for QuadraticSpec {
    fn dims(&self) -> (usize, usize) {
        (self.blocks.d1(), self.blocks.d2())
    }

    fn value(&self, z: &DVector<f64>) -> Result<f64> {
        let (x, y) = split(z, self.blocks.d1());
        let HessianBlocks { a, b, c } = &self.blocks;
        Ok(0.5 * x.dot(&(a * &x)) + x.dot(&(c * &y)) + 0.5 * y.dot(&(b * &y)))
    }

    fn gradient(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let (x, y) = split(z, self.blocks.d1());
        let HessianBlocks { a, b, c } = &self.blocks;
        let gx = a * &x + c * &y;
        let gy = c.transpose() * &x + b * &y;
        Ok(concat(&gx, &gy))
    }

    fn hessian_blocks(&self, _z: &DVector<f64>) -> Option<Result<HessianBlocks>> {
        Some(Ok(self.blocks.clone()))
    }
}

type ValueFn = dyn Fn(&DVector<f64>) -> f64 + Send + Sync;
type GradFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
type BlocksFn = dyn Fn(&DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) + Send + Sync;

/// A user-supplied smooth objective built from closures.
#[derive(Clone)]
pub struct SmoothProblem {
    d1: usize,
    d2: usize,
    value: Arc<ValueFn>,
    grad: Arc<GradFn>,
    blocks: Option<Arc<BlocksFn>>,
}

impl SmoothProblem {
    pub fn new(
        d1: usize,
        d2: usize,
        value: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { d1, d2, value: Arc::new(value), grad: Arc::new(grad), blocks: None }
    }

    /// Attaches analytic `(A, B, C)`.
    pub fn with_hessian(
        mut self,
        blocks: impl Fn(&DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)
            + Send
            + Sync
            + 'static,
    ) -> Self {
        self.blocks = Some(Arc::new(blocks));
        self
    }
}

impl fmt::Debug for SmoothProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothProblem")
            .field("d1", &self.d1)
            .field("d2", &self.d2)
            .field("analytic_hessian", &self.blocks.is_some())
            .finish()
    }
}

impl Objective for SmoothProblem {
    fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    fn value(&self, z: &DVector<f64>) -> Result<f64> {
        let v = (self.value)(z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!("f(z) = {v}")))
        }
    }

    fn gradient(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let g = (self.grad)(z);
        if g.len() != self.d1 + self.d2 {
            return Err(Error::Dimension { expected: self.d1 + self.d2, got: g.len() });
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Evaluation("gradient has non-finite entries".into()));
        }
        Ok(g)
    }

    fn hessian_blocks(&self, z: &DVector<f64>) -> Option<Result<HessianBlocks>> {
        self.blocks.as_ref().map(|f| {
            let (a, b, c) = f(z);
            HessianBlocks::new(a, b, c)
        })
    }
}

/// An objective together with its Lipschitz bound `L ≥ ‖DF‖`.
#[derive(Clone)]
pub struct MinimaxProblem {
    objective: Arc<dyn Objective>,
    lipschitz: f64,
    name: String,
    quadratic: Option<QuadraticSpec>,
}

impl fmt::Debug for MinimaxProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MinimaxProblem")
            .field("name", &self.name)
            .field("dims", &self.objective.dims())
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl MinimaxProblem {
    pub fn quadratic(spec: QuadraticSpec) -> Self {
        Self::quadratic_named(spec, "quadratic")
    }

    pub fn quadratic_named(spec: QuadraticSpec, name: impl Into<String>) -> Self {
        Self {
            lipschitz: spec.lipschitz(),
            objective: Arc::new(spec.clone()),
            name: name.into(),
            quadratic: Some(spec),
        }
    }

    /// Wraps a general objective. `L` is never inferred for non-quadratic
    /// problems.
    pub fn new(objective: impl Objective + 'static, lipschitz: f64) -> Result<Self> {
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "Lipschitz bound must be positive, got {lipschitz}"
            )));
        }
        let (d1, d2) = objective.dims();
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidProblem("d1 and d2 must be positive".into()));
        }
        Ok(Self { objective: Arc::new(objective), lipschitz, name: "custom".into(), quadratic: None })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d1(&self) -> usize {
        self.objective.dims().0
    }

    pub fn d2(&self) -> usize {
        self.objective.dims().1
    }

    pub fn dim(&self) -> usize {
        self.d1() + self.d2()
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn as_quadratic(&self) -> Option<&QuadraticSpec> {
        self.quadratic.as_ref()
    }

    fn check_len(&self, z: &DVector<f64>) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: z.len() });
        }
        Ok(())
    }

    pub fn value(&self, z: &DVector<f64>) -> Result<f64> {
        self.check_len(z)?;
        self.objective.value(z)
    }

    /// `F(z) = (∇ₓf(z), −∇ᵧf(z))`.
    pub fn saddle_gradient(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(z)?;
        let mut g = self.objective.gradient(z)?;
        g.rows_mut(self.d1(), self.d2()).neg_mut();
        Ok(g)
    }

    /// `H(z) = DF(z)`; central finite differences of `F` when the objective
    /// has no analytic blocks.
    pub fn jacobian(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_len(z)?;
        match self.objective.hessian_blocks(z) {
            Some(blocks) => Ok(blocks?.jacobian()),
            None => self.jacobian_fd(z),
        }
    }

    /// Central-difference Jacobian of `F` with step
    /// `cbrt(eps) · max(1, ‖z‖)`.
    pub fn jacobian_fd(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_len(z)?;
        let n = self.dim();
        let h = f64::EPSILON.cbrt() * z.norm().max(1.0);
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += h;
            zm[k] -= h;
            let col = (self.saddle_gradient(&zp)? - self.saddle_gradient(&zm)?) / (2.0 * h);
            jac.set_column(k, &col);
        }
        Ok(jac)
    }

    pub fn hessian_blocks(&self, z: &DVector<f64>) -> Result<HessianBlocks> {
        self.check_len(z)?;
        match self.objective.hessian_blocks(z) {
            Some(blocks) => blocks,
            None => {
                let h = self.jacobian_fd(z)?;
                let d1 = self.d1();
                // FD noise breaks exact skew structure of the off-diagonal blocks.
                let c_top = h.view((0, d1), (d1, self.d2())).into_owned();
                let c_bottom = -h.view((d1, 0), (self.d2(), d1)).transpose();
                let a = linalg::symmetrize(&h.view((0, 0), (d1, d1)).into_owned());
                let b = linalg::symmetrize(&(-h.view((d1, d1), (self.d2(), self.d2()))));
                HessianBlocks::new(a, b, (c_top + c_bottom) * 0.5)
            }
        }
    }
}

/// The shipped example instances.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    /// `f(x, y) = xy`.
    Bilinear,
    /// `d1 = d2 = 1`, `A = [a]`, `B = [0]`, `C = [c]`.
    ScalarDegenerate { a: f64, c: f64 },
    /// Quadratic with invertible `B`; defaults to `A = [2]`, `B = [−1]`, `C = [1]`.
    NondegenerateQuadratic(Option<QuadraticSpec>),
    /// `A = diag(1, −1)`, `B = diag(−1, 0)`, `C = [[1, 1], [0, 0]]`; the
    /// restricted Schur complement is `[−1]`.
    StrictNonminimaxDemo,
}

pub const BUILTIN_NAMES: [&str; 4] =
    ["bilinear", "scalar_degenerate", "nondegenerate_quadratic", "strict_nonminimax_demo"];

impl Builtin {
    /// Parses `bilinear`, `scalar_degenerate(a,c)`, `nondegenerate_quadratic`
    /// or `strict_nonminimax_demo`. `scalar_degenerate` without arguments
    /// uses `a = 2, c = 1`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        let (head, args) = match name.split_once('(') {
            Some((head, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::UnknownProblem(name.to_string()))?;
                let args = inner
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::UnknownProblem(name.to_string()))?;
                (head.trim(), args)
            }
            None => (name, Vec::new()),
        };
        match (head, args.as_slice()) {
            ("bilinear", []) => Ok(Self::Bilinear),
            ("scalar_degenerate", []) => Ok(Self::ScalarDegenerate { a: 2.0, c: 1.0 }),
            ("scalar_degenerate", [a, c]) => Ok(Self::ScalarDegenerate { a: *a, c: *c }),
            ("nondegenerate_quadratic", []) => Ok(Self::NondegenerateQuadratic(None)),
            ("strict_nonminimax_demo", []) => Ok(Self::StrictNonminimaxDemo),
            _ => Err(Error::UnknownProblem(name.to_string())),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Bilinear => "bilinear".into(),
            Self::ScalarDegenerate { a, c } => format!("scalar_degenerate({a},{c})"),
            Self::NondegenerateQuadratic(_) => "nondegenerate_quadratic".into(),
            Self::StrictNonminimaxDemo => "strict_nonminimax_demo".into(),
        }
    }

    pub fn spec(&self) -> Result<QuadraticSpec> {
        match self {
            Self::Bilinear => Ok(QuadraticSpec::scalar(0.0, 0.0, 1.0)),
            Self::ScalarDegenerate { a, c } => {
                QuadraticSpec::new(
                    DMatrix::from_element(1, 1, *a),
                    DMatrix::zeros(1, 1),
                    DMatrix::from_element(1, 1, *c),
                )
            }
            Self::NondegenerateQuadratic(None) => Ok(QuadraticSpec::scalar(2.0, -1.0, 1.0)),
            Self::NondegenerateQuadratic(Some(spec)) => {
                if linalg::rcond(&spec.blocks().b) < 1e-12 {
                    return Err(Error::InvalidProblem(
                        "nondegenerate_quadratic requires an invertible B".into(),
                    ));
                }
                Ok(spec.clone())
            }
            Self::StrictNonminimaxDemo => QuadraticSpec::new(
                DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
                DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.0]),
                DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]),
            ),
        }
    }

    pub fn problem(&self) -> Result<MinimaxProblem> {
        Ok(MinimaxProblem::quadratic_named(self.spec()?, self.name()))
    }
}

/// Looks up a builtin instance by name, e.g. `"bilinear"` or
/// `"scalar_degenerate(2,1)"`.
pub fn builtin_problem(name: &str) -> Result<MinimaxProblem> {
    Builtin::parse(name)?.problem()
}

/// On-disk problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemFile {
    Quadratic {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        #[serde(rename = "B")]
        b: Vec<Vec<f64>>,
        #[serde(rename = "C")]
        c: Vec<Vec<f64>>,
    },
    Builtin {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
}

impl ProblemFile {
    pub fn from_quadratic(spec: &QuadraticSpec) -> Self {
        let b = spec.blocks();
        Self::Quadratic { a: matrix_rows(&b.a), b: matrix_rows(&b.b), c: matrix_rows(&b.c) }
    }

    pub fn to_problem(&self) -> Result<MinimaxProblem> {
        match self {
            Self::Quadratic { a, b, c } => {
                Ok(MinimaxProblem::quadratic(QuadraticSpec::from_rows(a, b, c)?))
            }
            Self::Builtin { name, a, c } => {
                let builtin = match (Builtin::parse(name)?, a, c) {
                    (Builtin::ScalarDegenerate { a: a0, c: c0 }, a, c) => Builtin::ScalarDegenerate {
                        a: a.unwrap_or(a0),
                        c: c.unwrap_or(c0),
                    },
                    (other, None, None) => other,
                    _ => {
                        return Err(Error::InvalidProblem(format!(
                            "builtin `{name}` takes no parameters"
                        )))
                    }
                };
                builtin.problem()
            }
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidProblem("ragged matrix rows".into()));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidProblem("matrix entries must be finite".into()));
    }
    Ok(DMatrix::from_row_iterator(nrows, ncols, rows.iter().flatten().copied()))
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub(crate) fn split(z: &DVector<f64>, d1: usize) -> (DVector<f64>, DVector<f64>) {
    (z.rows(0, d1).into_owned(), z.rows(d1, z.len() - d1).into_owned())
}

pub(crate) fn concat(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(x.len() + y.len(), x.iter().chain(y.iter()).copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    fn x2y() -> MinimaxProblem {
        let p = SmoothProblem::new(
            1,
            1,
            |z| z[0] * z[0] * z[1],
            |z| v(&[2.0 * z[0] * z[1], z[0] * z[0]]),
        );
        MinimaxProblem::new(p, 10.0).unwrap()
    }

    #[test]
    fn saddle_gradient_examples() {
        let bil = builtin_problem("bilinear").unwrap();
        assert_eq!(bil.saddle_gradient(&v(&[1.0, 1.0])).unwrap(), v(&[1.0, -1.0]));

        let q = MinimaxProblem::quadratic(QuadraticSpec::scalar(2.0, -1.0, 1.0));
        assert_eq!(q.saddle_gradient(&v(&[0.0, 0.0])).unwrap(), v(&[0.0, 0.0]));
        assert_eq!(q.saddle_gradient(&v(&[1.0, 2.0])).unwrap(), v(&[4.0, 1.0]));
    }

    #[test]
    fn wrong_length_is_rejected() {
        let bil = builtin_problem("bilinear").unwrap();
        assert!(matches!(
            bil.saddle_gradient(&v(&[1.0])),
            Err(Error::Dimension { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn jacobian_examples() {
        let bil = builtin_problem("bilinear").unwrap();
        let h = bil.jacobian(&v(&[3.0, -7.0])).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));

        let fd = x2y().jacobian(&v(&[1.0, 1.0])).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 2.0, -2.0, 0.0]);
        assert!((fd - expected).amax() < 1e-6);

        let blocks = x2y().hessian_blocks(&v(&[1.0, 1.0])).unwrap();
        assert!((blocks.a[(0, 0)] - 2.0).abs() < 1e-6);
        assert!((blocks.c[(0, 0)] - 2.0).abs() < 1e-6);
        assert!(blocks.b[(0, 0)].abs() < 1e-6);
    }

    #[test]
    fn quadratic_jacobian_is_exact_block_form() {
        let spec = Builtin::StrictNonminimaxDemo.spec().unwrap();
        let h = MinimaxProblem::quadratic(spec.clone()).jacobian(&DVector::zeros(4)).unwrap();
        let b = spec.blocks();
        assert_eq!(h.view((0, 0), (2, 2)), b.a);
        assert_eq!(h.view((0, 2), (2, 2)), b.c);
        assert_eq!(h.view((2, 0), (2, 2)), -b.c.transpose());
        assert_eq!(h.view((2, 2), (2, 2)), -&b.b);
    }

    #[test]
    fn builtin_catalogue() {
        let bil = Builtin::Bilinear.spec().unwrap();
        assert_eq!(bil.blocks().a[(0, 0)], 0.0);
        assert_eq!(bil.blocks().b[(0, 0)], 0.0);
        assert_eq!(bil.blocks().c[(0, 0)], 1.0);

        let sd = Builtin::parse("scalar_degenerate(2, 1)").unwrap().spec().unwrap();
        assert_eq!(
            (sd.blocks().a[(0, 0)], sd.blocks().b[(0, 0)], sd.blocks().c[(0, 0)]),
            (2.0, 0.0, 1.0)
        );
        assert!(matches!(builtin_problem("rosenbrock"), Err(Error::UnknownProblem(_))));
        assert!(builtin_problem("bilinear(3)").is_err());
    }

    #[test]
    fn asymmetric_block_is_rejected_and_small_noise_symmetrized() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let err = HessianBlocks::new(a, DMatrix::zeros(1, 1), DMatrix::zeros(2, 1));
        assert!(matches!(err, Err(Error::InvalidProblem(_))));

        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5 + 1e-12, 1.0]);
        let ok = HessianBlocks::new(a, DMatrix::zeros(1, 1), DMatrix::zeros(2, 1)).unwrap();
        assert_eq!(ok.a, ok.a.transpose());
    }

    #[test]
    fn lipschitz_of_quadratic_is_spectral_norm() {
        let p = builtin_problem("scalar_degenerate(-2,1)").unwrap();
        assert!((p.lipschitz() - (1.0 + 2f64.sqrt())).abs() < 1e-10);
        let bil = builtin_problem("bilinear").unwrap();
        assert!((bil.lipschitz() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_positive_lipschitz_is_rejected() {
        let p = SmoothProblem::new(1, 1, |_| 0.0, |_| v(&[0.0, 0.0]));
        assert!(MinimaxProblem::new(p, 0.0).is_err());
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences_on_builtins() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for name in ["bilinear", "scalar_degenerate(2,1)", "nondegenerate_quadratic", "strict_nonminimax_demo"] {
            let p = builtin_problem(name).unwrap();
            for _ in 0..100 {
                let z = DVector::from_fn(p.dim(), |_, _| rng.random_range(-3.0..3.0));
                let h = p.jacobian(&z).unwrap();
                let fd = p.jacobian_fd(&z).unwrap();
                for (x, y) in h.iter().zip(fd.iter()) {
                    assert!((x - y).abs() <= 1e-5 * x.abs().max(1.0), "{name}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn quadratic_saddle_gradient_is_linear() {
        let p = builtin_problem("strict_nonminimax_demo").unwrap();
        let z = v(&[0.3, -1.2, 0.7, 2.0]);
        let fz = p.saddle_gradient(&z).unwrap();
        for alpha in [0.0, 1.0, -2.0] {
            assert_eq!(p.saddle_gradient(&(&z * alpha)).unwrap(), &fz * alpha);
        }
    }

    #[test]
    fn problem_file_round_trip() {
        let spec = Builtin::StrictNonminimaxDemo.spec().unwrap();
        let file = ProblemFile::from_quadratic(&spec);
        let text = serde_json::to_string(&file).unwrap();
        assert!(text.contains("\"kind\":\"quadratic\""));
        let back: ProblemFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_problem().unwrap().as_quadratic(), Some(&spec));

        let b: ProblemFile = serde_json::from_str(r#"{"kind":"builtin","name":"bilinear"}"#).unwrap();
        assert_eq!(b.to_problem().unwrap().name(), "bilinear");
        let sd: ProblemFile =
            serde_json::from_str(r#"{"kind":"builtin","name":"scalar_degenerate","a":-2,"c":1}"#)
                .unwrap();
        assert_eq!(sd.to_problem().unwrap().name(), "scalar_degenerate(-2,1)");
    }
}
