//! Spectral classification of a stationary point from its Hessian blocks:
//! canonical form of `B`, the restricted Schur complement, eigencurves of
//! `H_τ = Λ_τH` as `ε = 1/τ → 0`, hemicurvatures and the threshold `s₀`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::assignment::{match_points, min_cost_assignment};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::linalg;
use crate::problems::HessianBlocks;
use crate::report::Real;

/// Numerical thresholds shared by the spectral and stability layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Eigenvalues of `B` below `rank_tol · ‖B‖` count as zero.
    pub rank_tol: f64,
    /// PSD decisions use `max(psd_rel · ‖M‖, psd_abs)`.
    pub psd_rel: f64,
    pub psd_abs: f64,
    /// Stability margins within this band are reported as marginal.
    pub marginal_tol: f64,
    /// Relative gap below which singular values count as repeated.
    pub sep_tol: f64,
    /// `H` with reciprocal condition at or below this is singular.
    pub singular_rcond: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: 1e-9,
            psd_rel: 1e-8,
            psd_abs: 1e-10,
            marginal_tol: 1e-8,
            sep_tol: 1e-6,
            singular_rcond: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn psd_tol(&self, m: &DMatrix<f64>) -> f64 {
        (self.psd_rel * linalg::spectral_norm(m)).max(self.psd_abs)
    }
}

/// `B = PΔPᵀ` with the `r` nonzero eigenvalues leading (descending modulus),
/// and `CP = [C₁ C₂]`.
#[derive(Debug, Clone)]
pub struct CanonicalBlocks {
    pub a: DMatrix<f64>,
    /// Diagonal of `Δ` in canonical order, sub-threshold entries set to zero.
    pub delta: Vec<f64>,
    /// `D = −diag(δ₁..δ_r)`.
    pub d: Vec<f64>,
    pub p: DMatrix<f64>,
    pub r: usize,
    pub c_canon: DMatrix<f64>,
    pub c1: DMatrix<f64>,
    pub c2: DMatrix<f64>,
}

impl CanonicalBlocks {
    pub fn d1(&self) -> usize {
        self.a.nrows()
    }

    pub fn d2(&self) -> usize {
        self.delta.len()
    }

    pub fn b_diag(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.delta))
    }

    /// `P Δ Pᵀ`.
    pub fn reconstruct_b(&self) -> DMatrix<f64> {
        &self.p * self.b_diag() * self.p.transpose()
    }

    /// `B† = P Δ† Pᵀ`.
    pub fn b_pinv(&self) -> DMatrix<f64> {
        let inv = DVector::from_iterator(
            self.d2(),
            self.delta.iter().map(|&x| if x == 0.0 { 0.0 } else { 1.0 / x }),
        );
        &self.p * DMatrix::from_diagonal(&inv) * self.p.transpose()
    }
}

pub fn canonicalize(blocks: &HessianBlocks, rank_tol: f64) -> CanonicalBlocks {
    let d2 = blocks.d2();
    let (values, vectors) = linalg::sym_eigen_sorted(&blocks.b);
    let norm_b = values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let cutoff = rank_tol * norm_b;

    let mut order: Vec<usize> = (0..d2).collect();
    let nonzero = |i: usize| norm_b > 0.0 && values[i].abs() > cutoff;
    order.sort_by(|&i, &j| {
        nonzero(j)
            .cmp(&nonzero(i))
            .then(values[j].abs().total_cmp(&values[i].abs()))
    });
    let r = order.iter().filter(|&&i| nonzero(i)).count();

    let mut p = DMatrix::zeros(d2, d2);
    let mut delta = Vec::with_capacity(d2);
    for (dst, &src) in order.iter().enumerate() {
        p.set_column(dst, &vectors.column(src));
        delta.push(if dst < r { values[src] } else { 0.0 });
    }
    let c_canon = &blocks.c * &p;
    CanonicalBlocks {
        a: blocks.a.clone(),
        d: delta[..r].iter().map(|x| -x).collect(),
        c1: c_canon.columns(0, r).into_owned(),
        c2: c_canon.columns(r, d2 - r).into_owned(),
        delta,
        p,
        r,
        c_canon,
    }
}

/// `S = A − CB†Cᵀ` and its restriction `S_res = UᵀSU` to `range(C₂)^⊥`.
#[derive(Debug, Clone)]
pub struct RestrictedSchur {
    pub u: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub s_res: DMatrix<f64>,
    /// Eigenvalues of `S_res`, ascending.
    pub spectrum: Vec<f64>,
    pub gamma_rank: usize,
}

impl RestrictedSchur {
    pub fn w(&self) -> usize {
        self.u.ncols()
    }

    /// A 0×0 `S_res` is vacuously positive semidefinite.
    pub fn is_vacuous(&self) -> bool {
        self.w() == 0
    }

    pub fn lambda_min(&self) -> f64 {
        self.spectrum.first().copied().unwrap_or(f64::INFINITY)
    }
}

pub fn restricted_schur(canon: &CanonicalBlocks) -> RestrictedSchur {
    let d_inv = DMatrix::from_diagonal(&DVector::from_iterator(
        canon.r,
        canon.d.iter().map(|x| 1.0 / x),
    ));
    let s = linalg::symmetrize(&(&canon.a + &canon.c1 * d_inv * canon.c1.transpose()));
    let (u, gamma_rank) = linalg::orthogonal_complement(&canon.c2);
    let s_res = linalg::symmetrize(&(u.transpose() * &s * &u));
    let spectrum = linalg::sym_eigenvalues(&s_res);
    RestrictedSchur { u, s, s_res, spectrum, gamma_rank }
}

/// Independent check of the PSD verdict on `{v : Cᵀv ∈ range(B)}`.
///
/// The subspace is built from an SVD pseudoinverse of the original `B`
/// (no canonical form) and `S` is recomputed as `A − CB†Cᵀ`. Random Gaussian
/// vectors are projected onto the subspace; the minimum of `vᵀSv/‖v‖²` over
/// the span of the samples (Rayleigh–Ritz) is compared against `−psd_tol`.
/// Returns `true` when the subspace is `{0}`.
pub fn rsc_subspace_oracle(
    blocks: &HessianBlocks,
    n_samples: usize,
    seed: u64,
    rank_tol: f64,
    psd_tol: f64,
) -> bool {
    let d1 = blocks.d1();
    let d2 = blocks.d2();
    let norm_b = linalg::spectral_norm(&blocks.b);
    let b_pinv = if norm_b == 0.0 {
        DMatrix::zeros(d2, d2)
    } else {
        linalg::pinv(&blocks.b, rank_tol * norm_b)
    };
    let s = &blocks.a - &blocks.c * &b_pinv * blocks.c.transpose();
    // Cᵀv ∈ range(B) ⇔ (I − BB†)Cᵀv = 0.
    let m = (DMatrix::identity(d2, d2) - &blocks.b * &b_pinv) * blocks.c.transpose();
    let norm_m = linalg::spectral_norm(&m);
    let projector = if norm_m == 0.0 {
        DMatrix::identity(d1, d1)
    } else {
        let m_pinv = linalg::pinv(&m, 1e-10 * norm_m);
        DMatrix::identity(d1, d1) - m_pinv * &m
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = DMatrix::zeros(d1, n_samples);
    let mut min_quotient = f64::INFINITY;
    for k in 0..n_samples {
        let g = DVector::from_fn(d1, |_, _| StandardNormal.sample(&mut rng));
        let v = &projector * g;
        let nv = v.norm();
        if nv > 1e-8 {
            min_quotient = min_quotient.min(v.dot(&(&s * &v)) / (nv * nv));
        }
        samples.set_column(k, &v);
    }
    if !min_quotient.is_finite() {
        return true;
    }
    let (values, basis) = linalg::left_singular(&samples);
    let cutoff = 1e-8 * values.first().copied().unwrap_or(0.0);
    let k = values.iter().filter(|&&x| x > cutoff).count();
    let q = basis.columns(0, k).into_owned();
    let ritz = linalg::sym_eigenvalues(&(q.transpose() * &s * &q));
    let min_ritz = ritz.first().copied().unwrap_or(f64::INFINITY);
    min_quotient.min(min_ritz) >= -psd_tol
}

/// Second-order necessary conditions `B ⪯ 0` and `S_res ⪰ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrder {
    #[serde(rename = "B_nsd")]
    pub b_nsd: bool,
    #[serde(rename = "Sres_psd")]
    pub sres_psd: bool,
    pub lambda_max_b: Real,
    pub lambda_min_sres: Real,
    /// Eigenvalues within the PSD tolerance of zero.
    pub b_marginal: bool,
    pub sres_marginal: bool,
}

pub fn second_order_necessary(
    blocks: &HessianBlocks,
    schur: &RestrictedSchur,
    tol: &Tolerances,
) -> SecondOrder {
    let b_max = linalg::sym_eigenvalues(&blocks.b).last().copied().unwrap_or(f64::NEG_INFINITY);
    let b_tol = tol.psd_tol(&blocks.b);
    let s_min = schur.lambda_min();
    let s_tol = tol.psd_tol(&schur.s_res);
    SecondOrder {
        b_nsd: b_max <= b_tol,
        sres_psd: s_min >= -s_tol,
        lambda_max_b: Real(b_max),
        lambda_min_sres: Real(s_min),
        b_marginal: b_max.abs() <= b_tol,
        sres_marginal: !schur.is_vacuous() && s_min.abs() <= s_tol,
    }
}

/// `λ_min(S_res) < −tol` or `λ_min(−B) < −tol`.
pub fn is_strict_non_minimax(blocks: &HessianBlocks, schur: &RestrictedSchur, tol: f64) -> bool {
    let neg_b_min = linalg::sym_eigenvalues(&(-&blocks.b)).first().copied().unwrap_or(0.0);
    schur.lambda_min() < -tol || neg_b_min < -tol
}

/// `H_τ = Λ_τH`.
pub fn timescaled_hessian(h: &DMatrix<f64>, d1: usize, tau: f64) -> DMatrix<f64> {
    crate::dynamics::apply_lambda_rows(h, d1, tau)
}

/// `[[εA, √εC], [−√εCᵀ, −B]]`, similar to `H_τ` via `diag(√ε I, I)` and far
/// better conditioned for small `ε`.
pub fn balanced_timescaled(blocks: &HessianBlocks, eps: f64) -> DMatrix<f64> {
    let (d1, d2) = (blocks.d1(), blocks.d2());
    let r = eps.sqrt();
    let mut m = DMatrix::zeros(d1 + d2, d1 + d2);
    m.view_mut((0, 0), (d1, d1)).copy_from(&(&blocks.a * eps));
    m.view_mut((0, d1), (d1, d2)).copy_from(&(&blocks.c * r));
    m.view_mut((d1, 0), (d2, d1)).copy_from(&(blocks.c.transpose() * -r));
    m.view_mut((d1, d1), (d2, d2)).copy_from(&(-&blocks.b));
    m
}

/// `spec(H_τ)`, computed on the balanced similar matrix.
pub fn timescaled_spectrum(blocks: &HessianBlocks, tau: f64) -> Result<Vec<Complex64>> {
    linalg::eigenvalues(&balanced_timescaled(blocks, 1.0 / tau))
}

/// Finite roots of `det[[μI − A, −C], [Cᵀ, B]] = 0`.
///
/// The determinant is `det(μE − H)` with `E = diag(I, 0)`. Since `H` is
/// invertible this vanishes iff `1/μ` is a nonzero eigenvalue of
/// `X = (H⁻¹)₁₁`; zero eigenvalues of `X` are the infinite roots.
pub fn mu_roots_oracle(blocks: &HessianBlocks) -> Result<Vec<Complex64>> {
    let h = blocks.jacobian();
    let h_inv = linalg::inverse_checked(&h)
        .map_err(|_| Error::SingularHessian { rcond: linalg::rcond(&h) })?;
    let d1 = blocks.d1();
    let x = h_inv.view((0, 0), (d1, d1)).into_owned();
    let scale = linalg::spectral_norm(&x);
    let kappas = linalg::eigenvalues(&x)?;
    let mut roots: Vec<Complex64> = kappas
        .into_iter()
        .filter(|k| k.norm() > 1e-6 * scale)
        .map(|k| k.inv())
        .collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(roots)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveType {
    SqrtEpsPair,
    LinearEps,
    OrderOne,
}

impl CurveType {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveType::SqrtEpsPair => "sqrt_eps_pair",
            CurveType::LinearEps => "linear_eps",
            CurveType::OrderOne => "order_one",
        }
    }

    fn target_slope(self) -> f64 {
        match self {
            CurveType::SqrtEpsPair => 0.5,
            CurveType::LinearEps => 1.0,
            CurveType::OrderOne => 0.0,
        }
    }

    fn from_slope(slope: f64, band: f64) -> Option<Self> {
        [CurveType::SqrtEpsPair, CurveType::LinearEps, CurveType::OrderOne]
            .into_iter()
            .find(|t| (slope - t.target_slope()).abs() <= band)
    }
}

/// `n` points geometrically spaced from `start` to `end` inclusive.
pub fn geometric_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (start.ln(), end.ln());
            (0..n)
                .map(|k| {
                    if k == 0 {
                        start
                    } else if k == n - 1 {
                        end
                    } else {
                        (a + (b - a) * k as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// 40 points from `1e−1` down to `1e−9`.
pub fn default_eps_grid() -> Vec<f64> {
    geometric_grid(1e-1, 1e-9, 40)
}

#[derive(Debug, Clone)]
pub struct CurveConfig {
    pub eps_grid: Vec<f64>,
    pub tol: Tolerances,
    /// Half-width of the slope bands around 0.5, 1 and 0.
    pub slope_band: f64,
    pub exec: Execution,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            eps_grid: default_eps_grid(),
            tol: Tolerances::default(),
            slope_band: 0.15,
            exec: Execution::default(),
        }
    }
}

/// Two conjugate square-root curves sharing a singular value of `C₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqrtPair {
    pub sigma: f64,
    pub curves: Vec<usize>,
    pub iota: Real,
}

#[derive(Debug, Clone)]
pub struct EigenCurves {
    pub eps_grid: Vec<f64>,
    /// `lambda[j][k]` is curve `j` at `eps_grid[k]`.
    pub lambda: Vec<Vec<Complex64>>,
    pub labels: Vec<CurveType>,
    pub slopes: Vec<f64>,
    /// Matched singular value of `C₂`, for square-root curves.
    pub sigma: Vec<Option<f64>>,
    pub iota: Vec<Option<f64>>,
    /// Pairs in descending `σ` order.
    pub pairs: Vec<SqrtPair>,
    pub s0: f64,
    pub r: usize,
    pub d1: usize,
    pub d2: usize,
}

impl EigenCurves {
    pub fn counts(&self) -> (usize, usize, usize) {
        let count = |t| self.labels.iter().filter(|&&l| l == t).count();
        (count(CurveType::SqrtEpsPair), count(CurveType::LinearEps), count(CurveType::OrderOne))
    }

    pub fn expected_counts(&self) -> (usize, usize, usize) {
        (2 * (self.d2 - self.r), self.d1 + self.r - self.d2, self.r)
    }

    /// Estimated `ι_j`; only defined for square-root curves.
    pub fn hemicurvature(&self, j: usize) -> Result<f64> {
        self.iota.get(j).copied().flatten().ok_or_else(|| {
            Error::Precondition(format!("curve {j} is not a sqrt_eps_pair curve"))
        })
    }

    /// Signed discrete curvature of curve `j` from its three finest points,
    /// oriented so that `−κ/2` estimates `ι_j`.
    pub fn curvature(&self, j: usize) -> f64 {
        let pts = &self.lambda[j];
        let n = pts.len();
        // Finest three, ordered by increasing ε.
        let (p1, p2, p3) = (pts[n - 1], pts[n - 2], pts[n - 3]);
        signed_menger_curvature(p1, p2, p3) * pts[n - 1].im.signum()
    }

    /// Rows `(eps, j, re, im, label)` for CSV export.
    pub fn rows(&self) -> impl Iterator<Item = (f64, usize, Complex64, &'static str)> + '_ {
        self.eps_grid.iter().enumerate().flat_map(move |(k, &eps)| {
            (0..self.lambda.len())
                .map(move |j| (eps, j, self.lambda[j][k], self.labels[j].as_str()))
        })
    }
}

/// `s₀ = max(−ι_j)`; `−∞` when there are no square-root curves.
pub fn s_zero(iotas: &[f64]) -> f64 {
    iotas.iter().map(|i| -i).fold(f64::NEG_INFINITY, f64::max)
}

pub fn signed_menger_curvature(p1: Complex64, p2: Complex64, p3: Complex64) -> f64 {
    let a = p2 - p1;
    let b = p3 - p2;
    let cross = a.re * b.im - a.im * b.re;
    let denom = a.norm() * b.norm() * (p3 - p1).norm();
    if denom == 0.0 {
        0.0
    } else {
        2.0 * cross / denom
    }
}

fn check_grid(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::InvalidParams("eps grid must lie in (0, 1]".into()));
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParams("eps grid must be strictly decreasing".into()));
    }
    Ok(())
}

/// Spectra of `H_τ` over the grid, continued into curves by optimal
/// assignment between neighbouring grid points. Each curve is first
/// extrapolated geometrically (exact for power laws on a geometric grid) and
/// the prediction is matched against the new spectrum.
pub fn track_curves(
    blocks: &HessianBlocks,
    eps_grid: &[f64],
    exec: Execution,
) -> Result<Vec<Vec<Complex64>>> {
    check_grid(eps_grid)?;
    let n = blocks.d1() + blocks.d2();
    let spectra: Vec<Vec<Complex64>> = map_slice(exec, eps_grid, |&eps| {
        linalg::eigenvalues(&balanced_timescaled(blocks, eps))
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut curves: Vec<Vec<Complex64>> = vec![Vec::with_capacity(eps_grid.len()); n];
    for (k, spectrum) in spectra.into_iter().enumerate() {
        if k == 0 {
            for (j, z) in spectrum.into_iter().enumerate() {
                curves[j].push(z);
            }
            continue;
        }
        let predicted: Vec<Complex64> = curves
            .iter()
            .map(|c| {
                let last = c[k - 1];
                if k >= 2 && c[k - 2].norm() > 0.0 {
                    let ratio = last / c[k - 2];
                    if (0.1..10.0).contains(&ratio.norm()) {
                        return last * ratio;
                    }
                }
                last
            })
            .collect();
        let perm = match_points(&predicted, &spectrum);
        for (j, &idx) in perm.iter().enumerate() {
            curves[j].push(spectrum[idx]);
        }
    }
    Ok(curves)
}

/// Indices of the finest decade of the grid (at least three points).
fn finest_decade(eps_grid: &[f64]) -> std::ops::Range<usize> {
    let n = eps_grid.len();
    let eps_min = eps_grid[n - 1];
    let in_decade = eps_grid.iter().filter(|&&e| e <= 10.0 * eps_min * (1.0 + 1e-12)).count();
    n - in_decade.max(3).min(n)..n
}

/// Least-squares slope of `ln|y|` against `ln x`.
fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, v)| v.abs() > 0.0)
        .map(|(u, v)| (u.ln(), v.abs().ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Lagrange weights for evaluating the interpolant through `xs` at 0.
fn lagrange_at_zero(xs: &[f64]) -> Vec<f64> {
    (0..xs.len())
        .map(|i| {
            xs.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| xj / (xj - xs[i]))
                .product()
        })
        .collect()
}

/// Slope of `ln|Re(1/λ)|` on `ln ε` below which the real part of `1/λ`
/// is treated as divergent.
const DIVERGENCE_SLOPE: f64 = -0.2;

/// `lim Re(1/λ(ε))` by quadratic extrapolation in `√ε` over the three finest
/// points. Values indistinguishable from rounding noise give exactly 0.
fn estimate_iota(blocks: &HessianBlocks, eps_grid: &[f64], curve: &[Complex64]) -> f64 {
    let n = eps_grid.len();
    let decade = finest_decade(eps_grid);
    let g: Vec<f64> = curve.iter().map(|z| z.inv().re).collect();
    let noise: Vec<f64> = (0..n)
        .map(|k| {
            let m_norm = balanced_timescaled(blocks, eps_grid[k]).norm();
            64.0 * f64::EPSILON * m_norm / curve[k].norm_sqr()
        })
        .collect();

    let slope = log_slope(&eps_grid[decade.clone()], &g[decade]);
    if slope <= DIVERGENCE_SLOPE && g[n - 1].abs() > 1e3 * noise[n - 1] {
        return f64::INFINITY * g[n - 1].signum();
    }

    let idx = [n - 3, n - 2, n - 1];
    let xs: Vec<f64> = idx.iter().map(|&k| eps_grid[k].sqrt()).collect();
    let w = lagrange_at_zero(&xs);
    let est: f64 = idx.iter().zip(&w).map(|(&k, wk)| wk * g[k]).sum();
    let floor: f64 = idx.iter().zip(&w).map(|(&k, wk)| wk.abs() * noise[k]).sum();
    if est.abs() <= floor {
        0.0
    } else {
        est
    }
}

/// Tracks, labels and analyses the eigencurves of `H_τ`.
pub fn eigencurves(blocks: &HessianBlocks, config: &CurveConfig) -> Result<EigenCurves> {
    let h = blocks.jacobian();
    let rcond = linalg::rcond(&h);
    if rcond <= config.tol.singular_rcond {
        return Err(Error::SingularHessian { rcond });
    }
    let grid = &config.eps_grid;
    if grid.len() < 3 {
        return Err(Error::InvalidParams("eps grid needs at least 3 points".into()));
    }
    let lambda = track_curves(blocks, grid, config.exec)?;
    let canon = canonicalize(blocks, config.tol.rank_tol);
    let (d1, d2, r) = (blocks.d1(), blocks.d2(), canon.r);
    if d1 + r < d2 {
        return Err(Error::Classification(format!(
            "d1 - d2 + r = {} is negative",
            d1 as i64 + r as i64 - d2 as i64
        )));
    }

    let decade = finest_decade(grid);
    let mut slopes = Vec::with_capacity(lambda.len());
    let mut labels = Vec::with_capacity(lambda.len());
    for (j, curve) in lambda.iter().enumerate() {
        let mags: Vec<f64> = curve[decade.clone()].iter().map(|z| z.norm()).collect();
        let slope = log_slope(&grid[decade.clone()], &mags);
        let label = CurveType::from_slope(slope, config.slope_band).ok_or_else(|| {
            Error::Classification(format!("curve {j} has log-slope {slope:.4}, outside every band"))
        })?;
        slopes.push(slope);
        labels.push(label);
    }

    let mut curves = EigenCurves {
        eps_grid: grid.clone(),
        lambda,
        labels,
        slopes,
        sigma: vec![None; d1 + d2],
        iota: vec![None; d1 + d2],
        pairs: Vec::new(),
        s0: f64::NEG_INFINITY,
        r,
        d1,
        d2,
    };
    if curves.counts() != curves.expected_counts() {
        return Err(Error::Classification(format!(
            "label counts {:?} differ from the expected {:?}",
            curves.counts(),
            curves.expected_counts()
        )));
    }

    // Pair square-root curves with the singular values of C₂.
    let (sigmas, _) = linalg::left_singular(&canon.c2);
    let sqrt_idx: Vec<usize> =
        (0..d1 + d2).filter(|&j| curves.labels[j] == CurveType::SqrtEpsPair).collect();
    if !sqrt_idx.is_empty() {
        let eps_min = grid[grid.len() - 1];
        let targets: Vec<f64> = sigmas.iter().flat_map(|&s| [s, s]).collect();
        let cost: Vec<Vec<f64>> = sqrt_idx
            .iter()
            .map(|&j| {
                let est = curves.lambda[j].last().unwrap().norm() / eps_min.sqrt();
                targets.iter().map(|t| (est - t).abs()).collect()
            })
            .collect();
        let perm = min_cost_assignment(&cost);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); sigmas.len()];
        for (row, &col) in perm.iter().enumerate() {
            let j = sqrt_idx[row];
            curves.sigma[j] = Some(targets[col]);
            curves.iota[j] = Some(estimate_iota(blocks, grid, &curves.lambda[j]));
            members[col / 2].push(j);
        }
        curves.pairs = sigmas
            .iter()
            .zip(members)
            .map(|(&sigma, curves_k)| {
                let vals: Vec<f64> = curves_k.iter().map(|&j| curves.iota[j].unwrap()).collect();
                SqrtPair { sigma, iota: Real(combine_pair(&vals)), curves: curves_k }
            })
            .collect();
        let iotas: Vec<f64> = curves.iota.iter().flatten().copied().collect();
        curves.s0 = s_zero(&iotas);
    }
    Ok(curves)
}

/// Conjugate curves share `ι`; average finite estimates, keep the worse
/// (smaller) value if either diverges.
fn combine_pair(vals: &[f64]) -> f64 {
    if vals.iter().any(|v| v.is_infinite()) {
        return vals.iter().copied().fold(f64::INFINITY, f64::min);
    }
    vals.iter().sum::<f64>() / vals.len() as f64
}

/// `ι_k = ½u_kᵀSu_k / σ_k²` for the `k`-th largest singular value of `C₂`.
/// Refuses when the singular values are not pairwise distinct.
pub fn hemicurvature_closed_form(
    canon: &CanonicalBlocks,
    schur: &RestrictedSchur,
    k: usize,
    sep_tol: f64,
) -> Result<f64> {
    Ok(hemicurvatures_closed_form(canon, schur, sep_tol)?
        .get(k)
        .copied()
        .ok_or_else(|| Error::Precondition(format!("C2 has no singular value with index {k}")))?
        .1)
}

/// `(σ_k, ι_k)` for every singular value of `C₂`, descending.
pub fn hemicurvatures_closed_form(
    canon: &CanonicalBlocks,
    schur: &RestrictedSchur,
    sep_tol: f64,
) -> Result<Vec<(f64, f64)>> {
    let (sigmas, u) = linalg::left_singular(&canon.c2);
    let scale = sigmas.first().copied().unwrap_or(0.0);
    for w in sigmas.windows(2) {
        if (w[0] - w[1]).abs() <= sep_tol * scale {
            return Err(Error::Precondition(format!(
                "singular values {:.6} and {:.6} of C2 are not distinct",
                w[0], w[1]
            )));
        }
    }
    if sigmas.last().is_some_and(|&s| s <= sep_tol * scale.max(1.0)) {
        return Err(Error::Precondition("C2 has a zero singular value".into()));
    }
    Ok(sigmas
        .iter()
        .enumerate()
        .map(|(k, &sigma)| {
            let uk = u.column(k);
            (sigma, 0.5 * uk.dot(&(&schur.s * uk)) / (sigma * sigma))
        })
        .collect())
}

/// Structural quantities that do not depend on `τ`.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub blocks: HessianBlocks,
    pub canon: CanonicalBlocks,
    pub schur: RestrictedSchur,
    pub second_order: SecondOrder,
    pub strict_non_minimax: bool,
}

pub fn analyze(blocks: &HessianBlocks, tol: &Tolerances) -> Analysis {
    let canon = canonicalize(blocks, tol.rank_tol);
    let schur = restricted_schur(&canon);
    let second_order = second_order_necessary(blocks, &schur, tol);
    let strict_tol = tol.psd_tol(&schur.s_res).max(tol.psd_tol(&blocks.b));
    let strict_non_minimax = is_strict_non_minimax(blocks, &schur, strict_tol);
    Analysis { blocks: blocks.clone(), canon, schur, second_order, strict_non_minimax }
}

/// The classification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub r: usize,
    pub w: usize,
    #[serde(rename = "spec_Sres")]
    pub spec_sres: Vec<f64>,
    #[serde(rename = "spec_negB")]
    pub spec_neg_b: Vec<f64>,
    pub sigma: Vec<f64>,
    pub iota: Vec<Real>,
    pub s0: Real,
    #[serde(rename = "B_nsd")]
    pub b_nsd: bool,
    #[serde(rename = "Sres_psd")]
    pub sres_psd: bool,
    pub strict_non_minimax: bool,
}

pub fn summarize(analysis: &Analysis, curves: &EigenCurves) -> SpectralSummary {
    SpectralSummary {
        r: analysis.canon.r,
        w: analysis.schur.w(),
        spec_sres: analysis.schur.spectrum.clone(),
        spec_neg_b: linalg::sym_eigenvalues(&(-&analysis.blocks.b)),
        sigma: curves.pairs.iter().map(|p| p.sigma).collect(),
        iota: curves.pairs.iter().map(|p| p.iota).collect(),
        s0: Real(curves.s0),
        b_nsd: analysis.second_order.b_nsd,
        sres_psd: analysis.second_order.sres_psd,
        strict_non_minimax: analysis.strict_non_minimax,
    }
}

/// Convenience: analysis, eigencurves and summary in one call.
pub fn classify(
    blocks: &HessianBlocks,
    config: &CurveConfig,
) -> Result<(Analysis, EigenCurves, SpectralSummary)> {
    let analysis = analyze(blocks, &config.tol);
    let curves = eigencurves(blocks, config)?;
    let summary = summarize(&analysis, &curves);
    Ok((analysis, curves, summary))
}

pub fn iota_values(curves: &EigenCurves) -> Vec<f64> {
    curves.pairs.iter().map(|p| p.iota.0).collect()
}

pub fn sigma_values(curves: &EigenCurves) -> Vec<f64> {
    curves.pairs.iter().map(|p| p.sigma).collect()
}
