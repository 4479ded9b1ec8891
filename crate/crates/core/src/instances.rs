//! Seeded random Hessian-block families for experiments, property tests and
//! benchmarks. Instances are drawn by rejection so that the structural
//! quantities (singular values of `C₂`, eigenvalues of `S_res` and `B`) are
//! well separated and `H` is comfortably invertible.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::problems::HessianBlocks;
use crate::spectral::{canonicalize, restricted_schur};

/// `(d1, d2, r)` with `r = rank B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub d1: usize,
    pub d2: usize,
    pub r: usize,
}

impl Shape {
    pub const fn new(d1: usize, d2: usize, r: usize) -> Self {
        Self { d1, d2, r }
    }
}

pub const STANDARD_SHAPES: [Shape; 4] =
    [Shape::new(2, 1, 0), Shape::new(2, 2, 1), Shape::new(3, 2, 1), Shape::new(3, 3, 2)];

pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn random_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    linalg::symmetrize(&gaussian(n, n, rng))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix).
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let qr = gaussian(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `Q diag(values) Qᵀ` for a random orthogonal `Q`.
pub fn with_spectrum<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> DMatrix<f64> {
    let q = random_orthogonal(values.len(), rng);
    &q * DMatrix::from_diagonal(&DVector::from_column_slice(values)) * q.transpose()
}

fn random_magnitude<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(0.5..2.0)
}

fn min_relative_gap(values: &[f64]) -> f64 {
    let scale = values.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-300);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).map(|w| (w[1] - w[0]) / scale).fold(f64::INFINITY, f64::min)
}

fn well_separated(blocks: &HessianBlocks, r: usize) -> bool {
    let h = blocks.jacobian();
    if linalg::rcond(&h) < 1e-3 {
        return false;
    }
    let canon = canonicalize(blocks, 1e-9);
    if canon.r != r {
        return false;
    }
    let (sigmas, _) = linalg::left_singular(&canon.c2);
    if sigmas.iter().any(|&s| s < 0.2) || min_relative_gap(&sigmas) < 0.1 {
        return false;
    }
    let schur = restricted_schur(&canon);
    let mu = &schur.spectrum;
    !(mu.iter().any(|m| m.abs() < 0.1) || min_relative_gap(mu) < 0.1)
}

fn draw<R: Rng + ?Sized>(
    rng: &mut R,
    r: usize,
    mut make: impl FnMut(&mut R) -> HessianBlocks,
) -> HessianBlocks {
    for _ in 0..100_000 {
        let b = make(rng);
        if well_separated(&b, r) {
            return b;
        }
    }
    panic!("no well-separated instance found after 100000 draws");
}

/// Generic instance of the given shape: `B` has `r` nonzero eigenvalues of
/// either sign.
pub fn random_blocks<R: Rng + ?Sized>(shape: Shape, rng: &mut R) -> HessianBlocks {
    let Shape { d1, d2, r } = shape;
    assert!(r <= d2 && d2 <= d1 + r, "shape admits no invertible H");
    draw(rng, r, |rng| {
        let mut spec = vec![0.0; d2];
        for v in spec.iter_mut().take(r) {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            *v = sign * random_magnitude(rng);
        }
        let b = with_spectrum(&spec, rng);
        HessianBlocks::new(random_symmetric(d1, rng), b, gaussian(d1, d2, rng))
            .expect("consistent shapes")
    })
}

/// Instance with `B ⪯ 0` and `S = A − CB†Cᵀ ≻ 0`, built by choosing `S` and
/// solving for `A`.
pub fn random_minimax_blocks<R: Rng + ?Sized>(shape: Shape, rng: &mut R) -> HessianBlocks {
    let Shape { d1, d2, r } = shape;
    assert!(r <= d2 && d2 <= d1 + r, "shape admits no invertible H");
    draw(rng, r, |rng| {
        let mut spec = vec![0.0; d2];
        for v in spec.iter_mut().take(r) {
            *v = -random_magnitude(rng);
        }
        let b = with_spectrum(&spec, rng);
        let c = gaussian(d1, d2, rng);
        let s_values: Vec<f64> = (0..d1).map(|_| random_magnitude(rng)).collect();
        let s = with_spectrum(&s_values, rng);
        let b_pinv = linalg::pinv(&b, 1e-9);
        let a = linalg::symmetrize(&(s + &c * b_pinv * c.transpose()));
        HessianBlocks::new(a, b, c).expect("consistent shapes")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_have_requested_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for shape in STANDARD_SHAPES {
            let b = random_blocks(shape, &mut rng);
            assert_eq!(canonicalize(&b, 1e-9).r, shape.r);
            assert!(linalg::rcond(&b.jacobian()) >= 1e-3);
        }
    }

    #[test]
    fn minimax_instances_satisfy_sufficient_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for shape in STANDARD_SHAPES {
            let blocks = random_minimax_blocks(shape, &mut rng);
            assert!(linalg::sym_eigenvalues(&blocks.b).iter().all(|&x| x <= 1e-12));
            let s = restricted_schur(&canonicalize(&blocks, 1e-9)).s;
            assert!(linalg::sym_eigenvalues(&s)[0] > 0.0);
        }
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = random_orthogonal(5, &mut rng);
        assert!((q.transpose() * &q - DMatrix::identity(5, 5)).amax() < 1e-12);
    }
}
