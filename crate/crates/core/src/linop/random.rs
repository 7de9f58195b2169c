//! Seeded random operators for randomized checks.

use alloc::vec::Vec;

use faer::Mat;
use rand::Rng;

use super::{HermitianOperator, PureStateFamily};
use crate::c64;
use crate::math;

/// Entry with real and imaginary parts uniform in `[-1, 1)`.
pub fn entry<R: Rng + ?Sized>(rng: &mut R) -> c64 {
    c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat<c64> {
    Mat::from_fn(rows, cols, |_, _| entry(rng))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    HermitianOperator::hermitian_part(matrix(rng, dim, dim))
}

/// `A A†` for a `dim × rank` random `A`.
pub fn psd<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> HermitianOperator {
    let a = matrix(rng, dim, rank);
    HermitianOperator::hermitian_part(a.as_ref() * a.adjoint())
}

/// Density operator of random rank in `1..=dim`.
pub fn state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let rank = rng.random_range(1..=dim);
    let p = psd(rng, dim, rank);
    let t = p.trace();
    p.scale(1.0 / t)
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<c64> {
    loop {
        let v: Vec<c64> = (0..dim).map(|_| entry(rng)).collect();
        let n = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        if n > 1e-3 {
            let mut v: Vec<c64> = v.into_iter().map(|z| z / n).collect();
            // renormalize once more so the unit check at 1e-12 is met
            let n2 = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
            v.iter_mut().for_each(|z| *z /= n2);
            return v;
        }
    }
}

/// `count` random unit vectors in dimension `dim` with random weights
/// summing to one.
pub fn pure_family<R: Rng + ?Sized>(rng: &mut R, count: usize, dim: usize) -> PureStateFamily {
    let vectors = (0..count).map(|_| unit_vector(rng, dim)).collect();
    let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.into_iter().map(|w| w / total).collect();
    PureStateFamily::explicit(weights, vectors).expect("random family is valid")
}
