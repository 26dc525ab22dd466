//! Seeded instances and independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use opdiv::hermitian::{DenseMatrix, HermitianMatrix, PositiveDefiniteMatrix};
use opdiv::lab::gen::{random_hermitian_from, random_pd_from, random_unitary, trial_rng, TrialRng};

pub fn rng(seed: u64) -> TrialRng {
    trial_rng(seed, "integration", 0)
}

pub fn pd(rng: &mut TrialRng, dim: usize) -> PositiveDefiniteMatrix {
    random_pd_from(rng, dim, (0.1, 4.0), 1e4).unwrap()
}

pub fn herm(rng: &mut TrialRng, dim: usize) -> HermitianMatrix {
    random_hermitian_from(rng, dim, (-3.0, 3.0))
}

pub fn unitary(rng: &mut TrialRng, dim: usize) -> DenseMatrix {
    random_unitary(rng, dim)
}

/// Inverse by LU, independent of the spectral route used by the library.
pub fn lu_inverse(m: &DenseMatrix) -> DenseMatrix {
    m.clone().lu().try_inverse().expect("invertible")
}

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn max_dev(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry deviation relative to the larger matrix's largest entry.
pub fn rel_dev(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    max_dev(a, b) / scale
}

/// `U* X U` as a dense product.
pub fn conj(u: &DenseMatrix, x: &DenseMatrix) -> DenseMatrix {
    u.adjoint() * x * u
}

pub fn hermitian(m: DenseMatrix) -> HermitianMatrix {
    let sym = (&m + m.adjoint()) * c(0.5);
    HermitianMatrix::new(sym).unwrap()
}

pub fn real_diag(d: &[f64]) -> DenseMatrix {
    DMatrix::from_fn(
        d.len(),
        d.len(),
        |i, j| if i == j { c(d[i]) } else { c(0.0) },
    )
}
