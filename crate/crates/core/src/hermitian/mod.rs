//! Dense complex Hermitian matrices and the operations everything else is
//! built from: spectral decomposition, functional calculus, congruence,
//! Kronecker products and Loewner-order comparison.
//!
//! Real symmetric input is embedded with zero imaginary parts. All values are
//! immutable once built, so they can be shared freely across threads.

pub mod json;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::funcs::ScalarOperatorFunction;
use crate::tolerance::ToleranceConfig;

pub use json::MatrixJson;

/// General dense complex matrix (congruence factors, unitaries, products).
pub type DenseMatrix = DMatrix<Complex64>;

/// Symmetry slack accepted at construction, relative to `max(1, ||H||_F)`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Minimum eigenvalue for positive definiteness, relative to `max(1, ||B||_2)`.
pub const PD_TOL: f64 = 1e-10;
/// Eigenvalues this close (relative to `max(1, ||H||_2)`) outside a closed
/// domain endpoint are clamped onto it.
pub const DOMAIN_CLAMP_TOL: f64 = 1e-9;
/// Default cap on `dim(A) * dim(B)` for tensor products.
pub const DEFAULT_TENSOR_CAP: usize = 64;

const EIGEN_MAX_ITER: usize = 10_000;

#[inline]
pub(crate) fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// A dense complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: DenseMatrix,
}

impl HermitianMatrix {
    /// Validates `||H - H*||_F <= 1e-12 max(1, ||H||_F)` and stores `(H + H*)/2`.
    pub fn new(m: DenseMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::ShapeMismatch {
                expected: "dim >= 1".into(),
                found: "0x0".into(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NumericalFailure("non-finite matrix entry".into()));
        }
        let asymmetry = (&m - m.adjoint()).norm();
        let threshold = SYMMETRY_TOL * m.norm().max(1.0);
        if asymmetry > threshold {
            return Err(Error::NotHermitian {
                asymmetry,
                threshold,
            });
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without validating; for results that are Hermitian analytically.
    pub(crate) fn symmetrized(m: DenseMatrix) -> Self {
        let m = (&m + m.adjoint()) * re(0.5);
        Self { m }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| re(rows[i][j])))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| re(x)));
        Self {
            m: DMatrix::from_diagonal(&v),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(spectral_decompose(self)?.spectral_radius())
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { m: &self.m * re(c) }
    }

    /// `<H x, x>` for a complex vector `x`.
    pub fn quadratic_form(&self, x: &DVector<Complex64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(x.dotc(&(&self.m * x)).re)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok((&self.m - &other.m)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    /// Rows as `[re, im]` pairs, for display and fixtures.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| [self.m[(i, j)].re, self.m[(i, j)].im])
                    .collect()
            })
            .collect()
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::ShapeMismatch {
            expected: format!("dim {expected}"),
            found: format!("dim {found}"),
        });
    }
    Ok(())
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in Hermitian sum");
        HermitianMatrix {
            m: &self.m + &rhs.m,
        }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(
            self.dim(),
            rhs.dim(),
            "dimension mismatch in Hermitian difference"
        );
        HermitianMatrix {
            m: &self.m - &rhs.m,
        }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, c: f64) -> HermitianMatrix {
        self.scale(c)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

/// Sums matrices in iteration order (deterministic rounding).
pub fn sum_hermitian<'a, I>(dim: usize, items: I) -> HermitianMatrix
where
    I: IntoIterator<Item = &'a HermitianMatrix>,
{
    items
        .into_iter()
        .fold(HermitianMatrix::zeros(dim), |acc, x| &acc + x)
}

/// `H = U diag(eigenvalues) U*`, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub unitary: DenseMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    pub fn spectral_radius(&self) -> f64 {
        self.max_eigenvalue().abs().max(self.min_eigenvalue().abs())
    }

    /// `U diag(values) U*`.
    pub fn reconstruct_with(&self, values: &[f64]) -> HermitianMatrix {
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            self.unitary[(i, j)] * values[j]
        });
        HermitianMatrix::symmetrized(scaled * self.unitary.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(&self.eigenvalues)
    }

    pub fn eigenvector(&self, k: usize) -> DVector<Complex64> {
        self.unitary.column(k).into_owned()
    }
}

pub fn spectral_decompose(h: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let eig = SymmetricEigen::try_new(h.m.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("non-finite eigenvalue".into()));
    }
    let unitary = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        unitary,
    })
}

/// `f(H) = U f(diag λ) U*`. Affine functions are applied exactly, without a
/// decomposition.
pub fn apply_function(f: &ScalarOperatorFunction, h: &HermitianMatrix) -> Result<HermitianMatrix> {
    if let Some((a, b)) = f.affine_coefficients() {
        let mut out = h.scale(a);
        if b != 0.0 {
            out = &out + &HermitianMatrix::identity(h.dim()).scale(b);
        }
        return Ok(out);
    }
    let sd = spectral_decompose(h)?;
    apply_to_spectrum(f, &sd)
}

/// Functional calculus on an existing decomposition.
pub fn apply_to_spectrum(
    f: &ScalarOperatorFunction,
    sd: &SpectralDecomposition,
) -> Result<HermitianMatrix> {
    let clamp_tol = DOMAIN_CLAMP_TOL * sd.spectral_radius().max(1.0);
    let values = sd
        .eigenvalues
        .iter()
        .map(|&lambda| {
            let x = f
                .domain()
                .admit(lambda, clamp_tol)
                .ok_or_else(|| Error::DomainViolation {
                    function: f.id().to_string(),
                    eigenvalue: lambda,
                    domain: f.domain().to_string(),
                })?;
            Ok(f.eval(x))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(format!(
            "`{}` produced a non-finite value on the spectrum",
            f.id()
        )));
    }
    Ok(sd.reconstruct_with(&values))
}

/// A Hermitian matrix with `lambda_min >= 1e-10 max(1, ||B||_2)`.
///
/// Keeps its spectral decomposition so that `B^{1/2}` and `B^{-1/2}` come from
/// the same eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveDefiniteMatrix {
    base: HermitianMatrix,
    spectral: SpectralDecomposition,
}

impl PositiveDefiniteMatrix {
    pub fn new(base: HermitianMatrix) -> Result<Self> {
        let spectral = spectral_decompose(&base)?;
        let threshold = PD_TOL * spectral.spectral_radius().max(1.0);
        let min_eigenvalue = spectral.min_eigenvalue();
        if min_eigenvalue < threshold {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue,
                threshold,
            });
        }
        Ok(Self { base, spectral })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(HermitianMatrix::identity(dim)).expect("identity is positive definite")
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(diag))
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectral.min_eigenvalue()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.spectral.max_eigenvalue()
    }

    pub fn condition_number(&self) -> f64 {
        self.max_eigenvalue() / self.min_eigenvalue()
    }

    pub fn power(&self, p: f64) -> HermitianMatrix {
        let values: Vec<f64> = self
            .spectral
            .eigenvalues
            .iter()
            .map(|x| x.powf(p))
            .collect();
        self.spectral.reconstruct_with(&values)
    }

    pub fn sqrt(&self) -> HermitianMatrix {
        let values: Vec<f64> = self.spectral.eigenvalues.iter().map(|x| x.sqrt()).collect();
        self.spectral.reconstruct_with(&values)
    }

    pub fn inv_sqrt(&self) -> HermitianMatrix {
        let values: Vec<f64> = self
            .spectral
            .eigenvalues
            .iter()
            .map(|x| 1.0 / x.sqrt())
            .collect();
        self.spectral.reconstruct_with(&values)
    }

    pub fn inverse(&self) -> HermitianMatrix {
        let values: Vec<f64> = self.spectral.eigenvalues.iter().map(|x| 1.0 / x).collect();
        self.spectral.reconstruct_with(&values)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.base.scale(c))
    }
}

/// `C* X C`, symmetrized. `C` must have `dim(X)` rows.
pub fn congruence(c: &DenseMatrix, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    if c.nrows() != x.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("congruence factor with {} rows", x.dim()),
            found: format!("{}x{}", c.nrows(), c.ncols()),
        });
    }
    Ok(HermitianMatrix::symmetrized(c.adjoint() * x.matrix() * c))
}

/// `X Y X` for Hermitian `X`, `Y` (a congruence by a Hermitian factor).
pub(crate) fn sandwich(outer: &HermitianMatrix, inner: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix::symmetrized(outer.matrix() * inner.matrix() * outer.matrix())
}

pub fn kronecker(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    kronecker_with_cap(a, b, DEFAULT_TENSOR_CAP)
}

/// Standard Kronecker product; index `(i, j)` maps to `i * dim(B) + j`.
pub fn kronecker_with_cap(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    cap: usize,
) -> Result<HermitianMatrix> {
    let dim = a.dim() * b.dim();
    if dim > cap {
        return Err(Error::SizeLimit { dim, cap });
    }
    Ok(HermitianMatrix {
        m: a.m.kronecker(&b.m),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LoewnerRelation {
    LessOrEqual,
    GreaterOrEqual,
    Equal,
    Incomparable,
}

/// Outcome of comparing `A` against `B` in the Loewner order.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LoewnerVerdict {
    pub relation: LoewnerRelation,
    /// `lambda_min(B - A)`; non-negative iff `A <= B` exactly.
    pub margin_low: f64,
    /// `lambda_min(A - B)`.
    pub margin_high: f64,
    pub tolerance_used: f64,
}

impl LoewnerVerdict {
    pub fn is_less_or_equal(&self) -> bool {
        matches!(
            self.relation,
            LoewnerRelation::LessOrEqual | LoewnerRelation::Equal
        )
    }
}

pub fn loewner_compare(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    tol: &ToleranceConfig,
) -> Result<LoewnerVerdict> {
    check_dim(a.dim(), b.dim())?;
    let scale = a.spectral_norm()?.max(b.spectral_norm()?);
    let tolerance_used = tol.at_scale(scale);
    let diff = spectral_decompose(&(b - a))?;
    let margin_low = diff.min_eigenvalue();
    let margin_high = -diff.max_eigenvalue();
    let low_ok = margin_low >= -tolerance_used;
    let high_ok = margin_high >= -tolerance_used;
    let relation = match (low_ok, high_ok) {
        (true, true) => LoewnerRelation::Equal,
        (true, false) => LoewnerRelation::LessOrEqual,
        (false, true) => LoewnerRelation::GreaterOrEqual,
        (false, false) => LoewnerRelation::Incomparable,
    };
    Ok(LoewnerVerdict {
        relation,
        margin_low,
        margin_high,
        tolerance_used,
    })
}
