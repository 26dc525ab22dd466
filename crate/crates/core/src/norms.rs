//! Singular values, Ky Fan k-norms and Fan dominance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{spectral_decompose, DenseMatrix, HermitianMatrix};
use crate::tolerance::ToleranceConfig;

/// Singular values, descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sum of the `k` largest values.
    pub fn top_sum(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.len() {
            return Err(Error::BadK { k, dim: self.len() });
        }
        Ok(self.values[..k].iter().sum())
    }
}

/// Square roots of the eigenvalues of `A* A`, negatives clipped to zero.
pub fn singular_values(a: &DenseMatrix) -> Result<SingularSpectrum> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let gram = HermitianMatrix::symmetrized(a.adjoint() * a);
    let sd = spectral_decompose(&gram)?;
    Ok(SingularSpectrum {
        values: sd.eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect(),
    })
}

/// `|||A|||_(k)`, the sum of the `k` largest singular values.
pub fn ky_fan(a: &DenseMatrix, k: usize) -> Result<f64> {
    singular_values(a)?.top_sum(k)
}

pub fn trace_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(a)?.values.iter().sum())
}

/// Operator norm (largest singular value).
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(a)?.values.first().copied().unwrap_or(0.0))
}

/// True iff `|||A|||_(k) <= |||B|||_(k) + tol` for every `k`, which certifies
/// `|||A||| <= |||B|||` in every unitarily invariant norm.
pub fn ky_fan_dominates(a: &DenseMatrix, b: &DenseMatrix, tol: &ToleranceConfig) -> Result<bool> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", a.nrows(), a.ncols()),
            found: format!("{}x{}", b.nrows(), b.ncols()),
        });
    }
    let sa = singular_values(a)?;
    let sb = singular_values(b)?;
    let (mut ka, mut kb) = (0.0, 0.0);
    for (x, y) in sa.values.iter().zip(&sb.values) {
        ka += x;
        kb += y;
        if ka > kb + tol.at_scale(ka.max(kb)) {
            return Ok(false);
        }
    }
    Ok(true)
}
