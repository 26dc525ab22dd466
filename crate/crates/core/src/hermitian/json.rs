//! `{"dim": n, "rows": [[[re, im], ...], ...]}`; real entries may be bare numbers.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{re, DenseMatrix, HermitianMatrix, PositiveDefiniteMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

/// Wire form of a dense matrix. `dim` is the row count; rows must all have
/// the same length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    dim: usize,
    rows: Vec<Vec<Entry>>,
}

impl MatrixJson {
    pub fn from_dense(m: &DenseMatrix) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| Entry::Complex([m[(i, j)].re, m[(i, j)].im]))
                    .collect()
            })
            .collect();
        Self {
            dim: m.nrows(),
            rows,
        }
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        if self.rows.len() != self.dim {
            return Err(Error::Json(format!(
                "\"dim\" is {} but {} rows were given",
                self.dim,
                self.rows.len()
            )));
        }
        let cols = self.rows.first().map_or(0, Vec::len);
        if self.rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Json("rows have unequal lengths".into()));
        }
        Ok(DMatrix::from_fn(self.dim, cols, |i, j| {
            match self.rows[i][j] {
                Entry::Real(x) => re(x),
                Entry::Complex([a, b]) => num_complex::Complex64::new(a, b),
            }
        }))
    }
}

impl TryFrom<MatrixJson> for HermitianMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        HermitianMatrix::new(j.to_dense()?)
    }
}

impl From<HermitianMatrix> for MatrixJson {
    fn from(h: HermitianMatrix) -> Self {
        MatrixJson::from_dense(h.matrix())
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_dense(self.matrix()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        HermitianMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

impl Serialize for PositiveDefiniteMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_hermitian().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PositiveDefiniteMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let h = HermitianMatrix::deserialize(d)?;
        PositiveDefiniteMatrix::new(h).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for plain dense matrices (`#[serde(with = "dense_json")]`).
pub mod dense_json {
    use super::*;

    pub fn serialize<S: serde::Serializer>(
        m: &DenseMatrix,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_dense(m).serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<DenseMatrix, D::Error> {
        MatrixJson::deserialize(d)?
            .to_dense()
            .map_err(serde::de::Error::custom)
    }
}
