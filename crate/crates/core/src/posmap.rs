//! Positive linear maps built from congruences and scaled compressions, and
//! weighted fields of such maps.
//!
//! The variants are closed so positivity holds by construction: a failing
//! inequality check can only indict the inequality, never the map.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::ScalarOperatorFunction;
use crate::hermitian::MatrixJson;
use crate::hermitian::{
    apply_function, check_dim, congruence, loewner_compare, sandwich, spectral_decompose,
    sum_hermitian, DenseMatrix, HermitianMatrix, PositiveDefiniteMatrix,
};
use crate::perspective::perspective;
use crate::tolerance::ToleranceConfig;

/// Slack for `sum w_i Phi_i(I) = I` in the spectral norm.
pub const UNITAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum PositiveLinearMap {
    /// `X -> C* X C`; `C` is `in_dim x out_dim`.
    Congruence(DenseMatrix),
    /// `X -> scale * X[indices, indices]`. `in_dim` of `None` accepts any
    /// input large enough for the indices.
    Compression {
        indices: Vec<usize>,
        scale: f64,
        in_dim: Option<usize>,
    },
    Sum(Vec<PositiveLinearMap>),
    Scaled(Box<PositiveLinearMap>, f64),
}

impl PositiveLinearMap {
    pub fn congruence(c: DenseMatrix) -> Result<Self> {
        if c.nrows() == 0 || c.ncols() == 0 {
            return Err(Error::ShapeMismatch {
                expected: "non-empty congruence factor".into(),
                found: format!("{}x{}", c.nrows(), c.ncols()),
            });
        }
        Ok(Self::Congruence(c))
    }

    pub fn compression(indices: Vec<usize>, scale: f64, in_dim: Option<usize>) -> Result<Self> {
        if indices.is_empty() || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "compression indices must be non-empty and strictly increasing".into(),
            ));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "compression scale must be positive, got {scale}"
            )));
        }
        if let Some(n) = in_dim {
            if *indices.last().unwrap() >= n {
                return Err(Error::ShapeMismatch {
                    expected: format!("indices below {n}"),
                    found: format!("{indices:?}"),
                });
            }
        }
        Ok(Self::Compression {
            indices,
            scale,
            in_dim,
        })
    }

    pub fn sum(maps: Vec<PositiveLinearMap>) -> Result<Self> {
        let first = maps
            .first()
            .ok_or_else(|| Error::InvalidConfig("empty map sum".into()))?;
        let out = first.out_dim();
        let mut in_dim = None;
        for m in &maps {
            if m.out_dim() != out {
                return Err(Error::ShapeMismatch {
                    expected: format!("output dim {out}"),
                    found: format!("output dim {}", m.out_dim()),
                });
            }
            in_dim = merge_in_dim(in_dim, m.in_dim())?;
        }
        Ok(Self::Sum(maps))
    }

    pub fn scaled(map: PositiveLinearMap, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "map scale must be positive, got {c}"
            )));
        }
        Ok(Self::Scaled(Box::new(map), c))
    }

    pub fn identity(dim: usize) -> Self {
        Self::Congruence(DenseMatrix::identity(dim, dim))
    }

    /// Required input dimension, when fixed.
    pub fn in_dim(&self) -> Option<usize> {
        match self {
            Self::Congruence(c) => Some(c.nrows()),
            Self::Compression { in_dim, .. } => *in_dim,
            Self::Sum(maps) => maps
                .iter()
                .try_fold(None, |acc, m| merge_in_dim(acc, m.in_dim()))
                .ok()
                .flatten(),
            Self::Scaled(m, _) => m.in_dim(),
        }
    }

    fn min_in_dim(&self) -> usize {
        match self {
            Self::Congruence(c) => c.nrows(),
            Self::Compression {
                indices, in_dim, ..
            } => in_dim.unwrap_or(indices.last().map_or(0, |i| i + 1)),
            Self::Sum(maps) => maps.iter().map(Self::min_in_dim).max().unwrap_or(0),
            Self::Scaled(m, _) => m.min_in_dim(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Self::Congruence(c) => c.ncols(),
            Self::Compression { indices, .. } => indices.len(),
            Self::Sum(maps) => maps[0].out_dim(),
            Self::Scaled(m, _) => m.out_dim(),
        }
    }

    fn accepts(&self, dim: usize) -> bool {
        match self.in_dim() {
            Some(n) => n == dim,
            None => dim >= self.min_in_dim(),
        }
    }
}

fn merge_in_dim(acc: Option<usize>, next: Option<usize>) -> Result<Option<usize>> {
    match (acc, next) {
        (Some(a), Some(b)) if a != b => Err(Error::ShapeMismatch {
            expected: format!("input dim {a}"),
            found: format!("input dim {b}"),
        }),
        (Some(a), _) => Ok(Some(a)),
        (None, b) => Ok(b),
    }
}

pub fn apply_map(map: &PositiveLinearMap, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    if !map.accepts(x.dim()) {
        return Err(Error::ShapeMismatch {
            expected: format!("input of dim {}", map.in_dim().unwrap_or(map.min_in_dim())),
            found: format!("dim {}", x.dim()),
        });
    }
    Ok(match map {
        PositiveLinearMap::Congruence(c) => congruence(c, x)?,
        PositiveLinearMap::Compression { indices, scale, .. } => {
            let k = indices.len();
            let m = DMatrix::from_fn(k, k, |i, j| x.entry(indices[i], indices[j]));
            HermitianMatrix::new(m)?.scale(*scale)
        }
        PositiveLinearMap::Sum(maps) => {
            let parts = maps
                .iter()
                .map(|m| apply_map(m, x))
                .collect::<Result<Vec<_>>>()?;
            sum_hermitian(map.out_dim(), &parts)
        }
        PositiveLinearMap::Scaled(m, c) => apply_map(m, x)?.scale(*c),
    })
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum MapJson {
    Congruence {
        c: MatrixJson,
    },
    Compression {
        indices: Vec<usize>,
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        in_dim: Option<usize>,
    },
    Sum {
        maps: Vec<PositiveLinearMap>,
    },
    Scaled {
        map: Box<PositiveLinearMap>,
        c: f64,
    },
}

impl Serialize for PositiveLinearMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let j = match self {
            Self::Congruence(c) => MapJson::Congruence {
                c: MatrixJson::from_dense(c),
            },
            Self::Compression {
                indices,
                scale,
                in_dim,
            } => MapJson::Compression {
                indices: indices.clone(),
                scale: *scale,
                in_dim: *in_dim,
            },
            Self::Sum(maps) => MapJson::Sum { maps: maps.clone() },
            Self::Scaled(m, c) => MapJson::Scaled {
                map: m.clone(),
                c: *c,
            },
        };
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PositiveLinearMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let built = match MapJson::deserialize(d)? {
            MapJson::Congruence { c } => c.to_dense().and_then(Self::congruence),
            MapJson::Compression {
                indices,
                scale,
                in_dim,
            } => Self::compression(indices, scale, in_dim),
            MapJson::Sum { maps } => Self::sum(maps),
            MapJson::Scaled { map, c } => Self::scaled(*map, c),
        };
        built.map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub w: f64,
    pub map: PositiveLinearMap,
}

/// Weighted maps with a common output dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapField {
    entries: Vec<MapEntry>,
    unital: bool,
}

impl MapField {
    /// With `unital = true` the constructor verifies `||sum w_i Phi_i(I) - I||_2 <= 1e-10`.
    /// `in_dim` is needed only when every map accepts flexible input sizes.
    pub fn new(entries: Vec<MapEntry>, unital: bool) -> Result<Self> {
        let first = entries.first().ok_or(Error::EmptyField)?;
        let out = first.map.out_dim();
        let mut in_dim = None;
        for e in &entries {
            if !(e.w > 0.0 && e.w.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "map weight must be positive, got {}",
                    e.w
                )));
            }
            if e.map.out_dim() != out {
                return Err(Error::ShapeMismatch {
                    expected: format!("output dim {out}"),
                    found: format!("output dim {}", e.map.out_dim()),
                });
            }
            in_dim = merge_in_dim(in_dim, e.map.in_dim())?;
        }
        let field = Self { entries, unital };
        if unital {
            let check = unitality(&field)?;
            if !check.is_unital {
                return Err(Error::InvalidConfig(format!(
                    "map field is not unital: ||sum w Phi(I) - I||_2 = {:e}",
                    check.deviation
                )));
            }
        }
        Ok(field)
    }

    /// Single map with weight 1.
    pub fn single(map: PositiveLinearMap) -> Result<Self> {
        Self::new(vec![MapEntry { w: 1.0, map }], false)
    }

    pub fn entries(&self) -> &[MapEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn claims_unital(&self) -> bool {
        self.unital
    }

    pub fn out_dim(&self) -> usize {
        self.entries[0].map.out_dim()
    }

    pub fn in_dim(&self) -> usize {
        self.entries
            .iter()
            .find_map(|e| e.map.in_dim())
            .unwrap_or_else(|| {
                self.entries
                    .iter()
                    .map(|e| e.map.min_in_dim())
                    .max()
                    .unwrap_or(0)
            })
    }

    /// `sum_t w_t Phi_t(X_t)`, one input per entry.
    pub fn apply_each(&self, xs: &[HermitianMatrix]) -> Result<HermitianMatrix> {
        check_dim(self.len(), xs.len())?;
        let parts = self
            .entries
            .iter()
            .zip(xs)
            .map(|(e, x)| Ok(apply_map(&e.map, x)?.scale(e.w)))
            .collect::<Result<Vec<_>>>()?;
        Ok(sum_hermitian(self.out_dim(), &parts))
    }

    /// `sum_t w_t Phi_t(X)`.
    pub fn apply_all(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        let xs = vec![x.clone(); self.len()];
        self.apply_each(&xs)
    }

    /// `w_t Phi_t(I)` for each entry.
    pub fn weighted_images_of_identity(&self) -> Result<Vec<HermitianMatrix>> {
        let id = HermitianMatrix::identity(self.in_dim());
        self.entries
            .iter()
            .map(|e| Ok(apply_map(&e.map, &id)?.scale(e.w)))
            .collect()
    }
}

impl<'de> Deserialize<'de> for MapField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            entries: Vec<MapEntry>,
            #[serde(default)]
            unital: bool,
        }
        let raw = Raw::deserialize(d)?;
        Self::new(raw.entries, raw.unital).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unitality {
    pub sum_at_identity: HermitianMatrix,
    /// `||sum w Phi(I) - I||_2`
    pub deviation: f64,
    pub is_unital: bool,
    pub is_subunital: bool,
}

pub fn unitality(field: &MapField) -> Result<Unitality> {
    let images = field.weighted_images_of_identity()?;
    let sum_at_identity = sum_hermitian(field.out_dim(), &images);
    let id = HermitianMatrix::identity(field.out_dim());
    let deviation = (&sum_at_identity - &id).spectral_norm()?;
    let is_subunital =
        loewner_compare(&sum_at_identity, &id, &ToleranceConfig::default())?.is_less_or_equal();
    Ok(Unitality {
        sum_at_identity,
        deviation,
        is_unital: deviation <= UNITAL_TOL,
        is_subunital,
    })
}

/// The four matrices of the refined Jensen chain for a unital field, a
/// selection `in_first` of the first block, and inputs `A_t`:
///
/// 1. `f(sum w Phi(A))`
/// 2. `sum over blocks T of D_T^{1/2} f(D_T^{-1/2} (sum_T w Phi(A)) D_T^{-1/2}) D_T^{1/2}`
/// 3. `sum w Phi(I)^{1/2} f(Phi(I)^{-1/2} Phi(A) Phi(I)^{-1/2}) Phi(I)^{1/2}`
/// 4. `sum w Phi(f(A))`
///
/// with `D_T = sum_T w Phi(I)`. Each block must be non-empty, and each `D_T`
/// and `Phi_t(I)` must be invertible.
pub fn jensen_chain(
    f: &ScalarOperatorFunction,
    field: &MapField,
    a: &[HermitianMatrix],
    in_first: &[bool],
) -> Result<[HermitianMatrix; 4]> {
    check_dim(field.len(), a.len())?;
    check_dim(field.len(), in_first.len())?;
    if in_first.iter().all(|&b| b) || in_first.iter().all(|&b| !b) {
        return Err(Error::InvalidConfig(
            "both blocks of the partition must be non-empty".into(),
        ));
    }
    let out = field.out_dim();
    let images: Vec<HermitianMatrix> = field
        .entries()
        .iter()
        .zip(a)
        .map(|(e, x)| Ok(apply_map(&e.map, x)?.scale(e.w)))
        .collect::<Result<_>>()?;
    let units = field.weighted_images_of_identity()?;

    let m1 = apply_function(f, &sum_hermitian(out, &images))?;

    let mut blocks = Vec::with_capacity(2);
    for side in [true, false] {
        let sel = |v: &[HermitianMatrix]| {
            let picked: Vec<_> = v
                .iter()
                .zip(in_first)
                .filter(|(_, &b)| b == side)
                .map(|(x, _)| x.clone())
                .collect();
            sum_hermitian(out, &picked)
        };
        let d = PositiveDefiniteMatrix::new(sel(&units))?;
        blocks.push(perspective(f, &sel(&images), &d)?);
    }
    let m2 = &blocks[0] + &blocks[1];

    // w g(Phi(A), Phi(I)) = g(w Phi(A), w Phi(I)) by homogeneity.
    let per_map = images
        .iter()
        .zip(&units)
        .map(|(x, u)| perspective(f, x, &PositiveDefiniteMatrix::new(u.clone())?))
        .collect::<Result<Vec<_>>>()?;
    let m3 = sum_hermitian(out, &per_map);

    let fa = a
        .iter()
        .map(|x| apply_function(f, x))
        .collect::<Result<Vec<_>>>()?;
    let m4 = field.apply_each(&fa)?;
    Ok([m1, m2, m3, m4])
}

/// `sum_{T1} w Phi(f(A)) - D_{T1}^{1/2} f(D_{T1}^{-1/2} (sum_{T1} w Phi(A)) D_{T1}^{-1/2}) D_{T1}^{1/2}`,
/// the first-block Jensen deficit.
pub fn block_deficit(
    f: &ScalarOperatorFunction,
    field: &MapField,
    a: &[HermitianMatrix],
    in_first: &[bool],
) -> Result<HermitianMatrix> {
    check_dim(field.len(), a.len())?;
    check_dim(field.len(), in_first.len())?;
    let out = field.out_dim();
    let units = field.weighted_images_of_identity()?;
    let mut images = Vec::new();
    let mut f_images = Vec::new();
    let mut d_parts = Vec::new();
    for ((e, x), (u, &keep)) in field
        .entries()
        .iter()
        .zip(a)
        .zip(units.iter().zip(in_first))
    {
        if keep {
            images.push(apply_map(&e.map, x)?.scale(e.w));
            f_images.push(apply_map(&e.map, &apply_function(f, x)?)?.scale(e.w));
            d_parts.push(u.clone());
        }
    }
    if images.is_empty() {
        return Err(Error::InvalidConfig("first block is empty".into()));
    }
    let d = PositiveDefiniteMatrix::new(sum_hermitian(out, &d_parts))?;
    let inner = sandwich(&d.inv_sqrt(), &sum_hermitian(out, &images));
    let refined = sandwich(&d.sqrt(), &apply_function(f, &inner)?);
    Ok(&sum_hermitian(out, &f_images) - &refined)
}

/// The exact fixture: three compressions `M_3 -> M_2` with weight 1 and
/// scale 1/3, three 3x3 inputs, the partition `T1 = {1}`, `T2 = {2, 3}`, and
/// the expected chain for `f(t) = t^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionFixture {
    pub maps: MapField,
    pub a: [HermitianMatrix; 3],
    /// `in_first[t]` is true for `t in T1`.
    pub in_first: [bool; 3],
    pub expected_chain: [HermitianMatrix; 4],
    pub d_t1: HermitianMatrix,
    pub d_t2: HermitianMatrix,
}

fn rows3(r: [[f64; 3]; 3]) -> HermitianMatrix {
    HermitianMatrix::from_real_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>())
        .expect("fixture is symmetric")
}

fn rows2(r: [[f64; 2]; 2]) -> HermitianMatrix {
    HermitianMatrix::from_real_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>())
        .expect("fixture is symmetric")
}

pub fn compression_fixture() -> CompressionFixture {
    let third = 1.0 / 3.0;
    let comp = |idx: Vec<usize>| {
        PositiveLinearMap::compression(idx, third, Some(3)).expect("valid compression")
    };
    let maps = MapField::new(
        vec![
            MapEntry {
                w: 1.0,
                map: comp(vec![0, 1]),
            },
            MapEntry {
                w: 1.0,
                map: comp(vec![1, 2]),
            },
            MapEntry {
                w: 1.0,
                map: comp(vec![1, 2]),
            },
        ],
        true,
    )
    .expect("fixture field is unital");
    let a = [
        rows3([[6.0, 0.0, 3.0], [0.0, 3.0, 0.0], [3.0, 0.0, 0.0]]),
        rows3([[0.0, 0.0, 3.0], [0.0, 3.0, 0.0], [3.0, 0.0, 0.0]]),
        rows3([[3.0, 0.0, 3.0], [0.0, 0.0, 3.0], [3.0, 3.0, 3.0]]),
    ];
    let expected_chain = [
        rows2([[10.0, 5.0], [5.0, 5.0]]),
        rows2([[15.0, 3.0], [3.0, 6.0]]),
        rows2([[18.0, 3.0], [3.0, 9.0]]),
        rows2([[21.0, 3.0], [3.0, 15.0]]),
    ];
    CompressionFixture {
        maps,
        a,
        in_first: [true, false, false],
        expected_chain,
        d_t1: HermitianMatrix::identity(2).scale(third),
        d_t2: HermitianMatrix::identity(2).scale(2.0 * third),
    }
}

impl CompressionFixture {
    /// The chain computed from the fixture inputs.
    pub fn compute_chain(&self, f: &ScalarOperatorFunction) -> Result<[HermitianMatrix; 4]> {
        jensen_chain(f, &self.maps, &self.a, &self.in_first)
    }
}

/// `lambda_min` of each consecutive difference `M_{k+1} - M_k`.
pub fn chain_gaps(chain: &[HermitianMatrix]) -> Result<Vec<f64>> {
    chain
        .windows(2)
        .map(|w| Ok(spectral_decompose(&(&w[1] - &w[0]))?.min_eigenvalue()))
        .collect()
}
