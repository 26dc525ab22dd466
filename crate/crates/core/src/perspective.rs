//! Operator perspectives and the non-commutative f-divergence.
//!
//! Everything is computed in congruence form: `R^{1/2} f(R^{-1/2} L R^{-1/2}) R^{1/2}`,
//! with both square roots taken from one spectral decomposition of `R`.
//! Sums over field entries run in entry order.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::{Interval, ScalarOperatorFunction};
use crate::hermitian::{
    apply_function, check_dim, re, sandwich, spectral_decompose, sum_hermitian, HermitianMatrix,
    PositiveDefiniteMatrix, DEFAULT_TENSOR_CAP, DOMAIN_CLAMP_TOL,
};

/// Largest accepted condition number for the second argument of a perspective.
pub const CONDITION_CAP: f64 = 1e8;

const PROBABILITY_TOL: f64 = 1e-12;

/// `R^{1/2} f(R^{-1/2} L R^{-1/2}) R^{1/2}`.
pub fn perspective(
    f: &ScalarOperatorFunction,
    l: &HermitianMatrix,
    r: &PositiveDefiniteMatrix,
) -> Result<HermitianMatrix> {
    check_dim(r.dim(), l.dim())?;
    let condition_number = r.condition_number();
    if condition_number > CONDITION_CAP {
        return Err(Error::IllConditioned {
            condition_number,
            cap: CONDITION_CAP,
        });
    }
    let inner = sandwich(&r.inv_sqrt(), l);
    let fx = apply_function(f, &inner)?;
    Ok(sandwich(&r.sqrt(), &fx))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldEntry {
    pub w: f64,
    pub a: HermitianMatrix,
    pub b: PositiveDefiniteMatrix,
}

/// A finite weighted family `(w_t, A_t, B_t)` of equal-dimension pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOperatorField {
    entries: Vec<FieldEntry>,
    probability_normalized: bool,
}

impl WeightedOperatorField {
    pub fn new(entries: Vec<FieldEntry>, probability_normalized: bool) -> Result<Self> {
        let first = entries.first().ok_or(Error::EmptyField)?;
        let dim = first.a.dim();
        for e in &entries {
            if !(e.w > 0.0 && e.w.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "field weights must be positive and finite, got {}",
                    e.w
                )));
            }
            check_dim(dim, e.a.dim())?;
            check_dim(dim, e.b.dim())?;
        }
        if probability_normalized {
            let total: f64 = entries.iter().map(|e| e.w).sum();
            if (total - 1.0).abs() > PROBABILITY_TOL {
                return Err(Error::NotProbability(format!("weights sum to {total}")));
            }
        }
        Ok(Self {
            entries,
            probability_normalized,
        })
    }

    /// Unit weights.
    pub fn from_pairs(pairs: Vec<(HermitianMatrix, PositiveDefiniteMatrix)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(a, b)| FieldEntry { w: 1.0, a, b })
                .collect(),
            false,
        )
    }

    pub fn entries(&self) -> &[FieldEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].a.dim()
    }

    pub fn is_probability_normalized(&self) -> bool {
        self.probability_normalized
    }

    /// `sum_t w_t A_t`
    pub fn sum_a(&self) -> HermitianMatrix {
        let scaled: Vec<_> = self.entries.iter().map(|e| e.a.scale(e.w)).collect();
        sum_hermitian(self.dim(), &scaled)
    }

    /// `sum_t w_t B_t`
    pub fn sum_b(&self) -> Result<PositiveDefiniteMatrix> {
        let scaled: Vec<_> = self
            .entries
            .iter()
            .map(|e| e.b.as_hermitian().scale(e.w))
            .collect();
        PositiveDefiniteMatrix::new(sum_hermitian(self.dim(), &scaled))
    }

    /// Entries where `mask[t]` holds, as a field of their own.
    pub fn select(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("mask of length {}", self.len()),
                found: format!("length {}", mask.len()),
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(mask)
            .filter(|(_, &keep)| keep)
            .map(|(e, _)| e.clone())
            .collect();
        Self::new(entries, false)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldEntryJson {
    w: f64,
    #[serde(rename = "A")]
    a: HermitianMatrix,
    #[serde(rename = "B")]
    b: PositiveDefiniteMatrix,
}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    entries: Vec<FieldEntryJson>,
    #[serde(default)]
    probability_normalized: bool,
}

impl Serialize for WeightedOperatorField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldJson {
            entries: self
                .entries
                .iter()
                .map(|e| FieldEntryJson {
                    w: e.w,
                    a: e.a.clone(),
                    b: e.b.clone(),
                })
                .collect(),
            probability_normalized: self.probability_normalized,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightedOperatorField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = FieldJson::deserialize(d)?;
        let entries = j
            .entries
            .into_iter()
            .map(|e| FieldEntry {
                w: e.w,
                a: e.a,
                b: e.b,
            })
            .collect();
        Self::new(entries, j.probability_normalized).map_err(serde::de::Error::custom)
    }
}

/// `Theta = sum_t w_t g(A_t, B_t)`.
pub fn theta_divergence(
    f: &ScalarOperatorFunction,
    field: &WeightedOperatorField,
) -> Result<HermitianMatrix> {
    if field.is_empty() {
        return Err(Error::EmptyField);
    }
    let terms = field
        .entries()
        .iter()
        .map(|e| Ok(perspective(f, &e.a, &e.b)?.scale(e.w)))
        .collect::<Result<Vec<_>>>()?;
    Ok(sum_hermitian(field.dim(), &terms))
}

fn positive_h(h: &ScalarOperatorFunction, r: &HermitianMatrix) -> Result<PositiveDefiniteMatrix> {
    let hr = apply_function(h, r)?;
    PositiveDefiniteMatrix::new(hr).map_err(|e| match e {
        Error::NotPositiveDefinite { min_eigenvalue, .. } => Error::NonPositiveH { min_eigenvalue },
        other => other,
    })
}

/// `h(R)^{1/2} f(h(R)^{-1/2} L h(R)^{-1/2}) h(R)^{1/2}`.
pub fn f_delta_h(
    f: &ScalarOperatorFunction,
    h: &ScalarOperatorFunction,
    l: &HermitianMatrix,
    r: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    check_dim(r.dim(), l.dim())?;
    perspective(f, l, &positive_h(h, r)?)
}

fn check_probability(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::NotProbability(format!(
            "{name} has {} entries, the field has {n}",
            v.len()
        )));
    }
    if v.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::NotProbability(format!(
            "{name} has a negative or non-finite entry"
        )));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_TOL {
        return Err(Error::NotProbability(format!("{name} sums to {total}")));
    }
    Ok(())
}

/// `sum_i p_i h(q_i R_i)^{1/2} f(h(q_i R_i)^{-1/2} L_i h(q_i R_i)^{-1/2}) h(q_i R_i)^{1/2}`
/// over the field's pairs `(L_i, R_i) = (A_i, B_i)`.
///
/// The field's own weights are not used; `p` and `q` carry the weighting.
/// Terms with `p_i = 0` are skipped.
pub fn f_nabla_h(
    f: &ScalarOperatorFunction,
    h: &ScalarOperatorFunction,
    field: &WeightedOperatorField,
    p: &[f64],
    q: &[f64],
) -> Result<HermitianMatrix> {
    let n = field.len();
    check_probability("p", p, n)?;
    check_probability("q", q, n)?;
    let mut terms = Vec::with_capacity(n);
    for ((e, &pi), &qi) in field.entries().iter().zip(p).zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::NotProbability(
                "q_i must be positive wherever p_i is positive".into(),
            ));
        }
        let qr = e.b.as_hermitian().scale(qi);
        terms.push(f_delta_h(f, h, &e.a, &qr)?.scale(pi));
    }
    Ok(sum_hermitian(field.dim(), &terms))
}

pub type BivariateFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A real function of two variables on a rectangle.
#[derive(Clone)]
pub struct BivariateSpec {
    pub name: String,
    pub phi: BivariateFn,
    pub x_domain: Interval,
    pub y_domain: Interval,
}

impl fmt::Debug for BivariateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BivariateSpec({} on {} x {})",
            self.name, self.x_domain, self.y_domain
        )
    }
}

impl BivariateSpec {
    pub fn new(
        name: impl Into<String>,
        x_domain: Interval,
        y_domain: Interval,
        phi: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            phi: Arc::new(phi),
            x_domain,
            y_domain,
        }
    }

    /// `(x, y) -> y f(x / y)` on `dom(f) x (0, inf)`.
    pub fn perspective_of(f: &ScalarOperatorFunction) -> Self {
        let g = f.clone();
        Self::new(
            format!("perspective({})", f.label()),
            *f.domain(),
            Interval::positive(),
            move |x, y| y * g.eval(x / y),
        )
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.phi)(x, y)
    }
}

fn admit_all(values: &[f64], domain: &Interval, name: &str, clamp_tol: f64) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|&x| {
            domain
                .admit(x, clamp_tol)
                .ok_or_else(|| Error::DomainViolation {
                    function: name.to_string(),
                    eigenvalue: x,
                    domain: domain.to_string(),
                })
        })
        .collect()
}

/// `(U ⊗ V) diag(phi(lambda_i, mu_j)) (U ⊗ V)*` with `A = U diag(lambda) U*`,
/// `B = V diag(mu) V*`; tensor index `(i, j)` is `i * dim(B) + j`.
pub fn bivariate_calculus(
    phi: &BivariateSpec,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    let (na, nb) = (a.dim(), b.dim());
    if na * nb > DEFAULT_TENSOR_CAP {
        return Err(Error::SizeLimit {
            dim: na * nb,
            cap: DEFAULT_TENSOR_CAP,
        });
    }
    let sa = spectral_decompose(a)?;
    let sb = spectral_decompose(b)?;
    let xs = admit_all(
        &sa.eigenvalues,
        &phi.x_domain,
        &phi.name,
        DOMAIN_CLAMP_TOL * sa.spectral_radius().max(1.0),
    )?;
    let ys = admit_all(
        &sb.eigenvalues,
        &phi.y_domain,
        &phi.name,
        DOMAIN_CLAMP_TOL * sb.spectral_radius().max(1.0),
    )?;
    let n = na * nb;
    let mut values = Vec::with_capacity(n);
    for &x in &xs {
        for &y in &ys {
            let v = phi.eval(x, y);
            if !v.is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "`{}` is not finite at ({x}, {y})",
                    phi.name
                )));
            }
            values.push(v);
        }
    }
    let w = sa.unitary.kronecker(&sb.unitary);
    let scaled = DMatrix::from_fn(n, n, |i, j| w[(i, j)] * re(values[j]));
    Ok(HermitianMatrix::symmetrized(scaled * w.adjoint()))
}

/// `f(1) sum_t w_t B_t - f'(1) sum_t w_t (B_t - A_t)`, a lower bound for `Theta`.
pub fn gradient_lower_bound(
    f: &ScalarOperatorFunction,
    field: &WeightedOperatorField,
) -> Result<HermitianMatrix> {
    if field.is_empty() {
        return Err(Error::EmptyField);
    }
    if !f.domain().contains(1.0) {
        return Err(Error::DomainViolation {
            function: f.id().to_string(),
            eigenvalue: 1.0,
            domain: f.domain().to_string(),
        });
    }
    let d1 = f.require_deriv(1.0)?;
    let f1 = f.eval(1.0);
    let sum_b = field.sum_b()?.into_hermitian();
    let sum_a = field.sum_a();
    Ok(&sum_b.scale(f1) - &(&sum_b - &sum_a).scale(d1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::builtin;

    fn h(rows: &[&[f64]]) -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
            .unwrap()
    }

    fn pd(diag: &[f64]) -> PositiveDefiniteMatrix {
        PositiveDefiniteMatrix::from_diagonal(diag).unwrap()
    }

    fn close(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) {
        let d = a.max_abs_diff(b).unwrap();
        assert!(d <= tol, "deviation {d:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn perspective_examples() {
        let sq = builtin("square", &[]).unwrap();
        let l = h(&[&[3.0, 1.0], &[1.0, 2.0]]);
        close(
            &perspective(&sq, &l, &PositiveDefiniteMatrix::identity(2)).unwrap(),
            &h(&[&[10.0, 5.0], &[5.0, 5.0]]),
            1e-12,
        );
        let id = builtin("identity", &[]).unwrap();
        let r = PositiveDefiniteMatrix::new(h(&[&[2.0, 0.5], &[0.5, 1.0]])).unwrap();
        close(&perspective(&id, &l, &r).unwrap(), &l, 1e-12);
        let inv = builtin("power", &[-1.0]).unwrap();
        close(
            &perspective(
                &inv,
                &HermitianMatrix::from_diagonal(&[2.0, 1.0]),
                &pd(&[4.0, 9.0]),
            )
            .unwrap(),
            &HermitianMatrix::from_diagonal(&[8.0, 81.0]),
            1e-12,
        );
    }

    #[test]
    fn perspective_rejects_ill_conditioned() {
        let sq = builtin("square", &[]).unwrap();
        let r = pd(&[1.0, 1e-9]);
        assert!(matches!(
            perspective(&sq, &HermitianMatrix::identity(2), &r),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn theta_examples() {
        let sq = builtin("square", &[]).unwrap();
        let field = WeightedOperatorField::from_pairs(vec![
            (HermitianMatrix::from_diagonal(&[1.0]), pd(&[2.0])),
            (HermitianMatrix::from_diagonal(&[3.0]), pd(&[2.0])),
        ])
        .unwrap();
        let t = theta_divergence(&sq, &field).unwrap();
        assert!((t.entry(0, 0).re - 5.0).abs() < 1e-14);
        let id = builtin("identity", &[]).unwrap();
        close(
            &theta_divergence(&id, &field).unwrap(),
            &field.sum_a(),
            1e-14,
        );
        assert!(matches!(
            WeightedOperatorField::from_pairs(vec![]),
            Err(Error::EmptyField)
        ));
    }

    #[test]
    fn field_validation_and_json() {
        let e = |w: f64| FieldEntry {
            w,
            a: HermitianMatrix::identity(2),
            b: PositiveDefiniteMatrix::identity(2),
        };
        assert!(WeightedOperatorField::new(vec![e(0.0)], false).is_err());
        assert!(matches!(
            WeightedOperatorField::new(vec![e(0.5), e(0.4)], true),
            Err(Error::NotProbability(_))
        ));
        let f = WeightedOperatorField::new(vec![e(0.5), e(0.5)], true).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let back: WeightedOperatorField = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let parsed: WeightedOperatorField = serde_json::from_str(
            r#"{"entries":[{"w":1.0,"A":{"dim":1,"rows":[[2]]},"B":{"dim":1,"rows":[[1]]}}]}"#,
        )
        .unwrap();
        assert!(!parsed.is_probability_normalized());
        assert!(serde_json::from_str::<WeightedOperatorField>(
            r#"{"entries":[{"w":1.0,"A":{"dim":1,"rows":[[2]]},"B":{"dim":1,"rows":[[-1]]}}]}"#
        )
        .is_err());
    }

    #[test]
    fn delta_h_examples() {
        let sq = builtin("square", &[]).unwrap();
        let inv = builtin("power", &[-1.0]).unwrap();
        let id = builtin("identity", &[]).unwrap();
        let l = h(&[&[3.0, 1.0], &[1.0, 2.0]]);
        let r = h(&[&[2.0, 0.3], &[0.3, 1.5]]);
        close(
            &f_delta_h(&sq, &id, &l, &r).unwrap(),
            &perspective(&sq, &l, &PositiveDefiniteMatrix::new(r.clone()).unwrap()).unwrap(),
            1e-12,
        );
        let root = builtin("power", &[0.5]).unwrap();
        close(
            &f_delta_h(
                &inv,
                &root,
                &HermitianMatrix::identity(2),
                &HermitianMatrix::from_diagonal(&[4.0, 16.0]),
            )
            .unwrap(),
            &HermitianMatrix::from_diagonal(&[4.0, 16.0]),
            1e-12,
        );
        let lin = builtin("power", &[1.0]).unwrap();
        close(
            &f_delta_h(&sq, &lin, &l, &HermitianMatrix::identity(2)).unwrap(),
            &h(&[&[10.0, 5.0], &[5.0, 5.0]]),
            1e-12,
        );
        assert!(matches!(
            f_delta_h(&sq, &id, &l, &HermitianMatrix::from_diagonal(&[1.0, -1.0])),
            Err(Error::NonPositiveH { .. })
        ));
    }

    #[test]
    fn nabla_h_examples() {
        let sq = builtin("square", &[]).unwrap();
        let id = builtin("identity", &[]).unwrap();
        let root = builtin("power", &[0.5]).unwrap();
        let field = WeightedOperatorField::from_pairs(vec![
            (HermitianMatrix::from_diagonal(&[2.0]), pd(&[1.0])),
            (HermitianMatrix::from_diagonal(&[4.0]), pd(&[1.0])),
        ])
        .unwrap();
        let v = f_nabla_h(&sq, &id, &field, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!((v.entry(0, 0).re - 20.0).abs() < 1e-12);
        let v = f_nabla_h(&id, &root, &field, &[0.25, 0.75], &[0.9, 0.1]).unwrap();
        assert!((v.entry(0, 0).re - 3.5).abs() < 1e-12);
        let first = f_nabla_h(&sq, &root, &field, &[1.0, 0.0], &[1.0, 0.0]).unwrap();
        let direct = f_delta_h(
            &sq,
            &root,
            &field.entries()[0].a,
            field.entries()[0].b.as_hermitian(),
        )
        .unwrap();
        close(&first, &direct, 1e-14);
        assert!(matches!(
            f_nabla_h(&sq, &id, &field, &[0.5, 0.6], &[0.5, 0.5]),
            Err(Error::NotProbability(_))
        ));
        assert!(f_nabla_h(&sq, &id, &field, &[0.5, 0.5], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn bivariate_examples() {
        let first = BivariateSpec::new("x", Interval::real_line(), Interval::real_line(), |x, _| x);
        close(
            &bivariate_calculus(
                &first,
                &HermitianMatrix::from_diagonal(&[1.0, 2.0]),
                &HermitianMatrix::identity(2),
            )
            .unwrap(),
            &HermitianMatrix::from_diagonal(&[1.0, 1.0, 2.0, 2.0]),
            1e-14,
        );
        let prod = BivariateSpec::new(
            "xy",
            Interval::real_line(),
            Interval::real_line(),
            |x, y| x * y,
        );
        let a = h(&[&[1.0, 0.5], &[0.5, -1.0]]);
        let b = h(&[&[2.0, -0.25], &[-0.25, 0.5]]);
        close(
            &bivariate_calculus(&prod, &a, &b).unwrap(),
            &crate::hermitian::kronecker(&a, &b).unwrap(),
            1e-13,
        );
        let p = BivariateSpec::perspective_of(&builtin("square", &[]).unwrap());
        close(
            &bivariate_calculus(
                &p,
                &HermitianMatrix::from_diagonal(&[1.0, 2.0]),
                &HermitianMatrix::from_diagonal(&[1.0, 4.0]),
            )
            .unwrap(),
            &HermitianMatrix::from_diagonal(&[1.0, 0.25, 4.0, 1.0]),
            1e-14,
        );
        let big = HermitianMatrix::identity(9);
        assert!(matches!(
            bivariate_calculus(&prod, &big, &big),
            Err(Error::SizeLimit { .. })
        ));
        assert!(matches!(
            bivariate_calculus(&p, &a, &HermitianMatrix::from_diagonal(&[1.0, -1.0])),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn gradient_bound_examples() {
        let field = WeightedOperatorField::new(
            vec![
                FieldEntry {
                    w: 0.5,
                    a: h(&[&[1.0, 0.2], &[0.2, 2.0]]),
                    b: pd(&[1.0, 3.0]),
                },
                FieldEntry {
                    w: 2.0,
                    a: h(&[&[0.5, 0.0], &[0.0, 0.7]]),
                    b: pd(&[2.0, 0.5]),
                },
            ],
            false,
        )
        .unwrap();
        let sa = field.sum_a();
        let sb = field.sum_b().unwrap().into_hermitian();
        let tlt = builtin("t_log_t", &[]).unwrap();
        close(
            &gradient_lower_bound(&tlt, &field).unwrap(),
            &(&sa - &sb),
            1e-14,
        );
        let nl = builtin("neg_log", &[]).unwrap();
        close(
            &gradient_lower_bound(&nl, &field).unwrap(),
            &(&sb - &sa),
            1e-14,
        );
        let sq = builtin("square", &[]).unwrap();
        close(
            &gradient_lower_bound(&sq, &field).unwrap(),
            &(&sa.scale(2.0) - &sb),
            1e-14,
        );
        let nod = crate::funcs::ScalarOperatorFunction::custom(
            "nod",
            Interval::real_line(),
            Default::default(),
            |x| x * x,
            None,
        );
        assert!(matches!(
            gradient_lower_bound(&nod, &field),
            Err(Error::DerivativeRequired(_))
        ));
    }
}
