//! Scalar functions used through the functional calculus, with their domains,
//! optional derivatives and operator convexity/concavity claims.
//!
//! Claims are metadata, not proofs. [`convexity_falsifier`] is the only check
//! applied to them: it searches random Hermitian pairs for a Loewner violation
//! of the midpoint-type convexity inequality.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{apply_function, loewner_compare};
use crate::lab::gen::{random_hermitian_from, spectrum_for_domain, trial_rng};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Unbounded,
    Closed(f64),
    Open(f64),
}

/// A real interval with open, closed or infinite endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
}

impl Interval {
    pub const fn real_line() -> Self {
        Self {
            lo: Bound::Unbounded,
            hi: Bound::Unbounded,
        }
    }

    /// `[0, inf)`
    pub const fn nonnegative() -> Self {
        Self {
            lo: Bound::Closed(0.0),
            hi: Bound::Unbounded,
        }
    }

    /// `(0, inf)`
    pub const fn positive() -> Self {
        Self {
            lo: Bound::Open(0.0),
            hi: Bound::Unbounded,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo_ok = match self.lo {
            Bound::Unbounded => true,
            Bound::Closed(a) => x >= a,
            Bound::Open(a) => x > a,
        };
        let hi_ok = match self.hi {
            Bound::Unbounded => true,
            Bound::Closed(b) => x <= b,
            Bound::Open(b) => x < b,
        };
        x.is_finite() && lo_ok && hi_ok
    }

    /// Returns `x`, or the nearest closed endpoint when `x` lies outside it by
    /// at most `clamp_tol`. Open endpoints are never clamped onto.
    pub fn admit(&self, x: f64, clamp_tol: f64) -> Option<f64> {
        if self.contains(x) {
            return Some(x);
        }
        if let Bound::Closed(a) = self.lo {
            if x < a && a - x <= clamp_tol {
                return Some(a);
            }
        }
        if let Bound::Closed(b) = self.hi {
            if x > b && x - b <= clamp_tol {
                return Some(b);
            }
        }
        None
    }

    pub fn lower(&self) -> Option<f64> {
        match self.lo {
            Bound::Unbounded => None,
            Bound::Closed(a) | Bound::Open(a) => Some(a),
        }
    }

    pub fn upper(&self) -> Option<f64> {
        match self.hi {
            Bound::Unbounded => None,
            Bound::Closed(b) | Bound::Open(b) => Some(b),
        }
    }

    pub fn is_real_line(&self) -> bool {
        self.lo == Bound::Unbounded && self.hi == Bound::Unbounded
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Bound::Unbounded => write!(f, "(-inf, ")?,
            Bound::Closed(a) => write!(f, "[{a}, ")?,
            Bound::Open(a) => write!(f, "({a}, ")?,
        }
        match self.hi {
            Bound::Unbounded => write!(f, "inf)"),
            Bound::Closed(b) => write!(f, "{b}]"),
            Bound::Open(b) => write!(f, "{b})"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionFlags {
    pub claims_operator_convex: bool,
    pub claims_operator_concave: bool,
    pub value_at_zero_nonpositive: bool,
    /// `f > 0` on the interior of the domain.
    pub strictly_positive: bool,
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Power(f64),
    NegLog,
    TLogT,
    Square,
    Quartic,
    Affine {
        a: f64,
        b: f64,
    },
    Shifted {
        inner: Box<ScalarOperatorFunction>,
        offset: f64,
    },
    Custom {
        eval: ScalarFn,
        deriv: Option<ScalarFn>,
    },
}

/// A scalar function together with its domain and convexity metadata.
#[derive(Clone)]
pub struct ScalarOperatorFunction {
    id: String,
    params: Vec<f64>,
    domain: Interval,
    flags: FunctionFlags,
    kind: Kind,
}

impl fmt::Debug for ScalarOperatorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarOperatorFunction")
            .field("id", &self.id)
            .field("params", &self.params)
            .field("domain", &self.domain.to_string())
            .field("flags", &self.flags)
            .finish()
    }
}

impl ScalarOperatorFunction {
    /// A user-supplied function. The caller declares the flags.
    pub fn custom(
        id: impl Into<String>,
        domain: Interval,
        flags: FunctionFlags,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: Option<ScalarFn>,
    ) -> Self {
        Self {
            id: id.into(),
            params: Vec::new(),
            domain,
            flags,
            kind: Kind::Custom {
                eval: Arc::new(eval),
                deriv,
            },
        }
    }

    /// `t -> f(t) + offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        let value_at_zero_nonpositive = if self.domain.contains(0.0) {
            self.eval(0.0) + offset <= 0.0
        } else {
            false
        };
        Self {
            id: format!("{}{:+}", self.id, offset),
            params: self.params.clone(),
            domain: self.domain,
            flags: FunctionFlags {
                value_at_zero_nonpositive,
                strictly_positive: self.flags.strictly_positive && offset >= 0.0,
                ..self.flags
            },
            kind: Kind::Shifted {
                inner: Box::new(self.clone()),
                offset,
            },
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn flags(&self) -> FunctionFlags {
        self.flags
    }

    /// Short label, e.g. `power(1.5)`.
    pub fn label(&self) -> String {
        if self.params.is_empty() {
            self.id.clone()
        } else {
            let p: Vec<String> = self.params.iter().map(|x| x.to_string()).collect();
            format!("{}({})", self.id, p.join(","))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Power(beta) => x.powf(*beta),
            Kind::NegLog => -x.ln(),
            // 0 log 0 := 0
            Kind::TLogT => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln()
                }
            }
            Kind::Square => x * x,
            Kind::Quartic => x.powi(4),
            Kind::Affine { a, b } => a * x + b,
            Kind::Shifted { inner, offset } => inner.eval(x) + offset,
            Kind::Custom { eval, .. } => eval(x),
        }
    }

    pub fn has_deriv(&self) -> bool {
        match &self.kind {
            Kind::Custom { deriv, .. } => deriv.is_some(),
            Kind::Shifted { inner, .. } => inner.has_deriv(),
            _ => true,
        }
    }

    pub fn deriv(&self, x: f64) -> Option<f64> {
        Some(match &self.kind {
            Kind::Power(beta) => {
                if *beta == 0.0 {
                    0.0
                } else {
                    beta * x.powf(beta - 1.0)
                }
            }
            Kind::NegLog => -1.0 / x,
            Kind::TLogT => x.ln() + 1.0,
            Kind::Square => 2.0 * x,
            Kind::Quartic => 4.0 * x.powi(3),
            Kind::Affine { a, .. } => *a,
            Kind::Shifted { inner, .. } => return inner.deriv(x),
            Kind::Custom { deriv, .. } => return deriv.as_ref().map(|d| d(x)),
        })
    }

    pub fn require_deriv(&self, x: f64) -> Result<f64> {
        self.deriv(x)
            .ok_or_else(|| Error::DerivativeRequired(self.id.clone()))
    }

    /// `(a, b)` when the function is exactly `a t + b`.
    pub fn affine_coefficients(&self) -> Option<(f64, f64)> {
        match &self.kind {
            Kind::Affine { a, b } => Some((*a, *b)),
            Kind::Power(beta) if *beta == 1.0 => Some((1.0, 0.0)),
            Kind::Power(beta) if *beta == 0.0 => Some((0.0, 1.0)),
            Kind::Shifted { inner, offset } => {
                inner.affine_coefficients().map(|(a, b)| (a, b + offset))
            }
            _ => None,
        }
    }

    /// The `FunctionSpec` this function was built from, when it came from [`builtin`].
    pub fn spec(&self) -> Option<FunctionSpec> {
        match self.kind {
            Kind::Custom { .. } | Kind::Shifted { .. } => None,
            _ => Some(FunctionSpec {
                id: self.id.clone(),
                params: self.params.clone(),
            }),
        }
    }
}

/// `{"id": "power", "params": [2]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub id: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl FunctionSpec {
    pub fn build(&self) -> Result<ScalarOperatorFunction> {
        builtin(&self.id, &self.params)
    }
}

pub const BUILTIN_IDS: &[&str] = &[
    "power", "neg_log", "t_log_t", "square", "identity", "affine", "quartic",
];

fn param_error(id: &str, detail: impl Into<String>) -> Error {
    Error::ParamOutOfRange {
        function: id.to_string(),
        detail: detail.into(),
    }
}

fn expect_params(id: &str, params: &[f64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(param_error(
            id,
            format!("expected {n} parameter(s), got {}", params.len()),
        ));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(param_error(id, "parameters must be finite"));
    }
    Ok(())
}

/// Catalog lookup.
///
/// * `power(p)`: `t^p` for `p in [-1, 2]`; operator convex for `p in [-1,0] ∪ [1,2]`,
///   operator concave for `p in [0,1]`. Domain `(0, inf)` when `p < 0`, else `[0, inf)`.
/// * `neg_log`, `t_log_t`, `square`, `identity`, `affine(a, b)`.
/// * `quartic`: `t^4`, convex but not operator convex; used to show the harness
///   detects real failures.
pub fn builtin(id: &str, params: &[f64]) -> Result<ScalarOperatorFunction> {
    let (domain, flags, kind, params) = match id {
        "power" => {
            expect_params(id, params, 1)?;
            let p = params[0];
            if !(-1.0..=2.0).contains(&p) {
                return Err(param_error(
                    id,
                    format!("t^{p} is neither operator convex nor operator concave; p must lie in [-1, 2]"),
                ));
            }
            let convex = p <= 0.0 || p >= 1.0;
            let concave = (0.0..=1.0).contains(&p);
            let domain = if p < 0.0 {
                Interval::positive()
            } else {
                Interval::nonnegative()
            };
            (
                domain,
                FunctionFlags {
                    claims_operator_convex: convex,
                    claims_operator_concave: concave,
                    value_at_zero_nonpositive: p > 0.0,
                    strictly_positive: true,
                },
                Kind::Power(p),
                vec![p],
            )
        }
        "neg_log" => {
            expect_params(id, params, 0)?;
            (
                Interval::positive(),
                FunctionFlags {
                    claims_operator_convex: true,
                    ..Default::default()
                },
                Kind::NegLog,
                vec![],
            )
        }
        "t_log_t" => {
            expect_params(id, params, 0)?;
            (
                Interval::nonnegative(),
                FunctionFlags {
                    claims_operator_convex: true,
                    value_at_zero_nonpositive: true,
                    ..Default::default()
                },
                Kind::TLogT,
                vec![],
            )
        }
        "square" => {
            expect_params(id, params, 0)?;
            (
                Interval::real_line(),
                FunctionFlags {
                    claims_operator_convex: true,
                    value_at_zero_nonpositive: true,
                    ..Default::default()
                },
                Kind::Square,
                vec![],
            )
        }
        "identity" => {
            expect_params(id, params, 0)?;
            (
                Interval::real_line(),
                FunctionFlags {
                    claims_operator_convex: true,
                    claims_operator_concave: true,
                    value_at_zero_nonpositive: true,
                    strictly_positive: false,
                },
                Kind::Affine { a: 1.0, b: 0.0 },
                vec![],
            )
        }
        "affine" => {
            expect_params(id, params, 2)?;
            let (a, b) = (params[0], params[1]);
            (
                Interval::real_line(),
                FunctionFlags {
                    claims_operator_convex: true,
                    claims_operator_concave: true,
                    value_at_zero_nonpositive: b <= 0.0,
                    strictly_positive: a == 0.0 && b > 0.0,
                },
                Kind::Affine { a, b },
                vec![a, b],
            )
        }
        "quartic" => {
            expect_params(id, params, 0)?;
            (
                Interval::real_line(),
                FunctionFlags {
                    value_at_zero_nonpositive: true,
                    ..Default::default()
                },
                Kind::Quartic,
                vec![],
            )
        }
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    Ok(ScalarOperatorFunction {
        id: id.to_string(),
        params,
        domain,
        flags,
        kind,
    })
}

/// Outcome of a randomized operator-convexity search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsifierReport {
    pub function: String,
    pub dim: usize,
    pub trials: usize,
    pub violations: usize,
    /// Most negative `lambda_min(lambda f(A) + (1-lambda) f(B) - f(lambda A + (1-lambda) B))`.
    pub worst_margin: f64,
}

/// Samples `trials` random Hermitian pairs with spectra inside `dom(f)` and a
/// random `lambda in (0, 1)`, and counts Loewner violations of
/// `f(lambda A + (1-lambda) B) <= lambda f(A) + (1-lambda) f(B)`.
///
/// Zero violations is evidence, never a proof.
pub fn convexity_falsifier(
    f: &ScalarOperatorFunction,
    dim: usize,
    trials: usize,
    seed: u64,
) -> Result<FalsifierReport> {
    use rand::Rng;

    if dim < 2 || trials < 1 {
        return Err(Error::InvalidConfig(format!(
            "falsifier needs dim >= 2 and trials >= 1 (got dim = {dim}, trials = {trials})"
        )));
    }
    let tol = ToleranceConfig::default();
    let range = spectrum_for_domain(f.domain());
    let stream = format!("falsifier/{}", f.label());
    let mut violations = 0;
    let mut worst_margin = f64::INFINITY;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, &stream, trial as u64);
        let a = random_hermitian_from(&mut rng, dim, range);
        let b = random_hermitian_from(&mut rng, dim, range);
        let lambda: f64 = rng.random_range(0.01..0.99);
        let mix = &a.scale(lambda) + &b.scale(1.0 - lambda);
        let lhs = apply_function(f, &mix)?;
        let rhs =
            &apply_function(f, &a)?.scale(lambda) + &apply_function(f, &b)?.scale(1.0 - lambda);
        let verdict = loewner_compare(&lhs, &rhs, &tol)?;
        worst_margin = worst_margin.min(verdict.margin_low);
        if !verdict.is_less_or_equal() {
            violations += 1;
        }
    }
    Ok(FalsifierReport {
        function: f.label(),
        dim,
        trials,
        violations,
        worst_margin,
    })
}
