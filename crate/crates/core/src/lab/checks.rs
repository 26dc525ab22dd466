//! The registry of randomized checks.

use nalgebra::DVector;
use num_complex::Complex64;

use super::TrialCtx;
use crate::error::{Error, Result};
use crate::funcs::{builtin, ScalarOperatorFunction};
use crate::hermitian::{
    apply_function, sandwich, sum_hermitian, DenseMatrix, HermitianMatrix, PositiveDefiniteMatrix,
};
use crate::norms::{ky_fan, spectral_norm, trace_norm};
use crate::perspective::{
    bivariate_calculus, f_delta_h, f_nabla_h, gradient_lower_bound, perspective, theta_divergence,
    BivariateSpec, FieldEntry, WeightedOperatorField,
};
use crate::posmap::{apply_map, block_deficit, compression_fixture, jensen_chain, MapField};

type F = ScalarOperatorFunction;
type RunFn = fn(&mut TrialCtx, &[F]) -> Result<()>;

/// Static description of a check.
#[derive(Debug, Clone, Copy)]
pub struct CheckInfo {
    pub id: &'static str,
    pub description: &'static str,
    /// True when the check is tied to specific functions and ignores overrides.
    pub fixed_functions: bool,
    /// True for exact fixtures, which always run a single trial.
    pub fixture: bool,
    pub(crate) run: RunFn,
    pub(crate) default_functions: fn() -> Vec<F>,
}

fn b(id: &str, params: &[f64]) -> F {
    builtin(id, params).expect("catalog function")
}

fn convex_catalog() -> Vec<F> {
    vec![
        b("square", &[]),
        b("power", &[-1.0]),
        b("power", &[-0.5]),
        b("power", &[1.5]),
        b("neg_log", &[]),
        b("t_log_t", &[]),
        b("identity", &[]),
    ]
}

/// Operator convex functions with `f(0) <= 0`.
fn nonpositive_at_zero() -> Vec<F> {
    vec![
        b("square", &[]),
        b("square", &[]).shifted(-1.0),
        b("power", &[1.5]),
        b("t_log_t", &[]),
        b("identity", &[]),
    ]
}

/// Positive operator monotone `h`.
fn h_catalog() -> Vec<F> {
    vec![b("power", &[0.0]), b("power", &[0.5]), b("power", &[1.0])]
}

fn jadjit_functions() -> Vec<F> {
    vec![b("square", &[]), b("neg_log", &[])]
}

fn norm_functions() -> Vec<F> {
    vec![b("square", &[]), b("power", &[-1.0]), b("neg_log", &[])]
}

fn dominance_pairs() -> Vec<F> {
    // Flattened (f1, f2) pairs with f1 <= f2 on the common domain.
    vec![
        b("square", &[]).shifted(-1.0),
        b("square", &[]),
        b("t_log_t", &[]),
        b("square", &[]),
        b("identity", &[]).shifted(-1.0),
        b("t_log_t", &[]),
    ]
}

fn square_only() -> Vec<F> {
    vec![b("square", &[])]
}

fn none() -> Vec<F> {
    Vec::new()
}

static CHECKS: &[CheckInfo] = &[
    CheckInfo {
        id: "THM2_1",
        description: "g(sum w A, sum w B) <= sum w g(A, B)",
        fixed_functions: false,
        fixture: false,
        run: thm2_1,
        default_functions: convex_catalog,
    },
    CheckInfo {
        id: "COR2_2_SUBADD",
        description: "g(sum A, sum B) <= sum g(A, B)",
        fixed_functions: false,
        fixture: false,
        run: cor2_2_subadd,
        default_functions: convex_catalog,
    },
    CheckInfo {
        id: "COR2_2_II",
        description: "f(sum L) <= sum g(L_i, S^{-1/2} R_i S^{-1/2}) with S = sum R",
        fixed_functions: false,
        fixture: false,
        run: cor2_2_ii,
        default_functions: convex_catalog,
    },
    CheckInfo {
        id: "COR2_3_SPLIT",
        description: "whole-field perspective <= sum over a bipartition <= Theta",
        fixed_functions: false,
        fixture: false,
        run: cor2_3_split,
        default_functions: convex_catalog,
    },
    CheckInfo {
        id: "THM2_4_MIXTURE",
        description: "perspective of a mixture of first arguments",
        fixed_functions: false,
        fixture: false,
        run: thm2_4_mixture,
        default_functions: convex_catalog,
    },
    CheckInfo {
        id: "THM2_6_CDJ_DELTA",
        description: "Jensen inequality for f-Delta-h and g under a subunital map field",
        fixed_functions: false,
        fixture: false,
        run: thm2_6,
        default_functions: nonpositive_at_zero,
    },
    CheckInfo {
        id: "COR2_7_SINGLE",
        description: "Jensen inequality for f-Delta-h and g under one subunital map",
        fixed_functions: false,
        fixture: false,
        run: cor2_7,
        default_functions: nonpositive_at_zero,
    },
    CheckInfo {
        id: "EX2_8_POWER",
        description: "power-mean inequality Phi(B)^{a/2} (Phi(B)^{-a/2} Phi(A) Phi(B)^{-a/2})^b Phi(B)^{a/2} <= Phi(...)",
        fixed_functions: true,
        fixture: false,
        run: ex2_8,
        default_functions: none,
    },
    CheckInfo {
        id: "COR2_9_VECTOR",
        description: "scalar perspective of quadratic forms is below the quadratic form",
        fixed_functions: false,
        fixture: false,
        run: cor2_9,
        default_functions: nonpositive_at_zero,
    },
    CheckInfo {
        id: "THM2_10_DOM",
        description: "f1 <= f2 transfers through unital Jensen inequalities",
        fixed_functions: false,
        fixture: false,
        run: thm2_10,
        default_functions: dominance_pairs,
    },
    CheckInfo {
        id: "THM_DELTA_NABLA",
        description: "f-Delta-h of averages is below the f-nabla-h average",
        fixed_functions: false,
        fixture: false,
        run: thm_delta_nabla,
        default_functions: nonpositive_at_zero,
    },
    CheckInfo {
        id: "THM2_12_GRAD",
        description: "f(1) sum B - f'(1) sum (B - A) <= Theta",
        fixed_functions: false,
        fixture: false,
        run: thm2_12,
        default_functions: convex_catalog,
    },
    CheckInfo {
        id: "THM3_1_CHAIN",
        description: "refined Jensen chain M1 <= M2 <= M3 <= M4",
        fixed_functions: false,
        fixture: false,
        run: thm3_1_chain,
        default_functions: convex_catalog,
    },
    CheckInfo {
        id: "THM3_1_II",
        description: "0 <= block deficit <= total deficit",
        fixed_functions: false,
        fixture: false,
        run: thm3_1_ii,
        default_functions: convex_catalog,
    },
    CheckInfo {
        id: "COR3_4_ISOM",
        description: "refined Jensen chain for congruences with sum C*C = I",
        fixed_functions: false,
        fixture: false,
        run: cor3_4,
        default_functions: convex_catalog,
    },
    CheckInfo {
        id: "THM3_8_NORM",
        description: "y f(x / y) <= |||g(A, B)|||_(k) with Ky Fan norms x, y of A, B",
        fixed_functions: false,
        fixture: false,
        run: thm3_8,
        default_functions: norm_functions,
    },
    CheckInfo {
        id: "LEMMA_JADJIT",
        description: "phi(<Au,u>, <Bv,v>) <= <phi(A, B) u(x)v, u(x)v>",
        fixed_functions: false,
        fixture: false,
        run: lemma_jadjit,
        default_functions: jadjit_functions,
    },
    CheckInfo {
        id: "KL_SUITE",
        description: "operator relative entropy inequalities",
        fixed_functions: true,
        fixture: false,
        run: kl_suite,
        default_functions: none,
    },
    CheckInfo {
        id: "SCALAR_CSISZAR",
        description: "1x1 fields reduce to the Csiszar f-divergence",
        fixed_functions: false,
        fixture: false,
        run: scalar_csiszar,
        default_functions: convex_catalog,
    },
    CheckInfo {
        id: "EX3_3_EXACT",
        description: "exact refined Jensen chain for three compressions and t^2",
        fixed_functions: true,
        fixture: true,
        run: ex3_3,
        default_functions: square_only,
    },
];

pub fn check_ids() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.id).collect()
}

pub fn registry() -> &'static [CheckInfo] {
    CHECKS
}

pub(crate) fn lookup(id: &str) -> Result<&'static CheckInfo> {
    CHECKS
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::UnknownCheck(id.to_string()))
}

fn random_field(
    ctx: &mut TrialCtx,
    f: &F,
    n: usize,
    weighted: bool,
) -> Result<WeightedOperatorField> {
    let mut entries = Vec::with_capacity(n);
    for _ in 0..n {
        let w = if weighted { ctx.uniform(0.2, 2.0) } else { 1.0 };
        let a = ctx.hermitian_for(f);
        let b = ctx.pd()?;
        entries.push(FieldEntry { w, a, b });
    }
    WeightedOperatorField::new(entries, false)
}

fn g_of_sums(f: &F, field: &WeightedOperatorField) -> Result<HermitianMatrix> {
    perspective(f, &field.sum_a(), &field.sum_b()?)
}

fn thm2_1(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    for f in fs {
        let n = ctx.count(2, 4);
        let field = random_field(ctx, f, n, true)?;
        ctx.loewner(
            &f.label(),
            &g_of_sums(f, &field)?,
            &theta_divergence(f, &field)?,
        )?;
    }
    Ok(())
}

fn cor2_2_subadd(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    for f in fs {
        let n = ctx.count(2, 4);
        let field = random_field(ctx, f, n, false)?;
        ctx.loewner(
            &f.label(),
            &g_of_sums(f, &field)?,
            &theta_divergence(f, &field)?,
        )?;
    }
    Ok(())
}

fn cor2_2_ii(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    for f in fs {
        let n = ctx.count(2, 4);
        let field = random_field(ctx, f, n, false)?;
        let s_inv_sqrt = field.sum_b()?.inv_sqrt();
        let mut terms = Vec::with_capacity(n);
        for e in field.entries() {
            let r = PositiveDefiniteMatrix::new(sandwich(&s_inv_sqrt, e.b.as_hermitian()))?;
            terms.push(perspective(f, &e.a, &r)?);
        }
        let lhs = apply_function(f, &field.sum_a())?;
        ctx.loewner(&f.label(), &lhs, &sum_hermitian(ctx.dim(), &terms))?;
    }
    Ok(())
}

fn cor2_3_split(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    for f in fs {
        let n = ctx.count(2, 4);
        let field = random_field(ctx, f, n, true)?;
        let mask = ctx.bipartition(n);
        let other: Vec<bool> = mask.iter().map(|&x| !x).collect();
        let split = &g_of_sums(f, &field.select(&mask)?)? + &g_of_sums(f, &field.select(&other)?)?;
        let label = f.label();
        ctx.loewner(
            &format!("{label}/whole<=split"),
            &g_of_sums(f, &field)?,
            &split,
        )?;
        ctx.loewner(
            &format!("{label}/split<=theta"),
            &split,
            &theta_divergence(f, &field)?,
        )?;
    }
    Ok(())
}

fn thm2_4_mixture(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    let dim = ctx.dim();
    for f in fs {
        let n = ctx.count(2, 3);
        let m = ctx.count(2, 3);
        let p: Vec<f64> = (0..m).map(|_| ctx.uniform(0.2, 1.5)).collect();
        let mut lhs_terms = Vec::with_capacity(n);
        let mut rhs = HermitianMatrix::zeros(dim);
        for _ in 0..n {
            let mut l_mix = HermitianMatrix::zeros(dim);
            let mut r_mix = HermitianMatrix::zeros(dim);
            for &pj in &p {
                let l = ctx.hermitian_for(f);
                let r = ctx.pd()?;
                l_mix = &l_mix + &l.scale(pj);
                r_mix = &r_mix + &r.as_hermitian().scale(pj);
                rhs = &rhs + &perspective(f, &l, &r)?.scale(pj);
            }
            lhs_terms.push(perspective(
                f,
                &l_mix,
                &PositiveDefiniteMatrix::new(r_mix)?,
            )?);
        }
        ctx.loewner(&f.label(), &sum_hermitian(dim, &lhs_terms), &rhs)?;
    }
    Ok(())
}

/// Compares the Delta-h and perspective forms of Jensen's inequality for a
/// map field against inputs `(A_t, B_t)`.
fn jensen_delta(ctx: &mut TrialCtx, f: &F, hs: &[F], maps: &MapField) -> Result<()> {
    let n = maps.len();
    let a: Vec<HermitianMatrix> = (0..n).map(|_| ctx.hermitian_for(f)).collect();
    let bs = (0..n).map(|_| ctx.pd()).collect::<Result<Vec<_>>>()?;
    let b: Vec<HermitianMatrix> = bs.iter().map(|x| x.as_hermitian().clone()).collect();
    let phi_a = maps.apply_each(&a)?;
    let phi_b = maps.apply_each(&b)?;
    let label = f.label();
    for h in hs {
        let lhs = f_delta_h(f, h, &phi_a, &phi_b)?;
        let inner = a
            .iter()
            .zip(&b)
            .map(|(x, y)| f_delta_h(f, h, x, y))
            .collect::<Result<Vec<_>>>()?;
        let rhs = maps.apply_each(&inner)?;
        ctx.loewner(&format!("{label};{}/delta", h.label()), &lhs, &rhs)?;
    }
    let lhs = perspective(f, &phi_a, &PositiveDefiniteMatrix::new(phi_b)?)?;
    let inner = a
        .iter()
        .zip(&bs)
        .map(|(x, y)| perspective(f, x, y))
        .collect::<Result<Vec<_>>>()?;
    ctx.loewner(
        &format!("{label}/perspective"),
        &lhs,
        &maps.apply_each(&inner)?,
    )?;
    Ok(())
}

fn thm2_6(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    let hs = h_catalog();
    for f in fs {
        let n = ctx.count(2, 3);
        let maps = ctx.subunital_field(n)?;
        jensen_delta(ctx, f, &hs, &maps)?;
    }
    Ok(())
}

fn cor2_7(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    let hs = h_catalog();
    for f in fs {
        let maps = MapField::single(ctx.single_map(false)?)?;
        jensen_delta(ctx, f, &hs, &maps)?;
    }
    Ok(())
}

/// `B^{a/2} (B^{-a/2} A B^{-a/2})^b B^{a/2}`.
fn power_mean(
    a: &HermitianMatrix,
    b: &PositiveDefiniteMatrix,
    alpha: f64,
    beta: f64,
) -> Result<HermitianMatrix> {
    let inner = PositiveDefiniteMatrix::new(sandwich(&b.power(-alpha / 2.0), a))?;
    Ok(sandwich(&b.power(alpha / 2.0), &inner.power(beta)))
}

fn ex2_8(ctx: &mut TrialCtx, _fs: &[F]) -> Result<()> {
    let alpha = ctx.uniform(0.0, 1.0);
    let beta = if ctx.uniform(0.0, 1.0) < 0.5 {
        ctx.uniform(-1.0, 0.0)
    } else {
        ctx.uniform(1.0, 2.0)
    };
    for (part, alpha, beta) in [
        ("sampled".to_string(), alpha, beta),
        ("alpha=0.5,beta=-1".to_string(), 0.5, -1.0),
        ("alpha=1,beta=-1".to_string(), 1.0, -1.0),
    ] {
        let map = ctx.single_map(true)?;
        let a = ctx.pd()?.into_hermitian();
        let b = ctx.pd()?;
        let phi_a = apply_map(&map, &a)?;
        let phi_b = PositiveDefiniteMatrix::new(apply_map(&map, b.as_hermitian())?)?;
        let lhs = power_mean(&phi_a, &phi_b, alpha, beta)?;
        let rhs = apply_map(&map, &power_mean(&a, &b, alpha, beta)?)?;
        ctx.loewner(&part, &lhs, &rhs)?;
    }
    Ok(())
}

fn cor2_9(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    let hs = h_catalog();
    for f in fs {
        let label = f.label();
        let a = ctx.hermitian_for(f);
        let bm = ctx.pd()?;
        let x = ctx.unit_vector();
        let ax = a.quadratic_form(&x)?;
        let bx = bm.as_hermitian().quadratic_form(&x)?;
        for h in &hs {
            let hb = h.eval(bx);
            let lhs = hb * f.eval(ax / hb);
            let rhs = f_delta_h(f, h, &a, bm.as_hermitian())?.quadratic_form(&x)?;
            ctx.scalar(&format!("{label};{}/delta", h.label()), lhs, rhs);
        }
        let rhs = perspective(f, &a, &bm)?.quadratic_form(&x)?;
        ctx.scalar(&format!("{label}/perspective"), bx * f.eval(ax / bx), rhs);
    }
    Ok(())
}

fn thm2_10(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    let pairs: Vec<(&F, &F)> = if fs.len() == 1 {
        vec![(&fs[0], &fs[0])]
    } else {
        fs.chunks_exact(2).map(|c| (&c[0], &c[1])).collect()
    };
    let hs = h_catalog();
    for (f1, f2) in pairs {
        let label = format!("{}<={}", f1.label(), f2.label());
        let gen_for = if f1.domain().is_real_line() { f2 } else { f1 };
        let n = ctx.count(2, 3);
        let maps = ctx.unital_field(n)?;
        let a: Vec<HermitianMatrix> = (0..n).map(|_| ctx.hermitian_for(gen_for)).collect();
        let b = (0..n)
            .map(|_| Ok(ctx.pd()?.into_hermitian()))
            .collect::<Result<Vec<_>>>()?;
        let phi_a = maps.apply_each(&a)?;
        let phi_b = maps.apply_each(&b)?;
        for h in &hs {
            let lhs = f_delta_h(f1, h, &phi_a, &phi_b)?;
            let inner = a
                .iter()
                .zip(&b)
                .map(|(x, y)| f_delta_h(f2, h, x, y))
                .collect::<Result<Vec<_>>>()?;
            ctx.loewner(
                &format!("{label};{}/delta", h.label()),
                &lhs,
                &maps.apply_each(&inner)?,
            )?;
        }
        let fa = a
            .iter()
            .map(|x| apply_function(f2, x))
            .collect::<Result<Vec<_>>>()?;
        ctx.loewner(
            &format!("{label}/calculus"),
            &apply_function(f1, &phi_a)?,
            &maps.apply_each(&fa)?,
        )?;

        let map = ctx.single_map(true)?;
        let a = ctx.hermitian_for(gen_for);
        let b = ctx.pd()?;
        let lhs = perspective(
            f1,
            &apply_map(&map, &a)?,
            &PositiveDefiniteMatrix::new(apply_map(&map, b.as_hermitian())?)?,
        )?;
        let rhs = apply_map(&map, &perspective(f2, &a, &b)?)?;
        ctx.loewner(&format!("{label}/perspective"), &lhs, &rhs)?;
    }
    Ok(())
}

fn thm_delta_nabla(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    let hs = h_catalog();
    let dim = ctx.dim();
    for f in fs {
        let label = f.label();
        for h in &hs {
            let n = ctx.count(2, 4);
            let field = random_field(ctx, f, n, false)?;
            let p = ctx.probability(n);
            let q = ctx.probability(n);
            let mix = |v: &[f64], pick: &dyn Fn(&FieldEntry) -> HermitianMatrix| {
                let terms: Vec<_> = field
                    .entries()
                    .iter()
                    .zip(v)
                    .map(|(e, &c)| pick(e).scale(c))
                    .collect();
                sum_hermitian(dim, &terms)
            };
            let l = mix(&p, &|e| e.a.clone());
            let r = mix(&q, &|e| e.b.as_hermitian().clone());
            ctx.loewner(
                &format!("{label};{}/discrete", h.label()),
                &f_delta_h(f, h, &l, &r)?,
                &f_nabla_h(f, h, &field, &p, &q)?,
            )?;

            let a = mix(&p, &|e| e.a.clone());
            let b = mix(&p, &|e| e.b.as_hermitian().clone());
            let terms = field
                .entries()
                .iter()
                .zip(&p)
                .map(|(e, &pi)| Ok(f_delta_h(f, h, &e.a, e.b.as_hermitian())?.scale(pi)))
                .collect::<Result<Vec<_>>>()?;
            ctx.loewner(
                &format!("{label};{}/measure", h.label()),
                &f_delta_h(f, h, &a, &b)?,
                &sum_hermitian(dim, &terms),
            )?;
        }
    }
    Ok(())
}

fn thm2_12(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    for f in fs {
        let label = f.label();
        for (part, weighted) in [("weighted", true), ("unit_weights", false)] {
            let n = ctx.count(2, 4);
            let field = random_field(ctx, f, n, weighted)?;
            ctx.loewner(
                &format!("{label}/{part}"),
                &gradient_lower_bound(f, &field)?,
                &theta_divergence(f, &field)?,
            )?;
        }
    }
    Ok(())
}

fn chain_parts(ctx: &mut TrialCtx, f: &F, maps: &MapField) -> Result<()> {
    let n = maps.len();
    let a: Vec<HermitianMatrix> = (0..n).map(|_| ctx.hermitian_for(f)).collect();
    let mask = ctx.bipartition(n);
    let chain = jensen_chain(f, maps, &a, &mask)?;
    let label = f.label();
    for k in 0..3 {
        ctx.loewner(
            &format!("{label}/M{}<=M{}", k + 1, k + 2),
            &chain[k],
            &chain[k + 1],
        )?;
    }
    Ok(())
}

fn thm3_1_chain(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    for f in fs {
        let n = ctx.count(2, 4);
        let maps = ctx.unital_field(n)?;
        chain_parts(ctx, f, &maps)?;
    }
    Ok(())
}

fn thm3_1_ii(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    for f in fs {
        let n = ctx.count(2, 4);
        let maps = ctx.unital_field(n)?;
        let a: Vec<HermitianMatrix> = (0..n).map(|_| ctx.hermitian_for(f)).collect();
        let mask = ctx.bipartition(n);
        let chain = jensen_chain(f, &maps, &a, &mask)?;
        let total = &chain[3] - &chain[0];
        let block = block_deficit(f, &maps, &a, &mask)?;
        let label = f.label();
        ctx.loewner(&format!("{label}/block<=total"), &block, &total)?;
        ctx.loewner(
            &format!("{label}/block>=0"),
            &HermitianMatrix::zeros(ctx.dim()),
            &block,
        )?;
    }
    Ok(())
}

fn cor3_4(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    for f in fs {
        let n = ctx.count(2, 4);
        let field = ctx.unital_field(n)?;
        // Fold the weights into the congruence factors so that sum C*C = I
        // with unit weights.
        let maps = MapField::new(
            field
                .entries()
                .iter()
                .map(|e| crate::posmap::MapEntry {
                    w: 1.0,
                    map: crate::posmap::PositiveLinearMap::scaled(e.map.clone(), e.w)
                        .expect("positive weight"),
                })
                .collect(),
            true,
        )?;
        chain_parts(ctx, f, &maps)?;
    }
    Ok(())
}

fn lu_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("singular matrix".into()))
}

fn thm3_8(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    let dim = ctx.dim();
    for f in fs {
        let label = f.label();
        let a = ctx.pd()?;
        let b = ctx.pd()?;
        let g = perspective(f, a.as_hermitian(), &b)?;
        for k in 1..=dim {
            let x = ky_fan(a.as_hermitian().matrix(), k)?;
            let y = ky_fan(b.as_hermitian().matrix(), k)?;
            ctx.scalar(&label, y * f.eval(x / y), ky_fan(g.matrix(), k)?);
        }
    }
    let a = ctx.pd()?.into_hermitian();
    let b = ctx.pd()?.into_hermitian();
    let aba = a.matrix() * lu_inverse(b.matrix())? * a.matrix();
    let (am, bm) = (a.matrix(), b.matrix());
    ctx.scalar(
        "example/trace",
        trace_norm(am)?.powi(2) / trace_norm(bm)?,
        trace_norm(&aba)?,
    );
    ctx.scalar(
        "example/spectral",
        spectral_norm(am)?.powi(2) / spectral_norm(bm)?,
        spectral_norm(&aba)?,
    );
    Ok(())
}

fn lemma_jadjit(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    for f in fs {
        let phi = BivariateSpec::perspective_of(f);
        let a = ctx.hermitian_for(f);
        let bm = ctx.pd()?.into_hermitian();
        let u = ctx.unit_vector();
        let v = ctx.unit_vector();
        let uv: DVector<Complex64> = u.kronecker(&v);
        let lhs = phi.eval(a.quadratic_form(&u)?, bm.quadratic_form(&v)?);
        let rhs = bivariate_calculus(&phi, &a, &bm)?.quadratic_form(&uv)?;
        ctx.scalar(&f.label(), lhs, rhs);
    }
    Ok(())
}

fn kl_suite(ctx: &mut TrialCtx, _fs: &[F]) -> Result<()> {
    let dim = ctx.dim();
    let neg_log = b("neg_log", &[]);
    let t_log_t = b("t_log_t", &[]);
    let n = ctx.count(2, 4);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        pairs.push((ctx.pd()?, ctx.pd()?));
    }
    let field = WeightedOperatorField::from_pairs(
        pairs
            .iter()
            .map(|(l, r)| (l.as_hermitian().clone(), r.clone()))
            .collect(),
    )?;
    let sum_l = field.sum_a();
    let sum_r = field.sum_b()?;
    let theta_nl = theta_divergence(&neg_log, &field)?;
    let theta_tlt = theta_divergence(&t_log_t, &field)?;

    // sum R^{1/2} log(R^{1/2} L^{-1} R^{1/2}) R^{1/2}
    let mut display_nl = HermitianMatrix::zeros(dim);
    // sum L R^{-1/2} log(R^{-1/2} L R^{-1/2}) R^{1/2}, not symmetrized
    let mut display_tlt = DenseMatrix::zeros(dim, dim);
    for (l, r) in &pairs {
        let inner = sandwich(&r.sqrt(), &l.inverse());
        let log = -&apply_function(&neg_log, &inner)?;
        display_nl = &display_nl + &sandwich(&r.sqrt(), &log);
        let x = sandwich(&r.inv_sqrt(), l.as_hermitian());
        let log = -&apply_function(&neg_log, &x)?;
        display_tlt +=
            l.as_hermitian().matrix() * r.inv_sqrt().matrix() * log.matrix() * r.sqrt().matrix();
    }

    let whole = perspective(&neg_log, &sum_l, &sum_r)?;
    ctx.loewner("a/superadditivity", &display_nl, &whole)?;
    ctx.loewner(
        "b/gradient_neg_log",
        sum_r.as_hermitian(),
        &(&theta_nl + &sum_l),
    )?;
    ctx.loewner(
        "c/gradient_t_log_t",
        &(&sum_l - sum_r.as_hermitian()),
        &theta_tlt,
    )?;
    ctx.equal("display/neg_log", &display_nl, &theta_nl)?;
    let scale = theta_tlt.spectral_norm()?;
    let tol = ctx.tolerance().at_scale(scale);
    ctx.matches("display/t_log_t", &display_tlt, theta_tlt.matrix(), tol)?;
    Ok(())
}

fn scalar_csiszar(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    let [lo, hi] = ctx.cfg.spectrum_range;
    for f in fs {
        let label = f.label();
        let n = ctx.count(2, 6);
        let mut entries = Vec::with_capacity(n);
        let mut direct = 0.0;
        let (mut sp, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let p = ctx.uniform(lo, hi);
            let q = ctx.uniform(lo, hi);
            direct += q * f.eval(p / q);
            sp += p;
            sq += q;
            entries.push(FieldEntry {
                w: 1.0,
                a: HermitianMatrix::from_diagonal(&[p]),
                b: PositiveDefiniteMatrix::from_diagonal(&[q])?,
            });
        }
        let theta = theta_divergence(f, &WeightedOperatorField::new(entries, false)?)?
            .entry(0, 0)
            .re;
        ctx.scalar_equal(&format!("{label}/definition"), theta, direct);
        ctx.scalar(&format!("{label}/jensen"), sq * f.eval(sp / sq), theta);
    }
    Ok(())
}

/// Agreement required of the exact fixture.
const FIXTURE_TOL: f64 = 1e-9;

fn ex3_3(ctx: &mut TrialCtx, fs: &[F]) -> Result<()> {
    let f = &fs[0];
    let ex = compression_fixture();
    let chain = ex.compute_chain(f)?;
    for (k, (got, want)) in chain.iter().zip(&ex.expected_chain).enumerate() {
        ctx.matches(
            &format!("M{}", k + 1),
            got.matrix(),
            want.matrix(),
            FIXTURE_TOL,
        )?;
    }
    let units = ex.maps.weighted_images_of_identity()?;
    for (name, side, want) in [("D_T1", true, &ex.d_t1), ("D_T2", false, &ex.d_t2)] {
        let picked: Vec<_> = units
            .iter()
            .zip(ex.in_first)
            .filter(|(_, b)| *b == side)
            .map(|(u, _)| u.clone())
            .collect();
        let d = sum_hermitian(2, &picked);
        ctx.matches(name, d.matrix(), want.matrix(), FIXTURE_TOL)?;
    }
    for k in 0..3 {
        ctx.strict(&format!("M{}<M{}", k + 1, k + 2), &chain[k], &chain[k + 1])?;
    }
    let total = &chain[3] - &chain[0];
    let block = block_deficit(f, &ex.maps, &ex.a, &ex.in_first)?;
    ctx.loewner("ii/block<=total", &block, &total)?;
    ctx.loewner("ii/block>=0", &HermitianMatrix::zeros(2), &block)?;
    Ok(())
}
