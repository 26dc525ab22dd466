//! Randomized verification of operator inequalities.
//!
//! A check instantiates one inequality per trial on freshly generated
//! matrices and records every comparison it makes. A comparison is violated
//! when its margin falls below `-(abs + rel * scale)`; margins near zero are
//! treated as equality.

mod checks;
pub mod gen;

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::funcs::ScalarOperatorFunction;
use crate::hermitian::{loewner_compare, DenseMatrix, HermitianMatrix, PositiveDefiniteMatrix};
use crate::posmap::{MapEntry, MapField, PositiveLinearMap};
use crate::tolerance::ToleranceConfig;

pub use checks::{check_ids, registry, CheckInfo};
pub use gen::GenConfig;
use gen::{
    normalized_congruences, random_hermitian_from, random_pd_from, random_unit_vector, trial_rng,
    TrialRng,
};

/// How trials of a check are scheduled. Results are identical in both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ExecMode {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs
    /// sequentially.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces the check's default function list. Checks tied to fixed
    /// functions ignore it.
    pub function: Option<ScalarOperatorFunction>,
    pub mode: ExecMode,
}

/// Aggregate over all comparisons that share a name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartResult {
    pub name: String,
    pub comparisons: usize,
    pub violations: usize,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub trials: usize,
    /// Trials in which at least one comparison was violated.
    pub violations: usize,
    /// Most negative margin observed over all comparisons.
    pub worst_margin: f64,
    /// SHA-256 prefix of the inputs of the trial that produced `worst_margin`.
    pub digest: String,
    pub parts: Vec<PartResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(flatten)]
    pub gen: GenConfig,
    pub tolerance: ToleranceConfig,
    pub checks: Vec<String>,
    pub function: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub checks: Vec<CheckResult>,
    pub wall_ms: u64,
}

impl SuiteReport {
    pub fn total_violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Comparison {
    part: String,
    margin: f64,
    violated: bool,
}

#[derive(Debug, Clone)]
struct TrialOutcome {
    comparisons: Vec<Comparison>,
    digest: String,
}

/// State of one trial: its RNG stream, a hash of every generated input, and
/// the comparisons made so far.
pub struct TrialCtx<'a> {
    cfg: &'a GenConfig,
    tol: &'a ToleranceConfig,
    rng: TrialRng,
    hasher: Sha256,
    comparisons: Vec<Comparison>,
}

impl<'a> TrialCtx<'a> {
    fn new(cfg: &'a GenConfig, tol: &'a ToleranceConfig, check: &str, trial: u64) -> Self {
        Self {
            cfg,
            tol,
            rng: trial_rng(cfg.seed, check, trial),
            hasher: Sha256::new(),
            comparisons: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.cfg.dim
    }

    pub fn tolerance(&self) -> &ToleranceConfig {
        self.tol
    }

    fn feed(&mut self, x: f64) {
        self.hasher.update(x.to_le_bytes());
    }

    fn feed_dense(&mut self, m: &DenseMatrix) {
        for z in m.iter() {
            self.feed(z.re);
            self.feed(z.im);
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let x = if lo < hi {
            self.rng.random_range(lo..hi)
        } else {
            lo
        };
        self.feed(x);
        x
    }

    /// Uniform integer in `lo..=hi`.
    pub fn count(&mut self, lo: usize, hi: usize) -> usize {
        let n = self.rng.random_range(lo..=hi);
        self.feed(n as f64);
        n
    }

    pub fn hermitian(&mut self, range: (f64, f64)) -> HermitianMatrix {
        let h = random_hermitian_from(&mut self.rng, self.cfg.dim, range);
        self.feed_dense(h.matrix());
        h
    }

    /// Hermitian with spectrum suited to `dom(f)`.
    pub fn hermitian_for(&mut self, f: &ScalarOperatorFunction) -> HermitianMatrix {
        let range = self.cfg.range_for(f.domain());
        self.hermitian(range)
    }

    pub fn pd(&mut self) -> Result<PositiveDefiniteMatrix> {
        let [lo, hi] = self.cfg.spectrum_range;
        let b = random_pd_from(
            &mut self.rng,
            self.cfg.dim,
            (lo, hi),
            self.cfg.condition_cap,
        )?;
        self.feed_dense(b.as_hermitian().matrix());
        Ok(b)
    }

    pub fn unit_vector(&mut self) -> DVector<Complex64> {
        let v = random_unit_vector(&mut self.rng, self.cfg.dim);
        for z in v.iter() {
            self.feed(z.re);
            self.feed(z.im);
        }
        v
    }

    /// Positive weights in `[0.2, 2)`.
    pub fn weights(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform(0.2, 2.0)).collect()
    }

    /// Strictly positive probability vector.
    pub fn probability(&mut self, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| self.uniform(0.1, 1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    }

    /// Random split of `0..n` (`n >= 2`) into two non-empty blocks.
    pub fn bipartition(&mut self, n: usize) -> Vec<bool> {
        loop {
            let mask: Vec<bool> = (0..n).map(|_| self.rng.random_bool(0.5)).collect();
            if mask.iter().any(|&b| b) && mask.iter().any(|&b| !b) {
                for &b in &mask {
                    self.feed(if b { 1.0 } else { 0.0 });
                }
                return mask;
            }
        }
    }

    fn congruence_maps(&mut self, weights: &[f64], unital: bool) -> Result<Vec<PositiveLinearMap>> {
        let dim = self.cfg.dim;
        let (eps, s) = if unital {
            (0.0, 1.0)
        } else {
            (0.25, self.uniform(0.5, 1.0))
        };
        let cs = normalized_congruences(&mut self.rng, dim, weights, eps, s)?;
        cs.into_iter()
            .map(|c| {
                self.feed_dense(&c);
                PositiveLinearMap::congruence(c)
            })
            .collect()
    }

    /// `n` weighted congruence maps with `sum w Phi(I) = I`.
    pub fn unital_field(&mut self, n: usize) -> Result<MapField> {
        let w = self.weights(n);
        let maps = self.congruence_maps(&w, true)?;
        MapField::new(
            w.into_iter()
                .zip(maps)
                .map(|(w, map)| MapEntry { w, map })
                .collect(),
            true,
        )
    }

    /// `n` weighted congruence maps with `sum w Phi(I) <= s I`, `s in [0.5, 1)`.
    pub fn subunital_field(&mut self, n: usize) -> Result<MapField> {
        let w = self.weights(n);
        let maps = self.congruence_maps(&w, false)?;
        MapField::new(
            w.into_iter()
                .zip(maps)
                .map(|(w, map)| MapEntry { w, map })
                .collect(),
            false,
        )
    }

    /// One map `X -> sum_i C_i* X C_i` built from 2 or 3 congruences.
    pub fn single_map(&mut self, unital: bool) -> Result<PositiveLinearMap> {
        let n = self.count(2, 3);
        let maps = self.congruence_maps(&vec![1.0; n], unital)?;
        PositiveLinearMap::sum(maps)
    }

    fn push(&mut self, part: &str, margin: f64, tolerance: f64) {
        self.comparisons.push(Comparison {
            part: part.to_string(),
            margin,
            violated: margin.is_nan() || margin < -tolerance,
        });
    }

    /// Records `lhs <= rhs` in the Loewner order.
    pub fn loewner(
        &mut self,
        part: &str,
        lhs: &HermitianMatrix,
        rhs: &HermitianMatrix,
    ) -> Result<()> {
        let v = loewner_compare(lhs, rhs, self.tol)?;
        self.push(part, v.margin_low, v.tolerance_used);
        Ok(())
    }

    /// Records `lhs < rhs` strictly: the gap must exceed the tolerance.
    pub fn strict(
        &mut self,
        part: &str,
        lhs: &HermitianMatrix,
        rhs: &HermitianMatrix,
    ) -> Result<()> {
        let v = loewner_compare(lhs, rhs, self.tol)?;
        self.comparisons.push(Comparison {
            part: part.to_string(),
            margin: v.margin_low,
            violated: v.margin_low.is_nan() || v.margin_low <= v.tolerance_used,
        });
        Ok(())
    }

    /// Records `lhs <= rhs` for reals.
    pub fn scalar(&mut self, part: &str, lhs: f64, rhs: f64) {
        let t = self.tol.at_scale(lhs.abs().max(rhs.abs()));
        self.push(part, rhs - lhs, t);
    }

    /// Records `a = b` for reals; the margin is `-|a - b|`.
    pub fn scalar_equal(&mut self, part: &str, a: f64, b: f64) {
        let t = self.tol.at_scale(a.abs().max(b.abs()));
        self.push(part, -(a - b).abs(), t);
    }

    /// Records entrywise agreement; the margin is minus the largest deviation.
    pub fn equal(&mut self, part: &str, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
        let dev = a.max_abs_diff(b)?;
        let t = self
            .tol
            .at_scale(a.spectral_norm()?.max(b.spectral_norm()?));
        self.push(part, -dev, t);
        Ok(())
    }

    /// Records entrywise agreement within a fixed absolute tolerance.
    pub fn matches(
        &mut self,
        part: &str,
        got: &DenseMatrix,
        want: &DenseMatrix,
        abs_tol: f64,
    ) -> Result<()> {
        if got.shape() != want.shape() {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?}", want.shape()),
                found: format!("{:?}", got.shape()),
            });
        }
        let dev = (got - want).iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.push(part, -dev, abs_tol);
        Ok(())
    }

    fn finish(self) -> TrialOutcome {
        let digest = hex::encode(&self.hasher.finalize()[..16]);
        TrialOutcome {
            comparisons: self.comparisons,
            digest,
        }
    }
}

fn run_trials<F>(trials: usize, mode: ExecMode, f: F) -> Vec<Result<TrialOutcome>>
where
    F: Fn(usize) -> Result<TrialOutcome> + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..trials).into_par_iter().map(f).collect()
        }
        _ => (0..trials).map(f).collect(),
    }
}

fn aggregate(id: &str, outcomes: Vec<TrialOutcome>) -> CheckResult {
    let mut parts: Vec<PartResult> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut violations = 0;
    let mut worst_margin = f64::INFINITY;
    let mut digest = String::new();
    for o in &outcomes {
        let mut trial_violated = false;
        let mut trial_worst = f64::INFINITY;
        for c in &o.comparisons {
            let k = *index.entry(c.part.clone()).or_insert_with(|| {
                parts.push(PartResult {
                    name: c.part.clone(),
                    comparisons: 0,
                    violations: 0,
                    worst_margin: f64::INFINITY,
                });
                parts.len() - 1
            });
            let p = &mut parts[k];
            p.comparisons += 1;
            p.violations += c.violated as usize;
            p.worst_margin = p.worst_margin.min(c.margin);
            trial_violated |= c.violated;
            trial_worst = trial_worst.min(c.margin);
        }
        violations += trial_violated as usize;
        if trial_worst < worst_margin || digest.is_empty() {
            if trial_worst < worst_margin {
                worst_margin = trial_worst;
            }
            digest = o.digest.clone();
        }
    }
    CheckResult {
        id: id.to_string(),
        trials: outcomes.len(),
        violations,
        worst_margin,
        digest,
        parts,
    }
}

pub fn run_check(id: &str, gen: &GenConfig, tol: &ToleranceConfig) -> Result<CheckResult> {
    run_check_with(id, gen, tol, &RunOptions::default())
}

pub fn run_check_with(
    id: &str,
    gen: &GenConfig,
    tol: &ToleranceConfig,
    opts: &RunOptions,
) -> Result<CheckResult> {
    let check = checks::lookup(id)?;
    gen.validate()?;
    let functions = match (&opts.function, check.fixed_functions) {
        (Some(f), false) => vec![f.clone()],
        _ => (check.default_functions)(),
    };
    let trials = if check.fixture { 1 } else { gen.trials };
    let results = run_trials(trials, opts.mode, |t| {
        let mut ctx = TrialCtx::new(gen, tol, check.id, t as u64);
        (check.run)(&mut ctx, &functions)?;
        Ok(ctx.finish())
    });
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(aggregate(check.id, outcomes))
}

/// Runs the listed checks in order. An empty list gives an empty report.
pub fn run_suite(ids: &[String], gen: &GenConfig, tol: &ToleranceConfig) -> Result<SuiteReport> {
    run_suite_with(ids, gen, tol, &RunOptions::default())
}

pub fn run_suite_with(
    ids: &[String],
    gen: &GenConfig,
    tol: &ToleranceConfig,
    opts: &RunOptions,
) -> Result<SuiteReport> {
    for id in ids {
        checks::lookup(id)?;
    }
    let start = Instant::now();
    let checks = ids
        .iter()
        .map(|id| run_check_with(id, gen, tol, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        config: SuiteConfig {
            gen: gen.clone(),
            tolerance: *tol,
            checks: ids.to_vec(),
            function: opts.function.as_ref().map(|f| f.label()),
        },
        checks,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}
