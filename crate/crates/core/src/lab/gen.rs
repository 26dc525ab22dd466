//! Seeded random instances.
//!
//! Every trial owns an RNG stream derived from `(seed, stream name, trial)`,
//! so results do not depend on the order in which checks or trials run.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::funcs::Interval;
use crate::hermitian::{
    re, spectral_decompose, DenseMatrix, HermitianMatrix, PositiveDefiniteMatrix,
};

pub type TrialRng = ChaCha12Rng;

/// Instance-generation settings shared by every check in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub dim: usize,
    /// Spectrum of generated positive definite matrices, and of Hermitian
    /// matrices fed to functions defined only on a half-line.
    pub spectrum_range: [f64; 2],
    pub condition_cap: f64,
    pub seed: u64,
    pub trials: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            spectrum_range: [0.1, 4.0],
            condition_cap: 1e4,
            seed: 0,
            trials: 100,
        }
    }
}

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 8;

impl GenConfig {
    pub fn new(dim: usize, seed: u64, trials: usize) -> Self {
        Self {
            dim,
            seed,
            trials,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_DIM..=MAX_DIM).contains(&self.dim) {
            return Err(Error::InvalidConfig(format!(
                "dim must lie in {MIN_DIM}..={MAX_DIM}, got {}",
                self.dim
            )));
        }
        let [lo, hi] = self.spectrum_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::BadRange {
                lo,
                hi,
                detail: "need finite lo <= hi".into(),
            });
        }
        if self.condition_cap.is_nan() || self.condition_cap < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "condition_cap must be >= 1, got {}",
                self.condition_cap
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        Ok(())
    }

    /// Spectrum range for matrices passed to a function with this domain:
    /// `[-hi, hi]` on the real line, otherwise `spectrum_range` moved inside
    /// the domain.
    pub fn range_for(&self, domain: &Interval) -> (f64, f64) {
        let [lo, hi] = self.spectrum_range;
        match (domain.lower(), domain.upper()) {
            (None, None) => (-hi.abs(), hi.abs()),
            (Some(a), _) => {
                let lo = if lo > a {
                    lo
                } else {
                    a + 0.025 * (hi - a).abs().max(1.0)
                };
                (lo, hi.max(lo))
            }
            (None, Some(b)) => (b - (hi - lo).max(1.0), b - 0.1),
        }
    }
}

/// Spectrum range used for `domain` under the default configuration.
pub fn spectrum_for_domain(domain: &Interval) -> (f64, f64) {
    GenConfig::default().range_for(domain)
}

/// RNG for `(seed, stream, trial)`: ChaCha12 keyed by a SHA-256 of the triple.
pub fn trial_rng(seed: u64, stream: &str, trial: u64) -> TrialRng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((stream.len() as u64).to_le_bytes());
    h.update(stream.as_bytes());
    h.update(trial.to_le_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    TrialRng::from_seed(key)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// `n x m` matrix of standard complex Gaussians.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> DenseMatrix {
    let mut out = DMatrix::zeros(n, m);
    for j in 0..m {
        for i in 0..n {
            out[(i, j)] = complex_gaussian(rng);
        }
    }
    out
}

/// Eigenvector matrix of a random GUE-distributed Hermitian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DenseMatrix {
    let g = gaussian_matrix(rng, dim, dim);
    let h = HermitianMatrix::symmetrized(g);
    spectral_decompose(&h)
        .expect("eigensolver converges on small Gaussian matrices")
        .unitary
}

/// `U diag(lambda) U*` with `lambda` uniform on `[lo, hi]`; exactly `lo I`
/// when `lo == hi`.
pub fn random_hermitian_from<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    (lo, hi): (f64, f64),
) -> HermitianMatrix {
    if lo == hi {
        return HermitianMatrix::identity(dim).scale(lo);
    }
    let lambda: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
    with_spectrum(rng, &lambda)
}

fn with_spectrum<R: Rng + ?Sized>(rng: &mut R, lambda: &[f64]) -> HermitianMatrix {
    let dim = lambda.len();
    let u = random_unitary(rng, dim);
    let scaled = DMatrix::from_fn(dim, dim, |i, j| u[(i, j)] * re(lambda[j]));
    HermitianMatrix::symmetrized(scaled * u.adjoint())
}

/// Positive definite with spectrum in `[lo, hi]`; eigenvalues below
/// `lambda_max / cap` are raised to it.
pub fn random_pd_from<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    (lo, hi): (f64, f64),
    cap: f64,
) -> Result<PositiveDefiniteMatrix> {
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::BadRange {
            lo,
            hi,
            detail: "positive definite spectra need 0 < lo <= hi".into(),
        });
    }
    if lo == hi {
        return PositiveDefiniteMatrix::new(HermitianMatrix::identity(dim).scale(lo));
    }
    let mut lambda: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
    let floor = lambda.iter().cloned().fold(f64::MIN, f64::max) / cap;
    for l in &mut lambda {
        *l = l.max(floor);
    }
    PositiveDefiniteMatrix::new(with_spectrum(rng, &lambda))
}

/// Uniform unit vector in `C^dim`.
pub fn random_unit_vector<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
) -> nalgebra::DVector<Complex64> {
    loop {
        let v = nalgebra::DVector::from_fn(dim, |_, _| complex_gaussian(rng));
        let n = v.norm();
        if n > 1e-8 {
            return v / re(n);
        }
    }
}

/// Hermitian matrix number 0 of stream `random_hermitian` for this trial.
pub fn random_hermitian(cfg: &GenConfig, trial: u64) -> Result<HermitianMatrix> {
    cfg.validate()?;
    let [lo, hi] = cfg.spectrum_range;
    let mut rng = trial_rng(cfg.seed, "random_hermitian", trial);
    Ok(random_hermitian_from(&mut rng, cfg.dim, (lo, hi)))
}

/// Positive definite matrix number 0 of stream `random_pd` for this trial.
pub fn random_pd(cfg: &GenConfig, trial: u64) -> Result<PositiveDefiniteMatrix> {
    cfg.validate()?;
    let [lo, hi] = cfg.spectrum_range;
    let mut rng = trial_rng(cfg.seed, "random_pd", trial);
    random_pd_from(&mut rng, cfg.dim, (lo, hi), cfg.condition_cap)
}

/// Congruence factors `C_1..C_n` (each `dim x dim`) with
/// `sum w_i C_i* C_i = s (S + eps I)^{-1/2} S (S + eps I)^{-1/2}`, where
/// `S = sum w_i G_i* G_i` for near-identity random `G_i`.
///
/// `eps = 0, s = 1` gives an exactly unital family.
pub fn normalized_congruences<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    weights: &[f64],
    eps: f64,
    s: f64,
) -> Result<Vec<DenseMatrix>> {
    let n = weights.len();
    let scale = re(1.0 / (n as f64).sqrt());
    let gs: Vec<DenseMatrix> = (0..n)
        .map(|_| {
            (DenseMatrix::identity(dim, dim) + gaussian_matrix(rng, dim, dim) * re(0.5)) * scale
        })
        .collect();
    let mut sum = DenseMatrix::zeros(dim, dim);
    for (g, w) in gs.iter().zip(weights) {
        sum += g.adjoint() * g * re(*w);
    }
    let shifted = HermitianMatrix::symmetrized(sum);
    let shifted = &shifted + &HermitianMatrix::identity(dim).scale(eps);
    let norm = PositiveDefiniteMatrix::new(shifted)?
        .inv_sqrt()
        .into_matrix()
        * re(s.sqrt());
    Ok(gs.into_iter().map(|g| g * &norm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = trial_rng(1, "x", 0).random();
        let b: u64 = trial_rng(1, "x", 0).random();
        let c: u64 = trial_rng(1, "x", 1).random();
        let d: u64 = trial_rng(1, "y", 0).random();
        let e: u64 = trial_rng(2, "x", 0).random();
        assert_eq!(a, b);
        assert!(a != c && a != d && a != e);
    }

    #[test]
    fn degenerate_range_gives_scaled_identity() {
        let cfg = GenConfig {
            spectrum_range: [1.0, 1.0],
            ..GenConfig::default()
        };
        assert_eq!(
            random_hermitian(&cfg, 0).unwrap(),
            HermitianMatrix::identity(3)
        );
        assert_eq!(
            random_pd(&cfg, 5).unwrap().as_hermitian(),
            &HermitianMatrix::identity(3)
        );
    }

    #[test]
    fn same_trial_same_matrix() {
        let cfg = GenConfig::new(4, 9, 10);
        assert_eq!(
            random_hermitian(&cfg, 3).unwrap(),
            random_hermitian(&cfg, 3).unwrap()
        );
        assert_ne!(
            random_hermitian(&cfg, 3).unwrap(),
            random_hermitian(&cfg, 4).unwrap()
        );
    }

    #[test]
    fn spectra_stay_in_range() {
        let cfg = GenConfig {
            dim: 3,
            spectrum_range: [0.5, 2.0],
            ..GenConfig::default()
        };
        for t in 0..50 {
            let ev = spectral_decompose(&random_hermitian(&cfg, t).unwrap())
                .unwrap()
                .eigenvalues;
            assert!(
                ev.iter().all(|&l| (0.5 - 1e-12..=2.0 + 1e-12).contains(&l)),
                "{ev:?}"
            );
        }
    }

    #[test]
    fn condition_cap_enforced() {
        let cfg = GenConfig {
            dim: 5,
            spectrum_range: [1e-3, 10.0],
            condition_cap: 50.0,
            ..GenConfig::default()
        };
        for t in 0..50 {
            let b = random_pd(&cfg, t).unwrap();
            assert!(
                b.condition_number() <= 50.0 * (1.0 + 1e-9),
                "{}",
                b.condition_number()
            );
        }
        let bad = GenConfig {
            spectrum_range: [-1.0, 1.0],
            ..GenConfig::default()
        };
        assert!(matches!(random_pd(&bad, 0), Err(Error::BadRange { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(GenConfig::new(1, 0, 1).validate().is_err());
        assert!(GenConfig::new(9, 0, 1).validate().is_err());
        assert!(GenConfig::new(2, 0, 0).validate().is_err());
        let rev = GenConfig {
            spectrum_range: [2.0, 1.0],
            ..GenConfig::default()
        };
        assert!(rev.validate().is_err());
        assert!(GenConfig::default().validate().is_ok());
    }

    #[test]
    fn range_for_domains() {
        let cfg = GenConfig::default();
        assert_eq!(cfg.range_for(&Interval::real_line()), (-4.0, 4.0));
        assert_eq!(cfg.range_for(&Interval::positive()), (0.1, 4.0));
        assert_eq!(cfg.range_for(&Interval::nonnegative()), (0.1, 4.0));
    }

    #[test]
    fn unital_congruences_are_unital() {
        let mut rng = trial_rng(3, "c", 0);
        let w = [0.5, 1.5, 1.0];
        let cs = normalized_congruences(&mut rng, 3, &w, 0.0, 1.0).unwrap();
        let mut sum = DenseMatrix::zeros(3, 3);
        for (c, w) in cs.iter().zip(w) {
            sum += c.adjoint() * c * re(w);
        }
        assert!((sum - DenseMatrix::identity(3, 3)).norm() < 1e-12);
    }
}
