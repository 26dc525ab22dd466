use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Combined absolute + relative slack for Loewner and scalar comparisons.
///
/// A comparison at scale `s` accepts margins down to `-(abs + rel * s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub abs: f64,
    pub rel: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            abs: 1e-8,
            rel: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        if !(abs >= 0.0 && rel >= 0.0 && abs.is_finite() && rel.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must be finite and non-negative (abs = {abs}, rel = {rel})"
            )));
        }
        Ok(Self { abs, rel })
    }

    #[inline]
    pub fn at_scale(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale
    }
}
