use serde::{Deserialize, Serialize};

use super::SdeError;

/// Drift `b(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Drift {
    Zero,
    /// `b = c`
    Constant { c: f64 },
    /// `b = a x`
    Linear { a: f64 },
    /// Mean reversion `b = θ(μ − x)` with `θ > 0`.
    Ou { rate: f64, mean: f64 },
}

/// Diffusion `σ(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Diffusion {
    /// `σ = sigma >= 0`
    Constant { sigma: f64 },
    /// `σ = s x`
    Linear { s: f64 },
}

impl Drift {
    #[inline]
    pub fn eval(&self, _t: f64, x: f64) -> f64 {
        match *self {
            Drift::Zero => 0.0,
            Drift::Constant { c } => c,
            Drift::Linear { a } => a * x,
            Drift::Ou { rate, mean } => rate * (mean - x),
        }
    }
}

impl Diffusion {
    #[inline]
    pub fn eval(&self, _t: f64, x: f64) -> f64 {
        match *self {
            Diffusion::Constant { sigma } => sigma,
            Diffusion::Linear { s } => s * x,
        }
    }
}

/// Drift and diffusion of a scalar Itô process, optionally replacing the
/// Brownian driver by fractional Brownian motion of Hurst index `hurst`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub drift: Drift,
    pub diffusion: Diffusion,
    #[serde(default)]
    pub hurst: Option<f64>,
}

impl Default for ProcessSpec {
    fn default() -> Self {
        Self::brownian()
    }
}

impl ProcessSpec {
    pub fn new(drift: Drift, diffusion: Diffusion) -> Self {
        Self {
            drift,
            diffusion,
            hurst: None,
        }
    }

    /// Standard Brownian motion: zero drift, unit diffusion.
    pub fn brownian() -> Self {
        Self::new(Drift::Zero, Diffusion::Constant { sigma: 1.0 })
    }

    pub fn ornstein_uhlenbeck(rate: f64, mean: f64, sigma: f64) -> Self {
        Self::new(Drift::Ou { rate, mean }, Diffusion::Constant { sigma })
    }

    pub fn validate(&self) -> Result<(), SdeError> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(SdeError::InvalidParameter(format!("{name} must be finite, got {v}")))
            }
        };
        match self.drift {
            Drift::Zero => {}
            Drift::Constant { c } => finite("drift constant", c)?,
            Drift::Linear { a } => finite("drift slope", a)?,
            Drift::Ou { rate, mean } => {
                finite("mean-reversion rate", rate)?;
                finite("mean", mean)?;
                if rate <= 0.0 {
                    return Err(SdeError::InvalidParameter(format!(
                        "mean-reversion rate must be positive, got {rate}"
                    )));
                }
            }
        }
        match self.diffusion {
            Diffusion::Constant { sigma } => {
                finite("sigma", sigma)?;
                if sigma < 0.0 {
                    return Err(SdeError::InvalidParameter(format!(
                        "sigma must be non-negative, got {sigma}"
                    )));
                }
            }
            Diffusion::Linear { s } => finite("diffusion slope", s)?,
        }
        if let Some(h) = self.hurst {
            if !(h > 0.0 && h < 1.0) {
                return Err(SdeError::InvalidHurst(h));
            }
        }
        Ok(())
    }
}
