//! Covariance spectra `{λ_l}` for operators diagonal in the harmonic basis,
//! plus Sobolev norms and regularity diagnostics.
//!
//! Eigenvalues are stored per degree; every flat-basis sum multiplies the
//! degree-`l` term by its `2l+1` orders.

use serde::{Deserialize, Serialize};

use crate::sh::HarmonicCoefficients;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectrumError {
    #[error("unknown spectrum kind {0:?}")]
    UnknownKind(String),
    #[error("spectrum kind {0:?} requires a Sobolev order `nu`")]
    MissingNu(String),
    #[error("spectrum kind {0:?} does not take a Sobolev order")]
    UnexpectedNu(String),
    #[error("Sobolev order must be finite and non-negative, got {0}")]
    InvalidOrder(f64),
    #[error("eigenvalue λ_{l} = {value} must be finite and non-negative")]
    InvalidEigenvalue { l: usize, value: f64 },
    #[error("custom spectrum needs at least one eigenvalue")]
    EmptyCustom,
    #[error("spectrum band limit {spectrum} does not match {expected}")]
    BandLimitMismatch { spectrum: usize, expected: usize },
}

/// Sobolev order `ν >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SobolevOrder(f64);

impl SobolevOrder {
    pub fn new(nu: f64) -> Result<Self, SpectrumError> {
        if nu.is_finite() && nu >= 0.0 {
            Ok(Self(nu))
        } else {
            Err(SpectrumError::InvalidOrder(nu))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SobolevOrder {
    type Error = SpectrumError;
    fn try_from(nu: f64) -> Result<Self, Self::Error> {
        Self::new(nu)
    }
}

impl From<SobolevOrder> for f64 {
    fn from(nu: SobolevOrder) -> f64 {
        nu.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SpectrumKind {
    /// `λ_l = 1`
    Identity,
    /// `λ_l = 1/(l+1)`
    InvLinear,
    /// `λ_l = 1/(l+1)^2`
    InvQuadratic,
    /// `λ_l = (1 + l(l+1))^{-ν}`, the Bessel potential `(1-Δ)^{-ν}`.
    Bessel { nu: SobolevOrder },
    Custom,
}

impl SpectrumKind {
    /// Parses a kind tag, attaching `nu` where the kind needs one.
    pub fn from_tag(tag: &str, nu: Option<f64>) -> Result<Self, SpectrumError> {
        let kind = match tag {
            "identity" => Self::Identity,
            "inv_linear" => Self::InvLinear,
            "inv_quadratic" => Self::InvQuadratic,
            "bessel" => {
                let nu = nu.ok_or_else(|| SpectrumError::MissingNu(tag.into()))?;
                return Ok(Self::Bessel {
                    nu: SobolevOrder::new(nu)?,
                });
            }
            "custom" => Self::Custom,
            other => return Err(SpectrumError::UnknownKind(other.into())),
        };
        if nu.is_some() {
            return Err(SpectrumError::UnexpectedNu(tag.into()));
        }
        Ok(kind)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::InvLinear => "inv_linear",
            Self::InvQuadratic => "inv_quadratic",
            Self::Bessel { .. } => "bessel",
            Self::Custom => "custom",
        }
    }
}

/// Per-degree eigenvalues of a covariance operator `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSpectrum {
    kind: SpectrumKind,
    lambdas: Vec<f64>,
}

/// Builds one of the closed-form spectra up to degree `band_limit`.
pub fn make_spectrum(kind: SpectrumKind, band_limit: usize) -> Result<CovarianceSpectrum, SpectrumError> {
    let eigenvalue = |l: usize| -> f64 {
        let lf = l as f64;
        match kind {
            SpectrumKind::Identity => 1.0,
            SpectrumKind::InvLinear => 1.0 / (lf + 1.0),
            SpectrumKind::InvQuadratic => 1.0 / ((lf + 1.0) * (lf + 1.0)),
            SpectrumKind::Bessel { nu } => (1.0 + lf * (lf + 1.0)).powf(-nu.value()),
            SpectrumKind::Custom => unreachable!(),
        }
    };
    if kind == SpectrumKind::Custom {
        return Err(SpectrumError::UnknownKind(
            "custom spectra are built from explicit eigenvalues".into(),
        ));
    }
    Ok(CovarianceSpectrum {
        kind,
        lambdas: (0..=band_limit).map(eigenvalue).collect(),
    })
}

impl CovarianceSpectrum {
    pub fn custom(lambdas: Vec<f64>) -> Result<Self, SpectrumError> {
        if lambdas.is_empty() {
            return Err(SpectrumError::EmptyCustom);
        }
        if let Some((l, &value)) = lambdas
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(SpectrumError::InvalidEigenvalue { l, value });
        }
        Ok(Self {
            kind: SpectrumKind::Custom,
            lambdas,
        })
    }

    /// All-zero spectrum: the noise-free process.
    pub fn zero(band_limit: usize) -> Self {
        Self {
            kind: SpectrumKind::Custom,
            lambdas: vec![0.0; band_limit + 1],
        }
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn band_limit(&self) -> usize {
        self.lambdas.len() - 1
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda(&self, l: usize) -> f64 {
        self.lambdas[l]
    }
}

/// `Σ_{l<=N} (2l+1) λ_l`.
pub fn truncated_trace(spectrum: &CovarianceSpectrum) -> f64 {
    spectrum
        .lambdas
        .iter()
        .enumerate()
        .map(|(l, lam)| (2 * l + 1) as f64 * lam)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    /// The last term is smaller than the one before it.
    Decaying,
    /// The last term did not shrink; the full series likely diverges.
    NotDecaying,
    /// Fewer than two terms.
    Undetermined,
}

/// Partial sums of `Σ_l (2l+1) λ_l (l+1)^{2ν}` with a tail diagnosis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceMargin {
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// `S_N / S_{N-1}`; `None` with fewer than two terms or `S_{N-1} = 0`.
    pub last_ratio: Option<f64>,
    pub decay: DecayClass,
}

impl ConvergenceMargin {
    pub fn total(&self) -> f64 {
        *self.partial_sums.last().unwrap_or(&0.0)
    }
}

pub fn hnu_convergence_margin(spectrum: &CovarianceSpectrum, nu: SobolevOrder) -> ConvergenceMargin {
    let terms: Vec<f64> = spectrum
        .lambdas
        .iter()
        .enumerate()
        .map(|(l, lam)| (2 * l + 1) as f64 * lam * ((l + 1) as f64).powf(2.0 * nu.value()))
        .collect();
    let partial_sums: Vec<f64> = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let k = terms.len();
    let (last_ratio, decay) = if k < 2 {
        (None, DecayClass::Undetermined)
    } else {
        let prev = partial_sums[k - 2];
        let ratio = (prev != 0.0).then(|| partial_sums[k - 1] / prev);
        let (t_prev, t_last) = (terms[k - 2], terms[k - 1]);
        let decay = if t_last > 0.0 && t_last >= t_prev {
            DecayClass::NotDecaying
        } else {
            DecayClass::Decaying
        };
        (ratio, decay)
    };
    ConvergenceMargin {
        terms,
        partial_sums,
        last_ratio,
        decay,
    }
}

/// `sqrt(Σ (1 + (l(l+1))^ν) c_{l,m}^2)`.
///
/// Constants carry no Laplacian energy at any order, and `ν = 0` is plain
/// L² (so the result equals the coefficient norm).
pub fn sobolev_norm(coeffs: &HarmonicCoefficients, nu: SobolevOrder) -> f64 {
    if nu.value() == 0.0 {
        return coeffs.l2_norm();
    }
    coeffs
        .iter()
        .map(|(l, _, c)| {
            let eig = ((l * (l + 1)) as f64).powf(nu.value());
            (1.0 + eig) * c * c
        })
        .sum::<f64>()
        .sqrt()
}

/// Maps an L² expansion into `H^ν` by `c_{l,m} -> (l+1)^{-ν} c_{l,m}`.
pub fn project_hnu(coeffs: &HarmonicCoefficients, nu: SobolevOrder) -> HarmonicCoefficients {
    coeffs.map_degrees(|l| ((l + 1) as f64).powf(-nu.value()))
}

/// Wire form: `{"kind": "...", "nu": x, "band_limit": N}` or
/// `{"kind": "custom", "lambdas": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
}

impl SpectrumSpec {
    /// Resolves against a run's band limit. A band limit inside the spec,
    /// or the length of a custom list, must agree with `band_limit`.
    pub fn resolve(&self, band_limit: usize) -> Result<CovarianceSpectrum, SpectrumError> {
        let kind = SpectrumKind::from_tag(&self.kind, self.nu)?;
        let spectrum = match kind {
            SpectrumKind::Custom => {
                let lambdas = self
                    .lambdas
                    .clone()
                    .ok_or(SpectrumError::EmptyCustom)?;
                CovarianceSpectrum::custom(lambdas)?
            }
            kind => {
                if self.lambdas.is_some() {
                    return Err(SpectrumError::UnknownKind(format!(
                        "{}: `lambdas` is only valid for custom spectra",
                        self.kind
                    )));
                }
                make_spectrum(kind, self.band_limit.unwrap_or(band_limit))?
            }
        };
        if spectrum.band_limit() != band_limit
            || self.band_limit.is_some_and(|n| n != spectrum.band_limit())
        {
            return Err(SpectrumError::BandLimitMismatch {
                spectrum: self.band_limit.unwrap_or(spectrum.band_limit()),
                expected: band_limit,
            });
        }
        Ok(spectrum)
    }

    pub fn describe(spectrum: &CovarianceSpectrum) -> Self {
        match spectrum.kind() {
            SpectrumKind::Custom => Self {
                kind: "custom".into(),
                nu: None,
                band_limit: None,
                lambdas: Some(spectrum.lambdas().to_vec()),
            },
            kind => Self {
                kind: kind.tag().into(),
                nu: match kind {
                    SpectrumKind::Bessel { nu } => Some(nu.value()),
                    _ => None,
                },
                band_limit: Some(spectrum.band_limit()),
                lambdas: None,
            },
        }
    }
}
