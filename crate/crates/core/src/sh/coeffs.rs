use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ShError;

/// Maximum harmonic degree retained in a truncated expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BandLimit(pub usize);

impl BandLimit {
    pub fn degree(self) -> usize {
        self.0
    }

    /// Number of `(l, m)` pairs with `l <= N`.
    pub fn coefficient_count(self) -> usize {
        (self.0 + 1) * (self.0 + 1)
    }
}

impl From<usize> for BandLimit {
    fn from(n: usize) -> Self {
        BandLimit(n)
    }
}

/// Real harmonic coefficients `c_{l,m}` for `0 <= l <= N`, `|m| <= l`,
/// stored flat at index `l^2 + l + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoefficients {
    band_limit: usize,
    values: Vec<f64>,
}

#[inline]
pub(crate) fn flat_index(l: usize, m: i64) -> usize {
    (l * l + l) .wrapping_add_signed(m as isize)
}

impl HarmonicCoefficients {
    pub fn zeros(band_limit: usize) -> Self {
        Self {
            band_limit,
            values: vec![0.0; (band_limit + 1) * (band_limit + 1)],
        }
    }

    pub fn from_values(band_limit: usize, values: Vec<f64>) -> Result<Self, ShError> {
        let expected = (band_limit + 1) * (band_limit + 1);
        if values.len() != expected {
            return Err(ShError::CoefficientCountMismatch {
                band_limit,
                expected,
                actual: values.len(),
            });
        }
        let c = Self { band_limit, values };
        if let Some((l, m, _)) = c.iter().find(|(_, _, v)| !v.is_finite()) {
            return Err(ShError::NonFinite { l, m });
        }
        Ok(c)
    }

    /// Table with a single unit entry at `(l, m)`.
    pub fn indicator(band_limit: usize, l: usize, m: i64) -> Self {
        let mut c = Self::zeros(band_limit);
        c.set(l, m, 1.0);
        c
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Panics if `(l, m)` is outside the table.
    #[inline]
    pub fn get(&self, l: usize, m: i64) -> f64 {
        assert!(l <= self.band_limit && m.unsigned_abs() as usize <= l, "({l}, {m}) out of range");
        self.values[flat_index(l, m)]
    }

    #[inline]
    pub fn set(&mut self, l: usize, m: i64, value: f64) {
        assert!(l <= self.band_limit && m.unsigned_abs() as usize <= l, "({l}, {m}) out of range");
        self.values[flat_index(l, m)] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Iterates `(l, m, value)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        (0..=self.band_limit).flat_map(move |l| {
            (-(l as i64)..=l as i64).map(move |m| (l, m, self.values[flat_index(l, m)]))
        })
    }

    /// Multiplies each degree-`l` block by `factor(l)`.
    pub fn map_degrees(&self, factor: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for l in 0..=self.band_limit {
            let f = factor(l);
            let start = l * l;
            for v in &mut out.values[start..start + 2 * l + 1] {
                *v *= f;
            }
        }
        out
    }

    /// Euclidean norm of the coefficient vector, i.e. the L² norm of the
    /// synthesised function.
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn add(&self, other: &Self) -> Result<Self, ShError> {
        if self.band_limit != other.band_limit {
            return Err(ShError::BandLimitMismatch(self.band_limit, other.band_limit));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            band_limit: self.band_limit,
            values,
        })
    }

    /// Zero-pads or truncates to a new band limit.
    pub fn resized(&self, band_limit: usize) -> Self {
        let mut out = Self::zeros(band_limit);
        let n = self.values.len().min(out.values.len());
        out.values[..n].copy_from_slice(&self.values[..n]);
        out
    }
}

/// On-disk coefficient table:
/// `{"band_limit": N, "channels": C, "coeffs": [[l, m, v_1, …, v_C], …]}`.
///
/// A single-channel document therefore has rows `[l, m, value]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientDocument {
    pub band_limit: usize,
    pub channels: usize,
    pub coeffs: Vec<Vec<Value>>,
}

impl CoefficientDocument {
    pub fn from_channels(channels: &[&HarmonicCoefficients]) -> Result<Self, ShError> {
        let first = channels
            .first()
            .ok_or_else(|| ShError::Document("no channels".into()))?;
        let n = first.band_limit;
        if let Some(c) = channels.iter().find(|c| c.band_limit != n) {
            return Err(ShError::BandLimitMismatch(n, c.band_limit));
        }
        let coeffs = first
            .iter()
            .map(|(l, m, _)| {
                let mut row = Vec::with_capacity(2 + channels.len());
                row.push(Value::from(l));
                row.push(Value::from(m));
                for c in channels {
                    row.push(Value::from(c.get(l, m)));
                }
                row
            })
            .collect();
        Ok(Self {
            band_limit: n,
            channels: channels.len(),
            coeffs,
        })
    }

    /// Rebuilds the per-channel tables. Entries missing from the document
    /// are zero; duplicated entries are rejected.
    pub fn to_channels(&self) -> Result<Vec<HarmonicCoefficients>, ShError> {
        if self.channels == 0 {
            return Err(ShError::Document("channels must be at least 1".into()));
        }
        let n = self.band_limit;
        let mut out = vec![HarmonicCoefficients::zeros(n); self.channels];
        let mut seen = vec![false; (n + 1) * (n + 1)];
        for (row_no, row) in self.coeffs.iter().enumerate() {
            if row.len() != 2 + self.channels {
                return Err(ShError::Document(format!(
                    "row {row_no} has {} entries, expected {}",
                    row.len(),
                    2 + self.channels
                )));
            }
            let l = row[0]
                .as_u64()
                .ok_or_else(|| ShError::Document(format!("row {row_no}: degree is not a non-negative integer")))?
                as usize;
            let m = row[1]
                .as_i64()
                .ok_or_else(|| ShError::Document(format!("row {row_no}: order is not an integer")))?;
            if l > n || m.unsigned_abs() as usize > l {
                return Err(ShError::Document(format!("row {row_no}: ({l}, {m}) out of range")));
            }
            let idx = flat_index(l, m);
            if std::mem::replace(&mut seen[idx], true) {
                return Err(ShError::Document(format!("row {row_no}: duplicate entry ({l}, {m})")));
            }
            for (c, channel) in out.iter_mut().enumerate() {
                let v = row[2 + c]
                    .as_f64()
                    .ok_or_else(|| ShError::Document(format!("row {row_no}: value is not a number")))?;
                if !v.is_finite() {
                    return Err(ShError::NonFinite { l, m });
                }
                channel.set(l, m, v);
            }
        }
        Ok(out)
    }
}
