//! Associated Legendre functions.
//!
//! Two flavours are provided: the unnormalised `P_l^m` (Condon–Shortley phase
//! included) and a table of orthonormalised values used by the harmonic
//! basis. Both are computed by upward recurrence in `l`, which stays stable
//! for the degrees used here. The closed alternating sum is not used outside
//! tests; it loses all precision beyond degree ~20.

use std::f64::consts::PI;

use super::ShError;

/// Unnormalised associated Legendre function `P_l^m(x)` with the
/// Condon–Shortley phase `(-1)^m`.
pub fn assoc_legendre(l: usize, m: usize, x: f64) -> Result<f64, ShError> {
    if m > l {
        return Err(ShError::OrderOutOfRange { l, m: m as i64 });
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(ShError::ArgumentOutOfRange(x));
    }

    // P_m^m = (-1)^m (2m-1)!! (1-x^2)^{m/2}
    let somx2 = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= -fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return Ok(pmm);
    }

    let mut pmmp1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return Ok(pmmp1);
    }

    let mut pll = 0.0;
    for ll in (m + 2)..=l {
        pll = ((2 * ll - 1) as f64 * x * pmmp1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pmmp1;
        pmmp1 = pll;
    }
    Ok(pll)
}

/// Orthonormalised Legendre values `K_l^m P_l^m(cos θ)` for all
/// `0 <= m <= l <= band_limit`, where
/// `K_l^m = sqrt((2l+1)/(4π) (l-m)!/(l+m)!)`.
///
/// Storage is triangular: entry `(l, m)` lives at `l(l+1)/2 + m`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    band_limit: usize,
    values: Vec<f64>,
}

impl LegendreTable {
    /// Fills the table at `cos θ = x`, `sin θ = s` (both supplied so callers
    /// holding an exact `sin θ` avoid the `sqrt(1-x^2)` cancellation near
    /// the poles).
    pub fn new(band_limit: usize, x: f64, s: f64) -> Self {
        let n = band_limit;
        let mut values = vec![0.0; (n + 1) * (n + 2) / 2];
        let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;

        let mut pmm = (0.25 / PI).sqrt();
        for m in 0..=n {
            if m > 0 {
                pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
            }
            values[idx(m, m)] = pmm;
            if m == n {
                break;
            }
            let mut p_lm2 = pmm;
            let mut p_lm1 = ((2 * m + 3) as f64).sqrt() * x * pmm;
            values[idx(m + 1, m)] = p_lm1;
            for l in (m + 2)..=n {
                let lf = l as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
                let p = a * (x * p_lm1 - b * p_lm2);
                values[idx(l, m)] = p;
                p_lm2 = p_lm1;
                p_lm1 = p;
            }
        }
        Self { band_limit, values }
    }

    /// Table at colatitude `theta`.
    pub fn at_colatitude(band_limit: usize, theta: f64) -> Self {
        Self::new(band_limit, theta.cos(), theta.sin())
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    #[inline]
    pub fn get(&self, l: usize, m: usize) -> f64 {
        debug_assert!(m <= l && l <= self.band_limit);
        self.values[l * (l + 1) / 2 + m]
    }
}
