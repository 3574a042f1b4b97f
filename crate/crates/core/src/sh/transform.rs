//! Forward analysis on a quadrature grid and synthesis at arbitrary points.

use std::f64::consts::SQRT_2;

use super::{BandLimit, HarmonicCoefficients, LegendreTable, ShError, SphericalGrid};
use crate::sh::coeffs::flat_index;

/// `c_{l,m} = Σ_nodes w · f · Y_{l,m}`.
///
/// The azimuthal sums are taken ring by ring first, then projected onto the
/// Legendre functions of that ring.
pub fn forward_sht(
    samples: &[f64],
    grid: &SphericalGrid,
    band_limit: BandLimit,
) -> Result<HarmonicCoefficients, ShError> {
    let n = band_limit.degree();
    if samples.len() != grid.node_count() {
        return Err(ShError::SampleCountMismatch {
            expected: grid.node_count(),
            actual: samples.len(),
        });
    }
    if grid.exact_degree() < 2 * n {
        return Err(ShError::GridTooCoarse {
            grid_degree: grid.exact_degree(),
            needed: 2 * n,
        });
    }

    let n_phi = grid.n_phi;
    let mut cos_table = vec![0.0; n_phi * (n + 1)];
    let mut sin_table = vec![0.0; n_phi * (n + 1)];
    for (j, &phi) in grid.phis.iter().enumerate() {
        for m in 0..=n {
            let (s, c) = (m as f64 * phi).sin_cos();
            cos_table[j * (n + 1) + m] = c;
            sin_table[j * (n + 1) + m] = s;
        }
    }

    let mut out = HarmonicCoefficients::zeros(n);
    let values = out.values_mut();
    let mut a = vec![0.0; n + 1];
    let mut b = vec![0.0; n + 1];
    for i in 0..grid.n_theta {
        let ring = &samples[i * n_phi..(i + 1) * n_phi];
        a.iter_mut().for_each(|v| *v = 0.0);
        b.iter_mut().for_each(|v| *v = 0.0);
        for (j, &f) in ring.iter().enumerate() {
            let row = j * (n + 1);
            for m in 0..=n {
                a[m] += f * cos_table[row + m];
                b[m] += f * sin_table[row + m];
            }
        }
        let w = grid.ring_weight(i);
        let table = LegendreTable::new(n, grid.cos_theta(i), grid.sin_theta(i));
        for l in 0..=n {
            values[flat_index(l, 0)] += w * table.get(l, 0) * a[0];
            for m in 1..=l {
                let p = w * SQRT_2 * table.get(l, m);
                values[flat_index(l, m as i64)] += p * a[m];
                values[flat_index(l, -(m as i64))] += p * b[m];
            }
        }
    }
    Ok(out)
}

/// Synthesises `Σ c_{l,m} Y_{l,m}(θ, φ)` at a single point.
pub fn inverse_sht_at(coeffs: &HarmonicCoefficients, theta: f64, phi: f64) -> f64 {
    let n = coeffs.band_limit();
    let table = LegendreTable::at_colatitude(n, theta);
    let values = coeffs.values();
    let mut acc = 0.0;
    for m in 0..=n {
        if m == 0 {
            for l in 0..=n {
                acc += values[flat_index(l, 0)] * table.get(l, 0);
            }
        } else {
            let (s, c) = (m as f64 * phi).sin_cos();
            for l in m..=n {
                let p = SQRT_2 * table.get(l, m);
                acc += p * (values[flat_index(l, m as i64)] * c + values[flat_index(l, -(m as i64))] * s);
            }
        }
    }
    acc
}

/// Synthesises the expansion at each `(theta, phi)` point.
pub fn inverse_sht(coeffs: &HarmonicCoefficients, points: &[(f64, f64)]) -> Vec<f64> {
    points
        .iter()
        .map(|&(theta, phi)| inverse_sht_at(coeffs, theta, phi))
        .collect()
}

/// Basis values `Y_{l,m}` at a fixed point set, for repeated synthesis of
/// many coefficient tables at the same points.
#[derive(Debug, Clone)]
pub struct SynthesisMatrix {
    band_limit: usize,
    point_count: usize,
    /// Row-major: point `p`, flat coefficient index `k`.
    basis: Vec<f64>,
}

impl SynthesisMatrix {
    pub fn new(band_limit: usize, points: &[(f64, f64)]) -> Self {
        let k = (band_limit + 1) * (band_limit + 1);
        let mut basis = vec![0.0; points.len() * k];
        for (p, &(theta, phi)) in points.iter().enumerate() {
            let row = &mut basis[p * k..(p + 1) * k];
            let table = LegendreTable::at_colatitude(band_limit, theta);
            for l in 0..=band_limit {
                row[flat_index(l, 0)] = table.get(l, 0);
                for m in 1..=l {
                    let (s, c) = (m as f64 * phi).sin_cos();
                    let pv = SQRT_2 * table.get(l, m);
                    row[flat_index(l, m as i64)] = pv * c;
                    row[flat_index(l, -(m as i64))] = pv * s;
                }
            }
        }
        Self {
            band_limit,
            point_count: points.len(),
            basis,
        }
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    /// Basis row for one point.
    pub fn row(&self, point: usize) -> &[f64] {
        let k = (self.band_limit + 1) * (self.band_limit + 1);
        &self.basis[point * k..(point + 1) * k]
    }

    pub fn synthesize(&self, coeffs: &HarmonicCoefficients) -> Result<Vec<f64>, ShError> {
        if coeffs.band_limit() != self.band_limit {
            return Err(ShError::BandLimitMismatch(self.band_limit, coeffs.band_limit()));
        }
        Ok((0..self.point_count)
            .map(|p| {
                self.row(p)
                    .iter()
                    .zip(coeffs.values())
                    .map(|(y, c)| y * c)
                    .sum()
            })
            .collect())
    }
}
