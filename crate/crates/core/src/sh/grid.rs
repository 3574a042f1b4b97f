use std::f64::consts::PI;

use super::BandLimit;

/// Gauss–Legendre colatitude rings times uniform azimuth nodes.
///
/// Node `(i, j)` sits at `(thetas[i], phis[j])` and its weight is stored at
/// `weights[i * n_phi + j]`. Samples on the grid use the same row-major
/// layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub weights: Vec<f64>,
    cos_thetas: Vec<f64>,
    sin_thetas: Vec<f64>,
    ring_weights: Vec<f64>,
}

/// Legendre `P_n(x)` and its derivative, by the Bonnet recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes in decreasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

impl SphericalGrid {
    /// Tensor grid with `n_theta` Gauss–Legendre rings and `n_phi` uniform
    /// azimuths starting at 0.
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        assert!(n_theta >= 1 && n_phi >= 1, "grid needs at least one node per axis");
        let (nodes, gl_weights) = gauss_legendre(n_theta);
        let thetas: Vec<f64> = nodes.iter().map(|&x| x.acos()).collect();
        let sin_thetas = nodes.iter().map(|&x| ((1.0 - x) * (1.0 + x)).sqrt()).collect();
        let dphi = 2.0 * PI / n_phi as f64;
        let phis = (0..n_phi).map(|j| j as f64 * dphi).collect();
        let ring_weights: Vec<f64> = gl_weights.iter().map(|w| w * dphi).collect();
        let weights = ring_weights
            .iter()
            .flat_map(|&w| std::iter::repeat_n(w, n_phi))
            .collect();
        Self {
            n_theta,
            n_phi,
            thetas,
            phis,
            weights,
            cos_thetas: nodes,
            sin_thetas,
            ring_weights,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n_theta * self.n_phi
    }

    /// Highest total degree of a band-limited integrand the grid integrates
    /// exactly.
    pub fn exact_degree(&self) -> usize {
        (2 * self.n_theta - 1).min(self.n_phi - 1)
    }

    /// Node angles in sample order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.thetas
            .iter()
            .flat_map(move |&t| self.phis.iter().map(move |&p| (t, p)))
    }

    pub(crate) fn cos_theta(&self, i: usize) -> f64 {
        self.cos_thetas[i]
    }

    pub(crate) fn sin_theta(&self, i: usize) -> f64 {
        self.sin_thetas[i]
    }

    pub(crate) fn ring_weight(&self, i: usize) -> f64 {
        self.ring_weights[i]
    }

    /// Quadrature of the sampled integrand.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        assert_eq!(samples.len(), self.node_count());
        samples.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }
}

/// Grid that integrates products of two degree-`N` harmonics exactly:
/// `N+1` colatitude rings and `2N+2` azimuths.
pub fn build_grid(band_limit: BandLimit) -> SphericalGrid {
    let n = band_limit.degree();
    SphericalGrid::new(n + 1, 2 * n + 2)
}
