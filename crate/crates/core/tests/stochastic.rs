//! Statistical properties of the SDE engine and the shape processes.

use rayon::prelude::*;
use shape_diffusion::diffusion::{
    decompose_sphere, ito_shape_process, q_wiener_shape_process, ScaleMode, ShapeCoefficients,
};
use shape_diffusion::rng::SeedSpec;
use shape_diffusion::sde::{
    brownian_increments, euler_maruyama, euler_maruyama_path, fbm_paths, ou_moments, Diffusion, Drift, ProcessSpec,
    TimeGrid,
};
use shape_diffusion::sh::BandLimit;
use shape_diffusion::spectra::{hnu_convergence_margin, make_spectrum, sobolev_norm, DecayClass, SobolevOrder, SpectrumKind};

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn ou_moments_match_closed_form() {
    let spec = ProcessSpec::ornstein_uhlenbeck(1.0, 0.5, 0.3);
    let n = 10_000;
    let grid = TimeGrid::from_horizon(1.0, 400).unwrap();
    let paths = euler_maruyama(&spec, &vec![2.0; n], &grid, SeedSpec::new(17)).unwrap();
    for (t, k) in [(0.25, 100), (0.5, 200), (1.0, 400)] {
        let (mean, var) = mean_var(&paths.column(k));
        let (m, v) = ou_moments(1.0, 0.5, 0.3, 2.0, t).unwrap();
        let se_mean = (var / n as f64).sqrt();
        let se_var = var * (2.0 / (n - 1) as f64).sqrt();
        assert!((mean - m).abs() < 3.0 * se_mean, "t={t}: mean {mean} vs {m}");
        assert!((var - v).abs() < 3.0 * se_var, "t={t}: var {var} vs {v}");
    }
}

/// `E sup_t |X_t|²` stays finite and grows no faster than `|x0|²`.
#[test]
fn second_moment_of_supremum_grows_at_most_quadratically() {
    let specs = [
        ProcessSpec::brownian(),
        ProcessSpec::ornstein_uhlenbeck(1.0, 0.0, 0.5),
        ProcessSpec::new(Drift::Constant { c: 0.3 }, Diffusion::Constant { sigma: 0.2 }),
        ProcessSpec::new(Drift::Linear { a: 0.5 }, Diffusion::Linear { s: 0.3 }),
    ];
    let grid = TimeGrid::from_horizon(1.0, 100).unwrap();
    let n = 2000;
    // Common random numbers across starting points.
    let dw = brownian_increments(&grid, n, SeedSpec::new(4));
    for spec in &specs {
        let moments: Vec<f64> = [0.0, 1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&x0| {
                dw.par_iter()
                    .enumerate()
                    .map(|(p, inc)| {
                        let path = euler_maruyama_path(spec, x0, &grid, inc, p).unwrap();
                        path.iter().fold(0.0f64, |a, x| a.max(x * x))
                    })
                    .sum::<f64>()
                    / n as f64
            })
            .collect();
        assert!(moments.iter().all(|m| m.is_finite()), "{spec:?}: {moments:?}");
        for w in moments[1..].windows(2) {
            assert!(w[1] / w[0] <= 4.4, "{spec:?}: {moments:?}");
        }
    }
}

fn strong_rate(spec: &ProcessSpec, x0: f64) -> f64 {
    let ref_log2 = 14;
    let levels: Vec<u32> = (6..=12).collect();
    let fine = TimeGrid::from_horizon(1.0, 1 << ref_log2).unwrap();
    let paths = 1000;
    let dw = brownian_increments(&fine, paths, SeedSpec::new(8));
    let errors: Vec<Vec<f64>> = dw
        .par_iter()
        .enumerate()
        .map(|(p, inc)| {
            let reference = *euler_maruyama_path(spec, x0, &fine, inc, p).unwrap().last().unwrap();
            levels
                .iter()
                .map(|&lk| {
                    let grid = TimeGrid::from_horizon(1.0, 1 << lk).unwrap();
                    let coarse: Vec<f64> = inc.chunks(1 << (ref_log2 - lk)).map(|c| c.iter().sum()).collect();
                    (euler_maruyama_path(spec, x0, &grid, &coarse, p).unwrap().last().unwrap() - reference).abs()
                })
                .collect()
        })
        .collect();
    let x: Vec<f64> = levels.iter().map(|&k| -(k as f64) * 2f64.ln()).collect();
    let y: Vec<f64> = (0..levels.len())
        .map(|i| (errors.iter().map(|e| e[i]).sum::<f64>() / paths as f64).ln())
        .collect();
    let (mx, my) = (x.iter().sum::<f64>() / x.len() as f64, y.iter().sum::<f64>() / y.len() as f64);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Euler–Maruyama has strong order ½ under multiplicative noise and order 1
/// when the noise is additive.
#[test]
fn strong_order_depends_on_the_noise() {
    let gbm = ProcessSpec::new(Drift::Linear { a: 0.5 }, Diffusion::Linear { s: 1.0 });
    let rate = strong_rate(&gbm, 1.0);
    assert!((rate - 0.5).abs() < 0.15, "multiplicative noise rate {rate}");

    let ou = ProcessSpec::ornstein_uhlenbeck(1.0, 0.0, 0.1);
    let rate = strong_rate(&ou, 1.0);
    assert!((rate - 1.0).abs() < 0.15, "additive noise rate {rate}");
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let n = 8;
    let spectrum = make_spectrum(SpectrumKind::InvQuadratic, n).unwrap();
    let grid = TimeGrid::from_horizon(1.0, 32).unwrap();
    let u0 = decompose_sphere(BandLimit(n)).unwrap();
    let ou = ProcessSpec::ornstein_uhlenbeck(1.0, 0.0, 0.1);
    let run = || {
        (
            q_wiener_shape_process(&u0, &spectrum, &grid, SeedSpec::new(5), ScaleMode::Sqrt).unwrap(),
            ito_shape_process(&u0, &spectrum, &ou, &grid, SeedSpec::new(5), ScaleMode::Sqrt).unwrap(),
            fbm_paths(0.3, &grid, 64, SeedSpec::new(5)).unwrap(),
        )
    };
    let pool = |t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
    let single = pool(1).install(run);
    let many = pool(4).install(run);
    assert_eq!(single, many);
}

/// One-sided Mann–Kendall statistic for an upward trend.
fn mann_kendall_z(xs: &[f64]) -> f64 {
    let n = xs.len();
    let s: i64 = (0..n)
        .into_par_iter()
        .map(|i| {
            xs[i + 1..]
                .iter()
                .map(|&x| (x - xs[i]).partial_cmp(&0.0).map_or(0, |o| o as i64))
                .sum::<i64>()
        })
        .sum();
    let nf = n as f64;
    let var = nf * (nf - 1.0) * (2.0 * nf + 5.0) / 18.0;
    (s - s.signum()) as f64 / var.sqrt()
}

/// With a spectrum whose `H²` margin converges, the `H²` norm of a
/// mean-reverting shape process shows no upward trend over a long run.
#[test]
fn sobolev_norm_stays_bounded_over_long_runs() {
    let n = 12;
    let spectrum = make_spectrum(SpectrumKind::Bessel { nu: SobolevOrder::new(4.0).unwrap() }, n).unwrap();
    let h2 = SobolevOrder::new(2.0).unwrap();
    assert_eq!(hnu_convergence_margin(&spectrum, h2).decay, DecayClass::Decaying);

    // θ·dt = 0.9 keeps consecutive frames only weakly correlated.
    let grid = TimeGrid::from_horizon(900.0, 1000).unwrap();
    let ou = ProcessSpec::ornstein_uhlenbeck(1.0, 0.0, 1.0);
    let u0 = decompose_sphere(BandLimit(n)).unwrap();
    let traj = ito_shape_process(&u0, &spectrum, &ou, &grid, SeedSpec::new(10), ScaleMode::Sqrt).unwrap();
    let norms: Vec<f64> = traj
        .frames()
        .map(|f| f.channels().iter().map(|c| sobolev_norm(c, h2).powi(2)).sum::<f64>().sqrt())
        .collect();
    let z = mann_kendall_z(&norms[1..]);
    assert!(z < 2.326, "upward trend in H² norm, z = {z}");
    assert!(norms.iter().all(|v| v.is_finite()));
}

/// `E‖noise‖²` of one channel under the identity spectrum is `t (N+1)²`.
#[test]
fn identity_noise_energy_scales_with_truncation() {
    let t = 0.5;
    let grid = TimeGrid::from_horizon(t, 1).unwrap();
    let runs = 2000u64;
    let mut previous = 0.0;
    for n in [2usize, 4, 6, 8] {
        let spectrum = make_spectrum(SpectrumKind::Identity, n).unwrap();
        let zero = ShapeCoefficients::zeros(n);
        let energies: Vec<f64> = (0..runs)
            .into_par_iter()
            .map(|r| {
                let traj = q_wiener_shape_process(&zero, &spectrum, &grid, SeedSpec::new(r), ScaleMode::Sqrt).unwrap();
                traj.perturbation(1).channel(1).values().iter().map(|v| v * v).sum::<f64>()
            })
            .collect();
        let (mean, var) = mean_var(&energies);
        let expected = t * ((n + 1) * (n + 1)) as f64;
        assert!((mean - expected).abs() < 3.0 * (var / runs as f64).sqrt(), "N={n}: {mean} vs {expected}");
        assert!(mean > previous);
        previous = mean;
    }
}
