//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use lvhw::closed_form::bs_call;
use lvhw::local_vol::SZParams;
use lvhw::products::PolicySpec;
use lvhw::{HWParams, ImpliedVolSurface, MortalityTable, YieldCurve};

pub const US_SMILE: [(f64, f64); 7] = [
    (80.0, 0.275),
    (90.0, 0.266),
    (95.0, 0.262),
    (100.0, 0.258),
    (105.0, 0.254),
    (110.0, 0.25),
    (120.0, 0.243),
];

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn hw() -> HWParams {
    HWParams::new(0.05, 0.01, 0.1464).unwrap()
}

pub fn flat_curve() -> YieldCurve {
    YieldCurve::flat(0.04, 80.0).unwrap()
}

pub fn desk_curve() -> YieldCurve {
    YieldCurve::from_csv(data_dir().join("curve_flat4.csv")).unwrap()
}

pub fn desk_table() -> MortalityTable {
    MortalityTable::from_csv(data_dir().join("mortality_synthetic.csv")).unwrap()
}

pub fn us_smile(slope: f64) -> ImpliedVolSurface {
    ImpliedVolSurface::new(10.0, &US_SMILE, slope).unwrap()
}

pub fn policy(g: f64) -> PolicySpec {
    PolicySpec {
        age: 55,
        maturity: 10,
        g,
        r_g: 0.0,
        s0: 100.0,
        q: 0.0,
    }
}

/// Schöbel–Zhu parameters whose 10y at-the-money vol sits near 25.8%.
pub fn desk_sz() -> SZParams {
    SZParams::new(0.5, 0.229, 0.1, 0.229, -0.5, 0.0).unwrap()
}

/// Black implied vol from a discounted call price by bisection (independent of the crate's
/// Brent-based inversion).
pub fn implied_vol_bisect(price: f64, spot: f64, strike: f64, t: f64, df: f64) -> f64 {
    let (mut lo, mut hi) = (1e-4, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bs_call(spot, strike, t, df, 0.0, mid).price > price {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves the small symmetric system `a·β = c` by Gaussian elimination.
pub fn solve(mut a: Vec<Vec<f64>>, mut c: Vec<f64>) -> Vec<f64> {
    let n = c.len();
    for i in 0..n {
        for j in i + 1..n {
            let f = a[j][i] / a[i][i];
            for k in i..n {
                a[j][k] -= f * a[i][k];
            }
            c[j] -= f * c[i];
        }
    }
    let mut beta = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * beta[k]).sum();
        beta[i] = (c[i] - s) / a[i][i];
    }
    beta
}

/// Mean and standard error of `y` after regressing out controls with known means.
pub fn regression_estimate(y: &[f64], controls: &[Vec<f64>], means: &[f64]) -> (f64, f64) {
    let n = y.len();
    let m = controls.len();
    let avg = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let mx: Vec<f64> = controls.iter().map(|x| avg(x)).collect();
    let my = avg(y);
    let a: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| (0..n).map(|p| (controls[i][p] - mx[i]) * (controls[j][p] - mx[j])).sum())
                .collect()
        })
        .collect();
    let c: Vec<f64> = (0..m)
        .map(|i| (0..n).map(|p| (controls[i][p] - mx[i]) * (y[p] - my)).sum())
        .collect();
    let beta = solve(a, c);
    let z: Vec<f64> = (0..n)
        .map(|p| y[p] - (0..m).map(|i| beta[i] * (controls[i][p] - means[i])).sum::<f64>())
        .collect();
    let mean = avg(&z);
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Probability that x stays above `x0 + b_rel` over `dt`, for
/// dx = (−αx + ρ σ_r σ) dt + σ_r dW started at x0 = 0, monitored on `substeps` sub-intervals
/// with a Brownian-bridge crossing test inside each one, in the limit of infinitely many
/// paths.
///
/// The sub-stepped transition density is carried on a fine grid: exact OU Gaussian kernel
/// per sub-step times the bridge survival factor 1 − exp(−2(y−B)(z−B)/(σ_r² h)).
pub fn substep_survival(params: &HWParams, sigma: f64, b_rel: f64, dt: f64, substeps: usize) -> f64 {
    let (a, sr) = (params.alpha, params.sigma_r);
    let h = dt / substeps as f64;
    let decay = (-a * h).exp();
    let drift = params.rho_sr * sr * sigma / a * (1.0 - decay);
    let sd = sr * ((1.0 - decay * decay) / (2.0 * a)).sqrt();
    let bridge_var = sr * sr * h;
    let total_sd = sr * dt.sqrt();
    let dx = sd / 4.0;
    let top = 8.0 * total_sd + (params.rho_sr * sr * sigma * dt).abs();
    let n = ((top - b_rel) / dx).ceil() as usize + 1;
    let grid: Vec<f64> = (0..n).map(|i| b_rel + i as f64 * dx).collect();
    let gauss = |z: f64, m: f64| (-(z - m).powi(2) / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
    let bridge = |y: f64, z: f64| {
        if y <= b_rel || z <= b_rel {
            0.0
        } else {
            1.0 - (-2.0 * (y - b_rel) * (z - b_rel) / bridge_var).exp()
        }
    };
    // First sub-step from the point mass at 0.
    let mut p: Vec<f64> = grid.iter().map(|&z| gauss(z, drift) * bridge(0.0, z)).collect();
    // The grid is fixed, so each row of the transition matrix is computed once.
    let reach = (9.0 * sd / dx).ceil() as isize;
    let rows: Vec<(usize, Vec<f64>)> = grid
        .iter()
        .map(|&y| {
            let m = y * decay + drift;
            let centre = ((m - b_rel) / dx).round() as isize;
            let lo = (centre - reach).max(1);
            let hi = (centre + reach).min(n as isize - 1);
            let w = (lo..=hi)
                .map(|j| {
                    let z = grid[j as usize];
                    dx * gauss(z, m) * bridge(y, z)
                })
                .collect();
            (lo.clamp(0, n as isize) as usize, w)
        })
        .collect();
    let mut next = vec![0.0; n];
    for _ in 1..substeps {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (py, (lo, w)) in p.iter().zip(&rows) {
            if *py == 0.0 {
                continue;
            }
            for (dst, wk) in next[*lo..*lo + w.len()].iter_mut().zip(w) {
                *dst += py * wk;
            }
        }
        std::mem::swap(&mut p, &mut next);
    }
    // Trapezoid over the grid; p vanishes at the barrier end.
    dx * (p.iter().sum::<f64>() - 0.5 * p[n - 1])
}
