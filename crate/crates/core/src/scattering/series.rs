//! Taylor coefficients of `t(z)` and the total transmission probability.
//!
//! `t(z) = sum_n c_n z^n` with `|c_n|^2` the probability of first reaching
//! the exit tail at step `n`. The coefficients come from sampling `t` on a
//! circle of radius `rho` and taking a discrete Fourier transform:
//! `c_n = (1/N) sum_k t(rho w^k) w^{-kn} / rho^n`, `w = e^{2 pi i / N}`.
//! Aliasing adds `c_{n + mN} rho^{mN}` for `m >= 1`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{Direction, ScatteringSystem};
use crate::error::{Error, Result};

/// Largest sampled `|t|` accepted before reporting a nearby pole.
pub const POLE_THRESHOLD: f64 = 1e6;
/// Upper bound for [`transmission_series_converged`].
pub const MAX_SAMPLE_COUNT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionSeries {
    /// `c_0 ..= c_{n_max}`.
    pub coefficients: Vec<Complex64>,
    pub radius: f64,
    pub sample_count: usize,
    pub max_sample_abs: f64,
    /// Largest raw Fourier coefficient in the upper half of the spectrum.
    /// Bounds the aliasing error of every returned coefficient when `radius = 1`.
    pub aliasing_estimate: f64,
}

impl TransmissionSeries {
    /// First-arrival probabilities `|c_n|^2`.
    pub fn q(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn n_max(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }
}

fn check_samples(samples: usize, n_max: usize) -> Result<()> {
    let min = 1024.max(16 * n_max);
    if !samples.is_power_of_two() || samples < min {
        return Err(Error::Sampling(format!(
            "sample count must be a power of two and at least {min}, got {samples}"
        )));
    }
    Ok(())
}

/// Taylor coefficients `c_0..=c_{n_max}` from `samples` points on the circle of radius `radius`.
pub fn transmission_series(
    system: &ScatteringSystem,
    n_max: usize,
    radius: f64,
    samples: usize,
) -> Result<TransmissionSeries> {
    check_samples(samples, n_max)?;
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::Sampling(format!("radius must lie in (0, 1], got {radius}")));
    }
    if radius < 1.0 {
        log::warn!(
            "sampling radius {radius} amplifies coefficient errors by up to {:e}",
            radius.powi(-(n_max as i32))
        );
    }

    let mut values: Vec<Complex64> = system
        .sweep(samples, radius, Direction::Left)?
        .into_iter()
        .map(|s| s.t)
        .collect();
    let max_sample_abs = values.iter().fold(0.0f64, |m, t| m.max(t.norm()));
    if max_sample_abs.is_nan() || max_sample_abs > POLE_THRESHOLD {
        return Err(Error::PoleNearCircle {
            max_abs: max_sample_abs,
            radius,
        });
    }

    FftPlanner::new().plan_fft_forward(samples).process(&mut values);
    let scale = 1.0 / samples as f64;
    let coefficients = (0..=n_max).map(|n| values[n] * scale / radius.powi(n as i32)).collect();
    let aliasing_estimate = values[samples / 2..]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.norm() * scale));

    Ok(TransmissionSeries {
        coefficients,
        radius,
        sample_count: samples,
        max_sample_abs,
        aliasing_estimate,
    })
}

/// Doubles the sample count, starting from the minimum, until the aliasing
/// estimate drops to `tolerance` or [`MAX_SAMPLE_COUNT`] is reached.
pub fn transmission_series_converged(
    system: &ScatteringSystem,
    n_max: usize,
    radius: f64,
    tolerance: f64,
) -> Result<TransmissionSeries> {
    let mut samples = 1024.max(16 * n_max).next_power_of_two();
    loop {
        let series = transmission_series(system, n_max, radius, samples)?;
        if series.aliasing_estimate <= tolerance || samples >= MAX_SAMPLE_COUNT {
            return Ok(series);
        }
        samples *= 2;
    }
}

/// Mean of `|t(theta_k)|^2` over `samples` equispaced phases.
pub fn p_out_spectral(system: &ScatteringSystem, samples: usize) -> Result<f64> {
    if samples < 1024 {
        return Err(Error::Sampling(format!("need at least 1024 samples, got {samples}")));
    }
    let solutions = system.sweep(samples, 1.0, Direction::Left)?;
    Ok(solutions.iter().map(|s| s.t.norm_sqr()).sum::<f64>() / samples as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTotal {
    /// `sum_{n <= n_max} |c_n|^2`.
    pub total: f64,
    /// `|c_{n_max}|^2`, a convergence diagnostic.
    pub tail_bound: f64,
}

pub fn p_out_series(series: &TransmissionSeries) -> SeriesTotal {
    let q = series.q();
    SeriesTotal {
        total: q.iter().sum(),
        tail_bound: q.last().copied().unwrap_or(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn diamond_coefficient(n: usize) -> f64 {
        // 8 z^3 / (9 - z^4) = sum_k (8/9) 9^{-k} z^{4k+3}
        if n % 4 == 3 {
            8.0 / 9.0 * 9f64.powi(-((n / 4) as i32))
        } else {
            0.0
        }
    }

    #[test]
    fn diamond_coefficients() {
        let sys = ScatteringSystem::new(&fixtures::diamond());
        let s = transmission_series(&sys, 10, 1.0, 1024).unwrap();
        for (n, c) in s.coefficients.iter().enumerate() {
            assert!(
                (c - Complex64::new(diamond_coefficient(n), 0.0)).norm() < 1e-10,
                "c_{n} = {c}"
            );
        }
        assert!((s.coefficients[3].re - 8.0 / 9.0).abs() < 1e-12);
        assert!((s.coefficients[7].re - 8.0 / 81.0).abs() < 1e-12);
    }

    #[test]
    fn smaller_radius_gives_same_coefficients() {
        let sys = ScatteringSystem::new(&fixtures::diamond());
        let s = transmission_series(&sys, 12, 0.8, 1024).unwrap();
        for (n, c) in s.coefficients.iter().enumerate() {
            assert!((c.re - diamond_coefficient(n)).abs() < 1e-9);
        }
    }

    #[test]
    fn sample_count_and_radius_validated() {
        let sys = ScatteringSystem::new(&fixtures::diamond());
        assert!(transmission_series(&sys, 10, 1.0, 1000).is_err());
        assert!(transmission_series(&sys, 10, 1.0, 512).is_err());
        assert!(transmission_series(&sys, 100, 1.0, 1024).is_err());
        assert!(transmission_series(&sys, 10, 0.0, 1024).is_err());
        assert!(transmission_series(&sys, 10, 1.5, 1024).is_err());
        assert!(p_out_spectral(&sys, 512).is_err());
    }

    #[test]
    fn p_out_routes_on_diamond() {
        let sys = ScatteringSystem::new(&fixtures::diamond());
        assert!((p_out_spectral(&sys, 1024).unwrap() - 0.8).abs() < 1e-12);
        let s = transmission_series(&sys, 63, 1.0, 1024).unwrap();
        assert!((p_out_series(&s).total - 0.8).abs() < 1e-12);
        let s = transmission_series(&sys, 3, 1.0, 1024).unwrap();
        assert!((p_out_series(&s).total - 64.0 / 81.0).abs() < 1e-12);
    }

    #[test]
    fn p_out_limits() {
        let line = ScatteringSystem::new(&fixtures::line(2));
        assert!((p_out_spectral(&line, 1024).unwrap() - 1.0).abs() < 1e-12);
        let blocked = ScatteringSystem::new(&fixtures::reflecting_diamond());
        assert!(p_out_spectral(&blocked, 1024).unwrap().abs() < 1e-12);
        let empty = TransmissionSeries {
            coefficients: vec![Complex64::new(0.0, 0.0); 5],
            radius: 1.0,
            sample_count: 1024,
            max_sample_abs: 0.0,
            aliasing_estimate: 0.0,
        };
        assert_eq!(p_out_series(&empty).total, 0.0);
    }
}
