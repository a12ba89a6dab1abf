//! Single-frequency amplitude estimation and calibrated Gaussian noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fourier component of a real series at one frequency, scaled so that
/// `A sin(2 pi f t)` has magnitude `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub frequency: f64,
    pub re: f64,
    pub im: f64,
    pub magnitude: f64,
}

impl Spectrum {
    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Number of trailing samples spanning the largest whole number of periods
/// of `f`, or `None` when the series is shorter than one period.
pub fn whole_period_samples(len: usize, dt: f64, f: f64) -> Option<usize> {
    let per_period = 1.0 / (f * dt);
    let periods = (len as f64 / per_period + 1e-9).floor();
    if periods < 1.0 {
        return None;
    }
    Some(((periods * per_period).round() as usize).min(len))
}

/// Single-bin DFT of `series` (sampled every `dt`) at frequency `f`.
///
/// The window is trimmed from the front to a whole number of periods and the
/// phase is referenced to the first retained sample.
pub fn amplitude_at(series: &[f64], dt: f64, f: f64) -> Result<Spectrum> {
    if !(f > 0.0 && f.is_finite()) || !(dt > 0.0) {
        return Err(Error::invalid(format!("need f > 0 and dt > 0, got f = {f}, dt = {dt}")));
    }
    let n = whole_period_samples(series.len(), dt, f).ok_or(Error::WindowTooShort {
        samples: series.len(),
        frequency: f,
    })?;
    let window = &series[series.len() - n..];
    let w = 2.0 * PI * f * dt;
    let (mut re, mut im) = (0.0, 0.0);
    for (k, &x) in window.iter().enumerate() {
        let (s, c) = (w * k as f64).sin_cos();
        re += x * c;
        im -= x * s;
    }
    let scale = 2.0 / n as f64;
    let (re, im) = (re * scale, im * scale);
    Ok(Spectrum {
        frequency: f,
        re,
        im,
        magnitude: re.hypot(im),
    })
}

/// One-sided amplitude spectrum `(frequency, magnitude)` of the whole series
/// via FFT, with the same sinusoid-to-amplitude scaling as [`amplitude_at`].
pub fn full_spectrum(series: &[f64], dt: f64) -> Vec<(f64, f64)> {
    let n = series.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex64> = series.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * dt);
    (0..=n / 2)
        .map(|k| {
            let scale = if k == 0 || 2 * k == n { 1.0 } else { 2.0 } / n as f64;
            (k as f64 * df, buf[k].norm() * scale)
        })
        .collect()
}

pub fn mean_power(series: &[f64]) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    series.iter().map(|x| x * x).sum::<f64>() / series.len() as f64
}

/// Adds zero-mean white Gaussian noise with power `P_signal / 10^(snr/10)`.
/// `snr_db = +inf` returns the series unchanged.
pub fn add_awgn<R: Rng + ?Sized>(series: &[f64], snr_db: f64, rng: &mut R) -> Result<Vec<f64>> {
    if snr_db == f64::INFINITY {
        return Ok(series.to_vec());
    }
    if snr_db.is_nan() {
        return Err(Error::invalid("SNR is NaN"));
    }
    let power = mean_power(series);
    if power == 0.0 {
        return Err(Error::ZeroPowerSignal);
    }
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    Ok(series
        .iter()
        .map(|&x| {
            let z: f64 = rng.sample(StandardNormal);
            x + sigma * z
        })
        .collect())
}

/// `10 log10(P_clean / P_noise)`; identical series give `+inf`.
pub fn measured_snr(clean: &[f64], noisy: &[f64]) -> Result<f64> {
    if clean.len() != noisy.len() {
        return Err(Error::LengthMismatch(clean.len(), noisy.len()));
    }
    let diff: Vec<f64> = clean.iter().zip(noisy).map(|(a, b)| b - a).collect();
    let p_noise = mean_power(&diff);
    if p_noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (mean_power(clean) / p_noise).log10())
}
