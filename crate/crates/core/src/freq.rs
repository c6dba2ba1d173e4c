//! Dominant-frequency estimation for Ramsey-type traces.
//!
//! The plain estimator picks the largest discrete-Fourier bin. The refined
//! estimator applies a Gaussian window, then interpolates the peak position
//! from the log-magnitudes of the three bins around it; for a Gaussian-shaped
//! spectral line that three-point log-parabola is exact.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::TimeTrace;

pub const DEFAULT_SIGMA_RATIO: f64 = 0.2;
const MIN_POINTS: usize = 8;
/// Bins below this index are never taken as the principal peak.
const FIRST_PEAK_BIN: usize = 2;
/// Refinement passes that strip the fitted image and offset before interpolating.
const IMAGE_PASSES: usize = 2;
const FIT_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPeak {
    pub index: usize,
    pub delta_p: f64,
    pub f_est_hz: f64,
    pub delta_f_hz: f64,
    pub s_minus: f64,
    pub s_peak: f64,
    pub s_plus: f64,
}

/// Uniform step (s) and record length T = N·dt (s).
fn sampling(trace: &TimeTrace) -> Result<(f64, f64)> {
    if trace.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "frequency estimation needs ≥ {MIN_POINTS} samples, got {}",
            trace.len()
        )));
    }
    let dt = trace.uniform_step_us()? * 1e-6;
    Ok((dt, dt * trace.len() as f64))
}

/// Magnitude spectrum of `values` with the mean removed, each sample weighted
/// by `window` when given.
pub fn magnitude_spectrum(values: &[f64], window: Option<&[f64]>) -> Vec<f64> {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut buf: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(k, &v)| Complex64::new((v - mean) * window.map_or(1.0, |w| w[k]), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf.iter().map(|c| c.norm()).collect()
}

fn principal_peak(spectrum: &[f64], raw: &[f64]) -> Result<usize> {
    let n = spectrum.len();
    let last = n / 2 - 1;
    if last < FIRST_PEAK_BIN {
        return Err(Error::InsufficientData("spectrum too short for peak search".into()));
    }
    let (p, &peak) = spectrum[FIRST_PEAK_BIN..=last]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, v)| (k + FIRST_PEAK_BIN, v))
        .expect("non-empty search range");
    let scale: f64 = raw.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    if peak <= 1e-12 * scale {
        return Err(Error::Degenerate("no non-DC spectral peak above the noise floor".into()));
    }
    Ok(p)
}

/// Frequency (Hz) of the largest non-DC bin; resolution Δf/2 with Δf = 1/T.
pub fn naive_peak_frequency(trace: &TimeTrace) -> Result<f64> {
    let (_, t) = sampling(trace)?;
    let spectrum = magnitude_spectrum(&trace.signal, None);
    let p = principal_peak(&spectrum, &trace.signal)?;
    Ok(p as f64 / t)
}

/// Gaussian window of standard deviation `sigma_ratio`·T centred mid-record.
pub fn gaussian_window(n: usize, sigma_ratio: f64) -> Vec<f64> {
    let sigma = sigma_ratio * n as f64;
    let centre = 0.5 * (n as f64 - 1.0);
    (0..n)
        .map(|k| {
            let u = (k as f64 - centre) / sigma;
            (-0.5 * u * u).exp()
        })
        .collect()
}

/// Fractional bin offset from three neighbouring magnitudes.
pub fn interpolate_offset(s_minus: f64, s_peak: f64, s_plus: f64) -> Result<f64> {
    if !(s_minus > 0.0 && s_plus > 0.0) {
        return Err(Error::Degenerate("side-bin magnitude is zero".into()));
    }
    let denom = 2.0 * (s_peak * s_peak / (s_minus * s_plus)).ln();
    if !(denom.abs() > 1e-300) || !denom.is_finite() {
        return Err(Error::Degenerate("log-parabola denominator vanishes".into()));
    }
    Ok((s_plus / s_minus).ln() / denom)
}

pub fn gaussian_interp_frequency(trace: &TimeTrace, sigma_ratio: f64) -> Result<SpectrumPeak> {
    if !(sigma_ratio > 0.0) {
        return Err(Error::InvalidParameter {
            field: "sigma_ratio".into(),
            reason: "must be > 0".into(),
        });
    }
    let (_, t) = sampling(trace)?;
    let n = trace.len();
    let window = gaussian_window(n, sigma_ratio);
    // Remove the windowed mean so the residual offset carries no DC weight.
    let wsum: f64 = window.iter().sum();
    let wmean = trace.signal.iter().zip(&window).map(|(v, w)| v * w).sum::<f64>() / wsum;
    let centred: Vec<f64> = trace.signal.iter().map(|v| v - wmean).collect();
    let mut buf: Vec<Complex64> = centred
        .iter()
        .zip(&window)
        .map(|(v, w)| Complex64::new(v * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let spectrum: Vec<f64> = buf.iter().map(|c| c.norm()).collect();
    let mut p = principal_peak(&spectrum, &trace.signal)?;
    let (mut s_minus, mut s_peak, mut s_plus) = (spectrum[p - 1], spectrum[p], spectrum[p + 1]);
    let mut delta_p = interpolate_offset(s_minus, s_peak, s_plus)?;
    for _ in 0..IMAGE_PASSES {
        let Some(bins) = image_corrected_bins(&trace.signal, &window, p as f64 + delta_p, p) else { break };
        let c = (1..=3).max_by(|a, b| bins[*a].total_cmp(&bins[*b])).expect("three bins");
        let q = p + c - 2;
        if q < FIRST_PEAK_BIN || q > n / 2 - 1 {
            break;
        }
        let Ok(dp) = interpolate_offset(bins[c - 1], bins[c], bins[c + 1]) else { break };
        (p, delta_p) = (q, dp);
        (s_minus, s_peak, s_plus) = (bins[c - 1], bins[c], bins[c + 1]);
    }
    let delta_f_hz = 1.0 / t;
    Ok(SpectrumPeak {
        index: p,
        delta_p,
        f_est_hz: delta_f_hz * (p as f64 + delta_p),
        delta_f_hz,
        s_minus,
        s_peak,
        s_plus,
    })
}

/// Windowed-spectrum magnitudes at bins p−2..=p+2 after removing the DC and
/// negative-frequency parts of a sinusoid fitted near `f_bins`. Their leakage
/// through the truncated window's sidelobes otherwise biases the three-point
/// interpolation of a real trace. The fit frequency gets a few weighted
/// Gauss-Newton steps so the subtracted image sits where the true one does.
fn image_corrected_bins(x: &[f64], window: &[f64], f_bins: f64, p: usize) -> Option<[f64; 5]> {
    let n = x.len();
    let scale = 2.0 * PI / n as f64;
    let (mut f, mut c, mut u, mut v) = (f_bins, 0.0, 0.0, 0.0);
    for step in 0..=FIT_STEPS {
        let mut m = Matrix4::<f64>::zeros();
        let mut b = Vector4::<f64>::zeros();
        for k in 0..n {
            let (sn, cs) = (scale * f * k as f64).sin_cos();
            let slope = if step == 0 { 0.0 } else { (v * cs - u * sn) * scale * k as f64 };
            let basis = Vector4::new(1.0, cs, sn, slope);
            m += window[k] * basis * basis.transpose();
            b += window[k] * x[k] * basis;
        }
        if step == 0 {
            m[(3, 3)] = 1.0;
        }
        let sol = m.lu().solve(&b)?;
        (c, u, v) = (sol[0], sol[1], sol[2]);
        if sol[3].abs() > 0.5 {
            break;
        }
        f += sol[3];
    }
    let image = Complex64::new(0.5 * u, 0.5 * v);
    let kept: Vec<Complex64> = (0..n)
        .map(|k| window[k] * (Complex64::new(x[k] - c, 0.0) - image * Complex64::from_polar(1.0, -scale * f * k as f64)))
        .collect();
    let twiddle: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, -scale * k as f64)).collect();
    let mut out = [0.0; 5];
    for (slot, bin) in out.iter_mut().zip(p - 2..=p + 2) {
        *slot = kept.iter().enumerate().map(|(k, v)| v * twiddle[(bin * k) % n]).sum::<Complex64>().norm();
    }
    Some(out)
}
