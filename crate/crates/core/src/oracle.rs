//! Brute-force reference computations.
//!
//! Each function here solves a problem the slow, obvious way so that the fast
//! estimators elsewhere in the crate can be checked against it: dense
//! diagonalization, direct quadrature, zero-padded transforms, exhaustive Pauli
//! enumeration, explicit 2×2 unitary products and fixed-step ODE integration.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Dispersive shift (kHz) from the dressed spectrum of a three-level transmon
/// coupled to a ten-level cavity in the rotating-wave approximation.
///
/// χ is half the cavity-frequency difference between qubit states 1 and 0.
pub fn chi_from_diagonalization(g_mhz: f64, delta_ghz: f64, e_c_mhz: f64) -> f64 {
    const QUBIT_LEVELS: usize = 3;
    const CAVITY_LEVELS: usize = 10;
    let dim = QUBIT_LEVELS * CAVITY_LEVELS;
    let omega_r = 8000.0;
    let omega_q = omega_r + delta_ghz * 1e3;
    let alpha = -e_c_mhz;
    let idx = |q: usize, n: usize| q * CAVITY_LEVELS + n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for q in 0..QUBIT_LEVELS {
        for n in 0..CAVITY_LEVELS {
            let qf = q as f64;
            h[(idx(q, n), idx(q, n))] = n as f64 * omega_r + qf * omega_q + 0.5 * alpha * qf * (qf - 1.0);
        }
    }
    // g (b†a + a†b) with b the transmon lowering operator.
    for q in 0..QUBIT_LEVELS - 1 {
        for n in 1..CAVITY_LEVELS {
            let v = g_mhz * ((q + 1) as f64).sqrt() * (n as f64).sqrt();
            h[(idx(q + 1, n - 1), idx(q, n))] = v;
            h[(idx(q, n), idx(q + 1, n - 1))] = v;
        }
    }
    let eig = SymmetricEigen::new(h);
    let dressed = |q: usize, n: usize| {
        let k = idx(q, n);
        let col = (0..dim)
            .max_by(|&a, &b| eig.eigenvectors[(k, a)].abs().total_cmp(&eig.eigenvectors[(k, b)].abs()))
            .unwrap();
        eig.eigenvalues[col]
    };
    let cavity_g = dressed(0, 1) - dressed(0, 0);
    let cavity_e = dressed(1, 1) - dressed(1, 0);
    0.5 * (cavity_e - cavity_g) * 1e3
}

/// K₀(x) by trapezoid quadrature of ∫₀^∞ exp(−x cosh t) dt.
///
/// The integrand is analytic and doubly-exponentially decaying, so the
/// trapezoid rule converges geometrically in the step size.
pub fn bessel_k0_quadrature(x: f64) -> f64 {
    let h = 1e-3;
    // exp(−x cosh t) < 1e-300 once x cosh t > 690.
    let t_max = (700.0 / x).acosh().max(1.0);
    let n = (t_max / h).ceil() as usize;
    let mut sum = 0.5 * (-x).exp();
    for k in 1..=n {
        sum += (-x * (k as f64 * h).cosh()).exp();
    }
    sum * h
}

/// Location (Hz) of the maximum of the windowed discrete-time Fourier
/// magnitude, found on a 64× zero-padded grid and refined by golden-section
/// search on the exact transform.
pub fn zero_padded_peak(values: &[f64], dt_s: f64, window: &[f64]) -> f64 {
    let n = values.len();
    let wsum: f64 = window.iter().sum();
    let wmean = values.iter().zip(window).map(|(v, w)| v * w).sum::<f64>() / wsum;
    let x: Vec<f64> = values.iter().zip(window).map(|(v, w)| (v - wmean) * w).collect();
    let pad = 64 * n;
    let mut buf: Vec<Complex64> = (0..pad)
        .map(|k| Complex64::new(if k < n { x[k] } else { 0.0 }, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(pad).process(&mut buf);
    let first = 2 * 64;
    let best = (first..pad / 2)
        .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
        .unwrap();
    let df = 1.0 / (pad as f64 * dt_s);
    let dtft = |f: f64| -> f64 {
        x.iter()
            .enumerate()
            .map(|(k, &v)| Complex64::from_polar(v, -2.0 * PI * f * k as f64 * dt_s))
            .sum::<Complex64>()
            .norm()
    };
    let (mut lo, mut hi) = ((best as f64 - 1.0) * df, (best as f64 + 1.0) * df);
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let a = hi - golden * (hi - lo);
        let b = lo + golden * (hi - lo);
        if dtft(a) < dtft(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    0.5 * (lo + hi)
}

/// Upper Gaussian tail Q(x) = P(Z > x).
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Assignment fidelity of two equal-width Gaussian blobs thresholded at the
/// midpoint, 1 − 2Q(sep/2σ).
pub fn gaussian_assignment_fidelity(separation_over_sigma: f64) -> f64 {
    1.0 - 2.0 * gaussian_tail(0.5 * separation_over_sigma)
}

/// Single-qubit Pauli index: 0 = I, 1 = X, 2 = Y, 3 = Z.
fn anticommute(p: usize, q: usize) -> bool {
    p != 0 && q != 0 && p != q
}

fn pauli_digits(index: usize, n: usize) -> Vec<usize> {
    (0..n).map(|i| (index >> (2 * i)) & 3).collect()
}

fn support_mask(digits: &[usize]) -> usize {
    digits
        .iter()
        .enumerate()
        .filter(|(_, &d)| d != 0)
        .fold(0, |m, (i, _)| m | (1 << i))
}

/// Total probability on Pauli strings whose support is exactly each subset.
///
/// `probs` is indexed by Pauli string in base 4, qubit `i` at digit `i`.
pub fn pauli_support_weights(n: usize, probs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << n];
    for (k, &p) in probs.iter().enumerate() {
        out[support_mask(&pauli_digits(k, n))] += p;
    }
    out
}

/// Decay of ⟨Z_S⟩ per step under a Pauli channel after twirling by
/// independent single-qubit Cliffords: the mean Pauli eigenvalue over all
/// Pauli strings supported exactly on S.
pub fn twirled_alphas(n: usize, probs: &[f64]) -> Vec<f64> {
    let total = 1 << (2 * n);
    let eigen: Vec<f64> = (0..total)
        .map(|q| {
            let qd = pauli_digits(q, n);
            probs
                .iter()
                .enumerate()
                .map(|(p, &w)| {
                    let pd = pauli_digits(p, n);
                    let flips = pd.iter().zip(&qd).filter(|(a, b)| anticommute(**a, **b)).count();
                    if flips % 2 == 0 { w } else { -w }
                })
                .sum()
        })
        .collect();
    let mut sum = vec![0.0; 1 << n];
    let mut count = vec![0usize; 1 << n];
    for (q, &l) in eigen.iter().enumerate() {
        let m = support_mask(&pauli_digits(q, n));
        sum[m] += l;
        count[m] += 1;
    }
    sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect()
}

/// Pauli-string distribution of a mixture of subset-depolarizing events: with
/// probability ε_S a uniformly random Pauli on S (identity included) is applied.
/// `eps[0]` is ignored; the remainder 1 − Σ ε_S is the no-event weight.
pub fn subset_depolarizing_probs(n: usize, eps: &[f64]) -> Vec<f64> {
    let total = 1 << (2 * n);
    let mut probs = vec![0.0; total];
    let none: f64 = 1.0 - eps.iter().skip(1).sum::<f64>();
    probs[0] += none;
    for (s, &e) in eps.iter().enumerate().skip(1) {
        let inside = 4f64.powi(s.count_ones() as i32);
        for (k, p) in probs.iter_mut().enumerate() {
            if support_mask(&pauli_digits(k, n)) & !s == 0 {
                *p += e / inside;
            }
        }
    }
    probs
}

pub fn x_rotation(theta: f64) -> Matrix2<Complex64> {
    let c = Complex64::new((0.5 * theta).cos(), 0.0);
    let s = Complex64::new(0.0, -(0.5 * theta).sin());
    Matrix2::new(c, s, s, c)
}

pub fn z_rotation(theta: f64) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::from_polar(1.0, -0.5 * theta),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, 0.5 * theta),
    )
}

/// |Tr(A†B)| = 2 for unitaries equal up to a global phase.
pub fn equal_up_to_phase(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>, tol: f64) -> bool {
    ((a.adjoint() * b).trace().norm() - 2.0).abs() < tol
}

/// Photon number of a classically driven damped oscillator after integrating
/// ȧ = −(iδ + κ/2)a − iΩ from a = 0 with classical RK4 for 40/κ.
/// Arguments are angular rates in a common unit; time is in its inverse.
pub fn driven_oscillator_photons(drive: f64, kappa: f64, detuning: f64) -> f64 {
    let rhs = |a: Complex64| -> Complex64 {
        -Complex64::new(0.5 * kappa, detuning) * a - Complex64::new(0.0, drive)
    };
    let t_end = 40.0 / kappa;
    let fastest = detuning.abs().max(kappa).max(drive.abs());
    let steps = ((t_end * fastest) / 0.02).ceil() as usize;
    let h = t_end / steps as f64;
    let mut a = Complex64::new(0.0, 0.0);
    for _ in 0..steps {
        let k1 = rhs(a);
        let k2 = rhs(a + 0.5 * h * k1);
        let k3 = rhs(a + 0.5 * h * k2);
        let k4 = rhs(a + h * k3);
        a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    a.norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_matches_known_k0() {
        assert!((bessel_k0_quadrature(1.0) / 0.421_024_438_240_708_3 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn twirled_depolarizing_single_qubit() {
        // Full depolarizing with weight e: α = 1 − e.
        let probs = subset_depolarizing_probs(1, &[0.0, 0.3]);
        let a = twirled_alphas(1, &probs);
        assert!((a[0] - 1.0).abs() < 1e-15);
        assert!((a[1] - 0.7).abs() < 1e-15);
        let w = pauli_support_weights(1, &probs);
        assert!((w[1] - 0.225).abs() < 1e-15);
    }

    #[test]
    fn oscillator_steady_state() {
        let n = driven_oscillator_photons(1.0, 0.1, 5.0);
        assert!((n - 1.0 / (0.0025 + 25.0)).abs() < 1e-6);
    }

    #[test]
    fn rotations_compose() {
        let x = x_rotation(PI / 2.0);
        assert!(equal_up_to_phase(&(x * x), &x_rotation(PI), 1e-12));
        assert!(!equal_up_to_phase(&x, &z_rotation(PI / 2.0), 1e-6));
    }
}
