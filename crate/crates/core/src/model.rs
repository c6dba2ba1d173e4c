//! Device data model and closed-form dispersive-regime relations.
//!
//! Frequencies are stored as ordinary frequencies (GHz, MHz, kHz or Hz as the
//! field suffix says). Factors of 2π are applied only where a formula returns
//! a rate in s⁻¹.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Detunings closer to a pole than this (1 kHz, expressed in MHz) are rejected.
pub const SINGULAR_DETUNING_TOL_MHZ: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitParams {
    #[serde(rename = "omega_q_GHz")]
    pub omega_q_ghz: f64,
    #[serde(rename = "alpha_MHz")]
    pub alpha_mhz: f64,
    #[serde(rename = "E_C_MHz")]
    pub e_c_mhz: f64,
    #[serde(rename = "E_J_over_E_C")]
    pub ej_over_ec: f64,
    #[serde(rename = "T1_us", default, skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<f64>,
    #[serde(rename = "T2_star_us", default, skip_serializing_if = "Option::is_none")]
    pub t2_star_us: Option<f64>,
    #[serde(rename = "T2_echo_us", default, skip_serializing_if = "Option::is_none")]
    pub t2_echo_us: Option<f64>,
    /// Residual excited-state population. Stored as opaque metadata.
    #[serde(rename = "p_e", default, skip_serializing_if = "Option::is_none")]
    pub p_e: Option<f64>,
}

impl QubitParams {
    pub fn validate(&self, at: &str) -> Result<()> {
        let fail = |field: &str, reason: &str| Error::Validation {
            location: format!("{at}.{field}"),
            reason: reason.to_string(),
        };
        if !(self.omega_q_ghz > 0.0) {
            return Err(fail("omega_q_GHz", "must be > 0"));
        }
        if !(self.alpha_mhz < 0.0) {
            return Err(fail("alpha_MHz", "must be < 0 for a transmon"));
        }
        if !(self.e_c_mhz > 0.0) {
            return Err(fail("E_C_MHz", "must be > 0"));
        }
        if !(self.ej_over_ec > 0.0) {
            return Err(fail("E_J_over_E_C", "must be > 0"));
        }
        for (name, v) in [
            ("T1_us", self.t1_us),
            ("T2_star_us", self.t2_star_us),
            ("T2_echo_us", self.t2_echo_us),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(fail(name, "must be > 0"));
                }
            }
        }
        if let (Some(t1), Some(t2e)) = (self.t1_us, self.t2_echo_us) {
            if t2e > 2.0 * t1 {
                return Err(fail("T2_echo_us", "must not exceed 2·T1"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorParams {
    #[serde(rename = "omega_r_GHz")]
    pub omega_r_ghz: f64,
    #[serde(rename = "kappa_ext_kHz")]
    pub kappa_ext_khz: f64,
    #[serde(rename = "Q_int")]
    pub q_int: f64,
}

impl ResonatorParams {
    /// Total decay rate κ_ext + ω_r/Q_int, in kHz.
    pub fn kappa_total_khz(&self) -> f64 {
        self.kappa_ext_khz + self.omega_r_ghz * 1e6 / self.q_int
    }

    pub fn validate(&self, at: &str) -> Result<()> {
        let fail = |field: &str, reason: &str| Error::Validation {
            location: format!("{at}.{field}"),
            reason: reason.to_string(),
        };
        if !(self.omega_r_ghz > 0.0) {
            return Err(fail("omega_r_GHz", "must be > 0"));
        }
        if !(self.kappa_ext_khz >= 0.0) {
            return Err(fail("kappa_ext_kHz", "must be >= 0"));
        }
        if !(self.q_int > 0.0) {
            return Err(fail("Q_int", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairCoupling {
    #[serde(rename = "g_MHz")]
    pub g_mhz: f64,
    /// Measured dispersive shift.
    #[serde(rename = "chi_kHz")]
    pub chi_khz: f64,
    #[serde(rename = "delta_GHz")]
    pub delta_ghz: f64,
}

impl PairCoupling {
    pub fn n_crit(&self) -> Result<f64> {
        n_crit(self.delta_ghz, self.g_mhz)
    }
}

/// Square matrix stored row-major as nested vectors.
pub type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    pub qubits: Vec<QubitParams>,
    pub resonators: Vec<ResonatorParams>,
    pub pairs: Vec<PairCoupling>,
    /// Parasitic qubit–qubit transverse couplings.
    #[serde(rename = "J_kHz")]
    pub j_khz: Matrix,
    /// Parasitic qubit × resonator dispersive shifts.
    #[serde(rename = "chi_cross_Hz")]
    pub chi_cross_hz: Matrix,
    /// Qubit control-line couplings, row = qubit, column = line.
    pub eps_q: Matrix,
    /// Resonator control-line couplings, row = resonator, column = line.
    pub eps_r: Matrix,
    pub lambda_q: Vec<f64>,
    pub lambda_r: Vec<f64>,
}

impl DeviceParams {
    pub fn n(&self) -> usize {
        self.qubits.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.qubits.len();
        let fail = |location: String, reason: &str| Error::Validation {
            location,
            reason: reason.to_string(),
        };
        if n == 0 {
            return Err(fail("qubits".into(), "at least one qubit required"));
        }
        for (name, len) in [
            ("resonators", self.resonators.len()),
            ("pairs", self.pairs.len()),
            ("lambda_q", self.lambda_q.len()),
            ("lambda_r", self.lambda_r.len()),
        ] {
            if len != n {
                return Err(fail(
                    name.into(),
                    &format!("length {len} does not match {n} qubits"),
                ));
            }
        }
        for (k, q) in self.qubits.iter().enumerate() {
            q.validate(&format!("qubits[{k}]"))?;
        }
        for (k, r) in self.resonators.iter().enumerate() {
            r.validate(&format!("resonators[{k}]"))?;
        }
        for (k, p) in self.pairs.iter().enumerate() {
            if !(p.g_mhz >= 0.0) {
                return Err(fail(format!("pairs[{k}].g_MHz"), "must be >= 0"));
            }
        }
        for (name, m) in [
            ("J_kHz", &self.j_khz),
            ("chi_cross_Hz", &self.chi_cross_hz),
            ("eps_q", &self.eps_q),
            ("eps_r", &self.eps_r),
        ] {
            check_square(name, m, n)?;
        }
        for i in 0..n {
            if self.j_khz[i][i] != 0.0 {
                return Err(fail(format!("J_kHz[{i}][{i}]"), "diagonal must be zero"));
            }
            for j in 0..i {
                if (self.j_khz[i][j] - self.j_khz[j][i]).abs() > 1e-12 * self.j_khz[i][j].abs().max(1.0) {
                    return Err(fail(format!("J_kHz[{i}][{j}]"), "matrix must be symmetric"));
                }
            }
            if !(self.eps_q[i][i] > 0.0) {
                return Err(fail(format!("eps_q[{i}][{i}]"), "diagonal must be positive"));
            }
            if !(self.eps_r[i][i] > 0.0) {
                return Err(fail(format!("eps_r[{i}][{i}]"), "diagonal must be positive"));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let dev: DeviceParams = serde_json::from_str(s)?;
        dev.validate()?;
        Ok(dev)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Predicted χ of each qubit–resonator pair from its recorded g, Δ and E_C,
    /// next to the recorded χ.
    pub fn chi_cross_check(&self) -> Result<Vec<ChiCrossCheck>> {
        self.qubits
            .iter()
            .zip(&self.pairs)
            .map(|(q, p)| {
                let predicted = chi_from_g(p.g_mhz, p.delta_ghz, q.e_c_mhz)?;
                Ok(ChiCrossCheck {
                    recorded_khz: p.chi_khz,
                    predicted_khz: predicted,
                    relative_discrepancy: (predicted - p.chi_khz) / p.chi_khz,
                })
            })
            .collect()
    }
}

fn check_square(name: &str, m: &Matrix, n: usize) -> Result<()> {
    if m.len() != n {
        return Err(Error::Validation {
            location: name.into(),
            reason: format!("expected {n} rows, found {}", m.len()),
        });
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Validation {
                location: format!("{name}[{i}]"),
                reason: format!("expected {n} columns, found {}", row.len()),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiCrossCheck {
    pub recorded_khz: f64,
    pub predicted_khz: f64,
    pub relative_discrepancy: f64,
}

/// Dispersive shift of a transmon–resonator pair from its transverse coupling,
/// χ ≈ −g²E_C / (Δ(Δ − E_C)), returned in kHz.
pub fn chi_from_g(g_mhz: f64, delta_ghz: f64, e_c_mhz: f64) -> Result<f64> {
    if !(g_mhz >= 0.0) {
        return Err(invalid("g", "must be >= 0"));
    }
    let delta = delta_ghz * 1e3;
    if delta.abs() < SINGULAR_DETUNING_TOL_MHZ {
        return Err(Error::SingularDetuning(format!("|Δ| = {:.3e} MHz", delta.abs())));
    }
    if (delta - e_c_mhz).abs() < SINGULAR_DETUNING_TOL_MHZ {
        return Err(Error::SingularDetuning(format!(
            "|Δ − E_C| = {:.3e} MHz",
            (delta - e_c_mhz).abs()
        )));
    }
    let chi_mhz = -g_mhz * g_mhz * e_c_mhz / (delta * (delta - e_c_mhz));
    Ok(chi_mhz * 1e3)
}

/// Critical photon number (Δ/2g)².
pub fn n_crit(delta_ghz: f64, g_mhz: f64) -> Result<f64> {
    if g_mhz == 0.0 {
        return Err(Error::DivisionByZero("n_crit requires g > 0".into()));
    }
    if !(g_mhz > 0.0) {
        return Err(invalid("g", "must be > 0"));
    }
    let ratio = delta_ghz * 1e3 / (2.0 * g_mhz);
    Ok(ratio * ratio)
}

/// AC Stark shift 2χn̄ (same unit as `chi`).
pub fn ac_stark_shift(chi: f64, n_bar: f64) -> Result<f64> {
    if !(n_bar >= 0.0) {
        return Err(invalid("n_bar", "must be >= 0"));
    }
    Ok(2.0 * chi * n_bar)
}

/// Steady-state photon number of a resonator under continuous drive,
/// (εV)² / ((κ/2)² + (ω_d − ω̃_r)²). All three arguments share one frequency unit.
pub fn steady_state_photons(drive_amp: f64, kappa: f64, detuning: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(invalid("kappa", "must be > 0"));
    }
    Ok(drive_amp * drive_amp / (0.25 * kappa * kappa + detuning * detuning))
}

/// Far-detuned limit (εV/Δ_d)².
pub fn steady_state_photons_detuned(drive_amp: f64, detuning: f64) -> Result<f64> {
    if detuning == 0.0 {
        return Err(Error::DivisionByZero("detuned form requires Δ_d ≠ 0".into()));
    }
    Ok((drive_amp / detuning).powi(2))
}

/// Measurement-induced dephasing rate in s⁻¹ for a drive detuned by
/// `detuning_hz` = ω_d − ω_r from the bare resonator (qubit in ground state).
pub fn measurement_dephasing_rate(
    chi_hz: f64,
    kappa_hz: f64,
    n_g: f64,
    n_e: f64,
    detuning_hz: f64,
) -> Result<f64> {
    if !(kappa_hz > 0.0) {
        return Err(invalid("kappa", "must be > 0"));
    }
    if !(n_g >= 0.0 && n_e >= 0.0) {
        return Err(invalid("n_g/n_e", "photon numbers must be >= 0"));
    }
    let det = detuning_hz - chi_hz;
    let rate_hz = kappa_hz * chi_hz * chi_hz * (n_e + n_g)
        / (0.25 * kappa_hz * kappa_hz + chi_hz * chi_hz + det * det);
    Ok(2.0 * PI * rate_hz)
}

/// Resonant-drive form 8χ²n̄_g / (κ[1 + (4χ/κ)²]) in s⁻¹.
pub fn resonant_dephasing_rate(chi_hz: f64, kappa_hz: f64, n_g: f64) -> Result<f64> {
    if !(kappa_hz > 0.0) {
        return Err(invalid("kappa", "must be > 0"));
    }
    if !(n_g >= 0.0) {
        return Err(invalid("n_g", "must be >= 0"));
    }
    let x = 4.0 * chi_hz / kappa_hz;
    Ok(2.0 * PI * 8.0 * chi_hz * chi_hz * n_g / (kappa_hz * (1.0 + x * x)))
}

/// Excited-state photon number under a resonant drive, n̄_g / [1 + (4χ/κ)²].
pub fn resonant_excited_photons(chi_hz: f64, kappa_hz: f64, n_g: f64) -> f64 {
    let x = 4.0 * chi_hz / kappa_hz;
    n_g / (1.0 + x * x)
}

/// Photons per watt `c` such that a dephasing slope `K` (s⁻¹ per W) maps to
/// n̄_g = c·P under the resonant dephasing formula.
pub fn photon_calibration_constant(kappa_hz: f64, chi_hz: f64, k_slope: f64) -> Result<f64> {
    if chi_hz == 0.0 {
        return Err(Error::DivisionByZero("calibration requires χ ≠ 0".into()));
    }
    if !(kappa_hz > 0.0) {
        return Err(invalid("kappa", "must be > 0"));
    }
    if !(k_slope >= 0.0) {
        return Err(invalid("K", "must be >= 0"));
    }
    let x = 4.0 * chi_hz / kappa_hz;
    Ok(kappa_hz * (1.0 + x * x) * k_slope / (8.0 * chi_hz * chi_hz * 2.0 * PI))
}

/// Pure echoed dephasing time from 1/T_φ,e = 1/T2e − 1/(2T1).
///
/// Returns `f64::INFINITY` when T2e = 2·T1 (relaxation-limited).
pub fn pure_dephasing_time(t1_us: f64, t2e_us: f64) -> Result<f64> {
    if !(t1_us > 0.0 && t2e_us > 0.0) {
        return Err(invalid("T1/T2e", "must be > 0"));
    }
    if t2e_us > 2.0 * t1_us {
        return Err(Error::OutOfRange(format!(
            "T2e = {t2e_us} µs exceeds 2·T1 = {} µs",
            2.0 * t1_us
        )));
    }
    let rate = 1.0 / t2e_us - 1.0 / (2.0 * t1_us);
    if rate <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / rate)
}

/// Coherence-limited error per gate (3 − e^{−τ/T1} − 2e^{−τ/T2e})/6.
pub fn coherence_limited_epg(t1_us: f64, t2e_us: f64, tau_g_ns: f64) -> Result<f64> {
    if !(t1_us > 0.0 && t2e_us > 0.0 && tau_g_ns > 0.0) {
        return Err(invalid("T1/T2e/tau_g", "must be > 0"));
    }
    let tau_us = tau_g_ns * 1e-3;
    // exp_m1 keeps precision when τ ≪ T.
    let a = -(-tau_us / t1_us).exp_m1();
    let b = -(-tau_us / t2e_us).exp_m1();
    Ok((a + 2.0 * b) / 6.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn chi_table_row_one() {
        let chi = chi_from_g(124.0, 3.981 - 7.968, 199.0).unwrap();
        assert!((chi + 183.3).abs() < 0.5, "{chi}");
        assert_eq!(chi_from_g(0.0, -4.0, 200.0).unwrap(), 0.0);
    }

    #[test]
    fn chi_rejects_poles() {
        assert!(matches!(chi_from_g(50.0, 0.0, 200.0), Err(Error::SingularDetuning(_))));
        assert!(matches!(chi_from_g(50.0, 0.2, 200.0), Err(Error::SingularDetuning(_))));
        assert!(chi_from_g(-1.0, -4.0, 200.0).is_err());
    }

    #[test]
    fn n_crit_values() {
        assert_eq!(n_crit(-3.987, 124.0).unwrap().round(), 258.0);
        assert_eq!(n_crit(4.053, 128.0).unwrap().round(), 251.0);
        assert_relative_eq!(n_crit(0.2, 100.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(matches!(n_crit(1.0, 0.0), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn stark_shift() {
        assert_relative_eq!(ac_stark_shift(-165e3, 1.0).unwrap(), -330e3);
        assert_eq!(ac_stark_shift(-165e3, 0.0).unwrap(), 0.0);
        let n = n_crit(-3.987, 124.0).unwrap().round() / 10.0;
        assert_relative_eq!(ac_stark_shift(-165e3, n).unwrap(), -8.514e6, max_relative = 1e-12);
        assert!(ac_stark_shift(1.0, -1.0).is_err());
    }

    #[test]
    fn photons_limits() {
        assert_relative_eq!(steady_state_photons(1.0, 0.5, 0.0).unwrap(), 16.0);
        assert_relative_eq!(steady_state_photons_detuned(1.0, 5.0).unwrap(), 0.04);
        let n = steady_state_photons(1e6, 1e5, 5e6).unwrap();
        assert!((n - 0.039996).abs() < 1e-6);
        assert!(steady_state_photons(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn dephasing_special_cases() {
        assert_eq!(measurement_dephasing_rate(0.0, 1e5, 3.0, 2.0, 0.0).unwrap(), 0.0);
        let (kappa, chi, n_g) = (2e5, 5e4, 3.0);
        let expected = 2.0 * PI * 4.0 * chi * chi * n_g / kappa;
        assert_relative_eq!(
            resonant_dephasing_rate(chi, kappa, n_g).unwrap(),
            expected,
            max_relative = 1e-14
        );
    }

    #[test]
    fn calibration_inverts_resonant_formula() {
        let (kappa, chi, k) = (2e5, -165e3, 3.7e7);
        let c = photon_calibration_constant(kappa, chi, k).unwrap();
        let x = 4.0 * chi / kappa;
        let back = c * 2.0 * PI * 8.0 * chi * chi / (kappa * (1.0 + x * x));
        assert_relative_eq!(back, k, max_relative = 1e-14);
        assert_eq!(photon_calibration_constant(kappa, chi, 0.0).unwrap(), 0.0);
        assert!(matches!(
            photon_calibration_constant(kappa, 0.0, k),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn dephasing_time_table_rows() {
        assert_eq!(pure_dephasing_time(106.0, 101.0).unwrap().round(), 193.0);
        assert_eq!(pure_dephasing_time(179.0, 128.0).unwrap().round(), 199.0);
        assert!(pure_dephasing_time(50.0, 100.0).unwrap().is_infinite());
        assert!(matches!(pure_dephasing_time(50.0, 101.0), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn coherence_epg() {
        let e = coherence_limited_epg(106.0, 101.0, 24.0).unwrap();
        assert!((e - 1.17e-4).abs() < 0.01e-4, "{e}");
        let e2 = coherence_limited_epg(159.0, 116.0, 24.0).unwrap();
        assert_eq!((e2 * 1e6).round(), 94.0);
        let e_inf = coherence_limited_epg(1e300, 1e300, 24.0).unwrap();
        assert!(e_inf < 1e-300);
    }

    #[test]
    fn kappa_total() {
        let r = ResonatorParams { omega_r_ghz: 8.0, kappa_ext_khz: 100.0, q_int: 1e5 };
        assert_relative_eq!(r.kappa_total_khz(), 180.0);
    }

    #[test]
    fn device_validation_reports_field() {
        let mut dev = crate::reference::device_table();
        dev.j_khz[0][1] = 5.0;
        let err = dev.validate().unwrap_err().to_string();
        assert!(err.contains("J_kHz[1][0]") || err.contains("J_kHz[0][1]") , "{err}");
        let mut dev = crate::reference::device_table();
        dev.qubits[2].alpha_mhz = 10.0;
        let err = dev.validate().unwrap_err().to_string();
        assert!(err.contains("qubits[2].alpha_MHz"), "{err}");
    }

    #[test]
    fn device_json_round_trip() {
        let dev = crate::reference::device_table();
        let s = serde_json::to_string_pretty(&dev).unwrap();
        assert!(s.contains("\"omega_q_GHz\""));
        assert!(s.contains("\"chi_kHz\""));
        let back = DeviceParams::from_json_str(&s).unwrap();
        assert_eq!(back, dev);
        let bad = s.replacen("\"omega_q_GHz\"", "\"omega_q\"", 1);
        let err = DeviceParams::from_json_str(&bad).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }
}
