//! Plasma-metamaterial model of a pillar-shunted enclosure.
//!
//! A square lattice of conducting pillars (spacing `a`, radius `r`) behaves as
//! a wire medium with a plasma cutoff ω_p. Below cutoff, cavity-mediated
//! couplings are evanescent with decay length δ_p and follow K₀(d/δ_p).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::bessel_k0;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Ratio ω_q/ω_c above which the skin depth is treated as divergent.
pub const SKIN_DEPTH_POLE_RATIO: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub thickness_um: f64,
    pub permittivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub a_mm: f64,
    pub r_mm: f64,
    pub layers: Vec<Layer>,
    #[serde(default = "default_c")]
    pub c_factor: f64,
}

fn default_c() -> f64 {
    1.31
}

impl Default for LatticeSpec {
    /// 2 mm pillar pitch, 0.25 mm radius, 475 µm silicon under 125 µm vacuum.
    fn default() -> Self {
        Self {
            a_mm: 2.0,
            r_mm: 0.25,
            layers: vec![
                Layer { thickness_um: 475.0, permittivity: 11.45 },
                Layer { thickness_um: 125.0, permittivity: 1.0 },
            ],
            c_factor: default_c(),
        }
    }
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_mm > 0.0 && self.a_mm > 2.0 * self.r_mm) {
            return Err(Error::Geometry(format!(
                "need a > 2r > 0, got a = {} mm, r = {} mm",
                self.a_mm, self.r_mm
            )));
        }
        if self.layers.is_empty() {
            return Err(Error::Geometry("at least one substrate layer required".into()));
        }
        for (k, l) in self.layers.iter().enumerate() {
            if !(l.thickness_um > 0.0) {
                return Err(Error::Geometry(format!("layers[{k}].thickness_um must be > 0")));
            }
            if !(l.permittivity >= 1.0) {
                return Err(Error::Geometry(format!("layers[{k}].permittivity must be >= 1")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPrediction {
    pub eps_eff: f64,
    #[serde(rename = "omega_p_GHz")]
    pub omega_p_ghz: f64,
    #[serde(rename = "curvature_A_GHz_mm2")]
    pub curvature_ghz_mm2: f64,
    pub delta_p_mm: f64,
    /// Skin depth using the shortcut a[ln(a/r) − C]/√(2π); differs from
    /// `delta_p_mm` and is reported for comparison only.
    pub delta_p_closed_form_mm: f64,
    /// Asymptotic coupling drop per lattice spacing, 20·log10 of the amplitude ratio.
    pub drop_per_spacing_db: f64,
}

/// Series-capacitor effective permittivity Σt / Σ(t/ε).
pub fn effective_permittivity(layers: &[Layer]) -> Result<f64> {
    if layers.is_empty() {
        return Err(Error::Geometry("at least one layer required".into()));
    }
    let total: f64 = layers.iter().map(|l| l.thickness_um).sum();
    let weighted: f64 = layers.iter().map(|l| l.thickness_um / l.permittivity).sum();
    Ok(total / weighted)
}

/// Plasma cutoff ω_p/2π in GHz.
pub fn plasma_frequency(spec: &LatticeSpec) -> Result<f64> {
    spec.validate()?;
    let eps = effective_permittivity(&spec.layers)?;
    plasma_frequency_with(spec.a_mm, spec.r_mm, spec.c_factor, eps)
}

fn plasma_frequency_with(a_mm: f64, r_mm: f64, c_factor: f64, eps: f64) -> Result<f64> {
    let log_term = (a_mm / r_mm).ln() - c_factor;
    if log_term <= 0.0 {
        return Err(Error::Geometry(format!(
            "ln(a/r) = {:.4} must exceed C = {c_factor}",
            (a_mm / r_mm).ln()
        )));
    }
    let a = a_mm * 1e-3;
    let omega_a = 2f64.sqrt() * PI * SPEED_OF_LIGHT / (a * eps.sqrt());
    let omega_p = omega_a / (PI * log_term).sqrt();
    Ok(omega_p / (2.0 * PI) * 1e-9)
}

/// Curvature A/2π of ω_k = ω_p + A k² in GHz·mm².
pub fn band_curvature(eps_eff: f64, omega_p_ghz: f64) -> Result<f64> {
    if !(eps_eff > 0.0 && omega_p_ghz > 0.0) {
        return Err(Error::OutOfRange("ε_r and ω_p must be positive".into()));
    }
    let omega_p = 2.0 * PI * omega_p_ghz * 1e9;
    let a_si = SPEED_OF_LIGHT * SPEED_OF_LIGHT / (2.0 * eps_eff * omega_p);
    Ok(a_si / (2.0 * PI) * 1e6 * 1e-9)
}

/// Plasma skin depth 1/√(μ0ε0ε_r(ω_c² − ω_q²)) in mm.
pub fn skin_depth(eps_eff: f64, omega_c_ghz: f64, omega_q_ghz: f64) -> Result<f64> {
    if !(eps_eff > 0.0 && omega_c_ghz > 0.0 && omega_q_ghz >= 0.0) {
        return Err(Error::OutOfRange("need ε_r > 0, ω_c > 0, ω_q ≥ 0".into()));
    }
    if omega_q_ghz / omega_c_ghz > SKIN_DEPTH_POLE_RATIO {
        return Err(Error::OutOfRange(format!(
            "ω_q/ω_c = {:.4} is not evanescent",
            omega_q_ghz / omega_c_ghz
        )));
    }
    let wc = 2.0 * PI * omega_c_ghz * 1e9;
    let wq = 2.0 * PI * omega_q_ghz * 1e9;
    let depth_m = SPEED_OF_LIGHT / (eps_eff.sqrt() * (wc * wc - wq * wq).sqrt());
    Ok(depth_m * 1e3)
}

/// The shortcut skin-depth expression a[ln(a/r) − C]/√(2π), in mm.
pub fn skin_depth_closed_form(spec: &LatticeSpec) -> f64 {
    spec.a_mm * ((spec.a_mm / spec.r_mm).ln() - spec.c_factor) / (2.0 * PI).sqrt()
}

/// Low-frequency limit a·√([ln(a/r) − C]/2π), independent of ε_r.
pub fn skin_depth_low_frequency(spec: &LatticeSpec) -> f64 {
    spec.a_mm * (((spec.a_mm / spec.r_mm).ln() - spec.c_factor) / (2.0 * PI)).sqrt()
}

/// Coupling decay K₀(d/δ_p) relative to a reference separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPoint {
    pub d_mm: f64,
    pub relative: f64,
    pub db: f64,
    /// d < δ_p, where the logarithmic near-field divergence makes the form unreliable.
    pub near_field: bool,
}

pub fn coupling_profile(d_mm: f64, delta_p_mm: f64, d_ref_mm: f64) -> Result<CouplingPoint> {
    if !(d_mm > 0.0 && delta_p_mm > 0.0 && d_ref_mm > 0.0) {
        return Err(Error::OutOfRange("separations and δ_p must be > 0".into()));
    }
    let relative = bessel_k0(d_mm / delta_p_mm) / bessel_k0(d_ref_mm / delta_p_mm);
    Ok(CouplingPoint {
        d_mm,
        relative,
        db: 20.0 * relative.log10(),
        near_field: d_mm < delta_p_mm,
    })
}

/// dB drop of K₀ between separations d and d + step.
pub fn coupling_drop_db(d_mm: f64, step_mm: f64, delta_p_mm: f64) -> f64 {
    20.0 * (bessel_k0(d_mm / delta_p_mm) / bessel_k0((d_mm + step_mm) / delta_p_mm)).log10()
}

/// Limit of `coupling_drop_db` as d → ∞: 20·log10(e)·step/δ_p.
pub fn asymptotic_drop_db(step_mm: f64, delta_p_mm: f64) -> f64 {
    20.0 * std::f64::consts::LOG10_E * step_mm / delta_p_mm
}

/// Pairwise coupling map (dB relative to nearest-neighbour spacing) for an
/// `n × n` square grid of qubits. Entry (k, l) uses qubits k and l in
/// row-major order; the diagonal is +∞.
pub fn coupling_map(n: usize, spacing_mm: f64, delta_p_mm: f64) -> Result<Vec<Vec<f64>>> {
    if n == 0 || !(spacing_mm > 0.0) {
        return Err(Error::OutOfRange("grid needs n ≥ 1 and spacing > 0".into()));
    }
    let sites: Vec<(f64, f64)> = (0..n * n)
        .map(|k| ((k / n) as f64 * spacing_mm, (k % n) as f64 * spacing_mm))
        .collect();
    let reference = bessel_k0(spacing_mm / delta_p_mm);
    Ok(sites
        .iter()
        .map(|&(x0, y0)| {
            sites
                .iter()
                .map(|&(x1, y1)| {
                    let d = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
                    if d == 0.0 {
                        f64::INFINITY
                    } else {
                        20.0 * (bessel_k0(d / delta_p_mm) / reference).log10()
                    }
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionPoint {
    /// Distance along the path in units of 1/mm.
    pub path_position: f64,
    pub k_per_mm: f64,
    pub label: Option<&'static str>,
    pub with_pillar_ghz: f64,
    pub without_pillar_ghz: f64,
}

/// ω(k) for the shunted (ω_p + A k²) and unshunted (ck/√ε_r) enclosures.
pub fn dispersion_at(k_per_mm: f64, pred: &BandPrediction) -> Result<(f64, f64)> {
    if !(k_per_mm >= 0.0) {
        return Err(Error::OutOfRange("k must be >= 0".into()));
    }
    let with = pred.omega_p_ghz + pred.curvature_ghz_mm2 * k_per_mm * k_per_mm;
    let k_si = k_per_mm * 1e3;
    let without = SPEED_OF_LIGHT * k_si / pred.eps_eff.sqrt() / (2.0 * PI) * 1e-9;
    Ok((with, without))
}

/// Both branches along Γ → X → M → Γ with `points_per_leg` samples per leg.
pub fn dispersion(spec: &LatticeSpec, points_per_leg: usize) -> Result<Vec<DispersionPoint>> {
    let pred = predict(spec)?;
    let kmax = PI / spec.a_mm;
    let legs: [((f64, f64), (f64, f64), &str); 3] = [
        ((0.0, 0.0), (kmax, 0.0), "Γ"),
        ((kmax, 0.0), (kmax, kmax), "X"),
        ((kmax, kmax), (0.0, 0.0), "M"),
    ];
    let n = points_per_leg.max(1);
    let mut out = Vec::with_capacity(3 * n + 1);
    let mut s = 0.0;
    for (start, end, label) in legs {
        let len = ((end.0 - start.0).powi(2) + (end.1 - start.1).powi(2)).sqrt();
        for step in 0..n {
            let t = step as f64 / n as f64;
            let kx = start.0 + t * (end.0 - start.0);
            let ky = start.1 + t * (end.1 - start.1);
            let k = (kx * kx + ky * ky).sqrt();
            let (with, without) = dispersion_at(k, &pred)?;
            out.push(DispersionPoint {
                path_position: s + t * len,
                k_per_mm: k,
                label: (step == 0).then_some(label),
                with_pillar_ghz: with,
                without_pillar_ghz: without,
            });
        }
        s += len;
    }
    let (with, without) = dispersion_at(0.0, &pred)?;
    out.push(DispersionPoint {
        path_position: s,
        k_per_mm: 0.0,
        label: Some("Γ"),
        with_pillar_ghz: with,
        without_pillar_ghz: without,
    });
    Ok(out)
}

/// Every derived band quantity from a lattice description, with δ_p in the
/// ω_q ≪ ω_p limit.
pub fn predict(spec: &LatticeSpec) -> Result<BandPrediction> {
    spec.validate()?;
    let eps_eff = effective_permittivity(&spec.layers)?;
    let omega_p_ghz = plasma_frequency_with(spec.a_mm, spec.r_mm, spec.c_factor, eps_eff)?;
    let curvature_ghz_mm2 = band_curvature(eps_eff, omega_p_ghz)?;
    let delta_p_mm = skin_depth(eps_eff, omega_p_ghz, 0.0)?;
    Ok(BandPrediction {
        eps_eff,
        omega_p_ghz,
        curvature_ghz_mm2,
        delta_p_mm,
        delta_p_closed_form_mm: skin_depth_closed_form(spec),
        drop_per_spacing_db: asymptotic_drop_db(spec.a_mm, delta_p_mm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn permittivity_examples() {
        let spec = LatticeSpec::default();
        let eps = effective_permittivity(&spec.layers).unwrap();
        assert!((eps - 3.604).abs() < 5e-4, "{eps}");
        let one = [Layer { thickness_um: 10.0, permittivity: 4.2 }];
        assert_relative_eq!(effective_permittivity(&one).unwrap(), 4.2);
        let two = [one[0], one[0]];
        assert_relative_eq!(effective_permittivity(&two).unwrap(), 4.2, max_relative = 1e-15);
    }

    #[test]
    fn plasma_frequency_scaling() {
        let mut spec = LatticeSpec::default();
        let f = plasma_frequency(&spec).unwrap();
        assert!((f - 35.9).abs() < 0.05, "{f}");
        for l in &mut spec.layers {
            l.permittivity *= 4.0;
        }
        assert_relative_eq!(plasma_frequency(&spec).unwrap(), f / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn geometry_errors() {
        let spec = LatticeSpec { r_mm: 1.0, ..LatticeSpec::default() };
        assert!(matches!(plasma_frequency(&spec), Err(Error::Geometry(_))));
        // ln(2/0.6) = 1.204 < 1.31
        let spec = LatticeSpec { r_mm: 0.6, ..LatticeSpec::default() };
        assert!(matches!(plasma_frequency(&spec), Err(Error::Geometry(_))));
    }

    #[test]
    fn curvature_examples() {
        let a = band_curvature(3.6039, 35.9).unwrap();
        assert!((a - 8.8).abs() < 0.05, "{a}");
        assert_relative_eq!(band_curvature(3.6, 71.8).unwrap(), band_curvature(3.6, 35.9).unwrap() / 2.0);
    }

    #[test]
    fn skin_depth_from_recorded_cutoff() {
        // With the finite-element cutoff the depth is 0.73 mm, i.e. "≈ 0.7 mm".
        let d = skin_depth(3.604, 34.3, 0.0).unwrap();
        assert!((d - 0.733).abs() < 0.002, "{d}");
        let d4 = skin_depth(3.604, 34.3, 4.0).unwrap();
        assert!((d4 / d - 1.0).abs() < 0.01);
        assert!(skin_depth(3.604, 34.3, 34.3).is_err());
        assert!(skin_depth(3.604, 34.3, 34.28).is_err());
    }

    #[test]
    fn low_frequency_depth_is_permittivity_free() {
        let mut spec = LatticeSpec::default();
        let d0 = predict(&spec).unwrap().delta_p_mm;
        assert_relative_eq!(d0, skin_depth_low_frequency(&spec), max_relative = 1e-12);
        for l in &mut spec.layers {
            l.permittivity *= 10.0;
        }
        let d1 = predict(&spec).unwrap().delta_p_mm;
        assert!((d1 - d0).abs() < 1e-10);
        assert!((skin_depth_closed_form(&spec) - 0.614).abs() < 1e-3);
    }

    #[test]
    fn drop_converges_monotonically() {
        let delta = predict(&LatticeSpec::default()).unwrap().delta_p_mm;
        let limit = asymptotic_drop_db(2.0, delta);
        assert!((limit - 24.8).abs() < 0.1, "{limit}");
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let drop = coupling_drop_db(2.0 * k as f64, 2.0, delta);
            assert!(drop < prev && drop > limit, "d = {k}: {drop}");
            prev = drop;
        }
        // Remaining excess is the √d prefactor, 10·log10(80/78).
        assert!((prev - limit - 10.0 * (80.0f64 / 78.0).log10()).abs() < 0.01);
    }

    #[test]
    fn coupling_map_shape() {
        let m = coupling_map(3, 2.0, 0.7).unwrap();
        assert_eq!(m.len(), 9);
        assert!(m[4][4].is_infinite());
        assert!(m[0][1].abs() < 1e-12);
        assert_relative_eq!(m[1][5], m[5][1]);
        let p = coupling_profile(1e-6, 0.7, 2.0).unwrap();
        assert!(p.near_field && p.relative > 1.0);
    }

    #[test]
    fn dispersion_endpoints() {
        let spec = LatticeSpec::default();
        let pred = predict(&spec).unwrap();
        let pts = dispersion(&spec, 10).unwrap();
        assert_relative_eq!(pts[0].with_pillar_ghz, pred.omega_p_ghz);
        assert_eq!(pts[0].without_pillar_ghz, 0.0);
        let x = pts.iter().find(|p| p.label == Some("X")).unwrap();
        assert!((x.without_pillar_ghz - 39.5).abs() < 0.1, "{}", x.without_pillar_ghz);
        let k = 0.1;
        let (w, wo) = dispersion_at(k, &pred).unwrap();
        assert_relative_eq!(w, pred.omega_p_ghz + pred.curvature_ghz_mm2 * k * k, max_relative = 1e-12);
        assert_relative_eq!(wo, SPEED_OF_LIGHT * 100.0 / pred.eps_eff.sqrt() / (2.0 * PI) * 1e-9, max_relative = 1e-12);
    }
}
