//! Control-line selectivities, parasitic-coupling bounds and the
//! coupling-mediated drive model, plus end-to-end synthetic pipelines that
//! measure selectivities the way the experiment does: Rabi-rate ladders for
//! qubit lines and Ramsey AC-Stark ladders for resonator lines.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit::{fit_linear, FitResult};
use crate::freq::{gaussian_interp_frequency, magnitude_spectrum};
use crate::synth::decay::{gen_decay_trace, DecayKind, DecayParams};
use crate::synth::rb::cell_rng;
use crate::trace::uniform_delays;

/// Reduced χ² above which a straight-line response is rejected.
pub const LINEARITY_THRESHOLD: f64 = 5.0;
/// |εV/Δ| beyond which the perturbative mediated-drive series is flagged.
pub const PERTURBATIVE_LIMIT: f64 = 0.3;
/// Peak-to-median spectral ratio accepted as a detected oscillation.
const PROBE_SNR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectivityKind {
    Qubit,
    Resonator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectivityMatrix {
    pub kind: SelectivityKind,
    /// φ_ij for element i and line j.
    pub values: Vec<Vec<f64>>,
    /// 10·log10 φ_ij.
    pub db: Vec<Vec<f64>>,
    /// Entries whose slope was consistent with zero; the value is then an upper bound.
    pub upper_bound: Vec<Vec<bool>>,
}

impl SelectivityMatrix {
    fn from_values(kind: SelectivityKind, values: Vec<Vec<f64>>) -> Self {
        let db = values.iter().map(|row| row.iter().map(|v| 10.0 * v.log10()).collect()).collect();
        let upper_bound = values.iter().map(|row| vec![false; row.len()]).collect();
        Self { kind, values, db, upper_bound }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Fixed-width dB table, rows = element i, columns = line j; `<` marks bounds.
    pub fn render_db(&self) -> String {
        let n = self.n();
        let tag = match self.kind {
            SelectivityKind::Qubit => "Q",
            SelectivityKind::Resonator => "R",
        };
        let mut out = format!("{:>6}", "");
        for j in 0..n {
            let _ = write!(out, "{:>10}", format!("line {}", j + 1));
        }
        out.push('\n');
        for i in 0..n {
            let _ = write!(out, "{:>6}", format!("{tag}{}", i + 1));
            for j in 0..n {
                let mark = if self.upper_bound[i][j] { "<" } else { "" };
                let _ = write!(out, "{:>10}", format!("{mark}{:.1}", self.db[i][j]));
            }
            out.push('\n');
        }
        out
    }
}

fn check_square(m: &[Vec<f64>], what: &str) -> Result<usize> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(invalid(what, "must be a non-empty square matrix"));
    }
    Ok(n)
}

/// φ_ij = (k_ij / k_jj)² from Rabi-rate slopes.
pub fn qubit_selectivity(k: &[Vec<f64>]) -> Result<SelectivityMatrix> {
    let n = check_square(k, "k_matrix")?;
    if let Some(j) = (0..n).find(|&j| !(k[j][j] > 0.0)) {
        return Err(Error::DivisionByZero(format!("diagonal slope k[{j}][{j}] must be > 0")));
    }
    let values = (0..n).map(|i| (0..n).map(|j| (k[i][j] / k[j][j]).powi(2)).collect()).collect();
    Ok(SelectivityMatrix::from_values(SelectivityKind::Qubit, values))
}

/// Validity of the detuned photon-number form behind the resonator selectivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetunedDrive {
    pub delta_d_hz: f64,
    pub kappa_hz: f64,
}

/// φ_ij = (χ_jj/χ_ii)(k'_ij/k'_jj) from AC-Stark slopes, χ in Hz. Warns when
/// the drive detuning is not large compared with κ and |χ_ii|.
pub fn resonator_selectivity(
    k_prime: &[Vec<f64>],
    chis: &[f64],
    drive: Option<DetunedDrive>,
) -> Result<(SelectivityMatrix, Vec<String>)> {
    let n = check_square(k_prime, "k_prime_matrix")?;
    if chis.len() != n {
        return Err(Error::GridMismatch("one χ per resonator required".into()));
    }
    if let Some(i) = chis.iter().position(|c| *c == 0.0) {
        return Err(Error::DivisionByZero(format!("χ[{i}] must be nonzero")));
    }
    if let Some(j) = (0..n).find(|&j| k_prime[j][j] == 0.0) {
        return Err(Error::DivisionByZero(format!("diagonal slope k'[{j}][{j}] must be nonzero")));
    }
    let values = (0..n)
        .map(|i| (0..n).map(|j| (chis[j] / chis[i]) * (k_prime[i][j] / k_prime[j][j])).collect())
        .collect();
    let mut warnings = Vec::new();
    if let Some(d) = drive {
        for (i, chi) in chis.iter().enumerate() {
            let scale = d.kappa_hz.max(chi.abs());
            if d.delta_d_hz.abs() < 10.0 * scale {
                warnings.push(format!(
                    "resonator {}: |Δ_d| = {:.3e} Hz is not ≫ max(κ, |χ|) = {:.3e} Hz",
                    i + 1,
                    d.delta_d_hz.abs(),
                    scale
                ));
            }
        }
    }
    Ok((SelectivityMatrix::from_values(SelectivityKind::Resonator, values), warnings))
}

/// |J_ij| < √min(φ_ij, φ_ji)·|Δ_ij| in kHz, from qubit frequencies in GHz.
/// Diagonal entries are zero.
pub fn bound_parasitic_j(selectivity: &SelectivityMatrix, qubit_freqs_ghz: &[f64]) -> Result<Vec<Vec<f64>>> {
    if selectivity.kind != SelectivityKind::Qubit {
        return Err(invalid("selectivity", "a qubit selectivity matrix is required"));
    }
    let n = selectivity.n();
    if qubit_freqs_ghz.len() != n {
        return Err(Error::GridMismatch("one frequency per qubit required".into()));
    }
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let delta_khz = (qubit_freqs_ghz[i] - qubit_freqs_ghz[j]).abs() * 1e6;
            if delta_khz < 1.0 {
                return Err(Error::SingularDetuning(format!(
                    "qubits {} and {} share a frequency; the J bound is vacuous",
                    i + 1,
                    j + 1
                )));
            }
            let phi = selectivity.values[i][j].min(selectivity.values[j][i]);
            out[i][j] = phi.max(0.0).sqrt() * delta_khz;
        }
    }
    Ok(out)
}

/// χ bound from an undetected Stark shift: resolution / (2n̄).
pub fn bound_parasitic_chi(freq_resolution_hz: f64, n_bar_driven: f64) -> Result<f64> {
    if !(n_bar_driven > 0.0) {
        return Err(invalid("n_bar_driven", "must be > 0"));
    }
    Ok(freq_resolution_hz / (2.0 * n_bar_driven))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediatedDrive {
    pub eps_j: f64,
    /// |εV/Δ| exceeded the series validity limit.
    pub outside_validity: bool,
}

/// Coupling-mediated drive ε^J on qubit i from line j with qubit j in its
/// ground state, through second order in the drive:
///
/// ε^J = ε_jj (J/Δ)[1 − 2y² + 4y²Δ/(2Δ − α_j)], y = ε_jj V/(2Δ),
///
/// where ε_jj V is the Rabi rate it produces on qubit j and Δ = ω_i − ω_j.
/// The half in y belongs to the convention that a drive (Ω/2)(b + b†) yields
/// Rabi rate Ω; a coupled-pair simulation confirms it.
pub fn epsilon_j_perturbative(eps_jj: f64, j: f64, delta: f64, alpha_j: f64, drive: f64) -> Result<MediatedDrive> {
    if delta == 0.0 || 2.0 * delta == alpha_j {
        return Err(Error::SingularDetuning("Δ and 2Δ − α_j must be nonzero".into()));
    }
    let y = drive / (2.0 * delta);
    let bracket = 1.0 - 2.0 * y * y + 4.0 * y * y * delta / (2.0 * delta - alpha_j);
    Ok(MediatedDrive { eps_j: eps_jj * j / delta * bracket, outside_validity: (drive / delta).abs() > PERTURBATIVE_LIMIT })
}

/// Rabi rate per unit drive from direct and mediated couplings with relative phase φ.
pub fn total_rabi_rate(eps_q: f64, eps_j: f64, phase: f64) -> f64 {
    (eps_q * eps_q + eps_j * eps_j + 2.0 * eps_q * eps_j * phase.cos()).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearityCheck {
    pub fit: FitResult,
    pub reduced_chi2: f64,
    pub linear: bool,
}

/// Tests Ω = kV through the origin against data with known per-point σ.
pub fn linearity_diagnostic(v: &[f64], rates: &[f64], sigma: &[f64]) -> Result<LinearityCheck> {
    let fit = fit_linear(v, rates, Some(sigma), true)?;
    let reduced_chi2 = fit.reduced_chi2;
    Ok(LinearityCheck { fit, reduced_chi2, linear: reduced_chi2 <= LINEARITY_THRESHOLD })
}

/// A fitted response slope, or an upper bound when consistent with zero at 2σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub value: f64,
    pub error: f64,
    pub points: usize,
    pub upper_bound: bool,
}

fn selectivity_from_slopes(kind: SelectivityKind, slopes: &[Vec<Slope>], scale: impl Fn(usize, usize) -> f64) -> SelectivityMatrix {
    let n = slopes.len();
    let values = (0..n)
        .map(|i| (0..n).map(|j| scale(i, j) * (slopes[i][j].value / slopes[j][j].value).powi(2)).collect())
        .collect();
    let mut m = SelectivityMatrix::from_values(kind, values);
    for i in 0..n {
        for j in 0..n {
            m.upper_bound[i][j] = slopes[i][j].upper_bound;
        }
    }
    m
}

fn bounded_slope(fit: &FitResult, points: usize, floor: f64) -> Slope {
    let (k, e) = (fit.value("k"), fit.error("k"));
    if !(k.abs() > 2.0 * e) {
        Slope { value: (k.abs() + 2.0 * e).max(floor), error: e, points, upper_bound: true }
    } else {
        Slope { value: k.abs(), error: e, points, upper_bound: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiLadderConfig {
    /// Generator voltages (arbitrary units), ascending.
    pub voltages: Vec<f64>,
    pub noise_sigma: f64,
    pub decay_us: f64,
    pub min_duration_us: f64,
    pub max_duration_us: f64,
    pub samples: usize,
    /// Oscillation periods per trace when the record length allows it.
    pub periods: f64,
}

impl Default for RabiLadderConfig {
    fn default() -> Self {
        Self {
            voltages: (1..=8).map(|k| k as f64 / 8.0).collect(),
            noise_sigma: 0.02,
            decay_us: 60.0,
            min_duration_us: 0.05,
            max_duration_us: 50.0,
            samples: 256,
            periods: 8.0,
        }
    }
}

fn measure_rate(rate_mhz: f64, duration_us: f64, cfg: &RabiLadderConfig, seed: u64) -> Result<f64> {
    let delays = uniform_delays(0.0, duration_us / cfg.samples as f64, cfg.samples);
    let params = DecayParams { t_us: cfg.decay_us, f_detune_mhz: rate_mhz, amplitude: 0.45, offset: 0.5, phase: 0.0 };
    let trace = &gen_decay_trace(DecayKind::Rabi, &params, &delays, cfg.noise_sigma, seed)?[0];
    Ok(gaussian_interp_frequency(trace, crate::freq::DEFAULT_SIGMA_RATIO)?.f_est_hz * 1e-6)
}

/// Coarse oscillation rate at voltage `v`: records grow fourfold from the
/// shortest until the spectrum shows a clear peak with at least three periods.
/// Zero when nothing is found up to the longest record.
fn probe_rate(rate_mhz: &impl Fn(f64) -> f64, v: f64, cfg: &RabiLadderConfig, rng: &mut impl Rng) -> Result<f64> {
    let mut duration = cfg.min_duration_us;
    while duration <= cfg.max_duration_us * (1.0 + 1e-12) {
        let delays = uniform_delays(0.0, duration / cfg.samples as f64, cfg.samples);
        let params = DecayParams { t_us: cfg.decay_us, f_detune_mhz: rate_mhz(v), amplitude: 0.45, offset: 0.5, phase: 0.0 };
        let trace = &gen_decay_trace(DecayKind::Rabi, &params, &delays, cfg.noise_sigma, rng.random())?[0];
        let spectrum = magnitude_spectrum(&trace.signal, None);
        let half = &spectrum[..cfg.samples / 2];
        let mut sorted = half.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let (p, peak) = half.iter().enumerate().skip(2).fold((0, 0.0), |b, (k, &s)| if s > b.1 { (k, s) } else { b });
        if p >= 3 && peak > PROBE_SNR * median {
            return Ok(p as f64 / duration);
        }
        duration *= 4.0;
    }
    Ok(0.0)
}

/// Measures the Rabi-rate slope of one (qubit, line) pair. `rate_mhz(V)` is
/// the true response; the pipeline only sees noisy traces. A first trace at
/// the top voltage fixes the record length of every
/// ladder point; points slower than 3 periods per record are skipped.
pub fn measure_rabi_slope(rate_mhz: impl Fn(f64) -> f64, cfg: &RabiLadderConfig, master_seed: u64, stream: u64) -> Result<Slope> {
    let v_top = *cfg.voltages.last().ok_or_else(|| invalid("voltages", "empty ladder"))?;
    let mut rng = cell_rng(master_seed, stream);
    let floor_rate = 3.0 / cfg.max_duration_us;
    let floor = floor_rate / v_top;
    let probe = probe_rate(&rate_mhz, v_top, cfg, &mut rng)?;
    if probe < floor_rate {
        return Ok(Slope { value: floor, error: f64::NAN, points: 0, upper_bound: true });
    }
    let mut v = Vec::new();
    let mut f = Vec::new();
    for &volt in &cfg.voltages {
        let expected = probe * volt / v_top;
        if expected * cfg.max_duration_us < 3.0 {
            let _: u64 = rng.random();
            continue;
        }
        let duration = (cfg.periods / expected).min(cfg.max_duration_us);
        v.push(volt);
        f.push(measure_rate(rate_mhz(volt), duration, cfg, rng.random())?);
    }
    if v.len() < 2 {
        return Ok(Slope { value: floor, error: f64::NAN, points: v.len(), upper_bound: true });
    }
    let fit = fit_linear(&v, &f, None, true)?;
    Ok(bounded_slope(&fit, v.len(), floor))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitCrosstalkResult {
    pub slopes: Vec<Vec<Slope>>,
    pub selectivity: SelectivityMatrix,
}

/// Rabi-ladder pipeline over every (qubit, line) pair of a device whose true
/// slopes are `k_true` (MHz per generator unit). Each pair uses its own
/// random stream, so results do not depend on scheduling.
pub fn run_qubit_pipeline(k_true: &[Vec<f64>], cfg: &RabiLadderConfig, seed: u64) -> Result<QubitCrosstalkResult> {
    let n = check_square(k_true, "k_true")?;
    let slopes: Vec<Slope> = (0..n * n)
        .into_par_iter()
        .map(|c| {
            let k = k_true[c / n][c % n].abs();
            measure_rabi_slope(|v| k * v, cfg, seed, c as u64)
        })
        .collect::<Result<_>>()?;
    let slopes: Vec<Vec<Slope>> = slopes.chunks(n).map(<[Slope]>::to_vec).collect();
    if let Some(j) = (0..n).find(|&j| slopes[j][j].upper_bound) {
        return Err(Error::Degenerate(format!("no Rabi response on qubit {} from its own line", j + 1)));
    }
    let selectivity = selectivity_from_slopes(SelectivityKind::Qubit, &slopes, |_, _| 1.0);
    Ok(QubitCrosstalkResult { slopes, selectivity })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StarkLadderConfig {
    /// Ramsey detuning with no resonator drive (MHz).
    pub ramsey_detuning_mhz: f64,
    pub record_us: f64,
    pub samples: usize,
    pub noise_sigma: f64,
    pub t2_star_us: f64,
    /// Drive detuning Δ_d from the resonator (MHz).
    pub delta_d_mhz: f64,
    /// Highest generator power (W).
    pub p_max_w: f64,
    /// Decades of generator power below `p_max_w` available for the ladder.
    pub dynamic_range_decades: u32,
    /// Photon cap as a fraction of n_crit.
    pub n_cap_fraction: f64,
    pub points: usize,
}

impl Default for StarkLadderConfig {
    fn default() -> Self {
        Self {
            ramsey_detuning_mhz: 12.0,
            record_us: 20.0,
            samples: 1000,
            noise_sigma: 0.02,
            t2_star_us: 100.0,
            delta_d_mhz: 5.0,
            p_max_w: 1e-3,
            dynamic_range_decades: 9,
            n_cap_fraction: 0.1,
            points: 8,
        }
    }
}

/// Ground truth of a synthetic resonator-crosstalk device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorDevice {
    /// Drive amplitude on resonator i per √W at line j: ε_ij λ_j √Z₀ (MHz/√W).
    pub drive_per_sqrt_w: Vec<Vec<f64>>,
    pub chi_mhz: Vec<f64>,
    pub kappa_mhz: Vec<f64>,
    pub n_crit: Vec<f64>,
}

impl ResonatorDevice {
    /// True Stark shift (MHz) of qubit i with line j at power `p` (W).
    pub fn stark_shift(&self, i: usize, j: usize, delta_d_mhz: f64, p: f64) -> f64 {
        let a = self.drive_per_sqrt_w[i][j];
        let k = self.kappa_mhz[i];
        2.0 * self.chi_mhz[i] * a * a * p / (0.25 * k * k + delta_d_mhz * delta_d_mhz)
    }

    pub fn true_selectivity(&self) -> Vec<Vec<f64>> {
        let a = &self.drive_per_sqrt_w;
        (0..a.len()).map(|i| (0..a.len()).map(|j| (a[i][j] / a[j][j]).powi(2)).collect()).collect()
    }
}

fn ramsey_frequency(shift_mhz: f64, cfg: &StarkLadderConfig, seed: u64) -> Result<f64> {
    let delays = uniform_delays(0.0, cfg.record_us / cfg.samples as f64, cfg.samples);
    let params = DecayParams {
        t_us: cfg.t2_star_us,
        f_detune_mhz: cfg.ramsey_detuning_mhz + shift_mhz,
        amplitude: 0.45,
        offset: 0.5,
        phase: 0.0,
    };
    let trace = &gen_decay_trace(DecayKind::Ramsey, &params, &delays, cfg.noise_sigma, seed)?[0];
    Ok(gaussian_interp_frequency(trace, crate::freq::DEFAULT_SIGMA_RATIO)?.f_est_hz * 1e-6)
}

/// Measures the Stark slope k' (MHz/W) of qubit i under line j. Power is
/// stepped up a decade at a time until the shift is resolved; the ladder top
/// is then set so that n̄_i stays at or below the photon cap.
pub fn measure_stark_slope(
    device: &ResonatorDevice,
    i: usize,
    j: usize,
    cfg: &StarkLadderConfig,
    master_seed: u64,
    stream: u64,
) -> Result<Slope> {
    let mut rng = cell_rng(master_seed, stream);
    let shift = |p: f64| device.stark_shift(i, j, cfg.delta_d_mhz, p);
    let resolvable = 20.0 / (cfg.record_us * 1e3); // 20 kHz, well above the interpolation error
    let n_cap = cfg.n_cap_fraction * device.n_crit[i];
    let baseline = ramsey_frequency(0.0, cfg, rng.random())?;
    let mut p_top = cfg.p_max_w;
    for decade in (1..=cfg.dynamic_range_decades).rev() {
        let p = cfg.p_max_w * 10f64.powi(-(decade as i32));
        let s = ramsey_frequency(shift(p), cfg, rng.random())? - baseline;
        if s.abs() > resolvable {
            let n_est = s.abs() / (2.0 * device.chi_mhz[i].abs());
            p_top = (p * n_cap / n_est).min(cfg.p_max_w);
            break;
        }
    }
    let mut power = vec![0.0];
    let mut freq = vec![baseline];
    for k in 1..=cfg.points {
        let p = p_top * k as f64 / cfg.points as f64;
        power.push(p);
        freq.push(ramsey_frequency(shift(p), cfg, rng.random())?);
    }
    let fit = fit_linear(&power, &freq, None, false)?;
    let floor = resolvable / p_top;
    Ok(bounded_slope(&fit, power.len(), floor))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonatorCrosstalkResult {
    pub slopes: Vec<Vec<Slope>>,
    pub selectivity: SelectivityMatrix,
    pub warnings: Vec<String>,
}

pub fn run_resonator_pipeline(device: &ResonatorDevice, cfg: &StarkLadderConfig, seed: u64) -> Result<ResonatorCrosstalkResult> {
    let n = check_square(&device.drive_per_sqrt_w, "drive_per_sqrt_w")?;
    if device.chi_mhz.len() != n || device.kappa_mhz.len() != n || device.n_crit.len() != n {
        return Err(Error::GridMismatch("chi, kappa and n_crit need one entry per resonator".into()));
    }
    let slopes: Vec<Slope> = (0..n * n)
        .into_par_iter()
        .map(|c| measure_stark_slope(device, c / n, c % n, cfg, seed, c as u64))
        .collect::<Result<_>>()?;
    let slopes: Vec<Vec<Slope>> = slopes.chunks(n).map(<[Slope]>::to_vec).collect();
    if let Some(j) = (0..n).find(|&j| slopes[j][j].upper_bound) {
        return Err(Error::Degenerate(format!("no Stark response on qubit {} from its own line", j + 1)));
    }
    let k: Vec<Vec<f64>> = slopes.iter().map(|r| r.iter().map(|s| s.value).collect()).collect();
    let chis: Vec<f64> = device.chi_mhz.iter().map(|c| c.abs() * 1e6).collect();
    let drive = DetunedDrive { delta_d_hz: cfg.delta_d_mhz * 1e6, kappa_hz: device.kappa_mhz.iter().fold(0.0, |a: f64, b| a.max(*b)) * 1e6 };
    let (mut selectivity, warnings) = resonator_selectivity(&k, &chis, Some(drive))?;
    for i in 0..n {
        for j in 0..n {
            selectivity.upper_bound[i][j] = slopes[i][j].upper_bound;
        }
    }
    Ok(ResonatorCrosstalkResult { slopes, selectivity, warnings })
}
