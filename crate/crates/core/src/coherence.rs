//! Coherence tables from repeated T1, Ramsey and echo traces.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit::{fit_echo_pair, fit_exp_decay, fit_ramsey_with_window};
use crate::model::{coherence_limited_epg, pure_dephasing_time};
use crate::synth::decay::{gen_decay_trace, DecayKind, DecayParams};
use crate::synth::rb::cell_rng;
use crate::trace::{uniform_delays, TimeTrace};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceTruth {
    pub t1_us: f64,
    pub t2_star_us: f64,
    pub t2e_us: f64,
    #[serde(default = "default_detuning")]
    pub ramsey_detuning_mhz: f64,
}

fn default_detuning() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceSynthConfig {
    pub qubits: Vec<CoherenceTruth>,
    pub repeats: usize,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_noise")]
    pub noise_sigma: f64,
    /// Each delay sweep covers this many decay times.
    #[serde(default = "default_span")]
    pub span_decays: f64,
}

fn default_points() -> usize {
    301
}
fn default_noise() -> f64 {
    0.02
}
fn default_span() -> f64 {
    3.0
}

/// One qubit's traces: T1 and Ramsey repeats and echo `+`/`−` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoherenceSet {
    pub t1: Vec<TimeTrace>,
    pub ramsey: Vec<TimeTrace>,
    pub echo: Vec<(TimeTrace, TimeTrace)>,
}

impl CoherenceSynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.qubits.is_empty() || self.repeats == 0 {
            return Err(Error::Validation { location: "qubits/repeats".into(), reason: "must be non-empty".into() });
        }
        if self.points < 8 {
            return Err(Error::Validation { location: "points".into(), reason: "need at least 8".into() });
        }
        if !(self.span_decays > 0.0) {
            return Err(Error::Validation { location: "span_decays".into(), reason: "must be > 0".into() });
        }
        Ok(())
    }

    /// Synthetic traces, one set per qubit. Every trace draws its noise
    /// from a seed derived from `(seed, qubit, experiment, repeat)`.
    pub fn generate(&self, seed: u64) -> Result<Vec<CoherenceSet>> {
        self.validate()?;
        let mut seeds = cell_rng(seed, 0);
        let steps = (self.points - 1) as f64;
        self.qubits
            .iter()
            .map(|q| {
                let mut set = CoherenceSet::default();
                let t1 = DecayParams { t_us: q.t1_us, f_detune_mhz: 0.0, amplitude: 0.9, offset: 0.05, phase: 0.0 };
                let ramsey = DecayParams { t_us: q.t2_star_us, f_detune_mhz: q.ramsey_detuning_mhz, amplitude: 0.45, offset: 0.5, phase: 0.0 };
                let echo = DecayParams { t_us: q.t2e_us, f_detune_mhz: 0.0, amplitude: 0.45, offset: 0.5, phase: 0.0 };
                for _ in 0..self.repeats {
                    let d = |t: f64| uniform_delays(0.0, self.span_decays * t / steps, self.points);
                    let mut one = |kind, p: &DecayParams| gen_decay_trace(kind, p, &d(p.t_us), self.noise_sigma, seeds.random());
                    set.t1.extend(one(DecayKind::T1, &t1)?);
                    set.ramsey.extend(one(DecayKind::Ramsey, &ramsey)?);
                    let mut pair = one(DecayKind::Echo, &echo)?;
                    let minus = pair.pop().expect("echo pair");
                    set.echo.push((pair.pop().expect("echo pair"), minus));
                }
                Ok(set)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("no values to summarize".into()));
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self { mean, sd, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRow {
    pub qubit: usize,
    pub t1_us: Stat,
    pub t2_star_us: Stat,
    pub t2e_us: Stat,
    /// From the mean T1 and T2e.
    pub t_phi_e_us: f64,
    pub epg_coherence: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Fits every trace and tabulates means and standard deviations per qubit.
pub fn analyze_coherence(sets: &[CoherenceSet], sigma_ratio: f64, tau_g_ns: f64) -> Result<Vec<CoherenceRow>> {
    if sets.is_empty() {
        return Err(Error::InsufficientData("no coherence traces".into()));
    }
    if !(sigma_ratio > 0.0) {
        return Err(invalid("sigma_ratio", "must be > 0"));
    }
    sets.iter()
        .enumerate()
        .map(|(q, set)| {
            let mut warnings = Vec::new();
            let mut collect = |fits: Vec<crate::fit::FitResult>, name: &str| -> Result<Vec<f64>> {
                for f in &fits {
                    warnings.extend(f.warnings.iter().cloned());
                }
                Ok(fits.iter().map(|f| f.value(name)).collect())
            };
            let t1 = collect(set.t1.iter().map(fit_exp_decay).collect::<Result<_>>()?, "T")?;
            let t2s = collect(set.ramsey.iter().map(|t| fit_ramsey_with_window(t, sigma_ratio)).collect::<Result<_>>()?, "T")?;
            let t2e = collect(set.echo.iter().map(|(p, m)| fit_echo_pair(p, m)).collect::<Result<_>>()?, "T2e")?;
            let (t1, t2s, t2e) = (Stat::of(&t1)?, Stat::of(&t2s)?, Stat::of(&t2e)?);
            warnings.sort();
            warnings.dedup();
            Ok(CoherenceRow {
                qubit: q,
                t_phi_e_us: pure_dephasing_time(t1.mean, t2e.mean)?,
                epg_coherence: coherence_limited_epg(t1.mean, t2e.mean, tau_g_ns)?,
                t1_us: t1,
                t2_star_us: t2s,
                t2e_us: t2e,
                warnings,
            })
        })
        .collect()
}
