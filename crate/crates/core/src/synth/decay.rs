//! Decay and oscillation traces with additive Gaussian readout noise.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::trace::{TimeTrace, TraceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    T1,
    Ramsey,
    /// A `+`/`−` pair differing in the sign of the final π/2 pulse.
    Echo,
    Rabi,
}

impl DecayKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "t1" => Ok(Self::T1),
            "ramsey" => Ok(Self::Ramsey),
            "echo" => Ok(Self::Echo),
            "rabi" => Ok(Self::Rabi),
            other => Err(invalid("kind", format!("unknown experiment kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayParams {
    pub t_us: f64,
    /// Ramsey detuning or Rabi frequency (MHz); ignored for T1 and echo.
    #[serde(default)]
    pub f_detune_mhz: f64,
    pub amplitude: f64,
    pub offset: f64,
    #[serde(default)]
    pub phase: f64,
}

impl DecayParams {
    pub fn value(&self, kind: DecayKind, t_us: f64) -> f64 {
        let env = self.amplitude * (-t_us / self.t_us).exp();
        match kind {
            DecayKind::T1 | DecayKind::Echo => env + self.offset,
            DecayKind::Ramsey | DecayKind::Rabi => {
                env * (2.0 * PI * self.f_detune_mhz * t_us + self.phase).cos() + self.offset
            }
        }
    }
}

/// Generates the trace(s) for one experiment; two traces for `Echo`.
pub fn gen_decay_trace(
    kind: DecayKind,
    params: &DecayParams,
    delays_us: &[f64],
    noise_sigma: f64,
    rng_seed: u64,
) -> Result<Vec<TimeTrace>> {
    if !(params.t_us > 0.0) {
        return Err(invalid("t_us", "decay time must be > 0"));
    }
    if !(noise_sigma >= 0.0) {
        return Err(invalid("noise_sigma", "must be ≥ 0"));
    }
    let a = params.amplitude;
    let (lo, hi) = match kind {
        DecayKind::T1 => (params.offset + a.min(0.0), params.offset + a.max(0.0)),
        _ => (params.offset - a.abs(), params.offset + a.abs()),
    };
    if lo < -1e-12 || hi > 1.0 + 1e-12 {
        return Err(Error::OutOfRange(format!("noiseless signal spans [{lo}, {hi}], outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| invalid("noise_sigma", e.to_string()))?;
    let mut make = |trace_kind: TraceKind, p: &DecayParams| {
        let signal = delays_us.iter().map(|&t| p.value(kind, t) + noise.sample(&mut rng)).collect();
        TimeTrace::new(trace_kind, delays_us.to_vec(), signal)
    };
    Ok(match kind {
        DecayKind::T1 => vec![make(TraceKind::T1, params)?],
        DecayKind::Ramsey => vec![make(TraceKind::Ramsey, params)?],
        DecayKind::Rabi => vec![make(TraceKind::Rabi, params)?],
        DecayKind::Echo => {
            let minus = DecayParams { amplitude: -params.amplitude, ..*params };
            vec![make(TraceKind::EchoPlus, params)?, make(TraceKind::EchoMinus, &minus)?]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::fit_echo_pair;
    use crate::trace::uniform_delays;

    fn params(t: f64, f: f64) -> DecayParams {
        DecayParams { t_us: t, f_detune_mhz: f, amplitude: 0.45, offset: 0.5, phase: 0.0 }
    }

    #[test]
    fn t1_value_at_decay_time() {
        let tr = gen_decay_trace(DecayKind::T1, &params(179.0, 0.0), &[0.0, 179.0], 0.0, 0).unwrap();
        assert!((tr[0].signal[1] - (0.45 / std::f64::consts::E + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn ramsey_zero_crossings() {
        let p = DecayParams { amplitude: 0.5, ..params(1e12, 0.25) };
        let tr = gen_decay_trace(DecayKind::Ramsey, &p, &[1.0, 3.0, 5.0], 0.0, 0).unwrap();
        assert!(tr[0].signal.iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn echo_pair_recovery() {
        let delays = uniform_delays(0.0, 1.5, 200);
        let tr = gen_decay_trace(DecayKind::Echo, &params(116.0, 0.0), &delays, 0.02, 11).unwrap();
        assert_eq!(tr.len(), 2);
        let fit = fit_echo_pair(&tr[0], &tr[1]).unwrap();
        assert!((fit.value("T2e") / 116.0 - 1.0).abs() < 0.02);
    }

    #[test]
    fn seeded_and_validated() {
        let d = uniform_delays(0.0, 1.0, 30);
        let a = gen_decay_trace(DecayKind::T1, &params(50.0, 0.0), &d, 0.05, 4).unwrap();
        assert_eq!(a, gen_decay_trace(DecayKind::T1, &params(50.0, 0.0), &d, 0.05, 4).unwrap());
        assert!(gen_decay_trace(DecayKind::T1, &params(-1.0, 0.0), &d, 0.0, 0).is_err());
        assert!(DecayKind::parse("spin_lock").is_err());
    }
}
