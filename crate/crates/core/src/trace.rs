//! Uniformly sampled experiment traces and their CSV form (`delay_us,signal`).

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Ramsey,
    T1,
    EchoPlus,
    EchoMinus,
    Rabi,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Ramsey => "ramsey",
            TraceKind::T1 => "t1",
            TraceKind::EchoPlus => "echo_plus",
            TraceKind::EchoMinus => "echo_minus",
            TraceKind::Rabi => "rabi",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "ramsey" => TraceKind::Ramsey,
            "t1" => TraceKind::T1,
            "echo_plus" | "echo" => TraceKind::EchoPlus,
            "echo_minus" => TraceKind::EchoMinus,
            "rabi" => TraceKind::Rabi,
            other => {
                return Err(Error::InvalidParameter {
                    field: "kind".into(),
                    reason: format!("unknown trace kind `{other}`"),
                })
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTrace {
    pub kind: TraceKind,
    pub delays_us: Vec<f64>,
    pub signal: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    delay_us: f64,
    signal: f64,
}

impl TimeTrace {
    pub fn new(kind: TraceKind, delays_us: Vec<f64>, signal: Vec<f64>) -> Result<Self> {
        if delays_us.len() != signal.len() {
            return Err(Error::GridMismatch(format!(
                "{} delays vs {} samples",
                delays_us.len(),
                signal.len()
            )));
        }
        if let Some(k) = delays_us.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Validation {
                location: format!("delays_us[{}]", k + 1),
                reason: "delays must be strictly increasing".into(),
            });
        }
        Ok(Self { kind, delays_us, signal })
    }

    pub fn len(&self) -> usize {
        self.delays_us.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays_us.is_empty()
    }

    /// Sampling step in µs; errors if the grid is not uniform to 1e-6 relative.
    pub fn uniform_step_us(&self) -> Result<f64> {
        if self.len() < 2 {
            return Err(Error::InsufficientData("need at least two samples".into()));
        }
        let dt = (self.delays_us[self.len() - 1] - self.delays_us[0]) / (self.len() - 1) as f64;
        for (k, w) in self.delays_us.windows(2).enumerate() {
            if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
                return Err(Error::NonUniformSampling(format!(
                    "step {k} is {} µs, expected {dt} µs",
                    w[1] - w[0]
                )));
            }
        }
        Ok(dt)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for (&delay_us, &signal) in self.delays_us.iter().zip(&self.signal) {
            wr.serialize(Row { delay_us, signal })?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(kind: TraceKind, r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut delays = Vec::new();
        let mut signal = Vec::new();
        for row in rd.deserialize() {
            let row: Row = row?;
            delays.push(row.delay_us);
            signal.push(row.signal);
        }
        Self::new(kind, delays, signal)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(kind: TraceKind, path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(kind, std::fs::File::open(path)?)
    }
}

/// `n` evenly spaced delays starting at `start` with step `step` (µs).
pub fn uniform_delays(start: f64, step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| start + step * k as f64).collect()
}
