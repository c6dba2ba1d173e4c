//! Pauli-frame Monte-Carlo simulation of simultaneous single-qubit RB.
//!
//! Each qubit runs its own random Clifford sequence followed by the
//! inverting element. After every Clifford layer (the inverse included) at
//! most one subset-depolarizing event fires: subset S with probability ε_S,
//! applying a Pauli drawn uniformly from all 4^|S| strings on S. Errors are
//! pushed to the end of the circuit through the remaining Cliffords; an X or
//! Y component flips the measured bit.
//!
//! Stream splitting: cell (length index `l`, seed `s`) draws from
//! `ChaCha8Rng::seed_from_u64(master)` with stream `l · seeds + s`, so every
//! cell is reproducible on its own and independent of the worker count.
//!
//! Leakage (one qubit only) is a per-physical-gate Markov chain: a
//! computational qubit leaks with probability `leakage_per_gate`, a leaked
//! one returns with probability `seepage_per_gate` into a fully mixed
//! computational state.

use std::collections::BTreeMap;
use std::path::Path;

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Geometric;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::clifford::{clifford_compile, CliffordGroup, IDENTITY};
use crate::dataset::RBDataset;
use crate::error::{Error, Result};
use crate::subset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseChannelSpec {
    pub n_qubits: usize,
    /// ε_S keyed by subset bitstring (qubit 1 leftmost).
    pub eps: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leakage_per_gate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seepage_per_gate: Option<f64>,
}

impl NoiseChannelSpec {
    pub fn noiseless(n_qubits: usize) -> Self {
        Self { n_qubits, eps: BTreeMap::new(), leakage_per_gate: None, seepage_per_gate: None }
    }

    /// Independent single-qubit depolarizing with probability `p[i]` on qubit i,
    /// written as mutually exclusive subset events ε_S = Π_{i∈S} pᵢ Π_{i∉S}(1 − pᵢ).
    pub fn product(p: &[f64]) -> Self {
        let n = p.len();
        let eps = (1..1usize << n)
            .map(|mask| {
                let w: f64 = (0..n).map(|i| if mask >> i & 1 == 1 { p[i] } else { 1.0 - p[i] }).product();
                (subset::label(mask, n), w)
            })
            .filter(|(_, w)| *w > 0.0)
            .collect();
        Self { n_qubits: n, eps, leakage_per_gate: None, seepage_per_gate: None }
    }

    pub fn with_subset(mut self, label: &str, eps: f64) -> Self {
        *self.eps.entry(label.to_string()).or_insert(0.0) += eps;
        self
    }

    /// ε indexed by subset mask (entry 0 is the no-event probability).
    pub fn eps_by_mask(&self) -> Result<Vec<f64>> {
        let n = self.n_qubits;
        if n == 0 || n > 8 {
            return Err(Error::InvalidParameter { field: "n_qubits".into(), reason: "must be in 1..=8".into() });
        }
        let mut v = vec![0.0; 1 << n];
        for (label, &e) in &self.eps {
            let loc = || format!("eps[\"{label}\"]");
            if label.len() != n {
                return Err(Error::Validation { location: loc(), reason: format!("label must have {n} bits") });
            }
            let mask = subset::parse_label(label)?;
            if mask == 0 {
                return Err(Error::Validation { location: loc(), reason: "empty subset".into() });
            }
            if !(e >= 0.0) {
                return Err(Error::Validation { location: loc(), reason: "must be >= 0".into() });
            }
            v[mask] += e;
        }
        let total: f64 = v.iter().sum();
        if total > 1.0 {
            return Err(Error::Validation { location: "eps".into(), reason: format!("Σ ε_S = {total} exceeds 1") });
        }
        v[0] = 1.0 - total;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        self.eps_by_mask()?;
        for (field, v) in [("leakage_per_gate", self.leakage_per_gate), ("seepage_per_gate", self.seepage_per_gate)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Validation { location: field.into(), reason: "must lie in [0, 1]".into() });
                }
                if self.n_qubits != 1 {
                    return Err(Error::Validation { location: field.into(), reason: "leakage needs n_qubits = 1".into() });
                }
            }
        }
        Ok(())
    }

    pub fn has_leakage(&self) -> bool {
        self.leakage_per_gate.is_some() || self.seepage_per_gate.is_some()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let s: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbRunSpec {
    pub lengths: Vec<usize>,
    pub seeds: usize,
    pub shots: usize,
    /// Symmetric per-qubit readout bit-flip probability.
    #[serde(default)]
    pub readout_error: f64,
}

impl RbRunSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() || self.seeds == 0 || self.shots == 0 {
            return Err(Error::Validation { location: "lengths/seeds/shots".into(), reason: "must be non-empty".into() });
        }
        if !(0.0..=0.5).contains(&self.readout_error) {
            return Err(Error::Validation { location: "readout_error".into(), reason: "must lie in [0, 0.5]".into() });
        }
        Ok(())
    }
}

/// `count` distinct lengths from 1 to `max`, roughly log-spaced.
pub fn log_spaced_lengths(max: usize, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(count);
    for k in 0..count {
        let raw = (max as f64).powf(k as f64 / (count.max(2) - 1) as f64).round() as usize;
        let floor = out.last().map_or(1, |v| v + 1);
        out.push(raw.max(floor));
    }
    out
}

pub fn cell_rng(master: u64, cell: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(cell);
    rng
}

/// Geometric sampler that never fires when `p` is zero.
enum Skip {
    Never,
    Always,
    Geometric(Geometric),
}

impl Skip {
    fn new(p: f64) -> Self {
        if p <= 0.0 {
            Skip::Never
        } else if p >= 1.0 {
            Skip::Always
        } else {
            Skip::Geometric(Geometric::new(p).expect("p in (0, 1)"))
        }
    }

    /// Number of trials up to and including the next success, or `None`.
    fn next<R: Rng>(&self, rng: &mut R) -> Option<u64> {
        match self {
            Skip::Never => None,
            Skip::Always => Some(1),
            Skip::Geometric(g) => Some(g.sample(rng).saturating_add(1)),
        }
    }
}

struct CellOutput {
    shots: Vec<u8>,
    gates: Vec<u32>,
}

fn simulate_cell(
    m: usize,
    n: usize,
    events: &[(usize, f64)],
    event_skip: &Skip,
    leak: Option<(&Skip, &Skip)>,
    shots: usize,
    readout_error: f64,
    rng: &mut ChaCha8Rng,
) -> CellOutput {
    let group = CliffordGroup::get();
    let pick = Uniform::new(0u8, 24).expect("range");
    // suffix[q][l]: Clifford applied after layer l on qubit q (layer m is the inverse).
    let mut suffix = Vec::with_capacity(n);
    let mut gates = Vec::with_capacity(n);
    for _ in 0..n {
        let seq: Vec<u8> = (0..m).map(|_| pick.sample(rng)).collect();
        let compiled = clifford_compile(&seq);
        gates.push(compiled.physical_gates as u32);
        let layers = &compiled.cliffords;
        let mut s = vec![IDENTITY; m + 1];
        for l in (0..m).rev() {
            s[l] = group.compose(s[l + 1], layers[l + 1]);
        }
        suffix.push(s);
    }
    let layers = (m + 1) as u64;
    let total_gates = gates[0] as u64;
    let mut out = Vec::with_capacity(shots);
    for _ in 0..shots {
        let mut flips = 0u8;
        let mut layer = 0u64;
        while let Some(step) = event_skip.next(rng) {
            layer += step;
            if layer > layers {
                break;
            }
            let u: f64 = rng.random();
            let mask = events
                .iter()
                .find(|(_, c)| u < *c)
                .map_or(events[events.len() - 1].0, |(mask, _)| *mask);
            for q in 0..n {
                if mask >> q & 1 == 1 {
                    let pauli = rng.random_range(0..4u8);
                    if pauli != 0 {
                        let image = group.conjugate(suffix[q][(layer - 1) as usize], pauli);
                        if image == 1 || image == 2 {
                            flips ^= 1 << q;
                        }
                    }
                }
            }
        }
        if let Some((up, down)) = leak {
            // 0: never left, 1: leaked, 2: returned fully mixed.
            let mut state = 0u8;
            let mut pos = 0u64;
            loop {
                let step = if state == 1 { down.next(rng) } else { up.next(rng) };
                let Some(step) = step else { break };
                pos += step;
                if pos > total_gates {
                    break;
                }
                state = if state == 1 { 2 } else { 1 };
            }
            match state {
                1 => {
                    out.push(2);
                    continue;
                }
                2 => flips = rng.random_range(0..2u8),
                _ => {}
            }
        }
        if readout_error > 0.0 {
            for q in 0..n {
                if rng.random::<f64>() < readout_error {
                    flips ^= 1 << q;
                }
            }
        }
        out.push(flips);
    }
    CellOutput { shots: out, gates }
}

/// Simulates an RB experiment; deterministic in `rng_seed` and independent of
/// the rayon pool size.
pub fn simulate_rb(channel: &NoiseChannelSpec, run: &RbRunSpec, rng_seed: u64) -> Result<RBDataset> {
    channel.validate()?;
    run.validate()?;
    let n = channel.n_qubits;
    let eps = channel.eps_by_mask()?;
    let p_event: f64 = eps[1..].iter().sum();
    // Cumulative distribution over subsets conditioned on an event.
    let mut acc = 0.0;
    let events: Vec<(usize, f64)> = eps
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, e)| **e > 0.0)
        .map(|(mask, e)| {
            acc += e / p_event;
            (mask, acc)
        })
        .collect();
    let event_skip = Skip::new(if events.is_empty() { 0.0 } else { p_event });
    let leak_up = Skip::new(channel.leakage_per_gate.unwrap_or(0.0));
    let leak_down = Skip::new(channel.seepage_per_gate.unwrap_or(0.0));
    let leak = channel.has_leakage().then_some((&leak_up, &leak_down));
    let cells: Vec<(usize, usize)> = (0..run.lengths.len()).flat_map(|l| (0..run.seeds).map(move |s| (l, s))).collect();
    let results: Vec<CellOutput> = cells
        .par_iter()
        .map(|&(l, s)| {
            let mut rng = cell_rng(rng_seed, (l * run.seeds + s) as u64);
            simulate_cell(run.lengths[l], n, &events, &event_skip, leak, run.shots, run.readout_error, &mut rng)
        })
        .collect();
    let mut outcomes = vec![Vec::with_capacity(run.seeds); run.lengths.len()];
    let mut gate_counts = vec![Vec::with_capacity(run.seeds); run.lengths.len()];
    for ((l, _), cell) in cells.into_iter().zip(results) {
        outcomes[l].push(cell.shots);
        gate_counts[l].push(cell.gates);
    }
    Ok(RBDataset {
        n_qubits: n,
        levels: if channel.has_leakage() { 3 } else { 2 },
        lengths: run.lengths.clone(),
        seeds: run.seeds,
        shots: run.shots,
        outcomes,
        gate_counts,
    })
}

/// Z-correlator decay constants α_S implied by a subset-depolarizing channel:
/// α_S = Σ_{T ∩ S = ∅} ε_T, with the no-event weight at T = ∅.
pub fn channel_alphas(eps_by_mask: &[f64]) -> Vec<f64> {
    (0..eps_by_mask.len())
        .map(|s| eps_by_mask.iter().enumerate().filter(|(t, _)| t & s == 0).map(|(_, e)| e).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_channel_weights() {
        let c = NoiseChannelSpec::product(&[0.1, 0.2]);
        let e = c.eps_by_mask().unwrap();
        assert!((e[0] - 0.72).abs() < 1e-15 && (e[3] - 0.02).abs() < 1e-15);
        let a = channel_alphas(&e);
        assert!((a[3] - 0.9 * 0.8).abs() < 1e-15);
    }

    #[test]
    fn noiseless_all_zero() {
        let run = RbRunSpec { lengths: vec![0, 3, 50], seeds: 3, shots: 20, readout_error: 0.0 };
        let d = simulate_rb(&NoiseChannelSpec::noiseless(3), &run, 1).unwrap();
        assert!(d.outcomes.iter().flatten().flatten().all(|&v| v == 0));
        d.validate().unwrap();
    }

    #[test]
    fn reproducible() {
        let run = RbRunSpec { lengths: vec![5, 40], seeds: 4, shots: 50, readout_error: 0.01 };
        let ch = NoiseChannelSpec::product(&[0.01, 0.02]);
        assert_eq!(simulate_rb(&ch, &run, 9).unwrap(), simulate_rb(&ch, &run, 9).unwrap());
        assert_ne!(simulate_rb(&ch, &run, 9).unwrap(), simulate_rb(&ch, &run, 10).unwrap());
    }

    #[test]
    fn bad_channels_rejected() {
        let c = NoiseChannelSpec::noiseless(2).with_subset("1", 0.1);
        assert!(c.validate().is_err());
        let c = NoiseChannelSpec::noiseless(2).with_subset("11", 0.7).with_subset("10", 0.7);
        assert!(c.validate().is_err());
        let mut c = NoiseChannelSpec::noiseless(2);
        c.leakage_per_gate = Some(1e-4);
        assert!(c.validate().is_err());
    }
}
