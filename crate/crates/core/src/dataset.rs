//! Randomized-benchmarking shot records.
//!
//! On disk each (length, seed) cell is one hexadecimal string with a fixed
//! number of digits per shot; bit `i` of a shot value is the outcome of qubit
//! `i`. Three-level records (leakage RB, one qubit) use the value 2 for a
//! shot found in the leaked level.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RBDataset {
    pub n_qubits: usize,
    /// 2 for qubit readout, 3 when leaked shots are labelled.
    pub levels: u8,
    pub lengths: Vec<usize>,
    pub seeds: usize,
    pub shots: usize,
    /// `outcomes[length][seed][shot]`.
    pub outcomes: Vec<Vec<Vec<u8>>>,
    /// `gate_counts[length][seed][qubit]`: physical gates in the compiled sequence.
    pub gate_counts: Vec<Vec<Vec<u32>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    n_qubits: usize,
    levels: u8,
    lengths: Vec<usize>,
    seeds: usize,
    shots: usize,
    outcomes_hex: Vec<Vec<String>>,
    gate_counts: Vec<Vec<Vec<u32>>>,
}

fn digits_per_shot(n_qubits: usize) -> usize {
    n_qubits.div_ceil(4).max(1)
}

impl RBDataset {
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > 8 {
            return Err(Error::Validation { location: "n_qubits".into(), reason: "must be in 1..=8".into() });
        }
        if !(self.levels == 2 || (self.levels == 3 && self.n_qubits == 1)) {
            return Err(Error::Validation {
                location: "levels".into(),
                reason: "must be 2, or 3 for a single qubit".into(),
            });
        }
        let max_value = if self.levels == 3 { 2 } else { (1usize << self.n_qubits) - 1 };
        if self.outcomes.len() != self.lengths.len() || self.gate_counts.len() != self.lengths.len() {
            return Err(Error::Incomplete("one outcome block and gate-count block per length required".into()));
        }
        for (l, (block, gates)) in self.outcomes.iter().zip(&self.gate_counts).enumerate() {
            if block.len() != self.seeds || gates.len() != self.seeds {
                return Err(Error::Incomplete(format!("length index {l}: expected {} seeds", self.seeds)));
            }
            for (s, (cell, g)) in block.iter().zip(gates).enumerate() {
                if cell.len() != self.shots {
                    return Err(Error::Incomplete(format!("cell ({l}, {s}): {} of {} shots", cell.len(), self.shots)));
                }
                if g.len() != self.n_qubits {
                    return Err(Error::Incomplete(format!("cell ({l}, {s}): gate counts for {} qubits", g.len())));
                }
                if let Some(k) = cell.iter().position(|&v| v as usize > max_value) {
                    return Err(Error::Validation {
                        location: format!("outcomes[{l}][{s}][{k}]"),
                        reason: format!("value {} exceeds width", cell[k]),
                    });
                }
            }
        }
        Ok(())
    }

    /// Outcome histogram of one cell, indexed by shot value.
    pub fn cell_histogram(&self, length_index: usize, seed: usize) -> Vec<u32> {
        let size = if self.levels == 3 { 3 } else { 1 << self.n_qubits };
        let mut h = vec![0u32; size];
        for &v in &self.outcomes[length_index][seed] {
            h[v as usize] += 1;
        }
        h
    }

    /// Mean physical gates per Clifford (inverse included) on `qubit`.
    pub fn gates_per_clifford(&self, qubit: usize) -> f64 {
        let mut gates = 0u64;
        let mut cliffords = 0u64;
        for (l, &m) in self.lengths.iter().enumerate() {
            for s in 0..self.seeds {
                gates += self.gate_counts[l][s][qubit] as u64;
                cliffords += m as u64 + 1;
            }
        }
        gates as f64 / cliffords as f64
    }

    /// The dataset restricted to the given seed indices, in that order.
    pub fn resample_seeds(&self, picks: &[usize]) -> Self {
        Self {
            seeds: picks.len(),
            outcomes: self.outcomes.iter().map(|b| picks.iter().map(|&s| b[s].clone()).collect()).collect(),
            gate_counts: self.gate_counts.iter().map(|b| picks.iter().map(|&s| b[s].clone()).collect()).collect(),
            ..self.clone_header()
        }
    }

    fn clone_header(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            levels: self.levels,
            lengths: self.lengths.clone(),
            seeds: self.seeds,
            shots: self.shots,
            outcomes: Vec::new(),
            gate_counts: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let width = digits_per_shot(self.n_qubits);
        let outcomes_hex = self
            .outcomes
            .iter()
            .map(|block| {
                block
                    .iter()
                    .map(|cell| cell.iter().map(|v| format!("{v:0width$x}")).collect::<String>())
                    .collect()
            })
            .collect();
        let file = DatasetFile {
            n_qubits: self.n_qubits,
            levels: self.levels,
            lengths: self.lengths.clone(),
            seeds: self.seeds,
            shots: self.shots,
            outcomes_hex,
            gate_counts: self.gate_counts.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: DatasetFile = serde_json::from_str(s)?;
        let width = digits_per_shot(file.n_qubits);
        let mut outcomes = Vec::with_capacity(file.outcomes_hex.len());
        for (l, block) in file.outcomes_hex.iter().enumerate() {
            let mut cells = Vec::with_capacity(block.len());
            for (s, hex) in block.iter().enumerate() {
                if hex.len() % width != 0 || !hex.is_ascii() {
                    return Err(Error::Validation {
                        location: format!("outcomes_hex[{l}][{s}]"),
                        reason: format!("length {} is not a multiple of {width}", hex.len()),
                    });
                }
                let cell = (0..hex.len() / width)
                    .map(|k| u8::from_str_radix(&hex[k * width..(k + 1) * width], 16))
                    .collect::<std::result::Result<Vec<u8>, _>>()
                    .map_err(|e| Error::Validation {
                        location: format!("outcomes_hex[{l}][{s}]"),
                        reason: e.to_string(),
                    })?;
                cells.push(cell);
            }
            outcomes.push(cells);
        }
        let ds = Self {
            n_qubits: file.n_qubits,
            levels: file.levels,
            lengths: file.lengths,
            seeds: file.seeds,
            shots: file.shots,
            outcomes,
            gate_counts: file.gate_counts,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> RBDataset {
        RBDataset {
            n_qubits: 4,
            levels: 2,
            lengths: vec![1, 5],
            seeds: 2,
            shots: 3,
            outcomes: vec![vec![vec![0, 15, 3], vec![1, 2, 4]], vec![vec![8, 0, 0], vec![9, 9, 9]]],
            gate_counts: vec![vec![vec![1, 2, 0, 1]; 2]; 2],
        }
    }

    #[test]
    fn hex_round_trip() {
        let d = tiny();
        let json = d.to_json().unwrap();
        assert!(json.contains("\"0f3\""));
        assert_eq!(RBDataset::from_json(&json).unwrap(), d);
    }

    #[test]
    fn incomplete_rejected() {
        let mut d = tiny();
        d.outcomes[1][0].pop();
        assert!(matches!(d.validate(), Err(Error::Incomplete(_))));
    }

    #[test]
    fn histogram_and_resample() {
        let d = tiny();
        assert_eq!(d.cell_histogram(1, 1)[9], 3);
        let r = d.resample_seeds(&[1, 1]);
        assert_eq!(r.outcomes[0], vec![vec![1, 2, 4]; 2]);
    }
}
