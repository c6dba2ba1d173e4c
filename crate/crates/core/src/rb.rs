//! Randomized-benchmarking analysis: Z-correlator decays, error per gate,
//! correlated-RB subspace decompositions, the crosstalk metric η̃, seed
//! bootstrap and leakage RB.
//!
//! Subsets are bitmasks with qubit 1 at bit 0 and printed leftmost.
//! Transforms between α_S and the fixed-weight families are tensor products
//! of one 2×2 kernel per qubit, rows indexed by "qubit probed" and columns by
//! "error acts on the qubit":
//!
//! | family | kernel | inverse |
//! |---|---|---|
//! | Pauli p_S | [[1, 1], [1, −1/3]] | [[1/4, 3/4], [3/4, −3/4]] |
//! | depolarizing ε_S | [[1, 1], [1, 0]] | [[0, 1], [1, −1]] |

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::RBDataset;
use crate::error::{invalid, Error, Result};
use crate::fit::{fit_leakage_rb, fit_rb_curve, FitResult, LeakageFit, LeakageMode};
use crate::subset;
use crate::synth::iq::IqShot;
use crate::synth::rb::cell_rng;

pub const DEFAULT_RESAMPLES: usize = 100;
pub const MIN_BOOTSTRAP_SEEDS: usize = 10;

type Kernel = [[f64; 2]; 2];
const PAULI_KERNEL: Kernel = [[1.0, 1.0], [1.0, -1.0 / 3.0]];
const PAULI_INVERSE: Kernel = [[0.25, 0.75], [0.75, -0.75]];
const DEPOL_KERNEL: Kernel = [[1.0, 1.0], [1.0, 0.0]];
const DEPOL_INVERSE: Kernel = [[0.0, 1.0], [1.0, -1.0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Alpha,
    PauliP,
    DepolEps,
}

/// A family of values over all 2^n subsets, indexed by mask. Entry 0 is
/// α_∅ = 1, p_∅, or the no-error weight ε_∅ respectively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceWeights {
    pub kind: WeightKind,
    pub n_qubits: usize,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<Vec<f64>>,
}

impl SubspaceWeights {
    pub fn new(kind: WeightKind, n_qubits: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1 << n_qubits {
            return Err(Error::Incomplete(format!("{} values given, {} subsets expected", values.len(), 1 << n_qubits)));
        }
        Ok(Self { kind, n_qubits, values, errors: None })
    }

    /// α family from the 2^n − 1 non-empty entries keyed by bitstring.
    pub fn alphas_from_labels<'a>(n_qubits: usize, entries: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let mut values = vec![f64::NAN; 1 << n_qubits];
        values[0] = 1.0;
        for (label, v) in entries {
            if label.len() != n_qubits {
                return Err(Error::Validation { location: label.into(), reason: format!("label must have {n_qubits} bits") });
            }
            values[subset::parse_label(label)?] = v;
        }
        if let Some(m) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::Incomplete(format!("α missing for subset {}", subset::label(m, n_qubits))));
        }
        Self::new(WeightKind::Alpha, n_qubits, values)
    }

    pub fn get(&self, label: &str) -> Result<f64> {
        Ok(self.values[subset::parse_label(label)?])
    }

    pub fn labelled(&self) -> Vec<(String, f64)> {
        self.values.iter().enumerate().map(|(m, v)| (subset::label(m, self.n_qubits), *v)).collect()
    }

    fn expect(&self, kind: WeightKind) -> Result<()> {
        if self.kind != kind {
            return Err(invalid("weights", format!("expected {kind:?}, got {:?}", self.kind)));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Incomplete("non-finite entry in subspace weights".into()));
        }
        Ok(())
    }
}

/// out[a] = Σ_b Π_i kernel[a_i][b_i] · values[b].
fn tensor_transform(values: &[f64], n: usize, kernel: &Kernel) -> Vec<f64> {
    let mut v = values.to_vec();
    for q in 0..n {
        let bit = 1 << q;
        for base in 0..v.len() {
            if base & bit == 0 {
                let (x0, x1) = (v[base], v[base | bit]);
                v[base] = kernel[0][0] * x0 + kernel[0][1] * x1;
                v[base | bit] = kernel[1][0] * x0 + kernel[1][1] * x1;
            }
        }
    }
    v
}

pub fn pauli_to_alpha(p: &SubspaceWeights) -> Result<SubspaceWeights> {
    p.expect(WeightKind::PauliP)?;
    SubspaceWeights::new(WeightKind::Alpha, p.n_qubits, tensor_transform(&p.values, p.n_qubits, &PAULI_KERNEL))
}

pub fn alpha_to_pauli_weights(alpha: &SubspaceWeights) -> Result<SubspaceWeights> {
    alpha.expect(WeightKind::Alpha)?;
    SubspaceWeights::new(WeightKind::PauliP, alpha.n_qubits, tensor_transform(&alpha.values, alpha.n_qubits, &PAULI_INVERSE))
}

pub fn depol_to_alpha(eps: &SubspaceWeights) -> Result<SubspaceWeights> {
    eps.expect(WeightKind::DepolEps)?;
    SubspaceWeights::new(WeightKind::Alpha, eps.n_qubits, tensor_transform(&eps.values, eps.n_qubits, &DEPOL_KERNEL))
}

pub fn alpha_to_depol_weights(alpha: &SubspaceWeights) -> Result<SubspaceWeights> {
    alpha.expect(WeightKind::Alpha)?;
    SubspaceWeights::new(WeightKind::DepolEps, alpha.n_qubits, tensor_transform(&alpha.values, alpha.n_qubits, &DEPOL_INVERSE))
}

/// η̃ = Σ_{|S|>1} p⁺_S + min_{p'} Σ_{|S|≤1} |p⁺_S − p'_S| with negative p
/// clipped to zero and p' in [0, 1] summing to one. The L1 distance from a
/// non-negative vector to that simplex is |1 − Σ p⁺|, so the minimum is
/// closed-form.
pub fn crosstalk_metric(p: &SubspaceWeights) -> Result<f64> {
    p.expect(WeightKind::PauliP)?;
    let (mut high, mut low) = (0.0, 0.0);
    for (mask, &v) in p.values.iter().enumerate() {
        let v = v.max(0.0);
        if subset::weight(mask) > 1 {
            high += v;
        } else {
            low += v;
        }
    }
    Ok(high + (1.0 - low).abs())
}

/// (1 − α)/2 per Clifford divided by physical gates per Clifford.
pub fn epg_from_alpha(alpha: f64, gates_per_clifford: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid("alpha", "must lie in (0, 1]"));
    }
    if !(gates_per_clifford > 0.0) {
        return Err(invalid("gates_per_clifford", "must be > 0"));
    }
    Ok(0.5 * (1.0 - alpha) / gates_per_clifford)
}

/// F = 1 − p(e|g) − p(g|e) from labelled shots.
pub fn assignment_fidelity(shots: &[IqShot]) -> Result<f64> {
    let (mut ng, mut ne, mut eg, mut ge) = (0usize, 0usize, 0usize, 0usize);
    for s in shots {
        if s.prepared {
            ne += 1;
            ge += (!s.assigned) as usize;
        } else {
            ng += 1;
            eg += s.assigned as usize;
        }
    }
    if ng == 0 || ne == 0 {
        return Err(Error::InsufficientData("both prepared states must be present".into()));
    }
    Ok(1.0 - eg as f64 / ng as f64 - ge as f64 / ne as f64)
}

/// ⟨Z_S⟩ per length: mean over seeds of the per-seed shot average, with the
/// seed-to-seed standard deviation and standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorCurve {
    pub mask: usize,
    pub lengths: Vec<usize>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub sem: Vec<f64>,
}

/// Per-cell correlators for every subset: `table[l][s][mask]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorTable {
    pub n_qubits: usize,
    pub lengths: Vec<usize>,
    pub cells: Vec<Vec<Vec<f64>>>,
}

fn parity_sign(outcome: usize, mask: usize) -> f64 {
    if (outcome & mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl CorrelatorTable {
    pub fn from_dataset(ds: &RBDataset) -> Result<Self> {
        ds.validate()?;
        if ds.levels != 2 {
            return Err(invalid("levels", "Z correlators need two-level outcomes"));
        }
        let size = 1usize << ds.n_qubits;
        let cells = (0..ds.lengths.len())
            .map(|l| {
                (0..ds.seeds)
                    .map(|s| {
                        let h = ds.cell_histogram(l, s);
                        (0..size)
                            .map(|mask| {
                                h.iter().enumerate().map(|(o, &c)| parity_sign(o, mask) * c as f64).sum::<f64>() / ds.shots as f64
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Self { n_qubits: ds.n_qubits, lengths: ds.lengths.clone(), cells })
    }

    pub fn seeds(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }

    /// Curve for `mask` over the given seed picks (all seeds when `None`).
    pub fn curve(&self, mask: usize, picks: Option<&[usize]>) -> CorrelatorCurve {
        let all: Vec<usize> = (0..self.seeds()).collect();
        let picks = picks.unwrap_or(&all);
        let k = picks.len() as f64;
        let mut mean = Vec::with_capacity(self.lengths.len());
        let mut sd = Vec::with_capacity(self.lengths.len());
        for block in &self.cells {
            let m = picks.iter().map(|&s| block[s][mask]).sum::<f64>() / k;
            let var = if picks.len() > 1 {
                picks.iter().map(|&s| (block[s][mask] - m).powi(2)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            mean.push(m);
            sd.push(var.sqrt());
        }
        let sem = sd.iter().map(|v| v / k.sqrt()).collect();
        CorrelatorCurve { mask, lengths: self.lengths.clone(), mean, sd, sem }
    }
}

pub fn z_correlators(ds: &RBDataset, mask: usize) -> Result<CorrelatorCurve> {
    if mask == 0 || mask >= 1 << ds.n_qubits {
        return Err(invalid("subset", "must be a non-empty subset of the qubits"));
    }
    Ok(CorrelatorTable::from_dataset(ds)?.curve(mask, None))
}

fn fit_curve(curve: &CorrelatorCurve) -> Result<FitResult> {
    let m: Vec<f64> = curve.lengths.iter().map(|&v| v as f64).collect();
    let errors = curve.sem.iter().all(|e| *e > 0.0).then_some(curve.sem.as_slice());
    fit_rb_curve(&m, &curve.mean, errors)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitRb {
    pub qubit: usize,
    pub fit: FitResult,
    pub alpha: f64,
    pub alpha_err: f64,
    pub epc: f64,
    pub epc_err: f64,
    pub gates_per_clifford: f64,
    pub epg: f64,
    pub epg_err: f64,
}

/// Standard (simultaneous) RB per qubit: survival P(0) = (1 + ⟨Z_i⟩)/2 fitted to A·α^m + B.
pub fn rb_per_qubit(ds: &RBDataset) -> Result<Vec<QubitRb>> {
    let table = CorrelatorTable::from_dataset(ds)?;
    (0..ds.n_qubits)
        .map(|q| {
            let z = table.curve(1 << q, None);
            let survival = CorrelatorCurve {
                mean: z.mean.iter().map(|v| 0.5 * (1.0 + v)).collect(),
                sd: z.sd.iter().map(|v| 0.5 * v).collect(),
                sem: z.sem.iter().map(|v| 0.5 * v).collect(),
                ..z
            };
            let fit = fit_curve(&survival)?;
            let (alpha, alpha_err) = (fit.value("alpha"), fit.error("alpha"));
            let gpc = ds.gates_per_clifford(q);
            Ok(QubitRb {
                qubit: q,
                alpha,
                alpha_err,
                epc: 0.5 * (1.0 - alpha),
                epc_err: 0.5 * alpha_err,
                gates_per_clifford: gpc,
                epg: epg_from_alpha(alpha, gpc)?,
                epg_err: 0.5 * alpha_err / gpc,
                fit,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrRb {
    pub alpha: SubspaceWeights,
    pub pauli: SubspaceWeights,
    pub depol: SubspaceWeights,
    pub eta_tilde: f64,
    /// Σ_S p_S; should be one.
    pub p_sum: f64,
}

/// Correlated-RB chain from a complete α family.
pub fn corr_rb_from_alphas(alpha: SubspaceWeights) -> Result<CorrRb> {
    let pauli = alpha_to_pauli_weights(&alpha)?;
    let depol = alpha_to_depol_weights(&alpha)?;
    let eta_tilde = crosstalk_metric(&pauli)?;
    let p_sum = pauli.values.iter().sum();
    Ok(CorrRb { alpha, pauli, depol, eta_tilde, p_sum })
}

fn corr_rb_from_table(table: &CorrelatorTable, picks: Option<&[usize]>) -> Result<(CorrRb, Vec<FitResult>)> {
    let n = table.n_qubits;
    let mut values = vec![1.0; 1 << n];
    let mut fits = Vec::with_capacity((1 << n) - 1);
    for mask in 1..1usize << n {
        let fit = fit_curve(&table.curve(mask, picks))?;
        values[mask] = fit.value("alpha");
        fits.push(fit);
    }
    Ok((corr_rb_from_alphas(SubspaceWeights::new(WeightKind::Alpha, n, values)?)?, fits))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrRbAnalysis {
    pub result: CorrRb,
    /// One fit per non-empty subset, in mask order.
    pub fits: Vec<FitResult>,
    pub eta_tilde_err: Option<f64>,
    pub p_sum_err: Option<f64>,
}

/// Fits every ⟨Z_S⟩ decay and runs the correlated-RB chain. With
/// `resamples > 0` the α, p and ε errors and the η̃ error come from a seed
/// bootstrap.
pub fn corr_rb(ds: &RBDataset, resamples: usize, bootstrap_seed: u64) -> Result<CorrRbAnalysis> {
    let table = CorrelatorTable::from_dataset(ds)?;
    let (mut result, fits) = corr_rb_from_table(&table, None)?;
    if resamples == 0 {
        return Ok(CorrRbAnalysis { result, fits, eta_tilde_err: None, p_sum_err: None });
    }
    let size = 1 << ds.n_qubits;
    let boot = bootstrap_picks(table.seeds(), resamples, bootstrap_seed, |picks| {
        let (r, _) = corr_rb_from_table(&table, Some(picks))?;
        let mut v = r.alpha.values.clone();
        v.extend(&r.pauli.values);
        v.extend(&r.depol.values);
        v.push(r.eta_tilde);
        v.push(r.p_sum);
        Ok(v)
    })?;
    result.alpha.errors = Some(boot.sd[..size].to_vec());
    result.pauli.errors = Some(boot.sd[size..2 * size].to_vec());
    result.depol.errors = Some(boot.sd[2 * size..3 * size].to_vec());
    Ok(CorrRbAnalysis { result, fits, eta_tilde_err: Some(boot.sd[3 * size]), p_sum_err: Some(boot.sd[3 * size + 1]) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub resamples: usize,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

/// Bootstrap over seed indices: resample `k` seeds with replacement
/// `resamples` times, run `chain` on each pick list and report the per-output
/// mean and standard deviation. Resample r draws from its own stream of the
/// master seed, and results are reduced in index order.
pub fn bootstrap_picks<F>(k: usize, resamples: usize, seed: u64, chain: F) -> Result<Bootstrap>
where
    F: Fn(&[usize]) -> Result<Vec<f64>> + Sync,
{
    if k < MIN_BOOTSTRAP_SEEDS {
        return Err(Error::InsufficientData(format!("bootstrap needs ≥ {MIN_BOOTSTRAP_SEEDS} seeds, got {k}")));
    }
    if resamples < 2 {
        return Err(invalid("resamples", "need at least 2"));
    }
    let outputs: Vec<Vec<f64>> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = cell_rng(seed, r as u64);
            let picks: Vec<usize> = (0..k).map(|_| rng.random_range(0..k)).collect();
            chain(&picks)
        })
        .collect::<Result<_>>()?;
    let width = outputs[0].len();
    if outputs.iter().any(|o| o.len() != width) {
        return Err(invalid("chain", "every resample must return the same number of outputs"));
    }
    let nr = resamples as f64;
    let mean: Vec<f64> = (0..width).map(|c| outputs.iter().map(|o| o[c]).sum::<f64>() / nr).collect();
    let sd = (0..width)
        .map(|c| (outputs.iter().map(|o| (o[c] - mean[c]).powi(2)).sum::<f64>() / (nr - 1.0)).sqrt())
        .collect();
    Ok(Bootstrap { resamples, mean, sd })
}

/// Bootstrap with the analysis chain applied to resampled datasets.
pub fn bootstrap_errors<F>(ds: &RBDataset, resamples: usize, seed: u64, chain: F) -> Result<Bootstrap>
where
    F: Fn(&RBDataset) -> Result<Vec<f64>> + Sync,
{
    bootstrap_picks(ds.seeds, resamples, seed, |picks| chain(&ds.resample_seeds(picks)))
}

/// Leaked-population and computational-survival curves of a three-level
/// single-qubit dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageCurves {
    /// Cliffords per sequence including the inverting element.
    pub cliffords: Vec<f64>,
    pub leaked: Vec<f64>,
    pub leaked_sem: Vec<f64>,
    pub survival: Vec<f64>,
    pub survival_sem: Vec<f64>,
}

fn mean_sem(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let k = values.clone().count() as f64;
    let m = values.clone().sum::<f64>() / k;
    let var = if k > 1.0 { values.map(|v| (v - m).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
    (m, (var / k).sqrt())
}

pub fn leakage_curves(ds: &RBDataset) -> Result<LeakageCurves> {
    ds.validate()?;
    if ds.levels != 3 {
        return Err(invalid("levels", "leakage RB needs three-level outcomes"));
    }
    let mut c = LeakageCurves {
        cliffords: ds.lengths.iter().map(|&m| (m + 1) as f64).collect(),
        leaked: vec![],
        leaked_sem: vec![],
        survival: vec![],
        survival_sem: vec![],
    };
    for l in 0..ds.lengths.len() {
        let hists: Vec<Vec<u32>> = (0..ds.seeds).map(|s| ds.cell_histogram(l, s)).collect();
        let shots = ds.shots as f64;
        let (lm, ls) = mean_sem(hists.iter().map(|h| h[2] as f64 / shots));
        let (sm, ss) = mean_sem(hists.iter().map(|h| h[0] as f64 / shots));
        c.leaked.push(lm);
        c.leaked_sem.push(ls);
        c.survival.push(sm);
        c.survival_sem.push(ss);
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageRb {
    pub curves: LeakageCurves,
    pub fit: LeakageFit,
}

/// Leakage RB on a three-level dataset. Lengths are counted in Cliffords
/// including the inverse, since every physical gate can leak.
pub fn leakage_rb(ds: &RBDataset, mode: LeakageMode) -> Result<LeakageRb> {
    let curves = leakage_curves(ds)?;
    let pos = |v: &[f64]| v.iter().all(|e| *e > 0.0).then(|| v.to_vec());
    let (le, se) = (pos(&curves.leaked_sem), pos(&curves.survival_sem));
    let fit = fit_leakage_rb(
        &curves.cliffords,
        &curves.leaked,
        le.as_deref(),
        &curves.survival,
        se.as_deref(),
        mode,
        ds.gates_per_clifford(0),
    )?;
    Ok(LeakageRb { curves, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn random_alpha(n: usize, seed: u64) -> SubspaceWeights {
        let mut rng = cell_rng(seed, 0);
        let mut v: Vec<f64> = (0..1 << n).map(|_| 1.0 - 1e-3 * rng.random::<f64>()).collect();
        v[0] = 1.0;
        SubspaceWeights::new(WeightKind::Alpha, n, v).unwrap()
    }

    #[test]
    fn transforms_round_trip() {
        let a = random_alpha(4, 1);
        let back = pauli_to_alpha(&alpha_to_pauli_weights(&a).unwrap()).unwrap();
        let back2 = depol_to_alpha(&alpha_to_depol_weights(&a).unwrap()).unwrap();
        for m in 0..16 {
            assert!((back.values[m] - a.values[m]).abs() < 1e-12);
            assert!((back2.values[m] - a.values[m]).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_alpha() {
        let a = SubspaceWeights::new(WeightKind::Alpha, 4, vec![1.0; 16]).unwrap();
        let p = alpha_to_pauli_weights(&a).unwrap();
        assert!((p.values[0] - 1.0).abs() < 1e-15 && p.values[1..].iter().all(|v| v.abs() < 1e-15));
        let e = alpha_to_depol_weights(&a).unwrap();
        assert!(e.values[1..].iter().all(|v| v.abs() < 1e-15));
        assert_eq!(crosstalk_metric(&p).unwrap(), 0.0);
    }

    #[test]
    fn kernels_match_channel_oracle() {
        // Two-qubit subset-depolarizing channel, twirled by brute force.
        let eps = [0.0, 2e-3, 1e-3, 5e-4];
        let probs = oracle::subset_depolarizing_probs(2, &eps);
        let alphas = oracle::twirled_alphas(2, &probs);
        let a = SubspaceWeights::new(WeightKind::Alpha, 2, alphas.clone()).unwrap();
        let p = alpha_to_pauli_weights(&a).unwrap();
        let support = oracle::pauli_support_weights(2, &probs);
        for m in 0..4 {
            assert!((p.values[m] - support[m]).abs() < 1e-14, "p[{m}]");
        }
        let e = alpha_to_depol_weights(&a).unwrap();
        for m in 1..4 {
            assert!((e.values[m] - eps[m]).abs() < 1e-14, "eps[{m}]");
        }
    }

    #[test]
    fn eta_tilde_grid_optimality() {
        // Brute-force the min over p' on a grid for a 2-qubit p.
        let p = SubspaceWeights::new(WeightKind::PauliP, 2, vec![0.9, 0.03, -0.01, 0.05]).unwrap();
        let closed = crosstalk_metric(&p).unwrap();
        let q = [0.9, 0.03, 0.0];
        let mut best = f64::INFINITY;
        let steps = 400;
        for a in 0..=steps {
            for b in 0..=steps - a {
                let x = [a as f64 / steps as f64, b as f64 / steps as f64, (steps - a - b) as f64 / steps as f64];
                let d: f64 = (0..3).map(|k| (q[k] - x[k]).abs()).sum();
                best = best.min(d);
            }
        }
        assert!((closed - (0.05 + best)).abs() < 1e-9, "{closed} vs {}", 0.05 + best);
    }

    #[test]
    fn epg_and_fidelity() {
        assert_eq!(epg_from_alpha(1.0, 0.8).unwrap(), 0.0);
        let shots = [
            IqShot { i: 0.0, q: 0.0, prepared: true, assigned: true },
            IqShot { i: 0.0, q: 0.0, prepared: false, assigned: false },
        ];
        assert_eq!(assignment_fidelity(&shots).unwrap(), 1.0);
        assert!(assignment_fidelity(&shots[..1]).is_err());
    }

    #[test]
    fn bootstrap_requires_seeds() {
        assert!(bootstrap_picks(5, 10, 0, |_| Ok(vec![0.0])).is_err());
        let b = bootstrap_picks(20, 30, 0, |_| Ok(vec![3.0])).unwrap();
        assert_eq!(b.sd, vec![0.0]);
    }
}
