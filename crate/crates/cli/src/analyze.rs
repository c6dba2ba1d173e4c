use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};

use dispersive_kit::coherence::{analyze_coherence, CoherenceSet};
use dispersive_kit::crosstalk::{
    bound_parasitic_chi, bound_parasitic_j, run_qubit_pipeline, run_resonator_pipeline, QubitCrosstalkResult, RabiLadderConfig,
    ResonatorCrosstalkResult, ResonatorDevice, SelectivityMatrix, StarkLadderConfig,
};
use dispersive_kit::dataset::RBDataset;
use dispersive_kit::fit::LeakageMode;
use dispersive_kit::rb::{corr_rb, corr_rb_from_alphas, leakage_rb, rb_per_qubit, CorrelatorTable, SubspaceWeights};
use dispersive_kit::reference::GATE_DURATION_NS;
use dispersive_kit::subset;
use dispersive_kit::trace::{TimeTrace, TraceKind};

use crate::manifest;
use crate::output::{num, read_json, OutDir};
use crate::AnalysisKind;

pub struct Options {
    pub input: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub sigma_ratio: f64,
    pub resamples: usize,
    pub seed: Option<u64>,
}

pub fn run(kind: AnalysisKind, opts: &Options) -> anyhow::Result<()> {
    let mut dir = OutDir::create(&opts.out)?;
    let mut seed_used = None;
    let mut inputs: Vec<&Path> = Vec::new();
    match kind {
        AnalysisKind::Coherence => {
            let input = require_input(opts)?;
            inputs.push(input);
            coherence(input, opts, &mut dir)?
        }
        AnalysisKind::Rb => {
            let input = require_input(opts)?;
            inputs.push(input);
            rb(&load_dataset(input)?, &mut dir)?
        }
        AnalysisKind::CorrRb => {
            let input = require_input(opts)?;
            inputs.push(input);
            let seed = manifest::resolve_seed(opts.seed, None)?;
            seed_used = Some(seed);
            corr(input, opts.resamples, seed, &mut dir)?
        }
        AnalysisKind::LeakageRb => {
            let input = require_input(opts)?;
            inputs.push(input);
            leakage(&load_dataset(input)?, &mut dir)?
        }
        AnalysisKind::Crosstalk => {
            let config = opts.config.as_deref().or(opts.input.as_deref()).ok_or_else(|| anyhow!("crosstalk needs --config"))?;
            let cfg: CrosstalkConfig = read_json(config)?;
            let seed = manifest::resolve_seed(opts.seed, cfg.seed)?;
            seed_used = Some(seed);
            crosstalk(&cfg, seed, &mut dir)?
        }
    }
    let root = dir.root().to_path_buf();
    manifest::write(&root, &format!("analyze {}", kind.name()), opts.config.as_deref(), seed_used, &inputs, dir.into_written())
}

fn require_input(opts: &Options) -> anyhow::Result<&Path> {
    opts.input.as_deref().ok_or_else(|| anyhow!("--input is required"))
}

/// A dataset file, or a directory holding `dataset.json`.
fn load_dataset(input: &Path) -> anyhow::Result<RBDataset> {
    let path = if input.is_dir() { input.join("dataset.json") } else { input.to_path_buf() };
    if !path.exists() {
        bail!("no data: {} contains no RB dataset", input.display());
    }
    RBDataset::load(&path).with_context(|| format!("loading {}", path.display()))
}

fn coherence_sets(input: &Path) -> anyhow::Result<Vec<CoherenceSet>> {
    let mut files: BTreeMap<(usize, TraceKind, usize), PathBuf> = BTreeMap::new();
    let entries = std::fs::read_dir(input).with_context(|| format!("reading {}", input.display()))?;
    for entry in entries {
        let path = entry?.path();
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()).filter(|_| path.extension().is_some_and(|e| e == "csv")) else {
            continue;
        };
        let Some((q, rest)) = stem.strip_prefix('q').and_then(|s| s.split_once('_')) else { continue };
        let Some((kind, rep)) = rest.rsplit_once('_') else { continue };
        let (Ok(q), Ok(kind), Ok(rep)) = (q.parse::<usize>(), TraceKind::parse(kind), rep.parse::<usize>()) else { continue };
        files.insert((q, kind, rep), path);
    }
    if files.is_empty() {
        bail!("no data: {} contains no q<i>_<kind>_<repeat>.csv traces", input.display());
    }
    let n = files.keys().map(|k| k.0).max().unwrap_or(0) + 1;
    let mut sets = vec![CoherenceSet::default(); n];
    let load = |kind, path: &Path| TimeTrace::load(kind, path).with_context(|| format!("loading {}", path.display()));
    for ((q, kind, rep), path) in &files {
        match kind {
            TraceKind::T1 => sets[*q].t1.push(load(*kind, path)?),
            TraceKind::Ramsey => sets[*q].ramsey.push(load(*kind, path)?),
            TraceKind::EchoPlus => {
                let minus = files
                    .get(&(*q, TraceKind::EchoMinus, *rep))
                    .ok_or_else(|| anyhow!("{} has no echo_minus partner", path.display()))?;
                sets[*q].echo.push((load(*kind, path)?, load(TraceKind::EchoMinus, minus)?));
            }
            TraceKind::EchoMinus | TraceKind::Rabi => {}
        }
    }
    for (q, s) in sets.iter().enumerate() {
        if s.t1.is_empty() || s.ramsey.is_empty() || s.echo.is_empty() {
            bail!("qubit {q} needs t1, ramsey and echo traces");
        }
    }
    Ok(sets)
}

fn coherence(input: &Path, opts: &Options, dir: &mut OutDir) -> anyhow::Result<()> {
    let rows = analyze_coherence(&coherence_sets(input)?, opts.sigma_ratio, GATE_DURATION_NS)?;
    dir.json("coherence.json", &rows)?;
    dir.csv(
        "coherence.csv",
        &[
            "qubit", "T1_mean_us", "T1_sd_us", "T2_star_mean_us", "T2_star_sd_us", "T2e_mean_us", "T2e_sd_us", "T_phi_e_us", "EPG_coherence",
        ],
        rows.iter().map(|r| {
            vec![
                (r.qubit + 1).to_string(),
                num(r.t1_us.mean),
                num(r.t1_us.sd),
                num(r.t2_star_us.mean),
                num(r.t2_star_us.sd),
                num(r.t2e_us.mean),
                num(r.t2e_us.sd),
                num(r.t_phi_e_us),
                num(r.epg_coherence),
            ]
        }),
    )
}

fn correlator_rows(table: &CorrelatorTable, masks: impl Iterator<Item = usize>) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for mask in masks {
        let c = table.curve(mask, None);
        for (l, m) in c.lengths.iter().enumerate() {
            rows.push(vec![subset::label(mask, table.n_qubits), m.to_string(), num(c.mean[l]), num(c.sd[l]), num(c.sem[l])]);
        }
    }
    rows
}

fn rb(ds: &RBDataset, dir: &mut OutDir) -> anyhow::Result<()> {
    let rows = rb_per_qubit(ds)?;
    dir.json("rb.json", &rows)?;
    let table = CorrelatorTable::from_dataset(ds)?;
    dir.csv("rb_curves.csv", &["subset", "length", "z_mean", "z_sd", "z_sem"], correlator_rows(&table, (0..ds.n_qubits).map(|q| 1 << q)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaTable {
    n_qubits: usize,
    alphas: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct CorrReport<'a> {
    source: &'a str,
    #[serde(flatten)]
    analysis: CorrView<'a>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum CorrView<'a> {
    Full(&'a dispersive_kit::rb::CorrRbAnalysis),
    Table(&'a dispersive_kit::rb::CorrRb),
}

fn corr(input: &Path, resamples: usize, seed: u64, dir: &mut OutDir) -> anyhow::Result<()> {
    let file = if input.is_dir() { input.join("dataset.json") } else { input.to_path_buf() };
    if !file.exists() {
        bail!("no data: {} contains no RB dataset or α table", input.display());
    }
    let value: serde_json::Value = read_json(&file)?;
    let (result, report) = if value.get("alphas").is_some() {
        let t: AlphaTable = serde_json::from_value(value)?;
        let alpha = SubspaceWeights::alphas_from_labels(t.n_qubits, t.alphas.iter().map(|(k, v)| (k.as_str(), *v)))?;
        let r = corr_rb_from_alphas(alpha)?;
        dir.json("corr_rb.json", &CorrReport { source: "alpha_table", analysis: CorrView::Table(&r) })?;
        (r, None)
    } else {
        let ds = RBDataset::load(&file)?;
        let a = corr_rb(&ds, resamples, seed)?;
        dir.json("corr_rb.json", &CorrReport { source: "dataset", analysis: CorrView::Full(&a) })?;
        let table = CorrelatorTable::from_dataset(&ds)?;
        dir.csv("correlators.csv", &["subset", "length", "z_mean", "z_sd", "z_sem"], correlator_rows(&table, 1..1 << ds.n_qubits))?;
        (a.result.clone(), Some(a))
    };
    let err = |w: &SubspaceWeights, m: usize| w.errors.as_ref().map_or(String::new(), |e| num(e[m]));
    let n = result.alpha.n_qubits;
    dir.csv(
        "corr_rb.csv",
        &["subset", "alpha", "alpha_err", "p", "p_err", "eps", "eps_err"],
        (0..1usize << n).map(|m| {
            vec![
                subset::label(m, n),
                num(result.alpha.values[m]),
                err(&result.alpha, m),
                num(result.pauli.values[m]),
                err(&result.pauli, m),
                num(result.depol.values[m]),
                err(&result.depol, m),
            ]
        }),
    )?;
    if let Some(a) = report {
        eprintln!("eta_tilde = {:e} ± {:e}", a.result.eta_tilde, a.eta_tilde_err.unwrap_or(f64::NAN));
    }
    Ok(())
}

#[derive(Serialize)]
struct LeakageReport {
    three_param: dispersive_kit::fit::LeakageFit,
    four_param: dispersive_kit::fit::LeakageFit,
}

fn leakage(ds: &RBDataset, dir: &mut OutDir) -> anyhow::Result<()> {
    let three = leakage_rb(ds, LeakageMode::ThreeParam)?;
    let four = leakage_rb(ds, LeakageMode::FourParam)?;
    let c = &three.curves;
    dir.csv(
        "leakage_curves.csv",
        &["length", "cliffords", "leaked", "leaked_sem", "survival", "survival_sem"],
        (0..c.cliffords.len()).map(|k| {
            vec![
                ds.lengths[k].to_string(),
                num(c.cliffords[k]),
                num(c.leaked[k]),
                num(c.leaked_sem[k]),
                num(c.survival[k]),
                num(c.survival_sem[k]),
            ]
        }),
    )?;
    dir.json("leakage_rb.json", &LeakageReport { three_param: three.fit, four_param: four.fit })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QubitSection {
    /// True Rabi slopes (MHz per generator unit), row = qubit, column = line.
    k_true_mhz: Vec<Vec<f64>>,
    #[serde(default)]
    ladder: RabiLadderConfig,
    /// Qubit frequencies for the parasitic-J bound.
    qubit_freqs_ghz: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ResonatorSection {
    device: ResonatorDevice,
    #[serde(default)]
    ladder: StarkLadderConfig,
    /// Frequency resolution for the parasitic-χ bound.
    #[serde(default = "default_resolution")]
    freq_resolution_hz: f64,
}

fn default_resolution() -> f64 {
    1e3
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CrosstalkConfig {
    seed: Option<u64>,
    qubit: Option<QubitSection>,
    resonator: Option<ResonatorSection>,
}

#[derive(Serialize)]
struct QubitReport {
    #[serde(flatten)]
    result: QubitCrosstalkResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    j_bound_khz: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct ResonatorReport {
    #[serde(flatten)]
    result: ResonatorCrosstalkResult,
    /// Per qubit, at n̄ = photon cap.
    chi_bound_hz: Vec<f64>,
}

#[derive(Serialize)]
struct CrosstalkReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    qubit: Option<QubitReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    resonator: Option<ResonatorReport>,
}

fn selectivity_rows(s: &SelectivityMatrix) -> Vec<Vec<String>> {
    let n = s.n();
    (0..n * n)
        .map(|c| {
            let (i, j) = (c / n, c % n);
            vec![(i + 1).to_string(), (j + 1).to_string(), num(s.values[i][j]), num(s.db[i][j]), s.upper_bound[i][j].to_string()]
        })
        .collect()
}

fn crosstalk(cfg: &CrosstalkConfig, seed: u64, dir: &mut OutDir) -> anyhow::Result<()> {
    if cfg.qubit.is_none() && cfg.resonator.is_none() {
        bail!("no data: crosstalk config has neither a `qubit` nor a `resonator` section");
    }
    let header = ["element", "line", "phi", "phi_dB", "upper_bound"];
    let mut report = CrosstalkReport { qubit: None, resonator: None };
    if let Some(q) = &cfg.qubit {
        let result = run_qubit_pipeline(&q.k_true_mhz, &q.ladder, seed)?;
        let j_bound_khz = q.qubit_freqs_ghz.as_ref().map(|f| bound_parasitic_j(&result.selectivity, f)).transpose()?;
        dir.csv("selectivity_qubit.csv", &header, selectivity_rows(&result.selectivity))?;
        report.qubit = Some(QubitReport { result, j_bound_khz });
    }
    if let Some(r) = &cfg.resonator {
        let result = run_resonator_pipeline(&r.device, &r.ladder, seed)?;
        let chi_bound_hz = r
            .device
            .n_crit
            .iter()
            .map(|nc| bound_parasitic_chi(r.freq_resolution_hz, r.ladder.n_cap_fraction * nc))
            .collect::<Result<_, _>>()?;
        for w in &result.warnings {
            eprintln!("warning: {w}");
        }
        dir.csv("selectivity_resonator.csv", &header, selectivity_rows(&result.selectivity))?;
        report.resonator = Some(ResonatorReport { result, chi_bound_hz });
    }
    dir.json("crosstalk.json", &report)
}
