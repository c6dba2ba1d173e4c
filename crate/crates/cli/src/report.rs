use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use dispersive_kit::coherence::CoherenceRow;
use dispersive_kit::model::{coherence_limited_epg, pure_dephasing_time, DeviceParams};
use dispersive_kit::rb::QubitRb;
use dispersive_kit::reference::{self, GATE_DURATION_NS};

use crate::manifest;
use crate::output::{read_json, OutDir};

#[derive(Serialize)]
struct DeviceRow {
    qubit: usize,
    omega_q_ghz: f64,
    alpha_mhz: f64,
    omega_r_ghz: f64,
    g_mhz: f64,
    chi_recorded_khz: f64,
    chi_predicted_khz: f64,
    n_crit: f64,
    t_phi_e_us: Option<f64>,
    epg_coherence: Option<f64>,
}

fn device_rows(dev: &DeviceParams) -> anyhow::Result<Vec<DeviceRow>> {
    let checks = dev.chi_cross_check()?;
    dev.qubits
        .iter()
        .zip(&dev.resonators)
        .zip(&dev.pairs)
        .zip(checks)
        .enumerate()
        .map(|(k, (((q, r), p), c))| {
            let (t_phi_e_us, epg_coherence) = match (q.t1_us, q.t2_echo_us) {
                (Some(t1), Some(t2e)) => (Some(pure_dephasing_time(t1, t2e)?), Some(coherence_limited_epg(t1, t2e, GATE_DURATION_NS)?)),
                _ => (None, None),
            };
            Ok(DeviceRow {
                qubit: k + 1,
                omega_q_ghz: q.omega_q_ghz,
                alpha_mhz: q.alpha_mhz,
                omega_r_ghz: r.omega_r_ghz,
                g_mhz: p.g_mhz,
                chi_recorded_khz: p.chi_khz,
                chi_predicted_khz: c.predicted_khz,
                n_crit: p.n_crit()?,
                t_phi_e_us,
                epg_coherence,
            })
        })
        .collect()
}

fn opt(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map_or("–".into(), f)
}

fn render_device(md: &mut String, rows: &[DeviceRow]) {
    md.push_str("## Device parameters\n\n| Qubit | ω_q/2π (GHz) | α/2π (MHz) | ω_r/2π (GHz) | g/2π (MHz) | χ recorded (kHz) | χ predicted (kHz) | n_crit | T_φ,e (µs) | EPG_coh (×10⁻⁴) |\n|---|---|---|---|---|---|---|---|---|---|\n");
    for r in rows {
        let _ = writeln!(
            md,
            "| Q{} | {:.3} | {:.0} | {:.3} | {:.1} | {:.0} | {:.1} | {:.0} | {} | {} |",
            r.qubit,
            r.omega_q_ghz,
            r.alpha_mhz,
            r.omega_r_ghz,
            r.g_mhz,
            r.chi_recorded_khz,
            r.chi_predicted_khz,
            r.n_crit,
            opt(r.t_phi_e_us, |v| format!("{v:.0}")),
            opt(r.epg_coherence, |v| format!("{:.2}", v * 1e4)),
        );
    }
    md.push('\n');
}

fn render_coherence(md: &mut String, rows: &[CoherenceRow]) {
    md.push_str("## Coherence\n\n| Qubit | T1 (µs) | T2* (µs) | T2,e (µs) | T_φ,e (µs) | EPG_coh (×10⁻⁴) |\n|---|---|---|---|---|---|\n");
    for r in rows {
        let _ = writeln!(
            md,
            "| Q{} | {:.0} ± {:.0} | {:.0} ± {:.0} | {:.0} ± {:.0} | {:.0} | {:.2} |",
            r.qubit + 1,
            r.t1_us.mean,
            r.t1_us.sd,
            r.t2_star_us.mean,
            r.t2_star_us.sd,
            r.t2e_us.mean,
            r.t2e_us.sd,
            r.t_phi_e_us,
            r.epg_coherence * 1e4
        );
    }
    md.push('\n');
}

fn render_rb(md: &mut String, rows: &[QubitRb]) {
    md.push_str("## Randomized benchmarking\n\n| Qubit | α | EPC (×10⁻⁴) | gates/Clifford | EPG (×10⁻⁴) |\n|---|---|---|---|---|\n");
    for r in rows {
        let _ = writeln!(
            md,
            "| Q{} | {:.5} ± {:.5} | {:.2} ± {:.2} | {:.3} | {:.2} ± {:.2} |",
            r.qubit + 1,
            r.alpha,
            r.alpha_err,
            r.epc * 1e4,
            r.epc_err * 1e4,
            r.gates_per_clifford,
            r.epg * 1e4,
            r.epg_err * 1e4
        );
    }
    md.push('\n');
}

fn render_corr(md: &mut String, v: &Value) {
    let r = v.get("result").unwrap_or(v);
    let list = |key: &str, field: &str| -> Vec<Option<f64>> {
        r.get(key).and_then(|w| w.get(field)).and_then(Value::as_array).map_or(vec![], |a| a.iter().map(Value::as_f64).collect())
    };
    let n = r.get("alpha").and_then(|a| a.get("n_qubits")).and_then(Value::as_u64).unwrap_or(0) as usize;
    let (alpha, alpha_err) = (list("alpha", "values"), list("alpha", "errors"));
    let (p, eps) = (list("pauli", "values"), list("depol", "values"));
    md.push_str("## Correlated RB\n\n| Subset | α_S | p_S | ε_S |\n|---|---|---|---|\n");
    let mut order: Vec<usize> = (0..alpha.len()).collect();
    order.sort_by_key(|&m| (m.count_ones(), std::cmp::Reverse(dispersive_kit::subset::label(m, n))));
    for m in order {
        let a = match (alpha[m], alpha_err.get(m).copied().flatten()) {
            (Some(a), Some(e)) => format!("{a:.5} ± {e:.1e}"),
            (a, _) => opt(a, |a| format!("{a:.5}")),
        };
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} |",
            dispersive_kit::subset::label(m, n),
            a,
            opt(p.get(m).copied().flatten(), |x| format!("{x:.2e}")),
            opt(eps.get(m).copied().flatten(), |x| format!("{x:.2e}"))
        );
    }
    let eta = r.get("eta_tilde").and_then(Value::as_f64);
    let eta_err = v.get("eta_tilde_err").and_then(Value::as_f64);
    let _ = writeln!(
        md,
        "\nη̃ = {}{}\n",
        opt(eta, |x| format!("{x:.2e}")),
        opt(eta_err, |x| format!(" ± {x:.1e}")).replace('–', "")
    );
}

fn render_leakage(md: &mut String, v: &Value) {
    md.push_str("## Leakage RB\n\n| Model | LPG | EPG |\n|---|---|---|\n");
    for (key, name) in [("three_param", "three-parameter"), ("four_param", "four-parameter")] {
        let f = |k: &str| v.get(key).and_then(|x| x.get(k)).and_then(Value::as_f64);
        let _ = writeln!(
            md,
            "| {name} | {} ± {} | {} ± {} |",
            opt(f("lpg"), |x| format!("{x:.3e}")),
            opt(f("lpg_err"), |x| format!("{x:.1e}")),
            opt(f("epg"), |x| format!("{x:.3e}")),
            opt(f("epg_err"), |x| format!("{x:.1e}"))
        );
    }
    md.push('\n');
}

fn render_selectivity(md: &mut String, title: &str, v: &Value) {
    let Some(db) = v.get("selectivity").and_then(|s| s.get("db")).and_then(Value::as_array) else { return };
    let bounds = v.get("selectivity").and_then(|s| s.get("upper_bound")).and_then(Value::as_array);
    let _ = write!(md, "## {title} selectivity (dB)\n\n| element \\ line |");
    for j in 0..db.len() {
        let _ = write!(md, " {} |", j + 1);
    }
    md.push_str("\n|---|");
    md.push_str(&"---|".repeat(db.len()));
    md.push('\n');
    for (i, row) in db.iter().enumerate() {
        let _ = write!(md, "| {} |", i + 1);
        for (j, x) in row.as_array().into_iter().flatten().enumerate() {
            let bound = bounds.and_then(|b| b[i].get(j)).and_then(Value::as_bool).unwrap_or(false);
            let _ = write!(md, " {}{} |", if bound { "<" } else { "" }, opt(x.as_f64(), |x| format!("{x:.1}")));
        }
        md.push('\n');
    }
    md.push('\n');
}

fn render_band(md: &mut String, v: &Value) {
    let f = |k: &str| opt(v.get(k).and_then(Value::as_f64), |x| format!("{x:.4}"));
    let _ = write!(
        md,
        "## Band model\n\n| ε_r | ω_p/2π (GHz) | A/2π (GHz·mm²) | δ_p (mm) | δ_p closed form (mm) | drop per spacing (dB) |\n|---|---|---|---|---|---|\n| {} | {} | {} | {} | {} | {} |\n\n",
        f("eps_eff"),
        f("omega_p_GHz"),
        f("curvature_A_GHz_mm2"),
        f("delta_p_mm"),
        f("delta_p_closed_form_mm"),
        f("drop_per_spacing_db")
    );
}

pub fn run(input: Option<&Path>, config: Option<&Path>, out: &Path) -> anyhow::Result<()> {
    let mut md = String::from("# Characterization report\n\n");
    let dev = match config {
        Some(p) => DeviceParams::load(p)?,
        None => reference::device_table(),
    };
    let rows = device_rows(&dev)?;
    render_device(&mut md, &rows);
    if let Some(dir) = input {
        if !dir.is_dir() {
            anyhow::bail!("no data: {} is not a directory", dir.display());
        }
        let found = |name: &str| Some(dir.join(name)).filter(|p| p.exists());
        let mut any = false;
        if let Some(p) = found("coherence.json") {
            render_coherence(&mut md, &read_json::<Vec<CoherenceRow>>(&p)?);
            any = true;
        }
        if let Some(p) = found("rb.json") {
            render_rb(&mut md, &read_json::<Vec<QubitRb>>(&p)?);
            any = true;
        }
        if let Some(p) = found("corr_rb.json") {
            render_corr(&mut md, &read_json(&p)?);
            any = true;
        }
        if let Some(p) = found("leakage_rb.json") {
            render_leakage(&mut md, &read_json(&p)?);
            any = true;
        }
        if let Some(p) = found("crosstalk.json") {
            let v: Value = read_json(&p)?;
            for (key, title) in [("qubit", "Qubit"), ("resonator", "Resonator")] {
                if let Some(s) = v.get(key) {
                    render_selectivity(&mut md, title, s);
                }
            }
            any = true;
        }
        if let Some(p) = found("band.json") {
            render_band(&mut md, &read_json(&p)?);
            any = true;
        }
        if !any {
            anyhow::bail!("no data: {} holds no analysis outputs", dir.display());
        }
    }
    let mut dir = OutDir::create(out)?;
    dir.json("device_table.json", &rows)?;
    dir.text("report.md", &md)?;
    let inputs: Vec<&Path> = input.into_iter().collect();
    let root = dir.root().to_path_buf();
    manifest::write(&root, "report", config, None, &inputs, dir.into_written())
}
