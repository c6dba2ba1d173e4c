use std::path::Path;

use dispersive_kit::band::{coupling_map, coupling_profile, dispersion, predict, LatticeSpec};

use crate::manifest;
use crate::output::{num, read_json, OutDir};

const PROFILE_POINTS: usize = 40;

pub fn run(config: Option<&Path>, out: &Path, grid: Option<usize>, spacing: Option<f64>) -> anyhow::Result<()> {
    let spec: LatticeSpec = config.map(read_json).transpose()?.unwrap_or_default();
    let pred = predict(&spec)?;
    let mut dir = OutDir::create(out)?;
    dir.json("band.json", &pred)?;
    dir.csv(
        "dispersion.csv",
        &["path_position_per_mm", "k_per_mm", "label", "with_pillar_GHz", "without_pillar_GHz"],
        dispersion(&spec, 50)?.iter().map(|p| {
            vec![num(p.path_position), num(p.k_per_mm), p.label.unwrap_or("").to_string(), num(p.with_pillar_ghz), num(p.without_pillar_ghz)]
        }),
    )?;
    let rows = (1..=PROFILE_POINTS)
        .map(|k| {
            let d = spec.a_mm * k as f64 / 4.0;
            let p = coupling_profile(d, pred.delta_p_mm, spec.a_mm)?;
            Ok(vec![num(d), num(p.relative), num(p.db), p.near_field.to_string()])
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    dir.csv("coupling_profile.csv", &["d_mm", "relative", "dB", "near_field"], rows)?;
    if let Some(n) = grid {
        let map = coupling_map(n, spacing.unwrap_or(spec.a_mm), pred.delta_p_mm)?;
        let header: Vec<String> = (0..map.len()).map(|j| format!("site_{j}")).collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        dir.csv("coupling_map.csv", &header, map.iter().map(|r| r.iter().map(|v| num(*v)).collect()))?;
    }
    let root = dir.root().to_path_buf();
    manifest::write(&root, "predict-band", config, None, &[], dir.into_written())
}
