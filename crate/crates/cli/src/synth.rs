use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

use dispersive_kit::coherence::CoherenceSynthConfig;
use dispersive_kit::synth::decay::{gen_decay_trace, DecayKind, DecayParams};
use dispersive_kit::synth::iq::gen_iq_shots;
use dispersive_kit::synth::rb::{simulate_rb, NoiseChannelSpec, RbRunSpec};
use dispersive_kit::trace::{uniform_delays, TimeTrace};

use crate::manifest;
use crate::output::{num, read_json, OutDir};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Delays {
    start_us: f64,
    step_us: f64,
    n: usize,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SynthConfig {
    Decay {
        experiment: DecayKind,
        params: DecayParams,
        delays: Delays,
        #[serde(default)]
        noise_sigma: f64,
        seed: Option<u64>,
    },
    Coherence {
        #[serde(flatten)]
        config: CoherenceSynthConfig,
        seed: Option<u64>,
    },
    Rb {
        channel: NoiseChannelSpec,
        run: RbRunSpec,
        seed: Option<u64>,
    },
    Iq {
        separation_sigma_ratio: f64,
        n_shots: usize,
        #[serde(default = "half")]
        excited_prob: f64,
        seed: Option<u64>,
    },
}

fn half() -> f64 {
    0.5
}

impl SynthConfig {
    fn seed(&self) -> Option<u64> {
        match self {
            Self::Decay { seed, .. } | Self::Coherence { seed, .. } | Self::Rb { seed, .. } | Self::Iq { seed, .. } => *seed,
        }
    }
}

fn save_trace(out: &mut OutDir, name: &str, trace: &TimeTrace) -> anyhow::Result<()> {
    let path = out.path(name);
    trace.save(&path).with_context(|| format!("writing {}", path.display()))
}

pub fn run(config: &Path, out: &Path, seed_flag: Option<u64>) -> anyhow::Result<()> {
    let cfg: SynthConfig = read_json(config)?;
    let seed = manifest::resolve_seed(seed_flag, cfg.seed())?;
    let mut dir = OutDir::create(out)?;
    match cfg {
        SynthConfig::Decay { experiment, params, delays, noise_sigma, .. } => {
            let d = uniform_delays(delays.start_us, delays.step_us, delays.n);
            for trace in gen_decay_trace(experiment, &params, &d, noise_sigma, seed)? {
                save_trace(&mut dir, &format!("{}.csv", trace.kind.as_str()), &trace)?;
            }
        }
        SynthConfig::Coherence { config, .. } => {
            for (q, set) in config.generate(seed)?.iter().enumerate() {
                for (r, t) in set.t1.iter().enumerate() {
                    save_trace(&mut dir, &format!("q{q}_t1_{r:03}.csv"), t)?;
                }
                for (r, t) in set.ramsey.iter().enumerate() {
                    save_trace(&mut dir, &format!("q{q}_ramsey_{r:03}.csv"), t)?;
                }
                for (r, (p, m)) in set.echo.iter().enumerate() {
                    save_trace(&mut dir, &format!("q{q}_echo_plus_{r:03}.csv"), p)?;
                    save_trace(&mut dir, &format!("q{q}_echo_minus_{r:03}.csv"), m)?;
                }
            }
        }
        SynthConfig::Rb { channel, run, .. } => {
            let ds = simulate_rb(&channel, &run, seed)?;
            let path = dir.path("dataset.json");
            ds.save(&path).with_context(|| format!("writing {}", path.display()))?;
        }
        SynthConfig::Iq { separation_sigma_ratio, n_shots, excited_prob, .. } => {
            let shots = gen_iq_shots(separation_sigma_ratio, n_shots, excited_prob, seed)?;
            dir.csv(
                "iq_shots.csv",
                &["i", "q", "prepared", "assigned"],
                shots.iter().map(|s| vec![num(s.i), num(s.q), (s.prepared as u8).to_string(), (s.assigned as u8).to_string()]),
            )?;
        }
    }
    let root = dir.root().to_path_buf();
    manifest::write(&root, "synth", Some(config), Some(seed), &[], dir.into_written())
}
