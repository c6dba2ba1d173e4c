//! Heterodyne readout shots as two circular Gaussian blobs in the IQ plane.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqShot {
    pub i: f64,
    pub q: f64,
    /// Prepared state (true = excited).
    pub prepared: bool,
    /// Assigned state from the midpoint threshold.
    pub assigned: bool,
}

/// Unit-width blobs centred at (∓sep/2, 0); the threshold is the line I = 0.
/// An infinite separation assigns every shot correctly.
pub fn gen_iq_shots(separation_sigma_ratio: f64, n_shots: usize, excited_prob: f64, rng_seed: u64) -> Result<Vec<IqShot>> {
    if n_shots == 0 {
        return Err(invalid("n_shots", "must be > 0"));
    }
    if !(separation_sigma_ratio >= 0.0) {
        return Err(invalid("separation_sigma_ratio", "must be ≥ 0"));
    }
    if !(0.0..=1.0).contains(&excited_prob) {
        return Err(invalid("excited_prob", "must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let half = 0.5 * separation_sigma_ratio;
    Ok((0..n_shots)
        .map(|_| {
            let prepared = rng.random::<f64>() < excited_prob;
            let ni: f64 = StandardNormal.sample(&mut rng);
            let nq: f64 = StandardNormal.sample(&mut rng);
            let centre = if prepared { half } else { -half };
            let i = if half.is_infinite() { centre } else { centre + ni };
            // A tie at exactly zero (zero separation) is split by the noise sign.
            IqShot { i, q: nq, prepared, assigned: i > 0.0 }
        })
        .collect())
}
