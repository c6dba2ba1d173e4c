//! Recorded characterization values of the four-qubit reference device and
//! finite-element results used for model-versus-simulation comparisons.
//!
//! Nothing here is used as an input to an estimator; these are cross-check
//! constants only.

use crate::model::{DeviceParams, PairCoupling, QubitParams, ResonatorParams};

/// Qubit frequency (GHz), resonator frequency (GHz), anharmonicity (MHz),
/// E_J/E_C, χ (kHz), g (MHz), κ_ext (kHz), Q_int, p_e (fraction).
pub const DEVICE_TABLE: [[f64; 9]; 4] = [
    [3.981, 7.968, -199.0, 69.0, -165.0, 124.0, 118.0, 110e3, 0.13],
    [4.045, 8.083, -199.0, 71.0, -167.0, 126.0, 73.0, 75e3, 0.18],
    [4.130, 8.183, -198.0, 74.0, -169.0, 128.0, 749.0, 515e3, 0.13],
    [4.192, 8.289, -197.0, 76.0, -164.0, 128.0, 241.0, 160e3, 0.10],
];

/// Critical photon numbers listed for the four resonators.
pub const N_CRIT_LISTED: [f64; 4] = [258.0, 257.0, 251.0, 256.0];

/// Per-qubit coherence row: T1, T2*, T2e (µs), T_φ,e (µs), EPG coherence limit (1e-4).
pub const COHERENCE_TABLE: [[f64; 5]; 4] = [
    [106.0, 95.0, 101.0, 193.0, 1.1],
    [159.0, 104.0, 116.0, 183.0, 0.94],
    [179.0, 89.0, 128.0, 199.0, 0.85],
    [151.0, 99.0, 113.0, 181.0, 0.97],
];

/// Quoted uncertainty on the coherence-limited EPG column (1e-4).
pub const COHERENCE_EPG_UNCERTAINTY: [f64; 4] = [0.1, 0.05, 0.05, 0.05];

/// Physical gate duration in ns.
pub const GATE_DURATION_NS: f64 = 24.0;

/// Fitted Z-correlator depolarizing parameters of simultaneous four-qubit RB,
/// keyed by subset bitstring (qubit 1 leftmost).
pub const CORR_RB_ALPHAS: [(&str, f64, f64); 15] = [
    ("1000", 0.99962, 0.00001),
    ("0100", 0.99954, 0.00004),
    ("0010", 0.99969, 0.00001),
    ("0001", 0.99950, 0.00002),
    ("1100", 0.99920, 0.00003),
    ("1010", 0.99931, 0.00001),
    ("1001", 0.99914, 0.00001),
    ("0110", 0.99927, 0.00003),
    ("0101", 0.99910, 0.00003),
    ("0011", 0.99921, 0.00001),
    ("1110", 0.99893, 0.00003),
    ("1101", 0.99875, 0.00003),
    ("1011", 0.99884, 0.00002),
    ("0111", 0.99882, 0.00003),
    ("1111", 0.99846, 0.00004),
];

/// Reported identity-weight Pauli parameter and its uncertainty.
pub const P_IDENTITY_REPORTED: (f64, f64) = (0.99883, 0.00003);
/// Reported crosstalk metric and its bootstrap uncertainty.
pub const ETA_TILDE_REPORTED: (f64, f64) = (1.1e-4, 0.2e-4);

/// Leakage RB on qubit 3: LPG, EPG (four-parameter), EPG (three-parameter).
pub const LEAKAGE_RB_REPORTED: [(f64, f64); 3] = [(3.49e-5, 0.07e-5), (2e-4, 1e-4), (2.33e-4, 0.07e-4)];

/// Finite-element band results: cutoff (GHz), curvature (GHz·mm²), top of the
/// unshunted band (GHz).
pub const FE_CUTOFF_GHZ: f64 = 34.3;
pub const FE_CURVATURE_GHZ_MM2: f64 = 4.5;
pub const FE_UNSHUNTED_BAND_TOP_GHZ: f64 = 39.5;

/// Upper bounds on parasitic couplings from the measurement (kHz).
pub const J_BOUND_KHZ: f64 = 250.0;
pub const G_BOUND_KHZ: f64 = 1500.0;

/// Table values as a `DeviceParams`. E_C is taken as −α; crosstalk matrices
/// are placeholders (zero parasitics, unit diagonal couplings and attenuation).
pub fn device_table() -> DeviceParams {
    let n = DEVICE_TABLE.len();
    let mut qubits = Vec::with_capacity(n);
    let mut resonators = Vec::with_capacity(n);
    let mut pairs = Vec::with_capacity(n);
    for (k, row) in DEVICE_TABLE.iter().enumerate() {
        let [wq, wr, alpha, ratio, chi, g, kext, qint, pe] = *row;
        let [t1, t2s, t2e, _, _] = COHERENCE_TABLE[k];
        qubits.push(QubitParams {
            omega_q_ghz: wq,
            alpha_mhz: alpha,
            e_c_mhz: -alpha,
            ej_over_ec: ratio,
            t1_us: Some(t1),
            t2_star_us: Some(t2s),
            t2_echo_us: Some(t2e),
            p_e: Some(pe),
        });
        resonators.push(ResonatorParams {
            omega_r_ghz: wr,
            kappa_ext_khz: kext,
            q_int: qint,
        });
        pairs.push(PairCoupling {
            g_mhz: g,
            chi_khz: chi,
            delta_ghz: wq - wr,
        });
    }
    let zeros = vec![vec![0.0; n]; n];
    let eye: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    DeviceParams {
        qubits,
        resonators,
        pairs,
        j_khz: zeros.clone(),
        chi_cross_hz: zeros,
        eps_q: eye.clone(),
        eps_r: eye,
        lambda_q: vec![1.0; n],
        lambda_r: vec![1.0; n],
    }
}
