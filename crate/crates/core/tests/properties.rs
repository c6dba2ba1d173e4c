use std::f64::consts::PI;

use proptest::prelude::*;

use dispersive_kit::band::{predict, LatticeSpec, Layer};
use dispersive_kit::crosstalk::{bound_parasitic_j, qubit_selectivity};
use dispersive_kit::fit::{fit_exp_decay, fit_rb_curve};
use dispersive_kit::freq::gaussian_interp_frequency;
use dispersive_kit::model::{
    chi_from_g, measurement_dephasing_rate, n_crit, photon_calibration_constant, resonant_dephasing_rate, resonant_excited_photons,
};
use dispersive_kit::rb::{
    alpha_to_depol_weights, alpha_to_pauli_weights, crosstalk_metric, depol_to_alpha, pauli_to_alpha, SubspaceWeights, WeightKind,
};
use dispersive_kit::trace::{uniform_delays, TimeTrace, TraceKind};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn sinusoid(n: usize, bins: f64, amp: f64, offset: f64, phase: f64) -> TimeTrace {
    let delays = uniform_delays(0.0, 0.05, n);
    let t = n as f64 * 0.05;
    let signal = delays.iter().map(|d| offset + amp * (2.0 * PI * bins / t * d + phase).cos()).collect();
    TimeTrace::new(TraceKind::Ramsey, delays, signal).unwrap()
}

/// Permutes the bits of `mask` so that bit q moves to `perm[q]`.
fn permute_mask(mask: usize, perm: &[usize]) -> usize {
    perm.iter().enumerate().filter(|(q, _)| mask >> q & 1 == 1).fold(0, |m, (_, &to)| m | 1 << to)
}

fn alpha_strategy(n: usize) -> impl Strategy<Value = SubspaceWeights> {
    proptest::collection::vec(0.99f64..1.0, (1 << n) - 1).prop_map(move |v| {
        let mut values = vec![1.0];
        values.extend(v);
        SubspaceWeights::new(WeightKind::Alpha, n, values).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chi_scales_as_g_squared(g in 1.0f64..300.0, s in 0.1f64..3.0, delta in prop_oneof![-4.0f64..-0.5, 0.5f64..4.0], ec in 150.0f64..350.0) {
        let a = chi_from_g(g, delta, ec).unwrap();
        let b = chi_from_g(s * g, delta, ec).unwrap();
        prop_assert!(rel(b, s * s * a) < 1e-12);
        prop_assert!(chi_from_g(-g, delta, ec).is_err());
    }

    #[test]
    fn n_crit_scaling(delta in 0.5f64..5.0, g in 10.0f64..200.0, s in 0.2f64..5.0) {
        let base = n_crit(delta, g).unwrap();
        prop_assert!(rel(n_crit(s * delta, g).unwrap(), s * s * base) < 1e-12);
        prop_assert!(rel(n_crit(delta, s * g).unwrap(), base / (s * s)) < 1e-12);
    }

    #[test]
    fn calibration_is_identity_on_k(kappa in 1e4f64..1e7, chi in prop_oneof![-1e6f64..-1e3, 1e3f64..1e6], k in 1e3f64..1e9) {
        let c = photon_calibration_constant(kappa, chi, k).unwrap();
        prop_assert!(rel(resonant_dephasing_rate(chi, kappa, c).unwrap(), k) < 1e-12);
    }

    #[test]
    fn eta_tilde_permutation_invariant(alpha in alpha_strategy(3), perm in Just(vec![0usize, 1, 2]).prop_shuffle()) {
        let p = alpha_to_pauli_weights(&alpha).unwrap();
        let mut permuted = vec![0.0; 8];
        for (m, v) in p.values.iter().enumerate() {
            permuted[permute_mask(m, &perm)] = *v;
        }
        let q = SubspaceWeights::new(WeightKind::PauliP, 3, permuted).unwrap();
        prop_assert!((crosstalk_metric(&p).unwrap() - crosstalk_metric(&q).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn eta_tilde_zero_on_low_weight_support(w in proptest::collection::vec(0.0f64..1.0, 5)) {
        let total: f64 = w.iter().sum::<f64>().max(1e-9);
        let mut values = vec![0.0; 16];
        values[0] = w[0] / total;
        for q in 0..4 {
            values[1 << q] = w[q + 1] / total;
        }
        let p = SubspaceWeights::new(WeightKind::PauliP, 4, values).unwrap();
        prop_assert!(crosstalk_metric(&p).unwrap() < 1e-15);
    }

    #[test]
    fn selectivity_invariant_under_column_units(k in proptest::collection::vec(0.01f64..10.0, 9), col in 0usize..3, s in 0.01f64..100.0) {
        let m: Vec<Vec<f64>> = k.chunks(3).map(<[f64]>::to_vec).collect();
        let mut scaled = m.clone();
        for row in scaled.iter_mut() {
            row[col] *= s;
        }
        let a = qubit_selectivity(&m).unwrap();
        let b = qubit_selectivity(&scaled).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!(rel(a.values[i][j], b.values[i][j]) < 1e-12);
            }
        }
        let bound = bound_parasitic_j(&a, &[4.0, 4.07, 4.15]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(bound[i][j], bound[j][i]);
            }
        }
    }

    #[test]
    fn frequency_invariant_under_amplitude_and_offset(bins in 5.3f64..60.0, amp in 0.01f64..10.0, off in -5.0f64..5.0, ph in 0.0..std::f64::consts::TAU) {
        let a = gaussian_interp_frequency(&sinusoid(256, bins, 1.0, 0.0, ph), 0.2).unwrap().f_est_hz;
        let b = gaussian_interp_frequency(&sinusoid(256, bins, amp, off, ph), 0.2).unwrap().f_est_hz;
        prop_assert!(rel(a, b) < 1e-9);
    }

    #[test]
    fn frequency_time_reversal(bins in 5.3f64..60.0, ph in 0.0..std::f64::consts::TAU) {
        let fwd = sinusoid(256, bins, 0.4, 0.5, ph);
        let mut rev = fwd.clone();
        rev.signal.reverse();
        let a = gaussian_interp_frequency(&fwd, 0.2).unwrap();
        let b = gaussian_interp_frequency(&rev, 0.2).unwrap();
        prop_assert!((a.f_est_hz - b.f_est_hz).abs() < 1e-6 * a.delta_f_hz);
    }

    #[test]
    fn exp_fit_exact_on_model_data(a in 0.2f64..0.9, b in 0.0f64..0.1, t in 5.0f64..500.0) {
        let delays = uniform_delays(0.0, 3.0 * t / 99.0, 100);
        let signal = delays.iter().map(|d| a * (-d / t).exp() + b).collect();
        let fit = fit_exp_decay(&TimeTrace::new(TraceKind::T1, delays, signal).unwrap()).unwrap();
        prop_assert!(fit.residual_norm < 1e-8);
        prop_assert!(rel(fit.value("T"), t) < 1e-6);
    }

    #[test]
    fn rb_alpha_invariant_under_rescaling(alpha in 0.95f64..0.9995, scale in 0.2f64..3.0, shift in -0.5f64..0.5) {
        let m: Vec<f64> = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0].to_vec();
        let s: Vec<f64> = m.iter().map(|x| 0.5 * alpha.powf(*x) + 0.5).collect();
        let t: Vec<f64> = s.iter().map(|v| scale * v + shift).collect();
        let a = fit_rb_curve(&m, &s, None).unwrap().value("alpha");
        let b = fit_rb_curve(&m, &t, None).unwrap().value("alpha");
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn low_frequency_skin_depth_ignores_permittivity(eps in 1.0f64..12.0, scale in 1.0f64..10.0) {
        let make = |e: f64| LatticeSpec { layers: vec![Layer { thickness_um: 600.0, permittivity: e }], ..LatticeSpec::default() };
        let a = predict(&make(eps)).unwrap().delta_p_mm;
        let b = predict(&make((eps * scale).min(120.0))).unwrap().delta_p_mm;
        prop_assert!((a - b).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transforms_are_exact_inverses(alpha in alpha_strategy(4)) {
        let via_p = pauli_to_alpha(&alpha_to_pauli_weights(&alpha).unwrap()).unwrap();
        let via_e = depol_to_alpha(&alpha_to_depol_weights(&alpha).unwrap()).unwrap();
        for m in 0..16 {
            prop_assert!((via_p.values[m] - alpha.values[m]).abs() < 1e-12);
            prop_assert!((via_e.values[m] - alpha.values[m]).abs() < 1e-12);
        }
        let p = alpha_to_pauli_weights(&alpha).unwrap();
        prop_assert!((p.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn dephasing_forms_agree_on_resonance() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for _ in 0..1000 {
        let chi = rng.random_range(1e3..2e6) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let kappa = rng.random_range(1e4..1e7);
        let n_g = rng.random_range(0.0..100.0);
        let n_e = resonant_excited_photons(chi, kappa, n_g);
        let general = measurement_dephasing_rate(chi, kappa, n_g, n_e, 0.0).unwrap();
        let resonant = resonant_dephasing_rate(chi, kappa, n_g).unwrap();
        assert!(rel(general, resonant) < 1e-10 || resonant == 0.0, "{general} vs {resonant}");
    }
}
