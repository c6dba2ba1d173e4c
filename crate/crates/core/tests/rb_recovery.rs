use dispersive_kit::dataset::RBDataset;
use dispersive_kit::oracle::gaussian_assignment_fidelity;
use dispersive_kit::rb::{assignment_fidelity, bootstrap_errors, corr_rb, rb_per_qubit, z_correlators};
use dispersive_kit::synth::iq::gen_iq_shots;
use dispersive_kit::synth::rb::{cell_rng, log_spaced_lengths, simulate_rb, NoiseChannelSpec, RbRunSpec};
use rand::Rng;

fn run(seeds: usize, shots: usize) -> RbRunSpec {
    RbRunSpec { lengths: log_spaced_lengths(3000, 21), seeds, shots, readout_error: 0.0 }
}

#[test]
fn product_channel_factorizes() {
    let p = [3.8e-4, 4.6e-4, 3.1e-4, 5.0e-4];
    let ds = simulate_rb(&NoiseChannelSpec::product(&p), &run(40, 1000), 5).unwrap();
    let a = corr_rb(&ds, 60, 9).unwrap();
    let alpha = &a.result.alpha;
    let err = alpha.errors.as_ref().unwrap();
    for mask in 1..16usize {
        let product: f64 = (0..4).filter(|q| mask >> q & 1 == 1).map(|q| alpha.values[1 << q]).product();
        let single_err: f64 = (0..4).filter(|q| mask >> q & 1 == 1).map(|q| err[1 << q].powi(2)).sum::<f64>();
        let sigma = (err[mask].powi(2) + single_err).sqrt();
        assert!((alpha.values[mask] - product).abs() < 3.0 * sigma, "mask {mask}: {} vs {product} ± {sigma}", alpha.values[mask]);
    }
    assert!((a.result.p_sum - 1.0).abs() <= 3.0 * a.p_sum_err.unwrap().max(1e-12));
    assert!(a.result.eta_tilde < 5e-4, "η̃ = {}", a.result.eta_tilde);
}

#[test]
fn injected_subset_error_recovered() {
    let channel = NoiseChannelSpec::product(&[2e-4; 4]).with_subset("1100", 1e-3);
    let ds = simulate_rb(&channel, &run(40, 1000), 21).unwrap();
    let a = corr_rb(&ds, 0, 0).unwrap();
    let eps = a.result.depol.get("1100").unwrap();
    assert!((eps / 1e-3 - 1.0).abs() < 0.1, "ε_1100 = {eps}");
    let other = a.result.depol.get("0011").unwrap();
    assert!(other.abs() < 2e-4, "ε_0011 = {other}");
}

#[test]
fn bootstrap_spread_tracks_fit_error() {
    let channel = NoiseChannelSpec::product(&[1e-3]);
    let ds = simulate_rb(&channel, &run(60, 1000), 3).unwrap();
    let fit_err = rb_per_qubit(&ds).unwrap()[0].alpha_err;
    let boot = bootstrap_errors(&ds, 200, 4, |d| Ok(vec![rb_per_qubit(d)?[0].alpha])).unwrap();
    let ratio = boot.sd[0] / fit_err;
    assert!((1.0 / 1.5..1.5).contains(&ratio), "bootstrap/fit = {ratio}");
}

fn random_dataset(seeds: usize, shots: usize, identical: bool) -> RBDataset {
    let lengths = vec![1, 4, 16, 64];
    let mut rng = cell_rng(77, 0);
    let mut draw = |_: usize| (0..shots).map(|_| rng.random_range(0..4u8)).collect::<Vec<u8>>();
    let outcomes: Vec<Vec<Vec<u8>>> = lengths
        .iter()
        .map(|_| {
            let first = draw(0);
            (0..seeds).map(|s| if identical { first.clone() } else { draw(s) }).collect()
        })
        .collect();
    let gate_counts = lengths.iter().map(|&m| vec![vec![m as u32; 2]; seeds]).collect();
    let ds = RBDataset { n_qubits: 2, levels: 2, lengths, seeds, shots, outcomes, gate_counts };
    ds.validate().unwrap();
    ds
}

#[test]
fn random_outcomes_have_vanishing_correlators() {
    let ds = random_dataset(20, 2000, false);
    for mask in 1..4 {
        let c = z_correlators(&ds, mask).unwrap();
        for (m, s) in c.mean.iter().zip(&c.sem) {
            assert!(m.abs() < 4.0 * s.max(1.0 / (2000.0f64 * 20.0).sqrt()), "⟨Z⟩ = {m}");
        }
    }
}

#[test]
fn identical_seeds_give_zero_bootstrap_spread() {
    let ds = random_dataset(12, 500, true);
    let boot = bootstrap_errors(&ds, 50, 1, |d| Ok(z_correlators(d, 3)?.mean)).unwrap();
    assert!(boot.sd.iter().all(|s| *s < 1e-12), "{:?}", boot.sd);
}

#[test]
fn assignment_fidelity_matches_gaussian_overlap() {
    for sep in [1.0, 2.5, 4.87] {
        let shots = gen_iq_shots(sep, 400_000, 0.5, 8).unwrap();
        let f = assignment_fidelity(&shots).unwrap();
        assert!((f - gaussian_assignment_fidelity(sep)).abs() < 5e-3, "sep {sep}: {f}");
    }
}

#[test]
fn weight_two_event_correlator_decay() {
    let eps = 2e-3;
    let channel = NoiseChannelSpec::noiseless(2).with_subset("11", eps);
    let analytic = dispersive_kit::synth::rb::channel_alphas(&channel.eps_by_mask().unwrap());
    for a in &analytic[1..] {
        assert!((a - (1.0 - eps)).abs() < 1e-15);
    }
    let ds = simulate_rb(&channel, &run(30, 1000), 12).unwrap();
    let alpha = corr_rb(&ds, 0, 0).unwrap().result.alpha;
    let product = alpha.values[1] * alpha.values[2];
    assert!((alpha.values[3] - analytic[3]).abs() < 1e-4, "{}", alpha.values[3]);
    assert!(alpha.values[3] > product, "⟨ZZ⟩ decays slower than the product");
}
