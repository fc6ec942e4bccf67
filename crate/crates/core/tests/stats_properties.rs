//! Statistical invariants of the correlation formulas and closed-loop checks
//! of the Monte Carlo event synthesizer against them.

use proptest::prelude::*;
use qslp_core::stats::{
    build_histogram, dc_offset, eta_from_g2, g2_conditional, g2_conditional_from_events,
    g2_cross, g2_from_histogram, monte_carlo_events, windows, PairSourceModel, WindowSpec,
};

fn ensemble_mean_and_se(samples: &[f64]) -> (f64, f64) {
    let k = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / k;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn source(eta: f64) -> PairSourceModel {
    PairSourceModel { eta, ..PairSourceModel::default() }
}

fn histogram_g2(model: &PairSourceModel, n_reps: u64, seed: u64, offset: f64) -> f64 {
    let (heralds, signals) = monte_carlo_events(model, n_reps, seed).unwrap();
    let span = windows::reference_peak(model.repetition_period).t_end + 0.5e-6;
    let h = build_histogram(&heralds, &signals, windows::DEFAULT_BIN_WIDTH, span).unwrap();
    g2_from_histogram(
        &h,
        &windows::first_peak(),
        &windows::reference_peak(model.repetition_period),
        offset,
    )
    .unwrap()
}

proptest! {
    #[test]
    fn eta_g2_round_trip(eta in 0.001..0.999f64) {
        let back = eta_from_g2(g2_cross(eta).unwrap()).unwrap();
        prop_assert!((back - eta).abs() < 1e-12);
    }
}

#[test]
fn conditional_g2_monotone_below_two() {
    let mut prev = -1.0;
    for i in 0..=5000 {
        let eta = i as f64 * 0.01;
        let g = g2_conditional(eta);
        assert!(g > prev, "not increasing at eta = {eta}");
        assert!(g < 2.0, "limit violated at eta = {eta}");
        prev = g;
    }
}

#[test]
fn sub_poissonian_boundary_at_sqrt2_minus_1() {
    let boundary = core::f64::consts::SQRT_2 - 1.0;
    for i in 0..2000 {
        let eta = i as f64 * 1e-3;
        let g = g2_conditional(eta);
        if eta < boundary - 1e-9 {
            assert!(g < 1.0, "expected sub-Poissonian at eta = {eta}");
        } else if eta > boundary + 1e-9 {
            assert!(g > 1.0, "expected super-Poissonian at eta = {eta}");
        }
    }
    assert!((g2_conditional(boundary) - 1.0).abs() < 1e-12);
}

#[test]
fn nonclassicality_witness_at_operating_eta() {
    // thermal-marginal classical bound is 2; the operating point sits far above
    assert!(g2_cross(0.0988).unwrap() > 2.0);
}

#[test]
fn mc_cross_correlation_unbiased_over_seeds() {
    let model = source(0.1);
    let expected = g2_cross(0.1).unwrap();
    let estimates: Vec<f64> =
        (0..6).map(|seed| histogram_g2(&model, 40_000, 1000 + seed, 0.0)).collect();
    let (mean, se) = ensemble_mean_and_se(&estimates);
    assert!(
        (mean - expected).abs() < 3.0 * se,
        "mean {mean:.3} vs expected {expected:.3} (se {se:.4})"
    );
}

#[test]
fn mc_first_peak_tracks_the_waveform() {
    let model = source(0.1);
    let (heralds, signals) = monte_carlo_events(&model, 30_000, 5).unwrap();
    let h = build_histogram(&heralds, &signals, windows::DEFAULT_BIN_WIDTH, 4e-6).unwrap();
    let mut best = 0;
    for (j, &c) in h.counts.iter().enumerate() {
        if c > h.counts[best] {
            best = j;
        }
    }
    let peak_delay = h.bin_start(best);
    assert!(
        (peak_delay - model.waveform.center).abs() < 0.1e-6,
        "histogram peak at {peak_delay:.3e}"
    );
}

#[test]
fn mc_noise_floor_recovered_and_ordering_holds() {
    let model = PairSourceModel { eta: 0.0988, noise_floor: 1e-4, ..PairSourceModel::default() };
    let (heralds, signals) = monte_carlo_events(&model, 150_000, 11).unwrap();
    let span = windows::reference_peak(model.repetition_period).t_end + 0.5e-6;
    let h = build_histogram(&heralds, &signals, windows::DEFAULT_BIN_WIDTH, span).unwrap();

    // plateaus between coincidence peaks
    let plateaus = [
        WindowSpec::new(5e-6, 11e-6).unwrap(),
        WindowSpec::new(17e-6, 23e-6).unwrap(),
        WindowSpec::new(29e-6, 35e-6).unwrap(),
    ];
    let floor = dc_offset(&h, &plateaus).unwrap();
    assert!(
        (floor - model.noise_floor).abs() < 0.3 * model.noise_floor,
        "recovered floor {floor:.2e}"
    );

    let first = windows::first_peak();
    let reference = windows::reference_peak(model.repetition_period);
    let raw = g2_from_histogram(&h, &first, &reference, 0.0).unwrap();
    let subtracted = g2_from_histogram(&h, &first, &reference, floor).unwrap();
    assert!(
        raw < subtracted,
        "noise floor must dilute the raw ratio: raw {raw:.2} vs subtracted {subtracted:.2}"
    );
    let expected = g2_cross(model.eta).unwrap();
    assert!((subtracted - expected).abs() < 0.15 * expected);
}

#[test]
fn mc_conditional_thermal_regime() {
    let model = source(0.9);
    let expected = g2_conditional(0.9);
    let estimates: Vec<f64> = (0..4)
        .map(|seed| {
            let (heralds, signals) = monte_carlo_events(&model, 20_000, 77 + seed).unwrap();
            g2_conditional_from_events(&heralds, &signals, 900 + seed, 3.5e-6).unwrap()
        })
        .collect();
    let (mean, se) = ensemble_mean_and_se(&estimates);
    assert!(
        (mean - expected).abs() < 3.0 * se.max(1e-3),
        "mean {mean:.4} vs expected {expected:.4} (se {se:.5})"
    );
}

#[test]
fn mc_conditional_heralded_single_photon_regime() {
    // triples are rare at small eta, so the per-seed scatter is large; use a
    // wide ensemble and keep a floor under the SE estimate
    let model = source(0.0988);
    let expected = g2_conditional(0.0988);
    let estimates: Vec<f64> = (0..8)
        .map(|seed| {
            let (heralds, signals) = monte_carlo_events(&model, 100_000, 300 + seed).unwrap();
            g2_conditional_from_events(&heralds, &signals, 17 + seed, 3.5e-6).unwrap()
        })
        .collect();
    let (mean, se) = ensemble_mean_and_se(&estimates);
    assert!(
        (mean - expected).abs() < 3.0 * se.max(5e-3),
        "mean {mean:.4} vs expected {expected:.4} (se {se:.5})"
    );
    // single-photon character: conditional correlation deep below 1
    assert!(mean < 0.5);
}

#[test]
fn mc_detection_efficiencies_cancel_in_estimators() {
    let lossy = PairSourceModel {
        eta: 0.1,
        herald_efficiency: 0.6,
        signal_efficiency: 0.45,
        ..PairSourceModel::default()
    };
    let estimates: Vec<f64> =
        (0..6).map(|seed| histogram_g2(&lossy, 60_000, 50 + seed, 0.0)).collect();
    let (mean, se) = ensemble_mean_and_se(&estimates);
    let expected = g2_cross(0.1).unwrap();
    assert!(
        (mean - expected).abs() < 3.0 * se.max(0.05),
        "flat loss should not bias g2: mean {mean:.3} (se {se:.4})"
    );
}

#[test]
fn jitter_blurs_timestamps_without_reshuffling_events() {
    let crisp = source(0.2);
    let blurred = PairSourceModel { jitter: 30e-9, ..crisp.clone() };
    let (h0, s0) = monte_carlo_events(&crisp, 5_000, 9).unwrap();
    let (h1, s1) = monte_carlo_events(&blurred, 5_000, 9).unwrap();
    assert_eq!(h0.len(), h1.len());
    assert_eq!(s0.len(), s1.len());
    assert!(h0.iter().zip(&h1).any(|(a, b)| a != b));
    let max_shift = s0
        .iter()
        .zip(&s1)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(max_shift < 10.0 * 30e-9, "blur far beyond jitter scale: {max_shift:.2e}");
}

proptest! {
    #[test]
    fn histogram_conserves_in_span_pairs(
        heralds in proptest::collection::vec(0.0..1e-3f64, 1..40),
        signals in proptest::collection::vec(0.0..1e-3f64, 0..40),
        bins in 2u32..50,
    ) {
        let span = 1e-3;
        let bin_width = span / bins as f64;
        let h = build_histogram(&heralds, &signals, bin_width, span).unwrap();
        let total = h.counts.iter().sum::<f64>() * h.heralds as f64;
        let expected = heralds
            .iter()
            .flat_map(|&th| signals.iter().map(move |&s| s - th))
            .filter(|&d| (0.0..span).contains(&d))
            .count() as f64;
        prop_assert!((total - expected).abs() < 1e-9);
    }
}
