//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured value and the required band.
//!
//! Run with `cargo test -p qslp-cli --test acceptance -- --nocapture` to see
//! every line. Criteria 4(i), 4(ii), and the solver-decay half of 5 probe
//! literature values that this model, at the configured operating point,
//! does not attain (the stored pulse drifts at a rate set by the drive
//! imbalance, which shortens the exit path and adds gradient loss during the
//! hold); they are asserted at their stated tolerances regardless, and fail
//! honestly. See the repository README for the quantitative breakdown.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;

use qslp_cli::config::AppConfig;
use qslp_cli::runner::{reproduce, ReproduceOutput, ReproduceTarget};
use qslp_core::medium::{group_velocity, mixing_angles, DriveAmplitudes, PhiConvention};
use qslp_core::sequence::Scenario;
use qslp_core::solver::{convergence_check, Solver, SolverConfig};
use qslp_core::stats::{
    build_histogram, decay_time, g2_conditional, g2_conditional_from_events, g2_cross,
    g2_from_histogram, monte_carlo_events, windows, PairSourceModel,
};

const TAU: f64 = std::f64::consts::TAU;

fn check(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {verdict} — {detail}");
    assert!(pass, "criterion {criterion} FAIL — {detail}");
}

static FIG3B: OnceLock<ReproduceOutput> = OnceLock::new();

fn fig3b() -> &'static ReproduceOutput {
    FIG3B.get_or_init(|| {
        reproduce(&AppConfig::default(), ReproduceTarget::Fig3bEitQslp, 0)
            .expect("fig3b reproduction runs")
    })
}

fn metric(name: &str) -> f64 {
    fig3b().report.metric(name).unwrap_or(f64::NAN)
}

#[test]
fn criterion_1_group_velocity_vanishes_at_balanced_drives() {
    let c0 = qslp_core::medium::LIGHT_SPEED;
    let mut worst = 0.0f64;
    for conv in [PhiConvention::AmplitudeRatio, PhiConvention::IntensityRatio] {
        let drives = DriveAmplitudes {
            omega_fwc: TAU * 6.0e6,
            omega_bwc: TAU * 6.0e6,
            coupling_g2n: Some((TAU * 300.0e6) * (TAU * 300.0e6)),
        };
        let angles = mixing_angles(&drives, conv).unwrap();
        worst = worst.max(group_velocity(&angles, c0).unwrap().abs());
    }
    check(
        "1",
        worst < 1e-10 * c0,
        &format!("|v_g| at balanced drives = {:.3e} of c0 (require < 1e-10)", worst / c0),
    );
}

#[test]
fn criterion_2_slow_light_delay_matches_analytic_oracle() {
    // dispersion oracle, independent of the time-domain solver
    let mut cfg = SolverConfig::default();
    cfg.drives.omega_bwc = 0.0;
    let (od, gamma, omega, gamma_gs) = (
        cfg.medium.optical_depth,
        cfg.medium.gamma,
        cfg.drives.omega_fwc,
        cfg.medium.gamma_gs,
    );
    let exponent = |w: f64| {
        let d = qslp_core::Complex64::new(gamma / 2.0, -w)
            + qslp_core::Complex64::new(omega * omega / 4.0, 0.0)
                / qslp_core::Complex64::new(gamma_gs, -w);
        qslp_core::Complex64::new(-od * gamma / 4.0, 0.0) / d
    };
    let tau_oracle = (exponent(1.0).im - exponent(-1.0).im) / 2.0;

    let rec = Solver::run(&cfg, Scenario::SlowLight).unwrap();
    let (peak_t, _) = rec.forward_peak_between(0.0, cfg.t_max).unwrap();
    let delay = peak_t - cfg.input.center;
    let delay_ok = (delay - tau_oracle).abs() < 0.1 * tau_oracle;

    // backward sector must stay numerically dark
    let solver = Solver::new(&cfg, Scenario::SlowLight).unwrap();
    let mut state = solver.initial_state();
    let mut peak = 0.0f64;
    let mut backward = 0.0f64;
    for _ in 0..(cfg.t_max / cfg.dt).round() as usize {
        solver.step(&mut state).unwrap();
        for j in 0..cfg.nz {
            peak = peak.max(state.e_plus[j].norm());
            backward = backward
                .max(state.e_minus[j].norm())
                .max(state.rho_eg_minus[j].norm())
                .max(state.rho_sg_pm[j].norm())
                .max(state.rho_sg_mp[j].norm());
        }
    }
    let dark_ok = backward < 1e-12 * peak;
    check(
        "2",
        delay_ok && dark_ok,
        &format!(
            "delay {:.4} us vs oracle {:.4} us (10% band); backward sector {:.2e} of peak (< 1e-12)",
            delay * 1e6,
            tau_oracle * 1e6,
            backward / peak
        ),
    );
}

#[test]
fn criterion_3_eit_memory_retrieval_efficiency() {
    let eff = metric("memory_efficiency");
    check(
        "3",
        (eff - 0.191).abs() <= 0.04,
        &format!("storage-and-retrieval efficiency {eff:.4} vs 0.191 +- 0.04"),
    );
}

#[test]
fn criterion_4i_relative_release_after_hold() {
    let rel = metric("relative_release");
    check(
        "4(i)",
        (rel - 0.478).abs() <= 0.05,
        &format!("release relative to plain storage {rel:.4} vs 0.478 +- 0.05"),
    );
}

#[test]
fn criterion_4ii_peak_delay_equals_hold_duration() {
    let delay = metric("peak_delay");
    check(
        "4(ii)",
        (delay - 1.0e-6).abs() <= 0.1e-6,
        &format!("peak delay {:.4} us vs 1.0 +- 0.1 us", delay * 1e6),
    );
}

#[test]
fn criterion_4iii_output_suppressed_during_hold() {
    let supp = metric("suppression_ratio");
    check(
        "4(iii)",
        supp < 0.05,
        &format!("hold output / release peak = {supp:.5} (require < 0.05)"),
    );
}

#[test]
fn criterion_5a_decay_time_arithmetic() {
    let tau = decay_time(0.478, 1e-6).unwrap();
    let ok = (tau - 1.354e-6).abs() < 0.01e-6 && (tau - 1.35e-6).abs() < 0.01e-6;
    check(
        "5a",
        ok,
        &format!("decay_time(0.478, 1 us) = {:.4} us vs 1.354 us (0.01 us band)", tau * 1e6),
    );
}

#[test]
fn criterion_5b_fitted_hold_decay_time() {
    let tau = metric("hold_decay_tau");
    check(
        "5b",
        (tau - 1.35e-6).abs() <= 0.25e-6,
        &format!("fitted hold decay {:.3} us vs 1.35 +- 0.25 us", tau * 1e6),
    );
}

#[test]
fn criterion_6_monte_carlo_closed_loop() {
    let eta = 0.0988;
    let model = PairSourceModel { eta, ..PairSourceModel::default() };
    let expected_cross = g2_cross(eta).unwrap();
    let expected_cond = g2_conditional(eta);

    // 10 independent seeds of 1e5 repetitions each: 1e6 total
    let mut cross = Vec::new();
    let mut cond = Vec::new();
    for seed in 0..10u64 {
        let (heralds, signals) = monte_carlo_events(&model, 100_000, 1000 + seed).unwrap();
        let span = windows::reference_peak(model.repetition_period).t_end + 0.5e-6;
        let h =
            build_histogram(&heralds, &signals, windows::DEFAULT_BIN_WIDTH, span).unwrap();
        cross.push(
            g2_from_histogram(
                &h,
                &windows::first_peak(),
                &windows::reference_peak(model.repetition_period),
                0.0,
            )
            .unwrap(),
        );
        cond.push(
            g2_conditional_from_events(&heralds, &signals, 7000 + seed, 3.5e-6).unwrap(),
        );
    }
    let stats = |xs: &[f64]| {
        let k = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / k;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
        (mean, (var / k).sqrt())
    };
    let (mean_cross, se_cross) = stats(&cross);
    let (mean_cond, se_cond) = stats(&cond);

    let cross_ok = (mean_cross - expected_cross).abs() < 3.0 * se_cross;
    let cond_ok = (mean_cond - expected_cond).abs() < 3.0 * se_cond;
    let band_ok = (0.33..=0.35).contains(&expected_cond);
    check(
        "6",
        cross_ok && cond_ok && band_ok,
        &format!(
            "g2 {mean_cross:.3} vs {expected_cross:.3} (3se = {:.3}); conditional {mean_cond:.4} \
             vs {expected_cond:.4} (3se = {:.4}); prediction inside [0.33, 0.35]: {band_ok}",
            3.0 * se_cross,
            3.0 * se_cond
        ),
    );
}

#[test]
fn criterion_7_grid_self_convergence() {
    let cfg = SolverConfig::default();
    let mut detail = String::new();
    let mut ok = true;
    for scenario in [Scenario::EitMemory, Scenario::EitPlusQslp] {
        let report = convergence_check(&cfg, scenario).unwrap();
        ok &= report.rel_energy_change < 1e-2 && report.peak_time_shift.abs() < 20e-9;
        detail.push_str(&format!(
            "{scenario}: energy change {:.3e} (< 1e-2), peak shift {:.2} ns (< 20); ",
            report.rel_energy_change,
            report.peak_time_shift.abs() * 1e9
        ));
    }
    check("7", ok, &detail);
}

#[test]
fn criterion_8_linearity_at_machine_precision() {
    let base = SolverConfig::default();
    let mut scaled = base.clone();
    scaled.input.scale = 10.0;
    let a = Solver::run(&base, Scenario::EitPlusQslp).unwrap();
    let b = Solver::run(&scaled, Scenario::EitPlusQslp).unwrap();
    let peak = a.e_plus_out.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for (ea, eb) in a.e_plus_out.iter().zip(&b.e_plus_out) {
        worst = worst.max((eb - ea * 10.0).norm());
    }
    for (ea, eb) in a.e_minus_out.iter().zip(&b.e_minus_out) {
        worst = worst.max((eb - ea * 10.0).norm());
    }
    let rel = worst / (10.0 * peak);
    check(
        "8",
        rel < 1e-12,
        &format!("max deviation from exact x10 scaling: {rel:.2e} of peak (require < 1e-12)"),
    );
}

#[test]
fn criterion_9_byte_identical_outputs() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let run = |dir: &Path| {
        let out = Command::new(env!("CARGO_BIN_EXE_qslp"))
            .args([
                "reproduce",
                "fig4",
                "--seed",
                "42",
                "--set",
                "events.n_repetitions=20000",
                "--set",
                "grid.nz=80",
                "--out",
            ])
            .arg(dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run(dir_a.path());
    run(dir_b.path());

    let mut names: Vec<String> = fs::read_dir(dir_a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let mut identical = true;
    for name in &names {
        let a = fs::read(dir_a.path().join(name)).unwrap();
        let b = fs::read(dir_b.path().join(name)).unwrap();
        identical &= a == b;
    }
    check(
        "9",
        identical && names.len() >= 5,
        &format!("{} emitted files byte-compared across two runs", names.len()),
    );
}
