//! Runner-level behavior: trace comparison, sweeps, and the statistics
//! reproduction.

use qslp_cli::config::AppConfig;
use qslp_cli::runner::{compare_traces, reproduce, sweep, ReproduceTarget, scenario_metrics};
use qslp_core::sequence::Scenario;
use qslp_core::solver::Solver;

fn small_cfg() -> AppConfig {
    let mut cfg = AppConfig::default();
    cfg.solver.nz = 120;
    cfg
}

#[test]
fn compare_identical_traces() {
    let cfg = small_cfg();
    let rec = Solver::run(&cfg.solver, Scenario::SlowLight).unwrap();
    let cmp = compare_traces(&rec, &rec).unwrap();
    assert_eq!(cmp.peak_delay, 0.0);
    assert!((cmp.energy_ratio - 1.0).abs() < 1e-15);
}

#[test]
fn compare_shifted_traces() {
    let cfg = small_cfg();
    let rec = Solver::run(&cfg.solver, Scenario::SlowLight).unwrap();
    // shift the output samples by exactly 1 us
    let mut shifted = rec.clone();
    let k = (1e-6 / rec.dt_record).round() as usize;
    let zero = qslp_core::Complex64::new(0.0, 0.0);
    let n = rec.e_plus_out.len();
    let mut moved = vec![zero; n];
    moved[k..n].copy_from_slice(&rec.e_plus_out[..n - k]);
    shifted.e_plus_out = moved;
    let cmp = compare_traces(&rec, &shifted).unwrap();
    assert!(
        (cmp.peak_delay - 1e-6).abs() < 2.0 * rec.dt_record,
        "delay {:.3e}",
        cmp.peak_delay
    );
}

#[test]
fn compare_flat_trace_errors() {
    let cfg = small_cfg();
    let rec = Solver::run(&cfg.solver, Scenario::SlowLight).unwrap();
    let mut flat = rec.clone();
    let zero = qslp_core::Complex64::new(0.0, 0.0);
    flat.e_plus_out = vec![zero; rec.e_plus_out.len()];
    assert!(compare_traces(&rec, &flat).is_err());
}

#[test]
fn sweep_of_size_one_matches_reproduce() {
    let mut cfg = small_cfg();
    cfg.scenario = Scenario::EitPlusQslp;
    cfg.sweep = Some(qslp_cli::config::SweepSpec {
        parameter: "medium.od".to_string(),
        values: vec!["100".to_string()],
        parameter_b: None,
        values_b: Vec::new(),
    });
    let table = sweep(&cfg).unwrap();
    assert_eq!(table.rows.len(), 1);
    let row = &table.rows[0];
    assert!(row.error.is_none());

    let (metrics, _) = scenario_metrics(&cfg, Scenario::EitPlusQslp).unwrap();
    for m in &metrics {
        if let Some(entry) = row.metrics.iter().find(|r| r.name == m.name) {
            assert_eq!(entry.value.to_bits(), m.value.to_bits(), "metric {}", m.name);
        }
    }
}

#[test]
fn sweep_keeps_failed_points_and_order() {
    let mut cfg = small_cfg();
    cfg.scenario = Scenario::EitMemory;
    cfg.sweep = Some(qslp_cli::config::SweepSpec {
        parameter: "medium.od".to_string(),
        values: vec!["50".into(), "-1".into(), "80".into()],
        parameter_b: None,
        values_b: Vec::new(),
    });
    let table = sweep(&cfg).unwrap();
    assert_eq!(table.rows.len(), 3);
    assert!(table.rows[0].error.is_none());
    let err = table.rows[1].error.as_ref().expect("bad point must be marked");
    assert!(err.contains("optical_depth"), "{err}");
    assert!(table.rows[2].error.is_none());
    assert_eq!(table.rows[2].parameter_values, vec!["80".to_string()]);
}

#[test]
fn backward_drive_sweep_suppression_minimal_near_balance() {
    // trapping quality peaks between the extremes: leakage for a weak
    // backward drive, detuned-channel loss for a strong one
    let mut cfg = small_cfg();
    cfg.scenario = Scenario::EitPlusQslp;
    cfg.sweep = Some(qslp_cli::config::SweepSpec {
        parameter: "drives.omega_bwc_2pi_mhz".to_string(),
        values: ["2.0", "4.2", "6.0", "8.0"].map(String::from).to_vec(),
        parameter_b: None,
        values_b: Vec::new(),
    });
    let table = sweep(&cfg).unwrap();
    assert_eq!(table.rows.len(), 4);
    let supp: Vec<f64> = table
        .rows
        .iter()
        .map(|r| {
            assert!(r.error.is_none(), "{:?}", r.error);
            r.metrics.iter().find(|m| m.name == "suppression_ratio").unwrap().value
        })
        .collect();
    let argmin = supp
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    assert!(argmin != 0 && argmin != supp.len() - 1, "suppression {supp:?}");
    assert!(supp.iter().all(|&s| s < 0.05), "suppression {supp:?}");

    // and the release fraction falls monotonically as the backward drive
    // strengthens the lossy detuned channel
    let rel: Vec<f64> = table
        .rows
        .iter()
        .map(|r| r.metrics.iter().find(|m| m.name == "relative_release").unwrap().value)
        .collect();
    assert!(rel.windows(2).all(|w| w[1] < w[0]), "relative release {rel:?}");
}

#[test]
fn dephasing_sweep_shortens_hold_decay() {
    let mut cfg = small_cfg();
    cfg.scenario = Scenario::EitPlusQslp;
    cfg.sweep = Some(qslp_cli::config::SweepSpec {
        parameter: "medium.gamma_gs_2pi_khz".to_string(),
        values: vec!["0".into(), "60".into()],
        parameter_b: None,
        values_b: Vec::new(),
    });
    let table = sweep(&cfg).unwrap();
    let tau: Vec<f64> = table
        .rows
        .iter()
        .map(|r| r.metrics.iter().find(|m| m.name == "hold_decay_tau").unwrap().value)
        .collect();
    assert!(
        tau[0] > tau[1],
        "hold decay must be strictly slower without dephasing: {tau:?}"
    );
}

#[test]
fn two_parameter_sweep_is_cartesian() {
    let mut cfg = small_cfg();
    cfg.scenario = Scenario::SlowLight;
    cfg.solver.t_max = 9e-6;
    cfg.sweep = Some(qslp_cli::config::SweepSpec {
        parameter: "medium.od".to_string(),
        values: vec!["50".into(), "100".into()],
        parameter_b: Some("drives.omega_fwc_2pi_mhz".to_string()),
        values_b: vec!["6.0".into(), "8.0".into(), "10.0".into()],
    });
    let table = sweep(&cfg).unwrap();
    assert_eq!(table.rows.len(), 6);
    assert_eq!(table.parameter_names.len(), 2);
    assert_eq!(table.rows[4].parameter_values, vec!["100".to_string(), "8.0".to_string()]);
}

#[test]
fn fig4_predictions_sit_in_the_measured_band() {
    let mut cfg = AppConfig::default();
    cfg.solver.nz = 120;
    cfg.events.n_repetitions = 150_000;
    let out = reproduce(&cfg, ReproduceTarget::Fig4Statistics, 11).unwrap();
    let report = &out.report;

    let predicted = report.metric("predicted_g2_conditional").unwrap();
    assert!(
        (0.33..=0.35).contains(&predicted),
        "predicted conditional g2 {predicted}"
    );
    assert!(report.metric("predicted_g2_cross").unwrap() > 2.0);

    // Monte Carlo consistency at the applied transmission (flat loss cancels
    // in both estimators; finite statistics set the band)
    let mc_cond = report.metric("mc_g2_conditional").unwrap();
    assert!((mc_cond - predicted).abs() < 0.15, "mc conditional {mc_cond}");
    let mc_cross = report.metric("mc_g2_cross_subtracted").unwrap();
    let expected = report.metric("predicted_g2_cross").unwrap();
    assert!((mc_cross - expected).abs() < 2.2, "mc cross {mc_cross} vs {expected}");

    assert!(!out.event_streams.is_empty());
    assert!(!out.histograms.is_empty());
}

#[test]
fn window_efficiency_on_records_matches_runner_metric() {
    // the generic windowed-ratio operation over raw simulation records must
    // agree with the runner's memory_efficiency reduction
    let cfg = small_cfg();
    let (metrics, traces) = scenario_metrics(&cfg, Scenario::EitMemory).unwrap();
    let slow = &traces.iter().find(|(n, _)| n.contains("slow")).unwrap().1;
    let eit = &traces.iter().find(|(n, _)| n.contains("eit")).unwrap().1;
    let eff_metric = metrics.iter().find(|m| m.name == "memory_efficiency").unwrap();
    let eit_win = eff_metric.window.unwrap();
    let full = qslp_core::stats::WindowSpec::new(0.0, cfg.solver.t_max * 2.0).unwrap();
    let eff = qslp_core::stats::window_efficiency(eit, &eit_win, slow, &full, 0.0).unwrap();
    assert!(
        (eff - eff_metric.value).abs() < 1e-12,
        "window_efficiency {eff} vs metric {}",
        eff_metric.value
    );
}

#[test]
fn reproduce_is_deterministic() {
    let mut cfg = AppConfig::default();
    cfg.solver.nz = 100;
    cfg.events.n_repetitions = 20_000;
    let a = reproduce(&cfg, ReproduceTarget::Fig4Statistics, 5).unwrap();
    let b = reproduce(&cfg, ReproduceTarget::Fig4Statistics, 5).unwrap();
    assert_eq!(a, b);
}
