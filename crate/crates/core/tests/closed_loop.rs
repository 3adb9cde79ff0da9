use indilab::cli::resolve_scenario;
use indilab::control::{AccelerationSource, ControllerRegistry};
use indilab::sim::{
    compare_logs, compute_metrics, run_scenario, run_scenario_with, NoiseSpec, PidSpec,
    ReferenceShape, ReferenceSpec, Scenario, SimLog, SimOptions,
};
use serde_json::json;

const Q: usize = 1;

fn preset(name: &str) -> Scenario {
    resolve_scenario(name, &[], None).unwrap()
}

fn quiet(mut s: Scenario) -> Scenario {
    s.noise = NoiseSpec::default();
    s.compare_with = None;
    s
}

fn step(amplitude: f64) -> ReferenceSpec {
    ReferenceSpec::new(0, ReferenceShape::Step { amplitude, start: 0.0 })
}

fn doublet(edge_time: f64) -> ReferenceSpec {
    ReferenceSpec::new(
        0,
        ReferenceShape::SmoothDoublet {
            amplitude: 0.2,
            start: 0.5,
            edge_time,
            plateau: 1.0,
        },
    )
}

fn max_abs(log: &SimLog, f: impl Fn(&indilab::sim::SampleRecord) -> f64) -> f64 {
    log.records.iter().map(|r| f(r).abs()).fold(0.0, f64::max)
}

#[test]
fn command_is_held_between_samples() {
    let s = quiet(preset("fig2_nominal"));
    let log = run_scenario_with(&s, &ControllerRegistry::builtin(), SimOptions { record_substeps: true }).unwrap();
    let per = s.substeps as usize;
    assert_eq!(log.substeps.len(), (log.records.len() - 1) * per);
    for (j, sub) in log.substeps.iter().enumerate() {
        let rec = &log.records[j / per];
        assert!(sub.t >= rec.t - 1e-12 && sub.t < rec.t + s.sample_period);
        assert_eq!(sub.command, rec.command);
        assert_eq!(sub.deflection, rec.command);
    }
}

#[test]
fn held_command_drives_a_lagged_actuator() {
    let s = quiet(preset("fig2_actuator_lag"));
    let log = run_scenario_with(&s, &ControllerRegistry::builtin(), SimOptions { record_substeps: true }).unwrap();
    let per = s.substeps as usize;
    for (k, chunk) in log.substeps.chunks(per).enumerate() {
        let cmd = &log.records[k].command;
        assert!(chunk.iter().all(|c| &c.command == cmd));
        // First-order lag: the output moves monotonically toward the held command.
        for w in chunk.windows(2) {
            let (a, b) = (w[0].deflection[0], w[1].deflection[0]);
            assert!((cmd[0] - b).abs() <= (cmd[0] - a).abs() + 1e-15);
        }
    }
}

#[test]
fn rate_noise_has_requested_statistics() {
    let mut s = quiet(preset("fig2_nominal"));
    s.reference = ReferenceSpec::new(0, ReferenceShape::Zero);
    s.duration = 100.0;
    s.noise = NoiseSpec {
        rate_sd: vec![0.01],
        accel_sd: vec![0.0],
        seed: 11,
    };
    let log = run_scenario(&s).unwrap();
    let n = log.records.len() as f64;
    assert!(n > 1e4);
    let d: Vec<f64> = log.records.iter().map(|r| r.measured[Q] - r.state[Q]).collect();
    let mean = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((sd / 0.01 - 1.0).abs() < 0.05, "sd {sd}");
    assert!(mean.abs() < 4.0 * 0.01 / n.sqrt(), "mean {mean}");
    // Angle of attack is not measured through the noisy channel.
    assert!(log.records.iter().all(|r| r.measured[0] == r.state[0]));
}

#[test]
fn noise_streams_follow_the_seed() {
    let s = preset("fig2_nominal").with_controller("INDI_GBAR");
    let a = run_scenario(&s).unwrap();
    let b = run_scenario(&s).unwrap();
    assert_eq!(a.to_csv_string(), b.to_csv_string());
    let mut other = s.clone();
    other.noise.seed += 1;
    let c = run_scenario(&other).unwrap();
    assert_ne!(a.records[5].measured, c.records[5].measured);
}

fn rotational(kind: &str) -> Scenario {
    serde_json::from_value(json!({
        "name": "rotational_step",
        "plant": {
            "kind": "rotational",
            "inertia": [[2.0, 0.0, -0.3], [0.0, 3.0, 0.0], [-0.3, 0.0, 4.0]],
            "control_effectiveness": [[40.0, 0.0, 0.0], [0.0, 60.0, 0.0], [0.0, 0.0, 80.0]],
            "aero": {
                "kind": "linear",
                "damping": [[-1.0, 0.0, 0.2], [0.0, -2.0, 0.0], [0.1, 0.0, -1.5]],
                "bias": [0.0, 0.0, 0.0]
            }
        },
        "controller": {"kind": kind, "k_p": [20.0], "continuous": kind == "NDI"},
        "duration": 1.0,
        "initial_state": [0.0, 0.5, 0.0],
        "reference": {"axis": 0, "shape": {"kind": "step", "amplitude": 0.3}}
    }))
    .unwrap()
}

#[test]
fn exact_inversion_decouples_the_axes() {
    let s = rotational("NDI");
    s.validate().unwrap();
    let log = run_scenario(&s).unwrap();
    let e0 = log.records[0].error.clone();
    for r in log.records.iter().filter(|r| r.t <= 0.2) {
        let decay = (-20.0 * r.t).exp();
        for i in 0..3 {
            let expected = e0[i] * decay;
            assert!((r.error[i] - expected).abs() <= 1e-6, "axis {i} at t = {}", r.t);
        }
    }
    // The yaw axis starts on its reference and is never disturbed.
    assert!(max_abs(&log, |r| r.state[2]) < 1e-9);
}

#[test]
fn incremental_laws_track_on_the_coupled_plant() {
    for kind in ["INDI_G0", "INDI_GBAR", "TDC", "PI_INCR"] {
        let log = run_scenario(&rotational(kind)).unwrap();
        let last = log.records.last().unwrap();
        assert!(last.error.amax() < 1e-3, "{kind}: {}", last.error);
    }
}

fn rise_time(log: &SimLog, target: f64) -> f64 {
    log.records
        .iter()
        .find(|r| r.state[Q] >= 0.63 * target)
        .map(|r| r.t)
        .unwrap()
}

#[test]
fn larger_k_p_responds_faster() {
    let mut times = Vec::new();
    for k_p in [5.0, 10.0, 20.0, 40.0] {
        let mut s = quiet(preset("fig2_nominal")).with_controller("NDI");
        s.reference = step(0.05);
        s.duration = 1.5;
        s.controller.k_p = vec![k_p];
        let t = rise_time(&run_scenario(&s).unwrap(), 0.05);
        // Near the first-order time constant, within a sample or two.
        assert!((t - 1.0 / k_p).abs() <= 0.2 / k_p + 2.0 * s.sample_period, "k_p {k_p}: {t}");
        times.push(t);
    }
    assert!(times.windows(2).all(|w| w[1] < w[0]), "{times:?}");
}

#[test]
fn incremental_pi_ignores_trim() {
    let mut s = quiet(preset("fig2_nominal")).with_controller("PI_INCR");
    s.controller.pid = Some(PidSpec {
        k: vec![100.0 / -119.07],
        t_i: vec![0.02],
        t_d: None,
        delta_dc: Some(vec![0.0]),
    });
    let zero = run_scenario(&s).unwrap();
    s.controller.pid.as_mut().unwrap().delta_dc = Some(vec![0.37]);
    let trimmed = run_scenario(&s).unwrap();
    assert_eq!(zero.records, trimmed.records);
}

#[test]
fn equivalences_survive_noise() {
    for seed in [1, 2, 3] {
        let mut s = preset("fig2_nominal");
        s.noise = NoiseSpec {
            rate_sd: vec![0.01],
            accel_sd: vec![0.5],
            seed,
        };
        let indi = run_scenario(&s.with_controller("INDI_GBAR")).unwrap();
        let pi = run_scenario(&s.with_controller("PI_INCR")).unwrap();
        assert!(compare_logs(&indi, &pi).unwrap().command_deviation <= 1e-10);

        s.controller.acceleration_source = AccelerationSource::PlantDerivative;
        let indi = run_scenario(&s.with_controller("INDI_GBAR")).unwrap();
        let tdc = run_scenario(&s.with_controller("TDC")).unwrap();
        let c = compare_logs(&indi, &tdc).unwrap();
        assert!(c.command_deviation <= 1e-10 && c.pass, "seed {seed}");
    }
}

#[test]
fn lagged_actuator_keeps_indi_and_pi_identical() {
    let s = preset("fig2_actuator_lag");
    let indi = run_scenario(&s.with_controller("INDI_GBAR")).unwrap();
    let pi = run_scenario(&s.with_controller("PI_INCR")).unwrap();
    let c = compare_logs(&indi, &pi).unwrap();
    assert!(c.pass, "{}", c.command_deviation);
}

#[test]
fn sharp_edges_raise_the_estimation_error() {
    let base = quiet(preset("tde_sweep"));
    let eps = |edge: f64| {
        let mut s = base.clone().with_controller("TDC");
        s.reference = doublet(edge);
        compute_metrics(&run_scenario(&s).unwrap()).max_eps_tdc
    };
    let smooth = eps(0.2);
    let sharp = eps(1e-3);
    assert!(sharp > smooth, "sharp {sharp}, smooth {smooth}");
}

#[test]
fn indi_degrades_gracefully_under_drift_mismatch() {
    let nominal = compute_metrics(&run_scenario(&quiet(preset("fig2_nominal"))).unwrap()).rms_error;
    let mismatched = compute_metrics(&run_scenario(&preset("mismatch_study")).unwrap()).rms_error;
    assert!(mismatched <= 2.0 * nominal, "{mismatched} vs {nominal}");
}
