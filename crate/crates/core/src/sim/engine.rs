use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::log::{LogMeta, SampleRecord, SimLog, SubstepRecord, LOG_SCHEMA};
use super::scenario::{config_hash, EnvelopeMode, Scenario};
use super::SimError;
use crate::control::{AccelerationSource, ControlOutput, ControllerMemory, ControllerRegistry, SampleSignals};
use crate::dynamics::{actuator_step, ActuatorState};

/// States beyond this magnitude count as divergence.
const DIVERGENCE_BOUND: f64 = 1e6;

#[derive(Debug, Clone, Copy, Default)]
pub struct SimOptions {
    /// Also record the held command and actuator output at every substep.
    pub record_substeps: bool,
}

/// One classical RK4 step of `ẋ = f(t, x)`.
pub fn rk4_step<E>(
    mut f: impl FnMut(f64, &DVector<f64>) -> Result<DVector<f64>, E>,
    t: f64,
    x: &DVector<f64>,
    h: f64,
) -> Result<DVector<f64>, E> {
    let k1 = f(t, x)?;
    let k2 = f(t + 0.5 * h, &(x + &k1 * (0.5 * h)))?;
    let k3 = f(t + 0.5 * h, &(x + &k2 * (0.5 * h)))?;
    let k4 = f(t + h, &(x + &k3 * h))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

pub fn run_scenario(s: &Scenario) -> Result<SimLog, SimError> {
    run_scenario_with(s, &ControllerRegistry::builtin(), SimOptions::default())
}

// Quantities carried from the previous sampling instant.
struct Previous {
    y_meas: DVector<f64>,
    y_ref: DVector<f64>,
    error: DVector<f64>,
    error_rate: Option<DVector<f64>>,
    h: DVector<f64>,
    f: DVector<f64>,
}

fn actuator_output(acts: &[ActuatorState], cmd: &DVector<f64>, tau: f64) -> DVector<f64> {
    DVector::from_iterator(
        acts.len(),
        acts.iter().enumerate().map(|(i, a)| {
            if tau > 0.0 {
                actuator_step(a, cmd[i], tau).deflection
            } else {
                a.deflection
            }
        }),
    )
}

fn check_state(t: f64, x: &DVector<f64>, names: &[String]) -> Result<(), SimError> {
    for (i, v) in x.iter().enumerate() {
        if !v.is_finite() || v.abs() > DIVERGENCE_BOUND {
            return Err(SimError::Divergence {
                t,
                detail: format!("{} = {v}", names[i]),
            });
        }
    }
    Ok(())
}

pub fn run_scenario_with(
    s: &Scenario,
    registry: &ControllerRegistry,
    opts: SimOptions,
) -> Result<SimLog, SimError> {
    let p = s.prepare(registry)?;
    let (nominal, truth) = (p.nominal.as_ref(), p.truth.as_ref());
    let controller = p.controller.as_ref();
    let continuous = s.controller.continuous;
    let source = s.controller.acceleration_source;
    let gbar = &p.setup.gbar;
    let nc = truth.channels();
    let rate_idx = truth.rate_indices();
    let state_names = truth.state_names();
    let ts = s.sample_period;
    let h = ts / f64::from(s.substeps);

    let mut rate_rng = ChaCha8Rng::seed_from_u64(s.noise.seed);
    let mut accel_rng = ChaCha8Rng::seed_from_u64(s.noise.seed);
    accel_rng.set_stream(1);

    let mut x = p.x0.clone();
    let mut acts = p.actuators.clone();
    let continuous_law = |t: f64, xx: &DVector<f64>| -> Result<ControlOutput, SimError> {
        let (y_ref, y_ref_dot) = s.reference.eval(t, nc);
        let err = y_ref - nominal.output(xx);
        controller
            .continuous_command(nominal, xx, &err, &y_ref_dot)
            .map_err(|source| SimError::Control { t, source })
    };
    let mut applied = match &acts {
        Some(a) => actuator_output(a, &p.delta0, 0.0),
        None if continuous => continuous_law(0.0, &x)?.delta,
        None => p.delta0.clone(),
    };
    let mut command_prev = p.delta0.clone();
    let mut prev: Option<Previous> = None;

    let mut records = Vec::with_capacity(p.samples + 1);
    let mut substeps = Vec::new();
    let mut envelope_violations = 0usize;

    check_state(0.0, &x, &state_names)?;
    for k in 0..=p.samples {
        let t = k as f64 * ts;

        match (s.envelope, truth.envelope(&x)) {
            (EnvelopeMode::Strict, Some(v)) => {
                return Err(SimError::Envelope {
                    t,
                    detail: v.to_string(),
                })
            }
            (EnvelopeMode::Warn, Some(v)) => {
                if envelope_violations == 0 {
                    log::warn!("t = {t}: {v}");
                }
                envelope_violations += 1;
            }
            _ => {}
        }

        // Measurement. Noise is drawn every sample so the streams do not
        // depend on the controller.
        let rate_noise: Vec<f64> = (0..nc).map(|_| rate_rng.sample(StandardNormal)).collect();
        let accel_noise: Vec<f64> = (0..nc).map(|_| accel_rng.sample(StandardNormal)).collect();
        let mut measured = x.clone();
        for (i, &idx) in rate_idx.iter().enumerate() {
            measured[idx] += p.rate_sd[i] * rate_noise[i];
        }
        let y_meas = nominal.output(&measured);
        let (y_ref, y_ref_dot) = s.reference.eval(t, nc);

        // Truth-side diagnostics.
        let y_dot = truth.output_rate(&x, &applied);
        let h_now = &y_dot - gbar.apply(&applied);
        let f_now = truth.drift(&x);
        let (eps_tdc, eps_indi) = match &prev {
            Some(pv) => (&pv.h - &h_now, &pv.f - &f_now),
            None => (DVector::zeros(nc), DVector::zeros(nc)),
        };

        let (output, error, error_rate) = if continuous {
            let err = &y_ref - truth.output(&x);
            (continuous_law(t, &x)?, err, None)
        } else {
            let error = &y_ref - &y_meas;
            let zeros = || DVector::zeros(nc);
            let (error_rate, y_rate, ref_rate) = match &prev {
                Some(pv) => (
                    (&error - &pv.error) / ts,
                    (&y_meas - &pv.y_meas) / ts,
                    (&y_ref - &pv.y_ref) / ts,
                ),
                None => (zeros(), zeros(), zeros()),
            };
            let error_accel = match prev.as_ref().and_then(|pv| pv.error_rate.as_ref()) {
                Some(r) => (&error_rate - r) / ts,
                None => zeros(),
            };
            let (accel, reference_rate) = match source {
                AccelerationSource::FiniteDifference => (y_rate, ref_rate),
                AccelerationSource::PlantDerivative => {
                    let noise = DVector::from_vec(accel_noise).component_mul(&p.accel_sd);
                    (&y_dot + noise, y_ref_dot.clone())
                }
            };
            let memory = ControllerMemory {
                delta: command_prev.clone(),
                error: error.clone(),
                error_rate: error_rate.clone(),
                error_accel,
                accel,
            };
            let signals = SampleSignals {
                state: &measured,
                error: &error,
                reference_rate: &reference_rate,
                memory: &memory,
                model: nominal,
            };
            let out = controller
                .command(&signals)
                .map_err(|source| SimError::Control { t, source })?;
            // ė at k = 0 is a convention, not a difference; keep it out of ë.
            let rate = prev.as_ref().map(|_| error_rate);
            (out, error, rate)
        };
        prev = Some(Previous {
            y_meas,
            y_ref: y_ref.clone(),
            error: error.clone(),
            error_rate,
            h: h_now,
            f: f_now,
        });

        let command = output.delta;
        if command.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Divergence {
                t,
                detail: format!("non-finite command {:?}", command.as_slice()),
            });
        }

        records.push(SampleRecord {
            t,
            state: x.clone(),
            measured,
            reference: y_ref,
            reference_rate: y_ref_dot,
            nu: output.nu,
            command: command.clone(),
            deflection: applied.clone(),
            error,
            eps_tdc,
            eps_indi,
        });
        if k == p.samples {
            break;
        }

        for j in 0..s.substeps {
            let t0 = t + f64::from(j) * h;
            if opts.record_substeps {
                let deflection = match &acts {
                    Some(a) => actuator_output(a, &command, 0.0),
                    None if continuous => continuous_law(t0, &x)?.delta,
                    None => command.clone(),
                };
                substeps.push(SubstepRecord {
                    t: t0,
                    state: x.clone(),
                    command: command.clone(),
                    deflection,
                });
            }
            x = match &acts {
                Some(a) => rk4_step(
                    |tt, xx| Ok::<_, SimError>(truth.derivative(xx, &actuator_output(a, &command, tt - t0))),
                    t0,
                    &x,
                    h,
                )?,
                None if continuous => {
                    rk4_step(|tt, xx| Ok(truth.derivative(xx, &continuous_law(tt, xx)?.delta)), t0, &x, h)?
                }
                None => rk4_step(|_, xx| Ok::<_, SimError>(truth.derivative(xx, &command)), t0, &x, h)?,
            };
            if let Some(a) = &mut acts {
                for (i, st) in a.iter_mut().enumerate() {
                    *st = actuator_step(st, command[i], h);
                }
            }
            check_state(t0 + h, &x, &state_names)?;
        }

        applied = match &acts {
            Some(a) => actuator_output(a, &command, 0.0),
            None if continuous => continuous_law((k + 1) as f64 * ts, &x)?.delta,
            None => command.clone(),
        };
        command_prev = command;
    }

    Ok(SimLog {
        meta: LogMeta {
            schema: LOG_SCHEMA,
            scenario: s.name.clone(),
            controller: controller.name().to_string(),
            plant: truth.name().to_string(),
            seed: s.noise.seed,
            config_hash: config_hash(s),
            sample_period: ts,
            state_names,
            output_names: truth.output_names(),
            input_names: truth.input_names(),
            output_indices: rate_idx,
        },
        records,
        substeps,
        envelope_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::AccelerationSource;
    use crate::dynamics::Mismatch;
    use crate::sim::reference::{ReferenceShape, ReferenceSpec};
    use crate::sim::scenario::{ActuatorSpec, ControllerSpec, NoiseSpec, PlantSpec};

    fn scenario(kind: &str) -> Scenario {
        Scenario {
            name: "unit".into(),
            plant: PlantSpec::Longitudinal {
                dynamic_pressure: 130_500.0,
                area: 0.0409,
                ref_length: 0.2286,
                mass: 204.0,
                velocity: 632.0,
                pitch_inertia: 247.4,
                mach: 2.0,
            },
            controller: ControllerSpec {
                kind: kind.into(),
                k_p: vec![50.0],
                k_d: None,
                k_g: vec![1.0],
                gbar: None,
                pid: None,
                acceleration_source: AccelerationSource::FiniteDifference,
                continuous: false,
            },
            actuator: Some(ActuatorSpec {
                gain: 1.0,
                time_constant: 0.002,
                position_limits: None,
                rate_limit: None,
            }),
            sample_period: 0.01,
            substeps: 10,
            duration: 1.0,
            reference: ReferenceSpec::new(0, ReferenceShape::Step { amplitude: 0.05, start: 0.0 }),
            noise: NoiseSpec::default(),
            mismatch: Mismatch::default(),
            initial_state: None,
            initial_deflection: None,
            envelope: EnvelopeMode::Warn,
            compare_with: None,
        }
    }

    #[test]
    fn rk4_is_exact_on_cubics() {
        let x0 = DVector::from_element(1, 0.0);
        let x1 = rk4_step(|t, _| Ok::<_, ()>(DVector::from_element(1, 3.0 * t * t)), 0.0, &x0, 0.5).unwrap();
        assert!((x1[0] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn record_count_and_stride() {
        let log = run_scenario(&scenario("INDI_GBAR")).unwrap();
        assert_eq!(log.records.len(), 101);
        for (k, r) in log.records.iter().enumerate() {
            assert_eq!(r.t, k as f64 * 0.01);
        }
    }

    #[test]
    fn zero_reference_stays_at_rest() {
        for kind in ["NDI", "INDI_G0", "INDI_GBAR", "TDC", "PI_INCR"] {
            let mut s = scenario(kind);
            s.reference = ReferenceSpec::new(0, ReferenceShape::Zero);
            let log = run_scenario(&s).unwrap();
            for r in &log.records {
                assert!(r.state.iter().chain(r.command.iter()).all(|v| *v == 0.0), "{kind}");
            }
        }
    }

    #[test]
    fn every_law_tracks_a_step() {
        for kind in ["NDI", "INDI_G0", "INDI_GBAR", "TDC", "PI_INCR"] {
            let log = run_scenario(&scenario(kind)).unwrap();
            let last = log.records.last().unwrap();
            assert!((last.state[1] - 0.05).abs() < 2.5e-3, "{kind}: q = {}", last.state[1]);
        }
    }

    #[test]
    fn plant_derivative_source_tracks_too() {
        let mut s = scenario("INDI_GBAR");
        s.controller.acceleration_source = AccelerationSource::PlantDerivative;
        let log = run_scenario(&s).unwrap();
        assert!((log.records.last().unwrap().state[1] - 0.05).abs() < 1e-3);
    }

    #[test]
    fn controller_failure_reports_time() {
        let mut s = scenario("INDI_G0");
        s.plant = PlantSpec::Rotational {
            inertia: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            control_effectiveness: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]],
            aero: Default::default(),
        };
        s.controller.gbar = Some(vec![1.0]);
        s.actuator = None;
        let err = run_scenario(&s).unwrap_err();
        assert!(matches!(err, SimError::Control { t, .. } if t == 0.0), "{err}");
    }

    #[test]
    fn divergence_is_detected() {
        let mut s = scenario("INDI_GBAR");
        s.controller.gbar = Some(vec![1.0]);
        let err = run_scenario(&s).unwrap_err();
        assert!(matches!(err, SimError::Divergence { .. }), "{err}");
    }

    #[test]
    fn strict_envelope_aborts() {
        let mut s = scenario("INDI_GBAR");
        s.initial_state = Some(vec![0.3, 0.0]);
        s.envelope = EnvelopeMode::Strict;
        assert!(matches!(run_scenario(&s), Err(SimError::Envelope { t, .. }) if t == 0.0));
        s.envelope = EnvelopeMode::Warn;
        assert!(run_scenario(&s).unwrap().envelope_violations > 0);
    }
}
