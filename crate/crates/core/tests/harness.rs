use std::f64::consts::TAU;

use bristle_core::harness::{
    average_speed, bound_check, frequency_sweep, resonance_probe, resonance_probe_with, sling_experiment,
    ProbeSettings, ResponseClass, SweepSpec,
};
use bristle_core::{
    equilibria, presets, rest_at_equilibrium, simulate, DriveSignal, HybridState, IntegratorConfig, Regime,
    RobotParams, Sample, Sampling, Trajectory,
};
use proptest::prelude::*;

fn uniform_motion(v: f64, duration: f64, n: usize) -> Trajectory {
    let p = presets::fig3_params();
    let state = |t: f64| HybridState {
        t,
        x: v * t,
        y: 0.8,
        vx: v,
        vy: 0.0,
        x_l: v * t - 0.6,
        regime: Regime::SlipForward,
    };
    let samples: Vec<Sample> = (0..=n)
        .map(|k| Sample {
            state: state(duration * k as f64 / n as f64),
            normal_force: p.mass * p.gravity,
        })
        .collect();
    Trajectory {
        initial: samples[0].state,
        final_state: samples[n].state,
        samples,
        events: Vec::new(),
        jump_flag: false,
        max_overshoot: -0.06,
    }
}

proptest! {
    #[test]
    fn uniform_motion_speed_is_exact(v in -3.0f64..3.0, frac in 0.01f64..1.0, n in 3usize..50) {
        let t = uniform_motion(v, 2.0, n);
        let m = average_speed(&t, frac).unwrap();
        prop_assert!((m.speed - v).abs() <= 1e-12 * v.abs().max(1.0));
        prop_assert!((m.tip_displacement - v * frac * 2.0).abs() < 1e-12);
    }
}

#[test]
fn fig3a_runs_backward_and_fig3b_forward() {
    let p = presets::fig3_params();
    let init = rest_at_equilibrium(&p).unwrap();
    let cfg = IntegratorConfig::default().with_sampling(Sampling::PerPeriod(100));
    let a = simulate(&init, &p, &presets::fig3a_drive(), &cfg, 3.0).unwrap();
    let b = simulate(&init, &p, &presets::fig3b_drive(), &cfg, 3.0).unwrap();
    let va = average_speed(&a, 0.5).unwrap();
    let vb = average_speed(&b, 0.5).unwrap();
    assert!(va.speed < 0.0 && vb.speed > 0.0);
    // bound at omega = 10: (10 / 2 pi) * (1 - cos 60deg)
    assert!(va.speed.abs() <= 0.7958);
}

fn fig3_family() -> SweepSpec {
    SweepSpec::new(5.0 / TAU, 40.0 / TAU, 0.25, 0.01, 12.0)
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let p = presets::fig3_params();
    let cfg = IntegratorConfig::default();
    let one = frequency_sweep(&p, &fig3_family(), &cfg, Some(1)).unwrap();
    let many = frequency_sweep(&p, &fig3_family(), &cfg, Some(4)).unwrap();
    assert_eq!(one.points.len(), many.points.len());
    for (a, b) in one.points.iter().zip(&many.points) {
        assert_eq!(a.freq_hz, b.freq_hz);
        assert_eq!(a.average_speed.to_bits(), b.average_speed.to_bits());
        assert_eq!(a.occupancy, b.occupancy);
    }
    assert_eq!(one.forward_peak, many.forward_peak);
    assert_eq!(one.backward_peak, many.backward_peak);
    assert!(one.points.windows(2).all(|w| w[0].freq_hz < w[1].freq_hz));
}

#[test]
fn fig3_family_sweep_changes_direction() {
    let p = presets::fig3_params();
    let result = frequency_sweep(&p, &fig3_family(), &IntegratorConfig::default(), None).unwrap();
    let near = |omega: f64| {
        result
            .points
            .iter()
            .min_by(|a, b| (a.omega - omega).abs().total_cmp(&(b.omega - omega).abs()))
            .unwrap()
    };
    assert!(near(10.0).average_speed < 0.0);
    assert!(near(30.0).average_speed > 0.0);
    let fwd = result.forward_peak.unwrap();
    let bwd = result.backward_peak.unwrap();
    assert!(fwd.speed > 0.0 && bwd.speed < 0.0);
    assert_eq!(result.failures(), 0);
    assert!(bound_check(&result, &p).passed());
}

#[test]
fn tiny_drive_only_wobbles() {
    let p = presets::fig4_params();
    let cfg = IntegratorConfig::default().with_sampling(Sampling::PerPeriod(100));
    let out = sling_experiment(&p, &presets::fig4_drive(1e-4), &cfg, 5).unwrap();
    assert_eq!(out.events, 0);
    assert_eq!(out.tip_displacement, 0.0);
    assert!(!out.jumped);

    let q = presets::fig3_params();
    let spec = SweepSpec::new(1.0, 5.0, 1.0, 1e-5, 5.0);
    let result = frequency_sweep(&q, &spec, &IntegratorConfig::default(), None).unwrap();
    for pt in &result.points {
        assert_eq!(pt.tip_displacement, 0.0);
        assert_eq!(pt.occupancy.stick, 1.0);
    }
}

#[test]
fn probe_reports_bifurcation_crossings() {
    let cfg = IntegratorConfig::default();
    let quiet = resonance_probe(&presets::fig5_params(0.14), &presets::fig5_drive(), &cfg).unwrap();
    assert_eq!(quiet.class, ResponseClass::NonResonant);
    assert!(!quiet.crossed_bifurcation());
    assert_eq!(quiet.amplitude_trace.len(), 20);

    let loud = resonance_probe(&presets::fig5_params(0.11), &presets::fig5_drive(), &cfg).unwrap();
    assert_eq!(loud.class, ResponseClass::Resonant);
    assert!(loud.crossed_lower && loud.crossed_upper);
    // the height grows from one period to the next before lift-off
    let tr = &loud.amplitude_trace;
    assert!(tr[tr.len() - 2] > 3.0 * tr[0]);
}

#[test]
fn probe_threshold_is_configurable() {
    let cfg = IntegratorConfig::default();
    let strict = ProbeSettings {
        growth_threshold: 1.0,
        ..ProbeSettings::default()
    };
    let r = resonance_probe_with(&presets::fig5_params(0.14), &presets::fig5_drive(), &cfg, &strict).unwrap();
    assert_eq!(r.class, ResponseClass::Resonant);
    assert!(resonance_probe(&presets::fig5_params(0.14), &DriveSignal::none(), &cfg).is_err());
}

fn moderate_robot() -> impl Strategy<Value = RobotParams> {
    (50.0f64..200.0, 0.1f64..0.3, 0.7f64..0.95, 0.8f64..1.2).prop_map(|(kappa, mu_s, ratio, theta0)| {
        let mut p = presets::fig3_params();
        p.kappa = kappa;
        p.mu_static = mu_s;
        p.mu_kinetic = mu_s * ratio;
        p.theta0 = theta0;
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn moving_windows_mix_regimes_and_respect_the_bound(
        p in moderate_robot(),
        omega in 6.0f64..35.0,
        amp in 0.002f64..0.01,
    ) {
        prop_assume!(equilibria(&p).is_ok());
        let d = DriveSignal::new(amp, omega);
        let init = rest_at_equilibrium(&p).unwrap();
        let cfg = IntegratorConfig::default().with_sampling(Sampling::PerPeriod(50));
        let duration = 20.0 * d.period().unwrap();
        let Ok(t) = simulate(&init, &p, &d, &cfg, duration) else { return Ok(()) };
        prop_assume!(!t.jump_flag);
        let m = average_speed(&t, 0.5).unwrap();
        if m.tip_displacement != 0.0 {
            prop_assert!(t.occupancy(m.window_start, m.window_end).distinct() >= 2);
        }
        let bound = bristle_core::speed_upper_bound(&p, omega);
        prop_assert!(m.speed.abs() <= bound, "speed {} bound {}", m.speed, bound);
    }
}
