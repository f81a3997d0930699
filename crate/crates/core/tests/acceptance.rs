//! End-to-end checks of the reference scenarios. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI, TAU};
use std::time::Instant;

use bristle_core::harness::{
    average_speed, bound_check, frequency_sweep, resonance_probe, sling_experiment, ResponseClass,
    SweepResult, SweepSpec,
};
use bristle_core::oracle::oracle_fixed_step;
use bristle_core::{
    equilibria, mechanical_energy, presets, rest_at_equilibrium, resonances, simulate, speed_upper_bound,
    Direction, DriveSignal, HybridState, IntegratorConfig, Regime, RobotParams, Sampling, Trajectory,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn config(samples_per_period: u32) -> IntegratorConfig {
    IntegratorConfig::default().with_sampling(Sampling::PerPeriod(samples_per_period))
}

/// Largest deviation of stuck samples from the rigid-leg constraint, in leg lengths.
fn stick_residual(traj: &Trajectory, params: &RobotParams) -> f64 {
    traj.samples
        .iter()
        .filter(|s| s.state.regime == Regime::Stick)
        .map(|s| {
            let len = (s.state.x - s.state.x_l).hypot(s.state.y);
            (len - params.leg_length).abs() / params.leg_length
        })
        .fold(0.0, f64::max)
}

/// Angular frequency from upward and downward zero crossings of `signal` (linear between samples).
fn crossing_frequency(times: &[f64], signal: &[f64]) -> Option<f64> {
    let mut crossings = Vec::new();
    for i in 1..signal.len() {
        let (a, b) = (signal[i - 1], signal[i]);
        if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            let w = a / (a - b);
            crossings.push(times[i - 1] + w * (times[i] - times[i - 1]));
        }
    }
    if crossings.len() < 3 {
        return None;
    }
    let span = crossings.last()? - crossings.first()?;
    Some(PI * (crossings.len() - 1) as f64 / span)
}

fn resonance_oracle() -> Verdict {
    let base = presets::fig5_params(0.0);
    let r0 = resonances(&base).unwrap();
    let r14 = resonances(&presets::fig5_params(0.14)).unwrap();
    let r11 = resonances(&presets::fig5_params(0.11)).unwrap();
    let checks = [
        rel(r0.omega_y, 17.56) <= 0.005,
        rel(r14.omega_yp, 15.77) <= 0.01,
        rel(r14.omega_yn, 20.17) <= 0.01,
        rel(r11.omega_yp, 16.11) <= 0.01,
        rel(r11.omega_yn, 19.51) <= 0.01,
    ];
    verdict(
        checks.iter().all(|&c| c),
        format!(
            "omega_y {:.4}; mu_k 0.14: ({:.4}, {:.4}); mu_k 0.11: ({:.4}, {:.4})",
            r0.omega_y, r14.omega_yp, r14.omega_yn, r11.omega_yp, r11.omega_yn
        ),
    )
}

fn direction_by_frequency() -> Verdict {
    let p = presets::fig3_params();
    let init = rest_at_equilibrium(&p).unwrap();
    let cfg = config(200);
    let a = simulate(&init, &p, &presets::fig3a_drive(), &cfg, 3.0).unwrap();
    let b = simulate(&init, &p, &presets::fig3b_drive(), &cfg, 3.0).unwrap();
    let (da, db) = (a.net_displacement(), b.net_displacement());
    verdict(
        da < 0.0 && db > 0.0 && !a.jump_flag && !b.jump_flag,
        format!("omega 10: {da:+.5} m, omega 30: {db:+.5} m over 3 s"),
    )
}

fn sling_by_amplitude() -> Verdict {
    let p = presets::fig4_params();
    let cfg = config(200);
    let big = sling_experiment(&p, &presets::fig4_drive(0.01), &cfg, 10).unwrap();
    let small = sling_experiment(&p, &presets::fig4_drive(0.001), &cfg, 10).unwrap();
    verdict(
        big.displacement > 0.0 && small.displacement < 0.0,
        format!(
            "A 0.01: {:+.3e} m ({} events), A 0.001: {:+.3e} m ({} events) over 20 s",
            big.displacement, big.events, small.displacement, small.events
        ),
    )
}

fn resonance_classification() -> Verdict {
    let cfg = IntegratorConfig::default();
    let a = resonance_probe(&presets::fig5_params(0.14), &presets::fig5_drive(), &cfg).unwrap();
    let b = resonance_probe(&presets::fig5_params(0.11), &presets::fig5_drive(), &cfg).unwrap();
    let free = presets::fig5_params(0.0);
    let at_omega_y = DriveSignal::new(0.0075, resonances(&free).unwrap().omega_y);
    let c = resonance_probe(&free, &at_omega_y, &cfg).unwrap();
    verdict(
        a.class == ResponseClass::NonResonant
            && b.class == ResponseClass::Resonant
            && c.class == ResponseClass::Resonant,
        format!(
            "mu_k 0.14: {:?} (growth {:.2}), mu_k 0.11: {:?} (growth {:.2}), mu_k 0 at omega_y: {:?} (growth {:.2})",
            a.class, a.growth, b.class, b.growth, c.class, c.growth
        ),
    )
}

fn milli_spec() -> SweepSpec {
    SweepSpec::new(200.0, 10_160.0, 40.0, 1e-8, 2e-3).with_phase(PI)
}

fn fig3_family_spec() -> SweepSpec {
    // omega from 5 to 40 rad/s, at least 20 periods each
    SweepSpec::new(5.0 / TAU, 40.0 / TAU, 0.1, 0.01, 20.0 * TAU / 5.0).with_window(0.5)
}

struct Sweeps {
    fig3: SweepResult,
    milli60: SweepResult,
    milli45: SweepResult,
}

fn run_sweeps() -> Sweeps {
    let cfg = IntegratorConfig::default();
    Sweeps {
        fig3: frequency_sweep(&presets::fig3_params(), &fig3_family_spec(), &cfg, None).unwrap(),
        milli60: frequency_sweep(&presets::milli_bot(FRAC_PI_3), &milli_spec(), &cfg, None).unwrap(),
        milli45: frequency_sweep(&presets::milli_bot(FRAC_PI_4), &milli_spec(), &cfg, None).unwrap(),
    }
}

fn speed_bound(sweeps: &Sweeps) -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    let cases = [
        ("fig3 family", &sweeps.fig3, presets::fig3_params()),
        ("milli 60deg", &sweeps.milli60, presets::milli_bot(FRAC_PI_3)),
        ("milli 45deg", &sweeps.milli45, presets::milli_bot(FRAC_PI_4)),
    ];
    for (name, result, params) in cases {
        let r = bound_check(result, &params);
        pass &= r.passed() && r.checked > 0;
        lines.push(format!("{name}: {} points, max |v|/bound {:.3}", r.checked, r.max_ratio));
    }

    // single runs of the sling configuration
    let p4 = presets::fig4_params();
    let init = rest_at_equilibrium(&p4).unwrap();
    for amp in [0.01, 0.001] {
        let d = presets::fig4_drive(amp);
        let t = simulate(&init, &p4, &d, &config(200), 20.0).unwrap();
        let v = average_speed(&t, 0.5).unwrap().speed;
        let bound = speed_upper_bound(&p4, d.omega);
        pass &= v.abs() <= bound;
        lines.push(format!("sling A {amp}: |v|/bound {:.2e}", v.abs() / bound));
    }
    verdict(pass, lines.join("; "))
}

fn regime_mixing(sweeps: &Sweeps) -> Verdict {
    let mut moving = 0;
    let mut single = Vec::new();
    for result in [&sweeps.fig3, &sweeps.milli60, &sweeps.milli45] {
        for p in result.points.iter().filter(|p| p.complete()) {
            if p.tip_displacement != 0.0 {
                moving += 1;
                if p.occupancy.distinct() < 2 {
                    single.push(p.freq_hz);
                }
            }
        }
    }
    let p = presets::fig3_params();
    let init = rest_at_equilibrium(&p).unwrap();
    for d in [presets::fig3a_drive(), presets::fig3b_drive()] {
        let t = simulate(&init, &p, &d, &config(200), 3.0).unwrap();
        let m = average_speed(&t, 0.5).unwrap();
        if m.tip_displacement != 0.0 {
            moving += 1;
            if t.occupancy(m.window_start, m.window_end).distinct() < 2 {
                single.push(d.frequency_hz());
            }
        }
    }
    verdict(
        single.is_empty() && moving > 0,
        format!("{moving} moving windows, {} in a single regime {:?}", single.len(), single),
    )
}

fn fig6_structure(sweeps: &Sweeps) -> Verdict {
    let f_y = resonances(&presets::milli_bot(FRAC_PI_3)).unwrap().omega_y / TAU;
    let fwd60 = sweeps.milli60.forward_peak;
    let bwd60 = sweeps.milli60.backward_peak;
    let fwd45 = sweeps.milli45.forward_peak;
    let a = fwd60.is_some_and(|p| rel(p.freq_hz, f_y) <= 0.2);
    let b = match (fwd60, bwd60) {
        (Some(f), Some(bk)) => bk.freq_hz > f.freq_hz && bk.speed.abs() < f.speed,
        _ => false,
    };
    let c = match (fwd60, fwd45) {
        (Some(p60), Some(p45)) => p45.freq_hz < p60.freq_hz && p45.speed < p60.speed,
        _ => false,
    };
    let fmt = |p: Option<bristle_core::harness::Peak>| match p {
        Some(p) => format!("{:.0} Hz at {:+.3e} m/s", p.freq_hz, p.speed),
        None => "none".to_string(),
    };
    let jumped = sweeps.milli60.points.iter().filter(|p| p.jumped).count();
    verdict(
        a && b && c,
        format!(
            "f_y {:.1} Hz; 60deg forward {}, backward {}; 45deg forward {}; 60deg lift-offs {}/{}; (a) {a} (b) {b} (c) {c}",
            f_y,
            fmt(fwd60),
            fmt(bwd60),
            fmt(fwd45),
            jumped,
            sweeps.milli60.points.len()
        ),
    )
}

fn oracle_equivalence() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    let p = presets::fig3_params();
    let init = rest_at_equilibrium(&p).unwrap();
    let mut residual: f64 = 0.0;
    for (name, d) in [("fig3a", presets::fig3a_drive()), ("fig3b", presets::fig3b_drive())] {
        let adaptive = simulate(&init, &p, &d, &config(200), 3.0).unwrap();
        let fixed = oracle_fixed_step(&init, &p, &d, 1e-5, 3.0, 1000, 1e-9).unwrap();
        residual = residual.max(stick_residual(&adaptive, &p)).max(stick_residual(&fixed, &p));
        let (da, df) = (adaptive.net_displacement(), fixed.net_displacement());
        let r = rel(da, df);
        pass &= r <= 0.02;
        lines.push(format!("{name}: adaptive {da:+.6} fixed {df:+.6} (rel {r:.1e})"));
    }

    // undriven stick oscillation with friction strong enough to never let go
    let mut hold = presets::fig3_params();
    hold.mu_static = 10.0;
    let eq = equilibria(&hold).unwrap();
    let start = HybridState::stick(0.0, eq.theta_bar + 0.05, 0.0, 0.0, &hold);
    let omega = resonances(&hold).unwrap().omega_theta;
    let duration = 100.0 * TAU / omega;
    let cfg = IntegratorConfig::default().with_sampling(Sampling::Count(20_000));
    let t = simulate(&start, &hold, &DriveSignal::none(), &cfg, duration).unwrap();
    let e0 = mechanical_energy(&start, &hold);
    let drift = t
        .samples
        .iter()
        .map(|s| rel(mechanical_energy(&s.state, &hold), e0))
        .fold(0.0, f64::max);
    residual = residual.max(stick_residual(&t, &hold));
    pass &= drift < 1e-6 && t.events.is_empty();
    pass &= residual < 1e-10;
    lines.push(format!("energy drift {drift:.1e} over 100 periods; stick residual {residual:.1e} R"));
    verdict(pass, lines.join("; "))
}

fn linearisation() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;

    let p = presets::fig3_params();
    let eq = equilibria(&p).unwrap();
    let res = resonances(&p).unwrap();
    let start = HybridState::stick(0.0, eq.theta_bar + 1e-4, 0.0, 0.0, &p);
    let duration = 20.0 * TAU / res.omega_theta;
    let cfg = IntegratorConfig::default().with_sampling(Sampling::Count(20_000));
    let t = simulate(&start, &p, &DriveSignal::none(), &cfg, duration).unwrap();
    let times: Vec<f64> = t.samples.iter().map(|s| s.state.t).collect();
    let dev: Vec<f64> = t.samples.iter().map(|s| s.state.theta(&p) - eq.theta_bar).collect();
    let w = crossing_frequency(&times, &dev).unwrap_or(f64::NAN);
    pass &= t.events.is_empty() && rel(w, res.omega_theta) <= 0.01;
    lines.push(format!("stick {w:.4} vs {:.4}", res.omega_theta));

    // persistent sliding: the tip keeps moving one way while the height oscillates
    let q = presets::fig5_params(0.14);
    let eq = equilibria(&q).unwrap();
    let res = resonances(&q).unwrap();
    for (dir, y_bar, expected) in [
        (Direction::Forward, eq.y_bar_p, res.omega_yp),
        (Direction::Backward, eq.y_bar_n, res.omega_yn),
    ] {
        let start = HybridState::slip(0.0, 0.0, y_bar + 1e-4, 5.0 * dir.sign(), 0.0, dir, &q);
        let duration = 8.0 * TAU / expected;
        let t = simulate(&start, &q, &DriveSignal::none(), &cfg, duration).unwrap();
        let times: Vec<f64> = t.samples.iter().map(|s| s.state.t).collect();
        let dev: Vec<f64> = t.samples.iter().map(|s| s.state.y - y_bar).collect();
        let w = crossing_frequency(&times, &dev).unwrap_or(f64::NAN);
        pass &= t.events.is_empty() && rel(w, expected) <= 0.01;
        lines.push(format!("slip {:?} {w:.4} vs {expected:.4}", dir));
    }
    verdict(pass, lines.join("; "))
}

fn main() {
    let started = Instant::now();
    let sweeps = run_sweeps();
    let results = [
        ("1 resonance frequencies", resonance_oracle()),
        ("2 direction set by drive frequency", direction_by_frequency()),
        ("3 sling direction set by amplitude", sling_by_amplitude()),
        ("4 resonant vs non-resonant response", resonance_classification()),
        ("5 speed bound", speed_bound(&sweeps)),
        ("6 regime mixing in moving windows", regime_mixing(&sweeps)),
        ("7 milli-bot sweep structure", fig6_structure(&sweeps)),
        ("8 adaptive vs fixed-step integrator", oracle_equivalence()),
        ("9 small-oscillation frequencies", linearisation()),
    ];
    let mut failed = 0;
    for (name, v) in &results {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {tag} | {}", v.detail);
        failed += usize::from(!v.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
