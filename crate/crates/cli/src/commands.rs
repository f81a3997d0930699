use std::f64::consts::TAU;
use std::path::Path;

use anyhow::Context;
use bristle_core::harness::{average_speed, bound_check, frequency_sweep, Peak};
use bristle_core::{
    equilibria, rest_at_equilibrium, resonances_at, simulate_partial, speed_upper_bound, HybridState, Occupancy,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output;

/// The sweep finished but too many points failed.
#[derive(Debug)]
pub struct PartialSweep {
    pub failed: usize,
    pub total: usize,
}

impl std::fmt::Display for PartialSweep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} of {} sweep points failed", self.failed, self.total)
    }
}

impl std::error::Error for PartialSweep {}

/// Share of sweep points that must succeed for a zero exit status.
const SWEEP_SUCCESS_THRESHOLD: f64 = 0.9;

#[derive(Serialize)]
struct FrequencyPair {
    rad_s: f64,
    hz: f64,
}

impl FrequencyPair {
    fn new(omega: f64) -> Self {
        Self {
            rad_s: omega,
            hz: omega / TAU,
        }
    }
}

#[derive(Serialize)]
struct BoundRow {
    freq_hz: f64,
    omega_rad_s: f64,
    bound: f64,
}

#[derive(Serialize)]
struct Analysis {
    theta_bar: f64,
    theta_bar_p: f64,
    theta_bar_n: f64,
    y_bar: f64,
    y_bar_p: f64,
    y_bar_n: f64,
    omega_theta: FrequencyPair,
    omega_y: FrequencyPair,
    omega_yp: FrequencyPair,
    omega_yn: FrequencyPair,
    omega_yp_approx: FrequencyPair,
    omega_yn_approx: FrequencyPair,
    bound: Vec<BoundRow>,
}

pub fn analyze(cfg: &RunConfig, out_dir: Option<&Path>) -> anyhow::Result<()> {
    let params = cfg.params();
    let eq = equilibria(&params)?;
    println!("equilibrium angle (rad)      neutral {:<22} forward {:<22} backward {}", eq.theta_bar, eq.theta_bar_p, eq.theta_bar_n);
    println!("equilibrium height (m)       neutral {:<22} forward {:<22} backward {}", eq.y_bar, eq.y_bar_p, eq.y_bar_n);
    let r = resonances_at(&params, &eq)?;
    println!("{:<28} {:>22} {:>22}", "frequency", "rad/s", "Hz");
    let rows = [
        ("stick (theta)", r.omega_theta),
        ("slip (y)", r.omega_y),
        ("slip forward (y_p)", r.omega_yp),
        ("slip backward (y_n)", r.omega_yn),
        ("slip forward, approx", r.omega_yp_approx),
        ("slip backward, approx", r.omega_yn_approx),
    ];
    for (name, w) in rows {
        println!("{name:<28} {w:>22} {:>22}", w / TAU);
    }

    let mut freqs = cfg.analyze.frequencies_hz.clone();
    if freqs.is_empty() {
        freqs.push(cfg.drive.omega()? / TAU);
    }
    let bound: Vec<BoundRow> = freqs
        .iter()
        .map(|&f| BoundRow {
            freq_hz: f,
            omega_rad_s: TAU * f,
            bound: speed_upper_bound(&params, TAU * f),
        })
        .collect();
    println!("{:<22} {:>22} {:>22}", "freq_hz", "omega_rad_s", "speed bound (m/s)");
    for b in &bound {
        println!("{:<22} {:>22} {:>22}", b.freq_hz, b.omega_rad_s, b.bound);
    }

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let analysis = Analysis {
            theta_bar: eq.theta_bar,
            theta_bar_p: eq.theta_bar_p,
            theta_bar_n: eq.theta_bar_n,
            y_bar: eq.y_bar,
            y_bar_p: eq.y_bar_p,
            y_bar_n: eq.y_bar_n,
            omega_theta: FrequencyPair::new(r.omega_theta),
            omega_y: FrequencyPair::new(r.omega_y),
            omega_yp: FrequencyPair::new(r.omega_yp),
            omega_yn: FrequencyPair::new(r.omega_yn),
            omega_yp_approx: FrequencyPair::new(r.omega_yp_approx),
            omega_yn_approx: FrequencyPair::new(r.omega_yn_approx),
            bound,
        };
        output::write_toml(&dir.join("analysis.toml"), &analysis)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulationSummary {
    duration: f64,
    net_displacement: f64,
    average_speed: f64,
    window_fraction: f64,
    events: usize,
    max_overshoot: f64,
    jumped: bool,
    occupancy: Occupancy,
    window_occupancy: Occupancy,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
}

pub fn simulate(cfg: &RunConfig, out_dir: &Path) -> anyhow::Result<()> {
    let params = cfg.params();
    let drive = cfg.drive.signal()?;
    let duration = cfg.simulate_duration()?;
    let initial = match cfg.simulate.initial_theta {
        Some(theta) => HybridState::stick(0.0, theta, cfg.simulate.initial_theta_dot, 0.0, &params),
        None => rest_at_equilibrium(&params)?,
    };
    let (traj, failure) = simulate_partial(&initial, &params, &drive, &cfg.integrator, duration);

    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    output::write_trajectory(&out_dir.join("trajectory.csv"), &traj, &params)?;
    output::write_events(&out_dir.join("events.csv"), &traj)?;
    output::write_toml(&out_dir.join("config.toml"), cfg)?;

    let speed = average_speed(&traj, cfg.simulate.window_fraction).ok();
    let window_occupancy = speed
        .map(|m| traj.occupancy(m.window_start, m.window_end))
        .unwrap_or_default();
    let summary = SimulationSummary {
        duration: traj.duration(),
        net_displacement: traj.net_displacement(),
        average_speed: speed.map_or(f64::NAN, |m| m.speed),
        window_fraction: cfg.simulate.window_fraction,
        events: traj.events.len(),
        max_overshoot: traj.max_overshoot,
        jumped: traj.jump_flag,
        occupancy: traj.occupancy(traj.t_start(), traj.t_end()),
        window_occupancy,
        failure: failure.as_ref().map(|e| e.to_string()),
    };
    output::write_toml(&out_dir.join("summary.toml"), &summary)?;

    println!("simulated {} s, {} events", summary.duration, summary.events);
    println!("net displacement {} m", summary.net_displacement);
    println!("average speed {} m/s over the last {} of the run", summary.average_speed, summary.window_fraction);
    println!(
        "occupancy stick {} forward {} backward {}",
        summary.occupancy.stick, summary.occupancy.forward, summary.occupancy.backward
    );
    println!("max overshoot {} m, jumped {}", summary.max_overshoot, summary.jumped);
    if let Some(e) = failure {
        return Err(e).context("integration failed; partial output written");
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary {
    points: usize,
    failed: usize,
    jumped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    forward_peak: Option<Peak>,
    #[serde(skip_serializing_if = "Option::is_none")]
    backward_peak: Option<Peak>,
    bound_violations: usize,
    max_speed_to_bound: f64,
}

pub fn sweep(cfg: &RunConfig, out_dir: &Path, threads: Option<usize>) -> anyhow::Result<()> {
    let params = cfg.params();
    let spec = cfg.sweep_spec()?;
    let result = frequency_sweep(&params, &spec, &cfg.integrator, threads)?;
    let bound = bound_check(&result, &params);

    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    output::write_sweep(&out_dir.join("sweep.csv"), &result)?;
    output::write_toml(&out_dir.join("config.toml"), cfg)?;
    let summary = SweepSummary {
        points: result.points.len(),
        failed: result.failures(),
        jumped: result.points.iter().filter(|p| p.jumped).count(),
        forward_peak: result.forward_peak,
        backward_peak: result.backward_peak,
        bound_violations: bound.violations.len(),
        max_speed_to_bound: bound.max_ratio,
    };
    output::write_toml(&out_dir.join("summary.toml"), &summary)?;

    println!("{} points, {} failed, {} lifted off", summary.points, summary.failed, summary.jumped);
    match result.forward_peak {
        Some(p) => println!("forward peak {} Hz at {} m/s", p.freq_hz, p.speed),
        None => println!("no forward motion"),
    }
    match result.backward_peak {
        Some(p) => println!("backward peak {} Hz at {} m/s", p.freq_hz, p.speed),
        None => println!("no backward motion"),
    }
    println!("speed bound violations {}", summary.bound_violations);

    if result.success_fraction() < SWEEP_SUCCESS_THRESHOLD {
        return Err(PartialSweep {
            failed: summary.failed,
            total: summary.points,
        }
        .into());
    }
    Ok(())
}
