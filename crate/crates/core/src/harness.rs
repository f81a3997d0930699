//! Experiments built on [`simulate`]: average speed, frequency sweeps, the speed bound,
//! resonance probes and the frictionless sling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::equilibria;
use crate::error::{Error, Result};
use crate::integrator::{rest_at_equilibrium, simulate_partial, IntegratorConfig, Sampling};
use crate::params::{DriveSignal, RobotParams};
use crate::resonance::speed_upper_bound;
use crate::trajectory::{Occupancy, Trajectory};

use std::f64::consts::TAU;

/// Signed mean velocity of the joint over the tail of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedMeasurement {
    /// m/s, negative for backward motion.
    pub speed: f64,
    pub window_start: f64,
    pub window_end: f64,
    /// Leg-tip displacement over the window (m); zero unless the tip slid.
    pub tip_displacement: f64,
    /// The run ended early because the robot left the ground.
    pub jumped: bool,
}

/// Average speed over the last `window_fraction` of the simulated time span.
pub fn average_speed(traj: &Trajectory, window_fraction: f64) -> Result<SpeedMeasurement> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidParameter(
            "window fraction must lie in (0, 1]".into(),
        ));
    }
    let duration = traj.duration();
    if !(duration > 0.0) {
        return Err(Error::InvalidParameter("trajectory has zero duration".into()));
    }
    let end = traj.t_end();
    let start = end - window_fraction * duration;
    let x0 = traj.x_at(start).expect("window lies inside the run");
    let tip0 = traj.tip_at(start).expect("window lies inside the run");
    Ok(SpeedMeasurement {
        speed: (traj.final_state.x - x0) / (end - start),
        window_start: start,
        window_end: end,
        tip_displacement: traj.final_state.x_l - tip0,
        jumped: traj.jump_flag,
    })
}

fn default_window() -> f64 {
    0.5
}

/// Grid and protocol of a frequency sweep. Frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub freq_start: f64,
    pub freq_stop: f64,
    pub freq_step: f64,
    /// Drive amplitude (m).
    pub amplitude: f64,
    /// Simulated time per frequency (s).
    pub duration_per_point: f64,
    #[serde(default = "default_window")]
    pub measure_window_fraction: f64,
    /// Drive phase (rad); `pi` turns the drive into `eta = A cos(omega t)`.
    #[serde(default)]
    pub phase: f64,
    /// Output samples per point; the measurement window starts on this grid.
    #[serde(default = "default_samples")]
    pub samples_per_point: u32,
}

fn default_samples() -> u32 {
    1000
}

impl SweepSpec {
    pub fn new(freq_start: f64, freq_stop: f64, freq_step: f64, amplitude: f64, duration_per_point: f64) -> Self {
        Self {
            freq_start,
            freq_stop,
            freq_step,
            amplitude,
            duration_per_point,
            measure_window_fraction: default_window(),
            phase: 0.0,
            samples_per_point: default_samples(),
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_window(mut self, fraction: f64) -> Self {
        self.measure_window_fraction = fraction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.freq_start > 0.0 && self.freq_start.is_finite()) {
            return bad("freq_start must be > 0");
        }
        if !(self.freq_step > 0.0 && self.freq_step.is_finite()) {
            return bad("freq_step must be > 0");
        }
        if !(self.freq_stop >= self.freq_start && self.freq_stop.is_finite()) {
            return bad("freq_stop must be >= freq_start");
        }
        if !(self.measure_window_fraction > 0.0 && self.measure_window_fraction < 1.0) {
            return bad("measure_window_fraction must lie in (0, 1)");
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return bad("amplitude must be >= 0");
        }
        if !(self.duration_per_point > 0.0 && self.duration_per_point.is_finite()) {
            return bad("duration_per_point must be > 0");
        }
        if self.samples_per_point == 0 {
            return bad("samples_per_point must be > 0");
        }
        Ok(())
    }

    /// Grid frequencies `start + k step` up to `stop`.
    pub fn frequencies(&self) -> Vec<f64> {
        let span = (self.freq_stop - self.freq_start) / self.freq_step;
        let n = (span + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.freq_start + k as f64 * self.freq_step).collect()
    }

    pub fn drive_at(&self, freq_hz: f64) -> DriveSignal {
        DriveSignal::new(self.amplitude, TAU * freq_hz).with_phase(self.phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub freq_hz: f64,
    pub omega: f64,
    /// NaN when the point failed or lifted off immediately.
    pub average_speed: f64,
    pub bound: f64,
    /// Leg-tip displacement inside the measurement window (m).
    pub tip_displacement: f64,
    /// Regime fractions inside the measurement window.
    pub occupancy: Occupancy,
    pub jumped: bool,
    pub max_overshoot: f64,
    pub events: usize,
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    /// Usable for peak location: succeeded and ran the full duration.
    pub fn complete(&self) -> bool {
        self.ok() && !self.jumped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub freq_hz: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Sorted by frequency.
    pub points: Vec<SweepPoint>,
    /// Largest positive speed over complete points.
    pub forward_peak: Option<Peak>,
    /// Most negative speed over complete points.
    pub backward_peak: Option<Peak>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| !p.ok()).count()
    }

    pub fn success_fraction(&self) -> f64 {
        if self.points.is_empty() {
            return 1.0;
        }
        1.0 - self.failures() as f64 / self.points.len() as f64
    }

    fn locate_peaks(points: &[SweepPoint]) -> (Option<Peak>, Option<Peak>) {
        let mut fwd: Option<Peak> = None;
        let mut bwd: Option<Peak> = None;
        for p in points.iter().filter(|p| p.complete()) {
            let v = p.average_speed;
            if v > 0.0 && fwd.is_none_or(|f| v > f.speed) {
                fwd = Some(Peak { freq_hz: p.freq_hz, speed: v });
            }
            if v < 0.0 && bwd.is_none_or(|b| v < b.speed) {
                bwd = Some(Peak { freq_hz: p.freq_hz, speed: v });
            }
        }
        (fwd, bwd)
    }
}

/// One cold-started run at `freq_hz`; failures are recorded in the point.
pub fn sweep_point(params: &RobotParams, spec: &SweepSpec, config: &IntegratorConfig, freq_hz: f64) -> SweepPoint {
    let drive = spec.drive_at(freq_hz);
    let mut point = SweepPoint {
        freq_hz,
        omega: drive.omega,
        average_speed: f64::NAN,
        bound: speed_upper_bound(params, drive.omega),
        tip_displacement: f64::NAN,
        occupancy: Occupancy::default(),
        jumped: false,
        max_overshoot: f64::NAN,
        events: 0,
        error: None,
    };
    let cfg = config.with_sampling(Sampling::Count(spec.samples_per_point));
    let initial = match rest_at_equilibrium(params) {
        Ok(s) => s,
        Err(e) => {
            point.error = Some(e.to_string());
            return point;
        }
    };
    let (traj, failure) = simulate_partial(&initial, params, &drive, &cfg, spec.duration_per_point);
    point.jumped = traj.jump_flag;
    point.max_overshoot = traj.max_overshoot;
    point.events = traj.events.len();
    if let Some(e) = failure {
        log::warn!("sweep point {freq_hz} Hz failed: {e}");
        point.error = Some(e.to_string());
        return point;
    }
    match average_speed(&traj, spec.measure_window_fraction) {
        Ok(m) => {
            point.average_speed = m.speed;
            point.tip_displacement = m.tip_displacement;
            point.occupancy = traj.occupancy(m.window_start, m.window_end);
        }
        // lifted off at the first instant: nothing to measure
        Err(_) if traj.jump_flag => {}
        Err(e) => point.error = Some(e.to_string()),
    }
    point
}

/// Runs every grid frequency independently from rest at the neutral equilibrium.
///
/// `threads` limits the worker pool (`None` uses all cores). The result does not depend
/// on the thread count.
pub fn frequency_sweep(
    params: &RobotParams,
    spec: &SweepSpec,
    config: &IntegratorConfig,
    threads: Option<usize>,
) -> Result<SweepResult> {
    params.validate()?;
    spec.validate()?;
    config.validate()?;
    let freqs = spec.frequencies();
    let run = || -> Vec<SweepPoint> {
        freqs
            .par_iter()
            .map(|&f| sweep_point(params, spec, config, f))
            .collect()
    };
    let mut points = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    points.sort_by(|a, b| a.freq_hz.total_cmp(&b.freq_hz));
    let (forward_peak, backward_peak) = SweepResult::locate_peaks(&points);
    Ok(SweepResult {
        points,
        forward_peak,
        backward_peak,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundViolation {
    pub freq_hz: f64,
    pub speed: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub checked: usize,
    pub violations: Vec<BoundViolation>,
    /// Smallest `bound - |speed|` (m/s).
    pub min_margin: f64,
    /// Largest `|speed| / bound`.
    pub max_ratio: f64,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compares every measured point with the speed bound for `params`.
pub fn bound_check(result: &SweepResult, params: &RobotParams) -> BoundReport {
    let mut report = BoundReport {
        checked: 0,
        violations: Vec::new(),
        min_margin: f64::INFINITY,
        max_ratio: 0.0,
    };
    for p in result.points.iter().filter(|p| p.ok() && !p.average_speed.is_nan()) {
        let bound = speed_upper_bound(params, p.omega);
        let speed = p.average_speed.abs();
        report.checked += 1;
        report.min_margin = report.min_margin.min(bound - speed);
        if bound > 0.0 {
            report.max_ratio = report.max_ratio.max(speed / bound);
        }
        if speed > bound {
            report.violations.push(BoundViolation {
                freq_hz: p.freq_hz,
                speed: p.average_speed,
                bound,
            });
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseClass {
    Resonant,
    NonResonant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSettings {
    pub periods: u32,
    /// Peak-to-peak `y` over one period, in drive amplitudes, that counts as resonant.
    pub growth_threshold: f64,
    pub samples_per_period: u32,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            periods: 20,
            growth_threshold: 5.0,
            samples_per_period: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceReport {
    pub class: ResponseClass,
    /// Peak-to-peak `y` in each drive period (the last one may be partial).
    pub amplitude_trace: Vec<f64>,
    /// Largest peak-to-peak `y` over the drive amplitude.
    pub growth: f64,
    pub crossed_lower: bool,
    pub crossed_upper: bool,
    pub jumped: bool,
    pub t_end: f64,
}

impl ResonanceReport {
    pub fn crossed_bifurcation(&self) -> bool {
        self.crossed_lower || self.crossed_upper
    }
}

pub fn resonance_probe(params: &RobotParams, drive: &DriveSignal, config: &IntegratorConfig) -> Result<ResonanceReport> {
    resonance_probe_with(params, drive, config, &ProbeSettings::default())
}

/// Drives the robot from rest and tracks the per-period peak-to-peak height.
///
/// The response is resonant once that height reaches `growth_threshold` drive amplitudes
/// within the probed periods. Crossing of the directional equilibrium heights is reported
/// alongside. A run that ends early (lift-off or integration failure) is classified on what
/// was simulated.
pub fn resonance_probe_with(
    params: &RobotParams,
    drive: &DriveSignal,
    config: &IntegratorConfig,
    settings: &ProbeSettings,
) -> Result<ResonanceReport> {
    params.validate()?;
    drive.validate()?;
    let period = drive
        .period()
        .filter(|_| drive.amplitude > 0.0)
        .ok_or_else(|| Error::InvalidParameter("resonance probe needs a drive".into()))?;
    if settings.periods == 0 || settings.samples_per_period == 0 || !(settings.growth_threshold > 0.0) {
        return Err(Error::InvalidParameter("invalid probe settings".into()));
    }
    let eq = equilibria(params)?;
    let initial = rest_at_equilibrium(params)?;
    let cfg = config.with_sampling(Sampling::PerPeriod(settings.samples_per_period));
    let (traj, failure) = simulate_partial(&initial, params, drive, &cfg, settings.periods as f64 * period);
    if let Some(e) = &failure {
        log::warn!("resonance probe stopped early: {e}");
    }

    let mut trace: Vec<f64> = Vec::new();
    let mut bucket = usize::MAX;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut crossed_lower = false;
    let mut crossed_upper = false;
    let t0 = traj.t_start();
    for s in &traj.samples {
        let y = s.state.y;
        crossed_lower |= y < eq.y_bar_p;
        crossed_upper |= y > eq.y_bar_n;
        let k = (((s.state.t - t0) / period).floor() as usize).min(settings.periods as usize - 1);
        if k != bucket {
            if bucket != usize::MAX {
                trace.push(hi - lo);
            }
            bucket = k;
            lo = f64::INFINITY;
            hi = f64::NEG_INFINITY;
        }
        lo = lo.min(y);
        hi = hi.max(y);
    }
    if hi >= lo {
        trace.push(hi - lo);
    }
    let growth = trace.iter().copied().fold(0.0, f64::max) / drive.amplitude;
    let class = if growth >= settings.growth_threshold {
        ResponseClass::Resonant
    } else {
        ResponseClass::NonResonant
    };
    Ok(ResonanceReport {
        class,
        amplitude_trace: trace,
        growth,
        crossed_lower,
        crossed_upper,
        jumped: traj.jump_flag,
        t_end: traj.t_end(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlingOutcome {
    /// Net joint displacement (m).
    pub displacement: f64,
    /// Net leg-tip displacement (m); exactly zero when the tip never slid.
    pub tip_displacement: f64,
    pub events: usize,
    pub jumped: bool,
}

/// Runs a frictionless-sliding robot (`mu_k = 0`, `mu_s > 0`) from rest for `periods`
/// drive periods and reports where it went.
pub fn sling_experiment(
    params: &RobotParams,
    drive: &DriveSignal,
    config: &IntegratorConfig,
    periods: u32,
) -> Result<SlingOutcome> {
    if params.mu_kinetic != 0.0 || !(params.mu_static > 0.0) {
        return Err(Error::InvalidParameter(
            "sling experiment needs mu_kinetic = 0 and mu_static > 0".into(),
        ));
    }
    let period = drive
        .period()
        .ok_or_else(|| Error::InvalidParameter("sling experiment needs a drive".into()))?;
    let initial = rest_at_equilibrium(params)?;
    let (traj, failure) = simulate_partial(&initial, params, drive, config, periods as f64 * period);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(SlingOutcome {
        displacement: traj.net_displacement(),
        tip_displacement: traj.final_state.x_l - traj.initial.x_l,
        events: traj.events.len(),
        jumped: traj.jump_flag,
    })
}
