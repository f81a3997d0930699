//! Adaptive hybrid integration with event location.
//!
//! Inside a regime the state is advanced with Dormand–Prince 5(4): `(theta, theta')` while
//! stuck (tip stored, not integrated) and `(x, y, x', y')` while sliding. Guard functions
//! are checked at every accepted step; a sign change is localised by bisection on the step
//! length from the last accepted state, and the switching rules decide what happens next.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    decide_transition_with, normal_force, slip_accel_raw, stick_acceleration, stick_demand, Guard,
    HybridState, Regime, Transition,
};
use crate::equilibrium::Direction;
use crate::error::{Error, Result};
use crate::params::{DriveSignal, RobotParams};
use crate::rk::{dopri_step, error_norm};
use crate::trajectory::{Sample, Trajectory, TransitionEvent};

/// How densely `simulate` records samples (events are always recorded).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Samples per drive period; falls back to `duration / n` without a drive.
    PerPeriod(u32),
    /// Fixed output interval (s).
    Interval(f64),
    /// `n` equal intervals over the run.
    Count(u32),
    EventsOnly,
}

/// What happens when the normal force vanishes or the leg passes its free angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftOff {
    /// Record a jump event and end the trajectory.
    #[default]
    Terminate,
    /// Keep integrating the ground-contact equations; only `max_overshoot` records it.
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step (s); also capped at 1/16 of the drive period.
    pub max_step: f64,
    /// Width to which event times are localised (s).
    pub event_tol: f64,
    /// Leg-tip speed below which a sliding tip is re-examined (m/s).
    pub epsilon_v: f64,
    pub max_events_per_period: usize,
    pub sampling: Sampling,
    pub max_samples: usize,
    pub lift_off: LiftOff,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 1e-2,
            event_tol: 1e-10,
            epsilon_v: 1e-9,
            max_events_per_period: 1000,
            sampling: Sampling::PerPeriod(2000),
            max_samples: 2_000_000,
            lift_off: LiftOff::Terminate,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            (self.rel_tol, "rel_tol"),
            (self.abs_tol, "abs_tol"),
            (self.max_step, "max_step"),
            (self.event_tol, "event_tol"),
            (self.epsilon_v, "epsilon_v"),
        ];
        for (v, name) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0")));
            }
        }
        if self.event_tol >= self.max_step {
            return Err(Error::InvalidParameter("event_tol must be < max_step".into()));
        }
        if self.max_events_per_period == 0 {
            return Err(Error::InvalidParameter("max_events_per_period must be > 0".into()));
        }
        match self.sampling {
            Sampling::Interval(dt) if !(dt > 0.0) => {
                return Err(Error::InvalidParameter("sampling interval must be > 0".into()))
            }
            Sampling::PerPeriod(0) | Sampling::Count(0) => {
                return Err(Error::InvalidParameter("sample count must be > 0".into()))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_lift_off(mut self, lift_off: LiftOff) -> Self {
        self.lift_off = lift_off;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }
}

/// Result of advancing one regime arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentOutcome {
    /// State at `t_stop`, or right after the switch when an event fired.
    pub state: HybridState,
    pub event: Option<TransitionEvent>,
}

/// Guard values of a regime: a crossing from `> 0` to `<= 0` is an event.
const MAX_GUARDS: usize = 4;

#[derive(Clone, Copy)]
struct Guards {
    values: [f64; MAX_GUARDS],
    tolerance: [f64; MAX_GUARDS],
    tip_speed: [bool; MAX_GUARDS],
    len: usize,
}

trait RegimeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> Result<[f64; N]>;
    fn state(&self, t: f64, y: &[f64; N]) -> HybridState;
    fn guards(&self, t: f64, y: &[f64; N]) -> Result<Guards>;
}

struct StickSystem<'a> {
    params: &'a RobotParams,
    drive: &'a DriveSignal,
    x_l: f64,
    force_tol: f64,
    lift_guards: bool,
}

impl RegimeSystem<2> for StickSystem<'_> {
    fn rhs(&self, t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        Ok([y[1], stick_acceleration(y[0], y[1], t, self.params, self.drive)])
    }

    fn state(&self, t: f64, y: &[f64; 2]) -> HybridState {
        HybridState::stick(t, y[0], y[1], self.x_l, self.params)
    }

    fn guards(&self, t: f64, y: &[f64; 2]) -> Result<Guards> {
        if !(y[0] > 0.0 && y[0] < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Geometry {
                t,
                y: self.params.leg_length * y[0].sin(),
            });
        }
        let d = stick_demand(y[0], y[1], t, self.params, self.drive);
        Ok(Guards {
            values: [d.margin, d.normal_force, self.params.theta0 - y[0], 0.0],
            tolerance: [self.force_tol, self.force_tol, 1e-12, 0.0],
            tip_speed: [false; MAX_GUARDS],
            len: if self.lift_guards { 3 } else { 1 },
        })
    }
}

struct SlipSystem<'a> {
    params: &'a RobotParams,
    drive: &'a DriveSignal,
    direction: Direction,
    epsilon_v: f64,
    force_tol: f64,
    lift_guards: bool,
}

impl RegimeSystem<4> for SlipSystem<'_> {
    fn rhs(&self, t: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        let a = slip_accel_raw(t, y[1], y[3], self.params, self.drive, self.direction)?;
        Ok([y[2], y[3], a.ax, a.ay])
    }

    fn state(&self, t: f64, y: &[f64; 4]) -> HybridState {
        HybridState::slip(t, y[0], y[1], y[2], y[3], self.direction, self.params)
    }

    fn guards(&self, t: f64, y: &[f64; 4]) -> Result<Guards> {
        let r = self.params.leg_length;
        let a = slip_accel_raw(t, y[1], y[3], self.params, self.drive, self.direction)?;
        let chord = (r * r - y[1] * y[1]).sqrt();
        let tip = self.direction.sign() * (y[2] + y[3] * y[1] / chord);
        let theta = (y[1] / r).asin();
        let half = 0.5 * self.epsilon_v;
        Ok(Guards {
            // arrest (armed once the tip is clearly moving), wrong-way motion, lift-off
            values: [tip - half, tip + half, a.normal_force, self.params.theta0 - theta],
            tolerance: [half, half, self.force_tol, 1e-12],
            tip_speed: [true, true, false, false],
            len: if self.lift_guards { 4 } else { 2 },
        })
    }
}

/// Receives output while a segment is advanced.
pub(crate) trait Recorder {
    fn next_sample_time(&self) -> Option<f64>;
    fn record(&mut self, state: &HybridState, normal_force: f64);
    fn observe(&mut self, state: &HybridState);
    fn skip(&mut self) {}
}

struct NullRecorder;

impl Recorder for NullRecorder {
    fn next_sample_time(&self) -> Option<f64> {
        None
    }
    fn record(&mut self, _: &HybridState, _: f64) {}
    fn observe(&mut self, _: &HybridState) {}
}

pub(crate) struct Stepper<'a> {
    params: &'a RobotParams,
    drive: &'a DriveSignal,
    cfg: &'a IntegratorConfig,
    max_step: f64,
    h: f64,
    force_tol: f64,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(params: &'a RobotParams, drive: &'a DriveSignal, cfg: &'a IntegratorConfig) -> Self {
        let mut max_step = cfg.max_step;
        if let Some(period) = drive.period() {
            if drive.amplitude > 0.0 {
                max_step = max_step.min(period / 16.0);
            }
        }
        let g_scale = params.gravity + drive.amplitude * drive.omega * drive.omega;
        let g_scale = if g_scale > 0.0 { g_scale } else { 1.0 };
        Self {
            params,
            drive,
            cfg,
            max_step,
            h: max_step * 1e-3,
            force_tol: 1e-9 * params.mass * g_scale,
        }
    }

    pub(crate) fn advance(
        &mut self,
        start: HybridState,
        t_stop: f64,
        rec: &mut dyn Recorder,
    ) -> Result<SegmentOutcome> {
        start.check_geometry(self.params)?;
        if t_stop <= start.t {
            return Ok(SegmentOutcome { state: start, event: None });
        }
        let eps = self.cfg.epsilon_v;
        match self.decide(&start, eps)? {
            Transition::Remain => {}
            tr => return Ok(self.apply(&start, tr)),
        }
        match start.regime.direction() {
            None => {
                let sys = StickSystem {
                    params: self.params,
                    drive: self.drive,
                    x_l: start.x_l,
                    force_tol: self.force_tol,
                    lift_guards: self.detect_lift_off(),
                };
                let y0 = [start.theta(self.params), start.theta_dot(self.params)];
                self.run(&sys, start.t, y0, t_stop, rec)
            }
            Some(direction) => {
                let sys = SlipSystem {
                    params: self.params,
                    drive: self.drive,
                    direction,
                    epsilon_v: eps,
                    force_tol: self.force_tol,
                    lift_guards: self.detect_lift_off(),
                };
                let y0 = [start.x, start.y, start.vx, start.vy];
                self.run(&sys, start.t, y0, t_stop, rec)
            }
        }
    }

    fn detect_lift_off(&self) -> bool {
        self.cfg.lift_off == LiftOff::Terminate
    }

    fn decide(&self, at: &HybridState, eps: f64) -> Result<Transition> {
        decide_transition_with(at, self.params, self.drive, eps, self.detect_lift_off())
    }

    fn apply(&self, at: &HybridState, tr: Transition) -> SegmentOutcome {
        match tr {
            Transition::Remain => SegmentOutcome { state: *at, event: None },
            Transition::Jump => SegmentOutcome {
                state: *at,
                event: Some(TransitionEvent {
                    t: at.t,
                    from: at.regime,
                    to: None,
                    guard: Guard::Jump,
                    state: *at,
                }),
            },
            Transition::Enter { regime, guard } => {
                let next = match regime {
                    Regime::Stick => at.captured(self.params),
                    _ => HybridState {
                        regime,
                        x_l: at.x - at.chord(self.params),
                        ..*at
                    },
                };
                SegmentOutcome {
                    state: next,
                    event: Some(TransitionEvent {
                        t: at.t,
                        from: at.regime,
                        to: Some(regime),
                        guard,
                        state: *at,
                    }),
                }
            }
        }
    }

    fn run<const N: usize, S: RegimeSystem<N>>(
        &mut self,
        sys: &S,
        t0: f64,
        y0: [f64; N],
        t_stop: f64,
        rec: &mut dyn Recorder,
    ) -> Result<SegmentOutcome> {
        let rhs = |t: f64, y: &[f64; N]| sys.rhs(t, y);
        let mut t = t0;
        let mut y = y0;
        let mut g_prev = sys.guards(t, &y)?;
        loop {
            let remaining = t_stop - t;
            let h_floor = 64.0 * f64::EPSILON * t.abs().max(self.max_step);
            let mut h = self.h.min(self.max_step);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let trial = dopri_step(&rhs, t, &y, h).and_then(|s| {
                let g = sys.guards(t + h, &s.y)?;
                Ok((s, g))
            });
            let (step, g_new) = match trial {
                Ok(v) => v,
                Err(e) => {
                    if h <= h_floor {
                        return Err(e);
                    }
                    self.h = 0.25 * h;
                    continue;
                }
            };
            let err = error_norm(&y, &step, self.cfg.rel_tol, self.cfg.abs_tol);
            if !err.is_finite() || err > 1.0 {
                if h <= h_floor {
                    return Err(Error::StepUnderflow { t, h });
                }
                let factor = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).max(0.1)
                } else {
                    0.1
                };
                self.h = h * factor;
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !last {
                self.h = (h * factor).min(self.max_step);
            }

            let crossed = (0..g_new.len).find(|&i| g_prev.values[i] > 0.0 && g_new.values[i] <= 0.0);
            if crossed.is_some() {
                let (tau, y_ev, which) = self.locate(sys, t, &y, h, &g_prev)?;
                let t_ev = t + tau;
                self.emit_samples(sys, t, &y, t_ev, rec)?;
                let at = sys.state(t_ev, &y_ev);
                rec.observe(&at);
                let gv = sys.guards(t_ev, &y_ev)?;
                let eps = if gv.tip_speed[which] {
                    self.cfg
                        .epsilon_v
                        .max(at.xl_dot(self.params).abs() * (1.0 + 1e-12))
                } else {
                    self.cfg.epsilon_v
                };
                match self.decide(&at, eps)? {
                    Transition::Remain => {
                        t = t_ev;
                        y = y_ev;
                        g_prev = gv;
                        continue;
                    }
                    tr => return Ok(self.apply(&at, tr)),
                }
            }

            self.emit_samples(sys, t, &y, t + h, rec)?;
            t = if last { t_stop } else { t + h };
            y = step.y;
            g_prev = g_new;
            rec.observe(&sys.state(t, &y));
            if last {
                return Ok(SegmentOutcome {
                    state: sys.state(t, &y),
                    event: None,
                });
            }
        }
    }

    /// Bisects the step length for the earliest guard crossing. Returns the step length,
    /// the state just past the crossing and the index of the guard that fired.
    fn locate<const N: usize, S: RegimeSystem<N>>(
        &self,
        sys: &S,
        t: f64,
        y: &[f64; N],
        h: f64,
        g_start: &Guards,
    ) -> Result<(f64, [f64; N], usize)> {
        let rhs = |tt: f64, yy: &[f64; N]| sys.rhs(tt, yy);
        let eval = |tau: f64| -> Result<([f64; N], Guards)> {
            let s = dopri_step(&rhs, t, y, tau)?;
            let g = sys.guards(t + tau, &s.y)?;
            Ok((s.y, g))
        };
        let fired = |g: &Guards| (0..g.len).find(|&i| g_start.values[i] > 0.0 && g.values[i] <= 0.0);
        let mut lo = 0.0;
        let mut hi = h;
        let (mut y_hi, mut g_hi) = eval(h)?;
        for _ in 0..200 {
            let which = fired(&g_hi).expect("bracket keeps a fired guard");
            let width = hi - lo;
            let settled = width <= self.cfg.event_tol && g_hi.values[which].abs() <= g_hi.tolerance[which];
            let resolution = 4.0 * f64::EPSILON * (t + hi).abs().max(1e-300);
            if settled || width <= resolution {
                return Ok((hi, y_hi, which));
            }
            let mid = 0.5 * (lo + hi);
            match eval(mid) {
                Ok((ym, gm)) => {
                    if fired(&gm).is_some() {
                        hi = mid;
                        y_hi = ym;
                        g_hi = gm;
                    } else {
                        lo = mid;
                    }
                }
                // infeasible midpoint: the crossing lies before it
                Err(_) => hi = mid,
            }
        }
        let which = fired(&g_hi).expect("bracket keeps a fired guard");
        Ok((hi, y_hi, which))
    }

    fn emit_samples<const N: usize, S: RegimeSystem<N>>(
        &self,
        sys: &S,
        t: f64,
        y: &[f64; N],
        t_end: f64,
        rec: &mut dyn Recorder,
    ) -> Result<()> {
        let rhs = |tt: f64, yy: &[f64; N]| sys.rhs(tt, yy);
        while let Some(ts) = rec.next_sample_time() {
            if ts > t_end {
                break;
            }
            if ts < t {
                rec.skip();
                continue;
            }
            let ys = if ts == t { *y } else { dopri_step(&rhs, t, y, ts - t)?.y };
            let st = sys.state(ts, &ys);
            let n = normal_force(&st, self.params, self.drive)?;
            rec.record(&st, n);
        }
        Ok(())
    }
}

/// Advances `state` in its current regime until `t_stop` or the first switching event.
pub fn integrate_segment(
    state: &HybridState,
    params: &RobotParams,
    drive: &DriveSignal,
    config: &IntegratorConfig,
    t_stop: f64,
) -> Result<SegmentOutcome> {
    params.validate()?;
    drive.validate()?;
    config.validate()?;
    let mut stepper = Stepper::new(params, drive, config);
    stepper.advance(*state, t_stop, &mut NullRecorder)
}

struct TrajectoryRecorder {
    samples: Vec<Sample>,
    grid_t0: f64,
    grid_dt: Option<f64>,
    next_index: u64,
    t_end: f64,
    max_samples: usize,
    max_overshoot: f64,
    y_free: f64,
}

impl TrajectoryRecorder {
    fn push(&mut self, state: &HybridState, normal_force: f64) {
        if self.samples.len() >= self.max_samples {
            return;
        }
        if self.samples.last().is_some_and(|s| s.state.t >= state.t) {
            return;
        }
        self.samples.push(Sample {
            state: *state,
            normal_force,
        });
    }
}

impl Recorder for TrajectoryRecorder {
    fn next_sample_time(&self) -> Option<f64> {
        let dt = self.grid_dt?;
        let ts = self.grid_t0 + self.next_index as f64 * dt;
        (ts <= self.t_end && self.samples.len() < self.max_samples).then_some(ts)
    }

    fn record(&mut self, state: &HybridState, normal_force: f64) {
        self.next_index += 1;
        self.push(state, normal_force);
    }

    fn skip(&mut self) {
        self.next_index += 1;
    }

    fn observe(&mut self, state: &HybridState) {
        self.max_overshoot = self.max_overshoot.max(state.y - self.y_free);
    }
}

/// Chains regime arcs over `duration`, recording samples and every transition.
///
/// On failure the partial trajectory up to the failing point is returned with the error.
pub fn simulate_partial(
    initial: &HybridState,
    params: &RobotParams,
    drive: &DriveSignal,
    config: &IntegratorConfig,
    duration: f64,
) -> (Trajectory, Option<Error>) {
    let t_end = initial.t + duration;
    let grid_dt = match config.sampling {
        Sampling::PerPeriod(n) => Some(match drive.period() {
            Some(p) if drive.amplitude > 0.0 => p / n as f64,
            _ => duration / n as f64,
        }),
        Sampling::Interval(dt) => Some(dt),
        Sampling::Count(n) => Some(duration / n as f64),
        Sampling::EventsOnly => None,
    };
    let mut rec = TrajectoryRecorder {
        samples: Vec::new(),
        grid_t0: initial.t,
        grid_dt,
        next_index: 0,
        t_end,
        max_samples: config.max_samples,
        max_overshoot: initial.y - params.leg_length * params.theta0.sin(),
        y_free: params.leg_length * params.theta0.sin(),
    };
    let mut traj = Trajectory {
        samples: Vec::new(),
        events: Vec::new(),
        jump_flag: false,
        max_overshoot: rec.max_overshoot,
        initial: *initial,
        final_state: *initial,
    };

    let checks = params
        .validate()
        .and_then(|_| drive.validate())
        .and_then(|_| config.validate())
        .and_then(|_| {
            if duration > 0.0 && duration.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter("duration must be > 0".into()))
            }
        })
        .and_then(|_| initial.check_geometry(params))
        .and_then(|_| normal_force(initial, params, drive));
    if let Err(e) = checks {
        return (traj, Some(e));
    }
    // the initial state is always the first sample
    let n0 = normal_force(initial, params, drive).unwrap_or(f64::NAN);
    rec.push(initial, n0);

    let window = drive
        .period()
        .filter(|_| drive.amplitude > 0.0)
        .unwrap_or(1.0);
    let mut stepper = Stepper::new(params, drive, config);
    let mut state = *initial;
    let mut failure = None;
    let mut recent: std::collections::VecDeque<f64> = Default::default();
    while state.t < t_end {
        let out = match stepper.advance(state, t_end, &mut rec) {
            Ok(o) => o,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        state = out.state;
        if let Some(ev) = out.event {
            traj.events.push(ev);
            if ev.to.is_none() {
                traj.jump_flag = true;
                log::info!("robot leaves the ground at t = {:.9e}; trajectory ends", ev.t);
                break;
            }
            if let Ok(n) = normal_force(&state, params, drive) {
                rec.push(&state, n);
            }
            recent.push_back(ev.t);
            while recent.front().is_some_and(|&t0| ev.t - t0 > window) {
                recent.pop_front();
            }
            if recent.len() > config.max_events_per_period {
                failure = Some(Error::Chatter {
                    t: ev.t,
                    events: recent.len(),
                });
                break;
            }
        }
    }
    if let Ok(n) = normal_force(&state, params, drive) {
        rec.push(&state, n);
    }
    traj.final_state = state;
    traj.max_overshoot = rec.max_overshoot;
    traj.samples = rec.samples;
    (traj, failure)
}

pub fn simulate(
    initial: &HybridState,
    params: &RobotParams,
    drive: &DriveSignal,
    config: &IntegratorConfig,
    duration: f64,
) -> Result<Trajectory> {
    match simulate_partial(initial, params, drive, config, duration) {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// Rest in the stuck regime at the neutral equilibrium with the tip at the origin.
pub fn rest_at_equilibrium(params: &RobotParams) -> Result<HybridState> {
    let theta = crate::equilibrium::solve_equilibrium(params)?;
    Ok(HybridState::at_rest(theta, params))
}
