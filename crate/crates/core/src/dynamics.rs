//! Regime-wise equations of motion, guard quantities and the switching rules.
//!
//! Coordinates: `(x, y)` is the leg joint, `x_l = x - sqrt(R^2 - y^2)` the leg tip and
//! `theta = asin(y / R)` the leg angle. Vertical driving enters every equation through
//! the effective gravity `G(t) = g + eta''(t)`.

use serde::Serialize;

use crate::equilibrium::Direction;
use crate::error::{Error, Result};
use crate::params::{DriveSignal, RobotParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    Stick,
    SlipForward,
    SlipBackward,
}

impl Regime {
    pub fn slip(direction: Direction) -> Self {
        match direction {
            Direction::Forward => Regime::SlipForward,
            Direction::Backward => Regime::SlipBackward,
        }
    }

    pub fn direction(self) -> Option<Direction> {
        match self {
            Regime::Stick => None,
            Regime::SlipForward => Some(Direction::Forward),
            Regime::SlipBackward => Some(Direction::Backward),
        }
    }

    pub fn is_slip(self) -> bool {
        self != Regime::Stick
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::Stick => "stick",
            Regime::SlipForward => "slip_fwd",
            Regime::SlipBackward => "slip_bwd",
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Regime::Stick => 0,
            Regime::SlipForward => 1,
            Regime::SlipBackward => 2,
        }
    }
}

/// Which switching condition produced a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Guard {
    StickYield,
    StickCapture,
    SlipReversal,
    Jump,
}

impl Guard {
    pub fn label(self) -> &'static str {
        match self {
            Guard::StickYield => "stick_yield",
            Guard::StickCapture => "stick_capture",
            Guard::SlipReversal => "slip_reversal",
            Guard::Jump => "jump",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HybridState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    /// Leg-tip anchor. Held fixed while stuck; tracks `x - sqrt(R^2 - y^2)` while sliding.
    pub x_l: f64,
    pub regime: Regime,
}

impl HybridState {
    /// Stuck state built from the leg angle; Cartesian values follow the rigid-leg constraint.
    pub fn stick(t: f64, theta: f64, theta_dot: f64, x_l: f64, params: &RobotParams) -> Self {
        let k = stick_cartesian_kinematics(theta, theta_dot, 0.0, x_l, params);
        Self {
            t,
            x: k.x,
            y: k.y,
            vx: k.vx,
            vy: k.vy,
            x_l,
            regime: Regime::Stick,
        }
    }

    /// At rest, stuck, at angle `theta` with the tip at the origin.
    pub fn at_rest(theta: f64, params: &RobotParams) -> Self {
        Self::stick(0.0, theta, 0.0, 0.0, params)
    }

    pub fn slip(t: f64, x: f64, y: f64, vx: f64, vy: f64, direction: Direction, params: &RobotParams) -> Self {
        let x_l = x - (params.leg_length.powi(2) - y * y).sqrt();
        Self {
            t,
            x,
            y,
            vx,
            vy,
            x_l,
            regime: Regime::slip(direction),
        }
    }

    /// Horizontal half-chord `sqrt(R^2 - y^2) = R cos(theta)`.
    pub fn chord(&self, params: &RobotParams) -> f64 {
        (params.leg_length.powi(2) - self.y * self.y).sqrt()
    }

    pub fn theta(&self, params: &RobotParams) -> f64 {
        (self.y / params.leg_length).asin()
    }

    pub fn theta_dot(&self, params: &RobotParams) -> f64 {
        self.vy / self.chord(params)
    }

    /// Leg-tip velocity `x' + y' y / sqrt(R^2 - y^2)`.
    pub fn xl_dot(&self, params: &RobotParams) -> f64 {
        self.vx + self.vy * self.y / self.chord(params)
    }

    pub fn check_geometry(&self, params: &RobotParams) -> Result<()> {
        if self.y > 0.0 && self.y < params.leg_length && self.y.is_finite() {
            Ok(())
        } else {
            Err(Error::Geometry { t: self.t, y: self.y })
        }
    }

    /// The same mechanical state with the tip pinned where it currently is.
    pub fn captured(&self, params: &RobotParams) -> Self {
        let theta = self.theta(params);
        let theta_dot = self.theta_dot(params);
        let x_l = self.x - self.chord(params);
        Self::stick(self.t, theta, theta_dot, x_l, params)
    }
}

/// Accelerations of the joint and the resulting normal force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Accel {
    pub ax: f64,
    pub ay: f64,
    pub normal_force: f64,
}

/// Sliding equations with kinetic friction opposing the tip velocity.
pub fn slip_accelerations(
    state: &HybridState,
    params: &RobotParams,
    drive: &DriveSignal,
    direction: Direction,
) -> Result<Accel> {
    slip_accel_raw(state.t, state.y, state.vy, params, drive, direction)
}

pub(crate) fn slip_accel_raw(
    t: f64,
    y: f64,
    vy: f64,
    params: &RobotParams,
    drive: &DriveSignal,
    direction: Direction,
) -> Result<Accel> {
    let r = params.leg_length;
    if !(y > 0.0 && y < r) {
        return Err(Error::Geometry { t, y });
    }
    let s = direction.sign();
    let chord_sq = r * r - y * y;
    let chord = chord_sq.sqrt();
    let theta = (y / r).asin();
    let lever = 1.0 + params.mu_kinetic * s * y / chord;
    if lever <= 0.0 {
        return Err(Error::SingularSlip { t, denominator: lever });
    }
    let g_eff = drive.effective_gravity(params.gravity, t);
    let spring = params.kappa * (theta - params.theta0) / chord;
    let damping = if params.zeta > 0.0 {
        params.zeta * vy / chord_sq
    } else {
        0.0
    };
    let ay = -g_eff - (spring + damping) / (params.mass * lever);
    let normal_per_mass = ay + g_eff;
    let ax = -params.mu_kinetic * normal_per_mass * s;
    Ok(Accel {
        ax,
        ay,
        normal_force: params.mass * normal_per_mass,
    })
}

/// Angular acceleration of the stuck leg rotating about its tip.
pub fn stick_acceleration(
    theta: f64,
    theta_dot: f64,
    t: f64,
    params: &RobotParams,
    drive: &DriveSignal,
) -> f64 {
    let g_eff = drive.effective_gravity(params.gravity, t);
    let r = params.leg_length;
    let torque = params.mass * g_eff * r * theta.cos()
        + params.kappa * (theta - params.theta0)
        + params.zeta * theta_dot;
    -torque / (params.mass * r * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StickKinematics {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub ax: f64,
    pub ay: f64,
}

/// Joint position, velocity and acceleration of a leg pivoting about a fixed tip.
pub fn stick_cartesian_kinematics(
    theta: f64,
    theta_dot: f64,
    theta_ddot: f64,
    x_l: f64,
    params: &RobotParams,
) -> StickKinematics {
    let r = params.leg_length;
    let (sin, cos) = theta.sin_cos();
    let w2 = theta_dot * theta_dot;
    StickKinematics {
        x: x_l + r * cos,
        y: r * sin,
        vx: -r * theta_dot * sin,
        vy: r * theta_dot * cos,
        ax: -r * theta_ddot * sin - r * w2 * cos,
        ay: r * theta_ddot * cos - r * w2 * sin,
    }
}

/// What holding the tip in place would demand at this instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StickDemand {
    pub ax: f64,
    pub ay: f64,
    pub normal_force: f64,
    /// `m |x''|`
    pub required_tangential: f64,
    /// `mu_hold N - m |x''|`
    pub margin: f64,
}

/// Stick-hypothetical demand from angle and angular rate.
pub fn stick_demand(
    theta: f64,
    theta_dot: f64,
    t: f64,
    params: &RobotParams,
    drive: &DriveSignal,
) -> StickDemand {
    let theta_ddot = stick_acceleration(theta, theta_dot, t, params, drive);
    let k = stick_cartesian_kinematics(theta, theta_dot, theta_ddot, 0.0, params);
    let g_eff = drive.effective_gravity(params.gravity, t);
    let normal_force = params.mass * (k.ay + g_eff);
    let required_tangential = params.mass * k.ax.abs();
    StickDemand {
        ax: k.ax,
        ay: k.ay,
        normal_force,
        required_tangential,
        margin: params.holding_coefficient() * normal_force - required_tangential,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuardReport {
    pub xl_dot: f64,
    /// Normal force of the active regime.
    pub normal_force: f64,
    /// Horizontal force needed to keep (or bring) the tip at rest, `m |x''|` under the
    /// stick equations.
    pub required_tangential: f64,
    /// `mu_hold N_stick - m |x''_stick|`; positive while static friction can hold the tip.
    pub stick_margin: f64,
}

pub fn guard_report(state: &HybridState, params: &RobotParams, drive: &DriveSignal) -> Result<GuardReport> {
    let theta = state.theta(params);
    let theta_dot = state.theta_dot(params);
    let demand = stick_demand(theta, theta_dot, state.t, params, drive);
    match state.regime.direction() {
        None => Ok(GuardReport {
            xl_dot: 0.0,
            normal_force: demand.normal_force,
            required_tangential: demand.required_tangential,
            stick_margin: demand.margin,
        }),
        Some(direction) => {
            let acc = slip_accelerations(state, params, drive, direction)?;
            Ok(GuardReport {
                xl_dot: state.xl_dot(params),
                normal_force: acc.normal_force,
                required_tangential: demand.required_tangential,
                stick_margin: demand.margin,
            })
        }
    }
}

/// Outcome of evaluating the switching rules at an instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Transition {
    Remain,
    Enter { regime: Regime, guard: Guard },
    Jump,
}

/// Normal force of the active regime, per unit of `m g` when `g > 0`.
pub(crate) fn normal_force(state: &HybridState, params: &RobotParams, drive: &DriveSignal) -> Result<f64> {
    match state.regime.direction() {
        None => {
            let th = state.theta(params);
            Ok(stick_demand(th, state.theta_dot(params), state.t, params, drive).normal_force)
        }
        Some(d) => Ok(slip_accelerations(state, params, drive, d)?.normal_force),
    }
}

/// Applies the switching rules in priority order: jump, stick capture, slip reversal,
/// stick yield.
///
/// A sliding tip is only re-examined once `|x_l'| <= epsilon_v`. It is captured when the
/// stick-hypothetical horizontal force is strictly inside the holding cone; otherwise it
/// slides away from the direction of that force. A stuck tip yields once the margin
/// reaches zero, slipping backward when `x'' > 0` and forward when `x'' < 0`.
pub fn decide_transition(
    state: &HybridState,
    params: &RobotParams,
    drive: &DriveSignal,
    epsilon_v: f64,
) -> Result<Transition> {
    decide_transition_with(state, params, drive, epsilon_v, true)
}

/// As [`decide_transition`]; with `detect_lift_off == false` loss of contact is not a
/// switching condition and the contact equations are kept.
pub(crate) fn decide_transition_with(
    state: &HybridState,
    params: &RobotParams,
    drive: &DriveSignal,
    epsilon_v: f64,
    detect_lift_off: bool,
) -> Result<Transition> {
    state.check_geometry(params)?;
    let theta = state.theta(params);
    let theta_dot = state.theta_dot(params);
    let demand = stick_demand(theta, theta_dot, state.t, params, drive);
    let normal = normal_force(state, params, drive)?;

    let lifted =
        detect_lift_off && (normal <= 0.0 || (theta >= params.theta0 && theta_dot > 0.0));

    match state.regime.direction() {
        None => {
            let yields = demand.margin < 0.0 || (demand.margin == 0.0 && demand.ax != 0.0);
            if lifted {
                if yields {
                    log::debug!("t = {}: jump and stick yield coincide; jump wins", state.t);
                }
                return Ok(Transition::Jump);
            }
            if !yields {
                return Ok(Transition::Remain);
            }
            let to = if demand.ax > 0.0 {
                Regime::SlipBackward
            } else {
                Regime::SlipForward
            };
            Ok(Transition::Enter {
                regime: to,
                guard: Guard::StickYield,
            })
        }
        Some(current) => {
            let near_rest = state.xl_dot(params).abs() <= epsilon_v;
            if lifted {
                if near_rest {
                    log::debug!("t = {}: jump and tip arrest coincide; jump wins", state.t);
                }
                return Ok(Transition::Jump);
            }
            if !near_rest {
                return Ok(Transition::Remain);
            }
            if demand.margin > 0.0 {
                return Ok(Transition::Enter {
                    regime: Regime::Stick,
                    guard: Guard::StickCapture,
                });
            }
            let to = if demand.ax > 0.0 {
                Direction::Backward
            } else if demand.ax < 0.0 {
                Direction::Forward
            } else {
                current.opposite()
            };
            if to == current {
                return Ok(Transition::Remain);
            }
            Ok(Transition::Enter {
                regime: Regime::slip(to),
                guard: Guard::SlipReversal,
            })
        }
    }
}

/// `T + V` with the potential measured from `y = 0` and the spring at rest at `theta0`.
pub fn mechanical_energy(state: &HybridState, params: &RobotParams) -> f64 {
    let theta = state.theta(params);
    0.5 * params.mass * (state.vx * state.vx + state.vy * state.vy)
        + params.mass * params.gravity * state.y
        + 0.5 * params.kappa * (theta - params.theta0).powi(2)
}
