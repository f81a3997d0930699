//! Fixed-step reference integrator.
//!
//! Classical RK4 with no step control and no event location: switching rules are
//! evaluated only at step boundaries. It is slow and first-order accurate across events,
//! which makes it a useful independent check on [`crate::integrator`].

use crate::dynamics::{decide_transition, normal_force, slip_accel_raw, stick_acceleration, HybridState, Regime, Transition};
use crate::error::{Error, Result};
use crate::params::{DriveSignal, RobotParams};
use crate::rk::rk4_step;
use crate::trajectory::{Sample, Trajectory, TransitionEvent};

fn step(state: &HybridState, params: &RobotParams, drive: &DriveSignal, dt: f64) -> Result<HybridState> {
    let t = state.t;
    match state.regime.direction() {
        None => {
            let f = |tt: f64, y: &[f64; 2]| Ok([y[1], stick_acceleration(y[0], y[1], tt, params, drive)]);
            let y = rk4_step(&f, t, &[state.theta(params), state.theta_dot(params)], dt)?;
            Ok(HybridState::stick(t + dt, y[0], y[1], state.x_l, params))
        }
        Some(dir) => {
            let f = |tt: f64, y: &[f64; 4]| {
                let a = slip_accel_raw(tt, y[1], y[3], params, drive, dir)?;
                Ok([y[2], y[3], a.ax, a.ay])
            };
            let y = rk4_step(&f, t, &[state.x, state.y, state.vx, state.vy], dt)?;
            Ok(HybridState::slip(t + dt, y[0], y[1], y[2], y[3], dir, params))
        }
    }
}

/// Integrates `duration` with fixed steps `dt`, recording every `record_every`-th step
/// and every regime change.
pub fn oracle_fixed_step(
    initial: &HybridState,
    params: &RobotParams,
    drive: &DriveSignal,
    dt: f64,
    duration: f64,
    record_every: usize,
    epsilon_v: f64,
) -> Result<Trajectory> {
    params.validate()?;
    drive.validate()?;
    if !(dt > 0.0 && duration > 0.0 && record_every > 0) {
        return Err(Error::InvalidParameter("dt, duration and stride must be positive".into()));
    }
    let y_free = params.leg_length * params.theta0.sin();
    let mut traj = Trajectory {
        samples: vec![Sample {
            state: *initial,
            normal_force: normal_force(initial, params, drive)?,
        }],
        events: Vec::new(),
        jump_flag: false,
        max_overshoot: initial.y - y_free,
        initial: *initial,
        final_state: *initial,
    };
    let n = (duration / dt).round() as usize;
    let mut state = *initial;
    for k in 1..=n {
        let prev = state;
        state = step(&prev, params, drive, dt)?;
        state.t = initial.t + k as f64 * dt;
        state.check_geometry(params)?;
        traj.max_overshoot = traj.max_overshoot.max(state.y - y_free);

        // a sliding tip that passed through zero speed is examined at the step end
        let eps = match state.regime.direction() {
            Some(d) => {
                let before = d.sign() * prev.xl_dot(params);
                let after = d.sign() * state.xl_dot(params);
                if before > 0.0 && after <= 0.0 {
                    epsilon_v.max(after.abs() * (1.0 + 1e-12))
                } else {
                    epsilon_v
                }
            }
            None => epsilon_v,
        };
        match decide_transition(&state, params, drive, eps)? {
            Transition::Remain => {}
            Transition::Jump => {
                traj.events.push(TransitionEvent {
                    t: state.t,
                    from: state.regime,
                    to: None,
                    guard: crate::dynamics::Guard::Jump,
                    state,
                });
                traj.jump_flag = true;
                break;
            }
            Transition::Enter { regime, guard } => {
                traj.events.push(TransitionEvent {
                    t: state.t,
                    from: state.regime,
                    to: Some(regime),
                    guard,
                    state,
                });
                state = match regime {
                    Regime::Stick => state.captured(params),
                    _ => HybridState {
                        regime,
                        x_l: state.x - state.chord(params),
                        ..state
                    },
                };
            }
        }
        if k % record_every == 0 || k == n {
            traj.samples.push(Sample {
                state,
                normal_force: normal_force(&state, params, drive)?,
            });
        }
    }
    traj.final_state = state;
    Ok(traj)
}
