//! Simulation and analysis of vertically driven bristle robots on a dry-friction surface.
//!
//! The robot is a point mass on one equivalent elastic leg. Depending on the leg tip it
//! either pivots about a stuck tip or slides forward/backward under Coulomb friction;
//! [`integrator::simulate`] chains these regimes with located switching events, and the
//! [`harness`] turns runs into speeds, sweeps and resonance probes.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod harness;
pub mod integrator;
pub mod oracle;
pub mod params;
pub mod presets;
pub mod resonance;
mod rk;
pub mod roots;
pub mod trajectory;

pub use dynamics::{
    decide_transition, guard_report, mechanical_energy, slip_accelerations, stick_acceleration,
    stick_cartesian_kinematics, Accel, Guard, GuardReport, HybridState, Regime, StickKinematics,
    Transition,
};
pub use equilibrium::{equilibria, solve_equilibrium, solve_equilibrium_directional, Direction, EquilibriumSet};
pub use error::{Error, Result};
pub use integrator::{
    integrate_segment, rest_at_equilibrium, simulate, simulate_partial, IntegratorConfig,
    LiftOff, Sampling, SegmentOutcome,
};
pub use params::{DriveSignal, RobotParams};
pub use resonance::{kappa_from_geometry, resonances, resonances_at, speed_upper_bound, ResonanceSet};
pub use trajectory::{Occupancy, Sample, Trajectory, TransitionEvent};
