//! Parameter sets of the reference experiments.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

use crate::params::{DriveSignal, RobotParams};

/// Desk-scale system of the forward/backward frequency experiment.
pub fn fig3_params() -> RobotParams {
    RobotParams {
        mass: 1.0,
        gravity: 9.8,
        leg_length: 1.0,
        kappa: 100.0,
        mu_static: 0.17,
        mu_kinetic: 0.15,
        theta0: FRAC_PI_3,
        zeta: 0.0,
    }
}

/// `eta = -0.01 cos 10t`, backward motion.
pub fn fig3a_drive() -> DriveSignal {
    DriveSignal::new(0.01, 10.0)
}

/// `eta = -0.01 cos 30t`, forward motion.
pub fn fig3b_drive() -> DriveSignal {
    DriveSignal::new(0.01, 30.0)
}

/// No kinetic friction, sling behaviour.
pub fn fig4_params() -> RobotParams {
    fig3_params().with_mu(0.17, 0.0)
}

pub fn fig4_drive(amplitude: f64) -> DriveSignal {
    DriveSignal::new(amplitude, PI)
}

/// No static friction; `mu_kinetic` selects the resonant or non-resonant case.
pub fn fig5_params(mu_kinetic: f64) -> RobotParams {
    fig3_params().with_mu(0.0, mu_kinetic)
}

/// `eta = -0.0075 cos 18t`.
pub fn fig5_drive() -> DriveSignal {
    DriveSignal::new(0.0075, 18.0)
}

/// Millimetre-scale robot with the effective aggregate stiffness of 0.1 N·m/rad.
pub fn milli_bot(theta0: f64) -> RobotParams {
    RobotParams {
        mass: 0.27e-3,
        gravity: 9.8,
        leg_length: 2.7e-3,
        kappa: 0.1,
        mu_static: 0.36,
        mu_kinetic: 0.32,
        theta0,
        zeta: 0.0,
    }
}

pub fn milli_bot_60() -> RobotParams {
    milli_bot(FRAC_PI_3)
}

pub fn milli_bot_45() -> RobotParams {
    milli_bot(FRAC_PI_4)
}

/// `eta = A cos(omega t)` with `A = 1e-8` m, written as phase pi of the standard waveform.
pub fn milli_drive(omega: f64) -> DriveSignal {
    DriveSignal::new(1e-8, omega).with_phase(PI)
}
