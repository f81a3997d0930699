//! Physical parameters of the robot-surface system and the vertical drive.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants of the single equivalent-leg model. All SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotParams {
    /// Robot mass (kg).
    pub mass: f64,
    /// Gravitational acceleration (m/s²).
    pub gravity: f64,
    /// Leg length (m).
    pub leg_length: f64,
    /// Aggregate torsional spring constant of the legs (N·m/rad).
    pub kappa: f64,
    /// Static friction coefficient.
    pub mu_static: f64,
    /// Kinetic friction coefficient.
    pub mu_kinetic: f64,
    /// Unloaded leg angle, measured from the horizontal (rad).
    pub theta0: f64,
    /// Angular damping coefficient (N·m·s/rad).
    #[serde(default)]
    pub zeta: f64,
}

impl RobotParams {
    pub fn validate(&self) -> Result<()> {
        let checks: [(bool, &str); 8] = [
            (self.mass > 0.0, "mass must be > 0"),
            (self.gravity >= 0.0, "gravity must be >= 0"),
            (self.leg_length > 0.0, "leg_length must be > 0"),
            (self.kappa > 0.0, "kappa must be > 0"),
            (self.zeta >= 0.0, "zeta must be >= 0"),
            (self.mu_static >= 0.0, "mu_static must be >= 0"),
            (self.mu_kinetic >= 0.0, "mu_kinetic must be >= 0"),
            (
                self.theta0 > 0.0 && self.theta0 < FRAC_PI_2,
                "theta0 must lie in (0, pi/2)",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidParameter(msg.to_string()));
            }
        }
        let all = [
            self.mass,
            self.gravity,
            self.leg_length,
            self.kappa,
            self.mu_static,
            self.mu_kinetic,
            self.theta0,
            self.zeta,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite value".into()));
        }
        if self.mu_kinetic > self.mu_static {
            log::warn!(
                "mu_kinetic ({}) exceeds mu_static ({}); sticking is held up to mu_kinetic",
                self.mu_kinetic,
                self.mu_static
            );
        }
        Ok(())
    }

    /// Friction coefficient that bounds the holding force while the leg tip is stuck.
    ///
    /// Equal to `mu_static` for physical surfaces. When `mu_kinetic` exceeds it, sign-type
    /// kinetic friction alone already pins the tip (Filippov sliding), so the larger
    /// coefficient applies.
    pub fn holding_coefficient(&self) -> f64 {
        self.mu_static.max(self.mu_kinetic)
    }

    pub fn with_mu(mut self, mu_static: f64, mu_kinetic: f64) -> Self {
        self.mu_static = mu_static;
        self.mu_kinetic = mu_kinetic;
        self
    }

    pub fn with_theta0(mut self, theta0: f64) -> Self {
        self.theta0 = theta0;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_gravity(mut self, gravity: f64) -> Self {
        self.gravity = gravity;
        self
    }
}

/// Vertical drive `eta(t) = -A cos(omega t + phase)`.
///
/// The robot sees it as a modulated gravity `G(t) = g + eta''(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSignal {
    /// Amplitude (m).
    pub amplitude: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Phase (rad).
    #[serde(default)]
    pub phase: f64,
}

impl DriveSignal {
    pub fn new(amplitude: f64, omega: f64) -> Self {
        Self {
            amplitude,
            omega,
            phase: 0.0,
        }
    }

    pub fn none() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter("drive amplitude must be >= 0".into()));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter("drive omega must be >= 0".into()));
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidParameter("drive phase must be finite".into()));
        }
        Ok(())
    }

    pub fn eta(&self, t: f64) -> f64 {
        -self.amplitude * (self.omega * t + self.phase).cos()
    }

    pub fn eta_dot(&self, t: f64) -> f64 {
        self.amplitude * self.omega * (self.omega * t + self.phase).sin()
    }

    pub fn eta_ddot(&self, t: f64) -> f64 {
        self.amplitude * self.omega * self.omega * (self.omega * t + self.phase).cos()
    }

    /// Effective gravity `g + eta''(t)`.
    pub fn effective_gravity(&self, gravity: f64, t: f64) -> f64 {
        gravity + self.eta_ddot(t)
    }

    /// Drive period in seconds, `None` for a static drive.
    pub fn period(&self) -> Option<f64> {
        (self.omega > 0.0).then(|| 2.0 * std::f64::consts::PI / self.omega)
    }

    pub fn frequency_hz(&self) -> f64 {
        self.omega / (2.0 * std::f64::consts::PI)
    }
}
