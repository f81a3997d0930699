//! Small-amplitude resonances, the asymptotic speed bound and the leg-stiffness estimate.

use std::f64::consts::PI;

use serde::Serialize;

use crate::equilibrium::{equilibria, EquilibriumSet};
use crate::error::{Error, Result};
use crate::params::RobotParams;

/// Angular frequencies (rad/s) of the linearised regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceSet {
    /// Leg tip stuck, rotation about the tip.
    pub omega_theta: f64,
    /// Frictionless slip.
    pub omega_y: f64,
    /// Slip with the tip moving forward.
    pub omega_yp: f64,
    /// Slip with the tip moving backward.
    pub omega_yn: f64,
    /// Stiff-leg approximation `omega_y / sqrt(1 + mu_k tan(theta_bar))`.
    pub omega_yp_approx: f64,
    /// Stiff-leg approximation `omega_y / sqrt(1 - mu_k tan(theta_bar))`.
    pub omega_yn_approx: f64,
}

fn checked_sqrt(squared: f64, which: &'static str) -> Result<f64> {
    if squared.is_finite() && squared >= 0.0 {
        Ok(squared.sqrt())
    } else {
        Err(Error::ImaginaryFrequency { which, squared })
    }
}

/// Squared slip resonance about a sliding equilibrium, `s = +1` forward, `-1` backward.
fn slip_branch_squared(params: &RobotParams, theta: f64, delta: f64, s: f64) -> f64 {
    let mu = params.mu_kinetic;
    let (sin, cos) = theta.sin_cos();
    let tan = sin / cos;
    let numerator =
        1.0 + delta * tan + s * mu * (tan + delta * (tan * tan - sin / (cos * cos) - 1.0));
    let lever = 1.0 + s * mu * tan;
    let denominator = params.leg_length.powi(2) * params.mass * cos * cos * lever * lever;
    params.kappa * numerator / denominator
}

pub fn resonances(params: &RobotParams) -> Result<ResonanceSet> {
    let eq = equilibria(params)?;
    resonances_at(params, &eq)
}

pub fn resonances_at(params: &RobotParams, eq: &EquilibriumSet) -> Result<ResonanceSet> {
    let tb = eq.theta_bar;
    let base = params.kappa / (params.mass * params.leg_length.powi(2));
    let omega_theta_sq = base * (1.0 + (tb - params.theta0) * tb.tan());
    let omega_y_sq = omega_theta_sq / tb.cos().powi(2);

    let tilt = params.mu_kinetic * tb.tan();
    let yp_sq = slip_branch_squared(params, eq.theta_bar_p, eq.delta_p, 1.0);
    let yn_sq = slip_branch_squared(params, eq.theta_bar_n, eq.delta_n, -1.0);

    Ok(ResonanceSet {
        omega_theta: checked_sqrt(omega_theta_sq, "omega_theta")?,
        omega_y: checked_sqrt(omega_y_sq, "omega_y")?,
        omega_yp: checked_sqrt(yp_sq, "omega_yp")?,
        omega_yn: checked_sqrt(yn_sq, "omega_yn")?,
        omega_yp_approx: checked_sqrt(omega_y_sq / (1.0 + tilt), "omega_yp_approx")?,
        omega_yn_approx: checked_sqrt(omega_y_sq / (1.0 - tilt), "omega_yn_approx")?,
    })
}

/// Kinematic ceiling on the asymptotic average speed at drive frequency `omega` (rad/s):
/// one stride `R (1 - cos theta0)` per drive cycle.
pub fn speed_upper_bound(params: &RobotParams, omega: f64) -> f64 {
    omega / (2.0 * PI) * params.leg_length * (1.0 - params.theta0.cos())
}

/// Cantilever bending stiffness `3 E I / R^3` (N/m) of one round leg of diameter `d`.
pub fn leg_bending_stiffness(youngs_modulus: f64, leg_diameter: f64, leg_length: f64) -> f64 {
    let second_moment = PI * leg_diameter.powi(4) / 64.0;
    3.0 * youngs_modulus * second_moment / leg_length.powi(3)
}

/// Aggregate torsional stiffness `n k_b R^2` (N·m/rad).
pub fn kappa_from_geometry(
    youngs_modulus: f64,
    leg_diameter: f64,
    leg_length: f64,
    n_effective_legs: f64,
) -> f64 {
    n_effective_legs
        * leg_bending_stiffness(youngs_modulus, leg_diameter, leg_length)
        * leg_length.powi(2)
}
