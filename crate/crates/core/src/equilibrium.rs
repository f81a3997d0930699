//! Static equilibria of the leg: neutral (no friction) and the two kinetic-friction
//! equilibria reached while the tip slides forward or backward.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::RobotParams;
use crate::roots::bisect_newton;

/// Direction of leg-tip sliding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    /// Sign of the leg-tip velocity in this direction.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// The three equilibrium angles and heights.
///
/// Friction tilts the sliding equilibria apart: the forward one sits lower
/// (`theta_bar_p < theta_bar`) and the backward one higher (`theta_bar_n > theta_bar`),
/// which is the ordering implied by `delta_p = -(gmR/kappa)(cos + mu_k sin)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumSet {
    pub theta_bar: f64,
    pub theta_bar_p: f64,
    pub theta_bar_n: f64,
    pub y_bar: f64,
    pub y_bar_p: f64,
    pub y_bar_n: f64,
    /// `theta_bar_p - theta0`
    pub delta_p: f64,
    /// `theta_bar_n - theta0`
    pub delta_n: f64,
}

const RESIDUAL_TOL: f64 = 1e-12;
const LOWER_EDGE: f64 = 1e-12;

/// Solves `theta - theta0 + (m g R / kappa)(cos theta + c sin theta) = 0` on `(0, theta0]`.
///
/// The residual is measured in radians, i.e. the torque balance divided by `kappa`.
fn solve_tilted(params: &RobotParams, c: f64, what: &'static str) -> Result<f64> {
    let theta0 = params.theta0;
    let load = params.mass * params.gravity * params.leg_length / params.kappa;
    if load == 0.0 {
        return Ok(theta0);
    }
    let h = |th: f64| th - theta0 + load * (th.cos() + c * th.sin());
    let dh = |th: f64| 1.0 + load * (-th.sin() + c * th.cos());

    if h(theta0) < 0.0 {
        return Err(Error::NoEquilibrium(format!(
            "{what}: friction tilt {c} leaves no root below theta0"
        )));
    }
    if h(LOWER_EDGE) > 0.0 {
        return Err(Error::NoEquilibrium(format!(
            "{what}: legs too soft to hold the body (m g R / kappa = {load:.4e})"
        )));
    }
    bisect_newton(h, dh, LOWER_EDGE, theta0, 1e-10, RESIDUAL_TOL, what)
}

/// Neutral equilibrium angle solving `m g R cos(theta) + kappa (theta - theta0) = 0`.
pub fn solve_equilibrium(params: &RobotParams) -> Result<f64> {
    solve_tilted(params, 0.0, "neutral equilibrium")
}

/// Equilibrium angle of the slip equation held in one sliding direction.
pub fn solve_equilibrium_directional(params: &RobotParams, direction: Direction) -> Result<f64> {
    let what = match direction {
        Direction::Forward => "forward-slip equilibrium",
        Direction::Backward => "backward-slip equilibrium",
    };
    solve_tilted(params, direction.sign() * params.mu_kinetic, what)
}

pub fn equilibria(params: &RobotParams) -> Result<EquilibriumSet> {
    let theta_bar = solve_equilibrium(params)?;
    let theta_bar_p = solve_equilibrium_directional(params, Direction::Forward)?;
    let theta_bar_n = solve_equilibrium_directional(params, Direction::Backward)?;
    let r = params.leg_length;
    Ok(EquilibriumSet {
        theta_bar,
        theta_bar_p,
        theta_bar_n,
        y_bar: r * theta_bar.sin(),
        y_bar_p: r * theta_bar_p.sin(),
        y_bar_n: r * theta_bar_n.sin(),
        delta_p: theta_bar_p - params.theta0,
        delta_n: theta_bar_n - params.theta0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_3;

    fn torque_residual(p: &RobotParams, th: f64) -> f64 {
        p.mass * p.gravity * p.leg_length * th.cos() + p.kappa * (th - p.theta0)
    }

    #[test]
    fn zero_gravity_returns_theta0_exactly() {
        let p = presets::fig3_params().with_gravity(0.0);
        assert_eq!(solve_equilibrium(&p).unwrap(), p.theta0);
        assert_eq!(
            solve_equilibrium_directional(&p, Direction::Backward).unwrap(),
            p.theta0
        );
    }

    #[test]
    fn stiff_spring_limit() {
        let p = presets::fig3_params().with_kappa(1e9);
        let th = solve_equilibrium(&p).unwrap();
        assert!((th - FRAC_PI_3).abs() < 1e-8);
    }

    #[test]
    fn desk_scale_value() {
        // independent bisection on the torque balance, 200 halvings
        let p = presets::fig3_params();
        let (mut lo, mut hi) = (1e-9, p.theta0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if torque_residual(&p, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let th = solve_equilibrium(&p).unwrap();
        assert!((th - lo).abs() < 1e-12);
        assert!((th - 0.9938).abs() < 1e-4);
        assert!(torque_residual(&p, th).abs() < 1e-12 * p.kappa);
    }

    #[test]
    fn frictionless_directional_equals_neutral() {
        let p = presets::fig3_params().with_mu(0.17, 0.0);
        let th = solve_equilibrium(&p).unwrap();
        for d in [Direction::Forward, Direction::Backward] {
            let td = solve_equilibrium_directional(&p, d).unwrap();
            assert!((td - th).abs() < 1e-12);
        }
    }

    #[test]
    fn directional_values_by_fixed_point() {
        // fixed-point iteration theta <- theta0 - (gmR/kappa)(cos + s mu sin) contracts here
        let p = presets::fig3_params().with_mu(0.17, 0.15);
        let load = p.mass * p.gravity * p.leg_length / p.kappa;
        for d in [Direction::Forward, Direction::Backward] {
            let c = d.sign() * p.mu_kinetic;
            let mut th = p.theta0;
            for _ in 0..500 {
                th = p.theta0 - load * (th.cos() + c * th.sin());
            }
            let solved = solve_equilibrium_directional(&p, d).unwrap();
            assert!((solved - th).abs() < 1e-12, "{d:?}: {solved} vs {th}");
            let residual = solved - p.theta0 + load * (solved.cos() + c * solved.sin());
            assert!(residual.abs() < 1e-12);
        }
        let eq = equilibria(&p).unwrap();
        assert!(eq.theta_bar_p < eq.theta_bar && eq.theta_bar < eq.theta_bar_n);
        assert!((eq.theta_bar_p - 0.980433).abs() < 1e-5);
        assert!((eq.theta_bar_n - 1.007276).abs() < 1e-5);
    }

    #[test]
    fn soft_legs_have_no_equilibrium() {
        let p = presets::fig3_params().with_kappa(1.0);
        assert!(matches!(solve_equilibrium(&p), Err(Error::NoEquilibrium(_))));
    }

    fn arb_params() -> impl Strategy<Value = RobotParams> {
        (
            0.1f64..10.0,
            0.5f64..20.0,
            0.1f64..2.0,
            0.2f64..1.4,
            0.0f64..0.3,
        )
            .prop_map(|(m, g, r, th0, mu)| {
                // keep m g R / kappa well below theta0 so the body is supported
                let kappa = 5.0 * m * g * r / th0;
                RobotParams {
                    mass: m,
                    gravity: g,
                    leg_length: r,
                    kappa,
                    mu_static: mu,
                    mu_kinetic: mu,
                    theta0: th0,
                    zeta: 0.0,
                }
            })
    }

    proptest! {
        #[test]
        fn residual_and_height_consistency(p in arb_params()) {
            let th = solve_equilibrium(&p).unwrap();
            prop_assert!(torque_residual(&p, th).abs() < 1e-12 * p.kappa);
            prop_assert!(th > 0.0 && th <= p.theta0);

            // the vertical-force balance in y, solved independently by bisection
            let r = p.leg_length;
            let force = |y: f64| {
                p.mass * p.gravity
                    + p.kappa * ((y / r).asin() - p.theta0) / (r * (1.0 - (y / r).powi(2)).sqrt())
            };
            let (mut lo, mut hi) = (1e-12, r * p.theta0.sin());
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if force(mid) < 0.0 { lo = mid } else { hi = mid }
            }
            prop_assert!(((lo / r).asin() - th).abs() < 1e-10);
        }

        #[test]
        fn bifurcation_widens_with_friction(p in arb_params(), mu1 in 0.0f64..0.2, dmu in 0.0f64..0.1) {
            prop_assume!((mu1 + dmu) * p.theta0.tan() < 0.9);
            let a = equilibria(&p.with_mu(1.0, mu1)).unwrap();
            let b = equilibria(&p.with_mu(1.0, mu1 + dmu)).unwrap();
            prop_assert!(b.theta_bar_n - b.theta_bar_p >= a.theta_bar_n - a.theta_bar_p - 1e-12);
            prop_assert!(a.theta_bar_p <= a.theta_bar + 1e-15);
            prop_assert!(a.theta_bar_n >= a.theta_bar - 1e-15);
        }
    }
}
