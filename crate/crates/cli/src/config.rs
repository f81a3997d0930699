//! Run configuration files.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use bristle_core::harness::SweepSpec;
use bristle_core::{presets, DriveSignal, IntegratorConfig, RobotParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub robot: RobotSection,
    pub drive: DriveSection,
    pub integrator: IntegratorConfig,
    pub simulate: SimulateSection,
    pub sweep: SweepSection,
    pub analyze: AnalyzeSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotSection {
    pub mass: f64,
    pub gravity: f64,
    pub leg_length: f64,
    pub kappa: f64,
    pub mu_static: f64,
    pub mu_kinetic: f64,
    /// rad from the horizontal
    pub theta0: f64,
    pub zeta: f64,
    /// Poisson ratio of the leg material; recorded but not used by the model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl Default for RobotSection {
    fn default() -> Self {
        let p = presets::fig3_params();
        Self {
            mass: p.mass,
            gravity: p.gravity,
            leg_length: p.leg_length,
            kappa: p.kappa,
            mu_static: p.mu_static,
            mu_kinetic: p.mu_kinetic,
            theta0: p.theta0,
            zeta: p.zeta,
            nu: None,
        }
    }
}

impl RobotSection {
    pub fn params(&self) -> RobotParams {
        RobotParams {
            mass: self.mass,
            gravity: self.gravity,
            leg_length: self.leg_length,
            kappa: self.kappa,
            mu_static: self.mu_static,
            mu_kinetic: self.mu_kinetic,
            theta0: self.theta0,
            zeta: self.zeta,
        }
    }
}

/// `eta(t) = -amplitude cos(omega t + phase)`; give the frequency in Hz or as `omega` (rad/s).
///
/// Without a `[drive]` table the default drive applies; a table given in a file must set
/// its own frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default)]
    pub phase: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        let d = presets::fig3a_drive();
        Self {
            amplitude: d.amplitude,
            frequency_hz: None,
            omega: Some(d.omega),
            phase: d.phase,
        }
    }
}

impl DriveSection {
    pub fn omega(&self) -> anyhow::Result<f64> {
        match (self.frequency_hz, self.omega) {
            (Some(f), None) => Ok(TAU * f),
            (None, Some(w)) => Ok(w),
            (None, None) => bail!("drive needs frequency_hz or omega"),
            (Some(_), Some(_)) => bail!("drive takes frequency_hz or omega, not both"),
        }
    }

    pub fn signal(&self) -> anyhow::Result<DriveSignal> {
        Ok(DriveSignal::new(self.amplitude, self.omega()?).with_phase(self.phase))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    /// s; defaults to 20 drive periods (20 s without a drive)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// Trailing share of the run used for the average speed.
    pub window_fraction: f64,
    /// Start stuck at this leg angle (rad) instead of resting at the neutral equilibrium.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_theta: Option<f64>,
    pub initial_theta_dot: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            duration: None,
            window_fraction: 0.5,
            initial_theta: None,
            initial_theta_dot: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub freq_start: f64,
    pub freq_stop: f64,
    pub freq_step: f64,
    /// s; defaults to 20 periods of the lowest frequency
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_per_point: Option<f64>,
    pub measure_window_fraction: f64,
    pub samples_per_point: u32,
}

impl Default for SweepSection {
    fn default() -> Self {
        // omega from 5 to 40 rad/s
        Self {
            freq_start: 0.8,
            freq_stop: 6.4,
            freq_step: 0.1,
            duration_per_point: None,
            measure_window_fraction: 0.5,
            samples_per_point: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeSection {
    /// Frequencies (Hz) for the speed-bound table; empty uses the drive frequency.
    pub frequencies_hz: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn params(&self) -> RobotParams {
        self.robot.params()
    }

    /// Checks every section before anything runs.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.params().validate()?;
        self.drive.signal()?.validate()?;
        self.integrator.validate()?;
        if let Some(d) = self.simulate.duration {
            if !(d > 0.0 && d.is_finite()) {
                bail!("simulate.duration must be > 0");
            }
        }
        if !(self.simulate.window_fraction > 0.0 && self.simulate.window_fraction <= 1.0) {
            bail!("simulate.window_fraction must lie in (0, 1]");
        }
        if let Some(th) = self.simulate.initial_theta {
            if !(th > 0.0 && th < std::f64::consts::FRAC_PI_2) {
                bail!("simulate.initial_theta must lie in (0, pi/2)");
            }
        }
        if !self.simulate.initial_theta_dot.is_finite() {
            bail!("simulate.initial_theta_dot must be finite");
        }
        self.sweep_spec()?.validate()?;
        if self.analyze.frequencies_hz.iter().any(|f| !(*f >= 0.0 && f.is_finite())) {
            bail!("analyze.frequencies_hz must be >= 0");
        }
        Ok(())
    }

    pub fn simulate_duration(&self) -> anyhow::Result<f64> {
        if let Some(d) = self.simulate.duration {
            return Ok(d);
        }
        let drive = self.drive.signal()?;
        Ok(match drive.period() {
            Some(p) if drive.amplitude > 0.0 => 20.0 * p,
            _ => 20.0,
        })
    }

    pub fn sweep_spec(&self) -> anyhow::Result<SweepSpec> {
        let s = &self.sweep;
        let duration = match s.duration_per_point {
            Some(d) => d,
            None if s.freq_start > 0.0 => 20.0 / s.freq_start,
            None => bail!("sweep.freq_start must be > 0"),
        };
        let mut spec = SweepSpec::new(s.freq_start, s.freq_stop, s.freq_step, self.drive.amplitude, duration)
            .with_window(s.measure_window_fraction)
            .with_phase(self.drive.phase);
        spec.samples_per_point = s.samples_per_point;
        Ok(spec)
    }
}
