//! Fixtures shared by the criterion benchmarks.

use bristle_core::{presets, IntegratorConfig, Sampling};

pub fn fig3_config() -> IntegratorConfig {
    IntegratorConfig::default().with_sampling(Sampling::EventsOnly)
}

pub fn fig3_params() -> bristle_core::RobotParams {
    presets::fig3_params()
}
