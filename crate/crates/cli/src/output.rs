//! CSV and summary writers. Floats use the shortest representation that round-trips.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use bristle_core::harness::SweepResult;
use bristle_core::{RobotParams, Trajectory};
use serde::Serialize;

fn writer(path: &Path) -> anyhow::Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn write_trajectory(path: &Path, traj: &Trajectory, params: &RobotParams) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "x", "y", "vx", "vy", "theta", "xl", "xl_dot", "normal_force", "regime"])?;
    for s in &traj.samples {
        let st = &s.state;
        w.write_record([
            num(st.t),
            num(st.x),
            num(st.y),
            num(st.vx),
            num(st.vy),
            num(st.theta(params)),
            num(st.x_l),
            num(st.xl_dot(params)),
            num(s.normal_force),
            st.regime.label().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_events(path: &Path, traj: &Trajectory) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "guard", "from", "to"])?;
    for ev in &traj.events {
        w.write_record([
            num(ev.t),
            ev.guard.label().to_string(),
            ev.from.label().to_string(),
            ev.to.map_or("none", |r| r.label()).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep(path: &Path, result: &SweepResult) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "freq_hz",
        "omega_rad_s",
        "avg_speed",
        "bound",
        "stick_frac",
        "fwd_frac",
        "bwd_frac",
        "jumped",
        "status",
    ])?;
    for p in &result.points {
        w.write_record([
            num(p.freq_hz),
            num(p.omega),
            num(p.average_speed),
            num(p.bound),
            num(p.occupancy.stick),
            num(p.occupancy.forward),
            num(p.occupancy.backward),
            p.jumped.to_string(),
            p.error.clone().unwrap_or_else(|| "ok".to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = toml::to_string(value)?;
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
