//! Recorded solution curves.

use serde::Serialize;

use crate::dynamics::{Guard, HybridState, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub state: HybridState,
    pub normal_force: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionEvent {
    pub t: f64,
    pub from: Regime,
    /// `None` when the robot left the ground.
    pub to: Option<Regime>,
    pub guard: Guard,
    /// State at the located event, before the switch is applied.
    pub state: HybridState,
}

/// Fraction of a time window spent in each regime.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Occupancy {
    pub stick: f64,
    pub forward: f64,
    pub backward: f64,
}

impl Occupancy {
    pub fn get(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Stick => self.stick,
            Regime::SlipForward => self.forward,
            Regime::SlipBackward => self.backward,
        }
    }

    /// Number of regimes with non-zero occupancy.
    pub fn distinct(&self) -> usize {
        [self.stick, self.forward, self.backward]
            .iter()
            .filter(|&&f| f > 0.0)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<TransitionEvent>,
    pub jump_flag: bool,
    /// Largest `y - R sin(theta0)` seen on any accepted step (m).
    pub max_overshoot: f64,
    pub initial: HybridState,
    pub final_state: HybridState,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.initial.t
    }

    pub fn t_end(&self) -> f64 {
        self.final_state.t
    }

    pub fn duration(&self) -> f64 {
        self.t_end() - self.t_start()
    }

    pub fn net_displacement(&self) -> f64 {
        self.final_state.x - self.initial.x
    }

    /// Joint position at `t`, linear between recorded samples.
    pub fn x_at(&self, t: f64) -> Option<f64> {
        self.interpolate(t, |s| s.x)
    }

    /// Leg-tip anchor at `t`, linear between recorded samples.
    pub fn tip_at(&self, t: f64) -> Option<f64> {
        self.interpolate(t, |s| s.x_l)
    }

    fn interpolate(&self, t: f64, field: impl Fn(&HybridState) -> f64) -> Option<f64> {
        if t < self.t_start() || t > self.t_end() {
            return None;
        }
        if t == self.t_end() {
            return Some(field(&self.final_state));
        }
        let idx = self.samples.partition_point(|s| s.state.t <= t);
        if idx == 0 {
            return Some(field(&self.initial));
        }
        let a = &self.samples[idx - 1].state;
        if a.t == t {
            return Some(field(a));
        }
        let b = self.samples.get(idx).map_or(&self.final_state, |s| &s.state);
        if b.t == a.t {
            return Some(field(b));
        }
        let w = (t - a.t) / (b.t - a.t);
        Some(field(a) + w * (field(b) - field(a)))
    }

    /// Piecewise-constant regime history as `(start, end, regime)`.
    pub fn regime_intervals(&self) -> Vec<(f64, f64, Regime)> {
        let mut out = Vec::with_capacity(self.events.len() + 1);
        let mut start = self.t_start();
        let mut regime = self.initial.regime;
        for ev in &self.events {
            if ev.t > start {
                out.push((start, ev.t, regime));
            }
            start = ev.t.max(start);
            match ev.to {
                Some(r) => regime = r,
                None => return out,
            }
        }
        if self.t_end() > start {
            out.push((start, self.t_end(), regime));
        }
        out
    }

    pub fn occupancy(&self, from: f64, to: f64) -> Occupancy {
        let mut time = [0.0; 3];
        for (a, b, r) in self.regime_intervals() {
            let lo = a.max(from);
            let hi = b.min(to);
            if hi > lo {
                time[r.index()] += hi - lo;
            }
        }
        let total: f64 = time.iter().sum();
        if total <= 0.0 {
            return Occupancy::default();
        }
        Occupancy {
            stick: time[0] / total,
            forward: time[1] / total,
            backward: time[2] / total,
        }
    }

    pub fn events_by(&self, guard: Guard) -> impl Iterator<Item = &TransitionEvent> {
        self.events.iter().filter(move |e| e.guard == guard)
    }
}
