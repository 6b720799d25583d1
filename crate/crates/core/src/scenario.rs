//! Scripted interaction scenarios: timed wrench profiles, sensor noise,
//! and optional bounded model disturbance.
//!
//! A wrench profile is a list of timed segments per axis. Within its window
//! `[t_start, t_end)` a segment contributes
//!
//! - `step` / `hold`: the amplitude (hold marks a continuation segment),
//! - `ramp`: linear interpolation from the adjoining previous segment's end
//!   value (zero if none) to the amplitude,
//! - `sine`: `amplitude * sin(2 pi f (t - t_start))`, one full cycle over the
//!   window unless a frequency is given.
//!
//! Profiles default to smooth ramps and sines; ideal steps exist specifically
//! to stress the slowly-varying-wrench assumption and characterize estimator
//! lag.

// Provides the float math methods when building without std.
#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::params::SensorNoise;
use crate::{Error, Result, Vec6};

/// Shape of one wrench-profile segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentShape {
    /// Constant amplitude, discontinuous edges.
    Step,
    /// Linear rise from the previous end value to the amplitude.
    Ramp,
    /// Sinusoid of the given amplitude.
    Sine,
    /// Constant amplitude marking a continuation of the previous segment.
    Hold,
}

/// One timed segment of the wrench profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WrenchSegment {
    /// Window start [s].
    pub t_start: f64,
    /// Window end (exclusive) [s].
    pub t_end: f64,
    /// Segment shape.
    pub shape: SegmentShape,
    /// Axis mask `[f_x, f_y, f_z, tau_x, tau_y, tau_z]`.
    pub axes: [bool; 6],
    /// Amplitude [N or N m].
    pub amplitude: f64,
    /// Sine frequency [Hz]; `None` means one cycle over the window.
    #[serde(default)]
    pub frequency: Option<f64>,
}

impl WrenchSegment {
    fn on_axis(t_start: f64, t_end: f64, shape: SegmentShape, axis: usize, amplitude: f64) -> Self {
        let mut axes = [false; 6];
        axes[axis] = true;
        Self {
            t_start,
            t_end,
            shape,
            axes,
            amplitude,
            frequency: None,
        }
    }

    fn with_frequency(mut self, hz: f64) -> Self {
        self.frequency = Some(hz);
        self
    }

    fn contains(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_end
    }

    /// Value at the (exclusive) end of the window, used to chain ramps.
    fn end_value(&self) -> f64 {
        match self.shape {
            SegmentShape::Step | SegmentShape::Hold | SegmentShape::Ramp => self.amplitude,
            SegmentShape::Sine => {
                let span = self.t_end - self.t_start;
                let f = self.frequency.unwrap_or(1.0 / span);
                self.amplitude * (2.0 * core::f64::consts::PI * f * span).sin()
            }
        }
    }

    fn value(&self, t: f64, start_value: f64) -> f64 {
        if !self.contains(t) {
            return 0.0;
        }
        match self.shape {
            SegmentShape::Step | SegmentShape::Hold => self.amplitude,
            SegmentShape::Ramp => {
                let a = (t - self.t_start) / (self.t_end - self.t_start);
                start_value + (self.amplitude - start_value) * a
            }
            SegmentShape::Sine => {
                let f = self.frequency.unwrap_or(1.0 / (self.t_end - self.t_start));
                self.amplitude * (2.0 * core::f64::consts::PI * f * (t - self.t_start)).sin()
            }
        }
    }
}

/// Bounded sinusoidal model disturbance injected into the plant but hidden
/// from the estimators; each active component is
/// `epsilon * sin(2 pi f t + phase_i)`, so `|Delta(t)|_inf <= epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSpec {
    /// Amplitude bound [N or N m].
    pub epsilon: f64,
    /// Active axes.
    pub axes: [bool; 6],
    /// Frequency [Hz].
    pub frequency: f64,
    /// Window start [s].
    pub t_start: f64,
    /// Window end [s].
    pub t_end: f64,
}

impl DisturbanceSpec {
    /// True if the disturbance acts anywhere inside `[t0, t1]`.
    pub fn active_on(&self, t0: f64, t1: f64) -> bool {
        t0 < self.t_end && t1 > self.t_start
    }

    /// Disturbance value at time `t`.
    pub fn value(&self, t: f64) -> Vec6 {
        let mut d = Vec6::zeros();
        if t < self.t_start || t >= self.t_end {
            return d;
        }
        for i in 0..6 {
            if self.axes[i] {
                let phase = i as f64 * core::f64::consts::FRAC_PI_3;
                d[i] = self.epsilon
                    * (2.0 * core::f64::consts::PI * self.frequency * (t - self.t_start) + phase)
                        .sin();
            }
        }
        d
    }
}

fn default_dt_physics() -> f64 {
    1e-3
}
fn default_dt_control() -> f64 {
    0.01
}
fn default_seed() -> u64 {
    42
}
fn default_t_skip() -> f64 {
    2.0
}

/// A complete scripted run: profile, rates, noise, disturbance, seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    /// Scenario name (also used for output file names).
    pub name: String,
    /// Run length [s].
    pub duration: f64,
    /// Ground-truth integration step [s].
    #[serde(default = "default_dt_physics")]
    pub dt_physics: f64,
    /// Control/estimation period [s]; must be an integer multiple of
    /// `dt_physics`.
    #[serde(default = "default_dt_control")]
    pub dt_control: f64,
    /// Scripted wrench segments.
    #[serde(default)]
    pub wrench_profile: Vec<WrenchSegment>,
    /// Sensor noise levels.
    #[serde(default)]
    pub noise: SensorNoise,
    /// Optional bounded model disturbance.
    #[serde(default)]
    pub disturbance: Option<DisturbanceSpec>,
    /// RNG seed; all run randomness flows from it.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Transient skipped by the metrics [s].
    #[serde(default = "default_t_skip")]
    pub t_skip: f64,
}

impl ScenarioSpec {
    /// Number of control ticks; the log holds `n_ticks() + 1` rows.
    pub fn n_ticks(&self) -> usize {
        (self.duration / self.dt_control).round() as usize
    }

    /// Physics substeps per control tick.
    pub fn substeps(&self) -> usize {
        (self.dt_control / self.dt_physics).round() as usize
    }

    /// Checks rates, windows, and per-axis non-overlap.
    pub fn validate(&self) -> Result<()> {
        if self.duration <= 0.0 {
            return Err(Error::InvalidScenario("duration must be positive".into()));
        }
        if self.dt_physics <= 0.0 || self.dt_control <= 0.0 {
            return Err(Error::InvalidScenario("step sizes must be positive".into()));
        }
        let ratio = self.dt_control / self.dt_physics;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 - 1e-9 {
            return Err(Error::InvalidScenario(format!(
                "dt_control ({}) must be an integer multiple of dt_physics ({})",
                self.dt_control, self.dt_physics
            )));
        }
        for seg in &self.wrench_profile {
            if seg.t_end <= seg.t_start {
                return Err(Error::InvalidScenario(format!(
                    "segment window [{}, {}) is empty",
                    seg.t_start, seg.t_end
                )));
            }
            if !seg.amplitude.is_finite() {
                return Err(Error::InvalidScenario(
                    "segment amplitude must be finite".into(),
                ));
            }
        }
        for axis in 0..6 {
            let mut windows: Vec<(f64, f64)> = self
                .wrench_profile
                .iter()
                .filter(|s| s.axes[axis])
                .map(|s| (s.t_start, s.t_end))
                .collect();
            windows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            for pair in windows.windows(2) {
                if pair[1].0 < pair[0].1 - 1e-12 {
                    return Err(Error::InvalidScenario(format!(
                        "segments overlap on axis {} ([{}, {}) and [{}, {}))",
                        axis, pair[0].0, pair[0].1, pair[1].0, pair[1].1
                    )));
                }
            }
        }
        if let Some(d) = &self.disturbance {
            if d.epsilon < 0.0 || d.frequency < 0.0 || d.t_end <= d.t_start {
                return Err(Error::InvalidScenario("invalid disturbance block".into()));
            }
        }
        if self.t_skip < 0.0 {
            return Err(Error::InvalidScenario("t_skip must be nonnegative".into()));
        }
        Ok(())
    }

    /// Ramp start value: end value of an adjoining predecessor on the same
    /// axis, zero otherwise.
    fn ramp_start_value(&self, seg: &WrenchSegment, axis: usize) -> f64 {
        self.wrench_profile
            .iter()
            .find(|s| s.axes[axis] && (s.t_end - seg.t_start).abs() < 1e-9)
            .map(|s| s.end_value())
            .unwrap_or(0.0)
    }

    /// Scripted wrench at time `t`.
    pub fn wrench_at(&self, t: f64) -> Vec6 {
        let mut w = Vec6::zeros();
        for seg in &self.wrench_profile {
            if !seg.contains(t) {
                continue;
            }
            for axis in 0..6 {
                if seg.axes[axis] {
                    let start = match seg.shape {
                        SegmentShape::Ramp => self.ramp_start_value(seg, axis),
                        _ => 0.0,
                    };
                    w[axis] += seg.value(t, start);
                }
            }
        }
        w
    }

    /// True if the scripted wrench is constant across `[t0, t1]`: equal
    /// endpoint values, no segment boundary strictly inside, and every
    /// segment touching the closed interval is a step or hold.
    pub fn wrench_constant_on(&self, t0: f64, t1: f64) -> bool {
        if self.wrench_at(t0) != self.wrench_at(t1) {
            return false;
        }
        for seg in &self.wrench_profile {
            let boundary_inside = |b: f64| b > t0 + 1e-12 && b < t1 - 1e-12;
            if boundary_inside(seg.t_start) || boundary_inside(seg.t_end) {
                return false;
            }
            let touches = seg.t_start <= t1 && seg.t_end > t0;
            if touches && !matches!(seg.shape, SegmentShape::Step | SegmentShape::Hold) {
                return false;
            }
        }
        true
    }

    /// Copy with all sensor noise removed.
    pub fn noiseless(&self) -> Self {
        Self {
            noise: SensorNoise::zero(),
            ..self.clone()
        }
    }

    /// Copy with another seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

fn base(name: &str, duration: f64) -> ScenarioSpec {
    ScenarioSpec {
        name: String::from(name),
        duration,
        dt_physics: default_dt_physics(),
        dt_control: default_dt_control(),
        wrench_profile: Vec::new(),
        noise: SensorNoise::default(),
        disturbance: None,
        seed: default_seed(),
        t_skip: default_t_skip(),
    }
}

/// Hover regression scenario: no wrench, no noise.
pub fn zero_wrench() -> ScenarioSpec {
    ScenarioSpec {
        noise: SensorNoise::zero(),
        ..base("zero-wrench", 10.0)
    }
}

/// Noiseless step wrench on all force channels and yaw torque at t = 1 s;
/// drives the convergence-rate and equivalence checks.
pub fn step_wrench() -> ScenarioSpec {
    use SegmentShape::Step;
    ScenarioSpec {
        noise: SensorNoise::zero(),
        wrench_profile: alloc::vec![
            WrenchSegment::on_axis(1.0, 13.0, Step, 0, 2.0),
            WrenchSegment::on_axis(1.0, 13.0, Step, 1, -3.0),
            WrenchSegment::on_axis(1.0, 13.0, Step, 2, 5.0),
            WrenchSegment::on_axis(1.0, 13.0, Step, 5, 0.5),
        ],
        ..base("step-wrench", 12.0)
    }
}

/// Rapid force build-up over the first two seconds, then held.
pub fn init_transient() -> ScenarioSpec {
    use SegmentShape::{Hold, Ramp};
    ScenarioSpec {
        wrench_profile: alloc::vec![
            WrenchSegment::on_axis(0.3, 2.0, Ramp, 0, 3.0),
            WrenchSegment::on_axis(2.0, 9.0, Hold, 0, 3.0),
            WrenchSegment::on_axis(0.3, 2.0, Ramp, 1, 2.0),
            WrenchSegment::on_axis(2.0, 9.0, Hold, 1, 2.0),
            WrenchSegment::on_axis(0.3, 2.0, Ramp, 2, 4.0),
            WrenchSegment::on_axis(2.0, 9.0, Hold, 2, 4.0),
        ],
        ..base("init-transient", 8.0)
    }
}

/// One full push-pull cycle on x (guidance direction reversal).
pub fn direction_reversal() -> ScenarioSpec {
    ScenarioSpec {
        wrench_profile: alloc::vec![WrenchSegment::on_axis(
            2.0,
            10.0,
            SegmentShape::Sine,
            0,
            3.5,
        )],
        ..base("direction-reversal", 12.0)
    }
}

/// Simultaneous opposite-sign guidance on x and y.
pub fn bidirectional() -> ScenarioSpec {
    use SegmentShape::Sine;
    ScenarioSpec {
        wrench_profile: alloc::vec![
            WrenchSegment::on_axis(2.0, 10.0, Sine, 0, 3.0),
            WrenchSegment::on_axis(2.0, 10.0, Sine, 1, -3.0),
        ],
        ..base("bidirectional", 12.0)
    }
}

/// Simultaneous x-force sine and yaw-torque ramp over a 13 s window, with
/// guidance on all force axes; the nonlinear coupling stress case used for
/// the estimator comparison.
pub fn coupled_force_torque() -> ScenarioSpec {
    use SegmentShape::{Hold, Ramp, Sine};
    ScenarioSpec {
        wrench_profile: alloc::vec![
            WrenchSegment::on_axis(3.0, 16.0, Sine, 0, 3.0),
            WrenchSegment::on_axis(3.0, 16.0, Sine, 1, -2.0),
            WrenchSegment::on_axis(3.0, 16.0, Sine, 2, 2.5),
            WrenchSegment::on_axis(3.0, 16.0, Ramp, 5, 1.2),
            WrenchSegment::on_axis(16.0, 21.0, Hold, 5, 1.2),
        ],
        ..base("coupled-force-torque", 20.0)
    }
}

/// Gentle low-frequency guidance; the EKF tuning reference.
pub fn smooth_motion() -> ScenarioSpec {
    use SegmentShape::Sine;
    ScenarioSpec {
        wrench_profile: alloc::vec![
            WrenchSegment::on_axis(2.0, 18.0, Sine, 0, 1.5),
            WrenchSegment::on_axis(2.0, 18.0, Sine, 1, 1.2),
            WrenchSegment::on_axis(2.0, 18.0, Sine, 2, 2.0),
        ],
        ..base("smooth-motion", 20.0)
    }
}

/// Slow force sine with a bounded model disturbance injected into the plant;
/// noiseless so the disturbance effect is isolated.
pub fn disturbance_robustness() -> ScenarioSpec {
    ScenarioSpec {
        noise: SensorNoise::zero(),
        wrench_profile: alloc::vec![
            WrenchSegment::on_axis(2.0, 18.0, SegmentShape::Sine, 0, 4.0,)
                .with_frequency(2.5 / 16.0)
        ],
        disturbance: Some(DisturbanceSpec {
            epsilon: 0.5,
            axes: [true; 6],
            frequency: 0.8,
            t_start: 2.0,
            t_end: 18.0,
        }),
        ..base("disturbance-robustness", 20.0)
    }
}

/// The full 70 s guidance run: initialization, direction reversal,
/// bidirectional motion, and coupled force-torque interaction phases.
pub fn full_interaction() -> ScenarioSpec {
    use SegmentShape::{Hold, Ramp, Sine};
    ScenarioSpec {
        wrench_profile: alloc::vec![
            // Rapid initialization (0-2 s), held until 6 s, released.
            WrenchSegment::on_axis(0.0, 2.0, Ramp, 0, 2.5),
            WrenchSegment::on_axis(2.0, 6.0, Hold, 0, 2.5),
            WrenchSegment::on_axis(6.0, 7.0, Ramp, 0, 0.0),
            WrenchSegment::on_axis(0.0, 2.0, Ramp, 2, 3.5),
            WrenchSegment::on_axis(2.0, 6.0, Hold, 2, 3.5),
            WrenchSegment::on_axis(6.0, 7.0, Ramp, 2, 0.0),
            // Direction reversals (8-12 s).
            WrenchSegment::on_axis(8.0, 12.0, Sine, 0, 3.5),
            // Bidirectional motion (32-36 s).
            WrenchSegment::on_axis(32.0, 36.0, Sine, 0, 2.5),
            WrenchSegment::on_axis(32.0, 36.0, Sine, 1, -2.5),
            // Coupled force-torque interaction (43-56 s).
            WrenchSegment::on_axis(43.0, 56.0, Sine, 0, 3.0),
            WrenchSegment::on_axis(43.0, 56.0, Sine, 1, -2.0),
            WrenchSegment::on_axis(43.0, 56.0, Sine, 2, 2.5),
            WrenchSegment::on_axis(43.0, 47.0, Ramp, 5, 1.2),
            WrenchSegment::on_axis(47.0, 52.0, Hold, 5, 1.2),
            WrenchSegment::on_axis(52.0, 56.0, Ramp, 5, 0.0),
        ],
        ..base("full-interaction", 70.0)
    }
}

/// All shipped scenarios.
pub fn reference_scenarios() -> Vec<ScenarioSpec> {
    alloc::vec![
        zero_wrench(),
        step_wrench(),
        init_transient(),
        direction_reversal(),
        bidirectional(),
        coupled_force_torque(),
        smooth_motion(),
        disturbance_robustness(),
        full_interaction(),
    ]
}

/// Looks up a shipped scenario by name.
pub fn scenario_by_name(name: &str) -> Option<ScenarioSpec> {
    reference_scenarios().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn shipped_scenarios_validate() {
        let all = reference_scenarios();
        assert_eq!(all.len(), 9);
        for spec in &all {
            spec.validate()
                .unwrap_or_else(|e| panic!("{}: {e}", spec.name));
            assert_eq!(spec.dt_control, 0.01);
            assert!((spec.dt_control / spec.dt_physics - 10.0).abs() < 1e-12);
        }
        assert!(scenario_by_name("coupled-force-torque").is_some());
        assert!(scenario_by_name("unknown").is_none());
    }

    #[test]
    fn full_interaction_runs_seventy_seconds() {
        let spec = full_interaction();
        assert_relative_eq!(spec.duration, 70.0);
        assert_eq!(spec.n_ticks(), 7000);
    }

    #[test]
    fn coupled_scenario_couples_x_force_and_yaw_torque_over_13_s() {
        let spec = coupled_force_torque();
        let sine = spec.wrench_profile.iter().find(|s| s.axes[0]).unwrap();
        let ramp = spec
            .wrench_profile
            .iter()
            .find(|s| s.axes[5] && s.shape == SegmentShape::Ramp)
            .unwrap();
        assert_relative_eq!(sine.t_end - sine.t_start, 13.0);
        assert_relative_eq!(ramp.t_end - ramp.t_start, 13.0);
        assert_eq!(sine.t_start, ramp.t_start);
        // Both channels active mid-window.
        let w = spec.wrench_at(9.5);
        assert!(w[0].abs() > 0.0 && w[5].abs() > 0.0);
    }

    #[test]
    fn ramp_hold_release_chain_is_continuous() {
        let spec = full_interaction();
        for &t in &[2.0, 6.0, 7.0, 47.0, 52.0, 56.0] {
            let before = spec.wrench_at(t - 1e-9);
            let after = spec.wrench_at(t + 1e-9);
            assert_abs_diff_eq!(before, after, epsilon = 1e-6);
        }
        // Release ramp actually reaches zero.
        assert_abs_diff_eq!(spec.wrench_at(7.0)[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sine_segments_complete_full_cycles() {
        for spec in reference_scenarios() {
            for seg in spec
                .wrench_profile
                .iter()
                .filter(|s| s.shape == SegmentShape::Sine)
            {
                assert_abs_diff_eq!(seg.end_value(), 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn step_profile_values() {
        let spec = step_wrench();
        assert_abs_diff_eq!(spec.wrench_at(0.5), Vec6::zeros(), epsilon = 1e-15);
        let w = spec.wrench_at(5.0);
        assert_abs_diff_eq!(w, Vec6::new(2.0, -3.0, 5.0, 0.0, 0.0, 0.5), epsilon = 1e-15);
    }

    #[test]
    fn constancy_detection() {
        let spec = step_wrench();
        assert!(spec.wrench_constant_on(2.0, 2.01));
        assert!(spec.wrench_constant_on(0.1, 0.2));
        assert!(!spec.wrench_constant_on(0.995, 1.005));
        let sine = direction_reversal();
        assert!(!sine.wrench_constant_on(5.0, 5.01));
        assert!(sine.wrench_constant_on(0.5, 0.51));
    }

    #[test]
    fn overlapping_segments_rejected_per_axis() {
        let mut spec = base("bad", 10.0);
        spec.wrench_profile = alloc::vec![
            WrenchSegment::on_axis(1.0, 3.0, SegmentShape::Step, 0, 1.0),
            WrenchSegment::on_axis(2.0, 4.0, SegmentShape::Step, 0, 2.0),
        ];
        assert!(matches!(spec.validate(), Err(Error::InvalidScenario(_))));
        // Different axes may overlap freely.
        spec.wrench_profile[1].axes = [false, true, false, false, false, false];
        spec.validate().unwrap();
    }

    #[test]
    fn mismatched_rates_rejected() {
        let spec = ScenarioSpec {
            dt_physics: 0.002,
            dt_control: 0.005,
            ..base("bad-rates", 1.0)
        };
        assert!(matches!(spec.validate(), Err(Error::InvalidScenario(_))));
        let spec = ScenarioSpec {
            dt_control: 0.0005,
            ..base("control-faster-than-physics", 1.0)
        };
        assert!(matches!(spec.validate(), Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn disturbance_respects_infinity_bound() {
        let d = disturbance_robustness().disturbance.unwrap();
        let mut sup: f64 = 0.0;
        let mut t = 0.0;
        while t < 20.0 {
            sup = sup.max(d.value(t).abs().max());
            t += 0.001;
        }
        assert!(sup <= d.epsilon + 1e-12);
        assert!(sup > 0.9 * d.epsilon, "disturbance should reach its bound");
    }
}
