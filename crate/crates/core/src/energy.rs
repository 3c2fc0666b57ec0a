//! Control thrust of a flight: `α · distance + β · Σ |v_t - v_{t-1}|`.
//!
//! Grid trajectories get one velocity per time step (cruise speed along the
//! move, zero while waiting), so a 90° corner shows up as a single velocity
//! jump of `v√2`. The β/α ratio of each size class is calibrated on a smooth
//! turn maneuver instead: an arc of radius 45 m flown at `v/√2`, entered by
//! slowing down uniformly through the first 45° and left by speeding up
//! through the second 45°.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tsmaze::{GridGeometry, Trajectory};

pub type Velocity = Vector2<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("profile has {profile} steps but the trajectory has {trajectory}")]
    LengthMismatch { profile: usize, trajectory: usize },
    #[error("flight has zero duration")]
    ZeroDuration,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

/// Per-step acceleration: the component-wise velocity difference.
pub fn acceleration(v_t: Velocity, v_prev: Velocity) -> Velocity {
    v_t - v_prev
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeClass {
    Small,
    Medium,
    Large,
}

impl SizeClass {
    pub const ALL: [SizeClass; 3] = [SizeClass::Small, SizeClass::Medium, SizeClass::Large];

    /// Straight distance whose thrust equals that of one standard turn.
    pub fn turn_equivalent_straight_m(self) -> f64 {
        match self {
            SizeClass::Small => 90.0,
            SizeClass::Medium => 180.0,
            SizeClass::Large => 270.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SizeClass::Small => "small",
            SizeClass::Medium => "medium",
            SizeClass::Large => "large",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrustParams {
    pub alpha: f64,
    pub beta: f64,
    pub class: SizeClass,
}

impl ThrustParams {
    pub fn new(alpha: f64, beta: f64, class: SizeClass) -> Result<Self, EnergyError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(EnergyError::InvalidParams(format!(
                "alpha must be > 0, got {alpha}"
            )));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(EnergyError::InvalidParams(format!(
                "beta must be >= 0, got {beta}"
            )));
        }
        Ok(Self { alpha, beta, class })
    }

    /// α = 1 and β set so that one standard turn costs as much as flying the
    /// class's equivalent straight distance.
    pub fn calibrated(class: SizeClass, kinematics: &TurnKinematics) -> Self {
        let ratio = calibrate_beta_alpha(class.turn_equivalent_straight_m(), kinematics);
        Self {
            alpha: 1.0,
            beta: ratio,
            class,
        }
    }
}

/// One velocity per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile {
    pub step_seconds: f64,
    pub velocities: Vec<Velocity>,
    /// Count the jump from rest before the first step and back to rest after
    /// the last one.
    pub include_transients: bool,
}

impl VelocityProfile {
    pub fn new(step_seconds: f64, velocities: Vec<Velocity>) -> Self {
        Self {
            step_seconds,
            velocities,
            include_transients: false,
        }
    }

    /// Cruise speed along every move, zero during waits.
    pub fn for_trajectory(traj: &Trajectory, geometry: &GridGeometry) -> Self {
        let v = geometry.cruise_speed_mps();
        let velocities = traj
            .directions()
            .map(|d| {
                let (ux, uy) = d.unit();
                Velocity::new(ux * v, uy * v)
            })
            .collect();
        Self::new(geometry.step_seconds(), velocities)
    }

    /// Velocities from consecutive sampled positions.
    pub fn from_positions(step_seconds: f64, positions: &[(f64, f64)]) -> Self {
        let velocities = positions
            .windows(2)
            .map(|w| Velocity::new(w[1].0 - w[0].0, w[1].1 - w[0].1) / step_seconds)
            .collect();
        Self::new(step_seconds, velocities)
    }

    pub fn steps(&self) -> usize {
        self.velocities.len()
    }

    pub fn duration_s(&self) -> f64 {
        self.steps() as f64 * self.step_seconds
    }

    pub fn distance_m(&self) -> f64 {
        self.velocities.iter().map(|v| v.norm()).sum::<f64>() * self.step_seconds
    }

    pub fn sum_abs_acceleration(&self) -> f64 {
        let inner: f64 = self
            .velocities
            .windows(2)
            .map(|w| acceleration(w[1], w[0]).norm())
            .sum();
        if self.include_transients {
            let first = self.velocities.first().map_or(0.0, |v| v.norm());
            let last = self.velocities.last().map_or(0.0, |v| v.norm());
            inner + first + last
        } else {
            inner
        }
    }
}

/// Thrust of any sampled flight.
pub fn thrust_of_profile(profile: &VelocityProfile, p: &ThrustParams) -> f64 {
    p.alpha * profile.distance_m() + p.beta * profile.sum_abs_acceleration()
}

pub fn control_thrust(
    traj: &Trajectory,
    profile: &VelocityProfile,
    p: &ThrustParams,
) -> Result<f64, EnergyError> {
    if profile.steps() != traj.steps() {
        return Err(EnergyError::LengthMismatch {
            profile: profile.steps(),
            trajectory: traj.steps(),
        });
    }
    Ok(thrust_of_profile(profile, p))
}

pub fn energy_per_second(
    traj: &Trajectory,
    profile: &VelocityProfile,
    p: &ThrustParams,
) -> Result<f64, EnergyError> {
    let thrust = control_thrust(traj, profile, p)?;
    if traj.steps() == 0 {
        return Err(EnergyError::ZeroDuration);
    }
    Ok(thrust / profile.duration_s())
}

/// Parameters of the standard 90° turn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnKinematics {
    pub cruise_speed_mps: f64,
    pub step_seconds: f64,
    pub radius_m: f64,
    /// Speed at the 45° midpoint as a fraction of cruise speed.
    pub slow_factor: f64,
}

impl TurnKinematics {
    pub fn new(cruise_speed_mps: f64, step_seconds: f64) -> Self {
        Self {
            cruise_speed_mps,
            step_seconds,
            radius_m: 45.0,
            slow_factor: std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    pub fn for_geometry(geometry: &GridGeometry) -> Self {
        Self::new(geometry.cruise_speed_mps(), geometry.step_seconds())
    }

    /// Steps per 45° phase: the phase arc length over the mean phase speed,
    /// rounded, at least one.
    pub fn steps_per_phase(&self) -> usize {
        let arc = self.radius_m * std::f64::consts::FRAC_PI_4;
        let mean_speed = self.cruise_speed_mps * (1.0 + self.slow_factor) / 2.0;
        ((arc / (mean_speed * self.step_seconds)).round() as usize).max(1)
    }

    fn speed_at(&self, j: usize, k: usize) -> f64 {
        let v = self.cruise_speed_mps;
        let slow = v * self.slow_factor;
        let frac = if j <= k {
            j as f64 / k as f64
        } else {
            (2 * k - j) as f64 / k as f64
        };
        v - (v - slow) * frac
    }

    /// Σ|acc| of the maneuver from the law of cosines on consecutive samples.
    pub fn closed_form_sum_abs_acc(&self) -> f64 {
        let k = self.steps_per_phase();
        let dtheta = std::f64::consts::FRAC_PI_4 / k as f64;
        (1..=2 * k)
            .map(|j| {
                let (a, b) = (self.speed_at(j - 1, k), self.speed_at(j, k));
                (a * a + b * b - 2.0 * a * b * dtheta.cos()).max(0.0).sqrt()
            })
            .sum()
    }
}

/// Velocity samples of one left-hand 90° turn starting eastbound, cruise
/// speed at both ends, `2k + 1` samples for `k` steps per 45° phase.
pub fn turn_maneuver_profile(kinematics: &TurnKinematics) -> Vec<Velocity> {
    let k = kinematics.steps_per_phase();
    let dtheta = std::f64::consts::FRAC_PI_4 / k as f64;
    (0..=2 * k)
        .map(|j| {
            let s = kinematics.speed_at(j, k);
            // Heading rotates from east towards north (negative y).
            let theta = dtheta * j as f64;
            Velocity::new(s * theta.cos(), -s * theta.sin())
        })
        .collect()
}

/// Σ|acc| of the standard turn by step-by-step differencing.
pub fn turn_sum_abs_acc(kinematics: &TurnKinematics) -> f64 {
    turn_maneuver_profile(kinematics)
        .windows(2)
        .map(|w| acceleration(w[1], w[0]).norm())
        .sum()
}

/// β/α such that `β · Σ|acc|(standard turn) = α · equivalent_straight_m`.
///
/// Computed as a multiple of the small-class ratio so that the class ratios
/// stay exact integer multiples of each other in floating point.
pub fn calibrate_beta_alpha(equivalent_straight_m: f64, kinematics: &TurnKinematics) -> f64 {
    let base = SizeClass::Small.turn_equivalent_straight_m();
    (equivalent_straight_m / base) * (base / turn_sum_abs_acc(kinematics))
}
