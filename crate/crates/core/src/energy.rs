//! Quadrotor flight and hover power.
//!
//! Momentum-theory power model: thrust balances weight plus a constant drag
//! force, the rotor induced velocity is the root of a scalar nonlinear
//! equation, and actual power is the theoretical minimum divided by the
//! vehicle's power efficiency.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::roots::bisect;

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Relative residual accepted for the induced-velocity solve.
pub const INDUCED_VELOCITY_RTOL: f64 = 1e-12;

/// Iteration cap for the induced-velocity solve.
pub const INDUCED_VELOCITY_MAX_ITER: u32 = 200;

/// Physical and efficiency parameters of one UAV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavSpec {
    /// Airframe mass, kg.
    pub body_mass: f64,
    /// Battery mass, kg.
    pub battery_mass: f64,
    pub rotor_count: u32,
    /// Rotor size `r`, m. Enters the power equations as `r²`.
    pub rotor_diameter: f64,
    /// Power efficiency in `(0, 1]`.
    pub efficiency: f64,
    /// Average ground speed, m/s.
    pub ground_speed: f64,
    /// Drag force, N.
    pub drag_force: f64,
    /// Energy budget, J.
    pub energy_budget: f64,
}

impl UavSpec {
    /// Quadrotor from the reference simulation setup, with the given budget.
    pub fn reference(energy_budget: f64) -> Self {
        Self {
            body_mass: 1.07,
            battery_mass: 1.0,
            rotor_count: 4,
            rotor_diameter: 0.254,
            efficiency: 0.7,
            ground_speed: 1.49,
            drag_force: 9.6998,
            energy_budget,
        }
    }

    pub fn with_efficiency(mut self, efficiency: f64) -> Self {
        self.efficiency = efficiency;
        self
    }

    pub fn with_budget(mut self, energy_budget: f64) -> Self {
        self.energy_budget = energy_budget;
        self
    }

    pub fn mass(&self) -> f64 {
        self.body_mass + self.battery_mass
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check("body_mass", self.body_mass, |v| v > 0.0)?;
        check("battery_mass", self.battery_mass, |v| v > 0.0)?;
        check("rotor_count", f64::from(self.rotor_count), |v| v >= 1.0)?;
        check("rotor_diameter", self.rotor_diameter, |v| v > 0.0)?;
        check("efficiency", self.efficiency, |v| v > 0.0 && v <= 1.0)?;
        check("ground_speed", self.ground_speed, |v| v > 0.0)?;
        check("drag_force", self.drag_force, |v| v >= 0.0)?;
        check("energy_budget", self.energy_budget, |v| v >= 0.0)?;
        Ok(())
    }

    /// `q·r²·π·ρ`, the rotor disc factor shared by the induced-velocity and
    /// hover equations.
    fn disc_factor(&self, env: &Environment) -> f64 {
        f64::from(self.rotor_count) * self.rotor_diameter.powi(2) * PI * env.air_density
    }
}

/// Ambient conditions shared by the fleet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// kg/m³
    pub air_density: f64,
    /// m/s²
    pub gravity: f64,
    /// Pitch angle β during forward flight, rad.
    pub pitch_angle: f64,
}

impl Environment {
    /// Sea-level air with the pitch angle that tilts thrust to balance the
    /// given UAV's drag against its weight: `β = atan(f_d / (m g))`.
    pub fn balanced_for(uav: &UavSpec) -> Self {
        let gravity = STANDARD_GRAVITY;
        Self {
            air_density: 1.225,
            gravity,
            pitch_angle: (uav.drag_force / (uav.mass() * gravity)).atan(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check("air_density", self.air_density, |v| v > 0.0)?;
        check("gravity", self.gravity, |v| v > 0.0)?;
        check("pitch_angle", self.pitch_angle, |v| (0.0..PI / 2.0).contains(&v))?;
        Ok(())
    }
}

impl Default for Environment {
    fn default() -> Self {
        Self::balanced_for(&UavSpec::reference(0.0))
    }
}

fn check(name: &'static str, value: f64, ok: impl Fn(f64) -> bool) -> Result<(), ModelError> {
    if value.is_finite() && ok(value) {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { name, value })
    }
}

/// Required thrust `T = m g + f_d`, N.
pub fn thrust(uav: &UavSpec, env: &Environment) -> f64 {
    uav.mass() * env.gravity + uav.drag_force
}

/// Induced velocity at hover, where the momentum equation has the closed
/// form `v̂² = 2T / (q r² π ρ)`.
pub fn hover_induced_velocity(uav: &UavSpec, env: &Environment, thrust: f64) -> f64 {
    (2.0 * thrust / uav.disc_factor(env)).sqrt()
}

/// Residual of the induced-velocity equation, scaled so a root has zero
/// residual: `v̂·q r² π ρ·sqrt((v cos β)² + (v sin β + v̂)²) − 2T`.
pub fn induced_velocity_residual(uav: &UavSpec, env: &Environment, thrust: f64, speed: f64, induced: f64) -> f64 {
    let (sin_b, cos_b) = env.pitch_angle.sin_cos();
    let axial = speed * sin_b + induced;
    let lateral = speed * cos_b;
    induced * uav.disc_factor(env) * lateral.hypot(axial) - 2.0 * thrust
}

/// Positive root `v̂` of the induced-velocity equation for thrust `thrust`
/// at ground speed `speed`.
///
/// The residual is strictly increasing in `v̂` on `(0, ∞)`, so bisection over
/// `(0, 10·v̂_hover]` always brackets the root.
pub fn induced_velocity(uav: &UavSpec, env: &Environment, thrust: f64, speed: f64) -> Result<f64, ModelError> {
    if thrust.is_nan() || thrust <= 0.0 || speed.is_nan() || speed < 0.0 {
        return Err(ModelError::InvalidParameter {
            name: if thrust > 0.0 { "speed" } else { "thrust" },
            value: if thrust > 0.0 { speed } else { thrust },
        });
    }
    let hi = 10.0 * hover_induced_velocity(uav, env, thrust);
    let f_tol = INDUCED_VELOCITY_RTOL * 2.0 * thrust;
    bisect(
        |x| induced_velocity_residual(uav, env, thrust, speed, x),
        0.0,
        hi,
        f_tol,
        INDUCED_VELOCITY_MAX_ITER,
    )
    .map(|r| r.x)
    .ok_or(ModelError::NonConvergence {
        iterations: INDUCED_VELOCITY_MAX_ITER,
    })
}

/// Theoretical minimum forward-flight power `(v̂ + v sin β)·T`, W.
pub fn min_flight_power(uav: &UavSpec, env: &Environment) -> Result<f64, ModelError> {
    let t = thrust(uav, env);
    let v = uav.ground_speed;
    let induced = induced_velocity(uav, env, t, v)?;
    Ok((induced + v * env.pitch_angle.sin()) * t)
}

/// Actual forward-flight power `p_f^min / η`, W.
pub fn flight_power(uav: &UavSpec, env: &Environment) -> Result<f64, ModelError> {
    Ok(min_flight_power(uav, env)? / uav.efficiency)
}

/// Energy to fly `distance` metres at the UAV's ground speed, J.
pub fn flight_energy(uav: &UavSpec, env: &Environment, distance: f64) -> Result<f64, ModelError> {
    Ok(min_flight_power(uav, env)? * distance / (uav.ground_speed * uav.efficiency))
}

/// Theoretical minimum hover power `T^{3/2} / sqrt(0.5 π q r² ρ)`, W.
pub fn min_hover_power(uav: &UavSpec, env: &Environment) -> f64 {
    let t = thrust(uav, env);
    t * t.sqrt() / (0.5 * uav.disc_factor(env)).sqrt()
}

/// Actual hover power `p_h^min / η`, W.
pub fn hover_power(uav: &UavSpec, env: &Environment) -> f64 {
    min_hover_power(uav, env) / uav.efficiency
}

/// Per-UAV constants of the power model, evaluated once so that graph
/// construction does not re-solve the induced velocity per edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile {
    pub thrust: f64,
    pub induced_velocity: f64,
    pub min_flight_power: f64,
    pub min_hover_power: f64,
    pub efficiency: f64,
    pub ground_speed: f64,
}

impl PowerProfile {
    pub fn new(uav: &UavSpec, env: &Environment) -> Result<Self, ModelError> {
        uav.validate()?;
        env.validate()?;
        let t = thrust(uav, env);
        let induced = induced_velocity(uav, env, t, uav.ground_speed)?;
        Ok(Self {
            thrust: t,
            induced_velocity: induced,
            min_flight_power: (induced + uav.ground_speed * env.pitch_angle.sin()) * t,
            min_hover_power: min_hover_power(uav, env),
            efficiency: uav.efficiency,
            ground_speed: uav.ground_speed,
        })
    }

    pub fn flight_power(&self) -> f64 {
        self.min_flight_power / self.efficiency
    }

    pub fn hover_power(&self) -> f64 {
        self.min_hover_power / self.efficiency
    }

    pub fn flight_energy(&self, distance: f64) -> f64 {
        self.min_flight_power * distance / (self.ground_speed * self.efficiency)
    }

    pub fn flight_time(&self, distance: f64) -> f64 {
        distance / self.ground_speed
    }
}
