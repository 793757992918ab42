//! Uplink channel: log-distance path loss, Shannon rate, and the minimum
//! transmit power that meets a rate requirement.

use serde::{Deserialize, Serialize};

use crate::energy::UavSpec;
use crate::error::ModelError;

/// Distances below this are clamped before taking `log10`, m.
pub const DISTANCE_FLOOR: f64 = 1.0;

/// A planar location with its index in the owning scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub id: usize,
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    pub fn new(id: usize, x1: f64, x2: f64) -> Self {
        Self { id, x1, x2 }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }

    pub fn distance_to(&self, (x1, x2): (f64, f64)) -> f64 {
        (self.x1 - x1).hypot(self.x2 - x2)
    }
}

/// How the shadowing term of the path loss is produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shadowing {
    /// Same value for every link, dB.
    Fixed { db: f64 },
    /// Zero-mean Gaussian, drawn once per inspection point per scenario.
    Gaussian { sigma_db: f64 },
}

impl Shadowing {
    pub fn is_random(&self) -> bool {
        matches!(self, Shadowing::Gaussian { sigma_db } if *sigma_db > 0.0)
    }
}

/// Channel parameters shared by every UAV in the fleet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioConfig {
    /// Path loss at the 1 m reference distance, dB.
    pub reference_loss_db: f64,
    /// dB per decade of distance.
    pub pathloss_slope: f64,
    pub shadowing: Shadowing,
    /// Hz
    pub bandwidth: f64,
    /// W/Hz
    pub noise_density: f64,
    /// bit/s
    pub rate_requirement: f64,
    /// bit
    pub packet_size: f64,
    pub bs_location: (f64, f64),
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            reference_loss_db: 40.0,
            pathloss_slope: 20.0,
            shadowing: Shadowing::Fixed { db: 0.0 },
            bandwidth: 1e6,
            noise_density: 4.002e-18,
            rate_requirement: 5e6,
            packet_size: 20e6,
            bs_location: (0.0, 0.0),
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let checks: [(&'static str, f64, bool); 6] = [
            ("bandwidth", self.bandwidth, self.bandwidth > 0.0),
            ("noise_density", self.noise_density, self.noise_density > 0.0),
            ("rate_requirement", self.rate_requirement, self.rate_requirement > 0.0),
            ("packet_size", self.packet_size, self.packet_size >= 0.0),
            ("pathloss_slope", self.pathloss_slope, self.pathloss_slope >= 0.0),
            ("reference_loss_db", self.reference_loss_db, true),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(ModelError::InvalidParameter { name, value });
            }
        }
        match self.shadowing {
            Shadowing::Fixed { db } if !db.is_finite() => Err(ModelError::InvalidParameter {
                name: "shadowing.db",
                value: db,
            }),
            Shadowing::Gaussian { sigma_db } if !(sigma_db >= 0.0 && sigma_db.is_finite()) => {
                Err(ModelError::InvalidParameter {
                    name: "shadowing.sigma_db",
                    value: sigma_db,
                })
            }
            _ => Ok(()),
        }
    }

    /// Over-the-air time to deliver one packet at the required rate, s.
    pub fn airtime(&self) -> f64 {
        self.packet_size / self.rate_requirement
    }

    /// The shadowing value to use when no per-point sample exists.
    pub fn default_shadow_db(&self) -> f64 {
        match self.shadowing {
            Shadowing::Fixed { db } => db,
            Shadowing::Gaussian { .. } => 0.0,
        }
    }
}

/// Path loss between `p` and the BS, dB.
pub fn path_loss(p: &Point, cfg: &RadioConfig, shadow_db: f64) -> f64 {
    let mut dist = p.distance_to(cfg.bs_location);
    if dist < DISTANCE_FLOOR {
        log::debug!(
            "point {} is {dist:.3} m from the BS; clamping to {DISTANCE_FLOOR} m",
            p.id
        );
        dist = DISTANCE_FLOOR;
    }
    cfg.reference_loss_db + cfg.pathloss_slope * dist.log10() + shadow_db
}

/// Achievable uplink rate at transmit power `tx_power` over a link with
/// loss `loss_db`, bit/s.
pub fn uplink_rate(tx_power: f64, loss_db: f64, cfg: &RadioConfig) -> f64 {
    let snr = tx_power * 10f64.powf(-loss_db / 10.0) / (cfg.bandwidth * cfg.noise_density);
    cfg.bandwidth * snr.ln_1p() / std::f64::consts::LN_2
}

/// Transmit power that achieves exactly the rate requirement over a link
/// with loss `loss_db`, W.
pub fn min_tx_power_for_loss(loss_db: f64, cfg: &RadioConfig) -> f64 {
    let spectral = (cfg.rate_requirement / cfg.bandwidth) * std::f64::consts::LN_2;
    cfg.bandwidth * cfg.noise_density * spectral.exp_m1() * 10f64.powf(loss_db / 10.0)
}

/// Minimum transmit power for an upload from `p`, W.
pub fn min_tx_power(p: &Point, cfg: &RadioConfig, shadow_db: f64) -> f64 {
    min_tx_power_for_loss(path_loss(p, cfg, shadow_db), cfg)
}

/// Energy to upload one packet from `p` at minimum power, J.
pub fn transmission_energy(uav: &UavSpec, p: &Point, cfg: &RadioConfig, shadow_db: f64) -> f64 {
    cfg.airtime() * min_tx_power(p, cfg, shadow_db) / uav.efficiency
}
