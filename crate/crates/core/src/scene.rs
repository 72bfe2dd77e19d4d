//! Scenario description and the link geometry derived from it.
//!
//! All nodes share the global axes. Elevation is measured from the horizontal
//! plane and azimuth is `|atan2(y, x)|`, which keeps it inside `[0, π]`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::metrics::{db_to_linear, dbm_to_watts};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub type Point3 = [f64; 3];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("link endpoints coincide at {0:?}")]
    ZeroDistance(Point3),
    #[error("invalid scenario field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// Every parameter of one deployment scenario, in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub bs_position: Point3,
    pub ris_positions: Vec<Point3>,
    pub uav_positions: Vec<Point3>,
    pub n_bs_antennas: usize,
    pub ris_elements_x: usize,
    pub ris_elements_y: usize,
    /// Hz.
    pub carrier_freq: f64,
    /// Linear LoS/NLoS power ratio of the BS→RIS links.
    pub rician_bs_ris: f64,
    /// Linear LoS/NLoS power ratio of the RIS→UAV links.
    pub rician_ris_uav: f64,
    /// BS downtilt, radians.
    pub downtilt: f64,
    /// Watts.
    pub noise_power: f64,
    /// Watts.
    pub p_max: f64,
    /// Element spacings along x, y (RIS) and z (BS), meters.
    pub element_spacing: [f64; 3],
    pub pathloss_enabled: bool,
    /// Permits `ris_elements_x != ris_elements_y`.
    pub allow_non_square: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let carrier_freq = 28e9;
        let half_wave = SPEED_OF_LIGHT / carrier_freq / 2.0;
        Self {
            bs_position: [0.0, 0.0, 2.0],
            ris_positions: vec![[-2.5, 8.0, 0.0], [2.5, 0.0, 0.0]],
            uav_positions: vec![[-3.0, 10.0, 6.0], [2.0, 6.0, 10.0]],
            n_bs_antennas: 4,
            ris_elements_x: 4,
            ris_elements_y: 4,
            carrier_freq,
            rician_bs_ris: db_to_linear(30.0),
            rician_ris_uav: db_to_linear(30.0),
            downtilt: 0.0,
            noise_power: dbm_to_watts(-100.0),
            p_max: dbm_to_watts(45.0),
            element_spacing: [half_wave; 3],
            pathloss_enabled: true,
            allow_non_square: false,
        }
    }
}

impl SystemConfig {
    pub fn n_ris(&self) -> usize {
        self.ris_positions.len()
    }

    pub fn n_uav(&self) -> usize {
        self.uav_positions.len()
    }

    /// Elements per RIS.
    pub fn elements_per_ris(&self) -> usize {
        self.ris_elements_x * self.ris_elements_y
    }

    /// Elements across all RISs.
    pub fn total_elements(&self) -> usize {
        self.elements_per_ris() * self.n_ris()
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    /// Half-wavelength spacing on every axis.
    pub fn half_wavelength_spacing(&self) -> [f64; 3] {
        [self.wavelength() / 2.0; 3]
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        fn invalid(field: &'static str, reason: impl Into<String>) -> SceneError {
            SceneError::Invalid {
                field,
                reason: reason.into(),
            }
        }
        if self.ris_positions.is_empty() {
            return Err(invalid("ris_positions", "at least one RIS is required"));
        }
        if self.uav_positions.is_empty() {
            return Err(invalid("uav_positions", "at least one UAV is required"));
        }
        if self.n_bs_antennas == 0 {
            return Err(invalid("n_bs_antennas", "must be at least 1"));
        }
        if self.ris_elements_x == 0 || self.ris_elements_y == 0 {
            return Err(invalid("ris_elements", "element counts must be at least 1"));
        }
        if self.ris_elements_x != self.ris_elements_y && !self.allow_non_square {
            return Err(invalid(
                "ris_elements",
                format!(
                    "RIS must be square ({}x{}); set allow_non_square to override",
                    self.ris_elements_x, self.ris_elements_y
                ),
            ));
        }
        let positive = [
            ("carrier_freq", self.carrier_freq),
            ("noise_power", self.noise_power),
            ("p_max", self.p_max),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(field, format!("must be positive and finite, got {v}")));
            }
        }
        for (field, k) in [("rician_bs_ris", self.rician_bs_ris), ("rician_ris_uav", self.rician_ris_uav)] {
            if !(k >= 0.0) {
                return Err(invalid(field, format!("must be non-negative, got {k}")));
            }
        }
        if self.element_spacing.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(invalid("element_spacing", "spacings must be positive"));
        }
        if !self.downtilt.is_finite() {
            return Err(invalid("downtilt", "must be finite"));
        }
        let all_points = std::iter::once(&self.bs_position)
            .chain(&self.ris_positions)
            .chain(&self.uav_positions);
        if all_points.flatten().any(|c| !c.is_finite()) {
            return Err(invalid("positions", "coordinates must be finite"));
        }
        Ok(())
    }
}

/// Angles, length and delay of one line-of-sight link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Radians in `[0, π]`.
    pub azimuth: f64,
    /// Radians in `[-π/2, π/2]`.
    pub elevation: f64,
    /// Meters.
    pub distance: f64,
    /// Seconds.
    pub delay: f64,
}

pub fn link_geometry(source: Point3, target: Point3) -> Result<LinkGeometry, SceneError> {
    let v = [target[0] - source[0], target[1] - source[1], target[2] - source[2]];
    let distance = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(distance > 0.0) {
        return Err(SceneError::ZeroDistance(source));
    }
    let elevation = (v[2] / distance).clamp(-1.0, 1.0).asin();
    let azimuth = v[1].atan2(v[0]).abs().min(PI);
    Ok(LinkGeometry {
        azimuth,
        elevation,
        distance,
        delay: distance / SPEED_OF_LIGHT,
    })
}

/// Geometry of every hop in a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySet {
    /// Indexed by RIS.
    pub bs_ris: Vec<LinkGeometry>,
    /// Indexed `[ris][uav]`.
    pub ris_uav: Vec<Vec<LinkGeometry>>,
}

pub fn build_geometry(config: &SystemConfig) -> Result<GeometrySet, SceneError> {
    let bs_ris = config
        .ris_positions
        .iter()
        .map(|&ris| link_geometry(config.bs_position, ris))
        .collect::<Result<Vec<_>, _>>()?;
    let ris_uav = config
        .ris_positions
        .iter()
        .map(|&ris| {
            config
                .uav_positions
                .iter()
                .map(|&uav| link_geometry(ris, uav))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GeometrySet { bs_ris, ris_uav })
}
