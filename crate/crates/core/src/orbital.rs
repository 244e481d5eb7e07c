//! Orbital-mechanics primitives: J2 RAAN drift, echelon alignment periods,
//! time-grid quantization, and Hohmann transfer costing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const DAYS_PER_YEAR: f64 = 365.25;

/// Earth gravitational and shape constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarthConstants {
    /// Gravitational parameter, km^3/s^2.
    pub mu_km3_s2: f64,
    /// Equatorial radius, km.
    pub r_earth_km: f64,
    /// Second zonal harmonic coefficient.
    pub j2: f64,
}

impl Default for EarthConstants {
    fn default() -> Self {
        Self {
            mu_km3_s2: 398600.4418,
            r_earth_km: 6378.137,
            j2: 1.08262668e-3,
        }
    }
}

impl EarthConstants {
    pub fn validate(&self) -> Result<()> {
        if self.mu_km3_s2 > 0.0 && self.r_earth_km > 0.0 && self.j2 > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidGeometry(
                "Earth constants must be strictly positive".into(),
            ))
        }
    }
}

/// Walker-Delta constellation plus parking-orbit shell geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstellationGeometry {
    /// Constellation altitude above the surface, km.
    pub h_constellation_km: f64,
    /// Parking altitude above the surface, km.
    pub h_parking_km: f64,
    /// Common inclination, rad.
    pub inclination_rad: f64,
    /// Number of constellation planes.
    pub n_orbit_constellation: u32,
    /// Number of parking orbits.
    pub n_orbit_parking: u32,
    /// Nominal operational satellites per plane.
    pub n_sat_nominal: u32,
}

impl ConstellationGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.h_parking_km > 0.0 && self.h_constellation_km > self.h_parking_km) {
            return Err(Error::InvalidGeometry(format!(
                "need h_constellation > h_parking > 0, got {} and {}",
                self.h_constellation_km, self.h_parking_km
            )));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.inclination_rad) {
            return Err(Error::InvalidGeometry(format!(
                "inclination {} rad outside [0, pi]",
                self.inclination_rad
            )));
        }
        if self.n_orbit_constellation == 0 || self.n_orbit_parking == 0 || self.n_sat_nominal == 0
        {
            return Err(Error::InvalidGeometry(
                "plane counts and nominal satellite count must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Semi-major axis of the constellation shell, km.
    pub fn a_constellation_km(&self, constants: &EarthConstants) -> f64 {
        constants.r_earth_km + self.h_constellation_km
    }

    /// Semi-major axis of the parking shell, km.
    pub fn a_parking_km(&self, constants: &EarthConstants) -> f64 {
        constants.r_earth_km + self.h_parking_km
    }
}

/// One batch transfer from parking to constellation altitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferCosting {
    pub delta_v_km_s: f64,
    pub m_dry_kg: f64,
    pub m_fuel_kg: f64,
    /// Wet mass of one batch, `m_dry + m_fuel`.
    pub m_batch_kg: f64,
}

impl TransferCosting {
    pub fn new(
        a_parking_km: f64,
        a_constellation_km: f64,
        m_dry_kg: f64,
        v_ex_km_s: f64,
        constants: &EarthConstants,
    ) -> Result<Self> {
        let delta_v_km_s = hohmann_delta_v(a_parking_km, a_constellation_km, constants)?;
        let m_fuel_kg = fuel_mass(m_dry_kg, delta_v_km_s, v_ex_km_s)?;
        Ok(Self {
            delta_v_km_s,
            m_dry_kg,
            m_fuel_kg,
            m_batch_kg: m_dry_kg + m_fuel_kg,
        })
    }
}

/// Secular RAAN drift rate of a circular orbit, rad/day.
///
/// Negative for prograde inclinations below 90 degrees.
pub fn raan_drift_rate(a_km: f64, inclination_rad: f64, constants: &EarthConstants) -> Result<f64> {
    if a_km <= constants.r_earth_km {
        return Err(Error::InvalidGeometry(format!(
            "semi-major axis {a_km} km is below the Earth radius"
        )));
    }
    let ratio = constants.r_earth_km / a_km;
    let mean_motion = (constants.mu_km3_s2 / a_km.powi(3)).sqrt(); // rad/s
    let rate_per_s = -1.5 * constants.j2 * ratio * ratio * mean_motion * inclination_rad.cos();
    Ok(rate_per_s * SECONDS_PER_DAY)
}

/// Alignment periods `(tau_c, tau_p)` in days.
///
/// `tau_c` is the interval between successive contacts seen by one
/// constellation plane; `tau_p` the interval seen by one parking orbit.
pub fn alignment_periods(
    geometry: &ConstellationGeometry,
    constants: &EarthConstants,
) -> Result<(f64, f64)> {
    let drift_c = raan_drift_rate(
        geometry.a_constellation_km(constants),
        geometry.inclination_rad,
        constants,
    )?;
    let drift_p = raan_drift_rate(
        geometry.a_parking_km(constants),
        geometry.inclination_rad,
        constants,
    )?;
    let relative = (drift_c - drift_p).abs();
    if relative < 1e-12 {
        return Err(Error::DegenerateAlignment);
    }
    let tau = std::f64::consts::TAU;
    let tau_c = tau / (geometry.n_orbit_parking as f64 * relative);
    let tau_p = tau / (geometry.n_orbit_constellation as f64 * relative);
    Ok((tau_c, tau_p))
}

/// Rounds alignment periods to integer step counts on the `tau_mc` grid.
///
/// Rounding is half-away-from-zero; a rounded count of zero means the time
/// step is too coarse to resolve the period.
pub fn quantize_periods(tau_c: f64, tau_p: f64, tau_mc: f64) -> Result<(u32, u32)> {
    if tau_mc <= 0.0 {
        return Err(Error::TimeStepTooCoarse("tau_mc must be positive".into()));
    }
    let quantize = |period: f64, name: &str| -> Result<u32> {
        let k = (period / tau_mc).round();
        if k < 1.0 {
            return Err(Error::TimeStepTooCoarse(format!(
                "{name} = {period} days rounds to zero steps of {tau_mc} days"
            )));
        }
        Ok(k as u32)
    };
    Ok((quantize(tau_c, "tau_c")?, quantize(tau_p, "tau_p")?))
}

/// Two-burn Hohmann transfer delta-v from `a_p` up to `a_c`, km/s.
pub fn hohmann_delta_v(a_p_km: f64, a_c_km: f64, constants: &EarthConstants) -> Result<f64> {
    if a_p_km <= constants.r_earth_km {
        return Err(Error::InvalidGeometry(format!(
            "initial orbit radius {a_p_km} km is below the Earth radius"
        )));
    }
    if a_c_km < a_p_km {
        return Err(Error::InvalidTransfer(format!(
            "only raising transfers are modeled, got {a_p_km} -> {a_c_km} km"
        )));
    }
    let mu = constants.mu_km3_s2;
    let sum = a_p_km + a_c_km;
    let burn1 = (mu / a_p_km).sqrt() * ((2.0 * a_c_km / sum).sqrt() - 1.0);
    let burn2 = (mu / a_c_km).sqrt() * (1.0 - (2.0 * a_p_km / sum).sqrt());
    Ok(burn1 + burn2)
}

/// Propellant mass for an impulsive burn, `m_dry (e^{dv/v_ex} - 1)`, kg.
pub fn fuel_mass(m_dry_kg: f64, delta_v_km_s: f64, v_ex_km_s: f64) -> Result<f64> {
    if v_ex_km_s <= 0.0 {
        return Err(Error::InvalidPropulsion(format!(
            "exhaust velocity must be positive, got {v_ex_km_s}"
        )));
    }
    if m_dry_kg < 0.0 || delta_v_km_s < 0.0 {
        return Err(Error::InvalidPropulsion(
            "dry mass and delta-v must be nonnegative".into(),
        ));
    }
    Ok(m_dry_kg * ((delta_v_km_s / v_ex_km_s).exp() - 1.0))
}
