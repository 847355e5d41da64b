//! Okumura-Hata urban path loss and the dB-domain link budget.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RfError {
    #[error("carrier frequency {0} MHz outside the 150-2000 MHz Hata range")]
    FrequencyOutOfRange(f64),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("distance must be positive, got {0} km")]
    BadDistance(f64),
}

/// Radio parameters shared by every site in the network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfEnvironment {
    /// Carrier frequency, MHz.
    pub carrier_mhz: f64,
    /// Base-station antenna height, m.
    pub bs_height_m: f64,
    /// Mobile antenna height, m.
    pub ms_height_m: f64,
    /// Building penetration loss added to every path, dB.
    pub penetration_loss_db: f64,
    /// Per-carrier transmit power of every site, dBm.
    pub tx_power_dbm: f64,
    pub cell_radius_km: f64,
    /// Receiver noise power, dBm. `None` evaluates pure SIR.
    pub noise_floor_dbm: Option<f64>,
}

impl Default for RfEnvironment {
    fn default() -> Self {
        RfEnvironment {
            carrier_mhz: 1800.0,
            bs_height_m: 100.0,
            ms_height_m: 5.0,
            penetration_loss_db: 20.0,
            tx_power_dbm: watts_to_dbm(1500.0),
            cell_radius_km: 1.0,
            noise_floor_dbm: Some(-121.0),
        }
    }
}

impl RfEnvironment {
    pub fn validate(&self) -> Result<(), RfError> {
        if !(150.0..=2000.0).contains(&self.carrier_mhz) {
            return Err(RfError::FrequencyOutOfRange(self.carrier_mhz));
        }
        for (name, value) in [
            ("base-station height", self.bs_height_m),
            ("mobile height", self.ms_height_m),
            ("cell radius", self.cell_radius_km),
        ] {
            if !(value > 0.0) {
                return Err(RfError::NonPositive { name, value });
            }
        }
        Ok(())
    }

    /// Slope of the Hata distance term, dB per decade of distance.
    pub fn distance_slope_db(&self) -> f64 {
        44.9 - 6.55 * self.bs_height_m.log10()
    }
}

/// Mobile antenna height correction a(h_m), dB.
pub fn antenna_correction(carrier_mhz: f64, ms_height_m: f64) -> f64 {
    let lf = carrier_mhz.log10();
    1.1 * (lf - 0.7) * ms_height_m - (1.56 * lf - 0.8)
}

/// Median path loss at `distance_km`, penetration loss included.
pub fn path_loss(env: &RfEnvironment, distance_km: f64) -> Result<f64, RfError> {
    if !(distance_km > 0.0) {
        return Err(RfError::BadDistance(distance_km));
    }
    let lf = env.carrier_mhz.log10();
    let lh = env.bs_height_m.log10();
    Ok(69.55 + 26.16 * lf - 13.82 * lh - antenna_correction(env.carrier_mhz, env.ms_height_m)
        + env.distance_slope_db() * distance_km.log10()
        + env.penetration_loss_db)
}

pub fn received_power(tx_dbm: f64, loss_db: f64) -> f64 {
    tx_dbm - loss_db
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1e3).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Thermal noise over `bandwidth_hz` at `density_dbm_hz` (typically -174 dBm/Hz).
pub fn thermal_noise_dbm(density_dbm_hz: f64, bandwidth_hz: f64) -> f64 {
    density_dbm_hz + 10.0 * bandwidth_hz.log10()
}
