//! Free-space link budget from transmitter power to received C/N0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::antenna::{AntennaError, AntennaPattern};
use crate::constants::{BOLTZMANN_DB, SPEED_OF_LIGHT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Antenna(#[from] AntennaError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarrierBand {
    pub name: String,
    pub frequency_mhz: f64,
}

impl CarrierBand {
    pub fn builtin(name: &str) -> Option<Self> {
        let frequency_mhz = match name.to_ascii_uppercase().as_str() {
            "L1" | "E1" => 1575.42,
            "L2" => 1227.6,
            "L5" => 1176.45,
            "E5" => 1191.795,
            _ => return None,
        };
        Some(Self { name: name.to_ascii_uppercase(), frequency_mhz })
    }

    pub fn l1() -> Self {
        Self::builtin("L1").expect("built-in band")
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_mhz * 1e6
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudgetConfig {
    pub tx_power_dbw: f64,
    pub tx_pattern: AntennaPattern,
    pub rx_pattern: AntennaPattern,
    pub system_noise_temperature_k: f64,
    pub tx_margin_db: f64,
    /// Lumped polarization and implementation losses.
    pub fixed_loss_db: f64,
}

impl LinkBudgetConfig {
    pub const MAX_TX_MARGIN_DB: f64 = 7.0;

    pub fn validate(&self) -> Result<(), LinkError> {
        if !(self.system_noise_temperature_k > 0.0) || !self.system_noise_temperature_k.is_finite() {
            return Err(LinkError::InvalidInput(format!(
                "system noise temperature must be positive, got {}",
                self.system_noise_temperature_k
            )));
        }
        if !(0.0..=Self::MAX_TX_MARGIN_DB).contains(&self.tx_margin_db) {
            return Err(LinkError::InvalidInput(format!(
                "tx margin {} dB outside [0, {}]",
                self.tx_margin_db,
                Self::MAX_TX_MARGIN_DB
            )));
        }
        if !self.tx_power_dbw.is_finite() || !self.fixed_loss_db.is_finite() {
            return Err(LinkError::InvalidInput("non-finite power or loss".into()));
        }
        Ok(())
    }
}

/// `20·log10(4π·d·f/c)` with `d` in km and `f` in MHz.
pub fn free_space_path_loss(distance_km: f64, frequency_mhz: f64) -> Result<f64, LinkError> {
    if !(distance_km > 0.0) || !(frequency_mhz > 0.0) || !distance_km.is_finite() || !frequency_mhz.is_finite() {
        return Err(LinkError::InvalidInput(format!(
            "distance {distance_km} km and frequency {frequency_mhz} MHz must be positive"
        )));
    }
    let d = distance_km * 1e3;
    let f = frequency_mhz * 1e6;
    Ok(20.0 * (4.0 * std::f64::consts::PI * d * f / SPEED_OF_LIGHT).log10())
}

/// Received carrier-to-noise density (dBHz).
pub fn carrier_to_noise_density(
    cfg: &LinkBudgetConfig,
    band: &CarrierBand,
    tx_off_boresight_deg: f64,
    rx_off_boresight_deg: f64,
    range_km: f64,
) -> Result<f64, LinkError> {
    let g_tx = cfg.tx_pattern.gain(tx_off_boresight_deg)?;
    let g_rx = cfg.rx_pattern.gain(rx_off_boresight_deg)?;
    let fspl = free_space_path_loss(range_km, band.frequency_mhz)?;
    Ok(cfg.tx_power_dbw + cfg.tx_margin_db + g_tx + g_rx - fspl - cfg.fixed_loss_db + BOLTZMANN_DB
        - 10.0 * cfg.system_noise_temperature_k.log10())
}
