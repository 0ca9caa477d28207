//! Per-household system configuration.

use serde::{Deserialize, Serialize};

use crate::battery::BatterySpec;
use crate::error::{CoreError, Result};

/// Default maximum grid connection power in kW (single-phase residential
/// connection; the tariff source does not publish a figure).
pub const DEFAULT_GRID_LIMIT_KW: f64 = 15.0;

/// PV rating, paired battery and grid connection of one household.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub pv_kwp: f64,
    pub battery: BatterySpec,
    pub grid_limit_kw: f64,
    /// Initial SOC as a fraction of the maximum SOC.
    pub initial_soc_fraction: f64,
}

impl SystemConfig {
    pub fn new(pv_kwp: f64, battery: BatterySpec, grid_limit_kw: f64) -> Result<Self> {
        let cfg = Self { pv_kwp, battery, grid_limit_kw, initial_soc_fraction: 0.5 };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds a config with the battery auto-paired to the PV size.
    pub fn for_pv_size(pv_kwp: f64) -> Result<Self> {
        Self::new(pv_kwp, BatterySpec::for_pv_size(pv_kwp)?, DEFAULT_GRID_LIMIT_KW)
    }

    pub fn validate(&self) -> Result<()> {
        if !(3.0..=10.0).contains(&self.pv_kwp) {
            return Err(CoreError::InvalidConfig(format!(
                "PV size {} kWp outside [3, 10]",
                self.pv_kwp
            )));
        }
        self.battery.validate()?;
        if !(self.grid_limit_kw > 0.0) {
            return Err(CoreError::InvalidConfig("grid limit must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.initial_soc_fraction) {
            return Err(CoreError::InvalidConfig("initial SOC fraction must be in [0, 1]".into()));
        }
        Ok(())
    }

    /// Initial stored energy in kWh (half the maximum SOC by default).
    pub fn initial_soc_kwh(&self) -> f64 {
        (self.initial_soc_fraction * self.battery.e_max()).max(self.battery.e_min())
    }
}
