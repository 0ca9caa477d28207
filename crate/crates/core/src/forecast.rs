//! Perfect and persistence forecasts of demand and PV.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::series::HalfHourSeries;

/// Forecast quality used by a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForecastMode {
    /// The actual series serves as its own forecast.
    Perfect,
    /// Demand repeats the week before; PV is the actual with up to 10%
    /// uniform noise per slot, deterministic for a given seed.
    Persistence,
}

impl ForecastMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "perfect" => Some(Self::Perfect),
            "persistence" => Some(Self::Persistence),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Perfect => "perfect",
            Self::Persistence => "persistence",
        }
    }
}

/// Demand persistence forecast for one day: the profile a week before at
/// the same slots. Days in the first week have no prior week and fall back
/// to the actual day (perfect bootstrap).
pub fn forecast_demand_day(history: &HalfHourSeries, day: usize) -> Vec<f64> {
    let src = if day >= 7 { day - 7 } else { day };
    history.day_slice(src).to_vec()
}

/// PV persistence forecast for one day: actual plus per-slot uniform noise
/// within +/-10% of the actual value, clamped at zero. Deterministic per
/// `(seed, day)`.
pub fn forecast_pv_day(actual: &HalfHourSeries, day: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(day as u64);
    actual
        .day_slice(day)
        .iter()
        .map(|&p| {
            if p <= 0.0 {
                0.0
            } else {
                let xi = rng.gen_range(-0.1 * p..=0.1 * p);
                (p + xi).max(0.0)
            }
        })
        .collect()
}

/// Whole-year demand persistence forecast.
pub fn forecast_demand_year(history: &HalfHourSeries) -> Result<HalfHourSeries> {
    let mut values = Vec::with_capacity(history.len());
    for day in 0..history.days() {
        values.extend(forecast_demand_day(history, day));
    }
    HalfHourSeries::new(values, history.days())
}

/// Whole-year PV persistence forecast.
pub fn forecast_pv_year(actual: &HalfHourSeries, seed: u64) -> Result<HalfHourSeries> {
    let mut values = Vec::with_capacity(actual.len());
    for day in 0..actual.days() {
        values.extend(forecast_pv_day(actual, day, seed));
    }
    HalfHourSeries::new(values, actual.days())
}

/// Builds the (demand, pv) forecast pair for a mode. Perfect mode clones
/// the actual series.
pub fn forecast_year(
    mode: ForecastMode,
    demand: &HalfHourSeries,
    pv: &HalfHourSeries,
    seed: u64,
) -> Result<(HalfHourSeries, HalfHourSeries)> {
    match mode {
        ForecastMode::Perfect => Ok((demand.clone(), pv.clone())),
        ForecastMode::Persistence => {
            Ok((forecast_demand_year(demand)?, forecast_pv_year(pv, seed)?))
        }
    }
}
