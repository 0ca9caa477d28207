//! Half-hourly time series covering a whole year.

use crate::error::{CoreError, Result};

/// Number of half-hour slots in a day.
pub const SLOTS_PER_DAY: usize = 48;
/// Slot duration in hours.
pub const DT_HOURS: f64 = 0.5;
/// Days per simulated year (leap days are ignored).
pub const DAYS_PER_YEAR: usize = 365;

/// One year of half-hourly kW values (demand or PV), indexed `(day, slot)`.
///
/// Values are power in kW averaged over the slot; multiply by
/// [`DT_HOURS`] for energy in kWh.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfHourSeries {
    values: Vec<f64>,
    days: usize,
}

impl HalfHourSeries {
    /// Builds a series from `days * SLOTS_PER_DAY` kW values.
    ///
    /// All values must be finite and non-negative.
    pub fn new(values: Vec<f64>, days: usize) -> Result<Self> {
        if values.len() != days * SLOTS_PER_DAY {
            return Err(CoreError::LengthMismatch {
                expected: days * SLOTS_PER_DAY,
                got: values.len(),
                what: "half-hour series".into(),
            });
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(CoreError::InvalidSeries(format!(
                "value {v} at flat index {i} is negative or non-finite"
            )));
        }
        Ok(Self { values, days })
    }

    /// Full-year constructor (365 days).
    pub fn full_year(values: Vec<f64>) -> Result<Self> {
        Self::new(values, DAYS_PER_YEAR)
    }

    pub fn days(&self) -> usize {
        self.days
    }

    /// Total number of slots.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// kW at `(day, slot)`; `day` and `slot` are zero-based.
    pub fn get(&self, day: usize, slot: usize) -> f64 {
        debug_assert!(slot < SLOTS_PER_DAY);
        self.values[day * SLOTS_PER_DAY + slot]
    }

    /// kW at a flat slot index `t` in `0..len()`.
    pub fn at(&self, t: usize) -> f64 {
        self.values[t]
    }

    /// The 48 values of one day.
    pub fn day_slice(&self, day: usize) -> &[f64] {
        &self.values[day * SLOTS_PER_DAY..(day + 1) * SLOTS_PER_DAY]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Energy over one day in kWh.
    pub fn daily_energy_kwh(&self, day: usize) -> f64 {
        self.day_slice(day).iter().sum::<f64>() * DT_HOURS
    }

    /// Energy over the whole series in kWh.
    pub fn total_energy_kwh(&self) -> f64 {
        self.values.iter().sum::<f64>() * DT_HOURS
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length() {
        let err = HalfHourSeries::new(vec![0.0; 47], 1).unwrap_err();
        assert!(matches!(err, CoreError::LengthMismatch { .. }));
    }

    #[test]
    fn rejects_negative_and_non_finite() {
        let mut v = vec![0.0; 48];
        v[3] = -0.1;
        assert!(HalfHourSeries::new(v, 1).is_err());
        let mut v = vec![0.0; 48];
        v[7] = f64::NAN;
        assert!(HalfHourSeries::new(v, 1).is_err());
    }

    #[test]
    fn indexing_and_energy() {
        let mut v = vec![0.0; 96];
        v[48 + 10] = 2.0;
        let s = HalfHourSeries::new(v, 2).unwrap();
        assert_eq!(s.get(1, 10), 2.0);
        assert_eq!(s.at(58), 2.0);
        assert_eq!(s.daily_energy_kwh(0), 0.0);
        assert_eq!(s.daily_energy_kwh(1), 1.0);
        assert_eq!(s.total_energy_kwh(), 1.0);
    }
}
