//! Time-of-use retail tariff.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::series::SLOTS_PER_DAY;

/// Price period of a half-hour slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Period {
    Peak,
    Shoulder,
    OffPeak,
}

/// Time-of-use tariff: import rates by period, a flat feed-in tariff and a
/// daily fixed charge. The period map covers all 48 slots of the day.
#[derive(Debug, Clone, PartialEq)]
pub struct TouTariff {
    /// Daily supply charge in $/day.
    pub fixed_charge_per_day: f64,
    /// Import rates in c/kWh.
    pub peak_c: f64,
    pub shoulder_c: f64,
    pub offpeak_c: f64,
    /// Feed-in tariff in c/kWh.
    pub fit_c: f64,
    period_map: [Period; SLOTS_PER_DAY],
}

/// Builds the default period map: peak 7-9am and 5-8pm, shoulder 9am-5pm
/// and 8-10pm, off-peak 10pm-7am. Slot 0 starts at midnight.
fn default_period_map() -> [Period; SLOTS_PER_DAY] {
    let mut map = [Period::OffPeak; SLOTS_PER_DAY];
    for (i, p) in map.iter_mut().enumerate() {
        *p = if (14..18).contains(&i) || (34..40).contains(&i) {
            Period::Peak
        } else if (18..34).contains(&i) || (40..44).contains(&i) {
            Period::Shoulder
        } else {
            Period::OffPeak
        };
    }
    map
}

impl TouTariff {
    pub fn new(
        fixed_charge_per_day: f64,
        peak_c: f64,
        shoulder_c: f64,
        offpeak_c: f64,
        fit_c: f64,
        period_map: [Period; SLOTS_PER_DAY],
    ) -> Result<Self> {
        let t = Self { fixed_charge_per_day, peak_c, shoulder_c, offpeak_c, fit_c, period_map };
        t.validate()?;
        Ok(t)
    }

    /// The NSW residential ToU tariff used throughout: $1.551/day fixed,
    /// 38.588/37.147/21.340 c/kWh peak/shoulder/off-peak, 9.0 c/kWh feed-in.
    pub fn origin_energy_tou() -> Self {
        Self {
            fixed_charge_per_day: 1.551,
            peak_c: 38.588,
            shoulder_c: 37.147,
            offpeak_c: 21.340,
            fit_c: 9.0,
            period_map: default_period_map(),
        }
    }

    fn validate(&self) -> Result<()> {
        for v in [
            self.fixed_charge_per_day,
            self.peak_c,
            self.shoulder_c,
            self.offpeak_c,
            self.fit_c,
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(CoreError::InvalidTariff(format!("rate {v} must be >= 0")));
            }
        }
        if self.fit_c >= self.offpeak_c {
            return Err(CoreError::InvalidTariff(format!(
                "feed-in tariff {} must be below the off-peak rate {}",
                self.fit_c, self.offpeak_c
            )));
        }
        Ok(())
    }

    pub fn period(&self, slot: usize) -> Period {
        self.period_map[slot % SLOTS_PER_DAY]
    }

    /// Import rate in c/kWh for a slot of the day (or a flat year index).
    pub fn rate_c(&self, slot: usize) -> f64 {
        match self.period(slot) {
            Period::Peak => self.peak_c,
            Period::Shoulder => self.shoulder_c,
            Period::OffPeak => self.offpeak_c,
        }
    }

    pub fn is_offpeak(&self, slot: usize) -> bool {
        self.period(slot) == Period::OffPeak
    }

    /// First slot of the day that is peak or shoulder.
    pub fn first_high_price_slot(&self) -> Option<usize> {
        (0..SLOTS_PER_DAY).find(|&s| self.period(s) != Period::OffPeak)
    }

    /// Last slot of the day that is peak or shoulder.
    pub fn last_high_price_slot(&self) -> Option<usize> {
        (0..SLOTS_PER_DAY).rev().find(|&s| self.period(s) != Period::OffPeak)
    }

    /// Parses a tariff from TOML text with keys under `[tariff]`:
    /// `fixed_charge`, `peak`, `shoulder`, `offpeak`, `fit` and optional
    /// `[tariff.periods]` with `peak`/`shoulder` slot ranges (half-open
    /// `[start, end)` pairs); unlisted slots are off-peak.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Root {
            tariff: TariffSection,
        }
        #[derive(Deserialize)]
        struct TariffSection {
            fixed_charge: f64,
            peak: f64,
            shoulder: f64,
            offpeak: f64,
            fit: f64,
            periods: Option<PeriodsSection>,
        }
        #[derive(Deserialize)]
        struct PeriodsSection {
            #[serde(default)]
            peak: Vec<[usize; 2]>,
            #[serde(default)]
            shoulder: Vec<[usize; 2]>,
        }

        let root: Root =
            toml::from_str(text).map_err(|e| CoreError::Config(format!("tariff: {e}")))?;
        let t = root.tariff;
        let map = match t.periods {
            None => default_period_map(),
            Some(p) => {
                let mut map = [Period::OffPeak; SLOTS_PER_DAY];
                let mut seen = [false; SLOTS_PER_DAY];
                let fill = |ranges: &[[usize; 2]], period: Period,
                                map: &mut [Period; SLOTS_PER_DAY],
                                seen: &mut [bool; SLOTS_PER_DAY]|
                 -> Result<()> {
                    for r in ranges {
                        if r[1] > SLOTS_PER_DAY || r[0] >= r[1] {
                            return Err(CoreError::Config(format!(
                                "tariff period range [{}, {}) out of bounds",
                                r[0], r[1]
                            )));
                        }
                        for s in r[0]..r[1] {
                            if seen[s] {
                                return Err(CoreError::Config(format!(
                                    "tariff period ranges overlap at slot {s}"
                                )));
                            }
                            seen[s] = true;
                            map[s] = period;
                        }
                    }
                    Ok(())
                };
                fill(&p.peak, Period::Peak, &mut map, &mut seen)?;
                fill(&p.shoulder, Period::Shoulder, &mut map, &mut seen)?;
                map
            }
        };
        Self::new(t.fixed_charge, t.peak, t.shoulder, t.offpeak, t.fit, map)
    }
}

impl Default for TouTariff {
    fn default() -> Self {
        Self::origin_energy_tou()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rates_by_time_of_day() {
        let t = TouTariff::origin_energy_tou();
        // 17:30 is peak, 02:00 off-peak, 12:00 shoulder.
        assert_eq!(t.rate_c(35), 38.588);
        assert_eq!(t.rate_c(4), 21.340);
        assert_eq!(t.rate_c(24), 37.147);
    }

    #[test]
    fn period_map_partitions_day() {
        let t = TouTariff::origin_energy_tou();
        let mut peak = 0;
        let mut shoulder = 0;
        let mut off = 0;
        for s in 0..SLOTS_PER_DAY {
            match t.period(s) {
                Period::Peak => peak += 1,
                Period::Shoulder => shoulder += 1,
                Period::OffPeak => off += 1,
            }
        }
        // 7-9am + 5-8pm = 5h peak, 9am-5pm + 8-10pm = 10h shoulder, 9h off-peak
        assert_eq!((peak, shoulder, off), (10, 20, 18));
        assert_eq!(t.first_high_price_slot(), Some(14));
        assert_eq!(t.last_high_price_slot(), Some(43));
    }

    #[test]
    fn rate_total_over_year_index() {
        let t = TouTariff::origin_energy_tou();
        // Flat year index wraps by day.
        assert_eq!(t.rate_c(48 + 35), t.rate_c(35));
    }

    #[test]
    fn rejects_fit_above_offpeak() {
        let err =
            TouTariff::new(1.0, 30.0, 25.0, 10.0, 10.0, default_period_map()).unwrap_err();
        assert!(matches!(err, CoreError::InvalidTariff(_)));
    }

    #[test]
    fn loads_from_toml() {
        let text = r#"
            [tariff]
            fixed_charge = 1.551
            peak = 38.588
            shoulder = 37.147
            offpeak = 21.340
            fit = 9.0

            [tariff.periods]
            peak = [[14, 18], [34, 40]]
            shoulder = [[18, 34], [40, 44]]
        "#;
        let t = TouTariff::from_toml_str(text).unwrap();
        assert_eq!(t, TouTariff::origin_energy_tou());
    }

    #[test]
    fn toml_rejects_overlapping_periods() {
        let text = r#"
            [tariff]
            fixed_charge = 1.0
            peak = 30.0
            shoulder = 25.0
            offpeak = 15.0
            fit = 5.0

            [tariff.periods]
            peak = [[10, 20]]
            shoulder = [[15, 25]]
        "#;
        assert!(TouTariff::from_toml_str(text).is_err());
    }
}
