//! Smart-meter CSV ingestion and synthetic cohort generation.
//!
//! The CSV schema is a long-format normalisation of half-hourly smart
//! meter exports: `customer_id,date,slot,demand_kw,pv_kw` with an ISO date
//! and slot 0-47 from midnight. Customers must cover exactly 365 complete
//! days; incomplete customers are rejected (not fatal), malformed rows are.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::pfa::profiles::{self, ProfileKind, ALL_PROFILES};
use crate::series::{HalfHourSeries, DAYS_PER_YEAR, SLOTS_PER_DAY};
use crate::sysconfig::SystemConfig;

/// One customer's year of data with the PV rating.
#[derive(Debug, Clone)]
pub struct CustomerRecord {
    pub id: String,
    pub pv_kwp: f64,
    pub demand: HalfHourSeries,
    pub pv: HalfHourSeries,
}

impl CustomerRecord {
    /// System configuration with the battery paired to the PV size.
    pub fn system_config(&self) -> Result<SystemConfig> {
        SystemConfig::for_pv_size(self.pv_kwp)
    }
}

/// Successful records plus per-customer rejections.
#[derive(Debug)]
pub struct LoadOutcome {
    pub records: Vec<CustomerRecord>,
    pub rejected: Vec<(String, String)>,
}

/// Loads a cohort CSV. Malformed rows abort with their line number;
/// customers with missing slots or days are rejected with a reason.
///
/// The PV rating is not part of the schema; it is inferred from the
/// observed maximum PV output (clear-sky peak ~0.97 of nameplate) and
/// clamped to the supported 3-10 kWp range.
pub fn load_cohort(path: &Path) -> Result<LoadOutcome> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CoreError::Data(format!("{}: {e}", path.display())))?;
    {
        let headers = reader
            .headers()
            .map_err(|e| CoreError::Data(format!("{}: {e}", path.display())))?;
        let expect = ["customer_id", "date", "slot", "demand_kw", "pv_kw"];
        if headers.iter().ne(expect) {
            return Err(CoreError::Data(format!(
                "unexpected header {headers:?}; expected {expect:?}"
            )));
        }
    }

    type DayMap = BTreeMap<NaiveDate, Vec<Option<(f64, f64)>>>;
    let mut per_customer: BTreeMap<String, DayMap> = BTreeMap::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 2; // header is line 1
        let row = row.map_err(|e| CoreError::Data(format!("line {line}: {e}")))?;
        if row.len() != 5 {
            return Err(CoreError::Data(format!("line {line}: expected 5 fields, got {}", row.len())));
        }
        let id = row[0].to_string();
        let date = NaiveDate::parse_from_str(&row[1], "%Y-%m-%d")
            .map_err(|e| CoreError::Data(format!("line {line}: bad date: {e}")))?;
        let slot: usize = row[2]
            .parse()
            .map_err(|e| CoreError::Data(format!("line {line}: bad slot: {e}")))?;
        if slot >= SLOTS_PER_DAY {
            return Err(CoreError::Data(format!("line {line}: slot {slot} out of range")));
        }
        let demand: f64 = row[3]
            .parse()
            .map_err(|e| CoreError::Data(format!("line {line}: bad demand: {e}")))?;
        let pv: f64 = row[4]
            .parse()
            .map_err(|e| CoreError::Data(format!("line {line}: bad pv: {e}")))?;
        if !demand.is_finite() || !pv.is_finite() || demand < 0.0 || pv < 0.0 {
            return Err(CoreError::Data(format!(
                "line {line}: negative or non-finite power"
            )));
        }
        let days = per_customer.entry(id).or_default();
        let slots = days.entry(date).or_insert_with(|| vec![None; SLOTS_PER_DAY]);
        if slots[slot].is_some() {
            return Err(CoreError::Data(format!("line {line}: duplicate (date, slot)")));
        }
        slots[slot] = Some((demand, pv));
    }

    let mut out = LoadOutcome { records: Vec::new(), rejected: Vec::new() };
    'customers: for (id, days) in per_customer {
        if days.len() != DAYS_PER_YEAR {
            out.rejected.push((
                id,
                format!("incomplete series: {} days, expected {DAYS_PER_YEAR}", days.len()),
            ));
            continue;
        }
        let mut demand = Vec::with_capacity(DAYS_PER_YEAR * SLOTS_PER_DAY);
        let mut pv = Vec::with_capacity(DAYS_PER_YEAR * SLOTS_PER_DAY);
        for (date, slots) in &days {
            for (slot, entry) in slots.iter().enumerate() {
                match entry {
                    Some((d, p)) => {
                        demand.push(*d);
                        pv.push(*p);
                    }
                    None => {
                        out.rejected.push((
                            id,
                            format!("incomplete series: missing slot {slot} on {date}"),
                        ));
                        continue 'customers;
                    }
                }
            }
        }
        let max_pv = pv.iter().fold(0.0_f64, |a, b| a.max(*b));
        let pv_kwp = (max_pv / 0.97).round().clamp(3.0, 10.0);
        out.records.push(CustomerRecord {
            id,
            pv_kwp,
            demand: HalfHourSeries::full_year(demand)?,
            pv: HalfHourSeries::full_year(pv)?,
        });
    }
    Ok(out)
}

/// Writes a cohort in the long CSV schema, days numbered from 2010-07-01.
pub fn write_cohort_csv(path: &Path, records: &[CustomerRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CoreError::Data(format!("{}: {e}", path.display())))?;
    w.write_record(["customer_id", "date", "slot", "demand_kw", "pv_kw"])
        .map_err(|e| CoreError::Data(e.to_string()))?;
    let start = NaiveDate::from_ymd_opt(2010, 7, 1).expect("static date");
    for r in records {
        for day in 0..r.demand.days() {
            let date = start + chrono::Days::new(day as u64);
            for slot in 0..SLOTS_PER_DAY {
                w.write_record([
                    r.id.as_str(),
                    &date.format("%Y-%m-%d").to_string(),
                    &slot.to_string(),
                    &format!("{:.6}", r.demand.get(day, slot)),
                    &format!("{:.6}", r.pv.get(day, slot)),
                ])
                .map_err(|e| CoreError::Data(e.to_string()))?;
            }
        }
    }
    w.flush().map_err(|e| CoreError::Data(e.to_string()))?;
    Ok(())
}

/// Parameters of the synthetic cohort generator.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub customers: usize,
    pub seed: u64,
    /// Share of each generic profile, in [`ALL_PROFILES`] order.
    pub profile_mix: [f64; 5],
    /// Range of customer base daily demand energy in kWh.
    pub daily_kwh_range: (f64, f64),
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            customers: 10,
            seed: 1,
            profile_mix: [0.2; 5],
            daily_kwh_range: (7.5, 12.0),
        }
    }
}

/// Deterministic profile assignment honouring the mix exactly: quotas are
/// `floor(n * share)` with remainders going to the largest fractional
/// parts (ties in profile order).
fn assign_profiles(n: usize, mix: &[f64; 5]) -> Vec<ProfileKind> {
    let total: f64 = mix.iter().sum();
    let mut quotas: Vec<(usize, f64, usize)> = mix
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let exact = n as f64 * m / total;
            (exact.floor() as usize, exact - exact.floor(), i)
        })
        .collect();
    let assigned: usize = quotas.iter().map(|q| q.0).sum();
    let mut order: Vec<usize> = (0..5).collect();
    order.sort_by(|&a, &b| quotas[b].1.partial_cmp(&quotas[a].1).unwrap().then(a.cmp(&b)));
    for &i in order.iter().take(n - assigned) {
        quotas[i].0 += 1;
    }
    let mut out = Vec::with_capacity(n);
    for (count, _, i) in quotas {
        out.extend(std::iter::repeat(ALL_PROFILES[i]).take(count));
    }
    out
}

/// PV sizes follow the cohort statistics of the source dataset: mostly
/// 4-5 kWp with tails at 3 and 7-10.
fn sample_pv_kwp(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen();
    if u < 0.096 {
        3.0
    } else if u < 0.096 + 0.2885 {
        4.0
    } else if u < 0.096 + 0.2885 + 0.385 {
        5.0
    } else if u < 0.096 + 0.2885 + 0.385 + 0.0769 {
        6.0
    } else {
        7.0 + (rng.gen_range(0u8..4)) as f64
    }
}

/// Seasonal factor peaking in late December (day 172 from a July 1 start).
fn summer_phase(day: usize) -> f64 {
    (2.0 * std::f64::consts::PI * (day as f64 - 172.0) / 365.0).cos()
}

/// Generates a deterministic synthetic cohort: demand from the generic
/// profile shapes with seasonal/day/slot noise, PV from a clear-sky
/// half-sine-cubed with seasonal day length and daily weather factors.
pub fn synth_cohort(spec: &SynthSpec) -> Result<Vec<CustomerRecord>> {
    if spec.customers == 0 {
        return Err(CoreError::InvalidConfig("need at least one customer".into()));
    }
    let kinds = assign_profiles(spec.customers, &spec.profile_mix);
    let mut out = Vec::with_capacity(spec.customers);
    for (c, kind) in kinds.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(c as u64);
        let shape = profiles::shape(*kind);
        let base_kwh = rng.gen_range(spec.daily_kwh_range.0..=spec.daily_kwh_range.1);
        let pv_kwp = sample_pv_kwp(&mut rng);

        let mut demand = Vec::with_capacity(DAYS_PER_YEAR * SLOTS_PER_DAY);
        let mut pv = Vec::with_capacity(DAYS_PER_YEAR * SLOTS_PER_DAY);
        for day in 0..DAYS_PER_YEAR {
            let season = summer_phase(day);
            // Demand is higher in winter (season = -1).
            let day_energy = base_kwh * (1.0 - 0.12 * season) * rng.gen_range(0.85..1.15);
            // Weather: clear / partly cloudy / overcast days.
            let wu: f64 = rng.gen();
            let weather = if wu < 0.55 {
                rng.gen_range(0.85..1.0)
            } else if wu < 0.80 {
                rng.gen_range(0.45..0.85)
            } else {
                rng.gen_range(0.08..0.45)
            };
            let halfwidth_h = 6.1 + 1.1 * season;
            let seasonal_amp = (1.0 + 0.35 * season) / 1.35;
            for slot in 0..SLOTS_PER_DAY {
                let d = day_energy * shape[slot] * rng.gen_range(0.75..1.25);
                demand.push(d.max(0.02));
                let h = (slot as f64 + 0.5) * 0.5; // hour of day at slot centre
                let x = (h - (12.0 - halfwidth_h)) / (2.0 * halfwidth_h);
                let p = if x > 0.0 && x < 1.0 {
                    let s = (std::f64::consts::PI * x).sin();
                    pv_kwp * 0.97 * seasonal_amp * weather * s * s * s * rng.gen_range(0.94..1.0)
                } else {
                    0.0
                };
                pv.push(p);
            }
        }
        out.push(CustomerRecord {
            id: format!("synth{c:03}"),
            pv_kwp,
            demand: HalfHourSeries::full_year(demand)?,
            pv: HalfHourSeries::full_year(pv)?,
        });
    }
    Ok(out)
}
