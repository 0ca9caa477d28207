//! Rule-based scheduling strategies: self-consumption maximisation (SCM),
//! time-of-use arbitrage (ToUA), and the SCM+ToUA hybrid.

use crate::battery::soc_step_linear;
use crate::error::{CoreError, Result};
use crate::schedule::Schedule;
use crate::series::{HalfHourSeries, DT_HOURS, SLOTS_PER_DAY};
use crate::sysconfig::SystemConfig;
use crate::tariff::TouTariff;

/// SOC threshold below which the battery counts as empty.
const EMPTY_TOL_KWH: f64 = 1e-6;

/// ToUA behaviour: pre-charge the battery from the grid during cheap
/// off-peak slots up to a target SOC, and keep that reserve by idling the
/// battery in off-peak slots whenever discharging would breach it.
#[derive(Debug, Clone, PartialEq)]
pub struct TouaPolicy {
    /// Reserve target as a fraction of the maximum SOC.
    pub target_fraction: f64,
    offpeak: [bool; SLOTS_PER_DAY],
    precharge_window: [bool; SLOTS_PER_DAY],
}

impl TouaPolicy {
    /// Builds a policy whose pre-charge window is every off-peak slot of
    /// the given tariff.
    pub fn for_tariff(tariff: &TouTariff, target_fraction: f64) -> Result<Self> {
        let mut offpeak = [false; SLOTS_PER_DAY];
        for (s, o) in offpeak.iter_mut().enumerate() {
            *o = tariff.is_offpeak(s);
        }
        Self::with_window(target_fraction, offpeak, offpeak)
    }

    /// Restricts pre-charging to a subset of the off-peak slots.
    pub fn with_window(
        target_fraction: f64,
        offpeak: [bool; SLOTS_PER_DAY],
        precharge_window: [bool; SLOTS_PER_DAY],
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&target_fraction) {
            return Err(CoreError::InvalidConfig(format!(
                "ToUA target fraction {target_fraction} must be in [0, 1]"
            )));
        }
        if precharge_window.iter().zip(offpeak.iter()).any(|(w, o)| *w && !*o) {
            return Err(CoreError::InvalidConfig(
                "ToUA pre-charge window must be a subset of the off-peak slots".into(),
            ));
        }
        Ok(Self { target_fraction, offpeak, precharge_window })
    }

    pub fn is_offpeak(&self, slot: usize) -> bool {
        self.offpeak[slot % SLOTS_PER_DAY]
    }

    fn in_window(&self, slot: usize) -> bool {
        self.precharge_window[slot % SLOTS_PER_DAY]
    }
}

impl Default for TouaPolicy {
    fn default() -> Self {
        Self::for_tariff(&TouTariff::origin_energy_tou(), 0.30).unwrap()
    }
}

/// One SCM slot: PV meets demand first, surplus charges the battery up to
/// the rate/headroom limit and the remainder is exported; deficits are
/// covered from the battery first and the remainder imported.
fn scm_slot(s: &mut Schedule, t: usize, demand: f64, pv: f64, cfg: &SystemConfig) {
    let spec = &cfg.battery;
    let eta = spec.one_way_eff;
    let e = s.soc[t];
    let res = pv - demand;
    if res > 0.0 {
        let headroom = spec.e_max() - e;
        if headroom > 0.0 {
            let p_chg = spec.max_power_kw.min(res.min(headroom / (eta * DT_HOURS)));
            s.charge[t] = p_chg;
            s.grid_export[t] = res - p_chg;
        } else {
            s.grid_export[t] = res;
        }
    } else if res < 0.0 {
        let avail = e - spec.e_min();
        if avail < EMPTY_TOL_KWH {
            s.grid_import[t] = -res;
        } else {
            let p_dis = spec.max_power_kw.min((-res).min(avail * eta / DT_HOURS));
            s.discharge[t] = p_dis;
            s.grid_import[t] = -res - p_dis;
        }
    }
    s.soc[t + 1] = soc_step_linear(e, s.charge[t], s.discharge[t], DT_HOURS, spec)
        .expect("scm never sets both battery flows");
}

/// One ToUA slot. Off-peak below the reserve target: grid-charge at the
/// maximum feasible rate. Off-peak otherwise: SCM, but the battery idles
/// instead of discharging below the target. High-price slots: plain SCM.
fn toua_slot(
    s: &mut Schedule,
    t: usize,
    demand: f64,
    pv: f64,
    cfg: &SystemConfig,
    policy: &TouaPolicy,
) {
    let spec = &cfg.battery;
    let eta = spec.one_way_eff;
    let e = s.soc[t];
    let target_kwh = (policy.target_fraction * spec.e_max()).max(spec.e_min());
    if policy.in_window(t) && e < target_kwh - 1e-12 {
        let deficit_rate = (target_kwh - e) / (eta * DT_HOURS);
        let grid_room = (cfg.grid_limit_kw - demand + pv).max(0.0);
        let p_chg = spec.max_power_kw.min(deficit_rate).min(grid_room);
        s.charge[t] = p_chg;
        let net = demand - pv + p_chg;
        s.grid_import[t] = net.max(0.0);
        s.grid_export[t] = (-net).max(0.0);
        s.soc[t + 1] = soc_step_linear(e, p_chg, 0.0, DT_HOURS, spec).expect("charge only");
        return;
    }
    scm_slot(s, t, demand, pv, cfg);
    if policy.is_offpeak(t) && s.discharge[t] > 0.0 && s.soc[t + 1] < target_kwh - 1e-12 {
        // Reserve hold: suppress the discharge entirely and import instead.
        s.grid_import[t] += s.discharge[t];
        s.discharge[t] = 0.0;
        s.soc[t + 1] = e;
    }
}

fn run_slots(
    demand: &HalfHourSeries,
    pv: &HalfHourSeries,
    cfg: &SystemConfig,
    mut slot_fn: impl FnMut(&mut Schedule, usize, f64, f64),
) -> Result<Schedule> {
    if demand.len() != pv.len() {
        return Err(CoreError::LengthMismatch {
            expected: demand.len(),
            got: pv.len(),
            what: "demand vs pv".into(),
        });
    }
    let mut s = Schedule::zeros(demand.len(), cfg.initial_soc_kwh(), DT_HOURS);
    for t in 0..demand.len() {
        slot_fn(&mut s, t, demand.at(t), pv.at(t));
    }
    Ok(s)
}

/// Self-consumption maximisation over aligned demand/PV series.
pub fn scm_schedule(
    demand: &HalfHourSeries,
    pv: &HalfHourSeries,
    cfg: &SystemConfig,
) -> Result<Schedule> {
    run_slots(demand, pv, cfg, |s, t, d, p| scm_slot(s, t, d, p, cfg))
}

/// Time-of-use arbitrage over aligned demand/PV series.
pub fn toua_schedule(
    demand: &HalfHourSeries,
    pv: &HalfHourSeries,
    cfg: &SystemConfig,
    policy: &TouaPolicy,
) -> Result<Schedule> {
    run_slots(demand, pv, cfg, |s, t, d, p| toua_slot(s, t, d, p, cfg, policy))
}

/// Returns true when the forecast daily PV energy is below
/// `threshold * forecast daily demand energy` (the day is "low PV").
pub fn low_pv_day(
    demand_fc: &HalfHourSeries,
    pv_fc: &HalfHourSeries,
    day: usize,
    threshold: f64,
) -> bool {
    pv_fc.daily_energy_kwh(day) < threshold * demand_fc.daily_energy_kwh(day)
}

/// SCM with ToUA applied on forecast low-PV days.
///
/// Per day, if the forecast PV energy falls below `low_pv_threshold` times
/// the forecast demand energy, the day runs under ToUA, otherwise under
/// SCM. SOC carries across days.
pub fn scm_toua_schedule(
    demand: &HalfHourSeries,
    pv: &HalfHourSeries,
    demand_fc: &HalfHourSeries,
    pv_fc: &HalfHourSeries,
    cfg: &SystemConfig,
    policy: &TouaPolicy,
    low_pv_threshold: f64,
) -> Result<Schedule> {
    if demand_fc.len() != demand.len() || pv_fc.len() != demand.len() {
        return Err(CoreError::LengthMismatch {
            expected: demand.len(),
            got: demand_fc.len().min(pv_fc.len()),
            what: "forecast series".into(),
        });
    }
    run_slots(demand, pv, cfg, |s, t, d, p| {
        let day = t / SLOTS_PER_DAY;
        if low_pv_day(demand_fc, pv_fc, day, low_pv_threshold) {
            toua_slot(s, t, d, p, cfg, policy);
        } else {
            scm_slot(s, t, d, p, cfg);
        }
    })
}
