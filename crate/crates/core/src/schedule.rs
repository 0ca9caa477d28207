//! Per-slot decision record produced by every strategy.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::series::HalfHourSeries;
use crate::sysconfig::SystemConfig;

/// Power balance tolerance in kW.
pub const BALANCE_TOL_KW: f64 = 1e-6;

/// A year (or day) of scheduling decisions: grid import/export and battery
/// charge/discharge power per slot, plus the SOC trajectory.
///
/// `soc` has one more entry than the power vectors: `soc[t]` is the stored
/// energy entering slot `t`, `soc[n]` the terminal value. The binary
/// charge/import direction flags of the optimisation models are implied by
/// the powers (see [`Schedule::charging_flag`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub dt_hours: f64,
    pub grid_import: Vec<f64>,
    pub grid_export: Vec<f64>,
    pub charge: Vec<f64>,
    pub discharge: Vec<f64>,
    pub soc: Vec<f64>,
}

impl Schedule {
    pub fn zeros(n_slots: usize, initial_soc_kwh: f64, dt_hours: f64) -> Self {
        Self {
            dt_hours,
            grid_import: vec![0.0; n_slots],
            grid_export: vec![0.0; n_slots],
            charge: vec![0.0; n_slots],
            discharge: vec![0.0; n_slots],
            soc: vec![initial_soc_kwh; n_slots + 1],
        }
    }

    pub fn n_slots(&self) -> usize {
        self.grid_import.len()
    }

    /// Signed battery power, positive when charging.
    pub fn net_battery(&self, t: usize) -> f64 {
        self.charge[t] - self.discharge[t]
    }

    /// Battery charging status: 1 when charging, 0 otherwise.
    pub fn charging_flag(&self, t: usize) -> bool {
        self.charge[t] > 0.0
    }

    /// Grid flow direction: 1 when importing, 0 otherwise.
    pub fn import_flag(&self, t: usize) -> bool {
        self.grid_import[t] > 0.0
    }

    /// AC-side battery throughput |charge| + |discharge| in kWh.
    pub fn battery_throughput_kwh(&self) -> f64 {
        (0..self.n_slots())
            .map(|t| (self.charge[t] + self.discharge[t]) * self.dt_hours)
            .sum()
    }

    /// Appends another schedule (e.g. the next day). The other schedule's
    /// initial SOC must continue this one's terminal SOC.
    pub fn extend(&mut self, other: &Schedule) {
        debug_assert!((self.soc.last().unwrap() - other.soc[0]).abs() < 1e-9);
        self.grid_import.extend_from_slice(&other.grid_import);
        self.grid_export.extend_from_slice(&other.grid_export);
        self.charge.extend_from_slice(&other.charge);
        self.discharge.extend_from_slice(&other.discharge);
        self.soc.extend_from_slice(&other.soc[1..]);
    }
}

/// Which schedule invariant a slot broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    NegativePower,
    NonFinite,
    SimultaneousBatteryFlow,
    SimultaneousGridFlow,
    PowerBalance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub slot: usize,
    pub kind: ViolationKind,
    pub detail: String,
}

/// Checks a schedule against demand and PV series: non-negative finite
/// powers, no simultaneous charge/discharge or import/export, and per-slot
/// power balance within [`BALANCE_TOL_KW`].
///
/// Returns the (possibly empty) violation list, or an error when the
/// lengths do not line up.
pub fn validate_schedule(
    s: &Schedule,
    demand: &HalfHourSeries,
    pv: &HalfHourSeries,
) -> Result<Vec<Violation>> {
    let n = s.n_slots();
    if demand.len() != n || pv.len() != n {
        return Err(CoreError::LengthMismatch {
            expected: n,
            got: if demand.len() != n { demand.len() } else { pv.len() },
            what: "schedule vs demand/pv series".into(),
        });
    }
    if s.soc.len() != n + 1 {
        return Err(CoreError::LengthMismatch {
            expected: n + 1,
            got: s.soc.len(),
            what: "schedule SOC trajectory".into(),
        });
    }
    let mut out = Vec::new();
    for t in 0..n {
        let (gi, ge, ch, di) = (s.grid_import[t], s.grid_export[t], s.charge[t], s.discharge[t]);
        for v in [gi, ge, ch, di] {
            if !v.is_finite() {
                out.push(Violation {
                    slot: t,
                    kind: ViolationKind::NonFinite,
                    detail: format!("non-finite power {v}"),
                });
            } else if v < 0.0 {
                out.push(Violation {
                    slot: t,
                    kind: ViolationKind::NegativePower,
                    detail: format!("negative power {v}"),
                });
            }
        }
        if ch > 1e-9 && di > 1e-9 {
            out.push(Violation {
                slot: t,
                kind: ViolationKind::SimultaneousBatteryFlow,
                detail: format!("charge {ch} kW and discharge {di} kW"),
            });
        }
        if gi > 1e-9 && ge > 1e-9 {
            out.push(Violation {
                slot: t,
                kind: ViolationKind::SimultaneousGridFlow,
                detail: format!("import {gi} kW and export {ge} kW"),
            });
        }
        let residual = gi - ge + pv.at(t) + di - ch - demand.at(t);
        if residual.abs() > BALANCE_TOL_KW {
            out.push(Violation {
                slot: t,
                kind: ViolationKind::PowerBalance,
                detail: format!("imbalance {residual:+.3e} kW"),
            });
        }
    }
    Ok(out)
}

/// Executes a planned battery profile against the actual demand and PV:
/// battery powers and SOC are kept, grid flows are recomputed so the power
/// balance holds against the realised series.
///
/// Under a perfect forecast this is the identity.
pub fn realize_with_actuals(
    plan: &Schedule,
    demand: &HalfHourSeries,
    pv: &HalfHourSeries,
    _cfg: &SystemConfig,
) -> Schedule {
    let n = plan.n_slots();
    debug_assert_eq!(demand.len(), n);
    let mut out = plan.clone();
    for t in 0..n {
        let net = demand.at(t) - pv.at(t) + plan.charge[t] - plan.discharge[t];
        out.grid_import[t] = net.max(0.0);
        out.grid_export[t] = (-net).max(0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::HalfHourSeries;

    fn flat(v: f64) -> HalfHourSeries {
        HalfHourSeries::new(vec![v; 48], 1).unwrap()
    }

    #[test]
    fn all_zero_schedule_is_valid() {
        let s = Schedule::zeros(48, 1.0, 0.5);
        let v = validate_schedule(&s, &flat(0.0), &flat(0.0)).unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn simultaneous_grid_flow_is_one_violation() {
        let mut s = Schedule::zeros(48, 1.0, 0.5);
        s.grid_import[5] = 1.0;
        s.grid_export[5] = 1.0;
        let v = validate_schedule(&s, &flat(0.0), &flat(0.0)).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::SimultaneousGridFlow);
        assert_eq!(v[0].slot, 5);
    }

    #[test]
    fn imbalance_is_flagged() {
        let mut s = Schedule::zeros(48, 1.0, 0.5);
        s.grid_import[0] = 0.5; // demand is zero, so this cannot balance
        let v = validate_schedule(&s, &flat(0.0), &flat(0.0)).unwrap();
        assert!(v.iter().any(|v| v.kind == ViolationKind::PowerBalance && v.slot == 0));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let s = Schedule::zeros(47, 1.0, 0.5);
        assert!(validate_schedule(&s, &flat(0.0), &flat(0.0)).is_err());
    }

    #[test]
    fn realize_balances_against_actuals() {
        let mut plan = Schedule::zeros(48, 1.0, 0.5);
        plan.charge[10] = 1.5;
        let demand = flat(1.0);
        let pv = flat(2.0);
        let cfg = crate::sysconfig::SystemConfig::for_pv_size(4.0).unwrap();
        let out = realize_with_actuals(&plan, &demand, &pv, &cfg);
        let v = validate_schedule(&out, &demand, &pv).unwrap();
        assert!(v.is_empty());
        // slot 10: net = 1 - 2 + 1.5 = 0.5 import; elsewhere 1 kW export
        assert!((out.grid_import[10] - 0.5).abs() < 1e-12);
        assert!((out.grid_export[0] - 1.0).abs() < 1e-12);
    }
}
