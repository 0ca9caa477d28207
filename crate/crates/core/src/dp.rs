//! Deterministic dynamic programming over a discretised SOC grid with the
//! nonlinear battery transition.
//!
//! One value table is computed per day (48 stages, zero terminal value)
//! and executed forward with the continuous transition; the terminal SOC
//! chains into the next day. Battery discharge only ever serves the
//! household load; surplus PV is exported directly, so stored energy has
//! no export value and idling is optimal on zero-demand days.

use crate::battery::{soc_step_nonlinear, BatterySpec, EfficiencyModel};
use crate::error::{CoreError, Result};
use crate::schedule::Schedule;
use crate::series::{HalfHourSeries, DT_HOURS, SLOTS_PER_DAY};
use crate::sysconfig::SystemConfig;
use crate::tariff::TouTariff;

/// Discretisation of the state and action spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpGrids {
    pub soc_levels: usize,
    pub action_levels: usize,
}

impl Default for DpGrids {
    fn default() -> Self {
        Self { soc_levels: 101, action_levels: 43 }
    }
}

impl DpGrids {
    pub fn new(soc_levels: usize, action_levels: usize) -> Result<Self> {
        if soc_levels < 2 {
            return Err(CoreError::InvalidConfig("need at least 2 SOC levels".into()));
        }
        if action_levels < 3 || action_levels % 2 == 0 {
            return Err(CoreError::InvalidConfig(
                "action grid must be odd and >= 3 so the zero action is included".into(),
            ));
        }
        Ok(Self { soc_levels, action_levels })
    }

    fn soc_grid(&self, spec: &BatterySpec) -> Vec<f64> {
        let n = self.soc_levels;
        (0..n)
            .map(|i| {
                spec.e_min() + (spec.e_max() - spec.e_min()) * i as f64 / (n - 1) as f64
            })
            .collect()
    }

    fn action_grid(&self, spec: &BatterySpec) -> Vec<f64> {
        let n = self.action_levels;
        let half = (n - 1) / 2;
        (0..n)
            .map(|i| spec.max_power_kw * (i as f64 - half as f64) / half as f64)
            .collect()
    }
}

/// Cost-to-go values and greedy policy over (stage, state).
#[derive(Debug, Clone)]
pub struct ValueTable {
    pub soc_grid: Vec<f64>,
    pub actions: Vec<f64>,
    /// `value[k][s]`: minimal cost in cents from stage `k` in state `s`;
    /// the terminal layer `value[K]` is zero.
    pub value: Vec<Vec<f64>>,
    /// `policy[k][s]`: index into `actions`.
    pub policy: Vec<Vec<usize>>,
}

impl ValueTable {
    fn interp(&self, layer: &[f64], e: f64) -> f64 {
        let grid = &self.soc_grid;
        let lo = grid[0];
        let hi = grid[grid.len() - 1];
        if e <= lo {
            return layer[0];
        }
        if e >= hi {
            return layer[grid.len() - 1];
        }
        let h = (hi - lo) / (grid.len() - 1) as f64;
        let pos = (e - lo) / h;
        let i = (pos.floor() as usize).min(grid.len() - 2);
        let t = pos - i as f64;
        layer[i] + t * (layer[i + 1] - layer[i])
    }

    fn nearest_state(&self, e: f64) -> usize {
        let grid = &self.soc_grid;
        let lo = grid[0];
        let hi = grid[grid.len() - 1];
        if e <= lo {
            return 0;
        }
        if e >= hi {
            return grid.len() - 1;
        }
        let h = (hi - lo) / (grid.len() - 1) as f64;
        (((e - lo) / h).round() as usize).min(grid.len() - 1)
    }
}

/// Inputs of one DP day.
pub struct DayInputs<'a> {
    pub demand: &'a [f64],
    pub pv: &'a [f64],
    /// Import rate per slot in c/kWh.
    pub rates_c: &'a [f64],
    pub fit_c: f64,
}

/// Applies the operating rules of one stage: discharge serves only the
/// household residual, charging respects grid headroom, the battery
/// transition clamps the rest. Returns (new SOC, delivered power, cost in
/// cents).
fn stage_transition(
    e: f64,
    action_kw: f64,
    demand: f64,
    pv: f64,
    rate_c: f64,
    fit_c: f64,
    cfg: &SystemConfig,
    eff: &EfficiencyModel,
) -> (f64, f64, f64) {
    let residual = demand - pv;
    let x = if action_kw < 0.0 {
        action_kw.max(-residual.max(0.0))
    } else {
        action_kw.min((cfg.grid_limit_kw - residual).max(0.0))
    };
    let (e_next, delivered) = soc_step_nonlinear(e, x, DT_HOURS, &cfg.battery, eff);
    let net = residual + delivered;
    let import = net.max(0.0);
    let export = (-net).max(0.0);
    let cost = DT_HOURS * (rate_c * import - fit_c * export);
    (e_next, delivered, cost)
}

/// Backward induction over one day: for every stage and state, evaluate
/// every action through the battery transition, interpolate the successor
/// value linearly on the SOC grid, and keep the argmin (ties prefer the
/// smaller |action|, then the lower index).
pub fn backward_induction(
    day: &DayInputs<'_>,
    cfg: &SystemConfig,
    eff: &EfficiencyModel,
    grids: &DpGrids,
) -> ValueTable {
    let k_stages = day.demand.len();
    let spec = &cfg.battery;
    let soc_grid = grids.soc_grid(spec);
    let actions = grids.action_grid(spec);
    let n_s = soc_grid.len();
    let mut table = ValueTable {
        soc_grid,
        actions,
        value: vec![vec![0.0; n_s]; k_stages + 1],
        policy: vec![vec![0; n_s]; k_stages],
    };
    for k in (0..k_stages).rev() {
        let next = table.value[k + 1].clone();
        for s in 0..n_s {
            let e = table.soc_grid[s];
            let mut best_cost = f64::INFINITY;
            let mut best_a = 0usize;
            for (a, &x) in table.actions.iter().enumerate() {
                let (e_next, _, cost) = stage_transition(
                    e,
                    x,
                    day.demand[k],
                    day.pv[k],
                    day.rates_c[k],
                    day.fit_c,
                    cfg,
                    eff,
                );
                let total = cost + table.interp(&next, e_next);
                let better = total < best_cost
                    || (total == best_cost
                        && x.abs() < table.actions[best_a].abs());
                if better {
                    best_cost = total;
                    best_a = a;
                }
            }
            table.value[k][s] = best_cost;
            table.policy[k][s] = best_a;
        }
    }
    table
}

/// Forward pass: applies the tabulated policy from the continuous state
/// (nearest-grid-point lookup) through the true nonlinear transition.
/// Returns the day schedule starting at `e0`.
pub fn simulate_policy(
    table: &ValueTable,
    day: &DayInputs<'_>,
    cfg: &SystemConfig,
    eff: &EfficiencyModel,
    e0_kwh: f64,
) -> Schedule {
    let k_stages = day.demand.len();
    let mut s = Schedule::zeros(k_stages, e0_kwh, DT_HOURS);
    for k in 0..k_stages {
        let e = s.soc[k];
        let a = table.policy[k][table.nearest_state(e)];
        let (e_next, delivered, _) = stage_transition(
            e,
            table.actions[a],
            day.demand[k],
            day.pv[k],
            day.rates_c[k],
            day.fit_c,
            cfg,
            eff,
        );
        if delivered >= 0.0 {
            s.charge[k] = delivered;
        } else {
            s.discharge[k] = -delivered;
        }
        let net = day.demand[k] - day.pv[k] + delivered;
        s.grid_import[k] = net.max(0.0);
        s.grid_export[k] = (-net).max(0.0);
        s.soc[k + 1] = e_next;
    }
    s
}

/// Runs the DP over a whole multi-day horizon, one value table per day,
/// chaining the SOC through the forward passes.
pub fn dp_schedule(
    demand: &HalfHourSeries,
    pv: &HalfHourSeries,
    tariff: &TouTariff,
    cfg: &SystemConfig,
    eff: &EfficiencyModel,
    grids: &DpGrids,
) -> Result<Schedule> {
    if demand.len() != pv.len() {
        return Err(CoreError::LengthMismatch {
            expected: demand.len(),
            got: pv.len(),
            what: "pv vs demand".into(),
        });
    }
    let rates: Vec<f64> = (0..SLOTS_PER_DAY).map(|s| tariff.rate_c(s)).collect();
    let mut year: Option<Schedule> = None;
    let mut e = cfg.initial_soc_kwh();
    for d in 0..demand.days() {
        let day = DayInputs {
            demand: demand.day_slice(d),
            pv: pv.day_slice(d),
            rates_c: &rates,
            fit_c: tariff.fit_c,
        };
        let table = backward_induction(&day, cfg, eff, grids);
        let day_sched = simulate_policy(&table, &day, cfg, eff, e);
        e = day_sched.soc[SLOTS_PER_DAY];
        match &mut year {
            None => year = Some(day_sched),
            Some(y) => y.extend(&day_sched),
        }
    }
    Ok(year.expect("at least one day"))
}
