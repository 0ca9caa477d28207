//! Cost-minimising scheduler: a linear program over grid and battery
//! flows with complementarity (charge xor discharge, import xor export)
//! enforced by branch and bound, wrapped in a two-day rolling horizon.
//!
//! The classic binary indicator variables are eliminated analytically:
//! with indicators relaxed to `[0, 1]`, the linking constraints collapse
//! to `charge + discharge <= p_max` (same for grid), and branching fixes
//! one side of a violated complementarity to zero. Money is handled in
//! cents throughout the objective.

mod branch;
pub mod simplex;

pub use branch::{solve_milp, MilpSolution};

use crate::error::{CoreError, Result};
use crate::schedule::Schedule;
use crate::series::{HalfHourSeries, DT_HOURS, SLOTS_PER_DAY};
use crate::sysconfig::SystemConfig;
use crate::tariff::TouTariff;
use simplex::{LpProblem, LpSolution, LpStatus};

/// Default relative optimality gap of the branch and bound.
pub const DEFAULT_GAP_TOL: f64 = 1e-6;

/// One optimisation instance over an arbitrary horizon of half-hour slots.
#[derive(Debug, Clone)]
pub struct MilpInstance {
    pub dt_hours: f64,
    pub demand: Vec<f64>,
    pub pv: Vec<f64>,
    /// Import price per slot in c/kWh.
    pub rate_c: Vec<f64>,
    /// Feed-in tariff in c/kWh.
    pub fit_c: f64,
    pub cfg: SystemConfig,
    pub e_init_kwh: f64,
}

impl MilpInstance {
    pub fn horizon(&self) -> usize {
        self.demand.len()
    }

    /// Writes the instance in LP text format for cross-checking against
    /// external solvers.
    pub fn to_lp_text(&self) -> String {
        use std::fmt::Write;
        let h = self.horizon();
        let spec = &self.cfg.battery;
        let eta = spec.one_way_eff;
        let mut s = String::new();
        let _ = writeln!(s, "\\ horizon {h} slots, e_init {}", self.e_init_kwh);
        let _ = writeln!(s, "Minimize");
        let mut terms = Vec::new();
        for t in 0..h {
            terms.push(format!("{:+} gi{t} {:+} ge{t}", self.dt_hours * self.rate_c[t], -self.dt_hours * self.fit_c));
        }
        let _ = writeln!(s, " obj: {}", terms.join(" "));
        let _ = writeln!(s, "Subject To");
        for t in 0..h {
            let _ = writeln!(
                s,
                " bal{t}: gi{t} - ge{t} - ch{t} + di{t} = {}",
                self.demand[t] - self.pv[t]
            );
            let prev = if t == 0 { format!("{}", self.e_init_kwh) } else { format!("e{}", t - 1) };
            let _ = writeln!(
                s,
                " soc{t}: e{t} - {prev} - {} ch{t} + {} di{t} = 0",
                self.dt_hours * eta,
                self.dt_hours / eta
            );
            let _ = writeln!(s, " bcap{t}: ch{t} + di{t} <= {}", spec.max_power_kw);
            let _ = writeln!(s, " gcap{t}: gi{t} + ge{t} <= {}", self.cfg.grid_limit_kw);
        }
        let _ = writeln!(s, "Bounds");
        for t in 0..h {
            let _ = writeln!(s, " 0 <= gi{t} <= {}", self.cfg.grid_limit_kw);
            let _ = writeln!(s, " 0 <= ge{t} <= {}", self.cfg.grid_limit_kw);
            let _ = writeln!(s, " 0 <= ch{t} <= {}", spec.max_power_kw);
            let _ = writeln!(s, " 0 <= di{t} <= {}", spec.max_power_kw);
            let _ = writeln!(s, " {} <= e{t} <= {}", spec.e_min(), spec.e_max());
        }
        let _ = writeln!(s, "End");
        s
    }
}

/// Column indices of one slot in the LP.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SlotCols {
    pub gi: usize,
    pub ge: usize,
    pub ch: usize,
    pub di: usize,
    pub e: usize,
}

pub(crate) fn slot_cols(t: usize) -> SlotCols {
    SlotCols { gi: 5 * t, ge: 5 * t + 1, ch: 5 * t + 2, di: 5 * t + 3, e: 5 * t + 4 }
}

/// Builds an instance from aligned forecast slices. The rate for slot `t`
/// is the tariff rate of `t % 48`, so slices must start at midnight.
pub fn build_instance(
    demand_fc: &[f64],
    pv_fc: &[f64],
    tariff: &TouTariff,
    cfg: &SystemConfig,
    e_init_kwh: f64,
) -> Result<MilpInstance> {
    if demand_fc.len() != pv_fc.len() {
        return Err(CoreError::LengthMismatch {
            expected: demand_fc.len(),
            got: pv_fc.len(),
            what: "pv forecast vs demand forecast".into(),
        });
    }
    let rate_c = (0..demand_fc.len()).map(|t| tariff.rate_c(t % SLOTS_PER_DAY)).collect();
    Ok(MilpInstance {
        dt_hours: DT_HOURS,
        demand: demand_fc.to_vec(),
        pv: pv_fc.to_vec(),
        rate_c,
        fit_c: tariff.fit_c,
        cfg: *cfg,
        e_init_kwh,
    })
}

/// Lowers the instance to the bounded equality-form LP.
pub(crate) fn to_lp(inst: &MilpInstance) -> LpProblem {
    let h = inst.horizon();
    let spec = &inst.cfg.battery;
    let eta = spec.one_way_eff;
    let dt = inst.dt_hours;
    let n_rows = 4 * h;
    let n_cols = 7 * h;
    let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_cols];
    let mut rhs = vec![0.0; n_rows];
    let mut obj = vec![0.0; n_cols];
    let mut lower = vec![0.0; n_cols];
    let mut upper = vec![0.0; n_cols];

    let (bal, soc, bcap, gcap) = (0, h, 2 * h, 3 * h);
    for t in 0..h {
        let c = slot_cols(t);
        // Power balance: gi - ge - ch + di = d - pv
        cols[c.gi].push(((bal + t) as u32, 1.0));
        cols[c.ge].push(((bal + t) as u32, -1.0));
        cols[c.ch].push(((bal + t) as u32, -1.0));
        cols[c.di].push(((bal + t) as u32, 1.0));
        rhs[bal + t] = inst.demand[t] - inst.pv[t];
        // SOC recursion: e_t - e_{t-1} - dt*eta*ch + dt/eta*di = [e_init]
        cols[c.e].push(((soc + t) as u32, 1.0));
        cols[c.ch].push(((soc + t) as u32, -dt * eta));
        cols[c.di].push(((soc + t) as u32, dt / eta));
        if t == 0 {
            rhs[soc + t] = inst.e_init_kwh;
        } else {
            cols[slot_cols(t - 1).e].push(((soc + t) as u32, -1.0));
        }
        // Complementarity caps with slack columns.
        cols[c.ch].push(((bcap + t) as u32, 1.0));
        cols[c.di].push(((bcap + t) as u32, 1.0));
        cols[5 * h + t].push(((bcap + t) as u32, 1.0));
        rhs[bcap + t] = spec.max_power_kw;
        cols[c.gi].push(((gcap + t) as u32, 1.0));
        cols[c.ge].push(((gcap + t) as u32, 1.0));
        cols[6 * h + t].push(((gcap + t) as u32, 1.0));
        rhs[gcap + t] = inst.cfg.grid_limit_kw;

        obj[c.gi] = dt * inst.rate_c[t];
        obj[c.ge] = -dt * inst.fit_c;
        upper[c.gi] = inst.cfg.grid_limit_kw;
        upper[c.ge] = inst.cfg.grid_limit_kw;
        upper[c.ch] = spec.max_power_kw;
        upper[c.di] = spec.max_power_kw;
        lower[c.e] = spec.e_min();
        upper[c.e] = spec.e_max();
        upper[5 * h + t] = spec.max_power_kw;
        upper[6 * h + t] = inst.cfg.grid_limit_kw;
    }
    LpProblem { n_rows, n_cols, cols, rhs, obj, lower, upper }
}

/// Starting basis: SOC variables on the SOC chain, the import or export
/// column (whichever matches the net demand sign) on each balance row, and
/// the slack on each cap row. Feasible whenever the initial SOC is within
/// bounds and net demand within the grid limit.
pub(crate) fn crash_basis(inst: &MilpInstance) -> Vec<usize> {
    let h = inst.horizon();
    let mut basis = Vec::with_capacity(4 * h);
    for t in 0..h {
        let c = slot_cols(t);
        basis.push(if inst.demand[t] - inst.pv[t] >= 0.0 { c.gi } else { c.ge });
    }
    for t in 0..h {
        basis.push(slot_cols(t).e);
    }
    for t in 0..h {
        basis.push(5 * h + t);
    }
    for t in 0..h {
        basis.push(6 * h + t);
    }
    basis
}

fn e_init_feasible(inst: &MilpInstance) -> bool {
    let spec = &inst.cfg.battery;
    inst.e_init_kwh >= spec.e_min() - 1e-9 && inst.e_init_kwh <= spec.e_max() + 1e-9
}

/// Solves the relaxation of the instance (complementarities relaxed).
pub fn solve_lp(inst: &MilpInstance) -> Result<LpSolution> {
    if !e_init_feasible(inst) {
        return Ok(LpSolution { status: LpStatus::Infeasible, objective: 0.0, x: vec![] });
    }
    let p = to_lp(inst);
    let basis = crash_basis(inst);
    simplex::solve(&p, Some(&basis))
}

/// Solves the year with the two-day rolling horizon: each day is solved
/// jointly with the next (the final day padded by repeating itself), the
/// first day of the solution is kept and its terminal SOC carried over.
pub fn rolling_horizon(
    demand_fc: &HalfHourSeries,
    pv_fc: &HalfHourSeries,
    tariff: &TouTariff,
    cfg: &SystemConfig,
    gap_tol: f64,
) -> Result<Schedule> {
    if demand_fc.len() != pv_fc.len() {
        return Err(CoreError::LengthMismatch {
            expected: demand_fc.len(),
            got: pv_fc.len(),
            what: "pv forecast vs demand forecast".into(),
        });
    }
    let days = demand_fc.days();
    let spec = &cfg.battery;
    let mut year = Schedule::zeros(0, cfg.initial_soc_kwh(), DT_HOURS);
    let mut e = cfg.initial_soc_kwh();
    for day in 0..days {
        let next = (day + 1).min(days - 1);
        let mut d2 = demand_fc.day_slice(day).to_vec();
        d2.extend_from_slice(demand_fc.day_slice(next));
        let mut p2 = pv_fc.day_slice(day).to_vec();
        p2.extend_from_slice(pv_fc.day_slice(next));
        let inst = build_instance(&d2, &p2, tariff, cfg, e)?;
        let sol = solve_milp(&inst, gap_tol)
            .map_err(|err| CoreError::Solver(format!("day {day}: {err}")))?;
        let day_sched = sol.schedule_prefix(SLOTS_PER_DAY);
        e = day_sched.soc[SLOTS_PER_DAY].clamp(spec.e_min(), spec.e_max());
        if day == 0 {
            year = day_sched;
        } else {
            year.extend(&day_sched);
        }
    }
    Ok(year)
}
