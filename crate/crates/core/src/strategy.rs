//! Strategy dispatch: one entry point to plan a year schedule with any of
//! the non-learned strategies, plus the realisation step shared by all.

use serde::{Deserialize, Serialize};

use crate::battery::EfficiencyModel;
use crate::dp::{dp_schedule, DpGrids};
use crate::error::{CoreError, Result};
use crate::heuristics::{scm_schedule, scm_toua_schedule, toua_schedule, TouaPolicy};
use crate::milp::{rolling_horizon, DEFAULT_GAP_TOL};
use crate::schedule::{realize_with_actuals, Schedule};
use crate::series::HalfHourSeries;
use crate::sysconfig::SystemConfig;
use crate::tariff::TouTariff;

/// The seven energy management strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Scm,
    Toua,
    ScmToua,
    Milp,
    Dp,
    Pfas,
    Pfag,
}

pub const ALL_STRATEGIES: [StrategyKind; 7] = [
    StrategyKind::Scm,
    StrategyKind::Toua,
    StrategyKind::ScmToua,
    StrategyKind::Milp,
    StrategyKind::Dp,
    StrategyKind::Pfas,
    StrategyKind::Pfag,
];

impl StrategyKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "scm" => Some(Self::Scm),
            "toua" => Some(Self::Toua),
            "scm_toua" => Some(Self::ScmToua),
            "milp" => Some(Self::Milp),
            "dp" => Some(Self::Dp),
            "pfas" => Some(Self::Pfas),
            "pfag" => Some(Self::Pfag),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Scm => "scm",
            Self::Toua => "toua",
            Self::ScmToua => "scm_toua",
            Self::Milp => "milp",
            Self::Dp => "dp",
            Self::Pfas => "pfas",
            Self::Pfag => "pfag",
        }
    }

    /// Learned strategies need a teacher year and (for PFAG) a cohort; the
    /// experiment runner composes those separately.
    pub fn is_learned(&self) -> bool {
        matches!(self, Self::Pfas | Self::Pfag)
    }
}

/// Tuning shared across strategies.
#[derive(Debug, Clone)]
pub struct StrategyOptions {
    pub toua_target: f64,
    pub low_pv_threshold: f64,
    pub dp_grids: DpGrids,
    pub milp_gap_tol: f64,
}

impl Default for StrategyOptions {
    fn default() -> Self {
        Self {
            toua_target: 0.30,
            low_pv_threshold: 0.5,
            dp_grids: DpGrids::default(),
            milp_gap_tol: DEFAULT_GAP_TOL,
        }
    }
}

/// Plans a year with a non-learned strategy. The heuristics act on the
/// actual series (SCM+ToUA consults the forecasts only for its day
/// switch); the optimisers plan on the forecasts.
pub fn plan_schedule(
    kind: StrategyKind,
    demand: &HalfHourSeries,
    pv: &HalfHourSeries,
    demand_fc: &HalfHourSeries,
    pv_fc: &HalfHourSeries,
    tariff: &TouTariff,
    cfg: &SystemConfig,
    opts: &StrategyOptions,
) -> Result<Schedule> {
    match kind {
        StrategyKind::Scm => scm_schedule(demand, pv, cfg),
        StrategyKind::Toua => {
            let policy = TouaPolicy::for_tariff(tariff, opts.toua_target)?;
            toua_schedule(demand, pv, cfg, &policy)
        }
        StrategyKind::ScmToua => {
            let policy = TouaPolicy::for_tariff(tariff, opts.toua_target)?;
            scm_toua_schedule(demand, pv, demand_fc, pv_fc, cfg, &policy, opts.low_pv_threshold)
        }
        StrategyKind::Milp => rolling_horizon(demand_fc, pv_fc, tariff, cfg, opts.milp_gap_tol),
        StrategyKind::Dp => {
            let eff = EfficiencyModel::default_nonlinear(&cfg.battery);
            dp_schedule(demand_fc, pv_fc, tariff, cfg, &eff, &opts.dp_grids)
        }
        StrategyKind::Pfas | StrategyKind::Pfag => Err(CoreError::Contract(format!(
            "{} requires a trained policy; use the experiment runner",
            kind.name()
        ))),
    }
}

/// Plans and realises against the actual series in one call.
#[allow(clippy::too_many_arguments)]
pub fn run_strategy(
    kind: StrategyKind,
    demand: &HalfHourSeries,
    pv: &HalfHourSeries,
    demand_fc: &HalfHourSeries,
    pv_fc: &HalfHourSeries,
    tariff: &TouTariff,
    cfg: &SystemConfig,
    opts: &StrategyOptions,
) -> Result<Schedule> {
    let plan = plan_schedule(kind, demand, pv, demand_fc, pv_fc, tariff, cfg, opts)?;
    Ok(realize_with_actuals(&plan, demand, pv, cfg))
}
