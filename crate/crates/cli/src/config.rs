//! Run configuration: one TOML file drives a whole experiment.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use hems_core::degradation::AgingParams;
use hems_core::dp::DpGrids;
use hems_core::forecast::ForecastMode;
use hems_core::pfa::PolicyConfig;
use hems_core::strategy::{StrategyKind, StrategyOptions, ALL_STRATEGIES};
use hems_core::tariff::TouTariff;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub cohort: CohortConfig,
    pub run: RunSettings,
    pub heuristics: HeuristicsConfig,
    pub milp: MilpConfig,
    pub dp: DpConfig,
    pub pfa: PfaConfig,
    pub aging: AgingConfig,
    pub economics: EconomicsConfig,
    pub grid: GridConfig,
    pub tariff: Option<toml::Value>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cohort: CohortConfig::default(),
            run: RunSettings::default(),
            heuristics: HeuristicsConfig::default(),
            milp: MilpConfig::default(),
            dp: DpConfig::default(),
            pfa: PfaConfig::default(),
            aging: AgingConfig::default(),
            economics: EconomicsConfig::default(),
            grid: GridConfig::default(),
            tariff: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortConfig {
    /// "synth" or "csv".
    pub source: String,
    pub path: Option<PathBuf>,
    pub customers: usize,
    pub seed: u64,
    pub profile_mix: [f64; 5],
    pub daily_kwh_min: f64,
    pub daily_kwh_max: f64,
}

impl Default for CohortConfig {
    fn default() -> Self {
        Self {
            source: "synth".into(),
            path: None,
            customers: 10,
            seed: 1,
            profile_mix: [0.2; 5],
            daily_kwh_min: 7.5,
            daily_kwh_max: 12.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub strategies: Vec<String>,
    pub forecast_modes: Vec<String>,
    /// Efficiency model used for schedule replay reporting.
    pub battery_model: String,
    pub seed: u64,
    pub out: PathBuf,
    /// 0 = one worker per core.
    pub workers: usize,
    pub save_schedules: bool,
    pub soc_traces: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            strategies: ALL_STRATEGIES.iter().map(|s| s.name().to_string()).collect(),
            forecast_modes: vec!["perfect".into(), "persistence".into()],
            battery_model: "nonlinear".into(),
            seed: 7,
            out: PathBuf::from("runs/out"),
            workers: 0,
            save_schedules: true,
            soc_traces: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicsConfig {
    pub toua: TouaSection,
    pub scm_toua: ScmTouaSection,
}

impl Default for HeuristicsConfig {
    fn default() -> Self {
        Self { toua: TouaSection::default(), scm_toua: ScmTouaSection::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TouaSection {
    pub target: f64,
}

impl Default for TouaSection {
    fn default() -> Self {
        Self { target: 0.30 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScmTouaSection {
    pub low_pv_threshold: f64,
}

impl Default for ScmTouaSection {
    fn default() -> Self {
        Self { low_pv_threshold: 0.5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MilpConfig {
    pub gap_tol: f64,
}

impl Default for MilpConfig {
    fn default() -> Self {
        Self { gap_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpConfig {
    pub soc_levels: usize,
    pub action_levels: usize,
}

impl Default for DpConfig {
    fn default() -> Self {
        Self { soc_levels: 101, action_levels: 43 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PfaConfig {
    pub window: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for PfaConfig {
    fn default() -> Self {
        let d = PolicyConfig::default();
        Self { window: d.window, hidden: d.hidden, epochs: d.epochs, seed: d.seed }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgingConfig {
    pub t_cal: f64,
    pub k_cyc: KcycSection,
    pub v_e: f64,
    pub depth_floor: f64,
}

impl Default for AgingConfig {
    fn default() -> Self {
        let d = AgingParams::default();
        Self {
            t_cal: d.t_cal_years,
            k_cyc: KcycSection { a: d.kcyc_a, b: d.kcyc_b },
            v_e: d.v_end,
            depth_floor: d.depth_floor,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KcycSection {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EconomicsConfig {
    pub inflation: f64,
    pub discount: f64,
    pub lifespan_years: u32,
}

impl Default for EconomicsConfig {
    fn default() -> Self {
        Self { inflation: 0.03, discount: 0.05, lifespan_years: 20 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub limit_kw: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { limit_kw: hems_core::sysconfig::DEFAULT_GRID_LIMIT_KW }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cohort.source != "synth" && self.cohort.source != "csv" {
            bail!("cohort.source must be \"synth\" or \"csv\"");
        }
        if self.cohort.source == "csv" && self.cohort.path.is_none() {
            bail!("cohort.source = \"csv\" requires cohort.path");
        }
        for s in &self.run.strategies {
            if StrategyKind::parse(s).is_none() {
                bail!("unknown strategy {s:?}");
            }
        }
        for m in &self.run.forecast_modes {
            if ForecastMode::parse(m).is_none() {
                bail!("unknown forecast mode {m:?}");
            }
        }
        if self.run.battery_model != "linear" && self.run.battery_model != "nonlinear" {
            bail!("run.battery_model must be \"linear\" or \"nonlinear\"");
        }
        Ok(())
    }

    pub fn strategies(&self) -> Vec<StrategyKind> {
        self.run.strategies.iter().map(|s| StrategyKind::parse(s).expect("validated")).collect()
    }

    pub fn forecast_modes(&self) -> Vec<ForecastMode> {
        self.run
            .forecast_modes
            .iter()
            .map(|m| ForecastMode::parse(m).expect("validated"))
            .collect()
    }

    pub fn tariff(&self) -> Result<TouTariff> {
        match &self.tariff {
            None => Ok(TouTariff::origin_energy_tou()),
            Some(value) => {
                let text = toml::to_string(&toml::Value::Table({
                    let mut t = toml::map::Map::new();
                    t.insert("tariff".into(), value.clone());
                    t
                }))?;
                TouTariff::from_toml_str(&text).map_err(|e| anyhow::anyhow!("{e}"))
            }
        }
    }

    pub fn strategy_options(&self) -> Result<StrategyOptions> {
        Ok(StrategyOptions {
            toua_target: self.heuristics.toua.target,
            low_pv_threshold: self.heuristics.scm_toua.low_pv_threshold,
            dp_grids: DpGrids::new(self.dp.soc_levels, self.dp.action_levels)
                .map_err(|e| anyhow::anyhow!("{e}"))?,
            milp_gap_tol: self.milp.gap_tol,
        })
    }

    pub fn aging_params(&self) -> AgingParams {
        AgingParams {
            t_cal_years: self.aging.t_cal,
            kcyc_a: self.aging.k_cyc.a,
            kcyc_b: self.aging.k_cyc.b,
            v_end: self.aging.v_e,
            depth_floor: self.aging.depth_floor,
        }
    }

    pub fn policy_config(&self, narx: bool, seed_offset: u64) -> PolicyConfig {
        PolicyConfig {
            window: self.pfa.window,
            hidden: self.pfa.hidden,
            epochs: self.pfa.epochs,
            seed: self.pfa.seed.wrapping_add(seed_offset),
            narx,
            ..PolicyConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_spec_key_paths() {
        let text = r#"
            [run]
            strategies = ["scm", "milp"]
            forecast_modes = ["perfect"]

            [heuristics.toua]
            target = 0.25

            [heuristics.scm_toua]
            low_pv_threshold = 0.4

            [aging]
            t_cal = 12.0
            v_e = 0.8
            depth_floor = 0.005

            [aging.k_cyc]
            A = 4000.0
            B = 0.9

            [tariff]
            fixed_charge = 1.551
            peak = 38.588
            shoulder = 37.147
            offpeak = 21.340
            fit = 9.0
        "#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.heuristics.toua.target, 0.25);
        assert_eq!(cfg.aging_params().kcyc_a, 4000.0);
        assert_eq!(cfg.tariff().unwrap(), TouTariff::origin_energy_tou());
        assert_eq!(cfg.strategies(), vec![StrategyKind::Scm, StrategyKind::Milp]);
    }

    #[test]
    fn rejects_unknown_strategy() {
        let text = r#"
            [run]
            strategies = ["warp"]
        "#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        assert!(cfg.validate().is_err());
    }
}
