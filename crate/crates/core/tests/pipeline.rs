//! Cross-module pipeline checks: cohort -> strategy -> validation ->
//! economics -> aging, on a desk-scale synthetic input.

use hems_core::battery::EfficiencyModel;
use hems_core::data::{synth_cohort, SynthSpec};
use hems_core::degradation::{simulate_aging, AgingParams};
use hems_core::dp::DpGrids;
use hems_core::economics::{annual_cost, baseline_cost, irr, levelized_savings, CostParams};
use hems_core::forecast::{forecast_year, ForecastMode};
use hems_core::schedule::validate_schedule;
use hems_core::series::HalfHourSeries;
use hems_core::strategy::{run_strategy, StrategyKind, StrategyOptions};
use hems_core::tariff::TouTariff;

fn short_series(record: &hems_core::data::CustomerRecord, days: usize) -> (HalfHourSeries, HalfHourSeries) {
    let d = HalfHourSeries::new(record.demand.values()[..days * 48].to_vec(), days).unwrap();
    let p = HalfHourSeries::new(record.pv.values()[..days * 48].to_vec(), days).unwrap();
    (d, p)
}

#[test]
fn every_strategy_output_validates_under_its_own_model() {
    let cohort = synth_cohort(&SynthSpec { customers: 1, ..Default::default() }).unwrap();
    let record = &cohort[0];
    let cfg = record.system_config().unwrap();
    let tariff = TouTariff::origin_energy_tou();
    let opts = StrategyOptions {
        dp_grids: DpGrids::new(31, 11).unwrap(),
        ..Default::default()
    };
    let (d, p) = short_series(record, 14);
    for kind in [
        StrategyKind::Scm,
        StrategyKind::Toua,
        StrategyKind::ScmToua,
        StrategyKind::Milp,
        StrategyKind::Dp,
    ] {
        let s = run_strategy(kind, &d, &p, &d, &p, &tariff, &cfg, &opts).unwrap();
        let violations = validate_schedule(&s, &d, &p).unwrap();
        assert!(violations.is_empty(), "{}: {violations:?}", kind.name());
        // Battery flows stay one-sided everywhere.
        for t in 0..s.n_slots() {
            assert!(s.charge[t] < 1e-9 || s.discharge[t] < 1e-9);
        }
    }
}

#[test]
fn persistence_plan_realises_against_actuals() {
    let cohort = synth_cohort(&SynthSpec { customers: 1, ..Default::default() }).unwrap();
    let record = &cohort[0];
    let cfg = record.system_config().unwrap();
    let tariff = TouTariff::origin_energy_tou();
    let opts = StrategyOptions::default();
    let (d, p) = short_series(record, 21);
    let (dfc, pfc) = forecast_year(ForecastMode::Persistence, &d, &p, 99).unwrap();
    let s = run_strategy(StrategyKind::Milp, &d, &p, &dfc, &pfc, &tariff, &cfg, &opts).unwrap();
    // Realized schedule balances the actual series even though the plan
    // was built on forecasts.
    assert!(validate_schedule(&s, &d, &p).unwrap().is_empty());
}

#[test]
fn economics_and_aging_chain_on_scm_year() {
    let cohort = synth_cohort(&SynthSpec { customers: 1, ..Default::default() }).unwrap();
    let record = &cohort[0];
    let cfg = record.system_config().unwrap();
    let tariff = TouTariff::origin_energy_tou();
    let opts = StrategyOptions::default();
    let s = run_strategy(
        StrategyKind::Scm,
        &record.demand,
        &record.pv,
        &record.demand,
        &record.pv,
        &tariff,
        &cfg,
        &opts,
    )
    .unwrap();
    let base = baseline_cost(&record.demand, &tariff);
    let cost = annual_cost(&s, &tariff);
    assert!(cost < base, "a PV-battery system must beat the no-DER baseline");
    let params = CostParams::for_pv_size(record.pv_kwp).unwrap();
    let savings = base - cost;
    let lev = levelized_savings(savings, &params).unwrap();
    assert!(lev > savings, "levelising inflating cashflows raises the annuity");
    let r = irr(params.initial_cost, savings, params.lifespan_years, params.inflation).unwrap();
    assert!(r.rate > -0.99 && r.rate < 1.0);
    let report = simulate_aging(&s, &cfg.battery, &AgingParams::default());
    assert!(report.fec_per_year > 10.0, "a solar household cycles its battery");
    assert!(report.soh_by_year[20] < 100.0);
    assert!(report.expected_lifetime_years <= 25);
}

#[test]
fn replay_under_linear_model_reproduces_linear_strategies() {
    let cohort = synth_cohort(&SynthSpec { customers: 1, ..Default::default() }).unwrap();
    let record = &cohort[0];
    let cfg = record.system_config().unwrap();
    let tariff = TouTariff::origin_energy_tou();
    let opts = StrategyOptions::default();
    let (d, p) = short_series(record, 7);
    let s = run_strategy(StrategyKind::Scm, &d, &p, &d, &p, &tariff, &cfg, &opts).unwrap();
    let eff = EfficiencyModel::linear(cfg.battery.one_way_eff);
    let (traj, violations) = hems_core::battery::replay_schedule(&s, &cfg.battery, &eff);
    assert!(violations.is_empty());
    for (a, b) in traj.iter().zip(s.soc.iter()) {
        assert!((a - b).abs() < 1e-9);
    }
}
