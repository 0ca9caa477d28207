//! Experiment runner: sweeps (customer x strategy x forecast mode) cells,
//! evaluates economics, validation, replay and aging per cell, and
//! persists everything under one run directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use hems_core::battery::{replay_schedule, EfficiencyModel};
use hems_core::data::{load_cohort, synth_cohort, CustomerRecord, SynthSpec};
use hems_core::degradation::{simulate_aging, AgingParams, AgingReport};
use hems_core::dp::{backward_induction, simulate_policy, DayInputs};
use hems_core::economics::{self, CostParams, EconomicsRecord};
use hems_core::forecast::{forecast_year, ForecastMode};
use hems_core::milp::{build_instance, solve_milp};
use hems_core::pfa::{
    build_training_set, cluster::cluster_customers, cluster::select_representative,
    execute_policy, train_policy, NeuralPolicy, TrainingSet,
};
use hems_core::schedule::{validate_schedule, Schedule};
use hems_core::series::{HalfHourSeries, SLOTS_PER_DAY};
use hems_core::strategy::{run_strategy, StrategyKind, StrategyOptions};
use hems_core::sysconfig::SystemConfig;
use hems_core::tariff::TouTariff;

use crate::config::RunConfig;

/// Everything recorded for one (customer, strategy, mode) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellRecord {
    pub customer: String,
    pub strategy: String,
    pub mode: String,
    pub error: Option<String>,
    pub economics: Option<EconomicsRecord>,
    pub aging: Option<AgingReport>,
    pub validation_violations: usize,
    pub replay_violations: usize,
    /// Wall time of the planning/execution call.
    pub solve_seconds: f64,
    /// Offline training time for the learned strategies.
    pub train_seconds: f64,
}

/// A computed cell: the serialisable record plus the realized schedule
/// (and its replay trajectory) for persistence.
pub struct Cell {
    pub record: CellRecord,
    pub schedule: Option<Schedule>,
    pub replay_soc: Option<Vec<f64>>,
}

pub struct RunOutput {
    pub cells: Vec<Cell>,
    pub any_failed: bool,
    pub out_dir: PathBuf,
}

pub fn load_cohort_from(cfg: &RunConfig) -> Result<Vec<CustomerRecord>> {
    match cfg.cohort.source.as_str() {
        "csv" => {
            let path = cfg.cohort.path.as_ref().expect("validated");
            let out = load_cohort(path).map_err(|e| anyhow::anyhow!("{e}"))?;
            for (id, reason) in &out.rejected {
                eprintln!("cohort: rejected customer {id}: {reason}");
            }
            anyhow::ensure!(!out.records.is_empty(), "no usable customers in {}", path.display());
            Ok(out.records)
        }
        _ => {
            let spec = SynthSpec {
                customers: cfg.cohort.customers,
                seed: cfg.cohort.seed,
                profile_mix: cfg.cohort.profile_mix,
                daily_kwh_range: (cfg.cohort.daily_kwh_min, cfg.cohort.daily_kwh_max),
            };
            synth_cohort(&spec).map_err(|e| anyhow::anyhow!("{e}"))
        }
    }
}

fn system_config(record: &CustomerRecord, cfg: &RunConfig) -> Result<SystemConfig> {
    let mut sys = record.system_config().map_err(|e| anyhow::anyhow!("{e}"))?;
    sys.grid_limit_kw = cfg.grid.limit_kw;
    Ok(sys)
}

fn forecast_seed(run_seed: u64, customer_idx: usize) -> u64 {
    run_seed.wrapping_add(1_000_003u64.wrapping_mul(customer_idx as u64))
}

fn replay_model(cfg: &RunConfig, sys: &SystemConfig) -> EfficiencyModel {
    if cfg.run.battery_model == "linear" {
        EfficiencyModel::linear(sys.battery.one_way_eff)
    } else {
        EfficiencyModel::default_nonlinear(&sys.battery)
    }
}

/// Scores a realized schedule into a cell record.
#[allow(clippy::too_many_arguments)]
fn score_cell(
    customer: &str,
    strategy: StrategyKind,
    mode: ForecastMode,
    schedule: Schedule,
    record: &CustomerRecord,
    sys: &SystemConfig,
    tariff: &TouTariff,
    aging_params: &AgingParams,
    econ: &CostParams,
    replay_eff: &EfficiencyModel,
    solve_seconds: f64,
    train_seconds: f64,
) -> Cell {
    let violations = validate_schedule(&schedule, &record.demand, &record.pv)
        .map(|v| v.len())
        .unwrap_or(usize::MAX);
    let (replay_soc, replay_violations) = replay_schedule(&schedule, &sys.battery, replay_eff);
    let aging = simulate_aging(&schedule, &sys.battery, aging_params);
    let econ_record = match economics::evaluate(&schedule, &record.demand, tariff, econ) {
        Ok((ledger, levelized, irr, irr_lev)) => Some(EconomicsRecord {
            customer: customer.to_string(),
            strategy: strategy.name().to_string(),
            forecast: mode.as_str().to_string(),
            annual_cost: ledger.cost_with_der,
            baseline_cost: ledger.cost_without_der,
            savings: ledger.savings,
            fit_revenue: ledger.fit_revenue_gross,
            levelized_savings: levelized,
            irr: irr.map(|r| r.rate),
            irr_inflated: irr.map(|r| r.rate_inflated),
            irr_levelized: irr_lev,
        }),
        Err(_) => None,
    };
    Cell {
        record: CellRecord {
            customer: customer.to_string(),
            strategy: strategy.name().to_string(),
            mode: mode.as_str().to_string(),
            error: None,
            economics: econ_record,
            aging: Some(aging),
            validation_violations: violations,
            replay_violations: replay_violations.len(),
            solve_seconds,
            train_seconds,
        },
        schedule: Some(schedule),
        replay_soc: Some(replay_soc),
    }
}

fn error_cell(customer: &str, strategy: StrategyKind, mode: ForecastMode, err: String) -> Cell {
    Cell {
        record: CellRecord {
            customer: customer.to_string(),
            strategy: strategy.name().to_string(),
            mode: mode.as_str().to_string(),
            error: Some(err),
            economics: None,
            aging: None,
            validation_violations: 0,
            replay_violations: 0,
            solve_seconds: 0.0,
            train_seconds: 0.0,
        },
        schedule: None,
        replay_soc: None,
    }
}

struct CustomerMode {
    cells: Vec<Cell>,
    /// Realized MILP teacher schedule for the learned strategies.
    teacher: Option<Schedule>,
    teacher_err: Option<String>,
}

#[allow(clippy::too_many_arguments)]
fn run_customer_mode(
    idx: usize,
    record: &CustomerRecord,
    cfg: &RunConfig,
    tariff: &TouTariff,
    opts: &StrategyOptions,
    aging_params: &AgingParams,
    mode: ForecastMode,
    strategies: &[StrategyKind],
    needs_teacher: bool,
) -> Result<CustomerMode> {
    let sys = system_config(record, cfg)?;
    let econ = CostParams {
        inflation: cfg.economics.inflation,
        discount: cfg.economics.discount,
        lifespan_years: cfg.economics.lifespan_years,
        initial_cost: economics::market_price_dollars(record.pv_kwp)
            .map_err(|e| anyhow::anyhow!("{e}"))?,
    };
    let replay_eff = replay_model(cfg, &sys);
    let (demand_fc, pv_fc) = forecast_year(
        mode,
        &record.demand,
        &record.pv,
        forecast_seed(cfg.run.seed, idx),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut out = CustomerMode { cells: Vec::new(), teacher: None, teacher_err: None };
    for &kind in strategies {
        if kind.is_learned() {
            continue; // composed later
        }
        let t0 = Instant::now();
        match run_strategy(kind, &record.demand, &record.pv, &demand_fc, &pv_fc, tariff, &sys, opts)
        {
            Ok(schedule) => {
                let solve = t0.elapsed().as_secs_f64();
                if kind == StrategyKind::Milp && needs_teacher {
                    out.teacher = Some(schedule.clone());
                }
                out.cells.push(score_cell(
                    &record.id, kind, mode, schedule, record, &sys, tariff, aging_params, &econ,
                    &replay_eff, solve, 0.0,
                ));
            }
            Err(e) => out.cells.push(error_cell(&record.id, kind, mode, e.to_string())),
        }
    }
    if needs_teacher && out.teacher.is_none() {
        match run_strategy(
            StrategyKind::Milp,
            &record.demand,
            &record.pv,
            &demand_fc,
            &pv_fc,
            tariff,
            &sys,
            opts,
        ) {
            Ok(s) => out.teacher = Some(s),
            Err(e) => out.teacher_err = Some(e.to_string()),
        }
    }
    Ok(out)
}

/// Trains and rolls out the per-customer policy (PFAS).
#[allow(clippy::too_many_arguments)]
fn run_pfas(
    idx: usize,
    record: &CustomerRecord,
    teacher: Option<&Schedule>,
    teacher_err: Option<&str>,
    cfg: &RunConfig,
    tariff: &TouTariff,
    aging_params: &AgingParams,
    mode: ForecastMode,
) -> Cell {
    let Some(teacher) = teacher else {
        return error_cell(
            &record.id,
            StrategyKind::Pfas,
            mode,
            format!("no teacher schedule: {}", teacher_err.unwrap_or("unknown")),
        );
    };
    let sys = match system_config(record, cfg) {
        Ok(s) => s,
        Err(e) => return error_cell(&record.id, StrategyKind::Pfas, mode, e.to_string()),
    };
    let econ = CostParams {
        inflation: cfg.economics.inflation,
        discount: cfg.economics.discount,
        lifespan_years: cfg.economics.lifespan_years,
        initial_cost: match economics::market_price_dollars(record.pv_kwp) {
            Ok(c) => c,
            Err(e) => return error_cell(&record.id, StrategyKind::Pfas, mode, e.to_string()),
        },
    };
    let pcfg = cfg.policy_config(false, idx as u64);
    let t0 = Instant::now();
    let trained = build_training_set(teacher, &record.demand, &record.pv, tariff, &pcfg)
        .and_then(|set| train_policy(&set, &pcfg));
    let policy = match trained {
        Ok(p) => p,
        Err(e) => return error_cell(&record.id, StrategyKind::Pfas, mode, e.to_string()),
    };
    let train_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    match execute_policy(&policy, &record.demand, &record.pv, tariff, &sys) {
        Ok(schedule) => {
            let solve = t1.elapsed().as_secs_f64();
            score_cell(
                &record.id,
                StrategyKind::Pfas,
                mode,
                schedule,
                record,
                &sys,
                tariff,
                aging_params,
                &econ,
                &replay_model(cfg, &sys),
                solve,
                train_seconds,
            )
        }
        Err(e) => error_cell(&record.id, StrategyKind::Pfas, mode, e.to_string()),
    }
}

/// Cluster-level strategy (PFAG): k-means over the cohort, one NARX policy
/// per member, cross-tested to pick the cluster representative, which then
/// runs for every member of the cluster.
#[allow(clippy::too_many_arguments)]
fn run_pfag(
    cohort: &[CustomerRecord],
    teachers: &[Option<Schedule>],
    teacher_errs: &[Option<String>],
    cfg: &RunConfig,
    tariff: &TouTariff,
    aging_params: &AgingParams,
    mode: ForecastMode,
) -> Vec<Cell> {
    let model = match cluster_customers(cohort) {
        Ok(m) => m,
        Err(e) => {
            return cohort
                .iter()
                .map(|r| error_cell(&r.id, StrategyKind::Pfag, mode, e.to_string()))
                .collect()
        }
    };
    let mut cells: Vec<Cell> = Vec::new();
    for cluster in 0..model.centroids.len() {
        let members = model.members(cluster);
        if members.is_empty() {
            continue;
        }
        // Train one NARX policy per member with a teacher.
        let trained: Vec<(usize, NeuralPolicy, TrainingSet, f64)> = members
            .par_iter()
            .filter_map(|&m| {
                let teacher = teachers[m].as_ref()?;
                let pcfg = cfg.policy_config(true, 10_000 + m as u64);
                let t0 = Instant::now();
                let set =
                    build_training_set(teacher, &cohort[m].demand, &cohort[m].pv, tariff, &pcfg)
                        .ok()?;
                let policy = train_policy(&set, &pcfg).ok()?;
                Some((m, policy, set, t0.elapsed().as_secs_f64()))
            })
            .collect();
        if trained.is_empty() {
            for &m in &members {
                let why = teacher_errs[m].clone().unwrap_or_else(|| "training failed".into());
                cells.push(error_cell(
                    &cohort[m].id,
                    StrategyKind::Pfag,
                    mode,
                    format!("cluster {cluster}: no trainable member: {why}"),
                ));
            }
            continue;
        }
        let policies: Vec<NeuralPolicy> = trained.iter().map(|t| t.1.clone()).collect();
        let sets: Vec<TrainingSet> = trained.iter().map(|t| t.2.clone()).collect();
        let rep = match select_representative(&policies, &sets) {
            Ok(r) => r,
            Err(e) => {
                for &m in &members {
                    cells.push(error_cell(&cohort[m].id, StrategyKind::Pfag, mode, e.to_string()));
                }
                continue;
            }
        };
        if rep.singleton {
            eprintln!(
                "pfag: cluster {cluster} has a single member; using its policy as representative"
            );
        }
        let representative = &policies[rep.winner];
        let total_train: f64 = trained.iter().map(|t| t.3).sum();
        let member_cells: Vec<Cell> = members
            .par_iter()
            .map(|&m| {
                let record = &cohort[m];
                let sys = match system_config(record, cfg) {
                    Ok(s) => s,
                    Err(e) => {
                        return error_cell(&record.id, StrategyKind::Pfag, mode, e.to_string())
                    }
                };
                let econ = CostParams {
                    inflation: cfg.economics.inflation,
                    discount: cfg.economics.discount,
                    lifespan_years: cfg.economics.lifespan_years,
                    initial_cost: match economics::market_price_dollars(record.pv_kwp) {
                        Ok(c) => c,
                        Err(e) => {
                            return error_cell(&record.id, StrategyKind::Pfag, mode, e.to_string())
                        }
                    },
                };
                let t0 = Instant::now();
                match execute_policy(representative, &record.demand, &record.pv, tariff, &sys) {
                    Ok(schedule) => {
                        let solve = t0.elapsed().as_secs_f64();
                        score_cell(
                            &record.id,
                            StrategyKind::Pfag,
                            mode,
                            schedule,
                            record,
                            &sys,
                            tariff,
                            aging_params,
                            &econ,
                            &replay_model(cfg, &sys),
                            solve,
                            total_train,
                        )
                    }
                    Err(e) => error_cell(&record.id, StrategyKind::Pfag, mode, e.to_string()),
                }
            })
            .collect();
        cells.extend(member_cells);
    }
    cells
}

/// Runs the whole sweep described by the config; persists results and
/// returns them.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.workers)
        .build()
        .context("building worker pool")?;
    pool.install(|| run_experiment_inner(cfg))
}

fn run_experiment_inner(cfg: &RunConfig) -> Result<RunOutput> {
    let cohort = load_cohort_from(cfg)?;
    let tariff = cfg.tariff()?;
    let opts = cfg.strategy_options()?;
    let aging_params = cfg.aging_params();
    let strategies = cfg.strategies();
    let needs_teacher =
        strategies.iter().any(|s| matches!(s, StrategyKind::Pfas | StrategyKind::Pfag));

    let mut cells: Vec<Cell> = Vec::new();
    for mode in cfg.forecast_modes() {
        let per_customer: Vec<Result<CustomerMode>> = cohort
            .par_iter()
            .enumerate()
            .map(|(idx, record)| {
                run_customer_mode(
                    idx,
                    record,
                    cfg,
                    &tariff,
                    &opts,
                    &aging_params,
                    mode,
                    &strategies,
                    needs_teacher,
                )
            })
            .collect();
        let mut teachers: Vec<Option<Schedule>> = Vec::with_capacity(cohort.len());
        let mut teacher_errs: Vec<Option<String>> = Vec::with_capacity(cohort.len());
        for (record, outcome) in cohort.iter().zip(per_customer) {
            match outcome {
                Ok(mut cm) => {
                    cells.append(&mut cm.cells);
                    teachers.push(cm.teacher.take());
                    teacher_errs.push(cm.teacher_err.take());
                }
                Err(e) => {
                    for &kind in &strategies {
                        if !kind.is_learned() {
                            cells.push(error_cell(&record.id, kind, mode, e.to_string()));
                        }
                    }
                    teachers.push(None);
                    teacher_errs.push(Some(e.to_string()));
                }
            }
        }
        if strategies.contains(&StrategyKind::Pfas) {
            let pfas_cells: Vec<Cell> = cohort
                .par_iter()
                .enumerate()
                .map(|(idx, record)| {
                    run_pfas(
                        idx,
                        record,
                        teachers[idx].as_ref(),
                        teacher_errs[idx].as_deref(),
                        cfg,
                        &tariff,
                        &aging_params,
                        mode,
                    )
                })
                .collect();
            cells.extend(pfas_cells);
        }
        if strategies.contains(&StrategyKind::Pfag) {
            cells.extend(run_pfag(
                &cohort,
                &teachers,
                &teacher_errs,
                cfg,
                &tariff,
                &aging_params,
                mode,
            ));
        }
    }

    cells.sort_by(|a, b| {
        (&a.record.customer, &a.record.strategy, &a.record.mode).cmp(&(
            &b.record.customer,
            &b.record.strategy,
            &b.record.mode,
        ))
    });
    let any_failed = cells.iter().any(|c| c.record.error.is_some());
    let out_dir = cfg.run.out.clone();
    persist(cfg, &cells, &out_dir)?;
    Ok(RunOutput { cells, any_failed, out_dir })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn sanitize(text: &str) -> String {
    text.replace([',', '\n'], ";")
}

fn persist(cfg: &RunConfig, cells: &[Cell], out_dir: &Path) -> Result<()> {
    let cell_dir = out_dir.join("cells");
    std::fs::create_dir_all(&cell_dir)?;
    std::fs::write(out_dir.join("config.toml"), toml::to_string_pretty(cfg)?)?;

    let mut aggregate = String::from(
        "customer,strategy,mode,annual_cost,baseline_cost,savings,fit_revenue,levelized_savings,\
         irr,irr_inflated,irr_levelized,soh_20y,fec_per_year,mean_doc,lifetime_years,\
         validation_violations,replay_violations,error\n",
    );
    let mut timings =
        String::from("customer,strategy,mode,solve_seconds,per_day_seconds,train_seconds\n");
    for cell in cells {
        let r = &cell.record;
        let key = format!("{}__{}__{}", r.customer, r.strategy, r.mode);
        std::fs::write(
            cell_dir.join(format!("{key}.json")),
            serde_json::to_string_pretty(&r)?,
        )?;
        if let (true, Some(schedule)) = (cfg.run.save_schedules, cell.schedule.as_ref()) {
            let mut text =
                String::from("slot,grid_import_kw,grid_export_kw,charge_kw,discharge_kw,soc_end_kwh\n");
            for t in 0..schedule.n_slots() {
                text.push_str(&format!(
                    "{t},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                    schedule.grid_import[t],
                    schedule.grid_export[t],
                    schedule.charge[t],
                    schedule.discharge[t],
                    schedule.soc[t + 1],
                ));
            }
            std::fs::write(cell_dir.join(format!("{key}_schedule.csv")), text)?;
        }
        if let (true, Some(schedule), Some(replay)) =
            (cfg.run.soc_traces, cell.schedule.as_ref(), cell.replay_soc.as_ref())
        {
            let mut text = String::from("slot,soc_kwh,replay_soc_kwh\n");
            for t in 0..schedule.n_slots() {
                text.push_str(&format!("{t},{:.6},{:.6}\n", schedule.soc[t + 1], replay[t + 1]));
            }
            std::fs::write(cell_dir.join(format!("{key}_soc.csv")), text)?;
        }

        let (econ, aging) = (&r.economics, &r.aging);
        aggregate.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.customer,
            r.strategy,
            r.mode,
            fmt_opt(econ.as_ref().map(|e| e.annual_cost)),
            fmt_opt(econ.as_ref().map(|e| e.baseline_cost)),
            fmt_opt(econ.as_ref().map(|e| e.savings)),
            fmt_opt(econ.as_ref().map(|e| e.fit_revenue)),
            fmt_opt(econ.as_ref().map(|e| e.levelized_savings)),
            fmt_opt(econ.as_ref().and_then(|e| e.irr)),
            fmt_opt(econ.as_ref().and_then(|e| e.irr_inflated)),
            fmt_opt(econ.as_ref().and_then(|e| e.irr_levelized)),
            fmt_opt(aging.as_ref().map(|a| a.soh_at_20y)),
            fmt_opt(aging.as_ref().map(|a| a.fec_per_year)),
            fmt_opt(aging.as_ref().map(|a| a.mean_doc)),
            aging.as_ref().map(|a| a.expected_lifetime_years.to_string()).unwrap_or_default(),
            r.validation_violations,
            r.replay_violations,
            r.error.as_deref().map(sanitize).unwrap_or_default(),
        ));
        let days = cell
            .schedule
            .as_ref()
            .map(|s| (s.n_slots() / SLOTS_PER_DAY).max(1))
            .unwrap_or(365);
        timings.push_str(&format!(
            "{},{},{},{:.6},{:.9},{:.6}\n",
            r.customer,
            r.strategy,
            r.mode,
            r.solve_seconds,
            r.solve_seconds / days as f64,
            r.train_seconds,
        ));
    }
    std::fs::write(out_dir.join("aggregate.csv"), aggregate)?;
    std::fs::write(out_dir.join("timings.csv"), timings)?;
    Ok(())
}

/// Median of five repeats of the daily solve of SCM, MILP and DP on one
/// customer day (the Table-6-style timing probe).
pub fn bench_daily(
    record: &CustomerRecord,
    cfg: &RunConfig,
    day: usize,
) -> Result<BTreeMap<&'static str, f64>> {
    let tariff = cfg.tariff()?;
    let opts = cfg.strategy_options()?;
    let sys = system_config(record, cfg)?;
    let e0 = sys.initial_soc_kwh();
    let d1 = record.demand.day_slice(day).to_vec();
    let p1 = record.pv.day_slice(day).to_vec();
    let next = (day + 1).min(record.demand.days() - 1);
    let mut d2 = d1.clone();
    d2.extend_from_slice(record.demand.day_slice(next));
    let mut p2 = p1.clone();
    p2.extend_from_slice(record.pv.day_slice(next));

    let time_median = |f: &mut dyn FnMut()| -> f64 {
        let mut samples = Vec::with_capacity(5);
        for _ in 0..5 {
            let t0 = Instant::now();
            f();
            samples.push(t0.elapsed().as_secs_f64());
        }
        samples.sort_by(f64::total_cmp);
        samples[2]
    };

    let mut out = BTreeMap::new();
    let day_demand = HalfHourSeries::new(d1.clone(), 1).map_err(|e| anyhow::anyhow!("{e}"))?;
    let day_pv = HalfHourSeries::new(p1.clone(), 1).map_err(|e| anyhow::anyhow!("{e}"))?;
    out.insert(
        "scm",
        time_median(&mut || {
            hems_core::heuristics::scm_schedule(&day_demand, &day_pv, &sys).unwrap();
        }),
    );
    let inst =
        build_instance(&d2, &p2, &tariff, &sys, e0).map_err(|e| anyhow::anyhow!("{e}"))?;
    out.insert(
        "milp",
        time_median(&mut || {
            solve_milp(&inst, opts.milp_gap_tol).unwrap();
        }),
    );
    let rates: Vec<f64> = (0..SLOTS_PER_DAY).map(|s| tariff.rate_c(s)).collect();
    let eff = EfficiencyModel::default_nonlinear(&sys.battery);
    out.insert(
        "dp",
        time_median(&mut || {
            let inputs = DayInputs { demand: &d1, pv: &p1, rates_c: &rates, fit_c: tariff.fit_c };
            let table = backward_induction(&inputs, &sys, &eff, &opts.dp_grids);
            simulate_policy(&table, &inputs, &sys, &eff, e0);
        }),
    );
    Ok(out)
}
