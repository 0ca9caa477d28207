//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured evidence. Run with
//! `cargo test -p hems-cli --test acceptance -- --nocapture`.

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use hems_cli::config::RunConfig;
use hems_cli::runner::{bench_daily, run_experiment, CellRecord};
use hems_core::battery::{replay_schedule, BatterySpec, EfficiencyModel};
use hems_core::data::{synth_cohort, SynthSpec};
use hems_core::degradation::{count_half_cycles, CycleDirection};
use hems_core::dp::{backward_induction, DayInputs, DpGrids};
use hems_core::economics::{
    equivalent_discount_rate, irr, levelising_factor, npv, CostParams,
};
use hems_core::milp::{solve_milp, MilpInstance};
use hems_core::series::HalfHourSeries;
use hems_core::strategy::{run_strategy, StrategyKind, StrategyOptions};
use hems_core::sysconfig::SystemConfig;
use hems_core::tariff::TouTariff;

fn median(mut v: Vec<f64>) -> f64 {
    assert!(!v.is_empty());
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// ---------------------------------------------------------------------
// Shared cohort sweep reused by criteria 3, 4 and 6.
// ---------------------------------------------------------------------

struct Sweep {
    /// scm/toua/scm_toua/milp under both forecast modes.
    base: Vec<CellRecord>,
    /// dp under the perfect forecast at default grids.
    dp: Vec<CellRecord>,
    _dirs: (TempDir, TempDir),
}

fn sweep() -> &'static Sweep {
    static SWEEP: OnceLock<Sweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let dir_a = TempDir::new().unwrap();
        let dir_b = TempDir::new().unwrap();
        let mut cfg = RunConfig::default();
        cfg.run.strategies =
            ["scm", "toua", "scm_toua", "milp"].iter().map(|s| s.to_string()).collect();
        cfg.run.forecast_modes = vec!["perfect".into(), "persistence".into()];
        cfg.run.save_schedules = false;
        cfg.run.out = dir_a.path().to_path_buf();
        let base = run_experiment(&cfg).unwrap();
        assert!(!base.any_failed, "base sweep had failing cells");

        let mut cfg_dp = RunConfig::default();
        cfg_dp.run.strategies = vec!["dp".into()];
        cfg_dp.run.forecast_modes = vec!["perfect".into()];
        cfg_dp.run.save_schedules = false;
        cfg_dp.run.out = dir_b.path().to_path_buf();
        let dp = run_experiment(&cfg_dp).unwrap();
        assert!(!dp.any_failed, "dp sweep had failing cells");

        Sweep {
            base: base.cells.into_iter().map(|c| c.record).collect(),
            dp: dp.cells.into_iter().map(|c| c.record).collect(),
            _dirs: (dir_a, dir_b),
        }
    })
}

fn savings_of(cells: &[CellRecord], strategy: &str, mode: &str) -> Vec<(String, f64)> {
    cells
        .iter()
        .filter(|c| c.strategy == strategy && c.mode == mode)
        .map(|c| (c.customer.clone(), c.economics.as_ref().unwrap().savings))
        .collect()
}

// ---------------------------------------------------------------------
// Criterion 1: MILP oracle equivalence.
// ---------------------------------------------------------------------

/// Exhaustive search over 21 discretised battery power levels per slot
/// with an admissible lower-bound prune; fully independent of the LP path.
fn discrete_optimum(inst: &MilpInstance, levels: &[f64]) -> f64 {
    let n = inst.horizon();
    let eta = inst.cfg.battery.one_way_eff;
    let dt = inst.dt_hours;
    let (e_min, e_max) = (inst.cfg.battery.e_min(), inst.cfg.battery.e_max());
    let slot_cost = |t: usize, p: f64| -> f64 {
        let net = inst.demand[t] - inst.pv[t] + p;
        dt * (inst.rate_c[t] * net.max(0.0) - inst.fit_c * (-net).max(0.0))
    };
    // Admissible suffix bound: per-slot minimum over all levels.
    let mut min_future = vec![0.0; n + 1];
    for t in (0..n).rev() {
        let best = levels.iter().map(|&p| slot_cost(t, p)).fold(f64::INFINITY, f64::min);
        min_future[t] = best + min_future[t + 1];
    }
    struct Dfs<'a> {
        inst: &'a MilpInstance,
        levels: &'a [f64],
        min_future: &'a [f64],
        best: f64,
        eta: f64,
        dt: f64,
        e_min: f64,
        e_max: f64,
    }
    impl Dfs<'_> {
        fn go(&mut self, t: usize, e: f64, acc: f64) {
            if acc + self.min_future[t] >= self.best - 1e-12 {
                return;
            }
            if t == self.inst.horizon() {
                self.best = acc;
                return;
            }
            for &p in self.levels {
                let de = if p >= 0.0 { self.dt * self.eta * p } else { self.dt * p / self.eta };
                let e2 = e + de;
                if e2 < self.e_min - 1e-9 || e2 > self.e_max + 1e-9 {
                    continue;
                }
                let net = self.inst.demand[t] - self.inst.pv[t] + p;
                let cost = self.dt
                    * (self.inst.rate_c[t] * net.max(0.0) - self.inst.fit_c * (-net).max(0.0));
                self.go(t + 1, e2, acc + cost);
            }
        }
    }
    let mut dfs = Dfs { inst, levels, min_future: &min_future, best: f64::INFINITY, eta, dt, e_min, e_max };
    dfs.go(0, inst.e_init_kwh, 0.0);
    dfs.best
}

/// Rounds the MILP's net battery powers to the nearest feasible level,
/// giving a valid discrete schedule whose cost upper-bounds the discrete
/// optimum.
fn rounded_milp_cost(inst: &MilpInstance, milp_net: &[f64], levels: &[f64]) -> f64 {
    let eta = inst.cfg.battery.one_way_eff;
    let dt = inst.dt_hours;
    let (e_min, e_max) = (inst.cfg.battery.e_min(), inst.cfg.battery.e_max());
    let mut e = inst.e_init_kwh;
    let mut cost = 0.0;
    for t in 0..inst.horizon() {
        let mut ranked: Vec<f64> = levels.to_vec();
        ranked.sort_by(|a, b| {
            (a - milp_net[t]).abs().partial_cmp(&(b - milp_net[t]).abs()).unwrap()
        });
        let p = ranked
            .into_iter()
            .find(|&p| {
                let de = if p >= 0.0 { dt * eta * p } else { dt * p / eta };
                let e2 = e + de;
                (e_min - 1e-9..=e_max + 1e-9).contains(&e2)
            })
            .expect("the zero level is always feasible");
        e += if p >= 0.0 { dt * eta * p } else { dt * p / eta };
        let net = inst.demand[t] - inst.pv[t] + p;
        cost += dt * (inst.rate_c[t] * net.max(0.0) - inst.fit_c * (-net).max(0.0));
    }
    cost
}

#[test]
fn criterion_1_milp_oracle_equivalence() {
    let t0 = Instant::now();
    let battery = BatterySpec::new(2.0, 2.0, 2.1, 0.91).unwrap();
    let cfg = SystemConfig::new(3.0, battery, 15.0).unwrap();
    let levels: Vec<f64> = (0..21).map(|i| -2.1 + 0.21 * i as f64).collect();
    let mut max_gap: f64 = 0.0;
    for k in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + k);
        let n = 6;
        let inst = MilpInstance {
            dt_hours: 0.5,
            demand: (0..n).map(|_| rng.gen_range(0.0..3.0)).collect(),
            pv: (0..n).map(|_| rng.gen_range(0.0..2.0)).collect(),
            rate_c: (0..n).map(|_| rng.gen_range(10.0..45.0)).collect(),
            fit_c: rng.gen_range(0.0..8.0),
            cfg,
            e_init_kwh: 1.0,
        };
        let milp = solve_milp(&inst, 1e-6).unwrap();
        let disc = discrete_optimum(&inst, &levels);
        // Sandwich: every discrete schedule is MILP-feasible, and rounding
        // the MILP optimum is a valid discrete schedule.
        assert!(
            milp.objective_cents <= disc + 1e-6,
            "instance {k}: milp {} above discrete {disc}",
            milp.objective_cents
        );
        let net: Vec<f64> =
            (0..n).map(|t| milp.charge[t] - milp.discharge[t]).collect();
        let rounded = rounded_milp_cost(&inst, &net, &levels);
        assert!(
            disc <= rounded + 1e-9,
            "instance {k}: discrete {disc} above rounded milp {rounded}"
        );
        max_gap = max_gap.max(disc - milp.objective_cents);
    }

    // The two-slot toy from the operation contract.
    let battery = BatterySpec::new(2.0, 2.0, 4.2, 0.91).unwrap();
    let cfg = SystemConfig::new(3.0, battery, 15.0).unwrap();
    let toy = MilpInstance {
        dt_hours: 0.5,
        demand: vec![0.0, 2.0],
        pv: vec![0.0, 0.0],
        rate_c: vec![21.340, 38.588],
        fit_c: 9.0,
        cfg,
        e_init_kwh: 0.0,
    };
    let obj = solve_milp(&toy, 1e-6).unwrap().objective_cents;
    assert!((obj - 25.77).abs() <= 0.01, "toy objective {obj}");

    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "criterion 1 took {elapsed:.1} s");
    println!(
        "acceptance criterion 1 PASS: 20/20 instances within discretisation bound \
         (max gap {max_gap:.4} c), toy = {obj:.2} c, {elapsed:.2} s"
    );
}

// ---------------------------------------------------------------------
// Criterion 2: DP oracle equivalence.
// ---------------------------------------------------------------------

/// Exhaustive enumeration over all action sequences with an independent
/// reimplementation of the stage rules (exact linear transitions).
#[allow(clippy::too_many_arguments)]
fn enumerate_value(
    demand: &[f64],
    pv: &[f64],
    rates: &[f64],
    fit: f64,
    cfg: &SystemConfig,
    actions: &[f64],
    e0: f64,
    k: usize,
) -> f64 {
    if k == demand.len() {
        return 0.0;
    }
    let spec = &cfg.battery;
    let eta = spec.one_way_eff;
    let mut best = f64::INFINITY;
    for &x in actions {
        let residual = demand[k] - pv[k];
        let xx = if x < 0.0 {
            x.max(-residual.max(0.0))
        } else {
            x.min((cfg.grid_limit_kw - residual).max(0.0))
        };
        let (e_next, delivered) = if xx >= 0.0 {
            let raw = e0 + 0.5 * xx * eta;
            if raw <= spec.e_max() {
                (raw, xx)
            } else {
                let p = ((spec.e_max() - e0) / (0.5 * eta)).clamp(0.0, xx);
                (e0 + 0.5 * p * eta, p)
            }
        } else {
            let raw = e0 + 0.5 * xx / eta;
            if raw >= spec.e_min() {
                (raw, xx)
            } else {
                let p = ((e0 - spec.e_min()) * eta / 0.5).clamp(0.0, -xx);
                (e0 - 0.5 * p / eta, -p)
            }
        };
        let net = residual + delivered;
        let cost = 0.5 * (rates[k] * net.max(0.0) - fit * (-net).max(0.0));
        let total = cost + enumerate_value(demand, pv, rates, fit, cfg, actions, e_next, k + 1);
        if total < best {
            best = total;
        }
    }
    best
}

#[test]
fn criterion_2_dp_oracle_equivalence() {
    let t0 = Instant::now();
    // eta = 1/2 keeps every SOC transition exact in binary floating point,
    // so backward induction must match enumeration bit for bit.
    let battery = BatterySpec::new(2.0, 2.0, 4.0, 0.5).unwrap();
    let cfg = SystemConfig::new(3.0, battery, 20.0).unwrap();
    let grids = DpGrids::new(5, 5).unwrap();
    let eff = EfficiencyModel::linear(0.5);
    let actions: Vec<f64> = vec![-4.0, -2.0, 0.0, 2.0, 4.0];
    for k in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + k);
        let n = 8;
        // Multiples of 0.5 kW keep the residual-capped discharge actions
        // (and hence every SOC landing) exactly on the state grid.
        let demand: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=6) as f64 * 0.5).collect();
        let pv: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=4) as f64 * 0.5).collect();
        let rates: Vec<f64> = (0..n).map(|_| rng.gen_range(10.0..45.0)).collect();
        let fit = rng.gen_range(0.0..8.0);
        let day = DayInputs { demand: &demand, pv: &pv, rates_c: &rates, fit_c: fit };
        let table = backward_induction(&day, &cfg, &eff, &grids);
        for (s, &e0) in table.soc_grid.iter().enumerate() {
            let oracle = enumerate_value(&demand, &pv, &rates, fit, &cfg, &actions, e0, 0);
            assert_eq!(
                table.value[0][s], oracle,
                "instance {k} state {s}: dp {} vs enumeration {oracle}",
                table.value[0][s]
            );
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "criterion 2 took {elapsed:.1} s");
    println!(
        "acceptance criterion 2 PASS: 10/10 instances exactly equal to 5^8 enumeration, \
         {elapsed:.2} s"
    );
}

// ---------------------------------------------------------------------
// Criterion 3: perfect-forecast dominance and savings ordering.
// ---------------------------------------------------------------------

#[test]
fn criterion_3_perfect_forecast_dominance() {
    let cells = &sweep().base;
    let milp = savings_of(cells, "milp", "perfect");
    for heuristic in ["scm", "toua", "scm_toua"] {
        let h = savings_of(cells, heuristic, "perfect");
        for ((c1, m), (c2, s)) in milp.iter().zip(h.iter()) {
            assert_eq!(c1, c2);
            assert!(
                m >= &(s - 1e-6),
                "customer {c1}: milp savings {m:.2} below {heuristic} {s:.2}"
            );
        }
    }
    let med = |s: &str| median(savings_of(cells, s, "perfect").into_iter().map(|x| x.1).collect());
    let (m_milp, m_hybrid, m_scm, m_toua) =
        (med("milp"), med("scm_toua"), med("scm"), med("toua"));
    assert!(m_milp >= m_hybrid - 1e-9, "milp {m_milp} vs scm_toua {m_hybrid}");
    assert!(m_hybrid >= m_scm - 1e-9, "scm_toua {m_hybrid} vs scm {m_scm}");
    assert!(m_scm >= m_toua - 1e-9, "scm {m_scm} vs toua {m_toua}");
    println!(
        "acceptance criterion 3 PASS: milp dominates per customer; median savings \
         milp {m_milp:.2} >= scm_toua {m_hybrid:.2} >= scm {m_scm:.2} >= toua {m_toua:.2}"
    );
}

// ---------------------------------------------------------------------
// Criterion 4: forecast degradation of MILP, SCM invariant.
// ---------------------------------------------------------------------

#[test]
fn criterion_4_forecast_degradation() {
    let cells = &sweep().base;
    let perfect = savings_of(cells, "milp", "perfect");
    let persist = savings_of(cells, "milp", "persistence");
    let mut strictly_worse = 0usize;
    for ((c1, p), (c2, q)) in perfect.iter().zip(persist.iter()) {
        assert_eq!(c1, c2);
        if q < p {
            strictly_worse += 1;
        }
    }
    let needed = (perfect.len() * 9).div_ceil(10);
    assert!(
        strictly_worse >= needed,
        "only {strictly_worse}/{} customers degraded under persistence",
        perfect.len()
    );
    let scm_p = savings_of(cells, "scm", "perfect");
    let scm_q = savings_of(cells, "scm", "persistence");
    for ((c1, p), (c2, q)) in scm_p.iter().zip(scm_q.iter()) {
        assert_eq!(c1, c2);
        assert_eq!(p, q, "scm savings changed with the forecast for {c1}");
    }
    println!(
        "acceptance criterion 4 PASS: milp strictly worse under persistence for \
         {strictly_worse}/{} customers; scm savings bit-identical",
        perfect.len()
    );
}

// ---------------------------------------------------------------------
// Criterion 5: linear schedules replayed under the nonlinear model.
// ---------------------------------------------------------------------

#[test]
fn criterion_5_nonlinear_replay() {
    // Surplus-heavy day: strong midday PV fills the battery, a heavy
    // evening drains it. Two identical days give the optimiser its
    // two-day horizon.
    let cfg = SystemConfig::for_pv_size(4.0).unwrap();
    let tariff = TouTariff::origin_energy_tou();
    let mut demand = Vec::new();
    let mut pv = Vec::new();
    for _day in 0..2 {
        for slot in 0..48 {
            demand.push(if (34..46).contains(&slot) { 2.6 } else { 0.7 });
            pv.push(if (18..32).contains(&slot) { 4.0 } else { 0.0 });
        }
    }
    let d = HalfHourSeries::new(demand, 2).unwrap();
    let p = HalfHourSeries::new(pv, 2).unwrap();
    let opts = StrategyOptions::default();
    let eff = EfficiencyModel::default_nonlinear(&cfg.battery);

    let milp = run_strategy(StrategyKind::Milp, &d, &p, &d, &p, &tariff, &cfg, &opts).unwrap();
    let (_, milp_violations) = replay_schedule(&milp, &cfg.battery, &eff);
    assert!(
        !milp_violations.is_empty(),
        "expected at least one SOC bound violation replaying the linear-model schedule"
    );

    let dp = run_strategy(StrategyKind::Dp, &d, &p, &d, &p, &tariff, &cfg, &opts).unwrap();
    let (_, dp_violations) = replay_schedule(&dp, &cfg.battery, &eff);
    assert!(dp_violations.is_empty(), "dp replay violated bounds: {dp_violations:?}");
    println!(
        "acceptance criterion 5 PASS: milp replay has {} SOC-bound violations \
         (worst excess {:.4} kWh), dp replay has none",
        milp_violations.len(),
        milp_violations.iter().map(|v| v.excess_kwh).fold(0.0, f64::max)
    );
}

// ---------------------------------------------------------------------
// Criterion 6: aging ordering and monotone SOH.
// ---------------------------------------------------------------------

#[test]
fn criterion_6_aging_ordering() {
    let sweep = sweep();
    let soh = |cells: &[CellRecord], strategy: &str| -> Vec<f64> {
        cells
            .iter()
            .filter(|c| c.strategy == strategy && c.mode == "perfect")
            .map(|c| c.aging.as_ref().unwrap().soh_at_20y)
            .collect()
    };
    let dp = median(soh(&sweep.dp, "dp"));
    let milp = median(soh(&sweep.base, "milp"));
    let scm = median(soh(&sweep.base, "scm"));
    assert!(dp >= milp, "median SOH: dp {dp:.2} below milp {milp:.2}");
    assert!(dp >= scm, "median SOH: dp {dp:.2} below scm {scm:.2}");
    for cell in sweep.base.iter().chain(sweep.dp.iter()) {
        let traj = &cell.aging.as_ref().unwrap().soh_by_year;
        for w in traj.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-12,
                "SOH not monotone for {}/{}/{}",
                cell.customer,
                cell.strategy,
                cell.mode
            );
        }
    }
    println!(
        "acceptance criterion 6 PASS: median SOH(20y) dp {dp:.2}% >= milp {milp:.2}% and \
         scm {scm:.2}%; SOH monotone for all cells"
    );
}

// ---------------------------------------------------------------------
// Criterion 7: economics formulas.
// ---------------------------------------------------------------------

#[test]
fn criterion_7_economics_formulas() {
    let params =
        CostParams { inflation: 0.03, discount: 0.05, lifespan_years: 20, initial_cost: 1.0 };
    let d_eq = equivalent_discount_rate(&params);
    assert!((d_eq - 0.019417).abs() < 1e-6, "d' = {d_eq}");
    let lf = levelising_factor(&params).unwrap();
    assert!((lf - 1.320).abs() < 0.005, "LF = {lf}");

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_residual: f64 = 0.0;
    for _ in 0..100 {
        let c0 = rng.gen_range(1_000.0..30_000.0);
        let n = rng.gen_range(5..=30);
        // Keep a sign change inside the bracket.
        let inflow = rng.gen_range(c0 * 0.02..c0 * 0.9);
        let r = irr(c0, inflow, n, 0.03).unwrap();
        let residual = npv(r.rate, c0, inflow, n).abs();
        worst_residual = worst_residual.max(residual);
        assert!(residual < 1e-6, "|NPV| = {residual}");
        assert_eq!(r.rate_inflated, r.rate * 1.03 + 0.03);
    }
    println!(
        "acceptance criterion 7 PASS: d' = {d_eq:.6}, LF = {lf:.4}, \
         worst |NPV(r)| over 100 instances = {worst_residual:.2e}, r' exact"
    );
}

// ---------------------------------------------------------------------
// Criterion 8: half-cycle counter.
// ---------------------------------------------------------------------

#[test]
fn criterion_8_half_cycle_counter() {
    let floor = 0.005;
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut x: f64 = rng.gen_range(0.2..0.8);
        let mut traj = vec![x];
        for _ in 0..300 {
            // Strides above the floor so truncation never engages.
            let step = rng.gen_range(0.01..0.25) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            x = (x + step).clamp(0.0, 1.0);
            traj.push(x);
        }
        let cycles = count_half_cycles(&traj, 0.5, floor);
        let depth_sum: f64 = cycles.iter().map(|c| c.depth).sum();
        let tv: f64 = traj.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        worst = worst.max((depth_sum - tv).abs());
        assert!((depth_sum - tv).abs() < 1e-9);
    }
    let cycles = count_half_cycles(&[0.5, 1.0, 0.2], 0.5, floor);
    assert_eq!(cycles.len(), 2);
    assert_eq!(cycles[0].direction, CycleDirection::Charge);
    assert!((cycles[0].depth - 0.5).abs() < 1e-12);
    assert_eq!(cycles[1].direction, CycleDirection::Discharge);
    assert!((cycles[1].depth - 0.8).abs() < 1e-12);
    println!(
        "acceptance criterion 8 PASS: depth sums match total variation on 1000 walks \
         (worst deviation {worst:.2e}); hand-traced depths {{0.5, 0.8}}"
    );
}

// ---------------------------------------------------------------------
// Criterion 9: runtime ordering.
// ---------------------------------------------------------------------

#[test]
fn criterion_9_runtime_ordering() {
    let cohort = synth_cohort(&SynthSpec::default()).unwrap();
    let cfg = RunConfig::default();
    let times = bench_daily(&cohort[0], &cfg, 30).unwrap();
    let (scm, milp, dp) = (times["scm"], times["milp"], times["dp"]);
    assert!(scm < milp, "scm {scm:.6}s not faster than milp {milp:.6}s");
    assert!(milp < dp, "milp {milp:.6}s not faster than dp {dp:.6}s");
    println!(
        "acceptance criterion 9 PASS: median daily solve scm {:.3} ms < milp {:.3} ms < \
         dp {:.3} ms (absolute values hardware-dependent, reported not asserted)",
        scm * 1e3,
        milp * 1e3,
        dp * 1e3
    );
}

// ---------------------------------------------------------------------
// Criterion 10: byte-identical determinism of the full sweep.
// ---------------------------------------------------------------------

#[test]
fn criterion_10_full_sweep_determinism() {
    let make_cfg = |dir: &std::path::Path| {
        let mut cfg = RunConfig::default();
        cfg.cohort.customers = 2;
        cfg.run.out = dir.to_path_buf();
        // All seven strategies; smaller grids and nets keep the runtime
        // reasonable without affecting the determinism claim.
        cfg.dp.soc_levels = 31;
        cfg.dp.action_levels = 11;
        cfg.pfa.window = 24;
        cfg.pfa.hidden = 8;
        cfg.pfa.epochs = 8;
        cfg.run.save_schedules = false;
        cfg
    };
    let dir1 = TempDir::new().unwrap();
    let dir2 = TempDir::new().unwrap();
    let out1 = run_experiment(&make_cfg(dir1.path())).unwrap();
    let out2 = run_experiment(&make_cfg(dir2.path())).unwrap();
    assert!(!out1.any_failed && !out2.any_failed);
    assert_eq!(out1.cells.len(), 2 * 7 * 2, "cell count = customers x strategies x modes");
    let a = std::fs::read(dir1.path().join("aggregate.csv")).unwrap();
    let b = std::fs::read(dir2.path().join("aggregate.csv")).unwrap();
    assert_eq!(a, b, "aggregate CSVs differ between identical runs");
    println!(
        "acceptance criterion 10 PASS: two identical sweeps ({} cells) produced \
         byte-identical aggregate CSVs ({} bytes)",
        out1.cells.len(),
        a.len()
    );
}
