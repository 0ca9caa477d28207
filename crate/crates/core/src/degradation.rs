//! Battery aging: half-cycle counting over the SOC trajectory, calendar
//! plus cyclic degradation superposition, and SOH/lifetime projection.

use serde::{Deserialize, Serialize};

use crate::battery::BatterySpec;
use crate::schedule::Schedule;

/// Aging model parameters. The defaults are engineering stand-ins
/// (the battery vendor values are not public), all overridable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgingParams {
    /// Years of idle storage until 20% capacity loss.
    pub t_cal_years: f64,
    /// Cycle life curve `k_cyc(DOC) = a * DOC^(-b)`: equivalent full
    /// cycles until 20% loss as a function of cycle depth.
    pub kcyc_a: f64,
    pub kcyc_b: f64,
    /// Normalised capacity at end of life.
    pub v_end: f64,
    /// Minimum SOC swing that counts as a half-cycle (fraction of rated).
    pub depth_floor: f64,
}

impl Default for AgingParams {
    fn default() -> Self {
        Self { t_cal_years: 15.0, kcyc_a: 5000.0, kcyc_b: 0.8, v_end: 0.8, depth_floor: 0.005 }
    }
}

impl AgingParams {
    /// Equivalent full cycles to 20% loss when cycling at the given depth.
    pub fn k_cyc(&self, doc: f64) -> f64 {
        self.kcyc_a * doc.powf(-self.kcyc_b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleDirection {
    Charge,
    Discharge,
}

/// One monotone SOC excursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfCycle {
    /// SOC swing as a fraction of rated capacity, in (0, 1].
    pub depth: f64,
    pub direction: CycleDirection,
    /// Mean C-rate over the excursion.
    pub mean_c_rate: f64,
}

/// Accumulated age and remaining capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgingState {
    /// Normalised age: 1.0 corresponds to 20% capacity loss.
    pub age: f64,
    /// Normalised capacity `v = 1 - (1 - v_end) * age`.
    pub capacity_norm: f64,
    pub c_max_kwh: f64,
    pub soh_percent: f64,
}

impl AgingState {
    pub fn fresh(rated_kwh: f64) -> Self {
        Self { age: 0.0, capacity_norm: 1.0, c_max_kwh: rated_kwh, soh_percent: 100.0 }
    }
}

/// Splits a SOC-fraction trajectory at its local extrema; every monotone
/// run with swing at least `depth_floor` becomes one half-cycle.
///
/// Runs below the floor are dropped without merging their neighbours.
pub fn count_half_cycles(
    soc_fractions: &[f64],
    dt_hours: f64,
    depth_floor: f64,
) -> Vec<HalfCycle> {
    let mut out = Vec::new();
    if soc_fractions.len() < 2 {
        return out;
    }
    let mut run_start_idx = 0usize;
    let mut run_start = soc_fractions[0];
    let mut prev = soc_fractions[0];
    let mut dir: i8 = 0;
    let emit = |from: f64, to: f64, steps: usize, out: &mut Vec<HalfCycle>| {
        let depth = (to - from).abs();
        if depth >= depth_floor && steps > 0 {
            out.push(HalfCycle {
                depth,
                direction: if to > from { CycleDirection::Charge } else { CycleDirection::Discharge },
                mean_c_rate: depth / (steps as f64 * dt_hours),
            });
        }
    };
    for (i, &x) in soc_fractions.iter().enumerate().skip(1) {
        let step_dir: i8 = if x > prev {
            1
        } else if x < prev {
            -1
        } else {
            0
        };
        if step_dir != 0 {
            if dir == 0 {
                dir = step_dir;
            } else if step_dir != dir {
                // Turning point: close out the run ending at the previous sample.
                emit(run_start, prev, i - 1 - run_start_idx, &mut out);
                run_start = prev;
                run_start_idx = i - 1;
                dir = step_dir;
            }
        }
        prev = x;
    }
    if dir != 0 {
        emit(run_start, prev, soc_fractions.len() - 1 - run_start_idx, &mut out);
    }
    out
}

/// Advances the aging state by `dt_years` of calendar time plus the given
/// half-cycles: calendar aging adds `dt / t_cal`, each half-cycle of depth
/// `D` adds `0.5 * D / k_cyc(D)` (half the weight of an equivalent full
/// cycle at that depth).
pub fn step_aging(
    state: &AgingState,
    dt_years: f64,
    half_cycles: &[HalfCycle],
    params: &AgingParams,
    rated_kwh: f64,
) -> AgingState {
    let mut da = dt_years / params.t_cal_years;
    for hc in half_cycles {
        da += 0.5 * hc.depth / params.k_cyc(hc.depth);
    }
    let age = state.age + da;
    let capacity_norm = (1.0 - (1.0 - params.v_end) * age).max(0.0);
    AgingState {
        age,
        capacity_norm,
        c_max_kwh: capacity_norm * rated_kwh,
        soh_percent: 100.0 * capacity_norm,
    }
}

/// Multi-year aging projection of one yearly schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgingReport {
    /// SOH in percent at the end of each year; index 0 is the fresh state.
    pub soh_by_year: Vec<f64>,
    pub fec_per_year: f64,
    /// Depth-weighted mean half-cycle depth.
    pub mean_doc: f64,
    /// First year the SOH reaches 80%, capped at the simulation horizon.
    pub expected_lifetime_years: u32,
    pub soh_at_20y: f64,
}

/// Simulation horizon in years.
pub const AGING_HORIZON_YEARS: u32 = 25;

/// Replays one year of operation repeatedly, accumulating calendar and
/// cyclic aging, and reports SOH trajectory, annual full equivalent
/// cycles, mean cycle depth and expected lifetime at 80% SOH.
pub fn simulate_aging(
    year_schedule: &Schedule,
    spec: &BatterySpec,
    params: &AgingParams,
) -> AgingReport {
    let rated = spec.nominal_kwh;
    let fractions: Vec<f64> = year_schedule.soc.iter().map(|e| e / rated).collect();
    let cycles = count_half_cycles(&fractions, year_schedule.dt_hours, params.depth_floor);

    let fec_per_year = year_schedule.battery_throughput_kwh() / (2.0 * rated);
    let depth_sum: f64 = cycles.iter().map(|c| c.depth).sum();
    let mean_doc = if depth_sum > 0.0 {
        cycles.iter().map(|c| c.depth * c.depth).sum::<f64>() / depth_sum
    } else {
        0.0
    };

    let mut state = AgingState::fresh(rated);
    let mut soh_by_year = Vec::with_capacity(AGING_HORIZON_YEARS as usize + 1);
    soh_by_year.push(state.soh_percent);
    let mut lifetime = AGING_HORIZON_YEARS;
    for year in 1..=AGING_HORIZON_YEARS {
        state = step_aging(&state, 1.0, &cycles, params, rated);
        soh_by_year.push(state.soh_percent);
        if state.soh_percent <= 80.0 + 1e-9 && lifetime == AGING_HORIZON_YEARS {
            lifetime = year;
        }
    }
    AgingReport {
        soh_at_20y: soh_by_year[20.min(AGING_HORIZON_YEARS as usize)],
        soh_by_year,
        fec_per_year,
        mean_doc,
        expected_lifetime_years: lifetime,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_trajectory_has_no_cycles() {
        assert!(count_half_cycles(&[0.4; 10], 0.5, 0.005).is_empty());
    }

    #[test]
    fn hand_traced_two_half_cycles() {
        let hc = count_half_cycles(&[0.5, 1.0, 0.2], 0.5, 0.005);
        assert_eq!(hc.len(), 2);
        assert_eq!(hc[0].direction, CycleDirection::Charge);
        assert!((hc[0].depth - 0.5).abs() < 1e-12);
        assert_eq!(hc[1].direction, CycleDirection::Discharge);
        assert!((hc[1].depth - 0.8).abs() < 1e-12);
        // 0.5 swing over one half-hour step: 1 C.
        assert!((hc[0].mean_c_rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn daily_square_wave_counts_365_cycles() {
        let mut traj = Vec::new();
        for _ in 0..365 {
            traj.extend_from_slice(&[0.1; 24]);
            traj.extend_from_slice(&[0.9; 24]);
        }
        traj.push(0.1);
        let hc = count_half_cycles(&traj, 0.5, 0.005);
        let charges = hc.iter().filter(|c| c.direction == CycleDirection::Charge).count();
        let discharges = hc.len() - charges;
        assert_eq!(charges, 365);
        assert_eq!(discharges, 365);
        assert!(hc.iter().all(|c| (c.depth - 0.8).abs() < 1e-12));
    }

    #[test]
    fn depth_sum_equals_total_variation_on_random_walks() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let mut x: f64 = 0.5;
            let mut traj = vec![x];
            for _ in 0..200 {
                // Steps comfortably above the default depth floor.
                let step = rng.gen_range(0.01..0.2) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                x = (x + step).clamp(0.0, 1.0);
                traj.push(x);
            }
            let hc = count_half_cycles(&traj, 0.5, 0.005);
            let depth_sum: f64 = hc.iter().map(|c| c.depth).sum();
            let tv: f64 = traj.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
            assert!((depth_sum - tv).abs() < 1e-9, "{depth_sum} vs {tv}");
        }
    }

    #[test]
    fn calendar_aging_reaches_twenty_percent_at_t_cal() {
        let params = AgingParams::default();
        let state = AgingState::fresh(6.5);
        let aged = step_aging(&state, params.t_cal_years, &[], &params, 6.5);
        assert!((aged.age - 1.0).abs() < 1e-12);
        assert!((aged.soh_percent - 80.0).abs() < 1e-9);
        assert!((aged.c_max_kwh - 0.8 * 6.5).abs() < 1e-9);
    }

    #[test]
    fn full_cycle_at_unit_depth_loses_one_part_in_5000() {
        let params = AgingParams::default();
        let full_cycle = [
            HalfCycle { depth: 1.0, direction: CycleDirection::Charge, mean_c_rate: 0.5 },
            HalfCycle { depth: 1.0, direction: CycleDirection::Discharge, mean_c_rate: 0.5 },
        ];
        let state = AgingState::fresh(1.0);
        let aged = step_aging(&state, 0.0, &full_cycle, &params, 1.0);
        assert!((aged.age - 1.0 / 5000.0).abs() < 1e-15);
        // Capacity loss relative to rated: 0.2 / 5000.
        assert!(((1.0 - aged.capacity_norm) - 0.2 / 5000.0).abs() < 1e-12);
    }

    #[test]
    fn step_with_nothing_is_identity() {
        let params = AgingParams::default();
        let state = AgingState::fresh(6.5);
        assert_eq!(step_aging(&state, 0.0, &[], &params, 6.5), state);
    }

    #[test]
    fn idle_battery_lives_t_cal_years() {
        let spec = BatterySpec::lg_chem_resu_6_5();
        let s = Schedule::zeros(365 * 48, 3.25, 0.5);
        let report = simulate_aging(&s, &spec, &AgingParams::default());
        assert_eq!(report.fec_per_year, 0.0);
        assert_eq!(report.expected_lifetime_years, 15);
        assert_eq!(report.mean_doc, 0.0);
        for w in report.soh_by_year.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn one_full_usable_cycle_per_day_fec() {
        // Lossless battery for clean arithmetic: charge 2.95 kW for 4 slots
        // (5.9 kWh) then discharge it, every day.
        let spec = BatterySpec::new(6.5, 5.9, 4.2, 1.0).unwrap();
        let n = 365 * 48;
        let mut s = Schedule::zeros(n, spec.e_min(), 0.5);
        for day in 0..365 {
            for k in 0..4 {
                s.charge[day * 48 + k] = 2.95;
                s.discharge[day * 48 + 24 + k] = 2.95;
            }
        }
        let mut e = spec.e_min();
        for t in 0..n {
            e += 0.5 * (s.charge[t] - s.discharge[t]);
            s.soc[t + 1] = e;
        }
        let report = simulate_aging(&s, &spec, &AgingParams::default());
        let expect = 365.0 * 5.9 / 6.5;
        assert!((report.fec_per_year - expect).abs() < 1e-9);
        // Throughput consistency.
        assert!(
            (report.fec_per_year * 2.0 * spec.nominal_kwh - s.battery_throughput_kwh()).abs()
                < 1e-6
        );
        assert!((report.mean_doc - 5.9 / 6.5).abs() < 1e-9);
    }

    #[test]
    fn doubling_cycles_never_raises_soh() {
        let params = AgingParams::default();
        let cycles = vec![
            HalfCycle { depth: 0.4, direction: CycleDirection::Charge, mean_c_rate: 0.2 },
            HalfCycle { depth: 0.4, direction: CycleDirection::Discharge, mean_c_rate: 0.2 },
        ];
        let doubled: Vec<_> = cycles.iter().chain(cycles.iter()).cloned().collect();
        let s0 = AgingState::fresh(1.0);
        let once = step_aging(&s0, 1.0, &cycles, &params, 1.0);
        let twice = step_aging(&s0, 1.0, &doubled, &params, 1.0);
        assert!(twice.soh_percent < once.soh_percent);
    }
}
