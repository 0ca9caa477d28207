use hems_core::battery::EfficiencyModel;
use hems_core::data::{synth_cohort, SynthSpec};
use hems_core::dp::{dp_schedule, DpGrids};
use hems_core::heuristics::scm_schedule;
use hems_core::milp::rolling_horizon;
use hems_core::series::HalfHourSeries;
use hems_core::tariff::TouTariff;
use std::time::Instant;

fn main() {
    let cohort = synth_cohort(&SynthSpec { customers: 1, ..Default::default() }).unwrap();
    let c = &cohort[0];
    let cfg = c.system_config().unwrap();
    let tariff = TouTariff::origin_energy_tou();
    let days = 10usize;
    let d = HalfHourSeries::new(c.demand.values()[..days * 48].to_vec(), days).unwrap();
    let p = HalfHourSeries::new(c.pv.values()[..days * 48].to_vec(), days).unwrap();

    let t0 = Instant::now();
    let _ = scm_schedule(&d, &p, &cfg).unwrap();
    println!("scm  {:>10.3} ms/day", t0.elapsed().as_secs_f64() * 1000.0 / days as f64);

    let t0 = Instant::now();
    let s = rolling_horizon(&d, &p, &tariff, &cfg, 1e-6).unwrap();
    println!("milp {:>10.3} ms/day  (cost check {:.1})", t0.elapsed().as_secs_f64() * 1000.0 / days as f64,
        hems_core::economics::annual_cost(&s, &tariff));

    let eff = EfficiencyModel::default_nonlinear(&cfg.battery);
    let t0 = Instant::now();
    let s = dp_schedule(&d, &p, &tariff, &cfg, &eff, &DpGrids::default()).unwrap();
    println!("dp   {:>10.3} ms/day  (cost check {:.1})", t0.elapsed().as_secs_f64() * 1000.0 / days as f64,
        hems_core::economics::annual_cost(&s, &tariff));
}
