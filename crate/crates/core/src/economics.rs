//! Financial evaluation: annual electricity cost, savings, levelized
//! savings and internal rate of return.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::schedule::Schedule;
use crate::series::HalfHourSeries;
use crate::tariff::TouTariff;

/// Cost parameters of the investment analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Annual electricity price inflation.
    pub inflation: f64,
    /// Discount rate.
    pub discount: f64,
    /// System lifespan in years.
    pub lifespan_years: u32,
    /// Initial investment cost in dollars.
    pub initial_cost: f64,
}

impl CostParams {
    /// Default market assumptions (3% inflation, 5% discount, 20 years)
    /// with the installed price for the given PV size.
    pub fn for_pv_size(pv_kwp: f64) -> Result<Self> {
        Ok(Self {
            inflation: 0.03,
            discount: 0.05,
            lifespan_years: 20,
            initial_cost: market_price_dollars(pv_kwp)?,
        })
    }
}

/// Installed PV-plus-battery price in dollars by PV size (battery implied
/// by the size pairing).
pub fn market_price_dollars(pv_kwp: f64) -> Result<f64> {
    let kw = pv_kwp.round() as i64;
    let thousands = match kw {
        3 => 11.0,
        4 => 11.9,
        5 => 14.9,
        6 => 16.3,
        7 => 18.3,
        8 => 19.7,
        9 => 21.1,
        10 => 22.5,
        _ => {
            return Err(CoreError::InvalidConfig(format!(
                "no market price for PV size {pv_kwp} kWp"
            )))
        }
    };
    Ok(thousands * 1000.0)
}

/// Annual electricity cost of a full-year schedule in dollars:
/// import at the ToU rate minus export at the feed-in tariff, plus the
/// daily fixed charge.
pub fn annual_cost(schedule: &Schedule, tariff: &TouTariff) -> f64 {
    let mut cents = 0.0;
    for t in 0..schedule.n_slots() {
        cents += schedule.dt_hours
            * (tariff.rate_c(t) * schedule.grid_import[t] - tariff.fit_c * schedule.grid_export[t]);
    }
    let days = schedule.n_slots() as f64 * schedule.dt_hours / 24.0;
    cents / 100.0 + days * tariff.fixed_charge_per_day
}

/// Gross feed-in revenue of a schedule in dollars (already netted inside
/// [`annual_cost`]; reported separately for the ledger).
pub fn fit_revenue(schedule: &Schedule, tariff: &TouTariff) -> f64 {
    let cents: f64 = (0..schedule.n_slots())
        .map(|t| schedule.dt_hours * tariff.fit_c * schedule.grid_export[t])
        .sum();
    cents / 100.0
}

/// Cost of serving the demand with no PV or battery at all.
pub fn baseline_cost(demand: &HalfHourSeries, tariff: &TouTariff) -> f64 {
    let mut s = Schedule::zeros(demand.len(), 0.0, crate::series::DT_HOURS);
    s.grid_import.copy_from_slice(demand.values());
    annual_cost(&s, tariff)
}

/// Annual cashflow bookkeeping for one customer/strategy cell.
///
/// `savings = cost_without_der - cost_with_der`. Export revenue is already
/// netted inside the DER cost, so the separate FiT term of the cash inflow
/// is zero by construction and the gross figure is carried for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CashflowLedger {
    pub cost_without_der: f64,
    pub cost_with_der: f64,
    pub savings: f64,
    pub fit_revenue_gross: f64,
    /// Total annual cash inflow (savings; FiT netted).
    pub cash_inflow: f64,
}

impl CashflowLedger {
    pub fn new(cost_without_der: f64, cost_with_der: f64, fit_revenue_gross: f64) -> Self {
        let savings = cost_without_der - cost_with_der;
        Self {
            cost_without_der,
            cost_with_der,
            savings,
            fit_revenue_gross,
            cash_inflow: savings,
        }
    }
}

/// Equivalent discount rate under price inflation: `(d - e) / (1 + e)`.
pub fn equivalent_discount_rate(params: &CostParams) -> f64 {
    (params.discount - params.inflation) / (1.0 + params.inflation)
}

fn annuity_factor(rate: f64, n: u32) -> f64 {
    let g = (1.0 + rate).powi(n as i32);
    (g - 1.0) / (rate * g)
}

/// Levelising factor converting an inflating annual saving into an
/// equivalent constant annuity over the lifespan.
pub fn levelising_factor(params: &CostParams) -> Result<f64> {
    let d_eq = equivalent_discount_rate(params);
    if d_eq <= 0.0 {
        return Err(CoreError::Economics(format!(
            "equivalent discount rate {d_eq} <= 0; levelising factor undefined"
        )));
    }
    let n = params.lifespan_years;
    Ok(annuity_factor(d_eq, n) / annuity_factor(params.discount, n))
}

/// Levelized total annual cost savings.
pub fn levelized_savings(cash_inflow: f64, params: &CostParams) -> Result<f64> {
    Ok(levelising_factor(params)? * cash_inflow)
}

/// Net present value of `-c0` followed by `n` equal annual inflows.
pub fn npv(rate: f64, c0: f64, annual_inflow: f64, n: u32) -> f64 {
    let mut acc = -c0;
    for k in 1..=n {
        acc += annual_inflow / (1.0 + rate).powi(k as i32);
    }
    acc
}

/// Internal rate of return outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrrResult {
    /// Rate at which the NPV of the investment is zero.
    pub rate: f64,
    /// Rate adjusted for price inflation: `r * (1 + e) + e`.
    pub rate_inflated: f64,
}

/// Solves for the discount rate with zero NPV by bisection on
/// `[-0.99, 10]`, to `|NPV| < 1e-6`.
pub fn irr(c0: f64, annual_inflow: f64, n: u32, inflation: f64) -> Result<IrrResult> {
    if !(annual_inflow > 0.0) {
        return Err(CoreError::Economics(format!(
            "IRR requires a positive annual inflow, got {annual_inflow}"
        )));
    }
    let (mut lo, mut hi) = (-0.99_f64, 10.0_f64);
    let f_lo = npv(lo, c0, annual_inflow, n);
    let f_hi = npv(hi, c0, annual_inflow, n);
    if f_lo.signum() == f_hi.signum() {
        return Err(CoreError::Economics(
            "no sign change on [-0.99, 10]; IRR does not exist in the bracket".into(),
        ));
    }
    let mut mid = 0.0;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let f_mid = npv(mid, c0, annual_inflow, n);
        if f_mid.abs() < 1e-6 {
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(IrrResult { rate: mid, rate_inflated: mid * (1.0 + inflation) + inflation })
}

/// Per-cell economics output persisted by the experiment runner.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EconomicsRecord {
    pub customer: String,
    pub strategy: String,
    pub forecast: String,
    pub annual_cost: f64,
    pub baseline_cost: f64,
    pub savings: f64,
    pub fit_revenue: f64,
    pub levelized_savings: f64,
    pub irr: Option<f64>,
    pub irr_inflated: Option<f64>,
    /// IRR computed from the levelized savings instead of the raw inflow.
    pub irr_levelized: Option<f64>,
}

/// Evaluates the full ledger for one schedule.
pub fn evaluate(
    schedule: &Schedule,
    demand: &HalfHourSeries,
    tariff: &TouTariff,
    params: &CostParams,
) -> Result<(CashflowLedger, f64, Option<IrrResult>, Option<f64>)> {
    let ledger = CashflowLedger::new(
        baseline_cost(demand, tariff),
        annual_cost(schedule, tariff),
        fit_revenue(schedule, tariff),
    );
    let lev = levelized_savings(ledger.cash_inflow, params)?;
    let irr_plain = if ledger.cash_inflow > 0.0 {
        irr(params.initial_cost, ledger.cash_inflow, params.lifespan_years, params.inflation).ok()
    } else {
        None
    };
    let irr_lev = if lev > 0.0 {
        irr(params.initial_cost, lev, params.lifespan_years, params.inflation)
            .ok()
            .map(|r| r.rate)
    } else {
        None
    };
    Ok((ledger, lev, irr_plain, irr_lev))
}
