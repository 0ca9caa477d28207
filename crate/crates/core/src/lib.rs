//! Simulation toolkit for PV-battery home energy management.
//!
//! The crate models a household with rooftop PV and a battery on a
//! time-of-use tariff, schedules the battery with one of seven strategies
//! (rule-based heuristics, MILP, dynamic programming and learned policies),
//! and evaluates each schedule financially and in terms of battery aging.
//!
//! Modules roughly follow the pipeline: input data ([`data`], [`forecast`])
//! feeds a scheduling strategy ([`heuristics`], [`milp`], [`dp`], [`pfa`]),
//! whose output [`schedule::Schedule`] is scored by [`economics`] and
//! [`degradation`].

pub mod battery;
pub mod data;
pub mod degradation;
pub mod dp;
pub mod economics;
pub mod error;
pub mod forecast;
pub mod heuristics;
pub mod milp;
pub mod pfa;
pub mod schedule;
pub mod series;
pub mod strategy;
pub mod sysconfig;
pub mod tariff;

pub use error::{CoreError, Result};
pub use schedule::Schedule;
pub use series::HalfHourSeries;
pub use sysconfig::SystemConfig;
pub use tariff::TouTariff;
