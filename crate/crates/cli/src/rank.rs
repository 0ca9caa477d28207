//! Strategy ranking across a finished run: per-dimension ranks (speed,
//! savings per forecast mode, battery health) computed from medians, with
//! ties sharing a rank.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Minimal per-cell view needed for ranking.
#[derive(Debug, Clone)]
pub struct RankInput {
    pub strategy: String,
    pub mode: String,
    pub savings: Option<f64>,
    pub soh_20y: Option<f64>,
    pub per_day_seconds: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RankRow {
    pub strategy: String,
    pub speed_rank: usize,
    pub median_per_day_seconds: f64,
    /// (mode, rank, median savings) per forecast mode present in the run.
    pub economics: Vec<(String, usize, f64)>,
    pub aging_rank: usize,
    pub median_soh_20y: f64,
}

#[derive(Debug, Clone)]
pub struct RankTable {
    pub modes: Vec<String>,
    pub rows: Vec<RankRow>,
}

fn median(values: &mut Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}

/// Competition ranking: 1 + number of strictly better entries; equal
/// medians share a rank.
fn ranks_of(values: &[f64], higher_is_better: bool) -> Vec<usize> {
    values
        .iter()
        .map(|v| {
            1 + values
                .iter()
                .filter(|w| if higher_is_better { **w > *v } else { **w < *v })
                .count()
        })
        .collect()
}

pub fn rank_strategies(cells: &[RankInput]) -> Result<RankTable> {
    let mut strategies: Vec<String> = cells.iter().map(|c| c.strategy.clone()).collect();
    strategies.sort();
    strategies.dedup();
    if strategies.len() < 2 {
        bail!("ranking needs at least two strategies, got {}", strategies.len());
    }
    let mut modes: Vec<String> = cells.iter().map(|c| c.mode.clone()).collect();
    modes.sort();
    modes.dedup();

    // Medians per strategy.
    let mut speed_median = Vec::new();
    let mut soh_median = Vec::new();
    let mut savings_median: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for s in &strategies {
        let mut speed: Vec<f64> = cells
            .iter()
            .filter(|c| &c.strategy == s)
            .filter_map(|c| c.per_day_seconds)
            .collect();
        speed_median.push(median(&mut speed).unwrap_or(f64::INFINITY));
        let mut soh: Vec<f64> =
            cells.iter().filter(|c| &c.strategy == s).filter_map(|c| c.soh_20y).collect();
        soh_median.push(median(&mut soh).unwrap_or(f64::NEG_INFINITY));
        for m in &modes {
            let mut sav: Vec<f64> = cells
                .iter()
                .filter(|c| &c.strategy == s && &c.mode == m)
                .filter_map(|c| c.savings)
                .collect();
            savings_median
                .entry(m.as_str())
                .or_default()
                .push(median(&mut sav).unwrap_or(f64::NEG_INFINITY));
        }
    }

    let speed_ranks = ranks_of(&speed_median, false);
    let soh_ranks = ranks_of(&soh_median, true);
    let econ_ranks: BTreeMap<&str, Vec<usize>> =
        savings_median.iter().map(|(m, v)| (*m, ranks_of(v, true))).collect();

    let rows = strategies
        .iter()
        .enumerate()
        .map(|(i, s)| RankRow {
            strategy: s.clone(),
            speed_rank: speed_ranks[i],
            median_per_day_seconds: speed_median[i],
            economics: modes
                .iter()
                .map(|m| {
                    (
                        m.clone(),
                        econ_ranks[m.as_str()][i],
                        savings_median[m.as_str()][i],
                    )
                })
                .collect(),
            aging_rank: soh_ranks[i],
            median_soh_20y: soh_median[i],
        })
        .collect();
    Ok(RankTable { modes, rows })
}

impl RankTable {
    pub fn to_csv(&self) -> String {
        let mut head = String::from("strategy,speed_rank,median_per_day_seconds");
        for m in &self.modes {
            head.push_str(&format!(",econ_rank_{m},median_savings_{m}"));
        }
        head.push_str(",aging_rank,median_soh_20y\n");
        let mut out = head;
        for r in &self.rows {
            out.push_str(&format!("{},{},{:.6}", r.strategy, r.speed_rank, r.median_per_day_seconds));
            for (_, rank, med) in &r.economics {
                out.push_str(&format!(",{rank},{med:.6}"));
            }
            out.push_str(&format!(",{},{:.6}\n", r.aging_rank, r.median_soh_20y));
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = format!("{:<10} {:>5} {:>12}", "strategy", "speed", "s/day");
        for m in &self.modes {
            out.push_str(&format!(" {:>14} {:>12}", format!("econ({m})"), "savings$"));
        }
        out.push_str(&format!(" {:>5} {:>9}\n", "aging", "SOH20%"));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<10} {:>5} {:>12.6}",
                r.strategy, r.speed_rank, r.median_per_day_seconds
            ));
            for (_, rank, med) in &r.economics {
                out.push_str(&format!(" {rank:>14} {med:>12.2}"));
            }
            out.push_str(&format!(" {:>5} {:>9.2}\n", r.aging_rank, r.median_soh_20y));
        }
        out
    }
}

fn parse_f64(field: &str) -> Option<f64> {
    if field.is_empty() {
        None
    } else {
        field.parse().ok()
    }
}

/// Loads the rank inputs back out of a run directory's aggregate and
/// timings CSVs.
pub fn load_run_dir(dir: &Path) -> Result<Vec<RankInput>> {
    let aggregate = std::fs::read_to_string(dir.join("aggregate.csv"))
        .with_context(|| format!("reading {}/aggregate.csv", dir.display()))?;
    let timings = std::fs::read_to_string(dir.join("timings.csv"))
        .with_context(|| format!("reading {}/timings.csv", dir.display()))?;
    let mut per_day: BTreeMap<(String, String, String), f64> = BTreeMap::new();
    for line in timings.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            continue;
        }
        if let Some(v) = parse_f64(f[4]) {
            per_day.insert((f[0].into(), f[1].into(), f[2].into()), v);
        }
    }
    let mut out = Vec::new();
    for line in aggregate.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() < 17 {
            continue;
        }
        let key = (f[0].to_string(), f[1].to_string(), f[2].to_string());
        out.push(RankInput {
            strategy: f[1].into(),
            mode: f[2].into(),
            savings: parse_f64(f[5]),
            soh_20y: parse_f64(f[11]),
            per_day_seconds: per_day.get(&key).copied(),
        });
    }
    if out.is_empty() {
        bail!("no cells found in {}", dir.display());
    }
    Ok(out)
}
