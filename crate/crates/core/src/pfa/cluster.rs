//! Customer clustering on normalised average-day load profiles, with the
//! generic profile shapes as the k-means centroids, and representative
//! policy selection per cluster.

use serde::{Deserialize, Serialize};

use crate::data::CustomerRecord;
use crate::error::{CoreError, Result};
use crate::series::{HalfHourSeries, SLOTS_PER_DAY};


use super::profiles::{self, ProfileKind, ALL_PROFILES};
use super::{NeuralPolicy, TrainingSet};

/// k-means outcome: refined centroids (one per generic profile), the
/// profile label of each centroid and the per-customer assignment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterModel {
    /// 48 values per centroid.
    pub centroids: Vec<Vec<f64>>,
    pub labels: Vec<ProfileKind>,
    pub assignments: Vec<usize>,
    pub customer_ids: Vec<String>,
}

/// Average daily profile of a demand series, normalised to unit energy.
pub fn normalized_average_profile(demand: &HalfHourSeries) -> [f64; SLOTS_PER_DAY] {
    let mut avg = [0.0; SLOTS_PER_DAY];
    for day in 0..demand.days() {
        for (slot, v) in demand.day_slice(day).iter().enumerate() {
            avg[slot] += v;
        }
    }
    for v in avg.iter_mut() {
        *v /= demand.days() as f64;
    }
    profiles::normalize_unit_energy(&mut avg);
    avg
}

#[cfg(test)]
fn sq_dist(a: &[f64; SLOTS_PER_DAY], b: &[f64; SLOTS_PER_DAY]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: &[Vec<f64>], p: &[f64; SLOTS_PER_DAY]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d: f64 = c.iter().zip(p.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Clusters a cohort: each customer's normalised average-day profile is
/// assigned to the nearest of the five generic centroids, then standard
/// k-means iterations refine the centroids to convergence. Empty clusters
/// keep their generic shape.
pub fn cluster_customers(records: &[CustomerRecord]) -> Result<ClusterModel> {
    if records.is_empty() {
        return Err(CoreError::InsufficientData("cannot cluster an empty cohort".into()));
    }
    let profiles_: Vec<[f64; SLOTS_PER_DAY]> =
        records.iter().map(|r| normalized_average_profile(&r.demand)).collect();
    let mut centroids: Vec<Vec<f64>> =
        ALL_PROFILES.iter().map(|k| profiles::shape(*k).to_vec()).collect();
    let mut assignments = vec![0usize; records.len()];
    for _iter in 0..100 {
        let mut changed = false;
        for (i, p) in profiles_.iter().enumerate() {
            let a = nearest(&centroids, p);
            if a != assignments[i] {
                assignments[i] = a;
                changed = true;
            }
        }
        let mut movement = 0.0;
        for (k, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<&[f64; SLOTS_PER_DAY]> = profiles_
                .iter()
                .zip(assignments.iter())
                .filter(|(_, a)| **a == k)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                continue;
            }
            let mut mean = [0.0; SLOTS_PER_DAY];
            for m in &members {
                for (s, v) in m.iter().enumerate() {
                    mean[s] += v;
                }
            }
            for v in mean.iter_mut() {
                *v /= members.len() as f64;
            }
            movement += centroid
                .iter()
                .zip(mean.iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>();
            *centroid = mean.to_vec();
        }
        if !changed && movement < 1e-12 {
            break;
        }
    }
    Ok(ClusterModel {
        centroids,
        labels: ALL_PROFILES.to_vec(),
        assignments,
        customer_ids: records.iter().map(|r| r.id.clone()).collect(),
    })
}

impl ClusterModel {
    /// Nearest-centroid assignment of a new demand profile.
    pub fn assign_profile(&self, demand: &HalfHourSeries) -> usize {
        nearest(&self.centroids, &normalized_average_profile(demand))
    }

    /// Direct assignment from a questionnaire label.
    pub fn assign_label(&self, name: &str) -> Option<usize> {
        let kind = ProfileKind::from_name(name)?;
        self.labels.iter().position(|l| *l == kind)
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, a)| **a == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Outcome of representative selection for one cluster.
#[derive(Debug)]
pub struct Representative {
    /// Index into the candidate list.
    pub winner: usize,
    /// Mean cross-member MSE per candidate (own set excluded).
    pub mean_cross_mse: Vec<f64>,
    /// Set when the cluster had a single member.
    pub singleton: bool,
}

/// Cross-tests every member policy on every other member's samples and
/// returns the argmin of the mean error. Candidates must be ordered by
/// customer id; ties break to the first (lowest id).
pub fn select_representative(
    policies: &[NeuralPolicy],
    member_sets: &[TrainingSet],
) -> Result<Representative> {
    if policies.is_empty() || policies.len() != member_sets.len() {
        return Err(CoreError::Contract(
            "representative selection needs aligned, non-empty policies and sample sets".into(),
        ));
    }
    if policies.len() == 1 {
        return Ok(Representative { winner: 0, mean_cross_mse: vec![0.0], singleton: true });
    }
    let n = policies.len();
    let mut mean_cross = vec![0.0; n];
    for (i, policy) in policies.iter().enumerate() {
        let mut acc = 0.0;
        for (j, set) in member_sets.iter().enumerate() {
            if i != j {
                acc += policy.mse_on(set);
            }
        }
        mean_cross[i] = acc / (n - 1) as f64;
    }
    let mut winner = 0;
    for i in 1..n {
        if mean_cross[i] < mean_cross[winner] {
            winner = i;
        }
    }
    Ok(Representative { winner, mean_cross_mse: mean_cross, singleton: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfa::{build_training_set, train_policy, PolicyConfig};
    use crate::schedule::Schedule;
    use crate::series::DAYS_PER_YEAR;
    use crate::tariff::TouTariff;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn record_from_shape(id: &str, kind: ProfileKind, scale: f64, noise: f64, seed: u64) -> CustomerRecord {
        let shape = profiles::shape(kind);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = Vec::with_capacity(DAYS_PER_YEAR * SLOTS_PER_DAY);
        for _day in 0..DAYS_PER_YEAR {
            for s in 0..SLOTS_PER_DAY {
                let n = 1.0 + noise * (rng.gen::<f64>() - 0.5);
                v.push((shape[s] * scale * n).max(0.0));
            }
        }
        CustomerRecord {
            id: id.into(),
            pv_kwp: 4.0,
            demand: HalfHourSeries::full_year(v).unwrap(),
            pv: HalfHourSeries::full_year(vec![0.0; DAYS_PER_YEAR * SLOTS_PER_DAY]).unwrap(),
        }
    }

    #[test]
    fn noisy_shape_lands_in_its_cluster() {
        let records: Vec<CustomerRecord> = ALL_PROFILES
            .iter()
            .enumerate()
            .map(|(i, k)| record_from_shape(&format!("c{i}"), *k, 12.0, 0.2, i as u64))
            .collect();
        let model = cluster_customers(&records).unwrap();
        for (i, kind) in ALL_PROFILES.iter().enumerate() {
            assert_eq!(model.labels[model.assignments[i]], *kind);
        }
    }

    #[test]
    fn centroid_profile_assigns_to_itself_with_zero_distance() {
        let records: Vec<CustomerRecord> = ALL_PROFILES
            .iter()
            .enumerate()
            .map(|(i, k)| record_from_shape(&format!("c{i}"), *k, 10.0, 0.0, 0))
            .collect();
        let model = cluster_customers(&records).unwrap();
        for (i, kind) in ALL_PROFILES.iter().enumerate() {
            let c = model.assignments[i];
            assert_eq!(model.labels[c], *kind);
            let p = normalized_average_profile(&records[i].demand);
            let d: f64 = model.centroids[c].iter().zip(p.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
            assert!(d < 1e-18);
        }
    }

    #[test]
    fn assignment_invariant_to_uniform_scaling() {
        let a = record_from_shape("a", ProfileKind::EveningPeak, 8.0, 0.1, 3);
        let b = record_from_shape("b", ProfileKind::EveningPeak, 40.0, 0.1, 3);
        let pa = normalized_average_profile(&a.demand);
        let pb = normalized_average_profile(&b.demand);
        assert!(sq_dist(&pa, &pb) < 1e-12);
    }

    #[test]
    fn label_assignment_passes_through() {
        let records = vec![record_from_shape("a", ProfileKind::NightFocus, 10.0, 0.1, 1)];
        let model = cluster_customers(&records).unwrap();
        let c = model.assign_label("Night focus").unwrap();
        assert_eq!(model.labels[c], ProfileKind::NightFocus);
        assert!(model.assign_label("unknown style").is_none());
    }

    #[test]
    fn representative_avoids_noise_trained_policy() {
        // Three members with the same underlying mapping; one policy is
        // trained on shuffled targets and must never win.
        let days = 25;
        let n = days * SLOTS_PER_DAY;
        let tariff = TouTariff::origin_energy_tou();
        let cfgp = PolicyConfig { window: 8, hidden: 8, epochs: 60, ..Default::default() };
        let mut sets = Vec::new();
        for seed in 0..3u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 10);
            let mut pv_vals = vec![0.0; n];
            let mut d_vals = vec![0.0; n];
            for t in 0..n {
                pv_vals[t] = rng.gen_range(0.0..4.0);
                d_vals[t] = rng.gen_range(0.1..3.0);
            }
            let pv = HalfHourSeries::new(pv_vals.clone(), days).unwrap();
            let demand = HalfHourSeries::new(d_vals.clone(), days).unwrap();
            let mut teacher = Schedule::zeros(n, 1.0, 0.5);
            for t in 1..n {
                let y = 0.5 * pv_vals[t - 1] - 0.3 * d_vals[t - 1];
                if y >= 0.0 {
                    teacher.charge[t] = y;
                } else {
                    teacher.discharge[t] = -y;
                }
            }
            sets.push(build_training_set(&teacher, &demand, &pv, &tariff, &cfgp).unwrap());
        }
        let mut policies: Vec<NeuralPolicy> =
            sets.iter().map(|s| train_policy(s, &cfgp).unwrap()).collect();
        // Poison candidate 2: retrain on reversed targets.
        let mut poisoned = sets[2].clone();
        poisoned.targets.reverse();
        policies[2] = train_policy(&poisoned, &cfgp).unwrap();
        let rep = select_representative(&policies, &sets).unwrap();
        assert_ne!(rep.winner, 2, "cross errors: {:?}", rep.mean_cross_mse);
        // Winner really is the argmin.
        for v in &rep.mean_cross_mse {
            assert!(rep.mean_cross_mse[rep.winner] <= *v);
        }
    }

    #[test]
    fn singleton_cluster_returns_member_with_flag() {
        let days = 25;
        let teacher = Schedule::zeros(days * SLOTS_PER_DAY, 1.0, 0.5);
        let demand = HalfHourSeries::new(vec![1.0; days * 48], days).unwrap();
        let pv = HalfHourSeries::new(vec![0.0; days * 48], days).unwrap();
        let cfgp = PolicyConfig { window: 8, hidden: 8, epochs: 10, ..Default::default() };
        let tariff = TouTariff::origin_energy_tou();
        let set = build_training_set(&teacher, &demand, &pv, &tariff, &cfgp).unwrap();
        let policy = train_policy(&set, &cfgp).unwrap();
        let rep = select_representative(&[policy], &[set]).unwrap();
        assert!(rep.singleton);
        assert_eq!(rep.winner, 0);
    }
}
