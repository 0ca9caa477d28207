//! Policy function approximation: small neural policies trained to imitate
//! an optimiser's battery schedule, executed closed-loop behind a SOC
//! control filter.
//!
//! Per-customer policies (PFAS) are plain feedforward networks over
//! windows of past PV, demand, tariff and SOC; cluster policies (PFAG)
//! additionally feed back their own past battery power (NARX-style) and a
//! representative network is picked per cluster by cross-member error.

pub mod cluster;
pub mod profiles;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::battery::clamp_power;
use crate::error::{CoreError, Result};
use crate::schedule::Schedule;
use crate::series::{HalfHourSeries, DT_HOURS};
use crate::sysconfig::SystemConfig;
use crate::tariff::TouTariff;

/// Network and training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    /// Input window length in slots for every feature stream.
    pub window: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Output feedback: adds a window of past battery power to the inputs.
    pub narx: bool,
    pub initial_learning_rate: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            window: 48,
            hidden: 32,
            epochs: 60,
            seed: 1,
            narx: false,
            initial_learning_rate: 0.1,
        }
    }
}

impl PolicyConfig {
    pub fn n_inputs(&self) -> usize {
        self.window * if self.narx { 5 } else { 4 }
    }
}

/// Supervised imitation data: one row per slot with enough history.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub features: Vec<Vec<f64>>,
    /// Net battery power (charge positive) at the sample slot.
    pub targets: Vec<f64>,
    /// Slots skipped for lack of history.
    pub skipped: usize,
}

/// Builds sliding-window samples from a teacher schedule: for each slot
/// `t >= window`, the features are the previous `window` slots of PV,
/// demand, tariff rate and SOC (plus past battery power in NARX mode) and
/// the target is the teacher's net battery power at `t`.
pub fn build_training_set(
    teacher: &Schedule,
    demand: &HalfHourSeries,
    pv: &HalfHourSeries,
    tariff: &TouTariff,
    config: &PolicyConfig,
) -> Result<TrainingSet> {
    let n = teacher.n_slots();
    if demand.len() != n || pv.len() != n {
        return Err(CoreError::LengthMismatch {
            expected: n,
            got: demand.len().min(pv.len()),
            what: "teacher schedule vs series".into(),
        });
    }
    let w = config.window;
    if n <= w {
        return Ok(TrainingSet { features: vec![], targets: vec![], skipped: n });
    }
    let mut features = Vec::with_capacity(n - w);
    let mut targets = Vec::with_capacity(n - w);
    for t in w..n {
        let mut row = Vec::with_capacity(config.n_inputs());
        for i in (t - w)..t {
            row.push(pv.at(i));
        }
        for i in (t - w)..t {
            row.push(demand.at(i));
        }
        for i in (t - w)..t {
            row.push(tariff.rate_c(i));
        }
        for i in (t - w)..t {
            row.push(teacher.soc[i]);
        }
        if config.narx {
            for i in (t - w)..t {
                row.push(teacher.net_battery(i));
            }
        }
        features.push(row);
        targets.push(teacher.net_battery(t));
    }
    Ok(TrainingSet { features, targets, skipped: w })
}

/// A trained policy: one hidden tanh layer, linear output, with the input
/// and target normalisation captured at training time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeuralPolicy {
    pub version: u32,
    pub config: PolicyConfig,
    w1: Vec<f64>, // hidden x inputs, row-major
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
    feat_mean: Vec<f64>,
    feat_scale: Vec<f64>,
    target_mean: f64,
    target_scale: f64,
    pub train_mse: f64,
    pub validation_mse: f64,
}

pub const POLICY_FORMAT_VERSION: u32 = 1;

impl NeuralPolicy {
    /// Raw (unfiltered) battery power proposal for one feature row.
    pub fn propose(&self, features: &[f64]) -> f64 {
        debug_assert_eq!(features.len(), self.feat_mean.len());
        let n_in = self.feat_mean.len();
        let mut acc_out = self.b2;
        for h in 0..self.b1.len() {
            let mut z = self.b1[h];
            let row = &self.w1[h * n_in..(h + 1) * n_in];
            for i in 0..n_in {
                z += row[i] * (features[i] - self.feat_mean[i]) * self.feat_scale[i];
            }
            acc_out += self.w2[h] * z.tanh();
        }
        acc_out * self.target_scale + self.target_mean
    }

    /// Mean squared error of one-step predictions on a sample set.
    pub fn mse_on(&self, set: &TrainingSet) -> f64 {
        if set.targets.is_empty() {
            return 0.0;
        }
        let mut acc = 0.0;
        for (x, y) in set.features.iter().zip(set.targets.iter()) {
            let e = self.propose(x) - y;
            acc += e * e;
        }
        acc / set.targets.len() as f64
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| CoreError::Io(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let p: Self =
            serde_json::from_str(&text).map_err(|e| CoreError::Data(e.to_string()))?;
        if p.version != POLICY_FORMAT_VERSION {
            return Err(CoreError::Data(format!("unsupported policy version {}", p.version)));
        }
        Ok(p)
    }
}

/// Trains a policy by full-batch gradient descent with a bold-driver
/// step size (grow on improvement, halve and retry on regression).
/// Deterministic for a given seed. The last tenth of the samples is held
/// out for validation.
pub fn train_policy(set: &TrainingSet, config: &PolicyConfig) -> Result<NeuralPolicy> {
    let n = set.targets.len();
    if n < 1000 {
        return Err(CoreError::InsufficientData(format!(
            "policy training needs >= 1000 samples, got {n}"
        )));
    }
    let n_in = set.features[0].len();
    if n_in != config.n_inputs() {
        return Err(CoreError::Contract(format!(
            "feature width {n_in} does not match config ({})",
            config.n_inputs()
        )));
    }
    let n_train = n - n / 10;

    // Normalisation from the training split.
    let mut feat_mean = vec![0.0; n_in];
    let mut feat_scale = vec![0.0; n_in];
    for x in &set.features[..n_train] {
        for (m, v) in feat_mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    feat_mean.iter_mut().for_each(|m| *m /= n_train as f64);
    for x in &set.features[..n_train] {
        for i in 0..n_in {
            let d = x[i] - feat_mean[i];
            feat_scale[i] += d * d;
        }
    }
    for s in feat_scale.iter_mut() {
        let sd = (*s / n_train as f64).sqrt();
        *s = if sd > 1e-9 { 1.0 / sd } else { 0.0 };
    }
    let target_mean = set.targets[..n_train].iter().sum::<f64>() / n_train as f64;
    let target_var = set.targets[..n_train]
        .iter()
        .map(|y| (y - target_mean) * (y - target_mean))
        .sum::<f64>()
        / n_train as f64;
    let target_scale = target_var.sqrt().max(1e-6);

    let h = config.hidden;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let lim1 = (6.0 / (n_in + h) as f64).sqrt();
    let lim2 = (6.0 / (h + 1) as f64).sqrt();
    let mut w1: Vec<f64> = (0..h * n_in).map(|_| rng.gen_range(-lim1..lim1)).collect();
    let mut b1 = vec![0.0; h];
    let mut w2: Vec<f64> = (0..h).map(|_| rng.gen_range(-lim2..lim2)).collect();
    let mut b2 = 0.0;

    // Pre-normalised copies of the training split.
    let norm_x: Vec<Vec<f64>> = set.features[..n_train]
        .iter()
        .map(|x| {
            (0..n_in).map(|i| (x[i] - feat_mean[i]) * feat_scale[i]).collect()
        })
        .collect();
    let norm_y: Vec<f64> =
        set.targets[..n_train].iter().map(|y| (y - target_mean) / target_scale).collect();

    let loss_of = |w1: &[f64], b1: &[f64], w2: &[f64], b2: f64| -> f64 {
        let mut acc = 0.0;
        for (x, y) in norm_x.iter().zip(norm_y.iter()) {
            let mut out = b2;
            for k in 0..h {
                let mut z = b1[k];
                let row = &w1[k * n_in..(k + 1) * n_in];
                for i in 0..n_in {
                    z += row[i] * x[i];
                }
                out += w2[k] * z.tanh();
            }
            let e = out - y;
            acc += e * e;
        }
        acc / norm_y.len() as f64
    };

    let mut lr = config.initial_learning_rate;
    let mut best_loss = loss_of(&w1, &b1, &w2, b2);
    for _epoch in 0..config.epochs {
        // Full-batch gradients.
        let mut g_w1 = vec![0.0; h * n_in];
        let mut g_b1 = vec![0.0; h];
        let mut g_w2 = vec![0.0; h];
        let mut g_b2 = 0.0;
        let mut hidden = vec![0.0; h];
        for (x, y) in norm_x.iter().zip(norm_y.iter()) {
            let mut out = b2;
            for k in 0..h {
                let mut z = b1[k];
                let row = &w1[k * n_in..(k + 1) * n_in];
                for i in 0..n_in {
                    z += row[i] * x[i];
                }
                hidden[k] = z.tanh();
                out += w2[k] * hidden[k];
            }
            let e = 2.0 * (out - y) / norm_y.len() as f64;
            g_b2 += e;
            for k in 0..h {
                g_w2[k] += e * hidden[k];
                let back = e * w2[k] * (1.0 - hidden[k] * hidden[k]);
                g_b1[k] += back;
                let row = &mut g_w1[k * n_in..(k + 1) * n_in];
                for i in 0..n_in {
                    row[i] += back * x[i];
                }
            }
        }
        if !g_b2.is_finite() {
            return Err(CoreError::Solver("policy training diverged (non-finite gradient)".into()));
        }
        // Bold driver: try the step, shrink until it improves.
        let mut stepped = false;
        for _try in 0..12 {
            let t_w1: Vec<f64> = w1.iter().zip(&g_w1).map(|(w, g)| w - lr * g).collect();
            let t_b1: Vec<f64> = b1.iter().zip(&g_b1).map(|(w, g)| w - lr * g).collect();
            let t_w2: Vec<f64> = w2.iter().zip(&g_w2).map(|(w, g)| w - lr * g).collect();
            let t_b2 = b2 - lr * g_b2;
            let loss = loss_of(&t_w1, &t_b1, &t_w2, t_b2);
            if !loss.is_finite() {
                return Err(CoreError::Solver("policy training diverged (non-finite loss)".into()));
            }
            if loss < best_loss {
                w1 = t_w1;
                b1 = t_b1;
                w2 = t_w2;
                b2 = t_b2;
                best_loss = loss;
                lr *= 1.1;
                stepped = true;
                break;
            }
            lr *= 0.5;
        }
        if !stepped && lr < 1e-12 {
            break;
        }
    }

    let mut policy = NeuralPolicy {
        version: POLICY_FORMAT_VERSION,
        config: *config,
        w1,
        b1,
        w2,
        b2,
        feat_mean,
        feat_scale,
        target_mean,
        target_scale,
        train_mse: 0.0,
        validation_mse: 0.0,
    };
    let train_slice = TrainingSet {
        features: set.features[..n_train].to_vec(),
        targets: set.targets[..n_train].to_vec(),
        skipped: 0,
    };
    let val_slice = TrainingSet {
        features: set.features[n_train..].to_vec(),
        targets: set.targets[n_train..].to_vec(),
        skipped: 0,
    };
    policy.train_mse = policy.mse_on(&train_slice);
    policy.validation_mse = policy.mse_on(&val_slice);
    Ok(policy)
}

/// SOC control filter: clips a proposed battery power so the next SOC is
/// feasible under the linear model (rate limit and SOC bounds).
pub fn control_filter(soc_kwh: f64, p_proposed_kw: f64, dt_hours: f64, cfg: &SystemConfig) -> f64 {
    clamp_power(soc_kwh, p_proposed_kw, dt_hours, &cfg.battery)
}

/// Closed-loop rollout: at each slot the policy proposes a battery power
/// from past observations (its own SOC and, in NARX mode, its own past
/// actions), the control filter clamps it, the SOC advances by the linear
/// model and the grid balances the residual. Slots with insufficient
/// history run idle.
pub fn execute_policy(
    policy: &NeuralPolicy,
    demand: &HalfHourSeries,
    pv: &HalfHourSeries,
    tariff: &TouTariff,
    cfg: &SystemConfig,
) -> Result<Schedule> {
    let n = demand.len();
    if pv.len() != n {
        return Err(CoreError::LengthMismatch {
            expected: n,
            got: pv.len(),
            what: "pv vs demand".into(),
        });
    }
    let w = policy.config.window;
    let mut s = Schedule::zeros(n, cfg.initial_soc_kwh(), DT_HOURS);
    let mut past_battery = vec![0.0; n];
    let mut row = vec![0.0; policy.config.n_inputs()];
    for t in 0..n {
        let p = if t < w {
            0.0
        } else {
            let mut k = 0;
            for i in (t - w)..t {
                row[k] = pv.at(i);
                k += 1;
            }
            for i in (t - w)..t {
                row[k] = demand.at(i);
                k += 1;
            }
            for i in (t - w)..t {
                row[k] = tariff.rate_c(i);
                k += 1;
            }
            for i in (t - w)..t {
                row[k] = s.soc[i];
                k += 1;
            }
            if policy.config.narx {
                for i in (t - w)..t {
                    row[k] = past_battery[i];
                    k += 1;
                }
            }
            policy.propose(&row)
        };
        let p = control_filter(s.soc[t], p, DT_HOURS, cfg);
        if p >= 0.0 {
            s.charge[t] = p;
        } else {
            s.discharge[t] = -p;
        }
        past_battery[t] = p;
        let net = demand.at(t) - pv.at(t) + p;
        s.grid_import[t] = net.max(0.0);
        s.grid_export[t] = (-net).max(0.0);
        s.soc[t + 1] = crate::battery::soc_step_linear(
            s.soc[t],
            s.charge[t],
            s.discharge[t],
            DT_HOURS,
            &cfg.battery,
        )
        .expect("filter guarantees one-sided flow");
    }
    Ok(s)
}
