//! Stochastic gradient descent over flat parameter vectors.
//!
//! Models expose their parameters as one `Vec<f64>` plus a per-parameter L2
//! weight, a score function, and the sparse gradient of that score. The
//! trainer minimizes
//!
//! ```text
//! L(θ) = Σ_samples (r − score)² + Σ_k λ_k θ_k²
//! ```
//!
//! where `λ_k` is the L2 weight of parameter `k` times the number of samples
//! whose score depends on it. Per-sample steps are
//! `θ_k += lr · (e · ∂score/∂θ_k − (λ_k / n_k) θ_k)`, an unbiased estimate of the
//! half-gradient over one epoch. After each
//! epoch the full objective is recomputed: if it went up the epoch is rolled
//! back and the rate halved, otherwise the rate grows by 5%. The recorded loss
//! sequence is therefore non-increasing.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::engine::{early_stop_check, EarlyStopMetric, HyperParams};
use crate::error::{Error, Result};
use crate::table::{RatingScale, RatingTable};

/// Fraction of training rows held out for early stopping.
pub const VALIDATION_FRACTION: f64 = 0.05;
/// Non-improving validation evaluations tolerated before stopping.
pub const PATIENCE: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub user: usize,
    pub item: usize,
    pub rating: f64,
    /// Active global conditions; empty for context-free data.
    pub context: Box<[usize]>,
}

impl Sample {
    pub fn from_table(table: &RatingTable) -> Vec<Sample> {
        table
            .rows()
            .iter()
            .map(|r| Sample {
                user: r.user,
                item: r.item,
                rating: r.rating,
                context: r.situation.conditions().into(),
            })
            .collect()
    }
}

pub trait SgdModel: Clone {
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];
    /// L2 weight of every parameter.
    fn reg(&self) -> &[f64];
    /// Value the L2 penalty of parameter `k` pulls towards.
    fn reg_center(&self, _k: usize) -> f64 {
        0.0
    }
    fn score(&self, s: &Sample) -> f64;
    /// Appends `(k, ∂score/∂θ_k)`; each `k` at most once.
    fn score_grad(&self, s: &Sample, out: &mut Vec<(usize, f64)>);
    /// Restores constraints after an update.
    fn project(&mut self) {}
    /// Effective L2 weight of every parameter over `samples`. Defaults to the
    /// per-parameter weight times the number of samples touching it.
    fn penalty_weights(&self, samples: &[Sample]) -> Vec<f64> {
        touch_counts(self, samples)
            .into_iter()
            .zip(self.reg())
            .map(|(n, l)| n as f64 * l)
            .collect()
    }
}

/// Number of samples whose score gradient lists each parameter.
pub fn touch_counts<M: SgdModel>(model: &M, samples: &[Sample]) -> Vec<usize> {
    let mut counts = vec![0; model.params().len()];
    let mut buf = Vec::new();
    for s in samples {
        buf.clear();
        model.score_grad(s, &mut buf);
        for &(k, _) in &buf {
            counts[k] += 1;
        }
    }
    counts
}

pub fn objective<M: SgdModel>(model: &M, samples: &[Sample]) -> f64 {
    objective_with(model, samples, &model.penalty_weights(samples))
}

fn objective_with<M: SgdModel>(model: &M, samples: &[Sample], weights: &[f64]) -> f64 {
    let data: f64 = samples
        .iter()
        .map(|s| {
            let e = s.rating - model.score(s);
            e * e
        })
        .sum();
    let reg: f64 = model
        .params()
        .iter()
        .zip(weights)
        .enumerate()
        .map(|(k, (t, l))| {
            let d = t - model.reg_center(k);
            l * d * d
        })
        .sum();
    data + reg
}

/// Full-batch gradient of [`objective`].
pub fn objective_gradient<M: SgdModel>(model: &M, samples: &[Sample]) -> Vec<f64> {
    let mut grad: Vec<f64> = model
        .params()
        .iter()
        .zip(model.penalty_weights(samples))
        .enumerate()
        .map(|(k, (t, l))| 2.0 * l * (t - model.reg_center(k)))
        .collect();
    let mut buf = Vec::new();
    for s in samples {
        let e = s.rating - model.score(s);
        buf.clear();
        model.score_grad(s, &mut buf);
        for &(k, g) in &buf {
            grad[k] -= 2.0 * e * g;
        }
    }
    grad
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Training objective after each epoch (rolled-back epochs repeat the
    /// previous value).
    pub losses: Vec<f64>,
    pub validation: Vec<f64>,
    pub epochs: usize,
    pub stopped_early: bool,
    pub final_learn_rate: f64,
}

/// Seeded hold-out slice for early stopping; `(train, validation)` indices.
pub(crate) fn validation_split(
    n: usize,
    early_stop: Option<EarlyStopMetric>,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    let held = match early_stop {
        Some(_) => (n as f64 * VALIDATION_FRACTION).floor() as usize,
        None => 0,
    };
    if held == 0 || held >= n {
        return ((0..n).collect(), Vec::new());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut validation = order[..held].to_vec();
    let mut train = order[held..].to_vec();
    validation.sort_unstable();
    train.sort_unstable();
    (train, validation)
}

fn validation_error<M: SgdModel>(
    model: &M,
    samples: &[Sample],
    metric: EarlyStopMetric,
    scale: RatingScale,
) -> f64 {
    let n = samples.len() as f64;
    let errors = samples
        .iter()
        .map(|s| s.rating - scale.clamp(model.score(s)));
    match metric {
        EarlyStopMetric::Mae => errors.map(f64::abs).sum::<f64>() / n,
        EarlyStopMetric::Rmse => (errors.map(|e| e * e).sum::<f64>() / n).sqrt(),
    }
}

pub fn train<M: SgdModel>(
    model: &mut M,
    samples: &[Sample],
    hp: &HyperParams,
    scale: RatingScale,
    rng: &mut ChaCha8Rng,
) -> Result<TrainReport> {
    let (train_idx, val_idx) = validation_split(samples.len(), hp.early_stop, rng);
    let train_set: Vec<Sample> = train_idx.iter().map(|&i| samples[i].clone()).collect();
    let val_set: Vec<Sample> = val_idx.iter().map(|&i| samples[i].clone()).collect();

    let mut lr = hp.learn_rate;
    let mut report = TrainReport::default();
    let weights = model.penalty_weights(&train_set);
    let decay: Vec<f64> = touch_counts(model, &train_set)
        .into_iter()
        .zip(&weights)
        .map(|(n, w)| if n == 0 { 0.0 } else { w / n as f64 })
        .collect();
    let center: Vec<f64> = (0..weights.len()).map(|k| model.reg_center(k)).collect();
    let mut prev_loss = objective_with(model, &train_set, &weights);
    let mut best: Option<(f64, M)> = None;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut grad = Vec::new();
    let mut step = Vec::new();

    for epoch in 1..=hp.num_iterations {
        let snapshot = model.clone();
        order.shuffle(rng);
        for &k in &order {
            let s = &train_set[k];
            let e = s.rating - model.score(s);
            grad.clear();
            model.score_grad(s, &mut grad);
            let params = model.params();
            step.clear();
            step.extend(
                grad.iter()
                    .map(|&(j, g)| (j, lr * (e * g - decay[j] * (params[j] - center[j])))),
            );
            let params = model.params_mut();
            for &(j, d) in &step {
                params[j] += d;
            }
            model.project();
        }
        if model.params().iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged(epoch));
        }
        let loss = objective_with(model, &train_set, &weights);
        if loss > prev_loss {
            *model = snapshot;
            lr *= 0.5;
        } else {
            prev_loss = loss;
            lr *= 1.05;
        }
        report.losses.push(prev_loss);
        report.epochs = epoch;
        if hp.verbose {
            log::info!("epoch {epoch}: loss {prev_loss:.6}, learn rate {lr:.6}");
        }

        if let (Some(metric), false) = (hp.early_stop, val_set.is_empty()) {
            let err = validation_error(model, &val_set, metric, scale);
            report.validation.push(err);
            if best.as_ref().is_none_or(|(b, _)| err < *b) {
                best = Some((err, model.clone()));
            }
            if early_stop_check(&report.validation, PATIENCE) {
                report.stopped_early = true;
                break;
            }
        }
    }
    if let Some((_, m)) = best {
        *model = m;
    }
    report.final_learn_rate = lr;
    Ok(report)
}

/// Biases, user and item factors, and a model-specific tail, in one vector:
/// `[b_u | b_i | P | Q | extra]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorBase {
    pub params: Vec<f64>,
    pub reg: Vec<f64>,
    pub mu: f64,
    pub num_users: usize,
    pub num_items: usize,
    pub factors: usize,
}

impl FactorBase {
    /// Factors ~ N(0, init_std²) drawn P then Q; biases and the tail start at 0.
    pub fn init(
        num_users: usize,
        num_items: usize,
        extra: usize,
        mu: f64,
        hp: &HyperParams,
        rng: &mut impl Rng,
    ) -> Self {
        let f = hp.num_factors;
        let mut params = vec![0.0; num_users + num_items + (num_users + num_items) * f + extra];
        let normal = Normal::new(0.0, hp.init_std).expect("init_std validated");
        let start = num_users + num_items;
        for v in &mut params[start..start + (num_users + num_items) * f] {
            *v = normal.sample(rng);
        }
        let mut reg = Vec::with_capacity(params.len());
        reg.extend(std::iter::repeat_n(hp.reg_user, num_users));
        reg.extend(std::iter::repeat_n(hp.reg_item, num_items));
        reg.extend(std::iter::repeat_n(hp.reg_user, num_users * f));
        reg.extend(std::iter::repeat_n(hp.reg_item, num_items * f));
        reg.extend(std::iter::repeat_n(hp.reg_context, extra));
        Self {
            params,
            reg,
            mu,
            num_users,
            num_items,
            factors: f,
        }
    }

    pub fn user_bias_at(&self, u: usize) -> usize {
        u
    }

    pub fn item_bias_at(&self, i: usize) -> usize {
        self.num_users + i
    }

    pub fn p_at(&self, u: usize) -> usize {
        self.num_users + self.num_items + u * self.factors
    }

    pub fn q_at(&self, i: usize) -> usize {
        self.num_users + self.num_items + (self.num_users + i) * self.factors
    }

    pub fn extra_at(&self) -> usize {
        self.num_users + self.num_items + (self.num_users + self.num_items) * self.factors
    }

    pub fn knows_user(&self, u: usize) -> bool {
        u < self.num_users
    }

    pub fn knows_item(&self, i: usize) -> bool {
        i < self.num_items
    }

    pub fn p(&self, u: usize) -> &[f64] {
        let at = self.p_at(u);
        &self.params[at..at + self.factors]
    }

    pub fn q(&self, i: usize) -> &[f64] {
        let at = self.q_at(i);
        &self.params[at..at + self.factors]
    }

    pub fn user_bias(&self, u: usize) -> f64 {
        if self.knows_user(u) {
            self.params[u]
        } else {
            0.0
        }
    }

    pub fn item_bias(&self, i: usize) -> f64 {
        if self.knows_item(i) {
            self.params[self.num_users + i]
        } else {
            0.0
        }
    }

    /// `p_u · q_i`, zero for cold users or items.
    pub fn dot(&self, u: usize, i: usize) -> f64 {
        if !self.knows_user(u) || !self.knows_item(i) {
            return 0.0;
        }
        self.p(u).iter().zip(self.q(i)).map(|(a, b)| a * b).sum()
    }

    /// `μ + b_u + b_i + p_u·q_i`.
    pub fn biased_score(&self, u: usize, i: usize) -> f64 {
        self.mu + self.user_bias(u) + self.item_bias(i) + self.dot(u, i)
    }

    /// Gradient of `scale · (b_u + b_i + p_u·q_i)` (biases only when `biased`).
    pub fn push_grad(
        &self,
        u: usize,
        i: usize,
        scale: f64,
        biased: bool,
        out: &mut Vec<(usize, f64)>,
    ) {
        let (known_u, known_i) = (self.knows_user(u), self.knows_item(i));
        if biased {
            if known_u {
                out.push((self.user_bias_at(u), scale));
            }
            if known_i {
                out.push((self.item_bias_at(i), scale));
            }
        }
        if known_u && known_i {
            let (pu, qi) = (self.p_at(u), self.q_at(i));
            for k in 0..self.factors {
                out.push((pu + k, scale * self.params[qi + k]));
                out.push((qi + k, scale * self.params[pu + k]));
            }
        }
    }

    /// Zeroes biases and factors of users and items absent from training, so
    /// they score as cold.
    pub fn forget_unseen(&mut self, seen_users: &[bool], seen_items: &[bool]) {
        for (u, _) in seen_users.iter().enumerate().filter(|(_, s)| !**s) {
            self.params[u] = 0.0;
            let at = self.p_at(u);
            self.params[at..at + self.factors].fill(0.0);
        }
        for (i, _) in seen_items.iter().enumerate().filter(|(_, s)| !**s) {
            self.params[self.num_users + i] = 0.0;
            let at = self.q_at(i);
            self.params[at..at + self.factors].fill(0.0);
        }
    }
}

pub(crate) fn seen(
    samples: &[Sample],
    num_users: usize,
    num_items: usize,
) -> (Vec<bool>, Vec<bool>) {
    let mut users = vec![false; num_users];
    let mut items = vec![false; num_items];
    for s in samples {
        users[s.user] = true;
        items[s.item] = true;
    }
    (users, items)
}

pub(crate) fn mean_rating(samples: &[Sample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.rating).sum::<f64>() / samples.len() as f64
}

/// Central finite-difference check of [`objective_gradient`]; returns the
/// worst relative error `|a − n| / max(|a|, |n|, 1e-3)` over all parameters.
pub fn gradient_check<M: SgdModel>(model: &M, samples: &[Sample], step: f64) -> f64 {
    let analytic = objective_gradient(model, samples);
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for k in 0..model.params().len() {
        let orig = probe.params()[k];
        probe.params_mut()[k] = orig + step;
        let up = objective(&probe, samples);
        probe.params_mut()[k] = orig - step;
        let down = objective(&probe, samples);
        probe.params_mut()[k] = orig;
        let numeric = (up - down) / (2.0 * step);
        let denom = analytic[k].abs().max(numeric.abs()).max(1e-3);
        worst = worst.max((analytic[k] - numeric).abs() / denom);
    }
    worst
}
