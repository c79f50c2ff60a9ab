//! Contextual SLIM for top-N recommendation.
//!
//! ```text
//! score(u, i, s) = Σ_{j ∈ I_u, j ≠ i} (R_uj + D_j(s)) · W_ji
//! ```
//!
//! `R` holds the user's context-collapsed training ratings and `D_j(s)` sums
//! the deviations of the active conditions, keyed as in the CAMF variants
//! (the item key is the neighbor `j`). Training alternates one guarded SGD
//! pass over the deviations with one exact coordinate-descent sweep over the
//! columns of `W`, minimizing
//!
//! ```text
//! Σ_tuples (r − score)² + l1‖W‖₁ + ½ l2‖W‖² + reg_context‖D‖²,  W ≥ 0, diag W = 0
//! ```

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::baselines::collapse_context;
use crate::camf::DeviationVariant;
use crate::engine::{seeded_rng, HyperParams};
use crate::error::{Error, Result};
use crate::sgd::{self, Sample, SgdModel};
use crate::table::RatingTable;

#[derive(Debug, Clone, PartialEq)]
pub struct CslimModel {
    pub variant: DeviationVariant,
    num_users: usize,
    num_items: usize,
    num_conditions: usize,
    /// `[W column-major | deviations]`; `params[i * n + j]` is `W_{j,i}`.
    params: Vec<f64>,
    reg: Vec<f64>,
    l1: f64,
    profiles: Vec<Vec<(usize, f64)>>,
    user_dev: usize,
    item_dev: usize,
    /// Full objective after each sweep.
    pub objective: Vec<f64>,
}

impl CslimModel {
    /// Model with explicit `W` (`weights[i * n + j] = W_{j,i}`) and zero deviations.
    pub fn with_weights(
        table: &RatingTable,
        variant: DeviationVariant,
        weights: &[f64],
        hp: &HyperParams,
    ) -> Self {
        let mut m = Self::zeroed(table, variant, hp);
        m.params[..weights.len()].copy_from_slice(weights);
        m
    }

    fn zeroed(table: &RatingTable, variant: DeviationVariant, hp: &HyperParams) -> Self {
        let (nu, ni, c) = (
            table.num_users(),
            table.num_items(),
            table.schema().num_conditions(),
        );
        let cond_len = if variant == DeviationVariant::C { c } else { 0 };
        let user_len = if variant.by_user() { nu * c } else { 0 };
        let item_len = if variant.by_item() { ni * c } else { 0 };
        let w_len = ni * ni;
        let dev_len = cond_len + user_len + item_len;
        let mut reg = vec![0.5 * hp.l2_reg; w_len];
        reg.extend(std::iter::repeat_n(hp.reg_context, dev_len));
        Self {
            variant,
            num_users: nu,
            num_items: ni,
            num_conditions: c,
            params: vec![0.0; w_len + dev_len],
            reg,
            l1: hp.l1_reg,
            profiles: collapse_context(table).by_user(),
            user_dev: w_len + cond_len,
            item_dev: w_len + cond_len + user_len,
            objective: Vec::new(),
        }
    }

    pub fn fit(table: &RatingTable, variant: DeviationVariant, hp: &HyperParams) -> Result<Self> {
        let mut model = Self::zeroed(table, variant, hp);
        let samples = Sample::from_table(table);
        let mut rng = seeded_rng(hp.rand_seed);
        let weights = model.penalty_weights(&samples);
        let decay: Vec<f64> = sgd::touch_counts(&model, &samples)
            .into_iter()
            .zip(&weights)
            .map(|(n, w)| if n == 0 { 0.0 } else { w / n as f64 })
            .collect();
        let w_len = model.num_items * model.num_items;
        let by_item = group_by_item(&samples, model.num_items);
        let mut lr = hp.learn_rate;
        let mut current = model.full_objective(&samples);
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut grad = Vec::new();

        for sweep in 1..=hp.num_iterations {
            // deviations, W fixed
            let snapshot = model.params[w_len..].to_vec();
            order.shuffle(&mut rng);
            for &t in &order {
                let s = &samples[t];
                let e = s.rating - model.score(s.user, s.item, &s.context);
                grad.clear();
                model.score_grad(s, &mut grad);
                for &(k, g) in grad.iter().filter(|(k, _)| *k >= w_len) {
                    model.params[k] += lr * (e * g - decay[k] * model.params[k]);
                }
            }
            if model.params.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged(sweep));
            }
            let after = model.full_objective(&samples);
            if after > current {
                model.params[w_len..].copy_from_slice(&snapshot);
                lr *= 0.5;
            } else {
                lr *= 1.05;
            }

            // W, deviations fixed
            let columns: Vec<Vec<f64>> = (0..model.num_items)
                .into_par_iter()
                .map(|i| model.fit_column(i, &by_item[i], &samples, hp.l2_reg))
                .collect();
            for (i, col) in columns.into_iter().enumerate() {
                model.params[i * model.num_items..(i + 1) * model.num_items].copy_from_slice(&col);
            }
            current = model.full_objective(&samples);
            model.objective.push(current);
            if hp.verbose {
                log::info!("sweep {sweep}: objective {current:.6}");
            }
        }
        Ok(model)
    }

    /// One coordinate-descent pass over column `i` from its current values.
    fn fit_column(&self, i: usize, tuples: &[usize], samples: &[Sample], l2: f64) -> Vec<f64> {
        let n = self.num_items;
        let mut w = self.params[i * n..(i + 1) * n].to_vec();
        // inverted features: for each j, (tuple slot, x_tj)
        let mut features: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut resid = Vec::with_capacity(tuples.len());
        for (slot, &t) in tuples.iter().enumerate() {
            let s = &samples[t];
            let mut fitted = 0.0;
            for &(j, r) in self.profile(s.user) {
                if j == i {
                    continue;
                }
                let x = r + self.neighbor_deviation(s.user, j, &s.context);
                features[j].push((slot, x));
                fitted += x * w[j];
            }
            resid.push(s.rating - fitted);
        }
        for j in 0..n {
            if j == i || features[j].is_empty() {
                continue;
            }
            let (mut rho, mut sxx) = (0.0, 0.0);
            for &(slot, x) in &features[j] {
                rho += x * (resid[slot] + x * w[j]);
                sxx += x * x;
            }
            let denom = 2.0 * sxx + l2;
            if denom == 0.0 {
                continue;
            }
            let next = ((2.0 * rho - self.l1) / denom).max(0.0);
            let delta = next - w[j];
            if delta != 0.0 {
                for &(slot, x) in &features[j] {
                    resid[slot] -= x * delta;
                }
                w[j] = next;
            }
        }
        w
    }

    fn full_objective(&self, samples: &[Sample]) -> f64 {
        let l1: f64 = self.weights().iter().sum::<f64>() * self.l1;
        sgd::objective(self, samples) + l1
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    /// Column-major `W`.
    pub fn weights(&self) -> &[f64] {
        &self.params[..self.num_items * self.num_items]
    }

    /// `W_{from, to}`.
    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.params[to * self.num_items + from]
    }

    pub fn profile(&self, user: usize) -> &[(usize, f64)] {
        self.profiles.get(user).map_or(&[], Vec::as_slice)
    }

    pub fn condition_dev_at(&self, condition: usize) -> Option<usize> {
        (self.variant == DeviationVariant::C && condition < self.num_conditions)
            .then(|| self.num_items * self.num_items + condition)
    }

    pub fn user_dev_at(&self, user: usize, condition: usize) -> Option<usize> {
        (self.variant.by_user() && user < self.num_users && condition < self.num_conditions)
            .then(|| self.user_dev + user * self.num_conditions + condition)
    }

    pub fn item_dev_at(&self, item: usize, condition: usize) -> Option<usize> {
        (self.variant.by_item() && item < self.num_items && condition < self.num_conditions)
            .then(|| self.item_dev + item * self.num_conditions + condition)
    }

    pub fn param(&self, k: usize) -> f64 {
        self.params[k]
    }

    pub fn set_param(&mut self, k: usize, value: f64) {
        self.params[k] = value;
    }

    /// `D_j(s)` for neighbor `j` of `user`.
    pub fn neighbor_deviation(&self, user: usize, j: usize, conditions: &[usize]) -> f64 {
        conditions
            .iter()
            .flat_map(|&c| {
                [
                    self.condition_dev_at(c),
                    self.user_dev_at(user, c),
                    self.item_dev_at(j, c),
                ]
            })
            .flatten()
            .map(|k| self.params[k])
            .sum()
    }

    pub fn score(&self, user: usize, item: usize, conditions: &[usize]) -> f64 {
        if item >= self.num_items {
            return 0.0;
        }
        self.profile(user)
            .iter()
            .filter(|&&(j, _)| j != item)
            .map(|&(j, r)| {
                (r + self.neighbor_deviation(user, j, conditions)) * self.weight(j, item)
            })
            .sum()
    }
}

fn group_by_item(samples: &[Sample], num_items: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); num_items];
    for (t, s) in samples.iter().enumerate() {
        groups[s.item].push(t);
    }
    groups
}

impl SgdModel for CslimModel {
    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn reg(&self) -> &[f64] {
        &self.reg
    }

    fn score(&self, s: &Sample) -> f64 {
        CslimModel::score(self, s.user, s.item, &s.context)
    }

    fn score_grad(&self, s: &Sample, out: &mut Vec<(usize, f64)>) {
        if s.item >= self.num_items {
            return;
        }
        let mut shared = 0.0;
        for &(j, r) in self.profile(s.user) {
            if j == s.item {
                continue;
            }
            let w = self.weight(j, s.item);
            out.push((
                s.item * self.num_items + j,
                r + self.neighbor_deviation(s.user, j, &s.context),
            ));
            shared += w;
            for &c in s.context.iter() {
                if let Some(k) = self.item_dev_at(j, c) {
                    out.push((k, w));
                }
            }
        }
        for &c in s.context.iter() {
            for k in [self.condition_dev_at(c), self.user_dev_at(s.user, c)]
                .into_iter()
                .flatten()
            {
                out.push((k, shared));
            }
        }
    }

    /// Plain penalties: each weight counts once, not once per touching tuple.
    fn penalty_weights(&self, _samples: &[Sample]) -> Vec<f64> {
        self.reg.clone()
    }
}
