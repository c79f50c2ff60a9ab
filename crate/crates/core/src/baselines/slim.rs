//! Sparse linear item-item model trained column by column with cyclic
//! coordinate descent on
//!
//! ```text
//! ½‖r_i − R w_i‖² + l1‖w_i‖₁ + ½ l2‖w_i‖²,   w_i ≥ 0,  w_ii = 0
//! ```
//!
//! where missing ratings count as 0.

use rayon::prelude::*;

use super::RatingMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SlimModel {
    num_items: usize,
    /// Column-major: `w[i * n + j]` is `W_{j,i}`.
    w: Vec<f64>,
    profiles: Vec<Vec<(usize, f64)>>,
    /// Summed objective over all columns after each sweep.
    pub objective: Vec<f64>,
}

/// One column's coordinate descent. Returns the column and its objective after
/// every sweep.
fn fit_column(
    target: usize,
    columns: &[Vec<(usize, f64)>],
    norms: &[f64],
    num_users: usize,
    sweeps: usize,
    l1: f64,
    l2: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = columns.len();
    let mut w = vec![0.0; n];
    let mut resid = vec![0.0; num_users];
    for &(u, r) in &columns[target] {
        resid[u] = r;
    }
    let mut history = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        for j in 0..n {
            if j == target || norms[j] == 0.0 {
                continue;
            }
            let rho = columns[j].iter().map(|&(u, r)| r * resid[u]).sum::<f64>() + norms[j] * w[j];
            let next = (rho - l1).max(0.0) / (norms[j] + l2);
            let delta = next - w[j];
            if delta != 0.0 {
                for &(u, r) in &columns[j] {
                    resid[u] -= r * delta;
                }
                w[j] = next;
            }
        }
        let fit = 0.5 * resid.iter().map(|e| e * e).sum::<f64>();
        let penalty: f64 = w.iter().map(|&x| l1 * x + 0.5 * l2 * x * x).sum();
        history.push(fit + penalty);
    }
    (w, history)
}

impl SlimModel {
    pub fn fit(matrix: &RatingMatrix, sweeps: usize, l1: f64, l2: f64) -> Self {
        let collapsed = matrix.collapsed();
        let columns = collapsed.by_item();
        let norms: Vec<f64> = columns
            .iter()
            .map(|c| c.iter().map(|&(_, r)| r * r).sum())
            .collect();
        let n = columns.len();
        let fitted: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| fit_column(i, &columns, &norms, collapsed.num_users, sweeps, l1, l2))
            .collect();
        let mut w = Vec::with_capacity(n * n);
        let mut objective = vec![0.0; sweeps];
        for (col, history) in fitted {
            w.extend(col);
            for (acc, v) in objective.iter_mut().zip(history) {
                *acc += v;
            }
        }
        Self {
            num_items: n,
            w,
            profiles: collapsed.by_user(),
            objective,
        }
    }

    /// Model with explicit coefficients, `weights[i * n + j] = W_{j,i}`.
    pub fn from_weights(matrix: &RatingMatrix, weights: Vec<f64>) -> Self {
        let collapsed = matrix.collapsed();
        assert_eq!(weights.len(), collapsed.num_items * collapsed.num_items);
        Self {
            num_items: collapsed.num_items,
            w: weights,
            profiles: collapsed.by_user(),
            objective: Vec::new(),
        }
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    /// `W_{from, to}`.
    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.w[to * self.num_items + from]
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn profile(&self, user: usize) -> &[(usize, f64)] {
        self.profiles.get(user).map_or(&[], Vec::as_slice)
    }

    /// `Σ_{j ∈ I_u, j ≠ i} R_uj · W_ji`.
    pub fn score(&self, user: usize, item: usize) -> f64 {
        if item >= self.num_items {
            return 0.0;
        }
        self.profile(user)
            .iter()
            .filter(|&&(j, _)| j != item)
            .map(|&(j, r)| r * self.weight(j, item))
            .sum()
    }
}
