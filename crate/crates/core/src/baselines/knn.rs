use rayon::prelude::*;

use super::averages::{AverageVariant, AveragesModel};
use super::RatingMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnnVariant {
    User,
    Item,
}

/// Neighborhood model over a collapsed matrix with shrunk Pearson similarities.
#[derive(Debug, Clone)]
pub struct KnnModel {
    variant: KnnVariant,
    k: usize,
    /// Dense `n × n`, where n counts users (UserKNN) or items (ItemKNN).
    similarity: Vec<f64>,
    n: usize,
    means: Vec<f64>,
    by_user: Vec<Vec<(usize, f64)>>,
    by_item: Vec<Vec<(usize, f64)>>,
    fallback: AveragesModel,
}

/// Pearson correlation over the co-rated part of two sorted profiles, times
/// `n / (n + shrinkage)`. Zero when fewer than two co-ratings or no variance.
pub fn pearson(a: &[(usize, f64)], b: &[(usize, f64)], shrinkage: f64) -> f64 {
    let mut pairs = Vec::new();
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].0.cmp(&b[y].0) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                pairs.push((a[x].1, b[y].1));
                x += 1;
                y += 1;
            }
        }
    }
    let n = pairs.len();
    if n < 2 {
        return 0.0;
    }
    let ma = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let mb = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let (mut num, mut da, mut db) = (0.0, 0.0, 0.0);
    for (ra, rb) in pairs {
        num += (ra - ma) * (rb - mb);
        da += (ra - ma) * (ra - ma);
        db += (rb - mb) * (rb - mb);
    }
    if da == 0.0 || db == 0.0 {
        return 0.0;
    }
    let r = (num / (da.sqrt() * db.sqrt())).clamp(-1.0, 1.0);
    r * n as f64 / (n as f64 + shrinkage)
}

impl KnnModel {
    pub fn fit(matrix: &RatingMatrix, variant: KnnVariant, k: usize, shrinkage: f64) -> Self {
        let collapsed = matrix.collapsed();
        let by_user = collapsed.by_user();
        let by_item = collapsed.by_item();
        let profiles = match variant {
            KnnVariant::User => &by_user,
            KnnVariant::Item => &by_item,
        };
        let n = profiles.len();
        let upper: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|a| {
                (a + 1..n)
                    .map(|b| pearson(&profiles[a], &profiles[b], shrinkage))
                    .collect()
            })
            .collect();
        let mut similarity = vec![0.0; n * n];
        for (a, row) in upper.iter().enumerate() {
            for (off, &s) in row.iter().enumerate() {
                let b = a + 1 + off;
                similarity[a * n + b] = s;
                similarity[b * n + a] = s;
            }
        }
        let means = profiles
            .iter()
            .map(|p| {
                if p.is_empty() {
                    0.0
                } else {
                    p.iter().map(|x| x.1).sum::<f64>() / p.len() as f64
                }
            })
            .collect();
        Self {
            variant,
            k,
            similarity,
            n,
            means,
            fallback: AveragesModel::fit_matrix(&collapsed, AverageVariant::UserItem),
            by_user,
            by_item,
        }
    }

    pub fn similarity(&self, a: usize, b: usize) -> f64 {
        self.similarity[a * self.n + b]
    }

    pub fn predict(&self, user: usize, item: usize) -> f64 {
        let (target, candidates) = match self.variant {
            KnnVariant::User => (user, self.by_item.get(item)),
            KnnVariant::Item => (item, self.by_user.get(user)),
        };
        let (Some(candidates), true) = (candidates, target < self.n) else {
            return self.fallback.predict(user, item, None);
        };
        let mut neighbors: Vec<(usize, f64, f64)> = candidates
            .iter()
            .filter(|&&(v, _)| v != target)
            .map(|&(v, r)| (v, self.similarity(target, v), r))
            .filter(|&(_, s, _)| s > 0.0)
            .collect();
        if neighbors.is_empty() {
            return self.fallback.predict(user, item, None);
        }
        neighbors.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        neighbors.truncate(self.k);
        let (num, den) = neighbors.iter().fold((0.0, 0.0), |(num, den), &(v, s, r)| {
            (num + s * (r - self.means[v]), den + s.abs())
        });
        self.means[target] + num / den
    }
}
