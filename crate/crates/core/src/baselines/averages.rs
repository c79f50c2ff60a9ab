use std::collections::HashMap;

use crate::schema::ContextSituation;
use crate::table::RatingTable;

use super::RatingMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageVariant {
    Global,
    User,
    Item,
    UserItem,
    Context,
    ItemContext,
    UserContext,
}

#[derive(Debug, Clone, Default)]
struct Mean {
    sum: f64,
    n: usize,
}

impl Mean {
    fn add(&mut self, r: f64) {
        self.sum += r;
        self.n += 1;
    }

    fn value(&self) -> f64 {
        self.sum / self.n as f64
    }
}

fn finish(means: Vec<Mean>) -> Vec<Option<f64>> {
    means
        .into_iter()
        .map(|m| (m.n > 0).then(|| m.value()))
        .collect()
}

fn finish_map<K: std::hash::Hash + Eq>(means: HashMap<K, Mean>) -> HashMap<K, f64> {
    means.into_iter().map(|(k, m)| (k, m.value())).collect()
}

/// Closed-form averages over raw (uncollapsed) ratings.
#[derive(Debug, Clone)]
pub struct AveragesModel {
    pub variant: AverageVariant,
    pub global_mean: f64,
    user_means: Vec<Option<f64>>,
    item_means: Vec<Option<f64>>,
    context_means: HashMap<ContextSituation, f64>,
    item_context_means: HashMap<(usize, ContextSituation), f64>,
    user_context_means: HashMap<(usize, ContextSituation), f64>,
}

impl AveragesModel {
    pub fn fit(table: &RatingTable, variant: AverageVariant) -> Self {
        let rows = table
            .rows()
            .iter()
            .map(|r| (r.user, r.item, r.rating, Some(&r.situation)));
        Self::from_rows(table.num_users(), table.num_items(), rows, variant)
    }

    /// Context-free fit; context variants fall back to their 2D parts.
    pub fn fit_matrix(matrix: &RatingMatrix, variant: AverageVariant) -> Self {
        let rows = matrix
            .entries
            .iter()
            .map(|e| (e.user, e.item, e.rating, None));
        Self::from_rows(matrix.num_users, matrix.num_items, rows, variant)
    }

    fn from_rows<'a>(
        num_users: usize,
        num_items: usize,
        rows: impl Iterator<Item = (usize, usize, f64, Option<&'a ContextSituation>)>,
        variant: AverageVariant,
    ) -> Self {
        let mut global = Mean::default();
        let mut users = vec![Mean::default(); num_users];
        let mut items = vec![Mean::default(); num_items];
        let mut ctx: HashMap<ContextSituation, Mean> = HashMap::new();
        let mut item_ctx: HashMap<(usize, ContextSituation), Mean> = HashMap::new();
        let mut user_ctx: HashMap<(usize, ContextSituation), Mean> = HashMap::new();
        for (u, i, r, sit) in rows {
            global.add(r);
            users[u].add(r);
            items[i].add(r);
            if let Some(s) = sit {
                ctx.entry(s.clone()).or_default().add(r);
                item_ctx.entry((i, s.clone())).or_default().add(r);
                user_ctx.entry((u, s.clone())).or_default().add(r);
            }
        }
        Self {
            variant,
            global_mean: if global.n > 0 { global.value() } else { 0.0 },
            user_means: finish(users),
            item_means: finish(items),
            context_means: finish_map(ctx),
            item_context_means: finish_map(item_ctx),
            user_context_means: finish_map(user_ctx),
        }
    }

    pub fn user_mean(&self, u: usize) -> Option<f64> {
        self.user_means.get(u).copied().flatten()
    }

    pub fn item_mean(&self, i: usize) -> Option<f64> {
        self.item_means.get(i).copied().flatten()
    }

    /// Variant prediction with fallback to the variant's 2D part, then μ.
    pub fn predict(&self, user: usize, item: usize, situation: Option<&ContextSituation>) -> f64 {
        let mu = self.global_mean;
        let user_mean = || self.user_mean(user).unwrap_or(mu);
        let item_mean = || self.item_mean(item).unwrap_or(mu);
        match self.variant {
            AverageVariant::Global => mu,
            AverageVariant::User => user_mean(),
            AverageVariant::Item => item_mean(),
            AverageVariant::UserItem => mu + (user_mean() - mu) + (item_mean() - mu),
            AverageVariant::Context => situation
                .and_then(|s| self.context_means.get(s).copied())
                .unwrap_or(mu),
            AverageVariant::ItemContext => situation
                .and_then(|s| self.item_context_means.get(&(item, s.clone())).copied())
                .unwrap_or_else(item_mean),
            AverageVariant::UserContext => situation
                .and_then(|s| self.user_context_means.get(&(user, s.clone())).copied())
                .unwrap_or_else(user_mean),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::fixtures::table2;

    #[test]
    fn table2_averages() {
        let t = table2();
        let (u1, t1) = (0, 0);
        let any = t.rows()[0].situation.clone();
        let m = |v| AveragesModel::fit(&t, v);
        assert_eq!(m(AverageVariant::Global).predict(1, 1, Some(&any)), 3.25);
        assert_eq!(m(AverageVariant::User).predict(u1, t1, None), 3.5);
        assert_eq!(m(AverageVariant::UserItem).predict(u1, t1, None), 3.75);

        let weekend_home = t
            .schema()
            .situation([("Time", "Weekend"), ("Location", "Home")])
            .unwrap();
        assert_eq!(
            m(AverageVariant::ItemContext).predict(u1, t1, Some(&weekend_home)),
            4.0
        );

        let unseen = t
            .schema()
            .situation([("Time", "Weekday"), ("Location", "na")])
            .unwrap();
        assert_eq!(
            m(AverageVariant::Context).predict(u1, t1, Some(&unseen)),
            3.25
        );
    }

    #[test]
    fn cold_entities_fall_back_to_global_mean() {
        let t = table2();
        let m = AveragesModel::fit(&t, AverageVariant::UserItem);
        assert_eq!(m.predict(99, 99, None), 3.25);
        let m = AveragesModel::fit(&t, AverageVariant::UserContext);
        let unseen = t.schema().all_na();
        assert_eq!(m.predict(0, 0, Some(&unseen)), 3.5);
    }

    #[test]
    fn permutation_invariant() {
        let t = table2();
        let reversed = t.subset(&[3, 2, 1, 0]);
        for v in [
            AverageVariant::Global,
            AverageVariant::UserItem,
            AverageVariant::Context,
        ] {
            let a = AveragesModel::fit(&t, v);
            let b = AveragesModel::fit(&reversed, v);
            for row in t.rows() {
                assert_eq!(
                    a.predict(row.user, row.item, Some(&row.situation)),
                    b.predict(row.user, row.item, Some(&row.situation))
                );
            }
        }
    }
}
