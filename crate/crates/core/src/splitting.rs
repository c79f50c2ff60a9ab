//! Item, user and user-item splitting.
//!
//! Each entity's ratings are partitioned by every non-`na` condition into
//! "condition active" and "condition not active". Candidates with at least
//! `min_length` ratings per side are scored with Welch's two-sample t-test;
//! the largest `|t|` whose normal-approximation p-value is below `alpha`
//! wins (ties go to the earlier dimension, then condition). A split entity is
//! replaced by two fresh virtual ids, after which any 2D recommender applies.

use rayon::prelude::*;

use crate::baselines::{raw_matrix, RatingMatrix};
use crate::engine::{fit, Algorithm, HyperParams, TrainedModel};
use crate::error::{Error, Result};
use crate::schema::{ContextSchema, ContextSituation};
use crate::table::{Interner, RatingTable, RatingTuple};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCriterion {
    pub alpha: f64,
    pub min_length: usize,
}

impl Default for SplitCriterion {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            min_length: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    pub p_value: f64,
}

/// Welch's t statistic for `a` vs `b` with a two-sided normal p-value.
/// `None` when either side has fewer than two values or the means and
/// variances are all equal.
pub fn welch(a: &[f64], b: &[f64]) -> Option<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (mean, var / n)
    };
    let ((ma, sa), (mb, sb)) = (stats(a), stats(b));
    let diff = ma - mb;
    let se = (sa + sb).sqrt();
    let t = if se > 0.0 {
        diff / se
    } else if diff != 0.0 {
        diff.signum() * f64::INFINITY
    } else {
        return None;
    };
    Some(WelchTest {
        t,
        p_value: libm::erfc(t.abs() / std::f64::consts::SQRT_2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub dimension: usize,
    pub condition: usize,
    /// Virtual id for ratings where the condition is active.
    pub holds: usize,
    /// Virtual id for the rest.
    pub fails: usize,
    pub t: f64,
}

/// Chosen splits per original entity.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMap {
    splits: Vec<Option<Split>>,
    num_ids: usize,
}

impl SplitMap {
    pub fn identity(n: usize) -> Self {
        Self {
            splits: vec![None; n],
            num_ids: n,
        }
    }

    pub fn get(&self, entity: usize) -> Option<&Split> {
        self.splits.get(entity).and_then(Option::as_ref)
    }

    pub fn num_split(&self) -> usize {
        self.splits.iter().flatten().count()
    }

    pub fn is_identity(&self) -> bool {
        self.num_split() == 0
    }

    /// Size of the id space after splitting.
    pub fn num_ids(&self) -> usize {
        self.num_ids
    }

    pub fn splits(&self) -> impl Iterator<Item = (usize, &Split)> {
        self.splits
            .iter()
            .enumerate()
            .filter_map(|(e, s)| s.as_ref().map(|s| (e, s)))
    }

    /// Routes an original id; ids outside the map are returned unchanged.
    pub fn route(&self, entity: usize, situation: &ContextSituation) -> usize {
        match self.get(entity) {
            Some(s) if situation.conditions().get(s.dimension) == Some(&s.condition) => s.holds,
            Some(s) => s.fails,
            None => entity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    User,
    Item,
}

fn best_split(
    schema: &ContextSchema,
    rows: &[&RatingTuple],
    crit: SplitCriterion,
) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for d in 0..schema.num_dimensions() {
        for c in schema.conditions_of(d).filter(|&c| !schema.is_na(c)) {
            let (holds, fails): (Vec<&&RatingTuple>, Vec<&&RatingTuple>) =
                rows.iter().partition(|r| r.situation.active(d) == c);
            if holds.len() < crit.min_length || fails.len() < crit.min_length {
                continue;
            }
            let a: Vec<f64> = holds.iter().map(|r| r.rating).collect();
            let b: Vec<f64> = fails.iter().map(|r| r.rating).collect();
            let Some(test) = welch(&a, &b) else { continue };
            if test.p_value < crit.alpha && best.is_none_or(|(_, _, t)| test.t.abs() > t) {
                best = Some((d, c, test.t.abs()));
            }
        }
    }
    best
}

fn split_side(table: &RatingTable, side: Side, crit: SplitCriterion) -> (RatingTable, SplitMap) {
    let schema = table.schema();
    let n = match side {
        Side::User => table.num_users(),
        Side::Item => table.num_items(),
    };
    let entity = |r: &RatingTuple| match side {
        Side::User => r.user,
        Side::Item => r.item,
    };
    let mut grouped: Vec<Vec<&RatingTuple>> = vec![Vec::new(); n];
    for r in table.rows() {
        grouped[entity(r)].push(r);
    }
    let choices: Vec<Option<(usize, usize, f64)>> = grouped
        .par_iter()
        .map(|rows| best_split(schema, rows, crit))
        .collect();

    let names = match side {
        Side::User => table.users(),
        Side::Item => table.items(),
    };
    let mut ids = names.clone();
    let mut splits = vec![None; n];
    for (e, choice) in choices.into_iter().enumerate() {
        if let Some((dimension, condition, t)) = choice {
            let base = names.name(e).unwrap_or_default();
            let label = schema.label(condition);
            let holds = ids.intern(&format!("{base}[{label}]"));
            let fails = ids.intern(&format!("{base}[!{label}]"));
            splits[e] = Some(Split {
                dimension,
                condition,
                holds,
                fails,
                t,
            });
        }
    }
    let map = SplitMap {
        splits,
        num_ids: ids.len(),
    };
    let rows: Vec<RatingTuple> = table
        .rows()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            match side {
                Side::User => r.user = map.route(r.user, &r.situation),
                Side::Item => r.item = map.route(r.item, &r.situation),
            }
            r
        })
        .collect();
    let (users, items): (Interner, Interner) = match side {
        Side::User => (ids, table.items().clone()),
        Side::Item => (table.users().clone(), ids),
    };
    let split =
        RatingTable::new(schema.clone(), users, items, rows).expect("routing keeps rows valid");
    (split, map)
}

/// Contextual table with split items replaced by virtual items.
pub fn item_split_table(table: &RatingTable, crit: SplitCriterion) -> (RatingTable, SplitMap) {
    split_side(table, Side::Item, crit)
}

pub fn user_split_table(table: &RatingTable, crit: SplitCriterion) -> (RatingTable, SplitMap) {
    split_side(table, Side::User, crit)
}

/// Items first, then users of the item-split table.
pub fn ui_split_table(
    table: &RatingTable,
    crit: SplitCriterion,
) -> (RatingTable, SplitMap, SplitMap) {
    let (items_done, item_map) = item_split_table(table, crit);
    let (both, user_map) = user_split_table(&items_done, crit);
    (both, item_map, user_map)
}

pub fn item_split(table: &RatingTable, crit: SplitCriterion) -> (RatingMatrix, SplitMap) {
    let (t, map) = item_split_table(table, crit);
    (raw_matrix(&t), map)
}

pub fn user_split(table: &RatingTable, crit: SplitCriterion) -> (RatingMatrix, SplitMap) {
    let (t, map) = user_split_table(table, crit);
    (raw_matrix(&t), map)
}

/// Returns the matrix, the item map and the user map.
pub fn ui_split(table: &RatingTable, crit: SplitCriterion) -> (RatingMatrix, SplitMap, SplitMap) {
    let (t, items, users) = ui_split_table(table, crit);
    (raw_matrix(&t), items, users)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitVariant {
    User,
    Item,
    UserItem,
}

/// A split followed by a 2D recommender.
#[derive(Debug, Clone)]
pub struct SplitModel {
    pub variant: SplitVariant,
    pub user_map: SplitMap,
    pub item_map: SplitMap,
    pub inner: TrainedModel,
}

impl SplitModel {
    pub fn fit(
        variant: SplitVariant,
        traditional: Algorithm,
        table: &RatingTable,
        hp: &HyperParams,
    ) -> Result<Self> {
        if !traditional.is_2d() {
            return Err(Error::NotTwoDimensional(traditional.name().to_string()));
        }
        let crit = hp.split;
        let (split, user_map, item_map) = match variant {
            SplitVariant::Item => {
                let (t, m) = item_split_table(table, crit);
                (t, SplitMap::identity(table.num_users()), m)
            }
            SplitVariant::User => {
                let (t, m) = user_split_table(table, crit);
                (t, m, SplitMap::identity(table.num_items()))
            }
            SplitVariant::UserItem => {
                let (t, items, users) = ui_split_table(table, crit);
                (t, users, items)
            }
        };
        let inner = fit(traditional, &split, hp)?;
        Ok(Self {
            variant,
            user_map,
            item_map,
            inner,
        })
    }

    /// Virtual `(user, item)` for an original pair in a situation.
    pub fn route(&self, user: usize, item: usize, situation: &ContextSituation) -> (usize, usize) {
        (
            self.user_map.route(user, situation),
            self.item_map.route(item, situation),
        )
    }

    pub fn score(&self, user: usize, item: usize, situation: &ContextSituation) -> f64 {
        let (u, i) = self.route(user, item, situation);
        self.inner.score_raw(u, i, situation)
    }
}
