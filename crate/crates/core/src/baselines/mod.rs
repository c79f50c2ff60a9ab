//! Context-free and context-average baselines.
//!
//! The 2D recommenders (KNN, PMF/BiasedMF, SLIM) see a [`RatingMatrix`], the
//! contextual table with situations dropped and duplicate `(user, item)`
//! ratings averaged.

pub mod averages;
pub mod knn;
pub mod mf;
pub mod slim;

use std::collections::HashMap;

use crate::table::RatingTable;

pub use averages::{AverageVariant, AveragesModel};
pub use knn::{KnnModel, KnnVariant};
pub use mf::{MfModel, MfVariant};
pub use slim::SlimModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub user: usize,
    pub item: usize,
    pub rating: f64,
}

/// Users × items ratings without context. May hold duplicate cells until
/// [`RatingMatrix::collapsed`] is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    pub num_users: usize,
    pub num_items: usize,
    pub entries: Vec<Entry>,
}

impl RatingMatrix {
    pub fn new(num_users: usize, num_items: usize, entries: Vec<Entry>) -> Self {
        Self {
            num_users,
            num_items,
            entries,
        }
    }

    /// Averages duplicate `(user, item)` cells; cells keep first-appearance order.
    pub fn collapsed(&self) -> Self {
        let mut slot: HashMap<(usize, usize), usize> = HashMap::new();
        let mut sums: Vec<(Entry, usize)> = Vec::new();
        for e in &self.entries {
            match slot.get(&(e.user, e.item)) {
                Some(&k) => {
                    sums[k].0.rating += e.rating;
                    sums[k].1 += 1;
                }
                None => {
                    slot.insert((e.user, e.item), sums.len());
                    sums.push((*e, 1));
                }
            }
        }
        let entries = sums
            .into_iter()
            .map(|(e, n)| Entry {
                rating: e.rating / n as f64,
                ..e
            })
            .collect();
        Self::new(self.num_users, self.num_items, entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Per-user `(item, rating)` lists sorted by item.
    pub fn by_user(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.num_users];
        for e in &self.entries {
            rows[e.user].push((e.item, e.rating));
        }
        rows.iter_mut().for_each(|r| r.sort_by_key(|&(i, _)| i));
        rows
    }

    /// Per-item `(user, rating)` lists sorted by user.
    pub fn by_item(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.num_items];
        for e in &self.entries {
            cols[e.item].push((e.user, e.rating));
        }
        cols.iter_mut().for_each(|c| c.sort_by_key(|&(u, _)| u));
        cols
    }

    pub fn mean(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().map(|e| e.rating).sum::<f64>() / self.entries.len() as f64
    }
}

/// Drops situations and averages ratings of the same `(user, item)`.
pub fn collapse_context(table: &RatingTable) -> RatingMatrix {
    raw_matrix(table).collapsed()
}

/// Drops situations, keeping every row.
pub(crate) fn raw_matrix(table: &RatingTable) -> RatingMatrix {
    RatingMatrix::new(
        table.num_users(),
        table.num_items(),
        table
            .rows()
            .iter()
            .map(|r| Entry {
                user: r.user,
                item: r.item,
                rating: r.rating,
            })
            .collect(),
    )
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::table::RatingTable;

    pub const TABLE2: &str = "\
user,item,rating,Time:Weekend,Time:Weekday,Location:Home,Location:Work
U1,T1,3,1,0,0,1
U2,T2,4,0,1,1,0
U1,T1,4,1,0,1,0
U2,T2,2,0,1,0,1
";

    pub fn table2() -> RatingTable {
        RatingTable::read_binary(TABLE2.as_bytes()).unwrap()
    }
}
