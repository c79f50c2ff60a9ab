//! Seeded generators of contextual rating data with planted effects.
//!
//! Every generator uses the schema `Time{Weekend, Weekday}`,
//! `Location{Home, Work}`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::engine::seeded_rng;
use crate::schema::{ContextSchema, ContextSituation, SchemaBuilder};
use crate::table::{Interner, RatingTable, RatingTuple};

pub fn time_location_schema() -> ContextSchema {
    let mut b = SchemaBuilder::new();
    let t = b.dimension("Time");
    b.condition(t, "Weekend");
    b.condition(t, "Weekday");
    let l = b.dimension("Location");
    b.condition(l, "Home");
    b.condition(l, "Work");
    b.build()
}

fn ids(prefix: &str, n: usize) -> Interner {
    let mut ids = Interner::new();
    for k in 0..n {
        ids.intern(&format!("{prefix}{k}"));
    }
    ids
}

fn situation(schema: &ContextSchema, weekend: bool, home: bool) -> ContextSituation {
    let time = if weekend { "Weekend" } else { "Weekday" };
    let location = if home { "Home" } else { "Work" };
    schema
        .situation([("Time", time), ("Location", location)])
        .expect("fixed schema")
}

/// Uniform users, items and integer ratings 1–5; each dimension is `na` with
/// probability 0.2, otherwise a uniform condition.
pub fn random_table(seed: u64, users: usize, items: usize, rows: usize) -> RatingTable {
    let schema = time_location_schema();
    let mut rng = seeded_rng(seed);
    let tuples = (0..rows)
        .map(|_| {
            let conditions: Vec<usize> = (0..schema.num_dimensions())
                .map(|d| {
                    if rng.random_bool(0.2) {
                        schema.na(d)
                    } else {
                        let r = schema.conditions_of(d);
                        rng.random_range(r.start + 1..r.end)
                    }
                })
                .collect();
            RatingTuple {
                user: rng.random_range(0..users),
                item: rng.random_range(0..items),
                rating: rng.random_range(1..=5) as f64,
                situation: ContextSituation::from_conditions(conditions),
            }
        })
        .collect();
    RatingTable::new(schema, ids("u", users), ids("i", items), tuples).expect("valid rows")
}

/// `r = mu + lift · [Weekend] + N(0, noise²)` with uniform users, items and
/// locations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedLift {
    pub users: usize,
    pub items: usize,
    pub rows: usize,
    pub mu: f64,
    pub lift: f64,
    pub noise: f64,
    /// Probability that a row is on the weekend.
    pub weekend_share: f64,
    pub seed: u64,
}

impl Default for PlantedLift {
    fn default() -> Self {
        Self {
            users: 200,
            items: 100,
            rows: 20_000,
            mu: 3.0,
            lift: 1.0,
            noise: 0.3,
            weekend_share: 0.1,
            seed: 1,
        }
    }
}

impl PlantedLift {
    pub fn generate(&self) -> RatingTable {
        let schema = time_location_schema();
        let mut rng = seeded_rng(self.seed);
        let noise = Normal::new(0.0, self.noise).expect("finite noise");
        let rows = (0..self.rows)
            .map(|_| {
                let weekend = rng.random_bool(self.weekend_share);
                let home = rng.random_bool(0.5);
                let rating =
                    self.mu + if weekend { self.lift } else { 0.0 } + noise.sample(&mut rng);
                RatingTuple {
                    user: rng.random_range(0..self.users),
                    item: rng.random_range(0..self.items),
                    rating,
                    situation: situation(&schema, weekend, home),
                }
            })
            .collect();
        RatingTable::new(schema, ids("u", self.users), ids("i", self.items), rows)
            .expect("valid rows")
    }
}

/// Small [`PlantedLift`] instance.
pub fn planted_weekend_lift(seed: u64, users: usize, items: usize, rows: usize) -> RatingTable {
    PlantedLift {
        users,
        items,
        rows,
        seed,
        weekend_share: 0.5,
        ..PlantedLift::default()
    }
    .generate()
}

/// Items shift with Time (±1.25 around the middle, sign per item) and users
/// with Location (sign per user): a 2.5 gap on each planted side. Every
/// (user, item) pair is rated in three random situations.
pub fn planted_two_way(seed: u64) -> RatingTable {
    let (nu, ni) = (20, 20);
    let schema = time_location_schema();
    let mut rng = seeded_rng(seed);
    let noise = Normal::new(0.0, 0.3).expect("finite noise");
    let item_sign: Vec<f64> = (0..ni)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let user_sign: Vec<f64> = (0..nu)
        .map(|u| if u % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let mut rows = Vec::new();
    for u in 0..nu {
        for i in 0..ni {
            for _ in 0..3 {
                let (weekend, home) = (rng.random_bool(0.5), rng.random_bool(0.5));
                let t = if weekend { 1.25 } else { -1.25 };
                let l = if home { 1.25 } else { -1.25 };
                let rating = 3.0 + item_sign[i] * t + user_sign[u] * l + noise.sample(&mut rng);
                rows.push(RatingTuple {
                    user: u,
                    item: i,
                    rating,
                    situation: situation(&schema, weekend, home),
                });
            }
        }
    }
    RatingTable::new(schema, ids("u", nu), ids("i", ni), rows).expect("valid rows")
}

/// Planted per-item context effects.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSplit {
    pub table: RatingTable,
    /// Planted `(dimension, condition)` per item; `None` for unplanted items.
    pub planted: Vec<Option<(usize, usize)>>,
}

/// Half the items get a mean gap of `gap` between an active planted condition
/// and the rest, on a dimension drawn per item; users rate every item in
/// one random situation each, with user bias N(0, 0.3²) and noise N(0, 0.5²).
pub fn planted_item_split(seed: u64, users: usize, items: usize, gap: f64) -> PlantedSplit {
    let schema = time_location_schema();
    let mut rng: ChaCha8Rng = seeded_rng(seed);
    let noise = Normal::new(0.0, 0.5).expect("finite noise");
    let bias = Normal::new(0.0, 0.3).expect("finite noise");
    let user_bias: Vec<f64> = (0..users).map(|_| bias.sample(&mut rng)).collect();
    let planted: Vec<Option<(usize, usize, f64)>> = (0..items)
        .map(|i| {
            if i % 2 == 1 {
                return None;
            }
            let d = rng.random_range(0..schema.num_dimensions());
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            Some((d, schema.conditions_of(d).start + 1, sign))
        })
        .collect();
    let mut rows = Vec::new();
    for u in 0..users {
        for (i, plant) in planted.iter().enumerate() {
            let (weekend, home) = (rng.random_bool(0.5), rng.random_bool(0.5));
            let s = situation(&schema, weekend, home);
            let shift = match plant {
                Some((d, c, sign)) if s.active(*d) == *c => 0.5 * gap * sign,
                Some((_, _, sign)) => -0.5 * gap * sign,
                None => 0.0,
            };
            let rating = 3.0 + user_bias[u] + shift + noise.sample(&mut rng);
            rows.push(RatingTuple {
                user: u,
                item: i,
                rating,
                situation: s,
            });
        }
    }
    let table =
        RatingTable::new(schema, ids("u", users), ids("i", items), rows).expect("valid rows");
    PlantedSplit {
        table,
        planted: planted
            .into_iter()
            .map(|p| p.map(|(d, c, _)| (d, c)))
            .collect(),
    }
}
