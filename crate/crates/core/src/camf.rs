//! Context-aware matrix factorization on a biased-MF backbone.
//!
//! Deviation variants add per-condition rating deviations:
//!
//! ```text
//! score = μ + b_u + b_i + p_u·q_i + Σ_{c active} D(c)
//! ```
//!
//! with `D(c)` keyed by condition (C), item×condition (CI), user×condition
//! (CU) or both (CUCI). Similarity variants scale the whole backbone score by
//! `Γ(situation) ∈ (0, 1]`, a product over dimensions of the active
//! condition's learned similarity to the dimension's `na` anchor.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::engine::{seeded_rng, HyperParams};
use crate::error::Result;
use crate::schema::ContextSchema;
use crate::sgd::{self, FactorBase, Sample, SgdModel, TrainReport};
use crate::table::RatingTable;

/// Lower bound of a learned independent similarity.
pub const MIN_SIMILARITY: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationVariant {
    C,
    CI,
    CU,
    CUCI,
}

impl DeviationVariant {
    pub fn by_item(self) -> bool {
        matches!(self, Self::CI | Self::CUCI)
    }

    pub fn by_user(self) -> bool {
        matches!(self, Self::CU | Self::CUCI)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CamfModel {
    pub variant: DeviationVariant,
    pub base: FactorBase,
    num_conditions: usize,
    user_dev: usize,
    item_dev: usize,
    frozen_context: bool,
}

impl CamfModel {
    /// All-zero model: biases, factors and deviations at 0.
    pub fn zeroed(
        variant: DeviationVariant,
        mu: f64,
        num_users: usize,
        num_items: usize,
        factors: usize,
        num_conditions: usize,
    ) -> Self {
        let hp = HyperParams {
            num_factors: factors.max(1),
            init_std: 0.0,
            ..HyperParams::default()
        };
        Self::init(
            variant,
            mu,
            num_users,
            num_items,
            num_conditions,
            &hp,
            &mut seeded_rng(0),
        )
    }

    fn init(
        variant: DeviationVariant,
        mu: f64,
        num_users: usize,
        num_items: usize,
        num_conditions: usize,
        hp: &HyperParams,
        rng: &mut impl Rng,
    ) -> Self {
        let user_len = if variant.by_user() {
            num_users * num_conditions
        } else {
            0
        };
        let item_len = if variant.by_item() {
            num_items * num_conditions
        } else {
            0
        };
        let cond_len = if variant == DeviationVariant::C {
            num_conditions
        } else {
            0
        };
        let base = FactorBase::init(
            num_users,
            num_items,
            cond_len + user_len + item_len,
            mu,
            hp,
            rng,
        );
        let user_dev = base.extra_at() + cond_len;
        Self {
            variant,
            num_conditions,
            user_dev,
            item_dev: user_dev + user_len,
            base,
            frozen_context: false,
        }
    }

    pub fn fit(
        table: &RatingTable,
        variant: DeviationVariant,
        hp: &HyperParams,
    ) -> Result<(Self, TrainReport)> {
        Self::fit_with(table, variant, hp, false)
    }

    /// `frozen_context` keeps every deviation at 0.
    pub(crate) fn fit_with(
        table: &RatingTable,
        variant: DeviationVariant,
        hp: &HyperParams,
        frozen_context: bool,
    ) -> Result<(Self, TrainReport)> {
        let samples = Sample::from_table(table);
        let mut rng = seeded_rng(hp.rand_seed);
        let mut model = Self::init(
            variant,
            sgd::mean_rating(&samples),
            table.num_users(),
            table.num_items(),
            table.schema().num_conditions(),
            hp,
            &mut rng,
        );
        model.frozen_context = frozen_context;
        let report = sgd::train(&mut model, &samples, hp, table.scale(), &mut rng)?;
        let (users, items) = sgd::seen(&samples, table.num_users(), table.num_items());
        model.base.forget_unseen(&users, &items);
        Ok((model, report))
    }

    /// Parameter index of the condition deviation (CAMF_C only).
    pub fn condition_dev_at(&self, condition: usize) -> Option<usize> {
        (self.variant == DeviationVariant::C && condition < self.num_conditions)
            .then(|| self.base.extra_at() + condition)
    }

    pub fn user_dev_at(&self, user: usize, condition: usize) -> Option<usize> {
        (self.variant.by_user() && self.base.knows_user(user) && condition < self.num_conditions)
            .then(|| self.user_dev + user * self.num_conditions + condition)
    }

    pub fn item_dev_at(&self, item: usize, condition: usize) -> Option<usize> {
        (self.variant.by_item() && self.base.knows_item(item) && condition < self.num_conditions)
            .then(|| self.item_dev + item * self.num_conditions + condition)
    }

    fn dev_slots(&self, user: usize, item: usize, condition: usize) -> [Option<usize>; 3] {
        [
            self.condition_dev_at(condition),
            self.user_dev_at(user, condition),
            self.item_dev_at(item, condition),
        ]
    }

    /// The summed deviation term for a situation.
    pub fn deviation(&self, user: usize, item: usize, conditions: &[usize]) -> f64 {
        conditions
            .iter()
            .flat_map(|&c| self.dev_slots(user, item, c))
            .flatten()
            .map(|k| self.base.params[k])
            .sum()
    }

    pub fn predict(&self, user: usize, item: usize, conditions: &[usize]) -> f64 {
        self.base.biased_score(user, item) + self.deviation(user, item, conditions)
    }
}

impl SgdModel for CamfModel {
    fn params(&self) -> &[f64] {
        &self.base.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.base.params
    }

    fn reg(&self) -> &[f64] {
        &self.base.reg
    }

    fn score(&self, s: &Sample) -> f64 {
        self.predict(s.user, s.item, &s.context)
    }

    fn score_grad(&self, s: &Sample, out: &mut Vec<(usize, f64)>) {
        self.base.push_grad(s.user, s.item, 1.0, true, out);
        if self.frozen_context {
            return;
        }
        for &c in s.context.iter() {
            for k in self.dev_slots(s.user, s.item, c).into_iter().flatten() {
                out.push((k, 1.0));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityVariant {
    /// Independent similarity value per condition.
    Ics,
    /// Latent vector per condition; similarity `(1 + cos) / 2`.
    Lcs,
    /// Coordinate per condition; `Γ = 1 / (1 + Σ_d |x_c − x_na|)`.
    Mcs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextSimModel {
    pub variant: SimilarityVariant,
    pub base: FactorBase,
    /// `is_na[c]` for every global condition.
    is_na: Vec<bool>,
    /// Global `na` condition of each condition's dimension.
    anchor: Vec<usize>,
    /// Latent width for LCS vectors.
    width: usize,
}

impl ContextSimModel {
    fn init(
        variant: SimilarityVariant,
        mu: f64,
        num_users: usize,
        num_items: usize,
        schema: &ContextSchema,
        hp: &HyperParams,
        rng: &mut impl Rng,
    ) -> Self {
        let c = schema.num_conditions();
        let is_na: Vec<bool> = (0..c).map(|k| schema.is_na(k)).collect();
        let anchor: Vec<usize> = (0..c).map(|k| schema.na(schema.dimension_of(k))).collect();
        let width = hp.num_factors;
        let extra = match variant {
            SimilarityVariant::Lcs => c * width,
            _ => c,
        };
        let mut base = FactorBase::init(num_users, num_items, extra, mu, hp, rng);
        let at = base.extra_at();
        let noise = Normal::new(0.0, hp.init_std).expect("init_std validated");
        match variant {
            SimilarityVariant::Ics => {
                base.params[at..].fill(1.0);
            }
            SimilarityVariant::Lcs => {
                for d in 0..schema.num_dimensions() {
                    let shared: Vec<f64> = (0..width)
                        .map(|_| rng.sample(rand_distr::StandardNormal))
                        .collect();
                    for cond in schema.conditions_of(d) {
                        for k in 0..width {
                            base.params[at + cond * width + k] = shared[k] + noise.sample(rng);
                        }
                    }
                }
            }
            SimilarityVariant::Mcs => {
                for cond in 0..c {
                    base.params[at + cond] = if is_na[cond] { 0.0 } else { noise.sample(rng) };
                }
            }
        }
        if variant != SimilarityVariant::Lcs {
            for (cond, &na) in is_na.iter().enumerate() {
                if na {
                    base.reg[at + cond] = 0.0;
                }
            }
        }
        Self {
            variant,
            base,
            is_na,
            anchor,
            width,
        }
    }

    pub fn fit(
        table: &RatingTable,
        variant: SimilarityVariant,
        hp: &HyperParams,
    ) -> Result<(Self, TrainReport)> {
        let samples = Sample::from_table(table);
        let mut rng = seeded_rng(hp.rand_seed);
        let mut model = Self::init(
            variant,
            sgd::mean_rating(&samples),
            table.num_users(),
            table.num_items(),
            table.schema(),
            hp,
            &mut rng,
        );
        let report = sgd::train(&mut model, &samples, hp, table.scale(), &mut rng)?;
        let (users, items) = sgd::seen(&samples, table.num_users(), table.num_items());
        model.base.forget_unseen(&users, &items);
        Ok((model, report))
    }

    /// Untrained model whose ICS similarities are all 1; backbone all zero.
    pub fn unit(
        variant: SimilarityVariant,
        mu: f64,
        num_users: usize,
        num_items: usize,
        schema: &ContextSchema,
        factors: usize,
    ) -> Self {
        let hp = HyperParams {
            num_factors: factors.max(1),
            init_std: 0.0,
            ..HyperParams::default()
        };
        Self::init(
            variant,
            mu,
            num_users,
            num_items,
            schema,
            &hp,
            &mut seeded_rng(0),
        )
    }

    /// Parameter index of a condition's similarity value (ICS) or coordinate (MCS).
    pub fn condition_at(&self, condition: usize) -> usize {
        self.base.extra_at() + condition
    }

    fn vector(&self, condition: usize) -> &[f64] {
        let at = self.base.extra_at() + condition * self.width;
        &self.base.params[at..at + self.width]
    }

    /// Similarity of one active condition to its dimension's anchor.
    fn dimension_similarity(&self, condition: usize) -> f64 {
        if self.is_na[condition] {
            return 1.0;
        }
        match self.variant {
            SimilarityVariant::Ics => self.base.params[self.condition_at(condition)],
            SimilarityVariant::Lcs => {
                let (a, b) = (self.vector(condition), self.vector(self.anchor[condition]));
                0.5 * (1.0 + cosine(a, b))
            }
            SimilarityVariant::Mcs => unreachable!("MCS similarity is not a per-dimension product"),
        }
    }

    /// Γ(situation).
    pub fn gamma(&self, conditions: &[usize]) -> f64 {
        match self.variant {
            SimilarityVariant::Mcs => {
                let dist: f64 = conditions
                    .iter()
                    .filter(|&&c| !self.is_na[c])
                    .map(|&c| self.base.params[self.condition_at(c)].abs())
                    .sum();
                1.0 / (1.0 + dist)
            }
            _ => conditions
                .iter()
                .map(|&c| self.dimension_similarity(c))
                .product(),
        }
    }

    pub fn predict(&self, user: usize, item: usize, conditions: &[usize]) -> f64 {
        self.base.biased_score(user, item) * self.gamma(conditions)
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}

/// `∂cos(a, b)/∂a`.
fn cosine_grad(a: &[f64], b: &[f64]) -> Vec<f64> {
    let na2: f64 = a.iter().map(|x| x * x).sum();
    let nb2: f64 = b.iter().map(|x| x * x).sum();
    if na2 == 0.0 || nb2 == 0.0 {
        return vec![0.0; a.len()];
    }
    let (na, nb) = (na2.sqrt(), nb2.sqrt());
    let cos = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
    a.iter()
        .zip(b)
        .map(|(x, y)| y / (na * nb) - cos * x / na2)
        .collect()
}

impl SgdModel for ContextSimModel {
    fn params(&self) -> &[f64] {
        &self.base.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.base.params
    }

    fn reg(&self) -> &[f64] {
        &self.base.reg
    }

    fn score(&self, s: &Sample) -> f64 {
        self.predict(s.user, s.item, &s.context)
    }

    fn score_grad(&self, s: &Sample, out: &mut Vec<(usize, f64)>) {
        let gamma = self.gamma(&s.context);
        self.base.push_grad(s.user, s.item, gamma, true, out);
        let backbone = self.base.biased_score(s.user, s.item);
        match self.variant {
            SimilarityVariant::Ics => {
                for (d, &c) in s.context.iter().enumerate() {
                    if self.is_na[c] {
                        continue;
                    }
                    let others: f64 = s
                        .context
                        .iter()
                        .enumerate()
                        .filter(|&(e, _)| e != d)
                        .map(|(_, &o)| self.dimension_similarity(o))
                        .product();
                    out.push((self.condition_at(c), backbone * others));
                }
            }
            SimilarityVariant::Lcs => {
                for (d, &c) in s.context.iter().enumerate() {
                    if self.is_na[c] {
                        continue;
                    }
                    let others: f64 = s
                        .context
                        .iter()
                        .enumerate()
                        .filter(|&(e, _)| e != d)
                        .map(|(_, &o)| self.dimension_similarity(o))
                        .product();
                    let scale = backbone * others * 0.5;
                    let anchor = self.anchor[c];
                    let (a, b) = (self.vector(c), self.vector(anchor));
                    let at = self.base.extra_at();
                    for (k, g) in cosine_grad(a, b).into_iter().enumerate() {
                        out.push((at + c * self.width + k, scale * g));
                    }
                    for (k, g) in cosine_grad(b, a).into_iter().enumerate() {
                        out.push((at + anchor * self.width + k, scale * g));
                    }
                }
            }
            SimilarityVariant::Mcs => {
                let g2 = gamma * gamma;
                for &c in s.context.iter() {
                    if self.is_na[c] {
                        continue;
                    }
                    let x = self.base.params[self.condition_at(c)];
                    let sign = if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    out.push((self.condition_at(c), -backbone * sign * g2));
                }
            }
        }
    }

    fn project(&mut self) {
        if self.variant != SimilarityVariant::Ics {
            return;
        }
        let at = self.base.extra_at();
        for (c, &na) in self.is_na.iter().enumerate() {
            if !na {
                let v = &mut self.base.params[at + c];
                *v = v.clamp(MIN_SIMILARITY, 1.0);
            }
        }
    }
}
