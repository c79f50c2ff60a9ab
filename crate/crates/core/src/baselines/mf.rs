use crate::engine::{seeded_rng, HyperParams};
use crate::error::Result;
use crate::sgd::{self, FactorBase, Sample, SgdModel, TrainReport};
use crate::table::RatingScale;

use super::RatingMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfVariant {
    /// `p_u · q_i`
    Pmf,
    /// `μ + b_u + b_i + p_u · q_i`
    Biased,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfModel {
    pub variant: MfVariant,
    pub base: FactorBase,
}

impl MfModel {
    /// SGD on the collapsed matrix.
    pub fn fit(
        matrix: &RatingMatrix,
        variant: MfVariant,
        hp: &HyperParams,
        scale: RatingScale,
    ) -> Result<(Self, TrainReport)> {
        let collapsed = matrix.collapsed();
        let samples: Vec<Sample> = collapsed
            .entries
            .iter()
            .map(|e| Sample {
                user: e.user,
                item: e.item,
                rating: e.rating,
                context: Box::new([]),
            })
            .collect();
        let mut rng = seeded_rng(hp.rand_seed);
        let mu = match variant {
            MfVariant::Pmf => 0.0,
            MfVariant::Biased => sgd::mean_rating(&samples),
        };
        let base = FactorBase::init(matrix.num_users, matrix.num_items, 0, mu, hp, &mut rng);
        let mut model = Self { variant, base };
        let report = sgd::train(&mut model, &samples, hp, scale, &mut rng)?;
        let (users, items) = sgd::seen(&samples, matrix.num_users, matrix.num_items);
        model.base.forget_unseen(&users, &items);
        Ok((model, report))
    }

    /// Model with explicit factors (row-major `num_users × f` and
    /// `num_items × f`) and zero biases.
    pub fn from_factors(
        variant: MfVariant,
        mu: f64,
        factors: usize,
        user_factors: &[f64],
        item_factors: &[f64],
    ) -> Self {
        let num_users = user_factors.len() / factors;
        let num_items = item_factors.len() / factors;
        let mut params = vec![0.0; num_users + num_items];
        params.extend_from_slice(user_factors);
        params.extend_from_slice(item_factors);
        let reg = vec![0.0; params.len()];
        Self {
            variant,
            base: FactorBase {
                params,
                reg,
                mu,
                num_users,
                num_items,
                factors,
            },
        }
    }

    pub fn predict(&self, user: usize, item: usize) -> f64 {
        match self.variant {
            MfVariant::Pmf => self.base.dot(user, item),
            MfVariant::Biased => self.base.biased_score(user, item),
        }
    }
}

impl SgdModel for MfModel {
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
        self.predict(s.user, s.item)
    }

    fn score_grad(&self, s: &Sample, out: &mut Vec<(usize, f64)>) {
        self.base
            .push_grad(s.user, s.item, 1.0, self.variant == MfVariant::Biased, out);
    }
}
