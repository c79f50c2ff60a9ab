//! CP tensor factorization over users, items and one mode per context
//! dimension:
//!
//! ```text
//! score = Σ_k p_{u,k} · q_{i,k} · Π_d z_{active(d), k}
//! ```
//!
//! Context factors are stored per global condition (`na` rows included) and
//! start near 1, so the untrained model is close to plain MF. Their L2 penalty
//! is centred at 1 for the same reason.

use rand_distr::{Distribution, Normal};

use crate::engine::{seeded_rng, HyperParams};
use crate::error::Result;
use crate::sgd::{self, FactorBase, Sample, SgdModel, TrainReport};
use crate::table::RatingTable;

#[derive(Debug, Clone, PartialEq)]
pub struct CptfModel {
    pub base: FactorBase,
    num_conditions: usize,
}

impl CptfModel {
    pub fn fit(table: &RatingTable, hp: &HyperParams) -> Result<(Self, TrainReport)> {
        let samples = Sample::from_table(table);
        let mut rng = seeded_rng(hp.rand_seed);
        let c = table.schema().num_conditions();
        let mut base = FactorBase::init(
            table.num_users(),
            table.num_items(),
            c * hp.num_factors,
            0.0,
            hp,
            &mut rng,
        );
        let noise = Normal::new(0.0, hp.init_std).expect("init_std validated");
        let at = base.extra_at();
        for v in &mut base.params[at..] {
            *v = 1.0 + noise.sample(&mut rng);
        }
        let mut model = Self {
            base,
            num_conditions: c,
        };
        let report = sgd::train(&mut model, &samples, hp, table.scale(), &mut rng)?;
        let (users, items) = sgd::seen(&samples, table.num_users(), table.num_items());
        model.base.forget_unseen(&users, &items);
        Ok((model, report))
    }

    /// Model from row-major factor matrices; every context factor is 1.
    pub fn from_factors(
        factors: usize,
        user_factors: &[f64],
        item_factors: &[f64],
        num_conditions: usize,
    ) -> Self {
        let num_users = user_factors.len() / factors;
        let num_items = item_factors.len() / factors;
        let mut params = vec![0.0; num_users + num_items];
        params.extend_from_slice(user_factors);
        params.extend_from_slice(item_factors);
        params.extend(std::iter::repeat_n(1.0, num_conditions * factors));
        let reg = vec![0.0; params.len()];
        Self {
            base: FactorBase {
                params,
                reg,
                mu: 0.0,
                num_users,
                num_items,
                factors,
            },
            num_conditions,
        }
    }

    pub fn num_conditions(&self) -> usize {
        self.num_conditions
    }

    /// Parameter index of `z_{condition, 0}`.
    pub fn z_at(&self, condition: usize) -> usize {
        self.base.extra_at() + condition * self.base.factors
    }

    pub fn z(&self, condition: usize) -> &[f64] {
        let at = self.z_at(condition);
        &self.base.params[at..at + self.base.factors]
    }

    pub fn z_mut(&mut self, condition: usize) -> &mut [f64] {
        let at = self.z_at(condition);
        let f = self.base.factors;
        &mut self.base.params[at..at + f]
    }

    fn context_product(&self, conditions: &[usize], k: usize, skip: Option<usize>) -> f64 {
        conditions
            .iter()
            .enumerate()
            .filter(|&(d, _)| Some(d) != skip)
            .map(|(_, &c)| self.base.params[self.z_at(c) + k])
            .product()
    }

    pub fn predict(&self, user: usize, item: usize, conditions: &[usize]) -> f64 {
        if !self.base.knows_user(user) || !self.base.knows_item(item) {
            return 0.0;
        }
        let (p, q) = (self.base.p(user), self.base.q(item));
        (0..self.base.factors)
            .map(|k| p[k] * q[k] * self.context_product(conditions, k, None))
            .sum()
    }
}

impl SgdModel for CptfModel {
    fn params(&self) -> &[f64] {
        &self.base.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.base.params
    }

    fn reg(&self) -> &[f64] {
        &self.base.reg
    }

    fn reg_center(&self, k: usize) -> f64 {
        if k >= self.base.extra_at() {
            1.0
        } else {
            0.0
        }
    }

    fn score(&self, s: &Sample) -> f64 {
        self.predict(s.user, s.item, &s.context)
    }

    fn score_grad(&self, s: &Sample, out: &mut Vec<(usize, f64)>) {
        if !self.base.knows_user(s.user) || !self.base.knows_item(s.item) {
            return;
        }
        let (pu, qi) = (self.base.p_at(s.user), self.base.q_at(s.item));
        for k in 0..self.base.factors {
            let (p, q) = (self.base.params[pu + k], self.base.params[qi + k]);
            let z = self.context_product(&s.context, k, None);
            out.push((pu + k, q * z));
            out.push((qi + k, p * z));
            for (d, &c) in s.context.iter().enumerate() {
                out.push((
                    self.z_at(c) + k,
                    p * q * self.context_product(&s.context, k, Some(d)),
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{MfModel, MfVariant};
    use crate::schema::SchemaBuilder;
    use crate::sgd::gradient_check;
    use crate::synthetic;
    use crate::table::{Interner, RatingTuple};
    use rand::Rng;

    #[test]
    fn unit_context_factors_reduce_to_pmf() {
        let p = [0.3, -1.2, 0.7, 2.0, 0.1, 0.5];
        let q = [1.5, 0.2, -0.4, 0.9];
        let cp = CptfModel::from_factors(2, &p, &q, 6);
        let mf = MfModel::from_factors(MfVariant::Pmf, 0.0, 2, &p, &q);
        for u in 0..3 {
            for i in 0..2 {
                assert!((cp.predict(u, i, &[1, 5]) - mf.predict(u, i)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn single_factor_plug_in() {
        let mut m = CptfModel::from_factors(1, &[2.0], &[1.5], 6);
        m.z_mut(1)[0] = 0.5;
        m.z_mut(5)[0] = 1.0;
        assert!((m.predict(0, 0, &[1, 5]) - 1.5).abs() < 1e-12);
        let zero = CptfModel::from_factors(1, &[0.0], &[1.5], 6);
        assert_eq!(zero.predict(0, 0, &[1, 5]), 0.0);
    }

    #[test]
    fn multilinear_in_each_mode() {
        let mut m = CptfModel::from_factors(2, &[0.3, -1.2], &[1.5, 0.2], 6);
        m.z_mut(2).copy_from_slice(&[0.7, 1.3]);
        let before = m.predict(0, 0, &[2, 4]);
        for v in m.z_mut(2) {
            *v *= 2.5;
        }
        assert!((m.predict(0, 0, &[2, 4]) - 2.5 * before).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let table = synthetic::random_table(31, 5, 5, 40);
        let hp = HyperParams {
            num_iterations: 3,
            init_std: 0.3,
            ..HyperParams::default()
        };
        let (m, _) = CptfModel::fit(&table, &hp).unwrap();
        let err = gradient_check(&m, &Sample::from_table(&table), 1e-6);
        assert!(err <= 1e-4, "{err}");
    }

    #[test]
    fn zero_iterations_is_seed_deterministic() {
        let table = synthetic::random_table(32, 6, 6, 50);
        let hp = HyperParams {
            num_iterations: 0,
            ..HyperParams::default()
        };
        let (a, _) = CptfModel::fit(&table, &hp).unwrap();
        let (b, _) = CptfModel::fit(&table, &hp).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn learns_multiplicative_weekday_effect() {
        let mut b = SchemaBuilder::new();
        let t = b.dimension("Time");
        b.condition(t, "Weekday");
        let schema = b.build();
        let weekday = schema.situation([("Time", "Weekday")]).unwrap();
        let mut rng = seeded_rng(9);
        let (mut users, mut items) = (Interner::new(), Interner::new());
        let user_level: Vec<f64> = (0..30).map(|_| rng.random_range(1.5..2.5)).collect();
        let item_level: Vec<f64> = (0..20).map(|_| rng.random_range(1.5..2.5)).collect();
        let mut rows = Vec::new();
        for (u, ul) in user_level.iter().enumerate() {
            let uid = users.intern(&format!("u{u}"));
            for (i, il) in item_level.iter().enumerate() {
                let iid = items.intern(&format!("i{i}"));
                for on_weekday in [false, true] {
                    let r = ul * il * if on_weekday { 0.5 } else { 1.0 };
                    let situation = if on_weekday {
                        weekday.clone()
                    } else {
                        schema.all_na()
                    };
                    rows.push(RatingTuple {
                        user: uid,
                        item: iid,
                        rating: r,
                        situation,
                    });
                }
            }
        }
        let table = RatingTable::new(schema, users, items, rows).unwrap();
        let hp = HyperParams {
            num_factors: 4,
            num_iterations: 150,
            init_std: 0.3,
            reg_user: 0.001,
            reg_item: 0.001,
            reg_context: 0.001,
            ..HyperParams::default()
        };
        let (m, _) = CptfModel::fit(&table, &hp).unwrap();
        let (mut na_sum, mut wd_sum) = (0.0, 0.0);
        for u in 0..30 {
            for i in 0..20 {
                na_sum += m.predict(u, i, &[0]);
                wd_sum += m.predict(u, i, weekday.conditions());
            }
        }
        let reduction = 1.0 - wd_sum / na_sum;
        assert!((0.4..=0.6).contains(&reduction), "{reduction}");
    }

    #[test]
    fn small_init_does_not_collapse_context_factors() {
        let table = synthetic::PlantedLift {
            rows: 2000,
            weekend_share: 0.5,
            ..synthetic::PlantedLift::default()
        }
        .generate();
        let hp = HyperParams {
            num_factors: 4,
            num_iterations: 50,
            reg_context: 0.01,
            ..HyperParams::default()
        };
        let (m, _) = CptfModel::fit(&table, &hp).unwrap();
        let mean = table.rows().iter().map(|r| r.rating).sum::<f64>() / table.rows().len() as f64;
        let (mut fit, mut flat) = (0.0, 0.0);
        for r in table.rows() {
            let p = table
                .scale()
                .clamp(m.predict(r.user, r.item, r.situation.conditions()));
            fit += (r.rating - p).powi(2);
            flat += (r.rating - mean).powi(2);
        }
        assert!(fit < flat, "{fit} vs {flat}");
        assert!(m.z(1).iter().all(|z| *z > 0.5));
    }
}
