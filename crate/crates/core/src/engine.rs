//! The common recommender contract: hyperparameters, the algorithm roster,
//! training dispatch, clamped prediction and top-N ranking.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{
    raw_matrix, AverageVariant, AveragesModel, KnnModel, KnnVariant, MfModel, MfVariant, SlimModel,
};
use crate::camf::{CamfModel, ContextSimModel, DeviationVariant, SimilarityVariant};
use crate::cptf::CptfModel;
use crate::cslim::CslimModel;
use crate::error::{Error, Result};
use crate::schema::{ContextSchema, ContextSituation};
use crate::sgd::TrainReport;
use crate::splitting::{SplitCriterion, SplitModel, SplitVariant};
use crate::table::{RatingScale, RatingTable};

/// Deterministic generator used for every stochastic step.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EarlyStopMetric {
    Rmse,
    Mae,
}

impl FromStr for EarlyStopMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rmse" => Ok(Self::Rmse),
            "mae" => Ok(Self::Mae),
            _ => Err(Error::InvalidArgument(format!(
                "unknown early-stop metric `{s}`"
            ))),
        }
    }
}

impl fmt::Display for EarlyStopMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rmse => "RMSE",
            Self::Mae => "MAE",
        })
    }
}

/// True once the best value of `history` is `patience` or more evaluations old.
pub fn early_stop_check(history: &[f64], patience: usize) -> bool {
    let Some(best) =
        history
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
                Some((_, b)) if v >= b => best,
                _ => Some((i, v)),
            })
    else {
        return false;
    };
    history.len() - 1 - best.0 >= patience
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub num_factors: usize,
    pub learn_rate: f64,
    pub reg_user: f64,
    pub reg_item: f64,
    pub reg_context: f64,
    pub l1_reg: f64,
    pub l2_reg: f64,
    pub num_iterations: usize,
    pub early_stop: Option<EarlyStopMetric>,
    pub init_std: f64,
    pub knn_k: usize,
    pub knn_shrinkage: f64,
    pub top_n: usize,
    pub rand_seed: u64,
    /// Splitting approaches only.
    pub split: SplitCriterion,
    /// 2D recommender trained after a split.
    pub traditional: Algorithm,
    /// Per-iteration training logs.
    pub verbose: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            num_factors: 10,
            learn_rate: 0.01,
            reg_user: 0.1,
            reg_item: 0.1,
            reg_context: 0.1,
            l1_reg: 0.01,
            l2_reg: 0.01,
            num_iterations: 100,
            early_stop: None,
            init_std: 0.01,
            knn_k: 20,
            knn_shrinkage: 0.0,
            top_n: 10,
            rand_seed: 1,
            split: SplitCriterion::default(),
            traditional: Algorithm::BiasedMf,
            verbose: false,
        }
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidHyperParameter {
        name,
        reason: reason.into(),
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("must be a finite non-negative number, got {v}"),
        ))
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_factors == 0 {
            return Err(invalid("num.factors", "must be positive"));
        }
        if !(self.learn_rate.is_finite() && self.learn_rate > 0.0) {
            return Err(invalid(
                "learn.rate",
                format!("must be positive, got {}", self.learn_rate),
            ));
        }
        non_negative("reg.user", self.reg_user)?;
        non_negative("reg.item", self.reg_item)?;
        non_negative("reg.context", self.reg_context)?;
        non_negative("reg.l1", self.l1_reg)?;
        non_negative("reg.l2", self.l2_reg)?;
        non_negative("init.std", self.init_std)?;
        non_negative("knn.shrinkage", self.knn_shrinkage)?;
        if self.knn_k == 0 {
            return Err(invalid("knn.k", "must be positive"));
        }
        if self.top_n == 0 {
            return Err(invalid("topN", "must be positive"));
        }
        if !(self.split.alpha > 0.0 && self.split.alpha < 1.0) {
            return Err(invalid(
                "alpha",
                format!("must lie in (0, 1), got {}", self.split.alpha),
            ));
        }
        if self.split.min_length == 0 {
            return Err(invalid("minlength", "must be at least 1"));
        }
        if !self.traditional.is_2d() {
            return Err(Error::NotTwoDimensional(
                self.traditional.name().to_string(),
            ));
        }
        Ok(())
    }

    /// Parameter string reported with results.
    pub fn describe(&self, algorithm: Algorithm) -> String {
        use Algorithm::*;
        let sgd = format!(
            "factors={} lrate={} reg.user={} reg.item={} iters={} init.std={} seed={}",
            self.num_factors,
            self.learn_rate,
            self.reg_user,
            self.reg_item,
            self.num_iterations,
            self.init_std,
            self.rand_seed
        );
        let mut out = match algorithm {
            GlobalAvg | UserAvg | ItemAvg | UserItemAvg | ContextAvg | ItemContextAvg
            | UserContextAvg => String::new(),
            UserKnn | ItemKnn => format!("k={} shrinkage={}", self.knn_k, self.knn_shrinkage),
            Pmf | BiasedMf => sgd,
            Slim => format!(
                "l1={} l2={} iters={}",
                self.l1_reg, self.l2_reg, self.num_iterations
            ),
            UserSplitting | ItemSplitting | UiSplitting => format!(
                "traditional={} minlength={} alpha={} [{}]",
                self.traditional.name(),
                self.split.min_length,
                self.split.alpha,
                self.describe(self.traditional)
            ),
            CamfC | CamfCi | CamfCu | CamfCuci | CamfIcs | CamfLcs | CamfMcs | Cptf => {
                format!("{sgd} reg.context={}", self.reg_context)
            }
            CslimC | CslimCi | CslimCu | CslimCuci => format!(
                "l1={} l2={} reg.context={} lrate={} iters={}",
                self.l1_reg, self.l2_reg, self.reg_context, self.learn_rate, self.num_iterations
            ),
        };
        if let Some(m) = self.early_stop {
            out.push_str(&format!(" early-stop={m}"));
        }
        out.trim().to_string()
    }
}

macro_rules! roster {
    ($($variant:ident => $name:literal),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum Algorithm {
            $($variant),*
        }

        impl Algorithm {
            pub const ALL: &'static [Algorithm] = &[$(Algorithm::$variant),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Algorithm::$variant => $name),*
                }
            }
        }
    };
}

roster! {
    GlobalAvg => "GlobalAvg",
    UserAvg => "UserAvg",
    ItemAvg => "ItemAvg",
    UserItemAvg => "UserItemAvg",
    ContextAvg => "ContextAvg",
    ItemContextAvg => "ItemContextAvg",
    UserContextAvg => "UserContextAvg",
    UserKnn => "UserKNN",
    ItemKnn => "ItemKNN",
    Pmf => "PMF",
    BiasedMf => "BiasedMF",
    Slim => "SLIM",
    UserSplitting => "UserSplitting",
    ItemSplitting => "ItemSplitting",
    UiSplitting => "UISplitting",
    CamfC => "CAMF_C",
    CamfCi => "CAMF_CI",
    CamfCu => "CAMF_CU",
    CamfCuci => "CAMF_CUCI",
    CamfIcs => "CAMF_ICS",
    CamfLcs => "CAMF_LCS",
    CamfMcs => "CAMF_MCS",
    CslimC => "CSLIM_C",
    CslimCi => "CSLIM_CI",
    CslimCu => "CSLIM_CU",
    CslimCuci => "CSLIM_CUCI",
    Cptf => "CPTF",
}

impl Algorithm {
    /// Context-free recommenders usable after a split.
    pub fn is_2d(self) -> bool {
        use Algorithm::*;
        matches!(
            self,
            GlobalAvg | UserAvg | ItemAvg | UserItemAvg | UserKnn | ItemKnn | Pmf | BiasedMf | Slim
        )
    }

    pub fn is_ranking_only(self) -> bool {
        use Algorithm::*;
        matches!(self, CslimC | CslimCi | CslimCu | CslimCuci)
    }

    pub fn is_splitting(self) -> bool {
        use Algorithm::*;
        matches!(self, UserSplitting | ItemSplitting | UiSplitting)
    }

    pub fn valid_names() -> String {
        Self::ALL
            .iter()
            .map(|a| a.name())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|a| a.name().eq_ignore_ascii_case(wanted))
            .ok_or_else(|| Error::UnknownAlgorithm {
                name: wanted.to_string(),
                valid: Self::valid_names(),
            })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub enum ModelKind {
    Averages(AveragesModel),
    Knn(KnnModel),
    Mf(MfModel),
    Slim(SlimModel),
    Camf(CamfModel),
    Similarity(ContextSimModel),
    Cptf(CptfModel),
    Cslim(CslimModel),
    Split(Box<SplitModel>),
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub algorithm: Algorithm,
    pub schema: ContextSchema,
    pub scale: RatingScale,
    pub kind: ModelKind,
    /// Present for SGD-trained models.
    pub report: Option<TrainReport>,
}

/// Trains `algorithm` on `table`.
pub fn fit(algorithm: Algorithm, table: &RatingTable, hp: &HyperParams) -> Result<TrainedModel> {
    hp.validate()?;
    if table.is_empty() {
        return Err(Error::EmptyDataset);
    }
    use Algorithm::*;
    let averages = |v| ModelKind::Averages(AveragesModel::fit(table, v));
    let mut report = None;
    let kind = match algorithm {
        GlobalAvg => averages(AverageVariant::Global),
        UserAvg => averages(AverageVariant::User),
        ItemAvg => averages(AverageVariant::Item),
        UserItemAvg => averages(AverageVariant::UserItem),
        ContextAvg => averages(AverageVariant::Context),
        ItemContextAvg => averages(AverageVariant::ItemContext),
        UserContextAvg => averages(AverageVariant::UserContext),
        UserKnn | ItemKnn => {
            let variant = if algorithm == UserKnn {
                KnnVariant::User
            } else {
                KnnVariant::Item
            };
            ModelKind::Knn(KnnModel::fit(
                &raw_matrix(table),
                variant,
                hp.knn_k,
                hp.knn_shrinkage,
            ))
        }
        Pmf | BiasedMf => {
            let variant = if algorithm == Pmf {
                MfVariant::Pmf
            } else {
                MfVariant::Biased
            };
            let (m, r) = MfModel::fit(&raw_matrix(table), variant, hp, table.scale())?;
            report = Some(r);
            ModelKind::Mf(m)
        }
        Slim => ModelKind::Slim(SlimModel::fit(
            &raw_matrix(table),
            hp.num_iterations,
            hp.l1_reg,
            hp.l2_reg,
        )),
        UserSplitting | ItemSplitting | UiSplitting => {
            let variant = match algorithm {
                UserSplitting => SplitVariant::User,
                ItemSplitting => SplitVariant::Item,
                _ => SplitVariant::UserItem,
            };
            ModelKind::Split(Box::new(SplitModel::fit(
                variant,
                hp.traditional,
                table,
                hp,
            )?))
        }
        CamfC | CamfCi | CamfCu | CamfCuci => {
            let variant = match algorithm {
                CamfC => DeviationVariant::C,
                CamfCi => DeviationVariant::CI,
                CamfCu => DeviationVariant::CU,
                _ => DeviationVariant::CUCI,
            };
            let (m, r) = CamfModel::fit(table, variant, hp)?;
            report = Some(r);
            ModelKind::Camf(m)
        }
        CamfIcs | CamfLcs | CamfMcs => {
            let variant = match algorithm {
                CamfIcs => SimilarityVariant::Ics,
                CamfLcs => SimilarityVariant::Lcs,
                _ => SimilarityVariant::Mcs,
            };
            let (m, r) = ContextSimModel::fit(table, variant, hp)?;
            report = Some(r);
            ModelKind::Similarity(m)
        }
        CslimC | CslimCi | CslimCu | CslimCuci => {
            let variant = match algorithm {
                CslimC => DeviationVariant::C,
                CslimCi => DeviationVariant::CI,
                CslimCu => DeviationVariant::CU,
                _ => DeviationVariant::CUCI,
            };
            ModelKind::Cslim(CslimModel::fit(table, variant, hp)?)
        }
        Cptf => {
            let (m, r) = CptfModel::fit(table, hp)?;
            report = Some(r);
            ModelKind::Cptf(m)
        }
    };
    Ok(TrainedModel {
        algorithm,
        schema: table.schema().clone(),
        scale: table.scale(),
        kind,
        report,
    })
}

/// [`fit`] with the algorithm given by (case-insensitive) name.
pub fn fit_named(name: &str, table: &RatingTable, hp: &HyperParams) -> Result<TrainedModel> {
    fit(name.parse()?, table, hp)
}

impl TrainedModel {
    /// Unclamped score. The situation is assumed valid for the training schema.
    pub fn score_raw(&self, user: usize, item: usize, situation: &ContextSituation) -> f64 {
        let ctx = situation.conditions();
        match &self.kind {
            ModelKind::Averages(m) => m.predict(user, item, Some(situation)),
            ModelKind::Knn(m) => m.predict(user, item),
            ModelKind::Mf(m) => m.predict(user, item),
            ModelKind::Slim(m) => m.score(user, item),
            ModelKind::Camf(m) => m.predict(user, item, ctx),
            ModelKind::Similarity(m) => m.predict(user, item, ctx),
            ModelKind::Cptf(m) => m.predict(user, item, ctx),
            ModelKind::Cslim(m) => m.score(user, item, ctx),
            ModelKind::Split(m) => m.score(user, item, situation),
        }
    }

    /// Rating prediction clamped to the training scale.
    pub fn predict(&self, user: usize, item: usize, situation: &ContextSituation) -> Result<f64> {
        self.schema.validate(situation)?;
        Ok(self.scale.clamp(self.score_raw(user, item, situation)))
    }

    /// Top `n` of `candidates` by unclamped score, descending; ties by item index.
    pub fn rank(
        &self,
        user: usize,
        situation: &ContextSituation,
        candidates: &[usize],
        n: usize,
    ) -> Result<Vec<usize>> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be positive".into()));
        }
        self.schema.validate(situation)?;
        let scored: Vec<(usize, f64)> = candidates
            .iter()
            .map(|&i| (i, self.score_raw(user, i, situation)))
            .collect();
        Ok(top_n(scored, n))
    }
}

/// Sorts by score descending then index ascending and keeps `n`.
pub fn top_n(mut scored: Vec<(usize, f64)>, n: usize) -> Vec<usize> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.into_iter().take(n).map(|(i, _)| i).collect()
}
