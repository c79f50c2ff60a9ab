//! Evaluation protocols and the evaluation driver.

pub mod metrics;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::engine::{fit, seeded_rng, Algorithm, HyperParams};
use crate::error::{Error, Result};
use crate::schema::ContextSituation;
use crate::table::RatingTable;

pub use metrics::{mae, mpe, rank_list_metrics, ranking_metrics, rmse, RankingMetrics, MPE_DELTA};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestView {
    All,
}

impl FromStr for TestView {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            Ok(TestView::All)
        } else {
            Err(Error::UnsupportedTestView(s.to_string()))
        }
    }
}

impl fmt::Display for TestView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("all")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Protocol {
    CrossValidation {
        k: usize,
        seed: u64,
        parallel: bool,
        test_view: TestView,
    },
    GivenRatio {
        ratio: f64,
        seed: u64,
    },
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol::CrossValidation {
            k: 5,
            seed: 1,
            parallel: false,
            test_view: TestView::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Rating,
    Ranking,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Rating => "rating",
            Task::Ranking => "ranking",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub task: Task,
    pub top_n: usize,
    /// Minimum relevant rating. `None`: 1 on binarized data, otherwise the
    /// rating-scale midpoint.
    pub relevance_threshold: Option<f64>,
    pub mpe_delta: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            task: Task::Rating,
            top_n: 10,
            relevance_threshold: None,
            mpe_delta: MPE_DELTA,
        }
    }
}

/// Row indices per fold: a seeded shuffle dealt round-robin. Each fold is sorted.
pub fn kfold_split(table: &RatingTable, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    kfold_indices(table.len(), k, seed)
}

pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the {n} available rows"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, row) in order.into_iter().enumerate() {
        folds[pos % k].push(row);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// `(train, test)` row indices; the first `⌈ratio · n⌉` shuffled rows train.
pub fn ratio_split(table: &RatingTable, ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    ratio_indices(table.len(), ratio, seed)
}

pub fn ratio_indices(n: usize, ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let cut = (ratio * n as f64).ceil() as usize;
    if cut == 0 || cut >= n {
        return Err(Error::InvalidArgument(format!(
            "ratio {ratio} over {n} rows leaves an empty train or test side"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed));
    let mut train = order[..cut].to_vec();
    let mut test = order[cut..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub algorithm: Algorithm,
    pub task: Task,
    /// Metric name → value averaged over folds, in reporting order.
    pub metrics: IndexMap<String, f64>,
    pub folds: Vec<IndexMap<String, f64>>,
    pub params: String,
}

impl EvalReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    /// `name=value` pairs with six decimals, comma-separated.
    pub fn format_metrics(&self) -> String {
        self.metrics
            .iter()
            .map(|(k, v)| format!("{k}={v:.6}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn fold_metrics(
    algorithm: Algorithm,
    table: &RatingTable,
    train: &[usize],
    test: &[usize],
    opts: &EvalOptions,
    hp: &HyperParams,
) -> Result<Option<IndexMap<String, f64>>> {
    let model = fit(algorithm, &table.subset(train), hp)?;
    let mut out = IndexMap::new();
    match opts.task {
        Task::Rating => {
            let mut pairs = Vec::with_capacity(test.len());
            for &t in test {
                let r = &table.rows()[t];
                pairs.push((r.rating, model.predict(r.user, r.item, &r.situation)?));
            }
            out.insert("MAE".into(), mae(&pairs)?);
            out.insert("RMSE".into(), rmse(&pairs)?);
            out.insert("MPE".into(), mpe(&pairs, opts.mpe_delta)?);
        }
        Task::Ranking => {
            let threshold = opts.relevance_threshold.unwrap_or(if table.is_binarized() {
                1.0
            } else {
                table.scale().midpoint()
            });
            let mut seen: HashSet<(usize, &ContextSituation, usize)> = HashSet::new();
            for &t in train {
                let r = &table.rows()[t];
                seen.insert((r.user, &r.situation, r.item));
            }
            let mut keys: IndexMap<(usize, &ContextSituation), HashSet<usize>> = IndexMap::new();
            for &t in test {
                let r = &table.rows()[t];
                let relevant = keys.entry((r.user, &r.situation)).or_default();
                if r.rating >= threshold {
                    relevant.insert(r.item);
                }
            }
            keys.retain(|_, rel| !rel.is_empty());
            if keys.is_empty() {
                return Ok(None);
            }
            let n = opts.top_n;
            let mut lists = Vec::with_capacity(keys.len());
            let mut relevant = Vec::with_capacity(keys.len());
            for ((user, situation), rel) in keys {
                let candidates: Vec<usize> = (0..table.num_items())
                    .filter(|&i| !seen.contains(&(user, situation, i)))
                    .collect();
                lists.push(model.rank(user, situation, &candidates, n)?);
                relevant.push(rel);
            }
            let m = ranking_metrics(&lists, &relevant, n)?;
            out.insert(format!("Pre@{n}"), m.precision);
            out.insert(format!("Rec@{n}"), m.recall);
            out.insert("MAP".into(), m.map);
            out.insert("NDCG".into(), m.ndcg);
            out.insert("MRR".into(), m.mrr);
        }
    }
    Ok(Some(out))
}

/// Fits and scores `algorithm` under `protocol`; metrics are averaged over
/// folds in fold order. Every fold is trained with the same seed.
pub fn evaluate(
    algorithm: Algorithm,
    table: &RatingTable,
    protocol: &Protocol,
    opts: &EvalOptions,
    hp: &HyperParams,
) -> Result<EvalReport> {
    if opts.task == Task::Rating && algorithm.is_ranking_only() {
        return Err(Error::RankingOnly(algorithm.name().to_string()));
    }
    if opts.top_n == 0 {
        return Err(Error::InvalidArgument("topN must be positive".into()));
    }
    hp.validate()?;
    let (splits, parallel): (Vec<(Vec<usize>, Vec<usize>)>, bool) = match *protocol {
        Protocol::CrossValidation {
            k, seed, parallel, ..
        } => {
            let folds = kfold_split(table, k, seed)?;
            let splits = (0..k)
                .map(|f| {
                    let train = (0..k)
                        .filter(|&g| g != f)
                        .flat_map(|g| folds[g].iter().copied());
                    let mut train: Vec<usize> = train.collect();
                    train.sort_unstable();
                    (train, folds[f].clone())
                })
                .collect();
            (splits, parallel)
        }
        Protocol::GivenRatio { ratio, seed } => (vec![ratio_split(table, ratio, seed)?], false),
    };
    let run = |(train, test): &(Vec<usize>, Vec<usize>)| {
        fold_metrics(algorithm, table, train, test, opts, hp)
    };
    let results: Vec<Option<IndexMap<String, f64>>> = if parallel {
        splits.par_iter().map(run).collect::<Result<_>>()?
    } else {
        splits.iter().map(run).collect::<Result<_>>()?
    };
    let folds: Vec<IndexMap<String, f64>> = results.into_iter().flatten().collect();
    if folds.is_empty() {
        return Err(Error::InvalidArgument(
            "no test user has a relevant item".into(),
        ));
    }
    let mut sums: IndexMap<String, f64> = IndexMap::new();
    for fold in &folds {
        for (k, v) in fold {
            *sums.entry(k.clone()).or_default() += v;
        }
    }
    let metrics = sums
        .into_iter()
        .map(|(k, v)| (k, v / folds.len() as f64))
        .collect();
    Ok(EvalReport {
        algorithm,
        task: opts.task,
        metrics,
        folds,
        params: hp.describe(algorithm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::fixtures::table2;
    use crate::ingest::binarize;
    use crate::synthetic;

    #[test]
    fn ten_rows_five_folds() {
        let folds = kfold_indices(10, 5, 1).unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(folds, kfold_indices(10, 5, 1).unwrap());
        assert_ne!(
            kfold_indices(100, 5, 1).unwrap(),
            kfold_indices(100, 5, 2).unwrap()
        );
        assert!(kfold_indices(3, 5, 1).is_err());
    }

    #[test]
    fn ratio_split_uses_ceiling() {
        let (train, test) = ratio_indices(10, 0.8, 1).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        let (train, test) = ratio_indices(3, 0.5, 1).unwrap();
        assert_eq!((train.len(), test.len()), (2, 1));
        assert_eq!(
            ratio_indices(3, 0.5, 1).unwrap(),
            ratio_indices(3, 0.5, 1).unwrap()
        );
        assert!(ratio_indices(1, 0.5, 1).is_err());
    }

    #[test]
    fn global_average_two_fold_by_hand() {
        let t = table2();
        let protocol = Protocol::CrossValidation {
            k: 2,
            seed: 1,
            parallel: false,
            test_view: TestView::All,
        };
        let report = evaluate(
            Algorithm::GlobalAvg,
            &t,
            &protocol,
            &EvalOptions::default(),
            &HyperParams::default(),
        )
        .unwrap();
        let folds = kfold_split(&t, 2, 1).unwrap();
        let ratings: Vec<f64> = t.rows().iter().map(|r| r.rating).collect();
        let mut maes = Vec::new();
        for f in 0..2 {
            let train = &folds[1 - f];
            let mean = train.iter().map(|&i| ratings[i]).sum::<f64>() / train.len() as f64;
            let err: f64 = folds[f]
                .iter()
                .map(|&i| (ratings[i] - mean).abs())
                .sum::<f64>()
                / folds[f].len() as f64;
            maes.push(err);
        }
        let expected = (maes[0] + maes[1]) / 2.0;
        assert!((report.metric("MAE").unwrap() - expected).abs() < 1e-12);
        assert!(report.metric("RMSE").unwrap() >= report.metric("MAE").unwrap());
    }

    #[test]
    fn cslim_refuses_rating_task() {
        let t = table2();
        let err = evaluate(
            Algorithm::CslimC,
            &t,
            &Protocol::default(),
            &EvalOptions::default(),
            &HyperParams::default(),
        );
        assert!(matches!(err, Err(Error::RankingOnly(_))));
    }

    #[test]
    fn negative_relevance_threshold_makes_everything_relevant() {
        let t = binarize(&synthetic::random_table(61, 8, 8, 80), 3.0);
        let opts = EvalOptions {
            task: Task::Ranking,
            relevance_threshold: Some(-1.0),
            top_n: 5,
            ..EvalOptions::default()
        };
        let protocol = Protocol::GivenRatio {
            ratio: 0.8,
            seed: 1,
        };
        let report = evaluate(
            Algorithm::ItemAvg,
            &t,
            &protocol,
            &opts,
            &HyperParams::default(),
        )
        .unwrap();
        let (_, test) = ratio_split(&t, 0.8, 1).unwrap();
        let keys: HashSet<_> = test
            .iter()
            .map(|&i| (t.rows()[i].user, &t.rows()[i].situation))
            .collect();
        // every test (user, situation) pair becomes a key
        assert!(!keys.is_empty());
        for (k, v) in &report.metrics {
            assert!((0.0..=1.0).contains(v), "{k}={v}");
        }
    }

    #[test]
    fn parallel_folds_are_bit_identical() {
        let t = synthetic::random_table(62, 15, 10, 150);
        let seq = Protocol::CrossValidation {
            k: 5,
            seed: 3,
            parallel: false,
            test_view: TestView::All,
        };
        let par = Protocol::CrossValidation {
            k: 5,
            seed: 3,
            parallel: true,
            test_view: TestView::All,
        };
        let hp = HyperParams {
            num_iterations: 10,
            ..HyperParams::default()
        };
        let a = evaluate(Algorithm::CamfCi, &t, &seq, &EvalOptions::default(), &hp).unwrap();
        let b = evaluate(Algorithm::CamfCi, &t, &par, &EvalOptions::default(), &hp).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn only_all_test_view() {
        assert_eq!("ALL".parse::<TestView>().unwrap(), TestView::All);
        assert_eq!(
            "cold".parse::<TestView>().unwrap_err().to_string(),
            "unsupported test view: cold"
        );
    }
}
