//! Rating-prediction and top-N metrics.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Default tolerance of [`mpe`].
pub const MPE_DELTA: f64 = 1e-5;

fn non_empty(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no prediction pairs".into()));
    }
    Ok(pairs.len() as f64)
}

/// Mean absolute error over `(actual, predicted)` pairs.
pub fn mae(pairs: &[(f64, f64)]) -> Result<f64> {
    let n = non_empty(pairs)?;
    Ok(pairs.iter().map(|(a, p)| (a - p).abs()).sum::<f64>() / n)
}

pub fn rmse(pairs: &[(f64, f64)]) -> Result<f64> {
    let n = non_empty(pairs)?;
    Ok((pairs.iter().map(|(a, p)| (a - p) * (a - p)).sum::<f64>() / n).sqrt())
}

/// Fraction of pairs whose absolute error exceeds `delta`.
pub fn mpe(pairs: &[(f64, f64)], delta: f64) -> Result<f64> {
    let n = non_empty(pairs)?;
    Ok(pairs.iter().filter(|(a, p)| (a - p).abs() > delta).count() as f64 / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RankingMetrics {
    pub precision: f64,
    pub recall: f64,
    pub map: f64,
    pub ndcg: f64,
    pub mrr: f64,
}

/// Metrics of one ranked list, considering its first `n` entries.
pub fn rank_list_metrics(list: &[usize], relevant: &HashSet<usize>, n: usize) -> RankingMetrics {
    let mut hits = 0usize;
    let (mut ap, mut dcg, mut rr) = (0.0, 0.0, 0.0);
    for (pos, item) in list.iter().take(n).enumerate() {
        if relevant.contains(item) {
            hits += 1;
            let rank = (pos + 1) as f64;
            ap += hits as f64 / rank;
            dcg += 1.0 / (rank + 1.0).log2();
            if rr == 0.0 {
                rr = 1.0 / rank;
            }
        }
    }
    let idcg: f64 = (1..=n.min(relevant.len()))
        .map(|p| 1.0 / ((p + 1) as f64).log2())
        .sum();
    RankingMetrics {
        precision: hits as f64 / n as f64,
        recall: hits as f64 / relevant.len() as f64,
        map: ap / relevant.len() as f64,
        ndcg: if idcg > 0.0 { dcg / idcg } else { 0.0 },
        mrr: rr,
    }
}

/// Averages [`rank_list_metrics`] over keys.
pub fn ranking_metrics(
    lists: &[Vec<usize>],
    relevant: &[HashSet<usize>],
    n: usize,
) -> Result<RankingMetrics> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    if lists.len() != relevant.len() {
        return Err(Error::InvalidArgument(
            "one relevant set is needed per list".into(),
        ));
    }
    if lists.is_empty() {
        return Err(Error::InvalidArgument("no ranked lists".into()));
    }
    if relevant.iter().any(HashSet::is_empty) {
        return Err(Error::InvalidArgument(
            "every key needs a relevant item".into(),
        ));
    }
    let mut sum = RankingMetrics::default();
    for (list, rel) in lists.iter().zip(relevant) {
        let m = rank_list_metrics(list, rel, n);
        sum.precision += m.precision;
        sum.recall += m.recall;
        sum.map += m.map;
        sum.ndcg += m.ndcg;
        sum.mrr += m.mrr;
    }
    let k = lists.len() as f64;
    Ok(RankingMetrics {
        precision: sum.precision / k,
        recall: sum.recall / k,
        map: sum.map / k,
        ndcg: sum.ndcg / k,
        mrr: sum.mrr / k,
    })
}
