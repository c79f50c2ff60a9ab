//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ctxrec::baselines::{collapse_context, MfModel, MfVariant, SlimModel};
use ctxrec::camf::{CamfModel, ContextSimModel, DeviationVariant, SimilarityVariant};
use ctxrec::cptf::CptfModel;
use ctxrec::cslim::CslimModel;
use ctxrec::eval::{
    evaluate, kfold_split, mae, mpe, rank_list_metrics, rmse, EvalOptions, Protocol, TestView,
};
use ctxrec::ingest::{binarize, read_ratings};
use ctxrec::sgd::{gradient_check, Sample, SgdModel};
use ctxrec::splitting::{item_split_table, SplitCriterion};
use ctxrec::synthetic::{planted_item_split, random_table, PlantedLift};
use ctxrec::{compute_stats, Algorithm, HyperParams, RatingTable};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const LOOSE_SAMPLE: &str = "\
UserID,ItemID,Rating,Context,Condition
U1,T1,3,Time,Weekend
U1,T1,3,Location,Work
U2,T2,4,Time,Weekday
U2,T2,4,Location,Home
";

const COMPACT_SAMPLE: &str = "\
UserID,ItemID,Rating,Time,Location
U1,T1,3,Weekend,Work
U2,T2,4,Weekday,Home
U1,T1,4,Weekend,Home
U2,T2,2,Weekday,Work
";

const BINARY_SAMPLE: &str = "\
user,item,rating,Time:Weekend,Time:Weekday,Location:Home,Location:Work
U1,T1,3,1,0,0,1
U2,T2,4,0,1,1,0
U1,T1,4,1,0,1,0
U2,T2,2,0,1,0,1
";

fn binary_sample() -> RatingTable {
    RatingTable::read_binary(BINARY_SAMPLE.as_bytes()).expect("binary sample parses")
}

fn binary_text(t: &RatingTable) -> String {
    let mut out = Vec::new();
    t.write_binary(&mut out).expect("in-memory write");
    String::from_utf8(out).expect("utf-8")
}

/// Reorders the columns of a binary CSV text to match `header`.
fn align_columns(text: &str, header: &str) -> Result<String, String> {
    let mut lines = text.lines();
    let have: Vec<&str> = lines.next().ok_or("empty output")?.split(',').collect();
    let order: Vec<usize> = header
        .split(',')
        .map(|h| {
            have.iter()
                .position(|c| c == &h)
                .ok_or_else(|| format!("missing column {h}"))
        })
        .collect::<Result<_, _>>()?;
    let mut out = format!("{header}\n");
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let row: Vec<&str> = order.iter().map(|&k| cells[k]).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn format_fidelity() -> Outcome {
    let (_, compact) = read_ratings(COMPACT_SAMPLE.as_bytes()).map_err(|e| e.to_string())?;
    let text = binary_text(&compact);
    // conditions are laid out in first-appearance order, so Work precedes Home
    let first_seen = "user,item,rating,Time:Weekend,Time:Weekday,Location:Work,Location:Home";
    ensure(text.lines().next() == Some(first_seen), || {
        format!("header:\n{text}")
    })?;
    let aligned = align_columns(&text, BINARY_SAMPLE.lines().next().unwrap())?;
    ensure(aligned == BINARY_SAMPLE, || {
        format!("compact → binary, aligned to the binary sample:\n{aligned}")
    })?;

    let (_, loose) = read_ratings(LOOSE_SAMPLE.as_bytes()).map_err(|e| e.to_string())?;
    ensure(loose.len() == 2, || {
        format!("loose yields {} rows", loose.len())
    })?;
    let described: Vec<String> = loose
        .rows()
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{}",
                loose.users().name(r.user).unwrap(),
                loose.items().name(r.item).unwrap(),
                r.rating,
                loose.schema().describe(&r.situation)
            )
        })
        .collect();
    let want = [
        "U1,T1,3,Time:Weekend,Location:Work",
        "U2,T2,4,Time:Weekday,Location:Home",
    ];
    ensure(described == want, || format!("loose rows {described:?}"))?;
    Ok("4 compact rows bit-exact after column alignment, 2 loose profiles".into())
}

fn binarization() -> Outcome {
    let t = binary_sample();
    let got: Vec<f64> = binarize(&t, 3.0).rows().iter().map(|r| r.rating).collect();
    ensure(got == [0.0, 1.0, 1.0, 0.0], || {
        format!("threshold 3 → {got:?}")
    })?;
    let same = binarize(&t, -1.0);
    ensure(same == t, || "threshold -1 changed the table".into())?;
    Ok("{3,4,4,2} → {0,1,1,0}; -1 is identity".into())
}

fn statistics() -> Outcome {
    let s = compute_stats(&binary_sample()).map_err(|e| e.to_string())?;
    let got = (
        s.num_users,
        s.num_items,
        s.num_ratings,
        s.num_dimensions,
        s.num_conditions,
    );
    ensure(got == (2, 2, 4, 2, 6), || format!("counts {got:?}"))?;
    ensure(s.mean == 3.25 && s.median == 3.5 && s.mode == 4.0, || {
        format!("mean {} median {} mode {}", s.mean, s.median, s.mode)
    })?;
    Ok("mean 3.25, median 3.5, mode 4, 2 users, 2 items, 2 dimensions".into())
}

/// Reference ranking metrics computed straight from the definitions.
fn reference_ranking(list: &[usize], relevant: &HashSet<usize>, n: usize) -> [f64; 5] {
    let top = &list[..list.len().min(n)];
    let is_hit = |p: usize| relevant.contains(&top[p]);
    let hits = (0..top.len()).filter(|&p| is_hit(p)).count() as f64;
    let precision = hits / n as f64;
    let recall = hits / relevant.len() as f64;
    let mut ap = 0.0;
    for p in 0..top.len() {
        if is_hit(p) {
            let hits_so_far = (0..=p).filter(|&q| is_hit(q)).count() as f64;
            ap += hits_so_far / (p + 1) as f64;
        }
    }
    ap /= relevant.len() as f64;
    let dcg: f64 = (0..top.len())
        .filter(|&p| is_hit(p))
        .map(|p| 1.0 / ((p + 2) as f64).log2())
        .sum();
    let ideal: f64 = (0..n.min(relevant.len()))
        .map(|p| 1.0 / ((p + 2) as f64).log2())
        .sum();
    let rr = (0..top.len())
        .find(|&p| is_hit(p))
        .map_or(0.0, |p| 1.0 / (p + 1) as f64);
    [precision, recall, ap, dcg / ideal, rr]
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let items = rng.random_range(1..=20);
        let mut pool: Vec<usize> = (0..items).collect();
        pool.shuffle(&mut rng);
        let list_len = rng.random_range(0..=items);
        let list = pool[..list_len].to_vec();
        pool.shuffle(&mut rng);
        let num_relevant = rng.random_range(1..=items.min(5));
        let relevant: HashSet<usize> = pool[..num_relevant].iter().copied().collect();
        let n = rng.random_range(1..=20);
        let m = rank_list_metrics(&list, &relevant, n);
        let got = [m.precision, m.recall, m.map, m.ndcg, m.mrr];
        let want = reference_ranking(&list, &relevant, n);
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
        }

        let len = rng.random_range(1..=30);
        let pairs: Vec<(f64, f64)> = (0..len)
            .map(|_| {
                let a = rng.random_range(1..=5) as f64;
                let p = if rng.random_bool(0.3) {
                    a
                } else {
                    rng.random_range(0.0..6.0)
                };
                (a, p)
            })
            .collect();
        let k = pairs.len() as f64;
        let ref_mae = pairs.iter().map(|(a, p)| (a - p).abs()).sum::<f64>() / k;
        let ref_rmse = (pairs.iter().map(|(a, p)| (a - p) * (a - p)).sum::<f64>() / k).sqrt();
        let ref_mpe = pairs.iter().filter(|(a, p)| (a - p).abs() > 1e-5).count() as f64 / k;
        let got = [
            mae(&pairs).map_err(|e| e.to_string())?,
            rmse(&pairs).map_err(|e| e.to_string())?,
            mpe(&pairs, 1e-5).map_err(|e| e.to_string())?,
        ];
        for (g, w) in got.iter().zip([ref_mae, ref_rmse, ref_mpe]) {
            worst = worst.max((g - w).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("1000 instances, max deviation {worst:.1e}"))
}

/// Moves every parameter off its fitted value so all parameter classes have
/// nonzero gradients.
fn jitter<M: SgdModel>(mut m: M, seed: u64) -> M {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in m.params_mut() {
        *v += rng.random_range(-0.3..0.3);
    }
    m.project();
    m
}

fn e<T>(r: ctxrec::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn gradient_checks() -> Outcome {
    let t = random_table(7, 5, 5, 40);
    let samples = Sample::from_table(&t);
    let hp = HyperParams {
        num_factors: 3,
        num_iterations: 3,
        ..HyperParams::default()
    };
    let mut errors: Vec<(String, f64)> = Vec::new();

    let (mf, _) = e(MfModel::fit(
        &collapse_context(&t),
        MfVariant::Biased,
        &hp,
        t.scale(),
    ))?;
    let mf_samples: Vec<Sample> = samples
        .iter()
        .map(|s| Sample {
            context: Box::new([]),
            ..s.clone()
        })
        .collect();
    errors.push((
        "BiasedMF".into(),
        gradient_check(&jitter(mf, 1), &mf_samples, 1e-6),
    ));
    for v in [
        DeviationVariant::C,
        DeviationVariant::CI,
        DeviationVariant::CU,
        DeviationVariant::CUCI,
    ] {
        let (m, _) = e(CamfModel::fit(&t, v, &hp))?;
        errors.push((
            format!("CAMF {v:?}"),
            gradient_check(&jitter(m, 2), &samples, 1e-6),
        ));
    }
    let (lcs, _) = e(ContextSimModel::fit(&t, SimilarityVariant::Lcs, &hp))?;
    errors.push((
        "CAMF_LCS".into(),
        gradient_check(&jitter(lcs, 3), &samples, 1e-6),
    ));
    let (cptf, _) = e(CptfModel::fit(&t, &hp))?;
    errors.push((
        "CPTF".into(),
        gradient_check(&jitter(cptf, 4), &samples, 1e-6),
    ));
    let mut cslim = e(CslimModel::fit(&t, DeviationVariant::C, &hp))?;
    // the l1 term is not differentiable at 0; keep W strictly positive
    let n = t.num_items();
    for k in 0..cslim.params().len() {
        let v = cslim.param(k) + 0.05 + 0.01 * (k % 7) as f64;
        cslim.set_param(k, v);
    }
    for i in 0..n {
        cslim.set_param(i * n + i, 0.0);
    }
    errors.push(("CSLIM_C".into(), gradient_check(&cslim, &samples, 1e-6)));

    let worst = errors.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    ensure(worst <= 1e-4, || format!("relative errors {errors:?}"))?;
    Ok(format!(
        "{} models, worst relative error {worst:.1e}",
        errors.len()
    ))
}

fn sample_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample")
}

/// Copies the bundled sample into a fresh directory.
fn sample_copy() -> Result<tempfile::TempDir, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for entry in std::fs::read_dir(sample_dir()).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.is_file() {
            std::fs::copy(&path, dir.path().join(path.file_name().unwrap()))
                .map_err(|e| e.to_string())?;
        }
    }
    Ok(dir)
}

fn run_cli(dir: &Path, configs: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ctxrec"))
        .arg("-c")
        .args(configs.iter().map(|c| dir.join(c)))
        .env("RUST_LOG", "warn")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn results_lines(dir: &Path) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(dir.join("CARSKit.Workspace/results.txt"))
        .map_err(|e| e.to_string())?;
    Ok(text.lines().map(str::to_string).collect())
}

fn strip_timestamp(line: &str) -> &str {
    line.split_once('\t').map_or(line, |(_, rest)| rest)
}

fn reproducibility() -> Outcome {
    let table = random_table(11, 30, 20, 300);
    let folds = kfold_split(&table, 5, 1).map_err(|e| e.to_string())?;
    let hp = HyperParams {
        num_iterations: 10,
        ..HyperParams::default()
    };
    let proto = Protocol::CrossValidation {
        k: 5,
        seed: 1,
        parallel: true,
        test_view: TestView::All,
    };
    for a in [Algorithm::ItemAvg, Algorithm::BiasedMf, Algorithm::CamfCi] {
        evaluate(a, &table, &proto, &EvalOptions::default(), &hp).map_err(|e| e.to_string())?;
        let again = kfold_split(&table, 5, 1).map_err(|e| e.to_string())?;
        ensure(again == folds, || format!("folds changed after {a}"))?;
    }

    let configs = ["CAMF.conf", "PMF.conf", "UserSplitting.conf"];
    let (a, b) = (sample_copy()?, sample_copy()?);
    run_cli(a.path(), &configs)?;
    run_cli(b.path(), &configs)?;
    let (la, lb) = (results_lines(a.path())?, results_lines(b.path())?);
    let sa: Vec<&str> = la.iter().map(|l| strip_timestamp(l)).collect();
    let sb: Vec<&str> = lb.iter().map(|l| strip_timestamp(l)).collect();
    ensure(sa.len() == 3 && sa == sb, || format!("{sa:?}\nvs\n{sb:?}"))?;
    Ok("folds stable across 3 algorithms; 3 results lines identical across runs".into())
}

fn planted_context() -> Outcome {
    let table = PlantedLift::default().generate();
    let hp = HyperParams {
        reg_context: 0.01,
        ..HyperParams::default()
    };
    let proto = Protocol::CrossValidation {
        k: 5,
        seed: 1,
        parallel: true,
        test_view: TestView::All,
    };
    let rmse_of = |a| {
        evaluate(a, &table, &proto, &EvalOptions::default(), &hp)
            .map_err(|e| e.to_string())
            .map(|r| r.metric("RMSE").unwrap())
    };
    let (camf, mf, avg) = (
        rmse_of(Algorithm::CamfC)?,
        rmse_of(Algorithm::BiasedMf)?,
        rmse_of(Algorithm::GlobalAvg)?,
    );
    ensure(camf <= 0.95 * mf, || {
        format!("CAMF_C {camf:.4} vs BiasedMF {mf:.4}")
    })?;
    ensure(camf <= 0.90 * avg, || {
        format!("CAMF_C {camf:.4} vs GlobalAvg {avg:.4}")
    })?;

    let (m, _) = CamfModel::fit(&table, DeviationVariant::C, &hp).map_err(|e| e.to_string())?;
    let weekend = table
        .schema()
        .situation([("Time", "Weekend")])
        .unwrap()
        .active(0);
    let weekday = table
        .schema()
        .situation([("Time", "Weekday")])
        .unwrap()
        .active(0);
    let dev = |c| m.condition_dev_at(c).map_or(0.0, |k| m.params()[k]);
    let lift = dev(weekend);
    ensure((0.8..=1.2).contains(&lift), || {
        format!("dev[Weekend] = {lift:.4}")
    })?;
    Ok(format!(
        "RMSE CAMF_C {camf:.4}, BiasedMF {mf:.4}, GlobalAvg {avg:.4}; dev[Weekend] {lift:.3} (contrast to Weekday {:.3})",
        lift - dev(weekday)
    ))
}

fn splitting_recovery() -> Outcome {
    let (mut hits, mut planted_total) = (0, 0);
    for seed in 1..=20 {
        let p = planted_item_split(seed, 80, 20, 2.0);
        let (_, map) = item_split_table(&p.table, SplitCriterion::default());
        for (item, plant) in p.planted.iter().enumerate() {
            let Some((dim, cond)) = *plant else { continue };
            let (inside, outside) =
                p.table
                    .rows()
                    .iter()
                    .filter(|r| r.item == item)
                    .fold((0, 0), |(a, b), r| {
                        if r.situation.active(dim) == cond {
                            (a + 1, b)
                        } else {
                            (a, b + 1)
                        }
                    });
            ensure(inside >= 20 && outside >= 20, || {
                format!("seed {seed} item {item}: {inside}/{outside} ratings per side")
            })?;
            planted_total += 1;
            // this dimension has two conditions and no na rows, so either
            // condition describes the planted partition
            if map.get(item).is_some_and(|s| s.dimension == dim) {
                hits += 1;
            }
        }
    }
    let share = hits as f64 / planted_total as f64;
    ensure(share >= 0.95, || {
        format!("{hits}/{planted_total} planted items recovered")
    })?;

    let p = planted_item_split(1, 80, 20, 2.0);
    let hp = HyperParams::default();
    let proto = Protocol::CrossValidation {
        k: 5,
        seed: 1,
        parallel: true,
        test_view: TestView::All,
    };
    let rmse_of = |a| {
        evaluate(a, &p.table, &proto, &EvalOptions::default(), &hp)
            .map_err(|e| e.to_string())
            .map(|r| r.metric("RMSE").unwrap())
    };
    let (split, plain) = (
        rmse_of(Algorithm::ItemSplitting)?,
        rmse_of(Algorithm::BiasedMf)?,
    );
    ensure(split < plain, || {
        format!("ItemSplitting {split:.4} vs BiasedMF {plain:.4}")
    })?;
    Ok(format!(
        "{hits}/{planted_total} planted items recovered; RMSE ItemSplitting {split:.4} < BiasedMF {plain:.4}"
    ))
}

fn slim_soundness() -> Outcome {
    let t = random_table(13, 15, 12, 200);
    let n = t.num_items();
    let check_w = |name: &str, w: &dyn Fn(usize, usize) -> f64| -> Result<(), String> {
        for i in 0..n {
            ensure(w(i, i) == 0.0, || {
                format!("{name}: W[{i},{i}] = {}", w(i, i))
            })?;
            for j in 0..n {
                ensure(w(j, i) >= 0.0, || {
                    format!("{name}: W[{j},{i}] = {}", w(j, i))
                })?;
            }
        }
        Ok(())
    };
    let monotone = |name: &str, obj: &[f64]| {
        ensure(obj.windows(2).all(|w| w[1] <= w[0] + 1e-9), || {
            format!("{name} objective {obj:?}")
        })
    };

    let slim = SlimModel::fit(&collapse_context(&t), 20, 0.01, 0.01);
    monotone("SLIM", &slim.objective)?;
    check_w("SLIM", &|j, i| slim.weight(j, i))?;
    let hp = HyperParams {
        num_iterations: 20,
        ..HyperParams::default()
    };
    for v in [
        DeviationVariant::C,
        DeviationVariant::CI,
        DeviationVariant::CU,
        DeviationVariant::CUCI,
    ] {
        let m = CslimModel::fit(&t, v, &hp).map_err(|e| e.to_string())?;
        monotone(&format!("CSLIM {v:?}"), &m.objective)?;
        check_w(&format!("CSLIM {v:?}"), &|j, i| m.weight(j, i))?;

        let zero = CslimModel::with_weights(&t, v, slim.weights(), &hp);
        for row in t.rows() {
            for i in 0..n {
                let (c, s) = (
                    zero.score(row.user, i, row.situation.conditions()),
                    slim.score(row.user, i),
                );
                ensure(c == s, || {
                    format!("CSLIM {v:?} scores {c} where SLIM scores {s}")
                })?;
            }
        }
    }
    Ok("objectives non-increasing, diag(W)=0, W≥0, zero-deviation CSLIM equals SLIM".into())
}

fn cptf_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (nu, ni, f, c) = (6, 7, 4, 6);
    let p: Vec<f64> = (0..nu * f).map(|_| rng.random_range(-1.0..1.0)).collect();
    let q: Vec<f64> = (0..ni * f).map(|_| rng.random_range(-1.0..1.0)).collect();
    let cptf = CptfModel::from_factors(f, &p, &q, c);
    let pmf = MfModel::from_factors(MfVariant::Pmf, 0.0, f, &p, &q);
    let mut worst: f64 = 0.0;
    for u in 0..nu {
        for i in 0..ni {
            for ctx in [[0, 3], [1, 4], [2, 5]] {
                // PMF score written out directly
                let dot: f64 = (0..f).map(|k| p[u * f + k] * q[i * f + k]).sum();
                worst = worst.max((cptf.predict(u, i, &ctx) - dot).abs());
                worst = worst.max((cptf.predict(u, i, &ctx) - pmf.predict(u, i)).abs());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn end_to_end_cli() -> Outcome {
    let dir = sample_copy()?;
    let stdout = run_cli(dir.path(), &["setting.conf"])?;

    let text =
        std::fs::read_to_string(dir.path().join("ratings.txt")).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    let users: BTreeSet<&str> = rows.iter().map(|r| r[0]).collect();
    let items: BTreeSet<&str> = rows.iter().map(|r| r[1]).collect();
    for (key, want) in [
        ("users", users.len()),
        ("items", items.len()),
        ("ratings", rows.len()),
    ] {
        let line = format!("{key}: {want}");
        ensure(stdout.lines().any(|l| l == line), || {
            format!("missing `{line}` in:\n{stdout}")
        })?;
    }

    let lines = results_lines(dir.path())?;
    ensure(lines.len() == 1, || {
        format!("{} results lines after one config", lines.len())
    })?;
    parse_results_line(&lines[0])?;

    run_cli(dir.path(), &["CAMF.conf", "PMF.conf", "UserSplitting.conf"])?;
    let lines = results_lines(dir.path())?;
    let algorithms: Vec<String> = lines
        .iter()
        .map(|l| parse_results_line(l))
        .collect::<Result<_, _>>()?;
    ensure(
        algorithms == ["CAMF_CU", "CAMF_CI", "PMF", "UserSplitting"],
        || format!("results lines {algorithms:?}"),
    )?;
    Ok(format!(
        "{} users, {} items, {} ratings; 1 + 3 results lines in order",
        users.len(),
        items.len(),
        rows.len()
    ))
}

/// Checks the line's shape and returns its algorithm name.
fn parse_results_line(line: &str) -> Result<String, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    ensure(fields.len() == 5, || format!("expected 5 fields: {line:?}"))?;
    chrono::DateTime::parse_from_rfc3339(fields[0])
        .map_err(|e| format!("timestamp {:?}: {e}", fields[0]))?;
    for pair in fields[3].split(',') {
        let (_, value) = pair
            .split_once('=')
            .ok_or_else(|| format!("metric {pair:?}"))?;
        ensure(
            value.split_once('.').is_some_and(|(_, d)| d.len() == 6),
            || format!("metric {pair:?}"),
        )?;
        value
            .parse::<f64>()
            .map_err(|e| format!("metric {pair:?}: {e}"))?;
    }
    Ok(fields[1].to_string())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 11] = [
        (
            "format fidelity",
            format_fidelity,
            Some(Duration::from_secs(1)),
        ),
        ("binarization", binarization, None),
        ("statistics", statistics, None),
        (
            "metric oracles",
            metric_oracles,
            Some(Duration::from_secs(10)),
        ),
        (
            "gradient checks",
            gradient_checks,
            Some(Duration::from_secs(30)),
        ),
        ("reproducibility", reproducibility, None),
        (
            "planted-context recovery",
            planted_context,
            Some(Duration::from_secs(60)),
        ),
        (
            "splitting recovery",
            splitting_recovery,
            Some(Duration::from_secs(60)),
        ),
        ("SLIM/CSLIM soundness", slim_soundness, None),
        ("CPTF identity", cptf_identity, None),
        (
            "end-to-end CLI",
            end_to_end_cli,
            Some(Duration::from_secs(30)),
        ),
    ];
    let mut failed = 0;
    for (n, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{elapsed:.2?}]", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{elapsed:.2?}]", n + 1);
            }
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
