use std::fs;
use std::path::Path;

use indexmap::IndexMap;

use ctxrec::eval::{EvalReport, Task};
use ctxrec::ingest::{prepare_workspace, DataOrigin, SourceFormat};
use ctxrec::runner::{results_line, run, write_results};
use ctxrec::Algorithm;

const COMPACT: &str = "\
UserID,ItemID,Rating,Time,Location
U1,T1,3,Weekend,Work
U2,T2,4,Weekday,Home
U1,T1,4,Weekend,Home
U2,T2,2,Weekday,Work
U1,T2,5,,Home
U2,T1,1,Weekday,
";

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn missing_cache_falls_back_to_transformation() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "ratings.txt", COMPACT);

    let first = prepare_workspace(&data, 0).unwrap();
    assert_eq!(first.origin, DataOrigin::Transformed(SourceFormat::Compact));
    let cache = dir.path().join("CARSKit.Workspace/ratings_binary.txt");
    assert!(cache.is_file());

    let second = prepare_workspace(&data, 0).unwrap();
    assert_eq!(second.origin, DataOrigin::Cache);
    assert_eq!(second.table, first.table);
}

#[test]
fn cache_is_used_without_reading_the_source() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "ratings.txt", COMPACT);
    let fresh = prepare_workspace(&data, 1).unwrap();
    // a broken source is not touched when the cache is requested
    fs::write(
        &data,
        "UserID,ItemID,Rating,Time\nU1,T1,not-a-number,Weekend\n",
    )
    .unwrap();
    let cached = prepare_workspace(&data, 0).unwrap();
    assert_eq!(cached.origin, DataOrigin::Cache);
    assert_eq!(cached.table, fresh.table);
    assert!(prepare_workspace(&data, 1).is_err());
}

#[test]
fn transformation_writes_identical_cache_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "ratings.txt", COMPACT);
    let cache = dir.path().join("CARSKit.Workspace/ratings_binary.txt");
    prepare_workspace(&data, 1).unwrap();
    let first = fs::read(&cache).unwrap();
    prepare_workspace(&data, 1).unwrap();
    assert_eq!(fs::read(&cache).unwrap(), first);
    assert!(String::from_utf8(first)
        .unwrap()
        .starts_with("user,item,rating,Time:Weekend,Time:Weekday,Location:Work,Location:Home\n"));
}

#[test]
fn missing_data_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = prepare_workspace(&dir.path().join("absent.txt"), 1).unwrap_err();
    assert!(err.to_string().contains("absent.txt"), "{err}");
}

fn rating_report() -> EvalReport {
    let metrics: IndexMap<String, f64> = [("MAE", 0.5), ("RMSE", 0.5f64.sqrt()), ("MPE", 0.5)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    EvalReport {
        algorithm: Algorithm::GlobalAvg,
        task: Task::Rating,
        folds: vec![metrics.clone()],
        metrics,
        params: String::new(),
    }
}

#[test]
fn results_line_format() {
    let line = results_line(&rating_report(), "2026-01-01T00:00:00Z");
    assert_eq!(
        line,
        "2026-01-01T00:00:00Z\tGlobalAvg\trating\tMAE=0.500000,RMSE=0.707107,MPE=0.500000\t"
    );
}

#[test]
fn results_are_appended() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.txt");
    write_results(&rating_report(), &path).unwrap();
    write_results(&rating_report(), &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text
        .lines()
        .all(|l| l.contains("MAE=0.500000,RMSE=0.707107,MPE=0.500000")));
}

#[test]
fn failing_config_does_not_stop_the_run() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ratings.txt", COMPACT);
    let good = "dataset.ratings.lins=ratings.txt\nrecommender=ItemAvg\nevaluation.setup=cv -k 2\n";
    let a = write(dir.path(), "a.conf", good);
    let b = write(
        dir.path(),
        "b.conf",
        "dataset.ratings.lins=ratings.txt\nrecommender=camf_cu\nevaluation.setup=cv -k\n",
    );
    let c = write(dir.path(), "c.conf", &good.replace("ItemAvg", "UserAvg"));
    let missing = dir.path().join("missing.conf");

    let mut out = Vec::new();
    let code = run(&[a, b, missing, c], &mut out);
    assert_eq!(code, 1);
    let out = String::from_utf8(out).unwrap();
    assert!(out.contains("config line 3"), "{out}");

    let results = fs::read_to_string(dir.path().join("CARSKit.Workspace/results.txt")).unwrap();
    let algorithms: Vec<&str> = results
        .lines()
        .map(|l| l.split('\t').nth(1).unwrap())
        .collect();
    assert_eq!(algorithms, ["ItemAvg", "UserAvg"]);
}

#[test]
fn statistics_block_is_printed() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ratings.txt", COMPACT);
    let conf = write(
        dir.path(),
        "s.conf",
        "dataset.ratings.lins=ratings.txt\nrecommender=GlobalAvg\nevaluation.setup=given-ratio -r 0.5\n",
    );
    let mut out = Vec::new();
    assert_eq!(run(&[conf], &mut out), 0);
    let out = String::from_utf8(out).unwrap();
    for line in [
        "users: 2",
        "items: 2",
        "ratings: 6",
        "dimensions: 2",
        "conditions: 6",
        "median: 3.5",
    ] {
        assert!(out.lines().any(|l| l == line), "missing {line:?} in\n{out}");
    }
}
