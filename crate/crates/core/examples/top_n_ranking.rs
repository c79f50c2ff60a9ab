//! Top-N recommendation on binarized ratings with CSLIM and SLIM.

use std::path::PathBuf;

use ctxrec::eval::{evaluate, EvalOptions, Protocol, Task};
use ctxrec::ingest::binarize;
use ctxrec::{fit, prepare_workspace, Algorithm, HyperParams};

fn main() -> ctxrec::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sample/ratings.txt");
    let table = binarize(&prepare_workspace(&path, 1)?.table, 3.0);
    let hp = HyperParams {
        num_iterations: 10,
        ..HyperParams::default()
    };
    let opts = EvalOptions {
        task: Task::Ranking,
        top_n: 5,
        ..EvalOptions::default()
    };
    let protocol = Protocol::GivenRatio {
        ratio: 0.8,
        seed: 1,
    };
    for algorithm in [
        Algorithm::ItemAvg,
        Algorithm::Slim,
        Algorithm::CslimC,
        Algorithm::CslimCuci,
    ] {
        let report = evaluate(algorithm, &table, &protocol, &opts, &hp)?;
        println!("{:<10} {}", algorithm.name(), report.format_metrics());
    }

    let model = fit(Algorithm::CslimC, &table, &hp)?;
    let user = table.users().index_of("U7").expect("sample user");
    let situation = table
        .schema()
        .situation([("Time", "Weekend"), ("Companion", "Partner")])?;
    let candidates: Vec<usize> = (0..table.num_items()).collect();
    let top = model.rank(user, &situation, &candidates, 5)?;
    let names: Vec<&str> = top.iter().filter_map(|&i| table.items().name(i)).collect();
    println!(
        "top 5 for U7 on a weekend with a partner: {}",
        names.join(", ")
    );
    Ok(())
}
