//! Fits a few rating predictors on the sample data and compares them with
//! 5-fold cross-validation.

use std::path::PathBuf;

use ctxrec::eval::{evaluate, EvalOptions, Protocol};
use ctxrec::{fit, prepare_workspace, Algorithm, HyperParams};

fn main() -> ctxrec::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sample/ratings.txt");
    let table = prepare_workspace(&path, 1)?.table;
    let hp = HyperParams {
        num_factors: 5,
        num_iterations: 50,
        ..HyperParams::default()
    };

    for algorithm in [
        Algorithm::GlobalAvg,
        Algorithm::UserItemAvg,
        Algorithm::ItemKnn,
        Algorithm::BiasedMf,
        Algorithm::CamfCi,
        Algorithm::Cptf,
    ] {
        let report = evaluate(
            algorithm,
            &table,
            &Protocol::default(),
            &EvalOptions::default(),
            &hp,
        )?;
        println!("{:<12} {}", algorithm.name(), report.format_metrics());
    }

    // one model on all data, one prediction in a named situation
    let model = fit(Algorithm::CamfCi, &table, &hp)?;
    let user = table.users().index_of("U1").expect("sample user");
    let item = table.items().index_of("T1").expect("sample item");
    for (time, location) in [("Weekend", "Home"), ("Weekday", "Cinema")] {
        let situation = table
            .schema()
            .situation([("Time", time), ("Location", location)])?;
        println!(
            "U1, T1, {time}/{location}: {:.3}",
            model.predict(user, item, &situation)?
        );
    }
    Ok(())
}
