//! Item splitting on data with a planted context effect: which items split,
//! on which condition, and what that does to a 2D recommender.

use ctxrec::eval::{evaluate, EvalOptions, Protocol};
use ctxrec::splitting::{item_split_table, SplitCriterion};
use ctxrec::synthetic::planted_item_split;
use ctxrec::{Algorithm, HyperParams};

fn main() -> ctxrec::Result<()> {
    let planted = planted_item_split(3, 60, 10, 2.0);
    let table = &planted.table;
    let (split_table, map) = item_split_table(table, SplitCriterion::default());
    println!(
        "{} of {} items split; {} item ids after splitting",
        map.num_split(),
        table.num_items(),
        split_table.num_items()
    );
    for (item, split) in map.splits() {
        let truth = planted.planted[item].map(|(_, c)| table.schema().label(c));
        println!(
            "  {} on {} (t = {:.2}), planted: {}",
            table.items().name(item).unwrap_or("?"),
            table.schema().label(split.condition),
            split.t,
            truth.as_deref().unwrap_or("none")
        );
    }

    let hp = HyperParams::default();
    for algorithm in [
        Algorithm::BiasedMf,
        Algorithm::ItemSplitting,
        Algorithm::UiSplitting,
    ] {
        let report = evaluate(
            algorithm,
            table,
            &Protocol::default(),
            &EvalOptions::default(),
            &hp,
        )?;
        println!("{:<14} {}", algorithm.name(), report.format_metrics());
    }
    Ok(())
}
