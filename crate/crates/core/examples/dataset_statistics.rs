//! Prepares a workspace for a data file and prints its statistics, before and
//! after binarization.
//!
//! ```text
//! cargo run --example dataset_statistics [path/to/ratings.txt]
//! ```

use std::path::PathBuf;

use ctxrec::ingest::binarize;
use ctxrec::runner::format_stats;
use ctxrec::{compute_stats, prepare_workspace};

fn main() -> ctxrec::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sample/ratings.txt")
        });
    let prepared = prepare_workspace(&path, 1)?;
    println!("workspace: {}", prepared.workspace.display());
    print!("{}", format_stats(&path, &compute_stats(&prepared.table)?));

    let schema = prepared.table.schema();
    for dim in schema.dimensions() {
        println!("{}: {}", dim.name(), dim.conditions().join(", "));
    }

    // ratings above 3 become 1
    let binary = binarize(&prepared.table, 3.0);
    print!("{}", format_stats(&path, &compute_stats(&binary)?));
    Ok(())
}
