//! Parses a configuration file, shows the canonical form, and runs it the way
//! the command-line tool does.
//!
//! ```text
//! cargo run --example experiment_config [path/to/setting.conf]
//! ```

use std::path::PathBuf;

use ctxrec::config::{parse_config_with_warnings, render};
use ctxrec::runner::run;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sample/setting.conf")
        });
    let (config, warnings) = parse_config_with_warnings(&std::fs::read_to_string(&path)?)?;
    for w in &warnings {
        println!("warning: {w}");
    }
    println!(
        "{} ({:?}), protocol {:?}",
        config.recommender,
        config.task(),
        config.protocol
    );
    println!("--- canonical form ---\n{}---", render(&config));

    let code = run(&[path], &mut std::io::stdout());
    std::process::exit(code);
}
