//! Reads loose and compact contextual ratings and prints the binary encoding.
//!
//! ```text
//! cargo run --example format_conversion [path/to/ratings.txt]
//! ```

use ctxrec::ingest::read_ratings;
use ctxrec::read_ratings_file;

const LOOSE: &str = "\
UserID,ItemID,Rating,Context,Condition
U1,T1,3,Time,Weekend
U1,T1,3,Location,Work
U2,T2,4,Time,Weekday
U2,T2,4,Location,Home
";

const COMPACT: &str = "\
UserID,ItemID,Rating,Time,Location
U1,T1,3,Weekend,Work
U2,T2,4,Weekday,Home
U1,T1,4,Weekend,Home
U2,T2,2,Weekday,Work
";

fn main() -> ctxrec::Result<()> {
    for text in [LOOSE, COMPACT] {
        let (format, table) = read_ratings(text.as_bytes())?;
        println!("{format:?} input, {} contextual ratings:", table.len());
        table.write_binary(std::io::stdout())?;
        println!();
    }

    if let Some(path) = std::env::args().nth(1) {
        let (format, table) = read_ratings_file(path.as_ref())?;
        println!("{path}: {format:?}, {} rows", table.len());
        for row in table.rows().iter().take(5) {
            println!(
                "  {} {} {} [{}]",
                table.users().name(row.user).unwrap_or("?"),
                table.items().name(row.item).unwrap_or("?"),
                row.rating,
                table.schema().describe(&row.situation)
            );
        }
    }
    Ok(())
}
