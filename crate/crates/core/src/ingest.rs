//! Reading loose, compact and binary contextual rating files.
//!
//! Loose files carry one `(Context, Condition)` pair per line; consecutive
//! lines sharing `(user, item, rating)` form a single contextual rating.
//! Compact files carry one column per dimension. Both are converted to the
//! binary [`RatingTable`], which is cached inside a workspace folder created
//! next to the data file.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::schema::{is_na_value, ContextSituation, SchemaBuilder};
use crate::table::{from_binary_records, parse_rating, Interner, RatingTable, RatingTuple};

/// Default workspace folder created beside the data file.
pub const WORKSPACE_DIR: &str = "CARSKit.Workspace";
/// Cached binary data file inside the workspace.
pub const BINARY_CACHE_FILE: &str = "ratings_binary.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Loose,
    Compact,
    Binary,
}

/// One data line: its 1-based line number and trimmed cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub line: u64,
    pub cells: Vec<String>,
}

impl RawRecord {
    pub fn new(line: u64, cells: &[&str]) -> Self {
        Self {
            line,
            cells: cells.iter().map(|c| c.trim().to_string()).collect(),
        }
    }
}

pub fn detect_format(header: &[String]) -> Result<SourceFormat> {
    if header.len() < 3 {
        return Err(Error::MalformedHeader(format!(
            "expected at least 3 columns, found {}",
            header.len()
        )));
    }
    let extra = &header[3..];
    if extra.iter().any(|c| c.contains(':')) {
        return Ok(SourceFormat::Binary);
    }
    let loose_named =
        |c: &String| c.eq_ignore_ascii_case("context") || c.eq_ignore_ascii_case("condition");
    if header.len() == 5
        && header[3].eq_ignore_ascii_case("context")
        && header[4].eq_ignore_ascii_case("condition")
    {
        return Ok(SourceFormat::Loose);
    }
    if extra.iter().any(loose_named) {
        return Err(Error::MalformedHeader(
            "loose format needs exactly `user,item,rating,Context,Condition`".into(),
        ));
    }
    Ok(SourceFormat::Compact)
}

fn check_arity(header: &[String], record: &RawRecord) -> Result<()> {
    if record.cells.len() != header.len() {
        return Err(Error::parse(
            record.line,
            format!(
                "expected {} cells, found {}",
                header.len(),
                record.cells.len()
            ),
        ));
    }
    Ok(())
}

/// One output row per input row; column `3 + d` holds dimension `d`'s
/// condition, empty cells mean `na`.
pub fn transform_compact_to_binary(header: &[String], rows: &[RawRecord]) -> Result<RatingTable> {
    let mut builder = SchemaBuilder::new();
    let dims: Vec<usize> = header[3..].iter().map(|h| builder.dimension(h)).collect();
    if dims.iter().enumerate().any(|(k, &d)| d != k) {
        return Err(Error::MalformedHeader(
            "duplicate dimension column (names are case-insensitive)".into(),
        ));
    }
    let mut ratings = Vec::with_capacity(rows.len());
    for record in rows {
        check_arity(header, record)?;
        ratings.push(parse_rating(&record.cells[2], record.line)?);
        for (d, cell) in record.cells[3..].iter().enumerate() {
            builder.condition(d, cell);
        }
    }
    let schema = builder.build();

    let mut users = Interner::new();
    let mut items = Interner::new();
    let mut out = Vec::with_capacity(rows.len());
    for (record, rating) in rows.iter().zip(ratings) {
        let situation = ContextSituation::from_conditions(
            record.cells[3..]
                .iter()
                .enumerate()
                .map(|(d, cell)| schema.condition_index(d, cell).expect("registered above"))
                .collect(),
        );
        out.push(RatingTuple {
            user: users.intern(&record.cells[0]),
            item: items.intern(&record.cells[1]),
            rating,
            situation,
        });
    }
    RatingTable::new(schema, users, items, out)
}

/// Groups maximal consecutive runs of identical `(user, item, rating)` into one
/// contextual rating each.
pub fn transform_loose_to_binary(header: &[String], rows: &[RawRecord]) -> Result<RatingTable> {
    struct Group<'a> {
        user: &'a str,
        item: &'a str,
        rating: f64,
        pairs: Vec<(usize, &'a str, u64)>,
    }

    let mut builder = SchemaBuilder::new();
    let mut groups: Vec<Group> = Vec::new();
    for record in rows {
        check_arity(header, record)?;
        let rating = parse_rating(&record.cells[2], record.line)?;
        let (user, item) = (record.cells[0].as_str(), record.cells[1].as_str());
        let dim = builder.dimension(&record.cells[3]);
        let cond = record.cells[4].as_str();
        builder.condition(dim, cond);

        let continues = groups
            .last()
            .is_some_and(|g| g.user == user && g.item == item && g.rating == rating);
        if !continues {
            groups.push(Group {
                user,
                item,
                rating,
                pairs: Vec::new(),
            });
        }
        let group = groups.last_mut().expect("pushed above");
        if let Some(&(_, prev, _)) = group.pairs.iter().find(|(d, _, _)| *d == dim) {
            let same = prev == cond || (is_na_value(prev) && is_na_value(cond));
            if !same {
                return Err(Error::ConflictingCondition {
                    line: record.line,
                    dimension: record.cells[3].clone(),
                });
            }
        }
        group.pairs.push((dim, cond, record.line));
    }
    let schema = builder.build();

    let mut users = Interner::new();
    let mut items = Interner::new();
    let mut out = Vec::with_capacity(groups.len());
    for group in &groups {
        let mut active: Vec<usize> = (0..schema.num_dimensions()).map(|d| schema.na(d)).collect();
        for &(dim, cond, _) in &group.pairs {
            active[dim] = schema.condition_index(dim, cond).expect("registered above");
        }
        out.push(RatingTuple {
            user: users.intern(group.user),
            item: items.intern(group.item),
            rating: group.rating,
            situation: ContextSituation::from_conditions(active),
        });
    }
    RatingTable::new(schema, users, items, out)
}

/// Maps ratings to 1 when strictly above `threshold`, else 0. A negative
/// threshold leaves the table untouched.
pub fn binarize(table: &RatingTable, threshold: f64) -> RatingTable {
    if threshold < 0.0 {
        return table.clone();
    }
    table.with_ratings(|r| if r > threshold { 1.0 } else { 0.0 }, true)
}

/// Reads a comma-separated file with a header row in any of the three formats.
pub fn read_ratings<R: Read>(input: R) -> Result<(SourceFormat, RatingTable)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = reader.records();
    let header: Vec<String> = match records.next() {
        Some(h) => h?.iter().map(str::to_string).collect(),
        None => return Err(Error::MalformedHeader("missing header row".into())),
    };
    let format = detect_format(&header)?;
    if format == SourceFormat::Binary {
        let table = from_binary_records(&header, records.map(|r| r.map_err(Error::from)))?;
        return Ok((format, table));
    }
    let mut rows = Vec::new();
    for record in records {
        let record = record?;
        // blank lines come through as a single empty cell
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        rows.push(RawRecord {
            line: record.position().map_or(0, |p| p.line()),
            cells: record.iter().map(str::to_string).collect(),
        });
    }
    let table = match format {
        SourceFormat::Loose => transform_loose_to_binary(&header, &rows)?,
        _ => transform_compact_to_binary(&header, &rows)?,
    };
    Ok((format, table))
}

pub fn read_ratings_file(path: &Path) -> Result<(SourceFormat, RatingTable)> {
    let file = fs::File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    read_ratings(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
}

/// Where the prepared table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataOrigin {
    /// Source file was read and the binary cache rewritten.
    Transformed(SourceFormat),
    /// Binary cache loaded; the source was not read.
    Cache,
}

#[derive(Debug, Clone)]
pub struct PreparedData {
    pub table: RatingTable,
    pub workspace: PathBuf,
    pub origin: DataOrigin,
}

/// [`prepare_workspace_in`] with the default folder name.
pub fn prepare_workspace(data_path: &Path, data_transformation: i64) -> Result<PreparedData> {
    prepare_workspace_in(data_path, data_transformation, WORKSPACE_DIR)
}

/// Creates `<data dir>/<folder>` and returns the binary table. A positive
/// `data_transformation` always re-transforms the source; otherwise the cached
/// `ratings_binary.txt` is loaded when present.
pub fn prepare_workspace_in(
    data_path: &Path,
    data_transformation: i64,
    folder: &str,
) -> Result<PreparedData> {
    if !data_path.is_file() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            "data file not found",
        ))
        .in_file(data_path));
    }
    let parent = data_path.parent().unwrap_or_else(|| Path::new("."));
    let workspace = parent.join(folder);
    fs::create_dir_all(&workspace).map_err(|e| Error::from(e).in_file(&workspace))?;
    let cache = workspace.join(BINARY_CACHE_FILE);

    if data_transformation <= 0 {
        if cache.is_file() {
            let file = fs::File::open(&cache).map_err(|e| Error::from(e).in_file(&cache))?;
            let table = RatingTable::read_binary(std::io::BufReader::new(file))
                .map_err(|e| e.in_file(&cache))?;
            return Ok(PreparedData {
                table,
                workspace,
                origin: DataOrigin::Cache,
            });
        }
        log::warn!(
            "no cached binary data at {}; transforming {}",
            cache.display(),
            data_path.display()
        );
    }

    let (format, table) = read_ratings_file(data_path)?;
    let mut bytes = Vec::new();
    table.write_binary(&mut bytes)?;
    fs::write(&cache, bytes).map_err(|e| Error::from(e).in_file(&cache))?;
    Ok(PreparedData {
        table,
        workspace,
        origin: DataOrigin::Transformed(format),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(cols: &str) -> Vec<String> {
        cols.split(',').map(str::to_string).collect()
    }

    fn recs(lines: &[&str]) -> Vec<RawRecord> {
        lines
            .iter()
            .enumerate()
            .map(|(k, l)| RawRecord::new(k as u64 + 2, &l.split(',').collect::<Vec<_>>()))
            .collect()
    }

    #[test]
    fn detects_the_three_formats() {
        let h = header("UserID,ItemID,Rating,Context,Condition");
        assert_eq!(detect_format(&h).unwrap(), SourceFormat::Loose);
        let h = header("userid,itemid,rating,CONTEXT,condition");
        assert_eq!(detect_format(&h).unwrap(), SourceFormat::Loose);
        let h = header("UserID,ItemID,Rating,Time,Location");
        assert_eq!(detect_format(&h).unwrap(), SourceFormat::Compact);
        let h =
            header("UserID,ItemID,Rating,Time:Weekend,Time:Weekday,Location:Home,Location:Work");
        assert_eq!(detect_format(&h).unwrap(), SourceFormat::Binary);
    }

    #[test]
    fn detect_rejects_short_and_misshapen_loose_headers() {
        assert!(matches!(
            detect_format(&header("UserID,ItemID")),
            Err(Error::MalformedHeader(_))
        ));
        assert!(detect_format(&header("u,i,r,Context,Condition,Extra")).is_err());
        assert!(detect_format(&header("u,i,r,Context")).is_err());
    }

    #[test]
    fn compact_empty_cell_is_na() {
        let h = header("UserID,ItemID,Rating,Time,Location");
        let t =
            transform_compact_to_binary(&h, &recs(&["U1,T1,3,,Home", "U2,T1,4,Weekend,"])).unwrap();
        let s = &t.rows()[0].situation;
        assert_eq!(t.schema().describe(s), "Time:na,Location:Home");

        let mut bytes = Vec::new();
        t.write_binary(&mut bytes).unwrap();
        let back = RatingTable::read_binary(bytes.as_slice()).unwrap();
        assert_eq!(
            back.schema().describe(&back.rows()[0].situation),
            "Time:na,Location:Home"
        );
        assert_eq!(
            back.schema().describe(&back.rows()[1].situation),
            "Time:Weekend,Location:na"
        );
    }

    #[test]
    fn all_na_dimension_is_dropped_by_binary_round_trip() {
        let h = header("UserID,ItemID,Rating,Time,Location");
        let t = transform_compact_to_binary(&h, &recs(&["U1,T1,3,,Home"])).unwrap();
        let mut bytes = Vec::new();
        t.write_binary(&mut bytes).unwrap();
        let back = RatingTable::read_binary(bytes.as_slice()).unwrap();
        assert_eq!(back.schema().num_dimensions(), 1);
    }

    #[test]
    fn compact_header_only_is_empty() {
        let h = header("UserID,ItemID,Rating,Time,Location");
        let t = transform_compact_to_binary(&h, &[]).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.schema().num_conditions(), 2);
    }

    #[test]
    fn compact_errors_carry_line_numbers() {
        let h = header("UserID,ItemID,Rating,Time,Location");
        let err =
            transform_compact_to_binary(&h, &recs(&["U1,T1,3,Weekend,Home", "U1,T1,3,Weekend"]))
                .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = transform_compact_to_binary(&h, &recs(&["U1,T1,x,Weekend,Home"])).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn loose_single_row_leaves_other_dimensions_na() {
        let h = header("UserID,ItemID,Rating,Context,Condition");
        let t = transform_loose_to_binary(
            &h,
            &recs(&["U1,T1,5,Time,Weekend", "U2,T1,3,Location,Home"]),
        )
        .unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(
            t.schema().describe(&t.rows()[0].situation),
            "Time:Weekend,Location:na"
        );
    }

    #[test]
    fn loose_conflicting_condition() {
        let h = header("UserID,ItemID,Rating,Context,Condition");
        let err =
            transform_loose_to_binary(&h, &recs(&["U1,T1,3,Time,Weekend", "U1,T1,3,Time,Weekday"]))
                .unwrap_err();
        assert_eq!(err.to_string(), "line 3: conflicting condition: Time");
    }

    #[test]
    fn loose_groups_are_consecutive_runs_only() {
        let h = header("UserID,ItemID,Rating,Context,Condition");
        let t = transform_loose_to_binary(
            &h,
            &recs(&[
                "U1,T1,3,Time,Weekend",
                "U2,T2,4,Time,Weekday",
                "U1,T1,3,Time,Weekday",
            ]),
        )
        .unwrap();
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn binarize_rules() {
        let src = "u,i,r,Time\nU1,T1,3,a\nU2,T2,4,a\nU1,T1,4,b\nU2,T2,2,b\n";
        let (_, t) = read_ratings(src.as_bytes()).unwrap();
        let b = binarize(&t, 3.0);
        let r: Vec<f64> = b.rows().iter().map(|r| r.rating).collect();
        assert_eq!(r, [0.0, 1.0, 1.0, 0.0]);
        assert!(b.is_binarized());
        assert_eq!((b.scale().min, b.scale().max), (0.0, 1.0));
        assert_eq!(binarize(&t, -1.0), t);
        assert!(binarize(&t, 0.0).rows().iter().all(|r| r.rating == 1.0));
    }
}
