//! The binary-format contextual rating table and its on-disk encoding.

use std::io::{Read, Write};

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::schema::{ContextSchema, ContextSituation, SchemaBuilder};

/// External string id ↔ dense index, interned in first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Interner(IndexSet<String>);

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, id: &str) -> usize {
        match self.0.get_index_of(id) {
            Some(i) => i,
            None => self.0.insert_full(id.to_string()).0,
        }
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.0.get_index_of(id)
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.0.get_index(index).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
}

impl RatingScale {
    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.min, self.max)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    fn of(rows: &[RatingTuple]) -> Self {
        if rows.is_empty() {
            return RatingScale { min: 0.0, max: 0.0 };
        }
        rows.iter().fold(
            RatingScale {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            },
            |s, r| RatingScale {
                min: s.min.min(r.rating),
                max: s.max.max(r.rating),
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatingTuple {
    pub user: usize,
    pub item: usize,
    pub rating: f64,
    pub situation: ContextSituation,
}

/// Contextual ratings over one schema. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingTable {
    schema: ContextSchema,
    users: Interner,
    items: Interner,
    rows: Vec<RatingTuple>,
    scale: RatingScale,
    binarized: bool,
}

impl RatingTable {
    /// Builds a table, checking every row against the schema and id tables.
    pub fn new(
        schema: ContextSchema,
        users: Interner,
        items: Interner,
        rows: Vec<RatingTuple>,
    ) -> Result<Self> {
        for (n, row) in rows.iter().enumerate() {
            if row.user >= users.len() || row.item >= items.len() {
                return Err(Error::InvalidArgument(format!(
                    "row {n} references an unknown user or item index"
                )));
            }
            if !row.rating.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "row {n} has a non-finite rating"
                )));
            }
            schema.validate(&row.situation)?;
        }
        let scale = RatingScale::of(&rows);
        Ok(Self {
            schema,
            users,
            items,
            rows,
            scale,
            binarized: false,
        })
    }

    pub fn schema(&self) -> &ContextSchema {
        &self.schema
    }

    pub fn users(&self) -> &Interner {
        &self.users
    }

    pub fn items(&self) -> &Interner {
        &self.items
    }

    pub fn rows(&self) -> &[RatingTuple] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    /// Whether ratings were mapped to {0, 1} by a threshold.
    pub fn is_binarized(&self) -> bool {
        self.binarized
    }

    /// A table over the same schema and id tables holding only `indices`, in
    /// the given order. Used for train/test views.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let rows: Vec<_> = indices.iter().map(|&i| self.rows[i].clone()).collect();
        Self {
            schema: self.schema.clone(),
            users: self.users.clone(),
            items: self.items.clone(),
            scale: self.scale,
            rows,
            binarized: self.binarized,
        }
    }

    pub(crate) fn with_ratings(&self, ratings: impl Fn(f64) -> f64, binarized: bool) -> Self {
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|r| RatingTuple {
                rating: ratings(r.rating),
                ..r.clone()
            })
            .collect();
        let scale = if binarized {
            RatingScale { min: 0.0, max: 1.0 }
        } else {
            RatingScale::of(&rows)
        };
        Self {
            schema: self.schema.clone(),
            users: self.users.clone(),
            items: self.items.clone(),
            rows,
            scale,
            binarized,
        }
    }

    /// Writes the binary CSV encoding: `user,item,rating,Dim:cond,...` with
    /// `na` columns left implicit.
    pub fn write_binary<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        let columns: Vec<usize> = (0..self.schema.num_conditions())
            .filter(|&c| !self.schema.is_na(c))
            .collect();

        let mut header = vec!["user".to_string(), "item".to_string(), "rating".to_string()];
        header.extend(columns.iter().map(|&c| self.schema.label(c)));
        w.write_record(&header)?;

        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for row in &self.rows {
            record.clear();
            record.push(self.users.name(row.user).unwrap_or_default().to_string());
            record.push(self.items.name(row.item).unwrap_or_default().to_string());
            record.push(render_rating(row.rating));
            for &c in &columns {
                record.push(if row.situation.is_active(c) { "1" } else { "0" }.to_string());
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the binary CSV encoding written by [`RatingTable::write_binary`].
    pub fn read_binary<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut records = reader.records();
        let header = match records.next() {
            Some(h) => h?,
            None => return Err(Error::MalformedHeader("missing header row".into())),
        };
        let header: Vec<String> = header.iter().map(str::to_string).collect();
        from_binary_records(&header, records.map(|r| r.map_err(Error::from)))
    }
}

/// Renders a rating without trailing zeros (`4`, `3.5`).
pub fn render_rating(rating: f64) -> String {
    format!("{rating}")
}

pub(crate) fn parse_rating(cell: &str, line: u64) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, format!("non-numeric rating `{cell}`"))),
    }
}

/// Decodes one row's 0/1 indicator cells into a situation. `columns[k]` is the
/// global condition of indicator `k`; a dimension with no 1-cell is `na`.
pub fn situation_of(
    schema: &ContextSchema,
    columns: &[usize],
    indicators: &[bool],
) -> Result<ContextSituation> {
    let mut active: Vec<Option<usize>> = vec![None; schema.num_dimensions()];
    for (&cond, &on) in columns.iter().zip(indicators) {
        if !on {
            continue;
        }
        let dim = schema.dimension_of(cond);
        match active[dim] {
            Some(prev) if prev != cond => {
                return Err(Error::AmbiguousSituation(
                    schema.dimension(dim).name().to_string(),
                ))
            }
            _ => active[dim] = Some(cond),
        }
    }
    Ok(ContextSituation::from_conditions(
        active
            .into_iter()
            .enumerate()
            .map(|(d, c)| c.unwrap_or_else(|| schema.na(d)))
            .collect(),
    ))
}

pub(crate) fn from_binary_records<I>(header: &[String], records: I) -> Result<RatingTable>
where
    I: Iterator<Item = Result<csv::StringRecord>>,
{
    if header.len() < 3 {
        return Err(Error::MalformedHeader(format!(
            "expected at least 3 columns, found {}",
            header.len()
        )));
    }
    let mut builder = SchemaBuilder::new();
    let mut pairs = Vec::with_capacity(header.len() - 3);
    for name in &header[3..] {
        let (dim, cond) = name.split_once(':').ok_or_else(|| {
            Error::MalformedHeader(format!(
                "binary column `{name}` is not `Dimension:condition`"
            ))
        })?;
        let d = builder.dimension(dim.trim());
        builder.condition(d, cond.trim());
        pairs.push((d, cond.trim().to_string()));
    }
    let schema = builder.build();
    let columns: Vec<usize> = pairs
        .iter()
        .map(|(d, c)| schema.condition_index(*d, c).expect("registered above"))
        .collect();

    let mut users = Interner::new();
    let mut items = Interner::new();
    let mut rows = Vec::new();
    let mut indicators = Vec::with_capacity(columns.len());
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::parse(
                line,
                format!("expected {} cells, found {}", header.len(), record.len()),
            ));
        }
        let rating = parse_rating(&record[2], line)?;
        indicators.clear();
        for cell in record.iter().skip(3) {
            indicators.push(match cell {
                "1" => true,
                "0" => false,
                other => {
                    return Err(Error::parse(
                        line,
                        format!("indicator `{other}` is not 0/1"),
                    ))
                }
            });
        }
        let situation = situation_of(&schema, &columns, &indicators)
            .map_err(|e| Error::parse(line, e.to_string()))?;
        rows.push(RatingTuple {
            user: users.intern(&record[0]),
            item: items.intern(&record[1]),
            rating,
            situation,
        });
    }
    RatingTable::new(schema, users, items, rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub num_users: usize,
    pub num_items: usize,
    pub num_ratings: usize,
    pub num_dimensions: usize,
    pub num_conditions: usize,
    pub mean: f64,
    pub median: f64,
    pub mode: f64,
    pub scale: RatingScale,
}

/// Counts and rating statistics; mode ties resolve to the smallest rating.
pub fn compute_stats(table: &RatingTable) -> Result<DatasetStats> {
    if table.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut ratings: Vec<f64> = table.rows().iter().map(|r| r.rating).collect();
    ratings.sort_by(f64::total_cmp);
    let n = ratings.len();
    let mean = ratings.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        ratings[n / 2]
    } else {
        0.5 * (ratings[n / 2 - 1] + ratings[n / 2])
    };
    let mut mode = ratings[0];
    let mut best = 0;
    for run in ratings.chunk_by(|a, b| a == b) {
        if run.len() > best {
            best = run.len();
            mode = run[0];
        }
    }
    Ok(DatasetStats {
        num_users: table.num_users(),
        num_items: table.num_items(),
        num_ratings: n,
        num_dimensions: table.schema().num_dimensions(),
        num_conditions: table.schema().num_conditions(),
        mean,
        median,
        mode,
        scale: table.scale(),
    })
}
