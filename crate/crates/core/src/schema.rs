//! Context dimensions, their conditions, and situations over them.
//!
//! Every dimension owns an implicit `na` condition at local position 0, so a
//! situation always has exactly one active condition per dimension. Conditions
//! carry a global index in `[0, num_conditions)` laid out dimension by
//! dimension: `Time:na, Time:Weekend, Time:Weekday, Location:na, ...`.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// Name of the implicit "unknown" condition every dimension carries.
pub const NA: &str = "na";

/// True when a raw cell value denotes the unknown condition.
pub fn is_na_value(value: &str) -> bool {
    value.is_empty() || value.eq_ignore_ascii_case(NA)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dimension {
    name: String,
    conditions: Vec<String>,
}

impl Dimension {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Condition names in schema order; `na` first.
    pub fn conditions(&self) -> &[String] {
        &self.conditions
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContextSchema {
    dims: Vec<Dimension>,
    offsets: Vec<usize>,
    owner: Vec<usize>,
}

impl ContextSchema {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn num_dimensions(&self) -> usize {
        self.dims.len()
    }

    /// Total number of conditions, one `na` per dimension included.
    pub fn num_conditions(&self) -> usize {
        self.owner.len()
    }

    pub fn dimensions(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn dimension(&self, dim: usize) -> &Dimension {
        &self.dims[dim]
    }

    /// Dimension lookup, case-insensitive.
    pub fn dimension_index(&self, name: &str) -> Option<usize> {
        self.dims
            .iter()
            .position(|d| d.name.eq_ignore_ascii_case(name))
    }

    /// Global index range of a dimension's conditions.
    pub fn conditions_of(&self, dim: usize) -> Range<usize> {
        let start = self.offsets[dim];
        start..start + self.dims[dim].conditions.len()
    }

    /// Global index of the dimension's `na` condition.
    pub fn na(&self, dim: usize) -> usize {
        self.offsets[dim]
    }

    pub fn is_na(&self, condition: usize) -> bool {
        self.offsets[self.owner[condition]] == condition
    }

    pub fn dimension_of(&self, condition: usize) -> usize {
        self.owner[condition]
    }

    /// Global index of `condition` in `dim`; `na` and empty values map to the
    /// dimension's `na` condition.
    pub fn condition_index(&self, dim: usize, condition: &str) -> Option<usize> {
        if is_na_value(condition) {
            return Some(self.na(dim));
        }
        self.dims[dim]
            .conditions
            .iter()
            .position(|c| c == condition)
            .map(|local| self.offsets[dim] + local)
    }

    pub fn condition_name(&self, condition: usize) -> &str {
        let dim = self.owner[condition];
        &self.dims[dim].conditions[condition - self.offsets[dim]]
    }

    /// `Dim:cond` label of a global condition.
    pub fn label(&self, condition: usize) -> String {
        format!(
            "{}:{}",
            self.dims[self.owner[condition]].name,
            self.condition_name(condition)
        )
    }

    pub fn all_na(&self) -> ContextSituation {
        ContextSituation((0..self.dims.len()).map(|d| self.na(d)).collect())
    }

    /// Builds a situation from `(dimension, condition)` names. Dimensions not
    /// mentioned are `na`.
    pub fn situation<'a, I>(&self, assignments: I) -> Result<ContextSituation>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut active = self.all_na().0;
        for (dim_name, cond_name) in assignments {
            let dim = self
                .dimension_index(dim_name)
                .ok_or_else(|| Error::UnknownCondition(format!("{dim_name}:{cond_name}")))?;
            active[dim] = self
                .condition_index(dim, cond_name)
                .ok_or_else(|| Error::UnknownCondition(format!("{dim_name}:{cond_name}")))?;
        }
        Ok(ContextSituation(active))
    }

    /// Checks that `situation` activates exactly one known condition of each
    /// dimension of this schema.
    pub fn validate(&self, situation: &ContextSituation) -> Result<()> {
        if situation.0.len() != self.dims.len() {
            return Err(Error::UnknownCondition(format!(
                "situation has {} dimensions, schema has {}",
                situation.0.len(),
                self.dims.len()
            )));
        }
        for (dim, &cond) in situation.0.iter().enumerate() {
            if !self.conditions_of(dim).contains(&cond) {
                return Err(Error::UnknownCondition(format!(
                    "condition index {cond} is not in dimension {}",
                    self.dims[dim].name
                )));
            }
        }
        Ok(())
    }

    /// Comma-joined `Dim:cond` labels of the active conditions.
    pub fn describe(&self, situation: &ContextSituation) -> String {
        situation
            .0
            .iter()
            .map(|&c| self.label(c))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Accumulates dimensions and conditions in first-appearance order.
#[derive(Debug, Default)]
pub struct SchemaBuilder {
    dims: Vec<Dimension>,
}

impl SchemaBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the dimension's position, adding it if unseen (case-insensitive).
    pub fn dimension(&mut self, name: &str) -> usize {
        if let Some(pos) = self
            .dims
            .iter()
            .position(|d| d.name.eq_ignore_ascii_case(name))
        {
            return pos;
        }
        self.dims.push(Dimension {
            name: name.to_string(),
            conditions: vec![NA.to_string()],
        });
        self.dims.len() - 1
    }

    /// Registers a condition of `dim`; `na`-like values are a no-op.
    pub fn condition(&mut self, dim: usize, name: &str) {
        if is_na_value(name) {
            return;
        }
        let conditions = &mut self.dims[dim].conditions;
        if !conditions.iter().any(|c| c == name) {
            conditions.push(name.to_string());
        }
    }

    pub fn build(self) -> ContextSchema {
        let mut offsets = Vec::with_capacity(self.dims.len());
        let mut owner = Vec::new();
        for (d, dim) in self.dims.iter().enumerate() {
            offsets.push(owner.len());
            owner.extend(std::iter::repeat_n(d, dim.conditions.len()));
        }
        ContextSchema {
            dims: self.dims,
            offsets,
            owner,
        }
    }
}

/// One active global condition per dimension, in dimension order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextSituation(Box<[usize]>);

impl ContextSituation {
    /// Wraps raw global indices; validate against a schema before use.
    pub fn from_conditions(conditions: Vec<usize>) -> Self {
        Self(conditions.into_boxed_slice())
    }

    pub fn conditions(&self) -> &[usize] {
        &self.0
    }

    pub fn active(&self, dim: usize) -> usize {
        self.0[dim]
    }

    pub fn is_active(&self, condition: usize) -> bool {
        self.0.contains(&condition)
    }

    pub fn with(&self, dim: usize, condition: usize) -> Self {
        let mut next = self.0.clone();
        next[dim] = condition;
        Self(next)
    }
}

impl fmt::Display for ContextSituation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}
