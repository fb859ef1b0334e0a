// Copyright 2026 The Zerocard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! In-memory typed tables.
//!
//! A [`Table`] is immutable once built. Numerical cells are stored as `f64`
//! whatever the declared SQL type, nulls as `None`. Bounds and null counts are
//! computed at construction and never include nulls.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::query::Literal;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numerical,
    Categorical,
}

/// Schema-level identity of a column plus the statistics every estimator may
/// rely on (row count, numerical min/max, null count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnDescriptor {
    pub column_id: String,
    pub name: String,
    pub data_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub kind: ColumnKind,
    /// `(l, u)` for numerical columns, absent for categorical ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
    pub null_count: u64,
}

impl ColumnDescriptor {
    /// A descriptor with no statistics yet; [`Column::new`] fills them in.
    pub fn new(name: impl Into<String>, data_type: impl Into<String>, kind: ColumnKind) -> Self {
        let name = name.into();
        ColumnDescriptor {
            column_id: name.clone(),
            name,
            data_type: data_type.into(),
            constraints: None,
            comment: None,
            kind,
            bounds: None,
            null_count: 0,
        }
    }

    pub fn with_constraints(mut self, constraints: impl Into<String>) -> Self {
        self.constraints = Some(constraints.into());
        self
    }

    pub fn with_comment(mut self, comment: impl Into<String>) -> Self {
        self.comment = Some(comment.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numerical(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numerical(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Numerical(_) => ColumnKind::Numerical,
            ColumnData::Categorical(_) => ColumnKind::Categorical,
        }
    }

    pub fn is_null(&self, row: usize) -> bool {
        match self {
            ColumnData::Numerical(v) => v[row].is_none(),
            ColumnData::Categorical(v) => v[row].is_none(),
        }
    }

    /// Non-null numerical cells, in row order. Empty for categorical data.
    pub fn numeric_values(&self) -> Vec<f64> {
        match self {
            ColumnData::Numerical(v) => v.iter().flatten().copied().collect(),
            ColumnData::Categorical(_) => Vec::new(),
        }
    }

    /// Non-null categorical cells, in row order. Empty for numerical data.
    pub fn text_values(&self) -> Vec<&str> {
        match self {
            ColumnData::Categorical(v) => v.iter().flatten().map(String::as_str).collect(),
            ColumnData::Numerical(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub descriptor: ColumnDescriptor,
    pub data: ColumnData,
}

impl Column {
    /// Builds a column, deriving kind, bounds and null count from `data`.
    ///
    /// Empty numerical columns get `l = u = 0`.
    pub fn new(mut descriptor: ColumnDescriptor, data: ColumnData) -> Result<Self> {
        if descriptor.name.is_empty() {
            return Err(Error::InvalidConfig(
                "column name must be non-empty".to_owned(),
            ));
        }
        if descriptor.kind != data.kind() {
            return Err(Error::KindMismatch(alloc::format!(
                "column `{}` declared {:?} but holds {:?} data",
                descriptor.name,
                descriptor.kind,
                data.kind()
            )));
        }
        let null_count = (0..data.len()).filter(|&r| data.is_null(r)).count() as u64;
        descriptor.null_count = null_count;
        descriptor.bounds = match &data {
            ColumnData::Numerical(cells) => {
                let mut it = cells.iter().flatten();
                match it.next() {
                    None => Some((0.0, 0.0)),
                    Some(&first) => {
                        if !first.is_finite() {
                            return Err(non_finite(&descriptor.name));
                        }
                        let mut bounds = (first, first);
                        for &v in it {
                            if !v.is_finite() {
                                return Err(non_finite(&descriptor.name));
                            }
                            bounds.0 = bounds.0.min(v);
                            bounds.1 = bounds.1.max(v);
                        }
                        Some(bounds)
                    }
                }
            }
            ColumnData::Categorical(_) => None,
        };
        Ok(Column { descriptor, data })
    }

    pub fn kind(&self) -> ColumnKind {
        self.descriptor.kind
    }

    pub fn name(&self) -> &str {
        &self.descriptor.name
    }

    pub fn non_null_count(&self) -> usize {
        self.data.len() - self.descriptor.null_count as usize
    }
}

fn non_finite(name: &str) -> Error {
    Error::KindMismatch(alloc::format!(
        "column `{name}` contains a non-finite number"
    ))
}

/// Summary returned by [`Table::column_stats`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnStats {
    pub rows: usize,
    pub bounds: Option<(f64, f64)>,
    pub null_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub table_id: String,
    rows: usize,
    columns: Vec<Column>,
}

impl Table {
    pub fn new(table_id: impl Into<String>, columns: Vec<Column>) -> Result<Self> {
        let table_id = table_id.into();
        let rows = columns.first().map_or(0, |c| c.data.len());
        let mut seen = BTreeSet::new();
        for c in &columns {
            if c.data.len() != rows {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "column `{}` has {} cells, table `{}` has {} rows",
                    c.name(),
                    c.data.len(),
                    table_id,
                    rows
                )));
            }
            if !seen.insert(c.descriptor.column_id.as_str()) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "duplicate column `{}` in table `{}`",
                    c.descriptor.column_id,
                    table_id
                )));
            }
        }
        Ok(Table {
            table_id,
            rows,
            columns,
        })
    }

    /// Row count `N`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_index(&self, column_id: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.descriptor.column_id == column_id)
            .ok_or_else(|| Error::UnknownColumn(column_id.to_string()))
    }

    pub fn column(&self, column_id: &str) -> Result<&Column> {
        self.column_index(column_id).map(|i| &self.columns[i])
    }

    pub fn column_stats(&self, column_id: &str) -> Result<ColumnStats> {
        let c = self.column(column_id)?;
        Ok(ColumnStats {
            rows: self.rows,
            bounds: c.descriptor.bounds,
            null_count: c.descriptor.null_count,
        })
    }

    /// A value drawn uniformly from the column's non-null cells.
    pub fn sample_value<R: Rng + ?Sized>(&self, column_id: &str, rng: &mut R) -> Result<Literal> {
        let c = self.column(column_id)?;
        let available = c.non_null_count();
        if available == 0 {
            return Err(Error::EmptyColumn(column_id.to_string()));
        }
        let target = rng.gen_range(0..available);
        let lit = match &c.data {
            ColumnData::Numerical(v) => Literal::Num(*v.iter().flatten().nth(target).unwrap()),
            ColumnData::Categorical(v) => {
                Literal::Text(v.iter().flatten().nth(target).unwrap().clone())
            }
        };
        Ok(lit)
    }

    /// The literal stored at `(row, column)`, `None` for a null cell.
    pub fn cell(&self, row: usize, column: usize) -> Option<Literal> {
        match &self.columns[column].data {
            ColumnData::Numerical(v) => v[row].map(Literal::Num),
            ColumnData::Categorical(v) => v[row].clone().map(Literal::Text),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn num(name: &str, cells: Vec<Option<f64>>) -> Column {
        Column::new(
            ColumnDescriptor::new(name, "int", ColumnKind::Numerical),
            ColumnData::Numerical(cells),
        )
        .unwrap()
    }

    fn cat(name: &str, cells: &[&str]) -> Column {
        Column::new(
            ColumnDescriptor::new(name, "varchar", ColumnKind::Categorical),
            ColumnData::Categorical(cells.iter().map(|s| Some(s.to_string())).collect()),
        )
        .unwrap()
    }

    #[test]
    fn stats_min_max() {
        let t = Table::new("t", vec![num("a", vec![Some(1.0), Some(5.0), Some(3.0)])]).unwrap();
        let s = t.column_stats("a").unwrap();
        assert_eq!(
            s,
            ColumnStats {
                rows: 3,
                bounds: Some((1.0, 5.0)),
                null_count: 0
            }
        );
    }

    #[test]
    fn stats_constant_with_null() {
        let t = Table::new("t", vec![num("a", vec![Some(7.0), None, Some(7.0)])]).unwrap();
        let s = t.column_stats("a").unwrap();
        assert_eq!(
            s,
            ColumnStats {
                rows: 3,
                bounds: Some((7.0, 7.0)),
                null_count: 1
            }
        );
    }

    #[test]
    fn stats_categorical_has_no_bounds() {
        let t = Table::new("t", vec![cat("c", &["a", "b"])]).unwrap();
        let s = t.column_stats("c").unwrap();
        assert_eq!(
            s,
            ColumnStats {
                rows: 2,
                bounds: None,
                null_count: 0
            }
        );
        assert!(matches!(
            t.column_stats("nope"),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn empty_numeric_column_gets_zero_bounds() {
        let t = Table::new("t", vec![num("a", vec![])]).unwrap();
        assert_eq!(t.rows(), 0);
        assert_eq!(t.column_stats("a").unwrap().bounds, Some((0.0, 0.0)));
    }

    #[test]
    fn sample_singleton_and_determinism() {
        let t = Table::new(
            "t",
            vec![num("a", vec![Some(4.0)]), num("b", vec![Some(1.0)])],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(t.sample_value("a", &mut rng).unwrap(), Literal::Num(4.0));

        let t = Table::new("t", vec![num("a", vec![Some(1.0), Some(2.0), Some(3.0)])]).unwrap();
        let draw = |seed| {
            t.sample_value("a", &mut ChaCha8Rng::seed_from_u64(seed))
                .unwrap()
        };
        assert_eq!(draw(42), draw(42));
    }

    #[test]
    fn sample_all_null_is_empty_column() {
        let t = Table::new("t", vec![num("a", vec![None, None])]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            t.sample_value("a", &mut rng),
            Err(Error::EmptyColumn(_))
        ));
    }

    #[test]
    fn ragged_columns_rejected() {
        let r = Table::new("t", vec![num("a", vec![Some(1.0)]), num("b", vec![])]);
        assert!(matches!(r, Err(Error::ShapeMismatch(_))));
    }
}
