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

//! Bucketed distribution vectors, predicate coverage vectors and the exact
//! row-counting oracle.
//!
//! Numerical columns use `h` equi-width buckets over `[l, u]`; every bucket is
//! half-open except the last, which also holds `u`. Categorical values are
//! hashed with [`hash64`] and bucketed over the full 64-bit domain. All
//! indices are 0-based.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::hash::hash64;
use crate::query::{Literal, Op, Query};
use crate::table::{Column, ColumnData, ColumnKind, Table};
use crate::{Error, Result};

/// Equi-width bucketing of `[l, u]` into `h` buckets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericBuckets {
    l: f64,
    u: f64,
    h: usize,
    width: f64,
}

impl NumericBuckets {
    pub fn new(l: f64, u: f64, h: usize) -> Result<Self> {
        if !(l <= u) || !l.is_finite() || !u.is_finite() {
            return Err(Error::InvalidBounds { l, u });
        }
        if h == 0 {
            return Err(Error::ShapeMismatch(
                "bucket count must be at least 1".to_string(),
            ));
        }
        Ok(NumericBuckets {
            l,
            u,
            h,
            width: (u - l) / h as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.h
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_degenerate(&self) -> bool {
        self.l == self.u
    }

    /// Lower edge of bucket `j`; `edge(h)` is `u`.
    pub fn edge(&self, j: usize) -> f64 {
        if j >= self.h {
            self.u
        } else {
            self.l + self.width * j as f64
        }
    }

    /// Bucket holding `v`: `min(floor((v - l) / w), h - 1)`, nudged so that
    /// `edge(b) <= v < edge(b + 1)` holds exactly in floating point.
    pub fn bucket_of(&self, v: f64) -> usize {
        if self.is_degenerate() || v <= self.l {
            return 0;
        }
        let last = self.h - 1;
        let mut b = libm::floor((v - self.l) / self.width);
        if !(b >= 0.0) {
            b = 0.0;
        }
        let mut b = (b as usize).min(last);
        while b > 0 && v < self.edge(b) {
            b -= 1;
        }
        while b < last && v >= self.edge(b + 1) {
            b += 1;
        }
        b
    }
}

/// A closed interval of a numerical column's domain, or the marker for an
/// equality predicate, or nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    Empty,
    Range { lo: f64, hi: f64 },
    Point(f64),
}

impl Interval {
    pub const UNBOUNDED: Interval = Interval::Range {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn range(lo: f64, hi: f64) -> Self {
        if lo <= hi {
            Interval::Range { lo, hi }
        } else {
            Interval::Empty
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Interval::Empty)
    }

    pub fn intersect(self, other: Interval) -> Interval {
        use Interval::*;
        match (self, other) {
            (Empty, _) | (_, Empty) => Empty,
            (Range { lo: a, hi: b }, Range { lo: c, hi: d }) => Interval::range(a.max(c), b.min(d)),
            (Point(v), Range { lo, hi }) | (Range { lo, hi }, Point(v)) => {
                if lo <= v && v <= hi {
                    Point(v)
                } else {
                    Empty
                }
            }
            (Point(a), Point(b)) => {
                if a == b {
                    Point(a)
                } else {
                    Empty
                }
            }
        }
    }

    /// Restricts to `[l, u]`.
    pub fn clamp(self, l: f64, u: f64) -> Interval {
        self.intersect(Interval::Range { lo: l, hi: u })
    }
}

/// Maps `column <op> value` onto the column domain `[l, u]`.
///
/// `<` and `<=` become `[l, value]`, `>` and `>=` become `[value, u]`; the
/// strict/non-strict distinction is below bucket resolution. `=` becomes a
/// point. Values outside the domain on the wrong side give an empty interval.
pub fn operator_to_interval(op: Op, value: f64, l: f64, u: f64) -> Interval {
    if value.is_nan() {
        return Interval::Empty;
    }
    match op {
        Op::Lt | Op::Le => Interval::range(l, value.min(u)),
        Op::Gt | Op::Ge => Interval::range(value.max(l), u),
        Op::Eq => Interval::Point(value).clamp(l, u),
    }
}

/// Intersection of all intervals placed on one column. No intervals means no
/// restriction.
pub fn conjoin_column_predicates<I>(intervals: I) -> Interval
where
    I: IntoIterator<Item = Interval>,
{
    intervals
        .into_iter()
        .fold(Interval::UNBOUNDED, Interval::intersect)
}

/// Normalized bucket mass of numerical values over `[l, u]`.
///
/// Returns the zero vector when `values` is empty.
pub fn numeric_distribution(values: &[f64], l: f64, u: f64, h: usize) -> Result<Vec<f64>> {
    let buckets = NumericBuckets::new(l, u, h)?;
    let mut counts = vec![0u64; h];
    for &v in values {
        counts[buckets.bucket_of(v)] += 1;
    }
    Ok(normalize_counts(&counts))
}

pub(crate) fn normalize_counts(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    let n = total as f64;
    counts.iter().map(|&c| c as f64 / n).collect()
}

/// Per-bucket coverage of `interval` over `[l, u]`, interpolating linearly
/// inside partially covered buckets. A point gets a one-hot at its bucket.
pub fn numeric_predicate_vector(interval: Interval, l: f64, u: f64, h: usize) -> Result<Vec<f64>> {
    let buckets = NumericBuckets::new(l, u, h)?;
    let mut p = vec![0.0; h];
    match interval.clamp(l, u) {
        Interval::Empty => {}
        Interval::Point(v) => p[buckets.bucket_of(v)] = 1.0,
        Interval::Range { .. } if buckets.is_degenerate() => p.fill(1.0),
        Interval::Range { lo, hi } => {
            for (i, slot) in p.iter_mut().enumerate() {
                let (bl, bu) = (buckets.edge(i), buckets.edge(i + 1));
                *slot = if lo <= bl && hi >= bu {
                    1.0
                } else if hi < bl || lo >= bu {
                    0.0
                } else {
                    ((hi.min(bu) - lo.max(bl)) / (bu - bl)).clamp(0.0, 1.0)
                };
            }
        }
    }
    Ok(p)
}

/// Bucket of a 64-bit hash among `h` equal slices of `[0, 2^64)`.
#[inline]
pub fn hash_bucket(hash: u64, h: usize) -> usize {
    let width = (1u128 << 64) / h as u128;
    ((hash as u128 / width) as usize).min(h - 1)
}

#[inline]
pub fn categorical_bucket(value: &str, h: usize) -> usize {
    hash_bucket(hash64(value.as_bytes()), h)
}

/// Normalized bucket mass of hashed categorical values.
pub fn categorical_distribution<'a, I>(values: I, h: usize) -> Vec<f64>
where
    I: IntoIterator<Item = &'a str>,
{
    assert!(h >= 1, "bucket count must be at least 1");
    let mut counts = vec![0u64; h];
    for v in values {
        counts[categorical_bucket(v, h)] += 1;
    }
    normalize_counts(&counts)
}

/// One-hot at the bucket of `value`.
pub fn categorical_predicate_vector(value: &str, h: usize) -> Vec<f64> {
    assert!(h >= 1, "bucket count must be at least 1");
    let mut p = vec![0.0; h];
    p[categorical_bucket(value, h)] = 1.0;
    p
}

/// Ground-truth distribution vector of a column (nulls excluded).
pub fn column_distribution(column: &Column, h: usize) -> Result<Vec<f64>> {
    match &column.data {
        ColumnData::Numerical(_) => {
            let (l, u) = column.descriptor.bounds.unwrap_or((0.0, 0.0));
            numeric_distribution(&column.data.numeric_values(), l, u, h)
        }
        ColumnData::Categorical(_) => Ok(categorical_distribution(column.data.text_values(), h)),
    }
}

/// All predicates of a query that touch one column, reduced to a single
/// constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnConstraint {
    Numeric(Interval),
    /// The required value, or `None` when two equalities contradict.
    Categorical(Option<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnPredicate {
    pub column: usize,
    pub constraint: ColumnConstraint,
}

impl ColumnPredicate {
    /// Predicate vector of the constraint against the column's bucketing.
    pub fn vector(&self, table: &Table, h: usize) -> Result<Vec<f64>> {
        let desc = &table.columns()[self.column].descriptor;
        constraint_vector(&self.constraint, desc.bounds, h)
    }
}

/// Predicate vector of a reduced constraint, needing only column bounds.
pub fn constraint_vector(
    constraint: &ColumnConstraint,
    bounds: Option<(f64, f64)>,
    h: usize,
) -> Result<Vec<f64>> {
    match constraint {
        ColumnConstraint::Numeric(interval) => {
            let (l, u) = bounds.unwrap_or((0.0, 0.0));
            numeric_predicate_vector(*interval, l, u, h)
        }
        ColumnConstraint::Categorical(Some(v)) => Ok(categorical_predicate_vector(v, h)),
        ColumnConstraint::Categorical(None) => Ok(vec![0.0; h]),
    }
}

/// Looks up the kind and bounds of a column by id. Implemented by [`Table`]
/// and by schema-only catalogs that carry statistics but no data.
pub trait ColumnCatalog {
    fn lookup(&self, column_id: &str) -> Result<(usize, ColumnKind, Option<(f64, f64)>)>;
}

impl ColumnCatalog for Table {
    fn lookup(&self, column_id: &str) -> Result<(usize, ColumnKind, Option<(f64, f64)>)> {
        let i = self.column_index(column_id)?;
        let d = &self.columns()[i].descriptor;
        Ok((i, d.kind, d.bounds))
    }
}

/// Groups a query's predicates by column (in order of first appearance) and
/// conjoins those on the same column.
pub fn group_predicates<C: ColumnCatalog + ?Sized>(
    catalog: &C,
    query: &Query,
) -> Result<Vec<ColumnPredicate>> {
    let mut out: Vec<ColumnPredicate> = Vec::new();
    for pred in &query.predicates {
        let (idx, kind, bounds) = catalog.lookup(&pred.column)?;
        let constraint = match kind {
            ColumnKind::Numerical => {
                let v = pred.value.as_num().ok_or_else(|| {
                    Error::KindMismatch(alloc::format!(
                        "numerical column `{}` compared with text",
                        pred.column
                    ))
                })?;
                let (l, u) = bounds.unwrap_or((0.0, 0.0));
                ColumnConstraint::Numeric(operator_to_interval(pred.op, v, l, u))
            }
            ColumnKind::Categorical => {
                let v = categorical_literal(&pred.column, pred.op, &pred.value)?;
                ColumnConstraint::Categorical(Some(v.to_string()))
            }
        };
        match out.iter_mut().find(|c| c.column == idx) {
            Some(existing) => {
                existing.constraint = match (&existing.constraint, constraint) {
                    (ColumnConstraint::Numeric(a), ColumnConstraint::Numeric(b)) => {
                        ColumnConstraint::Numeric(a.intersect(b))
                    }
                    (ColumnConstraint::Categorical(a), ColumnConstraint::Categorical(b)) => {
                        ColumnConstraint::Categorical(if *a == b { b } else { None })
                    }
                    _ => unreachable!("one column has one kind"),
                };
            }
            None => out.push(ColumnPredicate {
                column: idx,
                constraint,
            }),
        }
    }
    Ok(out)
}

fn categorical_literal<'a>(column: &str, op: Op, value: &'a Literal) -> Result<&'a str> {
    if op != Op::Eq {
        return Err(Error::KindMismatch(alloc::format!(
            "categorical column `{column}` only supports `=`, got `{op}`"
        )));
    }
    value.as_text().ok_or_else(|| {
        Error::KindMismatch(alloc::format!(
            "categorical column `{column}` compared with a number"
        ))
    })
}

/// Exact `COUNT(*)` of the query by a full scan. Nulls never match.
pub fn selectivity_oracle(table: &Table, query: &Query) -> Result<u64> {
    enum Check<'a> {
        Num(&'a [Option<f64>], Op, f64),
        Cat(&'a [Option<String>], &'a str),
    }
    let mut checks = Vec::with_capacity(query.predicates.len());
    for pred in &query.predicates {
        let col = table.column(&pred.column)?;
        checks.push(match &col.data {
            ColumnData::Numerical(cells) => {
                let v = pred.value.as_num().ok_or_else(|| {
                    Error::KindMismatch(alloc::format!(
                        "numerical column `{}` compared with text",
                        pred.column
                    ))
                })?;
                Check::Num(cells, pred.op, v)
            }
            ColumnData::Categorical(cells) => Check::Cat(
                cells,
                categorical_literal(&pred.column, pred.op, &pred.value)?,
            ),
        });
    }
    let count = (0..table.rows())
        .filter(|&row| {
            checks.iter().all(|c| match c {
                Check::Num(cells, op, v) => cells[row].is_some_and(|x| op.matches(x, *v)),
                Check::Cat(cells, v) => cells[row].as_deref() == Some(*v),
            })
        })
        .count();
    Ok(count as u64)
}
