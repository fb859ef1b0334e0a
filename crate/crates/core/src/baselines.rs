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

//! Statistical baselines: per-column equi-width histograms combined with the
//! AVI, EBO or MinSel heuristic, and uniform row sampling.
//!
//! AVI and EBO accumulate in `f32`, so long products of small selectivities
//! underflow to zero exactly as single-precision optimizers do.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::{
    categorical_bucket, group_predicates, numeric_predicate_vector, selectivity_oracle,
    ColumnCatalog, ColumnConstraint, NumericBuckets,
};
use crate::query::Query;
use crate::table::{Column, ColumnData, ColumnKind, Table};
use crate::{Error, Result};

/// Upper bound on histogram buckets.
pub const MAX_BUCKETS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnHistogram {
    pub column_id: String,
    pub kind: ColumnKind,
    /// `(l, u)` for numerical columns.
    pub bounds: Option<(f64, f64)>,
    pub counts: Vec<u64>,
    /// Table rows, nulls included.
    pub rows: u64,
}

/// Builds a histogram over the non-null cells of `column`.
pub fn build_histogram(table: &Table, column_id: &str, buckets: usize) -> Result<ColumnHistogram> {
    if buckets == 0 || buckets > MAX_BUCKETS {
        return Err(Error::InvalidConfig(alloc::format!(
            "histograms need 1..={MAX_BUCKETS} buckets, got {buckets}"
        )));
    }
    let column = table.column(column_id)?;
    Ok(histogram_of(column, buckets, table.rows() as u64))
}

fn histogram_of(column: &Column, buckets: usize, rows: u64) -> ColumnHistogram {
    let mut counts = vec![0u64; buckets];
    let bounds = column.descriptor.bounds;
    match &column.data {
        ColumnData::Numerical(cells) => {
            let (l, u) = bounds.unwrap_or((0.0, 0.0));
            let b = NumericBuckets::new(l, u, buckets).expect("column bounds are ordered");
            for v in cells.iter().flatten() {
                counts[b.bucket_of(*v)] += 1;
            }
        }
        ColumnData::Categorical(cells) => {
            for v in cells.iter().flatten() {
                counts[categorical_bucket(v, buckets)] += 1;
            }
        }
    }
    ColumnHistogram {
        column_id: column.descriptor.column_id.clone(),
        kind: column.kind(),
        bounds,
        counts,
        rows,
    }
}

impl ColumnHistogram {
    pub fn bucket_count(&self) -> usize {
        self.counts.len()
    }

    /// Fraction of all rows (nulls count as non-matching) satisfying the constraint.
    pub fn selectivity(&self, constraint: &ColumnConstraint) -> Result<f64> {
        if self.rows == 0 {
            return Ok(0.0);
        }
        let n = self.rows as f64;
        let h = self.counts.len();
        match (self.kind, constraint) {
            (ColumnKind::Numerical, ColumnConstraint::Numeric(interval)) => {
                let (l, u) = self.bounds.unwrap_or((0.0, 0.0));
                let coverage = numeric_predicate_vector(*interval, l, u, h)?;
                Ok(coverage
                    .iter()
                    .zip(&self.counts)
                    .map(|(p, &c)| p * c as f64)
                    .sum::<f64>()
                    / n)
            }
            (ColumnKind::Categorical, ColumnConstraint::Categorical(value)) => Ok(match value {
                Some(v) => self.counts[categorical_bucket(v, h)] as f64 / n,
                None => 0.0,
            }),
            _ => Err(Error::KindMismatch(alloc::format!(
                "predicate kind does not match column `{}`",
                self.column_id
            ))),
        }
    }
}

/// Per-column selectivity of a numerical interval or categorical equality.
pub fn predicate_selectivity(hist: &ColumnHistogram, constraint: &ColumnConstraint) -> Result<f64> {
    hist.selectivity(constraint)
}

/// Product of selectivities, in `f32`.
pub fn combine_avi(sels: &[f64]) -> f32 {
    sels.iter().fold(1.0f32, |acc, &s| acc * s as f32)
}

/// `s(1) · s(2)^½ · s(3)^¼ · s(4)^⅛` over the four most selective
/// predicates, in `f32`.
pub fn combine_ebo(sels: &[f64]) -> f32 {
    let mut sorted: Vec<f32> = sels.iter().map(|&s| s as f32).collect();
    sorted.sort_by(f32::total_cmp);
    let exponents = [1.0f32, 0.5, 0.25, 0.125];
    sorted
        .iter()
        .zip(exponents)
        .fold(1.0f32, |acc, (&s, e)| acc * libm::powf(s, e))
}

/// Smallest selectivity (1 for an empty list).
pub fn combine_minsel(sels: &[f64]) -> f64 {
    sels.iter().copied().fold(1.0, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    Avi,
    Ebo,
    MinSel,
}

impl Heuristic {
    pub fn name(self) -> &'static str {
        match self {
            Heuristic::Avi => "avi",
            Heuristic::Ebo => "ebo",
            Heuristic::MinSel => "minsel",
        }
    }

    pub fn combine(self, sels: &[f64]) -> f64 {
        match self {
            Heuristic::Avi => f64::from(combine_avi(sels)),
            Heuristic::Ebo => f64::from(combine_ebo(sels)),
            Heuristic::MinSel => combine_minsel(sels),
        }
    }
}

/// Histograms of every column of one table, built once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSet {
    pub table_id: String,
    pub rows: u64,
    pub histograms: Vec<ColumnHistogram>,
}

impl HistogramSet {
    pub fn build(table: &Table, buckets: usize) -> Result<Self> {
        if buckets == 0 || buckets > MAX_BUCKETS {
            return Err(Error::InvalidConfig(alloc::format!(
                "histograms need 1..={MAX_BUCKETS} buckets, got {buckets}"
            )));
        }
        Ok(HistogramSet {
            table_id: table.table_id.clone(),
            rows: table.rows() as u64,
            histograms: table
                .columns()
                .iter()
                .map(|c| histogram_of(c, buckets, table.rows() as u64))
                .collect(),
        })
    }

    /// Per-column selectivities of a query, same-column predicates conjoined first.
    pub fn column_selectivities(&self, query: &Query) -> Result<Vec<f64>> {
        group_predicates(self, query)?
            .iter()
            .map(|g| self.histograms[g.column].selectivity(&g.constraint))
            .collect()
    }

    /// `round(s_q · N)`; zero is an estimation failure.
    pub fn estimate(&self, heuristic: Heuristic, query: &Query) -> Result<u64> {
        if query.predicates.is_empty() {
            return Ok(self.rows);
        }
        let sels = self.column_selectivities(query)?;
        Ok(scale_estimate(heuristic.combine(&sels), self.rows))
    }
}

impl ColumnCatalog for HistogramSet {
    fn lookup(&self, column_id: &str) -> Result<(usize, ColumnKind, Option<(f64, f64)>)> {
        let i = self
            .histograms
            .iter()
            .position(|h| h.column_id == column_id)
            .ok_or_else(|| Error::UnknownColumn(column_id.to_string()))?;
        Ok((i, self.histograms[i].kind, self.histograms[i].bounds))
    }
}

/// Histogram estimate of `query` under `heuristic`.
pub fn hist_estimate(
    heuristic: Heuristic,
    histograms: &HistogramSet,
    query: &Query,
) -> Result<u64> {
    histograms.estimate(heuristic, query)
}

fn scale_estimate(selectivity: f64, rows: u64) -> u64 {
    let est = libm::round(selectivity * rows as f64);
    if est > 0.0 {
        est as u64
    } else {
        0
    }
}

/// A uniform sample of rows taken without replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStore {
    pub rate: f64,
    pub source_rows: u64,
    pub sample: Table,
}

/// Samples `round(r·N)` rows without replacement, in source row order.
pub fn build_sample(table: &Table, rate: f64, seed: u64) -> Result<SampleStore> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "sampling rate must lie in (0, 1], got {rate}"
        )));
    }
    let n = table.rows();
    let k = (libm::round(rate * n as f64) as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = sample(&mut rng, n, k).into_vec();
    rows.sort_unstable();
    let mut columns = Vec::with_capacity(table.columns().len());
    for c in table.columns() {
        let data = match &c.data {
            ColumnData::Numerical(v) => ColumnData::Numerical(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical(v) => {
                ColumnData::Categorical(rows.iter().map(|&r| v[r].clone()).collect())
            }
        };
        let mut descriptor = c.descriptor.clone();
        descriptor.bounds = None;
        columns.push(Column::new(descriptor, data)?);
    }
    Ok(SampleStore {
        rate,
        source_rows: n as u64,
        sample: Table::new(table.table_id.clone(), columns)?,
    })
}

impl SampleStore {
    /// `round(matches_in_sample / r)`; zero is an estimation failure.
    pub fn estimate(&self, query: &Query) -> Result<u64> {
        let hits = selectivity_oracle(&self.sample, query)?;
        Ok(libm::round(hits as f64 / self.rate) as u64)
    }
}

pub fn sample_estimate(store: &SampleStore, query: &Query) -> Result<u64> {
    store.estimate(query)
}
