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

//! Training-query generation.

use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;

use crate::distribution::selectivity_oracle;
use crate::query::{Op, Predicate, Query};
use crate::table::{ColumnKind, Table};
use crate::{Error, Result};

/// Attempts allowed per requested query before giving up.
pub const ATTEMPTS_PER_QUERY: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationConfig {
    /// Upper bound on predicates per query.
    pub max_predicates: usize,
    /// Queries whose true selectivity exceeds this are discarded.
    pub max_selectivity: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            max_predicates: 8,
            max_selectivity: 0.9,
        }
    }
}

fn usable_columns(table: &Table) -> Vec<usize> {
    (0..table.columns().len())
        .filter(|&i| table.columns()[i].non_null_count() > 0)
        .collect()
}

/// Random 1..=P predicate queries over distinct columns with literals drawn
/// from the data. Zero-result queries and queries above the selectivity cap
/// are discarded and redrawn.
pub fn generate_queries<R: Rng + ?Sized>(
    table: &Table,
    count: usize,
    rng: &mut R,
    cfg: GenerationConfig,
) -> Result<Vec<Query>> {
    let usable = usable_columns(table);
    if usable.is_empty() || table.rows() == 0 {
        return Err(Error::EmptyTable(table.table_id.clone()));
    }
    let max_preds = cfg.max_predicates.min(usable.len()).max(1);
    let budget = count
        .saturating_mul(ATTEMPTS_PER_QUERY)
        .max(ATTEMPTS_PER_QUERY);
    let n = table.rows() as f64;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == budget {
            return Err(Error::GenerationExhausted {
                produced: out.len(),
                requested: count,
                budget,
            });
        }
        attempts += 1;
        let preds = rng.gen_range(1..=max_preds);
        let mut predicates = Vec::with_capacity(preds);
        for pick in sample(rng, usable.len(), preds).into_iter() {
            let column = &table.columns()[usable[pick]];
            let op = match column.kind() {
                ColumnKind::Numerical => Op::ALL[rng.gen_range(0..Op::ALL.len())],
                ColumnKind::Categorical => Op::Eq,
            };
            let value = table.sample_value(&column.descriptor.column_id, rng)?;
            predicates.push(Predicate::new(
                column.descriptor.column_id.clone(),
                op,
                value,
            ));
        }
        let mut query = Query::new(table.table_id.clone(), predicates);
        let card = selectivity_oracle(table, &query)?;
        if card == 0 || card as f64 / n > cfg.max_selectivity {
            continue;
        }
        query.true_card = Some(card);
        out.push(query);
    }
    Ok(out)
}

/// Low-selectivity queries anchored on a random row: every predicate is an
/// equality with that row's value, so each query matches at least one row.
/// Only queries with at least `min_predicates` predicates and true
/// selectivity at most `max_selectivity` are kept.
pub fn generate_anchored_queries<R: Rng + ?Sized>(
    table: &Table,
    count: usize,
    rng: &mut R,
    min_predicates: usize,
    max_predicates: usize,
    max_selectivity: f64,
) -> Result<Vec<Query>> {
    let cols = table.columns().len();
    if table.rows() == 0 {
        return Err(Error::EmptyTable(table.table_id.clone()));
    }
    if min_predicates == 0 || min_predicates > max_predicates.min(cols) {
        return Err(Error::InvalidConfig(alloc::format!(
            "table `{}` has {cols} columns, cannot place {min_predicates}..={max_predicates} predicates",
            table.table_id
        )));
    }
    let budget = count
        .saturating_mul(ATTEMPTS_PER_QUERY)
        .max(ATTEMPTS_PER_QUERY);
    let n = table.rows() as f64;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == budget {
            return Err(Error::GenerationExhausted {
                produced: out.len(),
                requested: count,
                budget,
            });
        }
        attempts += 1;
        let row = rng.gen_range(0..table.rows());
        let preds = rng.gen_range(min_predicates..=max_predicates.min(cols));
        let mut predicates = Vec::with_capacity(preds);
        for c in sample(rng, cols, preds).into_iter() {
            let Some(value) = table.cell(row, c) else {
                continue;
            };
            predicates.push(Predicate::new(
                table.columns()[c].descriptor.column_id.clone(),
                Op::Eq,
                value,
            ));
        }
        if predicates.len() < min_predicates {
            continue;
        }
        let mut query = Query::new(table.table_id.clone(), predicates);
        let card = selectivity_oracle(table, &query)?;
        if card == 0 || card as f64 / n > max_selectivity {
            continue;
        }
        query.true_card = Some(card);
        out.push(query);
    }
    Ok(out)
}
