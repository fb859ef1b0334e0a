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

//! Per-query model inputs.
//!
//! A query is reduced to one entry per predicate column (same-column
//! predicates conjoined): the column's semantic embedding, its predicate
//! vector and, for training, the column's ground-truth distribution.

use alloc::vec::Vec;

use crate::distribution::{
    column_distribution, constraint_vector, group_predicates, ColumnCatalog,
};
use crate::query::Query;
use crate::semantics::{serialize_column_text, EmbeddingProvider};
use crate::table::{ColumnDescriptor, Table};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateFeatures {
    /// Column embedding `x`, length `d`.
    pub embedding: Vec<f64>,
    /// Predicate vector `p`, length `h`.
    pub predicate: Vec<f64>,
    /// Ground-truth distribution `π`, length `h`; training only.
    pub distribution: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryFeatures {
    /// Table row count `N`.
    pub rows: u64,
    pub columns: Vec<PredicateFeatures>,
    pub true_card: Option<u64>,
}

/// Column metadata available without touching data: descriptors with their
/// bounds plus the row count.
#[derive(Debug, Clone, PartialEq)]
pub struct TableCatalog {
    pub table_id: alloc::string::String,
    pub rows: u64,
    pub columns: Vec<ColumnDescriptor>,
}

impl TableCatalog {
    pub fn of(table: &Table) -> Self {
        TableCatalog {
            table_id: table.table_id.clone(),
            rows: table.rows() as u64,
            columns: table
                .columns()
                .iter()
                .map(|c| c.descriptor.clone())
                .collect(),
        }
    }
}

impl ColumnCatalog for TableCatalog {
    fn lookup(&self, column_id: &str) -> Result<(usize, crate::ColumnKind, Option<(f64, f64)>)> {
        let i = self
            .columns
            .iter()
            .position(|c| c.column_id == column_id)
            .ok_or_else(|| Error::UnknownColumn(column_id.into()))?;
        Ok((i, self.columns[i].kind, self.columns[i].bounds))
    }
}

fn embed<E: EmbeddingProvider + ?Sized>(provider: &E, desc: &ColumnDescriptor) -> Result<Vec<f64>> {
    Ok(provider
        .embed(&serialize_column_text(desc))?
        .into_iter()
        .map(f64::from)
        .collect())
}

/// Inference features: needs only schema, bounds and row count.
pub fn query_features<E: EmbeddingProvider + ?Sized>(
    catalog: &TableCatalog,
    query: &Query,
    embeddings: &E,
    h: usize,
) -> Result<QueryFeatures> {
    let grouped = group_predicates(catalog, query)?;
    let mut columns = Vec::with_capacity(grouped.len());
    for g in &grouped {
        let desc = &catalog.columns[g.column];
        columns.push(PredicateFeatures {
            embedding: embed(embeddings, desc)?,
            predicate: constraint_vector(&g.constraint, desc.bounds, h)?,
            distribution: None,
        });
    }
    Ok(QueryFeatures {
        rows: catalog.rows,
        columns,
        true_card: query.true_card,
    })
}

/// Per-table cache of embeddings and ground-truth distributions for building
/// training examples.
#[derive(Debug, Clone)]
pub struct TableEncoder<'t> {
    table: &'t Table,
    embeddings: Vec<Vec<f64>>,
    distributions: Vec<Vec<f64>>,
    h: usize,
}

impl<'t> TableEncoder<'t> {
    pub fn new<E: EmbeddingProvider + ?Sized>(
        table: &'t Table,
        embeddings: &E,
        h: usize,
    ) -> Result<Self> {
        let mut embs = Vec::with_capacity(table.columns().len());
        let mut dists = Vec::with_capacity(table.columns().len());
        for c in table.columns() {
            embs.push(embed(embeddings, &c.descriptor)?);
            dists.push(column_distribution(c, h)?);
        }
        Ok(TableEncoder {
            table,
            embeddings: embs,
            distributions: dists,
            h,
        })
    }

    pub fn distribution(&self, column: usize) -> &[f64] {
        &self.distributions[column]
    }

    /// Features with ground-truth distributions attached.
    pub fn training_features(&self, query: &Query) -> Result<QueryFeatures> {
        let grouped = group_predicates(self.table, query)?;
        let mut columns = Vec::with_capacity(grouped.len());
        for g in &grouped {
            columns.push(PredicateFeatures {
                embedding: self.embeddings[g.column].clone(),
                predicate: g.vector(self.table, self.h)?,
                distribution: Some(self.distributions[g.column].clone()),
            });
        }
        Ok(QueryFeatures {
            rows: self.table.rows() as u64,
            columns,
            true_card: query.true_card,
        })
    }
}
