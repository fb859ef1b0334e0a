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

//! Estimators behind one interface, workload evaluation and report rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use zerocard_core::baselines::{build_sample, Heuristic, HistogramSet, SampleStore};
use zerocard_core::distribution::selectivity_oracle;
use zerocard_core::features::{query_features, TableCatalog};
use zerocard_core::metrics::{EstimateRecord, EvalReport};
use zerocard_core::model::ModelParams;
use zerocard_core::semantics::EmbeddingStore;
use zerocard_core::{Error, Query, Table};

use crate::error::{CliError, Context, Result};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Zerocard,
    Avi,
    Ebo,
    Minsel,
    Sample,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Zerocard,
        Method::Avi,
        Method::Ebo,
        Method::Minsel,
        Method::Sample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Zerocard => "zerocard",
            Method::Avi => "avi",
            Method::Ebo => "ebo",
            Method::Minsel => "minsel",
            Method::Sample => "sample",
        }
    }

    fn heuristic(self) -> Option<Heuristic> {
        match self {
            Method::Avi => Some(Heuristic::Avi),
            Method::Ebo => Some(Heuristic::Ebo),
            Method::Minsel => Some(Heuristic::MinSel),
            _ => None,
        }
    }
}

/// Anything that maps a query to a non-negative cardinality; zero is a failure.
pub trait Estimator: Send + Sync {
    fn name(&self) -> String;
    fn estimate(&self, query: &Query) -> zerocard_core::Result<u64>;
    /// Size of the serialized artifact the estimator needs at run time.
    fn size_bytes(&self) -> u64;
}

fn unknown_table(id: &str) -> Error {
    Error::InvalidConfig(format!("unknown table `{id}`"))
}

pub struct ZeroCardEstimator {
    pub model: ModelParams,
    pub embeddings: EmbeddingStore,
    pub catalogs: BTreeMap<String, TableCatalog>,
    pub model_bytes: u64,
}

impl ZeroCardEstimator {
    pub fn new(model: ModelParams, embeddings: EmbeddingStore, tables: &[Table]) -> Self {
        let model_bytes = crate::modelfile::encode_model(&model).len() as u64;
        let catalogs = tables
            .iter()
            .map(|t| (t.table_id.clone(), TableCatalog::of(t)))
            .collect();
        ZeroCardEstimator {
            model,
            embeddings,
            catalogs,
            model_bytes,
        }
    }

    pub fn rows(&self, table_id: &str) -> Option<u64> {
        self.catalogs.get(table_id).map(|c| c.rows)
    }
}

impl Estimator for ZeroCardEstimator {
    fn name(&self) -> String {
        Method::Zerocard.name().into()
    }

    fn estimate(&self, query: &Query) -> zerocard_core::Result<u64> {
        let catalog = self
            .catalogs
            .get(&query.table_id)
            .ok_or_else(|| unknown_table(&query.table_id))?;
        if query.predicates.is_empty() {
            return Ok(catalog.rows.max(1));
        }
        let features = query_features(catalog, query, &self.embeddings, self.model.hyper.h)?;
        let card = self.model.estimate_cardinality(&features)?;
        // The clamp keeps the estimate in [1, N]; rounding cannot reach zero.
        Ok((card.round() as u64).max(1))
    }

    fn size_bytes(&self) -> u64 {
        self.model_bytes
    }
}

pub struct HistogramEstimator {
    pub heuristic: Heuristic,
    pub sets: BTreeMap<String, HistogramSet>,
}

impl HistogramEstimator {
    pub fn build(
        heuristic: Heuristic,
        tables: &[Table],
        buckets: usize,
    ) -> zerocard_core::Result<Self> {
        let sets = tables
            .iter()
            .map(|t| Ok((t.table_id.clone(), HistogramSet::build(t, buckets)?)))
            .collect::<zerocard_core::Result<_>>()?;
        Ok(HistogramEstimator { heuristic, sets })
    }
}

impl Estimator for HistogramEstimator {
    fn name(&self) -> String {
        self.heuristic.name().into()
    }

    fn estimate(&self, query: &Query) -> zerocard_core::Result<u64> {
        let set = self
            .sets
            .get(&query.table_id)
            .ok_or_else(|| unknown_table(&query.table_id))?;
        set.estimate(self.heuristic, query)
    }

    fn size_bytes(&self) -> u64 {
        self.sets
            .values()
            .map(|s| serde_json::to_vec(s).expect("serializable").len() as u64)
            .sum()
    }
}

pub struct SampleEstimator {
    pub stores: BTreeMap<String, SampleStore>,
    size: u64,
}

impl SampleEstimator {
    pub fn build(tables: &[Table], rate: f64, seed: u64) -> Result<Self> {
        let mut stores = BTreeMap::new();
        let mut size = 0;
        for (i, t) in tables.iter().enumerate() {
            let store = build_sample(t, rate, seed.wrapping_add(i as u64))
                .context(|| format!("sampling table `{}`", t.table_id))?;
            size += sample_bytes(&store.sample)?;
            stores.insert(t.table_id.clone(), store);
        }
        Ok(SampleEstimator { stores, size })
    }
}

fn sample_bytes(table: &Table) -> Result<u64> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in 0..table.rows() {
        let cells: Vec<String> = (0..table.columns().len())
            .map(|c| match table.cell(row, c) {
                Some(zerocard_core::Literal::Num(x)) => x.to_string(),
                Some(zerocard_core::Literal::Text(s)) => s,
                None => String::new(),
            })
            .collect();
        w.write_record(&cells)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(bytes.len() as u64)
}

impl Estimator for SampleEstimator {
    fn name(&self) -> String {
        Method::Sample.name().into()
    }

    fn estimate(&self, query: &Query) -> zerocard_core::Result<u64> {
        let store = self
            .stores
            .get(&query.table_id)
            .ok_or_else(|| unknown_table(&query.table_id))?;
        store.estimate(query)
    }

    fn size_bytes(&self) -> u64 {
        self.size
    }
}

/// Fills in missing true cardinalities by scanning the tables.
pub fn label_workload(queries: &mut [Query], tables: &[Table]) -> Result<()> {
    let by_id: BTreeMap<&str, &Table> = tables.iter().map(|t| (t.table_id.as_str(), t)).collect();
    for (i, q) in queries.iter_mut().enumerate() {
        if q.true_card.is_none() {
            let t = by_id.get(q.table_id.as_str()).ok_or_else(|| {
                CliError::Config(format!(
                    "query {i} references unknown table `{}`",
                    q.table_id
                ))
            })?;
            q.true_card = Some(selectivity_oracle(t, q).context(|| format!("query {i}"))?);
        }
    }
    Ok(())
}

/// Runs `estimator` over a labelled workload and aggregates the report.
pub fn evaluate(
    estimator: &dyn Estimator,
    workload: &[Query],
    build_seconds: f64,
) -> Result<EvalReport> {
    let mut records = Vec::with_capacity(workload.len());
    for (i, q) in workload.iter().enumerate() {
        let true_card = q
            .true_card
            .ok_or_else(|| CliError::Config(format!("query {i} has no true cardinality")))?;
        if true_card == 0 {
            return Err(zerocard_core::Error::InvalidCard(0)).context(|| format!("query {i}"));
        }
        let start = Instant::now();
        let estimate = estimator.estimate(q).context(|| format!("query {i}"))?;
        records.push(EstimateRecord {
            query_id: i,
            true_card,
            estimate,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    EvalReport::from_records(
        estimator.name(),
        &records,
        build_seconds,
        estimator.size_bytes(),
    )
    .context(|| format!("evaluating {}", estimator.name()))
}

/// Builds the estimator for `method`, timing the one-time construction.
pub fn build_estimator(
    method: Method,
    tables: &[Table],
    zerocard: Option<(ModelParams, EmbeddingStore)>,
    buckets: usize,
    sample_rate: f64,
    seed: u64,
) -> Result<(Box<dyn Estimator>, f64)> {
    let start = Instant::now();
    let est: Box<dyn Estimator> = match method {
        Method::Zerocard => {
            let (model, emb) = zerocard.ok_or_else(|| {
                CliError::Config("zerocard needs --model and --embeddings".into())
            })?;
            Box::new(ZeroCardEstimator::new(model, emb, tables))
        }
        Method::Sample => Box::new(SampleEstimator::build(tables, sample_rate, seed)?),
        m => Box::new(
            HistogramEstimator::build(m.heuristic().expect("histogram method"), tables, buckets)
                .context(|| "building histograms".into())?,
        ),
    };
    Ok((est, start.elapsed().as_secs_f64()))
}

/// JSON document written by `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSet {
    pub queries: usize,
    /// Time spent loading the embedding store.
    pub embedding_seconds: f64,
    pub reports: Vec<EvalReport>,
}

/// Same document with every timing field zeroed; reproducible across runs.
pub fn without_timing(set: &ReportSet) -> ReportSet {
    let mut s = set.clone();
    s.embedding_seconds = 0.0;
    for r in &mut s.reports {
        r.inference_seconds = 0.0;
        r.build_seconds = 0.0;
    }
    s
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

/// Aligned-column text rendering of the reports.
pub fn render_table(set: &ReportSet) -> String {
    let header = [
        "method", "fail%", "mean", "p50", "p75", "p90", "p95", "p99", "max", "time(s)", "size(B)",
    ];
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in &set.reports {
        let e = r.errors;
        let q = |f: fn(&zerocard_core::metrics::Quantiles) -> f64| opt(e.map(|e| f(&e.quantiles)));
        rows.push(vec![
            r.method.clone(),
            format!("{:.2}", 100.0 * r.failure_rate),
            opt(e.map(|e| e.mean)),
            q(|q| q.p50),
            q(|q| q.p75),
            q(|q| q.p90),
            q(|q| q.p95),
            q(|q| q.p99),
            opt(e.map(|e| e.max)),
            format!("{:.4}", r.inference_seconds),
            r.model_size_bytes.to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (cell, w))| {
                if i == 0 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        writeln!(out, "{}", line.join("  ").trim_end()).expect("write to string");
    }
    writeln!(
        out,
        "queries: {}, embedding load: {:.4}s",
        set.queries, set.embedding_seconds
    )
    .expect("write to string");
    out
}
