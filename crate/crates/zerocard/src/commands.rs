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

//! The pipeline commands. Each takes the resolved configuration and returns
//! the JSON summary printed on stdout; file outputs go to the configured paths.

use std::collections::BTreeMap;
use std::net::TcpListener;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use zerocard_core::features::TableEncoder;
use zerocard_core::semantics::{
    serialize_column_text, stub_embed, EmbeddingProvider, EmbeddingStore,
};
use zerocard_core::synth::{synth_corpus, SynthConfig};
use zerocard_core::training::{generate_queries, train, GenerationConfig, TrainConfig};
use zerocard_core::{Query, Table};

use crate::config::{require, RunConfig};
use crate::embfile::{load_embeddings, save_embeddings};
use crate::error::{CliError, Context, Result};
use crate::eval::{
    build_estimator, evaluate, label_workload, render_table, Method, ReportSet, ZeroCardEstimator,
};
use crate::ingest::{load_corpus, manifest, save_corpus, to_pretty, write_file, Schema};
use crate::modelfile::{load_model, save_model};
use crate::workload::{load_workload, save_workload};

pub fn load_tables(cfg: &RunConfig) -> Result<Vec<Table>> {
    load_corpus(
        require(&cfg.paths.tables, "--tables")?,
        require(&cfg.paths.schema, "--schema")?,
    )
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    write_file(path, format!("{}\n", to_pretty(value)).as_bytes())
}

/// Writes a seeded synthetic corpus as CSV tables plus schemas.
pub fn cmd_synth(cfg: &RunConfig) -> Result<Value> {
    let tables = synth_corpus(cfg.synth_tables, cfg.seed, &SynthConfig::default())?;
    save_corpus(
        &tables,
        require(&cfg.paths.tables, "--tables")?,
        require(&cfg.paths.schema, "--schema")?,
    )?;
    Ok(json!({ "tables": tables.len(), "rows": tables.iter().map(Table::rows).sum::<usize>() }))
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<Value> {
    let tables = load_tables(cfg)?;
    let m = manifest(&tables);
    if let Some(out) = &cfg.paths.out {
        write_json(out, &m)?;
    }
    Ok(serde_json::to_value(m).expect("serializable manifest"))
}

/// Stub embeddings for every column of every schema file.
pub fn cmd_embed_stub(cfg: &RunConfig) -> Result<Value> {
    let dir = require(&cfg.paths.schema, "--schema")?;
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let d = cfg.hyper.d;
    let mut store = EmbeddingStore::new(d);
    for f in &files {
        for c in &Schema::load(f)?.columns {
            let text = serialize_column_text(&c.descriptor());
            let v = stub_embed(&text, d, cfg.seed);
            store.insert(text, v)?;
        }
    }
    save_embeddings(&store, require(&cfg.paths.embeddings, "--embeddings")?)?;
    Ok(json!({ "entries": store.len(), "d": d }))
}

/// Generated training queries for every table, labelled with true cardinalities.
pub fn generate_workload(tables: &[Table], cfg: &RunConfig) -> Result<Vec<Query>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gen = GenerationConfig {
        max_predicates: cfg.hyper.max_predicates,
        ..GenerationConfig::default()
    };
    let mut queries = Vec::new();
    for t in tables {
        let qs = generate_queries(t, cfg.queries_per_table, &mut rng, gen)
            .context(|| format!("generating queries for `{}`", t.table_id))?;
        queries.extend(qs);
    }
    Ok(queries)
}

pub fn cmd_gen_queries(cfg: &RunConfig) -> Result<Value> {
    let tables = load_tables(cfg)?;
    let queries = generate_workload(&tables, cfg)?;
    save_workload(&queries, require(&cfg.paths.workload, "--workload")?)?;
    Ok(json!({ "queries": queries.len(), "tables": tables.len() }))
}

fn load_matching_embeddings(cfg: &RunConfig) -> Result<EmbeddingStore> {
    let path = require(&cfg.paths.embeddings, "--embeddings")?;
    let store = load_embeddings(path)?;
    if store.dim() != cfg.hyper.d {
        return Err(CliError::Config(format!(
            "embeddings in {} have d = {} but the model expects d = {}",
            path.display(),
            store.dim(),
            cfg.hyper.d
        )));
    }
    Ok(store)
}

/// Trains on the workload and saves the model; the global seed drives both
/// initialization and shuffling.
pub fn cmd_train(cfg: &RunConfig) -> Result<Value> {
    let tables = load_tables(cfg)?;
    let embeddings = load_matching_embeddings(cfg)?;
    let mut queries = load_workload(require(&cfg.paths.workload, "--workload")?)?;
    label_workload(&mut queries, &tables)?;
    let by_id: BTreeMap<&str, &Table> = tables.iter().map(|t| (t.table_id.as_str(), t)).collect();
    let mut encoders = BTreeMap::new();
    let mut corpus = Vec::with_capacity(queries.len());
    for (i, q) in queries.iter().enumerate() {
        let table = by_id.get(q.table_id.as_str()).ok_or_else(|| {
            CliError::Config(format!(
                "query {i} references unknown table `{}`",
                q.table_id
            ))
        })?;
        if !encoders.contains_key(&q.table_id) {
            let enc = TableEncoder::new(table, &embeddings, cfg.hyper.h)
                .context(|| format!("encoding table `{}`", q.table_id))?;
            encoders.insert(q.table_id.clone(), enc);
        }
        corpus.push(
            encoders[&q.table_id]
                .training_features(q)
                .context(|| format!("query {i}"))?,
        );
    }
    let train_cfg = TrainConfig {
        seed: cfg.seed,
        ..cfg.train.clone()
    };
    let outcome = train(&corpus, cfg.effective_hyper(), &train_cfg, cfg.seed)
        .context(|| "training".into())?;
    let bytes = save_model(&outcome.params, require(&cfg.paths.model, "--model")?)?;
    if let Some(out) = &cfg.paths.out {
        write_json(out, &outcome.history)?;
    }
    Ok(json!({
        "examples": corpus.len(),
        "parameters": outcome.params.parameter_count(),
        "model_bytes": bytes,
        "history": outcome.history,
    }))
}

fn zerocard_inputs(
    cfg: &RunConfig,
    methods: &[Method],
) -> Result<Option<(zerocard_core::model::ModelParams, EmbeddingStore)>> {
    if !methods.contains(&Method::Zerocard) {
        return Ok(None);
    }
    let model = load_model(require(&cfg.paths.model, "--model")?)?;
    let mut cfg = cfg.clone();
    cfg.hyper.d = model.hyper.d;
    Ok(Some((model, load_matching_embeddings(&cfg)?)))
}

pub fn cmd_estimate(cfg: &RunConfig, method: Method, query: &str) -> Result<Value> {
    let query: Query = serde_json::from_str(query).map_err(|e| CliError::Parse {
        path: "<query>".into(),
        row: 1,
        column: e.column().to_string(),
        message: e.to_string(),
    })?;
    let tables = load_tables(cfg)?;
    let (est, _) = build_estimator(
        method,
        &tables,
        zerocard_inputs(cfg, &[method])?,
        cfg.histogram_buckets,
        cfg.sample_rate,
        cfg.seed,
    )?;
    let estimate = est.estimate(&query).context(|| "estimating".into())?;
    Ok(json!({ "estimate": estimate, "method": method.name() }))
}

/// Evaluates each method over the workload; returns the report set.
pub fn cmd_eval(cfg: &RunConfig, methods: &[Method]) -> Result<ReportSet> {
    let tables = load_tables(cfg)?;
    let mut queries = load_workload(require(&cfg.paths.workload, "--workload")?)?;
    label_workload(&mut queries, &tables)?;
    let start = Instant::now();
    let mut zc = zerocard_inputs(cfg, methods)?;
    let embedding_seconds = start.elapsed().as_secs_f64();
    let mut reports = Vec::with_capacity(methods.len());
    for &m in methods {
        let inputs = if m == Method::Zerocard {
            zc.take()
        } else {
            None
        };
        let (est, build) = build_estimator(
            m,
            &tables,
            inputs,
            cfg.histogram_buckets,
            cfg.sample_rate,
            cfg.seed,
        )?;
        reports.push(evaluate(est.as_ref(), &queries, build)?);
    }
    let set = ReportSet {
        queries: queries.len(),
        embedding_seconds,
        reports,
    };
    if let Some(out) = &cfg.paths.out {
        write_json(out, &set)?;
        write_file(&out.with_extension("txt"), render_table(&set).as_bytes())?;
    }
    Ok(set)
}

/// Loads the model and serves estimates until the process is stopped.
pub fn cmd_serve(cfg: &RunConfig, port: u16, on_ready: impl FnOnce(&TcpListener)) -> Result<()> {
    let tables = load_tables(cfg)?;
    let (model, emb) =
        zerocard_inputs(cfg, &[Method::Zerocard])?.expect("zerocard inputs requested");
    let estimator = Arc::new(ZeroCardEstimator::new(model, emb, &tables));
    let addr = ("127.0.0.1", port);
    let listener =
        TcpListener::bind(addr).map_err(|e| CliError::io(format!("127.0.0.1:{port}"), e))?;
    on_ready(&listener);
    crate::serve::serve(listener, estimator).map_err(|e| CliError::io("listener", e))
}
