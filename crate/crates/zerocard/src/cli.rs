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

//! Command-line interface.

use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use zerocard_core::model::Ablation;

use crate::commands;
use crate::config::{RunConfig, CONFIG_ENV};
use crate::error::{CliError, Result};
use crate::eval::{render_table, Method};

#[derive(Debug, Parser)]
#[command(
    name = "zerocard",
    version,
    about = "Semantic cardinality estimation pipeline"
)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory of `<table>.csv` files.
    #[arg(long, global = true)]
    pub tables: Option<PathBuf>,
    /// Directory of `<table>.json` schema files.
    #[arg(long, global = true)]
    pub schema: Option<PathBuf>,
    #[arg(long, global = true)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    #[arg(long, global = true)]
    pub workload: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Estimation methods, comma separated.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub method: Vec<Method>,
    #[arg(long, global = true)]
    pub sample_rate: Option<f64>,
    #[arg(long, global = true, value_parser = parse_ablation)]
    pub ablation: Option<Ablation>,
    /// Embedding width (overrides the configured `hyper.d`).
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic corpus of CSV tables and schemas.
    Synth {
        #[arg(long)]
        count: Option<usize>,
    },
    /// Load tables and print their manifest.
    Ingest,
    /// Write deterministic stub embeddings for every schema column.
    EmbedStub,
    /// Generate a labelled training workload.
    GenQueries {
        #[arg(long)]
        per_table: Option<usize>,
    },
    /// Train the estimator on a workload.
    Train {
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Estimate one query given as JSON (`-` or absent reads stdin).
    Estimate { query: Option<String> },
    /// Evaluate methods over a workload.
    Eval,
    /// Serve estimates as newline-delimited JSON over TCP.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
    },
}

fn parse_ablation(s: &str) -> std::result::Result<Ablation, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown ablation `{s}` (expected no-moe, no-correlation or no-dist)"))
}

impl Cli {
    /// Configuration file (if any) with flag overrides applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let p = &mut cfg.paths;
        for (flag, slot) in [
            (&self.tables, &mut p.tables),
            (&self.schema, &mut p.schema),
            (&self.embeddings, &mut p.embeddings),
            (&self.model, &mut p.model),
            (&self.workload, &mut p.workload),
            (&self.out, &mut p.out),
        ] {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.sample_rate {
            cfg.sample_rate = r;
        }
        if let Some(a) = self.ablation {
            cfg.ablation = Some(a);
        }
        if let Some(d) = self.dim {
            cfg.hyper.d = d;
        }
        match &self.command {
            Command::Synth { count: Some(n) } => cfg.synth_tables = *n,
            Command::GenQueries { per_table: Some(n) } => cfg.queries_per_table = *n,
            Command::Train { epochs: Some(n) } => cfg.train.epochs = *n,
            _ => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

/// Runs one command; returns what should be printed on stdout.
pub fn run(cli: &Cli) -> Result<String> {
    let cfg = cli.resolve()?;
    let methods = if cli.method.is_empty() {
        Method::ALL.to_vec()
    } else {
        cli.method.clone()
    };
    Ok(match &cli.command {
        Command::Synth { .. } => pretty(&commands::cmd_synth(&cfg)?),
        Command::Ingest => pretty(&commands::cmd_ingest(&cfg)?),
        Command::EmbedStub => pretty(&commands::cmd_embed_stub(&cfg)?),
        Command::GenQueries { .. } => pretty(&commands::cmd_gen_queries(&cfg)?),
        Command::Train { .. } => pretty(&commands::cmd_train(&cfg)?),
        Command::Estimate { query } => {
            let text = match query.as_deref() {
                Some(q) if q != "-" => q.to_string(),
                _ => {
                    let mut buf = String::new();
                    std::io::stdin()
                        .read_to_string(&mut buf)
                        .map_err(|e| CliError::io("<stdin>", e))?;
                    buf
                }
            };
            let method = cli.method.first().copied().unwrap_or(Method::Zerocard);
            serde_json::to_string(&commands::cmd_estimate(&cfg, method, &text)?)
                .expect("serializable")
        }
        Command::Eval => render_table(&commands::cmd_eval(&cfg, &methods)?),
        Command::Serve { port } => {
            commands::cmd_serve(&cfg, *port, |l| {
                if let Ok(addr) = l.local_addr() {
                    println!("{}", serde_json::json!({ "listening": addr.to_string() }));
                }
            })?;
            String::new()
        }
    })
}
