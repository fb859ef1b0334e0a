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

//! CSV tables with sidecar schema files.
//!
//! A table `orders` lives in `<tables>/orders.csv` with its schema in
//! `<schema>/orders.json`:
//!
//! ```json
//! {"table_id": "orders",
//!  "columns": [{"name": "price", "data_type": "decimal", "kind": "numerical",
//!               "comment": "unit price"}]}
//! ```
//!
//! Empty CSV cells are nulls. The header must list the schema columns in order.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zerocard_core::{Column, ColumnData, ColumnDescriptor, ColumnKind, Table};

use crate::error::{CliError, Context, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaColumn {
    pub name: String,
    #[serde(default)]
    pub data_type: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub table_id: String,
    pub columns: Vec<SchemaColumn>,
}

impl SchemaColumn {
    pub fn descriptor(&self) -> ColumnDescriptor {
        let mut d = ColumnDescriptor::new(self.name.clone(), self.data_type.clone(), self.kind);
        d.constraints = self.constraints.clone();
        d.comment = self.comment.clone();
        d
    }

    pub fn of(d: &ColumnDescriptor) -> Self {
        SchemaColumn {
            name: d.name.clone(),
            data_type: d.data_type.clone(),
            kind: d.kind,
            constraints: d.constraints.clone(),
            comment: d.comment.clone(),
        }
    }
}

impl Schema {
    pub fn of(table: &Table) -> Self {
        Schema {
            table_id: table.table_id.clone(),
            columns: table
                .columns()
                .iter()
                .map(|c| SchemaColumn::of(&c.descriptor))
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::SchemaMismatch {
            path: path.to_path_buf(),
            message: format!("invalid schema: {e}"),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, format!("{}\n", to_pretty(self)).as_bytes())
    }
}

pub(crate) fn to_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable value")
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Reads `csv_path` under `schema`.
pub fn ingest_csv(csv_path: &Path, schema: &Schema) -> Result<Table> {
    let file = fs::File::open(csv_path).map_err(|e| CliError::io(csv_path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let mismatch = |message: String| CliError::SchemaMismatch {
        path: csv_path.to_path_buf(),
        message,
    };
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| mismatch(format!("unreadable header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let expected: Vec<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
    if header != expected {
        return Err(mismatch(format!(
            "header {header:?} does not match schema columns {expected:?}"
        )));
    }

    let mut data: Vec<ColumnData> = schema
        .columns
        .iter()
        .map(|c| match c.kind {
            ColumnKind::Numerical => ColumnData::Numerical(Vec::new()),
            ColumnKind::Categorical => ColumnData::Categorical(Vec::new()),
        })
        .collect();
    for (i, record) in reader.records().enumerate() {
        // Row numbers count data rows from 1; the header is row 0.
        let row = i + 1;
        let record = record.map_err(|e| CliError::Parse {
            path: csv_path.to_path_buf(),
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        for ((cell, col), column) in record.iter().zip(&mut data).zip(&schema.columns) {
            match col {
                ColumnData::Numerical(v) if cell.trim().is_empty() => v.push(None),
                ColumnData::Numerical(v) => {
                    let parsed = cell.trim().parse::<f64>().ok().filter(|x| x.is_finite());
                    let x = parsed.ok_or_else(|| CliError::Parse {
                        path: csv_path.to_path_buf(),
                        row,
                        column: column.name.clone(),
                        message: format!("`{cell}` is not a finite number"),
                    })?;
                    v.push(Some(x));
                }
                ColumnData::Categorical(v) if cell.is_empty() => v.push(None),
                ColumnData::Categorical(v) => v.push(Some(cell.to_string())),
            }
        }
    }
    let columns = schema
        .columns
        .iter()
        .zip(data)
        .map(|(c, d)| Column::new(c.descriptor(), d))
        .collect::<std::result::Result<Vec<_>, _>>()
        .context(|| format!("table `{}`", schema.table_id))?;
    Table::new(schema.table_id.clone(), columns).context(|| format!("table `{}`", schema.table_id))
}

/// Writes `table` as CSV; nulls become empty cells.
pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let io = |e: csv::Error| CliError::format(path, e.to_string());
    w.write_record(table.columns().iter().map(|c| c.name()))
        .map_err(io)?;
    for row in 0..table.rows() {
        let cells = table.columns().iter().map(|c| match &c.data {
            ColumnData::Numerical(v) => v[row].map(|x| x.to_string()).unwrap_or_default(),
            ColumnData::Categorical(v) => v[row].clone().unwrap_or_default(),
        });
        w.write_record(cells).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::format(path, e.to_string()))?;
    write_file(path, &bytes)
}

/// Table files and their schemas, paired by file stem and sorted by name.
pub fn corpus_files(tables_dir: &Path, schema_dir: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let entries = fs::read_dir(tables_dir).map_err(|e| CliError::io(tables_dir, e))?;
    let mut csvs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    csvs.sort();
    csvs.into_iter()
        .map(|csv| {
            let stem = csv.file_stem().expect("csv file has a stem").to_owned();
            let schema = schema_dir.join(stem).with_extension("json");
            if schema.is_file() {
                Ok((csv, schema))
            } else {
                Err(CliError::FileNotFound(schema))
            }
        })
        .collect()
}

/// Loads every table under `tables_dir`, sorted by file name.
pub fn load_corpus(tables_dir: &Path, schema_dir: &Path) -> Result<Vec<Table>> {
    corpus_files(tables_dir, schema_dir)?
        .iter()
        .map(|(csv, schema)| ingest_csv(csv, &Schema::load(schema)?))
        .collect()
}

/// Writes tables and schemas in the layout [`load_corpus`] reads.
pub fn save_corpus(tables: &[Table], tables_dir: &Path, schema_dir: &Path) -> Result<()> {
    for t in tables {
        write_csv(t, &tables_dir.join(format!("{}.csv", t.table_id)))?;
        Schema::of(t).save(&schema_dir.join(format!("{}.json", t.table_id)))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestColumn {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
    pub null_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub table_id: String,
    pub rows: u64,
    pub columns: Vec<ManifestColumn>,
}

/// Row counts and column statistics of each table.
pub fn manifest(tables: &[Table]) -> Vec<ManifestEntry> {
    tables
        .iter()
        .map(|t| ManifestEntry {
            table_id: t.table_id.clone(),
            rows: t.rows() as u64,
            columns: t
                .columns()
                .iter()
                .map(|c| ManifestColumn {
                    name: c.name().to_string(),
                    kind: c.kind(),
                    bounds: c.descriptor.bounds,
                    null_count: c.descriptor.null_count as u64,
                })
                .collect(),
        })
        .collect()
}
