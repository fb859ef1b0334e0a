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

//! Seeded synthetic tables whose column names carry their distributions.
//!
//! Each archetype pairs a descriptor (name, type, constraints, comment) with
//! a generator, so two tables sharing a column name share its distribution
//! family up to per-table jitter. Uniform, skewed, constant, unique and
//! correlated columns all appear.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::table::{Column, ColumnData, ColumnDescriptor, ColumnKind, Table};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Archetype {
    Id,
    Age,
    Price,
    Quantity,
    Rating,
    CreatedYear,
    Temperature,
    Version,
    Score,
    Salary,
    Status,
    Country,
    Gender,
    Category,
    Email,
    Currency,
}

const ARCHETYPES: [Archetype; 16] = [
    Archetype::Id,
    Archetype::Age,
    Archetype::Price,
    Archetype::Quantity,
    Archetype::Rating,
    Archetype::CreatedYear,
    Archetype::Temperature,
    Archetype::Version,
    Archetype::Score,
    Archetype::Salary,
    Archetype::Status,
    Archetype::Country,
    Archetype::Gender,
    Archetype::Category,
    Archetype::Email,
    Archetype::Currency,
];

const STATUSES: [&str; 5] = ["active", "pending", "shipped", "cancelled", "returned"];
const COUNTRIES: [&str; 12] = [
    "US", "CN", "DE", "FR", "GB", "JP", "IN", "BR", "CA", "AU", "IT", "ES",
];
const CATEGORIES: [&str; 8] = [
    "books", "toys", "garden", "music", "sports", "food", "tools", "games",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub min_rows: usize,
    pub max_rows: usize,
    pub min_columns: usize,
    pub max_columns: usize,
    /// Probability that a generated cell is null, for columns that allow nulls.
    pub null_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            min_rows: 500,
            max_rows: 2000,
            min_columns: 4,
            max_columns: 8,
            null_rate: 0.02,
        }
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    // Box-Muller; 1 - u keeps the logarithm finite.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    mean + sd * libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}

/// Index in `0..n` drawn with probability proportional to `1/(i+1)^s`.
fn zipf<R: Rng + ?Sized>(rng: &mut R, n: usize, s: f64) -> usize {
    let total: f64 = (1..=n).map(|i| libm::pow(i as f64, -s)).sum();
    let mut u = rng.gen::<f64>() * total;
    for i in 0..n {
        u -= libm::pow((i + 1) as f64, -s);
        if u <= 0.0 {
            return i;
        }
    }
    n - 1
}

fn maybe_null<R: Rng + ?Sized, T>(rng: &mut R, rate: f64, v: T) -> Option<T> {
    if rate > 0.0 && rng.gen::<f64>() < rate {
        None
    } else {
        Some(v)
    }
}

fn descriptor(a: Archetype) -> ColumnDescriptor {
    use ColumnKind::{Categorical as C, Numerical as N};
    match a {
        Archetype::Id => ColumnDescriptor::new("id", "int", N).with_constraints("primary key"),
        Archetype::Age => {
            ColumnDescriptor::new("age", "int", N).with_comment("age of the customer in years")
        }
        Archetype::Price => {
            ColumnDescriptor::new("price", "decimal", N).with_comment("unit price in dollars")
        }
        Archetype::Quantity => {
            ColumnDescriptor::new("quantity", "int", N).with_comment("number of items ordered")
        }
        Archetype::Rating => {
            ColumnDescriptor::new("rating", "int", N).with_comment("review stars from 1 to 5")
        }
        Archetype::CreatedYear => ColumnDescriptor::new("created_year", "int", N)
            .with_comment("year the record was created"),
        Archetype::Temperature => ColumnDescriptor::new("temperature", "float", N)
            .with_comment("daily temperature in celsius"),
        Archetype::Version => {
            ColumnDescriptor::new("schema_version", "int", N).with_constraints("not null")
        }
        Archetype::Score => {
            ColumnDescriptor::new("score", "float", N).with_comment("uniform random score")
        }
        Archetype::Salary => {
            ColumnDescriptor::new("salary", "decimal", N).with_comment("annual salary")
        }
        Archetype::Status => {
            ColumnDescriptor::new("status", "varchar", C).with_comment("order status")
        }
        Archetype::Country => {
            ColumnDescriptor::new("country", "char(2)", C).with_comment("country code")
        }
        Archetype::Gender => ColumnDescriptor::new("gender", "varchar", C),
        Archetype::Category => {
            ColumnDescriptor::new("category", "varchar", C).with_comment("product category")
        }
        Archetype::Email => ColumnDescriptor::new("email", "varchar", C).with_constraints("unique"),
        Archetype::Currency => {
            ColumnDescriptor::new("currency", "char(3)", C).with_constraints("not null")
        }
    }
}

fn numeric<R: Rng + ?Sized>(
    a: Archetype,
    rows: usize,
    rng: &mut R,
    null_rate: f64,
) -> Vec<Option<f64>> {
    // Per-table jitter keeps tables distinct within one family.
    let shift: f64 = rng.gen_range(-0.1..0.1);
    let nulls = if matches!(a, Archetype::Id | Archetype::Version) {
        0.0
    } else {
        null_rate
    };
    let version = rng.gen_range(1..4) as f64;
    (0..rows)
        .map(|row| {
            let v = match a {
                Archetype::Id => (row + 1) as f64,
                Archetype::Age => {
                    libm::round(normal(rng, 38.0 * (1.0 + shift), 12.0).clamp(18.0, 90.0))
                }
                Archetype::Price => {
                    libm::round(libm::exp(normal(rng, 3.0 + shift, 1.0)) * 100.0) / 100.0
                }
                Archetype::Quantity => (zipf(rng, 50, 1.3) + 1) as f64,
                Archetype::Rating => (5 - zipf(rng, 5, 0.8)) as f64,
                Archetype::CreatedYear => 2000.0 + libm::floor(libm::sqrt(rng.gen::<f64>()) * 25.0),
                Archetype::Temperature => {
                    libm::round(normal(rng, 15.0 + 10.0 * shift, 8.0) * 10.0) / 10.0
                }
                Archetype::Version => version,
                Archetype::Score => rng.gen::<f64>() * 100.0,
                Archetype::Salary => libm::round(libm::exp(normal(rng, 11.0 + shift, 0.5))),
                _ => unreachable!("categorical archetype"),
            };
            maybe_null(rng, nulls, v)
        })
        .collect()
}

fn categorical<R: Rng + ?Sized>(
    a: Archetype,
    rows: usize,
    rng: &mut R,
    null_rate: f64,
) -> Vec<Option<String>> {
    let nulls = if matches!(a, Archetype::Email | Archetype::Currency) {
        0.0
    } else {
        null_rate
    };
    let currency = ["USD", "EUR", "CNY"][rng.gen_range(0..3)];
    (0..rows)
        .map(|row| {
            let v = match a {
                Archetype::Status => STATUSES[zipf(rng, STATUSES.len(), 1.2)].to_string(),
                Archetype::Country => COUNTRIES[zipf(rng, COUNTRIES.len(), 1.0)].to_string(),
                Archetype::Gender => if rng.gen_bool(0.5) { "female" } else { "male" }.to_string(),
                Archetype::Category => CATEGORIES[rng.gen_range(0..CATEGORIES.len())].to_string(),
                Archetype::Email => format!("user{row}@example.com"),
                Archetype::Currency => currency.to_string(),
                _ => unreachable!("numerical archetype"),
            };
            maybe_null(rng, nulls, v)
        })
        .collect()
}

fn column<R: Rng + ?Sized>(
    a: Archetype,
    rows: usize,
    rng: &mut R,
    null_rate: f64,
) -> Result<Column> {
    let desc = descriptor(a);
    let data = match desc.kind {
        ColumnKind::Numerical => ColumnData::Numerical(numeric(a, rows, rng, null_rate)),
        ColumnKind::Categorical => ColumnData::Categorical(categorical(a, rows, rng, null_rate)),
    };
    Column::new(desc, data)
}

/// Adds columns derived from ones already present: `birth_year` from `age`
/// and `total_amount` from `price · quantity`.
fn derived_columns(columns: &mut Vec<Column>) -> Result<()> {
    let find = |cols: &[Column], name: &str| cols.iter().position(|c| c.name() == name);
    if let Some(i) = find(columns, "age") {
        if let ColumnData::Numerical(age) = &columns[i].data {
            let years = age.iter().map(|a| a.map(|a| 2024.0 - a)).collect();
            let desc = ColumnDescriptor::new("birth_year", "int", ColumnKind::Numerical)
                .with_comment("year of birth");
            columns.push(Column::new(desc, ColumnData::Numerical(years))?);
        }
    }
    if let (Some(p), Some(q)) = (find(columns, "price"), find(columns, "quantity")) {
        if let (ColumnData::Numerical(price), ColumnData::Numerical(qty)) =
            (&columns[p].data, &columns[q].data)
        {
            let total = price
                .iter()
                .zip(qty)
                .map(|(p, q)| match (p, q) {
                    (Some(p), Some(q)) => Some(libm::round(p * q * 100.0) / 100.0),
                    _ => None,
                })
                .collect();
            let desc = ColumnDescriptor::new("total_amount", "decimal", ColumnKind::Numerical)
                .with_comment("price times quantity");
            columns.push(Column::new(desc, ColumnData::Numerical(total))?);
        }
    }
    Ok(())
}

/// One synthetic table drawn from `rng`.
pub fn synth_table<R: Rng + ?Sized>(
    table_id: &str,
    rng: &mut R,
    cfg: &SynthConfig,
) -> Result<Table> {
    let rows = rng.gen_range(cfg.min_rows..=cfg.max_rows.max(cfg.min_rows));
    let hi = cfg.max_columns.clamp(1, ARCHETYPES.len());
    let lo = cfg.min_columns.clamp(1, hi);
    let width = rng.gen_range(lo..=hi);
    let mut picks = sample(rng, ARCHETYPES.len(), width).into_vec();
    picks.sort_unstable();
    let mut columns = Vec::with_capacity(width + 2);
    for i in picks {
        columns.push(column(ARCHETYPES[i], rows, rng, cfg.null_rate)?);
    }
    derived_columns(&mut columns)?;
    Table::new(table_id, columns)
}

/// `count` tables named `synth_000`, `synth_001`, ..., reproducible from `seed`.
pub fn synth_corpus(count: usize, seed: u64, cfg: &SynthConfig) -> Result<Vec<Table>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| synth_table(&format!("synth_{i:03}"), &mut rng, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_reproducible() {
        let cfg = SynthConfig {
            min_rows: 50,
            max_rows: 80,
            ..SynthConfig::default()
        };
        let a = synth_corpus(4, 9, &cfg).unwrap();
        let b = synth_corpus(4, 9, &cfg).unwrap();
        assert_eq!(a, b);
        for t in &a {
            assert!((50..=80).contains(&t.rows()));
            assert!(t.columns().len() >= 4);
        }
    }

    #[test]
    fn derived_columns_follow_sources() {
        let cfg = SynthConfig {
            min_rows: 30,
            max_rows: 30,
            min_columns: 16,
            max_columns: 16,
            null_rate: 0.0,
        };
        let t = synth_corpus(1, 1, &cfg).unwrap().remove(0);
        let age = t.column("age").unwrap().data.numeric_values();
        let birth = t.column("birth_year").unwrap().data.numeric_values();
        assert!(age.iter().zip(&birth).all(|(a, b)| a + b == 2024.0));
        let version = t
            .column("schema_version")
            .unwrap()
            .descriptor
            .bounds
            .unwrap();
        assert_eq!(version.0, version.1);
    }
}
