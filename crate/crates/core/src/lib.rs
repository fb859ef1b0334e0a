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

//! Core of the zerocard cardinality estimator.
//!
//! Everything here is allocation-only `no_std`: typed tables, distribution and
//! predicate encodings, the semantic estimator with its manual backward pass,
//! the workload generator and training loop, the statistical baselines and
//! the q-error metrics. File formats, CSV ingestion and the command line live
//! in the `zerocard` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod distribution;
mod error;
pub mod features;
pub mod hash;
pub mod metrics;
pub mod model;
pub mod query;
pub mod semantics;
pub mod synth;
pub mod table;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};
pub use query::{Literal, Op, Predicate, Query};
pub use table::{Column, ColumnData, ColumnDescriptor, ColumnKind, ColumnStats, Table};
