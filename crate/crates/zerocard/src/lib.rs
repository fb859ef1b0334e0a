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

//! File formats, CSV ingestion, evaluation and the command-line pipeline
//! around [`zerocard_core`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod embfile;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod modelfile;
pub mod serve;
pub mod workload;

pub use error::{CliError, Result};
