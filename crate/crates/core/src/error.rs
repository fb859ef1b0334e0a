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

use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` has no non-null values")]
    EmptyColumn(String),
    #[error("invalid bounds: l={l} > u={u}")]
    InvalidBounds { l: f64, u: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("query has {got} predicate columns, maximum is {max}")]
    TooManyPredicates { got: usize, max: usize },
    #[error("query has no predicates")]
    EmptyQuery,
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    #[error("true cardinality must be at least 1, got {0}")]
    InvalidCard(u64),
    #[error("produced {produced} of {requested} queries within an attempt budget of {budget}")]
    GenerationExhausted {
        produced: usize,
        requested: usize,
        budget: usize,
    },
    #[error("non-finite loss in batch {batch}")]
    NonFiniteLoss { batch: usize },
    #[error("no embedding for column text `{0}`")]
    MissingEmbedding(String),
    #[error("q-error is undefined for a zero estimate")]
    Undefined,
    #[error("workload is empty")]
    EmptyWorkload,
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("table `{0}` has no rows")]
    EmptyTable(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownColumn(_) => "UnknownColumn",
            Error::EmptyColumn(_) => "EmptyColumn",
            Error::InvalidBounds { .. } => "InvalidBounds",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::TooManyPredicates { .. } => "TooManyPredicates",
            Error::EmptyQuery => "EmptyQuery",
            Error::KindMismatch(_) => "KindMismatch",
            Error::InvalidCard(_) => "InvalidCard",
            Error::GenerationExhausted { .. } => "GenerationExhausted",
            Error::NonFiniteLoss { .. } => "NonFiniteLoss",
            Error::MissingEmbedding(_) => "MissingEmbedding",
            Error::Undefined => "Undefined",
            Error::EmptyWorkload => "EmptyWorkload",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::EmptyTable(_) => "EmptyTable",
        }
    }
}
