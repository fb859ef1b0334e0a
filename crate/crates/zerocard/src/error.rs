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

use std::path::PathBuf;

/// Errors surfaced by the IO layer and the command-line pipeline.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("{}: {message}", path.display())]
    SchemaMismatch { path: PathBuf, message: String },
    #[error("{}: row {row}, column `{column}`: {message}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{}: expected format version {expected}, found {found}", path.display())]
    VersionMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{}: {message}", path.display())]
    Shape { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Core {
        context: String,
        source: zerocard_core::Error,
    },
}

impl CliError {
    /// Machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::FileNotFound(_) => "FileNotFound",
            CliError::SchemaMismatch { .. } => "SchemaMismatch",
            CliError::Parse { .. } => "ParseError",
            CliError::Format { .. } => "FormatError",
            CliError::VersionMismatch { .. } => "VersionMismatch",
            CliError::Shape { .. } => "ShapeMismatch",
            CliError::Io { .. } => "IoError",
            CliError::Core { source, .. } => source.code(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            CliError::FileNotFound(path)
        } else {
            CliError::Io { path, source }
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// The JSON line written to stderr on failure.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "error": self.code(), "message": self.to_string() })
    }
}

impl From<zerocard_core::Error> for CliError {
    fn from(source: zerocard_core::Error) -> Self {
        CliError::Core {
            context: "zerocard".into(),
            source,
        }
    }
}

/// Attaches context to core errors.
pub trait Context<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, zerocard_core::Error> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| CliError::Core {
            context: context(),
            source,
        })
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
