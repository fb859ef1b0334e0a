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

//! Conjunctive single-table queries.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Comparison operator of a predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

impl Op {
    pub const ALL: [Op; 5] = [Op::Lt, Op::Gt, Op::Eq, Op::Le, Op::Ge];

    pub fn symbol(self) -> &'static str {
        match self {
            Op::Lt => "<",
            Op::Gt => ">",
            Op::Eq => "=",
            Op::Le => "<=",
            Op::Ge => ">=",
        }
    }

    /// Exact comparison `cell <op> literal`.
    #[inline]
    pub fn matches(self, cell: f64, literal: f64) -> bool {
        match self {
            Op::Lt => cell < literal,
            Op::Gt => cell > literal,
            Op::Eq => cell == literal,
            Op::Le => cell <= literal,
            Op::Ge => cell >= literal,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A predicate literal: a number for numerical columns, text for categorical ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Num(f64),
    Text(String),
}

impl Literal {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Literal::Num(v) => Some(*v),
            Literal::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Literal::Text(s) => Some(s),
            Literal::Num(_) => None,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Num(v) => write!(f, "{v}"),
            Literal::Text(s) => write!(f, "'{s}'"),
        }
    }
}

/// `column <op> value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub column: String,
    pub op: Op,
    pub value: Literal,
}

impl Predicate {
    pub fn new(column: impl Into<String>, op: Op, value: Literal) -> Self {
        Predicate {
            column: column.into(),
            op,
            value,
        }
    }
}

/// `SELECT COUNT(*) FROM table WHERE p1 AND p2 AND ...`, with the true count
/// attached once it is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub table_id: String,
    pub predicates: Vec<Predicate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_card: Option<u64>,
}

impl Query {
    pub fn new(table_id: impl Into<String>, predicates: Vec<Predicate>) -> Self {
        Query {
            table_id: table_id.into(),
            predicates,
            true_card: None,
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SELECT COUNT(*) FROM {}", self.table_id)?;
        for (i, p) in self.predicates.iter().enumerate() {
            let kw = if i == 0 { "WHERE" } else { "AND" };
            write!(f, " {kw} {} {} {}", p.column, p.op, p.value)?;
        }
        Ok(())
    }
}
