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

//! Newline-delimited JSON estimation service over TCP.
//!
//! Each request line `{"table_id": .., "predicates": [..]}` is answered with
//! one line `{"estimate": n, "method": "zerocard"}`, or
//! `{"error": code, "message": ..}` when the request cannot be served.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use serde::Deserialize;
use serde_json::json;
use zerocard_core::{Predicate, Query};

use crate::eval::Estimator;

#[derive(Debug, Deserialize)]
struct Request {
    table_id: String,
    predicates: Vec<Predicate>,
}

/// The response line for one request line.
pub fn respond(estimator: &dyn Estimator, line: &str) -> serde_json::Value {
    let request: Request = match serde_json::from_str(line) {
        Ok(r) => r,
        Err(e) => return json!({ "error": "ParseError", "message": e.to_string() }),
    };
    let query = Query::new(request.table_id, request.predicates);
    match estimator.estimate(&query) {
        Ok(estimate) => json!({ "estimate": estimate, "method": estimator.name() }),
        Err(e) => json!({ "error": e.code(), "message": e.to_string() }),
    }
}

fn handle(stream: TcpStream, estimator: &dyn Estimator) -> std::io::Result<()> {
    let mut writer = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut out = serde_json::to_string(&respond(estimator, &line)).expect("serializable");
        out.push('\n');
        writer.write_all(out.as_bytes())?;
        writer.flush()?;
    }
    Ok(())
}

/// Accepts connections until the listener fails, one thread per connection.
pub fn serve(listener: TcpListener, estimator: Arc<dyn Estimator>) -> std::io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let estimator = Arc::clone(&estimator);
        thread::spawn(move || {
            // A dropped client only ends its own connection.
            let _ = handle(stream, estimator.as_ref());
        });
    }
    Ok(())
}
