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

//! q-error, failure accounting and report aggregation.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Percentiles reported for every method.
pub const PERCENTILES: [u32; 5] = [50, 75, 90, 95, 99];

/// `max(true/est, est/true)`. An estimate of zero is a failure and has no q-error.
pub fn q_error(estimate: u64, true_card: u64) -> Result<f64> {
    if estimate == 0 || true_card == 0 {
        return Err(Error::Undefined);
    }
    let (e, t) = (estimate as f64, true_card as f64);
    Ok(if e >= t { e / t } else { t / e })
}

/// Nearest-rank quantile of an ascending slice: the element at rank `⌈p·n⌉`.
pub fn nearest_rank(sorted: &[f64], percentile: u32) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    // Integer arithmetic keeps ⌈p·n/100⌉ exact.
    let n = sorted.len();
    let rank = (percentile as usize * n).div_ceil(100).max(1);
    Some(sorted[rank.min(n) - 1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub query_id: usize,
    pub true_card: u64,
    pub estimate: u64,
    /// Seconds spent on feature extraction and estimation.
    pub seconds: f64,
}

impl EstimateRecord {
    pub fn is_failure(&self) -> bool {
        self.estimate == 0
    }

    pub fn q_error(&self) -> Option<f64> {
        q_error(self.estimate, self.true_card).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p50: f64,
    pub p75: f64,
    pub p90: f64,
    pub p95: f64,
    pub p99: f64,
}

impl Quantiles {
    pub fn as_array(&self) -> [f64; 5] {
        [self.p50, self.p75, self.p90, self.p95, self.p99]
    }
}

/// Error statistics over the non-failed estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub mean: f64,
    pub max: f64,
    pub quantiles: Quantiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub queries: usize,
    pub failures: usize,
    pub failure_rate: f64,
    /// `None` when every estimate failed.
    pub errors: Option<ErrorStats>,
    pub inference_seconds: f64,
    /// One-time structure build (histograms, samples, embeddings).
    pub build_seconds: f64,
    pub model_size_bytes: u64,
}

impl EvalReport {
    /// Aggregates records; the result depends on record order only through the timing sum.
    pub fn from_records(
        method: impl Into<String>,
        records: &[EstimateRecord],
        build_seconds: f64,
        model_size_bytes: u64,
    ) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyWorkload);
        }
        let mut errors: Vec<f64> = records.iter().filter_map(EstimateRecord::q_error).collect();
        let failures = records.len() - errors.len();
        errors.sort_by(f64::total_cmp);
        let stats = if errors.is_empty() {
            None
        } else {
            let q = |p| nearest_rank(&errors, p).expect("non-empty");
            Some(ErrorStats {
                // Summing the sorted list makes the mean independent of record order.
                mean: errors.iter().sum::<f64>() / errors.len() as f64,
                max: errors[errors.len() - 1],
                quantiles: Quantiles {
                    p50: q(50),
                    p75: q(75),
                    p90: q(90),
                    p95: q(95),
                    p99: q(99),
                },
            })
        };
        Ok(EvalReport {
            method: method.into(),
            queries: records.len(),
            failures,
            failure_rate: failures as f64 / records.len() as f64,
            errors: stats,
            inference_seconds: records.iter().map(|r| r.seconds).sum(),
            build_seconds,
            model_size_bytes,
        })
    }

    pub fn median(&self) -> Option<f64> {
        self.errors.map(|e| e.quantiles.p50)
    }

    pub fn mean(&self) -> Option<f64> {
        self.errors.map(|e| e.mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(true_card: u64, estimate: u64) -> EstimateRecord {
        EstimateRecord {
            query_id: 0,
            true_card,
            estimate,
            seconds: 0.0,
        }
    }

    #[test]
    fn q_error_cases() {
        assert_eq!(q_error(7, 7).unwrap(), 1.0);
        assert_eq!(q_error(10, 100).unwrap(), 10.0);
        assert_eq!(q_error(100, 10).unwrap(), 10.0);
        assert_eq!(q_error(0, 10), Err(Error::Undefined));
    }

    #[test]
    fn nearest_rank_definition() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(nearest_rank(&xs, 50), Some(2.0));
        assert_eq!(nearest_rank(&xs, 75), Some(3.0));
        assert_eq!(nearest_rank(&xs, 99), Some(4.0));
        assert_eq!(nearest_rank(&[5.0], 50), Some(5.0));
        assert_eq!(nearest_rank(&[], 50), None);
    }

    #[test]
    fn report_examples() {
        let perfect = EvalReport::from_records("p", &[rec(3, 3), rec(9, 9)], 0.0, 0).unwrap();
        assert_eq!(perfect.failure_rate, 0.0);
        assert_eq!(perfect.errors.unwrap().quantiles.as_array(), [1.0; 5]);

        let zero = EvalReport::from_records("z", &[rec(3, 0), rec(9, 0)], 0.0, 0).unwrap();
        assert_eq!(zero.failure_rate, 1.0);
        assert!(zero.errors.is_none());

        let mixed = EvalReport::from_records(
            "m",
            &[rec(10, 10), rec(10, 100), rec(5, 5), rec(1, 10)],
            0.0,
            0,
        )
        .unwrap();
        assert_eq!(mixed.median(), Some(1.0));
        assert_eq!(mixed.errors.unwrap().max, 10.0);

        assert_eq!(
            EvalReport::from_records("e", &[], 0.0, 0),
            Err(Error::EmptyWorkload)
        );
    }
}
