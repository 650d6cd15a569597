//! Stage-timing capture and bottleneck attribution.
//!
//! Each run owns a [`StageTrace`] accumulating wall-clock durations per
//! named stage. [`audit_bottlenecks`] turns a set of traces into mean
//! per-stage shares, ranks the top-k bottleneck stages, and summarizes
//! calibration-drift samples (mean and empirical 95th percentile).
//!
//! Runs with zero total time contribute nothing to the share numerator but
//! still count in the replicate divisor, so with skipped runs the mean
//! shares sum to `positive_runs / replicate_count` rather than 1. The
//! report exposes the skipped count so readers can tell.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::stats::quantile_linear;
use crate::{Error, Result};

/// Per-run accumulator: stage name to elapsed seconds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StageTrace {
    durations: BTreeMap<String, f64>,
}

impl StageTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record elapsed seconds against a stage. Re-entering the same stage
    /// accumulates.
    pub fn record_stage(&mut self, stage_name: &str, elapsed_s: f64) -> Result<()> {
        if !(elapsed_s >= 0.0) {
            return Err(Error::NegativeDuration {
                stage: stage_name.to_string(),
                seconds: elapsed_s,
            });
        }
        *self.durations.entry(stage_name.to_string()).or_insert(0.0) += elapsed_s;
        Ok(())
    }

    /// Time a closure and accumulate its duration against a stage.
    pub fn time_stage<R>(&mut self, stage_name: &str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed().as_secs_f64();
        // elapsed from a monotonic clock is nonnegative
        let _ = self.record_stage(stage_name, elapsed);
        out
    }

    pub fn durations(&self) -> &BTreeMap<String, f64> {
        &self.durations
    }

    pub fn get(&self, stage_name: &str) -> f64 {
        self.durations.get(stage_name).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.durations.values().sum()
    }

    pub fn from_durations(durations: BTreeMap<String, f64>) -> Result<Self> {
        let mut trace = StageTrace::new();
        for (stage, seconds) in durations {
            trace.record_stage(&stage, seconds)?;
        }
        Ok(trace)
    }
}

/// On-disk trace record: one line per run, durations in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTraceDoc {
    pub run_id: u64,
    pub stages_ms: BTreeMap<String, f64>,
}

impl StageTraceDoc {
    pub fn from_trace(run_id: u64, trace: &StageTrace) -> Self {
        StageTraceDoc {
            run_id,
            stages_ms: trace
                .durations()
                .iter()
                .map(|(k, v)| (k.clone(), v * 1e3))
                .collect(),
        }
    }

    pub fn to_trace(&self) -> Result<StageTrace> {
        StageTrace::from_durations(
            self.stages_ms
                .iter()
                .map(|(k, v)| (k.clone(), v * 1e-3))
                .collect(),
        )
    }
}

/// One ranked bottleneck entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageShare {
    pub stage: String,
    pub mean_share: f64,
}

/// Result of a bottleneck audit over a set of replicate traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub replicate_count: usize,
    /// Replicates with zero total time, excluded from share numerators.
    pub skipped_replicates: usize,
    /// True when every replicate had zero total time; shares are then all
    /// zero and the bottleneck ranking is empty.
    pub degenerate: bool,
    pub mean_shares: BTreeMap<String, f64>,
    pub bottlenecks: Vec<StageShare>,
    pub drift_mean_ppm: Option<f64>,
    pub drift_p95_ppm: Option<f64>,
}

/// Compute mean stage shares across replicates and rank the top-k
/// bottlenecks.
///
/// The stage universe is the union of stage names across all runs; a stage
/// absent from a run contributes zero to that run's shares. Ties in the
/// ranking break by ascending stage name. Drift samples, when given,
/// summarize as mean and empirical 95th percentile (sorted-order linear
/// interpolation).
pub fn audit_bottlenecks(
    traces: &[StageTrace],
    top_k: usize,
    drift_samples_ppm: Option<&[f64]>,
) -> Result<AuditReport> {
    if traces.is_empty() {
        return Err(Error::EmptyTraces);
    }
    if top_k == 0 {
        return Err(Error::Validation("top_k must be at least 1".into()));
    }

    let stages: BTreeSet<&str> = traces
        .iter()
        .flat_map(|t| t.durations().keys().map(String::as_str))
        .collect();

    let mut share_sums: BTreeMap<&str, f64> = stages.iter().map(|s| (*s, 0.0)).collect();
    let mut skipped = 0usize;
    for trace in traces {
        let total = trace.total();
        if total <= 0.0 {
            skipped += 1;
            continue;
        }
        for stage in &stages {
            *share_sums.get_mut(stage).expect("stage in universe") += trace.get(stage) / total;
        }
    }

    let replicate_count = traces.len();
    let mean_shares: BTreeMap<String, f64> = share_sums
        .iter()
        .map(|(s, sum)| (s.to_string(), sum / replicate_count as f64))
        .collect();

    let degenerate = skipped == replicate_count;
    let bottlenecks = if degenerate {
        Vec::new()
    } else {
        let mut ranked: Vec<StageShare> = mean_shares
            .iter()
            .map(|(stage, share)| StageShare {
                stage: stage.clone(),
                mean_share: *share,
            })
            .collect();
        ranked.sort_by(|a, b| {
            b.mean_share
                .total_cmp(&a.mean_share)
                .then_with(|| a.stage.cmp(&b.stage))
        });
        ranked.truncate(top_k);
        ranked
    };

    let (drift_mean_ppm, drift_p95_ppm) = match drift_samples_ppm {
        Some(samples) if !samples.is_empty() => {
            for &s in samples {
                if !(s >= 0.0) {
                    return Err(Error::NegativeDrift(s));
                }
            }
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            let mut sorted = samples.to_vec();
            sorted.sort_by(f64::total_cmp);
            (Some(mean), Some(quantile_linear(&sorted, 0.95)))
        }
        _ => (None, None),
    };

    Ok(AuditReport {
        replicate_count,
        skipped_replicates: skipped,
        degenerate,
        mean_shares,
        bottlenecks,
        drift_mean_ppm,
        drift_p95_ppm,
    })
}
