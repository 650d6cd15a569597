//! Summary statistics and the paired bootstrap interval for the
//! normalized speedup.
//!
//! Summaries report per-solver means and 95th percentiles; they never
//! replace the raw record stream, which stays on disk for anyone who
//! wants full distributions. The bootstrap resamples whole instance ids
//! with replacement — keeping both solvers' records for each sampled id —
//! and recomputes the speedup per resample. Resamples where either side
//! misses the target quality enter the quantiles as +inf and are counted
//! separately, so an unbounded upper limit is visible rather than silent.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::harness::RunRecord;
use crate::metrics::{normalized_speedup, QualityTimeEntry, QualityTimeSeries};
use crate::persist::ext_real;
use crate::{Error, Result};

/// Bootstrap seed used by the CLI when none is given.
pub const DEFAULT_BOOTSTRAP_SEED: u64 = 42;
/// Default resample count.
pub const DEFAULT_BOOTSTRAP_N: u64 = 1000;
/// Default two-sided interval level.
pub const DEFAULT_BOOTSTRAP_ALPHA: f64 = 0.05;

// ---------------------------------------------------------------------------
// Quantiles
// ---------------------------------------------------------------------------

/// Empirical quantile by sorted-order linear interpolation.
///
/// `sorted` must be ascending and nonempty; `q` in [0, 1]. Infinite upper
/// samples propagate: interpolating toward +inf yields +inf.
pub fn quantile_linear(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = q * (sorted.len() as f64 - 1.0);
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        return sorted[lo];
    }
    let frac = rank - lo as f64;
    let (a, b) = (sorted[lo], sorted[hi]);
    if a == b {
        return a;
    }
    if b.is_infinite() {
        return if frac > 0.0 { b } else { a };
    }
    a + frac * (b - a)
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

/// Per-solver aggregate over the record stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub solver: String,
    pub count: usize,
    pub mean_quality: f64,
    pub mean_time_s: f64,
    pub mean_energy_j: f64,
    pub mean_cost_usd: f64,
    pub quality_p95: f64,
    pub time_p95: f64,
}

/// Summaries for every solver present, in first-appearance order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub solvers: Vec<SolverSummary>,
}

/// Aggregate records per solver: means of quality/time/energy/cost and
/// 95th percentiles of quality and time.
pub fn summarize(records: &[RunRecord]) -> Result<SummaryTable> {
    if records.is_empty() {
        return Err(Error::EmptyInput("record list"));
    }
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let entry = groups.entry(r.solver.as_str()).or_default();
        if entry.is_empty() {
            order.push(r.solver.as_str());
        }
        entry.push(r);
    }

    let mut solvers = Vec::with_capacity(order.len());
    for name in order {
        let group = &groups[name];
        let count = group.len();
        let mean = |f: fn(&RunRecord) -> f64| -> f64 {
            group.iter().map(|r| f(r)).sum::<f64>() / count as f64
        };
        let p95 = |f: fn(&RunRecord) -> f64| -> f64 {
            let mut values: Vec<f64> = group.iter().map(|r| f(r)).collect();
            values.sort_by(f64::total_cmp);
            quantile_linear(&values, 0.95)
        };
        solvers.push(SolverSummary {
            solver: name.to_string(),
            count,
            mean_quality: mean(|r| r.quality),
            mean_time_s: mean(|r| r.time_s),
            mean_energy_j: mean(|r| r.energy_j),
            mean_cost_usd: mean(|r| r.cost_usd),
            quality_p95: p95(|r| r.quality),
            time_p95: p95(|r| r.time_s),
        });
    }
    Ok(SummaryTable { solvers })
}

/// Extract one solver's (time, quality) series from the record stream.
pub fn records_to_series(records: &[RunRecord], solver: &str) -> Result<QualityTimeSeries> {
    let mut series = QualityTimeSeries::default();
    for r in records.iter().filter(|r| r.solver == solver) {
        series.push(QualityTimeEntry {
            instance_id: r.instance_id,
            time_s: r.time_s,
            quality: r.quality,
        })?;
    }
    if series.is_empty() {
        return Err(Error::Validation(format!("no records for solver '{solver}'")));
    }
    Ok(series)
}

// ---------------------------------------------------------------------------
// Paired bootstrap
// ---------------------------------------------------------------------------

/// Two-sided percentile interval for the normalized speedup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    /// Lower bound; +inf (serialized as null) when unbounded.
    #[serde(with = "ext_real")]
    pub lower: f64,
    #[serde(with = "ext_real")]
    pub upper: f64,
    pub alpha: f64,
    pub n_boot: u64,
    /// Resamples where the speedup was unreachable (entered as +inf).
    pub n_unreachable_resamples: u64,
    /// True when every resample was unreachable.
    pub degenerate: bool,
}

/// The raw bootstrap sample, exportable for audit.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDistribution {
    /// One extended-real speedup per resample, in draw order; unreachable
    /// resamples appear as +inf.
    pub values: Vec<f64>,
    pub n_unreachable_resamples: u64,
}

struct PairedRecords<'a> {
    instance_ids: Vec<u64>,
    by_instance_a: BTreeMap<u64, Vec<&'a RunRecord>>,
    by_instance_b: BTreeMap<u64, Vec<&'a RunRecord>>,
}

fn pair_records<'a>(
    records: &'a [RunRecord],
    solver_a: &str,
    solver_b: &str,
) -> Result<PairedRecords<'a>> {
    let mut by_instance_a: BTreeMap<u64, Vec<&RunRecord>> = BTreeMap::new();
    let mut by_instance_b: BTreeMap<u64, Vec<&RunRecord>> = BTreeMap::new();
    let mut ids: BTreeSet<u64> = BTreeSet::new();
    for r in records {
        if r.solver == solver_a {
            by_instance_a.entry(r.instance_id).or_default().push(r);
            ids.insert(r.instance_id);
        } else if r.solver == solver_b {
            by_instance_b.entry(r.instance_id).or_default().push(r);
            ids.insert(r.instance_id);
        }
    }
    if by_instance_a.is_empty() {
        return Err(Error::Validation(format!("no records for solver '{solver_a}'")));
    }
    if by_instance_b.is_empty() {
        return Err(Error::Validation(format!("no records for solver '{solver_b}'")));
    }
    for id in &ids {
        if !by_instance_a.contains_key(id) {
            return Err(Error::UnpairedInstance {
                instance_id: *id,
                solver: solver_a.to_string(),
            });
        }
        if !by_instance_b.contains_key(id) {
            return Err(Error::UnpairedInstance {
                instance_id: *id,
                solver: solver_b.to_string(),
            });
        }
    }
    Ok(PairedRecords {
        instance_ids: ids.into_iter().collect(),
        by_instance_a,
        by_instance_b,
    })
}

fn resample_speedup(paired: &PairedRecords<'_>, draw: &[u64], tau: f64) -> Result<f64> {
    let mut series_a = QualityTimeSeries::default();
    let mut series_b = QualityTimeSeries::default();
    for id in draw {
        for r in &paired.by_instance_a[id] {
            series_a.push(QualityTimeEntry {
                instance_id: r.instance_id,
                time_s: r.time_s,
                quality: r.quality,
            })?;
        }
        for r in &paired.by_instance_b[id] {
            series_b.push(QualityTimeEntry {
                instance_id: r.instance_id,
                time_s: r.time_s,
                quality: r.quality,
            })?;
        }
    }
    Ok(normalized_speedup(&series_a, &series_b, tau)?
        .speedup
        .to_extended())
}

/// Draw the paired bootstrap distribution of the normalized speedup.
///
/// Each resample draws `|instances|` instance ids with replacement and
/// recomputes the speedup over both solvers' records for the drawn ids,
/// so the A and B sides always cover the same id multiset.
pub fn paired_bootstrap_distribution(
    records: &[RunRecord],
    solver_a: &str,
    solver_b: &str,
    tau: f64,
    n_boot: u64,
    seed: u64,
) -> Result<BootstrapDistribution> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::TauOutOfRange(tau));
    }
    if n_boot == 0 {
        return Err(Error::ZeroBootstrapCount);
    }
    let paired = pair_records(records, solver_a, solver_b)?;
    let n = paired.instance_ids.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n_boot as usize);
    let mut unreachable = 0u64;
    let mut draw = vec![0u64; n];
    for _ in 0..n_boot {
        for slot in draw.iter_mut() {
            *slot = paired.instance_ids[rng.gen_range(0..n)];
        }
        let value = resample_speedup(&paired, &draw, tau)?;
        if value.is_infinite() {
            unreachable += 1;
        }
        values.push(value);
    }
    Ok(BootstrapDistribution {
        values,
        n_unreachable_resamples: unreachable,
    })
}

/// Paired bootstrap percentile interval for the normalized speedup at
/// `tau`. Requires every instance id to carry records for both solvers.
pub fn paired_bootstrap_ci(
    records: &[RunRecord],
    solver_a: &str,
    solver_b: &str,
    tau: f64,
    n_boot: u64,
    alpha: f64,
    seed: u64,
) -> Result<ConfidenceInterval> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let distribution =
        paired_bootstrap_distribution(records, solver_a, solver_b, tau, n_boot, seed)?;
    let mut sorted = distribution.values.clone();
    sorted.sort_by(f64::total_cmp);
    let lower = quantile_linear(&sorted, alpha / 2.0);
    let upper = quantile_linear(&sorted, 1.0 - alpha / 2.0);
    Ok(ConfidenceInterval {
        lower,
        upper,
        alpha,
        n_boot,
        n_unreachable_resamples: distribution.n_unreachable_resamples,
        degenerate: distribution.n_unreachable_resamples == n_boot,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
