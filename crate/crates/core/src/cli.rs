//! Command-line entry points and governance artifacts.
//!
//! Subcommands: `score` (readiness from rubric + assessment files),
//! `bench` (matched-budget run from a manifest, emitting the record
//! stream, summary report, and audit trail), `audit` (stage traces to
//! bottleneck report), and `sweep` (speedup table over several targets).
//!
//! All documents are JSON; record and trace streams are newline-delimited
//! JSON. Outputs are written atomically (temp file + rename). Exit code 0
//! means every output was written and nothing failed validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use chrono::Utc;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::audit::{audit_bottlenecks, AuditReport, StageTrace, StageTraceDoc};
use crate::harness::{
    run_benchmark, Budget, HarnessOptions, MetaMap, QualityPolicy, RunManifest, RunRecord,
};
use crate::metrics::{
    normalized_speedup, readiness_score_with_brackets, tau_sweep, AssessmentDoc, ReadinessResult,
    Rubric, SpeedupOutcome,
};
use crate::persist::{self, HASH_ALGORITHM};
use crate::solvers::{
    bundled_registry, generate_qubo, qubo_generator_params, SharedBoundsCalibrator,
};
use crate::stats::{
    paired_bootstrap_ci, paired_bootstrap_distribution, records_to_series, summarize,
    ConfidenceInterval, SummaryTable, DEFAULT_BOOTSTRAP_ALPHA, DEFAULT_BOOTSTRAP_N,
    DEFAULT_BOOTSTRAP_SEED,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Governance artifacts
// ---------------------------------------------------------------------------

/// One dated note in the audit trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeLogEntry {
    pub timestamp: String,
    pub note: String,
}

/// Persisted record of what actually ran: hashes, seeds, versions, and
/// environment, so a benchmark can be replicated and governed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditTrail {
    pub hash_algorithm: String,
    pub manifest_hash: String,
    pub rubric_hash: String,
    pub master_seed: u64,
    pub tool_version: String,
    pub environment_fingerprint: BTreeMap<String, String>,
    pub started_at: String,
    pub finished_at: String,
    pub record_count: usize,
    pub change_log: Vec<ChangeLogEntry>,
}

/// Frozen declaration of targets and configuration, written before
/// running. Later runs that reference it are compared field-for-field;
/// mismatches mark the run as deviating (a warning, not a failure —
/// enforcement policy belongs to the organization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreregistrationNote {
    pub tau: Option<f64>,
    pub budget: Budget,
    pub instance_generator_id: String,
    #[serde(default)]
    pub instance_params: MetaMap,
    pub solvers: Vec<String>,
    #[serde(default)]
    pub solver_configs: BTreeMap<String, serde_json::Value>,
    pub declared_metrics: Vec<String>,
    pub created_at: String,
    pub frozen: bool,
}

impl PreregistrationNote {
    pub fn from_manifest(manifest: &RunManifest, created_at: String) -> Self {
        PreregistrationNote {
            tau: manifest.target_quality,
            budget: manifest.budget,
            instance_generator_id: manifest.instance_generator_id.clone(),
            instance_params: manifest.instance_params.clone(),
            solvers: manifest.solver_names.clone(),
            solver_configs: BTreeMap::new(),
            declared_metrics: vec![
                "mean_quality".into(),
                "mean_time_s".into(),
                "mean_energy_j".into(),
                "mean_cost_usd".into(),
                "quality_p95".into(),
                "time_p95".into(),
                "s_norm_at_tau".into(),
            ],
            created_at,
            frozen: true,
        }
    }

    /// Names of fields where a manifest departs from this note.
    pub fn deviations(&self, manifest: &RunManifest) -> Vec<String> {
        let mut out = Vec::new();
        if self.tau != manifest.target_quality {
            out.push("tau".to_string());
        }
        if self.budget != manifest.budget {
            out.push("budget".to_string());
        }
        if self.instance_generator_id != manifest.instance_generator_id {
            out.push("instance_generator_id".to_string());
        }
        if self.instance_params != manifest.instance_params {
            out.push("instance_params".to_string());
        }
        if self.solvers != manifest.solver_names {
            out.push("solvers".to_string());
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Report documents
// ---------------------------------------------------------------------------

/// Speedup section of the summary report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupReport {
    pub solver_a: String,
    pub solver_b: String,
    pub outcome: SpeedupOutcome,
    pub ci: ConfidenceInterval,
}

/// The report document `bench` writes next to the record stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub manifest_hash: String,
    pub rubric_version: String,
    pub quality_policy: QualityPolicy,
    pub iteration_budget: Option<u64>,
    pub num_instances: u64,
    pub budget: Budget,
    /// None when no preregistration note was supplied.
    pub deviating: Option<bool>,
    pub summary: SummaryTable,
    pub speedup: Option<SpeedupReport>,
}

/// Raw bootstrap sample exported for audit; unreachable resamples are null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapExport {
    pub solver_a: String,
    pub solver_b: String,
    pub tau: f64,
    pub n_boot: u64,
    pub alpha: f64,
    pub seed: u64,
    pub n_unreachable_resamples: u64,
    pub values: Vec<Option<f64>>,
}

/// Output of `sweep`: one row per requested target quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub solver_a: String,
    pub solver_b: String,
    pub rows: Vec<SpeedupOutcome>,
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

fn load_rubric(path: Option<&Path>) -> Result<Rubric> {
    let rubric = match path {
        Some(p) => persist::read_json::<Rubric>(p)?,
        None => Rubric::default_v1(),
    };
    rubric.validate()?;
    Ok(rubric)
}

/// Score an assessment file against a rubric file (or the built-in
/// default rubric) and optionally serialize the result.
pub fn cmd_score(
    rubric_path: Option<&Path>,
    assessment_path: &Path,
    out: Option<&Path>,
) -> Result<(Rubric, ReadinessResult)> {
    let rubric = load_rubric(rubric_path)?;
    let doc: AssessmentDoc = persist::read_json(assessment_path)?;
    let assessment = rubric.build_assessment(&doc)?;
    let result = readiness_score_with_brackets(&assessment, &rubric.drift_brackets)?;
    if let Some(path) = out {
        persist::write_json(path, &result)?;
    }
    Ok((rubric, result))
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

/// Everything `bench` produced, for callers and tests.
#[derive(Debug)]
pub struct BenchOutcome {
    pub manifest: RunManifest,
    pub records: Vec<RunRecord>,
    pub summary: SummaryReport,
    pub trail: AuditTrail,
    pub records_path: PathBuf,
    pub summary_path: PathBuf,
    pub trail_path: PathBuf,
}

/// Optional overrides applied to the manifest before sealing.
#[derive(Debug, Clone, Copy, Default)]
pub struct BenchOverrides {
    pub master_seed: Option<u64>,
    pub iteration_budget: Option<u64>,
}

fn now_rfc3339() -> String {
    Utc::now().to_rfc3339()
}

fn environment_fingerprint() -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    map.insert("os".into(), std::env::consts::OS.to_string());
    map.insert("arch".into(), std::env::consts::ARCH.to_string());
    map.insert("family".into(), std::env::consts::FAMILY.to_string());
    map.insert(
        "available_parallelism".into(),
        std::thread::available_parallelism()
            .map(|n| n.get().to_string())
            .unwrap_or_else(|_| "unknown".into()),
    );
    map
}

/// Load a manifest file, apply overrides, validate, and stamp its hash.
pub fn load_manifest(path: &Path, overrides: &BenchOverrides) -> Result<RunManifest> {
    let mut manifest: RunManifest = persist::read_json(path)?;
    if let Some(seed) = overrides.master_seed {
        manifest.master_seed = seed;
    }
    if let Some(iters) = overrides.iteration_budget {
        manifest.iteration_budget = Some(iters);
    }
    manifest.seal()
}

/// Run the benchmark described by a manifest file and persist the full
/// artifact set (records, summary, optional bootstrap export, audit
/// trail, and — when requested — a preregistration note).
pub fn cmd_bench(
    manifest_path: &Path,
    out_dir: &Path,
    rubric_path: Option<&Path>,
    overrides: &BenchOverrides,
    prereg_path: Option<&Path>,
) -> Result<BenchOutcome> {
    let started_at = now_rfc3339();
    let manifest = load_manifest(manifest_path, overrides)?;
    let rubric = load_rubric(rubric_path)?;
    let rubric_hash = persist::canonical_hash(&rubric)?;

    let mut change_log: Vec<ChangeLogEntry> = Vec::new();
    let mut log = |note: String| {
        change_log.push(ChangeLogEntry {
            timestamp: now_rfc3339(),
            note,
        });
    };
    log(format!(
        "run started from manifest '{}'",
        manifest_path.display()
    ));
    if manifest.rubric_version != rubric.rubric_version {
        log(format!(
            "manifest declares rubric_version '{}' but rubric file is '{}'",
            manifest.rubric_version, rubric.rubric_version
        ));
    }

    // preregistration: compare against an existing note, or freeze one now
    let mut deviating: Option<bool> = None;
    if let Some(prereg) = prereg_path {
        if prereg.exists() {
            let note: PreregistrationNote = persist::read_json(prereg)?;
            let deviations = note.deviations(&manifest);
            if note.frozen && !deviations.is_empty() {
                deviating = Some(true);
                log(format!(
                    "run deviates from frozen preregistration '{}' on: {}",
                    prereg.display(),
                    deviations.join(", ")
                ));
            } else {
                deviating = Some(false);
            }
        } else {
            let note = PreregistrationNote::from_manifest(&manifest, now_rfc3339());
            persist::write_json(prereg, &note)?;
            deviating = Some(false);
            log(format!(
                "preregistration note frozen at '{}'",
                prereg.display()
            ));
        }
    }

    // instance generator dispatch
    let records = match manifest.instance_generator_id.as_str() {
        "qubo-normal" => {
            let (n, density) = qubo_generator_params(&manifest.instance_params)?;
            if !(density > 0.0 && density <= 1.0) {
                return Err(Error::DensityOutOfRange(density));
            }
            let registry = bundled_registry();
            let calibrator = SharedBoundsCalibrator;
            run_benchmark(
                &manifest,
                &registry,
                |_index, seed| {
                    generate_qubo(n, density, seed).expect("parameters validated above")
                },
                match manifest.quality_policy {
                    QualityPolicy::Calibrated => Some(&calibrator),
                    QualityPolicy::Raw => None,
                },
                &HarnessOptions::default(),
            )?
        }
        other => {
            return Err(Error::Validation(format!(
                "unknown instance generator '{other}' (known: qubo-normal)"
            )))
        }
    };

    std::fs::create_dir_all(out_dir).map_err(|e| Error::File {
        path: out_dir.display().to_string(),
        source: e,
    })?;
    let records_path = out_dir.join("records.ndjson");
    persist::write_ndjson(&records_path, &records)?;

    let summary_table = summarize(&records)?;
    let speedup = match (manifest.target_quality, manifest.solver_names.len()) {
        (Some(tau), 2) => {
            let solver_a = manifest.solver_names[0].clone();
            let solver_b = manifest.solver_names[1].clone();
            let series_a = records_to_series(&records, &solver_a)?;
            let series_b = records_to_series(&records, &solver_b)?;
            let outcome = normalized_speedup(&series_a, &series_b, tau)?;
            let ci = paired_bootstrap_ci(
                &records,
                &solver_a,
                &solver_b,
                tau,
                DEFAULT_BOOTSTRAP_N,
                DEFAULT_BOOTSTRAP_ALPHA,
                DEFAULT_BOOTSTRAP_SEED,
            )?;
            let distribution = paired_bootstrap_distribution(
                &records,
                &solver_a,
                &solver_b,
                tau,
                DEFAULT_BOOTSTRAP_N,
                DEFAULT_BOOTSTRAP_SEED,
            )?;
            let export = BootstrapExport {
                solver_a: solver_a.clone(),
                solver_b: solver_b.clone(),
                tau,
                n_boot: DEFAULT_BOOTSTRAP_N,
                alpha: DEFAULT_BOOTSTRAP_ALPHA,
                seed: DEFAULT_BOOTSTRAP_SEED,
                n_unreachable_resamples: distribution.n_unreachable_resamples,
                values: distribution
                    .values
                    .iter()
                    .map(|v| if v.is_finite() { Some(*v) } else { None })
                    .collect(),
            };
            persist::write_json(&out_dir.join("bootstrap.json"), &export)?;
            Some(SpeedupReport {
                solver_a,
                solver_b,
                outcome,
                ci,
            })
        }
        (Some(_), _) => {
            log("speedup skipped: target_quality requires exactly two solvers".into());
            None
        }
        (None, _) => None,
    };

    let summary = SummaryReport {
        manifest_hash: manifest.config_hash.clone(),
        rubric_version: rubric.rubric_version.clone(),
        quality_policy: manifest.quality_policy,
        iteration_budget: manifest.iteration_budget,
        num_instances: manifest.num_instances,
        budget: manifest.budget,
        deviating,
        summary: summary_table,
        speedup,
    };
    let summary_path = out_dir.join("summary.json");
    persist::write_json(&summary_path, &summary)?;

    let trail = AuditTrail {
        hash_algorithm: HASH_ALGORITHM.to_string(),
        manifest_hash: manifest.config_hash.clone(),
        rubric_hash,
        master_seed: manifest.master_seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        environment_fingerprint: environment_fingerprint(),
        started_at,
        finished_at: now_rfc3339(),
        record_count: records.len(),
        change_log,
    };
    let trail_path = out_dir.join("audit_trail.json");
    persist::write_json(&trail_path, &trail)?;

    Ok(BenchOutcome {
        manifest,
        records,
        summary,
        trail,
        records_path,
        summary_path,
        trail_path,
    })
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

/// Audit a trace stream (NDJSON of per-run stage maps, milliseconds) and
/// optionally a drift-sample file (JSON array of ppm values).
pub fn cmd_audit(
    traces_path: &Path,
    top_k: usize,
    drift_path: Option<&Path>,
    out: Option<&Path>,
) -> Result<AuditReport> {
    let docs: Vec<StageTraceDoc> = persist::read_ndjson(traces_path)?;
    let traces: Vec<StageTrace> = docs
        .iter()
        .map(StageTraceDoc::to_trace)
        .collect::<Result<_>>()?;
    let drift: Option<Vec<f64>> = match drift_path {
        Some(p) => Some(persist::read_json(p)?),
        None => None,
    };
    let report = audit_bottlenecks(&traces, top_k, drift.as_deref())?;
    if let Some(path) = out {
        persist::write_json(path, &report)?;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

/// Evaluate the normalized speedup between two solvers from a persisted
/// record stream, one row per requested target quality.
pub fn cmd_sweep(
    records_path: &Path,
    solver_a: &str,
    solver_b: &str,
    taus: &[f64],
    out: Option<&Path>,
) -> Result<SweepReport> {
    let records: Vec<RunRecord> = persist::read_ndjson(records_path)?;
    let series_a = records_to_series(&records, solver_a)?;
    let series_b = records_to_series(&records, solver_b)?;
    let rows = tau_sweep(&series_a, &series_b, taus)?;
    let report = SweepReport {
        solver_a: solver_a.to_string(),
        solver_b: solver_b.to_string(),
        rows,
    };
    if let Some(path) = out {
        persist::write_json(path, &report)?;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Argument parsing and dispatch
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "qrlbench",
    version,
    about = "Readiness scoring, matched-budget benchmarking, and workflow audit"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score a readiness assessment against a rubric
    Score {
        /// Rubric JSON (defaults to the built-in 13-item rubric)
        #[arg(long)]
        rubric: Option<PathBuf>,
        /// Assessment JSON (checklist bits + drift)
        #[arg(long)]
        assessment: PathBuf,
        /// Also write the result as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a matched-budget benchmark from a manifest
    Bench {
        /// Run manifest JSON
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for the artifact set
        #[arg(long)]
        out: PathBuf,
        /// Rubric JSON hashed into the audit trail (defaults to built-in)
        #[arg(long)]
        rubric: Option<PathBuf>,
        /// Override the manifest master seed
        #[arg(long)]
        seed: Option<u64>,
        /// Run with a fixed iteration count per solver call instead of the
        /// wall-clock budget (bit-exact reproducibility)
        #[arg(long = "iteration-budget")]
        iteration_budget: Option<u64>,
        /// Preregistration note: compared against if it exists, frozen
        /// from the manifest if it does not
        #[arg(long)]
        prereg: Option<PathBuf>,
    },
    /// Rank pipeline bottlenecks from a stage-trace stream
    Audit {
        /// NDJSON trace stream: {"run_id": .., "stages_ms": {..}} per line
        #[arg(long)]
        traces: PathBuf,
        /// How many bottleneck stages to report
        #[arg(long = "top-k", default_value_t = 3)]
        top_k: usize,
        /// JSON array of drift samples (ppm)
        #[arg(long)]
        drift: Option<PathBuf>,
        /// Also write the report as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normalized-speedup table over target qualities
    Sweep {
        /// NDJSON record stream from `bench`
        #[arg(long)]
        records: PathBuf,
        /// Numerator solver (A)
        #[arg(long = "solver-a")]
        solver_a: String,
        /// Denominator solver (B)
        #[arg(long = "solver-b")]
        solver_b: String,
        /// Target quality; repeat for several rows
        #[arg(long = "tau")]
        taus: Vec<f64>,
        /// Also write the table as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_score(rubric: &Rubric, result: &ReadinessResult) {
    println!("rubric version: {}", rubric.rubric_version);
    println!("S = {}", result.score);
    println!("QRL = {}", result.stage);
    println!("drift bonus = {}", result.drift_bonus);
    println!("contributions:");
    for c in &result.per_item_contribution {
        println!("  {:<28} {}", c.name, c.points);
    }
}

fn format_speedup(outcome: &SpeedupOutcome) -> String {
    match outcome.speedup {
        crate::metrics::Speedup::Ratio(v) => format!("{v:.6}"),
        crate::metrics::Speedup::Unreachable => "unreachable".to_string(),
    }
}

fn format_opt_time(t: Option<f64>) -> String {
    t.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into())
}

fn print_bench(outcome: &BenchOutcome) {
    println!(
        "wrote {} records for {} solvers x {} instances",
        outcome.records.len(),
        outcome.manifest.solver_names.len(),
        outcome.manifest.num_instances
    );
    println!("manifest hash: {}", outcome.summary.manifest_hash);
    for s in &outcome.summary.summary.solvers {
        println!(
            "  {:<16} mean quality {:.4}  mean time {:.4}s  p95 quality {:.4}",
            s.solver, s.mean_quality, s.mean_time_s, s.quality_p95
        );
    }
    if let Some(sp) = &outcome.summary.speedup {
        println!(
            "S_norm(tau={}) = {}  [A={} B={}]",
            sp.outcome.tau,
            format_speedup(&sp.outcome),
            sp.solver_a,
            sp.solver_b
        );
        let bound = |v: f64| {
            if v.is_finite() {
                format!("{v:.6}")
            } else {
                "inf".to_string()
            }
        };
        println!(
            "  {:.0}% CI [{}, {}]  ({} of {} resamples unreachable)",
            100.0 * (1.0 - sp.ci.alpha),
            bound(sp.ci.lower),
            bound(sp.ci.upper),
            sp.ci.n_unreachable_resamples,
            sp.ci.n_boot
        );
    }
    if outcome.summary.deviating == Some(true) {
        println!("WARNING: run deviates from its frozen preregistration");
    }
    println!("records: {}", outcome.records_path.display());
    println!("summary: {}", outcome.summary_path.display());
    println!("audit trail: {}", outcome.trail_path.display());
}

fn print_audit(report: &AuditReport) {
    println!(
        "replicates: {} ({} skipped for zero total)",
        report.replicate_count, report.skipped_replicates
    );
    if report.degenerate {
        println!("degenerate: every replicate had zero total time");
    }
    println!("mean stage shares:");
    for (stage, share) in &report.mean_shares {
        println!("  {stage:<20} {share:.6}");
    }
    println!("bottlenecks:");
    for b in &report.bottlenecks {
        println!("  {:<20} {:.6}", b.stage, b.mean_share);
    }
    if let (Some(mean), Some(p95)) = (report.drift_mean_ppm, report.drift_p95_ppm) {
        println!("drift: mean {mean:.6} ppm, p95 {p95:.6} ppm");
    }
}

fn print_sweep(report: &SweepReport) {
    println!(
        "tau        S_norm        min_t[{}]   min_t[{}]",
        report.solver_a, report.solver_b
    );
    for row in &report.rows {
        println!(
            "{:<10} {:<13} {:<11} {}",
            row.tau,
            format_speedup(row),
            format_opt_time(row.numerator_time_s),
            format_opt_time(row.denominator_time_s)
        );
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Score {
            rubric,
            assessment,
            out,
        } => {
            let (rubric, result) = cmd_score(rubric.as_deref(), &assessment, out.as_deref())?;
            print_score(&rubric, &result);
        }
        Command::Bench {
            manifest,
            out,
            rubric,
            seed,
            iteration_budget,
            prereg,
        } => {
            let overrides = BenchOverrides {
                master_seed: seed,
                iteration_budget,
            };
            let started = Instant::now();
            let outcome = cmd_bench(
                &manifest,
                &out,
                rubric.as_deref(),
                &overrides,
                prereg.as_deref(),
            )?;
            print_bench(&outcome);
            println!("elapsed: {:.2}s", started.elapsed().as_secs_f64());
        }
        Command::Audit {
            traces,
            top_k,
            drift,
            out,
        } => {
            let report = cmd_audit(&traces, top_k, drift.as_deref(), out.as_deref())?;
            print_audit(&report);
        }
        Command::Sweep {
            records,
            solver_a,
            solver_b,
            taus,
            out,
        } => {
            let report = cmd_sweep(&records, &solver_a, &solver_b, &taus, out.as_deref())?;
            print_sweep(&report);
        }
    }
    Ok(())
}

/// Binary entry point: parse, dispatch, map errors to exit code 1.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
