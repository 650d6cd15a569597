//! Matched-budget benchmark orchestration.
//!
//! The runner hands every solver the identical resource budget on the
//! identical instances, derives per-(instance, solver) seeds that do not
//! depend on execution order, and emits one [`RunRecord`] per pair even
//! when a solver fails. Budget enforcement is cooperative: solvers poll a
//! guard and are expected to return promptly once it expires; the harness
//! measures actual wall time and flags overshoot rather than killing
//! solver code.
//!
//! Two stop modes exist. The default time budget measures real solvers
//! under real clocks; quality outcomes then reproduce as distributions,
//! not exact values, because iteration counts vary with machine speed.
//! Setting an iteration budget fixes the loop count instead, giving
//! bit-exact quality reproduction for audits.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{persist, Error, Result};

// ---------------------------------------------------------------------------
// Budget and guards
// ---------------------------------------------------------------------------

/// Resource budget granted to one solver call: wall-clock seconds plus
/// declared cost and energy allowances. Only time is enforced; cost and
/// energy pass through to reports as solver-declared values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub time_s: f64,
    #[serde(default)]
    pub cost_usd: f64,
    #[serde(default)]
    pub energy_j: f64,
}

impl Budget {
    pub fn time_only(time_s: f64) -> Self {
        Budget {
            time_s,
            cost_usd: 0.0,
            energy_j: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time_s > 0.0) {
            return Err(Error::InvalidBudget(format!(
                "time_s must be positive, got {}",
                self.time_s
            )));
        }
        if !(self.cost_usd >= 0.0) {
            return Err(Error::InvalidBudget(format!(
                "cost_usd must be nonnegative, got {}",
                self.cost_usd
            )));
        }
        if !(self.energy_j >= 0.0) {
            return Err(Error::InvalidBudget(format!(
                "energy_j must be nonnegative, got {}",
                self.energy_j
            )));
        }
        Ok(())
    }
}

/// Monotonic-clock deadline for a time budget.
#[derive(Debug, Clone, Copy)]
pub struct BudgetGuard {
    deadline: Instant,
}

impl BudgetGuard {
    pub fn new(budget: &Budget) -> Result<Self> {
        budget.validate()?;
        Ok(BudgetGuard {
            deadline: Instant::now() + Duration::from_secs_f64(budget.time_s),
        })
    }

    /// False strictly before the deadline, true at or after it.
    pub fn expired(&self) -> bool {
        Instant::now() >= self.deadline
    }
}

/// Cooperative stop rule polled once per solver loop iteration: either a
/// wall-clock deadline or a fixed iteration count.
#[derive(Debug)]
pub enum LoopGuard {
    Deadline(BudgetGuard),
    Iterations { remaining: u64 },
}

impl LoopGuard {
    /// Poll the guard. In iteration mode each call consumes one iteration.
    pub fn expired(&mut self) -> bool {
        match self {
            LoopGuard::Deadline(g) => g.expired(),
            LoopGuard::Iterations { remaining } => {
                if *remaining == 0 {
                    true
                } else {
                    *remaining -= 1;
                    false
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Records and metadata
// ---------------------------------------------------------------------------

/// Scalar-or-string metadata value attached to run records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetaValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl MetaValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            MetaValue::Int(v) => Some(*v as f64),
            MetaValue::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            MetaValue::Int(v) => Some(*v),
            _ => None,
        }
    }
}

impl From<bool> for MetaValue {
    fn from(v: bool) -> Self {
        MetaValue::Bool(v)
    }
}
impl From<i64> for MetaValue {
    fn from(v: i64) -> Self {
        MetaValue::Int(v)
    }
}
impl From<u64> for MetaValue {
    fn from(v: u64) -> Self {
        MetaValue::Int(v as i64)
    }
}
impl From<f64> for MetaValue {
    fn from(v: f64) -> Self {
        MetaValue::Float(v)
    }
}
impl From<&str> for MetaValue {
    fn from(v: &str) -> Self {
        MetaValue::Text(v.to_string())
    }
}
impl From<String> for MetaValue {
    fn from(v: String) -> Self {
        MetaValue::Text(v)
    }
}

pub type MetaMap = BTreeMap<String, MetaValue>;

/// One solver-on-one-instance outcome.
///
/// `time_s` is the harness-measured wall clock around the solver call and
/// is re-measured on every run; everything else is deterministic given the
/// manifest. Solver-declared values (including the listing-style
/// `time_s = budget.time_s`) live in `meta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub solver: String,
    pub instance_id: u64,
    pub quality: f64,
    pub time_s: f64,
    pub energy_j: f64,
    pub cost_usd: f64,
    #[serde(default)]
    pub meta: MetaMap,
}

// ---------------------------------------------------------------------------
// Solver registry
// ---------------------------------------------------------------------------

/// Everything a solver call may consult: the matched budget, the optional
/// iteration cap, and the derived seed.
#[derive(Debug, Clone, Copy)]
pub struct SolveContext {
    pub budget: Budget,
    pub iteration_budget: Option<u64>,
    pub seed: u64,
}

impl SolveContext {
    pub fn loop_guard(&self) -> Result<LoopGuard> {
        match self.iteration_budget {
            Some(n) => Ok(LoopGuard::Iterations { remaining: n }),
            None => Ok(LoopGuard::Deadline(BudgetGuard::new(&self.budget)?)),
        }
    }
}

/// What a solver returns: a quality in [0, 1] and declared metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutput {
    pub quality: f64,
    pub meta: MetaMap,
}

/// A named solver bound into the registry.
pub struct SolverSpec<I> {
    name: String,
    solve: Box<dyn Fn(&I, &SolveContext) -> std::result::Result<SolveOutput, String> + Send + Sync>,
}

impl<I> SolverSpec<I> {
    pub fn new(
        name: impl Into<String>,
        solve: impl Fn(&I, &SolveContext) -> std::result::Result<SolveOutput, String>
            + Send
            + Sync
            + 'static,
    ) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::EmptyInput("solver name"));
        }
        Ok(SolverSpec {
            name,
            solve: Box::new(solve),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn solve(
        &self,
        instance: &I,
        ctx: &SolveContext,
    ) -> std::result::Result<SolveOutput, String> {
        (self.solve)(instance, ctx)
    }
}

/// Ordered set of solvers with unique names.
#[derive(Default)]
pub struct SolverRegistry<I> {
    solvers: Vec<SolverSpec<I>>,
}

impl<I> SolverRegistry<I> {
    pub fn new() -> Self {
        SolverRegistry {
            solvers: Vec::new(),
        }
    }

    pub fn register(&mut self, spec: SolverSpec<I>) -> Result<()> {
        if self.solvers.iter().any(|s| s.name == spec.name) {
            return Err(Error::DuplicateSolver(spec.name));
        }
        self.solvers.push(spec);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&SolverSpec<I>> {
        self.solvers.iter().find(|s| s.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.solvers.iter().map(|s| s.name.as_str()).collect()
    }

    /// Solvers selected by a manifest, in registry order.
    fn select(&self, wanted: &[String]) -> Result<Vec<&SolverSpec<I>>> {
        for name in wanted {
            if self.get(name).is_none() {
                return Err(Error::UnknownSolver(name.clone()));
            }
        }
        Ok(self
            .solvers
            .iter()
            .filter(|s| wanted.iter().any(|w| w == &s.name))
            .collect())
    }
}

// ---------------------------------------------------------------------------
// Seed derivation
// ---------------------------------------------------------------------------

/// Reserved solver-index stream for instance-generation seeds.
pub const INSTANCE_SEED_STREAM: u64 = u64::MAX;
/// Reserved solver-index stream for quality-calibration seeds.
pub const CALIBRATION_SEED_STREAM: u64 = u64::MAX - 1;

/// Derive the seed for one (instance, solver) cell.
///
/// Counter-mode SHA-256 over a domain tag and the big-endian triple,
/// truncated to 63 bits. The mapping depends only on the triple, never on
/// execution order, so adding a solver leaves every other cell's seed
/// untouched. Real solver indices count up from 0; the reserved streams
/// near `u64::MAX` feed instance generation and calibration.
pub fn derive_seed(master_seed: u64, instance_index: u64, solver_index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"qrlbench/seed/v1");
    hasher.update(master_seed.to_be_bytes());
    hasher.update(instance_index.to_be_bytes());
    hasher.update(solver_index.to_be_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(bytes) & (i64::MAX as u64)
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

/// How record quality is assigned: calibrated against per-instance shared
/// bounds (comparable across solvers), or the raw solver-declared value
/// for literal reproduction of the reference behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QualityPolicy {
    #[default]
    Calibrated,
    Raw,
}

/// Preregistered run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub master_seed: u64,
    pub num_instances: u64,
    pub budget: Budget,
    #[serde(default)]
    pub target_quality: Option<f64>,
    pub solver_names: Vec<String>,
    pub instance_generator_id: String,
    #[serde(default)]
    pub instance_params: MetaMap,
    pub rubric_version: String,
    #[serde(default)]
    pub iteration_budget: Option<u64>,
    #[serde(default)]
    pub quality_policy: QualityPolicy,
    /// Canonical content hash of every other field; filled on ingest.
    #[serde(default)]
    pub config_hash: String,
}

impl RunManifest {
    pub fn validate(&self) -> Result<()> {
        if self.num_instances == 0 {
            return Err(Error::InvalidManifest("num_instances must be at least 1".into()));
        }
        self.budget.validate()?;
        if let Some(tau) = self.target_quality {
            if !(0.0..=1.0).contains(&tau) {
                return Err(Error::TauOutOfRange(tau));
            }
        }
        if self.solver_names.is_empty() {
            return Err(Error::InvalidManifest("solver_names must not be empty".into()));
        }
        let mut seen = BTreeSet::new();
        for name in &self.solver_names {
            if !seen.insert(name) {
                return Err(Error::InvalidManifest(format!(
                    "solver '{name}' listed twice"
                )));
            }
        }
        if self.iteration_budget == Some(0) {
            return Err(Error::InvalidManifest(
                "iteration_budget must be at least 1 when set".into(),
            ));
        }
        Ok(())
    }

    /// Canonical hash of the manifest content, excluding `config_hash`
    /// itself. Stable under key reordering and number respelling in the
    /// source document.
    pub fn content_hash(&self) -> Result<String> {
        let mut tree = serde_json::to_value(self)?;
        if let Some(obj) = tree.as_object_mut() {
            obj.remove("config_hash");
        }
        Ok(persist::sha256_hex(serde_json::to_string(&tree)?.as_bytes()))
    }

    /// Validate and stamp `config_hash`.
    pub fn seal(mut self) -> Result<Self> {
        self.validate()?;
        self.config_hash = self.content_hash()?;
        Ok(self)
    }
}

// ---------------------------------------------------------------------------
// Benchmark runner
// ---------------------------------------------------------------------------

/// Post-pass that may rewrite the quality of each instance's records once
/// every solver has run, e.g. to score them against shared per-instance
/// bounds.
pub trait QualityCalibrator<I> {
    fn calibrate(&self, instance: &I, records: &mut [RunRecord]) -> Result<()>;
}

/// Harness knobs that are not part of the preregistered manifest.
#[derive(Debug, Clone, Copy)]
pub struct HarnessOptions {
    /// Fraction of the time budget a solver may overshoot before its
    /// record is flagged `budget_violation`.
    pub overshoot_tolerance: f64,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions {
            overshoot_tolerance: 0.10,
        }
    }
}

/// Run every manifest solver on every generated instance under the
/// matched budget.
///
/// Emits exactly `num_instances x |solvers|` records in (instance-major,
/// registry-order) order. Instance `i` is generated once from
/// `derive_seed(master, i, INSTANCE_SEED_STREAM)` and handed to all
/// solvers. A solver error becomes a quality-0 record tagged `failed`;
/// the run continues.
pub fn run_benchmark<I>(
    manifest: &RunManifest,
    registry: &SolverRegistry<I>,
    instance_generator: impl Fn(u64, u64) -> I,
    calibrator: Option<&dyn QualityCalibrator<I>>,
    options: &HarnessOptions,
) -> Result<Vec<RunRecord>> {
    manifest.validate()?;
    let solvers = registry.select(&manifest.solver_names)?;
    let mut records = Vec::with_capacity((manifest.num_instances as usize) * solvers.len());

    for instance_index in 0..manifest.num_instances {
        let instance_seed = derive_seed(manifest.master_seed, instance_index, INSTANCE_SEED_STREAM);
        let instance = instance_generator(instance_index, instance_seed);
        let first_record = records.len();

        for (solver_index, spec) in solvers.iter().enumerate() {
            let seed = derive_seed(manifest.master_seed, instance_index, solver_index as u64);
            let ctx = SolveContext {
                budget: manifest.budget,
                iteration_budget: manifest.iteration_budget,
                seed,
            };
            let started = Instant::now();
            let outcome = spec.solve(&instance, &ctx);
            let elapsed = started.elapsed().as_secs_f64();

            let record = match outcome {
                Ok(output) => {
                    let mut meta = output.meta;
                    let mut quality = output.quality;
                    if !(0.0..=1.0).contains(&quality) {
                        meta.insert("quality_clamped".into(), MetaValue::Bool(true));
                        quality = quality.clamp(0.0, 1.0);
                    }
                    meta.insert("seed".into(), MetaValue::from(seed));
                    if manifest.iteration_budget.is_none()
                        && elapsed > manifest.budget.time_s * (1.0 + options.overshoot_tolerance)
                    {
                        meta.insert("budget_violation".into(), MetaValue::Bool(true));
                    }
                    let energy_j = meta.get("energy_j").and_then(MetaValue::as_f64).unwrap_or(0.0);
                    let cost_usd = meta.get("cost_usd").and_then(MetaValue::as_f64).unwrap_or(0.0);
                    RunRecord {
                        solver: spec.name.clone(),
                        instance_id: instance_index,
                        quality,
                        time_s: elapsed,
                        energy_j,
                        cost_usd,
                        meta,
                    }
                }
                Err(message) => {
                    let mut meta = MetaMap::new();
                    meta.insert("failed".into(), MetaValue::Bool(true));
                    meta.insert("error".into(), MetaValue::Text(message));
                    meta.insert("seed".into(), MetaValue::from(seed));
                    RunRecord {
                        solver: spec.name.clone(),
                        instance_id: instance_index,
                        quality: 0.0,
                        time_s: elapsed,
                        energy_j: 0.0,
                        cost_usd: 0.0,
                        meta,
                    }
                }
            };
            records.push(record);
        }

        if let Some(cal) = calibrator {
            cal.calibrate(&instance, &mut records[first_record..])?;
        }
    }

    Ok(records)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
