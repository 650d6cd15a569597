//! Synthetic QUBO testbed: instance generator, objective, two budgeted
//! heuristics, and a brute-force oracle.
//!
//! Instances are symmetric zero-diagonal matrices; the objective is the
//! quadratic form x'Qx over binary vectors, minimized. The bundled
//! solvers are deliberately minimal: a fixed-acceptance single-flip
//! annealer and a steepest-descent greedy walk with random restarts. They
//! exist to exercise the harness and reporting, not to win benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::harness::{
    derive_seed, MetaMap, MetaValue, QualityCalibrator, RunRecord, SolveContext, SolveOutput,
    SolverRegistry, SolverSpec, CALIBRATION_SEED_STREAM,
};
use crate::{Error, Result};

/// Hard cap for exhaustive enumeration (2^24 states).
pub const BRUTE_FORCE_MAX_N: usize = 24;
/// Largest n for which calibration folds the exact optimum into the
/// shared quality bounds.
pub const CALIBRATION_EXACT_MAX_N: usize = 20;
/// Random bitstrings sampled for the worst-case quality reference.
pub const CALIBRATION_RANDOM_SAMPLES: usize = 256;

/// Registry name of the simulated-annealing solver.
pub const SOLVER_SA: &str = "classical-sa";
/// Registry name of the greedy restart heuristic.
pub const SOLVER_GREEDY: &str = "quantum-like";

// ---------------------------------------------------------------------------
// Instance
// ---------------------------------------------------------------------------

/// A QUBO instance: symmetric n x n matrix with zero diagonal, stored
/// dense row-major, plus the parameters that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboInstance {
    n: usize,
    density: f64,
    seed: u64,
    matrix: Vec<f64>,
}

impl QuboInstance {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    #[inline]
    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    /// Build from raw parts, enforcing shape, symmetry, and zero diagonal.
    pub fn from_parts(n: usize, density: f64, seed: u64, matrix: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("instance size n must be at least 1".into()));
        }
        if !(density > 0.0 && density <= 1.0) {
            return Err(Error::DensityOutOfRange(density));
        }
        if matrix.len() != n * n {
            return Err(Error::Validation(format!(
                "matrix has {} values, expected {}",
                matrix.len(),
                n * n
            )));
        }
        for i in 0..n {
            if matrix[i * n + i] != 0.0 {
                return Err(Error::Validation(format!("diagonal entry ({i},{i}) must be 0")));
            }
            for j in (i + 1)..n {
                if matrix[i * n + j] != matrix[j * n + i] {
                    return Err(Error::Validation(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(QuboInstance {
            n,
            density,
            seed,
            matrix,
        })
    }

    pub fn to_doc(&self) -> QuboInstanceDoc {
        QuboInstanceDoc {
            n: self.n,
            density: self.density,
            seed: self.seed,
            values: self.matrix.clone(),
        }
    }
}

/// Interchange document for instances: dense row-major values so third
/// parties can replicate runs without this crate's generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboInstanceDoc {
    pub n: usize,
    pub density: f64,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl QuboInstanceDoc {
    pub fn to_instance(&self) -> Result<QuboInstance> {
        QuboInstance::from_parts(self.n, self.density, self.seed, self.values.clone())
    }
}

/// Generate a random instance, deterministic in `(n, density, seed)`.
///
/// Upper-triangle entries are standard-normal draws kept with probability
/// `density`, then mirrored below the diagonal. Masking before the mirror
/// keeps Q exactly symmetric, which makes the objective and flip gains
/// unambiguous (x'Qx only ever sees Q + Q').
pub fn generate_qubo(n: usize, density: f64, seed: u64) -> Result<QuboInstance> {
    if n == 0 {
        return Err(Error::Validation("instance size n must be at least 1".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::DensityOutOfRange(density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = vec![0.0; n * n];
    // two passes, row-major over i < j: normals first, then the mask
    let mut draws: Vec<f64> = Vec::with_capacity(n * (n - 1) / 2);
    for _ in 0..(n * (n - 1) / 2) {
        draws.push(rng.sample(StandardNormal));
    }
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let keep = rng.gen::<f64>() < density;
            if keep {
                matrix[i * n + j] = draws[idx];
                matrix[j * n + i] = draws[idx];
            }
            idx += 1;
        }
    }
    Ok(QuboInstance {
        n,
        density,
        seed,
        matrix,
    })
}

// ---------------------------------------------------------------------------
// Bit vectors and the objective
// ---------------------------------------------------------------------------

/// A fixed-length over-{0,1} assignment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BitVector {
    bits: Vec<u8>,
}

impl BitVector {
    pub fn zeros(n: usize) -> Self {
        BitVector { bits: vec![0; n] }
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        for &b in &bits {
            if b > 1 {
                return Err(Error::InvalidBit(b));
            }
        }
        Ok(BitVector { bits })
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        BitVector {
            bits: (0..n).map(|_| rng.gen_range(0..2u8)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.bits[i] ^= 1;
    }
}

/// Evaluate x'Qx.
pub fn objective(instance: &QuboInstance, x: &BitVector) -> Result<f64> {
    let n = instance.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let mut f = 0.0;
    for i in 0..n {
        if x.get(i) == 1 {
            let row = &instance.matrix[i * n..(i + 1) * n];
            for j in 0..n {
                if x.get(j) == 1 {
                    f += row[j];
                }
            }
        }
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Quality normalization
// ---------------------------------------------------------------------------

/// Reference objectives bounding the quality scale: `f_reference_low` is
/// the best (minimum) reference, `f_reference_high` the worst baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityBounds {
    pub f_reference_low: f64,
    pub f_reference_high: f64,
}

impl QualityBounds {
    pub fn new(f_reference_low: f64, f_reference_high: f64) -> Result<Self> {
        if f_reference_low > f_reference_high {
            return Err(Error::Validation(format!(
                "quality bounds inverted: low {f_reference_low} > high {f_reference_high}"
            )));
        }
        Ok(QualityBounds {
            f_reference_low,
            f_reference_high,
        })
    }
}

/// Map an objective value to quality in [0, 1]: 1 at the low reference, 0
/// at the high reference, clipped outside. Degenerate equal bounds score 1.
pub fn quality_from_objective(f: f64, bounds: &QualityBounds) -> f64 {
    let (lo, hi) = (bounds.f_reference_low, bounds.f_reference_high);
    if hi == lo {
        return 1.0;
    }
    ((hi - f) / (hi - lo)).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

fn base_meta(ctx: &SolveContext, f_best: f64, f_worst: f64, flips: u64) -> MetaMap {
    let mut meta = MetaMap::new();
    // solver-declared runtime is the granted budget, as in the reference
    // harness; the measured wall clock lives on the record itself
    meta.insert("time_s".into(), MetaValue::Float(ctx.budget.time_s));
    meta.insert("energy_j".into(), MetaValue::Float(0.0));
    meta.insert("cost_usd".into(), MetaValue::Float(0.0));
    meta.insert("f_best".into(), MetaValue::Float(f_best));
    meta.insert("f_worst".into(), MetaValue::Float(f_worst));
    meta.insert("flips_evaluated".into(), MetaValue::from(flips));
    meta
}

fn listing_quality(f_best: f64, f_worst: f64) -> f64 {
    let worst = if f_worst > f_best { f_worst } else { f_best + 1.0 };
    quality_from_objective(
        f_best,
        &QualityBounds {
            f_reference_low: f_best,
            f_reference_high: worst,
        },
    )
}

/// Single-flip annealer with fixed 1% acceptance of non-improving moves.
///
/// Starts from a uniform random bitstring, flips one random bit per
/// iteration, accepts improvements always and regressions with
/// probability 0.01, and polls the loop guard once per flip. Tracks the
/// best and worst objectives seen along the accepted walk.
pub fn solve_sa(instance: &QuboInstance, ctx: &SolveContext) -> Result<SolveOutput> {
    let n = instance.n();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut x = BitVector::random(n, &mut rng);
    let mut f = objective(instance, &x)?;
    let (mut f_best, mut f_worst) = (f, f);
    let mut flips = 0u64;
    let mut guard = ctx.loop_guard()?;

    while !guard.expired() {
        let i = rng.gen_range(0..n);
        x.flip(i);
        let f_try = objective(instance, &x)?;
        flips += 1;
        if f_try <= f || rng.gen::<f64>() < 0.01 {
            f = f_try;
            f_best = f_best.min(f);
            f_worst = f_worst.max(f);
        } else {
            x.flip(i);
        }
    }

    Ok(SolveOutput {
        quality: listing_quality(f_best, f_worst),
        meta: base_meta(ctx, f_best, f_worst, flips),
    })
}

/// Lowest-index best single-flip gain from `x`, with the gain value.
fn best_flip(instance: &QuboInstance, x: &mut BitVector, f: f64) -> Result<(usize, f64)> {
    let n = instance.n();
    let mut best_index = 0;
    let mut best_gain = f64::INFINITY;
    for i in 0..n {
        x.flip(i);
        let gain = objective(instance, x)? - f;
        x.flip(i);
        if gain < best_gain {
            best_gain = gain;
            best_index = i;
        }
    }
    Ok((best_index, best_gain))
}

/// Steepest-descent greedy walk: apply the best strictly improving flip,
/// else restart from a uniform random bitstring. Polls the guard once per
/// sweep of all n candidate flips.
pub fn solve_greedy(instance: &QuboInstance, ctx: &SolveContext) -> Result<SolveOutput> {
    let n = instance.n();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut x = BitVector::zeros(n);
    let mut f = objective(instance, &x)?;
    let (mut f_best, mut f_worst) = (f, f);
    let mut flips = 0u64;
    let mut restarts = 0u64;
    let mut guard = ctx.loop_guard()?;

    while !guard.expired() {
        let (i_best, gain) = best_flip(instance, &mut x, f)?;
        flips += n as u64;
        if gain < 0.0 {
            x.flip(i_best);
            f = objective(instance, &x)?;
            f_best = f_best.min(f);
            f_worst = f_worst.max(f);
        } else {
            restarts += 1;
            x = BitVector::random(n, &mut rng);
            f = objective(instance, &x)?;
        }
    }

    let mut meta = base_meta(ctx, f_best, f_worst, flips);
    meta.insert("restarts".into(), MetaValue::from(restarts));
    Ok(SolveOutput {
        quality: listing_quality(f_best, f_worst),
        meta,
    })
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

/// Exact minimum of x'Qx over all 2^n assignments, with the
/// lexicographically smallest argmin on ties. Refuses n above
/// [`BRUTE_FORCE_MAX_N`].
///
/// Enumerates in Gray-code order with O(n) incremental deltas; candidate
/// minima are re-evaluated with the full objective so the reported value
/// is exact, not drift-accumulated.
pub fn brute_force_optimum(instance: &QuboInstance) -> Result<(f64, BitVector)> {
    let n = instance.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::InstanceTooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let mut x = BitVector::zeros(n);
    let mut f_running = 0.0;
    let mut best_f = 0.0;
    let mut best_x = x.clone();

    let states = 1u64 << n;
    for k in 1..states {
        let i = k.trailing_zeros() as usize;
        let mut row_dot = 0.0;
        let row = &instance.matrix[i * n..(i + 1) * n];
        for j in 0..n {
            if x.get(j) == 1 {
                row_dot += row[j];
            }
        }
        let sign = if x.get(i) == 0 { 1.0 } else { -1.0 };
        f_running += 2.0 * sign * row_dot;
        x.flip(i);

        if f_running <= best_f + 1e-9 {
            let f_exact = objective(instance, &x)?;
            if f_exact < best_f || (f_exact == best_f && x < best_x) {
                best_f = f_exact;
                best_x = x.clone();
            }
        }
    }
    Ok((best_f, best_x))
}

/// Mean objective over `samples` uniform random bitstrings; the shared
/// worst-case quality reference.
pub fn mean_random_objective(instance: &QuboInstance, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::EmptyInput("random objective sample count"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..samples {
        let x = BitVector::random(instance.n(), &mut rng);
        total += objective(instance, &x)?;
    }
    Ok(total / samples as f64)
}

// ---------------------------------------------------------------------------
// Shared-bounds quality calibration
// ---------------------------------------------------------------------------

/// Rescores each instance's records against shared per-instance bounds:
/// the low reference is the best objective any solver found (plus the
/// exact optimum for small n), the high reference is the mean objective
/// of seeded uniform random bitstrings. This yields qualities comparable
/// across solvers on the same instance; the raw solver-declared quality
/// (identically 1.0 for the bundled solvers) remains available via the
/// `raw` quality policy.
#[derive(Debug, Clone, Copy, Default)]
pub struct SharedBoundsCalibrator;

impl QualityCalibrator<QuboInstance> for SharedBoundsCalibrator {
    fn calibrate(&self, instance: &QuboInstance, records: &mut [RunRecord]) -> Result<()> {
        let f_bests: Vec<f64> = records
            .iter()
            .filter_map(|r| r.meta.get("f_best").and_then(MetaValue::as_f64))
            .collect();
        if f_bests.is_empty() {
            return Ok(());
        }
        let mut f_low = f_bests.iter().copied().fold(f64::INFINITY, f64::min);
        if instance.n() <= CALIBRATION_EXACT_MAX_N {
            let (optimum, _) = brute_force_optimum(instance)?;
            f_low = f_low.min(optimum);
        }
        let cal_seed = derive_seed(instance.seed(), 0, CALIBRATION_SEED_STREAM);
        let mut f_high =
            mean_random_objective(instance, CALIBRATION_RANDOM_SAMPLES, cal_seed)?;
        f_high = f_high.max(f_low);
        let bounds = QualityBounds::new(f_low, f_high)?;

        for record in records.iter_mut() {
            if let Some(f_best) = record.meta.get("f_best").and_then(MetaValue::as_f64) {
                record.quality = quality_from_objective(f_best, &bounds);
                record
                    .meta
                    .insert("f_ref_low".into(), MetaValue::Float(bounds.f_reference_low));
                record
                    .meta
                    .insert("f_ref_high".into(), MetaValue::Float(bounds.f_reference_high));
            }
        }
        Ok(())
    }
}

/// Registry with the two bundled solvers.
pub fn bundled_registry() -> SolverRegistry<QuboInstance> {
    let mut registry = SolverRegistry::new();
    registry
        .register(SolverSpec::new(SOLVER_SA, |inst, ctx| {
            solve_sa(inst, ctx).map_err(|e| e.to_string())
        }).expect("valid name"))
        .expect("fresh registry");
    registry
        .register(SolverSpec::new(SOLVER_GREEDY, |inst, ctx| {
            solve_greedy(inst, ctx).map_err(|e| e.to_string())
        }).expect("valid name"))
        .expect("fresh registry");
    registry
}

/// Generator parameters understood by the bundled QUBO generator.
pub fn qubo_generator_params(params: &MetaMap) -> Result<(usize, f64)> {
    let n = params
        .get("n")
        .and_then(MetaValue::as_i64)
        .ok_or_else(|| Error::Validation("instance_params.n (integer) is required".into()))?;
    if n < 1 {
        return Err(Error::Validation(format!("instance_params.n must be >= 1, got {n}")));
    }
    let density = params
        .get("density")
        .map(|v| {
            v.as_f64()
                .ok_or_else(|| Error::Validation("instance_params.density must be a number".into()))
        })
        .transpose()?
        .unwrap_or(0.25);
    Ok((n as usize, density))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Budget;

    fn ctx_iterations(seed: u64, iterations: u64) -> SolveContext {
        SolveContext {
            budget: Budget::time_only(10.0),
            iteration_budget: Some(iterations),
            seed,
        }
    }

    fn instance_2x2(coupling: f64) -> QuboInstance {
        QuboInstance::from_parts(2, 1.0, 0, vec![0.0, coupling, coupling, 0.0]).unwrap()
    }

    #[test]
    fn generate_is_deterministic() {
        let a = generate_qubo(24, 0.25, 0).unwrap();
        let b = generate_qubo(24, 0.25, 0).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = generate_qubo(24, 0.25, 1).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn generate_yields_symmetric_zero_diagonal() {
        let inst = generate_qubo(16, 0.3, 99).unwrap();
        let n = inst.n();
        for i in 0..n {
            assert_eq!(inst.q(i, i), 0.0);
            for j in 0..n {
                assert_eq!(inst.q(i, j), inst.q(j, i));
            }
        }
    }

    #[test]
    fn generate_full_density_keeps_every_off_diagonal() {
        let inst = generate_qubo(4, 1.0, 123).unwrap();
        let nonzero = inst.matrix().iter().filter(|v| **v != 0.0).count();
        assert_eq!(nonzero, 12);
    }

    #[test]
    fn generate_rejects_bad_density() {
        assert!(matches!(
            generate_qubo(4, 0.0, 0),
            Err(Error::DensityOutOfRange(_))
        ));
        assert!(matches!(
            generate_qubo(4, 1.1, 0),
            Err(Error::DensityOutOfRange(_))
        ));
    }

    #[test]
    fn objective_zero_vector_is_zero() {
        let inst = generate_qubo(8, 0.5, 3).unwrap();
        assert_eq!(objective(&inst, &BitVector::zeros(8)).unwrap(), 0.0);
    }

    #[test]
    fn objective_hand_example() {
        let inst = instance_2x2(1.0);
        let x = BitVector::from_bits(vec![1, 1]).unwrap();
        assert_eq!(objective(&inst, &x).unwrap(), 2.0);
    }

    #[test]
    fn objective_matches_double_loop_oracle() {
        let inst = generate_qubo(12, 0.6, 42).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = BitVector::random(12, &mut rng);
            let mut oracle = 0.0;
            for i in 0..12 {
                for j in 0..12 {
                    oracle += inst.q(i, j) * x.get(i) as f64 * x.get(j) as f64;
                }
            }
            assert_eq!(objective(&inst, &x).unwrap(), oracle);
        }
    }

    #[test]
    fn objective_rejects_dimension_mismatch() {
        let inst = generate_qubo(4, 1.0, 0).unwrap();
        assert!(matches!(
            objective(&inst, &BitVector::zeros(5)),
            Err(Error::DimensionMismatch { expected: 4, got: 5 })
        ));
    }

    #[test]
    fn quality_from_objective_endpoints_and_clipping() {
        let b = QualityBounds::new(-4.0, 6.0).unwrap();
        assert_eq!(quality_from_objective(-4.0, &b), 1.0);
        assert_eq!(quality_from_objective(6.0, &b), 0.0);
        assert_eq!(quality_from_objective(11.0, &b), 0.0);
        assert_eq!(quality_from_objective(-9.0, &b), 1.0);
        let degenerate = QualityBounds::new(2.0, 2.0).unwrap();
        assert_eq!(quality_from_objective(2.0, &degenerate), 1.0);
    }

    #[test]
    fn quality_bounds_reject_inversion() {
        assert!(QualityBounds::new(3.0, 1.0).is_err());
    }

    #[test]
    fn solve_sa_degenerate_single_variable() {
        let inst = QuboInstance::from_parts(1, 1.0, 0, vec![0.0]).unwrap();
        let out = solve_sa(&inst, &ctx_iterations(0, 50)).unwrap();
        assert_eq!(out.quality, 1.0);
        assert_eq!(out.meta.get("f_best"), Some(&MetaValue::Float(0.0)));
    }

    #[test]
    fn solve_sa_deterministic_under_iteration_budget() {
        let inst = generate_qubo(10, 0.5, 11).unwrap();
        let a = solve_sa(&inst, &ctx_iterations(77, 500)).unwrap();
        let b = solve_sa(&inst, &ctx_iterations(77, 500)).unwrap();
        assert_eq!(a.meta.get("f_best"), b.meta.get("f_best"));
        assert_eq!(a.meta.get("flips_evaluated"), Some(&MetaValue::Int(500)));
        assert_eq!(b.meta.get("flips_evaluated"), Some(&MetaValue::Int(500)));
    }

    #[test]
    fn solve_greedy_degenerate_single_variable() {
        let inst = QuboInstance::from_parts(1, 1.0, 0, vec![0.0]).unwrap();
        let out = solve_greedy(&inst, &ctx_iterations(0, 50)).unwrap();
        assert_eq!(out.quality, 1.0);
    }

    #[test]
    fn solve_greedy_restarts_when_stuck() {
        // from the all-zeros start every single-flip gain is 0 (zero
        // diagonal), so the very first sweep must trigger a restart
        let inst = generate_qubo(6, 1.0, 4).unwrap();
        let out = solve_greedy(&inst, &ctx_iterations(9, 30)).unwrap();
        let restarts = out.meta.get("restarts").and_then(MetaValue::as_i64).unwrap();
        assert!(restarts >= 1);
    }

    #[test]
    fn greedy_descent_is_strictly_improving_between_restarts() {
        let inst = generate_qubo(8, 0.8, 21).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut x = BitVector::random(8, &mut rng);
        let mut f = objective(&inst, &x).unwrap();
        let mut accepted = Vec::new();
        loop {
            let (i, gain) = best_flip(&inst, &mut x, f).unwrap();
            if gain >= 0.0 {
                break;
            }
            x.flip(i);
            f = objective(&inst, &x).unwrap();
            accepted.push(f);
        }
        for pair in accepted.windows(2) {
            assert!(pair[1] < pair[0]);
        }
    }

    #[test]
    fn best_flip_breaks_ties_at_lowest_index() {
        // zero matrix: every flip has gain 0, so index 0 wins
        let inst = QuboInstance::from_parts(3, 1.0, 0, vec![0.0; 9]).unwrap();
        let mut x = BitVector::zeros(3);
        let (i, gain) = best_flip(&inst, &mut x, 0.0).unwrap();
        assert_eq!(i, 0);
        assert_eq!(gain, 0.0);
    }

    #[test]
    fn brute_force_all_zero_matrix() {
        let inst = QuboInstance::from_parts(3, 1.0, 0, vec![0.0; 9]).unwrap();
        let (f, x) = brute_force_optimum(&inst).unwrap();
        assert_eq!(f, 0.0);
        assert_eq!(x.bits(), &[0, 0, 0]);
    }

    #[test]
    fn brute_force_hand_example() {
        let inst = instance_2x2(-1.0);
        let (f, x) = brute_force_optimum(&inst).unwrap();
        assert_eq!(f, -2.0);
        assert_eq!(x.bits(), &[1, 1]);
    }

    #[test]
    fn brute_force_refuses_oversized_instances() {
        let inst = QuboInstance::from_parts(25, 1.0, 0, vec![0.0; 625]).unwrap();
        assert!(matches!(
            brute_force_optimum(&inst),
            Err(Error::InstanceTooLarge { n: 25, max: 24 })
        ));
    }

    #[test]
    fn brute_force_matches_exhaustive_recompute() {
        let inst = generate_qubo(10, 0.5, 8).unwrap();
        let (f, x) = brute_force_optimum(&inst).unwrap();
        assert_eq!(objective(&inst, &x).unwrap(), f);
        // independent enumeration in plain numeric order
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << 10) {
            let bits: Vec<u8> = (0..10).map(|b| ((mask >> b) & 1) as u8).collect();
            let cand = objective(&inst, &BitVector::from_bits(bits).unwrap()).unwrap();
            if cand < best {
                best = cand;
            }
        }
        assert_eq!(f, best);
    }

    #[test]
    fn sa_reaches_brute_force_optimum_with_generous_iterations() {
        let inst = generate_qubo(12, 0.5, 2).unwrap();
        let (f_opt, _) = brute_force_optimum(&inst).unwrap();
        let out = solve_sa(&inst, &ctx_iterations(123, 200_000)).unwrap();
        let f_best = out.meta.get("f_best").and_then(MetaValue::as_f64).unwrap();
        assert!((f_best - f_opt).abs() < 1e-9, "f_best {f_best} vs optimum {f_opt}");
    }

    #[test]
    fn calibrator_scores_best_solver_at_one() {
        let inst = generate_qubo(10, 0.5, 6).unwrap();
        let (f_opt, _) = brute_force_optimum(&inst).unwrap();
        let mut records = vec![
            record_with_f_best("classical-sa", f_opt),
            record_with_f_best("quantum-like", f_opt + 1.0),
        ];
        SharedBoundsCalibrator
            .calibrate(&inst, &mut records)
            .unwrap();
        assert_eq!(records[0].quality, 1.0);
        assert!(records[1].quality < 1.0);
        assert!(records[1].quality >= 0.0);
        assert!(records[0].meta.contains_key("f_ref_high"));
    }

    fn record_with_f_best(solver: &str, f_best: f64) -> RunRecord {
        let mut meta = MetaMap::new();
        meta.insert("f_best".into(), MetaValue::Float(f_best));
        RunRecord {
            solver: solver.into(),
            instance_id: 0,
            quality: 1.0,
            time_s: 0.05,
            energy_j: 0.0,
            cost_usd: 0.0,
            meta,
        }
    }

    #[test]
    fn calibrator_leaves_failed_records_at_zero() {
        let inst = generate_qubo(6, 0.5, 6).unwrap();
        let mut failed = record_with_f_best("classical-sa", 0.0);
        failed.meta.remove("f_best");
        failed.quality = 0.0;
        let mut records = vec![failed, record_with_f_best("quantum-like", -1.0)];
        SharedBoundsCalibrator
            .calibrate(&inst, &mut records)
            .unwrap();
        assert_eq!(records[0].quality, 0.0);
    }

    #[test]
    fn instance_doc_round_trips() {
        let inst = generate_qubo(5, 0.7, 17).unwrap();
        let doc = inst.to_doc();
        let text = serde_json::to_string(&doc).unwrap();
        let back: QuboInstanceDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_instance().unwrap(), inst);
    }

    #[test]
    fn generator_params_parse_and_default() {
        let mut params = MetaMap::new();
        params.insert("n".into(), MetaValue::Int(24));
        let (n, density) = qubo_generator_params(&params).unwrap();
        assert_eq!(n, 24);
        assert_eq!(density, 0.25);
        params.insert("density".into(), MetaValue::Float(0.5));
        assert_eq!(qubo_generator_params(&params).unwrap().1, 0.5);
        params.remove("n");
        assert!(qubo_generator_params(&params).is_err());
    }
}
