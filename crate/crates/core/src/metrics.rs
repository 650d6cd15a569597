//! Readiness scoring and normalized speedup at target quality.
//!
//! The readiness score is a weighted sum over a boolean evidence checklist
//! plus a bracketed calibration-drift bonus; a piecewise step map turns the
//! score into an integer readiness level 1–9. The normalized speedup
//! compares two solvers' minimum time-to-threshold on a shared instance
//! family. Everything here is a pure function over immutable inputs.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Drift bonus
// ---------------------------------------------------------------------------

/// One bracket of the drift-bonus table: `above_ppm < drift <= up_to_ppm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftBracket {
    pub above_ppm: f64,
    pub up_to_ppm: f64,
    pub bonus: f64,
}

/// Default bracket table: +10 for drift in (0, 10] ppm, +6 in (10, 100] ppm,
/// 0 otherwise. Zero drift means "no drift evidence", not "perfect", so it
/// falls outside every bracket.
pub const DEFAULT_DRIFT_BRACKETS: [DriftBracket; 2] = [
    DriftBracket {
        above_ppm: 0.0,
        up_to_ppm: 10.0,
        bonus: 10.0,
    },
    DriftBracket {
        above_ppm: 10.0,
        up_to_ppm: 100.0,
        bonus: 6.0,
    },
];

/// Drift bonus under the default bracket table.
pub fn drift_bonus(drift_ppm: f64) -> Result<f64> {
    drift_bonus_in(&DEFAULT_DRIFT_BRACKETS, drift_ppm)
}

/// Drift bonus under an explicit bracket table. Brackets are half-open on
/// the low side; drift matching no bracket scores 0.
pub fn drift_bonus_in(brackets: &[DriftBracket], drift_ppm: f64) -> Result<f64> {
    if !(drift_ppm >= 0.0) {
        return Err(Error::NegativeDrift(drift_ppm));
    }
    for b in brackets {
        if drift_ppm > b.above_ppm && drift_ppm <= b.up_to_ppm {
            return Ok(b.bonus);
        }
    }
    Ok(0.0)
}

// ---------------------------------------------------------------------------
// Stage map
// ---------------------------------------------------------------------------

/// Score thresholds for stages 2..=9; each bracket is closed below.
const STAGE_THRESHOLDS: [f64; 8] = [10.0, 20.0, 35.0, 50.0, 65.0, 75.0, 85.0, 95.0];

/// Map a readiness score to its integer stage in [1, 9].
///
/// Nondecreasing step function; a score sitting exactly on a threshold
/// belongs to the higher stage (e.g. 10 maps to 2, 95 maps to 9).
pub fn stage_map(score: f64) -> u8 {
    let mut stage = 1u8;
    for (i, threshold) in STAGE_THRESHOLDS.iter().enumerate() {
        if score >= *threshold {
            stage = i as u8 + 2;
        }
    }
    stage
}

// ---------------------------------------------------------------------------
// Readiness assessment and scoring
// ---------------------------------------------------------------------------

/// One checklist entry: a named evidence item and whether it is satisfied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChecklistItem {
    pub name: String,
    pub satisfied: bool,
}

/// Input to readiness scoring: checklist bits, matching weights, and the
/// observed long-term calibration drift in parts-per-million.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadinessAssessment {
    pub checklist: Vec<ChecklistItem>,
    pub weights: Vec<f64>,
    pub drift_ppm: f64,
    pub rubric_version: String,
}

impl ReadinessAssessment {
    fn validate(&self) -> Result<()> {
        if self.checklist.len() != self.weights.len() {
            return Err(Error::ChecklistWeightMismatch {
                items: self.checklist.len(),
                weights: self.weights.len(),
            });
        }
        for (item, w) in self.checklist.iter().zip(&self.weights) {
            if !(w >= &0.0) {
                return Err(Error::NegativeWeight {
                    item: item.name.clone(),
                    weight: *w,
                });
            }
        }
        if !(self.drift_ppm >= 0.0) {
            return Err(Error::NegativeDrift(self.drift_ppm));
        }
        Ok(())
    }
}

/// Points contributed by one checklist item (weight if satisfied, else 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemContribution {
    pub name: String,
    pub points: f64,
}

/// Result of scoring an assessment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadinessResult {
    pub score: f64,
    pub stage: u8,
    pub drift_bonus: f64,
    pub per_item_contribution: Vec<ItemContribution>,
}

/// Score an assessment under the default drift brackets.
pub fn readiness_score(assessment: &ReadinessAssessment) -> Result<ReadinessResult> {
    readiness_score_with_brackets(assessment, &DEFAULT_DRIFT_BRACKETS)
}

/// Score an assessment under an explicit drift-bracket table.
pub fn readiness_score_with_brackets(
    assessment: &ReadinessAssessment,
    brackets: &[DriftBracket],
) -> Result<ReadinessResult> {
    assessment.validate()?;
    let bonus = drift_bonus_in(brackets, assessment.drift_ppm)?;
    let mut contributions = Vec::with_capacity(assessment.checklist.len());
    let mut score = 0.0;
    for (item, weight) in assessment.checklist.iter().zip(&assessment.weights) {
        let points = if item.satisfied { *weight } else { 0.0 };
        score += points;
        contributions.push(ItemContribution {
            name: item.name.clone(),
            points,
        });
    }
    score += bonus;
    Ok(ReadinessResult {
        score,
        stage: stage_map(score),
        drift_bonus: bonus,
        per_item_contribution: contributions,
    })
}

// ---------------------------------------------------------------------------
// Rubric configuration
// ---------------------------------------------------------------------------

/// One rubric entry: checklist item name and its weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RubricItem {
    pub name: String,
    pub weight: f64,
}

/// Versioned scoring rubric: the checklist universe, weights, and drift
/// brackets ship as data so the definitions behind a reported level can be
/// pinned by content hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rubric {
    pub rubric_version: String,
    pub items: Vec<RubricItem>,
    pub drift_brackets: Vec<DriftBracket>,
}

/// The thirteen default checklist items.
pub const DEFAULT_CHECKLIST: [&str; 13] = [
    "problem_formulation",
    "encoding_specification",
    "prototype_components",
    "integrated_pipeline",
    "reproducible_runs",
    "error_budget",
    "classical_baseline",
    "matched_budget_protocol",
    "change_control",
    "audit_trail",
    "service_level_objectives",
    "external_replication",
    "governed_deployment",
];

impl Rubric {
    /// Default rubric: the thirteen standard items with uniform weights
    /// summing to 90, so a fully satisfied checklist plus the best drift
    /// bonus reaches 100 (stage 9). The uniform split is an artifact
    /// convention, versioned here so replications can pin it.
    pub fn default_v1() -> Self {
        let weight = 90.0 / DEFAULT_CHECKLIST.len() as f64;
        Rubric {
            rubric_version: "qrl-13-uniform-1".to_string(),
            items: DEFAULT_CHECKLIST
                .iter()
                .map(|name| RubricItem {
                    name: (*name).to_string(),
                    weight,
                })
                .collect(),
            drift_brackets: DEFAULT_DRIFT_BRACKETS.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.items.is_empty() {
            return Err(Error::EmptyInput("rubric item list"));
        }
        for item in &self.items {
            if item.name.is_empty() {
                return Err(Error::EmptyInput("rubric item name"));
            }
            if !(item.weight >= 0.0) {
                return Err(Error::NegativeWeight {
                    item: item.name.clone(),
                    weight: item.weight,
                });
            }
        }
        Ok(())
    }

    /// Combine this rubric with a filled-in assessment document, checking
    /// that the document matches the rubric item-for-item.
    pub fn build_assessment(&self, doc: &AssessmentDoc) -> Result<ReadinessAssessment> {
        self.validate()?;
        if doc.rubric_version != self.rubric_version {
            return Err(Error::Validation(format!(
                "assessment targets rubric version '{}' but rubric is '{}'",
                doc.rubric_version, self.rubric_version
            )));
        }
        if doc.checklist.len() != self.items.len() {
            return Err(Error::Validation(format!(
                "rubric '{}' defines {} checklist items but the assessment lists {}",
                self.rubric_version,
                self.items.len(),
                doc.checklist.len()
            )));
        }
        for (got, want) in doc.checklist.iter().zip(&self.items) {
            if got.name != want.name {
                return Err(Error::Validation(format!(
                    "rubric '{}' expects item '{}' but the assessment lists '{}'",
                    self.rubric_version, want.name, got.name
                )));
            }
        }
        Ok(ReadinessAssessment {
            checklist: doc.checklist.clone(),
            weights: self.items.iter().map(|i| i.weight).collect(),
            drift_ppm: doc.drift_ppm,
            rubric_version: self.rubric_version.clone(),
        })
    }
}

/// On-disk assessment document: which items are satisfied plus observed drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentDoc {
    pub rubric_version: String,
    pub drift_ppm: f64,
    pub checklist: Vec<ChecklistItem>,
}

// ---------------------------------------------------------------------------
// Normalized speedup at target quality
// ---------------------------------------------------------------------------

/// One observation: the best quality a solver reached on an instance and
/// the wall-clock runtime that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityTimeEntry {
    pub instance_id: u64,
    pub time_s: f64,
    pub quality: f64,
}

/// A solver's (time, quality) observations over an instance family.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QualityTimeSeries {
    entries: Vec<QualityTimeEntry>,
}

impl QualityTimeSeries {
    pub fn new(entries: Vec<QualityTimeEntry>) -> Result<Self> {
        let mut series = QualityTimeSeries::default();
        for e in entries {
            series.push(e)?;
        }
        Ok(series)
    }

    pub fn push(&mut self, entry: QualityTimeEntry) -> Result<()> {
        if !(entry.quality >= 0.0 && entry.quality <= 1.0) {
            return Err(Error::QualityOutOfRange(entry.quality));
        }
        if !(entry.time_s >= 0.0) {
            return Err(Error::NegativeTime(entry.time_s));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[QualityTimeEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Minimum time over entries reaching quality >= tau, if any.
    fn min_time_at(&self, tau: f64) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.quality >= tau)
            .map(|e| e.time_s)
            .fold(None, |best, t| match best {
                Some(b) if b <= t => Some(b),
                _ => Some(t),
            })
    }
}

/// The speedup value proper: a finite ratio, or unreachable when either
/// solver never attains the target quality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Speedup {
    Ratio(f64),
    Unreachable,
}

impl Speedup {
    pub fn is_unreachable(&self) -> bool {
        matches!(self, Speedup::Unreachable)
    }

    /// Collapse to a float, mapping unreachable to +inf. Lossy; reports
    /// use this at serialization time only.
    pub fn to_extended(self) -> f64 {
        match self {
            Speedup::Ratio(v) => v,
            Speedup::Unreachable => f64::INFINITY,
        }
    }
}

/// Outcome of a normalized-speedup evaluation at one target quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "SpeedupOutcomeDoc", into = "SpeedupOutcomeDoc")]
pub struct SpeedupOutcome {
    pub tau: f64,
    pub speedup: Speedup,
    pub numerator_time_s: Option<f64>,
    pub denominator_time_s: Option<f64>,
}

/// Wire form: JSON has no infinity, so unreachable serializes as a null
/// value plus an explicit flag.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpeedupOutcomeDoc {
    tau: f64,
    value: Option<f64>,
    unreachable: bool,
    numerator_time_s: Option<f64>,
    denominator_time_s: Option<f64>,
}

impl From<SpeedupOutcome> for SpeedupOutcomeDoc {
    fn from(o: SpeedupOutcome) -> Self {
        let (value, unreachable) = match o.speedup {
            Speedup::Ratio(v) => (Some(v), false),
            Speedup::Unreachable => (None, true),
        };
        SpeedupOutcomeDoc {
            tau: o.tau,
            value,
            unreachable,
            numerator_time_s: o.numerator_time_s,
            denominator_time_s: o.denominator_time_s,
        }
    }
}

impl From<SpeedupOutcomeDoc> for SpeedupOutcome {
    fn from(d: SpeedupOutcomeDoc) -> Self {
        let speedup = match (d.unreachable, d.value) {
            (false, Some(v)) => Speedup::Ratio(v),
            _ => Speedup::Unreachable,
        };
        SpeedupOutcome {
            tau: d.tau,
            speedup,
            numerator_time_s: d.numerator_time_s,
            denominator_time_s: d.denominator_time_s,
        }
    }
}

/// Normalized speedup at target quality tau: the ratio of the minimum
/// times at which solver A and solver B each first reach quality >= tau.
///
/// If either side has no qualifying entry the outcome is unreachable;
/// downstream consumers treat that as +inf. Values above 1 mean B reached
/// the threshold faster than A.
pub fn normalized_speedup(
    series_a: &QualityTimeSeries,
    series_b: &QualityTimeSeries,
    tau: f64,
) -> Result<SpeedupOutcome> {
    if !(tau >= 0.0 && tau <= 1.0) {
        return Err(Error::TauOutOfRange(tau));
    }
    let numerator = series_a.min_time_at(tau);
    let denominator = series_b.min_time_at(tau);
    let speedup = match (numerator, denominator) {
        (Some(a), Some(b)) => Speedup::Ratio(a / b),
        _ => Speedup::Unreachable,
    };
    Ok(SpeedupOutcome {
        tau,
        speedup,
        numerator_time_s: numerator,
        denominator_time_s: denominator,
    })
}

/// Evaluate the normalized speedup at each tau in turn, preserving order.
pub fn tau_sweep(
    series_a: &QualityTimeSeries,
    series_b: &QualityTimeSeries,
    taus: &[f64],
) -> Result<Vec<SpeedupOutcome>> {
    taus.iter()
        .map(|&tau| normalized_speedup(series_a, series_b, tau))
        .collect()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn assessment(weights: &[f64], bits: &[u8], drift: f64) -> ReadinessAssessment {
        ReadinessAssessment {
            checklist: bits
                .iter()
                .enumerate()
                .map(|(i, b)| ChecklistItem {
                    name: format!("item_{i}"),
                    satisfied: *b != 0,
                })
                .collect(),
            weights: weights.to_vec(),
            drift_ppm: drift,
            rubric_version: "test".into(),
        }
    }

    fn series(pairs: &[(f64, f64)]) -> QualityTimeSeries {
        QualityTimeSeries::new(
            pairs
                .iter()
                .enumerate()
                .map(|(i, (t, q))| QualityTimeEntry {
                    instance_id: i as u64 + 1,
                    time_s: *t,
                    quality: *q,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn drift_bonus_brackets() {
        assert_eq!(drift_bonus(12.0).unwrap(), 6.0);
        assert_eq!(drift_bonus(0.0).unwrap(), 0.0);
        assert_eq!(drift_bonus(5.0).unwrap(), 10.0);
        assert_eq!(drift_bonus(150.0).unwrap(), 0.0);
        // boundary values belong to the bracket whose upper edge they sit on
        assert_eq!(drift_bonus(10.0).unwrap(), 10.0);
        assert_eq!(drift_bonus(100.0).unwrap(), 6.0);
    }

    #[test]
    fn drift_bonus_rejects_negative() {
        assert!(matches!(
            drift_bonus(-1.0),
            Err(Error::NegativeDrift(d)) if d == -1.0
        ));
    }

    #[test]
    fn readiness_score_worked_example() {
        let a = assessment(&[8.0, 8.0, 10.0, 6.0, 6.0], &[1, 1, 0, 1, 0], 12.0);
        let r = readiness_score(&a).unwrap();
        assert_eq!(r.score, 28.0);
        assert_eq!(r.stage, 3);
        assert_eq!(r.drift_bonus, 6.0);
        let points: Vec<f64> = r.per_item_contribution.iter().map(|c| c.points).collect();
        assert_eq!(points, vec![8.0, 8.0, 0.0, 6.0, 0.0]);
    }

    #[test]
    fn readiness_score_all_unsatisfied() {
        let a = assessment(&[8.0, 8.0, 10.0, 6.0, 6.0], &[0, 0, 0, 0, 0], 0.0);
        let r = readiness_score(&a).unwrap();
        assert_eq!(r.score, 0.0);
        assert_eq!(r.stage, 1);
    }

    #[test]
    fn readiness_score_updated_example() {
        // Flipping the third item and reducing drift to 8 ppm gives
        // 8+8+10+6+0 + 10 = 42, which lands in stage 4.
        let a = assessment(&[8.0, 8.0, 10.0, 6.0, 6.0], &[1, 1, 1, 1, 0], 8.0);
        let r = readiness_score(&a).unwrap();
        assert_eq!(r.score, 42.0);
        assert_eq!(r.stage, 4);
    }

    #[test]
    fn readiness_score_rejects_length_mismatch() {
        let mut a = assessment(&[8.0, 8.0], &[1, 1], 0.0);
        a.weights.push(3.0);
        assert!(matches!(
            readiness_score(&a),
            Err(Error::ChecklistWeightMismatch { items: 2, weights: 3 })
        ));
    }

    #[test]
    fn readiness_result_internal_consistency() {
        let a = assessment(&[8.0, 8.0, 10.0, 6.0, 6.0], &[1, 0, 1, 0, 1], 3.0);
        let r = readiness_score(&a).unwrap();
        let sum: f64 = r.per_item_contribution.iter().map(|c| c.points).sum();
        assert_eq!(r.score, sum + r.drift_bonus);
        assert_eq!(r.stage, stage_map(r.score));
    }

    #[test]
    fn stage_map_brackets() {
        assert_eq!(stage_map(28.0), 3);
        assert_eq!(stage_map(9.999), 1);
        assert_eq!(stage_map(95.0), 9);
        assert_eq!(stage_map(38.0), 4);
        // thresholds are closed below
        assert_eq!(stage_map(10.0), 2);
        assert_eq!(stage_map(20.0), 3);
        assert_eq!(stage_map(35.0), 4);
        assert_eq!(stage_map(50.0), 5);
        assert_eq!(stage_map(65.0), 6);
        assert_eq!(stage_map(75.0), 7);
        assert_eq!(stage_map(85.0), 8);
        assert_eq!(stage_map(-5.0), 1);
        assert_eq!(stage_map(1000.0), 9);
    }

    #[test]
    fn normalized_speedup_worked_example() {
        let a = series(&[(12.0, 0.72), (15.0, 0.75), (11.0, 0.68)]);
        let b = series(&[(9.0, 0.70), (10.0, 0.73), (8.0, 0.69)]);
        let out = normalized_speedup(&a, &b, 0.72).unwrap();
        assert_eq!(out.speedup, Speedup::Ratio(1.2));
        assert_eq!(out.numerator_time_s, Some(12.0));
        assert_eq!(out.denominator_time_s, Some(10.0));
    }

    #[test]
    fn normalized_speedup_identical_series_is_one() {
        let a = series(&[(3.0, 0.9), (5.0, 0.4)]);
        let out = normalized_speedup(&a, &a.clone(), 0.5).unwrap();
        assert_eq!(out.speedup, Speedup::Ratio(1.0));
    }

    #[test]
    fn normalized_speedup_unreachable_when_b_never_qualifies() {
        let a = series(&[(12.0, 0.72), (15.0, 0.75)]);
        let b = series(&[(9.0, 0.70), (8.0, 0.69)]);
        let out = normalized_speedup(&a, &b, 0.75).unwrap();
        assert!(out.speedup.is_unreachable());
        assert_eq!(out.numerator_time_s, Some(15.0));
        assert_eq!(out.denominator_time_s, None);
        assert_eq!(out.speedup.to_extended(), f64::INFINITY);
    }

    #[test]
    fn normalized_speedup_empty_series_is_unreachable() {
        let a = QualityTimeSeries::default();
        let b = series(&[(1.0, 1.0)]);
        assert!(normalized_speedup(&a, &b, 0.5).unwrap().speedup.is_unreachable());
        assert!(normalized_speedup(&b, &a, 0.5).unwrap().speedup.is_unreachable());
    }

    #[test]
    fn normalized_speedup_rejects_bad_tau() {
        let a = series(&[(1.0, 1.0)]);
        assert!(matches!(
            normalized_speedup(&a, &a.clone(), 1.5),
            Err(Error::TauOutOfRange(_))
        ));
        assert!(matches!(
            normalized_speedup(&a, &a.clone(), -0.1),
            Err(Error::TauOutOfRange(_))
        ));
    }

    #[test]
    fn tau_sweep_worked_example() {
        let a = series(&[(12.0, 0.72), (15.0, 0.75), (11.0, 0.68)]);
        let b = series(&[(9.0, 0.70), (10.0, 0.73), (8.0, 0.69)]);
        let rows = tau_sweep(&a, &b, &[0.68, 0.72, 0.75]).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].speedup, Speedup::Ratio(11.0 / 8.0));
        assert_eq!(rows[1].speedup, Speedup::Ratio(1.2));
        assert!(rows[2].speedup.is_unreachable());
        assert_eq!(rows[2].numerator_time_s, Some(15.0));
    }

    #[test]
    fn tau_sweep_empty_and_singleton() {
        let a = series(&[(2.0, 0.8)]);
        let b = series(&[(4.0, 0.9)]);
        assert!(tau_sweep(&a, &b, &[]).unwrap().is_empty());
        let single = tau_sweep(&a, &b, &[0.8]).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0], normalized_speedup(&a, &b, 0.8).unwrap());
    }

    #[test]
    fn series_validates_entries() {
        assert!(QualityTimeSeries::new(vec![QualityTimeEntry {
            instance_id: 0,
            time_s: 1.0,
            quality: 1.5,
        }])
        .is_err());
        assert!(QualityTimeSeries::new(vec![QualityTimeEntry {
            instance_id: 0,
            time_s: -1.0,
            quality: 0.5,
        }])
        .is_err());
    }

    #[test]
    fn speedup_outcome_round_trips_through_json() {
        let a = series(&[(12.0, 0.72), (15.0, 0.75)]);
        let b = series(&[(9.0, 0.70), (8.0, 0.69)]);
        for tau in [0.7, 0.75] {
            let out = normalized_speedup(&a, &b, tau).unwrap();
            let text = serde_json::to_string(&out).unwrap();
            let back: SpeedupOutcome = serde_json::from_str(&text).unwrap();
            assert_eq!(back, out);
        }
    }

    #[test]
    fn default_rubric_reaches_stage_nine_when_complete() {
        let rubric = Rubric::default_v1();
        assert_eq!(rubric.items.len(), 13);
        let doc = AssessmentDoc {
            rubric_version: rubric.rubric_version.clone(),
            drift_ppm: 5.0,
            checklist: rubric
                .items
                .iter()
                .map(|i| ChecklistItem {
                    name: i.name.clone(),
                    satisfied: true,
                })
                .collect(),
        };
        let r = readiness_score_with_brackets(
            &rubric.build_assessment(&doc).unwrap(),
            &rubric.drift_brackets,
        )
        .unwrap();
        assert!((r.score - 100.0).abs() < 1e-9);
        assert_eq!(r.stage, 9);
    }

    #[test]
    fn build_assessment_rejects_mismatches() {
        let rubric = Rubric::default_v1();
        let doc = AssessmentDoc {
            rubric_version: rubric.rubric_version.clone(),
            drift_ppm: 0.0,
            checklist: vec![ChecklistItem {
                name: "problem_formulation".into(),
                satisfied: true,
            }],
        };
        let err = rubric.build_assessment(&doc).unwrap_err();
        assert!(err.to_string().contains("qrl-13-uniform-1"));

        let doc = AssessmentDoc {
            rubric_version: "other".into(),
            drift_ppm: 0.0,
            checklist: vec![],
        };
        assert!(rubric.build_assessment(&doc).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_assessment() -> impl Strategy<Value = ReadinessAssessment> {
            (
                proptest::collection::vec((0.0f64..40.0, any::<bool>()), 1..16),
                0.0f64..300.0,
            )
                .prop_map(|(pairs, drift)| {
                    let (weights, bits): (Vec<f64>, Vec<bool>) = pairs.into_iter().unzip();
                    ReadinessAssessment {
                        checklist: bits
                            .into_iter()
                            .enumerate()
                            .map(|(i, satisfied)| ChecklistItem {
                                name: format!("item_{i}"),
                                satisfied,
                            })
                            .collect(),
                        weights,
                        drift_ppm: drift,
                        rubric_version: "prop".into(),
                    }
                })
        }

        fn arb_series(max_len: usize) -> impl Strategy<Value = QualityTimeSeries> {
            proptest::collection::vec((1e-3f64..1e3, 0.0f64..1.0), 0..max_len).prop_map(|v| {
                QualityTimeSeries::new(
                    v.into_iter()
                        .enumerate()
                        .map(|(i, (t, q))| QualityTimeEntry {
                            instance_id: i as u64,
                            time_s: t,
                            quality: q,
                        })
                        .collect(),
                )
                .unwrap()
            })
        }

        proptest! {
            #[test]
            fn scoring_is_deterministic(a in arb_assessment()) {
                let r1 = readiness_score(&a).unwrap();
                let r2 = readiness_score(&a).unwrap();
                prop_assert_eq!(r1, r2);
            }

            #[test]
            fn flipping_an_item_never_decreases_score_or_stage(
                a in arb_assessment(),
                idx in any::<proptest::sample::Index>(),
            ) {
                let before = readiness_score(&a).unwrap();
                let mut flipped = a.clone();
                let i = idx.index(flipped.checklist.len());
                flipped.checklist[i].satisfied = true;
                let after = readiness_score(&flipped).unwrap();
                prop_assert!(after.score >= before.score);
                prop_assert!(after.stage >= before.stage);
            }

            #[test]
            fn stage_map_is_nondecreasing(s1 in -100.0f64..200.0, s2 in -100.0f64..200.0) {
                let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
                prop_assert!(stage_map(lo) <= stage_map(hi));
            }

            #[test]
            fn drift_bonus_constant_within_brackets(
                d1 in 0.0f64..10.0,
                d2 in 10.0f64..100.0,
            ) {
                // within-bracket values score identically; the tighter
                // bracket never scores below the looser one
                let tight = drift_bonus(d1.max(1e-9)).unwrap();
                let loose = drift_bonus(d2.max(10.0 + 1e-9)).unwrap();
                prop_assert_eq!(tight, 10.0);
                prop_assert_eq!(loose, 6.0);
                prop_assert!(tight >= loose);
            }

            #[test]
            fn speedup_invariant_under_time_rescale(
                a in arb_series(12),
                b in arb_series(12),
                tau in 0.0f64..1.0,
                alpha in 1e-3f64..1e3,
            ) {
                let scale = |s: &QualityTimeSeries| {
                    QualityTimeSeries::new(
                        s.entries()
                            .iter()
                            .map(|e| QualityTimeEntry { time_s: e.time_s * alpha, ..*e })
                            .collect(),
                    )
                    .unwrap()
                };
                let base = normalized_speedup(&a, &b, tau).unwrap();
                let scaled = normalized_speedup(&scale(&a), &scale(&b), tau).unwrap();
                match (base.speedup, scaled.speedup) {
                    (Speedup::Ratio(x), Speedup::Ratio(y)) => {
                        prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(y.abs()));
                    }
                    (Speedup::Unreachable, Speedup::Unreachable) => {}
                    _ => prop_assert!(false, "reachability changed under rescaling"),
                }
            }

            #[test]
            fn dominance_bounds_speedup_by_one(
                pairs in proptest::collection::vec((1e-3f64..1e3, 0.0f64..1.0, 0.0f64..2.0), 1..12),
                tau in 0.0f64..1.0,
            ) {
                // paired entries with t_a <= t_b and equal quality
                let mut a = QualityTimeSeries::default();
                let mut b = QualityTimeSeries::default();
                for (i, (t, q, stretch)) in pairs.iter().enumerate() {
                    a.push(QualityTimeEntry { instance_id: i as u64, time_s: *t, quality: *q }).unwrap();
                    b.push(QualityTimeEntry { instance_id: i as u64, time_s: t * (1.0 + stretch), quality: *q }).unwrap();
                }
                if let Speedup::Ratio(v) = normalized_speedup(&a, &b, tau).unwrap().speedup {
                    prop_assert!(v <= 1.0 + 1e-12);
                }
            }
        }
    }
}
