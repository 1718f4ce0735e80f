//! Assumption checks that need oracle labels.
//!
//! The upper bound needs annotators to be positively correlated in being
//! right: `P(ℓ_i = ℓ⋆ | ℓ_j = ℓ⋆) ≥ P(ℓ_i = ℓ⋆)`. The lower bound needs the
//! model, on rows where the reference is wrong, to be right at least as
//! often as it is wrong. Here the wrong side is summed over all incorrect
//! labels, which is stricter than comparing against any single one.
//!
//! All frequencies are kept as integer counts; verdicts compare rationals
//! by cross-multiplication, so they never depend on rounding.

use serde::{Deserialize, Serialize};

use crate::agreement::{agree_count, pairwise_agreement};
use crate::data::{AnnotationMatrix, LabelColumn};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    /// Empty conditioning event.
    Undefined,
}

impl Verdict {
    fn from_cmp(support: u128, holds: bool) -> Self {
        match (support, holds) {
            (0, _) => Verdict::Undefined,
            (_, true) => Verdict::Holds,
            (_, false) => Verdict::Violated,
        }
    }
}

/// `P̂(ℓ_i = ℓ⋆ | ℓ_j = ℓ⋆)` against `P̂(ℓ_i = ℓ⋆)` for one ordered pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub i: String,
    pub j: String,
    /// Conditional frequency; `None` when annotator j is never right.
    pub lhs: Option<f64>,
    pub rhs: f64,
    /// Rows where both i and j are right.
    pub joint: u64,
    /// Rows where j is right.
    pub support: u64,
    pub verdict: Verdict,
}

/// All ordered pairs merged into one conditional frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledCheck {
    pub lhs: Option<f64>,
    /// Average annotator oracle accuracy.
    pub rhs: f64,
    pub joint: u128,
    pub support: u128,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveCorrelationReport {
    pub pairs: Vec<PairCheck>,
    pub pooled: PooledCheck,
}

impl PositiveCorrelationReport {
    pub fn all_hold(&self) -> bool {
        self.pooled.verdict != Verdict::Violated
            && self.pairs.iter().all(|p| p.verdict != Verdict::Violated)
    }
}

/// Model behaviour on the rows where the reference is wrong.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCheck {
    pub reference_id: String,
    pub model_id: String,
    /// `P̂(ℓ_b = ℓ⋆ | ℓ_a ≠ ℓ⋆)`
    pub lhs: Option<f64>,
    /// `Σ_{ℓ× ≠ ℓ⋆} P̂(ℓ_b = ℓ× | ℓ_a ≠ ℓ⋆)`
    pub rhs_sum: Option<f64>,
    pub correct: u64,
    pub incorrect: u64,
    /// Rows where the reference is wrong; `correct + incorrect == support`.
    pub support: u64,
    pub verdict: Verdict,
}

pub fn oracle_accuracy(labels: &[usize], oracle: &[usize]) -> Result<f64> {
    pairwise_agreement(labels, oracle)
}

pub fn check_positive_correlation(
    m: &AnnotationMatrix,
    oracle: &[usize],
) -> Result<PositiveCorrelationReport> {
    m.check_column(oracle)?;
    let k = m.n_annotators();
    let n = m.n_samples() as u64;
    let correct: Vec<Vec<bool>> = m
        .columns()
        .iter()
        .map(|c| c.iter().zip(oracle).map(|(a, o)| a == o).collect())
        .collect();
    let correct_count: Vec<u64> = correct
        .iter()
        .map(|c| c.iter().filter(|&&x| x).count() as u64)
        .collect();

    let mut pairs = Vec::with_capacity(k * (k - 1));
    let (mut pooled_joint, mut pooled_support) = (0u128, 0u128);
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let joint = correct[i]
                .iter()
                .zip(&correct[j])
                .filter(|(a, b)| **a && **b)
                .count() as u64;
            let support = correct_count[j];
            pooled_joint += u128::from(joint);
            pooled_support += u128::from(support);
            // joint/support ≥ correct_i/n
            let holds = u128::from(joint) * u128::from(n)
                >= u128::from(correct_count[i]) * u128::from(support);
            pairs.push(PairCheck {
                i: m.annotator_ids()[i].clone(),
                j: m.annotator_ids()[j].clone(),
                lhs: (support > 0).then(|| joint as f64 / support as f64),
                rhs: correct_count[i] as f64 / n as f64,
                joint,
                support,
                verdict: Verdict::from_cmp(u128::from(support), holds),
            });
        }
    }

    let total_correct: u128 = correct_count.iter().map(|&c| u128::from(c)).sum();
    let trials = (k as u128) * u128::from(n);
    let pooled = PooledCheck {
        lhs: (pooled_support > 0).then(|| pooled_joint as f64 / pooled_support as f64),
        rhs: total_correct as f64 / trials as f64,
        joint: pooled_joint,
        support: pooled_support,
        verdict: Verdict::from_cmp(
            pooled_support,
            pooled_joint * trials >= total_correct * pooled_support,
        ),
    };
    Ok(PositiveCorrelationReport { pairs, pooled })
}

pub fn check_lower_bound_assumption(
    reference: &LabelColumn,
    model: &LabelColumn,
    oracle: &[usize],
) -> Result<LowerBoundCheck> {
    let len = oracle.len();
    for column in [&reference.labels, &model.labels] {
        if column.len() != len {
            return Err(Error::LengthMismatch {
                left: column.len(),
                right: len,
            });
        }
    }
    let (mut correct, mut incorrect) = (0u64, 0u64);
    for ((&a, &b), &star) in reference.labels.iter().zip(&model.labels).zip(oracle) {
        if a != star {
            if b == star {
                correct += 1;
            } else {
                incorrect += 1;
            }
        }
    }
    let support = correct + incorrect;
    let ratio = |x: u64| (support > 0).then(|| x as f64 / support as f64);
    Ok(LowerBoundCheck {
        reference_id: reference.source_id.clone(),
        model_id: model.source_id.clone(),
        lhs: ratio(correct),
        rhs_sum: ratio(incorrect),
        correct,
        incorrect,
        support,
        verdict: Verdict::from_cmp(u128::from(support), correct >= incorrect),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelerAccuracy {
    pub id: String,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub positive_correlation: PositiveCorrelationReport,
    pub lower_bound_check: Option<LowerBoundCheck>,
    pub annotator_accuracy: Vec<LabelerAccuracy>,
    pub average_annotator_accuracy: f64,
    pub reference_accuracy: f64,
    pub model_accuracy: Option<f64>,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.positive_correlation.all_hold()
            && self
                .lower_bound_check
                .as_ref()
                .is_none_or(|c| c.verdict != Verdict::Violated)
    }
}

/// Both assumption checks plus every labeler's oracle accuracy.
pub fn assumption_report(
    m: &AnnotationMatrix,
    oracle: &[usize],
    reference: &LabelColumn,
    model: Option<&LabelColumn>,
) -> Result<AssumptionReport> {
    let positive_correlation = check_positive_correlation(m, oracle)?;
    let lower_bound_check = model
        .map(|model| check_lower_bound_assumption(reference, model, oracle))
        .transpose()?;
    let annotator_accuracy = m
        .columns()
        .iter()
        .zip(m.annotator_ids())
        .map(|(c, id)| {
            Ok(LabelerAccuracy {
                id: id.clone(),
                accuracy: oracle_accuracy(c, oracle)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total: u64 = m
        .columns()
        .iter()
        .map(|c| agree_count(c, oracle))
        .sum::<Result<u64>>()?;
    Ok(AssumptionReport {
        positive_correlation,
        lower_bound_check,
        annotator_accuracy,
        average_annotator_accuracy: total as f64 / (m.n_annotators() * m.n_samples()) as f64,
        reference_accuracy: oracle_accuracy(&reference.labels, oracle)?,
        model_accuracy: model
            .map(|c| oracle_accuracy(&c.labels, oracle))
            .transpose()?,
    })
}
