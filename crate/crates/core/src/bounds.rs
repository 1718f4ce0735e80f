//! Upper bounds on the average annotator's oracle accuracy and the lower
//! bound on a model's oracle accuracy.
//!
//! Both upper bounds are square roots of an average agreement: the
//! theoretical bound averages all K² ordered pairs (diagonal counted as 1),
//! the empirical bound averages only the K(K−1) off-diagonal pairs. The
//! lower bound is the agreement between the model and a reference column,
//! usually the majority-vote aggregate.

use serde::{Deserialize, Serialize};

use crate::agreement::{agreement_matrix, pairwise_agreement, AgreementMatrix};
use crate::data::{AnnotationMatrix, LabelColumn};
use crate::error::{Error, Result};

/// `sqrt((1/K²) Σ_i Σ_j P(ℓ_i = ℓ_j))` with the diagonal counted as 1.
pub fn theoretical_upper_bound(am: &AgreementMatrix) -> f64 {
    let k = am.k() as u128;
    let n = u128::from(am.n());
    let numerator = k * n + am.off_diagonal_count();
    let denominator = k * k * n;
    (numerator as f64 / denominator as f64).sqrt()
}

/// `sqrt((1/(K(K−1))) Σ_{i≠j} P(ℓ_i = ℓ_j))`.
pub fn empirical_upper_bound(am: &AgreementMatrix) -> f64 {
    am.mean_off_diagonal().sqrt()
}

/// Both upper bounds for K annotators whose mean off-diagonal agreement is
/// `mean_agreement`. Returns `(theoretical, empirical)`.
pub fn upper_bounds_from_mean_agreement(k: usize, mean_agreement: f64) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::TooFewAnnotators { found: k });
    }
    if !(0.0..=1.0).contains(&mean_agreement) {
        return Err(Error::InvalidParameter(format!(
            "mean agreement {mean_agreement} outside [0, 1]"
        )));
    }
    let k = k as f64;
    let theoretical = ((k + k * (k - 1.0) * mean_agreement) / (k * k)).sqrt();
    Ok((theoretical, mean_agreement.sqrt()))
}

/// Ratio of the theoretical to the empirical upper bound when every pair of
/// K annotators agrees with probability `p`:
/// `sqrt((1 + (K−1)p) / (Kp))`.
///
/// The ratio tends to 1 as K grows as long as `p ≥ 1/N_c`.
pub fn convergence_ratio(k: usize, p: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::TooFewAnnotators { found: k });
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "uniform agreement must lie in (0, 1], got {p}"
        )));
    }
    let k = k as f64;
    Ok(((1.0 + (k - 1.0) * p) / (k * p)).sqrt())
}

/// Agreement between the reference column and the model: a lower bound on
/// the model's oracle accuracy when the reference's errors are not matched
/// by the model more often than its correct labels.
pub fn lower_bound(reference: &[usize], model: &[usize]) -> Result<f64> {
    pairwise_agreement(reference, model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsStatus {
    /// Positive margin: worth certifying.
    Candidate,
    NotCandidate,
    /// No model column, upper bounds only.
    BoundsOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub u_theoretical: f64,
    pub u_empirical: f64,
    pub l_model: Option<f64>,
    /// `l_model − u_empirical`.
    pub margin: Option<f64>,
    /// `l_model > u_empirical` (marked † in tables).
    pub exceeds_empirical: Option<bool>,
    /// `l_model > u_theoretical` (marked ‡ in tables).
    pub exceeds_theoretical: Option<bool>,
    pub k: usize,
    pub n: usize,
    pub reference_id: Option<String>,
    pub aggregation: Option<String>,
    pub status: BoundsStatus,
}

/// Upper bounds from `m`, and, when a model column is given, the lower
/// bound against `reference` and the margin.
pub fn bounds_report(
    m: &AnnotationMatrix,
    model: Option<&LabelColumn>,
    reference: &LabelColumn,
    aggregation: Option<&str>,
) -> Result<BoundsReport> {
    m.check_column(&reference.labels)?;
    let am = agreement_matrix(m);
    let u_theoretical = theoretical_upper_bound(&am);
    let u_empirical = empirical_upper_bound(&am);
    if u_empirical > u_theoretical {
        return Err(Error::Invariant(format!(
            "empirical upper bound {u_empirical} exceeds theoretical {u_theoretical}"
        )));
    }

    let l_model = match model {
        Some(model) => {
            m.check_column(&model.labels)?;
            Some(lower_bound(&reference.labels, &model.labels)?)
        }
        None => None,
    };
    let margin = l_model.map(|l| l - u_empirical);
    let status = match margin {
        None => BoundsStatus::BoundsOnly,
        Some(d) if d > 0.0 => BoundsStatus::Candidate,
        Some(_) => BoundsStatus::NotCandidate,
    };

    Ok(BoundsReport {
        u_theoretical,
        u_empirical,
        l_model,
        margin,
        exceeds_empirical: l_model.map(|l| l > u_empirical),
        exceeds_theoretical: l_model.map(|l| l > u_theoretical),
        k: m.n_annotators(),
        n: m.n_samples(),
        reference_id: model.map(|_| reference.source_id.clone()),
        aggregation: aggregation.map(str::to_string),
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LabelVocabulary;

    #[test]
    fn perfect_agreement_gives_one() {
        let am = AgreementMatrix::uniform(4, 7, 7).unwrap();
        assert_eq!(theoretical_upper_bound(&am), 1.0);
        assert_eq!(empirical_upper_bound(&am), 1.0);
    }

    #[test]
    fn reference_upper_bound_pairs() {
        // Off-diagonal agreement back-derived as the square of the empirical
        // bound; N = 10^6 makes it an exact count.
        for (k, u_e, u_t) in [(3, 0.939, 0.960), (3, 0.660, 0.790), (5, 0.879, 0.904)] {
            let count = (u_e * u_e * 1e6_f64).round() as u64;
            let am = AgreementMatrix::uniform(k, 1_000_000, count).unwrap();
            assert!((empirical_upper_bound(&am) - u_e).abs() < 1e-9);
            assert!(
                (theoretical_upper_bound(&am) - u_t).abs() < 1e-3,
                "{k} {u_e}"
            );
        }
    }

    #[test]
    fn convergence_ratio_examples() {
        assert_eq!(convergence_ratio(7, 1.0).unwrap(), 1.0);
        assert!((convergence_ratio(10, 0.8).unwrap() - (8.2f64 / 8.0).sqrt()).abs() < 1e-15);
        assert!((convergence_ratio(10, 0.8).unwrap() - 1.0124).abs() < 1e-4);
        assert!((convergence_ratio(2, 0.5).unwrap() - 1.2247).abs() < 1e-4);
        assert!(convergence_ratio(3, 0.0).is_err());
        assert!(convergence_ratio(3, -0.1).is_err());
        assert!(convergence_ratio(1, 0.5).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(lower_bound(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(lower_bound(&[0, 1, 0, 1], &[0, 1, 1, 1]).unwrap(), 0.75);
        assert!(lower_bound(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn report_with_model_equal_to_reference_annotator() {
        let vocab = LabelVocabulary::numbered(3).unwrap();
        let m = AnnotationMatrix::from_columns(
            vocab,
            vec![vec![0, 1, 2, 0], vec![0, 1, 1, 0], vec![0, 2, 2, 1]],
        )
        .unwrap();
        let a1 = m.annotator_column(0);
        let report = bounds_report(&m, Some(&a1), &a1, None).unwrap();
        assert_eq!(report.l_model, Some(1.0));
        assert_eq!(report.margin, Some(1.0 - report.u_empirical));
        assert_eq!(report.reference_id.as_deref(), Some("a1"));
        assert_eq!(report.status, BoundsStatus::Candidate);
        assert!(report.u_empirical <= report.u_theoretical);
    }

    #[test]
    fn report_without_model_is_bounds_only() {
        let vocab = LabelVocabulary::numbered(2).unwrap();
        let m = AnnotationMatrix::from_columns(vocab, vec![vec![0, 1], vec![0, 0]]).unwrap();
        let a1 = m.annotator_column(0);
        let report = bounds_report(&m, None, &a1, None).unwrap();
        assert_eq!(report.status, BoundsStatus::BoundsOnly);
        assert!(report.l_model.is_none() && report.margin.is_none());
        assert!(report.reference_id.is_none());
        assert_eq!(report.u_empirical, 0.5f64.sqrt());
        assert_eq!(report.u_theoretical, 0.75f64.sqrt());
    }
}
