//! Aggregate reference labels and average-annotator quantities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agreement::agree_count;
use crate::data::{bin_sentiment, AnnotationMatrix, LabelColumn, SentimentBin, SentimentScheme};
use crate::error::{Error, Result};

pub const AGGREGATE_ID: &str = "aggregate";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    LowestClassIndex,
}

/// How annotator labels are combined into one reference label per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AggregationRule {
    MajorityVote {
        #[serde(default)]
        tie_break: TieBreak,
    },
    /// Ordinal labels only: map each class to `class_values[class]`, average
    /// across annotators, then bin the mean with `scheme`.
    MeanThenBin {
        class_values: Vec<f64>,
        scheme: SentimentScheme,
    },
}

impl Default for AggregationRule {
    fn default() -> Self {
        AggregationRule::MajorityVote {
            tie_break: TieBreak::LowestClassIndex,
        }
    }
}

impl AggregationRule {
    pub fn describe(&self) -> String {
        match self {
            AggregationRule::MajorityVote { .. } => "majority_vote(lowest_class_index)".into(),
            AggregationRule::MeanThenBin { scheme, .. } => {
                let scheme = match scheme {
                    SentimentScheme::FiveClass => "five_class",
                    SentimentScheme::TwoClass => "two_class",
                };
                format!("mean_then_bin({scheme})")
            }
        }
    }
}

/// Per-row plurality label; ties go to the lowest class index.
pub fn majority_vote(m: &AnnotationMatrix) -> LabelColumn {
    let n_classes = m.n_classes();
    let labels = (0..m.n_samples())
        .into_par_iter()
        .map_init(
            || vec![0usize; n_classes],
            |votes, row| {
                votes.iter_mut().for_each(|v| *v = 0);
                for label in m.row(row) {
                    votes[label] += 1;
                }
                // first maximum wins
                let mut best = 0;
                for (class, &count) in votes.iter().enumerate().skip(1) {
                    if count > votes[best] {
                        best = class;
                    }
                }
                best
            },
        )
        .collect();
    LabelColumn::new(AGGREGATE_ID, labels)
}

/// Averages each row of `scores` (N rows of K values in [0, 1]) and bins
/// the mean. Neutral rows under the two-class scheme have no label and are
/// an error here; filter them first.
pub fn mean_then_bin(scores: &[Vec<f64>], scheme: SentimentScheme) -> Result<LabelColumn> {
    let labels = scores
        .iter()
        .enumerate()
        .map(|(row, values)| {
            if values.is_empty() {
                return Err(Error::InvalidParameter(format!("row {row} has no scores")));
            }
            if let Some(&bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::ScoreOutOfRange(bad));
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            match bin_sentiment(mean, scheme)? {
                SentimentBin::Class(c) => Ok(c),
                SentimentBin::Excluded => Err(Error::InvalidParameter(format!(
                    "row {row} has a neutral mean score {mean} and is excluded under the two-class scheme"
                ))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabelColumn::new(AGGREGATE_ID, labels))
}

pub fn aggregate(m: &AnnotationMatrix, rule: &AggregationRule) -> Result<LabelColumn> {
    match rule {
        AggregationRule::MajorityVote { .. } => Ok(majority_vote(m)),
        AggregationRule::MeanThenBin {
            class_values,
            scheme,
        } => {
            if class_values.len() != m.n_classes() {
                return Err(Error::InvalidParameter(format!(
                    "mean_then_bin needs one numeric value per class ({} classes, {} values)",
                    m.n_classes(),
                    class_values.len()
                )));
            }
            if scheme.n_classes() != m.n_classes() {
                return Err(Error::InvalidParameter(format!(
                    "{} bins do not match a vocabulary of {} classes",
                    scheme.n_classes(),
                    m.n_classes()
                )));
            }
            let scores: Vec<Vec<f64>> = (0..m.n_samples())
                .map(|row| m.row(row).map(|label| class_values[label]).collect())
                .collect();
            mean_then_bin(&scores, *scheme)
        }
    }
}

/// Mean oracle accuracy over the K annotators: the accuracy of an annotator
/// picked uniformly at random.
pub fn average_annotator_accuracy(m: &AnnotationMatrix, oracle: &[usize]) -> Result<f64> {
    let mut correct = 0u128;
    for column in m.columns() {
        correct += u128::from(agree_count(column, oracle)?);
    }
    let total = (m.n_annotators() * m.n_samples()) as u128;
    Ok(correct as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LabelVocabulary;

    fn matrix(n_classes: usize, columns: Vec<Vec<usize>>) -> AnnotationMatrix {
        AnnotationMatrix::from_columns(LabelVocabulary::numbered(n_classes).unwrap(), columns)
            .unwrap()
    }

    #[test]
    fn strict_majority() {
        // E=0, N=1, C=2; row [E,E,C,N,E]
        let m = matrix(3, vec![vec![0], vec![0], vec![2], vec![1], vec![0]]);
        assert_eq!(majority_vote(&m).labels, vec![0]);
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let m = matrix(3, vec![vec![0, 2, 2], vec![1, 1, 0]]);
        assert_eq!(majority_vote(&m).labels, vec![0, 1, 0]);
    }

    #[test]
    fn identical_annotators_are_reproduced() {
        let col = vec![2, 0, 1, 1, 2];
        let m = matrix(3, vec![col.clone(); 4]);
        let agg = majority_vote(&m);
        assert_eq!(agg.labels, col);
        assert_eq!(agg.source_id, AGGREGATE_ID);
    }

    #[test]
    fn mean_then_bin_examples() {
        let five = SentimentScheme::FiveClass;
        assert_eq!(
            mean_then_bin(&[vec![0.1, 0.1, 0.1]], five).unwrap().labels,
            vec![0]
        );
        assert_eq!(
            mean_then_bin(&[vec![0.3, 0.5, 0.7]], five).unwrap().labels,
            vec![2]
        );
        assert_eq!(
            mean_then_bin(&[vec![1.0, 1.0, 1.0]], five).unwrap().labels,
            vec![4]
        );
        assert!(matches!(
            mean_then_bin(&[vec![0.3, 1.2]], five),
            Err(Error::ScoreOutOfRange(_))
        ));
        assert!(mean_then_bin(&[vec![0.45, 0.55]], SentimentScheme::TwoClass).is_err());
    }

    #[test]
    fn aggregate_mean_then_bin_on_ordinal_vocabulary() {
        let m = matrix(5, vec![vec![0, 4, 1], vec![1, 4, 3], vec![0, 3, 2]]);
        let rule = AggregationRule::MeanThenBin {
            class_values: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            scheme: SentimentScheme::FiveClass,
        };
        // row means: 0.1667, 0.8333, 0.5
        assert_eq!(aggregate(&m, &rule).unwrap().labels, vec![0, 4, 2]);

        let bad = AggregationRule::MeanThenBin {
            class_values: vec![0.0, 1.0],
            scheme: SentimentScheme::TwoClass,
        };
        assert!(aggregate(&m, &bad).is_err());
    }

    #[test]
    fn average_accuracy() {
        let oracle = vec![0; 10];
        let m = matrix(2, vec![vec![0; 10], vec![0; 10]]);
        assert_eq!(average_annotator_accuracy(&m, &oracle).unwrap(), 1.0);

        let mut p8 = vec![0; 10];
        p8[0] = 1;
        p8[1] = 1;
        let mut p6 = vec![0; 10];
        p6[..4].fill(1);
        let m = matrix(2, vec![p8, p6]);
        assert_eq!(average_annotator_accuracy(&m, &oracle).unwrap(), 0.7);
        assert!(average_annotator_accuracy(&m, &oracle[..3]).is_err());
    }

    #[test]
    fn rule_serde() {
        let json = serde_json::to_string(&AggregationRule::default()).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"majority_vote","tie_break":"lowest_class_index"}"#
        );
        let rule: AggregationRule = serde_json::from_str(r#"{"kind":"majority_vote"}"#).unwrap();
        assert_eq!(rule, AggregationRule::default());
    }
}
