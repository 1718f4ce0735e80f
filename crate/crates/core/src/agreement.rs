//! Empirical pairwise agreement between label columns.
//!
//! Agreement is kept as integer match counts over a shared sample count N;
//! ratios are produced by a single division at read time. That makes every
//! statistic built on top exact, order-independent and bit-reproducible.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::AnnotationMatrix;
use crate::error::{Error, Result};

/// Number of positions where `a` and `b` carry the same label.
pub fn agree_count(a: &[usize], b: &[usize]) -> Result<u64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::NoSamples);
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x == y).count() as u64)
}

/// Fraction of samples on which two labelers agree.
pub fn pairwise_agreement(a: &[usize], b: &[usize]) -> Result<f64> {
    let matches = agree_count(a, b)?;
    Ok(matches as f64 / a.len() as f64)
}

/// Symmetric K×K table of agreement counts with an implicit unit diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AgreementRepr", into = "AgreementRepr")]
pub struct AgreementMatrix {
    annotator_ids: Vec<String>,
    n: u64,
    counts: Vec<u64>,
}

impl AgreementMatrix {
    /// Builds a matrix from raw counts. Diagonal entries are ignored and set
    /// to `n`.
    pub fn from_counts(annotator_ids: Vec<String>, n: u64, counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = annotator_ids.len();
        if k < 2 {
            return Err(Error::TooFewAnnotators { found: k });
        }
        if n == 0 {
            return Err(Error::NoSamples);
        }
        if counts.len() != k || counts.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidParameter(format!(
                "agreement counts must be {k}×{k}"
            )));
        }
        let mut flat = vec![0; k * k];
        for i in 0..k {
            for j in 0..k {
                let c = if i == j { n } else { counts[i][j] };
                if c > n {
                    return Err(Error::InvalidParameter(format!(
                        "agreement count {c} exceeds N = {n} at ({i}, {j})"
                    )));
                }
                if counts[i][j] != counts[j][i] {
                    return Err(Error::InvalidParameter(format!(
                        "agreement counts not symmetric at ({i}, {j})"
                    )));
                }
                flat[i * k + j] = c;
            }
        }
        Ok(Self {
            annotator_ids,
            n,
            counts: flat,
        })
    }

    /// K annotators agreeing pairwise on exactly `count` of `n` samples.
    pub fn uniform(k: usize, n: u64, count: u64) -> Result<Self> {
        let ids = (1..=k).map(|i| format!("a{i}")).collect();
        Self::from_counts(ids, n, vec![vec![count; k]; k])
    }

    pub fn k(&self) -> usize {
        self.annotator_ids.len()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn annotator_ids(&self) -> &[String] {
        &self.annotator_ids
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.k() + j]
    }

    /// Agreement ratio; exactly 1 on the diagonal.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else {
            self.count(i, j) as f64 / self.n as f64
        }
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        let k = self.k();
        (0..k)
            .map(|i| (0..k).map(|j| self.value(i, j)).collect())
            .collect()
    }

    /// Σ_{i≠j} count(i, j), over ordered pairs.
    pub fn off_diagonal_count(&self) -> u128 {
        let k = self.k();
        let mut total = 0u128;
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    total += u128::from(self.count(i, j));
                }
            }
        }
        total
    }

    /// Mean off-diagonal agreement ratio.
    pub fn mean_off_diagonal(&self) -> f64 {
        let k = self.k() as u128;
        self.off_diagonal_count() as f64 / (k * (k - 1) * u128::from(self.n)) as f64
    }

    /// K×K CSV with the annotator ids as header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(&self.annotator_ids)?;
        for row in self.values() {
            out.write_record(row.iter().map(|v| v.to_string()))?;
        }
        out.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct AgreementRepr {
    annotator_ids: Vec<String>,
    n: u64,
    counts: Vec<Vec<u64>>,
    #[serde(default, skip_deserializing)]
    values: Vec<Vec<f64>>,
}

impl From<AgreementMatrix> for AgreementRepr {
    fn from(m: AgreementMatrix) -> Self {
        let k = m.k();
        Self {
            values: m.values(),
            counts: m.counts.chunks(k).map(<[u64]>::to_vec).collect(),
            annotator_ids: m.annotator_ids,
            n: m.n,
        }
    }
}

impl TryFrom<AgreementRepr> for AgreementMatrix {
    type Error = Error;

    fn try_from(r: AgreementRepr) -> Result<Self> {
        Self::from_counts(r.annotator_ids, r.n, r.counts)
    }
}

/// Pairwise agreement counts for every annotator pair of `m`.
pub fn agreement_matrix(m: &AnnotationMatrix) -> AgreementMatrix {
    let k = m.n_annotators();
    let n = m.n_samples() as u64;
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
        .collect();
    let upper: Vec<u64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            m.column(i)
                .iter()
                .zip(m.column(j))
                .filter(|(a, b)| a == b)
                .count() as u64
        })
        .collect();

    let mut counts = vec![0; k * k];
    for i in 0..k {
        counts[i * k + i] = n;
    }
    for (&(i, j), &c) in pairs.iter().zip(&upper) {
        counts[i * k + j] = c;
        counts[j * k + i] = c;
    }
    AgreementMatrix {
        annotator_ids: m.annotator_ids().to_vec(),
        n,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LabelVocabulary;

    #[test]
    fn pairwise_examples() {
        assert_eq!(
            pairwise_agreement(&[0, 1, 2, 0], &[0, 1, 2, 0]).unwrap(),
            1.0
        );
        assert_eq!(
            pairwise_agreement(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(),
            0.0
        );
        assert_eq!(
            pairwise_agreement(&[0, 1, 2, 0, 1], &[0, 1, 1, 0, 2]).unwrap(),
            0.6
        );
    }

    #[test]
    fn pairwise_errors() {
        assert!(matches!(
            pairwise_agreement(&[0, 1], &[0]),
            Err(Error::LengthMismatch { left: 2, right: 1 })
        ));
        assert!(matches!(
            pairwise_agreement(&[], &[]),
            Err(Error::NoSamples)
        ));
    }

    #[test]
    fn identical_columns() {
        let vocab = LabelVocabulary::numbered(3).unwrap();
        let m = AnnotationMatrix::from_columns(vocab, vec![vec![0, 2, 1], vec![0, 2, 1]]).unwrap();
        assert_eq!(
            agreement_matrix(&m).values(),
            vec![vec![1.0, 1.0], vec![1.0, 1.0]]
        );
    }

    #[test]
    fn constructed_three_annotator_counts() {
        // (1,2) differ on rows 0-1, (1,3) on rows 0-3, (2,3) on rows 1-3.
        let a1 = vec![0; 10];
        let a2 = vec![1, 1, 0, 0, 0, 0, 0, 0, 0, 0];
        let a3 = vec![1, 2, 1, 1, 0, 0, 0, 0, 0, 0];
        let vocab = LabelVocabulary::numbered(3).unwrap();
        let m = AnnotationMatrix::from_columns(vocab, vec![a1, a2, a3]).unwrap();
        let am = agreement_matrix(&m);
        assert_eq!(am.count(0, 1), 8);
        assert_eq!(am.count(0, 2), 6);
        assert_eq!(am.count(1, 2), 7);
        assert_eq!(am.value(0, 1), 0.8);
        assert_eq!(am.value(0, 2), 0.6);
        assert_eq!(am.value(1, 2), 0.7);
        assert_eq!(am.value(2, 1), 0.7);
        assert_eq!(am.value(1, 1), 1.0);
    }

    #[test]
    fn from_counts_validation() {
        let ids = vec!["a".to_string(), "b".to_string()];
        assert!(
            AgreementMatrix::from_counts(ids.clone(), 10, vec![vec![10, 3], vec![4, 10]]).is_err()
        );
        assert!(
            AgreementMatrix::from_counts(ids.clone(), 10, vec![vec![10, 11], vec![11, 10]])
                .is_err()
        );
        assert!(AgreementMatrix::from_counts(vec!["a".into()], 10, vec![vec![10]]).is_err());
        let m = AgreementMatrix::from_counts(ids, 10, vec![vec![0, 3], vec![3, 0]]).unwrap();
        assert_eq!(m.count(0, 0), 10);
    }

    #[test]
    fn csv_and_json_export() {
        let m = AgreementMatrix::uniform(2, 4, 3).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a1,a2\n1,0.75\n0.75,1\n");

        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"values\":[[1.0,0.75],[0.75,1.0]]"));
        let back: AgreementMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }
}
