//! Label vocabularies, annotation matrices and CSV ingestion.
//!
//! Annotation CSV layout:
//!
//! ```text
//! sample_id,<annotator_1>,...,<annotator_K>[,model][,oracle][,aggregate]
//! ```
//!
//! The first column is always the sample id. The reserved column names
//! `model`, `oracle` and `aggregate` are loaded as separate label columns;
//! every other column is an annotator. Labels are arbitrary non-empty
//! strings and are encoded as 0-based indices into one shared
//! [`LabelVocabulary`].

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MODEL_COLUMN: &str = "model";
pub const ORACLE_COLUMN: &str = "oracle";
pub const AGGREGATE_COLUMN: &str = "aggregate";

/// Ordered set of class identifiers. A class's position is its index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelVocabulary {
    classes: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl LabelVocabulary {
    pub fn new<I, S>(classes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let classes: Vec<String> = classes.into_iter().map(Into::into).collect();
        if classes.len() < 2 {
            return Err(Error::TooFewClasses {
                found: classes.len(),
            });
        }
        let mut index = HashMap::with_capacity(classes.len());
        for (i, class) in classes.iter().enumerate() {
            if index.insert(class.clone(), i).is_some() {
                return Err(Error::DuplicateClass(class.clone()));
            }
        }
        Ok(Self { classes, index })
    }

    /// Vocabulary `c0, c1, ...` (zero-padded so lexical and numeric order agree).
    pub fn numbered(n_classes: usize) -> Result<Self> {
        let width = n_classes.saturating_sub(1).to_string().len();
        Self::new((0..n_classes).map(|i| format!("c{i:0width$}")))
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn index_of(&self, class: &str) -> Option<usize> {
        self.index.get(class).copied()
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.classes.get(index).map(String::as_str)
    }
}

impl TryFrom<Vec<String>> for LabelVocabulary {
    type Error = Error;

    fn try_from(classes: Vec<String>) -> Result<Self> {
        Self::new(classes)
    }
}

impl From<LabelVocabulary> for Vec<String> {
    fn from(vocab: LabelVocabulary) -> Self {
        vocab.classes
    }
}

/// One labeler's output over all N samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelColumn {
    pub source_id: String,
    pub labels: Vec<usize>,
}

impl LabelColumn {
    pub fn new(source_id: impl Into<String>, labels: Vec<usize>) -> Self {
        Self {
            source_id: source_id.into(),
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }
}

impl AsRef<[usize]> for LabelColumn {
    fn as_ref(&self) -> &[usize] {
        &self.labels
    }
}

/// N samples labelled by K ≥ 2 annotators, stored column-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationMatrix {
    vocab: LabelVocabulary,
    annotator_ids: Vec<String>,
    sample_ids: Vec<String>,
    columns: Vec<Vec<usize>>,
}

impl AnnotationMatrix {
    pub fn new(
        vocab: LabelVocabulary,
        annotator_ids: Vec<String>,
        sample_ids: Vec<String>,
        columns: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if columns.len() < 2 {
            return Err(Error::TooFewAnnotators {
                found: columns.len(),
            });
        }
        if annotator_ids.len() != columns.len() {
            return Err(Error::LengthMismatch {
                left: annotator_ids.len(),
                right: columns.len(),
            });
        }
        let n = sample_ids.len();
        if n == 0 {
            return Err(Error::NoSamples);
        }
        for column in &columns {
            check_column(column, n, vocab.len())?;
        }
        let mut seen = BTreeSet::new();
        for id in &annotator_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateColumn(id.clone()));
            }
        }
        Ok(Self {
            vocab,
            annotator_ids,
            sample_ids,
            columns,
        })
    }

    /// Builds a matrix with generated ids (`a1..aK`, `s0..`).
    pub fn from_columns(vocab: LabelVocabulary, columns: Vec<Vec<usize>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        let ids = (1..=columns.len()).map(|k| format!("a{k}")).collect();
        let samples = (0..n).map(|i| format!("s{i}")).collect();
        Self::new(vocab, ids, samples, columns)
    }

    pub fn vocab(&self) -> &LabelVocabulary {
        &self.vocab
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_annotators(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.vocab.len()
    }

    pub fn annotator_ids(&self) -> &[String] {
        &self.annotator_ids
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn column(&self, annotator: usize) -> &[usize] {
        &self.columns[annotator]
    }

    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    pub fn annotator_column(&self, annotator: usize) -> LabelColumn {
        LabelColumn::new(
            self.annotator_ids[annotator].clone(),
            self.columns[annotator].clone(),
        )
    }

    pub fn position_of(&self, annotator_id: &str) -> Option<usize> {
        self.annotator_ids.iter().position(|id| id == annotator_id)
    }

    pub fn row(&self, sample: usize) -> impl Iterator<Item = usize> + '_ {
        self.columns.iter().map(move |c| c[sample])
    }

    /// Matrix restricted to the first `k` annotators (k ≥ 2).
    pub fn first_annotators(&self, k: usize) -> Result<Self> {
        if k > self.n_annotators() {
            return Err(Error::InvalidParameter(format!(
                "requested {k} annotators but only {} are available",
                self.n_annotators()
            )));
        }
        Self::new(
            self.vocab.clone(),
            self.annotator_ids[..k].to_vec(),
            self.sample_ids.clone(),
            self.columns[..k].to_vec(),
        )
    }

    pub fn check_column(&self, column: &[usize]) -> Result<()> {
        check_column(column, self.n_samples(), self.n_classes())
    }
}

fn check_column(column: &[usize], n: usize, n_classes: usize) -> Result<()> {
    if column.len() != n {
        return Err(Error::LengthMismatch {
            left: column.len(),
            right: n,
        });
    }
    if let Some(&bad) = column.iter().find(|&&l| l >= n_classes) {
        return Err(Error::LabelOutOfRange {
            index: bad,
            size: n_classes,
        });
    }
    Ok(())
}

/// What to do with rows that have an empty cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    Reject,
    Drop,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub missing: MissingPolicy,
    /// Fixed vocabulary; labels outside it are an error. When absent the
    /// vocabulary is the sorted union of observed labels.
    pub vocabulary: Option<LabelVocabulary>,
}

/// Parsed annotation file.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub matrix: AnnotationMatrix,
    pub model: Option<LabelColumn>,
    pub oracle: Option<LabelColumn>,
    pub aggregate: Option<LabelColumn>,
    /// Rows removed under [`MissingPolicy::Drop`].
    pub dropped_rows: usize,
}

impl Dataset {
    /// Looks up a label column by name: an annotator id or a reserved column.
    pub fn column_by_name(&self, name: &str) -> Result<LabelColumn> {
        let reserved = match name {
            MODEL_COLUMN => self.model.as_ref(),
            ORACLE_COLUMN => self.oracle.as_ref(),
            AGGREGATE_COLUMN => self.aggregate.as_ref(),
            _ => None,
        };
        if let Some(column) = reserved {
            return Ok(column.clone());
        }
        self.matrix
            .position_of(name)
            .map(|i| self.matrix.annotator_column(i))
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }
}

pub fn ingest_dataset(path: impl AsRef<Path>, options: &IngestOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_dataset(file, options)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Annotator,
    Model,
    Oracle,
    Aggregate,
}

pub fn read_dataset<R: Read>(reader: R, options: &IngestOptions) -> Result<Dataset> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = csv.headers()?.clone();
    if header.is_empty() {
        return Err(Error::EmptyFile);
    }

    let mut names = BTreeSet::new();
    let roles: Vec<(Role, String)> = header
        .iter()
        .skip(1)
        .map(|name| {
            if !names.insert(name.to_string()) {
                return Err(Error::DuplicateColumn(name.to_string()));
            }
            let role = match name {
                MODEL_COLUMN => Role::Model,
                ORACLE_COLUMN => Role::Oracle,
                AGGREGATE_COLUMN => Role::Aggregate,
                _ => Role::Annotator,
            };
            Ok((role, name.to_string()))
        })
        .collect::<Result<_>>()?;
    let k = roles.iter().filter(|(r, _)| *r == Role::Annotator).count();
    if k < 2 {
        return Err(Error::TooFewAnnotators { found: k });
    }

    let mut sample_ids = Vec::new();
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); roles.len()];
    let mut dropped_rows = 0;
    for (row, record) in csv.records().enumerate() {
        let record = record?;
        // 1-based data row number, header excluded.
        let row = row + 1;
        let missing = record
            .iter()
            .skip(1)
            .position(str::is_empty)
            .map(|i| roles[i].1.clone());
        if let Some(column) = missing {
            match options.missing {
                MissingPolicy::Reject => return Err(Error::IncompleteRow { row, column }),
                MissingPolicy::Drop => {
                    dropped_rows += 1;
                    continue;
                }
            }
        }
        sample_ids.push(record.get(0).unwrap_or_default().to_string());
        for (cells, value) in raw.iter_mut().zip(record.iter().skip(1)) {
            cells.push(value.to_string());
        }
    }
    if sample_ids.is_empty() {
        return Err(Error::EmptyFile);
    }

    let vocab = match &options.vocabulary {
        Some(v) => v.clone(),
        None => {
            let observed: BTreeSet<&str> = raw.iter().flatten().map(String::as_str).collect();
            LabelVocabulary::new(observed)?
        }
    };

    let mut annotator_ids = Vec::with_capacity(k);
    let mut columns = Vec::with_capacity(k);
    let mut model = None;
    let mut oracle = None;
    let mut aggregate = None;
    for ((role, name), cells) in roles.into_iter().zip(raw) {
        let labels = cells
            .iter()
            .enumerate()
            .map(|(row, label)| {
                vocab.index_of(label).ok_or_else(|| Error::UnknownLabel {
                    label: label.clone(),
                    row: row + 1,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        match role {
            Role::Annotator => {
                annotator_ids.push(name);
                columns.push(labels);
            }
            Role::Model => model = Some(LabelColumn::new(name, labels)),
            Role::Oracle => oracle = Some(LabelColumn::new(name, labels)),
            Role::Aggregate => aggregate = Some(LabelColumn::new(name, labels)),
        }
    }

    Ok(Dataset {
        matrix: AnnotationMatrix::new(vocab, annotator_ids, sample_ids, columns)?,
        model,
        oracle,
        aggregate,
        dropped_rows,
    })
}

/// Writes a dataset in the annotation CSV layout. Extra columns are appended
/// after the annotators in the order given.
pub fn write_dataset<W: Write>(
    writer: W,
    matrix: &AnnotationMatrix,
    extra: &[&LabelColumn],
) -> Result<()> {
    for column in extra {
        matrix.check_column(&column.labels)?;
    }
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["sample_id"];
    header.extend(matrix.annotator_ids().iter().map(String::as_str));
    header.extend(extra.iter().map(|c| c.source_id.as_str()));
    out.write_record(&header)?;

    let vocab = matrix.vocab();
    let name = |i: usize| vocab.name(i).unwrap_or_default();
    let mut record = Vec::with_capacity(header.len());
    for (n, sample) in matrix.sample_ids().iter().enumerate() {
        record.clear();
        record.push(sample.as_str());
        record.extend(matrix.row(n).map(name));
        record.extend(extra.iter().map(|c| name(c.labels[n])));
        out.write_record(&record)?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Sentiment binning scheme for scores in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentScheme {
    FiveClass,
    TwoClass,
}

impl SentimentScheme {
    pub fn n_classes(self) -> usize {
        match self {
            SentimentScheme::FiveClass => 5,
            SentimentScheme::TwoClass => 2,
        }
    }

    pub fn vocabulary(self) -> LabelVocabulary {
        let names: &[&str] = match self {
            SentimentScheme::FiveClass => &[
                "very_negative",
                "negative",
                "neutral",
                "positive",
                "very_positive",
            ],
            SentimentScheme::TwoClass => &["negative", "positive"],
        };
        LabelVocabulary::new(names.iter().copied()).expect("static vocabulary is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentBin {
    Class(usize),
    /// Neutral score under the two-class scheme.
    Excluded,
}

/// Five-class bins are `[0,0.2]`, `(0.2,0.4]`, `(0.4,0.6]`, `(0.6,0.8]`,
/// `(0.8,1]`. Two-class uses the same edges: `≤ 0.4` negative, `> 0.6`
/// positive, the neutral band in between is excluded.
pub fn bin_sentiment(score: f64, scheme: SentimentScheme) -> Result<SentimentBin> {
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::ScoreOutOfRange(score));
    }
    let bin = match scheme {
        SentimentScheme::FiveClass => {
            let class = [0.2, 0.4, 0.6, 0.8]
                .iter()
                .take_while(|&&edge| score > edge)
                .count();
            SentimentBin::Class(class)
        }
        SentimentScheme::TwoClass if score <= 0.4 => SentimentBin::Class(0),
        SentimentScheme::TwoClass if score > 0.6 => SentimentBin::Class(1),
        SentimentScheme::TwoClass => SentimentBin::Excluded,
    };
    Ok(bin)
}

#[derive(Debug, Deserialize)]
struct SentimentRow {
    sample_id: String,
    score: f64,
}

/// Reads a `sample_id,score` file.
pub fn read_sentiment_scores<R: Read>(reader: R) -> Result<Vec<(String, f64)>> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for row in csv.deserialize() {
        let row: SentimentRow = row?;
        if !(0.0..=1.0).contains(&row.score) {
            return Err(Error::ScoreOutOfRange(row.score));
        }
        out.push((row.sample_id, row.score));
    }
    if out.is_empty() {
        return Err(Error::EmptyFile);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, missing: MissingPolicy) -> Result<Dataset> {
        read_dataset(
            text.as_bytes(),
            &IngestOptions {
                missing,
                vocabulary: None,
            },
        )
    }

    #[test]
    fn parses_annotators_and_model() {
        let ds = read(
            "sample_id,a1,a2,model\n1,E,N,C\n2,E,E,E\n3,C,N,N\n",
            MissingPolicy::Reject,
        )
        .unwrap();
        assert_eq!(ds.matrix.n_samples(), 3);
        assert_eq!(ds.matrix.n_annotators(), 2);
        assert_eq!(ds.matrix.n_classes(), 3);
        assert!(ds.model.is_some());
        assert!(ds.oracle.is_none());
        // sorted vocabulary: C, E, N
        assert_eq!(ds.matrix.column(0), &[1, 1, 0]);
        assert_eq!(ds.model.unwrap().labels, vec![0, 1, 2]);
    }

    #[test]
    fn incomplete_row_rejected_or_dropped() {
        let text = "sample_id,a1,a2\n1,E,N\n2,,E\n3,C,N\n";
        let err = read(text, MissingPolicy::Reject).unwrap_err();
        assert!(err.to_string().contains("incomplete row"), "{err}");
        assert!(matches!(err, Error::IncompleteRow { row: 2, .. }));

        let ds = read(text, MissingPolicy::Drop).unwrap();
        assert_eq!(ds.matrix.n_samples(), 2);
        assert_eq!(ds.dropped_rows, 1);
        assert_eq!(ds.matrix.sample_ids(), &["1", "3"]);
    }

    #[test]
    fn one_annotator_is_rejected() {
        let err = read("sample_id,a1,model\n1,E,N\n", MissingPolicy::Reject).unwrap_err();
        assert!(matches!(err, Error::TooFewAnnotators { found: 1 }));
        assert!(err.to_string().contains("need ≥ 2 annotators"));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(
            read("", MissingPolicy::Reject),
            Err(Error::EmptyFile)
        ));
        assert!(matches!(
            read("sample_id,a1,a2\n", MissingPolicy::Reject),
            Err(Error::EmptyFile)
        ));
    }

    #[test]
    fn ragged_rows_are_malformed() {
        let err = read("sample_id,a1,a2\n1,E\n", MissingPolicy::Reject).unwrap_err();
        assert!(matches!(err, Error::Csv(_)));
    }

    #[test]
    fn supplied_vocabulary_rejects_unknown_labels() {
        let opts = IngestOptions {
            missing: MissingPolicy::Reject,
            vocabulary: Some(LabelVocabulary::new(["E", "N"]).unwrap()),
        };
        let err = read_dataset("sample_id,a1,a2\n1,E,C\n".as_bytes(), &opts).unwrap_err();
        assert!(matches!(err, Error::UnknownLabel { ref label, row: 1 } if label == "C"));

        let ds = read_dataset("sample_id,a1,a2\n1,N,E\n".as_bytes(), &opts).unwrap();
        assert_eq!(ds.matrix.column(0), &[1]);
    }

    #[test]
    fn vocabulary_invariants() {
        assert!(matches!(
            LabelVocabulary::new(["a"]),
            Err(Error::TooFewClasses { found: 1 })
        ));
        assert!(matches!(
            LabelVocabulary::new(["a", "b", "a"]),
            Err(Error::DuplicateClass(_))
        ));
        let v = LabelVocabulary::numbered(12).unwrap();
        assert_eq!(v.name(3), Some("c03"));
        assert_eq!(v.index_of("c11"), Some(11));
    }

    #[test]
    fn matrix_rejects_out_of_range_labels() {
        let vocab = LabelVocabulary::numbered(2).unwrap();
        let err = AnnotationMatrix::from_columns(vocab, vec![vec![0, 1], vec![0, 2]]).unwrap_err();
        assert!(matches!(err, Error::LabelOutOfRange { index: 2, size: 2 }));
    }

    #[test]
    fn write_then_read_preserves_matrix() {
        let ds = read(
            "sample_id,a1,a2,a3,model,oracle\nx,E,N,C,C,E\ny,E,E,E,N,E\n",
            MissingPolicy::Reject,
        )
        .unwrap();
        let mut buf = Vec::new();
        let model = ds.model.clone().unwrap();
        let oracle = ds.oracle.clone().unwrap();
        write_dataset(&mut buf, &ds.matrix, &[&model, &oracle]).unwrap();
        let back = read_dataset(buf.as_slice(), &IngestOptions::default()).unwrap();
        assert_eq!(back.matrix, ds.matrix);
        assert_eq!(back.model, ds.model);
        assert_eq!(back.oracle, ds.oracle);
    }

    #[test]
    fn sentiment_boundaries() {
        use SentimentBin::*;
        use SentimentScheme::*;
        assert_eq!(bin_sentiment(0.2, FiveClass).unwrap(), Class(0));
        assert_eq!(bin_sentiment(0.0, FiveClass).unwrap(), Class(0));
        assert_eq!(bin_sentiment(0.2000001, FiveClass).unwrap(), Class(1));
        assert_eq!(bin_sentiment(0.4, FiveClass).unwrap(), Class(1));
        assert_eq!(bin_sentiment(0.5, FiveClass).unwrap(), Class(2));
        assert_eq!(bin_sentiment(0.8, FiveClass).unwrap(), Class(3));
        assert_eq!(bin_sentiment(1.0, FiveClass).unwrap(), Class(4));

        assert_eq!(bin_sentiment(0.5, TwoClass).unwrap(), Excluded);
        assert_eq!(bin_sentiment(0.6, TwoClass).unwrap(), Excluded);
        assert_eq!(bin_sentiment(0.39, TwoClass).unwrap(), Class(0));
        assert_eq!(bin_sentiment(0.4, TwoClass).unwrap(), Class(0));
        assert_eq!(bin_sentiment(0.61, TwoClass).unwrap(), Class(1));

        assert!(matches!(
            bin_sentiment(1.01, FiveClass),
            Err(Error::ScoreOutOfRange(_))
        ));
        assert!(bin_sentiment(-0.1, TwoClass).is_err());
        assert!(bin_sentiment(f64::NAN, TwoClass).is_err());
    }

    #[test]
    fn sentiment_csv() {
        let rows = read_sentiment_scores("sample_id,score\na,0.1\nb,0.75\n".as_bytes()).unwrap();
        assert_eq!(rows, vec![("a".into(), 0.1), ("b".into(), 0.75)]);
        assert!(read_sentiment_scores("sample_id,score\na,1.5\n".as_bytes()).is_err());
    }
}
