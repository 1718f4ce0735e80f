//! Oracle-known synthetic annotations.
//!
//! Each sample gets an oracle class drawn from the class prior; every
//! annotator (and the optional models) then reports the oracle class with
//! its accuracy, or else one of the other classes uniformly at random.
//!
//! Two annotator noise models are available. `conditional_independent`
//! annotators are independent given the oracle, which is the equality case
//! of positive correlation. `hardness_mixture` annotators share one
//! per-sample easy/hard draw, so they tend to be right together and the
//! correlation is strictly positive.
//!
//! Randomness comes from one ChaCha8 key (the seed) with a separate stream
//! per column, and every sample consumes a fixed number of draws. Adding an
//! annotator therefore leaves all existing columns unchanged, which keeps
//! K-sweeps nested.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{average_annotator_accuracy, majority_vote};
use crate::agreement::{agree_count, agreement_matrix};
use crate::bounds::{empirical_upper_bound, lower_bound, theoretical_upper_bound};
use crate::certify::hoeffding_delta;
use crate::data::{write_dataset, AnnotationMatrix, LabelColumn, LabelVocabulary};
use crate::error::{Error, Result};

const ORACLE_STREAM: u64 = 0;
const HARDNESS_STREAM: u64 = 1;
const MODEL_STREAM: u64 = 2;
const WEAK_MODEL_STREAM: u64 = 3;
const ANNOTATOR_STREAM_BASE: u64 = 16;

/// Largest label-tuple enumeration attempted by the exact vote computations.
const MAX_ENUMERATION: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnnotatorModel {
    ConditionalIndependent {
        accuracy: f64,
    },
    /// Accuracy `p_easy` on the samples whose shared hardness draw falls
    /// below `easy_fraction`, `p_hard` on the rest.
    HardnessMixture {
        p_easy: f64,
        p_hard: f64,
        easy_fraction: f64,
    },
}

impl AnnotatorModel {
    pub fn independent(accuracy: f64) -> Self {
        AnnotatorModel::ConditionalIndependent { accuracy }
    }

    /// Oracle accuracy averaged over samples.
    pub fn marginal_accuracy(&self) -> f64 {
        match *self {
            AnnotatorModel::ConditionalIndependent { accuracy } => accuracy,
            AnnotatorModel::HardnessMixture {
                p_easy,
                p_hard,
                easy_fraction,
            } => easy_fraction * p_easy + (1.0 - easy_fraction) * p_hard,
        }
    }

    fn accuracy_at(&self, hardness: f64) -> f64 {
        match *self {
            AnnotatorModel::ConditionalIndependent { accuracy } => accuracy,
            AnnotatorModel::HardnessMixture {
                p_easy,
                p_hard,
                easy_fraction,
            } => {
                if hardness < easy_fraction {
                    p_easy
                } else {
                    p_hard
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let probabilities: &[(&str, f64)] = match self {
            AnnotatorModel::ConditionalIndependent { accuracy } => &[("accuracy", *accuracy)],
            AnnotatorModel::HardnessMixture {
                p_easy,
                p_hard,
                easy_fraction,
            } => &[
                ("p_easy", *p_easy),
                ("p_hard", *p_hard),
                ("easy_fraction", *easy_fraction),
            ],
        };
        for &(name, p) in probabilities {
            check_probability(name, p)?;
        }
        Ok(())
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} = {p} is not in [0, 1]"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_samples: usize,
    pub n_classes: usize,
    /// Uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_prior: Option<Vec<f64>>,
    pub annotators: Vec<AnnotatorModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_accuracy: Option<f64>,
    /// Second model, used by convergence sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_model_accuracy: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl SimulationConfig {
    /// `k` conditionally independent annotators with the same accuracy.
    pub fn homogeneous(
        n_samples: usize,
        n_classes: usize,
        k: usize,
        accuracy: f64,
        seed: u64,
    ) -> Self {
        Self {
            n_samples,
            n_classes,
            class_prior: None,
            annotators: vec![AnnotatorModel::independent(accuracy); k],
            model_accuracy: None,
            weak_model_accuracy: None,
            seed,
        }
    }

    pub fn with_model(mut self, accuracy: f64) -> Self {
        self.model_accuracy = Some(accuracy);
        self
    }

    pub fn with_weak_model(mut self, accuracy: f64) -> Self {
        self.weak_model_accuracy = Some(accuracy);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn prior(&self) -> Vec<f64> {
        self.class_prior
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.n_classes as f64; self.n_classes])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::NoSamples);
        }
        if self.n_classes < 2 {
            return Err(Error::TooFewClasses {
                found: self.n_classes,
            });
        }
        if self.annotators.len() < 2 {
            return Err(Error::TooFewAnnotators {
                found: self.annotators.len(),
            });
        }
        if let Some(prior) = &self.class_prior {
            if prior.len() != self.n_classes {
                return Err(Error::InvalidParameter(format!(
                    "class prior has {} entries for {} classes",
                    prior.len(),
                    self.n_classes
                )));
            }
            for &p in prior {
                check_probability("class prior entry", p)?;
            }
            let total: f64 = prior.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "class prior sums to {total}, not 1"
                )));
            }
        }
        for a in &self.annotators {
            a.validate()?;
        }
        for p in [self.model_accuracy, self.weak_model_accuracy]
            .into_iter()
            .flatten()
        {
            check_probability("model accuracy", p)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub matrix: AnnotationMatrix,
    pub oracle: LabelColumn,
    pub model: Option<LabelColumn>,
    pub weak_model: Option<LabelColumn>,
}

impl SimulatedData {
    /// Annotation CSV with `model` (when present) and `oracle` columns.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut extra = Vec::new();
        if let Some(model) = &self.model {
            extra.push(model);
        }
        extra.push(&self.oracle);
        write_dataset(writer, &self.matrix, &extra)
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn draw_class(prior: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (class, &p) in prior.iter().enumerate() {
        acc += p;
        if u < acc {
            return class;
        }
    }
    // u landed in the rounding gap at the top; take the last class with mass
    prior.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Two uniforms per sample: one decides correctness, one picks the wrong
/// class.
fn noisy_column(
    seed: u64,
    stream_id: u64,
    oracle: &[usize],
    n_classes: usize,
    accuracy: impl Fn(usize) -> f64,
) -> Vec<usize> {
    let mut rng = stream(seed, stream_id);
    oracle
        .iter()
        .enumerate()
        .map(|(sample, &truth)| {
            let hit: f64 = rng.gen();
            let pick: f64 = rng.gen();
            if hit < accuracy(sample) {
                truth
            } else {
                let wrong = ((pick * (n_classes - 1) as f64) as usize).min(n_classes - 2);
                if wrong >= truth {
                    wrong + 1
                } else {
                    wrong
                }
            }
        })
        .collect()
}

pub fn simulate(config: &SimulationConfig) -> Result<SimulatedData> {
    config.validate()?;
    let n = config.n_samples;
    let nc = config.n_classes;
    let prior = config.prior();

    let mut oracle_rng = stream(config.seed, ORACLE_STREAM);
    let oracle: Vec<usize> = (0..n)
        .map(|_| draw_class(&prior, oracle_rng.gen()))
        .collect();
    let mut hardness_rng = stream(config.seed, HARDNESS_STREAM);
    let hardness: Vec<f64> = (0..n).map(|_| hardness_rng.gen()).collect();

    let columns: Vec<Vec<usize>> = config
        .annotators
        .par_iter()
        .enumerate()
        .map(|(i, annotator)| {
            noisy_column(
                config.seed,
                ANNOTATOR_STREAM_BASE + i as u64,
                &oracle,
                nc,
                |sample| annotator.accuracy_at(hardness[sample]),
            )
        })
        .collect();
    let model_column = |accuracy: Option<f64>, stream_id: u64, id: &str| {
        accuracy
            .map(|p| LabelColumn::new(id, noisy_column(config.seed, stream_id, &oracle, nc, |_| p)))
    };
    let model = model_column(config.model_accuracy, MODEL_STREAM, "model");
    let weak_model = model_column(config.weak_model_accuracy, WEAK_MODEL_STREAM, "weak_model");

    let matrix = AnnotationMatrix::from_columns(LabelVocabulary::numbered(nc)?, columns)?;
    Ok(SimulatedData {
        matrix,
        oracle: LabelColumn::new("oracle", oracle),
        model,
        weak_model,
    })
}

/// Agreement probability of two conditionally independent labelers with
/// accuracies `p_i`, `p_j`: `p_i·p_j + (1 − p_i)(1 − p_j)/(N_c − 1)`.
pub fn expected_pairwise_agreement(p_i: f64, p_j: f64, n_classes: usize) -> Result<f64> {
    if n_classes < 2 {
        return Err(Error::TooFewClasses { found: n_classes });
    }
    check_probability("p_i", p_i)?;
    check_probability("p_j", p_j)?;
    Ok(p_i * p_j + (1.0 - p_i) * (1.0 - p_j) / (n_classes - 1) as f64)
}

/// Splits the shared hardness draw into intervals on which every listed
/// annotator has a fixed accuracy. Returns `(probability, accuracies)`.
pub fn accuracy_regions(annotators: &[AnnotatorModel]) -> Vec<(f64, Vec<f64>)> {
    let mut cuts = vec![0.0, 1.0];
    for a in annotators {
        if let AnnotatorModel::HardnessMixture { easy_fraction, .. } = *a {
            cuts.push(easy_fraction);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let accs = annotators.iter().map(|a| a.accuracy_at(w[0])).collect();
            (w[1] - w[0], accs)
        })
        .collect()
}

/// `P(ℓ_i = ℓ⋆, ℓ_j = ℓ⋆)` under the shared-hardness model.
pub fn expected_joint_accuracy(a: &AnnotatorModel, b: &AnnotatorModel) -> f64 {
    accuracy_regions(&[*a, *b])
        .iter()
        .map(|(w, p)| w * p[0] * p[1])
        .sum()
}

/// `P(ℓ_a = ℓ_b)` for any two annotator models.
pub fn expected_agreement(a: &AnnotatorModel, b: &AnnotatorModel, n_classes: usize) -> Result<f64> {
    accuracy_regions(&[*a, *b])
        .iter()
        .map(|(w, p)| Ok(w * expected_pairwise_agreement(p[0], p[1], n_classes)?))
        .sum()
}

/// `P(ℓ_i = ℓ⋆ | ℓ_j = ℓ⋆) − P(ℓ_i = ℓ⋆)`: zero for conditionally
/// independent annotators, positive for hardness mixtures with
/// `p_easy > p_hard`.
pub fn conditional_accuracy_gap(i: &AnnotatorModel, j: &AnnotatorModel) -> f64 {
    expected_joint_accuracy(i, j) / j.marginal_accuracy() - i.marginal_accuracy()
}

/// Population value of the diagonal-included upper bound for the first `k`
/// annotators.
pub fn population_upper_bound(config: &SimulationConfig, k: usize) -> Result<f64> {
    let annotators = first_annotators(config, k)?;
    let mut total = k as f64;
    for i in 0..k {
        for j in 0..k {
            if i != j {
                total += expected_agreement(&annotators[i], &annotators[j], config.n_classes)?;
            }
        }
    }
    Ok((total / (k * k) as f64).sqrt())
}

fn first_annotators(config: &SimulationConfig, k: usize) -> Result<&[AnnotatorModel]> {
    if k < 2 {
        return Err(Error::TooFewAnnotators { found: k });
    }
    config.annotators.get(..k).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "{k} annotators requested, {} configured",
            config.annotators.len()
        ))
    })
}

/// Exact joint distribution `P(oracle = c, vote = v)` of the oracle and the
/// majority vote (ties to the lowest index) of the first `k` annotators,
/// by enumerating every label tuple.
pub fn vote_joint_distribution(config: &SimulationConfig, k: usize) -> Result<Vec<Vec<f64>>> {
    let annotators = first_annotators(config, k)?;
    let nc = config.n_classes;
    let tuples = u32::try_from(k)
        .ok()
        .and_then(|k| nc.checked_pow(k))
        .filter(|&t| t <= MAX_ENUMERATION)
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "exact vote distribution needs {nc}^{k} label tuples; limit is {MAX_ENUMERATION}"
            ))
        })?;
    let prior = config.prior();
    let regions = accuracy_regions(annotators);
    let wrong = |p: f64| (1.0 - p) / (nc - 1) as f64;

    let mut joint = vec![vec![0.0; nc]; nc];
    let mut labels = vec![0usize; k];
    let mut votes = vec![0usize; nc];
    for (truth, &pi) in prior.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        for (weight, accs) in &regions {
            for code in 0..tuples {
                let mut rest = code;
                for l in labels.iter_mut() {
                    *l = rest % nc;
                    rest /= nc;
                }
                let prob: f64 = labels
                    .iter()
                    .zip(accs)
                    .map(|(&l, &p)| if l == truth { p } else { wrong(p) })
                    .product();
                votes.iter_mut().for_each(|v| *v = 0);
                for &l in &labels {
                    votes[l] += 1;
                }
                let mut vote = 0;
                for c in 1..nc {
                    if votes[c] > votes[vote] {
                        vote = c;
                    }
                }
                joint[truth][vote] += pi * weight * prob;
            }
        }
    }
    Ok(joint)
}

/// Exact `P(majority vote of first k = oracle)`.
pub fn population_vote_accuracy(config: &SimulationConfig, k: usize) -> Result<f64> {
    let joint = vote_joint_distribution(config, k)?;
    Ok((0..config.n_classes).map(|c| joint[c][c]).sum())
}

/// Exact `P(majority vote of first k = model label)` for a conditionally
/// independent model of the given accuracy.
pub fn population_vote_model_agreement(
    config: &SimulationConfig,
    k: usize,
    model_accuracy: f64,
) -> Result<f64> {
    check_probability("model accuracy", model_accuracy)?;
    let joint = vote_joint_distribution(config, k)?;
    let nc = config.n_classes;
    let wrong = (1.0 - model_accuracy) / (nc - 1) as f64;
    let mut total = 0.0;
    for (truth, row) in joint.iter().enumerate() {
        for (vote, &p) in row.iter().enumerate() {
            total += p * if vote == truth { model_accuracy } else { wrong };
        }
    }
    Ok(total)
}

/// One K of a convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub u_t: f64,
    pub u_e: f64,
    pub l_strong: Option<f64>,
    pub l_weak: Option<f64>,
    pub mean_acc: f64,
}

/// Bounds computed on the first K annotators for each K in `k_range`, with
/// both models scored against the majority vote of those K.
pub fn run_convergence_experiment(
    config: &SimulationConfig,
    k_range: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    if let Some(&bad) = k_range.iter().find(|&&k| k < 2) {
        return Err(Error::InvalidParameter(format!(
            "K = {bad} in k_range; every K must be ≥ 2"
        )));
    }
    if let Some(&max) = k_range.iter().max() {
        first_annotators(config, max)?;
    }
    let data = simulate(config)?;
    k_range
        .iter()
        .map(|&k| {
            let sub = data.matrix.first_annotators(k)?;
            let am = agreement_matrix(&sub);
            let vote = majority_vote(&sub);
            let score = |model: &Option<LabelColumn>| {
                model
                    .as_ref()
                    .map(|m| lower_bound(&vote.labels, &m.labels))
                    .transpose()
            };
            Ok(ConvergenceRow {
                k,
                u_t: theoretical_upper_bound(&am),
                u_e: empirical_upper_bound(&am),
                l_strong: score(&data.model)?,
                l_weak: score(&data.weak_model)?,
                mean_acc: average_annotator_accuracy(&sub, &data.oracle.labels)?,
            })
        })
        .collect()
}

pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Violation counts for one slack value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub t: f64,
    /// `exp(−2Nt²)`
    pub delta: f64,
    /// Monte Carlo standard error of a frequency with mean `delta`.
    pub sigma: f64,
    pub upper_violations: usize,
    pub upper_rate: f64,
    pub lower_violations: Option<usize>,
    pub lower_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub n: usize,
    pub k: usize,
    pub replicates: usize,
    /// Population diagonal-included upper bound U.
    pub population_upper: f64,
    /// Population agreement between the model and the majority vote.
    pub population_lower: Option<f64>,
    pub rows: Vec<CoverageRow>,
}

fn replicate_seed(seed: u64, replicate: u64) -> u64 {
    // splitmix64 finaliser over (seed, replicate)
    let mut z = seed
        ^ replicate
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Re-simulates `replicates` independent datasets and counts how often each
/// certificate fails against the known population values:
/// `sqrt(t + U_N²) ≤ U` for the upper certificate (U_N diagonal-included)
/// and `L_N − t ≥ L` for the lower one (model vs majority vote).
pub fn run_coverage_experiment(
    config: &SimulationConfig,
    t_grid: &[f64],
    replicates: usize,
) -> Result<CoverageReport> {
    if replicates < 1000 {
        return Err(Error::InvalidParameter(format!(
            "coverage needs at least 1000 replicates, got {replicates}"
        )));
    }
    config.validate()?;
    let n = config.n_samples as u64;
    let k = config.annotators.len();
    let deltas = t_grid
        .iter()
        .map(|&t| hoeffding_delta(n, t))
        .collect::<Result<Vec<_>>>()?;
    let population_upper = population_upper_bound(config, k)?;
    let population_lower = config
        .model_accuracy
        .map(|p| population_vote_model_agreement(config, k, p))
        .transpose()?;

    let statistics = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut cfg = config.clone();
            cfg.seed = replicate_seed(config.seed, r);
            cfg.weak_model_accuracy = None;
            let data = simulate(&cfg)?;
            let u_n = theoretical_upper_bound(&agreement_matrix(&data.matrix));
            let l_n = data
                .model
                .as_ref()
                .map(|m| {
                    let vote = majority_vote(&data.matrix);
                    Ok::<_, Error>(agree_count(&vote.labels, &m.labels)? as f64 / n as f64)
                })
                .transpose()?;
            Ok((u_n, l_n))
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = t_grid
        .iter()
        .zip(&deltas)
        .map(|(&t, &delta)| {
            let upper_violations = statistics
                .iter()
                .filter(|(u_n, _)| (t + u_n * u_n).sqrt() <= population_upper)
                .count();
            let lower_violations = population_lower.map(|l| {
                statistics
                    .iter()
                    .filter(|(_, l_n)| l_n.is_some_and(|l_n| l_n - t >= l))
                    .count()
            });
            let r = replicates as f64;
            CoverageRow {
                t,
                delta,
                sigma: (delta * (1.0 - delta) / r).sqrt(),
                upper_violations,
                upper_rate: upper_violations as f64 / r,
                lower_violations,
                lower_rate: lower_violations.map(|v| v as f64 / r),
            }
        })
        .collect();

    Ok(CoverageReport {
        n: config.n_samples,
        k,
        replicates,
        population_upper,
        population_lower,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_annotators_copy_the_oracle() {
        let cfg = SimulationConfig::homogeneous(500, 4, 3, 1.0, 7).with_model(1.0);
        let data = simulate(&cfg).unwrap();
        for c in data.matrix.columns() {
            assert_eq!(c, &data.oracle.labels);
        }
        assert_eq!(data.model.unwrap().labels, data.oracle.labels);
    }

    #[test]
    fn zero_accuracy_is_always_wrong_and_in_range() {
        let cfg = SimulationConfig::homogeneous(2000, 3, 2, 0.0, 1);
        let data = simulate(&cfg).unwrap();
        for c in data.matrix.columns() {
            assert!(c
                .iter()
                .zip(&data.oracle.labels)
                .all(|(a, o)| a != o && *a < 3));
        }
    }

    #[test]
    fn same_seed_same_data_and_nested_columns() {
        let cfg = SimulationConfig::homogeneous(300, 3, 4, 0.7, 42).with_model(0.9);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.model, b.model);

        let mut more = cfg.clone();
        more.annotators.push(AnnotatorModel::independent(0.5));
        let c = simulate(&more).unwrap();
        assert_eq!(&c.matrix.columns()[..4], a.matrix.columns());
        assert_eq!(c.oracle, a.oracle);
        assert_eq!(c.model, a.model);

        let mut other = cfg;
        other.seed = 43;
        assert_ne!(simulate(&other).unwrap().oracle, a.oracle);
    }

    #[test]
    fn expected_agreement_examples() {
        assert_eq!(expected_pairwise_agreement(1.0, 1.0, 3).unwrap(), 1.0);
        let third = 1.0 / 3.0;
        assert!((expected_pairwise_agreement(third, third, 3).unwrap() - third).abs() < 1e-15);
        assert!((expected_pairwise_agreement(0.9, 0.7, 3).unwrap() - 0.645).abs() < 1e-15);
        assert!(expected_pairwise_agreement(0.9, 0.7, 1).is_err());
        assert!(expected_pairwise_agreement(1.1, 0.7, 3).is_err());
    }

    #[test]
    fn expected_agreement_matches_joint_table_enumeration() {
        // Sum over the N_c × N_c × N_c table of (oracle, ℓ_i, ℓ_j) outcomes.
        for &(pi, pj, nc) in &[(0.9, 0.7, 3usize), (0.55, 0.8, 5), (0.3, 0.3, 2)] {
            let mut agree = 0.0;
            for truth in 0..nc {
                for li in 0..nc {
                    for lj in 0..nc {
                        let pr = |p: f64, l: usize| {
                            if l == truth {
                                p
                            } else {
                                (1.0 - p) / (nc - 1) as f64
                            }
                        };
                        if li == lj {
                            agree += pr(pi, li) * pr(pj, lj) / nc as f64;
                        }
                    }
                }
            }
            assert!((agree - expected_pairwise_agreement(pi, pj, nc).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn regions_and_gap() {
        let easy = AnnotatorModel::HardnessMixture {
            p_easy: 0.95,
            p_hard: 0.55,
            easy_fraction: 0.5,
        };
        assert!((easy.marginal_accuracy() - 0.75).abs() < 1e-15);
        assert!((expected_joint_accuracy(&easy, &easy) - 0.6025).abs() < 1e-15);
        assert!((conditional_accuracy_gap(&easy, &easy) - (0.6025 / 0.75 - 0.75)).abs() < 1e-15);

        let ci = AnnotatorModel::independent(0.8);
        assert!(conditional_accuracy_gap(&ci, &ci).abs() < 1e-15);
        assert!(conditional_accuracy_gap(&ci, &easy).abs() < 1e-15);
        assert_eq!(accuracy_regions(&[ci, ci]), vec![(1.0, vec![0.8, 0.8])]);
    }

    #[test]
    fn vote_distribution_small_cases() {
        // K = 2, ties to lowest index, checked by hand for N_c = 2, p = 0.8:
        // vote = truth unless both wrong, or they split and truth is class 1.
        let cfg = SimulationConfig::homogeneous(10, 2, 2, 0.8, 0);
        let acc = population_vote_accuracy(&cfg, 2).unwrap();
        let expected = 0.5 * (1.0 - 0.04) + 0.5 * 0.64;
        assert!((acc - expected).abs() < 1e-14);

        let joint =
            vote_joint_distribution(&SimulationConfig::homogeneous(10, 3, 3, 0.6, 0), 3).unwrap();
        let total: f64 = joint.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-12);

        assert!(
            vote_joint_distribution(&SimulationConfig::homogeneous(10, 50, 12, 0.6, 0), 12)
                .is_err()
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimulationConfig::homogeneous(10, 3, 2, 0.8, 0);
        cfg.class_prior = Some(vec![0.5, 0.5, 0.1]);
        assert!(simulate(&cfg).is_err());
        cfg.class_prior = Some(vec![0.2, 0.3, 0.5]);
        assert!(simulate(&cfg).is_ok());
        cfg.annotators[0] = AnnotatorModel::independent(1.5);
        assert!(simulate(&cfg).is_err());
        assert!(simulate(&SimulationConfig::homogeneous(10, 1, 2, 0.8, 0)).is_err());
        assert!(simulate(&SimulationConfig::homogeneous(10, 3, 1, 0.8, 0)).is_err());
        assert!(simulate(&SimulationConfig::homogeneous(0, 3, 2, 0.8, 0)).is_err());
    }

    #[test]
    fn config_json() {
        let cfg = SimulationConfig::from_json(
            r#"{
                "n_samples": 100, "n_classes": 3, "seed": 9,
                "annotators": [
                    {"kind": "conditional_independent", "accuracy": 0.8},
                    {"kind": "hardness_mixture", "p_easy": 0.95, "p_hard": 0.55, "easy_fraction": 0.5}
                ],
                "model_accuracy": 0.9
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.annotators.len(), 2);
        assert_eq!(cfg.model_accuracy, Some(0.9));
        assert!(SimulationConfig::from_json(r#"{"n_samples": 1}"#).is_err());
    }

    #[test]
    fn skewed_prior_is_respected() {
        let mut cfg = SimulationConfig::homogeneous(20_000, 3, 2, 0.8, 5);
        cfg.class_prior = Some(vec![0.7, 0.2, 0.1]);
        let data = simulate(&cfg).unwrap();
        let freq = data.oracle.labels.iter().filter(|&&c| c == 0).count() as f64 / 20_000.0;
        let sigma = (0.7f64 * 0.3 / 20_000.0).sqrt();
        assert!((freq - 0.7).abs() < 3.0 * sigma, "{freq}");
    }

    #[test]
    fn convergence_rejects_bad_k() {
        let cfg = SimulationConfig::homogeneous(50, 3, 4, 0.8, 0);
        assert!(run_convergence_experiment(&cfg, &[1, 2]).is_err());
        assert!(run_convergence_experiment(&cfg, &[2, 5]).is_err());
        assert_eq!(
            run_convergence_experiment(&cfg, &[2, 3, 4]).unwrap().len(),
            3
        );
    }

    #[test]
    fn coverage_requires_enough_replicates() {
        let cfg = SimulationConfig::homogeneous(50, 3, 3, 0.8, 0);
        assert!(run_coverage_experiment(&cfg, &[0.01], 999).is_err());
    }
}
