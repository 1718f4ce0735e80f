use proptest::prelude::*;

use oraclebound::aggregate::{average_annotator_accuracy, majority_vote};
use oraclebound::agreement::agreement_matrix;
use oraclebound::bounds::{empirical_upper_bound, lower_bound, theoretical_upper_bound};
use oraclebound::certify::{confidence_hms, confidence_oms, CertificationStatus};
use oraclebound::data::{
    bin_sentiment, read_dataset, write_dataset, AnnotationMatrix, IngestOptions, LabelColumn,
    LabelVocabulary, SentimentBin, SentimentScheme,
};
use oraclebound::sim::{
    population_upper_bound, population_vote_accuracy, run_convergence_experiment, simulate,
    SimulationConfig,
};

/// (n_classes, columns) with 2..=6 annotators over 1..=40 samples.
fn label_matrix() -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
    (2usize..=5, 2usize..=6, 1usize..=40).prop_flat_map(|(nc, k, n)| {
        (
            Just(nc),
            prop::collection::vec(prop::collection::vec(0..nc, n), k),
        )
    })
}

fn matrix(nc: usize, columns: Vec<Vec<usize>>) -> AnnotationMatrix {
    AnnotationMatrix::from_columns(LabelVocabulary::numbered(nc).unwrap(), columns).unwrap()
}

proptest! {
    #[test]
    fn empirical_bound_never_exceeds_theoretical((nc, cols) in label_matrix()) {
        let am = agreement_matrix(&matrix(nc, cols));
        let (u_t, u_e) = (theoretical_upper_bound(&am), empirical_upper_bound(&am));
        prop_assert!(u_e <= u_t + 1e-15, "{u_e} > {u_t}");
        prop_assert!((0.0..=1.0).contains(&u_e) && u_t <= 1.0);
    }

    #[test]
    fn agreement_invariant_to_row_order_and_relabelling(
        (nc, cols) in label_matrix(),
        seed in any::<u64>(),
    ) {
        let n = cols[0].len();
        // deterministic shuffle of rows and a rotation of class indices
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (i as u64).wrapping_mul(seed | 1).rotate_left(17));
        let shift = (seed as usize) % nc;
        let moved: Vec<Vec<usize>> = cols
            .iter()
            .map(|c| order.iter().map(|&i| (c[i] + shift) % nc).collect())
            .collect();
        let a = agreement_matrix(&matrix(nc, cols));
        let b = agreement_matrix(&matrix(nc, moved));
        for i in 0..a.k() {
            for j in 0..a.k() {
                prop_assert_eq!(a.count(i, j), b.count(i, j));
            }
        }
    }

    #[test]
    fn majority_vote_ignores_annotator_order((nc, mut cols) in label_matrix()) {
        let a = majority_vote(&matrix(nc, cols.clone()));
        cols.reverse();
        let b = majority_vote(&matrix(nc, cols));
        prop_assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn lower_bound_is_symmetric((nc, cols) in label_matrix()) {
        let _ = nc;
        let ab = lower_bound(&cols[0], &cols[1]).unwrap();
        let ba = lower_bound(&cols[1], &cols[0]).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn sentiment_bins_are_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let five = |s| match bin_sentiment(s, SentimentScheme::FiveClass).unwrap() {
            SentimentBin::Class(c) => c,
            SentimentBin::Excluded => unreachable!(),
        };
        prop_assert!(five(lo) <= five(hi));
        if let (SentimentBin::Class(x), SentimentBin::Class(y)) = (
            bin_sentiment(lo, SentimentScheme::TwoClass).unwrap(),
            bin_sentiment(hi, SentimentScheme::TwoClass).unwrap(),
        ) {
            prop_assert!(x <= y);
        }
    }

    #[test]
    fn csv_round_trip((nc, cols) in label_matrix(), oracle_seed in any::<u64>()) {
        let m = matrix(nc, cols);
        let oracle: Vec<usize> = (0..m.n_samples())
            .map(|i| ((oracle_seed >> (i % 60)) as usize) % nc)
            .collect();
        let oracle = LabelColumn::new("oracle", oracle);
        let mut buf = Vec::new();
        write_dataset(&mut buf, &m, &[&oracle]).unwrap();
        let options = IngestOptions {
            vocabulary: Some(LabelVocabulary::numbered(nc).unwrap()),
            ..IngestOptions::default()
        };
        let ds = read_dataset(buf.as_slice(), &options).unwrap();
        prop_assert_eq!(&ds.matrix, &m);
        prop_assert_eq!(ds.oracle.unwrap().labels, oracle.labels);
    }

    #[test]
    fn score_grows_with_sample_size(
        u in 0.5f64..0.95,
        gap in 0.005f64..0.05,
        n in 100u64..100_000,
    ) {
        let l = (u + gap).min(1.0);
        let small = confidence_hms(l, u, n, 0.0).unwrap();
        let large = confidence_hms(l, u, n * 2, 0.0).unwrap();
        prop_assert!(large.score.unwrap() >= small.score.unwrap());
    }

    #[test]
    fn oms_never_worse_than_hms_and_constraint_holds(
        u in 0.3f64..0.95,
        gap in 0.0f64..0.1,
        n in 10u64..50_000,
        tau in 0.0f64..0.02,
    ) {
        let l = (u + gap).min(1.0);
        let hms = confidence_hms(l, u, n, tau).unwrap();
        let oms = confidence_oms(l, u, n, tau, 1e-4, 100).unwrap();
        if let Some(r) = hms.constraint_residual() {
            prop_assert!(r <= 1e-9);
        }
        if let Some(r) = oms.constraint_residual() {
            prop_assert!(r <= 1e-9);
        }
        if let (Some(h), Some(o)) = (hms.score, oms.score) {
            prop_assert!(o >= h, "OMS {o} < HMS {h}");
        }
        if l - tau - u <= 0.0 {
            prop_assert_eq!(hms.status, CertificationStatus::NotCertified);
            prop_assert_eq!(oms.status, CertificationStatus::NotCertified);
        }
    }

    #[test]
    fn majority_vote_beats_average_annotator_in_population(
        p in 0.55f64..0.95,
        k in 3usize..=7,
        nc in 2usize..=4,
    ) {
        let cfg = SimulationConfig::homogeneous(10, nc, k, p, 0);
        let vote = population_vote_accuracy(&cfg, k).unwrap();
        prop_assert!(vote >= p - 1e-12, "vote {vote} < {p}");
        // the bound really is an upper bound on the average annotator
        prop_assert!(population_upper_bound(&cfg, k).unwrap() >= p - 1e-12);
    }
}

#[test]
fn random_labelers_agree_at_chance() {
    let nc = 4;
    let cfg = SimulationConfig::homogeneous(50_000, nc, 3, 1.0 / nc as f64, 3);
    let data = simulate(&cfg).unwrap();
    let am = agreement_matrix(&data.matrix);
    let q = 1.0 / nc as f64;
    let sigma = (q * (1.0 - q) / 50_000.0_f64).sqrt();
    assert!(
        (am.mean_off_diagonal() - q).abs() < 4.0 * sigma,
        "{}",
        am.mean_off_diagonal()
    );
}

#[test]
fn sample_average_accuracy_stays_below_sample_bound() {
    let cfg = SimulationConfig::homogeneous(5_000, 3, 5, 0.75, 8);
    let data = simulate(&cfg).unwrap();
    let am = agreement_matrix(&data.matrix);
    let mean = average_annotator_accuracy(&data.matrix, &data.oracle.labels).unwrap();
    assert!(mean <= theoretical_upper_bound(&am));
}

#[test]
fn bound_gap_shrinks_as_annotators_are_added() {
    let cfg = SimulationConfig::homogeneous(20_000, 3, 20, 0.8, 4).with_model(0.9);
    let rows = run_convergence_experiment(&cfg, &[2, 5, 10, 20]).unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| r.u_t - r.u_e).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    for r in &rows {
        assert!(r.u_e <= r.u_t);
    }
}
