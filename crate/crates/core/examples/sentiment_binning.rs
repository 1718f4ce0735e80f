//! Continuous sentiment scores to class labels, and mean-then-bin
//! aggregation of several raters.

use oraclebound::aggregate::mean_then_bin;
use oraclebound::data::{bin_sentiment, SentimentScheme};

fn main() -> oraclebound::Result<()> {
    for score in [0.0, 0.2, 0.21, 0.4, 0.5, 0.6, 0.61, 1.0] {
        println!(
            "{score:<5} five-class {:?}, two-class {:?}",
            bin_sentiment(score, SentimentScheme::FiveClass)?,
            bin_sentiment(score, SentimentScheme::TwoClass)?
        );
    }

    // three raters per phrase
    let scores = vec![
        vec![0.1, 0.3, 0.2],
        vec![0.9, 0.7, 0.8],
        vec![0.5, 0.6, 0.4],
    ];
    let five = mean_then_bin(&scores, SentimentScheme::FiveClass)?;
    let names = SentimentScheme::FiveClass.vocabulary();
    let labels: Vec<&str> = five
        .labels
        .iter()
        .map(|&c| names.name(c).unwrap_or("?"))
        .collect();
    println!("\nmean-then-bin, five classes: {labels:?}");
    // the neutral third row has no two-class label
    match mean_then_bin(&scores, SentimentScheme::TwoClass) {
        Ok(c) => println!("two classes: {:?}", c.labels),
        Err(e) => println!("two classes: {e}"),
    }
    Ok(())
}
