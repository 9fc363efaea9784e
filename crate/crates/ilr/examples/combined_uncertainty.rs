//! Interval features and unknown labels at once, end to end:
//! fit a model set, classify a test set with abstention, and tabulate
//! the three-way confusion counts.
//!
//! Run with: cargo run --example combined_uncertainty

use ilr::dataset::{CensorMode, Dataset};
use ilr::envelope::{fit_imprecise, predict_interval, ImpreciseOptions};
use ilr::eval::{classify, ternary_confusion, uncertainty_stats, Decision, DecisionRule};
use ilr::interval::Interval;
use ilr::logistic::Coefficients;

fn main() -> ilr::error::Result<()> {
    let truth = Coefficients::new(vec![-5.0, 1.0])?;
    let range = Interval::new(0.0, 10.0)?;

    let train = Dataset::synthesize(50, 11, &truth, range)
        .intervalize(CensorMode::Symmetric, 0.3, 12)?
        .censor_labels(&[4, 29])?;
    let test = Dataset::synthesize(80, 99, &truth, range);

    let set = fit_imprecise(&train, &ImpreciseOptions::default())?;
    println!(
        "trained on {} rows ({} interval cells per row, {} unknown labels): {} candidates",
        train.len(),
        train.dimension(),
        train.unknown_label_rows().len(),
        set.len()
    );

    // Classify every test point three ways: commit when the whole
    // probability interval clears the threshold, abstain when it straddles.
    let mut decisions = Vec::new();
    for point in test.points() {
        let p = predict_interval(&set, &point.features)?;
        decisions.push(classify(p, 0.5, DecisionRule::Abstain)?);
    }
    let labels: Vec<_> = test.points().iter().map(|p| p.label).collect();
    let confusion = ternary_confusion(&decisions, &labels)?;

    println!("\nthree-way confusion at threshold 0.5:");
    println!("              predicted +   predicted -   abstained");
    println!(
        "  actual +    {:>10} {:>13} {:>11}",
        confusion.a, confusion.c, confusion.e
    );
    println!(
        "  actual -    {:>10} {:>13} {:>11}",
        confusion.b, confusion.d, confusion.f
    );

    let stats = uncertainty_stats(&confusion);
    let fmt = |v: Option<f64>| v.map_or("  NA".into(), |v| format!("{v:.3}"));
    println!("\n  s' (sensitivity among decided) = {}", fmt(stats.s_prime));
    println!("  t' (specificity among decided) = {}", fmt(stats.t_prime));
    println!("  sigma (abstention | actual +)  = {}", fmt(stats.sigma));
    println!("  tau   (abstention | actual -)  = {}", fmt(stats.tau));

    // Hard rules resolve every abstention, bracketing the cautious one.
    for rule in [DecisionRule::UpperBound, DecisionRule::LowerBound] {
        let mut pos = 0;
        for point in test.points() {
            let p = predict_interval(&set, &point.features)?;
            if classify(p, 0.5, rule)? == Decision::Positive {
                pos += 1;
            }
        }
        println!("\n{rule:?} rule: {pos} of {} classified positive", test.len());
    }

    Ok(())
}
