//! ROC analysis that survives uncertainty.
//!
//! A single model gets the classical curve and a scalar AUC. A model set
//! gets a sensitivity band with an AUC interval, plus a threshold sweep
//! that tracks how often the set must abstain as the cutoff moves.
//!
//! Run with: cargo run --example roc_analysis

use ilr::dataset::{CensorMode, Dataset};
use ilr::envelope::{fit_imprecise, ImpreciseOptions};
use ilr::eval::{auc, prediction_only_auc, roc, roc3d, roc_band};
use ilr::interval::Interval;
use ilr::logistic::Coefficients;

fn main() -> ilr::error::Result<()> {
    // Four scores, small enough to check by hand: one concordant pair is
    // tied-free, one positive outranks no negative. AUC comes out 3/4.
    let scores = [0.1, 0.4, 0.35, 0.8];
    let truth = [false, false, true, true];
    let curve = roc(&scores, &truth)?;
    println!("hand-checkable curve (threshold, fpr, sensitivity):");
    for p in &curve.points {
        println!("  ({:.2}, {:.2}, {:.2})", p.threshold, p.fpr, p.sensitivity);
    }
    println!("AUC = {} (expected 0.75)\n", auc(&curve));

    // Now an uncertain model set evaluated on a precise test set. Two
    // features matter here: candidate models with different slope ratios
    // rank the test points differently, so the member AUCs spread out.
    let beta = Coefficients::new(vec![-5.0, 0.8, 0.4])?;
    let range = Interval::new(0.0, 10.0)?;
    let train = Dataset::synthesize(50, 21, &beta, range)
        .intervalize(CensorMode::Symmetric, 0.4, 22)?
        .censor_labels(&[7, 40])?;
    let test = Dataset::synthesize(120, 500, &beta, range);

    let set = fit_imprecise(&train, &ImpreciseOptions::default())?;
    let band = roc_band(&set, &test)?;
    println!(
        "model set of {}: AUC interval [{:.4}, {:.4}]",
        set.len(),
        band.auc.lo(),
        band.auc.hi()
    );

    let mid = band.points[band.points.len() / 2];
    println!(
        "sensitivity band at fpr {:.3}: [{:.3}, {:.3}]",
        mid.fpr, mid.s_lo, mid.s_hi
    );

    // Threshold sweep under the abstain rule. Near the extremes every
    // probability interval clears the cutoff and nothing is given up;
    // in the middle the set disagrees on more points and sigma/tau rise.
    let sweep = roc3d(&set, &test)?;
    println!("\n  C      s'      fpr'    sigma   tau");
    for k in [5usize, 25, 50, 75, 95] {
        let p = &sweep[k];
        let fmt = |v: Option<f64>| v.map_or("  NA ".into(), |v| format!("{v:.3}"));
        println!(
            "  {:.3}  {}   {}   {}   {}",
            p.threshold,
            fmt(p.s_prime),
            fmt(p.fpr_prime),
            fmt(p.sigma),
            fmt(p.tau)
        );
    }

    match prediction_only_auc(&sweep) {
        Some(a) => println!("\nAUC over committed predictions only: {a:.4}"),
        None => println!("\nAUC over committed predictions only: undefined"),
    }

    Ok(())
}
