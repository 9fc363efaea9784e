//! Fitting when some outcomes were never observed.
//!
//! Each unknown label can be completed as either class, so q unknown
//! labels induce up to 2^q distinct fits. At small q the library
//! enumerates them exactly; this example checks that against the
//! brute-force path and looks at how the ambiguity spreads predictions.
//!
//! Run with: cargo run --example unknown_labels

use ilr::dataset::Dataset;
use ilr::envelope::{
    fit_imprecise, fit_imprecise_bruteforce, predict_interval, BruteForceLimits, ImpreciseOptions,
};
use ilr::interval::Interval;
use ilr::logistic::Coefficients;

fn main() -> ilr::error::Result<()> {
    let truth = Coefficients::new(vec![-5.0, 1.0])?;
    let observed = Dataset::synthesize(30, 3, &truth, Interval::new(0.0, 10.0)?);

    // Drop the labels of three rows near the decision boundary, where the
    // outcome genuinely could have gone either way.
    let censored = observed.censor_labels(&[11, 17, 23])?;
    println!(
        "rows with unknown labels: {:?}",
        censored.unknown_label_rows()
    );

    let set = fit_imprecise(&censored, &ImpreciseOptions::default())?;
    println!("candidate models: {} (= 2^3 label completions)", set.len());

    let oracle = fit_imprecise_bruteforce(&censored, &BruteForceLimits::default())?;
    let mut max_gap: f64 = 0.0;
    for i in 0..=20 {
        let x = Interval::point(10.0 * i as f64 / 20.0);
        let a = predict_interval(&set, &[x])?;
        let b = predict_interval(&oracle, &[x])?;
        max_gap = max_gap.max((a.lo() - b.lo()).abs().max((a.hi() - b.hi()).abs()));
    }
    println!("max envelope gap vs brute force: {max_gap:.2e}");

    println!("\nprediction intervals (wide near the censored rows, tight in the tails):");
    for x in [1.0, 3.0, 5.0, 7.0, 9.0] {
        let p = predict_interval(&set, &[Interval::point(x)])?;
        println!(
            "  x = {x}  p = [{:.4}, {:.4}]  width {:.4}",
            p.lo(),
            p.hi(),
            p.width()
        );
    }

    Ok(())
}
