//! Fitting when feature values are only known up to an interval.
//!
//! Measurement censoring replaces each x with [x - eps, x + eps]. Instead
//! of imputing a point, fit the whole family of models consistent with
//! some completion of the data, and report envelope predictions.
//!
//! Run with: cargo run --example interval_features

use ilr::dataset::{CensorMode, Dataset};
use ilr::envelope::{fit_imprecise, predict_interval, ImpreciseOptions};
use ilr::interval::Interval;
use ilr::logistic::{fit_mle, Coefficients, FitOptions};

fn main() -> ilr::error::Result<()> {
    let truth = Coefficients::new(vec![-5.0, 1.0])?;
    let exact = Dataset::synthesize(60, 7, &truth, Interval::new(0.0, 10.0)?);

    for eps in [0.1, 0.25, 0.5] {
        let censored = exact.intervalize(CensorMode::Symmetric, eps, 7 + 1)?;
        let set = fit_imprecise(&censored, &ImpreciseOptions::default())?;

        let bounds = set.coefficient_bounds();
        println!(
            "eps = {eps:<4}  {} candidate models, intercept in [{:.3}, {:.3}], slope in [{:.3}, {:.3}]",
            set.len(),
            bounds[0].lo(),
            bounds[0].hi(),
            bounds[1].lo(),
            bounds[1].hi()
        );

        print!("            p(y=1 | x=5) = ");
        let p = predict_interval(&set, &[Interval::point(5.0)])?;
        println!("[{:.4}, {:.4}]  (width {:.4})", p.lo(), p.hi(), p.width());
    }

    // The model fitted to the uncensored data must be one of the
    // consistent completions, so its curve lies inside the envelope.
    let censored = exact.intervalize(CensorMode::Symmetric, 0.5, 7 + 1)?;
    let set = fit_imprecise(&censored, &ImpreciseOptions::default())?;
    let exact_fit = fit_mle(&exact, &FitOptions::default())?;

    let mut worst: f64 = 0.0;
    for i in 0..=40 {
        let x = 10.0 * i as f64 / 40.0;
        let p = exact_fit.coefficients.predict_proba(&[x]);
        let env = predict_interval(&set, &[Interval::point(x)])?;
        worst = worst.max((env.lo() - p).max(p - env.hi()));
    }
    println!(
        "\nexact-data fit vs eps = 0.5 envelope: worst escape {:.2e} (<= 0 means contained)",
        worst
    );

    Ok(())
}
