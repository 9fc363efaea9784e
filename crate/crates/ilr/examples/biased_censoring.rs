//! Why midpoint imputation is not a safe default.
//!
//! Under value-dependent censoring — here readings below 5 get rounded up
//! into [x, x + 2 eps] and readings above get rounded down — the midpoint
//! of each interval is systematically displaced from the true value, and
//! the imputed fit inherits that bias. The envelope fit makes no choice
//! of completion and keeps the true model inside its bounds.
//!
//! Run with: cargo run --example biased_censoring

use ilr::dataset::{CensorMode, CollapseStrategy, Dataset};
use ilr::envelope::{fit_imprecise, predict_interval, ImpreciseOptions};
use ilr::interval::Interval;
use ilr::logistic::{fit_mle, Coefficients, FitOptions};

fn main() -> ilr::error::Result<()> {
    let truth = Coefficients::new(vec![-5.0, 1.0])?;
    let exact = Dataset::synthesize(50, 31, &truth, Interval::new(0.0, 10.0)?);
    let exact_fit = fit_mle(&exact, &FitOptions::default())?;

    let modes = [
        ("symmetric", CensorMode::Symmetric),
        ("left-biased", CensorMode::LeftBiased),
        ("right-biased", CensorMode::RightBiased),
        ("split at 5", CensorMode::SplitBiased { split: 5.0 }),
    ];

    println!(
        "exact-data fit: [{:.3}, {:.3}]\n",
        exact_fit.coefficients.as_slice()[0],
        exact_fit.coefficients.as_slice()[1]
    );
    println!("censoring      midpoint fit          envelope escape of exact fit");

    for (i, (name, mode)) in modes.into_iter().enumerate() {
        let censored = exact.intervalize(mode, 0.375, 32 + i as u64)?;

        let midpoint_fit = fit_mle(
            &censored.collapse(CollapseStrategy::Midpoint)?,
            &FitOptions::default(),
        )?;
        let mb = midpoint_fit.coefficients.as_slice();

        let set = fit_imprecise(&censored, &ImpreciseOptions::default())?;
        let mut escape: f64 = 0.0;
        for k in 0..=40 {
            let x = 10.0 * k as f64 / 40.0;
            let p = exact_fit.coefficients.predict_proba(&[x]);
            let env = predict_interval(&set, &[Interval::point(x)])?;
            escape = escape.max((env.lo() - p).max(p - env.hi()));
        }

        println!(
            "{name:<14} [{:>6.3}, {:>5.3}]       {:.2e}",
            mb[0], mb[1], escape.max(0.0)
        );
    }

    println!(
        "\nThe biased midpoint fits drift from the exact-data coefficients; the\n\
         envelope never excludes the exact-data curve (escape stays at zero)."
    );

    Ok(())
}
