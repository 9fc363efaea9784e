//! Logistic regression for data you are not sure about.
//!
//! Real datasets carry two kinds of uncertainty that standard fitting
//! silently erases: a measurement may be known only to an interval, and a
//! label may be missing entirely. Imputing midpoints or dropping rows
//! produces a single model that looks confident and may be wrong. This
//! crate instead works with the *set* of logistic regression models that
//! are consistent with some completion of the data: fit an envelope over
//! that set, predict interval probabilities, and let a classifier say
//! *dunno* when the interval straddles the decision threshold.
//!
//! The pieces:
//!
//! - [`interval`]: closed intervals and maybe-unknown binary labels.
//! - [`dataset`]: datasets of interval features and uncertain labels, with
//!   CSV/JSON round trips, synthesis, censoring, and collapse operations.
//! - [`logistic`]: the precise fitter — Newton iterations with optional
//!   ridge shrinkage and explicit separation detection.
//! - [`envelope`]: the set-valued fitter producing a [`envelope::ModelSet`]
//!   whose member models bracket every consistent completion, plus
//!   interval predictions.
//! - [`eval`]: three-way classification, confusion matrices that keep
//!   abstentions visible, and ROC analysis for models and model sets.
//! - [`cli`]: the `ilr` binary — `synth`, `fit`, `eval` — with
//!   deterministic seeded runs.
//!
//! ```
//! use ilr::dataset::Dataset;
//! use ilr::envelope::{fit_imprecise, predict_interval, ImpreciseOptions};
//! use ilr::interval::Interval;
//!
//! // Two of these rows have interval features: the fitted envelope
//! // covers every dataset consistent with them.
//! let data = Dataset::new(
//!     vec!["dose".to_string()],
//!     vec![
//!         (Interval::point(0.5), false).into(),
//!         (Interval::new(0.8, 1.6)?, false).into(),
//!         (Interval::new(1.9, 2.9)?, true).into(),
//!         (Interval::point(3.1), true).into(),
//!     ],
//! )?;
//! let set = fit_imprecise(&data, &ImpreciseOptions::default())?;
//! let p = predict_interval(&set, &[Interval::point(1.8)])?;
//! assert!(p.lo() < p.hi()); // genuinely uncertain prediction
//! # Ok::<(), ilr::error::Error>(())
//! ```

pub mod cli;
pub mod dataset;
pub mod envelope;
pub mod error;
pub mod eval;
pub mod interval;
pub mod logistic;
