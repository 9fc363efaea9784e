//! Set-valued logistic regression for uncertain training data.
//!
//! When features are interval-censored or labels are unknown, every way of
//! resolving the uncertainty yields a different consistent dataset, and
//! each consistent dataset has its own maximum-likelihood fit. The object
//! of interest is that whole set of models. It is infinite in general, so
//! [`fit_imprecise`] assembles a finite *candidate* [`ModelSet`] whose
//! pointwise prediction envelope approximates the set's:
//!
//! * coefficient extremizations — for each coefficient, a bounded bilevel
//!   search over interior feature values and label completions that pushes
//!   the fitted coefficient as low and as high as it will go;
//! * column-orientation corners — every feature column moved entirely to
//!   its lower or upper endpoints, crossed with the all-zeros and all-ones
//!   label completions when labels are missing;
//! * exact enumeration when the instance is small enough to afford it
//!   (all label completions, and all per-cell endpoint corners).
//!
//! [`fit_imprecise_bruteforce`] is the exhaustive per-cell-corner oracle
//! used to validate the reduction at desk scale, and [`predict_interval`]
//! turns a [`ModelSet`] into interval probabilities.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::logistic::{fit_xy, sigmoid, Coefficients, FitOptions};

/// One member of a [`ModelSet`]: a fitted model plus where it came from.
///
/// `provenance` names the candidate construction (`"extremize:b1:max"`,
/// `"corner:lh|y=0"`, `"labels:010"`, ...) so a set is auditable after the
/// fact. `separation` carries the inner fit's separation flag: such models
/// sit at the coefficient cap and widen the envelope honestly rather than
/// being dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateModel {
    #[serde(rename = "beta")]
    pub coefficients: Coefficients,
    pub provenance: String,
    pub separation: bool,
}

/// A set of candidate logistic models sharing one training dataset.
///
/// Always non-empty; all members have the same dimension. `digest` is the
/// training data's content digest, tying predictions back to their source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSetRepr", into = "ModelSetRepr")]
pub struct ModelSet {
    models: Vec<CandidateModel>,
    digest: String,
}

#[derive(Serialize, Deserialize)]
struct ModelSetRepr {
    models: Vec<CandidateModel>,
    digest: String,
}

impl TryFrom<ModelSetRepr> for ModelSet {
    type Error = Error;

    fn try_from(repr: ModelSetRepr) -> Result<Self> {
        ModelSet::from_parts(repr.models, repr.digest)
    }
}

impl From<ModelSet> for ModelSetRepr {
    fn from(ms: ModelSet) -> ModelSetRepr {
        ModelSetRepr {
            models: ms.models,
            digest: ms.digest,
        }
    }
}

impl ModelSet {
    /// Assemble a set, enforcing non-emptiness and a shared dimension.
    pub fn from_parts(models: Vec<CandidateModel>, digest: String) -> Result<Self> {
        let first = models.first().ok_or(Error::EmptyResult {
            stage: "model set assembly".to_string(),
        })?;
        let dim = first.coefficients.dimension();
        for m in &models {
            if m.coefficients.dimension() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.coefficients.dimension(),
                });
            }
        }
        Ok(ModelSet { models, digest })
    }

    /// Wrap a single precise model so evaluation code can treat precise
    /// and imprecise models uniformly.
    pub fn single(coefficients: Coefficients, digest: String) -> Self {
        ModelSet {
            models: vec![CandidateModel {
                coefficients,
                provenance: "precise".to_string(),
                separation: false,
            }],
            digest,
        }
    }

    pub fn models(&self) -> &[CandidateModel] {
        &self.models
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-emptiness is a construction invariant
    }

    /// Feature dimension shared by every member.
    pub fn dimension(&self) -> usize {
        self.models[0].coefficients.dimension()
    }

    /// Per-coefficient `[min, max]` across the members.
    pub fn coefficient_bounds(&self) -> Vec<Interval> {
        (0..=self.dimension())
            .map(|j| {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for m in &self.models {
                    let b = m.coefficients.as_slice()[j];
                    lo = lo.min(b);
                    hi = hi.max(b);
                }
                Interval::new(lo, hi).expect("coefficients are finite")
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model set serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Knobs for [`fit_imprecise`].
#[derive(Debug, Clone, PartialEq)]
pub struct ImpreciseOptions {
    /// Fit evaluations each coefficient extremization may spend refining
    /// interior feature values and label flips.
    pub refine_budget: usize,
    /// Enumerate all `2^k` column-orientation corners over the `k` columns
    /// that contain interval cells. With `false`, only the all-lower and
    /// all-upper corners are fitted (they are required set members either
    /// way).
    pub include_corners: bool,
    /// With precise features and at most this many unknown labels, replace
    /// the heuristics with the exact label enumeration.
    pub label_enum_threshold: usize,
    /// When the count of interval cells plus unknown labels is at most
    /// this, additionally enumerate every per-cell endpoint corner exactly.
    /// The heuristics still run; enumeration just guarantees the envelope
    /// is no tighter than the corner lattice at small scale.
    pub cell_enum_threshold: usize,
    /// Also fit, per interval-bearing column, the corners that switch
    /// endpoint orientation once along the column (rows ordered by cell
    /// midpoint): upper endpoints below a cut and lower above, plus the
    /// reverse. A monotone censoring bias produces exactly such a
    /// completion, which is extreme for no single coefficient and so
    /// invisible to the extremizations.
    pub orientation_sweeps: bool,
    /// Options for the inner precise fits.
    pub fit: FitOptions,
}

impl Default for ImpreciseOptions {
    fn default() -> Self {
        ImpreciseOptions {
            refine_budget: 500,
            include_corners: true,
            label_enum_threshold: 12,
            cell_enum_threshold: 12,
            orientation_sweeps: true,
            fit: FitOptions::default(),
        }
    }
}

/// Feasibility limits for [`fit_imprecise_bruteforce`].
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceLimits {
    pub max_label_combos: u64,
    pub max_feature_corners: u64,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        BruteForceLimits {
            max_label_combos: 65_536,
            max_feature_corners: 65_536,
        }
    }
}

/// One fully resolved training dataset: a point chosen in every feature
/// interval and a class chosen for every label.
#[derive(Clone)]
struct Assignment {
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
}

impl Assignment {
    /// Start from interval lower endpoints and known labels (unknowns 0).
    fn base(d: &Dataset) -> Assignment {
        Assignment {
            xs: d
                .points()
                .iter()
                .map(|p| p.features.iter().map(Interval::lo).collect())
                .collect(),
            ys: d
                .points()
                .iter()
                .map(|p| p.label.as_f64().unwrap_or(0.0))
                .collect(),
        }
    }

    fn fit(&self, opts: &FitOptions) -> Result<crate::logistic::FittedModel> {
        fit_xy(&self.xs, &self.ys, opts)
    }
}

/// Left-to-right bit string for a mask, index 0 first.
fn mask_string(mask: u64, len: usize, zero: char, one: char) -> String {
    (0..len)
        .map(|k| if mask >> k & 1 == 1 { one } else { zero })
        .collect()
}

/// Interior cut positions `1..len` for an orientation sweep, thinned to
/// at most 256 evenly spaced values so huge columns stay affordable. The
/// boundary cuts 0 and `len` are the plain corners, fitted elsewhere.
fn sweep_cuts(len: usize) -> Vec<usize> {
    const MAX_CUTS: usize = 256;
    if len < 2 {
        return Vec::new();
    }
    let interior = len - 1;
    if interior <= MAX_CUTS {
        return (1..len).collect();
    }
    let mut cuts: Vec<usize> = (0..MAX_CUTS)
        .map(|t| 1 + t * (interior - 1) / (MAX_CUTS - 1))
        .collect();
    cuts.dedup();
    cuts
}

/// Fit the candidate set approximating all models consistent with `d`.
///
/// Deterministic: the same dataset and options always produce the same
/// members in the same (provenance-sorted) order.
pub fn fit_imprecise(d: &Dataset, opts: &ImpreciseOptions) -> Result<ModelSet> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if opts.refine_budget == 0 {
        return Err(Error::InvalidArgument(
            "refine_budget must be at least 1".to_string(),
        ));
    }

    let digest = d.digest();
    let unknown_rows = d.unknown_label_rows();
    let q = unknown_rows.len();
    let free_cells: Vec<(usize, usize)> = d
        .points()
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            p.features
                .iter()
                .enumerate()
                .filter(|(_, iv)| !iv.is_degenerate())
                .map(move |(j, _)| (i, j))
        })
        .collect();
    let uncertain_cols: Vec<usize> = {
        let mut cols: Vec<usize> = free_cells.iter().map(|&(_, j)| j).collect();
        cols.sort_unstable();
        cols.dedup();
        cols
    };

    let mut models: Vec<CandidateModel> = Vec::new();

    // Pure label uncertainty at desk scale: the consistent datasets are
    // exactly the 2^q label completions, so enumerate them and be done.
    if free_cells.is_empty() && q >= 1 && q <= opts.label_enum_threshold {
        let mut asg = Assignment::base(d);
        for mask in 0..(1u64 << q) {
            for (k, &row) in unknown_rows.iter().enumerate() {
                asg.ys[row] = f64::from(mask >> k & 1 == 1);
            }
            let fit = asg.fit(&opts.fit)?;
            models.push(CandidateModel {
                coefficients: fit.coefficients,
                provenance: format!("labels:{}", mask_string(mask, q, '0', '1')),
                separation: fit.report.separation_detected,
            });
        }
        models.sort_by(|a, b| a.provenance.cmp(&b.provenance));
        return ModelSet::from_parts(models, digest);
    }

    // Column-orientation corners: every interval-bearing column pushed
    // entirely to its lower or upper endpoints. These are both candidates
    // and the starting points for the extremizations below.
    let k = uncertain_cols.len();
    if opts.include_corners && k > 16 {
        let count = 1u64.checked_shl(k as u32).unwrap_or(u64::MAX);
        return Err(Error::LimitsExceeded {
            what: "column-orientation corner enumeration (set include_corners to false)"
                .to_string(),
            exponent: k as u32,
            count,
            limit: 1 << 16,
        });
    }
    let corner_masks: Vec<u64> = if opts.include_corners {
        (0..(1u64 << k)).collect()
    } else if k > 0 {
        // All-lower and all-upper stay: the set invariant requires them.
        vec![0, (1u64 << k) - 1]
    } else {
        vec![0]
    };
    let completions: &[Option<f64>] = if q > 0 {
        &[Some(0.0), Some(1.0)]
    } else {
        &[None]
    };

    let mut corner_states: Vec<(Assignment, crate::logistic::FittedModel)> = Vec::new();
    for &mask in &corner_masks {
        for completion in completions {
            let mut asg = Assignment::base(d);
            for (bit, &col) in uncertain_cols.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    for (row, p) in d.points().iter().enumerate() {
                        asg.xs[row][col] = p.features[col].hi();
                    }
                }
            }
            if let Some(fill) = completion {
                for &row in &unknown_rows {
                    asg.ys[row] = *fill;
                }
            }
            let fit = asg.fit(&opts.fit)?;
            let label_tag = match completion {
                Some(v) => format!("|y={v}"),
                None => String::new(),
            };
            models.push(CandidateModel {
                coefficients: fit.coefficients.clone(),
                provenance: format!(
                    "corner:{}{}",
                    mask_string(mask, k, 'l', 'h'),
                    label_tag
                ),
                separation: fit.report.separation_detected,
            });
            corner_states.push((asg, fit));
        }
    }

    // Coefficient extremizations: for every coefficient and direction,
    // start from the most favorable corner and let a bounded coordinate
    // descent move individual cells inside their intervals (and flip
    // individual unknown labels) while the fitted coefficient improves.
    let m = d.dimension();
    for i in 0..=m {
        for maximize in [false, true] {
            let objective = |fit: &crate::logistic::FittedModel| -> f64 {
                let b = fit.coefficients.as_slice()[i];
                if maximize {
                    b
                } else {
                    -b
                }
            };
            let seed = corner_states
                .iter()
                .max_by(|a, b| objective(&a.1).total_cmp(&objective(&b.1)))
                .expect("at least one corner fit");
            let mut best_asg = seed.0.clone();
            let mut best_fit = seed.1.clone();
            let mut best_val = objective(&best_fit);

            let mut budget = opts.refine_budget;
            let mut improved = true;
            'refine: while improved {
                improved = false;
                for &(row, col) in &free_cells {
                    let iv = d.points()[row].features[col];
                    let current = best_asg.xs[row][col];
                    for value in [iv.lo(), iv.midpoint(), iv.hi()] {
                        if value == current {
                            continue;
                        }
                        if budget == 0 {
                            break 'refine;
                        }
                        budget -= 1;
                        let mut asg = best_asg.clone();
                        asg.xs[row][col] = value;
                        let fit = asg.fit(&opts.fit)?;
                        let val = objective(&fit);
                        if val > best_val + 1e-12 {
                            best_asg = asg;
                            best_fit = fit;
                            best_val = val;
                            improved = true;
                        }
                    }
                }
                for &row in &unknown_rows {
                    if budget == 0 {
                        break 'refine;
                    }
                    budget -= 1;
                    let mut asg = best_asg.clone();
                    asg.ys[row] = 1.0 - asg.ys[row];
                    let fit = asg.fit(&opts.fit)?;
                    let val = objective(&fit);
                    if val > best_val + 1e-12 {
                        best_asg = asg;
                        best_fit = fit;
                        best_val = val;
                        improved = true;
                    }
                }
            }

            models.push(CandidateModel {
                coefficients: best_fit.coefficients,
                provenance: format!(
                    "extremize:b{i}:{}",
                    if maximize { "max" } else { "min" }
                ),
                separation: best_fit.report.separation_detected,
            });
        }
    }

    // Orientation-switch sweeps along each column.
    if opts.orientation_sweeps {
        for &col in &uncertain_cols {
            let mut rows: Vec<usize> = free_cells
                .iter()
                .filter(|&&(_, j)| j == col)
                .map(|&(r, _)| r)
                .collect();
            rows.sort_by(|&a, &b| {
                d.points()[a].features[col]
                    .midpoint()
                    .total_cmp(&d.points()[b].features[col].midpoint())
                    .then(a.cmp(&b))
            });
            for cut in sweep_cuts(rows.len()) {
                for hi_below in [true, false] {
                    for completion in completions {
                        let mut asg = Assignment::base(d);
                        // Unswept cells sit at their midpoints, a neutral
                        // interior choice; the swept column takes one
                        // endpoint below the cut and the other above.
                        for &(r, j) in &free_cells {
                            asg.xs[r][j] = d.points()[r].features[j].midpoint();
                        }
                        for (idx, &r) in rows.iter().enumerate() {
                            let iv = d.points()[r].features[col];
                            asg.xs[r][col] = if (idx < cut) == hi_below {
                                iv.hi()
                            } else {
                                iv.lo()
                            };
                        }
                        if let Some(fill) = completion {
                            for &row in &unknown_rows {
                                asg.ys[row] = *fill;
                            }
                        }
                        let fit = asg.fit(&opts.fit)?;
                        let label_tag = match completion {
                            Some(v) => format!("|y={v}"),
                            None => String::new(),
                        };
                        models.push(CandidateModel {
                            coefficients: fit.coefficients,
                            provenance: format!(
                                "sweep:f{col}:{}:{cut:06}{label_tag}",
                                if hi_below { "hl" } else { "lh" }
                            ),
                            separation: fit.report.separation_detected,
                        });
                    }
                }
            }
        }
    }

    // Small instances afford the exact per-cell corner lattice on top of
    // the heuristics, so the envelope provably covers what the brute-force
    // oracle would find.
    if !free_cells.is_empty() && free_cells.len() + q <= opts.cell_enum_threshold {
        append_cell_lattice(d, &free_cells, &unknown_rows, &opts.fit, &mut models)?;
    }

    models.sort_by(|a, b| a.provenance.cmp(&b.provenance));
    ModelSet::from_parts(models, digest)
}

/// Fit every combination of per-cell interval endpoints and label
/// completions, pushing the results onto `models`.
fn append_cell_lattice(
    d: &Dataset,
    free_cells: &[(usize, usize)],
    unknown_rows: &[usize],
    fit_opts: &FitOptions,
    models: &mut Vec<CandidateModel>,
) -> Result<()> {
    let c = free_cells.len();
    let q = unknown_rows.len();
    let mut asg = Assignment::base(d);
    for lmask in 0..(1u64 << q) {
        for (k, &row) in unknown_rows.iter().enumerate() {
            asg.ys[row] = f64::from(lmask >> k & 1 == 1);
        }
        for cmask in 0..(1u64 << c) {
            for (bit, &(row, col)) in free_cells.iter().enumerate() {
                let iv = d.points()[row].features[col];
                asg.xs[row][col] = if cmask >> bit & 1 == 1 { iv.hi() } else { iv.lo() };
            }
            let fit = asg.fit(fit_opts)?;
            let mut provenance = format!("cells:{}", mask_string(cmask, c, 'l', 'h'));
            if q > 0 {
                provenance.push_str(&format!("|labels:{}", mask_string(lmask, q, '0', '1')));
            }
            models.push(CandidateModel {
                coefficients: fit.coefficients,
                provenance,
                separation: fit.report.separation_detected,
            });
        }
    }
    Ok(())
}

/// Exhaustive corner oracle: every label completion crossed with every
/// per-cell endpoint choice. Exact over that lattice, and exponential, so
/// it refuses instances beyond `limits` instead of running forever.
pub fn fit_imprecise_bruteforce(d: &Dataset, limits: &BruteForceLimits) -> Result<ModelSet> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let unknown_rows = d.unknown_label_rows();
    let q = unknown_rows.len();
    let free_cells: Vec<(usize, usize)> = d
        .points()
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            p.features
                .iter()
                .enumerate()
                .filter(|(_, iv)| !iv.is_degenerate())
                .map(move |(j, _)| (i, j))
        })
        .collect();
    let c = free_cells.len();

    let label_combos = 1u64.checked_shl(q as u32).unwrap_or(u64::MAX);
    if label_combos > limits.max_label_combos {
        return Err(Error::LimitsExceeded {
            what: "label completions".to_string(),
            exponent: q as u32,
            count: label_combos,
            limit: limits.max_label_combos,
        });
    }
    let corner_combos = 1u64.checked_shl(c as u32).unwrap_or(u64::MAX);
    if corner_combos > limits.max_feature_corners {
        return Err(Error::LimitsExceeded {
            what: "feature endpoint corners".to_string(),
            exponent: c as u32,
            count: corner_combos,
            limit: limits.max_feature_corners,
        });
    }

    let fit_opts = FitOptions::default();
    let mut models = Vec::with_capacity((label_combos * corner_combos) as usize);
    if c == 0 && q == 0 {
        let fit = Assignment::base(d).fit(&fit_opts)?;
        models.push(CandidateModel {
            coefficients: fit.coefficients,
            provenance: "precise".to_string(),
            separation: fit.report.separation_detected,
        });
    } else {
        append_cell_lattice(d, &free_cells, &unknown_rows, &fit_opts, &mut models)?;
        // Pure-label instances get plain labels: tags for readability.
        if c == 0 {
            for m in &mut models {
                m.provenance = m.provenance.replace("cells:|", "");
            }
        }
    }
    models.sort_by(|a, b| a.provenance.cmp(&b.provenance));
    ModelSet::from_parts(models, d.digest())
}

/// Interval probability of class 1 at an interval feature vector: the
/// union hull of each member's prediction interval.
///
/// Per member the score range comes from exact interval arithmetic on the
/// linear score; the sigmoid is monotone, so mapping the two score
/// endpoints gives the exact probability interval for that member.
pub fn predict_interval(ms: &ModelSet, x: &[Interval]) -> Result<Interval> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for member in ms.models() {
        let s = member.coefficients.score_bounds(x)?;
        lo = lo.min(sigmoid(s.lo()));
        hi = hi.max(sigmoid(s.hi()));
    }
    Interval::new(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{CensorMode, DataPoint};
    use crate::interval::UncertainLabel;
    use crate::logistic::fit_mle;
    use approx::assert_relative_eq;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn envelope_at(ms: &ModelSet, x: f64) -> Interval {
        predict_interval(ms, &[Interval::point(x)]).unwrap()
    }

    #[test]
    fn predict_interval_hand_cases() {
        // Two intercept-only models straddling zero.
        let ms = ModelSet::from_parts(
            vec![
                CandidateModel {
                    coefficients: Coefficients::new(vec![-1.0]).unwrap(),
                    provenance: "a".to_string(),
                    separation: false,
                },
                CandidateModel {
                    coefficients: Coefficients::new(vec![1.0]).unwrap(),
                    provenance: "b".to_string(),
                    separation: false,
                },
            ],
            "d".to_string(),
        )
        .unwrap();
        let p = predict_interval(&ms, &[]).unwrap();
        assert_relative_eq!(p.lo(), 0.2689, max_relative = 1e-3);
        assert_relative_eq!(p.hi(), 0.7311, max_relative = 1e-3);

        // Single model, degenerate input: degenerate prediction.
        let single = ModelSet::single(Coefficients::new(vec![0.5, 2.0]).unwrap(), "d".to_string());
        let p = predict_interval(&single, &[Interval::point(0.25)]).unwrap();
        assert!(p.is_degenerate());
        assert_relative_eq!(p.lo(), sigmoid(1.0));

        // Single model, interval input: sigmoid of the score bounds.
        let ms = ModelSet::single(Coefficients::new(vec![0.0, 1.0]).unwrap(), "d".to_string());
        let p = predict_interval(&ms, &[Interval::new(-1.0, 1.0).unwrap()]).unwrap();
        assert_relative_eq!(p.lo(), sigmoid(-1.0));
        assert_relative_eq!(p.hi(), sigmoid(1.0));

        // Dimension mismatch is an error.
        assert!(predict_interval(&ms, &[]).is_err());
    }

    #[test]
    fn one_unknown_label_gives_the_two_completions() {
        let mut d = Dataset::from_precise(
            &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            &[false, true, false, true],
        )
        .unwrap();
        d = d.censor_labels(&[2]).unwrap();

        let ms = fit_imprecise(&d, &ImpreciseOptions::default()).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms.models()[0].provenance, "labels:0");
        assert_eq!(ms.models()[1].provenance, "labels:1");

        for (mask, member) in [(false, &ms.models()[0]), (true, &ms.models()[1])] {
            let completed = Dataset::from_precise(
                &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
                &[false, true, mask, true],
            )
            .unwrap();
            let direct = fit_mle(&completed, &FitOptions::default()).unwrap();
            for (a, b) in member
                .coefficients
                .as_slice()
                .iter()
                .zip(direct.coefficients.as_slice())
            {
                assert_relative_eq!(a, b, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn bruteforce_counts_and_limits() {
        // q = 3 unknown labels, precise features: exactly 8 models.
        let d = Dataset::from_precise(
            &[vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            &[false, true, false, true, true],
        )
        .unwrap()
        .censor_labels(&[1, 2, 3])
        .unwrap();
        let ms = fit_imprecise_bruteforce(&d, &BruteForceLimits::default()).unwrap();
        assert_eq!(ms.len(), 8);
        assert!(ms.models().iter().all(|m| m.provenance.starts_with("labels:")));

        // Fully precise: one model, equal to the precise fit.
        let precise = Dataset::from_precise(&[vec![0.0], vec![2.0]], &[false, true]).unwrap();
        let ms = fit_imprecise_bruteforce(&precise, &BruteForceLimits::default()).unwrap();
        assert_eq!(ms.len(), 1);
        let direct = fit_mle(&precise, &FitOptions::default()).unwrap();
        assert_eq!(
            ms.models()[0].coefficients.as_slice(),
            direct.coefficients.as_slice()
        );

        // 25 unknowns exceeds the default limit, and the error says so.
        let big = Dataset::from_precise(
            &(0..25).map(|i| vec![i as f64]).collect::<Vec<_>>(),
            &[true; 25],
        )
        .unwrap()
        .censor_labels(&(0..25).collect::<Vec<_>>())
        .unwrap();
        let err = fit_imprecise_bruteforce(&big, &BruteForceLimits::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2^25") && msg.contains("33554432"), "{msg}");
    }

    #[test]
    fn degenerate_collapse_to_precise_fit() {
        let d = Dataset::from_precise(
            &[vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0], vec![5.0]],
            &[false, false, true, false, true, true],
        )
        .unwrap();
        let direct = fit_mle(&d, &FitOptions::default()).unwrap();
        let ms = fit_imprecise(&d, &ImpreciseOptions::default()).unwrap();
        assert!(ms.len() >= 3); // corner + 2m+2 extremizations, all equal
        for member in ms.models() {
            for (a, b) in member
                .coefficients
                .as_slice()
                .iter()
                .zip(direct.coefficients.as_slice())
            {
                assert_relative_eq!(a, b, epsilon = 1e-6);
            }
        }
        // Degenerate prediction interval on a point input.
        let p = predict_interval(&ms, &[Interval::point(2.5)]).unwrap();
        assert!(p.width() < 1e-9);
        assert_relative_eq!(p.lo(), direct.coefficients.predict_proba(&[2.5]), epsilon = 1e-9);
    }

    #[test]
    fn envelope_contains_every_member_curve() {
        let d = interval_toy();
        let ms = fit_imprecise(&d, &ImpreciseOptions::default()).unwrap();
        for x in grid(-1.0, 6.0, 21) {
            let env = envelope_at(&ms, x);
            for member in ms.models() {
                let p = member.coefficients.predict_proba(&[x]);
                assert!(env.contains(p), "member escaped envelope at {x}");
            }
        }
    }

    fn interval_toy() -> Dataset {
        // Six rows, all feature cells non-degenerate.
        let cells = [
            (0.0, 1.0, false),
            (0.5, 1.8, false),
            (1.5, 2.5, false),
            (2.2, 3.4, true),
            (3.0, 4.2, true),
            (4.0, 5.0, true),
        ];
        Dataset::new(
            vec!["x1".to_string()],
            cells
                .iter()
                .map(|&(lo, hi, y)| DataPoint {
                    features: vec![Interval::new(lo, hi).unwrap()],
                    label: UncertainLabel::Known(y),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn reduction_dominates_bruteforce_oracle() {
        let d = interval_toy();
        let reduced = fit_imprecise(&d, &ImpreciseOptions::default()).unwrap();
        let oracle = fit_imprecise_bruteforce(&d, &BruteForceLimits::default()).unwrap();
        assert_eq!(oracle.len(), 64);

        for x in grid(-1.0, 6.0, 21) {
            let env = envelope_at(&reduced, x);
            let oracle_env = envelope_at(&oracle, x);
            assert!(
                env.lo() <= oracle_env.lo() + 1e-6 && env.hi() >= oracle_env.hi() - 1e-6,
                "oracle envelope escaped at {x}: {oracle_env:?} vs {env:?}"
            );
        }
        let rb = reduced.coefficient_bounds();
        let ob = oracle.coefficient_bounds();
        for (r, o) in rb.iter().zip(&ob) {
            assert!(r.lo() <= o.lo() + 1e-3 && r.hi() >= o.hi() - 1e-3);
        }
    }

    #[test]
    fn label_enumeration_matches_bruteforce_exactly() {
        let d = Dataset::from_precise(
            &[vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0], vec![5.0]],
            &[false, false, true, false, true, true],
        )
        .unwrap()
        .censor_labels(&[1, 3, 4])
        .unwrap();
        let reduced = fit_imprecise(&d, &ImpreciseOptions::default()).unwrap();
        let oracle = fit_imprecise_bruteforce(&d, &BruteForceLimits::default()).unwrap();
        assert_eq!(reduced.len(), 8);
        assert_eq!(oracle.len(), 8);
        for (a, b) in reduced.models().iter().zip(oracle.models()) {
            assert_eq!(a.provenance, b.provenance);
            for (x, y) in a
                .coefficients
                .as_slice()
                .iter()
                .zip(b.coefficients.as_slice())
            {
                assert_relative_eq!(x, y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn corner_members_always_present() {
        let d = interval_toy();
        let full = fit_imprecise(&d, &ImpreciseOptions::default()).unwrap();
        let tags: Vec<&str> = full.models().iter().map(|m| m.provenance.as_str()).collect();
        assert!(tags.contains(&"corner:l"));
        assert!(tags.contains(&"corner:h"));

        let slim = fit_imprecise(
            &d,
            &ImpreciseOptions {
                include_corners: false,
                cell_enum_threshold: 0,
                orientation_sweeps: false,
                ..ImpreciseOptions::default()
            },
        )
        .unwrap();
        let tags: Vec<&str> = slim.models().iter().map(|m| m.provenance.as_str()).collect();
        assert!(tags.contains(&"corner:l"));
        assert!(tags.contains(&"corner:h"));
        // 2 corners + 2m+2 = 4 extremizations.
        assert_eq!(slim.len(), 6);
    }

    #[test]
    fn orientation_sweep_fits_the_switch_corners() {
        // A censoring whose direction flips along the axis produces a
        // completion taking upper endpoints below the flip and lower ones
        // above. That exact corner must be fitted as a sweep candidate.
        let d = interval_toy();
        let set = fit_imprecise(&d, &ImpreciseOptions::default()).unwrap();
        let cut2 = set
            .models()
            .iter()
            .find(|m| m.provenance == "sweep:f0:hl:000002")
            .expect("sweep candidate missing");

        let xs: Vec<Vec<f64>> = d
            .points()
            .iter()
            .enumerate()
            .map(|(row, p)| {
                let iv = p.features[0];
                // interval_toy rows are already sorted by midpoint.
                vec![if row < 2 { iv.hi() } else { iv.lo() }]
            })
            .collect();
        let ys: Vec<bool> = d
            .points()
            .iter()
            .map(|p| p.label == UncertainLabel::Known(true))
            .collect();
        let direct = crate::logistic::fit_mle(
            &Dataset::from_precise(&xs, &ys).unwrap(),
            &FitOptions::default(),
        )
        .unwrap();
        for (a, b) in cut2
            .coefficients
            .as_slice()
            .iter()
            .zip(direct.coefficients.as_slice())
        {
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn widening_intervals_widens_the_envelope() {
        let base = Dataset::synthesize(
            12,
            5,
            &Coefficients::new(vec![-2.0, 0.8]).unwrap(),
            Interval::new(0.0, 5.0).unwrap(),
        );
        let narrow = base.intervalize(CensorMode::Symmetric, 0.2, 3).unwrap();
        // Same centers, grown half-width.
        let wide = Dataset::new(
            narrow.feature_names().to_vec(),
            narrow
                .points()
                .iter()
                .map(|p| DataPoint {
                    features: p
                        .features
                        .iter()
                        .map(|iv| {
                            Interval::new(iv.midpoint() - 0.5, iv.midpoint() + 0.5).unwrap()
                        })
                        .collect(),
                    label: p.label,
                })
                .collect(),
        )
        .unwrap();

        let opts = ImpreciseOptions::default();
        let narrow_ms = fit_imprecise(&narrow, &opts).unwrap();
        let wide_ms = fit_imprecise(&wide, &opts).unwrap();
        for x in grid(0.0, 5.0, 21) {
            let ne = envelope_at(&narrow_ms, x);
            let we = envelope_at(&wide_ms, x);
            assert!(
                we.lo() <= ne.lo() + 1e-6 && we.hi() >= ne.hi() - 1e-6,
                "wider data gave a tighter envelope at {x}: narrow {ne:?}, wide {we:?}"
            );
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let d = interval_toy().censor_labels(&[0]).unwrap();
        let a = fit_imprecise(&d, &ImpreciseOptions::default()).unwrap();
        let b = fit_imprecise(&d, &ImpreciseOptions::default()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn json_shape_and_round_trip() {
        let d = interval_toy();
        let ms = fit_imprecise(&d, &ImpreciseOptions::default()).unwrap();
        let json = ms.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["digest"].is_string());
        assert!(v["models"][0]["beta"].is_array());
        assert!(v["models"][0]["provenance"].is_string());
        assert!(v["models"][0]["separation"].is_boolean());
        let back = ModelSet::from_json(&json).unwrap();
        assert_eq!(ms, back);

        // An empty set cannot be deserialized.
        assert!(ModelSet::from_json(r#"{"models": [], "digest": "x"}"#).is_err());
    }

    #[test]
    fn rejects_empty_and_zero_budget() {
        let empty = Dataset::new(vec!["x1".to_string()], vec![]).unwrap();
        assert!(matches!(
            fit_imprecise(&empty, &ImpreciseOptions::default()),
            Err(Error::EmptyDataset)
        ));
        let d = interval_toy();
        assert!(matches!(
            fit_imprecise(
                &d,
                &ImpreciseOptions {
                    refine_budget: 0,
                    ..ImpreciseOptions::default()
                }
            ),
            Err(Error::InvalidArgument(_))
        ));
    }
}
