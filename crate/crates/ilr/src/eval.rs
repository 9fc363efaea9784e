//! Classification and evaluation under uncertainty.
//!
//! An interval probability crossing the decision threshold cannot be
//! forced into positive or negative; [`classify`] returns a three-way
//! [`Decision`] with an explicit *dunno* outcome (or applies one of the
//! two hard rules that never abstain). The rest of the module measures
//! such classifiers: confusion matrices that tabulate abstentions
//! separately or as count intervals, prediction-quality statistics with
//! explicit undefined values, and ROC analysis for point models, model
//! sets (band + interval AUC), and threshold sweeps with abstention rates
//! on the third axis.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::envelope::{predict_interval, ModelSet};
use crate::error::{Error, Result};
use crate::interval::{Interval, UncertainLabel};

/// Outcome of a three-way classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Positive,
    Negative,
    Dunno,
}

/// How to act on an interval probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionRule {
    /// Positive or negative only when the whole interval agrees; otherwise
    /// Dunno.
    Abstain,
    /// Treat the upper bound as the probability: positive iff `p.hi >= C`.
    /// The aggressive rule — never lets a possible positive through.
    UpperBound,
    /// Treat the lower bound as the probability: positive iff `p.lo >= C`.
    /// The conservative rule — acts only on certain positives.
    LowerBound,
}

/// Classify an interval probability `p` against threshold `C`.
///
/// Under [`DecisionRule::Abstain`], a degenerate `p` is an ordinary
/// probability and follows the classical `p >= C` rule; a non-degenerate
/// `p` must clear `C` entirely (`p.lo > C` for positive, `p.hi < C` for
/// negative) and is `Dunno` whenever `C` lies inside it, boundary
/// included.
pub fn classify(p: Interval, threshold: f64, rule: DecisionRule) -> Result<Decision> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidThreshold(threshold));
    }
    if p.lo() < 0.0 || p.hi() > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "probability interval [{}, {}] is not inside [0, 1]",
            p.lo(),
            p.hi()
        )));
    }
    Ok(match rule {
        DecisionRule::Abstain => {
            if p.is_degenerate() {
                if p.lo() >= threshold {
                    Decision::Positive
                } else {
                    Decision::Negative
                }
            } else if p.lo() > threshold {
                Decision::Positive
            } else if p.hi() < threshold {
                Decision::Negative
            } else {
                Decision::Dunno
            }
        }
        DecisionRule::UpperBound => {
            if p.hi() >= threshold {
                Decision::Positive
            } else {
                Decision::Negative
            }
        }
        DecisionRule::LowerBound => {
            if p.lo() >= threshold {
                Decision::Positive
            } else {
                Decision::Negative
            }
        }
    })
}

/// Confusion counts with abstentions tabulated separately.
///
/// Rows are predictions, columns are truth: `a` true positives, `b` false
/// positives, `c` false negatives, `d` true negatives, `e` abstained
/// positives, `f` abstained negatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TernaryConfusion {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub e: u64,
    pub f: u64,
}

impl TernaryConfusion {
    pub fn new(a: u64, b: u64, c: u64, d: u64, e: u64, f: u64) -> Self {
        TernaryConfusion { a, b, c, d, e, f }
    }

    /// Actual positives: `a + c + e`.
    pub fn total_pos(&self) -> u64 {
        self.a + self.c + self.e
    }

    /// Actual negatives: `b + d + f`.
    pub fn total_neg(&self) -> u64 {
        self.b + self.d + self.f
    }
}

/// Tabulate three-way decisions against known truth labels.
pub fn ternary_confusion(
    decisions: &[Decision],
    truth: &[UncertainLabel],
) -> Result<TernaryConfusion> {
    if decisions.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: decisions.len(),
            right: truth.len(),
        });
    }
    let mut t = TernaryConfusion::new(0, 0, 0, 0, 0, 0);
    for (row, (dec, lab)) in decisions.iter().zip(truth).enumerate() {
        let positive = match lab {
            UncertainLabel::Known(v) => *v,
            UncertainLabel::Unknown => return Err(Error::UnknownTruthLabel { row }),
        };
        match (dec, positive) {
            (Decision::Positive, true) => t.a += 1,
            (Decision::Positive, false) => t.b += 1,
            (Decision::Negative, true) => t.c += 1,
            (Decision::Negative, false) => t.d += 1,
            (Decision::Dunno, true) => t.e += 1,
            (Decision::Dunno, false) => t.f += 1,
        }
    }
    Ok(t)
}

/// Prediction-quality statistics; `None` marks an undefined value (zero
/// denominator), which must stay distinguishable from a genuine 0.
///
/// `s`/`t` are the classical sensitivity/specificity and only exist when
/// nothing was abstained (`e = f = 0`). The primed versions condition on a
/// prediction having been made; `sigma`/`tau` are the abstention rates per
/// class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyStats {
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub s_prime: Option<f64>,
    pub t_prime: Option<f64>,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

/// Compute `s, t, s', t', sigma, tau` from ternary counts.
pub fn uncertainty_stats(t: &TernaryConfusion) -> UncertaintyStats {
    let no_abstentions = t.e == 0 && t.f == 0;
    UncertaintyStats {
        s: if no_abstentions { ratio(t.a, t.a + t.c) } else { None },
        t: if no_abstentions { ratio(t.d, t.b + t.d) } else { None },
        s_prime: ratio(t.a, t.a + t.c),
        t_prime: ratio(t.d, t.b + t.d),
        sigma: ratio(t.e, t.a + t.c + t.e),
        tau: ratio(t.f, t.b + t.d + t.f),
    }
}

/// A count known only to a range, from abstentions that could fall either
/// way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountInterval {
    pub lo: u64,
    pub hi: u64,
}

impl CountInterval {
    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }
}

/// Classical 2x2 confusion matrix with interval cells: every abstained
/// point contributes `[0, 1]` to both cells of its truth column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalConfusion {
    pub a: CountInterval,
    pub b: CountInterval,
    pub c: CountInterval,
    pub d: CountInterval,
    pub total_pos: u64,
    pub total_neg: u64,
    pub n: u64,
}

/// Evaluate a model set on a labeled test set as an interval confusion
/// matrix at threshold `C` (abstain rule).
pub fn interval_confusion(
    ms: &ModelSet,
    test: &Dataset,
    threshold: f64,
) -> Result<IntervalConfusion> {
    let mut a = 0;
    let mut b = 0;
    let mut c = 0;
    let mut d = 0;
    let mut e = 0;
    let mut f = 0;
    for (row, point) in test.points().iter().enumerate() {
        let positive = match point.label {
            UncertainLabel::Known(v) => v,
            UncertainLabel::Unknown => return Err(Error::UnknownTruthLabel { row }),
        };
        let p = predict_interval(ms, &point.features)?;
        match (classify(p, threshold, DecisionRule::Abstain)?, positive) {
            (Decision::Positive, true) => a += 1,
            (Decision::Positive, false) => b += 1,
            (Decision::Negative, true) => c += 1,
            (Decision::Negative, false) => d += 1,
            (Decision::Dunno, true) => e += 1,
            (Decision::Dunno, false) => f += 1,
        }
    }
    Ok(IntervalConfusion {
        a: CountInterval { lo: a, hi: a + e },
        b: CountInterval { lo: b, hi: b + f },
        c: CountInterval { lo: c, hi: c + e },
        d: CountInterval { lo: d, hi: d + f },
        total_pos: a + c + e,
        total_neg: b + d + f,
        n: a + b + c + d + e + f,
    })
}

/// One operating point of a ROC curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub sensitivity: f64,
}

/// ROC operating points, stored in ascending threshold order, so `fpr`
/// and `sensitivity` run from (1, 1) down to (0, 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

/// Sweep every distinct score (plus the anchors 0 and 1) as a threshold,
/// predicting positive where `score >= C`.
pub fn roc(scores: &[f64], truth: &[bool]) -> Result<RocCurve> {
    if scores.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: truth.len(),
        });
    }
    if let Some(bad) = scores.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: format!("score {bad}"),
        });
    }
    let pos = truth.iter().filter(|&&y| y).count() as f64;
    let neg = truth.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return Err(Error::SingleClass);
    }

    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.push(0.0);
    thresholds.push(1.0);
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let mut points: Vec<RocPoint> = thresholds
        .iter()
        .map(|&c| {
            let mut tp = 0u64;
            let mut fp = 0u64;
            for (&score, &y) in scores.iter().zip(truth) {
                if score >= c {
                    if y {
                        tp += 1;
                    } else {
                        fp += 1;
                    }
                }
            }
            RocPoint {
                threshold: c,
                fpr: fp as f64 / neg,
                sensitivity: tp as f64 / pos,
            }
        })
        .collect();
    // A score equal to the top threshold would leave the curve hanging
    // short of (0, 0) and break the concordance identity; close it one
    // ulp higher. Probability scores sit strictly inside (0, 1), so this
    // only fires on boundary or out-of-range scores.
    if let Some(last) = points.last() {
        if last.fpr > 0.0 || last.sensitivity > 0.0 {
            let above = f64::from_bits(last.threshold.to_bits() + 1);
            points.push(RocPoint {
                threshold: above,
                fpr: 0.0,
                sensitivity: 0.0,
            });
        }
    }
    Ok(RocCurve { points })
}

/// Area under a ROC curve by the trapezoid rule.
///
/// With thresholds at every distinct score this equals the probability
/// that a random positive outscores a random negative, ties counted half.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[0].fpr - w[1].fpr) * (w[0].sensitivity + w[1].sensitivity) / 2.0)
        .sum()
}

/// One grid point of a ROC band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocBandPoint {
    pub fpr: f64,
    pub s_lo: f64,
    pub s_hi: f64,
}

/// Pointwise sensitivity envelope over a model set's ROC curves, plus the
/// interval of member AUCs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocBand {
    pub points: Vec<RocBandPoint>,
    pub auc: Interval,
}

/// Number of fpr grid points in a [`RocBand`].
pub const ROC_BAND_GRID: usize = 512;

/// Sensitivity of a curve at an arbitrary fpr, by linear interpolation.
///
/// Duplicate fpr knots (vertical ROC segments) collapse to their highest
/// sensitivity — the value the staircase attains at that fpr.
fn interpolate_sensitivity(curve: &RocCurve, at: f64) -> f64 {
    let mut knots: Vec<(f64, f64)> = curve
        .points
        .iter()
        .map(|p| (p.fpr, p.sensitivity))
        .collect();
    knots.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    knots.dedup_by(|next, prev| {
        if next.0 == prev.0 {
            prev.1 = prev.1.max(next.1);
            true
        } else {
            false
        }
    });

    match knots.binary_search_by(|k| k.0.total_cmp(&at)) {
        Ok(i) => knots[i].1,
        Err(0) => knots[0].1,
        Err(i) if i == knots.len() => knots[i - 1].1,
        Err(i) => {
            let (x0, y0) = knots[i - 1];
            let (x1, y1) = knots[i];
            y0 + (y1 - y0) * (at - x0) / (x1 - x0)
        }
    }
}

/// Evaluate every member model on the test set and envelope the curves.
///
/// The band brackets sensitivity on a uniform fpr grid; the AUC interval
/// spans the member AUCs (each endpoint is attained by an actual member,
/// not by splicing band edges).
pub fn roc_band(ms: &ModelSet, test: &Dataset) -> Result<RocBand> {
    let xs = test.precise_features()?;
    let truth: Vec<bool> = labels_as_bools(test)?;

    let mut curves = Vec::with_capacity(ms.len());
    let mut auc_lo = f64::INFINITY;
    let mut auc_hi = f64::NEG_INFINITY;
    for member in ms.models() {
        let scores: Vec<f64> = xs.iter().map(|x| member.coefficients.predict_proba(x)).collect();
        let curve = roc(&scores, &truth)?;
        let a = auc(&curve);
        auc_lo = auc_lo.min(a);
        auc_hi = auc_hi.max(a);
        curves.push(curve);
    }

    let points = (0..ROC_BAND_GRID)
        .map(|i| {
            let fpr = i as f64 / (ROC_BAND_GRID - 1) as f64;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for curve in &curves {
                let s = interpolate_sensitivity(curve, fpr);
                lo = lo.min(s);
                hi = hi.max(s);
            }
            RocBandPoint { fpr, s_lo: lo, s_hi: hi }
        })
        .collect();

    Ok(RocBand {
        points,
        auc: Interval::new(auc_lo, auc_hi)?,
    })
}

/// One threshold of a 3-D ROC trace: prediction-conditional rates plus
/// abstention rates. `None` marks statistics undefined at this threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Roc3dPoint {
    pub threshold: f64,
    pub s_prime: Option<f64>,
    pub fpr_prime: Option<f64>,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
}

/// Number of thresholds in a [`roc3d`] sweep.
pub const ROC3D_GRID: usize = 101;

/// Sweep thresholds over (0, 1), classifying with the abstain rule, and
/// record `(s', fpr' = 1 - t', sigma, tau)` at each.
///
/// Thresholds are `k / (ROC3D_GRID + 1)` for `k = 1..=ROC3D_GRID` — a
/// uniform open grid that excludes the invalid endpoints 0 and 1.
pub fn roc3d(ms: &ModelSet, test: &Dataset) -> Result<Vec<Roc3dPoint>> {
    let truth = test
        .points()
        .iter()
        .map(|p| p.label)
        .collect::<Vec<UncertainLabel>>();
    {
        let bools = labels_as_bools(test)?;
        if bools.iter().all(|&y| y) || bools.iter().all(|&y| !y) {
            return Err(Error::SingleClass);
        }
    }
    let predictions: Vec<Interval> = test
        .points()
        .iter()
        .map(|p| predict_interval(ms, &p.features))
        .collect::<Result<_>>()?;

    (1..=ROC3D_GRID)
        .map(|k| {
            let threshold = k as f64 / (ROC3D_GRID + 1) as f64;
            let decisions: Vec<Decision> = predictions
                .iter()
                .map(|&p| classify(p, threshold, DecisionRule::Abstain))
                .collect::<Result<_>>()?;
            let stats = uncertainty_stats(&ternary_confusion(&decisions, &truth)?);
            Ok(Roc3dPoint {
                threshold,
                s_prime: stats.s_prime,
                fpr_prime: stats.t_prime.map(|t| 1.0 - t),
                sigma: stats.sigma,
                tau: stats.tau,
            })
        })
        .collect()
}

/// AUC of the prediction-only ROC (`s'` against `fpr'`), skipping
/// thresholds where either statistic is undefined. `None` when no
/// threshold had both defined.
pub fn prediction_only_auc(points: &[Roc3dPoint]) -> Option<f64> {
    let mut pairs: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| match (p.fpr_prime, p.s_prime) {
            (Some(f), Some(s)) => Some((f, s)),
            _ => None,
        })
        .collect();
    if pairs.is_empty() {
        return None;
    }
    pairs.push((0.0, 0.0));
    pairs.push((1.0, 1.0));
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Some(
        pairs
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
            .sum(),
    )
}

fn labels_as_bools(d: &Dataset) -> Result<Vec<bool>> {
    d.points()
        .iter()
        .enumerate()
        .map(|(row, p)| match p.label {
            UncertainLabel::Known(v) => Ok(v),
            UncertainLabel::Unknown => Err(Error::UnknownTruthLabel { row }),
        })
        .collect()
}
