//! Precise logistic regression by penalized maximum likelihood.
//!
//! The model is `P(y = 1 | x) = sigmoid(b0 + b1 x1 + ... + bm xm)`. Fitting
//! runs Newton's method on internally standardized features with step
//! halving, an optional ridge penalty on the non-intercept coefficients,
//! and a hard cap on standardized coefficient magnitude so separated data
//! yields a finite, flagged model instead of a runaway iteration.
//!
//! Convergence is judged by the max-norm of the penalized gradient in the
//! *original* coordinates, so a caller can re-derive the criterion from
//! [`nll_gradient`] and the reported coefficients.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::interval::{linear_score_bounds, Interval};

/// Logistic model coefficients, intercept first.
///
/// Serialized as a bare array `[b0, b1, ..., bm]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Coefficients(Vec<f64>);

impl Coefficients {
    /// Validate and wrap a coefficient vector `[b0, b1, ..., bm]`.
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::InvalidArgument(
                "coefficient vector needs at least an intercept".to_string(),
            ));
        }
        if let Some(bad) = beta.iter().find(|b| !b.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("coefficient {bad}"),
            });
        }
        Ok(Coefficients(beta))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn intercept(&self) -> f64 {
        self.0[0]
    }

    /// Number of features the model expects (not counting the intercept).
    pub fn dimension(&self) -> usize {
        self.0.len() - 1
    }

    /// The linear score `b0 + sum_j b_j x_j`.
    ///
    /// Panics if `x` has the wrong length; use [`Coefficients::dimension`]
    /// to check first when the input is untrusted.
    pub fn score(&self, x: &[f64]) -> f64 {
        assert_eq!(
            x.len(),
            self.dimension(),
            "feature vector length does not match model dimension"
        );
        self.0[0] + self.0[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }

    /// Range of the linear score over a box of feature intervals.
    pub fn score_bounds(&self, x: &[Interval]) -> Result<Interval> {
        linear_score_bounds(&self.0, x)
    }

    /// Predicted probability of class 1 at a precise feature vector.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.score(x))
    }
}

impl TryFrom<Vec<f64>> for Coefficients {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Coefficients::new(v)
    }
}

impl From<Coefficients> for Vec<f64> {
    fn from(c: Coefficients) -> Vec<f64> {
        c.0
    }
}

/// The logistic function `1 / (1 + exp(-s))`, computed without overflow
/// and clamped into the open interval (0, 1) so downstream logs and odds
/// never hit exactly 0 or 1.
pub fn sigmoid(s: f64) -> f64 {
    let p = if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// `ln(1 + exp(s))` without overflow.
fn softplus(s: f64) -> f64 {
    s.max(0.0) + (-s.abs()).exp().ln_1p()
}

/// Total negative log-likelihood of labels `ys` (each 0.0 or 1.0) at
/// feature rows `xs`.
pub fn nll(beta: &Coefficients, xs: &[Vec<f64>], ys: &[f64]) -> Result<f64> {
    check_rows(beta, xs, ys)?;
    Ok(xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let s = beta.score(x);
            softplus(s) - y * s
        })
        .sum())
}

/// Gradient of [`nll`] with respect to every coefficient, intercept first:
/// `g_j = sum_i (p_i - y_i) x_ij` with `x_i0 = 1`.
pub fn nll_gradient(beta: &Coefficients, xs: &[Vec<f64>], ys: &[f64]) -> Result<Vec<f64>> {
    check_rows(beta, xs, ys)?;
    let mut g = vec![0.0; beta.as_slice().len()];
    for (x, &y) in xs.iter().zip(ys) {
        let r = sigmoid(beta.score(x)) - y;
        g[0] += r;
        for (gj, v) in g[1..].iter_mut().zip(x) {
            *gj += r * v;
        }
    }
    Ok(g)
}

fn check_rows(beta: &Coefficients, xs: &[Vec<f64>], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    for x in xs {
        if x.len() != beta.dimension() {
            return Err(Error::DimensionMismatch {
                expected: beta.dimension(),
                got: x.len(),
            });
        }
    }
    Ok(())
}

/// Knobs for the Newton fit. The defaults suit datasets from tens to tens
/// of thousands of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Stop when the penalized gradient max-norm falls below this.
    pub tolerance: f64,
    /// Hard limit on Newton updates.
    pub max_iterations: usize,
    /// Ridge strength on non-intercept coefficients; 0 disables it.
    pub ridge: f64,
    /// Magnitude cap per standardized coefficient. Separated data pushes
    /// coefficients to this wall instead of infinity.
    pub coefficient_cap: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tolerance: 1e-8,
            max_iterations: 100,
            ridge: 0.0,
            coefficient_cap: 30.0,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations must be at least 1".to_string(),
            ));
        }
        if !(self.ridge.is_finite() && self.ridge >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ridge must be finite and non-negative, got {}",
                self.ridge
            )));
        }
        if !(self.coefficient_cap.is_finite() && self.coefficient_cap > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coefficient cap must be positive, got {}",
                self.coefficient_cap
            )));
        }
        Ok(())
    }
}

/// What happened during a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Whether the gradient criterion was met within the iteration budget.
    pub converged: bool,
    /// Newton updates performed.
    pub iterations: usize,
    /// Unpenalized negative log-likelihood at the returned coefficients.
    pub final_nll: f64,
    /// Max-norm of the penalized gradient at the returned coefficients.
    pub gradient_norm: f64,
    /// True when the data admits no finite maximum-likelihood solution.
    /// Detected two ways: a coefficient ran into the cap without meeting
    /// the gradient criterion (quasi-separation), or every fitted
    /// probability saturated at its label (complete separation — the
    /// returned coefficients classify the data perfectly, so scaling them
    /// up would improve the likelihood forever).
    pub separation_detected: bool,
}

/// Coefficients plus the diagnostics of the fit that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub coefficients: Coefficients,
    pub report: FitReport,
}

/// Fit by maximum likelihood on a fully precise dataset.
///
/// Interval features or unknown labels are an error here; collapse them
/// first or use the set-valued fit in [`crate::envelope`].
pub fn fit_mle(data: &Dataset, opts: &FitOptions) -> Result<FittedModel> {
    let xs = data.precise_features()?;
    let ys = data.known_labels()?;
    fit_xy(&xs, &ys, opts)
}

/// Core fit on raw rows; shared by the precise and set-valued paths.
pub(crate) fn fit_xy(xs: &[Vec<f64>], ys: &[f64], opts: &FitOptions) -> Result<FittedModel> {
    opts.validate()?;
    if xs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = xs.len();
    let m = xs[0].len();
    debug_assert!(ys.iter().all(|&y| y == 0.0 || y == 1.0));

    // Standardize features: Newton on wildly scaled columns wastes its
    // quadratic convergence on conditioning problems.
    let mut mean = vec![0.0; m];
    let mut sd = vec![0.0; m];
    for j in 0..m {
        let mu = xs.iter().map(|x| x[j]).sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x[j] - mu).powi(2)).sum::<f64>() / n as f64;
        mean[j] = mu;
        sd[j] = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
    }
    let zs: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| {
            let mut z = Vec::with_capacity(m + 1);
            z.push(1.0);
            for j in 0..m {
                z.push((x[j] - mean[j]) / sd[j]);
            }
            z
        })
        .collect();

    // Ridge on the external coefficients b_j = theta_j / sd_j becomes a
    // per-coordinate penalty ridge / sd_j^2 in standardized space.
    let ridge_z: Vec<f64> = (0..=m)
        .map(|j| if j == 0 { 0.0 } else { opts.ridge / (sd[j - 1] * sd[j - 1]) })
        .collect();

    let cap = opts.coefficient_cap;
    let mut theta = vec![0.0; m + 1];

    let penalized_nll = |theta: &[f64]| -> f64 {
        let mut total = 0.0;
        for (z, &y) in zs.iter().zip(ys) {
            let s = dot(theta, z);
            total += softplus(s) - y * s;
        }
        total + 0.5 * theta.iter().zip(&ridge_z).map(|(t, r)| r * t * t).sum::<f64>()
    };

    // Penalized gradient max-norm in the caller's coordinates. Using the
    // external gradient keeps the convergence claim independent of the
    // internal standardization.
    let external_norm = |theta: &[f64]| -> Result<f64> {
        let beta = unstandardize(theta, &mean, &sd);
        let coeffs = Coefficients::new(beta.clone())?;
        let mut g = nll_gradient(&coeffs, xs, ys)?;
        for j in 1..g.len() {
            g[j] += opts.ridge * beta[j];
        }
        Ok(g.iter().fold(0.0, |acc, v| acc.max(v.abs())))
    };

    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..opts.max_iterations {
        if external_norm(&theta)? < opts.tolerance {
            converged = true;
            break;
        }

        // Gradient and Hessian of the penalized objective in theta-space.
        let mut g = vec![0.0; m + 1];
        let mut h = vec![vec![0.0; m + 1]; m + 1];
        for (z, &y) in zs.iter().zip(ys) {
            let p = sigmoid(dot(&theta, z));
            let r = p - y;
            let w = (p * (1.0 - p)).max(1e-12);
            for a in 0..=m {
                g[a] += r * z[a];
                for b in a..=m {
                    h[a][b] += w * z[a] * z[b];
                }
            }
        }
        for a in 0..=m {
            g[a] += ridge_z[a] * theta[a];
            h[a][a] += ridge_z[a];
            #[allow(clippy::needless_range_loop)] // mirror assignment crosses rows
            for b in 0..a {
                h[a][b] = h[b][a];
            }
        }

        // Newton direction, with escalating Tikhonov damping if the
        // Hessian is numerically singular (flat or capped regions).
        let mut delta = None;
        for damp in [0.0, 1e-8, 1e-4, 1.0, 1e2] {
            let mut hd = h.clone();
            for (a, row) in hd.iter_mut().enumerate() {
                row[a] += damp;
            }
            if let Some(d) = solve(hd, g.clone()) {
                delta = Some(d);
                break;
            }
        }
        let delta = match delta {
            Some(d) => d,
            // Fall back to plain gradient descent; step halving will find
            // a workable scale.
            None => g.clone(),
        };

        // Backtracking line search on the penalized objective, evaluating
        // candidates after the cap so the accepted point is the real next
        // iterate.
        let before = penalized_nll(&theta);
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let candidate: Vec<f64> = theta
                .iter()
                .zip(&delta)
                .map(|(t, d)| (t - alpha * d).clamp(-cap, cap))
                .collect();
            if candidate
                .iter()
                .zip(&theta)
                .all(|(c, t)| c == t)
            {
                break;
            }
            // Slack of a few ulps lets the last microscopic Newton steps
            // through: near the optimum the true decrease drops below f64
            // resolution while the gradient is still above tolerance.
            if penalized_nll(&candidate) <= before + 1e-12 * (1.0 + before.abs()) {
                theta = candidate;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        if !moved {
            // Line search stalled: no direction improves the objective at
            // any representable step, typically because coefficients sit
            // on the cap. The gradient check below renders the verdict.
            break;
        }
    }

    let gradient_norm = external_norm(&theta)?;
    if gradient_norm < opts.tolerance {
        converged = true;
    }
    let at_cap = theta.iter().any(|t| t.abs() >= cap - 1e-9);

    let beta = unstandardize(&theta, &mean, &sd);
    let coefficients = Coefficients::new(beta)?;
    let final_nll = nll(&coefficients, xs, ys)?;

    // Complete separation: the returned model classifies every point with
    // a saturated probability. The likelihood then increases without bound
    // along the ray through these coefficients, so no finite MLE exists
    // even though the gradient tolerance was met at a finite point.
    let saturated = xs
        .iter()
        .zip(ys)
        .all(|(x, &y)| (sigmoid(coefficients.score(x)) - y).abs() < 1e-6);
    let separation_detected = (!converged && at_cap) || saturated;

    Ok(FittedModel {
        coefficients,
        report: FitReport {
            converged,
            iterations,
            final_nll,
            gradient_norm,
            separation_detected,
        },
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Map standardized-space coefficients back to the original features:
/// `b_j = theta_j / sd_j`, `b_0 = theta_0 - sum_j theta_j mean_j / sd_j`.
fn unstandardize(theta: &[f64], mean: &[f64], sd: &[f64]) -> Vec<f64> {
    let m = mean.len();
    let mut beta = vec![0.0; m + 1];
    beta[0] = theta[0];
    for j in 0..m {
        beta[j + 1] = theta[j + 1] / sd[j];
        beta[0] -= theta[j + 1] * mean[j] / sd[j];
    }
    beta
}

/// Gaussian elimination with partial pivoting. Returns `None` when a pivot
/// degenerates, signalling the caller to damp and retry.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite pivots")
        })?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            #[allow(clippy::needless_range_loop)] // elimination reads one row, writes another
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
        if !x[col].is_finite() {
            return None;
        }
    }
    Some(x)
}
