//! L2-regularized binary logistic regression trained by full-batch gradient
//! descent with a backtracking line search.
//!
//! The objective is
//!
//! ```text
//! J(w) = mean_i log(1 + exp(-m_i)) + ||w[1..]||^2 / (2 * c * n)
//! ```
//!
//! with margins `m_i = (2 y_i - 1) * w . [1, x_i]`. The intercept `w[0]` is
//! not penalized. Training starts from the zero vector and uses a fixed
//! update schedule, so identical inputs always produce identical models.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters of the logistic learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrHyper {
    /// Inverse regularization strength.
    pub c: f64,
    pub max_iter: usize,
    /// Convergence threshold on the gradient max-norm.
    pub tol: f64,
}

impl Default for LrHyper {
    fn default() -> Self {
        LrHyper {
            c: 1.0,
            max_iter: 100,
            tol: 1e-4,
        }
    }
}

impl LrHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::Config(format!("c must be positive, got {}", self.c)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// A fitted logistic model. `weights[0]` is the intercept against an
/// implicit constant-1 feature; `weights[1..]` line up with the training
/// feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Array1<f64>,
    pub hyper: LrHyper,
    pub converged: bool,
    pub iterations_used: usize,
}

impl LogisticModel {
    /// Number of feature columns the model expects.
    pub fn dimension(&self) -> usize {
        self.weights.len() - 1
    }

    /// Human-readable dump of weights and hyperparameters for debugging.
    /// Not a stability-guaranteed format.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "logistic model: c={} max_iter={} tol={} converged={} iterations={}\n",
            self.hyper.c, self.hyper.max_iter, self.hyper.tol, self.converged, self.iterations_used
        ));
        out.push_str(&format!("intercept {:+.12e}\n", self.weights[0]));
        for (i, w) in self.weights.iter().skip(1).enumerate() {
            out.push_str(&format!("w[{i}] {w:+.12e}\n"));
        }
        out
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(-m)) without overflow.
fn log1p_exp_neg(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

/// Regularized loss at `weights`.
pub fn lr_loss(weights: &Array1<f64>, features: ArrayView2<'_, f64>, labels: &[u8], c: f64) -> f64 {
    let n = labels.len() as f64;
    let logits = logits_of(weights, features);
    let mut data = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let m = if y == 1 { logits[i] } else { -logits[i] };
        data += log1p_exp_neg(m);
    }
    let reg: f64 = weights.iter().skip(1).map(|w| w * w).sum();
    data / n + reg / (2.0 * c * n)
}

/// Analytic gradient of the regularized loss at `weights`.
pub fn lr_gradient(
    weights: &Array1<f64>,
    features: ArrayView2<'_, f64>,
    labels: &[u8],
    c: f64,
) -> Array1<f64> {
    let n = labels.len();
    let logits = logits_of(weights, features);
    let mut residual = Array1::<f64>::zeros(n);
    for i in 0..n {
        residual[i] = sigmoid(logits[i]) - f64::from(labels[i]);
    }
    let mut grad = Array1::<f64>::zeros(weights.len());
    grad[0] = residual.sum() / n as f64;
    let gx = features.t().dot(&residual);
    for j in 0..features.ncols() {
        grad[j + 1] = gx[j] / n as f64 + weights[j + 1] / (c * n as f64);
    }
    grad
}

fn logits_of(weights: &Array1<f64>, features: ArrayView2<'_, f64>) -> Array1<f64> {
    let w_feat = weights.slice(ndarray::s![1..]);
    let mut logits = features.dot(&w_feat);
    logits += weights[0];
    logits
}

fn check_inputs(features: ArrayView2<'_, f64>, labels: &[u8]) -> Result<()> {
    if features.nrows() != labels.len() {
        return Err(Error::LengthMismatch(features.nrows(), labels.len()));
    }
    if labels.len() < 2 {
        return Err(Error::TooFewRows {
            got: labels.len(),
            need: 2,
        });
    }
    if labels.iter().all(|&y| y == 1) || labels.iter().all(|&y| y == 0) {
        return Err(Error::SingleClass);
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidNumeric {
            column: "<matrix>".into(),
            value: "non-finite".into(),
        });
    }
    Ok(())
}

/// Fit a logistic model. See the module docs for the exact objective.
pub fn lr_fit(features: ArrayView2<'_, f64>, labels: &[u8], hyper: LrHyper) -> Result<LogisticModel> {
    Ok(lr_fit_traced(features, labels, hyper)?.0)
}

/// Like [`lr_fit`] but also returns the per-iteration loss values, starting
/// with the loss at the zero vector.
pub fn lr_fit_traced(
    features: ArrayView2<'_, f64>,
    labels: &[u8],
    hyper: LrHyper,
) -> Result<(LogisticModel, Vec<f64>)> {
    hyper.validate()?;
    check_inputs(features, labels)?;

    let d = features.ncols();
    let mut weights = Array1::<f64>::zeros(d + 1);
    let mut loss = lr_loss(&weights, features, labels, hyper.c);
    let mut grad = lr_gradient(&weights, features, labels, hyper.c);
    let mut trace = vec![loss];
    let mut step = 1.0f64;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < hyper.max_iter {
        let grad_max = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_max < hyper.tol {
            converged = true;
            break;
        }
        // Try a larger step first, then backtrack until the Armijo
        // condition loss_new <= loss - (step/2)*||g||^2 holds.
        step = (step * 2.0).min(1e6);
        let gg: f64 = grad.iter().map(|g| g * g).sum();
        let mut stalled = false;
        loop {
            let candidate = &weights - &(step * &grad);
            let candidate_loss = lr_loss(&candidate, features, labels, hyper.c);
            if candidate_loss <= loss - 0.5 * step * gg {
                weights = candidate;
                loss = candidate_loss;
                break;
            }
            if step < 1e-18 {
                stalled = true;
                break;
            }
            step *= 0.5;
        }
        if stalled {
            // No representable step makes progress; the iterate is as
            // close to the optimum as f64 allows.
            converged = true;
            break;
        }
        grad = lr_gradient(&weights, features, labels, hyper.c);
        trace.push(loss);
        iterations += 1;
    }
    if !converged {
        let grad_max = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        converged = grad_max < hyper.tol;
    }

    Ok((
        LogisticModel {
            weights,
            hyper,
            converged,
            iterations_used: iterations,
        },
        trace,
    ))
}

/// Class probabilities P(y=1 | x).
pub fn lr_predict_proba(model: &LogisticModel, features: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    if features.ncols() != model.dimension() {
        return Err(Error::DimensionMismatch {
            expected: model.dimension(),
            got: features.ncols(),
        });
    }
    let logits = logits_of(&model.weights, features);
    Ok(logits.iter().map(|&z| sigmoid(z)).collect())
}

/// Hard class predictions: 1 iff the logit is non-negative (probability at
/// least one half, ties to the favorable class).
pub fn lr_predict(model: &LogisticModel, features: ArrayView2<'_, f64>) -> Result<Vec<u8>> {
    if features.ncols() != model.dimension() {
        return Err(Error::DimensionMismatch {
            expected: model.dimension(),
            got: features.ncols(),
        });
    }
    let logits = logits_of(&model.weights, features);
    Ok(logits.iter().map(|&z| u8::from(z >= 0.0)).collect())
}

#[allow(dead_code)]
pub(crate) fn array2_from_rows(rows: &[Vec<f64>]) -> Array2<f64> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut arr = Array2::<f64>::zeros((rows.len(), ncols));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            arr[[i, j]] = *v;
        }
    }
    arr
}
