//! Unpenalized logistic regression fitted by Fisher scoring (IRLS).
//!
//! Each iteration solves the weighted normal equations `(X'WX) d = X'(y - mu)`
//! with a Cholesky factorization and takes the step `beta += d`, halving it
//! while the log-likelihood would decrease. A tiny ridge is added only when the
//! factorization fails.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Max-norm of the score vector required, together with the coefficient
/// tolerance, before a fit is reported as converged.
pub const SCORE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Bound on `max_k |d_k| / (|beta_k| + 0.1)`.
    pub tol: f64,
    /// Any `|beta_k|` above this flags (quasi-)separation.
    pub separation_threshold: f64,
    pub ridge: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 25,
            tol: 1e-8,
            separation_threshold: 15.0,
            ridge: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Intercept first when the design matrix has one.
    pub coefficients: Vec<f64>,
    pub log_likelihood: f64,
    pub aic: f64,
    pub converged: bool,
    pub iterations: usize,
    pub separation_flag: bool,
    pub ridge_used: bool,
    pub score_max_norm: f64,
    /// Log-likelihood at the start and after every accepted step.
    #[serde(skip)]
    pub log_likelihood_trace: Vec<f64>,
}

impl FitResult {
    pub fn n_coefficients(&self) -> usize {
        self.coefficients.len()
    }

    pub fn deviance(&self) -> f64 {
        -2.0 * self.log_likelihood
    }
}

/// `2k - 2 log L` with `k` counting every coefficient, intercept included.
pub fn aic(fit: &FitResult) -> f64 {
    aic_from(fit.n_coefficients(), fit.log_likelihood)
}

pub fn aic_from(n_coefficients: usize, log_likelihood: f64) -> f64 {
    2.0 * n_coefficients as f64 - 2.0 * log_likelihood
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Bernoulli log-likelihood of `y` under linear predictor `eta`.
pub fn log_likelihood(eta: &[f64], y: &[f64]) -> f64 {
    eta.iter().zip(y).map(|(&e, &yi)| yi * e - softplus(e)).sum()
}

pub fn linear_predictor(x: &DMatrix<f64>, beta: &[f64]) -> Vec<f64> {
    let b = DVector::from_column_slice(beta);
    (x * b).data.into()
}

/// Score vector `X'(y - mu)`.
pub fn score(x: &DMatrix<f64>, y: &[f64], beta: &[f64]) -> Vec<f64> {
    let eta = linear_predictor(x, beta);
    let resid = DVector::from_iterator(y.len(), eta.iter().zip(y).map(|(&e, &yi)| yi - sigmoid(e)));
    x.tr_mul(&resid).data.into()
}

/// `X' diag(w) X`.
fn weighted_gram(x: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut xw = x.clone();
    for mut col in xw.column_iter_mut() {
        for (v, wi) in col.iter_mut().zip(w) {
            *v *= wi.sqrt();
        }
    }
    xw.transpose() * &xw
}

/// Cholesky factor unless a pivot is negligible relative to the largest diagonal entry.
fn well_conditioned_cholesky(h: &DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let max_diag = h.diagonal().amax();
    let ch = Cholesky::new(h.clone())?;
    let min_pivot = ch.l_dirty().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v * v));
    (min_pivot > 1e-13 * max_diag).then_some(ch)
}

fn solve_spd(h: DMatrix<f64>, rhs: &DVector<f64>, ridge: f64) -> Result<(DVector<f64>, bool)> {
    if let Some(ch) = well_conditioned_cholesky(&h) {
        let d = ch.solve(rhs);
        if d.iter().all(|v| v.is_finite()) {
            return Ok((d, false));
        }
    }
    let p = h.nrows();
    let regularized = h + DMatrix::<f64>::identity(p, p) * ridge;
    let ch = Cholesky::new(regularized)
        .ok_or_else(|| Error::Numerical("weighted normal equations are not positive definite".into()))?;
    let d = ch.solve(rhs);
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite Newton step".into()));
    }
    Ok((d, true))
}

fn check_response(y: &[f64]) -> Result<()> {
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::invalid("response must be 0/1"));
    }
    let pos = y.iter().filter(|&&v| v == 1.0).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::invalid(format!(
            "response has a single class ({pos} of {} positive)",
            y.len()
        )));
    }
    Ok(())
}

/// Every row on its own side of the decision boundary.
fn separates(eta: &[f64], y: &[f64]) -> bool {
    eta.iter().zip(y).all(|(&e, &yi)| if yi == 1.0 { e > 0.0 } else { e < 0.0 })
}

pub fn fit_logistic(x: &DMatrix<f64>, y: &[f64], opts: &FitOptions) -> Result<FitResult> {
    let (n, p) = x.shape();
    if n != y.len() {
        return Err(Error::invalid(format!("design has {n} rows, response has {}", y.len())));
    }
    if p == 0 {
        return Err(Error::invalid("design matrix has no columns"));
    }
    check_response(y)?;

    let mut beta = DVector::<f64>::zeros(p);
    let mut eta = vec![0.0; n];
    let mut ll = log_likelihood(&eta, y);
    let mut trace = vec![ll];
    let mut last_rel = f64::INFINITY;
    let mut last_dll = f64::INFINITY;
    let mut ridge_used = false;
    let mut converged = false;
    let mut iterations = 0;
    let mut score_norm;

    loop {
        let mu: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let resid = DVector::from_iterator(n, mu.iter().zip(y).map(|(m, yi)| yi - m));
        let s = x.tr_mul(&resid);
        score_norm = s.amax();

        if last_rel < opts.tol && score_norm < SCORE_TOLERANCE {
            converged = true;
            break;
        }
        // A strictly separating iterate proves the maximum is not attained; keep
        // this bounded-scale fit rather than letting the coefficients run away.
        if iterations > 0 && separates(&eta, y) {
            break;
        }
        let large = beta.amax() > opts.separation_threshold;
        if large && score_norm >= SCORE_TOLERANCE && last_dll < opts.tol * (ll.abs() + 0.1) {
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }

        let w: Vec<f64> = mu.iter().map(|m| (m * (1.0 - m)).max(1e-300)).collect();
        let (delta, ridged) = solve_spd(weighted_gram(x, &w), &s, opts.ridge)?;
        ridge_used |= ridged;

        let slack = 1e-10 * (1.0 + ll.abs());
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = &beta + &delta * step;
            let cand_eta = linear_predictor(x, cand.as_slice());
            let cand_ll = log_likelihood(&cand_eta, y);
            if cand_ll.is_finite() && cand_ll >= ll - slack {
                accepted = Some((cand, cand_eta, cand_ll));
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        let Some((new_beta, new_eta, new_ll)) = accepted else {
            // No ascent direction left at working precision.
            last_rel = 0.0;
            continue;
        };
        last_rel = new_beta
            .iter()
            .zip(beta.iter())
            .map(|(b1, b0)| (b1 - b0).abs() / (b1.abs() + 0.1))
            .fold(0.0, f64::max);
        last_dll = (new_ll - ll).abs();
        beta = new_beta;
        eta = new_eta;
        ll = new_ll;
        trace.push(ll);
        if !ll.is_finite() || beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Numerical("non-finite coefficients".into()));
        }
    }

    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let separation_flag = (!converged && separates(&eta, y))
        || coefficients.iter().any(|b| b.abs() > opts.separation_threshold);
    Ok(FitResult {
        aic: aic_from(p, ll),
        coefficients,
        log_likelihood: ll,
        converged,
        iterations,
        separation_flag,
        ridge_used,
        score_max_norm: score_norm,
        log_likelihood_trace: trace,
    })
}

/// Asymptotic standard errors `sqrt(diag((X'WX)^-1))` at `beta`.
pub fn standard_errors(x: &DMatrix<f64>, beta: &[f64]) -> Result<Vec<f64>> {
    let eta = linear_predictor(x, beta);
    let w: Vec<f64> = eta
        .iter()
        .map(|&e| {
            let m = sigmoid(e);
            (m * (1.0 - m)).max(1e-300)
        })
        .collect();
    let h = weighted_gram(x, &w);
    let p = h.nrows();
    let inv = match Cholesky::new(h.clone()) {
        Some(ch) => ch.inverse(),
        None => Cholesky::new(h + DMatrix::<f64>::identity(p, p) * 1e-8)
            .ok_or_else(|| Error::Numerical("information matrix is singular".into()))?
            .inverse(),
    };
    Ok((0..p).map(|i| inv[(i, i)].max(0.0).sqrt()).collect())
}
