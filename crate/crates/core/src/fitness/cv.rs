use std::fmt;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::logistic::{aic_from, fit_logistic, linear_predictor, log_likelihood, FitOptions};
use super::metrics::auc;
use super::{design_matrix, Dataset};
use crate::error::{Error, Result};
use crate::predictor_space::{PredictorSpace, TermId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Mean held-out AUC, maximized.
    CvAuc,
    /// Mean held-out AIC, minimized.
    CvAic,
}

impl Metric {
    pub fn maximize(self) -> bool {
        matches!(self, Metric::CvAuc)
    }

    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        if self.maximize() {
            a > b
        } else {
            a < b
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::CvAuc => "cv_auc",
            Metric::CvAic => "cv_aic",
        })
    }
}

/// Assignment of every row to one of `k` folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Folds {
    k: usize,
    assignment: Vec<usize>,
}

/// Shuffles the rows with a seeded generator and deals them round-robin, so
/// fold sizes differ by at most one.
pub fn make_folds(n_rows: usize, k: usize, seed: u64) -> Result<Folds> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    if k > n_rows {
        return Err(Error::invalid(format!("{k} folds for {n_rows} rows")));
    }
    let mut perm: Vec<usize> = (0..n_rows).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; n_rows];
    for (i, &row) in perm.iter().enumerate() {
        assignment[row] = i % k;
    }
    Ok(Folds { k, assignment })
}

impl Folds {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn n_rows(&self) -> usize {
        self.assignment.len()
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        self.rows_where(|f| f == fold)
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        self.rows_where(|f| f != fold)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &f in &self.assignment {
            s[f] += 1;
        }
        s
    }

    fn rows_where(&self, pred: impl Fn(usize) -> bool) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &f)| pred(f))
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvFitness {
    pub metric: Metric,
    /// One value per evaluated fold.
    pub fold_values: Vec<f64>,
    pub mean_value: f64,
    /// Folds skipped because the held-out rows had a single class (AUC only).
    pub skipped_folds: Vec<usize>,
    /// Fold fits that stopped without converging because of separation.
    pub separated_folds: usize,
}

/// Cross-validated fitness of the model with the given terms.
///
/// Each fold is scored by a model fitted on all other folds. Under
/// [`Metric::CvAic`] the held-out log-likelihood is scaled by
/// `n_rows / fold_rows` before forming `2k - 2 log L`, so fold values are on the
/// scale of a full-data AIC. A fold fit that fails, or stops short of
/// convergence without being separated, fails the whole evaluation.
pub fn cv_fitness(
    dataset: &Dataset,
    terms: &[TermId],
    space: &PredictorSpace,
    folds: &Folds,
    metric: Metric,
    opts: &FitOptions,
) -> Result<CvFitness> {
    if folds.n_rows() != dataset.rows() {
        return Err(Error::invalid(format!(
            "folds cover {} rows, dataset has {}",
            folds.n_rows(),
            dataset.rows()
        )));
    }
    let x = design_matrix(dataset, terms, space)?;
    let y = dataset.response();
    let n_total = dataset.rows() as f64;

    let mut fold_values = Vec::with_capacity(folds.k());
    let mut skipped_folds = Vec::new();
    let mut separated_folds = 0;
    for fold in 0..folds.k() {
        let test = folds.test_rows(fold);
        let train = folds.train_rows(fold);
        let y_test: Vec<f64> = test.iter().map(|&i| y[i]).collect();
        if metric == Metric::CvAuc {
            let pos = y_test.iter().filter(|&&v| v == 1.0).count();
            if pos == 0 || pos == y_test.len() {
                warn!("fold {fold} has a single class in its held-out rows; skipped");
                skipped_folds.push(fold);
                continue;
            }
        }
        let x_train = x.select_rows(train.iter());
        let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let fit = fit_logistic(&x_train, &y_train, opts)?;
        if !fit.converged {
            if fit.separation_flag {
                separated_folds += 1;
            } else {
                return Err(Error::Numerical(format!(
                    "fold {fold} fit did not converge in {} iterations",
                    fit.iterations
                )));
            }
        }
        let x_test = x.select_rows(test.iter());
        let eta = linear_predictor(&x_test, &fit.coefficients);
        let value = match metric {
            Metric::CvAuc => auc(&eta, &y_test)?,
            Metric::CvAic => {
                let scale = n_total / test.len() as f64;
                aic_from(fit.n_coefficients(), scale * log_likelihood(&eta, &y_test))
            }
        };
        if !value.is_finite() {
            return Err(Error::Numerical(format!("fold {fold} fitness is not finite")));
        }
        fold_values.push(value);
    }
    if fold_values.is_empty() {
        return Err(Error::DegenerateData("every fold was skipped".into()));
    }
    let mean_value = fold_values.iter().sum::<f64>() / fold_values.len() as f64;
    Ok(CvFitness {
        metric,
        fold_values,
        mean_value,
        skipped_folds,
        separated_folds,
    })
}
