//! Logistic-regression fitness: design matrices, IRLS fits, AIC/AUC and
//! k-fold cross-validation.

mod cv;
mod dataset;
mod design;
mod logistic;
mod metrics;

pub use cv::{cv_fitness, make_folds, CvFitness, Folds, Metric};
pub use dataset::{normalize_name, ColumnScaling, Dataset};
pub use design::design_matrix;
pub use logistic::{
    aic, aic_from, fit_logistic, linear_predictor, log_likelihood, score, standard_errors,
    FitOptions, FitResult, SCORE_TOLERANCE,
};
pub use metrics::auc;
