//! Full-data refit of a selected model and plain-text rendering of reports.

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fitness::{design_matrix, fit_logistic, standard_errors, Dataset, FitOptions};
use crate::ga::RunReport;
use crate::predictor_space::{PredictorSpace, TermId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub term: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z_value: f64,
    /// Two-sided normal p-value.
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalFit {
    pub coefficients: Vec<CoefficientRow>,
    pub log_likelihood: f64,
    pub aic: f64,
    pub null_deviance: f64,
    pub residual_deviance: f64,
    pub df_null: usize,
    pub df_residual: usize,
    pub converged: bool,
    pub iterations: usize,
    pub separation_flag: bool,
}

pub fn normal_two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Fits the term set on every row, with an intercept-only fit for the null deviance.
pub fn final_fit(dataset: &Dataset, terms: &[TermId], space: &PredictorSpace, opts: &FitOptions) -> Result<FinalFit> {
    let x = design_matrix(dataset, terms, space)?;
    let y = dataset.response();
    let fit = fit_logistic(&x, y, opts)?;
    let null = fit_logistic(&design_matrix(dataset, &[], space)?, y, opts)?;
    let se = standard_errors(&x, &fit.coefficients)?;

    let mut sorted = terms.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let labels = std::iter::once("(Intercept)".to_string()).chain(sorted.iter().map(|&t| dataset.term_label(space, t)));
    let coefficients = labels
        .zip(fit.coefficients.iter().zip(&se))
        .map(|(term, (&estimate, &std_error))| {
            let z_value = estimate / std_error;
            CoefficientRow {
                term,
                estimate,
                std_error,
                z_value,
                p_value: normal_two_sided_p(z_value),
            }
        })
        .collect();
    let n = dataset.rows();
    Ok(FinalFit {
        coefficients,
        log_likelihood: fit.log_likelihood,
        aic: fit.aic,
        null_deviance: null.deviance(),
        residual_deviance: fit.deviance(),
        df_null: n - 1,
        df_residual: n.saturating_sub(fit.n_coefficients()),
        converged: fit.converged,
        iterations: fit.iterations,
        separation_flag: fit.separation_flag,
    })
}

fn signif(p: f64) -> &'static str {
    match p {
        p if p < 0.001 => "***",
        p if p < 0.01 => "**",
        p if p < 0.05 => "*",
        p if p < 0.1 => ".",
        _ => "",
    }
}

pub fn render_fit(fit: &FinalFit) -> String {
    let mut s = String::new();
    let width = fit.coefficients.iter().map(|r| r.term.len()).max().unwrap_or(0).max(11);
    let _ = writeln!(
        s,
        "{:<width$}  {:>12}  {:>12}  {:>8}  {:>10}",
        "Coefficient", "Estimate", "Std. Error", "z value", "Pr(>|z|)"
    );
    for r in &fit.coefficients {
        let _ = writeln!(
            s,
            "{:<width$}  {:>12.4e}  {:>12.4e}  {:>8.3}  {:>10.3e} {}",
            r.term,
            r.estimate,
            r.std_error,
            r.z_value,
            r.p_value,
            signif(r.p_value)
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Null deviance: {:.2} on {} degrees of freedom", fit.null_deviance, fit.df_null);
    let _ = writeln!(
        s,
        "Residual deviance: {:.2} on {} degrees of freedom",
        fit.residual_deviance, fit.df_residual
    );
    let _ = writeln!(s, "AIC: {:.2}", fit.aic);
    let _ = writeln!(
        s,
        "Fisher scoring iterations: {}{}{}",
        fit.iterations,
        if fit.converged { "" } else { " (not converged)" },
        if fit.separation_flag { " [separation]" } else { "" }
    );
    s
}

pub fn render_report(r: &RunReport) -> String {
    let mut s = String::new();
    let c = &r.config;
    let _ = writeln!(
        s,
        "encoding {}  metric {}  population {}  generations {}  seed {}",
        c.encoding, c.fitness_metric, c.population_size, r.generations_run, c.rng_seed
    );
    let _ = writeln!(
        s,
        "{} rows, {} main effects, {} candidate terms, fold sizes {:?}",
        r.n_rows, r.n_main, r.total_terms, r.fold_sizes
    );
    let _ = writeln!(s, "best {}: {}", c.fitness_metric, fmt_fitness(r.best_fitness));
    let mains = r.best_terms.iter().filter(|&&t| t <= r.n_main).count();
    let _ = writeln!(
        s,
        "selected {} terms ({} main effects, {} interactions)",
        r.best_terms.len(),
        mains,
        r.best_terms.len() - mains
    );
    let _ = writeln!(s, "  {}", r.best_labels.join(" "));
    let _ = writeln!(s, "chromosome: {}", r.best_chromosome);
    let _ = writeln!(
        s,
        "fitness evaluations: {} requested, {} computed, {} failed",
        r.evaluations.requested, r.evaluations.computed, r.evaluations.failures
    );
    let _ = writeln!(s, "run time: {:.3} s", r.total_seconds);
    if let Some(f) = &r.final_fit {
        let _ = writeln!(s);
        s.push_str(&render_fit(f));
    }
    s
}

pub fn fmt_fitness(f: Option<f64>) -> String {
    f.map_or_else(|| "failed".to_string(), |v| format!("{v:.4}"))
}

/// Plot-ready `generation,best_fitness,mean_fitness,best_model_size,mean_model_size,elapsed`.
pub fn history_csv(r: &RunReport) -> String {
    let mut s = String::from("generation,best_fitness,mean_fitness,best_model_size,mean_model_size,repair_overflows,elapsed\n");
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for g in &r.history {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            g.generation,
            opt(g.best_fitness),
            opt(g.mean_fitness),
            g.best_model_size,
            g.mean_model_size,
            g.repair_overflows,
            g.elapsed
        );
    }
    s
}

/// Term-by-term comparison of two selections with the overlap count.
pub fn compare_selections(name_a: &str, a: &[String], name_b: &str, b: &[String]) -> String {
    let sa: BTreeSet<&String> = a.iter().collect();
    let sb: BTreeSet<&String> = b.iter().collect();
    let all: BTreeSet<&String> = sa.union(&sb).copied().collect();
    let width = all.iter().map(|t| t.len()).max().unwrap_or(4).max(4);
    let mut s = String::new();
    let _ = writeln!(s, "{:<width$}  {:^8}  {:^8}", "term", name_a, name_b);
    for t in &all {
        let mark = |set: &BTreeSet<&String>| if set.contains(t) { "x" } else { "" };
        let _ = writeln!(s, "{:<width$}  {:^8}  {:^8}", t, mark(&sa), mark(&sb));
    }
    let both: Vec<&&String> = sa.intersection(&sb).collect();
    let both_int = both.iter().filter(|t| t.contains(':')).count();
    let _ = writeln!(
        s,
        "{} terms in both ({} interactions); {} only in {}, {} only in {}",
        both.len(),
        both_int,
        sa.len() - both.len(),
        name_a,
        sb.len() - both.len(),
        name_b
    );
    s
}
