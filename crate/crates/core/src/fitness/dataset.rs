use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictor_space::{PredictorSpace, TermDescriptor, TermId};

/// Main-effect predictor columns plus a binary response.
///
/// Interaction columns are never stored; they are formed on demand from the
/// model columns, which are the raw columns or their standardized versions.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    raw: Vec<Vec<f64>>,
    model: Vec<Vec<f64>>,
    response: Vec<f64>,
    standardized: bool,
}

/// Column means and sample standard deviations used for standardization.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Dataset {
    /// `columns[i]` is main effect `i + 1`. Names default to `x1, x2, ..`.
    pub fn new(columns: Vec<Vec<f64>>, response: Vec<f64>, names: Option<Vec<String>>) -> Result<Self> {
        let rows = response.len();
        if rows == 0 {
            return Err(Error::invalid("dataset has no rows"));
        }
        if columns.is_empty() {
            return Err(Error::invalid("dataset has no predictor columns"));
        }
        for (i, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::invalid(format!(
                    "column {} has {} values, expected {rows}",
                    i + 1,
                    c.len()
                )));
            }
            if let Some(r) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("column {} row {} is not finite", i + 1, r + 1)));
            }
        }
        if let Some(r) = response.iter().position(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::invalid(format!(
                "response at row {} is {}, expected 0 or 1",
                r + 1,
                response[r]
            )));
        }
        let names = match names {
            Some(n) if n.len() == columns.len() => n,
            Some(n) => {
                return Err(Error::invalid(format!(
                    "{} names for {} columns",
                    n.len(),
                    columns.len()
                )))
            }
            None => (1..=columns.len()).map(|i| format!("x{i}")).collect(),
        };
        Ok(Dataset {
            names,
            model: columns.clone(),
            raw: columns,
            response,
            standardized: false,
        })
    }

    /// Centers and scales the model columns to mean 0, sd 1 (or restores the
    /// raw columns). Constant columns are only centered.
    pub fn with_standardization(mut self, on: bool) -> Self {
        self.standardized = on;
        if on {
            let scaling = self.scaling();
            self.model = self
                .raw
                .iter()
                .zip(scaling.means.iter().zip(&scaling.sds))
                .map(|(col, (&m, &sd))| {
                    let scale = if sd > 0.0 { sd } else { 1.0 };
                    col.iter().map(|v| (v - m) / scale).collect()
                })
                .collect();
        } else {
            self.model = self.raw.clone();
        }
        self
    }

    pub fn scaling(&self) -> ColumnScaling {
        let n = self.rows() as f64;
        let means: Vec<f64> = self.raw.iter().map(|c| c.iter().sum::<f64>() / n).collect();
        let sds = self
            .raw
            .iter()
            .zip(&means)
            .map(|(c, m)| {
                if c.len() < 2 {
                    return 0.0;
                }
                (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            })
            .collect();
        ColumnScaling { means, sds }
    }

    pub fn rows(&self) -> usize {
        self.response.len()
    }

    pub fn n_main(&self) -> usize {
        self.raw.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Column as used in models (standardized when enabled). `main` is 0-based.
    pub fn model_column(&self, main: usize) -> &[f64] {
        &self.model[main]
    }

    pub fn raw_column(&self, main: usize) -> &[f64] {
        &self.raw[main]
    }

    pub fn positive_rate(&self) -> f64 {
        self.response.iter().sum::<f64>() / self.rows() as f64
    }

    pub fn positives(&self) -> usize {
        self.response.iter().filter(|&&y| y == 1.0).count()
    }

    /// The full predictor space of main effects and pairwise interactions.
    pub fn space(&self) -> Result<PredictorSpace> {
        PredictorSpace::new(self.n_main() as u32, true)
    }

    /// Fails when the response has only one class.
    pub fn require_both_classes(&self) -> Result<()> {
        let pos = self.positives();
        if pos == 0 || pos == self.rows() {
            return Err(Error::DegenerateData(format!(
                "response is constant ({pos} positives in {} rows)",
                self.rows()
            )));
        }
        Ok(())
    }

    fn main_index(&self, name: &str) -> Option<u32> {
        let key = normalize_name(name);
        self.names
            .iter()
            .position(|n| normalize_name(n) == key)
            .map(|i| i as u32 + 1)
            .or_else(|| {
                TermDescriptor::parse_label(name).ok().and_then(|d| match d {
                    TermDescriptor::MainEffect(i) if (i as usize) <= self.n_main() => Some(i),
                    _ => None,
                })
            })
    }

    /// Resolves a term label such as `alcohol`, `fixed.acidity:pH` or `x1:x5`.
    pub fn term_by_name(&self, space: &PredictorSpace, label: &str) -> Result<TermId> {
        let lookup = |part: &str| {
            self.main_index(part)
                .ok_or_else(|| Error::invalid(format!("unknown column `{part}` in term `{label}`")))
        };
        match label.split_once(':') {
            None => space.encode(TermDescriptor::MainEffect(lookup(label)?)),
            Some((a, b)) => {
                let (i, j) = (lookup(a)?, lookup(b)?);
                space.encode(TermDescriptor::Interaction(i.min(j), i.max(j)))
            }
        }
    }

    /// Label of a term using this dataset's column names.
    pub fn term_label(&self, space: &PredictorSpace, id: TermId) -> String {
        space
            .decode(id)
            .map(|d| d.label_with(&self.names))
            .unwrap_or_else(|_| format!("?{id}"))
    }

    /// Keeps only the rows at `idx`, in that order.
    pub fn subset_rows(&self, idx: &[usize]) -> Result<Dataset> {
        let pick = |c: &Vec<f64>| idx.iter().map(|&i| c[i]).collect::<Vec<_>>();
        let ds = Dataset::new(
            self.raw.iter().map(pick).collect(),
            idx.iter().map(|&i| self.response[i]).collect(),
            Some(self.names.clone()),
        )?;
        Ok(ds.with_standardization(self.standardized))
    }
}

/// Lowercases and maps every non-alphanumeric character to `.`, so that
/// `fixed acidity`, `fixed.acidity` and `Fixed_Acidity` compare equal.
pub fn normalize_name(s: &str) -> String {
    s.trim()
        .trim_matches('"')
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '.'
            }
        })
        .collect()
}
