//! Delimited-text loading and the wine / cardiotocography response transforms.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::{normalize_name, Dataset};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// Response column must already hold 0/1.
    #[default]
    None,
    /// Quality score 0..=10, positive when at least 7.
    WineWhite,
    /// Fetal state normal / suspect / pathologic (or 1 / 2 / 3), positive
    /// unless normal. Keeps the 21 standard predictors minus Mean, Median, Max.
    CtgBinary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSpec {
    pub path: PathBuf,
    pub delimiter: char,
    /// Defaults to the last column, or `NSP` under `ctg_binary`.
    pub response_column: Option<String>,
    pub transform: Transform,
    pub standardize: bool,
    pub drop_columns: Vec<String>,
    /// Under `ctg_binary`, whether suspect counts as abnormal.
    pub suspect_is_abnormal: bool,
}

impl Default for IngestSpec {
    fn default() -> Self {
        IngestSpec {
            path: PathBuf::new(),
            delimiter: ',',
            response_column: None,
            transform: Transform::None,
            standardize: true,
            drop_columns: Vec::new(),
            suspect_is_abnormal: true,
        }
    }
}

pub const WINE_GOOD_THRESHOLD: f64 = 7.0;

pub const CTG_PREDICTORS: [&str; 21] = [
    "LB", "AC", "FM", "UC", "DL", "DS", "DP", "ASTV", "MSTV", "ALTV", "MLTV", "Width", "Min",
    "Max", "Nmax", "Nzeros", "Mode", "Mean", "Median", "Variance", "Tendency",
];

pub const CTG_DROPPED: [&str; 3] = ["Mean", "Median", "Max"];

pub fn wine_transform(quality: &[f64]) -> Result<Vec<f64>> {
    quality
        .iter()
        .enumerate()
        .map(|(r, &q)| {
            if q.fract() != 0.0 || !(0.0..=10.0).contains(&q) {
                return Err(Error::invalid(format!(
                    "row {}: quality {q} is not an integer in 0..=10",
                    r + 1
                )));
            }
            Ok(if q >= WINE_GOOD_THRESHOLD { 1.0 } else { 0.0 })
        })
        .collect()
}

/// Maps one fetal-state label to the binary response.
pub fn ctg_class(label: &str, suspect_is_abnormal: bool) -> Result<f64> {
    let l = label.trim().to_ascii_lowercase();
    let l = l.strip_suffix(".0").unwrap_or(&l);
    match l {
        "1" | "normal" | "n" => Ok(0.0),
        "2" | "suspect" | "s" => Ok(if suspect_is_abnormal { 1.0 } else { 0.0 }),
        "3" | "pathologic" | "pathological" | "p" => Ok(1.0),
        _ => Err(Error::invalid(format!("unknown fetal-state label {label:?}"))),
    }
}

pub fn ctg_transform(labels: &[String], suspect_is_abnormal: bool) -> Result<Vec<f64>> {
    labels
        .iter()
        .enumerate()
        .map(|(r, l)| {
            ctg_class(l, suspect_is_abnormal).map_err(|e| Error::invalid(format!("row {}: {e}", r + 1)))
        })
        .collect()
}

fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn load_delimited(spec: &IngestSpec) -> Result<Dataset> {
    let path = spec.path.as_path();
    if !spec.delimiter.is_ascii() {
        return Err(Error::Config(format!("delimiter {:?} is not ASCII", spec.delimiter)));
    }
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter as u8)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_error(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let find = |name: &str| {
        let want = normalize_name(name);
        headers.iter().position(|h| normalize_name(h) == want)
    };

    let response_idx = match (&spec.response_column, spec.transform) {
        (Some(name), _) => find(name),
        (None, Transform::CtgBinary) => find("NSP"),
        (None, _) => headers.len().checked_sub(1),
    }
    .ok_or_else(|| {
        parse_error(
            path,
            format!(
                "response column {:?} not found",
                spec.response_column.as_deref().unwrap_or("NSP")
            ),
        )
    })?;

    let mut dropped = vec![false; headers.len()];
    dropped[response_idx] = true;
    for name in &spec.drop_columns {
        let i = find(name).ok_or_else(|| parse_error(path, format!("drop column {name:?} not found")))?;
        dropped[i] = true;
    }
    if spec.transform == Transform::CtgBinary {
        let keep: Vec<String> = CTG_PREDICTORS
            .iter()
            .filter(|p| !CTG_DROPPED.contains(p))
            .map(|p| normalize_name(p))
            .collect();
        for name in CTG_PREDICTORS.iter().filter(|p| !CTG_DROPPED.contains(p)) {
            if find(name).is_none() {
                return Err(parse_error(path, format!("predictor {name:?} not found")));
            }
        }
        for (i, h) in headers.iter().enumerate() {
            if !keep.contains(&normalize_name(h)) {
                dropped[i] = true;
            }
        }
    }
    let predictors: Vec<usize> = (0..headers.len()).filter(|&i| !dropped[i]).collect();

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); predictors.len()];
    let mut labels: Vec<String> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_error(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != headers.len() {
            return Err(parse_error(
                path,
                format!("line {line}: {} fields, header has {}", record.len(), headers.len()),
            ));
        }
        for (c, &i) in predictors.iter().enumerate() {
            let field = &record[i];
            let v: f64 = field.parse().map_err(|_| {
                parse_error(path, format!("line {line}: column {:?} value {field:?} is not numeric", headers[i]))
            })?;
            if !v.is_finite() {
                return Err(parse_error(path, format!("line {line}: column {:?} is not finite", headers[i])));
            }
            columns[c].push(v);
        }
        labels.push(record[response_idx].to_string());
    }
    if labels.is_empty() {
        return Err(parse_error(path, "no data rows"));
    }

    let response = match spec.transform {
        Transform::CtgBinary => ctg_transform(&labels, spec.suspect_is_abnormal),
        Transform::WineWhite | Transform::None => {
            let values = numeric_labels(&labels, path)?;
            if spec.transform == Transform::WineWhite {
                wine_transform(&values)
            } else {
                Ok(values)
            }
        }
    }
    .map_err(|e| parse_error(path, e.to_string()))?;

    let names = predictors.iter().map(|&i| headers[i].clone()).collect();
    let dataset = Dataset::new(columns, response, Some(names))
        .map_err(|e| parse_error(path, e.to_string()))?;
    Ok(dataset.with_standardization(spec.standardize))
}

fn numeric_labels(labels: &[String], path: &Path) -> Result<Vec<f64>> {
    labels
        .iter()
        .enumerate()
        .map(|(r, l)| {
            l.parse::<f64>()
                .map_err(|_| parse_error(path, format!("data row {}: response {l:?} is not numeric", r + 1)))
        })
        .collect()
}
