//! Simulated datasets with a known set of true terms.
//!
//! Main effects are i.i.d. N(0, 1). The latent score of a row is the unweighted
//! sum of the true terms' values (interaction values are products of their
//! parents) plus Gaussian noise, and the response is 1 when the latent score
//! exceeds the threshold.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::Dataset;
use crate::predictor_space::{interaction_count, PredictorSpace, TermDescriptor, TermId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSpec {
    pub n_main: u32,
    pub n_samples: usize,
    pub true_terms: Vec<TermId>,
    /// Variance (not standard deviation) of the additive noise.
    pub noise_variance: f64,
    pub threshold: f64,
    pub rng_seed: u64,
    /// Add missing parent main effects to `true_terms` instead of rejecting them.
    pub complete_hierarchy: bool,
}

impl Default for SimSpec {
    fn default() -> Self {
        SimSpec {
            n_main: 5,
            n_samples: 1000,
            true_terms: Vec::new(),
            noise_variance: 0.02,
            threshold: 2.0,
            rng_seed: 0,
            complete_hierarchy: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimResult {
    pub dataset: Dataset,
    /// Echo of the spec, with `true_terms` sorted (and completed if requested).
    pub spec: SimSpec,
    pub positive_rate: f64,
}

impl SimSpec {
    pub fn space(&self) -> Result<PredictorSpace> {
        PredictorSpace::new(self.n_main, true)
    }

    fn resolved_terms(&self, space: &PredictorSpace) -> Result<Vec<TermId>> {
        let mut terms: BTreeSet<TermId> = BTreeSet::new();
        for &t in &self.true_terms {
            if !space.is_valid(t) {
                return Err(Error::invalid(format!(
                    "true term {t} outside 1..={}",
                    space.total_terms()
                )));
            }
            terms.insert(t);
        }
        if !space.is_hierarchical(&terms) {
            if !self.complete_hierarchy {
                return Err(Error::invalid(
                    "true terms violate strong hierarchy (set complete_hierarchy to add parents)",
                ));
            }
            let parents: Vec<TermId> = terms
                .iter()
                .flat_map(|&t| space.parents_of(t).unwrap_or_default())
                .collect();
            terms.extend(parents);
        }
        Ok(terms.into_iter().collect())
    }
}

pub fn generate(spec: &SimSpec) -> Result<SimResult> {
    if spec.n_samples == 0 {
        return Err(Error::invalid("n_samples must be at least 1"));
    }
    if !(spec.noise_variance >= 0.0) {
        return Err(Error::invalid("noise_variance must be non-negative"));
    }
    let space = spec.space()?;
    let terms = spec.resolved_terms(&space)?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let n = spec.n_samples;
    let columns: Vec<Vec<f64>> = (0..spec.n_main)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let noise = Normal::new(0.0, spec.noise_variance.sqrt())
        .map_err(|e| Error::invalid(format!("noise distribution: {e}")))?;

    let mut latent: Vec<f64> = (0..n).map(|_| noise.sample(&mut rng)).collect();
    for &t in &terms {
        match space.decode(t)? {
            TermDescriptor::MainEffect(i) => {
                for (l, v) in latent.iter_mut().zip(&columns[i as usize - 1]) {
                    *l += v;
                }
            }
            TermDescriptor::Interaction(i, j) => {
                let (a, b) = (&columns[i as usize - 1], &columns[j as usize - 1]);
                for (r, l) in latent.iter_mut().enumerate() {
                    *l += a[r] * b[r];
                }
            }
        }
    }
    let response: Vec<f64> = latent
        .iter()
        .map(|&l| if l > spec.threshold { 1.0 } else { 0.0 })
        .collect();
    let dataset = Dataset::new(columns, response, None)?;
    let positive_rate = dataset.positive_rate();
    let mut echo = spec.clone();
    echo.true_terms = terms;
    Ok(SimResult {
        dataset,
        spec: echo,
        positive_rate,
    })
}

/// Draws a hierarchical set of exactly `n_true` terms.
///
/// About `interaction_fraction` of the set are interactions, all drawn from
/// pairs within a randomly chosen pool of main effects; every pool member is
/// itself in the set. The split is adjusted when the pool is too small to hold
/// the requested interactions or would exceed `n_main`.
pub fn default_true_set<R: Rng + ?Sized>(
    n_main: u32,
    n_true: usize,
    interaction_fraction: f64,
    rng: &mut R,
) -> Result<Vec<TermId>> {
    let space = PredictorSpace::new(n_main, true)?;
    if n_true == 0 || n_true > space.total_terms() as usize {
        return Err(Error::invalid(format!(
            "n_true = {n_true} is infeasible for {} candidate terms",
            space.total_terms()
        )));
    }
    if !(0.0..=1.0).contains(&interaction_fraction) {
        return Err(Error::invalid("interaction_fraction must be in [0, 1]"));
    }
    let pairs = |m: usize| interaction_count(m as u64, 2) as usize;
    let mut n_int = (interaction_fraction * n_true as f64).round() as usize;
    let mut n_mains = n_true - n_int;
    while pairs(n_mains) < n_int {
        n_int -= 1;
        n_mains += 1;
    }
    if n_mains > n_main as usize {
        n_mains = n_main as usize;
        n_int = n_true - n_mains;
    }
    debug_assert!(pairs(n_mains) >= n_int);

    let mut pool: Vec<u32> = sample(rng, n_main as usize, n_mains)
        .into_iter()
        .map(|i| i as u32 + 1)
        .collect();
    pool.sort_unstable();
    let mut out: Vec<TermId> = pool
        .iter()
        .map(|&i| space.encode(TermDescriptor::MainEffect(i)))
        .collect::<Result<_>>()?;

    let mut candidates = Vec::with_capacity(pairs(n_mains));
    for (a, &i) in pool.iter().enumerate() {
        for &j in &pool[a + 1..] {
            candidates.push(space.encode(TermDescriptor::Interaction(i, j))?);
        }
    }
    for k in sample(rng, candidates.len(), n_int) {
        out.push(candidates[k]);
    }
    out.sort_unstable();
    Ok(out)
}

/// Writes `x1..xn,y` with a header row. Values use the shortest representation
/// that parses back to the identical `f64`.
pub fn write_dataset_csv(dataset: &Dataset, path: &Path, response_name: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header: Vec<String> = dataset.names().to_vec();
    header.push(response_name.to_string());
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    let y = dataset.response();
    for r in 0..dataset.rows() {
        let mut rec: Vec<String> = (0..dataset.n_main())
            .map(|c| dataset.raw_column(c)[r].to_string())
            .collect();
        rec.push(format!("{}", y[r] as u8));
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// One term label per line, e.g. `x3` or `x1:x5`.
pub fn write_truth(terms: &[TermId], space: &PredictorSpace, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for &t in terms {
        writeln!(f, "{}", space.decode(t)?.label()).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

pub fn read_truth(path: &Path, space: &PredictorSpace) -> Result<Vec<TermId>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let d = TermDescriptor::parse_label(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", lineno + 1),
        })?;
        out.push(space.encode(d)?);
    }
    out.sort_unstable();
    Ok(out)
}
