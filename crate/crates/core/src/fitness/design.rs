use nalgebra::DMatrix;

use super::Dataset;
use crate::error::{Error, Result};
use crate::predictor_space::{PredictorSpace, TermDescriptor, TermId};

/// Intercept column followed by one column per term in ascending id order.
/// Interaction columns are elementwise products of the two model columns.
pub fn design_matrix(dataset: &Dataset, terms: &[TermId], space: &PredictorSpace) -> Result<DMatrix<f64>> {
    let n = dataset.rows();
    if n == 0 {
        return Err(Error::invalid("empty dataset"));
    }
    if dataset.n_main() != space.n_main() as usize {
        return Err(Error::invalid(format!(
            "dataset has {} main effects, predictor space has {}",
            dataset.n_main(),
            space.n_main()
        )));
    }
    let mut sorted = terms.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let mut data = Vec::with_capacity(n * (sorted.len() + 1));
    data.resize(n, 1.0);
    for &t in &sorted {
        match space.decode(t)? {
            TermDescriptor::MainEffect(i) => {
                data.extend_from_slice(dataset.model_column(i as usize - 1));
            }
            TermDescriptor::Interaction(i, j) => {
                let a = dataset.model_column(i as usize - 1);
                let b = dataset.model_column(j as usize - 1);
                data.extend(a.iter().zip(b).map(|(x, y)| x * y));
            }
        }
    }
    Ok(DMatrix::from_vec(n, sorted.len() + 1, data))
}
