use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_training_set, Kernel};
use crate::dataset::Instance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpParams {
    pub kernel: Kernel,
    /// Observation noise variance added to the Gram diagonal.
    pub noise: f64,
}

impl Default for GpParams {
    fn default() -> Self {
        Self {
            kernel: Kernel::Rbf { length_scale: 1.0 },
            noise: 1.0,
        }
    }
}

impl GpParams {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.noise > 0.0 && self.noise.is_finite()) {
            return Err(Error::Config(format!("gp.noise must be > 0, got {}", self.noise)));
        }
        Ok(())
    }
}

/// Predictive mean of a zero-mean GP on centered targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpModel {
    pub kernel: Kernel,
    pub inputs: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub mean: f64,
}

impl GpModel {
    pub fn n_features(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.mean
            + self
                .inputs
                .iter()
                .zip(&self.alpha)
                .map(|(xi, a)| a * self.kernel.eval(xi, x))
                .sum::<f64>()
    }
}

/// Solves `(K + noise I) alpha = y - mean(y)` by Cholesky factorization.
pub fn fit_gp(train: &[Instance], hp: &GpParams) -> Result<GpModel> {
    hp.validate()?;
    check_training_set(train, 1)?;
    let n = train.len();
    let mean = train.iter().map(|i| i.y).sum::<f64>() / n as f64;
    let k = DMatrix::from_fn(n, n, |r, c| {
        hp.kernel.eval(&train[r].x, &train[c].x) + if r == c { hp.noise } else { 0.0 }
    });
    let y = DVector::from_iterator(n, train.iter().map(|i| i.y - mean));
    let chol = k.cholesky().ok_or_else(|| {
        Error::Model(format!(
            "gaussian process: kernel matrix is not positive definite with noise {}; use a larger noise variance",
            hp.noise
        ))
    })?;
    let alpha = chol.solve(&y);
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::Model(
            "gaussian process: non-finite weights; use a larger noise variance".into(),
        ));
    }
    Ok(GpModel {
        kernel: hp.kernel,
        inputs: train.iter().map(|i| i.x.clone()).collect(),
        alpha: alpha.iter().copied().collect(),
        mean,
    })
}
