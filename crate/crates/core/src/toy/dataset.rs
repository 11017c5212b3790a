use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub n_samples: usize,
    pub latent_dim: usize,
    pub input_dim: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            n_samples: 256,
            latent_dim: 8,
            input_dim: 32,
            noise_sigma: 0.1,
            seed: 0,
        }
    }
}

/// Two modalities observing a shared latent: `X_j = Z·A_j + ε_j`, with
/// independent mixing matrices `A_j` (entries `N(0, 1/k)`) and Gaussian
/// noise `ε_j ~ N(0, σ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPairDataset {
    pub config: DatasetConfig,
    pub inputs_a: Matrix,
    pub inputs_b: Matrix,
}

impl SyntheticPairDataset {
    pub fn generate(config: DatasetConfig) -> Result<Self> {
        let DatasetConfig {
            n_samples: n,
            latent_dim: k,
            input_dim: p,
            noise_sigma,
            seed,
        } = config;
        if n < 2 || k == 0 || p == 0 {
            return Err(Error::Config(format!(
                "dataset needs n >= 2 and positive dimensions (n={n}, k={k}, p={p})"
            )));
        }
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return Err(Error::Config(format!(
                "noise sigma must be >= 0, got {noise_sigma}"
            )));
        }
        let mut rng = rng::seeded(seed);
        let mut gaussian = |scale: f64| -> f64 { scale * rng.sample::<f64, _>(StandardNormal) };
        let latent = Matrix::from_fn(n, k, |_, _| gaussian(1.0));
        let mix_scale = 1.0 / (k as f64).sqrt();
        let mix_a = Matrix::from_fn(k, p, |_, _| gaussian(mix_scale));
        let mix_b = Matrix::from_fn(k, p, |_, _| gaussian(mix_scale));
        let mut inputs_a = latent.matmul(&mix_a)?;
        let mut inputs_b = latent.matmul(&mix_b)?;
        for v in inputs_a.as_mut_slice() {
            *v += gaussian(noise_sigma);
        }
        for v in inputs_b.as_mut_slice() {
            *v += gaussian(noise_sigma);
        }
        Ok(SyntheticPairDataset {
            config,
            inputs_a,
            inputs_b,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs_a.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs_a.rows() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.inputs_a.cols()
    }
}
