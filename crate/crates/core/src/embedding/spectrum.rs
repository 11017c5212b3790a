use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Singular values of an embedding covariance, largest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvSpectrum(Vec<f64>);

impl SvSpectrum {
    /// Accepts any non-negative values and sorts them.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Contract("empty spectrum".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(
                "spectrum values must be finite and non-negative".into(),
            ));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(SvSpectrum(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn largest(&self) -> f64 {
        self.0[0]
    }

    /// Divided by the largest value (unchanged when that is zero).
    pub fn normalized(&self) -> SvSpectrum {
        let top = self.largest();
        if top > 0.0 {
            SvSpectrum(self.0.iter().map(|v| v / top).collect())
        } else {
            self.clone()
        }
    }
}

/// Singular values of the unbiased sample covariance of the rows.
pub fn sv_spectrum(embeddings: &Matrix) -> Result<SvSpectrum> {
    if !embeddings.is_finite() {
        return Err(Error::Domain("embeddings must be finite".into()));
    }
    let cov = embeddings.covariance()?.to_nalgebra();
    let svd = cov.svd(false, false);
    // Singular values are non-negative by construction; clamp round-off.
    SvSpectrum::new(svd.singular_values.iter().map(|v| v.max(0.0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseMetrics {
    pub collapsed_dims: usize,
    pub effective_rank: f64,
}

pub const DEFAULT_COLLAPSE_EPSILON: f64 = 1e-6;

/// Number of values below `epsilon_rel · max` and the entropy-based
/// effective rank `exp(−Σ pᵢ ln pᵢ)` with `pᵢ = sᵢ² / Σ s²`. An all-zero
/// spectrum counts every dimension as collapsed and has rank 0.
pub fn collapse_metrics(spectrum: &SvSpectrum, epsilon_rel: f64) -> Result<CollapseMetrics> {
    if !(epsilon_rel >= 0.0 && epsilon_rel.is_finite()) {
        return Err(Error::Config(format!(
            "collapse epsilon must be non-negative, got {epsilon_rel}"
        )));
    }
    let values = spectrum.values();
    let top = spectrum.largest();
    if top == 0.0 {
        return Ok(CollapseMetrics {
            collapsed_dims: values.len(),
            effective_rank: 0.0,
        });
    }
    let collapsed_dims = values.iter().filter(|&&v| v < epsilon_rel * top).count();
    // Scale by the top value first so squaring cannot overflow or underflow.
    let sq: Vec<f64> = values.iter().map(|v| (v / top).powi(2)).collect();
    let total: f64 = sq.iter().sum();
    let entropy: f64 = sq
        .iter()
        .filter(|&&s| s > 0.0)
        .map(|&s| {
            let p = s / total;
            -p * p.ln()
        })
        .sum();
    Ok(CollapseMetrics {
        collapsed_dims,
        effective_rank: entropy.exp(),
    })
}
