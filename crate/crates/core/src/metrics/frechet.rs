use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::matrix::Matrix;

/// Eigenvalues below zero (round-off on PSD inputs) are clamped to zero.
const EIGEN_CLAMP_TOLERANCE: f64 = 1e-10;

/// One feature vector per row, drawn from one set of images.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet(Matrix);

impl FeatureSet {
    pub fn new(features: Matrix) -> Result<Self> {
        if features.rows() < 2 {
            return Err(Error::Contract(format!(
                "a feature set needs at least 2 vectors for covariance, got {}",
                features.rows()
            )));
        }
        if features.cols() == 0 || !features.is_finite() {
            return Err(Error::Domain(
                "feature vectors must be non-empty and finite".into(),
            ));
        }
        Ok(FeatureSet(features))
    }

    /// Raw-pixel features: each image flattened row-major into one vector.
    pub fn from_pixels(images: &[Image]) -> Result<Self> {
        let first = images
            .first()
            .ok_or_else(|| Error::Contract("no images to extract features from".into()))?;
        let mut rows = Vec::with_capacity(images.len());
        for img in images {
            img.check_same_size(first, "FeatureSet::from_pixels")?;
            rows.push(img.data().to_vec());
        }
        FeatureSet::new(Matrix::from_rows(&rows)?)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.cols()
    }
}

/// Principal square root of a symmetric positive semi-definite matrix.
fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "non-finite eigenvalue in matrix square root".into(),
        ));
    }
    let scale = eig.eigenvalues.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let roots = eig.eigenvalues.map(|v| {
        if v < -EIGEN_CLAMP_TOLERANCE * scale {
            log::warn!("clamping eigenvalue {v:e} of a matrix expected to be PSD");
        }
        v.max(0.0).sqrt()
    });
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&roots) * v.transpose())
}

/// `‖μA − μB‖² + tr(ΣA + ΣB − 2(ΣA^½ ΣB ΣA^½)^½)` over sample means and
/// unbiased sample covariances.
pub fn frechet_distance(fa: &FeatureSet, fb: &FeatureSet) -> Result<f64> {
    if fa.dim() != fb.dim() {
        return Err(Error::shape("frechet_distance", fa.dim(), fb.dim()));
    }
    let mean_a = fa.0.column_means();
    let mean_b = fb.0.column_means();
    let mean_term: f64 = mean_a
        .iter()
        .zip(&mean_b)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();

    let cov_a = fa.0.covariance()?.to_nalgebra();
    let cov_b = fb.0.covariance()?.to_nalgebra();
    // Equal covariances cancel exactly; the matrix square roots would leave
    // round-off behind.
    let cov_term = if cov_a == cov_b {
        0.0
    } else {
        let sqrt_a = psd_sqrt(&cov_a)?;
        let inner = &sqrt_a * &cov_b * &sqrt_a;
        let cross = psd_sqrt(&inner)?;
        cov_a.trace() + cov_b.trace() - 2.0 * cross.trace()
    };
    let value = mean_term + cov_term;
    if !value.is_finite() {
        return Err(Error::Numerical(format!(
            "Fréchet distance evaluated to {value}"
        )));
    }
    // The exact value is non-negative; clamp round-off below zero.
    Ok(value.max(0.0))
}
