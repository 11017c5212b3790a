//! Sammon's stress between target dissimilarities and planar distances:
//! `E = (1/Σ d) · Σ_{i<j} (d_ij − d̄_ij)² / d_ij`.

use super::dissimilarity::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Zero target dissimilarities are weighted by `1 / (ZERO_WEIGHT_FRACTION · mean d)`.
pub const ZERO_WEIGHT_FRACTION: f64 = 1e-6;

/// Per-pair weights and the normalising constant, computed once per matrix.
pub(crate) struct Sammon<'a> {
    delta: &'a DissimilarityMatrix,
    inv_weight_zero: f64,
    scale: f64,
    pub(crate) zero_pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SammonGradient {
    pub gradient: Matrix,
    /// Pairs with a positive target but coincident points, where the stress
    /// is not differentiable. Their contribution is left out.
    pub coincident_pairs: usize,
}

impl<'a> Sammon<'a> {
    pub(crate) fn new(delta: &'a DissimilarityMatrix) -> Result<Self> {
        let n = delta.len();
        if n < 2 {
            return Err(Error::Contract(format!(
                "Sammon stress needs at least 2 items, got {n}"
            )));
        }
        let (mut sum, mut zero_pairs) = (0.0, 0usize);
        for i in 0..n {
            for j in 0..i {
                let d = delta.get(i, j);
                sum += d;
                zero_pairs += usize::from(d == 0.0);
            }
        }
        if sum <= 0.0 {
            return Err(Error::Domain(
                "all dissimilarities are zero; Sammon stress is undefined".into(),
            ));
        }
        let pairs = (n * (n - 1) / 2) as f64;
        if zero_pairs > 0 {
            log::warn!("{zero_pairs} item pairs have zero dissimilarity; weighting them by 1/({ZERO_WEIGHT_FRACTION:e} * mean)");
        }
        Ok(Sammon {
            delta,
            inv_weight_zero: 1.0 / (ZERO_WEIGHT_FRACTION * sum / pairs),
            scale: sum,
            zero_pairs,
        })
    }

    fn check_points(&self, points: &Matrix) -> Result<()> {
        if points.shape() != (self.delta.len(), 2) {
            return Err(Error::shape(
                "Sammon points",
                format!("{}x2", self.delta.len()),
                format!("{}x{}", points.rows(), points.cols()),
            ));
        }
        if !points.is_finite() {
            return Err(Error::Domain("points must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    fn weight(&self, d: f64) -> f64 {
        if d > 0.0 {
            1.0 / d
        } else {
            self.inv_weight_zero
        }
    }

    pub(crate) fn stress(&self, points: &Matrix) -> Result<f64> {
        self.check_points(points)?;
        let p = points.as_slice();
        let n = self.delta.len();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..i {
                let d = self.delta.get(i, j);
                let dbar = (p[2 * i] - p[2 * j]).hypot(p[2 * i + 1] - p[2 * j + 1]);
                total += self.weight(d) * (d - dbar) * (d - dbar);
            }
        }
        Ok(total / self.scale)
    }

    pub(crate) fn gradient(&self, points: &Matrix) -> Result<SammonGradient> {
        self.check_points(points)?;
        let p = points.as_slice();
        let n = self.delta.len();
        let mut g = Matrix::zeros(n, 2);
        let mut coincident = 0usize;
        {
            let gs = g.as_mut_slice();
            for i in 0..n {
                for j in 0..i {
                    let d = self.delta.get(i, j);
                    let (dx, dy) = (p[2 * i] - p[2 * j], p[2 * i + 1] - p[2 * j + 1]);
                    let dbar = dx.hypot(dy);
                    // ∂/∂y_i of w (d − d̄)² is 2 w (d̄ − d) (y_i − y_j) / d̄.
                    let factor = if d == 0.0 {
                        2.0 * self.inv_weight_zero
                    } else if dbar > 0.0 {
                        2.0 * (1.0 - d / dbar) / d
                    } else {
                        coincident += 1;
                        continue;
                    };
                    let f = factor / self.scale;
                    gs[2 * i] += f * dx;
                    gs[2 * i + 1] += f * dy;
                    gs[2 * j] -= f * dx;
                    gs[2 * j + 1] -= f * dy;
                }
            }
        }
        Ok(SammonGradient {
            gradient: g,
            coincident_pairs: coincident,
        })
    }
}

/// Sammon stress of a planar configuration (`n × 2` points).
pub fn sammon_stress(delta: &DissimilarityMatrix, points: &Matrix) -> Result<f64> {
    Sammon::new(delta)?.stress(points)
}

/// Analytic gradient of [`sammon_stress`] with respect to every coordinate.
pub fn sammon_gradient(delta: &DissimilarityMatrix, points: &Matrix) -> Result<SammonGradient> {
    Sammon::new(delta)?.gradient(points)
}
