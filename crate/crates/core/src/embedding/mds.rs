use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::dissimilarity::DissimilarityMatrix;
use super::sammon::Sammon;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const STEP_GROWTH: f64 = 1.05;
const STEP_SHRINK: f64 = 0.5;
/// First step moves the configuration by this fraction of the mean target.
const INITIAL_MOVE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MdsInit {
    Random,
    /// Top two eigenvectors of the double-centred squared dissimilarities.
    #[default]
    Classical,
}

impl FromStr for MdsInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(MdsInit::Random),
            "classical" => Ok(MdsInit::Classical),
            _ => Err(Error::Config(format!(
                "unknown MDS init '{s}' (expected random or classical)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MdsConfig {
    pub max_iters: usize,
    /// Stop once an accepted step changes the stress by less than this
    /// fraction.
    pub tol: f64,
    pub seed: u64,
    pub init: MdsInit,
}

impl Default for MdsConfig {
    fn default() -> Self {
        MdsConfig {
            max_iters: 2000,
            tol: 1e-9,
            seed: 0,
            init: MdsInit::Classical,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdsSolution {
    pub points: Matrix,
    pub final_stress: f64,
    pub iterations_used: usize,
    /// Stress of the initial configuration and after every accepted step.
    pub stress_history: Vec<f64>,
    pub final_gradient_norm: f64,
    /// Pairs with zero target dissimilarity (weighted specially).
    pub zero_dissimilarity_pairs: usize,
}

/// Classical (Torgerson) scaling to two dimensions.
pub fn classical_mds(delta: &DissimilarityMatrix) -> Matrix {
    let n = delta.len();
    let sq = DMatrix::from_fn(n, n, |i, j| delta.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).mean()).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand)
    });
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let mut pts = Matrix::zeros(n, 2);
    for (k, &idx) in order.iter().take(2).enumerate() {
        let root = eig.eigenvalues[idx].max(0.0).sqrt();
        // Fix the eigenvector sign so the largest-magnitude entry is positive.
        let col = eig.eigenvectors.column(idx);
        let pivot = col
            .iter()
            .cloned()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            pts.as_mut_slice()[2 * i + k] = sign * root * col[i];
        }
    }
    pts
}

fn mean_offdiag(delta: &DissimilarityMatrix) -> f64 {
    let n = delta.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..i {
            s += delta.get(i, j);
        }
    }
    s / (n * (n - 1) / 2) as f64
}

/// Gradient descent on Sammon stress with multiplicative step control:
/// steps that raise the stress are rejected and halve the step, accepted
/// steps grow it by 5%. The recorded history is therefore nonincreasing.
pub fn mds_fit(delta: &DissimilarityMatrix, cfg: &MdsConfig) -> Result<MdsSolution> {
    if !(cfg.tol >= 0.0) {
        return Err(Error::Config("MDS tolerance must be non-negative".into()));
    }
    let sammon = Sammon::new(delta)?;
    let n = delta.len();
    let scale = mean_offdiag(delta);
    let mut points = match cfg.init {
        MdsInit::Classical => classical_mds(delta),
        MdsInit::Random => {
            let mut rng = crate::rng::seeded(cfg.seed);
            Matrix::from_fn(n, 2, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
        }
    };
    let mut stress = sammon.stress(&points)?;
    if !stress.is_finite() {
        return Err(Error::Numerical(format!("initial MDS stress is {stress}")));
    }
    let mut history = vec![stress];
    let mut grad = sammon.gradient(&points)?.gradient;
    let mut gnorm = grad.frobenius_norm();
    let mut step = if gnorm > 0.0 {
        INITIAL_MOVE_FRACTION * scale / gnorm
    } else {
        0.0
    };
    let mut iterations = 0;
    while iterations < cfg.max_iters && stress > 0.0 && gnorm > 0.0 {
        iterations += 1;
        let candidate = Matrix::from_fn(n, 2, |i, k| points[(i, k)] - step * grad[(i, k)]);
        let next = sammon.stress(&candidate)?;
        if !next.is_finite() {
            return Err(Error::Numerical(format!(
                "MDS stress became {next} at iteration {iterations}"
            )));
        }
        if next <= stress {
            let rel = (stress - next) / stress;
            points = candidate;
            stress = next;
            history.push(stress);
            grad = sammon.gradient(&points)?.gradient;
            gnorm = grad.frobenius_norm();
            step *= STEP_GROWTH;
            if rel < cfg.tol {
                break;
            }
        } else {
            step *= STEP_SHRINK;
            // The step no longer moves any coordinate.
            if step * gnorm <= f64::EPSILON * scale {
                break;
            }
        }
    }
    log::debug!("MDS finished after {iterations} iterations, stress {stress:e}");
    Ok(MdsSolution {
        points,
        final_stress: stress,
        iterations_used: iterations,
        stress_history: history,
        final_gradient_norm: gnorm,
        zero_dissimilarity_pairs: sammon.zero_pairs,
    })
}
