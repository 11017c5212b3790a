use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, norm};

/// Similarity function `h(y¹, y²)` scored inside the InfoNCE softmax.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticKind {
    /// `−‖y¹ − y²‖²₂`, a Gaussian model with constant variance.
    GaussianL2,
    /// `⟨y¹, y²⟩ / (‖y¹‖ ‖y²‖)`.
    Cosine,
    /// `−‖y¹ − y²‖₁`.
    L1,
}

impl CriticKind {
    pub const ALL: [CriticKind; 3] = [CriticKind::GaussianL2, CriticKind::Cosine, CriticKind::L1];

    pub fn name(self) -> &'static str {
        match self {
            CriticKind::GaussianL2 => "gaussian_l2",
            CriticKind::Cosine => "cosine",
            CriticKind::L1 => "l1",
        }
    }
}

impl std::str::FromStr for CriticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian_l2" | "mse" | "l2" => Ok(CriticKind::GaussianL2),
            "cosine" => Ok(CriticKind::Cosine),
            "l1" => Ok(CriticKind::L1),
            other => Err(Error::Config(format!("unknown critic `{other}`"))),
        }
    }
}

fn check_inputs(y1: &[f64], y2: &[f64]) -> Result<()> {
    if y1.len() != y2.len() {
        return Err(Error::shape("critic", y1.len(), y2.len()));
    }
    if y1.iter().chain(y2).any(|v| !v.is_finite()) {
        return Err(Error::Domain("critic input is not finite".into()));
    }
    Ok(())
}

/// Evaluates `h(y1, y2)`.
pub fn critic(kind: CriticKind, y1: &[f64], y2: &[f64]) -> Result<f64> {
    check_inputs(y1, y2)?;
    match kind {
        CriticKind::GaussianL2 => Ok(-y1
            .iter()
            .zip(y2)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()),
        CriticKind::L1 => Ok(-y1.iter().zip(y2).map(|(a, b)| (a - b).abs()).sum::<f64>()),
        CriticKind::Cosine => {
            let (n1, n2) = (norm(y1), norm(y2));
            if n1 == 0.0 || n2 == 0.0 {
                return Err(Error::Domain("cosine critic on a zero-norm vector".into()));
            }
            Ok(dot(y1, y2) / (n1 * n2))
        }
    }
}

/// Evaluates `h(y1, y2)` and accumulates `scale · ∂h/∂y1` into `g1` and
/// `scale · ∂h/∂y2` into `g2`.
///
/// The L1 critic uses the subgradient `sign(0) = 0` at ties.
pub(crate) fn critic_with_grad(
    kind: CriticKind,
    y1: &[f64],
    y2: &[f64],
    scale: f64,
    g1: &mut [f64],
    g2: &mut [f64],
) -> Result<f64> {
    let value = critic(kind, y1, y2)?;
    if scale == 0.0 {
        return Ok(value);
    }
    match kind {
        CriticKind::GaussianL2 => {
            for k in 0..y1.len() {
                let d = 2.0 * (y1[k] - y2[k]) * scale;
                g1[k] -= d;
                g2[k] += d;
            }
        }
        CriticKind::L1 => {
            for k in 0..y1.len() {
                let diff = y1[k] - y2[k];
                let s = if diff > 0.0 {
                    1.0
                } else if diff < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                g1[k] -= s * scale;
                g2[k] += s * scale;
            }
        }
        CriticKind::Cosine => {
            let (n1, n2) = (norm(y1), norm(y2));
            let inv = 1.0 / (n1 * n2);
            let c1 = value / (n1 * n1);
            let c2 = value / (n2 * n2);
            for k in 0..y1.len() {
                g1[k] += scale * (y2[k] * inv - c1 * y1[k]);
                g2[k] += scale * (y1[k] * inv - c2 * y2[k]);
            }
        }
    }
    Ok(value)
}
