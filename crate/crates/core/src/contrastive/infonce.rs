use serde::{Deserialize, Serialize};

use super::critic::{critic, critic_with_grad, CriticKind};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Network level an embedding was read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Bottleneck,
    Final,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modality {
    A,
    B,
}

impl Modality {
    pub fn other(self) -> Modality {
        match self {
            Modality::A => Modality::B,
            Modality::B => Modality::A,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Modality::A => "A",
            Modality::B => "B",
        }
    }
}

/// `n` samples × `d` dimensions for one modality at one level. Row `i` of a
/// paired set refers to the same underlying sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    level: Level,
    modality: Modality,
    data: Matrix,
}

impl EmbeddingSet {
    pub fn new(level: Level, modality: Modality, data: Matrix) -> Result<Self> {
        if data.rows() == 0 || data.cols() == 0 {
            return Err(Error::Contract(format!(
                "embedding set must be non-empty, got {}x{}",
                data.rows(),
                data.cols()
            )));
        }
        if !data.is_finite() {
            return Err(Error::Domain(
                "embedding set contains non-finite entries".into(),
            ));
        }
        Ok(EmbeddingSet {
            level,
            modality,
            data,
        })
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn into_data(self) -> Matrix {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.cols()
    }

    /// Checks that `self` and `other` can be scored against each other.
    pub fn check_paired(&self, other: &EmbeddingSet) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Contract(format!(
                "paired sets need equal sample counts ({} vs {})",
                self.len(),
                other.len()
            )));
        }
        if self.level != other.level {
            return Err(Error::Contract(format!(
                "paired sets must share a level ({:?} vs {:?})",
                self.level, other.level
            )));
        }
        if self.modality == other.modality {
            return Err(Error::Contract(format!(
                "paired sets must come from opposite modalities (both {:?})",
                self.modality
            )));
        }
        if self.dim() != other.dim() {
            return Err(Error::shape(
                "paired embedding sets",
                self.dim(),
                other.dim(),
            ));
        }
        Ok(())
    }
}

/// Which exponentials make up the InfoNCE denominator for sample `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// `e^{h(y¹ᵢ,y²ᵢ)/τ} + Σ_{j≠i} e^{h(y¹ⱼ,y²ⱼ)/τ}`: same-index pairs only.
    Diagonal,
    /// `Σⱼ e^{h(y¹ᵢ,y²ⱼ)/τ}`: every other sample of modality B is a negative.
    #[default]
    CrossPair,
}

impl std::str::FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal" => Ok(Pairing::Diagonal),
            "cross_pair" => Ok(Pairing::CrossPair),
            other => Err(Error::Config(format!("unknown pairing `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub critic: CriticKind,
    pub temperature: f64,
    pub pairing: Pairing,
}

impl Default for LossConfig {
    /// Squared-L2 critic at τ = 0.5 with cross-sample negatives.
    fn default() -> Self {
        LossConfig {
            critic: CriticKind::GaussianL2,
            temperature: 0.5,
            pairing: Pairing::CrossPair,
        }
    }
}

impl LossConfig {
    pub fn new(critic: CriticKind, temperature: f64, pairing: Pairing) -> Result<Self> {
        let cfg = LossConfig {
            critic,
            temperature,
            pairing,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Config(format!(
                "temperature must be positive and finite, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn softmax_into(values: &[f64], out: &mut [f64]) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, v) in out.iter_mut().zip(values) {
        *o = (v - max).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

/// Mean InfoNCE loss over the `n` positive pairs of two paired sets.
pub fn info_nce_loss(set_a: &EmbeddingSet, set_b: &EmbeddingSet, cfg: &LossConfig) -> Result<f64> {
    evaluate(set_a, set_b, cfg, false).map(|(loss, _)| loss)
}

/// `(∂L/∂y¹, ∂L/∂y²)`, each shaped like its embedding matrix.
pub fn info_nce_gradient(
    set_a: &EmbeddingSet,
    set_b: &EmbeddingSet,
    cfg: &LossConfig,
) -> Result<(Matrix, Matrix)> {
    let (_, grads) = evaluate(set_a, set_b, cfg, true)?;
    Ok(grads.expect("gradients requested"))
}

/// Loss and both gradients in one pass.
pub fn info_nce_loss_and_gradient(
    set_a: &EmbeddingSet,
    set_b: &EmbeddingSet,
    cfg: &LossConfig,
) -> Result<(f64, Matrix, Matrix)> {
    let (loss, grads) = evaluate(set_a, set_b, cfg, true)?;
    let (ga, gb) = grads.expect("gradients requested");
    Ok((loss, ga, gb))
}

type Grads = Option<(Matrix, Matrix)>;

fn evaluate(
    set_a: &EmbeddingSet,
    set_b: &EmbeddingSet,
    cfg: &LossConfig,
    want_grad: bool,
) -> Result<(f64, Grads)> {
    cfg.validate()?;
    set_a.check_paired(set_b)?;
    // Keep y¹ as modality A regardless of argument order.
    let (ya, yb, swapped) = if set_a.modality() == Modality::A {
        (set_a.data(), set_b.data(), false)
    } else {
        (set_b.data(), set_a.data(), true)
    };
    let (loss, grads) = match cfg.pairing {
        Pairing::CrossPair => cross_pair(ya, yb, cfg, want_grad)?,
        Pairing::Diagonal => diagonal(ya, yb, cfg, want_grad)?,
    };
    if !loss.is_finite() {
        return Err(Error::Numerical(format!(
            "InfoNCE loss evaluated to {loss}"
        )));
    }
    let grads = grads.map(|(ga, gb)| if swapped { (gb, ga) } else { (ga, gb) });
    Ok((loss, grads))
}

fn cross_pair(ya: &Matrix, yb: &Matrix, cfg: &LossConfig, want_grad: bool) -> Result<(f64, Grads)> {
    let n = ya.rows();
    let inv_tau = 1.0 / cfg.temperature;
    let mut scores = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            scores[(i, j)] = critic(cfg.critic, ya.row(i), yb.row(j))? * inv_tau;
        }
    }
    let loss = (0..n)
        .map(|i| log_sum_exp(scores.row(i)) - scores[(i, i)])
        .sum::<f64>()
        / n as f64;
    if !want_grad {
        return Ok((loss, None));
    }

    let d = ya.cols();
    let mut ga = Matrix::zeros(n, d);
    let mut gb = Matrix::zeros(n, d);
    let mut probs = vec![0.0; n];
    let mut gbj = vec![0.0; d];
    for i in 0..n {
        softmax_into(scores.row(i), &mut probs);
        for j in 0..n {
            let dscore = (probs[j] - if i == j { 1.0 } else { 0.0 }) / n as f64;
            gbj.copy_from_slice(gb.row(j));
            critic_with_grad(
                cfg.critic,
                ya.row(i),
                yb.row(j),
                dscore * inv_tau,
                ga.row_mut(i),
                &mut gbj,
            )?;
            gb.row_mut(j).copy_from_slice(&gbj);
        }
    }
    Ok((loss, Some((ga, gb))))
}

fn diagonal(ya: &Matrix, yb: &Matrix, cfg: &LossConfig, want_grad: bool) -> Result<(f64, Grads)> {
    let n = ya.rows();
    let inv_tau = 1.0 / cfg.temperature;
    let scores = (0..n)
        .map(|i| critic(cfg.critic, ya.row(i), yb.row(i)).map(|h| h * inv_tau))
        .collect::<Result<Vec<_>>>()?;
    // Every sample shares the denominator Σⱼ e^{sⱼ}.
    let lse = log_sum_exp(&scores);
    let loss = scores.iter().map(|s| lse - s).sum::<f64>() / n as f64;
    if !want_grad {
        return Ok((loss, None));
    }

    let d = ya.cols();
    let mut ga = Matrix::zeros(n, d);
    let mut gb = Matrix::zeros(n, d);
    let mut probs = vec![0.0; n];
    softmax_into(&scores, &mut probs);
    for i in 0..n {
        let dscore = probs[i] - 1.0 / n as f64;
        let mut gbi = gb.row(i).to_vec();
        critic_with_grad(
            cfg.critic,
            ya.row(i),
            yb.row(i),
            dscore * inv_tau,
            ga.row_mut(i),
            &mut gbi,
        )?;
        gb.row_mut(i).copy_from_slice(&gbi);
    }
    Ok((loss, Some((ga, gb))))
}
