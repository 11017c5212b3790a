use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::contrastive::{EmbeddingSet, Level, Modality};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncoderShape {
    pub bottleneck_dim: usize,
    pub output_dim: usize,
}

impl Default for EncoderShape {
    fn default() -> Self {
        EncoderShape {
            bottleneck_dim: 8,
            output_dim: 8,
        }
    }
}

/// One modality's encoder: `bn = tanh(X·W1)`, `final = bn·W2`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub w1: Matrix,
    pub w2: Matrix,
}

/// Forward activations kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    pub bottleneck: Matrix,
    pub output: Matrix,
}

impl EncoderParams {
    pub fn zeros(input_dim: usize, shape: EncoderShape) -> Self {
        EncoderParams {
            w1: Matrix::zeros(input_dim, shape.bottleneck_dim),
            w2: Matrix::zeros(shape.bottleneck_dim, shape.output_dim),
        }
    }

    /// Entries drawn from `N(0, 1/fan_in)`.
    pub fn random(input_dim: usize, shape: EncoderShape, rng: &mut rng::Rng) -> Self {
        let draw = |fan_in: usize| {
            let s = 1.0 / (fan_in as f64).sqrt();
            move |r: &mut rng::Rng| s * r.sample::<f64, _>(StandardNormal)
        };
        let d1 = draw(input_dim);
        let w1 = Matrix::from_fn(input_dim, shape.bottleneck_dim, |_, _| d1(rng));
        let d2 = draw(shape.bottleneck_dim);
        let w2 = Matrix::from_fn(shape.bottleneck_dim, shape.output_dim, |_, _| d2(rng));
        EncoderParams { w1, w2 }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn forward(&self, inputs: &Matrix) -> Result<Activations> {
        if inputs.cols() != self.w1.rows() {
            return Err(Error::shape(
                "encoder forward",
                self.w1.rows(),
                inputs.cols(),
            ));
        }
        let bottleneck = inputs.matmul(&self.w1)?.map(f64::tanh);
        let output = bottleneck.matmul(&self.w2)?;
        Ok(Activations { bottleneck, output })
    }

    /// Chain rule through both layers. `grads_bn` is the gradient flowing
    /// directly into the bottleneck (from `L_BN`), `grads_final` the one into
    /// the output (from `L_C`).
    pub fn backward(
        &self,
        inputs: &Matrix,
        grads_bn: &Matrix,
        grads_final: &Matrix,
    ) -> Result<EncoderParams> {
        let act = self.forward(inputs)?;
        self.backward_with(inputs, &act, grads_bn, grads_final)
    }

    pub fn backward_with(
        &self,
        inputs: &Matrix,
        act: &Activations,
        grads_bn: &Matrix,
        grads_final: &Matrix,
    ) -> Result<EncoderParams> {
        if grads_bn.shape() != act.bottleneck.shape() {
            return Err(Error::shape(
                "encoder backward (bottleneck grads)",
                format!("{:?}", act.bottleneck.shape()),
                format!("{:?}", grads_bn.shape()),
            ));
        }
        if grads_final.shape() != act.output.shape() {
            return Err(Error::shape(
                "encoder backward (final grads)",
                format!("{:?}", act.output.shape()),
                format!("{:?}", grads_final.shape()),
            ));
        }
        let w2 = act.bottleneck.t_matmul(grads_final)?;
        let mut upstream = grads_final.matmul_t(&self.w2)?;
        for ((u, &g), &h) in upstream
            .as_mut_slice()
            .iter_mut()
            .zip(grads_bn.as_slice())
            .zip(act.bottleneck.as_slice())
        {
            *u = (*u + g) * (1.0 - h * h);
        }
        let w1 = inputs.t_matmul(&upstream)?;
        Ok(EncoderParams { w1, w2 })
    }

    pub fn tensors(&self) -> [&Matrix; 2] {
        [&self.w1, &self.w2]
    }

    pub fn tensors_mut(&mut self) -> [&mut Matrix; 2] {
        [&mut self.w1, &mut self.w2]
    }
}

/// Two encoders sharing no weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinEncoderParams {
    pub a: EncoderParams,
    pub b: EncoderParams,
}

impl TwinEncoderParams {
    pub fn init(input_dim: usize, shape: EncoderShape, seed: u64) -> Self {
        let mut rng = rng::substream(seed, 1);
        let a = EncoderParams::random(input_dim, shape, &mut rng);
        let b = EncoderParams::random(input_dim, shape, &mut rng);
        TwinEncoderParams { a, b }
    }

    pub fn zeros(input_dim: usize, shape: EncoderShape) -> Self {
        TwinEncoderParams {
            a: EncoderParams::zeros(input_dim, shape),
            b: EncoderParams::zeros(input_dim, shape),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let z = |m: &Matrix| Matrix::zeros(m.rows(), m.cols());
        TwinEncoderParams {
            a: EncoderParams {
                w1: z(&self.a.w1),
                w2: z(&self.a.w2),
            },
            b: EncoderParams {
                w1: z(&self.b.w1),
                w2: z(&self.b.w2),
            },
        }
    }

    pub fn encoder(&self, modality: Modality) -> &EncoderParams {
        match modality {
            Modality::A => &self.a,
            Modality::B => &self.b,
        }
    }

    /// `(bottleneck, final)` embeddings of `inputs` under one modality's encoder.
    pub fn forward(
        &self,
        inputs: &Matrix,
        modality: Modality,
    ) -> Result<(EmbeddingSet, EmbeddingSet)> {
        let act = self.encoder(modality).forward(inputs)?;
        Ok((
            EmbeddingSet::new(Level::Bottleneck, modality, act.bottleneck)?,
            EmbeddingSet::new(Level::Final, modality, act.output)?,
        ))
    }

    pub fn tensors(&self) -> [&Matrix; 4] {
        [&self.a.w1, &self.a.w2, &self.b.w1, &self.b.w2]
    }

    pub fn tensors_mut(&mut self) -> [&mut Matrix; 4] {
        [
            &mut self.a.w1,
            &mut self.a.w2,
            &mut self.b.w1,
            &mut self.b.w2,
        ]
    }

    pub fn global_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|m| m.as_slice())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|m| m.is_finite())
    }
}
