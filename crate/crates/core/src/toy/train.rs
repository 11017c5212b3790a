use rand::seq::SliceRandom;

use super::dataset::SyntheticPairDataset;
use super::encoder::{EncoderShape, TwinEncoderParams};
use super::sgd::{sgd_step, MomentumState, OptimizerConfig};
use crate::contrastive::{
    schedule_loss_and_gradient, ActiveTerms, EmbeddingSet, Level, LevelPairs, LossConfig, Modality,
    ScheduleKind, ScheduleLoss, Step,
};
use crate::error::{Error, Result};
use crate::matrix::{dot, norm, Matrix};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub epoch: usize,
    pub iteration: usize,
    pub active: ActiveTerms,
    pub loss: f64,
}

/// Embeddings of the full dataset at both levels for both modalities.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    pub bn_a: EmbeddingSet,
    pub bn_b: EmbeddingSet,
    pub final_a: EmbeddingSet,
    pub final_b: EmbeddingSet,
}

impl Embeddings {
    pub fn compute(params: &TwinEncoderParams, dataset: &SyntheticPairDataset) -> Result<Self> {
        let (bn_a, final_a) = params.forward(&dataset.inputs_a, Modality::A)?;
        let (bn_b, final_b) = params.forward(&dataset.inputs_b, Modality::B)?;
        Ok(Embeddings {
            bn_a,
            bn_b,
            final_a,
            final_b,
        })
    }

    pub fn pairs(&self) -> LevelPairs<'_> {
        LevelPairs {
            final_a: &self.final_a,
            final_b: &self.final_b,
            bn_a: &self.bn_a,
            bn_b: &self.bn_b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    pub records: Vec<TraceRecord>,
    pub initial_params: TwinEncoderParams,
    pub final_params: TwinEncoderParams,
    pub initial_embeddings: Embeddings,
    pub final_embeddings: Embeddings,
}

impl TrainingTrace {
    /// Mean loss over the records of one epoch.
    pub fn epoch_mean_loss(&self, epoch: usize) -> Option<f64> {
        let losses: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.epoch == epoch)
            .map(|r| r.loss)
            .collect();
        (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64)
    }
}

/// Mean cosine similarity between row `i` of `a` and row `i` of `b`. Rows
/// with zero norm contribute 0.
pub fn mean_positive_cosine(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.shape() != b.shape() || a.rows() == 0 {
        return Err(Error::shape(
            "mean_positive_cosine",
            format!("{:?}", a.shape()),
            format!("{:?}", b.shape()),
        ));
    }
    let total: f64 = a
        .row_iter()
        .zip(b.row_iter())
        .map(|(x, y)| {
            let d = norm(x) * norm(y);
            if d > 0.0 {
                dot(x, y) / d
            } else {
                0.0
            }
        })
        .sum();
    Ok(total / a.rows() as f64)
}

/// Walks an epoch-shuffled order, drawing batches without replacement and
/// reshuffling once too few indices remain.
struct BatchSampler {
    order: Vec<usize>,
    cursor: usize,
    rng: rng::Rng,
}

impl BatchSampler {
    fn new(n: usize, seed: u64) -> Self {
        let mut s = BatchSampler {
            order: (0..n).collect(),
            cursor: 0,
            rng: rng::substream(seed, 2),
        };
        s.order.shuffle(&mut s.rng);
        s
    }

    fn next_batch(&mut self, size: usize) -> Vec<usize> {
        let size = size.min(self.order.len());
        if self.cursor + size > self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.cursor = 0;
        }
        let batch = self.order[self.cursor..self.cursor + size].to_vec();
        self.cursor += size;
        batch
    }
}

/// Scheduled loss on one batch of paired inputs and its gradient with
/// respect to both encoders' parameters.
pub fn batch_loss_and_gradient(
    params: &TwinEncoderParams,
    xa: &Matrix,
    xb: &Matrix,
    cfg_final: &LossConfig,
    cfg_bn: &LossConfig,
    schedule: &ScheduleKind,
    step: Step,
) -> Result<(ScheduleLoss, TwinEncoderParams)> {
    let act_a = params.a.forward(xa)?;
    let act_b = params.b.forward(xb)?;
    let sets = [
        (act_a.bottleneck.clone(), Modality::A, Level::Bottleneck),
        (act_b.bottleneck.clone(), Modality::B, Level::Bottleneck),
        (act_a.output.clone(), Modality::A, Level::Final),
        (act_b.output.clone(), Modality::B, Level::Final),
    ]
    .into_iter()
    .map(|(m, modality, level)| EmbeddingSet::new(level, modality, m))
    .collect::<Result<Vec<_>>>()?;
    let pairs = LevelPairs {
        bn_a: &sets[0],
        bn_b: &sets[1],
        final_a: &sets[2],
        final_b: &sets[3],
    };
    let out = schedule_loss_and_gradient(pairs, cfg_final, cfg_bn, schedule, step)?;
    let grads = TwinEncoderParams {
        a: params
            .a
            .backward_with(xa, &act_a, &out.bn_a, &out.final_a)?,
        b: params
            .b
            .backward_with(xb, &act_b, &out.bn_b, &out.final_b)?,
    };
    Ok((out.loss, grads))
}

/// Trains the twin encoders for `epochs × iterations_per_epoch` steps.
pub fn run_training(
    dataset: &SyntheticPairDataset,
    shape: EncoderShape,
    schedule: &ScheduleKind,
    cfg_final: &LossConfig,
    cfg_bn: &LossConfig,
    opt: &OptimizerConfig,
) -> Result<TrainingTrace> {
    opt.validate()?;
    cfg_final.validate()?;
    cfg_bn.validate()?;
    schedule.validate(opt.epochs)?;
    if dataset.len() < 2 {
        return Err(Error::Contract(
            "training needs at least two samples".into(),
        ));
    }
    if shape.bottleneck_dim == 0 || shape.output_dim == 0 {
        return Err(Error::Config("encoder dimensions must be >= 1".into()));
    }

    let initial_params = TwinEncoderParams::init(dataset.input_dim(), shape, opt.seed);
    let initial_embeddings = Embeddings::compute(&initial_params, dataset)?;
    let mut params = initial_params.clone();
    let mut state = MomentumState::new(&params);
    let mut sampler = BatchSampler::new(dataset.len(), opt.seed);
    let mut records = Vec::with_capacity(opt.epochs * opt.iterations_per_epoch);

    for epoch in 0..opt.epochs {
        for k in 0..opt.iterations_per_epoch {
            let iteration = epoch * opt.iterations_per_epoch + k;
            let batch = sampler.next_batch(opt.batch_size);
            let xa = dataset.inputs_a.select_rows(&batch);
            let xb = dataset.inputs_b.select_rows(&batch);
            let step = Step {
                epoch,
                iteration,
                total_epochs: opt.epochs,
            };
            let (loss, grads) =
                batch_loss_and_gradient(&params, &xa, &xb, cfg_final, cfg_bn, schedule, step)
                    .map_err(|e| step_error(epoch, iteration, e))?;
            if !loss.loss.is_finite() {
                return Err(Error::Numerical(format!(
                    "loss became {} at epoch {epoch}, iteration {iteration}",
                    loss.loss
                )));
            }
            records.push(TraceRecord {
                epoch,
                iteration,
                active: loss.active,
                loss: loss.loss,
            });
            sgd_step(&mut params, &grads, &mut state, opt)?;
            if !params.is_finite() {
                return Err(Error::Numerical(format!(
                    "parameters became non-finite at epoch {epoch}, iteration {iteration}"
                )));
            }
        }
    }

    let final_embeddings = Embeddings::compute(&params, dataset)?;
    Ok(TrainingTrace {
        records,
        initial_params,
        final_params: params,
        initial_embeddings,
        final_embeddings,
    })
}

fn step_error(epoch: usize, iteration: usize, e: Error) -> Error {
    match e {
        Error::Domain(m) | Error::Numerical(m) => {
            Error::Numerical(format!("{m} (epoch {epoch}, iteration {iteration})"))
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contrastive::CriticKind;
    use crate::toy::DatasetConfig;

    fn small() -> SyntheticPairDataset {
        SyntheticPairDataset::generate(DatasetConfig {
            n_samples: 64,
            latent_dim: 4,
            input_dim: 16,
            noise_sigma: 0.1,
            seed: 5,
        })
        .unwrap()
    }

    fn shape() -> EncoderShape {
        EncoderShape {
            bottleneck_dim: 8,
            output_dim: 4,
        }
    }

    #[test]
    fn zero_learning_rate_freezes_params() {
        let opt = OptimizerConfig {
            learning_rate: 0.0,
            epochs: 2,
            iterations_per_epoch: 4,
            ..Default::default()
        };
        let cfg = LossConfig::default();
        let trace =
            run_training(&small(), shape(), &ScheduleKind::Baseline, &cfg, &cfg, &opt).unwrap();
        assert_eq!(trace.initial_params, trace.final_params);
        assert_eq!(trace.initial_embeddings, trace.final_embeddings);
        assert_eq!(trace.records.len(), 8);
    }

    #[test]
    fn baseline_cosine_training_aligns_positive_pairs() {
        let opt = OptimizerConfig {
            epochs: 10,
            iterations_per_epoch: 20,
            ..Default::default()
        };
        let cfg = LossConfig::new(CriticKind::Cosine, 0.5, Default::default()).unwrap();
        let trace =
            run_training(&small(), shape(), &ScheduleKind::Baseline, &cfg, &cfg, &opt).unwrap();
        assert_eq!(trace.records.len(), 200);
        let before = mean_positive_cosine(
            trace.initial_embeddings.final_a.data(),
            trace.initial_embeddings.final_b.data(),
        )
        .unwrap();
        let after = mean_positive_cosine(
            trace.final_embeddings.final_a.data(),
            trace.final_embeddings.final_b.data(),
        )
        .unwrap();
        assert!(after > before, "{before} -> {after}");
    }

    #[test]
    fn pretraining_trace_switches_exactly_at_half() {
        let opt = OptimizerConfig {
            epochs: 4,
            iterations_per_epoch: 3,
            ..Default::default()
        };
        let cfg = LossConfig::default();
        let sched = ScheduleKind::Pretraining { split_epoch: 2 };
        let trace = run_training(&small(), shape(), &sched, &cfg, &cfg, &opt).unwrap();
        for r in &trace.records {
            let want = if r.epoch < 2 {
                ActiveTerms::BN
            } else {
                ActiveTerms::C
            };
            assert_eq!(r.active, want);
        }
        assert_eq!(trace.records.len(), 12);
    }

    #[test]
    fn identical_seeds_identical_traces() {
        let opt = OptimizerConfig {
            epochs: 2,
            iterations_per_epoch: 5,
            ..Default::default()
        };
        let cfg = LossConfig::default();
        let sched = ScheduleKind::Summed { alpha: 0.5 };
        let t1 = run_training(&small(), shape(), &sched, &cfg, &cfg, &opt).unwrap();
        let t2 = run_training(&small(), shape(), &sched, &cfg, &cfg, &opt).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn sampler_covers_every_index_per_pass() {
        let mut s = BatchSampler::new(10, 0);
        let mut seen: Vec<usize> = (0..5).flat_map(|_| s.next_batch(2)).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
        assert_eq!(s.next_batch(50).len(), 10);
    }
}
