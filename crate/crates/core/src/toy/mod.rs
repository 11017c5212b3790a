//! Desk-scale twin two-layer encoders trained under the supervision
//! schedules, on synthetic paired data.

mod dataset;
mod encoder;
mod sgd;
mod train;

pub use dataset::{DatasetConfig, SyntheticPairDataset};
pub use encoder::{Activations, EncoderParams, EncoderShape, TwinEncoderParams};
pub use sgd::{clip_factor, sgd_step, sgd_update, MomentumState, OptimizerConfig};
pub use train::{
    batch_loss_and_gradient, mean_positive_cosine, run_training, Embeddings, TraceRecord,
    TrainingTrace,
};
