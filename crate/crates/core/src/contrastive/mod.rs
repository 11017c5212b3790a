//! Critics, the InfoNCE loss with analytic gradients, and the schedules that
//! combine final-layer and bottleneck supervision.

mod critic;
mod infonce;
mod schedule;

pub use critic::{critic, CriticKind};
pub use infonce::{
    info_nce_gradient, info_nce_loss, info_nce_loss_and_gradient, EmbeddingSet, Level, LossConfig,
    Modality, Pairing,
};
pub use schedule::{
    schedule_loss, schedule_loss_and_gradient, ActiveTerms, LevelPairs, ScheduleGradient,
    ScheduleKind, ScheduleLoss, Step,
};
