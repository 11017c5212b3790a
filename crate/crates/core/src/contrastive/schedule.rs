//! How the final-layer loss `L_C` and the bottleneck loss `L_BN` are combined
//! at a given training step.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::infonce::{info_nce_loss, info_nce_loss_and_gradient, EmbeddingSet, Level, LossConfig};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `L_C` only.
    Baseline,
    /// `L_C` on even iterations, `weight · L_BN` on odd ones.
    Alternating { weight: f64 },
    /// `L_C + alpha · L_BN` every iteration.
    Summed { alpha: f64 },
    /// `L_BN` for epochs `< split_epoch`, then `L_C`.
    Pretraining { split_epoch: usize },
}

impl ScheduleKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleKind::Baseline => "baseline",
            ScheduleKind::Alternating { .. } => "alternating",
            ScheduleKind::Summed { .. } => "summed",
            ScheduleKind::Pretraining { .. } => "pretraining",
        }
    }

    pub fn validate(&self, total_epochs: usize) -> Result<()> {
        match *self {
            ScheduleKind::Baseline => Ok(()),
            ScheduleKind::Alternating { weight } if !(weight > 0.0 && weight.is_finite()) => Err(
                Error::Config(format!("alternating weight must be positive, got {weight}")),
            ),
            ScheduleKind::Summed { alpha } if !(alpha > 0.0 && alpha.is_finite()) => Err(
                Error::Config(format!("summed-loss alpha must be positive, got {alpha}")),
            ),
            ScheduleKind::Pretraining { split_epoch }
                if split_epoch == 0 || split_epoch >= total_epochs =>
            {
                Err(Error::Config(format!(
                    "pretraining split epoch must lie in [1, {total_epochs}), got {split_epoch}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Weights `(w_C, w_BN)` applied at this step; a zero weight means the
    /// term is inactive.
    fn weights(&self, epoch: usize, iteration: usize) -> (f64, f64) {
        match *self {
            ScheduleKind::Baseline => (1.0, 0.0),
            ScheduleKind::Alternating { weight } => {
                if iteration.is_multiple_of(2) {
                    (1.0, 0.0)
                } else {
                    (0.0, weight)
                }
            }
            ScheduleKind::Summed { alpha } => (1.0, alpha),
            ScheduleKind::Pretraining { split_epoch } => {
                if epoch < split_epoch {
                    (0.0, 1.0)
                } else {
                    (1.0, 0.0)
                }
            }
        }
    }
}

/// Position within a training run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub epoch: usize,
    /// Global iteration index (not reset at epoch boundaries).
    pub iteration: usize,
    pub total_epochs: usize,
}

/// The loss terms that contributed at one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActiveTerms {
    pub contrastive: bool,
    pub bottleneck: bool,
}

impl ActiveTerms {
    pub const C: ActiveTerms = ActiveTerms {
        contrastive: true,
        bottleneck: false,
    };
    pub const BN: ActiveTerms = ActiveTerms {
        contrastive: false,
        bottleneck: true,
    };
    pub const BOTH: ActiveTerms = ActiveTerms {
        contrastive: true,
        bottleneck: true,
    };
}

impl fmt::Display for ActiveTerms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.contrastive, self.bottleneck) {
            (true, true) => f.write_str("L_C+L_BN"),
            (true, false) => f.write_str("L_C"),
            (false, true) => f.write_str("L_BN"),
            (false, false) => f.write_str("none"),
        }
    }
}

impl std::str::FromStr for ActiveTerms {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L_C+L_BN" => Ok(ActiveTerms::BOTH),
            "L_C" => Ok(ActiveTerms::C),
            "L_BN" => Ok(ActiveTerms::BN),
            other => Err(Error::parse(
                0,
                format!("unknown active-terms tag `{other}`"),
            )),
        }
    }
}

/// The four embedding sets a schedule looks at.
#[derive(Debug, Clone, Copy)]
pub struct LevelPairs<'a> {
    pub final_a: &'a EmbeddingSet,
    pub final_b: &'a EmbeddingSet,
    pub bn_a: &'a EmbeddingSet,
    pub bn_b: &'a EmbeddingSet,
}

impl LevelPairs<'_> {
    fn check(&self) -> Result<()> {
        self.final_a.check_paired(self.final_b)?;
        self.bn_a.check_paired(self.bn_b)?;
        if self.final_a.level() != Level::Final || self.bn_a.level() != Level::Bottleneck {
            return Err(Error::Contract(
                "final/bottleneck sets passed at the wrong level".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleLoss {
    pub loss: f64,
    pub active: ActiveTerms,
}

/// Gradient of the schedule loss with respect to each embedding set. Inactive
/// levels get all-zero matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleGradient {
    pub loss: ScheduleLoss,
    pub final_a: Matrix,
    pub final_b: Matrix,
    pub bn_a: Matrix,
    pub bn_b: Matrix,
}

fn check_step(schedule: &ScheduleKind, step: Step) -> Result<()> {
    schedule.validate(step.total_epochs)?;
    if step.epoch >= step.total_epochs {
        return Err(Error::Contract(format!(
            "epoch {} is outside a {}-epoch schedule",
            step.epoch, step.total_epochs
        )));
    }
    Ok(())
}

pub fn schedule_loss(
    sets: LevelPairs<'_>,
    cfg_final: &LossConfig,
    cfg_bn: &LossConfig,
    schedule: &ScheduleKind,
    step: Step,
) -> Result<ScheduleLoss> {
    check_step(schedule, step)?;
    sets.check()?;
    let (wc, wbn) = schedule.weights(step.epoch, step.iteration);
    let mut loss = 0.0;
    if wc > 0.0 {
        loss += wc * info_nce_loss(sets.final_a, sets.final_b, cfg_final)?;
    }
    if wbn > 0.0 {
        loss += wbn * info_nce_loss(sets.bn_a, sets.bn_b, cfg_bn)?;
    }
    Ok(ScheduleLoss {
        loss,
        active: ActiveTerms {
            contrastive: wc > 0.0,
            bottleneck: wbn > 0.0,
        },
    })
}

pub fn schedule_loss_and_gradient(
    sets: LevelPairs<'_>,
    cfg_final: &LossConfig,
    cfg_bn: &LossConfig,
    schedule: &ScheduleKind,
    step: Step,
) -> Result<ScheduleGradient> {
    check_step(schedule, step)?;
    sets.check()?;
    let (wc, wbn) = schedule.weights(step.epoch, step.iteration);
    let mut loss = 0.0;

    let (final_a, final_b) = if wc > 0.0 {
        let (l, ga, gb) = info_nce_loss_and_gradient(sets.final_a, sets.final_b, cfg_final)?;
        loss += wc * l;
        (ga.scale(wc), gb.scale(wc))
    } else {
        let (n, d) = sets.final_a.data().shape();
        (Matrix::zeros(n, d), Matrix::zeros(n, d))
    };
    let (bn_a, bn_b) = if wbn > 0.0 {
        let (l, ga, gb) = info_nce_loss_and_gradient(sets.bn_a, sets.bn_b, cfg_bn)?;
        loss += wbn * l;
        (ga.scale(wbn), gb.scale(wbn))
    } else {
        let (n, d) = sets.bn_a.data().shape();
        (Matrix::zeros(n, d), Matrix::zeros(n, d))
    };

    Ok(ScheduleGradient {
        loss: ScheduleLoss {
            loss,
            active: ActiveTerms {
                contrastive: wc > 0.0,
                bottleneck: wbn > 0.0,
            },
        },
        final_a,
        final_b,
        bn_a,
        bn_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contrastive::Modality;

    fn sets() -> [EmbeddingSet; 4] {
        let m = |seed: f64| Matrix::from_fn(4, 3, |i, j| ((i * 3 + j) as f64 * seed).sin());
        [
            EmbeddingSet::new(Level::Final, Modality::A, m(0.7)).unwrap(),
            EmbeddingSet::new(Level::Final, Modality::B, m(1.3)).unwrap(),
            EmbeddingSet::new(Level::Bottleneck, Modality::A, m(0.4)).unwrap(),
            EmbeddingSet::new(Level::Bottleneck, Modality::B, m(2.1)).unwrap(),
        ]
    }

    fn step(epoch: usize, iteration: usize) -> Step {
        Step {
            epoch,
            iteration,
            total_epochs: 100,
        }
    }

    #[test]
    fn baseline_uses_only_final_loss() {
        let [fa, fb, ba, bb] = sets();
        let pairs = LevelPairs {
            final_a: &fa,
            final_b: &fb,
            bn_a: &ba,
            bn_b: &bb,
        };
        let cfg = LossConfig::default();
        for it in 0..5 {
            let out =
                schedule_loss(pairs, &cfg, &cfg, &ScheduleKind::Baseline, step(0, it)).unwrap();
            assert_eq!(out.active, ActiveTerms::C);
            assert_eq!(out.loss, info_nce_loss(&fa, &fb, &cfg).unwrap());
        }
    }

    #[test]
    fn summed_weights_bottleneck_by_alpha() {
        let [fa, fb, ba, bb] = sets();
        let pairs = LevelPairs {
            final_a: &fa,
            final_b: &fb,
            bn_a: &ba,
            bn_b: &bb,
        };
        let cfg = LossConfig::default();
        let out = schedule_loss(
            pairs,
            &cfg,
            &cfg,
            &ScheduleKind::Summed { alpha: 0.5 },
            step(3, 7),
        )
        .unwrap();
        let expected =
            info_nce_loss(&fa, &fb, &cfg).unwrap() + 0.5 * info_nce_loss(&ba, &bb, &cfg).unwrap();
        assert!((out.loss - expected).abs() < 1e-15);
        assert_eq!(out.active, ActiveTerms::BOTH);
    }

    #[test]
    fn pretraining_switches_at_split() {
        let [fa, fb, ba, bb] = sets();
        let pairs = LevelPairs {
            final_a: &fa,
            final_b: &fb,
            bn_a: &ba,
            bn_b: &bb,
        };
        let cfg = LossConfig::default();
        let sched = ScheduleKind::Pretraining { split_epoch: 50 };
        assert_eq!(
            schedule_loss(pairs, &cfg, &cfg, &sched, step(49, 0))
                .unwrap()
                .active,
            ActiveTerms::BN
        );
        assert_eq!(
            schedule_loss(pairs, &cfg, &cfg, &sched, step(50, 0))
                .unwrap()
                .active,
            ActiveTerms::C
        );
    }

    #[test]
    fn alternating_strictly_alternates() {
        let [fa, fb, ba, bb] = sets();
        let pairs = LevelPairs {
            final_a: &fa,
            final_b: &fb,
            bn_a: &ba,
            bn_b: &bb,
        };
        let cfg = LossConfig::default();
        let sched = ScheduleKind::Alternating { weight: 1.0 };
        let mut prev = None;
        for it in 0..100 {
            let active = schedule_loss(pairs, &cfg, &cfg, &sched, step(it / 32, it))
                .unwrap()
                .active;
            assert!(active == ActiveTerms::C || active == ActiveTerms::BN);
            if let Some(p) = prev {
                assert_ne!(p, active);
            }
            prev = Some(active);
        }
    }

    #[test]
    fn invalid_steps_and_schedules() {
        let [fa, fb, ba, bb] = sets();
        let pairs = LevelPairs {
            final_a: &fa,
            final_b: &fb,
            bn_a: &ba,
            bn_b: &bb,
        };
        let cfg = LossConfig::default();
        assert!(matches!(
            schedule_loss(pairs, &cfg, &cfg, &ScheduleKind::Baseline, step(100, 0)),
            Err(Error::Contract(_))
        ));
        assert!(schedule_loss(
            pairs,
            &cfg,
            &cfg,
            &ScheduleKind::Pretraining { split_epoch: 100 },
            step(0, 0)
        )
        .is_err());
        assert!(schedule_loss(
            pairs,
            &cfg,
            &cfg,
            &ScheduleKind::Summed { alpha: 0.0 },
            step(0, 0)
        )
        .is_err());
        let swapped = LevelPairs {
            final_a: &ba,
            final_b: &bb,
            bn_a: &fa,
            bn_b: &fb,
        };
        assert!(schedule_loss(swapped, &cfg, &cfg, &ScheduleKind::Baseline, step(0, 0)).is_err());
    }

    #[test]
    fn active_terms_round_trip_through_text() {
        for t in [ActiveTerms::C, ActiveTerms::BN, ActiveTerms::BOTH] {
            assert_eq!(t.to_string().parse::<ActiveTerms>().unwrap(), t);
        }
    }
}
