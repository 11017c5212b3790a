use comir_diag::contrastive::{info_nce_loss, EmbeddingSet};
use comir_diag::io::{fmt_f64, CsvTable, MatrixFile};
use comir_diag::toy::{mean_positive_cosine, run_training, Embeddings, SyntheticPairDataset};
use comir_diag::Result;

use crate::Context;

/// `(file stem, set)` for the four sets, named `<level>_<modality>`.
pub fn named_sets(e: &Embeddings) -> [(&'static str, &EmbeddingSet); 4] {
    [
        ("bn_a", &e.bn_a),
        ("bn_b", &e.bn_b),
        ("final_a", &e.final_a),
        ("final_b", &e.final_b),
    ]
}

pub fn run(ctx: &Context) -> Result<()> {
    let cfg = &ctx.config;
    let loss_final = cfg.loss.final_loss()?;
    let loss_bn = cfg.loss.bn_loss()?;
    let schedule = cfg.schedule.schedule();
    let data = SyntheticPairDataset::generate(cfg.dataset)?;
    log::info!(
        "training {} for {} epochs on {} samples",
        schedule.name(),
        cfg.optimizer.epochs,
        data.len()
    );
    let trace = run_training(
        &data,
        cfg.encoder,
        &schedule,
        &loss_final,
        &loss_bn,
        &cfg.optimizer,
    )?;

    let mut t = CsvTable::new(["epoch", "iteration", "contrastive", "bottleneck", "loss"]);
    for r in &trace.records {
        t.push(vec![
            r.epoch.to_string(),
            r.iteration.to_string(),
            r.active.contrastive.to_string(),
            r.active.bottleneck.to_string(),
            fmt_f64(r.loss),
        ]);
    }
    t.write(&ctx.out("trace.csv"))?;

    for (stage, emb) in [
        ("initial", &trace.initial_embeddings),
        ("trained", &trace.final_embeddings),
    ] {
        for (name, set) in named_sets(emb) {
            MatrixFile::new(set.data().clone())
                .with_meta("stage", stage)
                .with_meta("set", name)
                .write(&ctx.out(&format!("emb_{stage}_{name}.mtx")))?;
        }
    }

    // Full-dataset final-level loss and positive-pair agreement, before and
    // after training.
    let (i, f) = (&trace.initial_embeddings, &trace.final_embeddings);
    let initial_loss = info_nce_loss(&i.final_a, &i.final_b, &loss_final)?;
    let final_loss = info_nce_loss(&f.final_a, &f.final_b, &loss_final)?;
    let reduction = if initial_loss > 0.0 {
        1.0 - final_loss / initial_loss
    } else {
        0.0
    };
    let mut s = CsvTable::new([
        "schedule",
        "epochs",
        "initial_loss",
        "final_loss",
        "loss_reduction",
        "initial_cosine_final",
        "cosine_final",
        "cosine_bn",
    ]);
    s.push(vec![
        schedule.name().to_string(),
        cfg.optimizer.epochs.to_string(),
        fmt_f64(initial_loss),
        fmt_f64(final_loss),
        fmt_f64(reduction),
        fmt_f64(mean_positive_cosine(i.final_a.data(), i.final_b.data())?),
        fmt_f64(mean_positive_cosine(f.final_a.data(), f.final_b.data())?),
        fmt_f64(mean_positive_cosine(f.bn_a.data(), f.bn_b.data())?),
    ]);
    s.write(&ctx.out("train_summary.csv"))?;
    log::info!("loss {initial_loss:.4} -> {final_loss:.4}");
    Ok(())
}
