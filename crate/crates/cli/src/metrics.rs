use std::path::PathBuf;

use clap::Args;
use comir_diag::io::{write_atomic, MatrixFile, MetricName, MetricsReport, PairMetrics};
use comir_diag::metrics::{
    alpha_amd, frechet_distance, image_correlation, image_mse, image_ssim, FeatureSet,
};
use comir_diag::{Error, Result};
use rayon::prelude::*;

use crate::register::{list_pgms, read_with_mask};
use crate::Context;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Images of the first modality (`*.pgm`).
    #[arg(long, requires = "b_dir")]
    pub a_dir: Option<PathBuf>,
    /// Images of the second modality, with the same file names.
    #[arg(long, requires = "a_dir")]
    pub b_dir: Option<PathBuf>,
    /// Feature vectors (one row per image) of the first set, for the
    /// Fréchet distance.
    #[arg(long, value_name = "MTX", requires = "features_b")]
    pub features_a: Option<PathBuf>,
    #[arg(long, value_name = "MTX", requires = "features_a")]
    pub features_b: Option<PathBuf>,
}

fn evaluate(ctx: &Context, id: usize, a: &std::path::Path, b: &std::path::Path) -> PairMetrics {
    let m = &ctx.config.metrics;
    let mut row = PairMetrics {
        pair_id: id,
        ..Default::default()
    };
    let outcome = (|| -> Result<()> {
        let ia = read_with_mask(a)?;
        let ib = read_with_mask(b)?;
        if (ia.width(), ia.height()) != (ib.width(), ib.height()) {
            return Err(Error::Domain(format!(
                "size mismatch: {}x{} vs {}x{}",
                ia.width(),
                ia.height(),
                ib.width(),
                ib.height()
            )));
        }
        for metric in MetricName::ALL.into_iter().filter(|&k| m.selected(k)) {
            let v = match metric {
                MetricName::Mse => image_mse(&ia, &ib)?,
                MetricName::Correlation => image_correlation(&ia, &ib)?,
                MetricName::Ssim => image_ssim(&ia, &ib, &ctx.config.ssim)?,
                MetricName::AlphaAmd => alpha_amd(&ia, &ib, &m.amd_for(ia.width(), ia.height()))?,
            };
            row.set(metric, v);
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        log::warn!("pair {id}: {e}");
        row.error = Some(e.to_string());
    }
    row
}

pub fn run(ctx: &Context, args: &EvalArgs) -> Result<()> {
    if args.a_dir.is_none() && args.features_a.is_none() {
        return Err(Error::Contract(
            "give --a-dir/--b-dir, --features-a/--features-b, or both".into(),
        ));
    }
    let pairs = match (&args.a_dir, &args.b_dir) {
        (Some(a), Some(b)) => {
            let names = list_pgms(a)?;
            let others = list_pgms(b)?;
            if names != others {
                return Err(Error::Contract(format!(
                    "{} and {} must hold the same image names",
                    a.display(),
                    b.display()
                )));
            }
            ctx.pool.install(|| {
                names
                    .par_iter()
                    .enumerate()
                    .map(|(id, n)| evaluate(ctx, id, &a.join(n), &b.join(n)))
                    .collect()
            })
        }
        _ => Vec::new(),
    };
    let frechet = match (&args.features_a, &args.features_b) {
        (Some(fa), Some(fb)) => {
            let fa = FeatureSet::new(MatrixFile::read(fa)?.matrix)?;
            let fb = FeatureSet::new(MatrixFile::read(fb)?.matrix)?;
            Some(frechet_distance(&fa, &fb)?)
        }
        _ => None,
    };
    let report = MetricsReport::from_pairs(pairs, frechet);
    report.pairs_table().write(&ctx.out("metrics_pairs.csv"))?;
    report
        .summary_table()
        .write(&ctx.out("metrics_aggregates.csv"))?;
    write_atomic(&ctx.out("metrics.json"), report.to_json().as_bytes())?;
    Ok(())
}
