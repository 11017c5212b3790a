use std::path::PathBuf;

use clap::Args;
use comir_diag::contrastive::{EmbeddingSet, Level, Modality};
use comir_diag::embedding::{
    mds_fit, pooled_embedding_dissimilarity, DissimilarityMatrix, ItemLabel,
};
use comir_diag::io::{fmt_f64, write_atomic, CsvTable, MatrixFile};
use comir_diag::{Error, Result};

use crate::{svg, Context};

#[derive(Debug, Args)]
pub struct MdsArgs {
    /// Embeddings of modality A (rows are samples).
    #[arg(long, value_name = "MTX", requires = "b", conflicts_with = "delta")]
    pub a: Option<PathBuf>,
    /// Embeddings of modality B, row-paired with `--a`.
    #[arg(long, value_name = "MTX", requires = "a")]
    pub b: Option<PathBuf>,
    /// A precomputed dissimilarity matrix instead of embeddings.
    #[arg(long, value_name = "MTX")]
    pub delta: Option<PathBuf>,
    /// Prefix of the output files.
    #[arg(long, default_value = "mds")]
    pub name: String,
    /// Also draw the layout as `<name>.svg`.
    #[arg(long)]
    pub svg: bool,
}

pub fn run(ctx: &Context, args: &MdsArgs) -> Result<()> {
    let metric = ctx.config.mds.dissimilarity;
    let (delta, labels): (DissimilarityMatrix, Option<Vec<ItemLabel>>) =
        match (&args.a, &args.b, &args.delta) {
            (Some(a), Some(b), None) => {
                let a = EmbeddingSet::new(Level::Final, Modality::A, MatrixFile::read(a)?.matrix)?;
                let b = EmbeddingSet::new(Level::Final, Modality::B, MatrixFile::read(b)?.matrix)?;
                let pooled = pooled_embedding_dissimilarity(&a, &b, metric)?;
                (pooled.matrix, Some(pooled.labels))
            }
            (None, None, Some(d)) => (DissimilarityMatrix::new(MatrixFile::read(d)?.matrix)?, None),
            _ => {
                return Err(Error::Contract(
                    "give either --a and --b, or --delta".into(),
                ))
            }
        };
    let solver = ctx.config.mds.solver();
    let sol = mds_fit(&delta, &solver)?;
    let name = &args.name;

    let mut points = CsvTable::new(["x", "y", "modality", "pair_id"]);
    for i in 0..delta.len() {
        let (modality, pair) = match &labels {
            Some(l) => (l[i].modality.label().to_string(), l[i].pair_id),
            None => (String::new(), i),
        };
        points.push(vec![
            fmt_f64(sol.points[(i, 0)]),
            fmt_f64(sol.points[(i, 1)]),
            modality,
            pair.to_string(),
        ]);
    }
    points.write(&ctx.out(&format!("{name}_points.csv")))?;

    MatrixFile::new(sol.points.clone())
        .with_meta("final_stress", fmt_f64(sol.final_stress))
        .with_meta("iterations_used", sol.iterations_used)
        .write(&ctx.out(&format!("{name}_points.mtx")))?;

    let mut history = CsvTable::new(["step", "stress"]);
    for (k, s) in sol.stress_history.iter().enumerate() {
        history.push(vec![k.to_string(), fmt_f64(*s)]);
    }
    history.write(&ctx.out(&format!("{name}_history.csv")))?;

    let mut summary = CsvTable::new([
        "items",
        "final_stress",
        "iterations_used",
        "final_gradient_norm",
        "zero_dissimilarity_pairs",
        "init",
        "dissimilarity",
    ]);
    summary.push(vec![
        delta.len().to_string(),
        fmt_f64(sol.final_stress),
        sol.iterations_used.to_string(),
        fmt_f64(sol.final_gradient_norm),
        sol.zero_dissimilarity_pairs.to_string(),
        format!("{:?}", solver.init).to_lowercase(),
        metric.to_string(),
    ]);
    summary.write(&ctx.out(&format!("{name}_summary.csv")))?;

    if args.svg {
        let pts: Vec<[f64; 2]> = (0..delta.len())
            .map(|i| [sol.points[(i, 0)], sol.points[(i, 1)]])
            .collect();
        let doc = svg::mds_scatter(&pts, labels.as_deref());
        write_atomic(&ctx.out(&format!("{name}.svg")), doc.as_bytes())?;
    }
    log::info!(
        "MDS stress {:e} after {} iterations",
        sol.final_stress,
        sol.iterations_used
    );
    Ok(())
}
