use std::path::PathBuf;

use clap::Args;
use comir_diag::embedding::{collapse_metrics, sv_spectrum};
use comir_diag::io::{fmt_f64, write_atomic, CsvTable, MatrixFile};
use comir_diag::Result;

use crate::{svg, Context};

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Embedding matrix (rows are samples).
    #[arg(long, value_name = "MTX")]
    pub input: PathBuf,
    /// Prefix of the output files.
    #[arg(long, default_value = "spectrum")]
    pub name: String,
    /// Also plot the spectrum on a log axis as `<name>.svg`.
    #[arg(long)]
    pub svg: bool,
}

pub fn run(ctx: &Context, args: &SpectrumArgs) -> Result<()> {
    let settings = ctx.config.spectrum;
    let m = MatrixFile::read(&args.input)?.matrix;
    let raw = sv_spectrum(&m)?;
    let collapse = collapse_metrics(&raw, settings.epsilon)?;
    let shown = if settings.normalize {
        raw.normalized()
    } else {
        raw.clone()
    };
    let name = &args.name;

    let mut values = CsvTable::new(["index", "value"]);
    for (i, v) in shown.values().iter().enumerate() {
        values.push(vec![i.to_string(), fmt_f64(*v)]);
    }
    values.write(&ctx.out(&format!("{name}.csv")))?;

    let mut summary = CsvTable::new([
        "samples",
        "dim",
        "largest",
        "collapsed_dims",
        "effective_rank",
        "epsilon",
    ]);
    summary.push(vec![
        m.rows().to_string(),
        m.cols().to_string(),
        fmt_f64(raw.largest()),
        collapse.collapsed_dims.to_string(),
        fmt_f64(collapse.effective_rank),
        fmt_f64(settings.epsilon),
    ]);
    summary.write(&ctx.out(&format!("{name}_collapse.csv")))?;

    if args.svg {
        write_atomic(
            &ctx.out(&format!("{name}.svg")),
            svg::spectrum_plot(shown.values()).as_bytes(),
        )?;
    }
    Ok(())
}
