use std::path::{Path, PathBuf};

use clap::Args;
use comir_diag::image::Image;
use comir_diag::io::{
    fmt_f64, mask_image, read_pgm, read_transform, write_pgm, write_transform, CsvTable, PgmFormat,
};
use comir_diag::metrics::median;
use comir_diag::registration::{
    extract_features, pair_seed, register_features, register_pair, registration_error,
    synthesize_test_pair, textured_image, Features, RegistrationResult, RigidTransform,
};
use comir_diag::{Error, Result};
use rayon::prelude::*;

use crate::Context;

#[derive(Debug, Args)]
pub struct RegisterArgs {
    /// Source image for synthesized pairs (default: a generated texture).
    #[arg(long, value_name = "PGM", conflicts_with_all = ["fixed_dir", "moving_dir"])]
    pub source: Option<PathBuf>,
    /// Directory of fixed images (`*.pgm`).
    #[arg(long, requires = "moving_dir")]
    pub fixed_dir: Option<PathBuf>,
    /// Directory of moving images with the same file names, optionally with
    /// `<name>.json` ground truth and `<name>_mask.pgm` validity masks.
    #[arg(long, requires = "fixed_dir")]
    pub moving_dir: Option<PathBuf>,
    /// Also write the synthesized pairs under `<output>/pairs/`.
    #[arg(long)]
    pub emit_pairs: bool,
}

/// Sorted `*.pgm` file names in `dir`, excluding `*_mask.pgm`.
pub(crate) fn list_pgms(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir)
        .map_err(|e| Error::Domain(format!("cannot list {}: {e}", dir.display())))?
    {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if name.ends_with(".pgm") && !name.ends_with("_mask.pgm") {
            names.push(name);
        }
    }
    names.sort();
    if names.is_empty() {
        return Err(Error::Domain(format!(
            "no .pgm images in {}",
            dir.display()
        )));
    }
    Ok(names)
}

/// Reads an image and applies `<stem>_mask.pgm` next to it, if present.
pub(crate) fn read_with_mask(path: &Path) -> Result<Image> {
    let img = read_pgm(path)?;
    let mask_path = path.with_file_name(format!("{}_mask.pgm", stem(path)));
    if !mask_path.exists() {
        return Ok(img);
    }
    let mask = read_pgm(&mask_path)?;
    if (mask.width(), mask.height()) != (img.width(), img.height()) {
        return Err(Error::Domain(format!(
            "mask {} does not match its image size",
            mask_path.display()
        )));
    }
    img.with_mask(mask.data().iter().map(|&v| v >= 0.5).collect())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

struct Row {
    fixed: String,
    moving: String,
    size: Option<(usize, usize)>,
    ground_truth: Option<RigidTransform>,
    outcome: std::result::Result<RegistrationResult, String>,
}

fn header() -> CsvTable {
    CsvTable::new([
        "pair_id",
        "fixed",
        "moving",
        "width",
        "height",
        "threshold_px",
        "gt_theta_rad",
        "gt_tx",
        "gt_ty",
        "est_theta_rad",
        "est_tx",
        "est_ty",
        "error_px",
        "success",
        "keypoints_fixed",
        "keypoints_moving",
        "matches",
        "inliers",
        "failure",
    ])
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn run(ctx: &Context, args: &RegisterArgs) -> Result<()> {
    let rows = match (&args.fixed_dir, &args.moving_dir) {
        (Some(f), Some(m)) => from_dirs(ctx, f, m)?,
        _ => synthesized(ctx, args)?,
    };
    let reg = &ctx.config.registration;
    let mut table = header();
    let mut errors = Vec::new();
    let mut flags = Vec::new();
    let mut thresholds = Vec::new();
    for (id, r) in rows.iter().enumerate() {
        let threshold = r.size.map(|(w, h)| reg.threshold_for(w, h));
        let est = r.outcome.as_ref().ok().and_then(|o| o.transform);
        // Unreadable or failed pairs with known ground truth count as misses.
        let error = r.ground_truth.map(|gt| match (est, r.size) {
            (Some(t), Some((w, h))) => registration_error(&t, &gt, w, h),
            _ => f64::INFINITY,
        });
        let success = error.map(|e| threshold.is_some_and(|t| e < t));
        if let Some(e) = error {
            errors.push(e);
        }
        if let Some(s) = success {
            flags.push(s);
        }
        if let Some(t) = threshold {
            thresholds.push(t);
        }
        let (diag, failure) = match &r.outcome {
            Ok(o) => (
                Some(&o.diagnostics),
                o.diagnostics.failure.map(|f| f.to_string()),
            ),
            Err(msg) => (None, Some(msg.clone())),
        };
        table.push(vec![
            id.to_string(),
            r.fixed.clone(),
            r.moving.clone(),
            opt(r.size.map(|s| s.0)),
            opt(r.size.map(|s| s.1)),
            threshold.map(fmt_f64).unwrap_or_default(),
            opt(r.ground_truth.map(|t| fmt_f64(t.theta))),
            opt(r.ground_truth.map(|t| fmt_f64(t.tx))),
            opt(r.ground_truth.map(|t| fmt_f64(t.ty))),
            opt(est.map(|t| fmt_f64(t.theta))),
            opt(est.map(|t| fmt_f64(t.tx))),
            opt(est.map(|t| fmt_f64(t.ty))),
            error.map(fmt_f64).unwrap_or_default(),
            opt(success),
            opt(diag.map(|d| d.keypoints_fixed)),
            opt(diag.map(|d| d.keypoints_moving)),
            opt(diag.map(|d| d.matches)),
            opt(diag.map(|d| d.inliers)),
            failure.unwrap_or_default(),
        ]);
    }
    table.write(&ctx.out("registration.csv"))?;

    let successes = flags.iter().filter(|&&s| s).count();
    let rsr = (!flags.is_empty()).then(|| 100.0 * successes as f64 / flags.len() as f64);
    let uniform_threshold = thresholds
        .first()
        .filter(|t| thresholds.iter().all(|x| x == *t));
    let mut summary = CsvTable::new([
        "pairs",
        "scored",
        "successes",
        "rsr",
        "median_error_px",
        "threshold_px",
    ]);
    summary.push(vec![
        rows.len().to_string(),
        flags.len().to_string(),
        successes.to_string(),
        rsr.map(fmt_f64).unwrap_or_default(),
        median(&errors).map(fmt_f64).unwrap_or_default(),
        uniform_threshold.map(|&t| fmt_f64(t)).unwrap_or_default(),
    ]);
    summary.write(&ctx.out("registration_summary.csv"))?;
    if let Some(r) = rsr {
        log::info!("RSR {r:.1}% over {} scored pairs", flags.len());
    }
    Ok(())
}

fn synthesized(ctx: &Context, args: &RegisterArgs) -> Result<Vec<Row>> {
    let reg = ctx.config.registration;
    let (sift, ransac) = (ctx.config.sift, ctx.config.ransac);
    if reg.n_pairs == 0 {
        return Err(Error::Config(
            "registration.n_pairs must be at least 1".into(),
        ));
    }
    let (source, source_name) = match &args.source {
        Some(p) => (read_pgm(p)?, p.display().to_string()),
        None => (
            textured_image(reg.texture_size, reg.texture_size, reg.seed)?,
            format!("texture:{}:{}", reg.texture_size, reg.seed),
        ),
    };
    let (w, h) = (source.width(), source.height());
    let fixed_features = extract_features(&source, &sift)?;
    let center = RigidTransform::image_center(w, h);
    let pairs_dir = ctx.out("pairs");
    let rows = ctx.pool.install(|| {
        (0..reg.n_pairs)
            .into_par_iter()
            .map(|id| -> Result<Row> {
                let (moving, gt) = synthesize_test_pair(
                    &source,
                    reg.max_rotation_deg,
                    reg.max_translation_px,
                    pair_seed(reg.seed, id),
                )?;
                if args.emit_pairs {
                    emit_pair(&pairs_dir, id, &source, &moving, &gt)?;
                }
                let moving_features: Features = extract_features(&moving, &sift)?;
                let outcome =
                    register_features(&fixed_features, &moving_features, center, &sift, &ransac)?;
                Ok(Row {
                    fixed: source_name.clone(),
                    moving: format!("synthetic:{id}"),
                    size: Some((w, h)),
                    ground_truth: Some(gt),
                    outcome: Ok(outcome),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(rows)
}

fn emit_pair(
    dir: &Path,
    id: usize,
    fixed: &Image,
    moving: &Image,
    gt: &RigidTransform,
) -> Result<()> {
    let name = format!("{id:04}");
    write_pgm(
        &dir.join("fixed").join(format!("{name}.pgm")),
        fixed,
        PgmFormat::Binary,
        true,
    )?;
    let mdir = dir.join("moving");
    write_pgm(
        &mdir.join(format!("{name}.pgm")),
        moving,
        PgmFormat::Binary,
        true,
    )?;
    if let Some(mask) = mask_image(moving) {
        write_pgm(
            &mdir.join(format!("{name}_mask.pgm")),
            &mask,
            PgmFormat::Binary,
            false,
        )?;
    }
    write_transform(&mdir.join(format!("{name}.json")), gt)
}

fn from_dirs(ctx: &Context, fixed_dir: &Path, moving_dir: &Path) -> Result<Vec<Row>> {
    let fixed = list_pgms(fixed_dir)?;
    let moving = list_pgms(moving_dir)?;
    if fixed != moving {
        return Err(Error::Contract(format!(
            "{} and {} must hold the same image names ({} vs {})",
            fixed_dir.display(),
            moving_dir.display(),
            fixed.len(),
            moving.len()
        )));
    }
    let (sift, ransac) = (ctx.config.sift, ctx.config.ransac);
    let rows = ctx.pool.install(|| {
        fixed
            .par_iter()
            .map(|name| {
                let fpath = fixed_dir.join(name);
                let mpath = moving_dir.join(name);
                let gt_path = mpath.with_extension("json");
                let mut row = Row {
                    fixed: fpath.display().to_string(),
                    moving: mpath.display().to_string(),
                    size: None,
                    ground_truth: None,
                    outcome: Err(String::new()),
                };
                let loaded = (|| -> Result<(Image, Image, Option<RigidTransform>)> {
                    let f = read_with_mask(&fpath)?;
                    let m = read_with_mask(&mpath)?;
                    let gt = if gt_path.exists() {
                        Some(read_transform(&gt_path)?)
                    } else {
                        None
                    };
                    Ok((f, m, gt))
                })();
                match loaded {
                    Ok((f, m, gt)) => {
                        row.size = Some((f.width(), f.height()));
                        row.ground_truth = gt;
                        row.outcome = register_pair(&f, &m, &sift, &ransac)
                            .map_err(|e| format!("error: {e}"));
                    }
                    Err(e) => {
                        log::warn!("{name}: {e}");
                        row.ground_truth = read_transform(&gt_path).ok();
                        row.outcome = Err(format!("read: {e}"));
                    }
                }
                row
            })
            .collect()
    });
    Ok(rows)
}
