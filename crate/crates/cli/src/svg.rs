//! Minimal static SVG plots.

use std::fmt::Write as _;

use comir_diag::contrastive::Modality;
use comir_diag::embedding::ItemLabel;

const SIZE: f64 = 480.0;
const PAD: f64 = 24.0;

fn bounds(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

fn scale(v: f64, (lo, hi): (f64, f64), flip: bool) -> f64 {
    let t = (v - lo) / (hi - lo);
    PAD + (SIZE - 2.0 * PAD) * if flip { 1.0 - t } else { t }
}

fn open() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Diamonds in blue (modality A) and red (modality B), with a yellow line
/// between the two items of each pair. Unlabelled points are grey.
pub fn mds_scatter(points: &[[f64; 2]], labels: Option<&[ItemLabel]>) -> String {
    // Equal scaling on both axes keeps the layout's geometry.
    let span = |k: usize| bounds(points.iter().map(move |p| p[k]));
    let (bx, by) = (span(0), span(1));
    let half = 0.5 * (bx.1 - bx.0).max(by.1 - by.0);
    let (cx, cy) = (0.5 * (bx.0 + bx.1), 0.5 * (by.0 + by.1));
    let (bx, by) = ((cx - half, cx + half), (cy - half, cy + half));
    let xy = |p: &[f64; 2]| (scale(p[0], bx, false), scale(p[1], by, true));

    let mut s = open();
    if let Some(labels) = labels {
        let n = labels.len() / 2;
        for i in 0..n {
            let ((x1, y1), (x2, y2)) = (xy(&points[i]), xy(&points[n + i]));
            let _ = writeln!(
                s,
                "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"#e6c700\" stroke-width=\"1\"/>"
            );
        }
    }
    for (i, p) in points.iter().enumerate() {
        let colour = match labels.map(|l| l[i].modality) {
            Some(Modality::A) => "#1f4fd6",
            Some(Modality::B) => "#d62728",
            None => "#666666",
        };
        let (x, y) = xy(p);
        let r = 4.0;
        let _ = writeln!(
            s,
            "<polygon points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\" fill=\"{colour}\"/>",
            x,
            y - r,
            x + r,
            y,
            x,
            y + r,
            x - r,
            y
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Values against their index on a log10 axis; zeros are drawn at the
/// bottom edge.
pub fn spectrum_plot(values: &[f64]) -> String {
    let positive: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    let logs = bounds(positive.iter().map(|v| v.log10()));
    let idx = (0.0, (values.len().max(2) - 1) as f64);
    let mut s = open();
    let pts: Vec<String> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let y = if v > 0.0 {
                scale(v.log10(), logs, true)
            } else {
                SIZE - PAD
            };
            format!("{:.2},{:.2}", scale(i as f64, idx, false), y)
        })
        .collect();
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f4fd6\" stroke-width=\"1.5\"/>",
        pts.join(" ")
    );
    s.push_str("</svg>\n");
    s
}
