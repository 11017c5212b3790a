//! File formats, experiment configuration and report tables.

mod atomic;
mod config;
mod matrix_file;
mod pgm;
mod report;

use std::path::Path;

pub use atomic::write_atomic;
pub use config::{
    ExperimentConfig, LossSection, MdsSection, MetricName, MetricsSection, RegistrationSection,
    ScheduleName, ScheduleSection, SpectrumSection,
};
pub use matrix_file::{MatrixFile, MAGIC};
pub use pgm::{encode_pgm, mask_image, parse_pgm, read_pgm, write_pgm, PgmFormat};
pub use report::{
    fmt_f64, fmt_opt, pcc_table, CsvTable, MetricAggregate, MetricsReport, PairMetrics, PccRow,
    RunSummary,
};

use crate::error::{Error, Result};
use crate::registration::RigidTransform;

pub fn read_transform(path: &Path) -> Result<RigidTransform> {
    let text = std::fs::read_to_string(path)?;
    let t: RigidTransform = serde_json::from_str(&text)
        .map_err(|e| Error::parse(e.line(), format!("{}: {e}", path.display())))?;
    t.validate()?;
    Ok(t)
}

pub fn write_transform(path: &Path, t: &RigidTransform) -> Result<()> {
    let mut text = serde_json::to_string_pretty(t).expect("transform serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_json_round_trip() {
        let dir = std::env::temp_dir().join(format!("comir-tjson-{}", std::process::id()));
        let path = dir.join("t.json");
        let t = RigidTransform::new(0.3, -4.0, 2.5, [10.0, 20.0]).unwrap();
        write_transform(&path, &t).unwrap();
        assert!(std::fs::read_to_string(&path)
            .unwrap()
            .contains("theta_rad"));
        assert_eq!(read_transform(&path).unwrap(), t);
        std::fs::write(&path, "{\"theta_rad\": 1}").unwrap();
        assert!(read_transform(&path).is_err());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
