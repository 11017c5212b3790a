//! Plain-text matrix interchange:
//!
//! ```text
//! MTX1
//! <rows> <cols>
//! <cols space-separated reals>     (rows lines)
//! # optional trailing metadata
//! ```
//!
//! Values are written in shortest round-trip scientific notation, so
//! parsing a written file reproduces every value exactly.

use std::fmt::Write as _;
use std::path::Path;

use super::atomic::write_atomic;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAGIC: &str = "MTX1";

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub matrix: Matrix,
    /// Metadata lines without the leading `#` and one following space.
    pub metadata: Vec<String>,
}

impl MatrixFile {
    pub fn new(matrix: Matrix) -> Self {
        MatrixFile {
            matrix,
            metadata: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.metadata.push(format!("{key}={value}"));
        self
    }

    /// Value of the first `key=value` metadata line with this key.
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find_map(|line| {
            line.split_once('=')
                .filter(|(k, _)| k.trim() == key)
                .map(|(_, v)| v.trim())
        })
    }

    pub fn to_text(&self) -> String {
        let m = &self.matrix;
        let mut out = format!("{MAGIC}\n{} {}\n", m.rows(), m.cols());
        for row in m.row_iter() {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v:e}");
            }
            out.push('\n');
        }
        for line in &self.metadata {
            let _ = writeln!(out, "# {line}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            Some((n, l)) => {
                return Err(Error::parse(n, format!("expected '{MAGIC}', found '{l}'")))
            }
            None => return Err(Error::parse(1, "empty file")),
        }
        let (n, dims) = lines
            .next()
            .ok_or_else(|| Error::parse(2, "missing 'rows cols' line"))?;
        let parts: Vec<&str> = dims.split_whitespace().collect();
        let [r, c] = parts.as_slice() else {
            return Err(Error::parse(
                n,
                format!("expected 'rows cols', found '{dims}'"),
            ));
        };
        let parse_dim = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(n, format!("invalid dimension '{s}'")))
        };
        let (rows, cols) = (parse_dim(r)?, parse_dim(c)?);

        let mut data = Vec::with_capacity(rows * cols);
        for k in 0..rows {
            let (n, line) = lines.next().ok_or_else(|| {
                Error::parse(
                    3 + k,
                    format!("expected {rows} data rows, file ends after {k}"),
                )
            })?;
            let before = data.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(n, format!("invalid number '{tok}'")))?;
                data.push(v);
            }
            if data.len() - before != cols {
                return Err(Error::parse(
                    n,
                    format!("expected {cols} values, found {}", data.len() - before),
                ));
            }
        }
        let mut metadata = Vec::new();
        for (n, line) in lines {
            if let Some(rest) = line.strip_prefix('#') {
                metadata.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
            } else if !line.trim().is_empty() {
                return Err(Error::parse(
                    n,
                    "unexpected content after the data rows (metadata lines must start with '#')",
                ));
            }
        }
        Ok(MatrixFile {
            matrix: Matrix::from_vec(rows, cols, data)?,
            metadata,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        MatrixFile::parse(&text).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_layout() {
        let m = Matrix::from_rows(&[vec![1.0, -0.5], vec![1e-300, 3.0]]).unwrap();
        let f = MatrixFile::new(m).with_meta("final_stress", 0.25);
        assert_eq!(
            f.to_text(),
            "MTX1\n2 2\n1e0 -5e-1\n1e-300 3e0\n# final_stress=0.25\n"
        );
        let back = MatrixFile::parse(&f.to_text()).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.meta("final_stress"), Some("0.25"));
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("MTX2\n1 1\n0\n", 1),
            ("MTX1\n2\n", 2),
            ("MTX1\n2 2\n1 2\n3 x\n", 4),
            ("MTX1\n2 2\n1 2\n3\n", 4),
            ("MTX1\n2 1\n1\n", 4),
            ("MTX1\n1 1\n1\n2\n", 4),
        ];
        for (text, line) in cases {
            match MatrixFile::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn accepts_other_spellings() {
        let f = MatrixFile::parse("MTX1\r\n1 3\r\n0.1  2 -3.5E2\r\n\r\n#note\n").unwrap();
        assert_eq!(f.matrix.as_slice(), &[0.1, 2.0, -350.0]);
        assert_eq!(f.metadata, vec!["note".to_string()]);
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(rows in 1usize..6, cols in 1usize..6, vals in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 36)) {
            let m = Matrix::from_vec(rows, cols, vals[..rows * cols].to_vec()).unwrap();
            let f = MatrixFile::new(m);
            let back = MatrixFile::parse(&f.to_text()).unwrap();
            prop_assert_eq!(back.matrix.as_slice(), f.matrix.as_slice());
        }
    }
}
