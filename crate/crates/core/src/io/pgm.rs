//! Grayscale PGM (P2 text and P5 binary), 8 or 16 bit.

use std::path::Path;

use super::atomic::write_atomic;
use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    Ascii,
    Binary,
}

/// Header tokenizer that skips whitespace and `#` comments.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn line(&self) -> usize {
        1 + self.bytes[..self.pos.min(self.bytes.len())]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
    }

    fn token(&mut self) -> Result<(usize, &str)> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        let line = self.line();
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::parse(self.line(), "unexpected end of PGM data"));
        }
        let tok = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::parse(line, "non-ASCII PGM header"))?;
        Ok((line, tok))
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let (line, tok) = self.token()?;
        tok.parse()
            .map_err(|_| Error::parse(line, format!("invalid {what} '{tok}'")))
    }
}

/// Decodes a PGM; intensities are divided by `maxval`.
pub fn parse_pgm(bytes: &[u8]) -> Result<Image> {
    let mut h = Header { bytes, pos: 0 };
    let format = match h.token()?.1 {
        "P2" => PgmFormat::Ascii,
        "P5" => PgmFormat::Binary,
        other => {
            return Err(Error::parse(
                1,
                format!("not a grayscale PGM (magic '{other}')"),
            ))
        }
    };
    let width = h.number("width")? as usize;
    let height = h.number("height")? as usize;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::parse(h.line(), "PGM dimensions must be positive"));
    }
    if !(1..=65535).contains(&maxval) {
        return Err(Error::parse(
            h.line(),
            format!("maxval {maxval} outside 1..=65535"),
        ));
    }
    let n = width * height;
    let scale = 1.0 / maxval as f64;
    let mut data = Vec::with_capacity(n);
    match format {
        PgmFormat::Ascii => {
            for _ in 0..n {
                let v = h.number("sample")?;
                if v > maxval {
                    return Err(Error::parse(
                        h.line(),
                        format!("sample {v} exceeds maxval {maxval}"),
                    ));
                }
                data.push(v as f64 * scale);
            }
        }
        PgmFormat::Binary => {
            // Exactly one whitespace byte separates maxval from the raster.
            if h.pos >= bytes.len() || !bytes[h.pos].is_ascii_whitespace() {
                return Err(Error::parse(h.line(), "missing whitespace after maxval"));
            }
            let raster = &bytes[h.pos + 1..];
            let depth = if maxval > 255 { 2 } else { 1 };
            if raster.len() < n * depth {
                return Err(Error::parse(
                    h.line(),
                    format!(
                        "raster holds {} bytes, expected {}",
                        raster.len(),
                        n * depth
                    ),
                ));
            }
            for k in 0..n {
                let v = if depth == 2 {
                    u16::from_be_bytes([raster[2 * k], raster[2 * k + 1]]) as u32
                } else {
                    raster[k] as u32
                };
                if v > maxval {
                    return Err(Error::Domain(format!("sample {v} exceeds maxval {maxval}")));
                }
                data.push(v as f64 * scale);
            }
        }
    }
    Image::new(width, height, data)
}

/// Encodes intensities clamped to `[0, 1]` and rounded to `maxval` levels
/// (255 or 65535). Masks are not stored.
pub fn encode_pgm(img: &Image, format: PgmFormat, sixteen_bit: bool) -> Vec<u8> {
    let maxval: u32 = if sixteen_bit { 65535 } else { 255 };
    let quant = |v: f64| (v.clamp(0.0, 1.0) * maxval as f64).round() as u32;
    let mut out = match format {
        PgmFormat::Ascii => {
            format!("P2\n{} {}\n{maxval}\n", img.width(), img.height()).into_bytes()
        }
        PgmFormat::Binary => {
            format!("P5\n{} {}\n{maxval}\n", img.width(), img.height()).into_bytes()
        }
    };
    match format {
        PgmFormat::Ascii => {
            for row in img.data().chunks(img.width()) {
                let line: Vec<String> = row.iter().map(|&v| quant(v).to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        PgmFormat::Binary => {
            for &v in img.data() {
                let q = quant(v);
                if sixteen_bit {
                    out.extend_from_slice(&(q as u16).to_be_bytes());
                } else {
                    out.push(q as u8);
                }
            }
        }
    }
    out
}

pub fn read_pgm(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path)?;
    parse_pgm(&bytes).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

pub fn write_pgm(path: &Path, img: &Image, format: PgmFormat, sixteen_bit: bool) -> Result<()> {
    write_atomic(path, &encode_pgm(img, format, sixteen_bit))
}

/// Validity mask as a black/white 8-bit image (white = valid).
pub fn mask_image(img: &Image) -> Option<Image> {
    let mask = img.mask()?;
    Image::new(
        img.width(),
        img.height(),
        mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect(),
    )
    .ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_hand_written_files() {
        let p2 = b"P2\n# comment\n3 2\n# another\n4\n0 1 2\n3 4 0\n";
        let img = parse_pgm(p2).unwrap();
        assert_eq!((img.width(), img.height()), (3, 2));
        assert_eq!(img.data(), &[0.0, 0.25, 0.5, 0.75, 1.0, 0.0]);

        // P5 with a raster byte that looks like whitespace right after maxval.
        let mut p5 = b"P5 2 1 255\n".to_vec();
        p5.extend_from_slice(&[b'\n', 255]);
        let img = parse_pgm(&p5).unwrap();
        assert_eq!(img.data(), &[10.0 / 255.0, 1.0]);

        let mut p5_16 = b"P5\n1 1\n65535\n".to_vec();
        p5_16.extend_from_slice(&[0x80, 0x00]);
        assert_eq!(parse_pgm(&p5_16).unwrap().data(), &[32768.0 / 65535.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_pgm(b"P6\n1 1\n255\n\0\0\0").is_err());
        assert!(parse_pgm(b"P2\n2 1\n3\n1 9\n").is_err());
        assert!(parse_pgm(b"P5\n2 2\n255\n\x01\x02").is_err());
        assert!(parse_pgm(b"P2\n0 1\n255\n").is_err());
        match parse_pgm(b"P2\n1 1\n255\nzz\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn round_trip_within_quantisation(w in 1usize..9, h in 1usize..9, vals in prop::collection::vec(0.0f64..=1.0, 64), binary in any::<bool>(), sixteen in any::<bool>()) {
            let img = Image::new(w, h, vals[..w * h].to_vec()).unwrap();
            let fmt = if binary { PgmFormat::Binary } else { PgmFormat::Ascii };
            let back = parse_pgm(&encode_pgm(&img, fmt, sixteen)).unwrap();
            let maxval = if sixteen { 65535.0 } else { 255.0 };
            for (a, b) in img.data().iter().zip(back.data()) {
                prop_assert!((a - b).abs() <= 0.5 / maxval + 1e-15);
            }
        }
    }
}
