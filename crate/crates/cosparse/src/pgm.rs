//! Binary (P5) greyscale images for quick visual inspection.

use std::fs;
use std::path::Path;

use cosparse_core::ScalarField;

use crate::error::{Error, Result};

/// Reads a P5 image, scaling samples to `[0, 1]`.
pub fn read_pgm(path: &Path) -> Result<ScalarField> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

fn decode(bytes: &[u8], path: &Path) -> Result<ScalarField> {
    let bad = |reason| Error::BadHeader {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(bad("expected P5 magic"));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for f in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|c| c.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(bad("expected a decimal number"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *f = text.parse().map_err(|_| bad("number out of range"))?;
    }
    if !bytes.get(pos).is_some_and(|c| c.is_ascii_whitespace()) {
        return Err(bad("missing whitespace after maxval"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::UnsupportedMaxVal {
            path: path.to_path_buf(),
            maxval,
        });
    }
    let (w, h) = (width as usize, height as usize);
    let depth = if maxval > 255 { 2 } else { 1 };
    let body = &bytes[pos..];
    if body.len() != w * h * depth {
        return Err(bad("pixel data length does not match the header"));
    }
    let scale = maxval as f64;
    let values = if depth == 1 {
        body.iter().map(|&v| v as f64 / scale).collect()
    } else {
        body.chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / scale)
            .collect()
    };
    ScalarField::new(w, h, values).map_err(|_| bad("empty image"))
}

/// Writes `field` clamped to `[0, 1]` and quantized to `max_val` levels.
pub fn write_pgm(path: &Path, field: &ScalarField, max_val: u16) -> Result<()> {
    fs::write(path, encode(field, max_val, path)?).map_err(|e| Error::io(path, e))
}

fn encode(field: &ScalarField, max_val: u16, path: &Path) -> Result<Vec<u8>> {
    if max_val == 0 {
        return Err(Error::UnsupportedMaxVal {
            path: path.to_path_buf(),
            maxval: 0,
        });
    }
    let mut out = format!("P5\n{} {}\n{}\n", field.width(), field.height(), max_val).into_bytes();
    let scale = max_val as f64;
    for &v in field.values() {
        let q = (v.clamp(0.0, 1.0) * scale).round() as u16;
        if max_val > 255 {
            out.extend_from_slice(&q.to_be_bytes());
        } else {
            out.push(q as u8);
        }
    }
    Ok(out)
}

/// Linearly maps `[lo, hi]` onto `[0, 1]` for display.
pub fn normalize_for_display(field: &ScalarField, lo: f64, hi: f64) -> ScalarField {
    let span = if hi > lo { hi - lo } else { 1.0 };
    let values = field.values().iter().map(|v| (v - lo) / span).collect();
    ScalarField::new(field.width(), field.height(), values).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn here() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn single_pixels() {
        let full = decode(b"P5\n1 1\n255\n\xff", here()).unwrap();
        assert_eq!(full.values(), &[1.0]);
        let zero = decode(b"P5 1 1 255 \x00", here()).unwrap();
        assert_eq!(zero.values(), &[0.0]);
    }

    #[test]
    fn comments_and_wide_samples() {
        let img = decode(b"P5\n# made by hand\n2 1\n# max\n1000\n\x03\xe8\x01\xf4", here()).unwrap();
        assert_eq!(img.values(), &[1.0, 0.5]);
    }

    #[test]
    fn malformed_headers() {
        assert!(matches!(decode(b"P2\n1 1\n255\n\x00", here()), Err(Error::BadHeader { .. })));
        assert!(matches!(decode(b"P5\n1 1\n255\n", here()), Err(Error::BadHeader { .. })));
        assert!(matches!(
            decode(b"P5\n1 1\n70000\n\x00\x00", here()),
            Err(Error::UnsupportedMaxVal { maxval: 70000, .. })
        ));
        assert!(matches!(decode(b"P5\nx 1\n255\n\x00", here()), Err(Error::BadHeader { .. })));
    }
}
