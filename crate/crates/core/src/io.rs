//! Shared file formats: complex-array binary, 16-bit PGM, small CSV helpers.
//!
//! Binary layout: 8-byte magic `MRRECON1`, then little-endian u32 ndim,
//! u32 dims[ndim], u32 dtype code (0 = interleaved pairs of f64), then the
//! row-major (re, im) payload.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::image::{ComplexImage, KSpaceSamples};

const MAGIC: &[u8; 8] = b"MRRECON1";
const DTYPE_COMPLEX_F64: u32 = 0;

fn write_header(w: &mut impl Write, dims: &[u32]) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(dims.len() as u32).to_le_bytes())?;
    for d in dims {
        w.write_all(&d.to_le_bytes())?;
    }
    w.write_all(&DTYPE_COMPLEX_F64.to_le_bytes())
}

fn write_payload(
    w: &mut impl Write,
    values: impl Iterator<Item = Complex64>,
) -> std::io::Result<()> {
    for z in values {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_header(path: &Path, r: &mut impl Read) -> Result<Vec<usize>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
    if &magic != MAGIC {
        return Err(Error::BadFormat {
            path: path.into(),
            msg: "bad magic, not a complex-array file".into(),
        });
    }
    let ndim = read_u32(r).map_err(|e| Error::io(path, e))? as usize;
    if ndim == 0 || ndim > 4 {
        return Err(Error::BadFormat {
            path: path.into(),
            msg: format!("unsupported ndim {ndim}"),
        });
    }
    let mut dims = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        dims.push(read_u32(r).map_err(|e| Error::io(path, e))? as usize);
    }
    let dtype = read_u32(r).map_err(|e| Error::io(path, e))?;
    if dtype != DTYPE_COMPLEX_F64 {
        return Err(Error::BadFormat {
            path: path.into(),
            msg: format!("unsupported dtype code {dtype}"),
        });
    }
    Ok(dims)
}

fn read_payload(path: &Path, r: &mut impl Read, count: usize) -> Result<Vec<Complex64>> {
    let mut bytes = vec![0u8; count * 16];
    r.read_exact(&mut bytes).map_err(|e| Error::io(path, e))?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(|e| Error::io(path, e))? != 0 {
        return Err(Error::BadFormat {
            path: path.into(),
            msg: "trailing bytes after payload".into(),
        });
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Ok(values)
}

pub fn write_samples(path: &Path, samples: &KSpaceSamples) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_header(&mut w, &[samples.len() as u32]).map_err(|e| Error::io(path, e))?;
    write_payload(&mut w, samples.values().iter().copied()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_samples(path: &Path) -> Result<KSpaceSamples> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let dims = read_header(path, &mut r)?;
    if dims.len() != 1 {
        return Err(Error::BadFormat {
            path: path.into(),
            msg: format!("expected 1-D sample file, got {}-D", dims.len()),
        });
    }
    let values = read_payload(path, &mut r, dims[0])?;
    KSpaceSamples::new(values)
}

pub fn write_complex_matrix(path: &Path, a: &Array2<Complex64>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let (rows, cols) = a.dim();
    write_header(&mut w, &[rows as u32, cols as u32]).map_err(|e| Error::io(path, e))?;
    write_payload(&mut w, a.iter().copied()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_complex_matrix(path: &Path) -> Result<Array2<Complex64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let dims = read_header(path, &mut r)?;
    if dims.len() != 2 {
        return Err(Error::BadFormat {
            path: path.into(),
            msg: format!("expected 2-D file, got {}-D", dims.len()),
        });
    }
    let values = read_payload(path, &mut r, dims[0] * dims[1])?;
    Array2::from_shape_vec((dims[0], dims[1]), values).map_err(|e| Error::BadFormat {
        path: path.into(),
        msg: e.to_string(),
    })
}

pub fn write_image(path: &Path, image: &ComplexImage) -> Result<()> {
    write_complex_matrix(path, image.as_array())
}

pub fn read_image(path: &Path) -> Result<ComplexImage> {
    ComplexImage::from_array(read_complex_matrix(path)?)
}

/// Writes a 16-bit grayscale PGM (P5, maxval 65535, big-endian samples).
pub fn write_pgm16(path: &Path, pixels: &Array2<u16>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let (rows, cols) = pixels.dim();
    write!(w, "P5\n{cols} {rows}\n65535\n").map_err(|e| Error::io(path, e))?;
    for p in pixels.iter() {
        w.write_all(&p.to_be_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads back a PGM written by [`write_pgm16`].
pub fn read_pgm16(path: &Path) -> Result<Array2<u16>> {
    let bad = |msg: &str| Error::BadFormat {
        path: path.into(),
        msg: msg.into(),
    };
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    // Header is three whitespace-separated tokens after "P5".
    let mut pos = 0usize;
    let mut tokens = Vec::new();
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        tokens.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ascii header"))?);
    }
    if tokens[0] != "P5" {
        return Err(bad("not a P5 PGM"));
    }
    let cols: usize = tokens[1].parse().map_err(|_| bad("bad width"))?;
    let rows: usize = tokens[2].parse().map_err(|_| bad("bad height"))?;
    if tokens[3] != "65535" {
        return Err(bad("expected maxval 65535"));
    }
    pos += 1; // single whitespace after maxval
    let payload = &bytes[pos..];
    if payload.len() != rows * cols * 2 {
        return Err(bad("payload size mismatch"));
    }
    let values: Vec<u16> = payload
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Array2::from_shape_vec((rows, cols), values).map_err(|_| bad("shape mismatch"))
}

/// Maps nonnegative values linearly onto [0, 65535] with 0 -> 0 and the
/// maximum -> 65535. An all-zero input maps to all zeros.
pub fn scale_to_u16(values: &Array2<f64>) -> Array2<u16> {
    let max = values.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Array2::zeros(values.dim());
    }
    values.mapv(|v| ((v.max(0.0) / max) * 65535.0).round() as u16)
}

/// Maps values in [lo, hi] linearly onto [0, 65535], clamping outliers.
pub fn scale_range_to_u16(values: &Array2<f64>, lo: f64, hi: f64) -> Array2<u16> {
    if hi <= lo {
        return Array2::zeros(values.dim());
    }
    let span = hi - lo;
    values.mapv(|v| (((v - lo) / span).clamp(0.0, 1.0) * 65535.0).round() as u16)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_wrong_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"NOTMINE!").unwrap();
        assert!(read_samples(&path).is_err());
    }

    #[test]
    fn rejects_truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.bin");
        let s = KSpaceSamples::new(vec![Complex64::new(1.0, 2.0); 4]).unwrap();
        write_samples(&path, &s).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(read_samples(&path).is_err());
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        let a = Array2::from_shape_fn((5, 7), |(i, j)| (i * 1000 + j * 37) as u16);
        write_pgm16(&path, &a).unwrap();
        assert_eq!(read_pgm16(&path).unwrap(), a);
    }

    proptest! {
        #[test]
        fn binary_round_trip_samples(values in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..64)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("s.bin");
            let s = KSpaceSamples::new(values.iter().map(|&(r, i)| Complex64::new(r, i)).collect()).unwrap();
            write_samples(&path, &s).unwrap();
            let back = read_samples(&path).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn binary_round_trip_image(n in 1usize..9, seed in 0u64..1000) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("i.bin");
            let a = Array2::from_shape_fn((n, n), |(i, j)| {
                let v = (seed as f64 + (i * n + j) as f64) * 0.37;
                Complex64::new(v.sin(), v.cos())
            });
            let img = ComplexImage::from_array(a).unwrap();
            write_image(&path, &img).unwrap();
            prop_assert_eq!(read_image(&path).unwrap(), img);
        }
    }
}
