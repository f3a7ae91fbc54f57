//! Binary and text file formats.
//!
//! * `CTSG v1` sinogram: magic `CTSG`, u32 version, i64 M, i64 N_φ, f64 h,
//!   f64 R, then `(2M+1)·N_φ` f64 values, angle-major. All little-endian.
//! * `CTIM v1` image: magic `CTIM`, u32 version, i64 n, f64 R, then `n²`
//!   f64 values, row-major. All little-endian.
//! * 16-bit binary PGM (`P5`, maxval 65535, big-endian samples as the PGM
//!   format requires) with a sidecar text file holding the display window.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CtError, Result};
use crate::geometry::{ParallelGeometry, Sinogram};
use crate::image::Image;

const SINOGRAM_MAGIC: &[u8; 4] = b"CTSG";
const IMAGE_MAGIC: &[u8; 4] = b"CTIM";
const FORMAT_VERSION: u32 = 1;

pub fn encode_sinogram(sinogram: &Sinogram) -> Vec<u8> {
    let g = sinogram.geometry();
    let mut out = Vec::with_capacity(40 + 8 * sinogram.values().len());
    out.extend_from_slice(SINOGRAM_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.half_count() as i64).to_le_bytes());
    out.extend_from_slice(&(g.n_angles() as i64).to_le_bytes());
    out.extend_from_slice(&g.step().to_le_bytes());
    out.extend_from_slice(&g.radius().to_le_bytes());
    for v in sinogram.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a `CTSG v1` buffer. The bandwidth is not stored and is restored
/// as `π/h`.
pub fn decode_sinogram(bytes: &[u8], origin: &Path) -> Result<Sinogram> {
    let fail = |msg: String| CtError::Format {
        path: origin.to_path_buf(),
        msg,
    };
    let mut r = Reader::new(bytes);
    let magic = r.take(4).ok_or_else(|| fail("truncated header".into()))?;
    if magic != SINOGRAM_MAGIC {
        return Err(fail(format!("bad magic {magic:?}, expected \"CTSG\"")));
    }
    let version = r.u32().ok_or_else(|| fail("truncated header".into()))?;
    if version != FORMAT_VERSION {
        return Err(fail(format!("unsupported version {version}")));
    }
    let (m, n_angles, h, radius) = match (r.i64(), r.i64(), r.f64(), r.f64()) {
        (Some(m), Some(n), Some(h), Some(rad)) => (m, n, h, rad),
        _ => return Err(fail("truncated header".into())),
    };
    if m < 1 || n_angles < 1 {
        return Err(fail(format!("invalid dimensions M = {m}, N_φ = {n_angles}")));
    }
    let geometry = ParallelGeometry::new(
        n_angles as usize,
        m as usize,
        h,
        radius,
        std::f64::consts::PI / h,
    )
    .map_err(|e| fail(e.to_string()))?;
    let count = geometry.n_radial() * geometry.n_angles();
    let values = r
        .f64_vec(count)
        .ok_or_else(|| fail(format!("expected {count} values, file is truncated")))?;
    if !r.is_empty() {
        return Err(fail("trailing bytes after sinogram data".into()));
    }
    Sinogram::from_values(geometry, values).map_err(|e| fail(e.to_string()))
}

pub fn write_sinogram(sinogram: &Sinogram, path: &Path) -> Result<()> {
    fs::write(path, encode_sinogram(sinogram)).map_err(|e| CtError::io(path, e))
}

pub fn read_sinogram(path: &Path) -> Result<Sinogram> {
    let bytes = fs::read(path).map_err(|e| CtError::io(path, e))?;
    decode_sinogram(&bytes, path)
}

pub fn encode_image(image: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 8 * image.values().len());
    out.extend_from_slice(IMAGE_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(image.n_pixels() as i64).to_le_bytes());
    out.extend_from_slice(&image.radius().to_le_bytes());
    for v in image.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_image(bytes: &[u8], origin: &Path) -> Result<Image> {
    let fail = |msg: String| CtError::Format {
        path: origin.to_path_buf(),
        msg,
    };
    let mut r = Reader::new(bytes);
    let magic = r.take(4).ok_or_else(|| fail("truncated header".into()))?;
    if magic != IMAGE_MAGIC {
        return Err(fail(format!("bad magic {magic:?}, expected \"CTIM\"")));
    }
    let version = r.u32().ok_or_else(|| fail("truncated header".into()))?;
    if version != FORMAT_VERSION {
        return Err(fail(format!("unsupported version {version}")));
    }
    let (n, radius) = match (r.i64(), r.f64()) {
        (Some(n), Some(rad)) => (n, rad),
        _ => return Err(fail("truncated header".into())),
    };
    if n < 1 {
        return Err(fail(format!("invalid pixel count {n}")));
    }
    let n = n as usize;
    let values = r
        .f64_vec(n * n)
        .ok_or_else(|| fail(format!("expected {} values, file is truncated", n * n)))?;
    if !r.is_empty() {
        return Err(fail("trailing bytes after image data".into()));
    }
    Image::from_values(n, radius, values)
}

pub fn write_image(image: &Image, path: &Path) -> Result<()> {
    fs::write(path, encode_image(image)).map_err(|e| CtError::io(path, e))
}

pub fn read_image(path: &Path) -> Result<Image> {
    let bytes = fs::read(path).map_err(|e| CtError::io(path, e))?;
    decode_image(&bytes, path)
}

/// Renders `image` as 16-bit PGM with the affine window `[lo, hi] → [0, 65535]`.
pub fn encode_pgm(image: &Image, lo: f64, hi: f64) -> Vec<u8> {
    let n = image.n_pixels();
    let mut out = format!("P5\n{n} {n}\n65535\n").into_bytes();
    let span = hi - lo;
    for &v in image.values() {
        let t = if span > 0.0 { (v - lo) / span } else { 0.0 };
        let q = (t.clamp(0.0, 1.0) * 65535.0).round() as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

/// Path of the window sidecar for a PGM file: `<file>.txt`.
pub fn pgm_sidecar_path(pgm: &Path) -> PathBuf {
    let mut s = pgm.as_os_str().to_owned();
    s.push(".txt");
    PathBuf::from(s)
}

/// Writes the PGM with window `[min, max]` of the image and its sidecar.
pub fn write_pgm(image: &Image, path: &Path) -> Result<()> {
    let (lo, hi) = image.min_max();
    fs::write(path, encode_pgm(image, lo, hi)).map_err(|e| CtError::io(path, e))?;
    let sidecar = pgm_sidecar_path(path);
    let mut f = fs::File::create(&sidecar).map_err(|e| CtError::io(&sidecar, e))?;
    write!(
        f,
        "window_min = {lo:.16e}\nwindow_max = {hi:.16e}\nmaxval = 65535\n"
    )
    .map_err(|e| CtError::io(&sidecar, e))
}

/// Writes `<prefix>.ctim`, `<prefix>.pgm` and `<prefix>.pgm.txt`.
pub fn write_image_bundle(image: &Image, prefix: &Path) -> Result<(PathBuf, PathBuf)> {
    let ctim = with_suffix(prefix, "ctim");
    let pgm = with_suffix(prefix, "pgm");
    write_image(image, &ctim)?;
    write_pgm(image, &pgm)?;
    Ok((ctim, pgm))
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf }
    }

    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        if self.buf.len() < n {
            return None;
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Some(head)
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn i64(&mut self) -> Option<i64> {
        self.take(8).map(|b| i64::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64(&mut self) -> Option<f64> {
        self.take(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64_vec(&mut self, n: usize) -> Option<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8)?)?;
        Some(
            bytes
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect(),
        )
    }

    fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }
}
