//! Scalar fields sampled on the image grid, with a flat binary format.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::geometry::{write_pgm, GeometryError, PoreImage};

/// File magic of the field format.
const MAGIC: &[u8; 4] = b"PSF1";
/// Magic, u32 width, u32 height, four reserved zero bytes.
const HEADER_LEN: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum FieldError {
    #[error("field holds {got} values for a {expected}-pixel mask")]
    ValueCountMismatch { expected: usize, got: usize },
    #[error("field is {field:?} but the mask is {mask:?}")]
    ShapeMismatch {
        field: (usize, usize),
        mask: (usize, usize),
    },
    #[error("not a field file (magic {0:?})")]
    UnsupportedMagic(String),
    #[error("malformed field header: {0}")]
    MalformedHeader(String),
    #[error("field payload ends early: {0}")]
    TruncatedPayload(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One f64 value per grid pixel, carrying the pore mask the values live
/// on. Solid-pixel values are stored but carry no physical meaning; the
/// averaging operators ignore them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
    mask: PoreImage,
}

impl ScalarField {
    pub fn new(values: Vec<f64>, mask: PoreImage) -> Result<Self, FieldError> {
        let expected = mask.width() * mask.height();
        if values.len() != expected {
            return Err(FieldError::ValueCountMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self { values, mask })
    }

    pub fn constant(mask: PoreImage, value: f64) -> Self {
        let n = mask.width() * mask.height();
        Self {
            values: vec![value; n],
            mask,
        }
    }

    /// Builds a field by evaluating `f` at every pixel center, in
    /// physical coordinates.
    pub fn from_fn(mask: PoreImage, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let (w, h) = (mask.width(), mask.height());
        let mut values = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let px = (x as f64 + 0.5) * mask.pixel_length;
                let py = (y as f64 + 0.5) * mask.pixel_length;
                values.push(f(px, py));
            }
        }
        Self { values, mask }
    }

    pub fn width(&self) -> usize {
        self.mask.width()
    }

    pub fn height(&self) -> usize {
        self.mask.height()
    }

    pub fn mask(&self) -> &PoreImage {
        &self.mask
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[self.mask.index(x, y)]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        let i = self.mask.index(x, y);
        self.values[i] = value;
    }

    /// Writes the values as a flat little-endian file:
    /// `"PSF1"`, u32 width, u32 height, four zero bytes, then row-major
    /// f64 values. The mask is not stored; pair the file with its raster.
    pub fn write_psf1<P: AsRef<Path>>(&self, path: P) -> Result<(), FieldError> {
        write_psf1(path, self.width(), self.height(), &self.values)
    }

    /// Reads a field file and attaches `mask`, which must have the same
    /// dimensions.
    pub fn read_psf1<P: AsRef<Path>>(path: P, mask: PoreImage) -> Result<Self, FieldError> {
        let (w, h, values) = read_psf1(path)?;
        if (w, h) != (mask.width(), mask.height()) {
            return Err(FieldError::ShapeMismatch {
                field: (w, h),
                mask: (mask.width(), mask.height()),
            });
        }
        Ok(Self { values, mask })
    }

    /// Renders an 8-bit preview, darkest at the minimum finite value.
    /// Non-finite values render black.
    pub fn write_pgm_preview<P: AsRef<Path>>(&self, path: P) -> Result<(), GeometryError> {
        let finite = self.values.iter().copied().filter(|v| v.is_finite());
        let lo = finite.clone().fold(f64::INFINITY, f64::min);
        let hi = finite.fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        let pixels: Vec<u8> = self
            .values
            .iter()
            .map(|&v| {
                if !v.is_finite() {
                    0
                } else if span > 0.0 {
                    ((v - lo) / span * 255.0).round() as u8
                } else {
                    128
                }
            })
            .collect();
        write_pgm(path, self.width(), self.height(), &pixels)
    }
}

pub fn write_psf1<P: AsRef<Path>>(
    path: P,
    width: usize,
    height: usize,
    values: &[f64],
) -> Result<(), FieldError> {
    if values.len() != width * height {
        return Err(FieldError::ValueCountMismatch {
            expected: width * height,
            got: values.len(),
        });
    }
    let w32 = u32::try_from(width)
        .map_err(|_| FieldError::MalformedHeader(format!("width {width} exceeds u32")))?;
    let h32 = u32::try_from(height)
        .map_err(|_| FieldError::MalformedHeader(format!("height {height} exceeds u32")))?;
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&w32.to_le_bytes())?;
    out.write_all(&h32.to_le_bytes())?;
    out.write_all(&[0u8; 4])?;
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_psf1<P: AsRef<Path>>(path: P) -> Result<(usize, usize, Vec<f64>), FieldError> {
    parse_psf1(&fs::read(path)?)
}

pub fn parse_psf1(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>), FieldError> {
    if bytes.len() < HEADER_LEN {
        return Err(FieldError::MalformedHeader(format!(
            "{} bytes is shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(FieldError::UnsupportedMagic(
            String::from_utf8_lossy(&bytes[..4]).into_owned(),
        ));
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if bytes[12..16] != [0u8; 4] {
        return Err(FieldError::MalformedHeader(
            "reserved header bytes are not zero".into(),
        ));
    }
    let count = width.checked_mul(height).ok_or_else(|| {
        FieldError::MalformedHeader(format!("{width}x{height} overflows the pixel count"))
    })?;
    let payload = &bytes[HEADER_LEN..];
    let expected = count * 8;
    if payload.len() < expected {
        return Err(FieldError::TruncatedPayload(format!(
            "need {expected} payload bytes for {width}x{height}, found {}",
            payload.len()
        )));
    }
    if payload.len() > expected {
        return Err(FieldError::MalformedHeader(format!(
            "{} trailing bytes after the payload",
            payload.len() - expected
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((width, height, values))
}
