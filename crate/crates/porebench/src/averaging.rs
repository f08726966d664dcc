//! Volume-averaging operators over the pore space.
//!
//! All operators weight by the mask: an intrinsic average divides the
//! void-pixel sum by the void count inside the window, a superficial
//! average divides the same sum by the full window size, so superficial
//! equals intrinsic times the window porosity.

use crate::field::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Void sum over void count.
    Intrinsic,
    /// Void sum over window size.
    Superficial,
}

/// Support of the averaging window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// One window spanning the whole cell.
    Full,
    /// `nx` by `ny` equal rectangular blocks; both counts must divide the
    /// image dimensions.
    Subgrids { nx: usize, ny: usize },
    /// An odd-sized moving window centered on every pixel, wrapping
    /// across periodic boundaries and shrinking at flat ones.
    Convolutional { width: usize, height: usize },
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AveragingError {
    #[error("{nx}x{ny} subgrids do not divide a {width}x{height} image")]
    NonDividingSubgrid {
        nx: usize,
        ny: usize,
        width: usize,
        height: usize,
    },
    #[error("moving window must have odd dimensions (got {width}x{height})")]
    EvenFilter { width: usize, height: usize },
    #[error("{width}x{height} window exceeds the {image_width}x{image_height} image")]
    FilterTooLarge {
        width: usize,
        height: usize,
        image_width: usize,
        image_height: usize,
    },
    #[error("averaging window at block ({x}, {y}) contains no void pixels")]
    EmptyWindow { x: usize, y: usize },
    #[error("fields live on different masks")]
    MaskMismatch,
}

/// Averages `field` under `scheme`, returning the averaged field sampled
/// back onto the full grid (constant per block for the block schemes).
///
/// An all-solid window has no intrinsic average: the block schemes fail
/// with [`AveragingError::EmptyWindow`] while the moving window yields
/// NaN there, since solid-dominated pixels are expected deep inside
/// inclusions. Superficial averages of empty windows are zero.
pub fn average(
    field: &ScalarField,
    scheme: Scheme,
    weighting: Weighting,
) -> Result<ScalarField, AveragingError> {
    let mask = field.mask();
    let (w, h) = (mask.width(), mask.height());
    match scheme {
        Scheme::Full => {
            let mean = block_mean(field, 0, 0, w, h, weighting)
                .ok_or(AveragingError::EmptyWindow { x: 0, y: 0 })?;
            Ok(ScalarField::constant(mask.clone(), mean))
        }
        Scheme::Subgrids { nx, ny } => {
            if nx == 0 || ny == 0 || w % nx != 0 || h % ny != 0 {
                return Err(AveragingError::NonDividingSubgrid {
                    nx,
                    ny,
                    width: w,
                    height: h,
                });
            }
            let (bw, bh) = (w / nx, h / ny);
            let mut out = ScalarField::constant(mask.clone(), 0.0);
            for by in 0..ny {
                for bx in 0..nx {
                    let mean = block_mean(field, bx * bw, by * bh, bw, bh, weighting)
                        .ok_or(AveragingError::EmptyWindow { x: bx, y: by })?;
                    for y in by * bh..(by + 1) * bh {
                        for x in bx * bw..(bx + 1) * bw {
                            out.set(x, y, mean);
                        }
                    }
                }
            }
            Ok(out)
        }
        Scheme::Convolutional { width, height } => {
            if width % 2 == 0 || height % 2 == 0 {
                return Err(AveragingError::EvenFilter { width, height });
            }
            if width > w || height > h {
                return Err(AveragingError::FilterTooLarge {
                    width,
                    height,
                    image_width: w,
                    image_height: h,
                });
            }
            let mut out = ScalarField::constant(mask.clone(), 0.0);
            let (rw, rh) = (width as i64 / 2, height as i64 / 2);
            for y in 0..h {
                for x in 0..w {
                    out.set(x, y, window_mean(field, x, y, rw, rh, weighting));
                }
            }
            Ok(out)
        }
    }
}

/// Splits `field` into its average and the pointwise remainder. The
/// variation is zero on solid pixels.
pub fn decompose(
    field: &ScalarField,
    scheme: Scheme,
    weighting: Weighting,
) -> Result<(ScalarField, ScalarField), AveragingError> {
    let averaged = average(field, scheme, weighting)?;
    let mask = field.mask();
    let mut variation = ScalarField::constant(mask.clone(), 0.0);
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.is_void(x, y) {
                variation.set(x, y, field.get(x, y) - averaged.get(x, y));
            }
        }
    }
    Ok((averaged, variation))
}

/// Pointwise product of two variations on the same mask, zero on solid.
pub fn variation_product(
    a: &ScalarField,
    b: &ScalarField,
) -> Result<ScalarField, AveragingError> {
    if a.mask() != b.mask() {
        return Err(AveragingError::MaskMismatch);
    }
    let mask = a.mask();
    let mut out = ScalarField::constant(mask.clone(), 0.0);
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.is_void(x, y) {
                out.set(x, y, a.get(x, y) * b.get(x, y));
            }
        }
    }
    Ok(out)
}

/// Mean over an axis-aligned block. `None` marks an intrinsic mean with
/// no void support.
fn block_mean(
    field: &ScalarField,
    x0: usize,
    y0: usize,
    bw: usize,
    bh: usize,
    weighting: Weighting,
) -> Option<f64> {
    let mask = field.mask();
    let mut sum = 0.0;
    let mut voids = 0usize;
    for y in y0..y0 + bh {
        for x in x0..x0 + bw {
            if mask.is_void(x, y) {
                sum += field.get(x, y);
                voids += 1;
            }
        }
    }
    match weighting {
        Weighting::Intrinsic if voids == 0 => None,
        Weighting::Intrinsic => Some(sum / voids as f64),
        Weighting::Superficial => Some(sum / (bw * bh) as f64),
    }
}

/// Mean over the moving window centered at `(cx, cy)`.
///
/// Offsets are visited in a fixed window-relative order, so on a fully
/// periodic mask a translation of the input translates the output
/// bit-exactly.
fn window_mean(
    field: &ScalarField,
    cx: usize,
    cy: usize,
    rw: i64,
    rh: i64,
    weighting: Weighting,
) -> f64 {
    let mask = field.mask();
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut sum = 0.0;
    let mut voids = 0usize;
    let mut window = 0usize;
    for dy in -rh..=rh {
        let y = cy as i64 + dy;
        let y = if (0..h).contains(&y) {
            y
        } else if mask.periodic_y {
            y.rem_euclid(h)
        } else {
            continue;
        };
        for dx in -rw..=rw {
            let x = cx as i64 + dx;
            let x = if (0..w).contains(&x) {
                x
            } else if mask.periodic_x {
                x.rem_euclid(w)
            } else {
                continue;
            };
            window += 1;
            if mask.is_void(x as usize, y as usize) {
                sum += field.get(x as usize, y as usize);
                voids += 1;
            }
        }
    }
    match weighting {
        Weighting::Intrinsic if voids == 0 => f64::NAN,
        Weighting::Intrinsic => sum / voids as f64,
        Weighting::Superficial => sum / window as f64,
    }
}
