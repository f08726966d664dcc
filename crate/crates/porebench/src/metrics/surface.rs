//! Interfacial surface area and its orientation histogram.

use crate::geometry::PoreImage;

use super::MetricsError;

/// Compass bin order: E, NE, N, NW, W, SW, S, SE (counterclockwise from
/// +x, with North toward row 0).
pub const DIRECTION_NAMES: [&str; 8] = ["E", "NE", "N", "NW", "W", "SW", "S", "SE"];

/// Surface totals and the direction histogram of boundary-adjacent void
/// pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMetrics {
    /// Interface length per unit cell area.
    pub specific_surface: f64,
    /// Fraction of boundary-adjacent void pixels facing each compass
    /// direction, ordered as [`DIRECTION_NAMES`]. Pixels whose face
    /// normals cancel sit in no bin but still count in the denominator.
    pub directionality: [f64; 8],
    /// Population standard deviation over the 8 bins.
    pub directionality_std: f64,
    /// Count of void pixels with at least one solid 4-neighbor.
    pub boundary_pixels: usize,
    /// Exact decomposition of the raw interface length in pixel lengths:
    /// `unit_lengths + diagonal_lengths * sqrt(2)`.
    pub unit_lengths: usize,
    pub diagonal_lengths: usize,
}

impl SurfaceMetrics {
    /// Raw interface length in physical units.
    pub fn raw_surface_length(&self, pixel_length: f64) -> f64 {
        (self.unit_lengths as f64 + self.diagonal_lengths as f64 * std::f64::consts::SQRT_2)
            * pixel_length
    }
}

/// Measures the void-solid interface with a per-pixel stencil.
///
/// Each void pixel is charged by its solid 4-neighbor count: one face adds
/// one pixel length along the face normal; two adjacent faces add one
/// diagonal length along the bisector; two opposite faces add two pixel
/// lengths with no net direction; three faces add one diagonal length
/// (two half-diagonals) along the surviving normal; four faces add four
/// pixel lengths with no net direction. Face normals point from solid
/// into void. The length total is divided by the cell area; the direction
/// histogram is divided by the boundary-adjacent pixel count.
pub fn surface_metrics(image: &PoreImage) -> Result<SurfaceMetrics, MetricsError> {
    if image.void_count() == 0 {
        return Err(MetricsError::NoVoidSpace);
    }
    let (w, h) = (image.width(), image.height());
    let mut unit_lengths = 0usize;
    let mut diagonal_lengths = 0usize;
    let mut boundary_pixels = 0usize;
    let mut bin_counts = [0usize; 8];

    for y in 0..h {
        for x in 0..w {
            if !image.is_void(x, y) {
                continue;
            }
            // Solid flags in screen offsets; the compass normal of each
            // face points from the solid neighbor into this pixel.
            let solid_e = solid_at(image, x as i64 + 1, y as i64);
            let solid_w = solid_at(image, x as i64 - 1, y as i64);
            let solid_n = solid_at(image, x as i64, y as i64 - 1);
            let solid_s = solid_at(image, x as i64, y as i64 + 1);
            let count =
                usize::from(solid_e) + usize::from(solid_w) + usize::from(solid_n) + usize::from(solid_s);
            if count == 0 {
                continue;
            }
            boundary_pixels += 1;
            match count {
                1 => unit_lengths += 1,
                2 if (solid_e && solid_w) || (solid_n && solid_s) => unit_lengths += 2,
                2 | 3 => diagonal_lengths += 1,
                _ => unit_lengths += 4,
            }
            // Net normal in compass components (cy positive toward North).
            let cx = i32::from(solid_w) - i32::from(solid_e);
            let cy = i32::from(solid_s) - i32::from(solid_n);
            if let Some(bin) = compass_bin(cx, cy) {
                bin_counts[bin] += 1;
            }
        }
    }

    let area = (w * h) as f64 * image.pixel_length * image.pixel_length;
    let raw = (unit_lengths as f64 + diagonal_lengths as f64 * std::f64::consts::SQRT_2)
        * image.pixel_length;
    let mut directionality = [0.0; 8];
    if boundary_pixels > 0 {
        for (d, &c) in directionality.iter_mut().zip(&bin_counts) {
            *d = c as f64 / boundary_pixels as f64;
        }
    }
    let mean = directionality.iter().sum::<f64>() / 8.0;
    let var = directionality
        .iter()
        .map(|d| (d - mean) * (d - mean))
        .sum::<f64>()
        / 8.0;

    Ok(SurfaceMetrics {
        specific_surface: raw / area,
        directionality,
        directionality_std: var.sqrt(),
        boundary_pixels,
        unit_lengths,
        diagonal_lengths,
    })
}

fn solid_at(image: &PoreImage, x: i64, y: i64) -> bool {
    let (w, h) = (image.width() as i64, image.height() as i64);
    let x = if x < 0 || x >= w {
        // A 1-wide periodic axis wraps a pixel onto itself, which is void
        // by construction here, so skipping it is equivalent.
        if !image.periodic_x || w == 1 {
            return false;
        }
        x.rem_euclid(w)
    } else {
        x
    };
    let y = if y < 0 || y >= h {
        if !image.periodic_y || h == 1 {
            return false;
        }
        y.rem_euclid(h)
    } else {
        y
    };
    !image.is_void(x as usize, y as usize)
}

fn compass_bin(cx: i32, cy: i32) -> Option<usize> {
    match (cx.signum(), cy.signum()) {
        (1, 0) => Some(0),
        (1, 1) => Some(1),
        (0, 1) => Some(2),
        (-1, 1) => Some(3),
        (-1, 0) => Some(4),
        (-1, -1) => Some(5),
        (0, -1) => Some(6),
        (1, -1) => Some(7),
        _ => None,
    }
}
