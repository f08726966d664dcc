//! Channel networks carved along the boundaries of a periodic Voronoi
//! tessellation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GeneratorKind, GeneratorSpec, GeometryError, PoreImage};
use crate::edt;

/// Generates a periodic channel network: seed points induce a Voronoi
/// tessellation of the torus and a pixel is void iff its distance to the
/// nearest inter-cell boundary is at most `aperture`.
///
/// The tessellation is made periodic by replicating the seed set into the
/// 8 neighboring tiles before assigning pixels to cells.
pub fn generate_voronoi(
    spec: &GeneratorSpec,
    width: usize,
    height: usize,
) -> Result<PoreImage, GeometryError> {
    let GeneratorKind::Voronoi { seeds, aperture } = spec.kind else {
        return Err(GeometryError::KindMismatch { expected: "voronoi" });
    };
    if seeds < 2 {
        return Err(GeometryError::TooFewSeeds(seeds));
    }
    if !(aperture.is_finite() && aperture >= 1.0) {
        return Err(GeometryError::ApertureTooSmall(aperture));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let points: Vec<(f64, f64)> = (0..seeds)
        .map(|_| {
            (
                rng.gen::<f64>() * width as f64,
                rng.gen::<f64>() * height as f64,
            )
        })
        .collect();
    voronoi_from_seeds(&points, aperture, width, height)
}

fn voronoi_from_seeds(
    points: &[(f64, f64)],
    aperture: f64,
    width: usize,
    height: usize,
) -> Result<PoreImage, GeometryError> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Err(GeometryError::DegenerateSeeds);
            }
        }
    }

    // Seeds replicated into the 3x3 tile neighborhood; a replica keeps its
    // base cell id, so the label field wraps seamlessly.
    let mut replicas = Vec::with_capacity(points.len() * 9);
    for (id, &(sx, sy)) in points.iter().enumerate() {
        for ty in [-1.0, 0.0, 1.0] {
            for tx in [-1.0, 0.0, 1.0] {
                replicas.push((sx + tx * width as f64, sy + ty * height as f64, id));
            }
        }
    }

    let mut labels = vec![0usize; width * height];
    for y in 0..height {
        let py = y as f64 + 0.5;
        for x in 0..width {
            let px = x as f64 + 0.5;
            let mut best = (f64::INFINITY, usize::MAX);
            for &(sx, sy, id) in &replicas {
                let d2 = (px - sx) * (px - sx) + (py - sy) * (py - sy);
                // Ties resolve to the lowest cell id for determinism.
                if d2 < best.0 || (d2 == best.0 && id < best.1) {
                    best = (d2, id);
                }
            }
            labels[y * width + x] = best.1;
        }
    }

    // Boundary pixels: any wrapped 4-neighbor in a different cell.
    let probe = PoreImage::filled(width, height, true)?;
    let mut boundary = vec![false; width * height];
    for y in 0..height {
        for x in 0..width {
            let here = labels[y * width + x];
            if probe
                .neighbors4(x, y)
                .any(|(nx, ny)| labels[ny * width + nx] != here)
            {
                boundary[y * width + x] = true;
            }
        }
    }
    if !boundary.iter().any(|&b| b) {
        // All pixels fell into one cell: the seeds collapse at this
        // resolution.
        return Err(GeometryError::DegenerateSeeds);
    }

    let dist2 = edt::distance_squared_to_marks(&boundary, width, height, true, true);
    let cells = dist2.iter().map(|&d2| d2 <= aperture * aperture).collect();
    PoreImage::new(width, height, cells)
}
