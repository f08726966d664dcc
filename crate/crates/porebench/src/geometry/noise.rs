//! Seam-free lattice-gradient noise generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GeneratorKind, GeneratorSpec, GeometryError, PoreImage};

/// Thresholds periodic gradient noise into a binary cell.
///
/// The noise field is normalized to [0, 1] per image; a pixel is void iff
/// its normalized value is at least `threshold`, so threshold 0 yields an
/// all-void cell. Gradients live on a wrapping lattice, which keeps the
/// field itself periodic: `scale` must divide both dimensions.
pub fn generate_noise(
    spec: &GeneratorSpec,
    width: usize,
    height: usize,
) -> Result<PoreImage, GeometryError> {
    let (scale, threshold, octaves, persistence) = match spec.kind {
        GeneratorKind::Perlin { scale, threshold } => (scale, threshold, 1, 0.5),
        GeneratorKind::Fractal {
            scale,
            threshold,
            octaves,
            persistence,
        } => {
            if octaves < 2 {
                return Err(GeometryError::TooFewOctaves(octaves));
            }
            (scale, threshold, octaves, persistence)
        }
        _ => return Err(GeometryError::KindMismatch { expected: "noise" }),
    };
    if scale == 0 || !width.is_multiple_of(scale) || !height.is_multiple_of(scale) {
        return Err(GeometryError::NonWrappingScale {
            scale,
            width,
            height,
        });
    }
    if !threshold.is_finite() {
        return Err(GeometryError::InvalidNoiseParameter("threshold"));
    }
    if !(persistence.is_finite() && persistence > 0.0) {
        return Err(GeometryError::InvalidNoiseParameter("persistence"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut field = vec![0.0_f64; width * height];
    let mut amplitude = 1.0;
    for octave in 0..octaves {
        let lattice = GradientLattice::draw(
            &mut rng,
            (width / scale) << octave,
            (height / scale) << octave,
        );
        let inv_wavelength = (1 << octave) as f64 / scale as f64;
        for y in 0..height {
            let v = (y as f64 + 0.5) * inv_wavelength;
            for x in 0..width {
                let u = (x as f64 + 0.5) * inv_wavelength;
                field[y * width + x] += amplitude * lattice.sample(u, v);
            }
        }
        amplitude *= persistence;
    }

    let lo = field.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let cells = field
        .iter()
        .map(|&v| {
            let norm = if span > 0.0 { (v - lo) / span } else { 0.5 };
            norm >= threshold
        })
        .collect();
    PoreImage::new(width, height, cells)
}

/// Unit gradients on a wrapping integer lattice.
struct GradientLattice {
    nx: usize,
    ny: usize,
    grads: Vec<(f64, f64)>,
}

impl GradientLattice {
    fn draw(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> Self {
        let grads = (0..nx * ny)
            .map(|_| {
                let angle = rng.gen::<f64>() * std::f64::consts::TAU;
                (angle.cos(), angle.sin())
            })
            .collect();
        Self { nx, ny, grads }
    }

    /// Classic two-dimensional gradient noise at lattice coordinates
    /// `(u, v)`, with quintic fade and wrapped cell corners.
    fn sample(&self, u: f64, v: f64) -> f64 {
        let i0 = u.floor() as usize % self.nx;
        let j0 = v.floor() as usize % self.ny;
        let i1 = (i0 + 1) % self.nx;
        let j1 = (j0 + 1) % self.ny;
        let fu = u.fract();
        let fv = v.fract();

        let dot = |i: usize, j: usize, du: f64, dv: f64| {
            let (gx, gy) = self.grads[j * self.nx + i];
            gx * du + gy * dv
        };
        let n00 = dot(i0, j0, fu, fv);
        let n10 = dot(i1, j0, fu - 1.0, fv);
        let n01 = dot(i0, j1, fu, fv - 1.0);
        let n11 = dot(i1, j1, fu - 1.0, fv - 1.0);

        let su = fade(fu);
        let sv = fade(fv);
        lerp(sv, lerp(su, n00, n10), lerp(su, n01, n11))
    }
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn lerp(t: f64, a: f64, b: f64) -> f64 {
    a + t * (b - a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perlin(scale: usize, threshold: f64, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            kind: GeneratorKind::Perlin { scale, threshold },
            rotation_deg: 0.0,
            rng_seed: seed,
        }
    }

    #[test]
    fn threshold_zero_is_all_void() {
        let img = generate_noise(&perlin(10, 0.0, 3), 40, 40).unwrap();
        assert_eq!(img.porosity(), 1.0);
    }

    #[test]
    fn threshold_one_keeps_only_the_peak() {
        let img = generate_noise(&perlin(10, 1.0, 3), 40, 40).unwrap();
        assert!(img.void_count() >= 1);
        assert!(img.porosity() < 0.01);
    }

    #[test]
    fn porosity_decreases_with_threshold() {
        let lo = generate_noise(&perlin(10, 0.3, 9), 40, 40).unwrap();
        let hi = generate_noise(&perlin(10, 0.7, 9), 40, 40).unwrap();
        assert!(lo.porosity() >= hi.porosity());
    }

    #[test]
    fn non_dividing_scale_is_rejected() {
        assert!(matches!(
            generate_noise(&perlin(7, 0.5, 0), 40, 40),
            Err(GeometryError::NonWrappingScale { .. })
        ));
        assert!(matches!(
            generate_noise(&perlin(0, 0.5, 0), 40, 40),
            Err(GeometryError::NonWrappingScale { .. })
        ));
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let a = generate_noise(&perlin(10, 0.5, 42), 40, 40).unwrap();
        let b = generate_noise(&perlin(10, 0.5, 42), 40, 40).unwrap();
        let c = generate_noise(&perlin(10, 0.5, 43), 40, 40).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn fractal_needs_at_least_two_octaves() {
        let spec = GeneratorSpec::new(GeneratorKind::Fractal {
            scale: 10,
            threshold: 0.5,
            octaves: 1,
            persistence: 0.5,
        });
        assert!(matches!(
            generate_noise(&spec, 40, 40),
            Err(GeometryError::TooFewOctaves(1))
        ));
    }

    #[test]
    fn fractal_differs_from_single_octave() {
        let base = generate_noise(&perlin(20, 0.5, 5), 40, 40).unwrap();
        let spec = GeneratorSpec {
            kind: GeneratorKind::Fractal {
                scale: 20,
                threshold: 0.5,
                octaves: 4,
                persistence: 0.5,
            },
            rotation_deg: 0.0,
            rng_seed: 5,
        };
        let fractal = generate_noise(&spec, 40, 40).unwrap();
        assert_ne!(base, fractal);
    }
}
