//! Periodic binary pore images: the raster type, shape/noise/Voronoi
//! generators, and netpbm import/export.

mod noise;
mod pbm;
mod shapes;
mod voronoi;

pub use noise::generate_noise;
pub use pbm::{parse_raster, read_raster, write_pgm, write_raster, write_raster_plain};
pub use shapes::generate_shape;
pub use voronoi::generate_voronoi;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default edge resolution for generated unit cells, in pixels.
pub const DEFAULT_RESOLUTION: usize = 200;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("image dimensions must be nonzero (got {width}x{height})")]
    InvalidDimensions { width: usize, height: usize },
    #[error("cell buffer holds {got} entries, expected {expected}")]
    CellCountMismatch { got: usize, expected: usize },
    #[error("inclusion does not fit strictly inside a {width}x{height} cell")]
    ShapeTooLarge { width: usize, height: usize },
    #[error("shape parameters must be positive and finite")]
    InvalidShapeParameter,
    #[error("generator kind does not belong to the {expected} family")]
    KindMismatch { expected: &'static str },
    #[error("noise wavelength {scale} px does not divide {width}x{height}")]
    NonWrappingScale {
        scale: usize,
        width: usize,
        height: usize,
    },
    #[error("fractal noise needs at least 2 octaves (got {0})")]
    TooFewOctaves(usize),
    #[error("noise {0} must be a positive finite number")]
    InvalidNoiseParameter(&'static str),
    #[error("voronoi needs at least 2 seed points (got {0})")]
    TooFewSeeds(usize),
    #[error("voronoi seeds coincide or collapse into one cell")]
    DegenerateSeeds,
    #[error("voronoi aperture must be at least 1 px (got {0})")]
    ApertureTooSmall(f64),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported magic number {0:?}")]
    UnsupportedMagic(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("payload ends early: {0}")]
    TruncatedPayload(String),
}

/// Periodic binary raster over a rectangular unit cell.
///
/// Cells are row-major; `true` marks void (pore space), `false` marks solid.
/// Pixel centers sit at `(x + 0.5, y + 0.5)` in pixel units and y counts
/// rows downward; compass North is toward row 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PoreImage {
    width: usize,
    height: usize,
    cells: Vec<bool>,
    /// Physical edge length of one pixel.
    pub pixel_length: f64,
    /// Wrap adjacency across the x = 0 / x = width seam.
    pub periodic_x: bool,
    /// Wrap adjacency across the y = 0 / y = height seam.
    pub periodic_y: bool,
}

impl PoreImage {
    /// Builds an image from a row-major cell buffer. Periodic on both axes
    /// with unit pixels; override the public fields to change that.
    pub fn new(width: usize, height: usize, cells: Vec<bool>) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 {
            return Err(GeometryError::InvalidDimensions { width, height });
        }
        if cells.len() != width * height {
            return Err(GeometryError::CellCountMismatch {
                got: cells.len(),
                expected: width * height,
            });
        }
        Ok(Self {
            width,
            height,
            cells,
            pixel_length: 1.0,
            periodic_x: true,
            periodic_y: true,
        })
    }

    /// Uniform image, all-void or all-solid.
    pub fn filled(width: usize, height: usize, void: bool) -> Result<Self, GeometryError> {
        Self::new(width, height, vec![void; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn is_void(&self, x: usize, y: usize) -> bool {
        self.cells[self.index(x, y)]
    }

    #[inline]
    pub fn is_void_at(&self, idx: usize) -> bool {
        self.cells[idx]
    }

    pub fn set_void(&mut self, x: usize, y: usize, void: bool) {
        let i = self.index(x, y);
        self.cells[i] = void;
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn void_count(&self) -> usize {
        self.cells.iter().filter(|&&v| v).count()
    }

    /// Void fraction of the cell.
    pub fn porosity(&self) -> f64 {
        self.void_count() as f64 / self.cells.len() as f64
    }

    /// 4-neighbors of `(x, y)` honoring the periodic flags. Off-image
    /// neighbors on non-periodic axes are dropped, as are wrap neighbors
    /// that would alias the pixel itself on 1-wide axes.
    pub fn neighbors4(&self, x: usize, y: usize) -> impl Iterator<Item = (usize, usize)> {
        let mut out = [(0usize, 0usize); 4];
        let mut n = 0;
        let (w, h) = (self.width, self.height);
        let mut push = |p: (usize, usize)| {
            out[n] = p;
            n += 1;
        };
        if x + 1 < w {
            push((x + 1, y));
        } else if self.periodic_x && w > 1 {
            push((0, y));
        }
        if x > 0 {
            push((x - 1, y));
        } else if self.periodic_x && w > 1 {
            push((w - 1, y));
        }
        if y + 1 < h {
            push((x, y + 1));
        } else if self.periodic_y && h > 1 {
            push((x, 0));
        }
        if y > 0 {
            push((x, y - 1));
        } else if self.periodic_y && h > 1 {
            push((x, h - 1));
        }
        out.into_iter().take(n)
    }

    /// Replicates the cell `nx` by `ny` times. The copy keeps pixel length
    /// and periodic flags.
    pub fn tiled(&self, nx: usize, ny: usize) -> Result<Self, GeometryError> {
        let (w, h) = (self.width * nx, self.height * ny);
        let mut cells = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                cells[y * w + x] = self.is_void(x % self.width, y % self.height);
            }
        }
        let mut out = Self::new(w, h, cells)?;
        out.pixel_length = self.pixel_length;
        out.periodic_x = self.periodic_x;
        out.periodic_y = self.periodic_y;
        Ok(out)
    }

    /// Mirror across the vertical axis (x -> width-1-x).
    pub fn flipped_horizontal(&self) -> Self {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.cells[y * self.width + x] = self.is_void(self.width - 1 - x, y);
            }
        }
        out
    }

    /// Mirror across the horizontal axis (y -> height-1-y).
    pub fn flipped_vertical(&self) -> Self {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.cells[y * self.width + x] = self.is_void(x, self.height - 1 - y);
            }
        }
        out
    }

    /// Quarter-turn counterclockwise; the x axis maps onto the y axis.
    pub fn rotated90(&self) -> Self {
        let (w, h) = (self.height, self.width);
        let mut cells = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                // Output row y reads input column y from the far edge up.
                cells[y * w + x] = self.is_void(self.width - 1 - y, x);
            }
        }
        let mut out = Self::new(w, h, cells).expect("rotation preserves cell count");
        out.pixel_length = self.pixel_length;
        out.periodic_x = self.periodic_y;
        out.periodic_y = self.periodic_x;
        out
    }

    /// Toroidal shift by `(dx, dy)` pixels.
    pub fn translated(&self, dx: usize, dy: usize) -> Self {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                let sx = (x + self.width - dx % self.width) % self.width;
                let sy = (y + self.height - dy % self.height) % self.height;
                out.cells[y * self.width + x] = self.is_void(sx, sy);
            }
        }
        out
    }
}

/// Declarative description of one generated unit cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    /// Counterclockwise rotation of the inclusion, degrees. Ignored by the
    /// noise and Voronoi kinds.
    #[serde(default)]
    pub rotation_deg: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind) -> Self {
        Self {
            kind,
            rotation_deg: 0.0,
            rng_seed: 0,
        }
    }

    /// Dispatches to the matching generator.
    pub fn generate(&self, width: usize, height: usize) -> Result<PoreImage, GeometryError> {
        match &self.kind {
            GeneratorKind::Square { .. }
            | GeneratorKind::Rectangle { .. }
            | GeneratorKind::Circle { .. }
            | GeneratorKind::Ellipse { .. }
            | GeneratorKind::Triangle { .. }
            | GeneratorKind::Cross { .. } => generate_shape(self, width, height),
            GeneratorKind::Perlin { .. } | GeneratorKind::Fractal { .. } => {
                generate_noise(self, width, height)
            }
            GeneratorKind::Voronoi { .. } => generate_voronoi(self, width, height),
        }
    }
}

/// Shape, noise, and channel-network generator families. All length
/// parameters are in pixels.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Square {
        half_width: f64,
    },
    Rectangle {
        half_width: f64,
        half_height: f64,
    },
    Circle {
        radius: f64,
    },
    Ellipse {
        half_width: f64,
        half_height: f64,
    },
    /// Equilateral triangle by circumradius, one vertex pointing North
    /// before rotation.
    Triangle {
        radius: f64,
    },
    /// Two concentric axis-aligned bars: arm half-length and arm
    /// half-thickness.
    Cross {
        half_width: f64,
        half_thickness: f64,
    },
    /// Lattice-gradient noise thresholded on a per-image [0, 1] scale.
    /// `scale` is the wavelength in pixels and must divide both dimensions.
    Perlin {
        scale: usize,
        threshold: f64,
    },
    /// Multi-octave variant of `Perlin`; octave o doubles the frequency and
    /// scales amplitude by `persistence^o`.
    Fractal {
        scale: usize,
        threshold: f64,
        octaves: usize,
        persistence: f64,
    },
    /// Channel network along Voronoi cell boundaries: a pixel is void iff
    /// its distance to the nearest inter-cell boundary is at most
    /// `aperture`.
    Voronoi {
        seeds: usize,
        aperture: f64,
    },
}
