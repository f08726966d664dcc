//! Rasterization of single centered solid inclusions.

use super::{GeneratorKind, GeneratorSpec, GeometryError, PoreImage};

/// Rasterizes one solid inclusion centered in an otherwise void cell.
///
/// A pixel is solid iff its center lies inside the rotated shape
/// (boundary-inclusive). The shape must fit strictly inside the cell and
/// leave every boundary pixel void, otherwise `ShapeTooLarge`.
pub fn generate_shape(
    spec: &GeneratorSpec,
    width: usize,
    height: usize,
) -> Result<PoreImage, GeometryError> {
    let shape = Shape::from_kind(&spec.kind)?;
    let theta = spec.rotation_deg.to_radians();
    let (ex, ey) = shape.rotated_extent(theta);

    // The outermost pixel centers sit half a pixel inside the cell edge, so
    // the rotated support must stay strictly inside that margin.
    let (half_w, half_h) = (width as f64 / 2.0, height as f64 / 2.0);
    if !(ex < half_w - 0.5 && ey < half_h - 0.5) {
        return Err(GeometryError::ShapeTooLarge { width, height });
    }

    let (cos_t, sin_t) = (theta.cos(), theta.sin());
    let mut cells = vec![true; width * height];
    for y in 0..height {
        // Offsets use y-up compass coordinates: North is toward row 0.
        let dy = half_h - (y as f64 + 0.5);
        for x in 0..width {
            let dx = (x as f64 + 0.5) - half_w;
            // Rotate the offset into the shape frame (inverse rotation).
            let u = dx * cos_t + dy * sin_t;
            let v = -dx * sin_t + dy * cos_t;
            if shape.contains(u, v) {
                cells[y * width + x] = false;
            }
        }
    }
    PoreImage::new(width, height, cells)
}

enum Shape {
    Rectangle { a: f64, b: f64 },
    Ellipse { a: f64, b: f64 },
    Triangle { verts: [(f64, f64); 3] },
    Cross { a: f64, t: f64 },
}

impl Shape {
    fn from_kind(kind: &GeneratorKind) -> Result<Self, GeometryError> {
        let positive = |vals: &[f64]| {
            if vals.iter().all(|v| v.is_finite() && *v > 0.0) {
                Ok(())
            } else {
                Err(GeometryError::InvalidShapeParameter)
            }
        };
        match *kind {
            GeneratorKind::Square { half_width } => {
                positive(&[half_width])?;
                Ok(Shape::Rectangle {
                    a: half_width,
                    b: half_width,
                })
            }
            GeneratorKind::Rectangle {
                half_width,
                half_height,
            } => {
                positive(&[half_width, half_height])?;
                Ok(Shape::Rectangle {
                    a: half_width,
                    b: half_height,
                })
            }
            GeneratorKind::Circle { radius } => {
                positive(&[radius])?;
                Ok(Shape::Ellipse {
                    a: radius,
                    b: radius,
                })
            }
            GeneratorKind::Ellipse {
                half_width,
                half_height,
            } => {
                positive(&[half_width, half_height])?;
                Ok(Shape::Ellipse {
                    a: half_width,
                    b: half_height,
                })
            }
            GeneratorKind::Triangle { radius } => {
                positive(&[radius])?;
                // Equilateral, circumradius r, apex North; vertices listed
                // counterclockwise.
                let vert = |deg: f64| {
                    let rad = deg.to_radians();
                    (radius * rad.cos(), radius * rad.sin())
                };
                Ok(Shape::Triangle {
                    verts: [vert(90.0), vert(210.0), vert(330.0)],
                })
            }
            GeneratorKind::Cross {
                half_width,
                half_thickness,
            } => {
                positive(&[half_width, half_thickness])?;
                Ok(Shape::Cross {
                    a: half_width,
                    t: half_thickness,
                })
            }
            _ => Err(GeometryError::KindMismatch { expected: "shape" }),
        }
    }

    /// Half-extents of the rotated support along the cell axes.
    fn rotated_extent(&self, theta: f64) -> (f64, f64) {
        let (c, s) = (theta.cos().abs(), theta.sin().abs());
        match *self {
            Shape::Rectangle { a, b } => (a * c + b * s, a * s + b * c),
            Shape::Ellipse { a, b } => {
                let ex = (a * a * c * c + b * b * s * s).sqrt();
                let ey = (a * a * s * s + b * b * c * c).sqrt();
                (ex, ey)
            }
            Shape::Triangle { verts } => {
                let (c, s) = (theta.cos(), theta.sin());
                let mut ex = 0.0_f64;
                let mut ey = 0.0_f64;
                for (vx, vy) in verts {
                    let rx = vx * c - vy * s;
                    let ry = vx * s + vy * c;
                    ex = ex.max(rx.abs());
                    ey = ey.max(ry.abs());
                }
                (ex, ey)
            }
            Shape::Cross { a, t } => {
                let bar_x = (a * c + t * s, a * s + t * c);
                let bar_y = (t * c + a * s, t * s + a * c);
                (bar_x.0.max(bar_y.0), bar_x.1.max(bar_y.1))
            }
        }
    }

    /// Boundary-inclusive membership in the unrotated shape frame.
    fn contains(&self, u: f64, v: f64) -> bool {
        match *self {
            Shape::Rectangle { a, b } => u.abs() <= a && v.abs() <= b,
            Shape::Ellipse { a, b } => {
                let nu = u / a;
                let nv = v / b;
                nu * nu + nv * nv <= 1.0
            }
            Shape::Triangle { verts } => {
                // Inside iff on the left of every counterclockwise edge.
                for i in 0..3 {
                    let (x0, y0) = verts[i];
                    let (x1, y1) = verts[(i + 1) % 3];
                    let cross = (x1 - x0) * (v - y0) - (y1 - y0) * (u - x0);
                    if cross < 0.0 {
                        return false;
                    }
                }
                true
            }
            Shape::Cross { a, t } => {
                (u.abs() <= a && v.abs() <= t) || (u.abs() <= t && v.abs() <= a)
            }
        }
    }
}
