//! Exact Euclidean distance transforms on flat (or toroidal) rasters.
//!
//! Two-pass lower-envelope-of-parabolas construction. Periodic axes are
//! handled by running the transform on a 3x replicated raster and cropping
//! the center tile; on a torus the nearest mark is always within half a
//! period, so the replication margin makes the crop exact.

/// Euclidean distance from every pixel to the nearest marked pixel.
///
/// Returns `f64::INFINITY` everywhere when no pixel is marked.
pub fn distance_to_marks(
    marks: &[bool],
    width: usize,
    height: usize,
    periodic_x: bool,
    periodic_y: bool,
) -> Vec<f64> {
    let mut d2 = distance_squared_to_marks(marks, width, height, periodic_x, periodic_y);
    for v in &mut d2 {
        *v = v.sqrt();
    }
    d2
}

/// Squared-distance variant of [`distance_to_marks`].
pub fn distance_squared_to_marks(
    marks: &[bool],
    width: usize,
    height: usize,
    periodic_x: bool,
    periodic_y: bool,
) -> Vec<f64> {
    assert_eq!(marks.len(), width * height, "mark buffer shape mismatch");
    if !marks.iter().any(|&m| m) {
        return vec![f64::INFINITY; marks.len()];
    }

    let rep_x = if periodic_x { 3 } else { 1 };
    let rep_y = if periodic_y { 3 } else { 1 };
    let (tw, th) = (width * rep_x, height * rep_y);
    let mut tiled = vec![false; tw * th];
    for y in 0..th {
        for x in 0..tw {
            tiled[y * tw + x] = marks[(y % height) * width + (x % width)];
        }
    }

    let full = exact_squared_edt(&tiled, tw, th);

    // Crop the center tile.
    let (ox, oy) = (width * (rep_x / 2), height * (rep_y / 2));
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = full[(y + oy) * tw + (x + ox)];
        }
    }
    out
}

/// Squared toroidal center-to-center distance between two pixels,
/// wrapping only on the periodic axes.
pub fn wrapped_distance_squared(
    a: (usize, usize),
    b: (usize, usize),
    width: usize,
    height: usize,
    periodic_x: bool,
    periodic_y: bool,
) -> f64 {
    let mut dx = (a.0 as f64 - b.0 as f64).abs();
    let mut dy = (a.1 as f64 - b.1 as f64).abs();
    if periodic_x {
        dx = dx.min(width as f64 - dx);
    }
    if periodic_y {
        dy = dy.min(height as f64 - dy);
    }
    dx * dx + dy * dy
}

fn exact_squared_edt(marks: &[bool], width: usize, height: usize) -> Vec<f64> {
    // Vertical distances never exceed the raster size, so this sentinel
    // always loses to any column that holds a mark.
    let sentinel = (width + height) as f64;

    // Pass 1: per-column 1D distance (in rows) to the nearest mark.
    let mut g = vec![sentinel; width * height];
    for x in 0..width {
        let mut last: Option<usize> = None;
        for y in 0..height {
            if marks[y * width + x] {
                last = Some(y);
            }
            if let Some(m) = last {
                g[y * width + x] = (y - m) as f64;
            }
        }
        last = None;
        for y in (0..height).rev() {
            if marks[y * width + x] {
                last = Some(y);
            }
            if let Some(m) = last {
                let d = (m - y) as f64;
                let cell = &mut g[y * width + x];
                if d < *cell {
                    *cell = d;
                }
            }
        }
    }

    // Pass 2: per-row lower envelope of the parabolas x' -> (x-x')^2 + g^2.
    let mut out = vec![0.0; width * height];
    let mut v = vec![0usize; width];
    let mut z = vec![0.0f64; width + 1];
    for y in 0..height {
        let f = |x: usize| {
            let gv = g[y * width + x];
            gv * gv
        };
        let mut k = 0usize;
        v[0] = 0;
        z[0] = f64::NEG_INFINITY;
        z[1] = f64::INFINITY;
        for q in 1..width {
            let fq = f(q) + (q * q) as f64;
            let s = loop {
                let p = v[k];
                let s = (fq - (f(p) + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
                // z[0] is -inf and s is finite, so k never underflows.
                if s <= z[k] {
                    k -= 1;
                } else {
                    break s;
                }
            };
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
        }
        let mut k = 0usize;
        for x in 0..width {
            while z[k + 1] < x as f64 {
                k += 1;
            }
            let p = v[k];
            let dx = x as f64 - p as f64;
            out[y * width + x] = dx * dx + f(p);
        }
    }
    out
}
