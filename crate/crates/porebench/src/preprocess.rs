//! Void-space hygiene: component labeling, largest-component extraction,
//! and periodic connectivity checks run before metrics.

use std::collections::VecDeque;

use thiserror::Error;

use crate::geometry::PoreImage;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("image has no void pixels")]
    NoVoidSpace,
}

/// Fraction of void pixels the largest component must reach before an
/// image stops being flagged as highly discontinuous.
pub const DEFAULT_DISCONTINUITY_THRESHOLD: f64 = 0.5;

/// Connected components of the void space under 4-adjacency, wrapping
/// across periodic boundaries.
///
/// Labels start at 1 in row-major discovery order; 0 marks solid pixels.
#[derive(Debug, Clone)]
pub struct ComponentLabeling {
    width: usize,
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Pixel count per component; index `k` holds the size of label `k+1`.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Largest component as `(label, size)`. Ties resolve to the lowest
    /// label, which is the first component met in row-major order.
    pub fn largest(&self) -> Option<(u32, usize)> {
        let mut best: Option<(u32, usize)> = None;
        for (k, &size) in self.sizes.iter().enumerate() {
            if best.is_none_or(|(_, s)| size > s) {
                best = Some((k as u32 + 1, size));
            }
        }
        best
    }
}

/// Labels void components under 4-adjacency with periodic wrap on the
/// axes the image marks periodic.
pub fn label_components(image: &PoreImage) -> ComponentLabeling {
    let (w, h) = (image.width(), image.height());
    let mut labels = vec![0u32; w * h];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..w * h {
        if !image.is_void_at(start) || labels[start] != 0 {
            continue;
        }
        let id = sizes.len() as u32 + 1;
        let mut size = 0usize;
        labels[start] = id;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            size += 1;
            let (x, y) = (idx % w, idx / w);
            for (nx, ny) in image.neighbors4(x, y) {
                let n = ny * w + nx;
                if image.is_void_at(n) && labels[n] == 0 {
                    labels[n] = id;
                    queue.push_back(n);
                }
            }
        }
        sizes.push(size);
    }
    ComponentLabeling {
        width: w,
        labels,
        sizes,
    }
}

/// Keeps only the largest void component, filling the rest with solid.
/// Size ties keep the component met first in row-major order.
pub fn keep_largest_component(image: &PoreImage) -> Result<PoreImage, PreprocessError> {
    let labeling = label_components(image);
    let (keep, _) = labeling.largest().ok_or(PreprocessError::NoVoidSpace)?;
    let mut out = image.clone();
    for y in 0..image.height() {
        for x in 0..image.width() {
            if labeling.label(x, y) != keep {
                out.set_void(x, y, false);
            }
        }
    }
    Ok(out)
}

/// Periodic usability of a unit cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicityReport {
    /// A void path crosses the x seam with nonzero winding: the void space
    /// percolates along x under periodic wrap.
    pub connected_x: bool,
    /// Same along y.
    pub connected_y: bool,
    /// Void component count under the image's own periodic flags.
    pub component_count: usize,
    /// Largest component size over total void pixels (0 when no void).
    pub largest_component_fraction: f64,
    /// Set when the largest component falls below the threshold fraction.
    pub high_discontinuity: bool,
}

/// [`check_periodic_connectivity_with`] at the default discontinuity
/// threshold.
pub fn check_periodic_connectivity(image: &PoreImage) -> PeriodicityReport {
    check_periodic_connectivity_with(image, DEFAULT_DISCONTINUITY_THRESHOLD)
}

/// Reports whether void paths link opposite boundaries under periodic
/// wrap, per axis, plus component statistics.
///
/// Percolation is detected by lifting BFS coordinates to the universal
/// cover: a revisited pixel whose lifted coordinate disagrees with the
/// stored one closes a loop with nonzero winding on that axis. Both axes
/// are treated as wrapped here regardless of the image flags, since the
/// question is whether the cell works as a periodic tile; component
/// statistics still honor the image's own flags.
pub fn check_periodic_connectivity_with(
    image: &PoreImage,
    discontinuity_threshold: f64,
) -> PeriodicityReport {
    let (w, h) = (image.width(), image.height());
    let (mut wind_x, mut wind_y) = (false, false);
    let mut lift: Vec<Option<(i64, i64)>> = vec![None; w * h];
    let mut queue = VecDeque::new();

    for start in 0..w * h {
        if !image.is_void_at(start) || lift[start].is_some() {
            continue;
        }
        lift[start] = Some(((start % w) as i64, (start / w) as i64));
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            let (x, y) = (idx % w, idx / w);
            let (lx, ly) = lift[idx].expect("queued pixels carry a lift");
            for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let nx = (x as i64 + dx).rem_euclid(w as i64) as usize;
                let ny = (y as i64 + dy).rem_euclid(h as i64) as usize;
                let n = ny * w + nx;
                if !image.is_void_at(n) {
                    continue;
                }
                let expected = (lx + dx, ly + dy);
                match lift[n] {
                    None => {
                        lift[n] = Some(expected);
                        queue.push_back(n);
                    }
                    Some(stored) => {
                        // Lifts of one pixel differ by whole periods.
                        if stored.0 != expected.0 {
                            wind_x = true;
                        }
                        if stored.1 != expected.1 {
                            wind_y = true;
                        }
                    }
                }
            }
        }
    }

    let labeling = label_components(image);
    let void_total: usize = labeling.sizes().iter().sum();
    let largest_fraction = match labeling.largest() {
        Some((_, size)) if void_total > 0 => size as f64 / void_total as f64,
        _ => 0.0,
    };
    PeriodicityReport {
        connected_x: wind_x,
        connected_y: wind_y,
        component_count: labeling.count(),
        largest_component_fraction: largest_fraction,
        high_discontinuity: largest_fraction < discontinuity_threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image_from_rows(rows: &[&str]) -> PoreImage {
        let h = rows.len();
        let w = rows[0].len();
        let mut cells = Vec::with_capacity(w * h);
        for row in rows {
            assert_eq!(row.len(), w);
            for c in row.chars() {
                cells.push(c == '.');
            }
        }
        PoreImage::new(w, h, cells).unwrap()
    }

    #[test]
    fn isolated_voids_form_two_components() {
        let mut img = image_from_rows(&["....", "....", "....", "...."]);
        for y in 0..4 {
            for x in 0..4 {
                img.set_void(x, y, (x, y) == (0, 0) || (x, y) == (2, 2));
            }
        }
        img.periodic_x = false;
        img.periodic_y = false;
        let labeling = label_components(&img);
        assert_eq!(labeling.count(), 2);
        assert_eq!(labeling.label(0, 0), 1);
        assert_eq!(labeling.label(2, 2), 2);

        // Wrap edges cannot join these two pixels either.
        img.periodic_x = true;
        img.periodic_y = true;
        assert_eq!(label_components(&img).count(), 2);
    }

    #[test]
    fn wrap_joins_components_across_the_seam() {
        // The two void columns touch only through the x seam.
        let img = image_from_rows(&[".##.", ".##."]);
        let periodic = label_components(&img);
        assert_eq!(periodic.count(), 1);

        let mut flat = img.clone();
        flat.periodic_x = false;
        flat.periodic_y = false;
        assert_eq!(label_components(&flat).count(), 2);
    }

    #[test]
    fn keep_largest_breaks_ties_toward_row_major_order() {
        let mut img = PoreImage::filled(4, 4, false).unwrap();
        img.periodic_x = false;
        img.periodic_y = false;
        img.set_void(0, 0, true);
        img.set_void(2, 2, true);
        let kept = keep_largest_component(&img).unwrap();
        assert!(kept.is_void(0, 0));
        assert!(!kept.is_void(2, 2));
    }

    #[test]
    fn keep_largest_prefers_size_over_order() {
        let mut img = PoreImage::filled(6, 3, false).unwrap();
        img.periodic_x = false;
        img.periodic_y = false;
        img.set_void(0, 0, true);
        for x in 2..5 {
            img.set_void(x, 2, true);
        }
        let kept = keep_largest_component(&img).unwrap();
        assert!(!kept.is_void(0, 0));
        assert!(kept.is_void(3, 2));
        assert_eq!(kept.void_count(), 3);
    }

    #[test]
    fn keep_largest_is_idempotent_and_never_adds_void() {
        let img = image_from_rows(&[".#..", "#.#.", ".##.", "...#"]);
        let once = keep_largest_component(&img).unwrap();
        let twice = keep_largest_component(&once).unwrap();
        assert_eq!(once, twice);
        assert!(once.void_count() <= img.void_count());
    }

    #[test]
    fn all_solid_has_no_component_to_keep() {
        let img = PoreImage::filled(3, 3, false).unwrap();
        assert!(matches!(
            keep_largest_component(&img),
            Err(PreprocessError::NoVoidSpace)
        ));
    }

    #[test]
    fn all_void_percolates_both_axes() {
        let report = check_periodic_connectivity(&PoreImage::filled(5, 4, true).unwrap());
        assert!(report.connected_x);
        assert!(report.connected_y);
        assert_eq!(report.component_count, 1);
        assert_eq!(report.largest_component_fraction, 1.0);
        assert!(!report.high_discontinuity);
    }

    #[test]
    fn all_solid_percolates_neither_axis() {
        let report = check_periodic_connectivity(&PoreImage::filled(5, 4, false).unwrap());
        assert!(!report.connected_x);
        assert!(!report.connected_y);
        assert_eq!(report.component_count, 0);
        assert_eq!(report.largest_component_fraction, 0.0);
        assert!(report.high_discontinuity);
    }

    #[test]
    fn solid_bar_blocks_one_axis_only() {
        let img = image_from_rows(&["....", "####", "....", "...."]);
        let report = check_periodic_connectivity(&img);
        assert!(report.connected_x);
        assert!(!report.connected_y);
    }

    #[test]
    fn double_winding_channel_is_detected() {
        // One closed channel that crosses the x seam twice: two diagonal
        // segments chained through wrap edges. No single in-cell segment
        // links the seam to itself, yet the loop percolates along x.
        let seg1 = [
            (0, 1),
            (1, 1),
            (1, 2),
            (2, 2),
            (3, 2),
            (3, 3),
            (4, 3),
            (5, 3),
            (6, 3),
            (7, 3),
        ];
        let seg2 = [
            (0, 3),
            (0, 4),
            (1, 4),
            (2, 4),
            (2, 5),
            (3, 5),
            (4, 5),
            (4, 0),
            (5, 0),
            (5, 1),
            (6, 1),
            (7, 1),
        ];
        let mut cells = vec![false; 8 * 6];
        for &(x, y) in seg1.iter().chain(&seg2) {
            cells[y * 8 + x] = true;
        }
        let img = PoreImage::new(8, 6, cells).unwrap();
        let report = check_periodic_connectivity(&img);
        assert!(report.connected_x, "two seam crossings still percolate");
        assert!(report.connected_y, "the return leg wraps y once");
        // Dropping only the x wrap leaves two disjoint segments, so each
        // x-seam edge joins *different* components: a labeling comparison
        // with and without that seam would miss this channel.
        let mut no_x_wrap = img.clone();
        no_x_wrap.periodic_x = false;
        assert_eq!(label_components(&no_x_wrap).count(), 2);
    }

    #[test]
    fn one_wide_periodic_axis_wraps_to_itself() {
        let img = PoreImage::filled(1, 3, true).unwrap();
        let report = check_periodic_connectivity(&img);
        assert!(report.connected_x);
        assert!(report.connected_y);
    }

    #[test]
    fn discontinuity_flag_follows_the_threshold() {
        // Components of size 4, 3, and 3: the largest holds 40% of void.
        let img = image_from_rows(&[
            "....######",
            "##########",
            "...###...#",
        ]);
        let mut img = img;
        img.periodic_x = false;
        img.periodic_y = false;
        let report = check_periodic_connectivity(&img);
        assert_eq!(report.component_count, 3);
        assert!((report.largest_component_fraction - 0.4).abs() < 1e-12);
        assert!(report.high_discontinuity);
        let relaxed = check_periodic_connectivity_with(&img, 0.3);
        assert!(!relaxed.high_discontinuity);
    }
}
