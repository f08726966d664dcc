//! Pore segmentation and size statistics.
//!
//! The void space is partitioned into pores by a marker watershed on the
//! distance transform: compute the exact distance to the nearest solid
//! pixel, smooth it with a small box filter, take the void-space local
//! maxima as markers, absorb markers that sit inside a larger marker's
//! distance radius, and flood the remaining markers in order of
//! decreasing smoothed distance.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::edt::{distance_to_marks, wrapped_distance_squared};
use crate::geometry::PoreImage;
use crate::preprocess::label_components;

use super::{MetricsError, OrderedF64};

/// Half-width of the smoothing window applied to the distance map.
const SMOOTHING_RADIUS: i64 = 2;

/// Watershed partition of the void space.
#[derive(Debug, Clone, PartialEq)]
pub struct PoreSizeDistribution {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    volumes: Vec<f64>,
}

impl PoreSizeDistribution {
    /// Per-pixel pore labels, row-major; 1-based, 0 marks solid pixels.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Physical volume per pore; index `k` holds the volume of label `k+1`.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn n_pores(&self) -> usize {
        self.volumes.len()
    }

    pub fn mean_volume(&self) -> f64 {
        self.volumes.iter().sum::<f64>() / self.volumes.len() as f64
    }

    /// Population standard deviation of the pore volumes.
    pub fn std_volume(&self) -> f64 {
        let mean = self.mean_volume();
        (self
            .volumes
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / self.volumes.len() as f64)
            .sqrt()
    }
}

pub fn pore_size_distribution(image: &PoreImage) -> Result<PoreSizeDistribution, MetricsError> {
    if image.void_count() == 0 {
        return Err(MetricsError::NoVoidSpace);
    }
    let (w, h) = (image.width(), image.height());
    let solid: Vec<bool> = (0..w * h).map(|i| !image.is_void_at(i)).collect();
    let distance = distance_to_marks(&solid, w, h, image.periodic_x, image.periodic_y);
    let smoothed = box_filter(&distance, w, h, image.periodic_x, image.periodic_y);

    let components = label_components(image);
    let peaks = local_maxima(image, &smoothed, components.labels());
    let markers = merge_peaks(image, &smoothed, peaks, components.labels());
    let labels = flood(image, &smoothed, &markers);

    let mut counts = vec![0usize; markers.len()];
    for &l in &labels {
        if l > 0 {
            counts[l as usize - 1] += 1;
        }
    }
    let pixel_area = image.pixel_length * image.pixel_length;
    let volumes = counts.iter().map(|&c| c as f64 * pixel_area).collect();

    Ok(PoreSizeDistribution {
        width: w,
        height: h,
        labels,
        volumes,
    })
}

/// Mean over a (2r+1)^2 window; wraps on periodic axes, shrinks at the
/// other edges.
fn box_filter(values: &[f64], w: usize, h: usize, periodic_x: bool, periodic_y: bool) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut sum = 0.0;
            let mut n = 0usize;
            for dy in -SMOOTHING_RADIUS..=SMOOTHING_RADIUS {
                let Some(ny) = wrap_coord(y as i64 + dy, h, periodic_y) else {
                    continue;
                };
                for dx in -SMOOTHING_RADIUS..=SMOOTHING_RADIUS {
                    let Some(nx) = wrap_coord(x as i64 + dx, w, periodic_x) else {
                        continue;
                    };
                    sum += values[ny * w + nx];
                    n += 1;
                }
            }
            out[y * w + x] = sum / n as f64;
        }
    }
    out
}

fn wrap_coord(c: i64, len: usize, periodic: bool) -> Option<usize> {
    if (0..len as i64).contains(&c) {
        Some(c as usize)
    } else if periodic {
        Some(c.rem_euclid(len as i64) as usize)
    } else {
        None
    }
}

/// Void pixels that no 8-adjacent void pixel of the same component
/// exceeds, with equal-valued plateaus collapsed to their first pixel in
/// row-major order.
///
/// Only same-component neighbors disqualify a candidate: a diagonally
/// adjacent but unconnected pore must not swallow another component's
/// maximum, or that component would end up without a marker.
fn local_maxima(image: &PoreImage, smoothed: &[f64], component_labels: &[u32]) -> Vec<usize> {
    let (w, h) = (image.width(), image.height());
    let mut candidate = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !image.is_void_at(i) {
                continue;
            }
            candidate[i] = neighbors8(image, x, y).into_iter().all(|(nx, ny)| {
                let n = ny * w + nx;
                component_labels[n] != component_labels[i] || smoothed[n] <= smoothed[i]
            });
        }
    }

    // Collapse plateaus: flood equal-valued candidate pixels of one
    // component together and keep the lowest index of each group.
    let mut seen = vec![false; w * h];
    let mut peaks = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !candidate[start] || seen[start] {
            continue;
        }
        peaks.push(start);
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            for (nx, ny) in neighbors8(image, x, y) {
                let n = ny * w + nx;
                if candidate[n]
                    && !seen[n]
                    && component_labels[n] == component_labels[start]
                    && smoothed[n] == smoothed[start]
                {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
    }
    peaks
}

/// 8-neighborhood honoring the image's periodicity flags; out-of-range
/// offsets on flat axes are dropped, and 1-wide axes never wrap onto
/// themselves.
fn neighbors8(image: &PoreImage, x: usize, y: usize) -> Vec<(usize, usize)> {
    let (w, h) = (image.width(), image.height());
    let mut out = Vec::with_capacity(8);
    for dy in -1i64..=1 {
        let ny = match wrap_coord(y as i64 + dy, h, image.periodic_y && h > 1) {
            Some(v) => v,
            None => continue,
        };
        for dx in -1i64..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let nx = match wrap_coord(x as i64 + dx, w, image.periodic_x && w > 1) {
                Some(v) => v,
                None => continue,
            };
            if (nx, ny) != (x, y) {
                out.push((nx, ny));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Drops peaks that lie within a stronger peak's smoothed distance value,
/// largest first. Peaks only absorb peaks of their own void component, so
/// every component retains a marker.
fn merge_peaks(
    image: &PoreImage,
    smoothed: &[f64],
    mut peaks: Vec<usize>,
    component_labels: &[u32],
) -> Vec<usize> {
    let (w, h) = (image.width(), image.height());
    peaks.sort_by(|&a, &b| {
        smoothed[b]
            .total_cmp(&smoothed[a])
            .then_with(|| a.cmp(&b))
    });
    let mut retained: Vec<usize> = Vec::new();
    'next: for p in peaks {
        let pp = (p % w, p / w);
        for &r in &retained {
            if component_labels[r] != component_labels[p] {
                continue;
            }
            let rp = (r % w, r / w);
            let d2 = wrapped_distance_squared(pp, rp, w, h, image.periodic_x, image.periodic_y);
            if d2 <= smoothed[r] * smoothed[r] {
                continue 'next;
            }
        }
        retained.push(p);
    }
    retained
}

/// Priority flood from the markers over void pixels, 4-adjacent, visiting
/// higher smoothed distances first; ties open the lower pixel index first.
fn flood(image: &PoreImage, smoothed: &[f64], markers: &[usize]) -> Vec<u32> {
    let (w, h) = (image.width(), image.height());
    let mut labels = vec![0u32; w * h];
    let mut heap: BinaryHeap<(OrderedF64, Reverse<usize>, u32)> = BinaryHeap::new();
    for (k, &m) in markers.iter().enumerate() {
        heap.push((OrderedF64(smoothed[m]), Reverse(m), k as u32 + 1));
    }
    while let Some((_, Reverse(i), label)) = heap.pop() {
        if labels[i] != 0 {
            continue;
        }
        labels[i] = label;
        let (x, y) = (i % w, i / w);
        for (nx, ny) in image.neighbors4(x, y) {
            let n = ny * w + nx;
            if image.is_void_at(n) && labels[n] == 0 {
                heap.push((OrderedF64(smoothed[n]), Reverse(n), label));
            }
        }
    }
    labels
}
