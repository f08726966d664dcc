//! Pore-scale descriptors: porosity, pore-size statistics, interfacial
//! surface, connectivity, tortuosity, and percolation capacity.

mod graph;
mod maxflow;
mod pores;
mod surface;
mod tortuosity;

pub use graph::{build_graph, connectivity, PoreGraph, NO_NODE};
pub use maxflow::{max_flow, MaxFlowResult};
pub use pores::{pore_size_distribution, PoreSizeDistribution};
pub use surface::{surface_metrics, SurfaceMetrics, DIRECTION_NAMES};
pub use tortuosity::{tortuosity, TortuosityResult};

use crate::geometry::PoreImage;

/// Transport axis through the unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricsError {
    #[error("image contains no void pixels")]
    NoVoidSpace,
    #[error("no void path connects the {axis} faces")]
    NoCrossingPath { axis: Axis },
    #[error("a bounding face on the {axis} axis has no void pixels")]
    NoBoundaryVoid { axis: Axis },
    #[error("the {axis} axis must span at least 2 pixels, got {len}")]
    AxisTooShort { axis: Axis, len: usize },
}

/// Full descriptor set for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub porosity: f64,
    pub n_pores: usize,
    pub mean_pore_volume: f64,
    pub std_pore_volume: f64,
    pub specific_surface: f64,
    pub directionality: [f64; 8],
    pub directionality_std: f64,
    pub connectivity: usize,
    /// `None` when no void path crosses that axis.
    pub tortuosity_x: Option<f64>,
    pub tortuosity_y: Option<f64>,
    /// `None` when a bounding face has no void pixels.
    pub max_flow_x: Option<u64>,
    pub max_flow_y: Option<u64>,
}

impl MetricsReport {
    /// Computes every descriptor. Axis-specific outcomes that merely
    /// reflect a blocked geometry (no crossing path, a sealed face) fold
    /// into `None`; structural problems and empty void space are errors.
    pub fn compute(image: &PoreImage) -> Result<Self, MetricsError> {
        if image.void_count() == 0 {
            return Err(MetricsError::NoVoidSpace);
        }
        let psd = pore_size_distribution(image)?;
        let surface = surface_metrics(image)?;
        let graph = build_graph(image, image.periodic_x, image.periodic_y);

        let tortuosity_x = optional_axis(tortuosity(image, Axis::X).map(|t| t.tortuosity))?;
        let tortuosity_y = optional_axis(tortuosity(image, Axis::Y).map(|t| t.tortuosity))?;
        let max_flow_x = optional_axis(max_flow(image, Axis::X).map(|m| m.value))?;
        let max_flow_y = optional_axis(max_flow(image, Axis::Y).map(|m| m.value))?;

        Ok(Self {
            porosity: image.porosity(),
            n_pores: psd.n_pores(),
            mean_pore_volume: psd.mean_volume(),
            std_pore_volume: psd.std_volume(),
            specific_surface: surface.specific_surface,
            directionality: surface.directionality,
            directionality_std: surface.directionality_std,
            connectivity: connectivity(&graph),
            tortuosity_x,
            tortuosity_y,
            max_flow_x,
            max_flow_y,
        })
    }
}

fn optional_axis<T>(result: Result<T, MetricsError>) -> Result<Option<T>, MetricsError> {
    match result {
        Ok(v) => Ok(Some(v)),
        Err(MetricsError::NoCrossingPath { .. }) | Err(MetricsError::NoBoundaryVoid { .. }) => {
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// f64 with a total order, for use as a heap priority.
#[derive(PartialEq, Clone, Copy)]
pub(crate) struct OrderedF64(pub f64);

impl Eq for OrderedF64 {}

impl PartialOrd for OrderedF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
