//! Percolation capacity: unit-capacity max flow across the cell.

use std::collections::VecDeque;

use crate::geometry::PoreImage;

use super::{build_graph, Axis, MetricsError};

/// Terminal capacity, effectively unbounded next to unit edges.
const FACE_CAP: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct MaxFlowResult {
    /// Number of edge-disjoint void routes between the two faces.
    pub value: u64,
    /// A minimum cut: pixel pairs of the saturated pore edges, sorted by
    /// pixel index. Empty when nothing crosses.
    pub cut: Vec<((usize, usize), (usize, usize))>,
}

/// Maximum flow between the two bounding faces along `axis`.
///
/// Every void pixel on the low face feeds from a common source and every
/// void pixel on the high face drains to a common sink; each 4-adjacency
/// between void pixels carries one unit. As in the crossing-path search,
/// the transverse axis keeps its periodic wrap but the flow axis never
/// wraps. A blocked geometry yields zero flow; a face without any void
/// pixel is an error.
pub fn max_flow(image: &PoreImage, axis: Axis) -> Result<MaxFlowResult, MetricsError> {
    if image.void_count() == 0 {
        return Err(MetricsError::NoVoidSpace);
    }
    let (w, h) = (image.width(), image.height());
    let span_len = match axis {
        Axis::X => w,
        Axis::Y => h,
    };
    if span_len < 2 {
        return Err(MetricsError::AxisTooShort {
            axis,
            len: span_len,
        });
    }

    let graph = match axis {
        Axis::X => build_graph(image, false, image.periodic_y),
        Axis::Y => build_graph(image, image.periodic_x, false),
    };
    let n = graph.node_count();
    let (source, sink) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    for &(a, b) in graph.edges() {
        net.add_edge(a as usize, b as usize, 1, 1);
    }

    let mut source_open = false;
    let mut sink_open = false;
    let cross_len = match axis {
        Axis::X => h,
        Axis::Y => w,
    };
    for c in 0..cross_len {
        let (low, high) = match axis {
            Axis::X => ((0, c), (w - 1, c)),
            Axis::Y => ((c, 0), (c, h - 1)),
        };
        if let Some(id) = graph.node_id(low.0, low.1) {
            net.add_edge(source, id as usize, FACE_CAP, 0);
            source_open = true;
        }
        if let Some(id) = graph.node_id(high.0, high.1) {
            net.add_edge(id as usize, sink, FACE_CAP, 0);
            sink_open = true;
        }
    }
    if !source_open || !sink_open {
        return Err(MetricsError::NoBoundaryVoid { axis });
    }

    let value = net.edmonds_karp(source, sink);

    // The source side of the cut is what the residual network still
    // reaches; saturated pore edges leaving it form a minimum cut.
    let reachable = net.residual_reachable(source);
    let mut cut: Vec<_> = graph
        .edges()
        .iter()
        .filter(|&&(a, b)| reachable[a as usize] != reachable[b as usize])
        .map(|&(a, b)| (graph.node_pixel(a), graph.node_pixel(b)))
        .collect();
    cut.sort_unstable_by_key(|&((ax, ay), (bx, by))| (ay * w + ax, by * w + bx));

    Ok(MaxFlowResult { value, cut })
}

/// Adjacency-list flow network; arcs are stored in pairs so `i ^ 1` is
/// the reverse of arc `i`.
struct FlowNetwork {
    to: Vec<u32>,
    cap: Vec<u32>,
    arcs: Vec<Vec<u32>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        Self {
            to: Vec::new(),
            cap: Vec::new(),
            arcs: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: u32, reverse_cap: u32) {
        let i = self.to.len() as u32;
        self.to.push(to as u32);
        self.cap.push(cap);
        self.arcs[from].push(i);
        self.to.push(from as u32);
        self.cap.push(reverse_cap);
        self.arcs[to].push(i + 1);
    }

    fn edmonds_karp(&mut self, source: usize, sink: usize) -> u64 {
        let mut total = 0u64;
        let mut parent_arc = vec![u32::MAX; self.arcs.len()];
        loop {
            parent_arc.fill(u32::MAX);
            let mut queue = VecDeque::from([source]);
            let mut found = false;
            'bfs: while let Some(u) = queue.pop_front() {
                for &a in &self.arcs[u] {
                    let v = self.to[a as usize] as usize;
                    if self.cap[a as usize] == 0 || parent_arc[v] != u32::MAX || v == source {
                        continue;
                    }
                    parent_arc[v] = a;
                    if v == sink {
                        found = true;
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
            }
            if !found {
                return total;
            }
            let mut bottleneck = u32::MAX;
            let mut v = sink;
            while v != source {
                let a = parent_arc[v] as usize;
                bottleneck = bottleneck.min(self.cap[a]);
                v = self.to[a ^ 1] as usize;
            }
            let mut v = sink;
            while v != source {
                let a = parent_arc[v] as usize;
                self.cap[a] -= bottleneck;
                self.cap[a ^ 1] += bottleneck;
                v = self.to[a ^ 1] as usize;
            }
            total += u64::from(bottleneck);
        }
    }

    fn residual_reachable(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.arcs.len()];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.arcs[u] {
                let v = self.to[a as usize] as usize;
                if self.cap[a as usize] > 0 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}
