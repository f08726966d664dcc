//! Unit-capacity pore network extracted from a binary image.

use crate::geometry::PoreImage;

/// Marker for grid pixels that hold no node.
pub const NO_NODE: u32 = u32::MAX;

/// Graph over void pixels: one node per void pixel, undirected
/// unit-capacity edges between 4-adjacent void pixels, including wrap
/// edges on the requested periodic axes.
#[derive(Debug, Clone)]
pub struct PoreGraph {
    width: usize,
    height: usize,
    pixel_length: f64,
    node_of: Vec<u32>,
    nodes: Vec<(u32, u32)>,
    edges: Vec<(u32, u32)>,
}

/// Builds the pore network. The periodic flags are explicit so transport
/// metrics can drop the wrap along their working axis; wrap edges that
/// would duplicate an in-cell edge (2-wide axes) or loop a pixel onto
/// itself (1-wide axes) are skipped, keeping the edge set simple.
pub fn build_graph(image: &PoreImage, periodic_x: bool, periodic_y: bool) -> PoreGraph {
    let (w, h) = (image.width(), image.height());
    let mut node_of = vec![NO_NODE; w * h];
    let mut nodes = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if image.is_void(x, y) {
                node_of[y * w + x] = nodes.len() as u32;
                nodes.push((x as u32, y as u32));
            }
        }
    }

    let mut edges = Vec::new();
    let mut connect = |a: usize, b: usize| {
        let (na, nb) = (node_of[a], node_of[b]);
        if na != NO_NODE && nb != NO_NODE {
            edges.push((na.min(nb), na.max(nb)));
        }
    };
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                connect(y * w + x, y * w + x + 1);
            }
            if y + 1 < h {
                connect(y * w + x, (y + 1) * w + x);
            }
        }
    }
    if periodic_x && w > 2 {
        for y in 0..h {
            connect(y * w + (w - 1), y * w);
        }
    }
    if periodic_y && h > 2 {
        for x in 0..w {
            connect((h - 1) * w + x, x);
        }
    }

    PoreGraph {
        width: w,
        height: h,
        pixel_length: image.pixel_length,
        node_of,
        nodes,
        edges,
    }
}

impl PoreGraph {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Node id at a pixel, or `None` over solid.
    pub fn node_id(&self, x: usize, y: usize) -> Option<u32> {
        match self.node_of[y * self.width + x] {
            NO_NODE => None,
            id => Some(id),
        }
    }

    /// Pixel coordinates of a node.
    pub fn node_pixel(&self, id: u32) -> (usize, usize) {
        let (x, y) = self.nodes[id as usize];
        (x as usize, y as usize)
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Void volume represented by one node.
    pub fn node_volume(&self) -> f64 {
        self.pixel_length * self.pixel_length
    }

    /// Adjacency lists over node ids.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        adj
    }
}

/// Number of connected components of the pore network.
pub fn connectivity(graph: &PoreGraph) -> usize {
    let adj = graph.adjacency();
    let mut seen = vec![false; graph.node_count()];
    let mut stack = Vec::new();
    let mut components = 0;
    for start in 0..graph.node_count() {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start as u32);
        while let Some(u) = stack.pop() {
            for &v in &adj[u as usize] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    stack.push(v);
                }
            }
        }
    }
    components
}
