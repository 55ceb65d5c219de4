use crate::error::{Error, Result};

pub const MIN_LEVEL: u32 = 1;
pub const MAX_LEVEL: u32 = 8;

/// Uniform triangulation of the unit square with mesh size `h = 2^{-m}`.
///
/// Nodes are numbered row-major (`k·(N+1) + i` for `x = (i h, k h)`);
/// each grid square contributes two counter-clockwise triangles split
/// along its SW-NE diagonal, lower-right first.
#[derive(Debug, Clone)]
pub struct TriMesh {
    level: u32,
    nodes: Vec<[f64; 2]>,
    elements: Vec<[usize; 3]>,
    boundary: Vec<bool>,
}

impl TriMesh {
    pub fn new(level: u32) -> Result<Self> {
        if !(MIN_LEVEL..=MAX_LEVEL).contains(&level) {
            return Err(Error::InvalidParameter(format!(
                "mesh level must be in {MIN_LEVEL}..={MAX_LEVEL}, got {level}"
            )));
        }
        let cells = 1usize << level;
        let side = cells + 1;
        let h = 1.0 / cells as f64;
        let mut nodes = Vec::with_capacity(side * side);
        let mut boundary = Vec::with_capacity(side * side);
        for k in 0..side {
            for i in 0..side {
                nodes.push([i as f64 * h, k as f64 * h]);
                boundary.push(i == 0 || k == 0 || i == cells || k == cells);
            }
        }
        let mut elements = Vec::with_capacity(2 * cells * cells);
        for k in 0..cells {
            for i in 0..cells {
                let sw = k * side + i;
                let se = sw + 1;
                let nw = sw + side;
                let ne = nw + 1;
                elements.push([sw, se, ne]);
                elements.push([sw, ne, nw]);
            }
        }
        Ok(Self {
            level,
            nodes,
            elements,
            boundary,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn h(&self) -> f64 {
        1.0 / (1u64 << self.level) as f64
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn vertices(&self, e: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.elements[e];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    /// Signed area (positive for counter-clockwise vertex order).
    pub fn area(&self, e: usize) -> f64 {
        let [p0, p1, p2] = self.vertices(e);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn centroid(&self, e: usize) -> [f64; 2] {
        let [p0, p1, p2] = self.vertices(e);
        [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0]
    }

    pub fn centroids(&self) -> Vec<[f64; 2]> {
        (0..self.num_elements()).map(|e| self.centroid(e)).collect()
    }

    /// Constant gradients of the three barycentric basis functions.
    pub fn gradients(&self, e: usize) -> [[f64; 2]; 3] {
        let [p0, p1, p2] = self.vertices(e);
        let twice_area = 2.0 * self.area(e);
        [
            [(p1[1] - p2[1]) / twice_area, (p2[0] - p1[0]) / twice_area],
            [(p2[1] - p0[1]) / twice_area, (p0[0] - p2[0]) / twice_area],
            [(p0[1] - p1[1]) / twice_area, (p1[0] - p0[0]) / twice_area],
        ]
    }

    /// Unit-coefficient P1 element stiffness `|K| ∇φ_a·∇φ_b`.
    pub fn local_stiffness(&self, e: usize) -> [[f64; 3]; 3] {
        let g = self.gradients(e);
        let area = self.area(e);
        let mut k = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                k[a][b] = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
            }
        }
        k
    }

    /// Consistent P1 element mass `|K|/12 · (1 + δ_ab)`.
    pub fn local_mass(&self, e: usize) -> [[f64; 3]; 3] {
        let area = self.area(e);
        let mut m = [[area / 12.0; 3]; 3];
        for (a, row) in m.iter_mut().enumerate() {
            row[a] = area / 6.0;
        }
        m
    }
}
