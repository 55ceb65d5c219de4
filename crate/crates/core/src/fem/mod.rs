//! Conforming P1 finite elements for `-∇·(a∇u) = f` on the unit square
//! with homogeneous Dirichlet data.
//!
//! The diffusion coefficient enters through one value per element (the
//! centroid value); boundary nodes are eliminated, so the stiffness matrix
//! only couples interior nodes. Load vectors use the edge-midpoint rule,
//! exact for quadratic integrands.

mod mesh;
mod sparse;
mod verify;

pub use mesh::{TriMesh, MAX_LEVEL, MIN_LEVEL};
pub use sparse::{pcg, CsrMatrix, SolveStats, SolverOptions};
pub use verify::{manufactured_h1_errors, ManufacturedError};

use crate::error::{Error, Result};

const NO_SLOT: usize = usize::MAX;

/// Nodal values of a P1 function over every mesh node.
#[derive(Debug, Clone, PartialEq)]
pub struct FemFunction {
    pub values: Vec<f64>,
}

impl FemFunction {
    pub fn zeros(num_nodes: usize) -> Self {
        Self {
            values: vec![0.0; num_nodes],
        }
    }

    pub fn interpolate(mesh: &TriMesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self {
            values: mesh.nodes().iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn sub(&self, other: &FemFunction) -> FemFunction {
        FemFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> FemFunction {
        FemFunction {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

/// Dirichlet-reduced linear system over the interior nodes.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub stiffness: CsrMatrix,
    pub load: Vec<f64>,
}

/// A mesh plus everything about it that does not depend on the
/// coefficient: sparsity patterns, scatter maps, the unit-coefficient
/// stiffness and the mass matrix over all nodes.
#[derive(Debug, Clone)]
pub struct FemSpace {
    mesh: TriMesh,
    interior_index: Vec<Option<usize>>,
    interior_nodes: Vec<usize>,
    local_unit: Vec<[[f64; 3]; 3]>,
    interior_template: CsrMatrix,
    // per element, CSR slot of each local (a, b) pair, NO_SLOT if a boundary node is involved
    interior_slots: Vec<[usize; 9]>,
    unit_stiffness_full: CsrMatrix,
    mass_full: CsrMatrix,
}

fn pattern(mesh: &TriMesh, index: &dyn Fn(usize) -> Option<usize>, size: usize) -> CsrMatrix {
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); size];
    for tri in mesh.elements() {
        for &a in tri {
            for &b in tri {
                if let (Some(i), Some(j)) = (index(a), index(b)) {
                    rows[i].push(j);
                }
            }
        }
    }
    for r in &mut rows {
        r.sort_unstable();
        r.dedup();
    }
    CsrMatrix::from_pattern(&rows)
}

impl FemSpace {
    pub fn new(level: u32) -> Result<Self> {
        Ok(Self::from_mesh(TriMesh::new(level)?))
    }

    pub fn from_mesh(mesh: TriMesh) -> Self {
        let mut interior_index = vec![None; mesh.num_nodes()];
        let mut interior_nodes = Vec::new();
        for (node, slot) in interior_index.iter_mut().enumerate() {
            if !mesh.is_boundary(node) {
                *slot = Some(interior_nodes.len());
                interior_nodes.push(node);
            }
        }
        let local_unit: Vec<_> = (0..mesh.num_elements()).map(|e| mesh.local_stiffness(e)).collect();

        let interior_template = pattern(&mesh, &|n| interior_index[n], interior_nodes.len());
        let interior_slots = mesh
            .elements()
            .iter()
            .map(|tri| {
                let mut slots = [NO_SLOT; 9];
                for a in 0..3 {
                    for b in 0..3 {
                        if let (Some(i), Some(j)) = (interior_index[tri[a]], interior_index[tri[b]]) {
                            slots[3 * a + b] = interior_template.position(i, j).expect("in pattern");
                        }
                    }
                }
                slots
            })
            .collect();

        let n = mesh.num_nodes();
        let mut unit_stiffness_full = pattern(&mesh, &Some, n);
        let mut mass_full = unit_stiffness_full.clone();
        for (e, tri) in mesh.elements().iter().enumerate() {
            let m = mesh.local_mass(e);
            for a in 0..3 {
                for b in 0..3 {
                    let k = unit_stiffness_full.position(tri[a], tri[b]).expect("in pattern");
                    unit_stiffness_full.values_mut()[k] += local_unit[e][a][b];
                    mass_full.values_mut()[k] += m[a][b];
                }
            }
        }

        Self {
            mesh,
            interior_index,
            interior_nodes,
            local_unit,
            interior_template,
            interior_slots,
            unit_stiffness_full,
            mass_full,
        }
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn num_unknowns(&self) -> usize {
        self.interior_nodes.len()
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    /// Unit-coefficient stiffness over all nodes (before elimination).
    pub fn unit_stiffness_full(&self) -> &CsrMatrix {
        &self.unit_stiffness_full
    }

    pub fn mass_full(&self) -> &CsrMatrix {
        &self.mass_full
    }

    /// Interior stiffness from one coefficient value per element.
    pub fn stiffness_from_element_coeffs(&self, coeffs: &[f64]) -> CsrMatrix {
        let mut a = self.interior_template.clone();
        self.fill_stiffness(coeffs, &mut a);
        a
    }

    /// Overwrites `out` (which must come from this space) with the
    /// stiffness for the given element coefficients.
    pub fn fill_stiffness(&self, coeffs: &[f64], out: &mut CsrMatrix) {
        assert_eq!(coeffs.len(), self.mesh.num_elements());
        let values = out.values_mut();
        values.iter_mut().for_each(|v| *v = 0.0);
        for ((slots, local), &c) in self.interior_slots.iter().zip(&self.local_unit).zip(coeffs) {
            for a in 0..3 {
                for b in 0..3 {
                    let k = slots[3 * a + b];
                    if k != NO_SLOT {
                        values[k] += c * local[a][b];
                    }
                }
            }
        }
    }

    /// Stiffness with the coefficient sampled at element centroids.
    pub fn assemble_stiffness(&self, coeff: impl Fn([f64; 2]) -> Result<f64>) -> Result<CsrMatrix> {
        let coeffs = self.element_coefficients(coeff)?;
        Ok(self.stiffness_from_element_coeffs(&coeffs))
    }

    pub fn element_coefficients(&self, coeff: impl Fn([f64; 2]) -> Result<f64>) -> Result<Vec<f64>> {
        (0..self.mesh.num_elements())
            .map(|e| {
                let x = self.mesh.centroid(e);
                let v = coeff(x)?;
                if v <= 0.0 {
                    return Err(Error::NonPositiveCoefficient {
                        value: v,
                        x1: x[0],
                        x2: x[1],
                    });
                }
                Ok(v)
            })
            .collect()
    }

    /// Load vector over all nodes by the edge-midpoint rule.
    pub fn assemble_load(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        let mut load = vec![0.0; self.mesh.num_nodes()];
        for (e, tri) in self.mesh.elements().iter().enumerate() {
            let [p0, p1, p2] = self.mesh.vertices(e);
            let mid = |p: [f64; 2], q: [f64; 2]| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            // midpoint opposite to local vertex 0, 1, 2
            let f_opp = [f(mid(p1, p2)), f(mid(p2, p0)), f(mid(p0, p1))];
            let w = self.mesh.area(e) / 3.0;
            for a in 0..3 {
                // φ_a is 1/2 at the two midpoints adjacent to vertex a
                let adjacent: f64 = (0..3).filter(|&m| m != a).map(|m| f_opp[m]).sum();
                load[tri[a]] += w * 0.5 * adjacent;
            }
        }
        load
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.interior_nodes.iter().map(|&n| full[n]).collect()
    }

    /// Embeds interior values into a nodal function with zero boundary.
    pub fn extend(&self, interior: &[f64]) -> FemFunction {
        let mut values = vec![0.0; self.mesh.num_nodes()];
        for (&node, &v) in self.interior_nodes.iter().zip(interior) {
            values[node] = v;
        }
        FemFunction { values }
    }

    pub fn system(&self, coeff: impl Fn([f64; 2]) -> Result<f64>, f: impl Fn([f64; 2]) -> f64) -> Result<FemSystem> {
        Ok(FemSystem {
            stiffness: self.assemble_stiffness(coeff)?,
            load: self.restrict(&self.assemble_load(f)),
        })
    }

    pub fn solve(&self, system: &FemSystem, opts: &SolverOptions) -> Result<FemFunction> {
        self.solve_with_stats(system, opts).map(|(u, _)| u)
    }

    pub fn solve_with_stats(&self, system: &FemSystem, opts: &SolverOptions) -> Result<(FemFunction, SolveStats)> {
        let (x, stats) = pcg(&system.stiffness, &system.load, opts)?;
        Ok((self.extend(&x), stats))
    }

    /// `|v|_{H¹} = sqrt(vᵀ A₁ v)`.
    pub fn h1_seminorm(&self, v: &FemFunction) -> f64 {
        self.unit_stiffness_full.quadratic_form(&v.values).max(0.0).sqrt()
    }

    /// `G_nl(v) = ∫ v² = vᵀ M v`.
    pub fn qoi_nl(&self, v: &FemFunction) -> f64 {
        self.mass_full.quadratic_form(&v.values)
    }

    pub fn interior_index(&self, node: usize) -> Option<usize> {
        self.interior_index[node]
    }
}
