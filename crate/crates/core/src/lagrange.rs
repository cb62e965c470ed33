//! Continuous Lagrange spaces `S_h^k` (k = 1, 2) and their zero-trace
//! subspaces `S_{h,0}^k`.
//!
//! Nodes of the degree-`k` space sit on the uniform grid of spacing
//! `1 / (k n)` and are numbered lexicographically by `(y, x)`. In a
//! homogeneous space only interior nodes carry degrees of freedom; they keep
//! the relative order of the full numbering.

use std::sync::Arc;

use crate::error::{FemError, Result};
use crate::mesh::{AffineMap, Mesh, Point};
use crate::quadrature::QuadratureRule;

/// Largest local basis (quadratic triangle).
pub const MAX_LOCAL: usize = 6;

pub fn local_dimension(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

fn check_degree(k: usize) -> Result<()> {
    if k == 1 || k == 2 {
        Ok(())
    } else {
        Err(FemError::UnsupportedDegree(k))
    }
}

/// Shape function values and reference gradients at one reference point.
///
/// Local order: the three vertices, then for `k = 2` the midpoints of edges
/// (0,1), (1,2), (2,0). The polynomials are valid anywhere in the plane, which
/// the clamped multiplier construction relies on.
#[derive(Debug, Clone, Copy)]
pub struct ShapeValues {
    pub len: usize,
    pub values: [f64; MAX_LOCAL],
    pub grads: [[f64; 2]; MAX_LOCAL],
}

impl ShapeValues {
    pub fn at(k: usize, [xi, eta]: Point) -> Self {
        let l = [1.0 - xi - eta, xi, eta];
        let dl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        let mut values = [0.0; MAX_LOCAL];
        let mut grads = [[0.0; 2]; MAX_LOCAL];
        match k {
            1 => {
                values[..3].copy_from_slice(&l);
                grads[..3].copy_from_slice(&dl);
            }
            2 => {
                for i in 0..3 {
                    values[i] = l[i] * (2.0 * l[i] - 1.0);
                    let s = 4.0 * l[i] - 1.0;
                    grads[i] = [s * dl[i][0], s * dl[i][1]];
                }
                for (e, (a, b)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
                    values[3 + e] = 4.0 * l[a] * l[b];
                    grads[3 + e] = [
                        4.0 * (dl[a][0] * l[b] + l[a] * dl[b][0]),
                        4.0 * (dl[a][1] * l[b] + l[a] * dl[b][1]),
                    ];
                }
            }
            _ => panic!("unsupported degree {k}"),
        }
        Self { len: local_dimension(k), values, grads }
    }
}

/// Values and reference gradients of the degree-`k` shape functions at `p`.
pub fn eval_reference_basis(k: usize, p: Point) -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
    check_degree(k)?;
    let s = ShapeValues::at(k, p);
    Ok((s.values[..s.len].to_vec(), s.grads[..s.len].to_vec()))
}

/// Shape functions tabulated at the points of a quadrature rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub shapes: Vec<ShapeValues>,
}

impl Tabulation {
    pub fn new(k: usize, q: &QuadratureRule) -> Self {
        Self {
            shapes: q.points().iter().map(|&p| ShapeValues::at(k, p)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    degree: usize,
    homogeneous: bool,
    nodes: Vec<Point>,
    node_boundary: Vec<bool>,
    /// Full node indices per triangle, `local_dimension(degree)` each.
    cell_nodes: Vec<usize>,
    dof_of_node: Vec<Option<usize>>,
    node_of_dof: Vec<usize>,
}

impl FeSpace {
    /// `S_h^k` when `homogeneous` is false, `S_{h,0}^k` otherwise.
    pub fn new(mesh: Arc<Mesh>, degree: usize, homogeneous: bool) -> Result<Self> {
        check_degree(degree)?;
        let n = mesh.n();
        let side = degree * n + 1;
        let spacing = 1.0 / (degree * n) as f64;
        let mut nodes = Vec::with_capacity(side * side);
        let mut node_boundary = Vec::with_capacity(side * side);
        for b in 0..side {
            for a in 0..side {
                nodes.push([a as f64 * spacing, b as f64 * spacing]);
                node_boundary.push(a == 0 || b == 0 || a == side - 1 || b == side - 1);
            }
        }

        let nl = local_dimension(degree);
        let mut cell_nodes = Vec::with_capacity(mesh.num_triangles() * nl);
        for tri in mesh.triangles() {
            // Doubled grid coordinates keep edge midpoints integral.
            let g: Vec<(usize, usize)> = tri
                .iter()
                .map(|&v| {
                    let (i, j) = mesh.vertex_grid(v);
                    (2 * degree * i, 2 * degree * j)
                })
                .collect();
            let id = |(a2, b2): (usize, usize)| (b2 / 2) * side + a2 / 2;
            for &p in &g {
                cell_nodes.push(id(p));
            }
            if degree == 2 {
                for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                    cell_nodes.push(id(((g[a].0 + g[b].0) / 2, (g[a].1 + g[b].1) / 2)));
                }
            }
        }

        let mut dof_of_node = vec![None; nodes.len()];
        let mut node_of_dof = Vec::new();
        for (i, &on_bnd) in node_boundary.iter().enumerate() {
            if !(homogeneous && on_bnd) {
                dof_of_node[i] = Some(node_of_dof.len());
                node_of_dof.push(i);
            }
        }

        Ok(Self {
            mesh,
            degree,
            homogeneous,
            nodes,
            node_boundary,
            cell_nodes,
            dof_of_node,
            node_of_dof,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn local_dimension(&self) -> usize {
        local_dimension(self.degree)
    }

    /// Number of degrees of freedom (interior nodes only when homogeneous).
    pub fn ndofs(&self) -> usize {
        self.node_of_dof.len()
    }

    /// Number of nodes of the full space `S_h^k`.
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.node_boundary[node]
    }

    /// Full node indices of triangle `t` in local order.
    pub fn cell_nodes(&self, t: usize) -> &[usize] {
        let nl = self.local_dimension();
        &self.cell_nodes[t * nl..(t + 1) * nl]
    }

    pub fn dof_of_node(&self, node: usize) -> Option<usize> {
        self.dof_of_node[node]
    }

    pub fn node_of_dof(&self, dof: usize) -> usize {
        self.node_of_dof[dof]
    }

    pub fn dof_coordinates(&self, dof: usize) -> Point {
        self.nodes[self.node_of_dof[dof]]
    }

    /// Node indices of all interior (non-boundary) nodes, ascending.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| !self.node_boundary[i]).collect()
    }

    /// Local-to-global DOF map of triangle `t`; `None` marks constrained nodes.
    pub fn cell_dofs(&self, t: usize) -> [Option<usize>; MAX_LOCAL] {
        let mut out = [None; MAX_LOCAL];
        for (o, &node) in out.iter_mut().zip(self.cell_nodes(t)) {
            *o = self.dof_of_node[node];
        }
        out
    }

    pub fn same_mesh(&self, other: &FeSpace) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || self.mesh.n() == other.mesh.n()
    }

    /// Nodal interpolant of `g`. Boundary values are dropped for homogeneous
    /// spaces.
    pub fn interpolate<F: Fn(Point) -> f64>(&self, g: F) -> Vec<f64> {
        self.node_of_dof.iter().map(|&i| g(self.nodes[i])).collect()
    }

    /// Expands DOF coefficients to one value per node (zero on constrained
    /// boundary nodes).
    pub fn to_nodal(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.nodes.len()];
        for (&node, &c) in self.node_of_dof.iter().zip(coeffs) {
            full[node] = c;
        }
        full
    }

    /// Coefficients of triangle `t` in local order.
    pub fn local_coefficients(&self, t: usize, coeffs: &[f64]) -> [f64; MAX_LOCAL] {
        let mut out = [0.0; MAX_LOCAL];
        for (o, d) in out.iter_mut().zip(self.cell_dofs(t)) {
            if let Some(d) = d {
                *o = coeffs[d];
            }
        }
        out
    }

    /// Value and gradient of the FE function with the given coefficients.
    pub fn eval(&self, coeffs: &[f64], p: Point) -> Result<(f64, [f64; 2])> {
        if coeffs.len() != self.ndofs() {
            return Err(FemError::DimensionMismatch(format!(
                "{} coefficients for a space with {} dofs",
                coeffs.len(),
                self.ndofs()
            )));
        }
        let (t, xi) = self.mesh.locate(p)?;
        let local = self.local_coefficients(t, coeffs);
        Ok(eval_local(&self.mesh.affine_map(t), &ShapeValues::at(self.degree, xi), &local))
    }
}

/// Value and physical gradient of `Σ local[i] φ_i` given tabulated shapes.
pub fn eval_local(map: &AffineMap, s: &ShapeValues, local: &[f64; MAX_LOCAL]) -> (f64, [f64; 2]) {
    let mut v = 0.0;
    let mut g = [0.0; 2];
    for i in 0..s.len {
        v += local[i] * s.values[i];
        g[0] += local[i] * s.grads[i][0];
        g[1] += local[i] * s.grads[i][1];
    }
    (v, map.push_gradient(g))
}

/// Free-function form of [`FeSpace::new`].
pub fn build_space(mesh: Arc<Mesh>, k: usize, homogeneous: bool) -> Result<FeSpace> {
    FeSpace::new(mesh, k, homogeneous)
}

/// Free-function form of [`FeSpace::eval`].
pub fn eval_fe_function(s: &FeSpace, coeffs: &[f64], p: Point) -> Result<(f64, [f64; 2])> {
    s.eval(coeffs, p)
}
