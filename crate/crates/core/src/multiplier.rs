//! Discrete Lagrange multiplier spaces.
//!
//! A multiplier basis function is a combination of basis functions of the
//! full space `S_h^k`; the combination matrix `R` has one row per multiplier
//! and one column per full-space node. For simply supported conditions the
//! multipliers are the interior basis functions (`R` is a selection). For
//! clamped conditions every boundary basis function `φ_n` is redistributed
//! onto the interior basis functions of a nearby internal triangle `T`:
//!
//! ```text
//! φ̃_{T,i} = φ_{T,i} + α_{T,i} φ_n,   α_{T,i} = φ_{T,i}(x_n),
//! ```
//!
//! where `φ_{T,i}` is the local Lagrange polynomial of `T` extended to the
//! whole plane. Since the extended polynomials sum to one, so do the `α`, and
//! the constant function stays in the span.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{FemError, Result};
use crate::lagrange::{FeSpace, ShapeValues};
use crate::mesh::Mesh;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BcKind {
    SimplySupported,
    Clamped,
}

impl fmt::Display for BcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BcKind::SimplySupported => "simply-supported",
            BcKind::Clamped => "clamped",
        })
    }
}

impl FromStr for BcKind {
    type Err = FemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simply-supported" | "ss" => Ok(BcKind::SimplySupported),
            "clamped" | "cl" => Ok(BcKind::Clamped),
            other => Err(FemError::InvalidConfig(format!("unknown boundary condition `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MultiplierSpace {
    full: FeSpace,
    bc: BcKind,
    combination: SparseMatrix,
    /// `(boundary node, internal triangle)` pairs used by the redistribution.
    designated: Vec<(usize, usize)>,
}

impl MultiplierSpace {
    pub fn build(mesh: Arc<Mesh>, k: usize, bc: BcKind) -> Result<Self> {
        let full = FeSpace::new(mesh, k, false)?;
        let interior = full.interior_nodes();
        let mut row_of_node = vec![None; full.num_nodes()];
        for (r, &node) in interior.iter().enumerate() {
            row_of_node[node] = Some(r);
        }
        let mut trip: Vec<(usize, usize, f64)> =
            interior.iter().enumerate().map(|(r, &node)| (r, node, 1.0)).collect();
        let mut designated = Vec::new();

        if bc == BcKind::Clamped {
            let mesh = full.mesh().clone();
            let internal = mesh.internal_triangles();
            if internal.is_empty() {
                return Err(FemError::NoInternalTriangle(mesh.n()));
            }
            let centroids: Vec<_> = internal.iter().map(|&t| mesh.centroid(t)).collect();
            for node in (0..full.num_nodes()).filter(|&i| full.is_boundary_node(i)) {
                let x = full.nodes()[node];
                let t = closest_triangle(x, &internal, &centroids);
                let map = mesh.affine_map(t);
                let shapes = ShapeValues::at(k, map.to_reference(x));
                for (l, &tn) in full.cell_nodes(t).iter().enumerate() {
                    let r = row_of_node[tn].expect("internal triangles have only interior nodes");
                    trip.push((r, node, shapes.values[l]));
                }
                designated.push((node, t));
            }
        }

        let combination = SparseMatrix::from_triplets(interior.len(), full.num_nodes(), trip);
        Ok(Self { full, bc, combination, designated })
    }

    pub fn bc(&self) -> BcKind {
        self.bc
    }

    pub fn degree(&self) -> usize {
        self.full.degree()
    }

    /// Number of multiplier basis functions, equal to `dim S_{h,0}^k`.
    pub fn dim(&self) -> usize {
        self.combination.nrows()
    }

    /// The underlying full space `S_h^k`.
    pub fn full_space(&self) -> &FeSpace {
        &self.full
    }

    pub fn combination(&self) -> &SparseMatrix {
        &self.combination
    }

    pub fn designated_triangles(&self) -> &[(usize, usize)] {
        &self.designated
    }

    /// Full-space coefficients `Rᵀ c` of the multiplier function with
    /// coefficients `c`.
    pub fn to_full_coefficients(&self, coeffs: &[f64]) -> Vec<f64> {
        self.combination.mul_vec_transposed(coeffs)
    }

    /// Rows of `R · A` for a matrix `A` whose rows index the full space.
    pub fn restrict_rows(&self, full: &SparseMatrix) -> Result<SparseMatrix> {
        self.combination.matmul(full)
    }
}

/// Nearest internal triangle by centroid distance; ties go to the lowest
/// triangle index.
fn closest_triangle(x: [f64; 2], internal: &[usize], centroids: &[[f64; 2]]) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for (&t, c) in internal.iter().zip(centroids) {
        let d = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
        if d < best.0 || (d == best.0 && t < best.1) {
            best = (d, t);
        }
    }
    best.1
}

/// `left · full · rightᵀ`: entry `(i, j) = Σ_{p,q} L[i,p] A[p,q] R[j,q]`.
pub fn restrict_matrix(full: &SparseMatrix, left: &SparseMatrix, right: &SparseMatrix) -> Result<SparseMatrix> {
    if left.ncols() != full.nrows() || right.ncols() != full.ncols() {
        return Err(FemError::DimensionMismatch(format!(
            "restricting {:?} with left {:?} and right {:?}",
            full.shape(),
            left.shape(),
            right.shape()
        )));
    }
    left.matmul(full)?.matmul(&right.transpose())
}
