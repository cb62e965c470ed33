//! Block saddle-point systems of the mixed formulation.
//!
//! Unknowns are `u`, `φ ≈ Δu` and a multiplier `λ ≈ Δ²u`, coupled through
//!
//! ```text
//! a(φ, ψ)         = ∫ ∇φ·∇ψ
//! b((v, ψ), μ)    = ∫ ψ μ + ∫ ∇v·∇μ
//! ```
//!
//! and the stationarity conditions of `½ a_h(φ, φ) − ∫ f u + b((u, φ), λ)`.
//!
//! Simply supported conditions use `u, φ, λ ∈ S_{h,0}^k` and the system
//!
//! ```text
//! [ 0    0    B_uᵀ ] [u]   [F]
//! [ 0    C    B_φᵀ ] [φ] = [0]
//! [ B_u  B_φ  0    ] [λ]   [0]
//! ```
//!
//! Clamped conditions (k = 1) take `u ∈ S_{h,0}^2`, `φ ∈ S_{h,0}^1`, the
//! redistributed multiplier space, and the stabilized form
//! `a_h = ∫ ∇φ·∇ψ + ∫ (φ − Δ_h u)(ψ − Δ_h v)`. Rather than forming the dense
//! operator `Δ_h`, the field `z = Δ_h u` is kept as an unknown together with
//! a multiplier `p` for its defining equation `M z + K₂ u = 0`:
//!
//! ```text
//! [ 0    0       0    B_uᵀ  K₂ ] [u]   [F]
//! [ 0    C + M₁  −G   B_φᵀ  0  ] [φ]   [0]
//! [ 0    −Gᵀ     M    0     M  ] [z] = [0]
//! [ B_u  B_φ     0    0     0  ] [λ]   [0]
//! [ K₂   0       M    0     0  ] [p]   [0]
//! ```
//!
//! Eliminating `z` and `p` gives back the three-field system with `a_h`.

use std::io::{self, Write};
use std::sync::Arc;

use crate::assembly::{assemble_load, mass, stiffness, LoadRule};
use crate::error::{FemError, Result};
use crate::lagrange::FeSpace;
use crate::mesh::{Mesh, Point};
use crate::multiplier::{BcKind, MultiplierSpace};
use crate::quadrature::QuadratureRule;
use crate::solver::{solve_with, SolveReport, SolverOptions};
use crate::sparse::{norm2, SparseMatrix};

/// Names and sizes of the unknown blocks, in system order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    names: Vec<&'static str>,
    sizes: Vec<usize>,
}

impl BlockLayout {
    fn new(blocks: &[(&'static str, usize)]) -> Self {
        Self { names: blocks.iter().map(|b| b.0).collect(), sizes: blocks.iter().map(|b| b.1).collect() }
    }

    pub fn names(&self) -> &[&'static str] {
        &self.names
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Index range of the named block.
    pub fn range(&self, name: &str) -> Option<std::ops::Range<usize>> {
        let i = self.names.iter().position(|&n| n == name)?;
        let start: usize = self.sizes[..i].iter().sum();
        Some(start..start + self.sizes[i])
    }
}

pub struct BlockSystem {
    bc: BcKind,
    degree: usize,
    layout: BlockLayout,
    matrix: SparseMatrix,
    rhs: Vec<f64>,
    u_space: FeSpace,
    phi_space: FeSpace,
    multiplier: MultiplierSpace,
    b_u: SparseMatrix,
    b_phi: SparseMatrix,
}

/// Coefficient vectors of a solved system.
#[derive(Debug, Clone)]
pub struct MixedSolution {
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    /// Coefficients in the multiplier basis.
    pub lambda: Vec<f64>,
    /// `λ_h` expanded in the nodal basis of the full space `S_h^k`.
    pub lambda_full: Vec<f64>,
    /// `Δ_h u_h` (clamped only).
    pub z: Option<Vec<f64>>,
    pub report: SolveReport,
}

impl BlockSystem {
    pub fn build<F>(mesh: Arc<Mesh>, k: usize, bc: BcKind, f: F, q: &QuadratureRule, load: LoadRule) -> Result<Self>
    where
        F: Fn(Point) -> f64,
    {
        match bc {
            BcKind::SimplySupported => build_simply_supported(mesh, k, f, q, load),
            BcKind::Clamped => build_clamped(mesh, k, f, q, load),
        }
    }

    pub fn bc(&self) -> BcKind {
        self.bc
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn u_space(&self) -> &FeSpace {
        &self.u_space
    }

    pub fn phi_space(&self) -> &FeSpace {
        &self.phi_space
    }

    pub fn multiplier(&self) -> &MultiplierSpace {
        &self.multiplier
    }

    /// The constraint blocks `(B_u, B_φ)`.
    pub fn constraint_blocks(&self) -> (&SparseMatrix, &SparseMatrix) {
        (&self.b_u, &self.b_phi)
    }

    pub fn solve(&self, opts: SolverOptions) -> Result<MixedSolution> {
        let report = solve_with(&self.matrix, &self.rhs, opts)?;
        let x = &report.solution;
        let block = |name: &str| self.layout.range(name).map(|r| x[r].to_vec());
        let lambda = block("lambda").expect("every layout has a multiplier block");
        Ok(MixedSolution {
            u: block("u").expect("every layout has u"),
            phi: block("phi").expect("every layout has phi"),
            lambda_full: self.multiplier.to_full_coefficients(&lambda),
            lambda,
            z: block("z"),
            report,
        })
    }

    /// `‖B_u u + B_φ φ‖ / (‖u‖ + ‖φ‖)`: how well the discrete constraint
    /// `b((u, φ), μ) = 0` holds.
    pub fn constraint_residual(&self, sol: &MixedSolution) -> f64 {
        let bu = self.b_u.mul_vec(&sol.u);
        let bp = self.b_phi.mul_vec(&sol.phi);
        let r: Vec<f64> = bu.iter().zip(&bp).map(|(a, b)| a + b).collect();
        let scale = norm2(&sol.u) + norm2(&sol.phi);
        if scale == 0.0 {
            norm2(&r)
        } else {
            norm2(&r) / scale
        }
    }

    /// Writes the matrix in coordinate format.
    pub fn write_matrix<W: Write>(&self, w: W) -> io::Result<()> {
        self.matrix.write_coordinate(w)
    }

    /// Writes the right-hand side, one value per line.
    pub fn write_rhs<W: Write>(&self, mut w: W) -> io::Result<()> {
        for v in &self.rhs {
            writeln!(w, "{v:.17e}")?;
        }
        Ok(())
    }
}

fn constraint_blocks(
    multiplier: &MultiplierSpace,
    u_space: &FeSpace,
    phi_space: &FeSpace,
) -> Result<(SparseMatrix, SparseMatrix)> {
    let full = multiplier.full_space();
    let b_u = multiplier.restrict_rows(&stiffness(u_space, full)?)?;
    let b_phi = multiplier.restrict_rows(&mass(phi_space, full)?)?;
    Ok((b_u, b_phi))
}

pub fn build_simply_supported<F>(
    mesh: Arc<Mesh>,
    k: usize,
    f: F,
    q: &QuadratureRule,
    load: LoadRule,
) -> Result<BlockSystem>
where
    F: Fn(Point) -> f64,
{
    let space = FeSpace::new(mesh.clone(), k, true)?;
    let multiplier = MultiplierSpace::build(mesh, k, BcKind::SimplySupported)?;
    let (b_u, b_phi) = constraint_blocks(&multiplier, &space, &space)?;
    let c = stiffness(&space, &space)?;
    let d = space.ndofs();
    let (b_ut, b_phit) = (b_u.transpose(), b_phi.transpose());
    let matrix = SparseMatrix::from_blocks(
        &[d; 3],
        &[d; 3],
        &[
            vec![None, None, Some(&b_ut)],
            vec![None, Some(&c), Some(&b_phit)],
            vec![Some(&b_u), Some(&b_phi), None],
        ],
    )?;
    let mut rhs = assemble_load(&space, f, q, load)?;
    rhs.resize(3 * d, 0.0);
    Ok(BlockSystem {
        bc: BcKind::SimplySupported,
        degree: k,
        layout: BlockLayout::new(&[("u", d), ("phi", d), ("lambda", d)]),
        matrix,
        rhs,
        u_space: space.clone(),
        phi_space: space,
        multiplier,
        b_u,
        b_phi,
    })
}

/// Clamped system; only `k = 1` is supported since `u` lives in degree
/// `k + 1`.
pub fn build_clamped<F>(mesh: Arc<Mesh>, k: usize, f: F, q: &QuadratureRule, load: LoadRule) -> Result<BlockSystem>
where
    F: Fn(Point) -> f64,
{
    if k != 1 {
        return Err(FemError::UnsupportedDegree(k));
    }
    let u_space = FeSpace::new(mesh.clone(), 2, true)?;
    let phi_space = FeSpace::new(mesh.clone(), 1, true)?;
    let multiplier = MultiplierSpace::build(mesh, 1, BcKind::Clamped)?;
    let (b_u, b_phi) = constraint_blocks(&multiplier, &u_space, &phi_space)?;

    let k2 = stiffness(&u_space, &u_space)?;
    let m2 = mass(&u_space, &u_space)?;
    let cm = stiffness(&phi_space, &phi_space)?.add(&mass(&phi_space, &phi_space)?)?;
    let g = mass(&u_space, &phi_space)?.scale(-1.0);
    let gt = g.transpose();
    let (b_ut, b_phit) = (b_u.transpose(), b_phi.transpose());
    let (d1, d0) = (u_space.ndofs(), phi_space.ndofs());
    let sizes = [d1, d0, d1, d0, d1];
    let matrix = SparseMatrix::from_blocks(
        &sizes,
        &sizes,
        &[
            vec![None, None, None, Some(&b_ut), Some(&k2)],
            vec![None, Some(&cm), Some(&g), Some(&b_phit), None],
            vec![None, Some(&gt), Some(&m2), None, Some(&m2)],
            vec![Some(&b_u), Some(&b_phi), None, None, None],
            vec![Some(&k2), None, Some(&m2), None, None],
        ],
    )?;
    let mut rhs = assemble_load(&u_space, f, q, load)?;
    rhs.resize(sizes.iter().sum(), 0.0);
    Ok(BlockSystem {
        bc: BcKind::Clamped,
        degree: k,
        layout: BlockLayout::new(&[("u", d1), ("phi", d0), ("z", d1), ("lambda", d0), ("p", d1)]),
        matrix,
        rhs,
        u_space,
        phi_space,
        multiplier,
        b_u,
        b_phi,
    })
}
