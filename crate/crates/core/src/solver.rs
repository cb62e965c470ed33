//! Direct solves of sparse symmetric (possibly indefinite) systems.
//!
//! Saddle-point matrices have zero diagonal blocks, so a pivot-free `LDLᵀ`
//! can break down. General systems go through a supernodal LU with partial
//! pivoting followed by a few steps of iterative refinement; SPD blocks use a
//! sparse Cholesky factorization.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Side};

use crate::error::{FemError, Result};
use crate::sparse::{norm2, SparseMatrix};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Required relative residual `‖Ax − b‖ / ‖b‖`.
    pub tolerance: f64,
    pub max_refinement_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: DEFAULT_TOLERANCE, max_refinement_steps: 4 }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub relative_residual: f64,
    pub refinement_steps: usize,
    pub dimension: usize,
    pub nnz: usize,
}

fn to_faer(a: &SparseMatrix) -> Result<SparseColMat<usize, f64>> {
    let trip: Vec<_> = a.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    SparseColMat::try_new_from_triplets(a.nrows(), a.ncols(), &trip)
        .map_err(|e| FemError::DimensionMismatch(format!("{e:?}")))
}

fn check_square(a: &SparseMatrix, b: &[f64]) -> Result<()> {
    if a.nrows() != a.ncols() || b.len() != a.nrows() {
        return Err(FemError::DimensionMismatch(format!(
            "matrix {:?} with right-hand side of length {}",
            a.shape(),
            b.len()
        )));
    }
    Ok(())
}

fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

/// LU factorization with partial pivoting, reusable across right-hand sides.
pub struct LuFactor {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    n: usize,
}

impl LuFactor {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(FemError::DimensionMismatch(format!("LU of non-square {:?}", a.shape())));
        }
        let lu = to_faer(a)?
            .sp_lu()
            .map_err(|e| FemError::Singular(format!("LU factorization failed: {e:?}")))?;
        Ok(Self { lu, n: a.nrows() })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Col::from_fn(self.n, |i| b[i]);
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| x[i]).collect()
    }
}

/// Solves `A x = b` to [`DEFAULT_TOLERANCE`].
pub fn solve(a: &SparseMatrix, b: &[f64]) -> Result<SolveReport> {
    solve_with(a, b, SolverOptions::default())
}

pub fn solve_with(a: &SparseMatrix, b: &[f64], opts: SolverOptions) -> Result<SolveReport> {
    check_square(a, b)?;
    let n = a.nrows();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(SolveReport {
            solution: vec![0.0; n],
            relative_residual: 0.0,
            refinement_steps: 0,
            dimension: n,
            nnz: a.nnz(),
        });
    }
    let lu = LuFactor::new(a)?;
    let mut x = lu.solve(b);
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(FemError::Singular(format!("non-finite solution entry at index {i}")));
    }
    let mut r = residual(a, &x, b);
    let mut rel = norm2(&r) / bnorm;
    let mut steps = 0;
    while rel > 0.1 * opts.tolerance && steps < opts.max_refinement_steps {
        let dx = lu.solve(&r);
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let r_new = residual(a, &candidate, b);
        let rel_new = norm2(&r_new) / bnorm;
        steps += 1;
        if !(rel_new < rel) {
            break;
        }
        x = candidate;
        r = r_new;
        rel = rel_new;
    }
    if !(rel <= opts.tolerance) {
        return Err(FemError::ToleranceNotReached { achieved: rel, tolerance: opts.tolerance });
    }
    Ok(SolveReport { solution: x, relative_residual: rel, refinement_steps: steps, dimension: n, nnz: a.nnz() })
}

/// Sparse Cholesky factorization of a symmetric positive definite matrix.
pub struct SpdFactor {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
    n: usize,
}

impl SpdFactor {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(FemError::DimensionMismatch(format!("Cholesky of non-square {:?}", a.shape())));
        }
        let llt = to_faer(a)?
            .sp_cholesky(Side::Lower)
            .map_err(|e| FemError::Singular(format!("Cholesky factorization failed: {e:?}")))?;
        Ok(Self { llt, n: a.nrows() })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Col::from_fn(self.n, |i| b[i]);
        let x = self.llt.solve(&rhs);
        (0..self.n).map(|i| x[i]).collect()
    }
}
