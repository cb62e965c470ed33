//! Matrix and vector assembly for Lagrange spaces on a shared mesh.
//!
//! Matrices are laid out with test-space DOFs as rows and trial-space DOFs
//! as columns, so `mass(trial, test)[i][j] = ∫ φ_j^trial φ_i^test`.

use std::fmt;
use std::str::FromStr;

use crate::error::{FemError, Result};
use crate::lagrange::{FeSpace, Tabulation};
use crate::mesh::Point;
use crate::quadrature::QuadratureRule;
use crate::solver::SpdFactor;
use crate::sparse::{norm2, SparseMatrix};

#[derive(Clone, Copy)]
enum Form {
    Mass,
    Stiffness,
}

fn assemble(trial: &FeSpace, test: &FeSpace, form: Form) -> Result<SparseMatrix> {
    if !trial.same_mesh(test) {
        return Err(FemError::MeshMismatch);
    }
    let (kt, kv) = (trial.degree(), test.degree());
    let degree = match form {
        Form::Mass => kt + kv,
        Form::Stiffness => (kt + kv).saturating_sub(2).max(1),
    };
    let q = QuadratureRule::new(degree)?;
    let tab_trial = Tabulation::new(kt, &q);
    let tab_test = Tabulation::new(kv, &q);
    let (nt, nv) = (trial.local_dimension(), test.local_dimension());
    let mesh = trial.mesh();

    let mut trip = Vec::with_capacity(mesh.num_triangles() * nt * nv);
    let mut local = vec![0.0; nt * nv];
    for t in 0..mesh.num_triangles() {
        let map = mesh.affine_map(t);
        let jac = map.det.abs();
        local.iter_mut().for_each(|v| *v = 0.0);
        for (qp, &w) in q.weights().iter().enumerate() {
            let (st, sv) = (&tab_trial.shapes[qp], &tab_test.shapes[qp]);
            let wj = w * jac;
            match form {
                Form::Mass => {
                    for i in 0..nv {
                        for j in 0..nt {
                            local[i * nt + j] += wj * sv.values[i] * st.values[j];
                        }
                    }
                }
                Form::Stiffness => {
                    let gt: Vec<[f64; 2]> = (0..nt).map(|j| map.push_gradient(st.grads[j])).collect();
                    for i in 0..nv {
                        let gi = map.push_gradient(sv.grads[i]);
                        for (j, gj) in gt.iter().enumerate() {
                            local[i * nt + j] += wj * (gi[0] * gj[0] + gi[1] * gj[1]);
                        }
                    }
                }
            }
        }
        let (dt, dv) = (trial.cell_dofs(t), test.cell_dofs(t));
        for i in 0..nv {
            let Some(row) = dv[i] else { continue };
            for j in 0..nt {
                if let Some(col) = dt[j] {
                    trip.push((row, col, local[i * nt + j]));
                }
            }
        }
    }
    Ok(SparseMatrix::from_triplets(test.ndofs(), trial.ndofs(), trip))
}

/// `∫ ∇φ_j^trial · ∇φ_i^test`.
pub fn stiffness(trial: &FeSpace, test: &FeSpace) -> Result<SparseMatrix> {
    assemble(trial, test, Form::Stiffness)
}

/// `∫ φ_j^trial φ_i^test`.
pub fn mass(trial: &FeSpace, test: &FeSpace) -> Result<SparseMatrix> {
    assemble(trial, test, Form::Mass)
}

/// `∫ f φ_i` under the given rule.
pub fn load_vector<F>(test: &FeSpace, f: F, q: &QuadratureRule) -> Vec<f64>
where
    F: Fn(Point) -> f64,
{
    let tab = Tabulation::new(test.degree(), q);
    let mesh = test.mesh();
    let mut out = vec![0.0; test.ndofs()];
    for t in 0..mesh.num_triangles() {
        let map = mesh.affine_map(t);
        let jac = map.det.abs();
        let dofs = test.cell_dofs(t);
        for ((xi, w), s) in q.iter().zip(&tab.shapes) {
            let fw = f(map.to_physical(xi)) * w * jac;
            for i in 0..s.len {
                if let Some(d) = dofs[i] {
                    out[d] += fw * s.values[i];
                }
            }
        }
    }
    out
}

/// `∫ g · ∇φ_i` for a vector field `g`.
pub fn gradient_load_vector<G>(test: &FeSpace, g: G, q: &QuadratureRule) -> Vec<f64>
where
    G: Fn(Point) -> [f64; 2],
{
    let tab = Tabulation::new(test.degree(), q);
    let mesh = test.mesh();
    let mut out = vec![0.0; test.ndofs()];
    for t in 0..mesh.num_triangles() {
        let map = mesh.affine_map(t);
        let jac = map.det.abs();
        let dofs = test.cell_dofs(t);
        for ((xi, w), s) in q.iter().zip(&tab.shapes) {
            let gv = g(map.to_physical(xi));
            for i in 0..s.len {
                if let Some(d) = dofs[i] {
                    let gi = map.push_gradient(s.grads[i]);
                    out[d] += w * jac * (gv[0] * gi[0] + gv[1] * gi[1]);
                }
            }
        }
    }
    out
}

/// How the load vector `ℓ(v) = ∫ f v` is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadRule {
    /// `f` is replaced by its nodal interpolant `I_h f` in the full space
    /// `S_h^k` of the test degree (boundary nodes included), so the load is
    /// `M I_h f` with an exact mass matrix.
    #[default]
    Interpolated,
    /// `∫ f v` evaluated with the supplied quadrature rule.
    Quadrature,
}

impl fmt::Display for LoadRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LoadRule::Interpolated => "interpolated",
            LoadRule::Quadrature => "quadrature",
        })
    }
}

impl FromStr for LoadRule {
    type Err = FemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interpolated" => Ok(LoadRule::Interpolated),
            "quadrature" => Ok(LoadRule::Quadrature),
            other => Err(FemError::InvalidConfig(format!("unknown load rule `{other}`"))),
        }
    }
}

/// Load vector for `test` under the given rule; `q` is used only by
/// [`LoadRule::Quadrature`].
pub fn assemble_load<F>(test: &FeSpace, f: F, q: &QuadratureRule, rule: LoadRule) -> Result<Vec<f64>>
where
    F: Fn(Point) -> f64,
{
    match rule {
        LoadRule::Quadrature => Ok(load_vector(test, f, q)),
        LoadRule::Interpolated => {
            let full = FeSpace::new(test.mesh().clone(), test.degree(), false)?;
            Ok(mass(&full, test)?.mul_vec(&full.interpolate(f)))
        }
    }
}

/// The discrete Laplacian `Δ_h` onto a homogeneous space: `Δ_h w` is the
/// element `z` with `∫ z v = −∫ ∇w · ∇v` for every `v` in the space.
///
/// Holds the factorized mass matrix so repeated applications cost two
/// triangular solves.
pub struct DiscreteLaplacian {
    space: FeSpace,
    mass: SparseMatrix,
    stiffness: SparseMatrix,
    factor: SpdFactor,
}

impl DiscreteLaplacian {
    pub fn new(space: &FeSpace) -> Result<Self> {
        if !space.is_homogeneous() {
            return Err(FemError::InvalidConfig(
                "the discrete Laplacian maps into a zero-trace space".into(),
            ));
        }
        let mass = mass(space, space)?;
        let stiffness = stiffness(space, space)?;
        let factor = SpdFactor::new(&mass)?;
        Ok(Self { space: space.clone(), mass, stiffness, factor })
    }

    pub fn space(&self) -> &FeSpace {
        &self.space
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    /// Solves `M z = rhs` with one step of iterative refinement.
    pub fn solve_mass(&self, rhs: &[f64]) -> Vec<f64> {
        let mut z = self.factor.solve(rhs);
        let r: Vec<f64> = self.mass.mul_vec(&z).iter().zip(rhs).map(|(mz, b)| b - mz).collect();
        if norm2(&r) > 0.0 {
            let dz = self.factor.solve(&r);
            z.iter_mut().zip(dz).for_each(|(a, b)| *a += b);
        }
        z
    }

    /// `Δ_h u` for `u` given by coefficients in the same space.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.space.ndofs() {
            return Err(FemError::DimensionMismatch(format!(
                "{} coefficients for a space with {} dofs",
                u.len(),
                self.space.ndofs()
            )));
        }
        let rhs: Vec<f64> = self.stiffness.mul_vec(u).iter().map(|v| -v).collect();
        Ok(self.solve_mass(&rhs))
    }

    /// `Δ_h w` for a smooth `w` given through its gradient; the right-hand
    /// side `−∫ ∇w · ∇v` is computed by quadrature.
    pub fn apply_to_field<G>(&self, grad: G, q: &QuadratureRule) -> Vec<f64>
    where
        G: Fn(Point) -> [f64; 2],
    {
        let rhs: Vec<f64> = gradient_load_vector(&self.space, grad, q).iter().map(|v| -v).collect();
        self.solve_mass(&rhs)
    }

    /// `‖M z + K u‖ / ‖K u‖`, the defining-equation residual.
    pub fn residual(&self, u: &[f64], z: &[f64]) -> f64 {
        let ku = self.stiffness.mul_vec(u);
        let mz = self.mass.mul_vec(z);
        let r: Vec<f64> = mz.iter().zip(&ku).map(|(a, b)| a + b).collect();
        let scale = norm2(&ku);
        if scale == 0.0 {
            norm2(&r)
        } else {
            norm2(&r) / scale
        }
    }
}

/// One-shot `Δ_h u`; prefer [`DiscreteLaplacian`] when applying repeatedly.
pub fn apply_discrete_laplacian(u: &[f64], space: &FeSpace) -> Result<Vec<f64>> {
    DiscreteLaplacian::new(space)?.apply(u)
}
