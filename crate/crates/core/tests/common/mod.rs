#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triharmonic::assembly::{load_vector, mass, stiffness};
use triharmonic::mesh::Point;
use triharmonic::quadrature::QuadratureRule;
use triharmonic::saddle::{build_clamped, BlockSystem};
use triharmonic::solver::SolverOptions;
use triharmonic::{ManufacturedCase, Mesh, SeparableField};

pub fn mesh(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::unit_square(n).unwrap())
}

pub fn sine_load(p: Point) -> f64 {
    use std::f64::consts::PI;
    8.0 * PI.powi(6) * (PI * p[0]).sin() * (PI * p[1]).sin()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let m = a[r][col] / a[col][col];
            if m != 0.0 {
                for c in col..n {
                    a[r][c] -= m * a[col][c];
                }
                b[r] -= m * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

pub fn dense_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let cols: Vec<Vec<f64>> =
        (0..n).map(|j| dense_solve(a.to_vec(), (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())).collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n).map(|i| (0..p).map(|j| (0..m).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Largest deviation between the clamped five-field solve on `n × n` and
/// the three-field system with the stabilized form built from a dense
/// `Δ_h = −M⁻¹K`, relative to the largest oracle entry.
pub fn clamped_elimination_gap(n: usize) -> f64 {
    let q = QuadratureRule::new(8).unwrap();
    let sys = build_clamped(mesh(n), 1, sine_load, &q, triharmonic::assembly::LoadRule::Quadrature).unwrap();
    let sol = sys.solve(SolverOptions::default()).unwrap();
    let (us, ps) = (sys.u_space(), sys.phi_space());
    let m2 = mass(us, us).unwrap().to_dense();
    let k2 = stiffness(us, us).unwrap().to_dense();
    let lap: Vec<Vec<f64>> =
        matmul(&dense_inverse(&m2), &k2).into_iter().map(|r| r.into_iter().map(|v| -v).collect()).collect();
    let g = mass(us, ps).unwrap().to_dense();
    let c = stiffness(ps, ps).unwrap().add(&mass(ps, ps).unwrap()).unwrap().to_dense();
    let (b_u, b_phi) = sys.constraint_blocks();
    let (b_u, b_phi) = (b_u.to_dense(), b_phi.to_dense());
    let (d1, d0) = (us.ndofs(), ps.ndofs());
    let a_uu = matmul(&matmul(&transpose(&lap), &m2), &lap);
    let gl = matmul(&g, &lap);
    let size = d1 + 2 * d0;
    let mut a = vec![vec![0.0; size]; size];
    for i in 0..d1 {
        a[i][..d1].copy_from_slice(&a_uu[i]);
        for j in 0..d0 {
            a[i][d1 + j] = -gl[j][i];
            a[d1 + j][i] = -gl[j][i];
            a[i][d1 + d0 + j] = b_u[j][i];
            a[d1 + d0 + j][i] = b_u[j][i];
        }
    }
    for i in 0..d0 {
        for j in 0..d0 {
            a[d1 + i][d1 + j] = c[i][j];
            a[d1 + i][d1 + d0 + j] = b_phi[j][i];
            a[d1 + d0 + j][d1 + i] = b_phi[j][i];
        }
    }
    let mut b = load_vector(us, sine_load, &q);
    b.resize(size, 0.0);
    let x = dense_solve(a, b);
    let got: Vec<f64> = sol.u.iter().chain(&sol.phi).chain(&sol.lambda).copied().collect();
    let gap = got.iter().zip(&x).fold(0.0f64, |m, (p, o)| m.max((p - o).abs()));
    gap / max_abs(&x)
}

/// Five-point Laplacian applied `m` times, evaluated at `p`.
fn fd_laplacian_power<F: Fn(Point) -> f64>(g: &F, m: usize, p: Point, h: f64) -> f64 {
    if m == 0 {
        return g(p);
    }
    let at = |dx: f64, dy: f64| fd_laplacian_power(g, m - 1, [p[0] + dx, p[1] + dy], h);
    (at(h, 0.0) + at(-h, 0.0) + at(0.0, h) + at(0.0, -h) - 4.0 * at(0.0, 0.0)) / (h * h)
}

/// Richardson-extrapolated `Δ^m g(p)` from steps `2h` and `h`.
pub fn fd_laplacian(g: &SeparableField, m: usize, p: Point, h: f64) -> f64 {
    let f = |x: Point| g.eval(x);
    let coarse = fd_laplacian_power(&f, m, p, 2.0 * h);
    let fine = fd_laplacian_power(&f, m, p, h);
    (4.0 * fine - coarse) / 3.0
}

/// Worst relative disagreement between the closed-form derivative chain of
/// a case (`φ = Δu`, `λ = Δ²u`, `f = −Δ³u`) and finite differences at
/// `samples` random interior points, each chain scaled by its largest
/// sampled magnitude.
pub fn fd_chain_gap(case: &ManufacturedCase, samples: usize, h: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Point> =
        (0..samples).map(|_| [rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)]).collect();
    let minus_f = case.f.scale(-1.0);
    let mut worst = 0.0f64;
    for (m, exact) in [(1, &case.phi), (2, &case.lambda), (3, &minus_f)] {
        let want: Vec<f64> = points.iter().map(|&p| exact.eval(p)).collect();
        let got: Vec<f64> = points.iter().map(|&p| fd_laplacian(&case.u, m, p, h)).collect();
        let scale = max_abs(&want);
        let gap = want.iter().zip(&got).fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
        worst = worst.max(gap / scale);
    }
    worst
}

/// Relative residual of `A x = b` recomputed from scratch.
pub fn recomputed_residual(system: &BlockSystem, x: &[f64]) -> f64 {
    let ax = system.matrix().mul_vec(x);
    let r: f64 = ax.iter().zip(system.rhs()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = system.rhs().iter().map(|b| b * b).sum::<f64>().sqrt();
    r / nb
}
