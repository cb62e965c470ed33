//! Quadrature on the reference triangle `(0,0), (1,0), (0,1)`.
//!
//! Degrees 1 and 2 use the classical centroid and three-point rules. Higher
//! degrees use a collapsed (Duffy) tensor product of Gauss–Legendre rules:
//! `x = s`, `y = (1 - s) t` with Jacobian `1 - s`. All weights are positive
//! and sum to 1/2.

use crate::error::{FemError, Result};
use crate::mesh::{Mesh, Point};

pub const MAX_DEGREE: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    points: Vec<Point>,
    weights: Vec<f64>,
    degree: usize,
}

impl QuadratureRule {
    /// Rule exact for polynomials of total degree `min_degree`.
    pub fn new(min_degree: usize) -> Result<Self> {
        match min_degree {
            0 | 1 => Ok(Self {
                points: vec![[1.0 / 3.0, 1.0 / 3.0]],
                weights: vec![0.5],
                degree: 1,
            }),
            2 => Ok(Self {
                points: vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
                weights: vec![1.0 / 6.0; 3],
                degree: 2,
            }),
            d if d <= MAX_DEGREE => Ok(Self::collapsed(d)),
            d => Err(FemError::QuadratureDegree(d)),
        }
    }

    fn collapsed(degree: usize) -> Self {
        // The Jacobian adds one degree in s.
        let m = (degree + 2).div_ceil(2);
        let (nodes, gw) = gauss_legendre(m);
        let mut points = Vec::with_capacity(m * m);
        let mut weights = Vec::with_capacity(m * m);
        for (&s, &ws) in nodes.iter().zip(&gw) {
            for (&t, &wt) in nodes.iter().zip(&gw) {
                points.push([s, (1.0 - s) * t]);
                weights.push(ws * wt * (1.0 - s));
            }
        }
        Self { points, weights, degree }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness_degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Pairs of (reference point, weight).
    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Shorthand for [`QuadratureRule::new`].
pub fn rule(min_degree: usize) -> Result<QuadratureRule> {
    QuadratureRule::new(min_degree)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`, ascending.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        // Chebyshev-like initial guess for the i-th root on [-1, 1], descending.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d.is_finite() {
            dp = d;
        }
        nodes[m - 1 - i] = 0.5 * (x + 1.0);
        weights[m - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// ∫_Ω field dx, summed triangle by triangle.
pub fn integrate<F>(field: F, mesh: &Mesh, q: &QuadratureRule) -> f64
where
    F: Fn(Point) -> f64,
{
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let map = mesh.affine_map(t);
        let local: f64 = q.iter().map(|(xi, w)| w * field(map.to_physical(xi))).sum();
        total += local * map.det.abs();
    }
    total
}
