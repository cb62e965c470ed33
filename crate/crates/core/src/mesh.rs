//! Structured triangulations of the unit square.
//!
//! The `n`-mesh splits Ω = (0,1)² into an `n × n` grid of squares and cuts
//! every square along its lower-left to upper-right diagonal. Vertices are
//! numbered row-major (`j * (n + 1) + i` for the vertex at `(i/n, j/n)`) and
//! each cell contributes its lower triangle before its upper triangle, so all
//! numbering is a pure function of `n`.

use std::io::{self, Write};

use crate::error::{FemError, Result};

const BOUNDARY_TOL: f64 = 1e-14;
const LOCATE_TOL: f64 = 1e-12;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    n: usize,
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    h: f64,
}

/// Affine map `x = origin + jacobian · ξ` from the reference triangle
/// `(0,0), (1,0), (0,1)` onto a mesh triangle.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub origin: Point,
    /// Columns are the edge vectors `v1 - v0` and `v2 - v0`.
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
}

impl AffineMap {
    pub fn new(v0: Point, v1: Point, v2: Point) -> Self {
        let jacobian = [[v1[0] - v0[0], v2[0] - v0[0]], [v1[1] - v0[1], v2[1] - v0[1]]];
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
        Self { origin: v0, jacobian, det }
    }

    pub fn to_physical(&self, xi: Point) -> Point {
        let j = &self.jacobian;
        [
            self.origin[0] + j[0][0] * xi[0] + j[0][1] * xi[1],
            self.origin[1] + j[1][0] * xi[0] + j[1][1] * xi[1],
        ]
    }

    /// Reference coordinates of an arbitrary point, including points outside
    /// the triangle.
    pub fn to_reference(&self, p: Point) -> Point {
        let j = &self.jacobian;
        let dx = p[0] - self.origin[0];
        let dy = p[1] - self.origin[1];
        [
            (j[1][1] * dx - j[0][1] * dy) / self.det,
            (-j[1][0] * dx + j[0][0] * dy) / self.det,
        ]
    }

    /// Maps a reference gradient to a physical one (`J⁻ᵀ ∇̂`).
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let j = &self.jacobian;
        [
            (j[1][1] * g[0] - j[1][0] * g[1]) / self.det,
            (-j[0][1] * g[0] + j[0][0] * g[1]) / self.det,
        ]
    }
}

impl Mesh {
    /// Builds the structured `n × n` triangulation of the unit square.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(FemError::EmptyMesh);
        }
        let nf = n as f64;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        let mut boundary = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                let p = [i as f64 / nf, j as f64 / nf];
                boundary.push(on_boundary(p));
                vertices.push(p);
            }
        }
        let vid = |i: usize, j: usize| j * (n + 1) + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                triangles.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)]);
                triangles.push([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)]);
            }
        }
        Ok(Self {
            n,
            vertices,
            triangles,
            boundary,
            h: std::f64::consts::SQRT_2 / nf,
        })
    }

    /// Uniform refinement. For this aligned family, red refinement of every
    /// triangle coincides with the `2n` mesh.
    pub fn refine(&self) -> Self {
        Self::unit_square(2 * self.n).expect("2n is positive")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Longest edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    /// Integer grid position `(i, j)` of a vertex.
    pub fn vertex_grid(&self, v: usize) -> (usize, usize) {
        (v % (self.n + 1), v / (self.n + 1))
    }

    pub fn triangle_vertices(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn affine_map(&self, t: usize) -> AffineMap {
        let [a, b, c] = self.triangle_vertices(t);
        AffineMap::new(a, b, c)
    }

    /// Signed area (positive for counterclockwise triangles).
    pub fn signed_area(&self, t: usize) -> f64 {
        0.5 * self.affine_map(t).det
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_vertices(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Triangles none of whose vertices lie on ∂Ω. Empty for `n <= 2`.
    pub fn internal_triangles(&self) -> Vec<usize> {
        (0..self.triangles.len())
            .filter(|&t| self.triangles[t].iter().all(|&v| !self.boundary[v]))
            .collect()
    }

    /// Unique edges as sorted vertex pairs, in lexicographic order.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut edges: Vec<[usize; 2]> = self
            .triangles
            .iter()
            .flat_map(|&[a, b, c]| [[a, b], [b, c], [c, a]])
            .map(|[a, b]| if a < b { [a, b] } else { [b, a] })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Finds a triangle containing `p` and the reference coordinates of `p`
    /// in it. Points on shared edges resolve to the lower triangle of the
    /// cell they fall in.
    pub fn locate(&self, p: Point) -> Result<(usize, Point)> {
        let [x, y] = p;
        let inside = |c: f64| (-LOCATE_TOL..=1.0 + LOCATE_TOL).contains(&c);
        if !inside(x) || !inside(y) {
            return Err(FemError::PointOutside(x, y));
        }
        let nf = self.n as f64;
        let cell = |c: f64| ((c * nf).floor().max(0.0) as usize).min(self.n - 1);
        let (i, j) = (cell(x), cell(y));
        let s = x * nf - i as f64;
        let r = y * nf - j as f64;
        let t = 2 * (j * self.n + i) + usize::from(r > s);
        Ok((t, self.affine_map(t).to_reference(p)))
    }

    /// Plain-text dump: one `x y` line per vertex, then one `i j k` line per
    /// triangle.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        for [x, y] in &self.vertices {
            writeln!(w, "{x} {y}")?;
        }
        for [a, b, c] in &self.triangles {
            writeln!(w, "{a} {b} {c}")?;
        }
        Ok(())
    }
}

fn on_boundary([x, y]: Point) -> bool {
    let near = |a: f64, b: f64| (a - b).abs() <= BOUNDARY_TOL;
    near(x, 0.0) || near(x, 1.0) || near(y, 0.0) || near(y, 1.0)
}
