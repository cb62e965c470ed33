//! Error norms, refinement studies, and table output.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::assembly::{DiscreteLaplacian, LoadRule};
use crate::error::{FemError, Result};
use crate::lagrange::{FeSpace, Tabulation, MAX_LOCAL};
use crate::manufactured::{catalog, ExampleId, ManufacturedCase, SeparableField};
use crate::mesh::{Mesh, Point};
use crate::multiplier::BcKind;
use crate::quadrature::{QuadratureRule, MAX_DEGREE};
use crate::saddle::{BlockSystem, MixedSolution};
use crate::solver::{SolverOptions, DEFAULT_TOLERANCE};

/// Largest accepted constraint residual (see [`BlockSystem::constraint_residual`]).
pub const CONSTRAINT_TOLERANCE: f64 = 1e-9;

/// `∫_Ω Σ` of `N` integrands that see the value and gradient of several FE
/// functions at each quadrature point.
pub fn integrate_fields<const N: usize, F>(
    mesh: &Mesh,
    q: &QuadratureRule,
    fields: &[(&FeSpace, &[f64])],
    integrand: F,
) -> [f64; N]
where
    F: Fn(Point, &[(f64, [f64; 2])]) -> [f64; N],
{
    let tabs: Vec<Tabulation> = fields.iter().map(|(s, _)| Tabulation::new(s.degree(), q)).collect();
    let mut acc = [0.0; N];
    let mut vals = vec![(0.0, [0.0; 2]); fields.len()];
    let mut locals = vec![[0.0; MAX_LOCAL]; fields.len()];
    for t in 0..mesh.num_triangles() {
        let map = mesh.affine_map(t);
        let jac = map.det.abs();
        for (l, (s, c)) in locals.iter_mut().zip(fields) {
            *l = s.local_coefficients(t, c);
        }
        for (qp, (xi, w)) in q.iter().enumerate() {
            for (f, v) in vals.iter_mut().enumerate() {
                *v = crate::lagrange::eval_local(&map, &tabs[f].shapes[qp], &locals[f]);
            }
            let out = integrand(map.to_physical(xi), &vals);
            for (a, o) in acc.iter_mut().zip(out) {
                *a += w * jac * o;
            }
        }
    }
    acc
}

fn ratio(err2: f64, norm2: f64) -> Result<f64> {
    if norm2 <= 0.0 {
        return Err(FemError::ZeroNorm);
    }
    Ok((err2 / norm2).sqrt())
}

/// `‖g − g_h‖_{L²} / ‖g‖_{L²}`.
pub fn relative_l2_error(space: &FeSpace, coeffs: &[f64], exact: &SeparableField, q: &QuadratureRule) -> Result<f64> {
    let [e, n] = integrate_fields(space.mesh(), q, &[(space, coeffs)], |p, v| {
        let g = exact.eval(p);
        [(g - v[0].0).powi(2), g * g]
    });
    ratio(e, n)
}

/// `|g − g_h|_{H¹} / |g|_{H¹}`.
pub fn relative_h1_seminorm_error(
    space: &FeSpace,
    coeffs: &[f64],
    exact: &SeparableField,
    q: &QuadratureRule,
) -> Result<f64> {
    let grad = exact.gradient();
    let [e, n] = integrate_fields(space.mesh(), q, &[(space, coeffs)], |p, v| {
        let g = [grad[0].eval(p), grad[1].eval(p)];
        let d = [g[0] - v[0].1[0], g[1] - v[0].1[1]];
        [d[0] * d[0] + d[1] * d[1], g[0] * g[0] + g[1] * g[1]]
    });
    ratio(e, n)
}

/// `√(‖∇ψ‖² + ‖ψ − w‖²)` with `ψ = φ − φ_h` (or `−φ_h` without an exact
/// field) and `w` a function of a second space.
fn mesh_dependent(
    phi_space: &FeSpace,
    phi_h: &[f64],
    w_space: &FeSpace,
    w_h: &[f64],
    phi_exact: Option<(&SeparableField, &[SeparableField; 2])>,
    q: &QuadratureRule,
) -> f64 {
    let [s] = integrate_fields(phi_space.mesh(), q, &[(phi_space, phi_h), (w_space, w_h)], |p, v| {
        let (mut val, mut grad) = (-v[0].0, [-v[0].1[0], -v[0].1[1]]);
        if let Some((phi, g)) = phi_exact {
            val += phi.eval(p);
            grad[0] += g[0].eval(p);
            grad[1] += g[1].eval(p);
        }
        [grad[0] * grad[0] + grad[1] * grad[1] + (val - v[1].0).powi(2)]
    });
    s.sqrt()
}

/// Relative mesh-dependent error `|(I u − u_h, φ − φ_h)|_{k,h} / |(I u, φ)|_{k,h}`
/// with `|(v, ψ)|_{k,h}² = ‖∇ψ‖² + ‖ψ − Δ_h v‖²`. The exact `u` enters
/// through its nodal interpolant `I u` onto the `u` space.
pub fn relative_mesh_dependent_error(
    system: &BlockSystem,
    sol: &MixedSolution,
    case: &ManufacturedCase,
    q: &QuadratureRule,
) -> Result<f64> {
    let us = system.u_space();
    let ps = system.phi_space();
    let lap = DiscreteLaplacian::new(us)?;
    let iu = us.interpolate(|p| case.u.eval(p));
    let lap_iu = lap.apply(&iu)?;
    let z = match &sol.z {
        Some(z) => z.clone(),
        None => lap.apply(&sol.u)?,
    };
    let grad = case.phi.gradient();
    let exact = Some((&case.phi, &grad));
    // Error: ψ = φ − φ_h and w = Δ_h(I u − u_h) = Δ_h I u − z.
    let w: Vec<f64> = lap_iu.iter().zip(&z).map(|(a, b)| a - b).collect();
    let err = mesh_dependent(ps, &sol.phi, us, &w, exact, q);
    let zero = vec![0.0; ps.ndofs()];
    let norm = mesh_dependent(ps, &zero, us, &lap_iu, exact, q);
    if norm == 0.0 {
        return Err(FemError::ZeroNorm);
    }
    Ok(err / norm)
}

/// Configuration of a refinement study.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub example: ExampleId,
    pub degree: usize,
    /// Number of uniform refinements; the study has `refinements + 1` rows.
    pub refinements: usize,
    /// Subdivisions per side of the coarsest mesh.
    pub initial_n: usize,
    /// Quadrature degree for loads and errors.
    pub quad_degree: usize,
    pub load: LoadRule,
    pub tolerance: f64,
}

impl StudyConfig {
    /// Defaults: coarsest mesh with 8 elements for simply supported cases and
    /// 32 for clamped ones, quadrature degree `2k + 6`.
    pub fn new(example: ExampleId, degree: usize, refinements: usize) -> Self {
        Self {
            example,
            degree,
            refinements,
            initial_n: default_initial_n(example.bc()),
            quad_degree: default_quad_degree(degree),
            load: LoadRule::default(),
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn bc(&self) -> BcKind {
        self.example.bc()
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.degree) {
            return Err(FemError::UnsupportedDegree(self.degree));
        }
        if self.bc() == BcKind::Clamped && self.degree != 1 {
            return Err(FemError::UnsupportedDegree(self.degree));
        }
        if self.refinements < 2 {
            return Err(FemError::InvalidConfig("a study needs at least 2 refinements".into()));
        }
        if self.initial_n == 0 {
            return Err(FemError::EmptyMesh);
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(FemError::InvalidConfig(format!("tolerance {} must lie in (0, 1)", self.tolerance)));
        }
        QuadratureRule::new(self.quad_degree).map(|_| ())
    }
}

pub fn default_initial_n(bc: BcKind) -> usize {
    match bc {
        BcKind::SimplySupported => 2,
        BcKind::Clamped => 4,
    }
}

pub fn default_quad_degree(k: usize) -> usize {
    (2 * k + 6).min(MAX_DEGREE)
}

/// Errors of one level; all relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelErrors {
    pub u_l2: f64,
    pub u_h1: f64,
    pub phi_l2: f64,
    pub phi_h1: f64,
    pub lambda_l2: f64,
    /// Mesh-dependent error, clamped only.
    pub mesh: Option<f64>,
}

impl LevelErrors {
    fn columns(&self) -> [f64; 5] {
        [self.u_l2, self.u_h1, self.phi_l2, self.phi_h1, self.lambda_l2]
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub level: usize,
    pub n: usize,
    pub elements: usize,
    pub unknowns: usize,
    pub errors: LevelErrors,
    /// Observed orders against the previous row, `log₂(e_prev / e)`.
    pub rates: Option<LevelRates>,
    pub relative_residual: f64,
    pub constraint_residual: f64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRates {
    pub u_l2: f64,
    pub u_h1: f64,
    pub phi_l2: f64,
    pub phi_h1: f64,
    pub lambda_l2: f64,
    pub mesh: Option<f64>,
}

pub fn rate(prev: f64, cur: f64) -> f64 {
    (prev / cur).log2()
}

fn rates(prev: &LevelErrors, cur: &LevelErrors) -> LevelRates {
    LevelRates {
        u_l2: rate(prev.u_l2, cur.u_l2),
        u_h1: rate(prev.u_h1, cur.u_h1),
        phi_l2: rate(prev.phi_l2, cur.phi_l2),
        phi_h1: rate(prev.phi_h1, cur.phi_h1),
        lambda_l2: rate(prev.lambda_l2, cur.lambda_l2),
        mesh: prev.mesh.zip(cur.mesh).map(|(a, b)| rate(a, b)),
    }
}

impl LevelRates {
    fn columns(&self) -> [f64; 5] {
        [self.u_l2, self.u_h1, self.phi_l2, self.phi_h1, self.lambda_l2]
    }
}

/// Builds and solves one level.
pub fn solve_level(
    case: &ManufacturedCase,
    mesh: Arc<Mesh>,
    degree: usize,
    q: &QuadratureRule,
    load: LoadRule,
    tolerance: f64,
) -> Result<(BlockSystem, MixedSolution)> {
    let f = &case.f;
    let system = BlockSystem::build(mesh, degree, case.bc, |p| f.eval(p), q, load)?;
    let opts = SolverOptions { tolerance, ..SolverOptions::default() };
    let sol = system.solve(opts)?;
    Ok((system, sol))
}

/// All error columns of a solved level.
pub fn level_errors(
    system: &BlockSystem,
    sol: &MixedSolution,
    case: &ManufacturedCase,
    q: &QuadratureRule,
) -> Result<LevelErrors> {
    let (us, ps) = (system.u_space(), system.phi_space());
    Ok(LevelErrors {
        u_l2: relative_l2_error(us, &sol.u, &case.u, q)?,
        u_h1: relative_h1_seminorm_error(us, &sol.u, &case.u, q)?,
        phi_l2: relative_l2_error(ps, &sol.phi, &case.phi, q)?,
        phi_h1: relative_h1_seminorm_error(ps, &sol.phi, &case.phi, q)?,
        lambda_l2: relative_l2_error(system.multiplier().full_space(), &sol.lambda_full, &case.lambda, q)?,
        mesh: match system.bc() {
            BcKind::Clamped => Some(relative_mesh_dependent_error(system, sol, case, q)?),
            BcKind::SimplySupported => None,
        },
    })
}

/// Result of a study.
#[derive(Debug, Clone)]
pub struct Study {
    pub example: ExampleId,
    pub bc: BcKind,
    pub degree: usize,
    pub rows: Vec<ConvergenceRow>,
}

pub fn run_study(config: &StudyConfig) -> Result<Study> {
    run_study_with(config, |_| {})
}

/// Runs a study, calling `observe` after each level.
pub fn run_study_with<F>(config: &StudyConfig, mut observe: F) -> Result<Study>
where
    F: FnMut(&ConvergenceRow),
{
    config.validate()?;
    let case = catalog(config.example);
    let q = QuadratureRule::new(config.quad_degree)?;
    let mut mesh = Arc::new(Mesh::unit_square(config.initial_n)?);
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(config.refinements + 1);
    for level in 0..=config.refinements {
        let start = Instant::now();
        let elements = mesh.num_triangles();
        let wrap = |e: FemError| FemError::AtLevel { level, elements, source: Box::new(e) };
        let (system, sol) = solve_level(&case, mesh.clone(), config.degree, &q, config.load, config.tolerance).map_err(wrap)?;
        let constraint_residual = system.constraint_residual(&sol);
        if !(constraint_residual <= CONSTRAINT_TOLERANCE) {
            return Err(wrap(FemError::ToleranceNotReached {
                achieved: constraint_residual,
                tolerance: CONSTRAINT_TOLERANCE,
            }));
        }
        let errors = level_errors(&system, &sol, &case, &q).map_err(wrap)?;
        let row = ConvergenceRow {
            level,
            n: mesh.n(),
            elements,
            unknowns: system.layout().total(),
            errors,
            rates: rows.last().map(|p| rates(&p.errors, &errors)),
            relative_residual: sol.report.relative_residual,
            constraint_residual,
            elapsed: start.elapsed(),
        };
        observe(&row);
        rows.push(row);
        if level < config.refinements {
            mesh = Arc::new(mesh.refine());
        }
    }
    Ok(Study { example: config.example, bc: config.bc(), degree: config.degree, rows })
}

/// Three significant digits with a signed two-digit exponent, e.g. `1.71e+02`.
pub fn format_error(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.2e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent formatting");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn format_rate(v: f64) -> String {
    format!("{v:.2}")
}

pub const CSV_HEADER: &str =
    "elems,e_u_l2,r_u_l2,e_u_h1,r_u_h1,e_phi_l2,r_phi_l2,e_phi_h1,r_phi_h1,e_lam_l2,r_lam_l2";

impl Study {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{}", row.elements);
            let rates = row.rates.map(|r| r.columns());
            for (i, e) in row.errors.columns().iter().enumerate() {
                let r = rates.map(|r| format_rate(r[i])).unwrap_or_default();
                let _ = write!(out, ",{},{}", format_error(*e), r);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mesh = self.bc == BcKind::Clamped;
        let mut out = format!("### {} ({}, k = {})\n\n", self.example, self.bc, self.degree);
        out.push_str("| elems | u L2 | rate | u H1 | rate | phi L2 | rate | phi H1 | rate | lambda L2 | rate |");
        if mesh {
            out.push_str(" mesh | rate |");
        }
        out.push('\n');
        let ncols = if mesh { 13 } else { 11 };
        out.push('|');
        out.push_str(&"---:|".repeat(ncols));
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "| {} |", row.elements);
            let rates = row.rates.map(|r| r.columns());
            for (i, e) in row.errors.columns().iter().enumerate() {
                let r = rates.map(|r| format_rate(r[i])).unwrap_or_default();
                let _ = write!(out, " {} | {} |", format_error(*e), r);
            }
            if mesh {
                let e = row.errors.mesh.map(format_error).unwrap_or_default();
                let r = row.rates.and_then(|r| r.mesh).map(format_rate).unwrap_or_default();
                let _ = write!(out, " {e} | {r} |");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_formatting() {
        assert_eq!(format_error(171.234), "1.71e+02");
        assert_eq!(format_error(7.5749e-2), "7.57e-02");
        assert_eq!(format_error(1.0), "1.00e+00");
        assert_eq!(format_error(3.14159e-120), "3.14e-120");
        assert_eq!(format_rate(1.996), "2.00");
        assert_eq!(format_rate(-0.123), "-0.12");
    }

    #[test]
    fn interpolant_errors_are_zero_for_reproduced_fields() {
        let mesh = Arc::new(Mesh::unit_square(4).unwrap());
        let q = QuadratureRule::new(8).unwrap();
        let s = FeSpace::new(mesh, 2, false).unwrap();
        let g = SeparableField::product(
            crate::Univariate::polynomial(&[1.0, 2.0]),
            crate::Univariate::polynomial(&[0.5, 0.0, 3.0]),
        );
        // g has bi-degree (1, 2), total degree 3: not reproduced by P2.
        let c = s.interpolate(|p| g.eval(p));
        assert!(relative_l2_error(&s, &c, &g, &q).unwrap() > 1e-6);
        let h = SeparableField::product(
            crate::Univariate::polynomial(&[1.0, 2.0]),
            crate::Univariate::polynomial(&[0.5, 3.0]),
        );
        let c = s.interpolate(|p| h.eval(p));
        assert!(relative_l2_error(&s, &c, &h, &q).unwrap() < 1e-14);
        assert!(relative_h1_seminorm_error(&s, &c, &h, &q).unwrap() < 1e-14);
        let zero = SeparableField::default();
        assert!(matches!(relative_l2_error(&s, &c, &zero, &q), Err(FemError::ZeroNorm)));
    }

    #[test]
    fn small_study_produces_rows_and_rates() {
        let mut cfg = StudyConfig::new(ExampleId::Ss3, 1, 2);
        cfg.initial_n = 4;
        let study = run_study(&cfg).unwrap();
        assert_eq!(study.rows.len(), 3);
        assert_eq!(study.rows.iter().map(|r| r.elements).collect::<Vec<_>>(), vec![32, 128, 512]);
        assert!(study.rows[0].rates.is_none());
        let r = study.rows[2].rates.unwrap();
        assert!(r.u_l2 > 1.5 && r.phi_h1 > 0.7);
        let csv = study.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1].split(',').count(), 11);
        assert!(lines[1].ends_with(','));
        assert!(study.to_markdown().lines().count() == 7);
    }

    #[test]
    fn study_configuration_is_validated() {
        assert!(matches!(StudyConfig::new(ExampleId::Cl1, 2, 3).validate(), Err(FemError::UnsupportedDegree(2))));
        assert!(StudyConfig::new(ExampleId::Ss1, 1, 1).validate().is_err());
        assert!(StudyConfig::new(ExampleId::Ss1, 3, 3).validate().is_err());
        let mut c = StudyConfig::new(ExampleId::Ss1, 1, 3);
        c.quad_degree = 13;
        assert!(matches!(c.validate(), Err(FemError::QuadratureDegree(13))));
        assert_eq!(StudyConfig::new(ExampleId::Cl2, 1, 3).initial_n, 4);
        assert_eq!(default_quad_degree(2), 10);
    }

    #[test]
    fn clamped_level_reports_mesh_dependent_error() {
        let mut cfg = StudyConfig::new(ExampleId::Cl1, 1, 2);
        cfg.initial_n = 4;
        let study = run_study(&cfg).unwrap();
        let mesh: Vec<f64> = study.rows.iter().map(|r| r.errors.mesh.unwrap()).collect();
        assert!(mesh.windows(2).all(|w| w[1] < w[0]), "{mesh:?}");
        assert!(study.rows.iter().all(|r| r.constraint_residual <= 1e-9));
        assert!(study.to_markdown().contains("mesh"));
        assert!(!study.to_csv().contains("mesh"));
    }
}
