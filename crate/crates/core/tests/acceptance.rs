//! Acceptance gate: one line per criterion. Rate, runtime and structural
//! checks gate the exit status; magnitude comparisons against reference
//! tables are reported but do not gate, since the coarse-mesh geometry they
//! depend on is only partly known.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triharmonic::assembly::{DiscreteLaplacian, LoadRule};
use triharmonic::convergence::{run_study, LevelErrors, Study, StudyConfig};
use triharmonic::manufactured::catalog;
use triharmonic::quadrature::QuadratureRule;
use triharmonic::solver::SolverOptions;
use triharmonic::{BcKind, BlockSystem, ExampleId, FeSpace, MultiplierSpace};

use common::{clamped_elimination_gap, fd_chain_gap, mesh, recomputed_residual};

#[derive(Default)]
struct Verdict {
    gating: Vec<String>,
    secondary: Vec<String>,
    notes: Vec<String>,
}

impl Verdict {
    fn check(&mut self, ok: bool, msg: String) {
        if ok {
            self.notes.push(msg);
        } else {
            self.gating.push(msg);
        }
    }

    fn rate(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, format!("{name} {got:.2} (want {want:.2} ± {tol})"));
    }

    fn at_least(&mut self, name: &str, got: f64, min: f64) {
        self.check(got >= min, format!("{name} {got:.2} (want ≥ {min:.2})"));
    }

    fn runtime(&mut self, took: Duration, limit: Duration) {
        self.check(took < limit, format!("{:.1} s (limit {} s)", took.as_secs_f64(), limit.as_secs()));
    }

    fn secondary(&mut self, ok: bool, msg: String) {
        if ok {
            self.notes.push(msg);
        } else {
            self.secondary.push(msg);
        }
    }

    fn report(&self, id: u32, title: &str) -> bool {
        let (status, detail) = if !self.gating.is_empty() {
            ("FAIL", self.gating.join("; "))
        } else if !self.secondary.is_empty() {
            ("FAIL (magnitudes only, non-gating)", [&self.secondary[..], &self.notes[..]].concat().join("; "))
        } else {
            ("PASS", self.notes.join("; "))
        };
        println!("criterion {id} {status}: {title}: {detail}");
        self.gating.is_empty()
    }
}

fn study(example: ExampleId, degree: usize, refinements: usize) -> (Study, Duration) {
    let start = Instant::now();
    let s = run_study(&StudyConfig::new(example, degree, refinements)).expect("study runs");
    (s, start.elapsed())
}

fn final_rates(s: &Study) -> triharmonic::convergence::LevelRates {
    s.rows.last().unwrap().rates.unwrap()
}

fn criterion_1() -> bool {
    let (s, took) = study(ExampleId::Ss1, 1, 6);
    let mut v = Verdict::default();
    let last = s.rows.last().unwrap();
    v.check(last.elements == 32768, format!("finest level {} elements", last.elements));
    let r = final_rates(&s);
    v.rate("u L2", r.u_l2, 2.00, 0.15);
    v.rate("u H1", r.u_h1, 1.89, 0.15);
    v.rate("phi L2", r.phi_l2, 2.00, 0.15);
    v.rate("phi H1", r.phi_h1, 1.16, 0.15);
    v.rate("lambda L2", r.lambda_l2, 2.00, 0.15);
    v.runtime(took, Duration::from_secs(120));
    v.report(1, "simply supported, linear, ss1")
}

fn criterion_2() -> bool {
    let (s, took) = study(ExampleId::Ss1, 2, 5);
    let mut v = Verdict::default();
    let last = s.rows.last().unwrap();
    v.check(last.elements == 8192, format!("finest level {} elements", last.elements));
    let r = final_rates(&s);
    v.rate("phi H1", r.phi_h1, 1.99, 0.15);
    v.rate("lambda L2", r.lambda_l2, 3.04, 0.2);
    v.at_least("phi L2", r.phi_l2, 3.0);
    v.at_least("u L2", r.u_l2, 3.0);
    v.runtime(took, Duration::from_secs(120));
    v.report(2, "simply supported, quadratic, ss1")
}

/// Reference relative errors for ss3 per level: u L2, u H1, phi L2, lambda L2.
const SS3_LINEAR: [[f64; 4]; 7] = [
    [8.42e-01, 8.78e-01, 7.47e-01, 5.95e-01],
    [4.22e-01, 4.91e-01, 3.30e-01, 2.27e-01],
    [1.32e-01, 2.18e-01, 9.83e-02, 6.42e-02],
    [3.50e-02, 1.01e-01, 2.57e-02, 1.65e-02],
    [8.88e-03, 4.95e-02, 6.50e-03, 4.16e-03],
    [2.22e-03, 2.46e-02, 1.63e-03, 1.04e-03],
    [5.58e-04, 1.23e-02, 4.08e-04, 2.61e-04],
];
const SS3_QUADRATIC: [[f64; 4]; 6] = [
    [2.12e-01, 2.29e-01, 1.63e-01, 1.14e-01],
    [2.12e-02, 4.22e-02, 1.70e-02, 1.36e-02],
    [1.98e-03, 9.99e-03, 1.78e-03, 1.63e-03],
    [2.14e-04, 2.49e-03, 2.07e-04, 2.01e-04],
    [2.54e-05, 6.21e-04, 2.52e-05, 2.51e-05],
    [3.14e-06, 1.56e-04, 3.14e-06, 3.14e-06],
];

/// Largest `|ours / table − 1|` over all levels and columns.
fn worst_deviation(s: &Study, table: &[[f64; 4]]) -> (f64, usize) {
    let mut worst = (0.0f64, 0);
    for (row, want) in s.rows.iter().zip(table) {
        let LevelErrors { u_l2, u_h1, phi_l2, lambda_l2, .. } = row.errors;
        for (got, want) in [u_l2, u_h1, phi_l2, lambda_l2].iter().zip(want) {
            let d = (got / want - 1.0).abs();
            if d > worst.0 {
                worst = (d, row.elements);
            }
        }
    }
    worst
}

fn criterion_3() -> bool {
    let mut v = Verdict::default();
    let (lin, _) = study(ExampleId::Ss3, 1, 6);
    let r = final_rates(&lin);
    v.rate("linear u L2", r.u_l2, 2.00, 0.1);
    v.rate("linear u H1", r.u_h1, 1.00, 0.05);
    v.rate("linear lambda L2", r.lambda_l2, 2.00, 0.1);
    let (quad, _) = study(ExampleId::Ss3, 2, 5);
    let r = final_rates(&quad);
    v.rate("quadratic u L2", r.u_l2, 3.02, 0.15);
    v.rate("quadratic phi L2", r.phi_l2, 3.01, 0.15);
    v.rate("quadratic lambda L2", r.lambda_l2, 3.00, 0.15);
    v.rate("quadratic phi H1", r.phi_h1, 2.00, 0.1);
    for (name, s, table) in [("linear", &lin, &SS3_LINEAR[..]), ("quadratic", &quad, &SS3_QUADRATIC[..])] {
        let (d, at) = worst_deviation(s, table);
        v.secondary(
            d <= 0.10,
            format!("{name} magnitudes within {:.1}% of table (worst at {at} elements, limit 10%)", 100.0 * d),
        );
    }
    v.report(3, "simply supported, ss3")
}

fn criterion_4(s: &Study, took: Duration) -> bool {
    let last = s.rows.last().unwrap();
    let r = final_rates(s);
    let mut v = Verdict::default();
    v.check(last.elements == 32768, format!("finest level {} elements", last.elements));
    v.rate("u L2", r.u_l2, 2.11, 0.25);
    v.rate("phi L2", r.phi_l2, 2.13, 0.25);
    v.rate("phi H1", r.phi_h1, 1.00, 0.1);
    v.rate("lambda L2", r.lambda_l2, 2.36, 0.25);
    v.runtime(took, Duration::from_secs(240));
    v.report(4, "clamped, linear, cl1")
}

fn criterion_6(s: &Study) -> bool {
    let mut v = Verdict::default();
    let r = final_rates(s).mesh.expect("clamped rows carry the mesh-dependent error");
    v.rate("mesh-dependent seminorm", r, 1.0, 0.2);
    v.report(6, "clamped cl1 mesh-dependent error order")
}

fn criterion_5() -> bool {
    let (s, _) = study(ExampleId::Cl2, 1, 5);
    let mut v = Verdict::default();
    let r = final_rates(&s);
    v.rate("u L2", r.u_l2, 2.11, 0.25);
    v.rate("phi H1", r.phi_h1, 1.00, 0.1);
    v.rate("lambda L2", r.lambda_l2, 2.36, 0.25);
    v.report(5, "clamped, linear, cl2")
}

fn monomial_integral(a: i32, b: i32) -> f64 {
    // ∫ over the reference triangle of ξ^a η^b = a! b! / (a + b + 2)!.
    let fact = |n: i32| (1..=n).map(f64::from).product::<f64>();
    fact(a) * fact(b) / fact(a + b + 2)
}

fn criterion_7() -> bool {
    let start = Instant::now();
    let mut v = Verdict::default();

    // Symmetry, solve residuals and constraint residuals on small systems.
    let (mut asym, mut solve_res, mut cons_res) = (0.0f64, 0.0f64, 0.0f64);
    for (id, k, n) in [
        (ExampleId::Ss1, 1, 4),
        (ExampleId::Ss2, 2, 4),
        (ExampleId::Ss3, 2, 8),
        (ExampleId::Cl1, 1, 4),
        (ExampleId::Cl2, 1, 8),
    ] {
        let case = catalog(id);
        let q = QuadratureRule::new(8).unwrap();
        let f = &case.f;
        for load in [LoadRule::Interpolated, LoadRule::Quadrature] {
            let sys = BlockSystem::build(mesh(n), k, case.bc, |p| f.eval(p), &q, load).unwrap();
            asym = asym.max(sys.matrix().max_asymmetry());
            let sol = sys.solve(SolverOptions::default()).unwrap();
            solve_res = solve_res.max(recomputed_residual(&sys, &sol.report.solution));
            cons_res = cons_res.max(sys.constraint_residual(&sol));
        }
    }
    v.check(asym <= 1e-12, format!("asymmetry {asym:.1e}"));
    v.check(solve_res <= 1e-10, format!("solve residual {solve_res:.1e}"));
    v.check(cons_res <= 1e-9, format!("constraint residual {cons_res:.1e}"));

    // Monomial exactness of every quadrature degree.
    let mut quad_gap = 0.0f64;
    for d in 1..=12 {
        let q = QuadratureRule::new(d).unwrap();
        for a in 0..=d as i32 {
            for b in 0..=(d as i32 - a) {
                let got: f64 = q.iter().map(|(p, w)| w * p[0].powi(a) * p[1].powi(b)).sum();
                let want = monomial_integral(a, b);
                quad_gap = quad_gap.max((got - want).abs() / want);
            }
        }
    }
    v.check(quad_gap <= 1e-13, format!("quadrature monomial error {quad_gap:.1e}"));

    // Multiplier spaces: dimension and partition of unity.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut dims_ok, mut pou) = (true, 0.0f64);
    for n in 3..=8 {
        for k in 1..=2 {
            for bc in [BcKind::SimplySupported, BcKind::Clamped] {
                let m = MultiplierSpace::build(mesh(n), k, bc).unwrap();
                let zero = FeSpace::new(mesh(n), k, true).unwrap();
                dims_ok &= m.dim() == zero.ndofs();
                if bc == BcKind::Clamped {
                    let full = m.to_full_coefficients(&vec![1.0; m.dim()]);
                    for _ in 0..10 {
                        let p = [rng.random::<f64>(), rng.random::<f64>()];
                        pou = pou.max((m.full_space().eval(&full, p).unwrap().0 - 1.0).abs());
                    }
                }
            }
        }
    }
    v.check(dims_ok, "multiplier dimension equals zero-trace dimension".to_string());
    v.check(pou <= 1e-12, format!("partition of unity error {pou:.1e}"));

    // Defining equation of the discrete Laplacian.
    let mut lap_res = 0.0f64;
    for n in [4, 8] {
        for k in 1..=2 {
            let s = FeSpace::new(mesh(n), k, true).unwrap();
            let lap = DiscreteLaplacian::new(&s).unwrap();
            let u: Vec<f64> = (0..s.ndofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
            lap_res = lap_res.max(lap.residual(&u, &lap.apply(&u).unwrap()));
        }
    }
    v.check(lap_res <= 1e-12, format!("discrete Laplacian residual {lap_res:.1e}"));

    let gap = clamped_elimination_gap(3);
    v.check(gap <= 1e-10, format!("clamped elimination vs dense oracle {gap:.1e}"));

    let fd = ExampleId::ALL.iter().map(|&id| fd_chain_gap(&catalog(id), 25, 1e-2, 11)).fold(0.0, f64::max);
    v.check(fd <= 1e-4, format!("finite-difference derivative chains {fd:.1e}"));

    v.runtime(start.elapsed(), Duration::from_secs(30));
    v.report(7, "property suite")
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= criterion_1();
    ok &= criterion_2();
    ok &= criterion_3();
    let (cl1, took) = study(ExampleId::Cl1, 1, 5);
    ok &= criterion_4(&cl1, took);
    ok &= criterion_5();
    ok &= criterion_6(&cl1);
    ok &= criterion_7();
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
