//! `triharmonic`: convergence studies, single solves and matrix export for
//! the mixed triharmonic discretization.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use triharmonic::assembly::LoadRule;
use triharmonic::convergence::{self, StudyConfig};
use triharmonic::manufactured::catalog;
use triharmonic::quadrature::QuadratureRule;
use triharmonic::saddle::{BlockSystem, MixedSolution};
use triharmonic::solver::DEFAULT_TOLERANCE;
use triharmonic::{BcKind, ExampleId, FemError, Mesh};

#[derive(Parser)]
#[command(name = "triharmonic", version, about = "Mixed finite elements for -Δ³u = f on the unit square")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a refinement study and print the error table.
    Study {
        #[command(flatten)]
        common: Common,
        /// Number of uniform refinements of the initial mesh (at least 2).
        /// Defaults to 6 for simply supported linear, 5 otherwise.
        #[arg(long)]
        levels: Option<usize>,
        /// Table format.
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve on one mesh and dump nodal values as `field,x,y,value` lines.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Refinement level of the mesh (0 is the initial mesh).
        #[arg(long, default_value_t = 0)]
        levels: usize,
        /// Write the dump here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the assembled system matrix as `row col value` lines.
    ExportMatrix {
        #[command(flatten)]
        common: Common,
        /// Refinement level of the mesh (0 is the initial mesh).
        #[arg(long, default_value_t = 0)]
        levels: usize,
        /// Write the matrix here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the right-hand side, one value per line.
        #[arg(long)]
        rhs_out: Option<PathBuf>,
        /// Also write the mesh (vertex lines, then triangle lines).
        #[arg(long)]
        mesh_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Manufactured solution.
    #[arg(long, value_enum)]
    example: Example,
    /// Boundary conditions; must match the example. Inferred when omitted.
    #[arg(long, value_enum)]
    bc: Option<Bc>,
    /// Polynomial degree k of φ and λ (clamped supports k = 1 only).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    degree: u8,
    /// Quadrature degree for loads and error norms (default 2k + 6).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=12))]
    quad_degree: Option<u8>,
    /// Relative residual required of every linear solve.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Discretization of the load functional.
    #[arg(long, value_enum, default_value_t = Load::Interpolated)]
    load: Load,
}

#[derive(Clone, Copy, ValueEnum)]
enum Example {
    Ss1,
    Ss2,
    Ss3,
    Cl1,
    Cl2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bc {
    SimplySupported,
    Clamped,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum Load {
    /// Mass matrix times the nodal interpolant of f.
    Interpolated,
    /// Direct quadrature of ∫ f v.
    Quadrature,
}

/// Failure kinds mapped to exit codes.
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<FemError> for Failure {
    fn from(e: FemError) -> Self {
        match e {
            FemError::UnsupportedDegree(_)
            | FemError::UnknownExample(_)
            | FemError::IncompatibleExample { .. }
            | FemError::InvalidConfig(_)
            | FemError::QuadratureDegree(_) => Failure::Usage(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numerical(format!("i/o error: {e}"))
    }
}

struct Resolved {
    example: ExampleId,
    degree: usize,
    quad_degree: usize,
    tol: f64,
    load: LoadRule,
}

impl Common {
    fn resolve(&self) -> Result<Resolved, Failure> {
        let example = match self.example {
            Example::Ss1 => ExampleId::Ss1,
            Example::Ss2 => ExampleId::Ss2,
            Example::Ss3 => ExampleId::Ss3,
            Example::Cl1 => ExampleId::Cl1,
            Example::Cl2 => ExampleId::Cl2,
        };
        if let Some(bc) = self.bc {
            let bc = match bc {
                Bc::SimplySupported => BcKind::SimplySupported,
                Bc::Clamped => BcKind::Clamped,
            };
            if bc != example.bc() {
                return Err(FemError::IncompatibleExample {
                    example: example.to_string(),
                    expected: example.bc().to_string(),
                }
                .into());
            }
        }
        let degree = self.degree as usize;
        if example.bc() == BcKind::Clamped && degree != 1 {
            return Err(Failure::Usage("clamped boundary conditions support --degree 1 only".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Failure::Usage(format!("--tol {} must lie in (0, 1)", self.tol)));
        }
        Ok(Resolved {
            example,
            degree,
            quad_degree: self.quad_degree.map_or(convergence::default_quad_degree(degree), usize::from),
            tol: self.tol,
            load: match self.load {
                Load::Interpolated => LoadRule::Interpolated,
                Load::Quadrature => LoadRule::Quadrature,
            },
        })
    }
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn study(common: &Common, levels: Option<usize>, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let r = common.resolve()?;
    let default_levels = match (r.example.bc(), r.degree) {
        (BcKind::SimplySupported, 1) => 6,
        _ => 5,
    };
    let mut cfg = StudyConfig::new(r.example, r.degree, levels.unwrap_or(default_levels));
    cfg.quad_degree = r.quad_degree;
    cfg.tolerance = r.tol;
    cfg.load = r.load;
    let start = Instant::now();
    let result = convergence::run_study_with(&cfg, |row| {
        eprintln!(
            "level {}: {} elements, {} unknowns, residual {:.1e}, {:.2} s",
            row.level,
            row.elements,
            row.unknowns,
            row.relative_residual,
            row.elapsed.as_secs_f64()
        );
    })?;
    eprintln!("total {:.2} s", start.elapsed().as_secs_f64());
    let text = match format {
        Format::Csv => result.to_csv(),
        Format::Markdown => result.to_markdown(),
    };
    let mut w = output(out)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn build(r: &Resolved, level: usize) -> Result<(Arc<Mesh>, BlockSystem), Failure> {
    let case = catalog(r.example);
    let mut mesh = Mesh::unit_square(convergence::default_initial_n(case.bc))?;
    for _ in 0..level {
        mesh = mesh.refine();
    }
    let mesh = Arc::new(mesh);
    let q = QuadratureRule::new(r.quad_degree)?;
    let f = &case.f;
    let system = BlockSystem::build(mesh.clone(), r.degree, case.bc, |p| f.eval(p), &q, r.load)?;
    Ok((mesh, system))
}

fn write_dump<W: Write>(w: &mut W, system: &BlockSystem, sol: &MixedSolution) -> io::Result<()> {
    writeln!(w, "field,x,y,value")?;
    let fields = [
        ("u", system.u_space(), system.u_space().to_nodal(&sol.u)),
        ("phi", system.phi_space(), system.phi_space().to_nodal(&sol.phi)),
        ("lambda", system.multiplier().full_space(), sol.lambda_full.clone()),
    ];
    for (name, space, values) in fields {
        for (p, v) in space.nodes().iter().zip(&values) {
            writeln!(w, "{name},{},{},{v:.12e}", p[0], p[1])?;
        }
    }
    Ok(())
}

fn solve(common: &Common, level: usize, out: Option<&Path>) -> Result<(), Failure> {
    let r = common.resolve()?;
    let (mesh, system) = build(&r, level)?;
    let opts = triharmonic::solver::SolverOptions { tolerance: r.tol, ..Default::default() };
    let sol = system.solve(opts)?;
    eprintln!(
        "{} elements, {} unknowns, residual {:.1e}",
        mesh.num_triangles(),
        system.layout().total(),
        sol.report.relative_residual
    );
    let mut w = output(out)?;
    write_dump(&mut w, &system, &sol)?;
    w.flush()?;
    Ok(())
}

fn export(
    common: &Common,
    level: usize,
    out: Option<&Path>,
    rhs_out: Option<&Path>,
    mesh_out: Option<&Path>,
) -> Result<(), Failure> {
    let r = common.resolve()?;
    let (mesh, system) = build(&r, level)?;
    let mut w = output(out)?;
    system.write_matrix(&mut w)?;
    w.flush()?;
    if let Some(p) = rhs_out {
        let mut w = BufWriter::new(File::create(p)?);
        system.write_rhs(&mut w)?;
        w.flush()?;
    }
    if let Some(p) = mesh_out {
        let mut w = BufWriter::new(File::create(p)?);
        mesh.write_dump(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Study { common, levels, format, out } => study(common, *levels, *format, out.as_deref()),
        Command::Solve { common, levels, out } => solve(common, *levels, out.as_deref()),
        Command::ExportMatrix { common, levels, out, rhs_out, mesh_out } => {
            export(common, *levels, out.as_deref(), rhs_out.as_deref(), mesh_out.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
