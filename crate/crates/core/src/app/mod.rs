//! Built-in problems, convergence studies and result files.

pub mod config;
pub mod export;

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use crate::adapt::{adapt_loop, dof_count, AdaptConfig};
use crate::assembly::{solve_problem, AssemblyConfig, DiscreteSolution, ProblemSpec};
use crate::error::{Error, Result};
use crate::estimate::{energy_error, eta, ErrorIndicators, EstimatorConfig};
use crate::geometry::Point2;
use crate::mesh::{generate_structured, BoundaryTag, PolygonalMesh, Rect, StructuredKind};
use crate::space::BoundaryData;

/// Exponent and coefficient of the jumping-coefficient solution. With
/// `τ = tan(λπ/4)`, `sin(λπ/4) / sin(3λπ/4) = 1 / (3 - 4τ²/(1+τ²))`.
pub fn jump_parameters() -> (f64, f64) {
    let tau2: f64 = 103.0 / 301.0;
    let lambda = 4.0 / PI * tau2.sqrt().atan();
    let beta = -100.0 / (3.0 - 4.0 * tau2 / (1.0 + tau2));
    (lambda, beta)
}

fn in_upper_quadrant(x: Point2) -> bool {
    x.x > 0.0 && x.y > 0.0
}

/// `u = r^λ cos(λ(φ - π/4))` on the upper-right quadrant and
/// `β r^λ cos(λ(π - |φ - π/4|))` elsewhere, `φ ∈ (-π, π]`.
pub fn jump_solution(x: Point2) -> f64 {
    let (lambda, beta) = jump_parameters();
    let r = x.norm();
    if r == 0.0 {
        return 0.0;
    }
    let phi = x.y.atan2(x.x);
    if in_upper_quadrant(x) {
        r.powf(lambda) * (lambda * (phi - PI / 4.0)).cos()
    } else {
        beta * r.powf(lambda) * (lambda * (PI - (phi - PI / 4.0).abs())).cos()
    }
}

pub fn jump_gradient(x: Point2) -> Point2 {
    let (lambda, beta) = jump_parameters();
    let r = x.norm();
    if r == 0.0 {
        return Point2::new(0.0, 0.0);
    }
    let phi = x.y.atan2(x.x);
    let (f, df) = if in_upper_quadrant(x) {
        let s = lambda * (phi - PI / 4.0);
        (s.cos(), -lambda * s.sin())
    } else {
        let d = phi - PI / 4.0;
        let s = lambda * (PI - d.abs());
        (beta * s.cos(), beta * lambda * s.sin() * d.signum())
    };
    let rl = r.powf(lambda - 1.0);
    let (er, ep) = (Point2::new(phi.cos(), phi.sin()), Point2::new(-phi.sin(), phi.cos()));
    er * (lambda * rl * f) + ep * (rl * df)
}

/// A named problem with its mesh family.
#[derive(Debug, Clone)]
pub struct BuiltinProblem {
    pub spec: ProblemSpec,
    pub domain: Rect,
    /// Element type of the uniform meshes.
    pub kind: StructuredKind,
    /// Subdivisions of the initial adaptive mesh.
    pub initial: usize,
}

impl BuiltinProblem {
    pub fn mesh(&self, n: usize) -> PolygonalMesh {
        generate_structured(self.kind, n, self.domain, |_, _| BoundaryTag::Dirichlet)
    }

    pub fn initial_mesh(&self) -> PolygonalMesh {
        self.mesh(self.initial)
    }
}

pub const PROBLEMS: [&str; 2] = ["sinsin", "jump_singular"];

pub fn builtin_problem(name: &str) -> Result<BuiltinProblem> {
    match name {
        "sinsin" => {
            let mut spec = ProblemSpec::laplace("sinsin", BoundaryData::zero());
            spec.source = Some(Arc::new(|x: Point2| 2.0 * PI * PI * (PI * x.x).sin() * (PI * x.y).sin()));
            spec.exact = Some(Arc::new(|x: Point2| (PI * x.x).sin() * (PI * x.y).sin()));
            spec.exact_gradient = Some(Arc::new(|x: Point2| {
                Point2::new(PI * (PI * x.x).cos() * (PI * x.y).sin(), PI * (PI * x.x).sin() * (PI * x.y).cos())
            }));
            Ok(BuiltinProblem { spec, domain: Rect::unit(), kind: StructuredKind::LTiles, initial: 4 })
        }
        "jump_singular" => {
            let mut spec = ProblemSpec::laplace("jump_singular", BoundaryData::Function(Arc::new(jump_solution)));
            spec.diffusion = Arc::new(|x: Point2| if in_upper_quadrant(x) { 100.0 } else { 1.0 });
            spec.exact = Some(Arc::new(jump_solution));
            spec.exact_gradient = Some(Arc::new(jump_gradient));
            spec.singular_point = Some(Point2::new(0.0, 0.0));
            Ok(BuiltinProblem { spec, domain: Rect::new(-1.0, -1.0, 1.0, 1.0), kind: StructuredKind::Squares, initial: 4 })
        }
        _ => Err(Error::UnknownProblem(name.to_string())),
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRecord {
    pub step: usize,
    pub h_max: f64,
    pub dof: usize,
    pub eta_r: f64,
    pub delta_r: f64,
    /// `‖u - u_h‖_b`.
    pub energy_error: Option<f64>,
    pub l2_error: Option<f64>,
    pub eoc_energy: Option<f64>,
    pub eoc_l2: Option<f64>,
    /// `‖u‖_b`, `|u|_1` and `‖u‖_0` for relative quantities.
    pub exact_energy: Option<f64>,
    pub exact_h1: Option<f64>,
    pub exact_l2: Option<f64>,
    /// Relative residual of the global solve.
    pub solver_residual: f64,
}

/// Slope of `log(e)` against `log(x)` between two rows.
pub fn eoc(e0: f64, e1: f64, x0: f64, x1: f64) -> f64 {
    (e1 / e0).ln() / (x1 / x0).ln()
}

impl StudyRecord {
    /// Abscissa of the EOC: `h_max`, or `DoF^{-1/2}` for adaptive runs.
    pub fn scale(&self, adaptive: bool) -> f64 {
        if adaptive {
            (self.dof as f64).powf(-0.5)
        } else {
            self.h_max
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn measure(
        step: usize,
        mesh: &PolygonalMesh,
        sol: &DiscreteSolution,
        ind: &ErrorIndicators,
        problem: &ProblemSpec,
        cfg: &AssemblyConfig,
        est: &EstimatorConfig,
        prev: Option<&StudyRecord>,
        adaptive: bool,
    ) -> Result<Self> {
        let norms = if problem.exact.is_some() { Some(energy_error(mesh, sol, problem, cfg, est)?) } else { None };
        let mut rec = StudyRecord {
            step,
            h_max: mesh.h_max(),
            dof: dof_count(sol),
            eta_r: ind.eta_r,
            delta_r: ind.delta_r,
            energy_error: norms.as_ref().map(|n| n.energy),
            l2_error: norms.as_ref().map(|n| n.l2),
            eoc_energy: None,
            eoc_l2: None,
            exact_energy: norms.as_ref().map(|n| n.exact_energy),
            exact_h1: norms.as_ref().map(|n| n.exact_h1),
            exact_l2: norms.as_ref().map(|n| n.exact_l2),
            solver_residual: sol.report.residual,
        };
        if let Some(p) = prev {
            let (x0, x1) = (p.scale(adaptive), rec.scale(adaptive));
            if x0 != x1 {
                rec.eoc_energy = p.energy_error.zip(rec.energy_error).map(|(a, b)| eoc(a, b, x0, x1));
                rec.eoc_l2 = p.l2_error.zip(rec.l2_error).map(|(a, b)| eoc(a, b, x0, x1));
            }
        }
        Ok(rec)
    }
}

/// Uniform meshes with `initial · 2^i` subdivisions, `i < levels`.
pub fn run_uniform_study(
    problem: &BuiltinProblem,
    order: usize,
    levels: usize,
    cfg: &AssemblyConfig,
    est: &EstimatorConfig,
) -> Result<Vec<StudyRecord>> {
    let mut rows: Vec<StudyRecord> = Vec::new();
    for i in 0..levels {
        let mesh = problem.mesh(problem.initial << i);
        let sol = solve_problem(&mesh, order, &problem.spec, cfg)?;
        let ind = eta(&mesh, &sol, &problem.spec, cfg, est)?;
        let rec = StudyRecord::measure(i, &mesh, &sol, &ind, &problem.spec, cfg, est, rows.last(), false)?;
        rows.push(rec);
    }
    Ok(rows)
}

/// Adaptive loop from the initial mesh; artifacts go to `out` when given.
pub fn run_adaptive_study(
    problem: &BuiltinProblem,
    config: &AdaptConfig,
    cfg: &AssemblyConfig,
    est: &EstimatorConfig,
    out: Option<&Path>,
) -> Result<Vec<StudyRecord>> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    Ok(adapt_loop(problem.initial_mesh(), &problem.spec, config, cfg, est, out)?.history)
}

/// Least-squares slope of `log(y)` over `log(x)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
