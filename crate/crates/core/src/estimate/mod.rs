//! Residual error indicators, the Neumann-trace consistency term and
//! errors against exact solutions.

mod bubbles;
mod interpolation;
mod poincare;

pub use bubbles::{bubble_constants, edge_bubble, element_bubble, BubbleConstants};
pub use interpolation::{interpolation_ratios, quasi_interpolate, InterpolationVariant, QuasiInterpolant};
pub use poincare::{
    decomposition_bound, element_poincare_bound, patch_triangles, poincare_patch_bound, split_piece_radius, PatchPoincareBound,
    PieceData,
};

use nalgebra::{DMatrix, DVector};

use crate::assembly::{element_quadrature, flux_series_at, AssemblyConfig, DiscreteSolution, ProblemSpec};
use crate::bem::{element_bem, BemLayout};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesh::{BoundaryClass, PolygonalMesh};
use crate::parallel::map_indices;
use crate::poly::legendre_all;
use crate::quadrature::gauss;

/// Estimator parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Panels per edge of the reference operator used for `δ_K`.
    pub m_ref: usize,
    /// Dyadic grading levels towards a singular point.
    pub singular_levels: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { m_ref: 4, singular_levels: 2 }
    }
}

/// Local and global indicators; `η_K² = h_K²‖R_K‖² + Σ_E h_E‖R_E‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorIndicators {
    pub eta: Vec<f64>,
    /// `h_K ‖R_K‖_{0,K}` per element.
    pub element_residual: Vec<f64>,
    /// `h_E^{1/2} ‖R_E‖_{0,E}` per edge.
    pub edge_residual: Vec<f64>,
    pub delta: Vec<f64>,
    pub eta_r: f64,
    pub delta_r: f64,
}

impl ErrorIndicators {
    /// `(η_R² + δ_R²)^{1/2}`.
    pub fn total(&self) -> f64 {
        self.eta_r.hypot(self.delta_r)
    }

    /// Text dump, one `eta <id> <value>` line per element.
    pub fn dump(&self) -> String {
        self.eta.iter().enumerate().map(|(k, v)| format!("eta {k} {v:.16e}\n")).collect()
    }
}

fn source_at(problem: &ProblemSpec, x: Point2) -> f64 {
    problem.source.as_ref().map_or(0.0, |f| f(x))
}

/// `h_K ‖f + a_K Δu_h‖_{0,K}`.
pub fn element_residual_norm(
    mesh: &PolygonalMesh,
    sol: &DiscreteSolution,
    problem: &ProblemSpec,
    element: usize,
    cfg: &AssemblyConfig,
    est: &EstimatorConfig,
) -> f64 {
    let a = sol.element(element).coefficient;
    let has_bubbles = !sol.bubble_coefficients(element).is_empty();
    if problem.source.is_none() && !has_bubbles {
        return 0.0;
    }
    let mut s = 0.0;
    for qp in element_quadrature(mesh, element, cfg.volume_degree(sol.order), problem.singular_point, est.singular_levels) {
        let r = source_at(problem, qp.point) + a * sol.laplacian(element, qp.point);
        s += qp.weight * r * r;
    }
    mesh.element(element).diameter * s.sqrt()
}

/// Conormal flux `a_K γ̃1 u_h` of the element at parameter `s` along the
/// global direction of `edge`.
fn conormal_on_edge(mesh: &PolygonalMesh, sol: &DiscreteSolution, element: usize, edge: usize, s: f64) -> f64 {
    let e = mesh.local_edge(element, edge).expect("edge belongs to element");
    let t = if mesh.edge_forward(element, e) { s } else { -s };
    sol.element(element).coefficient * sol.flux_at(mesh, element, e, t)
}

/// `h_E^{1/2} ‖R_E‖_{0,E}`; zero on Dirichlet edges.
pub fn edge_residual_norm(mesh: &PolygonalMesh, sol: &DiscreteSolution, problem: &ProblemSpec, edge: usize, cfg: &AssemblyConfig) -> f64 {
    let ed = mesh.edge(edge);
    if ed.boundary_class == BoundaryClass::Dirichlet {
        return 0.0;
    }
    let (a, b) = (mesh.position(ed.endpoints.0), mesh.position(ed.endpoints.1));
    let rule = gauss((cfg.edge_degree(sol.order) + 4) / 2);
    let jac = 0.5 * ed.length;
    let mut s2 = 0.0;
    for (s, w) in rule.nodes.iter().zip(&rule.weights) {
        let r = match ed.boundary_class {
            BoundaryClass::Neumann => {
                let x = a.lerp(b, 0.5 * (s + 1.0));
                let g = problem.neumann.as_ref().map_or(0.0, |g| g(x));
                g - conormal_on_edge(mesh, sol, ed.incident_elements[0], edge, *s)
            }
            _ => {
                let jump: f64 = ed.incident_elements.iter().map(|&k| conormal_on_edge(mesh, sol, k, edge, *s)).sum();
                -0.5 * jump
            }
        };
        s2 += w * jac * r * r;
    }
    ed.length.sqrt() * s2.sqrt()
}

/// `δ_K = a_K ‖γ1^ref u_h - γ̃1 u_h‖_{0,∂K}` with the reference trace from an
/// enriched element operator with `m_ref` panels per edge.
pub fn delta_estimate(mesh: &PolygonalMesh, sol: &DiscreteSolution, element: usize, cfg: &AssemblyConfig, est: &EstimatorConfig) -> Result<f64> {
    let data = sol.element(element);
    let prod = data.bem.layout();
    let refl = BemLayout::enriched(sol.order, est.m_ref);
    if prod == refl {
        return Ok(0.0);
    }
    let pts = mesh.element_points(element);
    let reference = element_bem(&pts, refl, &cfg.bem)?;
    let trace = sol.harmonic_trace(element);
    let fr = reference.neumann(trace);
    let fp = sol.harmonic_flux(element);
    let pieces = refl.sub * prod.sub;
    let rule = gauss(refl.flux_modes + 2);
    let mut s2 = 0.0;
    for e in 0..pts.len() {
        let half = 0.5 * pts[e].dist(pts[(e + 1) % pts.len()]);
        for j in 0..pieces {
            let t0 = -1.0 + 2.0 * j as f64 / pieces as f64;
            let h = 1.0 / pieces as f64;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let t = t0 + h * (x + 1.0);
                let d = flux_series_at(&fr, refl, e, t) - flux_series_at(fp, prod, e, t);
                s2 += w * h * half * d * d;
            }
        }
    }
    Ok(data.coefficient * s2.sqrt())
}

/// All indicators of a solution.
pub fn eta(mesh: &PolygonalMesh, sol: &DiscreteSolution, problem: &ProblemSpec, cfg: &AssemblyConfig, est: &EstimatorConfig) -> Result<ErrorIndicators> {
    let element_residual = map_indices(mesh.num_elements(), |k| element_residual_norm(mesh, sol, problem, k, cfg, est));
    let edge_residual = map_indices(mesh.num_edges(), |e| edge_residual_norm(mesh, sol, problem, e, cfg));
    let delta = map_indices(mesh.num_elements(), |k| delta_estimate(mesh, sol, k, cfg, est)).into_iter().collect::<Result<Vec<_>>>()?;
    let eta: Vec<f64> = mesh
        .elements()
        .iter()
        .map(|el| (element_residual[el.id].powi(2) + el.edges.iter().map(|&e| edge_residual[e].powi(2)).sum::<f64>()).sqrt())
        .collect();
    let eta_r = eta.iter().map(|v| v * v).sum::<f64>().sqrt();
    let delta_r = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(ErrorIndicators { eta, element_residual, edge_residual, delta, eta_r, delta_r })
}

/// Errors and norms of the exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `‖u - u_h‖_b`.
    pub energy: f64,
    pub l2: f64,
    /// `‖u‖_b`.
    pub exact_energy: f64,
    /// `|u|_{1,Ω}`.
    pub exact_h1: f64,
    pub exact_l2: f64,
}

/// Errors of `u_h` against the exact solution of the problem.
pub fn energy_error(mesh: &PolygonalMesh, sol: &DiscreteSolution, problem: &ProblemSpec, cfg: &AssemblyConfig, est: &EstimatorConfig) -> Result<ErrorNorms> {
    let (Some(u), Some(du)) = (&problem.exact, &problem.exact_gradient) else {
        return Err(Error::Problem(format!("problem '{}' has no exact solution", problem.name)));
    };
    let degree = cfg.volume_degree(sol.order);
    let parts = map_indices(mesh.num_elements(), |k| -> Result<[f64; 5]> {
        let a = sol.element(k).coefficient;
        let mut r = [0.0; 5];
        for qp in element_quadrature(mesh, k, degree, problem.singular_point, est.singular_levels) {
            let (v, g) = sol.value_and_gradient(k, qp.point)?;
            let (ue, ge) = (u(qp.point), du(qp.point));
            let d = ge - g;
            r[0] += qp.weight * a * d.dot(d);
            r[1] += qp.weight * (ue - v).powi(2);
            r[2] += qp.weight * a * ge.dot(ge);
            r[3] += qp.weight * ge.dot(ge);
            r[4] += qp.weight * ue * ue;
        }
        Ok(r)
    });
    let mut t = [0.0; 5];
    for p in parts {
        for (a, b) in t.iter_mut().zip(p?) {
            *a += b;
        }
    }
    Ok(ErrorNorms { energy: t[0].sqrt(), l2: t[1].sqrt(), exact_energy: t[2].sqrt(), exact_h1: t[3].sqrt(), exact_l2: t[4].sqrt() })
}

/// Data oscillation `h_K ‖f - Π_k f‖_{0,K}` per element plus
/// `h_E^{1/2} ‖g_N - Π_k g_N‖_{0,E}` of its Neumann edges, with `L2` projections of degree `k`.
pub fn oscillation(mesh: &PolygonalMesh, problem: &ProblemSpec, k: usize, cfg: &AssemblyConfig, est: &EstimatorConfig) -> Vec<f64> {
    map_indices(mesh.num_elements(), |id| {
        let el = mesh.element(id);
        let mut osc2 = 0.0;
        if let Some(f) = &problem.source {
            let (z, h) = (el.kernel_center, el.diameter);
            let exps: Vec<(i32, i32)> = (0..=k as i32).flat_map(|d| (0..=d).map(move |b| (d - b, b))).collect();
            let rule = element_quadrature(mesh, id, cfg.volume_degree(k) + k, problem.singular_point, est.singular_levels);
            let n = exps.len();
            let mut m = DMatrix::<f64>::zeros(n, n);
            let mut rhs = DVector::<f64>::zeros(n);
            let basis = |x: Point2| -> Vec<f64> {
                let (sx, sy) = ((x.x - z.x) / h, (x.y - z.y) / h);
                exps.iter().map(|&(a, b)| sx.powi(a) * sy.powi(b)).collect()
            };
            let vals: Vec<(Vec<f64>, f64, f64)> = rule.iter().map(|qp| (basis(qp.point), f(qp.point), qp.weight)).collect();
            for (b, fv, w) in &vals {
                for i in 0..n {
                    rhs[i] += w * fv * b[i];
                    for j in 0..n {
                        m[(i, j)] += w * b[i] * b[j];
                    }
                }
            }
            let c = m.cholesky().map(|ch| ch.solve(&rhs)).unwrap_or_else(|| DVector::zeros(n));
            let r2: f64 = vals.iter().map(|(b, fv, w)| w * (fv - b.iter().zip(c.iter()).map(|(x, y)| x * y).sum::<f64>()).powi(2)).sum();
            osc2 += h * h * r2;
        }
        if let Some(g) = &problem.neumann {
            let rule = gauss(cfg.edge_degree(k) / 2 + k + 2);
            let mut leg = vec![0.0; k + 1];
            for &e in &el.edges {
                let ed = mesh.edge(e);
                if ed.boundary_class != BoundaryClass::Neumann {
                    continue;
                }
                let (a, b) = (mesh.position(ed.endpoints.0), mesh.position(ed.endpoints.1));
                let gv: Vec<f64> = rule.nodes.iter().map(|t| g(a.lerp(b, 0.5 * (t + 1.0)))).collect();
                let mut c = vec![0.0; k + 1];
                for ((t, w), gx) in rule.nodes.iter().zip(&rule.weights).zip(&gv) {
                    legendre_all(k, *t, &mut leg);
                    for l in 0..=k {
                        c[l] += 0.5 * (2 * l + 1) as f64 * w * gx * leg[l];
                    }
                }
                let mut r2 = 0.0;
                for ((t, w), gx) in rule.nodes.iter().zip(&rule.weights).zip(&gv) {
                    legendre_all(k, *t, &mut leg);
                    let p: f64 = c.iter().zip(&leg).map(|(a, b)| a * b).sum();
                    r2 += w * 0.5 * ed.length * (gx - p).powi(2);
                }
                osc2 += ed.length * r2;
            }
        }
        osc2.sqrt()
    })
}
