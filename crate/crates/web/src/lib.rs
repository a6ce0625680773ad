//! wasm-bindgen bindings for the demo page in `www/`.

use bemfem::adapt::{doerfler_mark, dof_count};
use bemfem::app::{builtin_problem, BuiltinProblem, StudyRecord};
use bemfem::assembly::{solve_problem, AssemblyConfig, DiscreteSolution};
use bemfem::estimate::{eta, ErrorIndicators, EstimatorConfig};
use bemfem::geometry::{contains_point, inscribed_circle, polygon_kernel, Point2};
use bemfem::mesh::{split_elements, PolygonalMesh};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn msg(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn points(coords: &[f64]) -> Vec<Point2> {
    coords.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect()
}

/// Kernel and largest inscribed kernel disc of a counter-clockwise polygon
/// given as `[x0, y0, x1, y1, ...]`.
///
/// Returns `[cx, cy, r, kx0, ky0, kx1, ky1, ...]`; `r = 0` and no kernel
/// vertices when the polygon is not star-shaped.
#[wasm_bindgen]
pub fn kernel(coords: &[f64]) -> Result<Vec<f64>, JsValue> {
    kernel_of(coords).map_err(|e| JsValue::from_str(&e))
}

pub fn kernel_of(coords: &[f64]) -> Result<Vec<f64>, String> {
    let poly = points(coords);
    let hull = polygon_kernel(&poly).map_err(msg)?;
    let mut out = match inscribed_circle(&poly) {
        Ok((c, r)) if !hull.is_empty() => vec![c.x, c.y, r],
        _ => return Ok(vec![0.0, 0.0, 0.0]),
    };
    out.extend(hull.iter().flat_map(|p| [p.x, p.y]));
    Ok(out)
}

/// Stepwise adaptive solver on one of the built-in problems.
#[wasm_bindgen]
pub struct Session {
    problem: BuiltinProblem,
    order: usize,
    theta: f64,
    cfg: AssemblyConfig,
    est: EstimatorConfig,
    mesh: PolygonalMesh,
    solution: Option<DiscreteSolution>,
    indicators: Option<ErrorIndicators>,
    history: Vec<StudyRecord>,
    marked: Vec<usize>,
}

#[wasm_bindgen]
impl Session {
    #[wasm_bindgen(constructor)]
    pub fn new(problem: &str, order: usize, theta: f64) -> Result<Session, JsValue> {
        Self::create(problem, order, theta).map_err(|e| JsValue::from_str(&e))
    }

    /// Refines the elements marked by the previous solve (if any), then
    /// solves and estimates. Returns the new table row as JSON.
    pub fn step(&mut self) -> Result<String, JsValue> {
        self.advance().map_err(|e| JsValue::from_str(&e))
    }

    /// Element polygons with their indicators and marking flags as JSON:
    /// `{"polygons": [[x0, y0, ...], ...], "eta": [...], "marked": [...]}`.
    pub fn mesh(&self) -> String {
        let polygons: Vec<Vec<f64>> =
            (0..self.mesh.num_elements()).map(|k| self.mesh.element_points(k).iter().flat_map(|p| [p.x, p.y]).collect()).collect();
        let eta = self.indicators.as_ref().map(|i| i.eta.clone()).unwrap_or_default();
        json!({ "polygons": polygons, "eta": eta, "marked": self.marked }).to_string()
    }

    /// Discrete solution on an `nx × ny` grid over the domain, row by row
    /// from the bottom; NaN before the first solve.
    pub fn sample(&self, nx: usize, ny: usize) -> Vec<f64> {
        let d = self.problem.domain;
        let mut out = vec![f64::NAN; nx * ny];
        let Some(sol) = &self.solution else { return out };
        let polys: Vec<Vec<Point2>> = (0..self.mesh.num_elements()).map(|k| self.mesh.element_points(k)).collect();
        let mut last = 0;
        for j in 0..ny {
            for i in 0..nx {
                let x = Point2::new(
                    d.x0 + (i as f64 + 0.5) / nx as f64 * (d.x1 - d.x0),
                    d.y0 + (j as f64 + 0.5) / ny as f64 * (d.y1 - d.y0),
                );
                // neighbouring samples usually share an element
                let hit = std::iter::once(last).chain(0..polys.len()).find(|&k| contains_point(&polys[k], x));
                if let Some(k) = hit {
                    last = k;
                    // points on an edge are moved slightly into the element
                    let inner = x.lerp(self.mesh.element(k).kernel_center, 1e-7);
                    out[j * nx + i] = sol.value(k, x).or_else(|_| sol.value(k, inner)).unwrap_or(f64::NAN);
                }
            }
        }
        out
    }

    /// Domain bounds `[x0, y0, x1, y1]`.
    pub fn domain(&self) -> Vec<f64> {
        let d = self.problem.domain;
        vec![d.x0, d.y0, d.x1, d.y1]
    }
}

impl Session {
    pub fn create(problem: &str, order: usize, theta: f64) -> Result<Session, String> {
        if !(1..=3).contains(&order) {
            return Err("order must be 1, 2 or 3".into());
        }
        let problem = builtin_problem(problem).map_err(msg)?;
        let mesh = problem.initial_mesh();
        Ok(Session {
            problem,
            order,
            theta: theta.clamp(0.0, 1.0),
            cfg: AssemblyConfig::default(),
            est: EstimatorConfig::default(),
            mesh,
            solution: None,
            indicators: None,
            history: Vec::new(),
            marked: Vec::new(),
        })
    }


    pub fn advance(&mut self) -> Result<String, String> {
        if self.solution.is_some() && !self.marked.is_empty() {
            let (mesh, _) = split_elements(&self.mesh, &self.marked).map_err(msg)?;
            self.mesh = mesh;
        }
        let spec = &self.problem.spec;
        let sol = solve_problem(&self.mesh, self.order, spec, &self.cfg).map_err(msg)?;
        let ind = eta(&self.mesh, &sol, spec, &self.cfg, &self.est).map_err(msg)?;
        let rec = StudyRecord::measure(self.history.len(), &self.mesh, &sol, &ind, spec, &self.cfg, &self.est, self.history.last(), true)
            .map_err(msg)?;
        self.marked = doerfler_mark(&ind.eta, self.theta);
        let row = json!({
            "step": rec.step,
            "elements": self.mesh.num_elements(),
            "dof": dof_count(&sol),
            "eta": rec.eta_r,
            "delta": rec.delta_r,
            "error": rec.energy_error,
            "eoc": rec.eoc_energy,
            "marked": self.marked.len(),
        });
        self.history.push(rec);
        self.solution = Some(sol);
        self.indicators = Some(ind);
        Ok(row.to_string())
    }
}
