//! Element blocks of the approximated bilinear form, load functionals and
//! the decoupled global and element-bubble systems.
//!
//! On an element `K` a discrete function is stored as the trace `t` of its
//! harmonic part plus bubble coefficients `c`. The bubbles are
//! `ψ_b = q_b - h_b` with a polynomial `q_b`, `-Δq_b = p_b`, and `h_b` the
//! harmonic extension of `q_b|∂K`, so `u_h = h(t - T c) + Σ c_b q_b` where
//! the columns of `T` are the traces of the `q_b`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::bem::{element_bem, BemLayout, BemSettings, ElementBem};
use crate::bem::operator::bubble_index;
use crate::error::{Error, Result, SolveError};
use crate::geometry::Point2;
use crate::mesh::{build_aux_triangulation, BoundaryClass, PolygonalMesh};
use crate::parallel::map_indices;
use crate::poly::{eval_legendre_series, integrated_legendre, particular_solution, Poly2};
use crate::quadrature::{gauss, triangle_rule, triangle_rule_graded, QuadPoint};
use crate::solve::{solve_spd, CgConfig, CsrMatrix, SolveReport};
use crate::space::{
    bubble_exponents, dirichlet_interpolant, edge_bubble_coefficients, BoundaryData, DofHandler, GlobalDof, LocalDof, ScalarFn,
};

pub type VectorFn = Arc<dyn Fn(Point2) -> Point2 + Send + Sync>;

/// Mixed boundary value problem `-div(a ∇u) = f`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    /// Diffusion coefficient; must be constant on every element.
    pub diffusion: ScalarFn,
    /// `None` means `f ≡ 0`.
    pub source: Option<ScalarFn>,
    pub dirichlet: BoundaryData,
    /// Conormal data `a ∂_n u` on Neumann edges; `None` means zero.
    pub neumann: Option<ScalarFn>,
    pub exact: Option<ScalarFn>,
    pub exact_gradient: Option<VectorFn>,
    /// Point where the solution is singular; quadrature is graded towards it.
    pub singular_point: Option<Point2>,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec").field("name", &self.name).field("dirichlet", &self.dirichlet).finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// Laplace problem with unit coefficient and the given Dirichlet data.
    pub fn laplace(name: &str, dirichlet: BoundaryData) -> Self {
        Self {
            name: name.to_string(),
            diffusion: Arc::new(|_| 1.0),
            source: None,
            dirichlet,
            neumann: None,
            exact: None,
            exact_gradient: None,
            singular_point: None,
        }
    }
}

/// Numerical parameters of the assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyConfig {
    pub bem: BemSettings,
    /// Panels per edge of an enriched element operator; `None` is the
    /// standard layout with flux degree `k - 1`.
    pub enriched: Option<usize>,
    /// Volume quadrature degree, default `2k + 4`.
    pub volume_order: Option<usize>,
    /// Edge quadrature degree, default `2k + 2`.
    pub edge_order: Option<usize>,
    pub cg: CgConfig,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        Self { bem: BemSettings::default(), enriched: None, volume_order: None, edge_order: None, cg: CgConfig::default() }
    }
}

impl AssemblyConfig {
    pub fn layout(&self, k: usize) -> BemLayout {
        match self.enriched {
            Some(sub) => BemLayout::enriched(k, sub),
            None => BemLayout::standard(k),
        }
    }

    pub fn volume_degree(&self, k: usize) -> usize {
        self.volume_order.unwrap_or(2 * k + 4)
    }

    pub fn edge_degree(&self, k: usize) -> usize {
        self.edge_order.unwrap_or(2 * k + 2)
    }
}

/// Element bubbles of one element.
#[derive(Debug, Clone)]
pub struct BubbleData {
    /// Loads `p_b` in physical coordinates.
    pub loads: Vec<Poly2>,
    /// Particular solutions `q_b`.
    pub particular: Vec<Poly2>,
    /// Trace coefficients of the `q_b` (one column each).
    pub traces: DMatrix<f64>,
    /// `b_h(ψ_a, ψ_b)`.
    pub block: DMatrix<f64>,
    /// `(f, ψ_b)_K`.
    pub load: DVector<f64>,
}

impl BubbleData {
    pub fn len(&self) -> usize {
        self.loads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
    }
}

/// Element contributions, kept for post-processing.
#[derive(Debug, Clone)]
pub struct ElementData {
    pub bem: ElementBem,
    pub coefficient: f64,
    pub dofs: Vec<LocalDof>,
    /// `a_K` times the symmetrised stiffness over the local trace functions.
    pub stiffness: DMatrix<f64>,
    /// `(f, ψ_i)_K + (g_N, ψ_i)_{∂K ∩ Γ_N}` per local trace function.
    pub load: DVector<f64>,
    pub bubbles: BubbleData,
}

/// Global harmonic system with the Dirichlet lift moved to the right-hand side.
#[derive(Debug, Clone)]
pub struct ApproximatedSystem {
    pub order: usize,
    pub handler: DofHandler,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Dirichlet dof values.
    pub fixed: Vec<f64>,
    pub elements: Arc<Vec<ElementData>>,
    pub cg: CgConfig,
}

/// Value of the diffusion coefficient on an element; checked at the
/// centroids of its auxiliary triangles.
pub fn element_coefficient(mesh: &PolygonalMesh, element: usize, problem: &ProblemSpec) -> Result<f64> {
    let mut value = None;
    for t in build_aux_triangulation(mesh, element) {
        let [a, b, c] = t.vertices;
        let v = (problem.diffusion)((a + b + c) * (1.0 / 3.0));
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Problem(format!("diffusion coefficient {v} on element {element} is not positive")));
        }
        match value {
            None => value = Some(v),
            Some(w) if (v - w).abs() > 1e-12 * w => {
                return Err(Error::Problem(format!("element {element} straddles coefficient regions ({w} and {v})")))
            }
            _ => {}
        }
    }
    Ok(value.expect("element has edges"))
}

/// Quadrature on the auxiliary triangles of an element, graded by `levels`
/// dyadic subdivisions towards `singular` where a triangle touches it.
pub fn element_quadrature(mesh: &PolygonalMesh, element: usize, degree: usize, singular: Option<Point2>, levels: usize) -> Vec<QuadPoint> {
    let mut out = Vec::new();
    for t in build_aux_triangulation(mesh, element) {
        let [zb, ze, zk] = t.vertices;
        let s = match singular {
            Some(s) if levels > 0 && t.contains(s) => s,
            _ => {
                out.extend(triangle_rule(zk, zb, ze, degree));
                continue;
            }
        };
        let tol = 1e-12 * t.diameter();
        if let Some(i) = t.vertices.iter().position(|v| v.dist(s) <= tol) {
            let [a, b, c] = [t.vertices[i], t.vertices[(i + 1) % 3], t.vertices[(i + 2) % 3]];
            out.extend(triangle_rule_graded(a, b, c, degree, levels));
        } else {
            for (a, b) in [(zb, ze), (ze, zk), (zk, zb)] {
                if (a - s).cross(b - s).abs() > tol * t.diameter() {
                    out.extend(triangle_rule_graded(s, a, b, degree, levels));
                }
            }
        }
    }
    out
}

/// Harmonic block `a_K (γ̃1 ψ_j, γ0 ψ_i)_{∂K}` over the local trace functions.
pub fn element_stiffness(bem: &ElementBem, coefficient: f64) -> DMatrix<f64> {
    bem.op.stiffness() * coefficient
}

/// Trace coefficients of a polynomial of degree `<= k` in the element trace basis.
pub fn polynomial_trace(vertices: &[Point2], k: usize, q: &Poly2) -> DVector<f64> {
    let m = vertices.len();
    let mut t = DVector::zeros(m * k);
    let f = |p: Point2| q.eval(p.x, p.y);
    for (i, v) in vertices.iter().enumerate() {
        t[i] = f(*v);
    }
    for e in 0..m {
        let c = edge_bubble_coefficients(&f, vertices[e], vertices[(e + 1) % m], k);
        for i in 2..=k {
            t[bubble_index(m, k, e, i)] = c[i - 2];
        }
    }
    t
}

/// Bubble loads, particular solutions, traces and the block
/// `B_ab = a_K ((∇q_a, ∇q_b)_K - t_aᵀ S t_b)`, which equals the
/// homogenised form with `γ̃1` applied to the harmonic correction.
pub fn element_bubble_block(mesh: &PolygonalMesh, element: usize, k: usize, bem: &ElementBem, coefficient: f64) -> BubbleData {
    let el = mesh.element(element);
    let verts = mesh.element_points(element);
    let (z, h) = (el.kernel_center, el.diameter);
    let nt = bem.op.trace_dim();
    let exps = bubble_exponents(k);
    let nb = exps.len();
    let mut loads = Vec::with_capacity(nb);
    let mut particular = Vec::with_capacity(nb);
    let mut traces = DMatrix::zeros(nt, nb);
    for (b, &(i, j)) in exps.iter().enumerate() {
        let p = Poly2::monomial(i, j, 1.0);
        let q = particular_solution(&p).scale(h * h).to_global(z, h);
        traces.set_column(b, &polynomial_trace(&verts, k, &q));
        loads.push(p.to_global(z, h));
        particular.push(q);
    }
    let mut block = DMatrix::zeros(nb, nb);
    if nb > 0 {
        let rule = element_quadrature(mesh, element, 2 * k - 2, None, 0);
        let grads: Vec<(Poly2, Poly2)> = particular.iter().map(|q| (q.dx(), q.dy())).collect();
        for qp in &rule {
            let g: Vec<(f64, f64)> = grads.iter().map(|(gx, gy)| (gx.eval(qp.point.x, qp.point.y), gy.eval(qp.point.x, qp.point.y))).collect();
            for a in 0..nb {
                for b in 0..nb {
                    block[(a, b)] += qp.weight * (g[a].0 * g[b].0 + g[a].1 * g[b].1);
                }
            }
        }
        block -= traces.transpose() * bem.op.stiffness() * &traces;
        block = (&block + block.transpose()) * (0.5 * coefficient);
    }
    BubbleData { loads, particular, traces, block, load: DVector::zeros(nb) }
}

/// Local trace shapes on local edge `e` at parameter `t`: `(trace index, value)`.
fn edge_shapes(m: usize, k: usize, e: usize, t: f64) -> Vec<(usize, f64)> {
    let mut out = vec![(e, 0.5 * (1.0 - t)), ((e + 1) % m, 0.5 * (1.0 + t))];
    for i in 2..=k {
        out.push((bubble_index(m, k, e, i), integrated_legendre(i, t)));
    }
    out
}

/// Volume and Neumann loads of the harmonic trace functions and the bubbles.
fn element_loads(
    mesh: &PolygonalMesh,
    element: usize,
    k: usize,
    bem: &ElementBem,
    bubbles: &mut BubbleData,
    problem: &ProblemSpec,
    cfg: &AssemblyConfig,
) -> Result<DVector<f64>> {
    let nt = bem.op.trace_dim();
    let mut load = DVector::zeros(nt);
    if let Some(f) = &problem.source {
        for qp in element_quadrature(mesh, element, cfg.volume_degree(k), problem.singular_point, 2) {
            let fw = f(qp.point) * qp.weight;
            if fw == 0.0 {
                continue;
            }
            let (vals, _) = bem.basis_at(qp.point, false)?;
            for (l, v) in load.iter_mut().zip(&vals) {
                *l += fw * v;
            }
            for b in 0..bubbles.len() {
                let h: f64 = (0..nt).map(|t| vals[t] * bubbles.traces[(t, b)]).sum();
                bubbles.load[b] += fw * (bubbles.particular[b].eval(qp.point.x, qp.point.y) - h);
            }
        }
    }
    if let Some(g) = &problem.neumann {
        let el = mesh.element(element);
        let m = el.num_vertices();
        let rule = gauss((cfg.edge_degree(k) + 2) / 2);
        for e in 0..m {
            if mesh.edge(el.edges[e]).boundary_class != BoundaryClass::Neumann {
                continue;
            }
            let a = mesh.position(el.boundary_loop[e]);
            let b = mesh.position(el.boundary_loop[(e + 1) % m]);
            let jac = 0.5 * a.dist(b);
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let gw = g(a.lerp(b, 0.5 * (t + 1.0))) * w * jac;
                for (i, v) in edge_shapes(m, k, e, *t) {
                    load[i] += gw * v;
                }
            }
        }
    }
    Ok(load)
}

fn build_element(mesh: &PolygonalMesh, handler: &DofHandler, element: usize, problem: &ProblemSpec, cfg: &AssemblyConfig) -> Result<ElementData> {
    let k = handler.order;
    let coefficient = element_coefficient(mesh, element, problem)?;
    let bem = element_bem(&mesh.element_points(element), cfg.layout(k), &cfg.bem)?;
    let stiffness = element_stiffness(&bem, coefficient);
    let mut bubbles = element_bubble_block(mesh, element, k, &bem, coefficient);
    let load = element_loads(mesh, element, k, &bem, &mut bubbles, problem, cfg)?;
    Ok(ElementData { bem, coefficient, dofs: handler.local_dofs(mesh, element), stiffness, load, bubbles })
}

/// Assembles the harmonic system and the element bubble systems.
pub fn assemble(mesh: &PolygonalMesh, k: usize, problem: &ProblemSpec, cfg: &AssemblyConfig) -> Result<ApproximatedSystem> {
    let handler = DofHandler::new(mesh, k)?;
    let fixed = dirichlet_interpolant(mesh, &handler, &problem.dirichlet)?;
    let elements = map_indices(mesh.num_elements(), |e| build_element(mesh, &handler, e, problem, cfg))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let n = handler.num_free();
    let mut rhs = vec![0.0; n];
    let mut triplets = Vec::new();
    for el in &elements {
        for (i, di) in el.dofs.iter().enumerate() {
            let GlobalDof::Free(gi) = di.dof else { continue };
            rhs[gi] += di.sign * el.load[i];
            for (j, dj) in el.dofs.iter().enumerate() {
                let v = di.sign * dj.sign * el.stiffness[(i, j)];
                match dj.dof {
                    GlobalDof::Free(gj) => triplets.push((gi, gj, v)),
                    GlobalDof::Fixed(gj) => rhs[gi] -= v * fixed[gj],
                }
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(n, triplets);
    Ok(ApproximatedSystem { order: k, handler, matrix, rhs, fixed, elements: Arc::new(elements), cg: cfg.cg })
}

/// Element-local bubble solves, in the handler's bubble numbering.
pub fn solve_bubbles(system: &ApproximatedSystem) -> Result<Vec<f64>> {
    let mut out = vec![0.0; system.handler.num_bubbles()];
    for (e, el) in system.elements.iter().enumerate() {
        let b = &el.bubbles;
        if b.is_empty() {
            continue;
        }
        let chol = nalgebra::Cholesky::new(b.block.clone()).ok_or(SolveError::Indefinite)?;
        let c = chol.solve(&b.load);
        out[system.handler.bubble_range(e)].copy_from_slice(c.as_slice());
    }
    Ok(out)
}

/// Solves both systems.
pub fn solve(system: &ApproximatedSystem) -> Result<DiscreteSolution> {
    let (free, report) = solve_spd(&system.matrix, &system.rhs, &system.cg)?;
    let bubbles = solve_bubbles(system)?;
    Ok(DiscreteSolution::new(system, free, bubbles, report))
}

impl ApproximatedSystem {
    /// `b_h(u_h, v) - ℓ(v)` for every free basis function `v`, relative to `|ℓ|`.
    pub fn galerkin_defect(&self, free: &[f64]) -> f64 {
        let mut ax = vec![0.0; free.len()];
        self.matrix.mul_vec(free, &mut ax);
        let r: f64 = ax.iter().zip(&self.rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let l: f64 = self.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        if l == 0.0 {
            r
        } else {
            r / l
        }
    }
}

/// Assembles and solves with the given settings.
pub fn solve_problem(mesh: &PolygonalMesh, k: usize, problem: &ProblemSpec, cfg: &AssemblyConfig) -> Result<DiscreteSolution> {
    solve(&assemble(mesh, k, problem, cfg)?)
}

/// Value of piecewise Legendre flux coefficients on local edge `e` at
/// parameter `t ∈ [-1, 1]` along the loop direction.
pub fn flux_series_at(flux: &[f64], layout: BemLayout, e: usize, t: f64) -> f64 {
    let sub = layout.sub;
    let fm = layout.flux_modes;
    let s = (0.5 * (t + 1.0) * sub as f64).clamp(0.0, sub as f64);
    let j = (s.floor() as usize).min(sub - 1);
    let p = e * sub + j;
    eval_legendre_series(&flux[p * fm..(p + 1) * fm], 2.0 * (s - j as f64) - 1.0)
}

/// Discrete solution `u_h = u_{h,1} + u_{h,2}`.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub order: usize,
    pub handler: DofHandler,
    pub free: Vec<f64>,
    pub fixed: Vec<f64>,
    /// Bubble coefficients in the handler's numbering.
    pub bubbles: Vec<f64>,
    pub elements: Arc<Vec<ElementData>>,
    pub report: SolveReport,
    /// Trace of the harmonic extension `h(t - T c)` per element.
    harmonic: Vec<Vec<f64>>,
    /// Physical flux coefficients of the harmonic extension per element.
    flux: Vec<Vec<f64>>,
}

impl DiscreteSolution {
    pub fn new(system: &ApproximatedSystem, free: Vec<f64>, bubbles: Vec<f64>, report: SolveReport) -> Self {
        let mut harmonic = Vec::with_capacity(system.elements.len());
        let mut flux = Vec::with_capacity(system.elements.len());
        for (e, el) in system.elements.iter().enumerate() {
            let t: Vec<f64> = el
                .dofs
                .iter()
                .map(|d| {
                    d.sign
                        * match d.dof {
                            GlobalDof::Free(i) => free[i],
                            GlobalDof::Fixed(i) => system.fixed[i],
                        }
                })
                .collect();
            let mut t = DVector::from_vec(t);
            if !el.bubbles.is_empty() {
                let c = DVector::from_column_slice(&bubbles[system.handler.bubble_range(e)]);
                t -= &el.bubbles.traces * c;
            }
            let t: Vec<f64> = t.iter().copied().collect();
            flux.push(el.bem.neumann(&t));
            harmonic.push(t);
        }
        Self {
            order: system.order,
            handler: system.handler.clone(),
            free,
            fixed: system.fixed.clone(),
            bubbles,
            elements: system.elements.clone(),
            report,
            harmonic,
            flux,
        }
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, element: usize) -> &ElementData {
        &self.elements[element]
    }

    pub fn bubble_coefficients(&self, element: usize) -> &[f64] {
        &self.bubbles[self.handler.bubble_range(element)]
    }

    /// Trace of `u_h` on `∂K` in the local trace basis.
    pub fn local_trace(&self, element: usize) -> Vec<f64> {
        let el = &self.elements[element];
        let mut t = DVector::from_column_slice(&self.harmonic[element]);
        if !el.bubbles.is_empty() {
            t += &el.bubbles.traces * DVector::from_column_slice(self.bubble_coefficients(element));
        }
        t.iter().copied().collect()
    }

    /// Trace of the harmonic extension part `h(t - T c)`.
    pub fn harmonic_trace(&self, element: usize) -> &[f64] {
        &self.harmonic[element]
    }

    pub fn value(&self, element: usize, x: Point2) -> Result<f64> {
        let el = &self.elements[element];
        let mut v = el.bem.evaluate(&self.harmonic[element], &self.flux[element], x)?;
        for (c, q) in self.bubble_coefficients(element).iter().zip(&el.bubbles.particular) {
            v += c * q.eval(x.x, x.y);
        }
        Ok(v)
    }

    pub fn gradient(&self, element: usize, x: Point2) -> Result<Point2> {
        let el = &self.elements[element];
        let mut g = el.bem.evaluate_gradient(&self.harmonic[element], &self.flux[element], x)?;
        for (c, q) in self.bubble_coefficients(element).iter().zip(&el.bubbles.particular) {
            let (gx, gy) = q.grad(x.x, x.y);
            g = g + Point2::new(gx, gy) * *c;
        }
        Ok(g)
    }

    /// Value and gradient from precomputed basis values at `x`.
    pub fn value_and_gradient(&self, element: usize, x: Point2) -> Result<(f64, Point2)> {
        let el = &self.elements[element];
        let (vals, grads) = el.bem.basis_at(x, true)?;
        let t = &self.harmonic[element];
        let mut v = 0.0;
        let mut g = Point2::default();
        for i in 0..t.len() {
            v += t[i] * vals[i];
            g = g + grads[i] * t[i];
        }
        for (c, q) in self.bubble_coefficients(element).iter().zip(&el.bubbles.particular) {
            v += c * q.eval(x.x, x.y);
            let (gx, gy) = q.grad(x.x, x.y);
            g = g + Point2::new(gx, gy) * *c;
        }
        Ok((v, g))
    }

    /// `Δu_h = -Σ c_b p_b`.
    pub fn laplacian(&self, element: usize, x: Point2) -> f64 {
        let el = &self.elements[element];
        -self.bubble_coefficients(element).iter().zip(&el.bubbles.loads).map(|(c, p)| c * p.eval(x.x, x.y)).sum::<f64>()
    }

    /// Approximate conormal-free Neumann trace `γ̃1 u_h` on local edge `e`
    /// at parameter `t ∈ [-1, 1]` along the loop direction.
    pub fn flux_at(&self, mesh: &PolygonalMesh, element: usize, e: usize, t: f64) -> f64 {
        let el = &self.elements[element];
        let mut v = flux_series_at(&self.flux[element], el.bem.layout(), e, t);
        let c = self.bubble_coefficients(element);
        if !c.is_empty() {
            let lp = &mesh.element(element).boundary_loop;
            let a = mesh.position(lp[e]);
            let b = mesh.position(lp[(e + 1) % lp.len()]);
            let tau = (b - a) * (1.0 / a.dist(b));
            let n = Point2::new(tau.y, -tau.x);
            let x = a.lerp(b, 0.5 * (t + 1.0));
            for (c, q) in c.iter().zip(&el.bubbles.particular) {
                let (gx, gy) = q.grad(x.x, x.y);
                v += c * (gx * n.x + gy * n.y);
            }
        }
        v
    }

    /// Physical flux coefficients of the harmonic extension part.
    pub fn harmonic_flux(&self, element: usize) -> &[f64] {
        &self.flux[element]
    }
}
