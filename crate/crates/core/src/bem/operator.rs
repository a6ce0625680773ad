//! Galerkin boundary element operators of a single polygonal element.
//!
//! The trace space on `∂K` is continuous and piecewise of degree `k` (hats
//! at the loop vertices plus integrated Legendre bubbles per edge), the flux
//! space piecewise Legendre of degree `< flux_modes` per panel. Each edge
//! may be split into `sub` equal panels for reference solves.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::kernels::{double_layer_row, panel_potentials, single_layer_row, Panel, MAX_MODES};
use crate::error::BemError;
use crate::geometry::{boundary_distance, contains_point, diameter, point_segment_distance, Point2};
use crate::poly::{legendre_all, trace_shape_legendre};
use crate::quadrature::gauss;

/// Diameter of the local frame the operators are computed in.
pub const LOCAL_DIAMETER: f64 = 0.5;

/// Panel-pair quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BemSettings {
    /// Gauss points per accepted outer piece.
    pub outer_points: usize,
    /// Relative length below which an outer piece is no longer bisected.
    pub min_piece: f64,
}

impl Default for BemSettings {
    fn default() -> Self {
        Self { outer_points: 10, min_piece: 1e-6 }
    }
}

/// Layout and discretisation parameters of an element operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BemLayout {
    /// Trace degree `k`.
    pub order: usize,
    /// Legendre modes per panel in the flux space (normally `k`).
    pub flux_modes: usize,
    /// Panels per geometric edge.
    pub sub: usize,
}

impl BemLayout {
    pub fn standard(order: usize) -> Self {
        Self { order, flux_modes: order, sub: 1 }
    }

    /// Reference layout: `sub` panels per edge and flux degree `k`.
    pub fn enriched(order: usize, sub: usize) -> Self {
        Self { order, flux_modes: order + 1, sub }
    }
}

/// Outer quadrature on `[-1, 1]` of panel `pa` adapted to the singularities
/// induced by panel `pb`. Weights are in the parameter `t`.
fn outer_rule(pa: &Panel, pb: &Panel, same: bool, n: usize, min_piece: f64) -> Vec<(f64, f64)> {
    let g = gauss(n);
    let mut out = Vec::new();
    let mut stack = vec![(-1.0f64, 1.0f64)];
    let min_len = min_piece * 2.0;
    while let Some((t0, t1)) = stack.pop() {
        let (p0, p1) = (pa.point(t0), pa.point(t1));
        let len = p0.dist(p1);
        let dist = if same {
            point_segment_distance(pb.a, p0, p1).min(point_segment_distance(pb.b, p0, p1))
        } else {
            segment_distance(p0, p1, pb.a, pb.b)
        };
        if dist >= len || t1 - t0 <= min_len {
            let h = 0.5 * (t1 - t0);
            let m = 0.5 * (t1 + t0);
            for (x, w) in g.nodes.iter().zip(&g.weights) {
                out.push((m + h * x, h * w));
            }
        } else {
            let m = 0.5 * (t0 + t1);
            stack.push((m, t1));
            stack.push((t0, m));
        }
    }
    out
}

fn segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    if crate::geometry::segments_intersect(a, b, c, d, 0.0) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Builds the panels of a CCW loop, each edge split into `sub` parts.
pub fn loop_panels(pts: &[Point2], sub: usize) -> Vec<Panel> {
    let m = pts.len();
    let mut out = Vec::with_capacity(m * sub);
    for e in 0..m {
        let a = pts[e];
        let b = pts[(e + 1) % m];
        for j in 0..sub {
            let s0 = j as f64 / sub as f64;
            let s1 = (j + 1) as f64 / sub as f64;
            out.push(Panel::new(a.lerp(b, s0), a.lerp(b, s1)));
        }
    }
    out
}

/// Galerkin matrix `(V P_j, P_i)` over piecewise Legendre modes.
pub fn single_layer_matrix(panels: &[Panel], modes: usize, settings: &BemSettings) -> DMatrix<f64> {
    let np = panels.len();
    let n = np * modes;
    let mut v = DMatrix::zeros(n, n);
    let npts = settings.outer_points.max(modes + 6);
    let mut row = [0.0; MAX_MODES];
    let mut leg = [0.0; MAX_MODES];
    for p in 0..np {
        for q in p..np {
            let rule = outer_rule(&panels[p], &panels[q], p == q, npts, settings.min_piece);
            let mut block = [[0.0; MAX_MODES]; MAX_MODES];
            for &(t, w) in &rule {
                let x = panels[p].point(t);
                single_layer_row(&panels[q], x, modes, &mut row);
                legendre_all(modes - 1, t, &mut leg);
                let wt = w * panels[p].half;
                for i in 0..modes {
                    for j in 0..modes {
                        block[i][j] += wt * leg[i] * row[j];
                    }
                }
            }
            for i in 0..modes {
                for j in 0..modes {
                    v[(p * modes + i, q * modes + j)] = block[i][j];
                    v[(q * modes + j, p * modes + i)] = block[i][j];
                }
            }
        }
    }
    v
}

/// Galerkin matrix `((1/2 I + K) P_j, P_i)` with test modes `< test_modes`
/// and trial modes `< trial_modes` per panel.
pub fn double_layer_matrix(panels: &[Panel], test_modes: usize, trial_modes: usize, settings: &BemSettings) -> DMatrix<f64> {
    let np = panels.len();
    let mut k = DMatrix::zeros(np * test_modes, np * trial_modes);
    let npts = settings.outer_points.max(test_modes.max(trial_modes) + 6);
    let mut row = [0.0; MAX_MODES];
    let mut leg = [0.0; MAX_MODES];
    for p in 0..np {
        for i in 0..test_modes.min(trial_modes) {
            // 1/2 (P_i, P_i) on the panel
            k[(p * test_modes + i, p * trial_modes + i)] = 0.5 * panels[p].half * 2.0 / (2 * i + 1) as f64;
        }
        for q in 0..np {
            if p == q || collinear(&panels[p], &panels[q]) {
                continue;
            }
            let rule = outer_rule(&panels[p], &panels[q], false, npts, settings.min_piece);
            for &(t, w) in &rule {
                let x = panels[p].point(t);
                double_layer_row(&panels[q], x, trial_modes, &mut row);
                legendre_all(test_modes - 1, t, &mut leg);
                let wt = w * panels[p].half;
                for i in 0..test_modes {
                    for j in 0..trial_modes {
                        k[(p * test_modes + i, q * trial_modes + j)] += wt * leg[i] * row[j];
                    }
                }
            }
        }
    }
    k
}

/// Hypersingular Galerkin matrix `(V ∂_s φ_j, ∂_s φ_i)` over the trace basis,
/// using the leading `k` modes per panel of the single-layer matrix `v`.
fn hypersingular(v: &DMatrix<f64>, panels: &[Panel], fm: usize, k: usize, trace_map: &DMatrix<f64>) -> DMatrix<f64> {
    let np = panels.len();
    let tm = k + 1;
    let mut deriv = DMatrix::zeros(np * k, np * tm);
    for (p, pan) in panels.iter().enumerate() {
        // P_l' = sum over j = l-1, l-3, ... of (2j+1) P_j
        for l in 1..tm {
            let mut j = l as isize - 1;
            while j >= 0 {
                deriv[(p * k + j as usize, p * tm + l)] = (2 * j + 1) as f64 / pan.half;
                j -= 2;
            }
        }
    }
    let idx: Vec<usize> = (0..np).flat_map(|p| (0..k).map(move |i| p * fm + i)).collect();
    let vk = v.select_rows(&idx).select_columns(&idx);
    let ds = deriv * trace_map;
    ds.transpose() * vk * ds
}

fn collinear(a: &Panel, b: &Panel) -> bool {
    let tol = 1e-14 * (a.half + b.half);
    (b.a - a.center).dot(a.normal).abs() <= tol && (b.b - a.center).dot(a.normal).abs() <= tol
}

/// Shape-level operator in the local frame, shareable between congruent elements.
#[derive(Debug, Clone)]
pub struct BemOperator {
    pub layout: BemLayout,
    /// Loop vertices in the local frame.
    pub vertices: Vec<Point2>,
    pub panels: Vec<Panel>,
    /// Legendre coefficients (`order + 1` per panel) of the trace basis.
    pub trace_map: DMatrix<f64>,
    /// Flux coefficients of the Neumann trace of each trace basis function (local frame).
    pub dtn: DMatrix<f64>,
    /// `(q_a, phi_b)` in the local frame.
    pub mass: DMatrix<f64>,
    /// `D + Kᵀ V⁻¹ K` over the trace basis.
    pub stiffness: DMatrix<f64>,
    /// Factorised single-layer matrix.
    pub v_factor: Cholesky<f64, Dyn>,
}

/// Number of trace basis functions of a loop with `m` vertices.
pub fn trace_dim(m: usize, order: usize) -> usize {
    m * order
}

/// Index of the `i`-th bubble (`i >= 2`) of local edge `e`.
pub fn bubble_index(m: usize, order: usize, e: usize, i: usize) -> usize {
    m + e * (order - 1) + (i - 2)
}

impl BemOperator {
    pub fn new(vertices: &[Point2], layout: BemLayout, settings: &BemSettings) -> Result<Self, BemError> {
        let m = vertices.len();
        let k = layout.order;
        let panels = loop_panels(vertices, layout.sub);
        let nt = trace_dim(m, k);
        let tm = k + 1;
        let fm = layout.flux_modes;
        let trace_map = trace_legendre_map(m, k, layout.sub);
        let v = single_layer_matrix(&panels, fm, settings);
        let hyper = hypersingular(&v, &panels, fm, k, &trace_map);
        let v_factor = Cholesky::new(v).ok_or(BemError::SingleLayerNotSpd)?;
        let kd = double_layer_matrix(&panels, fm, tm, settings);
        let kmat = &kd * &trace_map;
        let dtn = v_factor.solve(&kmat);
        let mut mass_l = DMatrix::zeros(panels.len() * fm, panels.len() * tm);
        for (p, pan) in panels.iter().enumerate() {
            for i in 0..fm.min(tm) {
                mass_l[(p * fm + i, p * tm + i)] = pan.half * 2.0 / (2 * i + 1) as f64;
            }
        }
        let mass = mass_l * &trace_map;
        debug_assert_eq!(dtn.ncols(), nt);
        let s = hyper + kmat.transpose() * &dtn;
        let stiffness = (&s + s.transpose()) * 0.5;
        Ok(Self { layout, vertices: vertices.to_vec(), panels, trace_map, dtn, mass, stiffness, v_factor })
    }

    pub fn trace_dim(&self) -> usize {
        self.trace_map.ncols()
    }

    pub fn flux_dim(&self) -> usize {
        self.dtn.nrows()
    }

    /// Symmetric stiffness for unit coefficient.
    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    /// `(γ̃1 φ_i, φ_j)` as it comes out of the Galerkin Neumann trace, not symmetric.
    pub fn trace_stiffness(&self) -> DMatrix<f64> {
        self.dtn.transpose() * &self.mass
    }
}

/// Legendre coefficients on every panel of the element trace basis.
fn trace_legendre_map(m: usize, k: usize, sub: usize) -> DMatrix<f64> {
    let tm = k + 1;
    let mut map = DMatrix::zeros(m * sub * tm, trace_dim(m, k));
    let g = gauss(tm + 1);
    let mut leg = vec![0.0; tm + 1];
    for e in 0..m {
        // (local shape, global trace index)
        let mut shapes = vec![(0usize, e), (1usize, (e + 1) % m)];
        for i in 2..=k {
            shapes.push((i, bubble_index(m, k, e, i)));
        }
        for (shape, col) in shapes {
            let c = trace_shape_legendre(shape, k);
            for j in 0..sub {
                let t0 = -1.0 + 2.0 * j as f64 / sub as f64;
                let t1 = -1.0 + 2.0 * (j + 1) as f64 / sub as f64;
                let row0 = (e * sub + j) * tm;
                for (xq, wq) in g.nodes.iter().zip(&g.weights) {
                    let t = t0 + 0.5 * (t1 - t0) * (xq + 1.0);
                    let f = crate::poly::eval_legendre_series(&c, t);
                    legendre_all(k, *xq, &mut leg);
                    for l in 0..tm {
                        map[(row0 + l, col)] += 0.5 * (2 * l + 1) as f64 * wq * f * leg[l];
                    }
                }
            }
        }
    }
    map.apply(|x: &mut f64| {
        if x.abs() < 1e-15 {
            *x = 0.0
        }
    });
    map
}

/// Element operator bound to a physical position.
#[derive(Debug, Clone)]
pub struct ElementBem {
    pub op: Arc<BemOperator>,
    /// Physical position of the first loop vertex.
    pub origin: Point2,
    /// Local coordinates are `(x - origin) * scale`.
    pub scale: f64,
}

impl ElementBem {
    pub fn layout(&self) -> BemLayout {
        self.op.layout
    }

    pub fn to_local(&self, x: Point2) -> Point2 {
        (x - self.origin) * self.scale
    }

    /// Physical flux coefficients (per panel Legendre) of the Neumann trace.
    pub fn neumann(&self, trace: &[f64]) -> Vec<f64> {
        let t = DVector::from_column_slice(trace);
        (&self.op.dtn * t * self.scale).iter().copied().collect()
    }

    /// Physical `(q_a, phi_b)` mass matrix.
    pub fn mass(&self) -> DMatrix<f64> {
        &self.op.mass / self.scale
    }

    /// Physical Neumann map, `flux = dtn * trace`.
    pub fn dtn(&self) -> DMatrix<f64> {
        &self.op.dtn * self.scale
    }

    fn check_inside(&self, xl: Point2) -> Result<(), BemError> {
        let v = &self.op.vertices;
        if !contains_point(v, xl) || boundary_distance(v, xl) <= 1e-14 {
            return Err(BemError::OutsideElement);
        }
        Ok(())
    }

    /// Values of all trace basis functions' harmonic extensions at `x`, and
    /// optionally their gradients.
    pub fn basis_at(&self, x: Point2, grad: bool) -> Result<(Vec<f64>, Vec<Point2>), BemError> {
        let xl = self.to_local(x);
        self.check_inside(xl)?;
        let op = &*self.op;
        let fm = op.layout.flux_modes;
        let tm = op.layout.order + 1;
        let nf = op.flux_dim();
        let ntl = op.panels.len() * tm;
        let mut sl = DVector::zeros(nf);
        let mut dl = DVector::zeros(ntl);
        let mut gsl = (DVector::zeros(if grad { nf } else { 0 }), DVector::zeros(if grad { nf } else { 0 }));
        let mut gdl = (DVector::zeros(if grad { ntl } else { 0 }), DVector::zeros(if grad { ntl } else { 0 }));
        for (p, pan) in op.panels.iter().enumerate() {
            let pot = panel_potentials(pan, xl, fm, tm, grad);
            for i in 0..fm {
                sl[p * fm + i] = pot.sl[i];
                if grad {
                    gsl.0[p * fm + i] = pot.grad_sl[i].x;
                    gsl.1[p * fm + i] = pot.grad_sl[i].y;
                }
            }
            for l in 0..tm {
                dl[p * tm + l] = pot.dl[l];
                if grad {
                    gdl.0[p * tm + l] = pot.grad_dl[l].x;
                    gdl.1[p * tm + l] = pot.grad_dl[l].y;
                }
            }
        }
        let vals = op.dtn.tr_mul(&sl) - op.trace_map.tr_mul(&dl);
        let mut grads = Vec::new();
        if grad {
            let gx = op.dtn.tr_mul(&gsl.0) - op.trace_map.tr_mul(&gdl.0);
            let gy = op.dtn.tr_mul(&gsl.1) - op.trace_map.tr_mul(&gdl.1);
            grads = gx.iter().zip(gy.iter()).map(|(a, b)| Point2::new(a * self.scale, b * self.scale)).collect();
        }
        Ok((vals.iter().copied().collect(), grads))
    }

    /// Representation formula for given trace coefficients and physical flux coefficients.
    pub fn evaluate(&self, trace: &[f64], flux: &[f64], x: Point2) -> Result<f64, BemError> {
        Ok(self.evaluate_with_gradient(trace, flux, x, false)?.0)
    }

    pub fn evaluate_gradient(&self, trace: &[f64], flux: &[f64], x: Point2) -> Result<Point2, BemError> {
        Ok(self.evaluate_with_gradient(trace, flux, x, true)?.1)
    }

    fn evaluate_with_gradient(&self, trace: &[f64], flux: &[f64], x: Point2, grad: bool) -> Result<(f64, Point2), BemError> {
        let xl = self.to_local(x);
        self.check_inside(xl)?;
        let op = &*self.op;
        let fm = op.layout.flux_modes;
        let tm = op.layout.order + 1;
        let tl = &op.trace_map * DVector::from_column_slice(trace);
        let mut val = 0.0;
        let mut g = Point2::default();
        for (p, pan) in op.panels.iter().enumerate() {
            let pot = panel_potentials(pan, xl, fm, tm, grad);
            for i in 0..fm {
                // local-frame flux is physical flux / scale
                let f = flux[p * fm + i] / self.scale;
                val += pot.sl[i] * f;
                if grad {
                    g = g + pot.grad_sl[i] * f;
                }
            }
            for l in 0..tm {
                val -= pot.dl[l] * tl[p * tm + l];
                if grad {
                    g = g - pot.grad_dl[l] * tl[p * tm + l];
                }
            }
        }
        Ok((val, g * self.scale))
    }
}

type CacheKey = (Vec<i64>, BemLayout);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<BemOperator>>> {
    static C: OnceLock<Mutex<HashMap<CacheKey, Arc<BemOperator>>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

const KEY_SCALE: f64 = (1u64 << 40) as f64;

/// Operator of the element with the given CCW loop, shared between
/// elements that coincide up to translation and scaling.
pub fn element_bem(vertices: &[Point2], layout: BemLayout, settings: &BemSettings) -> Result<ElementBem, BemError> {
    let origin = vertices[0];
    let scale = LOCAL_DIAMETER / diameter(vertices);
    let key: Vec<i64> = vertices
        .iter()
        .flat_map(|&p| {
            let l = (p - origin) * scale;
            [(l.x * KEY_SCALE).round() as i64, (l.y * KEY_SCALE).round() as i64]
        })
        .collect();
    let key = (key, layout);
    if let Some(op) = cache().lock().expect("bem cache poisoned").get(&key) {
        return Ok(ElementBem { op: op.clone(), origin, scale });
    }
    // the operator is built from the rounded geometry so results do not
    // depend on which congruent element is seen first
    let local: Vec<Point2> = key.0.chunks(2).map(|c| Point2::new(c[0] as f64 / KEY_SCALE, c[1] as f64 / KEY_SCALE)).collect();
    let op = Arc::new(BemOperator::new(&local, layout, settings)?);
    let op = cache().lock().expect("bem cache poisoned").entry(key).or_insert(op).clone();
    Ok(ElementBem { op, origin, scale })
}

/// Drops all cached operators.
pub fn clear_cache() {
    cache().lock().expect("bem cache poisoned").clear();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(side: f64) -> Vec<Point2> {
        vec![Point2::new(0.0, 0.0), Point2::new(side, 0.0), Point2::new(side, side), Point2::new(0.0, side)]
    }

    #[test]
    fn unit_segment_constant_entry() {
        let p = vec![Panel::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0))];
        let v = single_layer_matrix(&p, 1, &BemSettings::default());
        assert!((v[(0, 0)] - 3.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-12, "{}", v[(0, 0)]);
    }

    #[test]
    fn single_layer_is_symmetric_and_spd_on_small_square() {
        let panels = loop_panels(&square(0.5), 1);
        let v = single_layer_matrix(&panels, 3, &BemSettings::default());
        assert!((&v - v.transpose()).amax() < 1e-13);
        assert!(Cholesky::new(v).is_some());
    }

    #[test]
    fn constant_has_zero_flux() {
        for k in 1..=3 {
            let e = element_bem(&square(0.5), BemLayout::standard(k), &BemSettings::default()).unwrap();
            let mut trace = vec![0.0; trace_dim(4, k)];
            trace[..4].fill(1.0);
            let f = e.neumann(&trace);
            assert!(f.iter().all(|c| c.abs() < 1e-10), "{f:?}");
        }
    }

    #[test]
    fn linear_trace_flux_and_interior_values() {
        let e = element_bem(&square(0.5), BemLayout::standard(1), &BemSettings::default()).unwrap();
        let trace: Vec<f64> = square(0.5).iter().map(|p| p.x).collect();
        let f = e.neumann(&trace);
        // bottom, right, top, left
        let expect = [0.0, 1.0, 0.0, -1.0];
        for (a, b) in f.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9, "{f:?}");
        }
        let x = Point2::new(0.3, 0.2);
        assert!((e.evaluate(&trace, &f, x).unwrap() - 0.3).abs() < 1e-6);
        let g = e.evaluate_gradient(&trace, &f, x).unwrap();
        assert!((g.x - 1.0).abs() < 1e-6 && g.y.abs() < 1e-6, "{g:?}");
    }
}
