//! Layer-potential integrals of Legendre densities over straight panels.
//!
//! For a panel `y(t) = c + l t tau`, `t in [-1, 1]`, and a target point
//! `x = c + l (u tau + v n)` the kernels reduce to rational and logarithmic
//! functions of `w = t - u`. Near targets use closed-form antiderivatives,
//! far targets Gauss-Legendre quadrature.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::BemError;
use crate::geometry::Point2;
use crate::quadrature::gauss;

/// Maximum number of Legendre modes per panel.
pub const MAX_MODES: usize = 8;

const INV_2PI: f64 = 1.0 / (2.0 * PI);

/// Fundamental solution of `-Δ` in the plane.
pub fn fundamental_solution(x: Point2, y: Point2) -> Result<f64, BemError> {
    let r = x.dist(y);
    if r == 0.0 {
        return Err(BemError::SingularEvaluation);
    }
    Ok(-INV_2PI * r.ln())
}

/// Straight boundary panel oriented counter-clockwise around its element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub a: Point2,
    pub b: Point2,
    pub center: Point2,
    /// Half length.
    pub half: f64,
    pub tangent: Point2,
    /// Outward unit normal (right of the tangent).
    pub normal: Point2,
}

impl Panel {
    pub fn new(a: Point2, b: Point2) -> Self {
        let len = a.dist(b);
        let tangent = (b - a) * (1.0 / len);
        Self {
            a,
            b,
            center: a.midpoint(b),
            half: 0.5 * len,
            tangent,
            normal: Point2::new(tangent.y, -tangent.x),
        }
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half
    }

    pub fn point(&self, t: f64) -> Point2 {
        self.center + self.tangent * (self.half * t)
    }

    /// Normalised local coordinates `(u, v)` of `x`.
    pub fn local(&self, x: Point2) -> (f64, f64) {
        let d = x - self.center;
        (d.dot(self.tangent) / self.half, d.dot(self.normal) / self.half)
    }

    pub fn distance(&self, x: Point2) -> f64 {
        crate::geometry::point_segment_distance(x, self.a, self.b)
    }
}

/// Monomial coefficients of `P_0..P_{MAX_MODES-1}`.
fn legendre_table() -> &'static [[f64; MAX_MODES + 1]; MAX_MODES + 1] {
    static T: OnceLock<[[f64; MAX_MODES + 1]; MAX_MODES + 1]> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = [[0.0; MAX_MODES + 1]; MAX_MODES + 1];
        for (j, row) in t.iter_mut().enumerate() {
            for (m, c) in crate::poly::legendre_monomial(j).into_iter().enumerate() {
                row[m] = c;
            }
        }
        t
    })
}

fn binomial_table() -> &'static [[f64; MAX_MODES + 2]; MAX_MODES + 2] {
    static T: OnceLock<[[f64; MAX_MODES + 2]; MAX_MODES + 2]> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = [[0.0; MAX_MODES + 2]; MAX_MODES + 2];
        for n in 0..MAX_MODES + 2 {
            t[n][0] = 1.0;
            for k in 1..=n {
                t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0.0 };
            }
        }
        t
    })
}

/// Monomial moments `int_{-1}^{1} t^m K(t) dt` for `m < MAX_MODES + 1`.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    /// `1/2 ln((t-u)^2 + v^2)`
    log: [f64; MAX_MODES + 1],
    /// `1/rho^2`
    inv: [f64; MAX_MODES + 1],
    /// `w/rho^2`
    w: [f64; MAX_MODES + 1],
}

/// Normalised distance below which the closed forms are used.
const NEAR: f64 = 1.5;

fn moments(u: f64, v: f64, deg: usize, with_log: bool, with_rational: bool) -> Moments {
    let dx = (u.abs() - 1.0).max(0.0);
    let d = dx.hypot(v);
    if d < NEAR {
        analytic_moments(u, v, deg, with_log, with_rational)
    } else {
        let n = if d < 4.0 { 16 } else { 8 };
        gauss_moments(u, v, deg, n, with_log, with_rational)
    }
}

fn gauss_moments(u: f64, v: f64, deg: usize, n: usize, with_log: bool, with_rational: bool) -> Moments {
    let g = gauss(n);
    let mut m = Moments::default();
    for (&t, &wq) in g.nodes.iter().zip(&g.weights) {
        let w = t - u;
        let r2 = w * w + v * v;
        let l = if with_log { 0.5 * r2.ln() } else { 0.0 };
        let inv = 1.0 / r2;
        let mut tp = wq;
        for k in 0..=deg {
            if with_log {
                m.log[k] += tp * l;
            }
            if with_rational {
                m.inv[k] += tp * inv;
                m.w[k] += tp * w * inv;
            }
            tp *= t;
        }
    }
    m
}

fn analytic_moments(u: f64, v: f64, deg: usize, with_log: bool, with_rational: bool) -> Moments {
    let a = -1.0 - u;
    let b = 1.0 - u;
    let v2 = v * v;
    // aw[i] = int_a^b w^i / (w^2 + v^2) dw, needed up to deg + 3
    let top = deg + 3;
    let mut aw = [0.0; MAX_MODES + 4];
    let on_line_inside = v == 0.0 && a < 0.0 && b > 0.0;
    // v * aw[0] written through a stable arctangent difference
    let vaw0 = if v == 0.0 {
        0.0
    } else if a * b > 0.0 {
        (v * (b - a) / (v2 + a * b)).atan()
    } else {
        (b / v).atan() - (a / v).atan()
    };
    if !on_line_inside {
        aw[0] = if a * b > 0.0 {
            let z = v * (b - a) / (v2 + a * b);
            if z.abs() < 1e-8 {
                (b - a) / (v2 + a * b)
            } else {
                z.atan() / v
            }
        } else {
            vaw0 / v
        };
        aw[1] = 0.5 * ((b * b + v2) / (a * a + v2)).ln();
    }
    // v^2 aw[0] and v^2 aw[1] stay finite on the line
    let b0 = v * vaw0;
    let b1 = if v == 0.0 { 0.0 } else { v2 * aw[1] };
    let mut pa = [1.0; MAX_MODES + 5];
    let mut pb = [1.0; MAX_MODES + 5];
    for i in 1..MAX_MODES + 5 {
        pa[i] = pa[i - 1] * a;
        pb[i] = pb[i - 1] * b;
    }
    for i in 2..=top {
        let head = (pb[i - 1] - pa[i - 1]) / (i - 1) as f64;
        aw[i] = match i {
            2 => head - b0,
            3 => head - b1,
            _ => head - v2 * aw[i - 2],
        };
    }
    let mut lw = [0.0; MAX_MODES + 2];
    if with_log {
        let la = if a == 0.0 && v == 0.0 { 0.0 } else { 0.5 * (a * a + v2).ln() };
        let lb = if b == 0.0 && v == 0.0 { 0.0 } else { 0.5 * (b * b + v2).ln() };
        for i in 0..=deg {
            let ip1 = (i + 1) as f64;
            lw[i] = (pb[i + 1] * lb - pa[i + 1] * la) / ip1 - aw[i + 2] / ip1;
        }
    }
    // shift from powers of w to powers of t = w + u
    let bin = binomial_table();
    let mut up = [1.0; MAX_MODES + 2];
    for i in 1..MAX_MODES + 2 {
        up[i] = up[i - 1] * u;
    }
    let mut m = Moments::default();
    for k in 0..=deg {
        for i in 0..=k {
            let c = bin[k][i] * up[k - i];
            if with_log {
                m.log[k] += c * lw[i];
            }
            if with_rational {
                m.inv[k] += c * aw[i];
                m.w[k] += c * aw[i + 1];
            }
        }
    }
    m
}

fn to_legendre(mono: &[f64; MAX_MODES + 1], modes: usize, out: &mut [f64]) {
    let t = legendre_table();
    for j in 0..modes {
        let mut s = 0.0;
        for m in 0..=j {
            s += t[j][m] * mono[m];
        }
        out[j] = s;
    }
}

/// `int_panel U*(x,y) P_j(t(y)) ds_y` for `j < modes`.
pub fn single_layer_row(p: &Panel, x: Point2, modes: usize, out: &mut [f64]) {
    let (u, v) = p.local(x);
    let m = moments(u, v, modes - 1, true, false);
    let mut leg = [0.0; MAX_MODES];
    to_legendre(&m.log, modes, &mut leg);
    let lnl = p.half.ln();
    for j in 0..modes {
        let base = if j == 0 { 2.0 * lnl } else { 0.0 };
        out[j] = -INV_2PI * p.half * (base + leg[j]);
    }
}

/// `int_panel d/dn_y U*(x,y) P_j(t(y)) ds_y` for `j < modes`.
pub fn double_layer_row(p: &Panel, x: Point2, modes: usize, out: &mut [f64]) {
    let (u, v) = p.local(x);
    if v == 0.0 {
        out[..modes].fill(0.0);
        return;
    }
    let m = moments(u, v, modes - 1, false, true);
    let mut leg = [0.0; MAX_MODES];
    to_legendre(&m.inv, modes, &mut leg);
    for j in 0..modes {
        out[j] = INV_2PI * v * leg[j];
    }
}

/// Values and gradients of the single- and double-layer potentials of the
/// Legendre modes of one panel at an off-boundary point.
#[derive(Debug, Clone, Copy)]
pub struct PanelPotentials {
    pub sl: [f64; MAX_MODES],
    pub dl: [f64; MAX_MODES],
    pub grad_sl: [Point2; MAX_MODES],
    pub grad_dl: [Point2; MAX_MODES],
}

impl Default for PanelPotentials {
    fn default() -> Self {
        Self {
            sl: [0.0; MAX_MODES],
            dl: [0.0; MAX_MODES],
            grad_sl: [Point2::default(); MAX_MODES],
            grad_dl: [Point2::default(); MAX_MODES],
        }
    }
}

/// Layer potentials at `x` for flux modes `< flux_modes` and trace modes `< trace_modes`.
pub fn panel_potentials(p: &Panel, x: Point2, flux_modes: usize, trace_modes: usize, grad: bool) -> PanelPotentials {
    let (u, v) = p.local(x);
    let deg = flux_modes.max(trace_modes) - 1;
    let m = moments(u, v, deg, true, true);
    let mut out = PanelPotentials::default();
    let mut leg = [0.0; MAX_MODES];
    to_legendre(&m.log, flux_modes, &mut leg);
    let lnl = p.half.ln();
    for j in 0..flux_modes {
        let base = if j == 0 { 2.0 * lnl } else { 0.0 };
        out.sl[j] = -INV_2PI * p.half * (base + leg[j]);
    }
    let mut inv = [0.0; MAX_MODES];
    to_legendre(&m.inv, trace_modes.max(flux_modes), &mut inv);
    for j in 0..trace_modes {
        out.dl[j] = INV_2PI * v * inv[j];
    }
    if !grad {
        return out;
    }
    let mut wl = [0.0; MAX_MODES];
    to_legendre(&m.w, flux_modes, &mut wl);
    // grad SL = 1/2pi (tau int w mu / rho^2 - n v int mu / rho^2)
    for j in 0..flux_modes {
        out.grad_sl[j] = (p.tangent * wl[j] - p.normal * (v * inv[j])) * INV_2PI;
    }
    // grad DL by parts: 1/(2 pi l) { tau(-[f mu] + v int mu'/rho^2) + n([-w mu/rho^2] + int w mu'/rho^2) }
    let (wa, wb) = (-1.0 - u, 1.0 - u);
    let ra = wa * wa + v * v;
    let rb = wb * wb + v * v;
    let tab = legendre_table();
    for j in 0..trace_modes {
        // P_j(1) = 1, P_j(-1) = (-1)^j
        let pm = if j % 2 == 0 { 1.0 } else { -1.0 };
        let f_end = v / rb - v / ra * pm;
        let w_end = -wb / rb + wa / ra * pm;
        // derivative of P_j in monomials
        let (mut di, mut dw) = (0.0, 0.0);
        for mdeg in 1..=j {
            let c = tab[j][mdeg] * mdeg as f64;
            di += c * m.inv[mdeg - 1];
            dw += c * m.w[mdeg - 1];
        }
        let gt = -f_end + v * di;
        let gn = w_end + dw;
        out.grad_dl[j] = (p.tangent * gt + p.normal * gn) * (INV_2PI / p.half);
    }
    out
}
