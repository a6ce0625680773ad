//! Polynomials: Legendre families on the reference interval and bivariate
//! monomial polynomials used for element loads and homogenisation.

use std::ops::{Add, Mul, Sub};

use crate::geometry::Point2;

/// Values `P_0(t) .. P_n(t)` of the Legendre polynomials.
pub fn legendre_all(n: usize, t: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if n >= 1 {
        out[1] = t;
    }
    for k in 2..=n {
        out[k] = ((2 * k - 1) as f64 * t * out[k - 1] - (k - 1) as f64 * out[k - 2]) / k as f64;
    }
}

pub fn legendre(n: usize, t: f64) -> f64 {
    let mut buf = [0.0; 32];
    legendre_all(n, t, &mut buf);
    buf[n]
}

/// Monomial coefficients of `P_n`: `P_n(t) = sum_m c[m] t^m`.
pub fn legendre_monomial(n: usize) -> Vec<f64> {
    let mut p0 = vec![1.0];
    if n == 0 {
        return p0;
    }
    let mut p1 = vec![0.0, 1.0];
    for k in 2..=n {
        let mut p2 = vec![0.0; k + 1];
        for (m, c) in p1.iter().enumerate() {
            p2[m + 1] += (2 * k - 1) as f64 * c / k as f64;
        }
        for (m, c) in p0.iter().enumerate() {
            p2[m] -= (k - 1) as f64 * c / k as f64;
        }
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Integrated Legendre bubble `L_i(t) = int_{-1}^t P_{i-1} = (P_i - P_{i-2})/(2i-1)`, `i >= 2`.
pub fn integrated_legendre(i: usize, t: f64) -> f64 {
    debug_assert!(i >= 2);
    (legendre(i, t) - legendre(i - 2, t)) / (2 * i - 1) as f64
}

/// Legendre coefficients of the `j`-th local trace shape function on an
/// edge: `j = 0` start hat, `j = 1` end hat, `j >= 2` integrated Legendre `L_j`.
pub fn trace_shape_legendre(j: usize, k: usize) -> Vec<f64> {
    let mut c = vec![0.0; k + 1];
    match j {
        0 => {
            c[0] = 0.5;
            c[1] = -0.5;
        }
        1 => {
            c[0] = 0.5;
            c[1] = 0.5;
        }
        _ => {
            let s = 1.0 / (2 * j - 1) as f64;
            c[j] = s;
            c[j - 2] = -s;
        }
    }
    c
}

/// Converts monomial coefficients (in t) to Legendre coefficients.
pub fn monomial_to_legendre(mono: &[f64]) -> Vec<f64> {
    let n = mono.len();
    if n == 0 {
        return Vec::new();
    }
    // project with exact Gauss quadrature
    let g = crate::quadrature::gauss(n.max(1));
    let mut out = vec![0.0; n];
    let mut buf = vec![0.0; n];
    for (x, w) in g.nodes.iter().zip(&g.weights) {
        let v = eval_monomial(mono, *x);
        legendre_all(n - 1, *x, &mut buf);
        for (j, o) in out.iter_mut().enumerate() {
            *o += w * v * buf[j];
        }
    }
    for (j, o) in out.iter_mut().enumerate() {
        *o *= (2 * j + 1) as f64 / 2.0;
    }
    out
}

pub fn eval_monomial(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

pub fn eval_legendre_series(c: &[f64], t: f64) -> f64 {
    let mut buf = [0.0; 32];
    if c.is_empty() {
        return 0.0;
    }
    legendre_all(c.len() - 1, t, &mut buf);
    c.iter().zip(buf.iter()).map(|(a, b)| a * b).sum()
}

/// `L2(-1,1)` inner product of two Legendre series.
pub fn legendre_inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(j, (x, y))| x * y * 2.0 / (2 * j + 1) as f64)
        .sum()
}

/// Legendre series evaluated with reversed orientation: `p(-t)`.
pub fn legendre_reverse(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .map(|(j, v)| if j % 2 == 1 { -v } else { *v })
        .collect()
}

/// Bivariate polynomial `sum c_{ij} x^i y^j` of total degree `<= degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    degree: usize,
    coeffs: Vec<f64>,
}

fn tri_index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

impl Poly2 {
    pub fn zero(degree: usize) -> Self {
        Self { degree, coeffs: vec![0.0; (degree + 1) * (degree + 2) / 2] }
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero(0);
        p.coeffs[0] = c;
        p
    }

    pub fn monomial(i: usize, j: usize, c: f64) -> Self {
        let mut p = Self::zero(i + j);
        p.set(i, j, c);
        p
    }

    pub fn from_terms(terms: &[(usize, usize, f64)]) -> Self {
        let deg = terms.iter().map(|t| t.0 + t.1).max().unwrap_or(0);
        let mut p = Self::zero(deg);
        for &(i, j, c) in terms {
            p.set(i, j, p.get(i, j) + c);
        }
        p
    }

    pub fn capacity_degree(&self) -> usize {
        self.degree
    }

    /// Actual total degree (largest degree with a nonzero coefficient).
    pub fn degree(&self) -> Option<usize> {
        (0..=self.degree).rev().find(|&d| (0..=d).any(|j| self.get(d - j, j) != 0.0))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + j > self.degree {
            0.0
        } else {
            self.coeffs[tri_index(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, c: f64) {
        if i + j > self.degree {
            let mut bigger = Self::zero(i + j);
            for (a, b, v) in self.terms() {
                bigger.coeffs[tri_index(a, b)] = v;
            }
            *self = bigger;
        }
        self.coeffs[tri_index(i, j)] = c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.degree).flat_map(move |d| (0..=d).map(move |j| (d - j, j, self.coeffs[tri_index(d - j, j)])))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        // Horner in y for each power of x would be faster; degrees stay tiny
        let mut s = 0.0;
        let mut xp = [1.0; 16];
        let mut yp = [1.0; 16];
        for k in 1..=self.degree {
            xp[k] = xp[k - 1] * x;
            yp[k] = yp[k - 1] * y;
        }
        for (i, j, c) in self.terms() {
            if c != 0.0 {
                s += c * xp[i] * yp[j];
            }
        }
        s
    }

    pub fn dx(&self) -> Self {
        let mut p = Self::zero(self.degree.saturating_sub(1));
        for (i, j, c) in self.terms() {
            if i > 0 && c != 0.0 {
                p.set(i - 1, j, p.get(i - 1, j) + c * i as f64);
            }
        }
        p
    }

    pub fn dy(&self) -> Self {
        let mut p = Self::zero(self.degree.saturating_sub(1));
        for (i, j, c) in self.terms() {
            if j > 0 && c != 0.0 {
                p.set(i, j - 1, p.get(i, j - 1) + c * j as f64);
            }
        }
        p
    }

    pub fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        (self.dx().eval(x, y), self.dy().eval(x, y))
    }

    pub fn laplacian(&self) -> Self {
        &self.dx().dx() + &self.dy().dy()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { degree: self.degree, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= tol)
    }

    /// Restriction to the segment `a + s (b - a)`, `s in [0,1]`, as monomials in `s`.
    pub fn restrict(&self, a: Point2, b: Point2) -> Vec<f64> {
        let d = b - a;
        let px = [a.x, d.x];
        let py = [a.y, d.y];
        let mut out = vec![0.0; self.degree + 1];
        for (i, j, c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            let mut term = vec![c];
            for _ in 0..i {
                term = mul1(&term, &px);
            }
            for _ in 0..j {
                term = mul1(&term, &py);
            }
            for (k, t) in term.iter().enumerate() {
                out[k] += t;
            }
        }
        out
    }

    /// Substitutes `x -> (x - cx)/s`, i.e. returns the polynomial in physical
    /// coordinates of a polynomial given in scaled local coordinates.
    pub fn to_global(&self, center: Point2, s: f64) -> Self {
        let mut out = Self::zero(self.degree);
        let px = [-center.x / s, 1.0 / s];
        let py = [-center.y / s, 1.0 / s];
        for (i, j, c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            let mut tx = vec![1.0];
            for _ in 0..i {
                tx = mul1(&tx, &px);
            }
            let mut ty = vec![1.0];
            for _ in 0..j {
                ty = mul1(&ty, &py);
            }
            for (a, va) in tx.iter().enumerate() {
                for (b, vb) in ty.iter().enumerate() {
                    out.set(a, b, out.get(a, b) + c * va * vb);
                }
            }
        }
        out
    }
}

fn mul1(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, o: &Poly2) -> Poly2 {
        let mut p = Poly2::zero(self.degree.max(o.degree));
        for (i, j, c) in self.terms().chain(o.terms()) {
            p.set(i, j, p.get(i, j) + c);
        }
        p
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, o: &Poly2) -> Poly2 {
        self + &o.scale(-1.0)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, o: &Poly2) -> Poly2 {
        let mut p = Poly2::zero(self.degree + o.degree);
        for (i, j, c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            for (a, b, d) in o.terms() {
                p.set(i + a, j + b, p.get(i + a, j + b) + c * d);
            }
        }
        p
    }
}

/// Polynomial `q` with `-Δq = p` and `deg q = deg p + 2`.
///
/// Each monomial `x^i y^j` is inverted by integrating twice in the variable
/// with the larger exponent; for `i == j` the two directions are averaged.
/// The identity is checked coefficientwise before returning.
pub fn particular_solution(p: &Poly2) -> Poly2 {
    let mut q = Poly2::zero(p.capacity_degree() + 2);
    for (i, j, c) in p.terms() {
        if c == 0.0 {
            continue;
        }
        let t = if i > j {
            invert_monomial_x(i, j)
        } else if j > i {
            swap_xy(&invert_monomial_x(j, i))
        } else {
            (&invert_monomial_x(i, j) + &swap_xy(&invert_monomial_x(j, i))).scale(0.5)
        };
        q = &q + &t.scale(c);
    }
    debug_assert!((&q.laplacian() + p).is_zero(1e-12 * (1.0 + max_abs(p))));
    q
}

fn max_abs(p: &Poly2) -> f64 {
    p.terms().map(|t| t.2.abs()).fold(0.0, f64::max)
}

fn swap_xy(p: &Poly2) -> Poly2 {
    let mut q = Poly2::zero(p.capacity_degree());
    for (i, j, c) in p.terms() {
        q.set(j, i, c);
    }
    q
}

/// `-Δq = x^i y^j` by repeated x-integration; terminates since the y-power drops by two each round.
fn invert_monomial_x(i: usize, j: usize) -> Poly2 {
    let mut q = Poly2::zero(i + j + 2);
    let (mut a, mut b, mut c) = (i, j, 1.0);
    loop {
        let f = ((a + 1) * (a + 2)) as f64;
        q.set(a + 2, b, q.get(a + 2, b) - c / f);
        if b < 2 {
            break;
        }
        // -Δ(-c x^{a+2} y^b / f) = c x^a y^b + c b(b-1)/f x^{a+2} y^{b-2}
        c = -c * (b * (b - 1)) as f64 / f;
        a += 2;
        b -= 2;
    }
    q
}
