//! Scalar numerics shared across modules: adaptive and composite quadrature,
//! uniform-table cubic interpolation, finite differences, compensated sums
//! and small least-squares fits.

use crate::error::{Error, Result};

/// Adaptive Simpson quadrature of `f` on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("quadrature bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 52).ok_or(Error::Quadrature { a, b, tol })
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a).abs() < 1e-14 {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}

/// Adaptive quadrature of a decaying integrand on [a, +inf), by mapping
/// s = a + u/(1-u) onto u in [0, 1).
pub fn adaptive_simpson_to_inf<F: Fn(f64) -> f64>(f: &F, a: f64, tol: f64) -> Result<f64> {
    let g = |u: f64| {
        if u >= 1.0 - 1e-12 {
            return 0.0;
        }
        let w = 1.0 - u;
        let s = a + u / w;
        f(s) / (w * w)
    };
    adaptive_simpson(&g, 0.0, 1.0, tol)
}

/// Composite Simpson sum of sampled values on a uniform grid of spacing `dx`.
/// The sample count must be odd (even number of intervals).
pub fn simpson(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd sample count");
    let mut s4 = KahanSum::new();
    let mut s2 = KahanSum::new();
    let mut i = 1;
    while i < n - 1 {
        s4.add(values[i]);
        i += 2;
    }
    let mut j = 2;
    while j < n - 1 {
        s2.add(values[j]);
        j += 2;
    }
    dx / 3.0 * (values[0] + values[n - 1] + 4.0 * s4.value() + 2.0 * s2.value())
}

/// Simpson quadrature of the product of two sampled functions.
pub fn simpson_product(u: &[f64], v: &[f64], dx: f64) -> f64 {
    assert_eq!(u.len(), v.len());
    let prod: Vec<f64> = u.iter().zip(v).map(|(a, b)| a * b).collect();
    simpson(&prod, dx)
}

/// Centered second-order first derivative of sampled values (one-sided at the ends).
pub fn centered_derivative(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        return d;
    }
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx);
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * dx);
    }
    d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dx);
    d
}

/// Kahan compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

pub fn kahan_dot(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let mut s = KahanSum::new();
    for (a, b) in u.iter().zip(v) {
        s.add(a * b);
    }
    s.value()
}

/// Four-point (cubic) Lagrange interpolation on a uniform table.
///
/// `x0` is the abscissa of `values[0]` and `h` the spacing. The query must lie
/// inside the table span.
pub fn cubic_interp_uniform(x0: f64, h: f64, values: &[f64], x: f64) -> f64 {
    let n = values.len();
    debug_assert!(n >= 4);
    let t = (x - x0) / h;
    let mut i = t.floor() as isize;
    // window [i-1, i+2] clamped into the table
    i = i.clamp(1, n as isize - 3);
    let i = i as usize;
    let s = t - i as f64; // in [0,1] away from the edges
    let ym1 = values[i - 1];
    let y0 = values[i];
    let y1 = values[i + 1];
    let y2 = values[i + 2];
    // Lagrange basis on nodes -1, 0, 1, 2
    let a = -s * (s - 1.0) * (s - 2.0) / 6.0;
    let b = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    let c = -(s + 1.0) * s * (s - 2.0) / 2.0;
    let d = (s + 1.0) * s * (s - 1.0) / 6.0;
    a * ym1 + b * y0 + c * y1 + d * y2
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least-squares fit of y ~ A e^{-x} + B e^{-2x}; returns (A, B).
pub fn exp_pair_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let u = (-xi).exp();
        let v = (-2.0 * xi).exp();
        s11 += u * u;
        s12 += u * v;
        s22 += v * v;
        r1 += u * yi;
        r2 += v * yi;
    }
    let det = s11 * s22 - s12 * s12;
    ((s22 * r1 - s12 * r2) / det, (s11 * r2 - s12 * r1) / det)
}

/// Five-point centered first derivative of a uniformly sampled series.
/// Falls back to lower-order stencils near the ends.
pub fn five_point_derivative(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = centered_derivative(values, dt);
    if n >= 5 {
        for i in 2..n - 2 {
            d[i] = (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2])
                / (12.0 * dt);
        }
    }
    d
}
