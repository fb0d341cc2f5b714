//! Quadrature building blocks: cached Gauss-Legendre rules, tangent-substitution
//! line integrals with adaptive doubling, and cubic-spline integration on uniform
//! grids (full, per-interval and suffix forms).

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Mutex;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    fn build(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                if n == 1 {
                    p1 = x;
                }
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pn1 = if n == 1 { 1.0 } else { p0 };
                pp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
                let dx = pn / pp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    /// Integrate `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x);
        }
        acc * h
    }
}

static GL_CACHE: Lazy<Mutex<HashMap<usize, &'static GaussRule>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Cached n-point Gauss-Legendre rule.
pub fn gauss_legendre(n: usize) -> &'static GaussRule {
    let mut cache = GL_CACHE.lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| Box::leak(Box::new(GaussRule::build(n))))
}

/// Outcome of an adaptively doubled quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadEstimate {
    pub value: f64,
    /// |last - previous| of the doubling sequence, as an error proxy.
    pub error: f64,
}

fn double_until<F: Fn(usize) -> f64>(eval: F, n0: usize, n_max: usize, rel_tol: f64) -> QuadEstimate {
    let mut n = n0;
    let mut prev = eval(n);
    loop {
        n *= 2;
        let cur = eval(n);
        let err = (cur - prev).abs();
        if err <= rel_tol * cur.abs().max(1e-300) || n >= n_max {
            return QuadEstimate { value: cur, error: err };
        }
        prev = cur;
    }
}

/// Integral of `f(t)` over the whole real line via the substitution t = scale * tan(s),
/// Gauss-Legendre on s in (-pi/2, pi/2), node count doubled until the estimates settle.
pub fn line_integral_full<F: Fn(f64) -> f64 + Copy>(
    f: F,
    scale: f64,
    rel_tol: f64,
    n0: usize,
    n_max: usize,
) -> QuadEstimate {
    let scale = scale.abs().max(1e-12);
    double_until(
        |n| {
            gauss_legendre(n).integrate(-FRAC_PI_2, FRAC_PI_2, |s| {
                let c = s.cos();
                f(scale * s.tan()) * scale / (c * c)
            })
        },
        n0,
        n_max,
        rel_tol,
    )
}

/// Integral of `f(t)` over [0, inf) via t = scale * tan(s) on (0, pi/2).
pub fn line_integral_half<F: Fn(f64) -> f64 + Copy>(
    f: F,
    scale: f64,
    rel_tol: f64,
    n0: usize,
    n_max: usize,
) -> QuadEstimate {
    let scale = scale.abs().max(1e-12);
    double_until(
        |n| {
            gauss_legendre(n).integrate(0.0, FRAC_PI_2, |s| {
                let c = s.cos();
                f(scale * s.tan()) * scale / (c * c)
            })
        },
        n0,
        n_max,
        rel_tol,
    )
}

/// Cubic spline second derivatives (not-a-knot ends) for samples on a uniform grid.
pub(crate) fn spline_moments(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 4, "spline needs at least 4 samples");
    // Tridiagonal system for interior moments; not-a-knot couples the first/last
    // interior equations. Solve for M_1..M_{n-2}, then extrapolate M_0, M_{n-1}.
    let m = n - 2;
    let mut diag = vec![4.0; m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        rhs[i] = 6.0 * (values[i] - 2.0 * values[i + 1] + values[i + 2]) / (h * h);
    }
    // not-a-knot: M_0 = 2 M_1 - M_2 and M_{n-1} = 2 M_{n-2} - M_{n-3}
    diag[0] = 6.0;
    let mut upper0 = 0.0; // coefficient of M_2 in first equation becomes 1 - 1 = 0
    let mut lower_last = 0.0;
    if m >= 2 {
        upper0 = 0.0;
        lower_last = 0.0;
        diag[m - 1] = 6.0;
    }
    // Thomas solve with unit off-diagonals except the modified first/last rows.
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let up = |i: usize| -> f64 {
        if i == 0 {
            upper0
        } else {
            1.0
        }
    };
    let lo = |i: usize| -> f64 {
        if i == m - 1 {
            lower_last
        } else {
            1.0
        }
    };
    c[0] = up(0) / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..m {
        let w = diag[i] - lo(i) * c[i - 1];
        c[i] = up(i) / w;
        d[i] = (rhs[i] - lo(i) * d[i - 1]) / w;
    }
    let mut mm = vec![0.0; m];
    mm[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        mm[i] = d[i] - c[i] * mm[i + 1];
    }
    let mut out = vec![0.0; n];
    out[1..(m + 1)].copy_from_slice(&mm[..m]);
    out[0] = 2.0 * out[1] - out[2];
    out[n - 1] = 2.0 * out[n - 2] - out[n - 3];
    out
}

/// Integration of uniformly sampled data by cubic spline.
///
/// `suffix[j]` is the integral from node j to the last node; `suffix[0]` is the
/// full integral. Interval contributions use the moment form
/// h (y_j + y_{j+1})/2 - h^3 (M_j + M_{j+1})/24.
pub struct UniformSplineIntegral {
    pub suffix: Vec<f64>,
}

impl UniformSplineIntegral {
    pub fn new(values: &[f64], h: f64) -> Self {
        let n = values.len();
        let moments = spline_moments(values, h);
        let mut suffix = vec![0.0; n];
        for j in (0..n - 1).rev() {
            let piece = h * (values[j] + values[j + 1]) * 0.5
                - h * h * h * (moments[j] + moments[j + 1]) / 24.0;
            suffix[j] = suffix[j + 1] + piece;
        }
        UniformSplineIntegral { suffix }
    }

    pub fn total(&self) -> f64 {
        self.suffix[0]
    }
}

/// Natural cubic interpolation of uniformly sampled data on [x0, x0 + (n-1) h].
pub struct UniformSpline {
    x0: f64,
    h: f64,
    values: Vec<f64>,
    moments: Vec<f64>,
}

impl UniformSpline {
    pub fn new(x0: f64, h: f64, values: Vec<f64>) -> Self {
        let moments = spline_moments(&values, h);
        UniformSpline { x0, h, values, moments }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let mut u = (x - self.x0) / self.h;
        if u < 0.0 {
            u = 0.0;
        }
        if u > (n - 1) as f64 {
            u = (n - 1) as f64;
        }
        let j = (u.floor() as usize).min(n - 2);
        let a = u - j as f64; // in [0,1]
        let b = 1.0 - a;
        let h2 = self.h * self.h;
        b * self.values[j]
            + a * self.values[j + 1]
            + h2 / 6.0 * ((b * b * b - b) * self.moments[j] + (a * a * a - a) * self.moments[j + 1])
    }
}
