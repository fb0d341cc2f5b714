//! Directions, hyperplane geometry and quadrature grids on the unit sphere.

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use std::f64::consts::PI;

/// Evaluations are only meaningful outside this ball around the origin.
pub const Y_MIN: f64 = 1e-6;

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

pub fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|v| v * c).collect()
}

pub fn add_scaled(a: &[f64], b: &[f64], c: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(u, v)| u + c * v).collect()
}

/// Unit vector on S^{d-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Wraps a vector that must already be unit length to 1e-12.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        let n = norm(&components);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Degenerate("direction is not unit length"));
        }
        Ok(Direction(components))
    }

    /// Normalizes a nonzero vector.
    pub fn from_vector(v: &[f64]) -> Result<Self> {
        let n = norm(v);
        if n < Y_MIN {
            return Err(Error::Degenerate("cannot normalize a (near) zero vector"));
        }
        Ok(Direction(v.iter().map(|c| c / n).collect()))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn opposite(&self) -> Direction {
        Direction(self.0.iter().map(|c| -c).collect())
    }
}

/// Line {y + t omega} given by a direction and a nonzero foot point in the
/// hyperplane orthogonal to it.
#[derive(Debug, Clone)]
pub struct LineSpec {
    pub direction: Direction,
    pub foot: Vec<f64>,
}

impl LineSpec {
    pub fn new(direction: Direction, foot: Vec<f64>) -> Result<Self> {
        let ny = norm(&foot);
        if ny < Y_MIN {
            return Err(Error::Degenerate("line foot point too close to the origin"));
        }
        if dot(direction.components(), &foot).abs() > 1e-12 * ny {
            return Err(Error::Degenerate("line foot point not orthogonal to direction"));
        }
        Ok(LineSpec { direction, foot })
    }

    pub fn point_at(&self, t: f64) -> Vec<f64> {
        add_scaled(&self.foot, self.direction.components(), t)
    }
}

/// Orthogonal projection of x onto the hyperplane orthogonal to omega:
/// x - <x, omega> omega.
pub fn project_to_plane(x: &[f64], omega: &Direction) -> Vec<f64> {
    let c = dot(x, omega.components());
    add_scaled(x, omega.components(), -c)
}

/// Deterministic orthonormal basis of the hyperplane orthogonal to `omega`,
/// built from the Householder reflection exchanging omega with a coordinate axis.
pub fn tangent_basis(omega: &Direction) -> Vec<Vec<f64>> {
    let d = omega.dim();
    let w = omega.components();
    let s = if w[d - 1] >= 0.0 { 1.0 } else { -1.0 };
    // u = omega + s e_d ; H = I - 2 u u^T / |u|^2 maps e_d to -s omega,
    // so the first d-1 columns of H span the orthogonal complement of omega.
    let mut u = w.to_vec();
    u[d - 1] += s;
    let uu = dot(&u, &u);
    let mut basis = Vec::with_capacity(d - 1);
    for a in 0..d - 1 {
        let mut col = vec![0.0; d];
        for i in 0..d {
            let delta = if i == a { 1.0 } else { 0.0 };
            col[i] = delta - 2.0 * u[i] * u[a] / uu;
        }
        basis.push(col);
    }
    basis
}

/// Quadrature nodes and weights on S^{d-1}.
///
/// d = 2: equally spaced angles (4*level nodes), exact for trigonometric
/// polynomials of degree < node count. d = 3: Gauss-Legendre in the polar
/// cosine ((2*level+1) nodes) times uniform azimuth (2*(2*level+1) nodes).
pub fn sphere_grid(d: usize, level: usize) -> Result<Vec<(Direction, f64)>> {
    if level < 1 {
        return Err(Error::Degenerate("sphere_grid level must be >= 1"));
    }
    match d {
        2 => {
            let n = 4 * level;
            let w = 2.0 * PI / n as f64;
            Ok((0..n)
                .map(|j| {
                    let th = 2.0 * PI * j as f64 / n as f64;
                    (Direction(vec![th.cos(), th.sin()]), w)
                })
                .collect())
        }
        3 => {
            let np = 2 * level + 1;
            let na = 2 * np;
            let rule = gauss_legendre(np);
            let wa = 2.0 * PI / na as f64;
            let mut out = Vec::with_capacity(np * na);
            for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
                let sin_t = (1.0 - u * u).sqrt();
                for j in 0..na {
                    let ph = 2.0 * PI * j as f64 / na as f64;
                    out.push((
                        Direction(vec![sin_t * ph.cos(), sin_t * ph.sin(), *u]),
                        wu * wa,
                    ));
                }
            }
            Ok(out)
        }
        _ => Err(Error::UnsupportedDimension {
            d,
            context: "sphere quadrature with exactness guarantees",
        }),
    }
}

/// Analytic average of the monomial x^alpha over S^{d-1} (surface measure / area),
/// used as the quadrature oracle: zero if any exponent is odd, otherwise a ratio
/// of half-integer Gamma factors.
pub fn sphere_monomial_average(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|&a| a % 2 == 1) {
        return 0.0;
    }
    fn gamma_half(two_z: u32) -> f64 {
        // Gamma(two_z / 2) for two_z >= 1
        if two_z % 2 == 0 {
            (1..two_z / 2).map(|k| k as f64).product::<f64>()
        } else {
            let mut g = PI.sqrt();
            let mut z = 0.5;
            while (2.0 * z) < two_z as f64 {
                g *= z;
                z += 1.0;
            }
            g
        }
    }
    let d = alpha.len() as u32;
    let total: u32 = alpha.iter().sum();
    // integral = 2 prod Gamma((a_i+1)/2) / Gamma((|a|+d)/2); area = case alpha = 0
    let num: f64 = alpha.iter().map(|&a| gamma_half(a + 1)).product();
    let integral = 2.0 * num / gamma_half(total + d);
    let area = 2.0 * PI.sqrt().powi(d as i32) / gamma_half(d);
    integral / area
}
