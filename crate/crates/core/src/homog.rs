//! Homogeneous terms and their finite asymptotic sums.
//!
//! A term of degree rho > 0 evaluates as |x|^{-rho} p(x/|x|) with p a polynomial
//! in the Cartesian components of the unit vector. The class is closed under
//! partial derivatives (degree rho + 1), which the transport and gauge machinery
//! rely on.

use crate::error::{Error, Result};
use crate::geom::{norm, Y_MIN};

pub const MAX_DIM: usize = 8;

/// One monomial c * x1^e1 ... xd^ed.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub exps: [u8; MAX_DIM],
}

impl Monomial {
    pub fn new(coef: f64, exps: &[u8]) -> Self {
        let mut e = [0u8; MAX_DIM];
        e[..exps.len()].copy_from_slice(exps);
        Monomial { coef, exps: e }
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }
}

/// Polynomial profile on the unit sphere in `dim` variables.
///
/// Stored canonically: reduced modulo the sphere relation (the last variable
/// appears at most to the first power, higher even powers rewritten through
/// 1 - sum of the other squares), sorted, merged, exact zeros dropped. Two
/// profiles equal as functions on the sphere then have equal representations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Profile {
    dim: usize,
    monos: Vec<Monomial>,
}

impl Profile {
    pub fn new(dim: usize, monos: Vec<Monomial>) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM);
        let mut p = Profile { dim, monos };
        p.canonicalize();
        p
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Profile::new(dim, vec![Monomial::new(c, &[])])
    }

    pub fn zero(dim: usize) -> Self {
        Profile { dim, monos: vec![] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monos
    }

    pub fn is_zero(&self) -> bool {
        self.monos.is_empty()
    }

    fn canonicalize(&mut self) {
        let last = self.dim - 1;
        // rewrite x_last^2 = 1 - sum_{i < last} x_i^2 until no power >= 2 remains
        let mut work = std::mem::take(&mut self.monos);
        let mut done: Vec<Monomial> = Vec::with_capacity(work.len());
        while let Some(m) = work.pop() {
            if m.exps[last] >= 2 {
                let mut base = m.exps;
                base[last] -= 2;
                work.push(Monomial { coef: m.coef, exps: base });
                for i in 0..last {
                    let mut e = base;
                    e[i] += 2;
                    work.push(Monomial { coef: -m.coef, exps: e });
                }
            } else {
                done.push(m);
            }
        }
        done.sort_by(|a, b| a.exps.cmp(&b.exps));
        let mut out: Vec<Monomial> = Vec::with_capacity(done.len());
        for m in done {
            if let Some(prev) = out.last_mut() {
                if prev.exps == m.exps {
                    prev.coef += m.coef;
                    continue;
                }
            }
            out.push(m);
        }
        out.retain(|m| m.coef.abs() > 1e-300);
        self.monos = out;
    }

    pub fn eval(&self, xhat: &[f64]) -> f64 {
        let mut acc = 0.0;
        for m in &self.monos {
            let mut term = m.coef;
            for (i, &e) in m.exps.iter().take(xhat.len()).enumerate() {
                if e > 0 {
                    term *= xhat[i].powi(e as i32);
                }
            }
            acc += term;
        }
        acc
    }

    pub fn add(&self, other: &Profile) -> Profile {
        debug_assert_eq!(self.dim, other.dim);
        let mut monos = self.monos.clone();
        monos.extend_from_slice(&other.monos);
        Profile::new(self.dim, monos)
    }

    pub fn scaled(&self, c: f64) -> Profile {
        Profile::new(
            self.dim,
            self.monos.iter().map(|m| Monomial { coef: c * m.coef, ..*m }).collect(),
        )
    }

    pub fn max_total_degree(&self) -> u32 {
        self.monos.iter().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    /// True when every monomial has even (odd) total degree.
    pub fn parity(&self) -> Option<bool> {
        if self.monos.is_empty() {
            return Some(true);
        }
        let p0 = self.monos[0].total_degree() % 2;
        if self.monos.iter().all(|m| m.total_degree() % 2 == p0) {
            Some(p0 == 0)
        } else {
            None
        }
    }
}

/// Homogeneous function of order -rho: f(x) = |x|^{-rho} p(x/|x|).
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousTerm {
    pub degree: f64,
    pub profile: Profile,
}

impl HomogeneousTerm {
    pub fn new(degree: f64, profile: Profile) -> Result<Self> {
        if !(degree > 0.0) {
            return Err(Error::Degenerate("homogeneous degree must be positive"));
        }
        Ok(HomogeneousTerm { degree, profile })
    }

    /// Evaluation away from the origin; the homogeneity f(t x) = t^{-rho} f(x)
    /// holds exactly up to rounding.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        let inv = 1.0 / r;
        let xhat: Vec<f64> = x.iter().map(|c| c * inv).collect();
        r.powf(-self.degree) * self.profile.eval(&xhat)
    }

    /// Exact partial derivative: again a homogeneous term, of degree rho + 1.
    ///
    /// d/dx_i [ x^beta |x|^{-rho-|beta|} ] =
    ///   beta_i x^{beta - e_i} |x|^{-rho-|beta|} - (rho+|beta|) x^{beta + e_i} |x|^{-rho-|beta|-2}.
    pub fn partial(&self, i: usize) -> HomogeneousTerm {
        let rho = self.degree;
        let mut monos = Vec::with_capacity(2 * self.profile.monos.len());
        for m in &self.profile.monos {
            let beta_total = m.total_degree() as f64;
            if m.exps[i] > 0 {
                let mut down = m.exps;
                down[i] -= 1;
                monos.push(Monomial { coef: m.coef * m.exps[i] as f64, exps: down });
            }
            let mut up = m.exps;
            up[i] += 1;
            monos.push(Monomial { coef: -m.coef * (rho + beta_total), exps: up });
        }
        HomogeneousTerm { degree: rho + 1.0, profile: Profile::new(self.profile.dim, monos) }
    }
}

/// Finite sum of homogeneous terms with strictly increasing degrees.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AsymptoticScalarField {
    terms: Vec<HomogeneousTerm>,
}

impl AsymptoticScalarField {
    /// Sorts by degree and merges terms whose degrees coincide to 1e-12.
    pub fn new(terms: Vec<HomogeneousTerm>) -> Self {
        let mut terms: Vec<HomogeneousTerm> =
            terms.into_iter().filter(|t| !t.profile.is_zero()).collect();
        terms.sort_by(|a, b| a.degree.partial_cmp(&b.degree).unwrap());
        let mut out: Vec<HomogeneousTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            if let Some(last) = out.last_mut() {
                if (last.degree - t.degree).abs() < 1e-12 {
                    last.profile = last.profile.add(&t.profile);
                    continue;
                }
            }
            out.push(t);
        }
        out.retain(|t| !t.profile.is_zero());
        AsymptoticScalarField { terms: out }
    }

    pub fn zero() -> Self {
        AsymptoticScalarField { terms: vec![] }
    }

    pub fn single(degree: f64, profile: Profile) -> Result<Self> {
        Ok(AsymptoticScalarField::new(vec![HomogeneousTerm::new(degree, profile)?]))
    }

    pub fn terms(&self) -> &[HomogeneousTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_degree(&self) -> Option<f64> {
        self.terms.first().map(|t| t.degree)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let r = norm(x);
        if r < Y_MIN {
            return Err(Error::OriginEvaluation { radius: r });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the origin guard; callers must keep |x| >= Y_MIN.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let r = norm(x);
        let inv = 1.0 / r;
        let mut xhat = [0.0f64; MAX_DIM];
        for (o, c) in xhat.iter_mut().zip(x) {
            *o = c * inv;
        }
        let xhat = &xhat[..x.len()];
        self.terms.iter().map(|t| r.powf(-t.degree) * t.profile.eval(xhat)).sum()
    }

    pub fn partial(&self, i: usize) -> AsymptoticScalarField {
        AsymptoticScalarField::new(self.terms.iter().map(|t| t.partial(i)).collect())
    }

    pub fn laplacian(&self, d: usize) -> AsymptoticScalarField {
        let mut acc = AsymptoticScalarField::zero();
        for i in 0..d {
            acc = acc.add(&self.partial(i).partial(i));
        }
        acc
    }

    pub fn add(&self, other: &AsymptoticScalarField) -> AsymptoticScalarField {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        AsymptoticScalarField::new(terms)
    }

    pub fn scaled(&self, c: f64) -> AsymptoticScalarField {
        AsymptoticScalarField::new(
            self.terms
                .iter()
                .map(|t| HomogeneousTerm { degree: t.degree, profile: t.profile.scaled(c) })
                .collect(),
        )
    }

    /// Profile of the degree-2 part (the t^2-weighted limit along a ray), used by
    /// the compactified line quadrature at its endpoint.
    pub fn degree_two_profile_at(&self, u: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|t| (t.degree - 2.0).abs() < 1e-12)
            .map(|t| t.profile.eval(u))
            .sum()
    }
}

/// Anything the forward engine can sample pointwise as a scalar potential.
pub trait ScalarModel: Sync {
    fn value(&self, x: &[f64]) -> f64;
}

impl ScalarModel for AsymptoticScalarField {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval_unchecked(x)
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> ScalarModel for F {
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}
