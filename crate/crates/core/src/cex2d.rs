//! The planar counter-example: for V(x) = v(xhat) |x|^{-2} in d = 2 the Radon
//! transform collapses to half-circle integrals of the profile, which vanish for
//! every line exactly when v is even with zero mean. A nonzero such v therefore
//! kills the leading diagonal singularity of the data.

use crate::error::Result;
use crate::geom::Direction;
use crate::homog::{Monomial, Profile};
use crate::quad::{gauss_legendre, line_integral_full};
use std::f64::consts::{FRAC_PI_2, PI};

/// Smooth 2 pi - periodic profile, polynomial in the components of the unit vector.
#[derive(Debug, Clone)]
pub struct CircleProfile {
    pub profile: Profile,
}

impl CircleProfile {
    pub fn new(profile: Profile) -> Self {
        debug_assert_eq!(profile.dim(), 2);
        CircleProfile { profile }
    }

    /// The vanishing example: v(w) = 2 <w, w0>^2 - 1 with w0 = e1.
    pub fn standard_vanishing() -> Self {
        CircleProfile::new(Profile::new(
            2,
            vec![Monomial::new(2.0, &[2, 0]), Monomial::new(-1.0, &[0, 0])],
        ))
    }

    pub fn eval_angle(&self, theta: f64) -> f64 {
        self.profile.eval(&[theta.cos(), theta.sin()])
    }

    pub fn eval_unit(&self, w: &[f64]) -> f64 {
        self.profile.eval(w)
    }
}

/// Traversal orientation of the half-circle from -omega to omega.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

/// Integral of the profile over the half-circle from -omega to omega.
///
/// The counter-clockwise arc is the one whose midpoint is omega rotated by
/// -pi/2; parameterized as cos(s) c + sin(s) omega, s in (-pi/2, pi/2).
pub fn halfcircle_integral(v: &CircleProfile, omega: &Direction, orientation: Orientation) -> f64 {
    let w = omega.components();
    let mid = match orientation {
        Orientation::CounterClockwise => [w[1], -w[0]],
        Orientation::Clockwise => [-w[1], w[0]],
    };
    let rule = gauss_legendre(64);
    rule.integrate(-FRAC_PI_2, FRAC_PI_2, |s| {
        let p = [s.cos() * mid[0] + s.sin() * w[0], s.cos() * mid[1] + s.sin() * w[1]];
        v.eval_unit(&p)
    })
}

/// Radon transform of v(xhat) |x|^{-2} on the line through y orthogonal to omega:
/// |y|^{-1} times the half-circle integral over the arc containing yhat.
pub fn radon_homog2(v: &CircleProfile, omega: &Direction, y: &[f64]) -> Result<f64> {
    let ny = crate::geom::norm(y);
    let line = crate::geom::LineSpec::new(omega.clone(), y.to_vec())?;
    let w = line.direction.components();
    let det = w[0] * y[1] - w[1] * y[0];
    let orientation = if det < 0.0 {
        Orientation::CounterClockwise
    } else {
        Orientation::Clockwise
    };
    Ok(halfcircle_integral(v, omega, orientation) / ny)
}

/// The two equivalent vanishing conditions: v even and of zero circular mean.
/// Both are reported with their numerical defect magnitudes.
#[derive(Debug, Clone, Copy)]
pub struct VanishingConditions {
    pub even: bool,
    pub zero_mean: bool,
    pub even_defect: f64,
    pub mean: f64,
}

pub fn check_vanishing_conditions(v: &CircleProfile) -> VanishingConditions {
    let n = 64;
    let mut even_defect = 0.0f64;
    for j in 0..n {
        let th = 2.0 * PI * j as f64 / n as f64;
        even_defect = even_defect.max((v.eval_angle(th) - v.eval_angle(th + PI)).abs());
    }
    let rule = gauss_legendre(64);
    let mean = rule.integrate(0.0, 2.0 * PI, |th| v.eval_angle(th));
    VanishingConditions {
        even: even_defect <= 1e-12,
        zero_mean: mean.abs() <= 1e-12,
        even_defect,
        mean,
    }
}

/// Direct line quadrature of v(xhat) |x|^{-2}, the cross-check oracle for
/// the half-circle reduction.
pub fn radon_homog2_direct(v: &CircleProfile, omega: &Direction, y: &[f64]) -> f64 {
    let w = omega.components();
    let ny = crate::geom::norm(y);
    line_integral_full(
        |t| {
            let p = [y[0] + t * w[0], y[1] + t * w[1]];
            let r2 = p[0] * p[0] + p[1] * p[1];
            let r = r2.sqrt();
            v.eval_unit(&[p[0] / r, p[1] / r]) / r2
        },
        ny,
        1e-12,
        128,
        4096,
    )
    .value
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dir(theta: f64) -> Direction {
        Direction::new(vec![theta.cos(), theta.sin()]).unwrap()
    }

    #[test]
    fn halfcircle_of_constant_is_pi() {
        let v = CircleProfile::new(Profile::constant(2, 1.0));
        for or in [Orientation::CounterClockwise, Orientation::Clockwise] {
            let val = halfcircle_integral(&v, &dir(0.77), or);
            assert!((val - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn paper_profile_halfcircles_vanish() {
        let v = CircleProfile::standard_vanishing();
        for j in 0..12 {
            let omega = dir(2.0 * PI * j as f64 / 12.0 + 0.1);
            for or in [Orientation::CounterClockwise, Orientation::Clockwise] {
                assert!(halfcircle_integral(&v, &omega, or).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cosine_profile_halfcircle() {
        // v = <theta, e1>, omega = e2, counter-clockwise arc -> 2
        let v = CircleProfile::new(Profile::new(2, vec![Monomial::new(1.0, &[1, 0])]));
        let val = halfcircle_integral(&v, &dir(FRAC_PI_2), Orientation::CounterClockwise);
        assert!((val - 2.0).abs() < 1e-12, "{val}");
    }

    #[test]
    fn radon_matches_direct_quadrature_and_scales() {
        let v = CircleProfile::new(Profile::new(
            2,
            vec![
                Monomial::new(0.8, &[0, 0]),
                Monomial::new(-1.2, &[1, 1]),
                Monomial::new(0.5, &[3, 0]),
            ],
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let th: f64 = rng.gen_range(0.0..2.0 * PI);
            let omega = dir(th);
            let s: f64 = rng.gen_range(0.4..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let y = [-s * th.sin(), s * th.cos()];
            let fast = radon_homog2(&v, &omega, &y).unwrap();
            let direct = radon_homog2_direct(&v, &omega, &y);
            assert!((fast - direct).abs() < 1e-9, "{fast} vs {direct}");
            // scaling: the value at 2y is half the value at y
            let y2 = [2.0 * y[0], 2.0 * y[1]];
            let half = radon_homog2(&v, &omega, &y2).unwrap();
            assert!((half - 0.5 * fast).abs() < 1e-12);
        }
        // constant profile agrees with the |x|^-2 line oracle pi / |y|
        let one = CircleProfile::new(Profile::constant(2, 1.0));
        let val = radon_homog2(&one, &dir(0.0), &[0.0, 1.0]).unwrap();
        assert!((val - PI).abs() < 1e-12);
    }

    #[test]
    fn vanishing_condition_examples() {
        let paper = check_vanishing_conditions(&CircleProfile::standard_vanishing());
        assert!(paper.even && paper.zero_mean);
        let odd = check_vanishing_conditions(&CircleProfile::new(Profile::new(
            2,
            vec![Monomial::new(1.0, &[1, 0])],
        )));
        assert!(!odd.even && odd.zero_mean);
        let constant = check_vanishing_conditions(&CircleProfile::new(Profile::constant(2, 1.0)));
        assert!(constant.even && !constant.zero_mean);
    }

    #[test]
    fn equivalence_over_random_profiles() {
        // transform vanishes on a dense line sample iff both conditions hold
        let mut rng = ChaCha8Rng::seed_from_u64(4021);
        for trial in 0..30 {
            let mut monos = vec![];
            for e1 in 0..4u8 {
                for e2 in 0..4u8 {
                    if e1 + e2 > 3 || rng.gen_bool(0.5) {
                        continue;
                    }
                    monos.push(Monomial::new(rng.gen_range(-1.0..1.0), &[e1, e2]));
                }
            }
            // half the trials are forced into the vanishing family
            if trial % 2 == 0 {
                monos = vec![
                    Monomial::new(rng.gen_range(0.5..2.0), &[2, 0]),
                    Monomial::new(rng.gen_range(-2.0..-0.5) / 2.0, &[0, 0]),
                    Monomial::new(rng.gen_range(-1.0..1.0), &[1, 1]),
                ];
                // enforce zero mean: mean of a (2,0) monomial is 1/2, of (0,0) is 1
                let m20 = monos[0].coef;
                monos[1].coef = -m20 / 2.0;
            }
            let v = CircleProfile::new(Profile::new(2, monos));
            if v.profile.is_zero() {
                continue;
            }
            let conds = check_vanishing_conditions(&v);
            let mut max_transform = 0.0f64;
            for j in 0..16 {
                let th = 2.0 * PI * j as f64 / 16.0 + 0.05;
                let omega = dir(th);
                for &s in &[0.7, -1.3] {
                    let y = [-s * th.sin(), s * th.cos()];
                    max_transform =
                        max_transform.max(radon_homog2(&v, &omega, &y).unwrap().abs());
                }
            }
            let vanishes = max_transform < 1e-10;
            assert_eq!(
                vanishes,
                conds.even && conds.zero_mean,
                "trial {trial}: transform max {max_transform}, conds {conds:?}"
            );
        }
    }
}
