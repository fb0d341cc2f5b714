//! Small special-function kit: the generalized exponential integral on the
//! imaginary axis (for oscillatory power-law tails) and smooth cutoff profiles.

use crate::quad::gauss_legendre;
use num_complex::Complex64;

/// E_nu(iz) = int_1^inf exp(-i z u) u^{-nu} du for z > 0, nu > 0.
///
/// Computed on the rotated contour u = 1 - i tau, where the integrand decays like
/// exp(-z tau) (1 + tau^2)^{-nu/2}; geometric panels in tau with Gauss-Legendre
/// per panel. Absolutely convergent for every nu > 0 once z > 0.
pub fn exp_integral_e_imag(nu: f64, z: f64) -> Complex64 {
    assert!(nu > 0.0, "exp_integral_e_imag needs nu > 0");
    assert!(z > 0.0, "exp_integral_e_imag needs z > 0");
    let rule = gauss_legendre(16);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut lo = 0.0_f64;
    let mut width = 0.5_f64.min(1.0 / z);
    for _ in 0..200 {
        let hi = lo + width;
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let mut panel = Complex64::new(0.0, 0.0);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let tau = c + h * x;
            let base = Complex64::new(1.0, -tau);
            let val = (-z * tau).exp() * base.powf(-nu);
            panel += w * val;
        }
        acc += panel * h;
        lo = hi;
        width *= 2.0;
        // envelope bound on the remaining tail
        let env = (-z * lo).exp() * (1.0 + lo * lo).powf(-0.5 * nu) / z;
        if env < 1e-18 * acc.norm().max(1e-30) {
            break;
        }
    }
    let phase = Complex64::new(0.0, -z).exp();
    Complex64::new(0.0, -1.0) * phase * acc
}

/// Oscillatory power tail: int_S^inf exp(-i xi s) s^{-mu} ds  (S > 0, xi >= 0).
pub fn oscillatory_power_tail(mu: f64, xi: f64, s_start: f64) -> Complex64 {
    assert!(s_start > 0.0);
    if xi.abs() < 1e-300 {
        // plain power tail; requires mu > 1
        assert!(mu > 1.0, "non-oscillatory tail diverges for mu <= 1");
        return Complex64::new(s_start.powf(1.0 - mu) / (mu - 1.0), 0.0);
    }
    s_start.powf(1.0 - mu) * exp_integral_e_imag(mu, xi * s_start)
}

/// Smooth step: 0 for t <= a, 1 for t >= b, C-infinity monotone in between.
pub fn smooth_step(t: f64, a: f64, b: f64) -> f64 {
    debug_assert!(b > a);
    let u = (t - a) / (b - a);
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let qa = (-1.0 / u).exp();
        let qb = (-1.0 / (1.0 - u)).exp();
        qa / (qa + qb)
    }
}

/// Derivative of `smooth_step` in t.
pub fn smooth_step_deriv(t: f64, a: f64, b: f64) -> f64 {
    let u = (t - a) / (b - a);
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let qa = (-1.0 / u).exp();
    let qb = (-1.0 / (1.0 - u)).exp();
    let da = qa / (u * u);
    let db = -qb / ((1.0 - u) * (1.0 - u));
    ((da * (qa + qb) - qa * (da + db)) / ((qa + qb) * (qa + qb))) / (b - a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Brute-force reference for the tail integral at moderate oscillation:
    /// dense Simpson over a long truncated range plus the first two terms of the
    /// integration-by-parts expansion of the far remainder.
    fn tail_reference(mu: f64, xi: f64, s0: f64) -> Complex64 {
        let s_end = s0 + 4000.0;
        let n = 4_000_000usize;
        let h = (s_end - s0) / n as f64;
        let f = |s: f64| {
            let ph = Complex64::new(0.0, -xi * s).exp();
            ph * s.powf(-mu)
        };
        let mut acc = f(s0) + f(s_end);
        for j in 1..n {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(s0 + j as f64 * h);
        }
        let body = acc * h / 3.0;
        // int_S^inf = e^{-i xi S} S^-mu / (i xi) (1 - mu / (i xi S)) + O(S^{-mu-2})
        let ik = Complex64::new(0.0, xi);
        let boundary = Complex64::new(0.0, -xi * s_end).exp() * s_end.powf(-mu) / ik
            * (Complex64::new(1.0, 0.0) - mu / (ik * s_end));
        body + boundary
    }

    #[test]
    fn tail_agrees_with_brute_force() {
        for &(mu, xi, s0) in &[(1.0, 1.0, 40.0), (2.0, 0.7, 40.0), (1.5, 3.0, 20.0)] {
            let fast = oscillatory_power_tail(mu, xi, s0);
            let slow = tail_reference(mu, xi, s0);
            assert!(
                (fast - slow).norm() < 1e-7,
                "mu={mu} xi={xi}: {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn tail_zero_frequency_closed_form() {
        let v = oscillatory_power_tail(3.0, 0.0, 8.0);
        assert!((v.re - 8.0_f64.powf(-2.0) / 2.0).abs() < 1e-15);
        assert!(v.im == 0.0);
    }

    #[test]
    fn e2_recursion_identity() {
        // E_{nu+1}(z) = (exp(-z) - z E_nu(z)) / nu on the imaginary axis
        for &z in &[0.4_f64, 2.0, 17.0, 150.0] {
            let e1 = exp_integral_e_imag(1.0, z);
            let e2 = exp_integral_e_imag(2.0, z);
            let rhs = (Complex64::new(0.0, -z).exp() - Complex64::new(0.0, z) * e1) / 1.0;
            assert!((e2 - rhs).norm() < 1e-12, "z={z}: {e2} vs {rhs}");
        }
    }

    #[test]
    fn smooth_step_shape() {
        assert_eq!(smooth_step(0.4, 0.5, 1.0), 0.0);
        assert_eq!(smooth_step(1.1, 0.5, 1.0), 1.0);
        let mid = smooth_step(0.75, 0.5, 1.0);
        assert!((mid - 0.5).abs() < 1e-12);
        // derivative consistent with finite differences
        let h = 1e-6;
        let fd = (smooth_step(0.8 + h, 0.5, 1.0) - smooth_step(0.8 - h, 0.5, 1.0)) / (2.0 * h);
        assert!((smooth_step_deriv(0.8, 0.5, 1.0) - fd).abs() < 1e-6);
    }

    #[test]
    fn half_period_sine_integral_sanity() {
        // int_S^inf sin(s)/s ds = pi/2 - Si(S); check against quadrature of Si
        // via the identity with our tail at mu=1, xi=1.
        let tail = oscillatory_power_tail(1.0, 1.0, PI);
        // Im part = -int_pi^inf sin(s)/s ds = -(pi/2 - Si(pi)); Si(pi) = 1.851937051982...
        let expected_im = -(PI / 2.0 - 1.851_937_051_982_066);
        assert!((tail.im - expected_im).abs() < 1e-9, "{}", tail.im);
    }
}
