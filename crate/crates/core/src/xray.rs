//! Line integrals of the potentials: the electric and magnetic X-ray transforms
//! and the Born-level symbol combining them.

use crate::error::{Error, Result};
use crate::geom::{dot, norm, LineSpec};
use crate::homog::AsymptoticScalarField;
use crate::quad::line_integral_full;
use num_complex::Complex64;

const REL_TOL: f64 = 1e-11;
const N0: usize = 128;
const N_MAX: usize = 4096;

/// Electric X-ray transform: integral of V along the line.
pub fn xray_electric(v: &AsymptoticScalarField, line: &LineSpec) -> Result<f64> {
    if let Some(rho) = v.min_degree() {
        if rho <= 1.0 {
            return Err(Error::DivergentDegree { rho, min: 1.0 });
        }
    }
    let scale = norm(&line.foot);
    Ok(line_integral_full(|t| v.eval_unchecked(&line.point_at(t)), scale, REL_TOL, N0, N_MAX).value)
}

/// Magnetic X-ray transform: integral of <omega, A> along the line. The field is
/// a callable so gauge-shift tests can feed arbitrary decaying potentials.
pub fn xray_magnetic<F>(a: F, line: &LineSpec) -> f64
where
    F: Fn(&[f64]) -> Vec<f64> + Copy,
{
    let omega = line.direction.components();
    let scale = norm(&line.foot);
    line_integral_full(|t| dot(omega, &a(&line.point_at(t))), scale, REL_TOL, N0, N_MAX).value
}

/// Electric, magnetic and combined Born values on one line at energy lambda.
#[derive(Debug, Clone)]
pub struct XRayValue {
    pub line: LineSpec,
    pub electric: f64,
    pub magnetic: f64,
    pub born: Complex64,
    pub energy: f64,
}

impl XRayValue {
    pub fn wavenumber(&self) -> f64 {
        self.energy.sqrt()
    }
}

/// R(y, omega; lambda) = (2ik)^{-1} (R_e - 2k R_m).
pub fn born_symbol<F>(
    v: &AsymptoticScalarField,
    a: Option<F>,
    line: &LineSpec,
    lambda: f64,
) -> Result<XRayValue>
where
    F: Fn(&[f64]) -> Vec<f64> + Copy,
{
    if lambda <= 0.0 {
        return Err(Error::Degenerate("energy must be positive"));
    }
    let k = lambda.sqrt();
    let electric = xray_electric(v, line)?;
    let magnetic = match a {
        Some(field) => xray_magnetic(field, line),
        None => 0.0,
    };
    let born = Complex64::new(electric - 2.0 * k * magnetic, 0.0) / Complex64::new(0.0, 2.0 * k);
    Ok(XRayValue { line: line.clone(), electric, magnetic, born, energy: lambda })
}
