use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("evaluation inside the excluded origin ball (|x| = {radius:.3e} < y_min)")]
    OriginEvaluation { radius: f64 },

    #[error("divergent line integral: term of degree {rho} does not decay fast enough (need > {min})")]
    DivergentDegree { rho: f64, min: f64 },

    #[error("unsupported dimension d = {d} for {context}")]
    UnsupportedDimension { d: usize, context: &'static str },

    #[error("direction outside the chart aperture: <omega, omega0> = {cosine:.4} <= delta = {delta}")]
    Aperture { cosine: f64, delta: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("antipodal base point: no great-circle arc avoids the origin")]
    AntipodalPath,

    #[error("per-direction power-law slopes spread {spread:.4} exceeds tolerance {tol:.4}")]
    InconsistentDegree { spread: f64, tol: f64 },

    #[error("grid is missing the reversed orientation for some direction pair")]
    MissingOrientation,

    #[error("malformed input file: {0}")]
    MalformedInput(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("offset grid too coarse for |xi| = {xi:.3} (spacing {spacing:.3})")]
    Aliasing { xi: f64, spacing: f64 },

    #[error("transport order {n} not supported (max {max})")]
    TransportOrder { n: usize, max: usize },

    #[error("finite-difference step underflow at scale {scale:.3e}")]
    StepDegeneracy { scale: f64 },

    #[error("sinogram angle grid does not contain a line orthogonal to the requested frequency")]
    AngleNotSampled,

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
