use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("geometry violation: {0}")]
    GeometryViolation(String),
    #[error("radial profile must be positive at the boundary radius {radius}")]
    NonpositiveProfile { radius: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("determinantal evaluation requires beta = 2, got {beta}")]
    BetaMismatch { beta: f64 },
    #[error("polynomial index {index} out of range (family has {len} members)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("no closed form: {0}")]
    NoClosedForm(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),
    #[error("norm integral is not positive (h = {value})")]
    NonpositiveResult { value: f64 },
    #[error("radius {radius} outside the validity region of the family")]
    RadiusOutOfRange { radius: f64 },
    #[error("point at |z| = {modulus} lies outside the support")]
    OutOfSupport { modulus: f64 },
    #[error("kernel split undefined: {0}")]
    SplitUndefined(String),
    #[error("kernel matrix determinant {value} is negative beyond tolerance (scale {scale})")]
    NegativeDeterminant { value: f64, scale: f64 },
    #[error("parameter violation: {0}")]
    ParameterViolation(String),
    #[error("coincident points make the interaction energy divergent")]
    CoincidentPoints,
    #[error("formula {formula} cannot be evaluated in a {frame} frame")]
    FrameMismatch {
        formula: &'static str,
        frame: &'static str,
    },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("problem too large for brute-force quadrature: {0}")]
    TooLarge(String),
    #[error("could not build inverse CDF table: {0}")]
    CdfBuildFailure(String),
    #[error("radius {radius} outside the tabulated profile range [{lo}, {hi}]")]
    ProfileOutOfRange { radius: f64, lo: f64, hi: f64 },
}

impl Error {
    /// True for errors caused by invalid input rather than by a numerical
    /// procedure failing to reach its tolerance.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::QuadratureNonConvergence(_)
                | Error::NonpositiveResult { .. }
                | Error::NegativeDeterminant { .. }
                | Error::CdfBuildFailure(_)
        )
    }
}
