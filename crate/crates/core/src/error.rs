use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("metric is singular at {0:?}")]
    SingularMetric([f64; 3]),
    #[error("metric is not positive definite at {0:?}")]
    NotPositiveDefinite([f64; 3]),
    #[error("point {0:?} is not on the boundary plane x3 = 0")]
    NotOnBoundary([f64; 3]),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bubble centers {0} and {1} coincide")]
    CoincidentCenters(usize, usize),
    #[error("surface of size {size} meets an excised region")]
    SurfaceMeetsExcision { size: f64 },
    #[error("metric is not mirror symmetric; doubling across x3 = 0 is undefined")]
    NotMirrorSymmetric,
    #[error("extrapolation needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample radii must be strictly increasing")]
    NonIncreasingRadii,
    #[error("stencil at node {node} leaves the domain along axis {axis}")]
    StencilOutOfDomain { node: usize, axis: usize },
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error(
        "conjugate gradient did not converge: {iterations} iterations, relative residual {residual:e}"
    )]
    NotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
}
