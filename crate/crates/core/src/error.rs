use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dimension {0} is outside the supported range 1..=8")]
    UnsupportedDimension(usize),

    #[error("grade {grade} out of range for dimension {dim}")]
    GradeOutOfRange { grade: usize, dim: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("versor is not unit: |UU^† - 1| = {deviation:e}")]
    NonUnitVersor { deviation: f64 },

    #[error("versor has odd-grade content {odd_norm:e}; only rotors are supported")]
    OddVersor { odd_norm: f64 },

    #[error("multivector is not grade-homogeneous")]
    NotHomogeneous,

    #[error("point is {distance:e} from singular point {index}, need more than {required:e}")]
    NearSingularity {
        index: usize,
        distance: f64,
        required: f64,
    },

    #[error("finite-difference stencil leaves the chart at {point:?}")]
    OutsideChart { point: Vec<f64> },

    #[error("field vanishes (|phi| = {norm:e}) at {point:?}")]
    ZeroField { point: Vec<f64>, norm: f64 },

    #[error("field has a zero on the integration sphere (min |phi| = {min_norm:e})")]
    ZeroOnSphere { min_norm: f64 },

    #[error("winding integral {raw} is not quantized (residual {residual:e}); refine the quadrature")]
    NotQuantized { raw: f64, residual: f64 },

    #[error("angle jump of {jump} rad between samples; increase the sample count")]
    Undersampled { jump: f64 },

    #[error("no regular direction found after {attempts} attempts")]
    NoRegularDirection { attempts: usize },

    #[error("Newton iteration did not converge from cell {cell:?} (|phi| = {residual:e})")]
    NewtonNonConvergence { cell: Vec<f64>, residual: f64 },

    #[error("zeros at {a:?} and {b:?} are closer than the isolation radius {radius:e}; refine the grid")]
    ZerosTooClose { a: Vec<f64>, b: Vec<f64>, radius: f64 },

    #[error("regular zero at {point:?} has Jacobian sign {eta} but winding {winding}")]
    IndexMismatch { point: Vec<f64>, eta: i8, winding: i64 },

    #[error("zero at {point:?} lies on the domain boundary")]
    ZeroOnBoundary { point: Vec<f64> },

    #[error("zero at {point:?} falls inside the chart seam guard band")]
    SeamGuard { point: Vec<f64> },

    #[error("point {point:?} is {distance:e} away from the boundary")]
    NotOnBoundary { point: Vec<f64>, distance: f64 },

    #[error("tangential field has non-isolated zeros on the boundary")]
    NonIsolatedBoundaryZeros,

    #[error("matrix of size {0} is not even-dimensional")]
    OddSize(usize),

    #[error("matrix is not antisymmetric (deviation {0:e})")]
    NotAntisymmetric(f64),

    #[error("integral {raw} is not within 0.1 of an integer")]
    ResidualTooLarge { raw: f64 },

    #[error("invalid simplicial complex: {0}")]
    InvalidComplex(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
