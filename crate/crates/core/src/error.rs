use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LegendreError {
    #[error("kh must be positive and finite, got {0}")]
    NonPositiveKh(f64),
    #[error("derivative order {0} exceeds 2")]
    DerivativeOrder(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaterialError {
    #[error("{field} must be positive and finite, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("engineering constants give a compliance that is not positive definite")]
    NotPositiveDefinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Legendre(#[from] LegendreError),
    #[error("expansion order must be at least 1, got {0}")]
    OrderTooLow(usize),
    #[error("matrix dimensions do not match: {0}")]
    Dimension(String),
    #[error("eigensolver did not converge (dim {dim}, max |a_ij| {max_entry:e})")]
    NoConvergence { dim: usize, max_entry: f64 },
    #[error("generalized eigenproblem has singular mass matrix")]
    SingularMass,
    #[error("eigenvalue {re} + {im}i is not real")]
    NonRealSpectrum { re: f64, im: f64 },
    #[error("invalid wavenumber grid: {0}")]
    InvalidGrid(&'static str),
    #[error("{excluded} of {total} grid points have fewer than 2 physical modes")]
    TooManyExcluded { excluded: usize, total: usize },
    #[error("group velocity needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("perturbation must lie in [0, 1), got {0}")]
    Perturbation(f64),
    #[error("automatic convergence not reached by order {0}")]
    NotConverged(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("invalid field: {0}")]
    InvalidField(&'static str),
    #[error("{axis} Nyquist limit violated: {value} exceeds {limit}")]
    Nyquist {
        axis: &'static str,
        value: f64,
        limit: f64,
    },
    #[error("frequency band ({lo}, {hi}) MHz*mm lies outside the image axes")]
    BandOutsideImage { lo: f64, hi: f64 },
    #[error("image must be energy-normalized before ridge picking")]
    NotNormalized,
    #[error("no ridge for {mode} covers 30% of the band")]
    NoRidge { mode: &'static str },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("no initial state with finite log posterior after {0} prior draws")]
    Initialization(usize),
    #[error("invalid sampler configuration: {0}")]
    Config(&'static str),
    #[error("invalid prior: {0}")]
    Prior(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("too few samples: {found} post-warmup samples, need {needed}")]
    TooFewSamples { found: usize, needed: usize },
    #[error("parameter {0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("{skipped} of {total} ensemble members failed to solve")]
    TooManySkipped { skipped: usize, total: usize },
    #[error("thinning interval must be at least 1")]
    Thin,
    #[error("parameter index {0} is out of range")]
    UnknownParam(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
