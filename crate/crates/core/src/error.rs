use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("epsilon must be finite and positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("rate r must be finite and nonnegative, got {0}")]
    InvalidRate(f64),
    #[error("polynomial degree N must be odd and at least 5, got {0}")]
    InvalidDegree(u32),
    #[error("alpha must be finite and greater than 1, got {0}")]
    InvalidAlpha(f64),
    #[error("unknown model family `{0}` (expected `ashwin` or `vdp`)")]
    UnknownFamily(String),
    #[error("reduced slow flow is singular at the fold (x1 = {x1})")]
    SingularFold { x1: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid time span [{t0}, {t1}]")]
    InvalidSpan { t0: f64, t1: f64 },
    #[error("initial state is not finite")]
    NonFiniteInitial,
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    StepBudgetExceeded { t: f64, max_steps: usize },
    #[error("step size {h:e} fell below h_min at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("solution became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("t = {t} lies outside the trajectory [{t0}, {t1}]")]
    OutOfRange { t: f64, t0: f64, t1: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("could not bracket the equilibrium for r = {r}")]
    BracketFailure { r: f64 },
    #[error("leading eigenvalue has the same sign at r = {r_lo} and r = {r_hi}")]
    NoSignChange { r_lo: f64, r_hi: f64 },
    #[error("eigenvalues are real at the stability change near r = {r}; not a Hopf point")]
    NotOscillatory { r: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("integration failed: {0}")]
    Integration(#[from] OdeError),
    #[error("trajectory did not return to the section within t = {max_time}")]
    NoReturn { max_time: f64 },
    #[error("invalid cycle configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least {needed} converged rows, found {found}")]
    InsufficientData { needed: usize, found: usize },
}
