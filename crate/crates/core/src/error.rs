use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("arrows are not composable: source {source_point:?} vs target {target_point:?}")]
    NotComposable { source_point: Vec<f64>, target_point: Vec<f64> },

    #[error("groupoid axiom `{axiom}` violated: residual {residual:e} exceeds {tol:e}")]
    AxiomViolation { axiom: String, residual: f64, tol: f64 },

    #[error("map is not a diffeomorphism: {0}")]
    NotADiffeomorphism(String),

    #[error("not a bisection: {0}")]
    NotABisection(String),

    #[error("Newton iteration failed to converge after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("integration diverged at step {step}")]
    IntegrationDiverged { step: usize },

    #[error("invalid step size {0}")]
    InvalidStep(f64),

    #[error("point outside every chart: {0}")]
    OutOfChart(String),

    #[error("tangent vector outside the domain of the local addition: {0}")]
    Domain(String),

    #[error("local addition is not adapted: drift {drift:e} at witness {witness:?}")]
    NotAdapted { drift: f64, witness: Vec<f64> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("time-dependent section too large at t = {t}: flow left the domain")]
    EtaTooLarge { t: f64 },

    #[error("flow escaped the atlas at t = {t}")]
    FlowEscapedAtlas { t: f64 },

    #[error("support condition violated: {0}")]
    Support(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("morphism degeneracy: pushed-forward section is not a bisection ({0})")]
    MorphismDegeneracy(String),

    #[error("bracket requires a single chart: {0}")]
    BracketChart(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("residual {residual:e} exceeds tolerance {tol:e} in {what}")]
    Tolerance { what: String, residual: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
