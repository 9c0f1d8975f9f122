use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("unsupported model `{0}`")]
    UnsupportedModel(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("adaptive quadrature failed to reach tolerance {tol} on [{a}, {b}]")]
    Quadrature { a: f64, b: f64, tol: f64 },

    #[error("profile integration stalled at x = {reached} before x_max = {requested}")]
    IntegrationStall { reached: f64, requested: f64 },

    #[error("three-way rest mass disagreement: {0:?}")]
    MassConsistency([f64; 3]),

    #[error("CFL violation: dt = {dt} exceeds 0.9 dx = {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("grid [{x_left}, {x_right}] does not cover required span [{need_left}, {need_right}]")]
    GridCoverage {
        x_left: f64,
        x_right: f64,
        need_left: f64,
        need_right: f64,
    },

    #[error("blow-up detected at t = {t} (max |phi| = {max_abs})")]
    BlowUp { t: f64, max_abs: f64 },

    #[error("modulation fit diverged: {0}")]
    FitDivergence(String),

    #[error("sector mismatch: expected {expected} zero crossings, found {found}")]
    SectorMismatch { expected: usize, found: usize },

    #[error("no multikink configuration near the given state")]
    NoNearbyMultikink,

    #[error("boost selection: no sign change for lambda in [{lo}, {hi}]")]
    BoostSelection { lo: f64, hi: f64 },

    #[error("exit-time map evaluation failed at t = {t}: {reason}")]
    MapEvaluation { t: f64, reason: String },

    #[error("Poincare-Miranda sign condition failed on the search box")]
    MirandaSignFailure,

    #[error("shooting search budget exhausted after {evals} map evaluations")]
    SearchBudget { evals: usize },

    #[error("n-body step size underflow at t = {t}")]
    TodaStiffness { t: f64 },

    #[error("forcing does not satisfy the required decay (|G| = O((t0+t)^-2))")]
    InadmissibleForcing,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization failure: {0}")]
    Serialize(#[from] serde_json::Error),
}
