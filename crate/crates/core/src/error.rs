use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("record {record}: {rule}")]
    Validation { record: String, rule: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate parameterization for {record}: R_Kramers = {radius} fm")]
    DegenerateRadius { record: String, radius: f64 },

    #[error("no E_TKE in [{lo}, {hi}] MeV reproduces the target half-life")]
    NoSolution { lo: f64, hi: f64 },

    #[error("state diverged at step {step}")]
    Divergence { step: u64 },

    #[error("potential has no barrier: {0}")]
    Topology(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("underdetermined: {records} fit records for {params} parameters")]
    Underdetermined { records: usize, params: usize },

    #[error("objective is not finite at the initial parameters")]
    Initialization,

    #[error("perturbing a_{index}: {source}")]
    Jacobian {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("normal matrix is rank deficient; null-space directions dominated by {directions:?}")]
    RankDeficient { directions: Vec<Vec<usize>> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Non-fatal diagnostics attached to a computed value.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// β below ω_max/10, where the moderate-friction escape formula loses accuracy.
    WeakFriction { beta: f64, omega_max: f64 },
    /// x = R/r_T above 0.3, where the small-x barrier expansion degrades.
    ApproximationStrained { x: f64 },
    /// The target half-life is reached at several energies.
    MultipleRoots { roots: Vec<f64> },
    /// lg T(E) is not monotone over the search interval.
    NonMonotone,
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::WeakFriction { beta, omega_max } => {
                write!(f, "beta = {beta} below omega_max/10 = {}", omega_max / 10.0)
            }
            Warning::ApproximationStrained { x } => write!(f, "x = {x} exceeds 0.3"),
            Warning::MultipleRoots { roots } => write!(f, "{} roots: {roots:?}", roots.len()),
            Warning::NonMonotone => f.write_str("lg T(E) is not monotone on the search interval"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

impl<T> Estimate<T> {
    pub fn clean(value: T) -> Self {
        Estimate {
            value,
            warnings: Vec::new(),
        }
    }
}
