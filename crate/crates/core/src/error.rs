use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid panel: {0}")]
    InvalidPanel(String),
    #[error("full outcome enumeration requires binary outcomes")]
    UnsupportedOutcomeAlphabet,
    #[error("history of unit {unit} is not in the supplied support")]
    UnknownHistory { unit: usize },
    #[error("outcome pattern of unit {unit} is not in the supplied support")]
    UnknownOutcome { unit: usize },
    #[error("invalid effect query: {0}")]
    InvalidQuery(String),
    #[error("degenerate design: no within-unit variation in the regressor")]
    DegenerateDesign,
    #[error("no unit has both query values in its history")]
    NoIdentifiedUnits,
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("sign of the effect is not identified")]
    SignNotIdentified,
    #[error("identified effects have conflicting signs")]
    SignConflict,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("chi-square degrees of freedom must be positive")]
    InvalidDegrees,
    #[error("probability {0} outside (0, 1)")]
    InvalidProbability(f64),
    #[error("solver stalled after {iterations} iterations (kkt residual {residual:e})")]
    SolverStalled { iterations: usize, residual: f64 },
    #[error("linear program infeasible (phase-one residual {residual:e})")]
    Infeasible { residual: f64 },
    #[error("linear program unbounded")]
    Unbounded,
    #[error("exact cells need a discrete individual effect")]
    UnsupportedExactCells,
    #[error("at most {max} periods are supported with full outcome enumeration, got {got}")]
    TooManyPeriods { max: usize, got: usize },
    #[error("confidence region is empty (smallest goodness-of-fit statistic {min_statistic})")]
    EmptyRegion { min_statistic: f64 },
    #[error("only {accepted} of {wanted} candidate DGPs accepted within {draws} draws")]
    BudgetExceeded { accepted: usize, wanted: usize, draws: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Solver failures map to a distinct exit status in the CLI.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::SolverStalled { .. } | Error::Infeasible { .. } | Error::Unbounded | Error::BudgetExceeded { .. }
        )
    }
}
