use thiserror::Error;

/// Errors raised by the CAR laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CarError {
    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error(
        "mode count {modes} exceeds the dense cap of {cap} (a dense operator needs 4^m complex entries); \
         raise it with --max-modes or CARLAB_MAX_MODES, up to {hard_max}",
        hard_max = crate::fock::HARD_MAX_MODES
    )]
    CapExceeded { modes: usize, cap: usize },

    #[error("requested dense cap {requested} is above the hard maximum of {hard_max}")]
    CapTooLarge { requested: usize, hard_max: usize },

    #[error("invalid mode space: {0}")]
    InvalidModeSpace(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("matrix is not a contraction (norm {norm:.12})")]
    NotContraction { norm: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid projection family: {0}")]
    InvalidProjections(String),

    #[error("unbalanced monomial: {creators} creators, {annihilators} annihilators")]
    UnbalancedMonomial { creators: usize, annihilators: usize },

    #[error(
        "mode {mode} carries mass {mass:.6e} >= eps^2 = {threshold:.6e}; \
         no partition of a finite mode set can split a single mode"
    )]
    AtomTooLarge { mode: usize, mass: f64, threshold: f64 },

    #[error("block count {blocks} out of range 1..={modes}")]
    BlockCountOutOfRange { blocks: usize, modes: usize },

    #[error("site {site} does not exist (site count {sites})")]
    UnknownSite { site: usize, sites: usize },

    #[error("invalid gauge element: {0}")]
    InvalidGaugeElement(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = CarError> = std::result::Result<T, E>;
