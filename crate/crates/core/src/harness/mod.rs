//! Verification campaigns behind the `carlab` command line.

pub mod config;
mod localize;
mod net_fixed_points;
mod partition;
pub mod report;
mod twirl_bound;
mod verify_car;

pub use config::{
    FieldChoice, LocalizeConfig, NetFixedPointsConfig, PartitionConfig, SpaceConfig,
    TwirlBoundConfig, VerifyCarConfig,
};
pub use localize::localize;
pub use net_fixed_points::net_fixed_points;
pub use partition::partition;
pub use report::Report;
pub use twirl_bound::twirl_bound;
pub use verify_car::verify_car;

use crate::error::{CarError, Result};
use crate::fock::{FockOperator, DEFAULT_MAX_MODES, HARD_MAX_MODES};

/// Environment variable overriding the dense cap.
pub const MAX_MODES_ENV: &str = "CARLAB_MAX_MODES";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyCar,
    TwirlBound,
    Localize,
    NetFixedPoints,
    Partition,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::VerifyCar,
        Command::TwirlBound,
        Command::Localize,
        Command::NetFixedPoints,
        Command::Partition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyCar => "verify-car",
            Command::TwirlBound => "twirl-bound",
            Command::Localize => "localize",
            Command::NetFixedPoints => "net-fixed-points",
            Command::Partition => "partition",
        }
    }
}

/// Overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub max_modes: Option<usize>,
}

impl RunOptions {
    pub fn dense_cap(&self) -> Result<usize> {
        let cap = self.max_modes.unwrap_or(DEFAULT_MAX_MODES);
        if cap > HARD_MAX_MODES {
            return Err(CarError::CapTooLarge {
                requested: cap,
                hard_max: HARD_MAX_MODES,
            });
        }
        Ok(cap)
    }
}

/// Parses `config_text` (defaults when `None`) and runs `command`.
pub fn run(command: Command, config_text: Option<&str>, options: &RunOptions) -> Result<Report> {
    let cap = options.dense_cap()?;
    macro_rules! dispatch {
        ($cfg:ty, $f:expr) => {{
            let mut cfg: $cfg = config::parse(config_text)?;
            if let Some(seed) = options.seed {
                cfg.seed = seed;
            }
            cfg.space.resolve();
            $f(&cfg, cap)
        }};
    }
    match command {
        Command::VerifyCar => dispatch!(VerifyCarConfig, verify_car),
        Command::TwirlBound => dispatch!(TwirlBoundConfig, twirl_bound),
        Command::Localize => dispatch!(LocalizeConfig, localize),
        Command::NetFixedPoints => dispatch!(NetFixedPointsConfig, net_fixed_points),
        Command::Partition => dispatch!(PartitionConfig, |c, _| partition(c)),
    }
}

/// Largest mode count at which residuals use the exact spectral norm; above
/// it the Schur bound (an upper bound) is used.
pub const EXACT_NORM_MAX_MODES: usize = 8;

/// Spectral norm of a residual, or its Schur upper bound on large spaces.
pub fn residual_norm(op: &FockOperator) -> f64 {
    if op.modes() <= EXACT_NORM_MAX_MODES {
        op.operator_norm()
    } else {
        op.norm_bound()
    }
}

fn check_tolerance(name: &str, tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(CarError::InvalidArgument(format!("{name} must be positive, got {tol}")));
    }
    Ok(())
}
