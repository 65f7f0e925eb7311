//! JSON scenario configurations. Every field has a default, unknown keys are
//! rejected, and the fully resolved configuration is embedded in the report.

use serde::{Deserialize, Serialize};

use crate::error::{CarError, Result};
use crate::fock::ModeSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub site_count: usize,
    #[serde(default = "one")]
    pub fiber_dim: usize,
    /// Per-site weights; all 1 when omitted.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

fn one() -> usize {
    1
}

impl SpaceConfig {
    pub fn sites(site_count: usize, fiber_dim: usize) -> Self {
        Self {
            site_count,
            fiber_dim,
            weights: None,
        }
    }

    /// Makes the weights explicit.
    pub fn resolve(&mut self) {
        if self.weights.is_none() {
            self.weights = Some(vec![1.0; self.site_count]);
        }
    }

    fn weights(&self) -> Vec<f64> {
        self.weights.clone().unwrap_or_else(|| vec![1.0; self.site_count])
    }

    /// Fock-level space under the dense cap `max_modes`.
    pub fn build(&self, max_modes: usize) -> Result<ModeSpace> {
        ModeSpace::with_max_modes(self.site_count, self.fiber_dim, self.weights(), max_modes)
    }

    /// One-particle space without the dense cap.
    pub fn build_one_particle(&self) -> Result<ModeSpace> {
        ModeSpace::one_particle(self.site_count, self.fiber_dim, self.weights())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyCarConfig {
    pub space: SpaceConfig,
    pub seed: u64,
    /// Bound on every anticommutation and commutator residual.
    pub tolerance: f64,
    /// Bound on the relative error of `|a(f)| = |f|`.
    pub norm_tolerance: f64,
    /// Random field triples `(f, g, h)`.
    pub triples: usize,
    pub norm_samples: usize,
}

impl Default for VerifyCarConfig {
    fn default() -> Self {
        Self {
            space: SpaceConfig::sites(6, 1),
            seed: 42,
            tolerance: 1e-12,
            norm_tolerance: 1e-10,
            triples: 200,
            norm_samples: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldChoice {
    /// Equal mass on every mode.
    Uniform,
    /// Gaussian coefficients, normalized.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwirlBoundConfig {
    pub space: SpaceConfig,
    pub seed: u64,
    /// Slack added to the right-hand side of the bound.
    pub slack: f64,
    /// Monomial degrees `n` of `A(f_1..f_n; g_1..g_n)`, unit-norm fields.
    pub degrees: Vec<usize>,
    /// Block counts of the equipartitions.
    pub schedule: Vec<usize>,
    pub field: FieldChoice,
    /// Monte-Carlo samples for the torus-average column (0 disables it).
    pub mc_samples: usize,
}

impl Default for TwirlBoundConfig {
    fn default() -> Self {
        Self {
            space: SpaceConfig::sites(8, 1),
            seed: 42,
            slack: 1e-9,
            degrees: vec![1, 2],
            schedule: vec![1, 2, 4, 8],
            field: FieldChoice::Uniform,
            mc_samples: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizeConfig {
    pub space: SpaceConfig,
    pub seed: u64,
    /// Sites of `W`; the first half of the sites when omitted.
    pub region: Option<Vec<usize>>,
    pub tolerance: f64,
    /// Bound for the restriction-vs-formula comparison on monomials.
    pub formula_tolerance: f64,
    pub monomials: usize,
    pub max_degree: usize,
    /// Random operators per identity check.
    pub operators: usize,
}

impl Default for LocalizeConfig {
    fn default() -> Self {
        Self {
            space: SpaceConfig::sites(6, 1),
            seed: 42,
            region: None,
            tolerance: 1e-9,
            formula_tolerance: 1e-10,
            monomials: 200,
            max_degree: 3,
            operators: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetFixedPointsConfig {
    pub space: SpaceConfig,
    pub seed: u64,
    pub region: Vec<usize>,
    /// Projection-residual bound for every inclusion.
    pub tolerance: f64,
    /// Gauge presets: "U", "T", "SU", "T.SU".
    pub presets: Vec<String>,
    /// Random gauge elements per preset.
    pub gauge_generators: usize,
}

impl Default for NetFixedPointsConfig {
    fn default() -> Self {
        Self {
            space: SpaceConfig::sites(2, 1),
            seed: 42,
            region: vec![0],
            tolerance: 1e-8,
            presets: vec!["U".into(), "T".into(), "T.SU".into()],
            gauge_generators: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    pub space: SpaceConfig,
    pub seed: u64,
    /// Real coefficients of `v`; a normalized Gaussian vector when omitted.
    pub vector: Option<Vec<f64>>,
    pub eps: Vec<f64>,
    pub blocks: Vec<usize>,
    /// Random `(v, eps)` pairs with `eps` above the atom floor.
    pub random_trials: usize,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            space: SpaceConfig::sites(16, 1),
            seed: 42,
            vector: None,
            eps: vec![0.2, 0.3, 0.5, 0.8],
            blocks: vec![1, 2, 4, 8, 16],
            random_trials: 100,
        }
    }
}

/// Parses a config, falling back to the defaults for absent text.
pub fn parse<T: Default + for<'de> Deserialize<'de>>(text: Option<&str>) -> Result<T> {
    match text {
        None => Ok(T::default()),
        Some(t) => serde_json::from_str(t).map_err(|e| CarError::InvalidArgument(format!("config: {e}"))),
    }
}
