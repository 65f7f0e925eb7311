//! Local gauge transformations: one fiber unitary per site, acting on field
//! vectors blockwise and on the algebra by `kappa_gamma = alpha_{V_gamma}`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::automorphism::{apply_alpha, second_quantize, OneParticleUnitary};
use crate::commutant::{commutant, FixedSpace};
use crate::error::{CarError, Result};
use crate::fock::{FockOperator, ModeSpace};
use crate::sample;

/// Tolerance for unitarity, determinant and diagonality of a block.
pub const BLOCK_TOL: f64 = 1e-10;

/// Structure group of the fiber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GaugePreset {
    /// `U(n_f)`.
    Unitary,
    /// Diagonal unitaries.
    Torus,
    /// `SU(n_f)`.
    SpecialUnitary,
    /// `T SU(n_f)`: scalar phases times `SU(n_f)`. As a group this is
    /// `U(n_f)`; elements are sampled as a product.
    CircleSpecialUnitary,
}

impl GaugePreset {
    pub const ALL: [GaugePreset; 4] = [
        GaugePreset::Unitary,
        GaugePreset::Torus,
        GaugePreset::SpecialUnitary,
        GaugePreset::CircleSpecialUnitary,
    ];

    /// Whether the scalar circle `T1` lies in the group.
    pub fn contains_circle(self) -> bool {
        !matches!(self, GaugePreset::SpecialUnitary)
    }

    pub fn name(self) -> &'static str {
        match self {
            GaugePreset::Unitary => "U",
            GaugePreset::Torus => "T",
            GaugePreset::SpecialUnitary => "SU",
            GaugePreset::CircleSpecialUnitary => "T.SU",
        }
    }
}

impl fmt::Display for GaugePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GaugePreset {
    type Err = CarError;

    fn from_str(s: &str) -> Result<Self> {
        GaugePreset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                CarError::InvalidArgument(format!("unknown gauge preset {s:?} (expected U, T, SU or T.SU)"))
            })
    }
}

/// A gauge transformation `gamma`: one `n_f x n_f` unitary per site.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeElement {
    preset: GaugePreset,
    blocks: Vec<DMatrix<Complex64>>,
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_block(preset: GaugePreset, site: usize, b: &DMatrix<Complex64>) -> Result<()> {
    let n = b.nrows();
    let residual = max_abs(&(b.adjoint() * b - DMatrix::identity(n, n)));
    if residual > BLOCK_TOL {
        return Err(CarError::InvalidGaugeElement(format!(
            "block of site {site} is not unitary (residual {residual:.3e})"
        )));
    }
    match preset {
        GaugePreset::Torus => {
            let off = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| b[(i, j)].norm())
                .fold(0.0, f64::max);
            if off > BLOCK_TOL {
                return Err(CarError::InvalidGaugeElement(format!(
                    "block of site {site} is not diagonal (off-diagonal {off:.3e})"
                )));
            }
        }
        GaugePreset::SpecialUnitary => {
            let det = b.determinant();
            if (det - Complex64::new(1.0, 0.0)).norm() > BLOCK_TOL {
                return Err(CarError::InvalidGaugeElement(format!(
                    "block of site {site} has determinant {det}, not 1"
                )));
            }
        }
        GaugePreset::Unitary | GaugePreset::CircleSpecialUnitary => {}
    }
    Ok(())
}

impl GaugeElement {
    pub fn new(space: &ModeSpace, preset: GaugePreset, blocks: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if blocks.len() != space.site_count() {
            return Err(CarError::DimensionMismatch {
                expected: space.site_count(),
                found: blocks.len(),
            });
        }
        let nf = space.fiber_dim();
        for (s, b) in blocks.iter().enumerate() {
            if b.nrows() != nf || b.ncols() != nf {
                return Err(CarError::DimensionMismatch {
                    expected: nf,
                    found: b.nrows(),
                });
            }
            check_block(preset, s, b)?;
        }
        Ok(Self { preset, blocks })
    }

    pub fn identity(space: &ModeSpace, preset: GaugePreset) -> Self {
        let nf = space.fiber_dim();
        Self {
            preset,
            blocks: vec![DMatrix::identity(nf, nf); space.site_count()],
        }
    }

    /// `e^{i phases[s]} 1` on site `s`; a function into the center.
    pub fn central(space: &ModeSpace, preset: GaugePreset, phases: &[f64]) -> Result<Self> {
        let nf = space.fiber_dim();
        let blocks = phases
            .iter()
            .map(|&p| DMatrix::identity(nf, nf) * Complex64::from_polar(1.0, p))
            .collect();
        Self::new(space, preset, blocks)
    }

    /// Haar-random element of the preset group.
    pub fn random<R: Rng + ?Sized>(space: &ModeSpace, preset: GaugePreset, rng: &mut R) -> Self {
        let nf = space.fiber_dim();
        let blocks = (0..space.site_count())
            .map(|_| match preset {
                GaugePreset::Unitary => sample::haar_unitary(nf, rng),
                GaugePreset::Torus => DMatrix::from_fn(nf, nf, |i, j| {
                    if i == j {
                        Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }),
                GaugePreset::SpecialUnitary => special(sample::haar_unitary(nf, rng)),
                GaugePreset::CircleSpecialUnitary => {
                    let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
                    special(sample::haar_unitary(nf, rng)) * phase
                }
            })
            .collect();
        Self { preset, blocks }
    }

    pub fn preset(&self) -> GaugePreset {
        self.preset
    }

    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    /// Blockwise product `gamma gamma'`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.preset != other.preset || self.blocks.len() != other.blocks.len() {
            return Err(CarError::InvalidGaugeElement(
                "composed elements belong to different gauge groups".into(),
            ));
        }
        Ok(Self {
            preset: self.preset,
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect(),
        })
    }
}

/// Divides out a root of the determinant.
fn special(u: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = u.nrows() as f64;
    let det = u.determinant();
    let root = Complex64::from_polar(1.0, -det.arg() / n);
    u * root
}

/// `V_gamma`, block diagonal with one block per site.
pub fn gauge_unitary(space: &ModeSpace, gamma: &GaugeElement) -> Result<OneParticleUnitary> {
    if gamma.blocks.len() != space.site_count() {
        return Err(CarError::DimensionMismatch {
            expected: space.site_count(),
            found: gamma.blocks.len(),
        });
    }
    let nf = space.fiber_dim();
    let m = space.mode_count();
    let mut mat = DMatrix::zeros(m, m);
    for (s, b) in gamma.blocks.iter().enumerate() {
        mat.view_mut((s * nf, s * nf), (nf, nf)).copy_from(b);
    }
    OneParticleUnitary::new(space, mat)
}

/// `kappa_gamma(A) = alpha_{V_gamma}(A)`.
pub fn apply_kappa(space: &ModeSpace, gamma: &GaugeElement, a: &FockOperator) -> Result<FockOperator> {
    apply_alpha(&gauge_unitary(space, gamma)?, a)
}

/// The gauge element equal to `e^{i theta}` on `site` and 1 elsewhere; it
/// realizes the site phase `Gamma(e^{i theta chi_site})` inside the gauge group.
pub fn site_phase_witness(space: &ModeSpace, preset: GaugePreset, site: usize, theta: f64) -> Result<GaugeElement> {
    if !preset.contains_circle() {
        return Err(CarError::InvalidGaugeElement(format!(
            "preset {preset} does not contain the scalar circle"
        )));
    }
    if site >= space.site_count() {
        return Err(CarError::UnknownSite {
            site,
            sites: space.site_count(),
        });
    }
    let mut phases = vec![0.0; space.site_count()];
    phases[site] = theta;
    GaugeElement::central(space, preset, &phases)
}

/// Joint fixed space of `Gamma(V_gamma)` over the generators.
pub fn gauge_invariant_subspace(space: &ModeSpace, generators: &[GaugeElement]) -> Result<FixedSpace> {
    let unitaries = generators
        .iter()
        .map(|g| Ok(second_quantize(&gauge_unitary(space, g)?)))
        .collect::<Result<Vec<_>>>()?;
    commutant(space.mode_count(), &unitaries, 0)
}
