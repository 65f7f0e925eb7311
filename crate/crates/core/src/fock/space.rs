use num_complex::Complex64;

use crate::error::{CarError, Result};

/// Dense cap on the number of modes used when none is configured.
pub const DEFAULT_MAX_MODES: usize = 10;

/// Absolute ceiling for the dense cap: a 2^12 x 2^12 complex matrix is 256 MiB.
pub const HARD_MAX_MODES: usize = 12;

/// Discretized one-particle space: `site_count` sites, each carrying a
/// `fiber_dim`-dimensional fiber, with a positive measure weight per site.
///
/// Modes are numbered site-major: mode `site * fiber_dim + fiber`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpace {
    site_count: usize,
    fiber_dim: usize,
    weights: Vec<f64>,
    max_modes: usize,
}

impl ModeSpace {
    /// Builds a mode space under the default dense cap.
    pub fn new(site_count: usize, fiber_dim: usize, weights: Vec<f64>) -> Result<Self> {
        Self::with_max_modes(site_count, fiber_dim, weights, DEFAULT_MAX_MODES)
    }

    /// Unit weight on every site.
    pub fn uniform(site_count: usize, fiber_dim: usize) -> Result<Self> {
        Self::new(site_count, fiber_dim, vec![1.0; site_count])
    }

    pub fn with_max_modes(
        site_count: usize,
        fiber_dim: usize,
        weights: Vec<f64>,
        max_modes: usize,
    ) -> Result<Self> {
        if max_modes > HARD_MAX_MODES {
            return Err(CarError::CapTooLarge {
                requested: max_modes,
                hard_max: HARD_MAX_MODES,
            });
        }
        let space = Self::one_particle(site_count, fiber_dim, weights)?;
        let space = Self { max_modes, ..space };
        space.check_dense()?;
        Ok(space)
    }

    /// A space used only at the one-particle level (partitions, masses); up
    /// to 64 modes. Fock-space constructions on it still enforce the
    /// default dense cap.
    pub fn one_particle(site_count: usize, fiber_dim: usize, weights: Vec<f64>) -> Result<Self> {
        if site_count == 0 || fiber_dim == 0 {
            return Err(CarError::InvalidModeSpace(format!(
                "need at least one site and one fiber mode, got {site_count} x {fiber_dim}"
            )));
        }
        if weights.len() != site_count {
            return Err(CarError::InvalidModeSpace(format!(
                "{} weights given for {site_count} sites",
                weights.len()
            )));
        }
        if let Some((site, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(CarError::InvalidModeSpace(format!(
                "weight of site {site} must be finite and positive, got {w}"
            )));
        }
        let modes = site_count * fiber_dim;
        if modes > u64::BITS as usize {
            return Err(CarError::InvalidModeSpace(format!(
                "{modes} modes exceed the 64-mode limit of the bitmask basis"
            )));
        }
        Ok(Self {
            site_count,
            fiber_dim,
            weights,
            max_modes: DEFAULT_MAX_MODES,
        })
    }

    /// Fails if the Fock space is above the dense cap.
    pub fn check_dense(&self) -> Result<()> {
        let modes = self.mode_count();
        if modes > self.max_modes {
            return Err(CarError::CapExceeded {
                modes,
                cap: self.max_modes,
            });
        }
        Ok(())
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn max_modes(&self) -> usize {
        self.max_modes
    }

    /// Number of modes m.
    pub fn mode_count(&self) -> usize {
        self.site_count * self.fiber_dim
    }

    /// Fock space dimension 2^m.
    pub fn fock_dim(&self) -> usize {
        1 << self.mode_count()
    }

    pub fn site_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mode_weight(&self, mode: usize) -> f64 {
        self.weights[mode / self.fiber_dim]
    }

    pub fn mode_index(&self, site: usize, fiber: usize) -> Result<usize> {
        if site >= self.site_count {
            return Err(CarError::UnknownSite {
                site,
                sites: self.site_count,
            });
        }
        if fiber >= self.fiber_dim {
            return Err(CarError::InvalidArgument(format!(
                "fiber index {fiber} out of range for fiber dimension {}",
                self.fiber_dim
            )));
        }
        Ok(site * self.fiber_dim + fiber)
    }

    /// Inverse of [`ModeSpace::mode_index`]: `(site, fiber)`.
    pub fn site_fiber(&self, mode: usize) -> (usize, usize) {
        (mode / self.fiber_dim, mode % self.fiber_dim)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.mode_count() {
            Ok(())
        } else {
            Err(CarError::ModeOutOfRange {
                index: mode,
                modes: self.mode_count(),
            })
        }
    }

    pub fn check_field(&self, f: &FieldVector) -> Result<()> {
        if f.len() == self.mode_count() {
            Ok(())
        } else {
            Err(CarError::DimensionMismatch {
                expected: self.mode_count(),
                found: f.len(),
            })
        }
    }

    /// Weighted inner product, antilinear in the first argument.
    pub fn inner(&self, f: &FieldVector, g: &FieldVector) -> Complex64 {
        f.coeffs
            .iter()
            .zip(&g.coeffs)
            .enumerate()
            .map(|(i, (a, b))| a.conj() * b * self.mode_weight(i))
            .sum()
    }

    pub fn norm(&self, f: &FieldVector) -> f64 {
        self.inner(f, f).re.max(0.0).sqrt()
    }

    /// Orthonormal coordinates of `f`: component i is `sqrt(w_i) f_i`.
    pub fn to_orthonormal(&self, f: &FieldVector) -> Vec<Complex64> {
        f.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * self.mode_weight(i).sqrt())
            .collect()
    }

    /// Inverse of [`ModeSpace::to_orthonormal`].
    pub fn from_orthonormal(&self, coords: &[Complex64]) -> FieldVector {
        FieldVector::new(
            coords
                .iter()
                .enumerate()
                .map(|(i, c)| c / self.mode_weight(i).sqrt())
                .collect(),
        )
    }

    /// Per-mode masses `w_i |v_i|^2`.
    pub fn masses(&self, v: &FieldVector) -> Vec<f64> {
        v.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| self.mode_weight(i) * c.norm_sqr())
            .collect()
    }

    /// Bitmask of all modes living on `site`.
    pub fn site_mask(&self, site: usize) -> u64 {
        low_bits(self.fiber_dim) << (site * self.fiber_dim)
    }
}

/// Mask of the lowest `n` bits, `n <= 64`.
pub fn low_bits(n: usize) -> u64 {
    u64::MAX.checked_shr(64 - n as u32).unwrap_or(0)
}

/// Complex coefficient vector over the modes of a [`ModeSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector {
    coeffs: Vec<Complex64>,
}

impl FieldVector {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len])
    }

    /// Unit coefficient on `mode`.
    pub fn basis(len: usize, mode: usize) -> Self {
        let mut f = Self::zeros(len);
        f.coeffs[mode] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect())
    }

    /// Keeps the coefficients of modes in `mask` and zeroes the rest.
    pub fn masked(&self, mask: u64) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if mask >> i & 1 == 1 { *c } else { Complex64::new(0.0, 0.0) })
                .collect(),
        )
    }

    /// Bitmask of modes with a nonzero coefficient.
    pub fn support(&self) -> u64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }
}
