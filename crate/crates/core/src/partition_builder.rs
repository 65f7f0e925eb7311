//! Partitions that make `max_j |P_j v|` small, built from prefix cuts of the
//! site-major mode order.

use crate::error::{CarError, Result};
use crate::fock::{FieldVector, ModeSpace};
use crate::twirl::Partition;

/// Per-mode masses `w_i |v_i|^2` and their running sums.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMassProfile {
    masses: Vec<f64>,
    cumulative: Vec<f64>,
}

impl VectorMassProfile {
    pub fn new(space: &ModeSpace, v: &FieldVector) -> Result<Self> {
        space.check_field(v)?;
        let masses = space.masses(v);
        let cumulative = masses
            .iter()
            .scan(0.0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect();
        Ok(Self { masses, cumulative })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// `|v|^2`.
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Heaviest single mode as `(mode, mass)`.
    pub fn heaviest(&self) -> (usize, f64) {
        self.masses
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0), |best, (i, x)| if x > best.1 { (i, x) } else { best })
    }
}

/// Greedy prefix cuts: a block is closed just before the mode that would
/// bring its mass to `eps^2`. Every block then has `|P_j v| < eps`.
pub fn refine_for_vector(space: &ModeSpace, v: &FieldVector, eps: f64) -> Result<Partition> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(CarError::InvalidArgument(format!("eps must be positive and finite, got {eps}")));
    }
    let profile = VectorMassProfile::new(space, v)?;
    let threshold = eps * eps;
    if let Some((mode, &mass)) = profile.masses.iter().enumerate().find(|(_, &x)| x >= threshold) {
        return Err(CarError::AtomTooLarge {
            mode,
            mass,
            threshold,
        });
    }
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new()];
    let mut mass = 0.0;
    for (i, &x) in profile.masses.iter().enumerate() {
        if mass + x >= threshold {
            blocks.push(Vec::new());
            mass = 0.0;
        }
        blocks.last_mut().expect("nonempty").push(i);
        mass += x;
    }
    Partition::new(space.mode_count(), blocks)
}

/// `r` contiguous blocks whose sizes differ by at most one, larger blocks first.
pub fn equipartition(modes: usize, r: usize) -> Result<Partition> {
    if r == 0 || r > modes {
        return Err(CarError::BlockCountOutOfRange { blocks: r, modes });
    }
    let (base, extra) = (modes / r, modes % r);
    let mut start = 0;
    let blocks = (0..r)
        .map(|j| {
            let size = base + usize::from(j < extra);
            let block = (start..start + size).collect();
            start += size;
            block
        })
        .collect();
    Partition::new(modes, blocks)
}
