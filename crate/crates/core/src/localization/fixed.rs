use super::Region;
use crate::automorphism::{second_quantize, OneParticleUnitary};
use crate::commutant::{commutant, FixedSpace};
use crate::error::{CarError, Result};
use crate::fock::{FockOperator, ModeSpace};

/// Angle of the site-phase generators. With charges bounded by the fiber
/// dimension, `e^{i k}` for `0 < |k| <= 12` is never 1, so one generator per
/// site has the same fixed points as the whole circle.
pub const SITE_PHASE_ANGLE: f64 = 1.0;

/// `Gamma(e^{i theta chi_s})` for each listed site `s`.
pub fn site_phase_generators(space: &ModeSpace, sites: &[usize]) -> Result<Vec<FockOperator>> {
    sites
        .iter()
        .map(|&s| {
            if s >= space.site_count() {
                return Err(CarError::UnknownSite {
                    site: s,
                    sites: space.site_count(),
                });
            }
            let mask = space.site_mask(s);
            let thetas: Vec<f64> = (0..space.mode_count())
                .map(|i| if mask >> i & 1 == 1 { SITE_PHASE_ANGLE } else { 0.0 })
                .collect();
            Ok(second_quantize(&OneParticleUnitary::diagonal_phases(space, &thetas)?))
        })
        .collect()
}

/// Joint fixed space `{A : V A V^* = A}` of the given Fock unitaries.
pub fn fixed_point_algebra(modes: usize, unitaries: &[FockOperator]) -> Result<FixedSpace> {
    commutant(modes, unitaries, 0)
}

/// Basis monomials `(I, J)` whose content on every site outside `W` is
/// charge balanced: `|I ∩ s| = |J ∩ s|`.
pub fn balanced_monomials(space: &ModeSpace, w: &Region) -> Vec<(usize, usize)> {
    let d = space.fock_dim();
    let outside: Vec<usize> = w
        .complement(space)
        .sites()
        .iter()
        .map(|&s| space.site_mask(s) as usize)
        .collect();
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if outside
                .iter()
                .all(|&mask| (i & mask).count_ones() == (j & mask).count_ones())
            {
                out.push((i, j));
            }
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `4^{|modes(W)|} * C(2 n_f, n_f)^{|W^c|}`.
pub fn balanced_monomial_count(space: &ModeSpace, w: &Region) -> usize {
    let nf = space.fiber_dim();
    let outside = space.site_count() - w.sites().len();
    (1usize << (2 * w.mode_count())) * binomial(2 * nf, nf).pow(outside as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localization::{normal_monomial_operator, LocalAlgebraHandle};

    #[test]
    fn two_site_example() {
        let s = ModeSpace::uniform(2, 1).unwrap();
        let w = Region::new(&s, &[0]).unwrap();
        let gens = site_phase_generators(&s, w.complement(&s).sites()).unwrap();
        let fixed = fixed_point_algebra(2, &gens).unwrap();
        assert_eq!(fixed.dim(), 8);
        let local = LocalAlgebraHandle::new(&s, w.clone());
        assert_eq!(local.dim(), 4);
        for b in local.basis_monomials() {
            assert!(fixed.residual(&b) < 1e-10);
        }
        assert_eq!(balanced_monomial_count(&s, &w), 8);
        assert_eq!(balanced_monomials(&s, &w).len(), 8);
    }

    #[test]
    fn balanced_monomials_span_fixed_space() {
        let s = ModeSpace::uniform(2, 2).unwrap();
        let w = Region::new(&s, &[1]).unwrap();
        let gens = site_phase_generators(&s, &[0]).unwrap();
        let fixed = fixed_point_algebra(4, &gens).unwrap();
        let count = balanced_monomial_count(&s, &w);
        assert_eq!(count, 16 * 6);
        assert_eq!(fixed.dim(), count);
        for (i, j) in balanced_monomials(&s, &w) {
            assert!(fixed.residual(&normal_monomial_operator(4, i, j)) < 1e-10);
        }
    }

    #[test]
    fn finer_torus_shrinks_fixed_space() {
        let s = ModeSpace::uniform(1, 3).unwrap();
        let site = fixed_point_algebra(3, &site_phase_generators(&s, &[0]).unwrap()).unwrap();
        let per_mode: Vec<FockOperator> = (0..3)
            .map(|i| {
                let mut t = vec![0.0; 3];
                t[i] = SITE_PHASE_ANGLE;
                second_quantize(&OneParticleUnitary::diagonal_phases(&s, &t).unwrap())
            })
            .collect();
        let modes = fixed_point_algebra(3, &per_mode).unwrap();
        assert!(modes.dim() < site.dim());
        assert!(site.inclusion_residual(&modes) < 1e-10);
    }
}
