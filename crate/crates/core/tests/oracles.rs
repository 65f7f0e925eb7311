//! Library results against independent constructions and closed forms.

use carlab::automorphism::{apply_alpha, OneParticleUnitary};
use carlab::fock::{
    elementary_annihilator, fock_state, smear, FieldVector, FockOperator, ModeSpace, Monomial, Polynomial,
};
use carlab::gauge::{apply_kappa, gauge_invariant_subspace, gauge_unitary, site_phase_witness, GaugeElement, GaugePreset};
use carlab::localization::{
    balanced_monomial_count, fixed_point_algebra, ideal_member, membership_in_local, normal_order_expand,
    nu_tilde, restrict, site_phase_generators, vacuum_projection, LocalAlgebraHandle, Region,
};
use carlab::partition_builder::{equipartition, refine_for_vector};
use carlab::sample;
use carlab::twirl::{commutator_constant, twirl, twirl_oracle_mc, Partition};
use carlab::CarError;
use nalgebra::DMatrix;
use num_complex::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// Jordan-Wigner annihilator from Kronecker products; mode 0 is the last
/// (least significant) tensor factor.
fn kron_annihilator(m: usize, i: usize) -> DMatrix<Complex64> {
    let id = DMatrix::<Complex64>::identity(2, 2);
    let z = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    let lower = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    let mut out = DMatrix::<Complex64>::identity(1, 1);
    for k in (0..m).rev() {
        let factor = if k > i {
            &id
        } else if k == i {
            &lower
        } else {
            &z
        };
        out = kron(&out, factor);
    }
    out
}

#[test]
fn jordan_wigner_matches_kronecker_construction() {
    for m in 1..=5 {
        let space = ModeSpace::uniform(m, 1).unwrap();
        for i in 0..m {
            let a = elementary_annihilator(&space, i).unwrap();
            let expected = kron_annihilator(m, i);
            assert!((a.matrix() - expected).iter().all(|z| z.norm() < 1e-15), "m={m} i={i}");
        }
    }
}

#[test]
fn smeared_field_is_weighted_sum() {
    let space = ModeSpace::new(3, 1, vec![0.5, 2.0, 1.5]).unwrap();
    let mut rng = sample::rng(5);
    let f = sample::random_field(&space, &mut rng);
    let mut expected = DMatrix::<Complex64>::zeros(8, 8);
    for i in 0..3 {
        expected += kron_annihilator(3, i) * (f.coeffs()[i].conj() * space.mode_weight(i).sqrt());
    }
    let a = smear(&space, &f).unwrap();
    assert!((a.matrix() - expected).iter().all(|z| z.norm() < 1e-14));
}

#[test]
fn expansion_of_a_a_star() {
    // a_0 a_0^* = 1 - a_0^* a_0
    let space = ModeSpace::uniform(2, 1).unwrap();
    let a0 = elementary_annihilator(&space, 0).unwrap();
    let e = normal_order_expand(&(&a0 * &a0.adjoint())).unwrap();
    let nz = e.nonzero(1e-14);
    assert_eq!(nz.len(), 2);
    assert!((e.get(0, 0) - c(1.0)).norm() < 1e-14);
    assert!((e.get(1, 1) - c(-1.0)).norm() < 1e-14);
}

#[test]
fn expansion_of_identity() {
    let e = normal_order_expand(&FockOperator::identity(3)).unwrap();
    assert_eq!(e.nonzero(1e-14), vec![(0, 0, c(1.0))]);
}

#[test]
fn commutator_constant_closed_form() {
    // degree 2: C_A = 2 * 2! * prod |f_i| |g_i|
    let space = ModeSpace::new(4, 1, vec![1.0, 2.0, 0.5, 1.0]).unwrap();
    let mut rng = sample::rng(11);
    let fields: Vec<FieldVector> = (0..4).map(|_| sample::random_field(&space, &mut rng)).collect();
    let norms: f64 = fields.iter().map(|f| space.norm(f)).product();
    let mono = Monomial::new(fields[..2].to_vec(), fields[2..].to_vec());
    let got = commutator_constant(&space, &Polynomial::single(mono)).unwrap();
    assert!((got - 4.0 * norms).abs() < 1e-12 * got);
    // degree 1 and 3
    let one = Monomial::new(vec![fields[0].clone()], vec![fields[1].clone()]);
    let n1 = space.norm(&fields[0]) * space.norm(&fields[1]);
    assert!((commutator_constant(&space, &Polynomial::single(one)).unwrap() - n1).abs() < 1e-12);
    let unbalanced = Monomial::new(vec![fields[0].clone()], vec![]);
    assert!(matches!(
        commutator_constant(&space, &Polynomial::single(unbalanced)),
        Err(CarError::UnbalancedMonomial { .. })
    ));
}

#[test]
fn monte_carlo_twirl_converges() {
    let space = ModeSpace::uniform(3, 1).unwrap();
    let p = Partition::from_labels(&[0, 1, 1]).unwrap();
    let mut rng = sample::rng(2);
    let a = sample::random_operator(3, &mut rng);
    let exact = twirl(&p, &a).unwrap();
    let coarse = (&twirl_oracle_mc(&space, &p, &a, 100, 1).unwrap() - &exact).frobenius_norm();
    let fine = (&twirl_oracle_mc(&space, &p, &a, 20_000, 1).unwrap() - &exact).frobenius_norm();
    assert!(fine < coarse);
    let sigma = (&a - &exact).frobenius_norm() / (20_000f64).sqrt();
    assert!(fine < 4.0 * sigma);
}

#[test]
fn twirl_of_number_conserving_operator_is_identity_map() {
    // a single block keeps exactly the particle-number preserving part
    let space = ModeSpace::uniform(3, 1).unwrap();
    let n = carlab::fock::number_operator(3);
    let p = Partition::single_block(3);
    assert!((&twirl(&p, &n).unwrap() - &n).operator_norm() < 1e-15);
    let a0 = elementary_annihilator(&space, 0).unwrap();
    assert!(twirl(&p, &a0).unwrap().operator_norm() < 1e-15);
}

#[test]
fn two_site_fixed_point_count() {
    let space = ModeSpace::uniform(2, 1).unwrap();
    let w = Region::new(&space, &[0]).unwrap();
    let gens = site_phase_generators(&space, &[1]).unwrap();
    let fixed = fixed_point_algebra(2, &gens).unwrap();
    assert_eq!(fixed.dim(), 8);
    assert_eq!(LocalAlgebraHandle::new(&space, w.clone()).dim(), 4);
    assert_eq!(balanced_monomial_count(&space, &w), 8);
    for b in LocalAlgebraHandle::new(&space, w).basis_monomials() {
        assert!(fixed.contains(&b, 1e-8));
    }
}

#[test]
fn balanced_count_with_fibers() {
    // 1 site inside with 2 modes, 2 sites outside with C(4, 2) = 6 each
    let space = ModeSpace::uniform(3, 2).unwrap();
    let w = Region::new(&space, &[0]).unwrap();
    assert_eq!(balanced_monomial_count(&space, &w), 16 * 36);
    let small = ModeSpace::uniform(2, 2).unwrap();
    let w = Region::new(&small, &[1]).unwrap();
    let fixed = fixed_point_algebra(4, &site_phase_generators(&small, &[0]).unwrap()).unwrap();
    assert_eq!(fixed.dim(), balanced_monomial_count(&small, &w));
}

#[test]
fn ideal_membership_corpus() {
    let space = ModeSpace::uniform(3, 1).unwrap();
    let w = Region::new(&space, &[0]).unwrap();
    let outside = w.complement(&space).mode_mask();
    let mut rng = sample::rng(9);
    let cfield = sample::random_field_on(&space, outside, &mut rng);
    let ac = smear(&space, &cfield).unwrap();
    assert!(ideal_member(&space, &ac, &w, 1e-9).unwrap());
    let b = sample::random_operator(3, &mut rng);
    assert!(ideal_member(&space, &(&b * &ac), &w, 1e-9).unwrap());
    assert!(!ideal_member(&space, &FockOperator::identity(3), &w, 1e-9).unwrap());
    let a0 = elementary_annihilator(&space, 0).unwrap();
    assert!(!ideal_member(&space, &a0, &w, 1e-9).unwrap());
    assert!(!ideal_member(&space, &a0.adjoint(), &w, 1e-9).unwrap());
    assert!(ideal_member(&space, &ac, &w, 0.0).is_err());
    // the vacuum projection is a right identity killed by fields outside W
    let pbar = vacuum_projection(&space, &w);
    assert!((&ac * &pbar).operator_norm() < 1e-15);
    assert!(!membership_in_local(&space, &ac, &w, 1e-9).unwrap());
}

#[test]
fn restriction_of_a_field_cuts_its_support() {
    let space = ModeSpace::new(3, 1, vec![1.0, 3.0, 0.5]).unwrap();
    let w = Region::new(&space, &[0, 2]).unwrap();
    let f = FieldVector::new(vec![c(1.0), Complex64::new(0.5, -2.0), Complex64::new(0.0, 1.0)]);
    let cut = FieldVector::new(vec![c(1.0), c(0.0), Complex64::new(0.0, 1.0)]);
    let got = restrict(&space, &smear(&space, &f).unwrap(), &w).unwrap();
    assert!((&got - &smear(&space, &cut).unwrap()).operator_norm() < 1e-14);
}

#[test]
fn empty_region_takes_vacuum_expectation() {
    let space = ModeSpace::uniform(3, 1).unwrap();
    let mut rng = sample::rng(4);
    let a = sample::random_operator(3, &mut rng);
    let vac = fock_state(&space, &[]).unwrap();
    let expectation = (vac.adjoint() * a.matrix() * &vac)[(0, 0)];
    let got = restrict(&space, &a, &Region::empty(&space)).unwrap();
    assert!((&got - &FockOperator::identity(3).scale(expectation)).operator_norm() < 1e-14);
    let tilde = nu_tilde(&space, &a, &Region::empty(&space)).unwrap();
    assert!((tilde.entry(0, 0) - expectation).norm() < 1e-15);
}

#[test]
fn gauge_examples() {
    let space = ModeSpace::new(3, 2, vec![1.0, 2.0, 0.5]).unwrap();
    // a constant scalar is the global phase
    let g = GaugeElement::central(&space, GaugePreset::Unitary, &[0.7; 3]).unwrap();
    let v = gauge_unitary(&space, &g).unwrap();
    let expected = OneParticleUnitary::phase(&space, 0.7);
    assert!((v.matrix() - expected.matrix()).iter().all(|z| z.norm() < 1e-14));

    // kappa(a(f)) = a(V f)
    let mut rng = sample::rng(8);
    let gamma = GaugeElement::random(&space, GaugePreset::CircleSpecialUnitary, &mut rng);
    let f = sample::random_field(&space, &mut rng);
    let vg = gauge_unitary(&space, &gamma).unwrap();
    let lhs = apply_kappa(&space, &gamma, &smear(&space, &f).unwrap()).unwrap();
    let rhs = smear(&space, &vg.apply(&f).unwrap()).unwrap();
    assert!((&lhs - &rhs).operator_norm() < 1e-10);
    assert!((space.norm(&vg.apply(&f).unwrap()) - space.norm(&f)).abs() < 1e-12);

    // the site phase witness acts as the diagonal phase of that site
    let w = site_phase_witness(&space, GaugePreset::CircleSpecialUnitary, 1, 0.4).unwrap();
    let thetas = [0.0, 0.0, 0.4, 0.4, 0.0, 0.0];
    let d = OneParticleUnitary::diagonal_phases(&space, &thetas).unwrap();
    let a = sample::random_operator(6, &mut rng);
    let k = apply_kappa(&space, &w, &a).unwrap();
    assert!((&k - &apply_alpha(&d, &a).unwrap()).operator_norm() < 1e-10);
    assert!(site_phase_witness(&space, GaugePreset::SpecialUnitary, 1, 0.4).is_err());
}

#[test]
fn gauge_fixed_space_inside_phase_fixed_space() {
    let space = ModeSpace::uniform(2, 2).unwrap();
    let mut rng = sample::rng(3);
    let phase_fixed = fixed_point_algebra(4, &site_phase_generators(&space, &[0, 1]).unwrap()).unwrap();
    for preset in [GaugePreset::Unitary, GaugePreset::Torus, GaugePreset::CircleSpecialUnitary] {
        let gens: Vec<GaugeElement> = (0..2).map(|_| GaugeElement::random(&space, preset, &mut rng)).collect();
        let fixed = gauge_invariant_subspace(&space, &gens).unwrap();
        assert!(phase_fixed.inclusion_residual(&fixed) < 1e-8, "{preset}");
        assert!(fixed.contains(&FockOperator::identity(4), 1e-8));
    }
}

#[test]
fn partition_examples() {
    assert_eq!(equipartition(10, 4).unwrap().block_sizes(), vec![3, 3, 2, 2]);
    assert!(matches!(equipartition(4, 5), Err(CarError::BlockCountOutOfRange { .. })));
    let space = ModeSpace::one_particle(16, 1, vec![1.0; 16]).unwrap();
    let v = FieldVector::from_real(&[0.25; 16]);
    let p = refine_for_vector(&space, &v, 0.3).unwrap();
    assert_eq!(p, Partition::singletons(16));
    let space = ModeSpace::one_particle(5, 1, vec![1.0; 5]).unwrap();
    let v = FieldVector::from_real(&[0.1, 0.25, 0.1, 0.1, 0.1]);
    assert!(refine_for_vector(&space, &v, 0.4).is_ok());
    assert!(refine_for_vector(&space, &v, 0.4999).is_ok());
    assert!(matches!(
        refine_for_vector(&space, &v, 0.2),
        Err(CarError::AtomTooLarge { mode: 1, .. })
    ));
}
