use rand::Rng;

use super::config::LocalizeConfig;
use super::report::{num, Report};
use super::{check_tolerance, residual_norm};
use crate::automorphism::{apply_alpha, apply_quasifree, OneParticleContraction, OneParticleUnitary};
use crate::error::Result;
use crate::fock::{smear, FockOperator, ModeSpace, Monomial, Polynomial};
use crate::localization::{
    embed, ideal_defect, membership_in_local, nu_tilde, restrict, restrict_oracle, vacuum_projection,
    LocalAlgebraHandle, Region, EXPANSION_MAX_MODES,
};
use crate::sample;

/// Where the fields of a corpus monomial live.
#[derive(Debug, Clone, Copy)]
enum Support {
    Inside,
    Outside,
    Mixed,
}

/// Normal-ordered monomial with random degrees and fields of the given support.
fn corpus_monomial<R: Rng + ?Sized>(
    space: &ModeSpace,
    w: &Region,
    max_degree: usize,
    support: Support,
    rng: &mut R,
) -> Monomial {
    let inside = w.mode_mask();
    let outside = w.complement(space).mode_mask();
    let field = |rng: &mut R| match support {
        Support::Inside => sample::random_field_on(space, inside, rng),
        Support::Outside => sample::random_field_on(space, outside, rng),
        Support::Mixed => sample::random_field(space, rng),
    };
    let k = rng.random_range(0..=max_degree);
    let l = rng.random_range(0..=max_degree);
    let creators = (0..k).map(|_| field(rng)).collect();
    let annihilators = (0..l).map(|_| field(rng)).collect();
    Monomial::new(creators, annihilators)
}

/// Element of `A(W)` from a random matrix on the Fock space of `modes(W)`.
fn random_local<R: Rng + ?Sized>(space: &ModeSpace, w: &Region, rng: &mut R) -> Result<FockOperator> {
    let b = sample::random_operator(w.mode_count(), rng);
    embed(space, b.matrix(), w)
}

struct Rows {
    report: Report,
}

impl Rows {
    fn below(&mut self, check: &str, samples: usize, value: f64, tol: f64) {
        self.report.row(
            vec![check.into(), samples.to_string(), num(value), "<".into(), num(tol)],
            value < tol,
        );
    }

    fn at_least(&mut self, check: &str, samples: usize, value: f64, tol: f64) {
        self.report.row(
            vec![check.into(), samples.to_string(), num(value), ">=".into(), num(tol)],
            value >= tol,
        );
    }
}

fn max_of(it: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    it.into_iter().try_fold(0.0, |acc: f64, x| Ok(acc.max(x?)))
}

pub fn localize(cfg: &LocalizeConfig, cap: usize) -> Result<Report> {
    check_tolerance("tolerance", cfg.tolerance)?;
    check_tolerance("formula_tolerance", cfg.formula_tolerance)?;
    let space = cfg.space.build(cap)?;
    let m = space.mode_count();
    let sites: Vec<usize> = cfg
        .region
        .clone()
        .unwrap_or_else(|| (0..space.site_count() / 2).collect());
    let w = Region::new(&space, &sites)?;
    let wc = w.complement(&space);
    let tol = cfg.tolerance;
    let n = cfg.operators;
    let mut rng = sample::rng(cfg.seed);
    let mut rows = Rows {
        report: Report::new(
            "localize",
            cfg,
            &["check", "samples", "value", "relation", "tolerance"],
        ),
    };

    // Restriction formula: every field of a normal-ordered monomial is cut to W.
    let p_w = OneParticleContraction::coordinate_projection(&space, w.mode_mask());
    let supports = [Support::Inside, Support::Outside, Support::Mixed];
    let formula = max_of((0..cfg.monomials).map(|k| {
        let mono = corpus_monomial(&space, &w, cfg.max_degree, supports[k % 3], &mut rng);
        let op = Polynomial::single(mono.clone()).to_operator(&space)?;
        let expected = apply_quasifree(&p_w, &mono)?;
        Ok(residual_norm(&(&restrict(&space, &op, &w)? - &expected)))
    }))?;
    rows.below("restriction_formula", cfg.monomials, formula, cfg.formula_tolerance);

    let ops: Vec<FockOperator> = (0..n).map(|_| sample::random_operator(m, &mut rng)).collect();
    let others: Vec<FockOperator> = (0..n).map(|_| sample::random_operator(m, &mut rng)).collect();
    let nu: Vec<FockOperator> = ops.iter().map(|a| restrict(&space, a, &w)).collect::<Result<_>>()?;

    if m <= EXPANSION_MAX_MODES {
        let v = max_of(
            ops.iter()
                .zip(&nu)
                .map(|(a, r)| Ok(residual_norm(&(&restrict_oracle(&space, a, &w)? - r)))),
        )?;
        rows.below("expansion_route", n, v, tol);
    }

    // Conditional-expectation axioms.
    let one = FockOperator::identity(m);
    rows.below("unital", 1, residual_norm(&(&restrict(&space, &one, &w)? - &one)), tol);
    let idem = max_of(
        nu.iter()
            .map(|r| Ok(residual_norm(&(&restrict(&space, r, &w)? - r)))),
    )?;
    rows.below("idempotent", n, idem, tol);
    let mut bimodule: f64 = 0.0;
    for ((a, b), na) in ops.iter().zip(&others).zip(&nu) {
        let nb = restrict(&space, b, &w)?;
        let prod = na * &nb;
        let left = restrict(&space, &(a * &nb), &w)?;
        let right = restrict(&space, &(na * b), &w)?;
        bimodule = bimodule
            .max(residual_norm(&(&left - &prod)))
            .max(residual_norm(&(&right - &prod)));
    }
    rows.below("bimodule", n, bimodule, tol);
    let positivity = max_of(ops.iter().map(|a| {
        let r = restrict(&space, &(&a.adjoint() * a), &w)?;
        Ok((-r.min_hermitian_eigenvalue()).max(0.0))
    }))?;
    rows.below("positive", n, positivity, tol);
    let contraction = ops
        .iter()
        .zip(&nu)
        .map(|(a, r)| (r.operator_norm() - a.operator_norm()).max(0.0))
        .fold(0.0, f64::max);
    rows.below("contractive", n, contraction, tol);

    // Equivariance under phases supported in W^c.
    let outside = wc.mode_mask();
    let equiv = max_of(ops.iter().zip(&nu).map(|(a, r)| {
        let thetas: Vec<f64> = (0..m)
            .map(|i| {
                if outside >> i & 1 == 1 {
                    rng.random_range(0.0..std::f64::consts::TAU)
                } else {
                    0.0
                }
            })
            .collect();
        let h = OneParticleUnitary::diagonal_phases(&space, &thetas)?;
        Ok(residual_norm(&(&restrict(&space, &apply_alpha(&h, a)?, &w)? - r)))
    }))?;
    rows.below("equivariance", n, equiv, tol);

    // Vacuum projection and nu-tilde.
    let pbar = vacuum_projection(&space, &w);
    let tilde = max_of(ops.iter().zip(&nu).map(|(a, r)| {
        let rhs = &(&pbar * r) * &pbar;
        Ok(residual_norm(&(&nu_tilde(&space, a, &w)? - &rhs)))
    }))?;
    rows.below("nu_tilde_identity", n, tilde, tol);
    let iso = max_of((0..n).map(|_| {
        let a = random_local(&space, &w, &mut rng)?;
        let na = a.operator_norm();
        Ok((nu_tilde(&space, &a, &w)?.operator_norm() - na).abs() / na)
    }))?;
    rows.below("nu_tilde_isometric", n, iso, tol);
    let local = LocalAlgebraHandle::new(&space, w.clone());
    let gens = local.generators();
    let commute = gens
        .iter()
        .flat_map(|g| [g.clone(), g.adjoint()])
        .map(|g| residual_norm(&pbar.commutator(&g)))
        .fold(0.0, f64::max);
    rows.below("vacuum_projection_commutes", 2 * gens.len(), commute, tol);

    if outside != 0 {
        let killed = (0..n)
            .map(|_| {
                let c = sample::random_field_on(&space, outside, &mut rng);
                Ok(residual_norm(&(&smear(&space, &c)? * &pbar)))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        rows.below("vacuum_annihilation", n, killed, tol);

        // The left ideal generated by fields outside W.
        let mut accept: f64 = 0.0;
        for b in &ops {
            let c = sample::random_field_on(&space, outside, &mut rng);
            let ac = smear(&space, &c)?;
            accept = accept
                .max(ideal_defect(&space, &ac, &w)?)
                .max(ideal_defect(&space, &(b * &ac), &w)?);
        }
        rows.below("ideal_accepts", 2 * n, accept, tol);
        let non_local = max_of((0..n).map(|_| {
            let c = sample::random_field_on(&space, outside, &mut rng);
            let ac = smear(&space, &c)?;
            Ok(if membership_in_local(&space, &ac, &w, tol)? { 1.0 } else { 0.0 })
        }))?;
        rows.below("outside_fields_not_local", n, non_local, 0.5);
    }
    let mut reject = ideal_defect(&space, &one, &w)?;
    for g in &gens {
        reject = reject
            .min(ideal_defect(&space, g, &w)?)
            .min(ideal_defect(&space, &g.adjoint(), &w)?);
    }
    rows.at_least("ideal_rejects", 1 + 2 * gens.len(), reject, tol);

    // Membership and isotony.
    let inside = w.mode_mask();
    let members = max_of((0..n).map(|_| {
        let c = sample::random_field_on(&space, inside, &mut rng);
        Ok(residual_norm(&(&restrict(&space, &smear(&space, &c)?, &w)? - &smear(&space, &c)?)))
    }))?;
    rows.below("inside_fields_local", n, members, tol);
    if let Some(extra) = wc.sites().first() {
        let mut bigger = sites.clone();
        bigger.push(*extra);
        let w2 = Region::new(&space, &bigger)?;
        let iso = max_of((0..n).map(|_| {
            let a = random_local(&space, &w, &mut rng)?;
            Ok(residual_norm(&(&restrict(&space, &a, &w2)? - &a)))
        }))?;
        rows.below("isotony", n, iso, tol);
    }

    // Limits W = empty and W = all sites.
    let empty = Region::empty(&space);
    let vac = max_of(ops.iter().map(|a| {
        let expected = one.scale(a.entry(0, 0));
        Ok(residual_norm(&(&restrict(&space, a, &empty)? - &expected)))
    }))?;
    rows.below("empty_region", n, vac, tol);
    let all = Region::all(&space);
    let full = max_of(
        ops.iter()
            .map(|a| Ok(residual_norm(&(&restrict(&space, a, &all)? - a)))),
    )?;
    rows.below("full_region", n, full, tol);

    Ok(rows.report)
}
