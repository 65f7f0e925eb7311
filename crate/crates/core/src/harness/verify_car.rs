use num_complex::Complex64;
use rayon::prelude::*;

use super::config::VerifyCarConfig;
use super::report::{num, Report};
use super::check_tolerance;
use crate::error::Result;
use crate::fock::{FieldKind, FieldOp, ModeSpace, SparseOperator};
use crate::sample;

const POWER_ITERATIONS: usize = 200;

/// Residuals of one random triple `(f, g, h)` and scalar `c`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TripleResiduals {
    /// `|{a(f), a(g)^*} - <f,g> 1|`
    pub anticommutator: f64,
    /// `|{a(f), a(g)}|`
    pub annihilators: f64,
    /// `|[a(f)^* a(g), a(h)] + <h,f> a(g)|`; `{a(f)^*, a(h)} = <h,f>` under
    /// the inner product antilinear in its first argument.
    pub commutator_identity: f64,
    /// `|a(c f) - conj(c) a(f)|`
    pub antilinearity: f64,
}

impl TripleResiduals {
    fn max(self, o: Self) -> Self {
        Self {
            anticommutator: self.anticommutator.max(o.anticommutator),
            annihilators: self.annihilators.max(o.annihilators),
            commutator_identity: self.commutator_identity.max(o.commutator_identity),
            antilinearity: self.antilinearity.max(o.antilinearity),
        }
    }
}

/// Residual norms are Schur upper bounds on the spectral norm.
pub fn triple_residuals(space: &ModeSpace, seed: u64, index: u64) -> Result<TripleResiduals> {
    let mut rng = sample::stream_rng(seed, index);
    let f = sample::random_field(space, &mut rng);
    let g = sample::random_field(space, &mut rng);
    let h = sample::random_field(space, &mut rng);
    let c = sample::gaussian(&mut rng);
    let m = space.mode_count();
    let sp = |v| -> Result<SparseOperator> { Ok(SparseOperator::from_field(&FieldOp::annihilator(space, v)?)) };
    let (af, ag, ah) = (sp(&f)?, sp(&g)?, sp(&h)?);
    let ag_star = ag.adjoint();
    let af_star = af.adjoint();

    let anticommutator = af
        .anticommutator(&ag_star)
        .add_scaled(&SparseOperator::identity(m), -space.inner(&f, &g))
        .norm_bound();
    let annihilators = af.anticommutator(&ag).norm_bound();
    let commutator_identity = af_star
        .mul(&ag)
        .commutator(&ah)
        .add_scaled(&ag, space.inner(&h, &f))
        .norm_bound();
    let acf = sp(&f.scaled(c))?;
    let antilinearity = acf.add_scaled(&af, -c.conj()).norm_bound();
    Ok(TripleResiduals {
        anticommutator,
        annihilators,
        commutator_identity,
        antilinearity,
    })
}

/// Max over all residuals of the elementary relations `{a_i, a_j^*} = delta_ij`, `{a_i, a_j} = 0`.
pub fn elementary_residual(modes: usize) -> f64 {
    let ops: Vec<SparseOperator> = (0..modes)
        .map(|i| SparseOperator::from_field(&FieldOp::elementary(modes, i, FieldKind::Annihilation)))
        .collect();
    let mut worst: f64 = 0.0;
    for (i, ai) in ops.iter().enumerate() {
        for (j, aj) in ops.iter().enumerate() {
            let delta = if i == j { -1.0 } else { 0.0 };
            let r1 = ai
                .anticommutator(&aj.adjoint())
                .add_scaled(&SparseOperator::identity(modes), Complex64::new(delta, 0.0))
                .norm_bound();
            let r2 = ai.anticommutator(aj).norm_bound();
            worst = worst.max(r1).max(r2);
        }
    }
    worst
}

/// Relative error of `|a(f)| = |f|` for one random `f`.
pub fn field_norm_residual(space: &ModeSpace, seed: u64, index: u64) -> Result<f64> {
    let mut rng = sample::stream_rng(seed ^ 0x6e6f726d, index);
    let f = sample::random_field(space, &mut rng);
    let a = SparseOperator::from_field(&FieldOp::annihilator(space, &f)?);
    let n = space.norm(&f);
    Ok((a.spectral_norm(POWER_ITERATIONS) - n).abs() / n)
}

pub fn verify_car(cfg: &VerifyCarConfig, cap: usize) -> Result<Report> {
    check_tolerance("tolerance", cfg.tolerance)?;
    check_tolerance("norm_tolerance", cfg.norm_tolerance)?;
    let space = cfg.space.build(cap)?;
    let worst = (0..cfg.triples as u64)
        .into_par_iter()
        .map(|k| triple_residuals(&space, cfg.seed, k))
        .try_reduce(TripleResiduals::default, |a, b| Ok(a.max(b)))?;
    let norm = (0..cfg.norm_samples as u64)
        .into_par_iter()
        .map(|k| field_norm_residual(&space, cfg.seed, k))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;

    let mut report = Report::new("verify-car", cfg, &["check", "samples", "max_residual", "tolerance"]);
    let mut add = |name: &str, samples: usize, value: f64, tol: f64| {
        report.row(
            vec![name.into(), samples.to_string(), num(value), num(tol)],
            value < tol,
        );
    };
    let m = space.mode_count();
    add("elementary_car", m * m, elementary_residual(m), cfg.tolerance);
    add("car_anticommutator", cfg.triples, worst.anticommutator, cfg.tolerance);
    add("car_annihilators", cfg.triples, worst.annihilators, cfg.tolerance);
    add("commutator_identity", cfg.triples, worst.commutator_identity, cfg.tolerance);
    add("antilinearity", cfg.triples, worst.antilinearity, cfg.tolerance);
    add("field_norm", cfg.norm_samples, norm, cfg.norm_tolerance);
    Ok(report)
}
