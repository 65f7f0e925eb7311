use num_complex::Complex64;

use super::config::{FieldChoice, TwirlBoundConfig};
use super::report::{num, Report};
use super::check_tolerance;
use crate::error::{CarError, Result};
use crate::fock::{FieldVector, ModeSpace, Monomial, Polynomial};
use crate::partition_builder::equipartition;
use crate::sample;
use crate::twirl::{commutator_bound_report, twirl, twirl_oracle_mc};

/// Unit vector with mass `1/m` on every mode.
pub fn uniform_unit_field(space: &ModeSpace) -> FieldVector {
    let m = space.mode_count() as f64;
    FieldVector::new(
        (0..space.mode_count())
            .map(|i| Complex64::new(1.0 / (m * space.mode_weight(i)).sqrt(), 0.0))
            .collect(),
    )
}

/// `A(f_1..f_n; g_1..g_n)` with independent unit-norm random fields.
pub fn random_balanced_monomial<R: rand::Rng + ?Sized>(space: &ModeSpace, degree: usize, rng: &mut R) -> Monomial {
    let creators = (0..degree).map(|_| sample::random_unit_field(space, rng)).collect();
    let annihilators = (0..degree).map(|_| sample::random_unit_field(space, rng)).collect();
    Monomial::new(creators, annihilators)
}

pub fn twirl_bound(cfg: &TwirlBoundConfig, cap: usize) -> Result<Report> {
    check_tolerance("slack", cfg.slack)?;
    let space = cfg.space.build(cap)?;
    let m = space.mode_count();
    if cfg.degrees.iter().any(|&n| n == 0 || 2 * n > 2 * m) {
        return Err(CarError::InvalidArgument(format!(
            "degrees must lie in 1..={m}, got {:?}",
            cfg.degrees
        )));
    }
    let mut rng = sample::rng(cfg.seed);
    let f = match cfg.field {
        FieldChoice::Uniform => uniform_unit_field(&space),
        FieldChoice::Random => sample::random_unit_field(&space, &mut rng),
    };

    let mut report = Report::new(
        "twirl-bound",
        cfg,
        &[
            "degree",
            "r",
            "max_block_norm",
            "lhs",
            "c_a",
            "rhs",
            "c_a_r_pow_minus_half",
            "mc_deviation",
            "mc_sigma",
        ],
    );
    for &degree in &cfg.degrees {
        let mono = random_balanced_monomial(&space, degree, &mut rng);
        let poly = Polynomial::single(mono);
        let op = poly.to_operator(&space)?;
        for &r in &cfg.schedule {
            let p = equipartition(m, r)?;
            let b = commutator_bound_report(&space, &poly, &f, &p)?;
            let law = b.c_a / (r as f64).sqrt();
            let mut pass = b.lhs <= b.rhs + cfg.slack;
            if cfg.field == FieldChoice::Uniform {
                pass &= b.lhs <= law + cfg.slack;
            }
            // Monte-Carlo torus average against the exact pinching; the
            // Frobenius error has mean square |A - nu(A)|_F^2 / N.
            let (dev, sigma) = if cfg.mc_samples > 0 {
                let exact = twirl(&p, &op)?;
                let mc = twirl_oracle_mc(&space, &p, &op, cfg.mc_samples, cfg.seed ^ (degree as u64) << 32 ^ r as u64)?;
                let dev = (&mc - &exact).frobenius_norm();
                let sigma = (&op - &exact).frobenius_norm() / (cfg.mc_samples as f64).sqrt();
                pass &= dev <= 3.0 * sigma + 1e-12;
                (num(dev), num(sigma))
            } else {
                (String::new(), String::new())
            };
            report.row(
                vec![
                    degree.to_string(),
                    r.to_string(),
                    num(b.max_block_norm),
                    num(b.lhs),
                    num(b.c_a),
                    num(b.rhs),
                    num(law),
                    dev,
                    sigma,
                ],
                pass && b.holds,
            );
        }
    }
    Ok(report)
}
