use super::config::NetFixedPointsConfig;
use super::report::{num, Report};
use super::check_tolerance;
use crate::commutant::FixedSpace;
use crate::error::{CarError, Result};
use crate::fock::FockOperator;
use crate::gauge::{gauge_invariant_subspace, GaugeElement, GaugePreset};
use crate::localization::{
    balanced_monomial_count, balanced_monomials, fixed_point_algebra, normal_monomial_operator,
    site_phase_generators, LocalAlgebraHandle, Region,
};
use crate::sample;

/// Largest mode count for the monomial-span comparisons.
pub const SPAN_CHECK_MAX_MODES: usize = 4;

pub fn net_fixed_points(cfg: &NetFixedPointsConfig, cap: usize) -> Result<Report> {
    check_tolerance("tolerance", cfg.tolerance)?;
    let presets = cfg
        .presets
        .iter()
        .map(|p| p.parse::<GaugePreset>())
        .collect::<Result<Vec<_>>>()?;
    let space = cfg.space.build(cap)?;
    let m = space.mode_count();
    let w = Region::new(&space, &cfg.region)?;
    let wc = w.complement(&space);
    let tol = cfg.tolerance;
    let mut report = Report::new(
        "net-fixed-points",
        cfg,
        &["check", "preset", "value", "expected", "tolerance"],
    );
    let count = |report: &mut Report, check: &str, preset: &str, value: usize, expected: usize| {
        report.row(
            vec![check.into(), preset.into(), value.to_string(), expected.to_string(), String::new()],
            value == expected,
        );
    };
    let residual = |report: &mut Report, check: &str, preset: &str, value: f64, asserted: bool| {
        report.row(
            vec![check.into(), preset.into(), num(value), String::new(), num(tol)],
            !asserted || value < tol,
        );
    };

    let local = LocalAlgebraHandle::new(&space, w.clone());
    let local_space = FixedSpace::span(m, &local.basis_monomials());
    let fixed = fixed_point_algebra(m, &site_phase_generators(&space, wc.sites())?)?;
    let balanced = balanced_monomial_count(&space, &w);
    count(&mut report, "dim_local", "", local_space.dim(), local.dim());
    count(&mut report, "dim_fixed", "", fixed.dim(), balanced);
    count(
        &mut report,
        "dim_excess",
        "",
        fixed.dim().saturating_sub(local_space.dim()),
        balanced - local.dim(),
    );
    residual(&mut report, "local_in_fixed", "", fixed.inclusion_residual(&local_space), true);

    if m <= SPAN_CHECK_MAX_MODES {
        // A(W) plus the balanced monomials with some content in W^c span the
        // fixed space, and the two parts meet only in 0.
        let pairs = balanced_monomials(&space, &w);
        let outside = wc.mode_mask() as usize;
        let ops: Vec<FockOperator> = pairs
            .iter()
            .map(|&(i, j)| normal_monomial_operator(m, i, j))
            .collect();
        let excess_ops: Vec<FockOperator> = pairs
            .iter()
            .zip(&ops)
            .filter(|((i, j), _)| (i | j) & outside != 0)
            .map(|(_, op)| op.clone())
            .collect();
        let balanced_space = FixedSpace::span(m, &ops);
        let excess_span = FixedSpace::span(m, &excess_ops);
        residual(&mut report, "balanced_in_fixed", "", fixed.inclusion_residual(&balanced_space), true);
        residual(&mut report, "fixed_in_balanced", "", balanced_space.inclusion_residual(&fixed), true);
        residual(&mut report, "excess_monomials_in_fixed", "", fixed.inclusion_residual(&excess_span), true);
        count(
            &mut report,
            "dim_local_plus_excess",
            "",
            local_space.dim() + excess_span.dim(),
            fixed.dim(),
        );
    }

    // Gauge-fixed spaces against the fixed space of every site phase.
    let all_sites: Vec<usize> = (0..space.site_count()).collect();
    let phase_fixed = fixed_point_algebra(m, &site_phase_generators(&space, &all_sites)?)?;
    let identity = FockOperator::identity(m);
    let mut rng = sample::rng(cfg.seed);
    for preset in presets {
        if cfg.gauge_generators == 0 {
            return Err(CarError::InvalidArgument("gauge_generators must be at least 1".into()));
        }
        let name = preset.name();
        let gens: Vec<GaugeElement> = (0..cfg.gauge_generators)
            .map(|_| GaugeElement::random(&space, preset, &mut rng))
            .collect();
        let mut dims = Vec::with_capacity(gens.len());
        let mut last = None;
        for k in 1..=gens.len() {
            let g = gauge_invariant_subspace(&space, &gens[..k])?;
            dims.push(g.dim());
            last = Some(g);
        }
        let gauge_fixed = last.expect("at least one generator");
        count(&mut report, "dim_gauge_fixed", name, gauge_fixed.dim(), gauge_fixed.dim());
        let monotone = dims.windows(2).all(|d| d[1] <= d[0]);
        count(&mut report, "dim_monotone", name, monotone as usize, 1);
        residual(&mut report, "identity_gauge_fixed", name, gauge_fixed.residual(&identity), true);
        residual(
            &mut report,
            "gauge_fixed_in_phase_fixed",
            name,
            phase_fixed.inclusion_residual(&gauge_fixed),
            preset.contains_circle(),
        );
    }
    Ok(report)
}
