use rand::Rng;

use super::config::PartitionConfig;
use super::report::{num, Report};
use crate::error::{CarError, Result};
use crate::fock::{FieldVector, ModeSpace};
use crate::partition_builder::{equipartition, refine_for_vector, VectorMassProfile};
use crate::sample;
use crate::twirl::Partition;

/// Result of one constructor call checked against the atom rule and the block bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineCheck {
    /// Block count, or `None` when `AtomTooLarge` was raised.
    pub blocks: Option<usize>,
    pub max_block_norm: f64,
    pub consistent: bool,
}

/// Runs `refine_for_vector` and checks the outcome: success exactly when no
/// single-mode mass reaches `eps^2`, and then `|P_j v| < eps` for all blocks
/// with the blocks covering every mode once.
pub fn check_refine(space: &ModeSpace, v: &FieldVector, eps: f64) -> Result<RefineCheck> {
    let (_, heaviest) = VectorMassProfile::new(space, v)?.heaviest();
    let atom = heaviest >= eps * eps;
    match refine_for_vector(space, v, eps) {
        Ok(p) => {
            let norm = p.max_block_norm(space, v);
            let covered = p.masks().iter().fold(0u64, |acc, m| acc | m) == crate::fock::low_bits(space.mode_count());
            let disjoint = p.masks().iter().map(|m| m.count_ones() as usize).sum::<usize>() == space.mode_count();
            Ok(RefineCheck {
                blocks: Some(p.block_count()),
                max_block_norm: norm,
                consistent: !atom && norm < eps && covered && disjoint,
            })
        }
        Err(CarError::AtomTooLarge { .. }) => Ok(RefineCheck {
            blocks: None,
            max_block_norm: f64::NAN,
            consistent: atom,
        }),
        Err(e) => Err(e),
    }
}

fn contiguous_near_equal(p: &Partition) -> bool {
    let sizes = p.block_sizes();
    let lo = sizes.iter().min().copied().unwrap_or(0);
    let hi = sizes.iter().max().copied().unwrap_or(0);
    let contiguous = p.blocks().iter().flatten().copied().eq(0..p.modes());
    hi - lo <= 1 && contiguous
}

pub fn partition(cfg: &PartitionConfig) -> Result<Report> {
    let space = cfg.space.build_one_particle()?;
    let m = space.mode_count();
    let mut rng = sample::rng(cfg.seed);
    let v = match &cfg.vector {
        Some(values) => {
            if values.len() != m {
                return Err(CarError::DimensionMismatch {
                    expected: m,
                    found: values.len(),
                });
            }
            FieldVector::from_real(values)
        }
        None => sample::random_unit_field(&space, &mut rng),
    };
    let mut report = Report::new(
        "partition",
        cfg,
        &["check", "parameter", "blocks", "max_block_norm", "outcome"],
    );

    let mut by_eps: Vec<(f64, Option<usize>)> = Vec::new();
    for &eps in &cfg.eps {
        let c = check_refine(&space, &v, eps)?;
        by_eps.push((eps, c.blocks));
        report.row(
            vec![
                "refine".into(),
                num(eps),
                c.blocks.map(|b| b.to_string()).unwrap_or_default(),
                if c.blocks.is_some() { num(c.max_block_norm) } else { String::new() },
                if c.blocks.is_some() { "ok".into() } else { "atom_too_large".into() },
            ],
            c.consistent,
        );
    }
    // Smaller eps never gives fewer blocks.
    by_eps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let counts: Vec<usize> = by_eps.iter().filter_map(|(_, b)| *b).collect();
    let monotone = counts.windows(2).all(|w| w[1] >= w[0]);
    report.row(
        vec!["refine_monotone".into(), String::new(), String::new(), String::new(), monotone.to_string()],
        monotone,
    );

    for &r in &cfg.blocks {
        let p = equipartition(m, r)?;
        let ok = p.block_count() == r && contiguous_near_equal(&p);
        let sizes: Vec<String> = p.block_sizes().iter().map(|s| s.to_string()).collect();
        report.row(
            vec![
                "equipartition".into(),
                r.to_string(),
                r.to_string(),
                num(p.max_block_norm(&space, &v)),
                sizes.join(" "),
            ],
            ok,
        );
    }

    // Random vectors: eps above the atom floor must succeed, eps at or
    // below it must raise AtomTooLarge.
    let mut bad_above = 0;
    let mut bad_below = 0;
    for _ in 0..cfg.random_trials {
        let v = sample::random_field(&space, &mut rng);
        let (_, heaviest) = VectorMassProfile::new(&space, &v)?.heaviest();
        let floor = heaviest.sqrt();
        let norm = space.norm(&v);
        if floor >= norm {
            // a single mode carries all the mass
            bad_above += usize::from(check_refine(&space, &v, norm)?.blocks.is_some());
            continue;
        }
        let above = rng.random_range(floor..norm);
        let c = check_refine(&space, &v, above)?;
        if !(c.consistent && c.blocks.is_some()) {
            bad_above += 1;
        }
        let below = rng.random_range(floor * 0.05..=floor);
        let c = check_refine(&space, &v, below)?;
        if !(c.consistent && c.blocks.is_none()) {
            bad_below += 1;
        }
    }
    for (name, bad) in [("random_above_floor", bad_above), ("random_below_floor", bad_below)] {
        report.row(
            vec![
                name.into(),
                cfg.random_trials.to_string(),
                String::new(),
                String::new(),
                format!("{bad} violations"),
            ],
            bad == 0,
        );
    }
    Ok(report)
}
