//! Pattern-domain baseline: the same GA minimizing the mask error directly.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::layout::{GridSpec, ThinningSequence};
use crate::mask::Mask;
use crate::optimizer::{evolve, initialize_me, GaConfig, Mode, Problem, RunTrace, SynthesisResult};
use crate::pattern::{dense_grid, mask_matching_error, power_pattern, DenseEvaluator, MetricMode};
use crate::element::ElementPattern;

/// `ξ` of a layout on the default dense grid.
pub fn cost_pd(seq: &ThinningSequence, mask: &Mask, grid: &GridSpec) -> Result<f64> {
    let curve = power_pattern(seq, grid, &dense_grid(grid), &ElementPattern::Isotropic)?;
    mask_matching_error(&curve, mask, MetricMode::default())
}

/// GA on `ξ` from a random start, without the shift step.
pub fn run_pd(problem: &Problem, n: usize, config: &GaConfig) -> Result<SynthesisResult> {
    let start = Instant::now();
    let p = problem.grid.num_slots();
    if n == 0 || n > p {
        return Err(Error::ElementCount { count: n, len: p });
    }
    let mut config = config.clone();
    if config.fixed_n.is_none() && config.enforce_count {
        config.fixed_n = Some(n);
    }
    let evaluator = problem.evaluator()?;
    let population = initialize_me(&config, p)?;
    // Layouts without elements have no pattern; rank them last.
    let cost = |s: &ThinningSequence| evaluator.mask_error(s).unwrap_or(f64::INFINITY);
    let (parent, trace) = evolve(population, cost, &config)?;
    let mask_error = evaluator.mask_error(&parent)?;
    let sidelobe_level = match evaluator.sidelobe_level(&parent) {
        Ok(v) => Some(v),
        Err(Error::NoSidelobeRegion) => None,
        Err(e) => return Err(e),
    };
    Ok(SynthesisResult {
        mode: Mode::Pd,
        layout: parent.clone(),
        shift: 0,
        cost: mask_error,
        mask_error,
        parent_mask_error: mask_error,
        sidelobe_level,
        parent_sidelobe_level: sidelobe_level,
        element_count: parent.count(),
        parent,
        target: None,
        excitations: None,
        trace: RunTrace {
            wall_seconds: start.elapsed().as_secs_f64(),
            ..trace
        },
    })
}

/// Dense-grid evaluator matching [`cost_pd`].
pub fn pd_evaluator(mask: &Mask, grid: &GridSpec) -> Result<DenseEvaluator> {
    DenseEvaluator::new(grid, mask, MetricMode::default())
}
