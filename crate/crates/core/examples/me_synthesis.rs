//! Mask-equality synthesis: the target autocorrelation comes straight from
//! the sampled mask.
//!
//! Run: `cargo run --release --example me_synthesis [SLL_DB] [SEED]`

use adthin::layout::GridSpec;
use adthin::mask::{consistent_element_count, sample_mask, Mask};
use adthin::optimizer::{run_me_ad, GaConfig, Problem};

fn main() -> adthin::Result<()> {
    let mut args = std::env::args().skip(1);
    let sll: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(-15.0);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);

    let grid = GridSpec::half_wavelength(24)?;
    let problem = Problem::new(grid, Mask::benchmark_flat(&grid, sll)?);
    let samples = sample_mask(&problem.mask, &grid)?;
    let n = consistent_element_count(samples.values());
    let r = run_me_ad(&problem, n, &GaConfig::default().with_seed(seed))?;

    println!("mask {sll} dB, P = {}, N = {n}, seed {seed}", grid.num_slots());
    println!("parent  {}  xi = {:.4}  SLL = {:.2} dB", r.parent, r.parent_mask_error, r.parent_sidelobe_level.unwrap_or(f64::NAN));
    println!("shift {:2} {}  xi = {:.4}  SLL = {:.2} dB", r.shift, r.layout, r.mask_error, r.sidelobe_level.unwrap_or(f64::NAN));
    println!("Phi = {}, stopped at iteration {} ({:?})", r.cost, r.trace.converged_at, r.trace.termination);
    Ok(())
}
