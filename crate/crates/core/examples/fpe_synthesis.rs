//! Feasible-pattern synthesis: an auxiliary filled array that meets the mask
//! supplies the target autocorrelation.
//!
//! Run: `cargo run --release --example fpe_synthesis [SLL_DB] [SEED]`

use adthin::layout::GridSpec;
use adthin::mask::Mask;
use adthin::optimizer::{run_fpe_ad, GaConfig, Problem};

fn main() -> adthin::Result<()> {
    let mut args = std::env::args().skip(1);
    let sll: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(-15.0);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);

    let grid = GridSpec::half_wavelength(24)?;
    let problem = Problem::new(grid, Mask::benchmark_flat(&grid, sll)?);
    let r = run_fpe_ad(&problem, None, &GaConfig::default().with_seed(seed))?;

    println!("mask {sll} dB, P = {}, N = {} (default), seed {seed}", grid.num_slots(), r.element_count);
    println!("layout {} (shift {})", r.layout, r.shift);
    println!("xi = {:.4e}, SLL = {:.2} dB, Phi = {:.4}", r.mask_error, r.sidelobe_level.unwrap_or(f64::NAN), r.cost);
    if let Some(target) = &r.target {
        println!("target autocorrelation {:?}", target.values.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>());
    }
    Ok(())
}
