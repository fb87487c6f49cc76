//! Recovering a layout from its own autocorrelation.
//!
//! Run: `cargo run --release --example planted_recovery [SEED]`

use adthin::autocorr::{autocorrelation, AutocorrTarget};
use adthin::layout::{cyclic_shift, hamming_distance, ThinningSequence};
use adthin::optimizer::{cost_ad, evolve, initialize_me, GaConfig};

fn main() -> adthin::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0);
    let plant = ThinningSequence::parse("000000010010011000101011")?;
    let target = AutocorrTarget::from_sequence(&plant);
    println!("plant {plant}, autocorrelation {:?}", autocorrelation(&plant).values());

    let cfg = GaConfig {
        population_size: 200,
        max_iterations: 2000,
        stagnation_window: 200,
        fixed_n: Some(plant.count()),
        ..GaConfig::default()
    }
    .with_seed(seed);
    let (best, trace) = evolve(initialize_me(&cfg, plant.len())?, |s| cost_ad(s, &target).unwrap(), &cfg)?;
    println!("found {best}, Phi = {}, after {} iterations", trace.best_costs.last().unwrap(), trace.converged_at);

    let distance = |r: &ThinningSequence| (0..best.len()).map(|s| hamming_distance(&cyclic_shift(&best, s).unwrap(), r).unwrap()).min().unwrap();
    println!("closest shift: {} bits from the plant, {} from its mirror image", distance(&plant), distance(&plant.reversed()));
    Ok(())
}
