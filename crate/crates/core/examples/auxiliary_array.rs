//! Auxiliary excitations that meet a mask, solved by linear programming.
//!
//! Run: `cargo run --release --example auxiliary_array [SLL_DB] [SLOTS]`

use adthin::afpa::{default_constraint_grid_size, feasible_samples, solve_afpa_relaxed};
use adthin::layout::GridSpec;
use adthin::mask::{linear_to_db, Mask};
use adthin::pattern::weighted_power;

fn main() -> adthin::Result<()> {
    let mut args = std::env::args().skip(1);
    let sll: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(-20.0);
    let slots: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(24);

    let grid = GridSpec::half_wavelength(slots)?;
    let mask = Mask::benchmark_flat(&grid, sll)?;
    let w = solve_afpa_relaxed(&mask, &grid, default_constraint_grid_size(&grid))?;
    println!("mask {sll} dB over {slots} slots: compliant = {}, sidelobe scale {:.4}", w.compliant(), w.sidelobe_scale());
    println!("weights:");
    for (p, x) in w.weights().iter().enumerate() {
        println!("  {p:3} {x:.5} {}", "#".repeat((x * 40.0).round() as usize));
    }

    let peak = weighted_power(w.weights(), &grid, 0.0);
    let worst = (0..=2000)
        .map(|i| -1.0 + i as f64 / 1000.0)
        .filter(|&u| !mask.in_mainlobe(u))
        .map(|u| linear_to_db(weighted_power(w.weights(), &grid, u) / peak))
        .fold(f64::NEG_INFINITY, f64::max);
    println!("peak sidelobe {worst:.2} dB");
    let e = feasible_samples(&w, &grid)?;
    println!("feasible pattern samples {:?}", e.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>());
    Ok(())
}
