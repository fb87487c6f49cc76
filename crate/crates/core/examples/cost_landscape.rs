//! Exhaustive cost landscapes for the pattern and autocorrelation objectives.
//!
//! Run: `cargo run --release --example cost_landscape [SLOTS]`

use adthin::autocorr::AutocorrTarget;
use adthin::layout::GridSpec;
use adthin::mask::Mask;
use adthin::oracle::{exhaust_landscape, ExhaustOptions, Objective};

fn main() -> adthin::Result<()> {
    let slots: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(14);
    let grid = GridSpec::half_wavelength(slots)?;
    let options = ExhaustOptions::default();
    let pd = exhaust_landscape(&grid, &Objective::pattern(Mask::benchmark_flat(&grid, -15.0)?), &options)?;
    let target = AutocorrTarget::from_sequence(&pd.witnesses[0]);
    let ad = exhaust_landscape(&grid, &Objective::Autocorrelation(target), &options)?;

    for (name, l) in [("pattern", &pd), ("autocorrelation", &ad)] {
        println!(
            "{name:>15}: {} layouts, min {:.4}, max {:.4}, optima {}, within lowest 1%: {}",
            l.evaluated,
            l.minimum,
            l.maximum,
            l.optimum_count(),
            l.quantile_count(0.01)
        );
    }
    println!("pattern optimum {}", pd.witnesses[0]);
    println!("autocorrelation optima (first 4): {:?}", ad.witnesses.iter().take(4).map(|s| s.to_string()).collect::<Vec<_>>());
    Ok(())
}
