//! Direct pattern matching against autocorrelation matching on the same mask,
//! element count and GA budget.
//!
//! Run: `cargo run --release --example pd_vs_ad [SLOTS] [SEEDS]`

use adthin::layout::GridSpec;
use adthin::mask::Mask;
use adthin::optimizer::{default_fpe_count, run_fpe_ad, GaConfig, Problem};
use adthin::pd::run_pd;

fn main() -> adthin::Result<()> {
    let mut args = std::env::args().skip(1);
    let slots: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(32);
    let seeds: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let grid = GridSpec::half_wavelength(slots)?;
    let problem = Problem::new(grid, Mask::irregular_type2(&grid)?);
    let n = default_fpe_count(&problem.auxiliary_array()?);

    println!("seed   xi FPE-AD     xi PD   (P = {slots}, N = {n})");
    for seed in 0..seeds {
        let cfg = GaConfig::default().with_seed(seed);
        let ad = run_fpe_ad(&problem, Some(n), &cfg)?;
        let pd = run_pd(&problem, n, &cfg)?;
        println!("{seed:4} {:11.4e} {:9.4e}", ad.mask_error, pd.mask_error);
    }
    Ok(())
}
