//! Every cyclic shift shares the autocorrelation but not the pattern; the
//! post-GA scan picks the shift with the lowest mask error.
//!
//! Run: `cargo run --release --example shift_scan`

use adthin::layout::{cyclic_shift, GridSpec, ThinningSequence};
use adthin::mask::Mask;
use adthin::optimizer::post_ga_cyclic_shift_with;
use adthin::pattern::{DenseEvaluator, MetricMode};

fn main() -> adthin::Result<()> {
    let parent = ThinningSequence::parse("110110111011101111100101")?;
    let grid = GridSpec::half_wavelength(parent.len())?;
    let mask = Mask::benchmark_flat(&grid, -15.0)?;
    let ev = DenseEvaluator::new(&grid, &mask, MetricMode::Step)?;

    println!("shift  layout                    xi        SLL dB");
    for s in 0..parent.len() {
        let l = cyclic_shift(&parent, s)?;
        println!("{s:5}  {l}  {:8.4}  {:7.2}", ev.mask_error(&l)?, ev.sidelobe_level(&l)?);
    }
    let scan = post_ga_cyclic_shift_with(&parent, &ev)?;
    println!("selected shift {} with xi = {:.4}", scan.shift, scan.mask_error);
    Ok(())
}
