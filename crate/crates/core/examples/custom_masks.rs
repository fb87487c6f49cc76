//! Building masks from segments, TOML, and the built-in shapes.
//!
//! Run: `cargo run --release --example custom_masks`

use adthin::layout::GridSpec;
use adthin::mask::{Mask, MaskSegment};
use adthin::optimizer::{run_fpe_ad, GaConfig, Problem};

const TOML: &str = r#"
[[segments]]
u_start = -1.0
u_end = -0.1
level_db = -20.0

[[segments]]
u_start = -0.1
u_end = 0.1
level_db = 0.0

[[segments]]
u_start = 0.1
u_end = 1.0
level_db = -12.0
"#;

fn main() -> adthin::Result<()> {
    let grid = GridSpec::half_wavelength(32)?;
    let asymmetric = Mask::from_toml_str(TOML)?;
    let notched = Mask::new(vec![
        MaskSegment::new(-1.0, -0.5, -14.0),
        MaskSegment::new(-0.5, -0.3, -25.0),
        MaskSegment::new(-0.3, -0.08, -14.0),
        MaskSegment::new(-0.08, 0.08, 0.0),
        MaskSegment::new(0.08, 1.0, -14.0),
    ])?;
    let masks = [
        ("tapered", Mask::tapered(&grid, -15.0, -25.0, 4)?),
        ("irregular", Mask::irregular(&grid)?),
        ("irregular type 2", Mask::irregular_type2(&grid)?),
        ("asymmetric (TOML)", asymmetric),
        ("notched", notched),
    ];
    for (name, mask) in masks {
        let problem = Problem::new(grid, mask);
        match run_fpe_ad(&problem, None, &GaConfig::default()) {
            Ok(r) => println!("{name:>18}: N = {:2}, xi = {:.4e}, SLL = {:.2} dB", r.element_count, r.mask_error, r.sidelobe_level.unwrap_or(f64::NAN)),
            Err(e) => println!("{name:>18}: {e}"),
        }
    }
    Ok(())
}
