//! Autocorrelation, its spectrum and the array pattern at the grid samples.
//!
//! Run: `cargo run --example transform_identities`

use adthin::autocorr::{autocorrelation, sequence_spectrum, spectrum};
use adthin::element::ElementPattern;
use adthin::layout::{cyclic_shift, GridSpec, ThinningSequence};
use adthin::pattern::{pattern_samples, power_pattern};

fn main() -> adthin::Result<()> {
    let seq = ThinningSequence::parse("1101001110100101")?;
    let grid = GridSpec::half_wavelength(seq.len())?;
    let gamma = autocorrelation(&seq);
    println!("layout          {seq}");
    println!("autocorrelation {:?}", gamma.values());

    let via_gamma = spectrum(&gamma).power;
    let direct = sequence_spectrum(&seq).power;
    let samples = pattern_samples(&seq)?;
    let n2 = (seq.count() * seq.count()) as f64;
    println!("\n k      u_k    DFT(gamma)   |A_k|^2   N^2 F(u_k)");
    for k in 0..seq.len() {
        let u = grid.sample_direction(k);
        let f = power_pattern(&seq, &grid, &[u], &ElementPattern::Isotropic)?.values[0];
        println!("{k:2} {u:8.4} {:12.6} {:9.6} {:12.6}", via_gamma[k], direct[k], n2 * f);
        assert!((samples[k] - f).abs() < 1e-9);
    }

    for s in [1, 5, 11] {
        assert_eq!(autocorrelation(&cyclic_shift(&seq, s)?), gamma);
    }
    println!("\ncyclic shifts leave the autocorrelation unchanged");
    Ok(())
}
