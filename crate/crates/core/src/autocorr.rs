//! Cyclic autocorrelation of layouts, its DFT, and target autocorrelations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::layout::ThinningSequence;
use crate::mask::MaskSamples;

/// Imaginary residue (relative to the largest magnitude) above which an
/// inverse transform is flagged as coming from an asymmetric input.
pub const ASYMMETRY_WARN: f64 = 1e-6;

/// Discrete Fourier transform with the `exp(+j 2π nk / P)` kernel used for
/// pattern samples; `inverse` applies `exp(-j 2π nk / P) / P`.
pub trait Transform {
    fn forward(&self, x: &[Complex64]) -> Vec<Complex64>;
    fn inverse(&self, x: &[Complex64]) -> Vec<Complex64>;
}

/// Direct `O(P²)` summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectDft;

impl DirectDft {
    fn run(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        let twiddle: Vec<Complex64> = (0..n)
            .map(|m| Complex64::from_polar(1.0, sign * TAU * m as f64 / n as f64))
            .collect();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(i, &xi)| xi * twiddle[(i * k) % n])
                    .sum()
            })
            .collect()
    }
}

impl Transform for DirectDft {
    fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        Self::run(x, 1.0)
    }

    fn inverse(&self, x: &[Complex64]) -> Vec<Complex64> {
        let scale = 1.0 / x.len() as f64;
        Self::run(x, -1.0).into_iter().map(|v| v * scale).collect()
    }
}

/// Cyclic autocorrelation `γ_s = Σ_p α_p α_{(p+s) mod P}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Autocorrelation(Vec<u32>);

impl Autocorrelation {
    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&v| v as f64).collect()
    }
}

impl From<Vec<u32>> for Autocorrelation {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

pub fn autocorrelation(seq: &ThinningSequence) -> Autocorrelation {
    let bits = seq.bits();
    let p = bits.len();
    let ones: Vec<usize> = (0..p).filter(|&i| bits[i]).collect();
    let mut gamma = vec![0u32; p];
    for &i in &ones {
        for s in 0..p {
            let j = i + s;
            if bits[if j >= p { j - p } else { j }] {
                gamma[s] += 1;
            }
        }
    }
    Autocorrelation(gamma)
}

/// Power spectrum `Γ_k` and, when derived from a layout, the phases `ψ_k`
/// of the layout's own DFT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSamples {
    pub power: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
}

/// `Γ_k = Σ_s γ_s exp(j 2π sk / P)`.
pub fn spectrum(gamma: &Autocorrelation) -> SpectrumSamples {
    spectrum_with(&DirectDft, gamma)
}

pub fn spectrum_with(dft: &impl Transform, gamma: &Autocorrelation) -> SpectrumSamples {
    let x: Vec<Complex64> = gamma.0.iter().map(|&g| Complex64::new(g as f64, 0.0)).collect();
    let out = dft.forward(&x);
    let scale = out.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let residue = out.iter().map(|c| c.im.abs()).fold(0.0, f64::max) / scale;
    debug_assert!(residue < 1e-9, "spectrum of an autocorrelation must be real");
    SpectrumSamples {
        power: out.iter().map(|c| c.re).collect(),
        phases: None,
    }
}

/// Spectrum of a layout computed from its own DFT `A_k = Σ_p α_p exp(j 2π pk / P)`:
/// `Γ_k = |A_k|²`, `ψ_k = arg A_k`.
pub fn sequence_spectrum(seq: &ThinningSequence) -> SpectrumSamples {
    let x: Vec<Complex64> = seq
        .bits()
        .iter()
        .map(|&b| Complex64::new(b as u8 as f64, 0.0))
        .collect();
    let a = DirectDft.forward(&x);
    SpectrumSamples {
        power: a.iter().map(|c| c.norm_sqr()).collect(),
        phases: Some(a.iter().map(|c| c.arg()).collect()),
    }
}

/// Real inverse-transform coefficients with the measured imaginary residue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdftCoefficients {
    pub values: Vec<f64>,
    /// `max |Im μ_s| / max |μ_s|`.
    pub imag_residue: f64,
}

impl IdftCoefficients {
    pub fn is_symmetric(&self) -> bool {
        self.imag_residue <= ASYMMETRY_WARN
    }
}

/// `μ_s = (1/P) Σ_k x_k exp(-j 2π ks / P)`, real parts.
pub fn idft_coefficients(samples: &[f64]) -> IdftCoefficients {
    let x: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mu = DirectDft.inverse(&x);
    let scale = mu.iter().map(|c| c.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let imag_residue = mu.iter().map(|c| c.im.abs()).fold(0.0, f64::max) / scale;
    IdftCoefficients {
        values: mu.iter().map(|c| c.re).collect(),
        imag_residue,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Built from the mask samples themselves.
    MaskEquality,
    /// Built from the samples of a mask-compliant fully populated array.
    FeasiblePattern,
    /// Autocorrelation of a known layout.
    Planted,
}

/// Target autocorrelation `γ*_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrTarget {
    pub values: Vec<f64>,
    pub kind: TargetKind,
    pub element_count: usize,
    pub imag_residue: f64,
}

impl AutocorrTarget {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn from_sequence(seq: &ThinningSequence) -> Self {
        Self {
            values: autocorrelation(seq).to_f64(),
            kind: TargetKind::Planted,
            element_count: seq.count(),
            imag_residue: 0.0,
        }
    }

    fn scaled(samples: &[f64], n: usize, kind: TargetKind) -> Self {
        let mu = idft_coefficients(samples);
        let n2 = (n * n) as f64;
        Self {
            values: mu.values.iter().map(|m| n2 * m).collect(),
            kind,
            element_count: n,
            imag_residue: mu.imag_residue,
        }
    }
}

/// `γ*_s = N² μ_s(M)`.
pub fn target_me(mask_samples: &MaskSamples, n: usize) -> AutocorrTarget {
    AutocorrTarget::scaled(mask_samples.values(), n, TargetKind::MaskEquality)
}

/// `γ*_s = N² μ_s(E^feas)` for normalized auxiliary pattern samples.
pub fn target_fpe(feasible_samples: &[f64], n: usize) -> AutocorrTarget {
    AutocorrTarget::scaled(feasible_samples, n, TargetKind::FeasiblePattern)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{cyclic_shift, GridSpec};
    use crate::mask::{sample_mask, Mask};
    use proptest::prelude::*;

    fn seq(bits: &[u8]) -> ThinningSequence {
        ThinningSequence::from_bits(bits)
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn autocorrelation_examples() {
        assert_eq!(autocorrelation(&seq(&[1, 1, 1, 1])).values(), &[4, 4, 4, 4]);
        assert_eq!(autocorrelation(&seq(&[1, 1, 0, 1])).values(), &[3, 2, 2, 2]);
        assert_eq!(
            autocorrelation(&seq(&[0, 1, 1, 0, 1, 0, 0])).values(),
            &[3, 1, 1, 1, 1, 1, 1]
        );
        assert_eq!(autocorrelation(&seq(&[0, 0, 0])).values(), &[0, 0, 0]);
    }

    #[test]
    fn spectrum_examples() {
        let s = spectrum(&vec![3, 2, 2, 2].into());
        assert!(close(&s.power, &[9.0, 1.0, 1.0, 1.0], 1e-12));
        let s = spectrum(&vec![3, 1, 1, 1, 1, 1, 1].into());
        assert!(close(&s.power, &[9.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0], 1e-12));
        let s = spectrum(&vec![5; 5].into());
        assert!(close(&s.power, &[25.0, 0.0, 0.0, 0.0, 0.0], 1e-12));
        let direct = sequence_spectrum(&seq(&[1, 1, 0, 1]));
        assert!(close(&direct.power, &[9.0, 1.0, 1.0, 1.0], 1e-12));
    }

    #[test]
    fn idft_examples() {
        let g = GridSpec::half_wavelength(16).unwrap();
        let samples = sample_mask(&Mask::benchmark_flat(&g, -15.0).unwrap(), &g).unwrap();
        let mu = idft_coefficients(samples.values());
        let m = 10f64.powf(-1.5);
        // Closed form of a constant-plus-spike vector.
        assert!((mu.values[0] - (1.0 + 15.0 * m) / 16.0).abs() < 1e-12);
        assert!((mu.values[0] - 0.09215).abs() < 1e-5);
        for s in 1..16 {
            assert!((mu.values[s] - (1.0 - m) / 16.0).abs() < 1e-12);
        }
        assert!((mu.values[3] - 0.06052).abs() < 1e-5);
        assert!(mu.is_symmetric());

        let mu = idft_coefficients(&[2.5; 6]);
        assert!(close(&mu.values, &[2.5, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-12));

        let mu = idft_coefficients(&[9.0, 1.0, 1.0, 1.0]);
        assert!(close(&mu.values, &[3.0, 2.0, 2.0, 2.0], 1e-12));
    }

    #[test]
    fn asymmetric_input_flagged() {
        let mu = idft_coefficients(&[1.0, 0.5, 0.1, 0.2]);
        assert!(!mu.is_symmetric());
    }

    #[test]
    fn me_target_examples() {
        let g = GridSpec::half_wavelength(16).unwrap();
        let samples = sample_mask(&Mask::benchmark_flat(&g, -15.0).unwrap(), &g).unwrap();
        let t = target_me(&samples, 8);
        assert_eq!(t.kind, TargetKind::MaskEquality);
        assert!((t.values[0] - 5.8976).abs() < 1e-3);
        assert!(t.values[1..].iter().all(|v| (v - 3.8733).abs() < 1e-3));

        let flat = sample_mask(&Mask::unconstrained(), &g).unwrap();
        let t = target_me(&flat, 5);
        assert!((t.values[0] - 25.0).abs() < 1e-12);
        assert!(t.values[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn me_target_is_two_level() {
        let g = GridSpec::half_wavelength(24).unwrap();
        let samples = sample_mask(&Mask::benchmark_flat(&g, -15.0).unwrap(), &g).unwrap();
        let t = target_me(&samples, 14);
        let off = t.values[1];
        assert!(t.values[0] > off);
        assert!(t.values[1..].iter().all(|v| (v - off).abs() < 1e-9));
    }

    #[test]
    fn fpe_target_roundtrip() {
        let a = seq(&[1, 0, 1, 1, 0, 0, 1, 0, 1]);
        let n = a.count();
        let gamma = autocorrelation(&a);
        let s = spectrum(&gamma);
        let samples: Vec<f64> = s.power.iter().map(|g| g / (n * n) as f64).collect();
        let t = target_fpe(&samples, n);
        assert_eq!(t.kind, TargetKind::FeasiblePattern);
        assert!(close(&t.values, &gamma.to_f64(), 1e-9));
    }

    fn arb_seq(max_len: usize) -> impl Strategy<Value = ThinningSequence> {
        prop::collection::vec(any::<bool>(), 4..max_len).prop_map(ThinningSequence::new)
    }

    proptest! {
        #[test]
        fn sum_rules_and_symmetry(a in arb_seq(65)) {
            let g = autocorrelation(&a);
            let n = a.count() as u32;
            let p = a.len();
            prop_assert_eq!(g.values()[0], n);
            prop_assert_eq!(g.values().iter().sum::<u32>(), n * n);
            for s in 1..p {
                prop_assert_eq!(g.values()[s], g.values()[p - s]);
            }
        }

        #[test]
        fn shift_invariance(a in arb_seq(65), s in 0usize..64) {
            let s = s % a.len();
            prop_assert_eq!(autocorrelation(&cyclic_shift(&a, s).unwrap()), autocorrelation(&a));
        }

        #[test]
        fn spectrum_identity(a in arb_seq(65)) {
            let via_gamma = spectrum(&autocorrelation(&a));
            let direct = sequence_spectrum(&a);
            let scale = (a.count() * a.count()).max(1) as f64;
            for (x, y) in via_gamma.power.iter().zip(&direct.power) {
                prop_assert!((x - y).abs() <= 1e-9 * scale);
                prop_assert!(*x >= -1e-9 * scale);
            }
        }

        #[test]
        fn transform_roundtrip(a in arb_seq(65)) {
            let gamma = autocorrelation(&a);
            let back = idft_coefficients(&spectrum(&gamma).power);
            let scale = gamma.values()[0].max(1) as f64;
            for (x, y) in back.values.iter().zip(gamma.to_f64()) {
                prop_assert!((x - y).abs() <= 1e-9 * scale);
            }
        }
    }
}
