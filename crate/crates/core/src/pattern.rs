//! Power-pattern evaluation and mask compliance metrics.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::autocorr::{autocorrelation, sequence_spectrum, spectrum};
use crate::element::ElementPattern;
use crate::error::{Error, Result};
use crate::layout::{candidate_positions, GridSpec, ThinningSequence};
use crate::mask::{linear_to_db, Mask};

/// Dense evaluation points per grid slot.
pub const DENSE_POINTS_PER_SLOT: usize = 20;

/// Normalized power pattern sampled on a strictly increasing `u` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCurve {
    pub u: Vec<f64>,
    pub values: Vec<f64>,
}

impl PatternCurve {
    pub fn values_db(&self) -> Vec<f64> {
        self.values.iter().map(|&v| linear_to_db(v)).collect()
    }
}

/// How a mask violation contributes to the matching error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    /// Unit step: measures the extent of `u` where the mask is exceeded.
    #[default]
    Step,
    /// Ramp: integrates the excess power above the mask.
    Ramp,
}

impl MetricMode {
    fn penalty(self, excess: f64) -> f64 {
        match self {
            Self::Step => (excess > 0.0) as u8 as f64,
            Self::Ramp => excess.max(0.0),
        }
    }
}

/// `n` evenly spaced points over `[-1, 1]`, endpoints included.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| {
            let u = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            if 2 * i + 1 == n {
                0.0
            } else {
                u
            }
        })
        .collect()
}

/// Default dense grid: `20 P + 1` points, so that broadside is sampled.
pub fn dense_grid(grid: &GridSpec) -> Vec<f64> {
    uniform_grid(DENSE_POINTS_PER_SLOT * grid.num_slots() + 1)
}

fn check_increasing(u: &[f64]) -> Result<()> {
    if u.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("u grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `(cos, sin)` of the phase of a slot at `d` towards `u`. Kept out of line so
/// every caller rounds identically.
#[inline(never)]
fn phasor(d: f64, u: f64) -> (f64, f64) {
    let phase = TAU * d * u;
    (phase.cos(), phase.sin())
}

/// `|Σ_p x_p exp(j 2π d_p u)|²` from precomputed phasors, summed in slot order.
fn accumulate(bits: &[bool], cos: &[f64], sin: &[f64]) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for q in 0..bits.len() {
        if bits[q] {
            re += cos[q];
            im += sin[q];
        }
    }
    re * re + im * im
}

fn array_factor_power(bits: &[bool], positions: &[f64], u: f64) -> f64 {
    let (cos, sin): (Vec<f64>, Vec<f64>) = positions.iter().map(|&d| phasor(d, u)).unzip();
    accumulate(bits, &cos, &sin)
}

/// Power pattern of real excitations `w` (not normalized).
pub fn weighted_power(weights: &[f64], grid: &GridSpec, u: f64) -> f64 {
    let af: f64 = weights
        .iter()
        .enumerate()
        .map(|(p, &w)| w * (TAU * grid.position(p) * u).cos())
        .sum();
    // Symmetric weights give a real array factor; keep the quadrature part
    // for completeness.
    let q: f64 = weights
        .iter()
        .enumerate()
        .map(|(p, &w)| w * (TAU * grid.position(p) * u).sin())
        .sum();
    af * af + q * q
}

/// Normalized power pattern `E(u) / E(0)` of a layout.
pub fn power_pattern(
    seq: &ThinningSequence,
    grid: &GridSpec,
    u_points: &[f64],
    element: &ElementPattern,
) -> Result<PatternCurve> {
    let n = seq.require_active()?;
    check_increasing(u_points)?;
    let positions = candidate_positions(grid);
    let peak = element.power(0.0) * (n * n) as f64;
    let values = u_points
        .iter()
        .map(|&u| element.power(u) * array_factor_power(seq.bits(), &positions, u) / peak)
        .collect();
    Ok(PatternCurve {
        u: u_points.to_vec(),
        values,
    })
}

/// Normalized pattern at the sample directions: `Γ_k / N²`.
pub fn pattern_samples(seq: &ThinningSequence) -> Result<Vec<f64>> {
    let n = seq.require_active()?;
    let n2 = (n * n) as f64;
    Ok(spectrum(&autocorrelation(seq))
        .power
        .into_iter()
        .map(|g| g / n2)
        .collect())
}

/// Interpolation kernel `S(ν) = sin(Pν/2) / (P sin(ν/2)) · exp(j (P-1) ν / 2)`.
pub fn interpolation_kernel(nu: f64, p: usize) -> Complex64 {
    let half = (nu / 2.0).sin();
    if half.abs() < 1e-8 {
        let sum: Complex64 = (0..p).map(|i| Complex64::from_polar(1.0, i as f64 * nu)).sum();
        return sum / p as f64;
    }
    let pf = p as f64;
    let amp = (pf * nu / 2.0).sin() / (pf * half);
    Complex64::from_polar(amp, (pf - 1.0) * nu / 2.0)
}

/// Normalized pattern rebuilt from the spectrum `{Γ_k, ψ_k}` through the
/// interpolation kernel (isotropic elements).
pub fn interpolated_pattern(
    seq: &ThinningSequence,
    grid: &GridSpec,
    u_points: &[f64],
) -> Result<PatternCurve> {
    let n = seq.require_active()?;
    check_increasing(u_points)?;
    let p = grid.num_slots();
    let spec = sequence_spectrum(seq);
    let phases = spec.phases.as_ref().expect("layout spectrum carries phases");
    let coeffs: Vec<Complex64> = spec
        .power
        .iter()
        .zip(phases)
        .map(|(&g, &psi)| Complex64::from_polar(g.max(0.0).sqrt(), psi))
        .collect();
    let n2 = (n * n) as f64;
    let values = u_points
        .iter()
        .map(|&u| {
            let x = TAU * grid.spacing() * u;
            let af: Complex64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c * interpolation_kernel(x - TAU * k as f64 / p as f64, p))
                .sum();
            af.norm_sqr() / n2
        })
        .collect();
    Ok(PatternCurve {
        u: u_points.to_vec(),
        values,
    })
}

fn trapezoid_weights(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = 0.5 * (u[i + 1] - u[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

fn check_coverage(u: &[f64]) -> Result<()> {
    const TOL: f64 = 1e-9;
    match (u.first(), u.last()) {
        (Some(&a), Some(&b)) if a <= -1.0 + TOL && b >= 1.0 - TOL && u.len() >= 2 => Ok(()),
        _ => Err(Error::GridCoverage),
    }
}

/// Mask levels and integration weights tied to a fixed `u` grid.
#[derive(Debug, Clone)]
struct MaskOnGrid {
    levels: Vec<f64>,
    mainlobe: Vec<bool>,
    weights: Vec<f64>,
    norm: f64,
}

impl MaskOnGrid {
    fn new(mask: &Mask, u: &[f64]) -> Result<Self> {
        check_coverage(u)?;
        let levels = u
            .iter()
            .map(|&x| mask.level(x.clamp(-1.0, 1.0)))
            .collect::<Result<Vec<_>>>()?;
        let mainlobe = u.iter().map(|&x| mask.in_mainlobe(x.clamp(-1.0, 1.0))).collect();
        let weights = trapezoid_weights(u);
        let norm = levels.iter().zip(&weights).map(|(m, w)| m * w).sum();
        Ok(Self {
            levels,
            mainlobe,
            weights,
            norm,
        })
    }

    fn matching_error(&self, values: &[f64], mode: MetricMode) -> f64 {
        let num: f64 = values
            .iter()
            .zip(&self.levels)
            .zip(&self.weights)
            .map(|((e, m), w)| w * mode.penalty(e - m))
            .sum();
        num / self.norm
    }

    fn sidelobe_peak(&self, values: &[f64]) -> Result<f64> {
        values
            .iter()
            .zip(&self.mainlobe)
            .filter(|(_, &inside)| !inside)
            .map(|(&v, _)| v)
            .reduce(f64::max)
            .ok_or(Error::NoSidelobeRegion)
    }
}

/// Mask matching error `ξ = ∫ Ξ[Ẽ(u) - M(u)] du / ∫ M(u) du`, both integrals
/// by the trapezoid rule on the curve grid.
pub fn mask_matching_error(curve: &PatternCurve, mask: &Mask, mode: MetricMode) -> Result<f64> {
    Ok(MaskOnGrid::new(mask, &curve.u)?.matching_error(&curve.values, mode))
}

/// Peak of the normalized pattern outside the mask's main-lobe region, in dB.
pub fn sidelobe_level(curve: &PatternCurve, mask: &Mask) -> Result<f64> {
    MaskOnGrid::new(mask, &curve.u)?
        .sidelobe_peak(&curve.values)
        .map(linear_to_db)
}

/// Precomputed phase tables for repeated dense-grid evaluation of layouts on
/// one grid and mask. Produces exactly the values of [`power_pattern`] and
/// [`mask_matching_error`].
#[derive(Debug, Clone)]
pub struct DenseEvaluator {
    grid: GridSpec,
    u: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    element: Vec<f64>,
    peak_element: f64,
    mask: MaskOnGrid,
    mode: MetricMode,
}

impl DenseEvaluator {
    pub fn new(grid: &GridSpec, mask: &Mask, mode: MetricMode) -> Result<Self> {
        Self::with_points(grid, mask, mode, dense_grid(grid), &ElementPattern::Isotropic)
    }

    pub fn with_points(
        grid: &GridSpec,
        mask: &Mask,
        mode: MetricMode,
        u: Vec<f64>,
        element: &ElementPattern,
    ) -> Result<Self> {
        check_increasing(&u)?;
        let mask = MaskOnGrid::new(mask, &u)?;
        let positions = candidate_positions(grid);
        let p = grid.num_slots();
        let mut cos = Vec::with_capacity(u.len() * p);
        let mut sin = Vec::with_capacity(u.len() * p);
        for &x in &u {
            for &d in &positions {
                let (c, s) = phasor(d, x);
                cos.push(c);
                sin.push(s);
            }
        }
        Ok(Self {
            grid: *grid,
            element: u.iter().map(|&x| element.power(x)).collect(),
            peak_element: element.power(0.0),
            u,
            cos,
            sin,
            mask,
            mode,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn points(&self) -> &[f64] {
        &self.u
    }

    pub fn mode(&self) -> MetricMode {
        self.mode
    }

    pub fn pattern(&self, seq: &ThinningSequence) -> Result<PatternCurve> {
        let n = seq.require_active()?;
        assert_eq!(seq.len(), self.grid.num_slots(), "layout does not match grid");
        let p = self.grid.num_slots();
        let bits = seq.bits();
        let peak = self.peak_element * (n * n) as f64;
        let values = (0..self.u.len())
            .map(|i| {
                let range = i * p..(i + 1) * p;
                let af = accumulate(bits, &self.cos[range.clone()], &self.sin[range]);
                self.element[i] * af / peak
            })
            .collect();
        Ok(PatternCurve {
            u: self.u.clone(),
            values,
        })
    }

    pub fn mask_error(&self, seq: &ThinningSequence) -> Result<f64> {
        let curve = self.pattern(seq)?;
        Ok(self.mask.matching_error(&curve.values, self.mode))
    }

    pub fn sidelobe_level(&self, seq: &ThinningSequence) -> Result<f64> {
        let curve = self.pattern(seq)?;
        self.mask.sidelobe_peak(&curve.values).map(linear_to_db)
    }

    /// Mask error of many layouts, evaluated in parallel, in input order.
    pub fn mask_errors(&self, seqs: &[ThinningSequence]) -> Result<Vec<f64>> {
        seqs.par_iter().map(|s| self.mask_error(s)).collect()
    }
}

/// Direction of the `m`-th null of a uniform fully populated array.
pub fn uniform_null(grid: &GridSpec, m: usize) -> f64 {
    m as f64 / (grid.num_slots() as f64 * grid.spacing())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::cyclic_shift;
    use std::f64::consts::PI;
    use crate::mask::MaskSegment;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seq(bits: &[u8]) -> ThinningSequence {
        ThinningSequence::from_bits(bits)
    }

    fn two_element_closed_form(u: f64) -> f64 {
        (PI * u / 2.0).cos().powi(2)
    }

    #[test]
    fn two_element_pattern() {
        let g = GridSpec::half_wavelength(2).unwrap();
        let u = uniform_grid(101);
        let c = power_pattern(&seq(&[1, 1]), &g, &u, &ElementPattern::Isotropic).unwrap();
        for (x, v) in c.u.iter().zip(&c.values) {
            assert!((v - two_element_closed_form(*x)).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_array_nulls_and_peak() {
        let g = GridSpec::half_wavelength(16).unwrap();
        let u: Vec<f64> = (1..8).map(|m| uniform_null(&g, m)).collect();
        let c = power_pattern(&ThinningSequence::filled(16), &g, &u, &ElementPattern::Isotropic)
            .unwrap();
        assert!(c.values.iter().all(|&v| v < 1e-20));
        let c = power_pattern(&seq(&[1, 0, 1, 1, 0]), &GridSpec::new(5, 0.7).unwrap(), &[0.0], &ElementPattern::Isotropic).unwrap();
        assert!((c.values[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dense_oracle_dirichlet() {
        // Squared Dirichlet kernel against its closed form.
        let p = 24;
        let g = GridSpec::half_wavelength(p).unwrap();
        let u = dense_grid(&g);
        let c = power_pattern(&ThinningSequence::filled(p), &g, &u, &ElementPattern::Isotropic)
            .unwrap();
        for (x, v) in c.u.iter().zip(&c.values) {
            let psi = PI * x;
            let s = (psi / 2.0).sin();
            let exact = if s.abs() < 1e-12 {
                1.0
            } else {
                ((p as f64 * psi / 2.0).sin() / (p as f64 * s)).powi(2)
            };
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_layout_rejected() {
        let g = GridSpec::half_wavelength(4).unwrap();
        let z = ThinningSequence::empty(4);
        assert!(matches!(power_pattern(&z, &g, &[0.0], &ElementPattern::Isotropic), Err(Error::EmptyLayout)));
        assert!(matches!(pattern_samples(&z), Err(Error::EmptyLayout)));
        assert!(matches!(interpolated_pattern(&z, &g, &[0.0]), Err(Error::EmptyLayout)));
    }

    #[test]
    fn sample_examples() {
        let s = pattern_samples(&seq(&[1, 1, 0, 1])).unwrap();
        let want = [1.0, 1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0];
        assert!(s.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));
        let s = pattern_samples(&seq(&[0, 1, 1, 0, 1, 0, 0])).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12);
        assert!(s[1..].iter().all(|v| (v - 2.0 / 9.0).abs() < 1e-12));
        let s = pattern_samples(&ThinningSequence::filled(8)).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12);
        assert!(s[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn kernel_limits() {
        assert!((interpolation_kernel(0.0, 9) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((interpolation_kernel(TAU, 9) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(interpolation_kernel(TAU / 9.0, 9).norm() < 1e-12);
    }

    #[test]
    fn interpolation_matches_direct() {
        let a = seq(&[1, 1, 0, 1]);
        let g = GridSpec::half_wavelength(4).unwrap();
        let u = uniform_grid(801);
        let direct = power_pattern(&a, &g, &u, &ElementPattern::Isotropic).unwrap();
        let interp = interpolated_pattern(&a, &g, &u).unwrap();
        for (x, y) in direct.values.iter().zip(&interp.values) {
            assert!((x - y).abs() <= 1e-6 * x.max(1e-3));
        }
        // At u_k the kernel sum collapses to Γ_k / N².
        let uk: Vec<f64> = (0..2).map(|k| g.sample_direction(k)).collect();
        let at = interpolated_pattern(&a, &g, &uk).unwrap();
        assert!((at.values[1] - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn matching_error_cases() {
        let g = GridSpec::half_wavelength(24).unwrap();
        let u = dense_grid(&g);
        let high = Mask::new(vec![MaskSegment::new(-1.0, 1.0, 3.0)]).unwrap();
        let c = power_pattern(&ThinningSequence::filled(24), &g, &u, &ElementPattern::Isotropic)
            .unwrap();
        assert_eq!(mask_matching_error(&c, &high, MetricMode::Step).unwrap(), 0.0);
        // Curve equal to the mask everywhere is compliant.
        let flat = PatternCurve { u: u.clone(), values: vec![1.0; u.len()] };
        assert_eq!(mask_matching_error(&flat, &Mask::unconstrained(), MetricMode::Step).unwrap(), 0.0);
        // Full violation of a -10 dB mask by a 0 dB curve: ξ = 2 / ∫M.
        let low = Mask::new(vec![MaskSegment::new(-1.0, 1.0, -10.0)]).unwrap();
        let e = mask_matching_error(&flat, &low, MetricMode::Step).unwrap();
        assert!((e - 2.0 / (2.0 * 0.1)).abs() < 1e-9);
        let e = mask_matching_error(&flat, &low, MetricMode::Ramp).unwrap();
        assert!((e - 0.9 / 0.1).abs() < 1e-9);
        let short = PatternCurve { u: vec![-0.5, 0.5], values: vec![1.0, 1.0] };
        assert!(matches!(mask_matching_error(&short, &low, MetricMode::Step), Err(Error::GridCoverage)));
    }

    #[test]
    fn uniform_sidelobe_level() {
        let g = GridSpec::half_wavelength(24).unwrap();
        let mask = Mask::benchmark_flat(&g, -15.0).unwrap();
        let c = power_pattern(&ThinningSequence::filled(24), &g, &dense_grid(&g), &ElementPattern::Isotropic).unwrap();
        let sll = sidelobe_level(&c, &mask).unwrap();
        // Dense oracle: first sidelobe of the squared Dirichlet kernel.
        let fine: Vec<f64> = (0..200_001).map(|i| 0.0833 + 0.05 * i as f64 / 200_000.0).collect();
        let c_fine = power_pattern(&ThinningSequence::filled(24), &g, &fine, &ElementPattern::Isotropic).unwrap();
        let oracle = linear_to_db(c_fine.values.iter().cloned().fold(0.0, f64::max));
        assert!((oracle + 13.21).abs() < 0.01, "oracle {oracle}");
        assert!((sll - oracle).abs() < 0.05, "sll {sll} vs {oracle}");
        assert!(matches!(sidelobe_level(&c, &Mask::unconstrained()), Err(Error::NoSidelobeRegion)));
    }

    #[test]
    fn difference_set_sample_floor() {
        let a = seq(&[0, 1, 1, 0, 1, 0, 0]);
        let g = GridSpec::half_wavelength(7).unwrap();
        let mask = Mask::benchmark_flat(&g, -10.0).unwrap();
        let c = power_pattern(&a, &g, &dense_grid(&g), &ElementPattern::Isotropic).unwrap();
        let sll = sidelobe_level(&c, &mask).unwrap();
        assert!(sll >= linear_to_db(2.0 / 9.0) - 1e-9);
    }

    #[test]
    fn evaluator_matches_free_functions_exactly() {
        let g = GridSpec::half_wavelength(20).unwrap();
        let mask = Mask::irregular(&g).unwrap();
        let ev = DenseEvaluator::new(&g, &mask, MetricMode::Step).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut a = ThinningSequence::new((0..20).map(|_| rng.random()).collect());
            a.set(0, true);
            let c = power_pattern(&a, &g, &dense_grid(&g), &ElementPattern::Isotropic).unwrap();
            let e = ev.pattern(&a).unwrap();
            for i in 0..c.values.len() {
                assert_eq!(e.values[i], c.values[i], "i={i} u={} {}", e.u[i], c.u[i]);
            }
            assert_eq!(e, c);
            assert_eq!(ev.mask_error(&a).unwrap(), mask_matching_error(&c, &mask, MetricMode::Step).unwrap());
        }
    }

    #[test]
    fn element_pattern_keeps_broadside_normalization() {
        let g = GridSpec::half_wavelength(12).unwrap();
        let e = ElementPattern::cosine_power(1.5, 401).unwrap();
        let a = seq(&[1, 0, 1, 1, 0, 1, 1, 1, 0, 1, 0, 1]);
        let c = power_pattern(&a, &g, &uniform_grid(201), &e).unwrap();
        assert!((c.values[100] - 1.0).abs() < 1e-12);
        let iso = power_pattern(&a, &g, &uniform_grid(201), &ElementPattern::Isotropic).unwrap();
        for i in 0..201 {
            assert!((c.values[i] - iso.values[i] * e.power(c.u[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn shifts_share_samples_but_not_sidelobes() {
        let g = GridSpec::half_wavelength(24).unwrap();
        let mask = Mask::benchmark_flat(&g, -15.0).unwrap();
        let ev = DenseEvaluator::new(&g, &mask, MetricMode::Step).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = ThinningSequence::new((0..24).map(|_| rng.random_bool(0.6)).collect());
        let base = ev.sidelobe_level(&a).unwrap();
        let mut differs = false;
        for s in 1..24 {
            let b = cyclic_shift(&a, s).unwrap();
            let (pa, pb) = (pattern_samples(&a).unwrap(), pattern_samples(&b).unwrap());
            assert!(pa.iter().zip(&pb).all(|(x, y)| (x - y).abs() < 1e-12));
            differs |= (ev.sidelobe_level(&b).unwrap() - base).abs() > 1e-6;
        }
        assert!(differs);
    }

    proptest! {
        #[test]
        fn samples_match_direct_pattern(bits in prop::collection::vec(any::<bool>(), 4..65)) {
            let mut a = ThinningSequence::new(bits);
            a.set(0, true);
            let g = GridSpec::half_wavelength(a.len()).unwrap();
            let uk: Vec<f64> = (0..a.len()).map(|k| g.sample_direction(k)).collect();
            let direct = power_pattern(&a, &g, &uk, &ElementPattern::Isotropic).unwrap();
            let samples = pattern_samples(&a).unwrap();
            for (x, y) in direct.values.iter().zip(&samples) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
        }

        #[test]
        fn interpolation_property(bits in prop::collection::vec(any::<bool>(), 4..33), spacing in 0.3f64..0.8) {
            let mut a = ThinningSequence::new(bits);
            a.set(0, true);
            let g = GridSpec::new(a.len(), spacing).unwrap();
            let u = uniform_grid(4 * a.len() + 1);
            let direct = power_pattern(&a, &g, &u, &ElementPattern::Isotropic).unwrap();
            let interp = interpolated_pattern(&a, &g, &u).unwrap();
            for (x, y) in direct.values.iter().zip(&interp.values) {
                prop_assert!((x - y).abs() <= 1e-6 * x.max(1e-6));
            }
        }

        #[test]
        fn raising_mask_never_increases_error(bits in prop::collection::vec(any::<bool>(), 16..17), lift in 0.0f64..10.0) {
            let mut a = ThinningSequence::new(bits);
            a.set(0, true);
            let g = GridSpec::half_wavelength(16).unwrap();
            let m1 = Mask::benchmark_flat(&g, -15.0).unwrap();
            let m2 = Mask::benchmark_flat(&g, (-15.0 + lift).min(-0.1)).unwrap();
            let c = power_pattern(&a, &g, &dense_grid(&g), &ElementPattern::Isotropic).unwrap();
            for mode in [MetricMode::Step, MetricMode::Ramp] {
                let e1 = mask_matching_error(&c, &m1, mode).unwrap();
                let e2 = mask_matching_error(&c, &m2, mode).unwrap();
                prop_assert!(e2 <= e1 + 1e-12);
            }
        }
    }
}
