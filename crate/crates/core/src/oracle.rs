//! Exhaustive enumeration of every layout on small grids: cost landscapes,
//! global optima and brute-force references.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autocorr::{AutocorrTarget, Autocorrelation};
use crate::error::{Error, Result};
use crate::layout::{GridSpec, ThinningSequence};
use crate::mask::Mask;
use crate::pattern::{DenseEvaluator, MetricMode};

/// Largest grid enumerated with the autocorrelation cost.
pub const AD_CAP: usize = 24;
/// Largest grid enumerated with the dense-grid mask error.
pub const PD_CAP: usize = 16;
pub const DEFAULT_BIN_WIDTH: f64 = 1e-3;
const CHUNK: u64 = 1 << 16;
const PROGRESS_EVERY: u64 = 1 << 20;
const WITNESS_CAP: usize = 1 << 16;

/// Naive reference: `γ_s` read off the sequence written out twice.
pub fn brute_autocorrelation(seq: &ThinningSequence) -> Autocorrelation {
    let doubled: Vec<bool> = seq.bits().iter().chain(seq.bits()).copied().collect();
    let p = seq.len();
    let mut gamma = vec![0u32; p];
    for s in 0..p {
        for q in 0..p {
            if doubled[q] && doubled[q + s] {
                gamma[s] += 1;
            }
        }
    }
    Autocorrelation::from(gamma)
}

#[derive(Debug, Clone)]
pub enum Objective {
    /// Mask error on the dense grid.
    Pattern { mask: Mask, metric: MetricMode },
    /// Autocorrelation mismatch against a target.
    Autocorrelation(AutocorrTarget),
}

impl Objective {
    pub fn pattern(mask: Mask) -> Self {
        Objective::Pattern {
            mask,
            metric: MetricMode::default(),
        }
    }

    fn cap(&self) -> usize {
        match self {
            Objective::Pattern { .. } => PD_CAP,
            Objective::Autocorrelation(_) => AD_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExhaustOptions {
    /// Only sequences with exactly this many ones.
    pub n_filter: Option<usize>,
    pub bin_width: f64,
    /// Report progress on stderr every 2²⁰ sequences.
    pub progress: bool,
}

impl Default for ExhaustOptions {
    fn default() -> Self {
        Self {
            n_filter: None,
            bin_width: DEFAULT_BIN_WIDTH,
            progress: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub cost_bin: f64,
    pub relative_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub len: usize,
    pub evaluated: u64,
    pub minimum: f64,
    pub maximum: f64,
    /// Every sequence attaining the minimum, in enumeration order (capped).
    pub witnesses: Vec<ThinningSequence>,
    /// Exact cost values with their multiplicities, ascending.
    pub raw: Vec<(f64, u64)>,
    pub histogram: Vec<HistogramBin>,
}

impl Landscape {
    /// Number of sequences with `min < cost ≤ min + fraction·(max − min)`.
    pub fn near_optimal_count(&self, fraction: f64) -> u64 {
        let limit = self.minimum + fraction * (self.maximum - self.minimum);
        self.raw
            .iter()
            .filter(|(c, _)| *c > self.minimum && *c <= limit)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn optimum_count(&self) -> u64 {
        self.raw.first().map_or(0, |r| r.1)
    }

    /// Cost of the sequence at rank `⌈fraction·evaluated⌉` in ascending order.
    pub fn quantile(&self, fraction: f64) -> f64 {
        let rank = ((fraction.clamp(0.0, 1.0) * self.evaluated as f64).ceil() as u64).max(1);
        let mut seen = 0;
        for &(c, n) in &self.raw {
            seen += n;
            if seen >= rank {
                return c;
            }
        }
        self.maximum
    }

    /// Number of sequences with `min < cost ≤ quantile(fraction)`.
    pub fn quantile_count(&self, fraction: f64) -> u64 {
        let limit = self.quantile(fraction);
        self.raw
            .iter()
            .filter(|(c, _)| *c > self.minimum && *c <= limit)
            .map(|(_, n)| n)
            .sum()
    }
}

#[derive(Default)]
struct Partial {
    counts: BTreeMap<u64, u64>,
    evaluated: u64,
    minimum: f64,
    witnesses: Vec<u64>,
}

impl Partial {
    fn new() -> Self {
        Self {
            minimum: f64::INFINITY,
            ..Default::default()
        }
    }

    fn push(&mut self, x: u64, cost: f64) {
        self.evaluated += 1;
        *self.counts.entry(cost.to_bits()).or_default() += 1;
        if cost < self.minimum {
            self.minimum = cost;
            self.witnesses.clear();
        }
        if cost == self.minimum && self.witnesses.len() < WITNESS_CAP {
            self.witnesses.push(x);
        }
    }

    /// Merges a later chunk; witnesses stay in enumeration order.
    fn merge(mut self, other: Partial) -> Partial {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_default() += v;
        }
        self.evaluated += other.evaluated;
        if other.minimum < self.minimum {
            self.minimum = other.minimum;
            self.witnesses = other.witnesses;
        } else if other.minimum == self.minimum {
            let room = WITNESS_CAP - self.witnesses.len();
            self.witnesses.extend(other.witnesses.into_iter().take(room));
        }
        self
    }
}

fn rotate(x: u64, s: usize, p: usize, full: u64) -> u64 {
    if s == 0 {
        x
    } else {
        ((x >> s) | (x << (p - s))) & full
    }
}

fn to_sequence(x: u64, p: usize) -> ThinningSequence {
    ThinningSequence::new((0..p).map(|i| (x >> i) & 1 == 1).collect())
}

/// Enumerates all `2^P` layouts (bit `p` of the counter is slot `p`).
pub fn exhaust_landscape(grid: &GridSpec, objective: &Objective, options: &ExhaustOptions) -> Result<Landscape> {
    let p = grid.num_slots();
    let cap = objective.cap();
    if p > cap {
        return Err(Error::EnumerationCap { len: p, cap });
    }
    if !(options.bin_width > 0.0) {
        return Err(Error::InvalidConfig("bin_width must be positive".into()));
    }
    if let Objective::Autocorrelation(t) = objective {
        if t.len() != p {
            return Err(Error::LengthMismatch { left: t.len(), right: p });
        }
    }
    let evaluator = match objective {
        Objective::Pattern { mask, metric } => Some(DenseEvaluator::new(grid, mask, *metric)?),
        Objective::Autocorrelation(_) => None,
    };
    let total: u64 = 1 << p;
    let full = total - 1;
    let chunks = total.div_ceil(CHUNK);
    let done = std::sync::atomic::AtomicU64::new(0);

    let partials: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut part = Partial::new();
            let end = ((c + 1) * CHUNK).min(total);
            for x in c * CHUNK..end {
                let ones = x.count_ones() as usize;
                if options.n_filter.is_some_and(|n| n != ones) {
                    continue;
                }
                let cost = match (objective, &evaluator) {
                    (Objective::Autocorrelation(t), _) => {
                        let mut sum = 0.0;
                        for s in 0..p {
                            let g = (x & rotate(x, s, p, full)).count_ones() as f64;
                            sum += (g - t.values[s]).powi(2);
                        }
                        sum / p as f64
                    }
                    (Objective::Pattern { .. }, Some(ev)) => {
                        if x == 0 {
                            continue;
                        }
                        ev.mask_error(&to_sequence(x, p)).expect("non-empty layout")
                    }
                    _ => unreachable!(),
                };
                part.push(x, cost);
            }
            let before = done.fetch_add(end - c * CHUNK, std::sync::atomic::Ordering::Relaxed);
            if options.progress && (before + end - c * CHUNK) / PROGRESS_EVERY > before / PROGRESS_EVERY {
                eprintln!("enumerated {} / {}", before + end - c * CHUNK, total);
            }
            part
        })
        .collect();
    let merged = partials.into_iter().fold(Partial::new(), Partial::merge);
    if merged.evaluated == 0 {
        return Err(Error::InvalidConfig("no sequence passes the element-count filter".into()));
    }

    let raw: Vec<(f64, u64)> = merged
        .counts
        .iter()
        .map(|(&k, &v)| (f64::from_bits(k), v))
        .collect();
    // Costs are non-negative, so bit order is numeric order.
    let mut bins: BTreeMap<u64, u64> = BTreeMap::new();
    for &(c, n) in &raw {
        *bins.entry((c / options.bin_width).floor() as u64).or_default() += n;
    }
    let histogram = bins
        .into_iter()
        .map(|(b, n)| HistogramBin {
            cost_bin: b as f64 * options.bin_width,
            relative_frequency: n as f64 / merged.evaluated as f64,
        })
        .collect();
    Ok(Landscape {
        len: p,
        evaluated: merged.evaluated,
        minimum: merged.minimum,
        maximum: raw.last().map_or(merged.minimum, |r| r.0),
        witnesses: merged.witnesses.iter().map(|&x| to_sequence(x, p)).collect(),
        raw,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autocorr::{autocorrelation, TargetKind};
    use crate::layout::cyclic_shift;
    use crate::optimizer::cost_ad;

    fn target(v: &[f64]) -> AutocorrTarget {
        AutocorrTarget {
            values: v.to_vec(),
            kind: TargetKind::Planted,
            element_count: 0,
            imag_residue: 0.0,
        }
    }

    #[test]
    fn brute_examples() {
        assert_eq!(brute_autocorrelation(&ThinningSequence::filled(4)).values(), &[4, 4, 4, 4]);
        assert_eq!(brute_autocorrelation(&ThinningSequence::empty(4)).values(), &[0, 0, 0, 0]);
        for p in 1..=8usize {
            for x in 0..1u64 << p {
                let a = to_sequence(x, p);
                assert_eq!(brute_autocorrelation(&a), autocorrelation(&a));
            }
        }
    }

    #[test]
    fn four_slot_landscape() {
        let g = GridSpec::half_wavelength(4).unwrap();
        let l = exhaust_landscape(&g, &Objective::Autocorrelation(target(&[3.0, 2.0, 2.0, 2.0])), &ExhaustOptions::default())
            .unwrap();
        assert_eq!(l.minimum, 0.0);
        assert_eq!(l.evaluated, 16);
        let plant = ThinningSequence::from_bits(&[1, 1, 0, 1]);
        let mut shifts: Vec<_> = (0..4).map(|s| cyclic_shift(&plant, s).unwrap()).collect();
        shifts.sort_by_key(|s| s.to_u8());
        let mut w = l.witnesses.clone();
        w.sort_by_key(|s| s.to_u8());
        assert_eq!(w, shifts);
        let total: f64 = l.histogram.iter().map(|b| b.relative_frequency).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn difference_set_landscape() {
        // (7, 3, 1) difference set: γ = [3, 1, 1, 1, 1, 1, 1].
        let g = GridSpec::half_wavelength(7).unwrap();
        let mut t = vec![1.0; 7];
        t[0] = 3.0;
        let l = exhaust_landscape(&g, &Objective::Autocorrelation(target(&t)), &ExhaustOptions::default()).unwrap();
        assert_eq!(l.minimum, 0.0);
        // The set {0, 1, 3} and its mirror {0, 1, 5}, with all shifts.
        assert_eq!(l.witnesses.len(), 14);
        let ds = ThinningSequence::from_bits(&[1, 1, 0, 1, 0, 0, 0]);
        for w in &l.witnesses {
            assert_eq!(autocorrelation(w), autocorrelation(&ds));
        }
    }

    #[test]
    fn agrees_with_cost_function_and_is_shift_closed() {
        let g = GridSpec::half_wavelength(10).unwrap();
        let t = target(&[5.0, 2.0, 3.0, 2.5, 2.0, 1.0, 2.0, 2.5, 3.0, 2.0]);
        let l = exhaust_landscape(
            &g,
            &Objective::Autocorrelation(t.clone()),
            &ExhaustOptions { n_filter: Some(5), ..Default::default() },
        )
        .unwrap();
        assert_eq!(l.evaluated, 252);
        for w in &l.witnesses {
            assert_eq!(cost_ad(w, &t).unwrap(), l.minimum);
            for s in 0..10 {
                assert!(l.witnesses.contains(&cyclic_shift(w, s).unwrap()));
            }
        }
    }

    #[test]
    fn quantiles() {
        let l = Landscape {
            len: 3,
            evaluated: 8,
            minimum: 0.0,
            maximum: 3.0,
            witnesses: Vec::new(),
            raw: vec![(0.0, 2), (1.0, 3), (2.0, 2), (3.0, 1)],
            histogram: Vec::new(),
        };
        assert_eq!(l.quantile(0.01), 0.0);
        assert_eq!(l.quantile(0.25), 0.0);
        assert_eq!(l.quantile(0.3), 1.0);
        assert_eq!(l.quantile(1.0), 3.0);
        assert_eq!(l.quantile_count(0.25), 0);
        assert_eq!(l.quantile_count(0.5), 3);
        assert_eq!(l.near_optimal_count(0.5), 3);
    }

    #[test]
    fn caps() {
        let g = GridSpec::half_wavelength(17).unwrap();
        let mask = Mask::benchmark_flat(&g, -15.0).unwrap();
        assert!(matches!(
            exhaust_landscape(&g, &Objective::pattern(mask), &ExhaustOptions::default()),
            Err(Error::EnumerationCap { len: 17, cap: 16 })
        ));
        let g = GridSpec::half_wavelength(30).unwrap();
        assert!(matches!(
            exhaust_landscape(&g, &Objective::Autocorrelation(target(&[0.0; 30])), &ExhaustOptions::default()),
            Err(Error::EnumerationCap { len: 30, cap: 24 })
        ));
    }

    #[test]
    fn pattern_landscape_small() {
        let g = GridSpec::half_wavelength(8).unwrap();
        let mask = Mask::benchmark_flat(&g, -10.0).unwrap();
        let l = exhaust_landscape(&g, &Objective::pattern(mask.clone()), &ExhaustOptions::default()).unwrap();
        assert_eq!(l.evaluated, 255);
        let ev = DenseEvaluator::new(&g, &mask, MetricMode::Step).unwrap();
        for w in &l.witnesses {
            assert_eq!(ev.mask_error(w).unwrap(), l.minimum);
        }
    }
}
