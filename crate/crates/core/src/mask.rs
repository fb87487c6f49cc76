//! Piecewise-constant pattern masks and their uniform samples.
//!
//! A mask is an ordered list of segments `(u_start, u_end, level_db)` that
//! tiles the visible range `[-1, 1]`. Levels are relative to the main-lobe
//! peak. At a breakpoint shared by two segments the lower of the two levels
//! applies, so an open main-lobe interval `|u| < h` is represented exactly.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::layout::GridSpec;

const EDGE_TOL: f64 = 1e-12;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskSegment {
    pub u_start: f64,
    pub u_end: f64,
    pub level_db: f64,
}

impl MaskSegment {
    pub fn new(u_start: f64, u_end: f64, level_db: f64) -> Self {
        Self {
            u_start,
            u_end,
            level_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MaskFile", into = "MaskFile")]
pub struct Mask {
    segments: Vec<MaskSegment>,
    max_level_db: f64,
    mainlobe: (f64, f64),
}

/// On-disk layout of a mask definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub segments: Vec<MaskSegment>,
}

impl TryFrom<MaskFile> for Mask {
    type Error = Error;

    fn try_from(file: MaskFile) -> Result<Self> {
        Mask::new(file.segments)
    }
}

impl From<Mask> for MaskFile {
    fn from(mask: Mask) -> Self {
        MaskFile {
            name: None,
            segments: mask.segments,
        }
    }
}

impl Mask {
    pub fn new(segments: Vec<MaskSegment>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| Error::InvalidMask("no segments".into()))?;
        let last = segments.last().unwrap();
        if (first.u_start + 1.0).abs() > EDGE_TOL {
            return Err(Error::MaskGap(-1.0));
        }
        if (last.u_end - 1.0).abs() > EDGE_TOL {
            return Err(Error::MaskGap(1.0));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.u_start.is_finite() && s.u_end.is_finite() && s.level_db.is_finite()) {
                return Err(Error::InvalidMask(format!("segment {i} has non-finite values")));
            }
            if s.u_end <= s.u_start {
                return Err(Error::InvalidMask(format!(
                    "segment {i} is empty or reversed ({} .. {})",
                    s.u_start, s.u_end
                )));
            }
        }
        for (i, pair) in segments.windows(2).enumerate() {
            let gap = pair[1].u_start - pair[0].u_end;
            if gap > EDGE_TOL {
                return Err(Error::MaskGap(pair[0].u_end));
            }
            if gap < -EDGE_TOL {
                return Err(Error::InvalidMask(format!(
                    "segments {i} and {} overlap",
                    i + 1
                )));
            }
        }

        let max_level_db = segments
            .iter()
            .map(|s| s.level_db)
            .fold(f64::NEG_INFINITY, f64::max);
        let peak: Vec<usize> = (0..segments.len())
            .filter(|&i| segments[i].level_db == max_level_db)
            .collect();
        if peak.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::InvalidMask(
                "the maximum level must be attained on a single contiguous region".into(),
            ));
        }
        let mainlobe = (
            segments[peak[0]].u_start,
            segments[*peak.last().unwrap()].u_end,
        );

        Ok(Self {
            segments,
            max_level_db,
            mainlobe,
        })
    }

    /// `0 dB` inside `|u| < half_width`, `sll_db` elsewhere.
    pub fn flat(half_width: f64, sll_db: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width < 1.0) {
            return Err(Error::InvalidMask(format!(
                "main-lobe half width must lie in (0, 1), got {half_width}"
            )));
        }
        if sll_db >= 0.0 {
            return Err(Error::InvalidMask("sidelobe level must be negative".into()));
        }
        Self::new(vec![
            MaskSegment::new(-1.0, -half_width, sll_db),
            MaskSegment::new(-half_width, half_width, 0.0),
            MaskSegment::new(half_width, 1.0, sll_db),
        ])
    }

    /// Main-lobe half width used by the benchmark masks: the first null of the
    /// fully populated aperture, `1 / (P Δz)`.
    pub fn benchmark_half_width(grid: &GridSpec) -> f64 {
        grid.sample_direction(1)
    }

    /// Flat sidelobe benchmark mask sized to the grid.
    pub fn benchmark_flat(grid: &GridSpec, sll_db: f64) -> Result<Self> {
        Self::flat(Self::benchmark_half_width(grid), sll_db)
    }

    /// A single `0 dB` segment: no sidelobe constraint anywhere.
    pub fn unconstrained() -> Self {
        Self::new(vec![MaskSegment::new(-1.0, 1.0, 0.0)]).unwrap()
    }

    /// Symmetric staircase that steps down from `near_db` next to the main
    /// lobe to `far_db` at the edge of the visible range.
    pub fn tapered(grid: &GridSpec, near_db: f64, far_db: f64, steps: usize) -> Result<Self> {
        if steps == 0 || near_db >= 0.0 || far_db >= 0.0 {
            return Err(Error::InvalidMask(
                "tapered mask needs at least one step and negative levels".into(),
            ));
        }
        let h = Self::benchmark_half_width(grid);
        let width = (1.0 - h) / steps as f64;
        let level = |i: usize| {
            if steps == 1 {
                near_db
            } else {
                near_db + (far_db - near_db) * i as f64 / (steps - 1) as f64
            }
        };
        let mut right = Vec::with_capacity(steps);
        for i in 0..steps {
            let end = if i + 1 == steps { 1.0 } else { h + width * (i + 1) as f64 };
            right.push(MaskSegment::new(h + width * i as f64, end, level(i)));
        }
        let mut segments: Vec<MaskSegment> = right
            .iter()
            .rev()
            .map(|s| MaskSegment::new(-s.u_end, -s.u_start, s.level_db))
            .collect();
        segments.push(MaskSegment::new(-h, h, 0.0));
        segments.extend(right);
        Self::new(segments)
    }

    /// Asymmetric mask with a shoulder region and a deep notch on one side.
    pub fn irregular(grid: &GridSpec) -> Result<Self> {
        let h = Self::benchmark_half_width(grid);
        Self::new(vec![
            MaskSegment::new(-1.0, -0.6, -16.0),
            MaskSegment::new(-0.6, -0.3, -20.0),
            MaskSegment::new(-0.3, -h, -14.0),
            MaskSegment::new(-h, h, 0.0),
            MaskSegment::new(h, 0.35, -15.0),
            MaskSegment::new(0.35, 0.7, -18.0),
            MaskSegment::new(0.7, 1.0, -14.0),
        ])
    }

    /// Second irregular profile, used for the aperture sweeps: a `-15 dB`
    /// shoulder next to the main lobe (below the uniform array's first
    /// sidelobe), then `-17` to `-22 dB` steps that differ left and right.
    pub fn irregular_type2(grid: &GridSpec) -> Result<Self> {
        let h = Self::benchmark_half_width(grid);
        let shoulder = (4.0 * h).min(0.4).max(h + 0.05);
        Self::new(vec![
            MaskSegment::new(-1.0, -0.75, -18.0),
            MaskSegment::new(-0.75, -0.45, -21.0),
            MaskSegment::new(-0.45, -shoulder, -17.0),
            MaskSegment::new(-shoulder, -h, -15.0),
            MaskSegment::new(-h, h, 0.0),
            MaskSegment::new(h, shoulder, -15.0),
            MaskSegment::new(shoulder, 0.5, -20.0),
            MaskSegment::new(0.5, 0.8, -22.0),
            MaskSegment::new(0.8, 1.0, -18.0),
        ])
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: MaskFile =
            toml::from_str(text).map_err(|e| Error::InvalidMask(e.message().to_string()))?;
        Self::try_from(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&MaskFile::from(self.clone())).expect("mask serializes")
    }

    pub fn segments(&self) -> &[MaskSegment] {
        &self.segments
    }

    pub fn max_level_db(&self) -> f64 {
        self.max_level_db
    }

    /// Extent of the main-lobe region (the segments at the maximum level).
    pub fn mainlobe(&self) -> (f64, f64) {
        self.mainlobe
    }

    /// Sorted interior breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.u_start).collect()
    }

    pub fn has_sidelobe_region(&self) -> bool {
        self.segments.iter().any(|s| s.level_db < self.max_level_db)
    }

    /// Mask level in dB at `u`.
    pub fn level_db(&self, u: f64) -> Result<f64> {
        if !(-1.0 - EDGE_TOL..=1.0 + EDGE_TOL).contains(&u) {
            return Err(Error::MaskGap(u));
        }
        let idx = self.segments.partition_point(|s| s.u_end < u);
        let seg = self.segments.get(idx).ok_or(Error::MaskGap(u))?;
        let mut level = seg.level_db;
        if (seg.u_end - u).abs() <= EDGE_TOL {
            if let Some(next) = self.segments.get(idx + 1) {
                level = level.min(next.level_db);
            }
        }
        if idx > 0 && (u - seg.u_start).abs() <= EDGE_TOL {
            level = level.min(self.segments[idx - 1].level_db);
        }
        Ok(level)
    }

    /// Mask level on a linear power scale at `u`.
    pub fn level(&self, u: f64) -> Result<f64> {
        self.level_db(u).map(db_to_linear)
    }

    /// Whether `u` lies in the main-lobe region. Breakpoints belong to the
    /// lower neighbouring level.
    pub fn in_mainlobe(&self, u: f64) -> bool {
        matches!(self.level_db(u), Ok(l) if l == self.max_level_db)
    }

    /// `∫ M(u) du` over `[-1, 1]` in linear scale, exact for the step profile.
    pub fn integral(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| (s.u_end - s.u_start) * db_to_linear(s.level_db))
            .sum()
    }
}

/// Maps `u` onto its alias in `[-1, 1)` (the sampled spectrum has period 2 in `u`).
pub fn wrap_direction(u: f64) -> f64 {
    let w = u - 2.0 * ((u + 1.0) / 2.0).floor();
    if w >= 1.0 {
        w - 2.0
    } else {
        w
    }
}

/// Mask values at the `P` pattern sample directions, on a linear scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSamples {
    values: Vec<f64>,
}

impl MaskSamples {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn sample_mask(mask: &Mask, grid: &GridSpec) -> Result<MaskSamples> {
    let values = (0..grid.num_slots())
        .map(|k| mask.level(wrap_direction(grid.sample_direction(k))))
        .collect::<Result<Vec<_>>>()?;
    Ok(MaskSamples { values })
}

/// Element count consistent with an equality target built from `samples`:
/// `N = 1 / μ_0 = P / Σ M_k`, rounded and clamped to `[1, P]`.
pub fn consistent_element_count(samples: &[f64]) -> usize {
    let p = samples.len();
    let total: f64 = samples.iter().sum();
    ((p as f64 / total).round() as usize).clamp(1, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid16() -> GridSpec {
        GridSpec::half_wavelength(16).unwrap()
    }

    #[test]
    fn flat_mask_samples() {
        let mask = Mask::benchmark_flat(&grid16(), -15.0).unwrap();
        let s = sample_mask(&mask, &grid16()).unwrap();
        let m = 10f64.powf(-1.5);
        assert_eq!(s.values()[0], 1.0);
        assert!((s.values()[1] - m).abs() < 1e-15);
        assert!((s.values()[8] - m).abs() < 1e-15);
        assert!(s.values()[1..].iter().all(|&v| (v - m).abs() < 1e-15));
    }

    #[test]
    fn literal_narrow_mask_samples_match() {
        // Main lobe |u| < 1/P gives the same samples as the benchmark mask.
        let g = grid16();
        let narrow = Mask::flat(1.0 / 16.0, -15.0).unwrap();
        let wide = Mask::benchmark_flat(&g, -15.0).unwrap();
        assert_eq!(sample_mask(&narrow, &g).unwrap(), sample_mask(&wide, &g).unwrap());
    }

    #[test]
    fn wrap_rule() {
        assert_eq!(wrap_direction(1.0), -1.0);
        assert_eq!(wrap_direction(0.5), 0.5);
        assert_eq!(wrap_direction(-1.0), -1.0);
        assert!((wrap_direction(1.25) + 0.75).abs() < 1e-15);
        assert!((wrap_direction(3.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn breakpoints_take_lower_level() {
        let mask = Mask::flat(0.125, -15.0).unwrap();
        assert_eq!(mask.level_db(0.125).unwrap(), -15.0);
        assert_eq!(mask.level_db(-0.125).unwrap(), -15.0);
        assert_eq!(mask.level_db(0.1).unwrap(), 0.0);
        assert!(!mask.in_mainlobe(0.125));
        assert!(mask.in_mainlobe(0.0));
        assert_eq!(mask.mainlobe(), (-0.125, 0.125));
        assert!(mask.level_db(1.5).is_err());
    }

    #[test]
    fn validation() {
        assert!(matches!(
            Mask::new(vec![
                MaskSegment::new(-1.0, 0.0, 0.0),
                MaskSegment::new(0.1, 1.0, -10.0)
            ]),
            Err(Error::MaskGap(_))
        ));
        assert!(matches!(
            Mask::new(vec![MaskSegment::new(-0.9, 1.0, 0.0)]),
            Err(Error::MaskGap(_))
        ));
        assert!(Mask::new(vec![
            MaskSegment::new(-1.0, 0.2, 0.0),
            MaskSegment::new(0.1, 1.0, -10.0)
        ])
        .is_err());
        // Two separate peak regions.
        assert!(Mask::new(vec![
            MaskSegment::new(-1.0, -0.5, 0.0),
            MaskSegment::new(-0.5, 0.5, -10.0),
            MaskSegment::new(0.5, 1.0, 0.0)
        ])
        .is_err());
        assert!(Mask::new(vec![]).is_err());
        assert!(Mask::flat(0.0, -10.0).is_err());
    }

    #[test]
    fn toml_roundtrip_and_strictness() {
        let mask = Mask::irregular(&GridSpec::half_wavelength(24).unwrap()).unwrap();
        let text = mask.to_toml_string();
        assert_eq!(Mask::from_toml_str(&text).unwrap(), mask);
        let bad = "[[segments]]\nu_start = -1.0\nu_end = 1.0\nlevel_db = 0.0\ncolour = 1\n";
        assert!(Mask::from_toml_str(bad).is_err());
        let gap = "[[segments]]\nu_start = -1.0\nu_end = 0.9\nlevel_db = 0.0\n";
        assert!(matches!(Mask::from_toml_str(gap), Err(Error::MaskGap(_))));
    }

    #[test]
    fn presets_are_valid() {
        for p in [16, 24, 32, 48, 64, 128] {
            let g = GridSpec::half_wavelength(p).unwrap();
            Mask::tapered(&g, -15.0, -25.0, 6).unwrap();
            Mask::irregular(&g).unwrap();
            let im2 = Mask::irregular_type2(&g).unwrap();
            assert_eq!(im2.mainlobe().1, 2.0 / p as f64);
        }
    }

    #[test]
    fn integral_of_flat_mask() {
        let mask = Mask::flat(0.125, -15.0).unwrap();
        let m = db_to_linear(-15.0);
        assert!((mask.integral() - (0.25 + 1.75 * m)).abs() < 1e-14);
    }

    #[test]
    fn consistent_count() {
        let g = GridSpec::half_wavelength(24).unwrap();
        let s = sample_mask(&Mask::benchmark_flat(&g, -15.0).unwrap(), &g).unwrap();
        assert_eq!(consistent_element_count(s.values()), 14);
        assert_eq!(consistent_element_count(&[1.0, 0.0, 0.0]), 3);
    }

    proptest! {
        #[test]
        fn refinement_does_not_change_samples(split in 0.01f64..0.99, seg in 0usize..3) {
            let g = GridSpec::half_wavelength(24).unwrap();
            let mask = Mask::benchmark_flat(&g, -12.0).unwrap();
            let mut segs = mask.segments().to_vec();
            let s = segs[seg];
            let cut = s.u_start + split * (s.u_end - s.u_start);
            segs[seg] = MaskSegment::new(s.u_start, cut, s.level_db);
            segs.insert(seg + 1, MaskSegment::new(cut, s.u_end, s.level_db));
            let refined = Mask::new(segs).unwrap();
            prop_assert_eq!(sample_mask(&refined, &g).unwrap(), sample_mask(&mask, &g).unwrap());
        }
    }
}
