//! Auxiliary fully-populated array: the symmetric real excitation that best
//! fits under a mask, and its pattern samples.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::GridSpec;
use crate::lp::{LinearProgram, WarmStart};
use crate::mask::{linear_to_db, Mask};
use crate::pattern::weighted_power;

/// Slack allowed on the sidelobe scale before a mask counts as violated.
pub const SCALE_TOL: f64 = 1e-9;
const MAX_REFINEMENTS: usize = 200;
/// Relative overshoot on the verification grid that triggers refinement.
const VIOLATION_TOL: f64 = 1e-8;
const VERIFY_FACTOR: usize = 10;

/// Excitations of the auxiliary array, symmetric and with unit peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxExcitations {
    weights: Vec<f64>,
    /// Smallest `s` such that `|AF(u)| ≤ s·√M(u)` outside the main lobe,
    /// with `AF(0) = 1`. Values above one mean the mask cannot be met.
    sidelobe_scale: f64,
}

impl AuxExcitations {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sidelobe_scale(&self) -> f64 {
        self.sidelobe_scale
    }

    pub fn compliant(&self) -> bool {
        self.sidelobe_scale <= 1.0 + SCALE_TOL
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            weights: vec![1.0; len],
            sidelobe_scale: 0.0,
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "p,weight")?;
        for (p, w) in self.weights.iter().enumerate() {
            writeln!(out, "{p},{w:.12}")?;
        }
        Ok(())
    }
}

/// Default constraint grid: ten points per slot over the visible range.
pub fn default_constraint_grid_size(grid: &GridSpec) -> usize {
    10 * grid.num_slots()
}

/// Solves for the auxiliary excitation; an unreachable mask is an error.
pub fn solve_afpa(mask: &Mask, grid: &GridSpec, constraint_grid_size: usize) -> Result<AuxExcitations> {
    let w = solve_afpa_relaxed(mask, grid, constraint_grid_size)?;
    if w.compliant() {
        Ok(w)
    } else {
        Err(Error::AfpaInfeasible {
            scale: w.sidelobe_scale,
            excess_db: 2.0 * linear_to_db(w.sidelobe_scale),
        })
    }
}

/// Like [`solve_afpa`] but returns the best achievable excitation even when
/// it overshoots the mask; check [`AuxExcitations::compliant`].
pub fn solve_afpa_relaxed(
    mask: &Mask,
    grid: &GridSpec,
    constraint_grid_size: usize,
) -> Result<AuxExcitations> {
    let (lo, hi) = mask.mainlobe();
    if !(lo <= 0.0 && 0.0 <= hi) {
        return Err(Error::InvalidMask("main lobe must contain u = 0".into()));
    }
    let basis = HalfBasis::new(grid);
    let folded = FoldedMask::new(mask);

    let size = constraint_grid_size.max(2);
    let mut constraint: Vec<f64> = (0..size)
        .map(|i| -1.0 + 2.0 * i as f64 / (size - 1) as f64)
        .chain(mask.breakpoints())
        .map(f64::abs)
        .collect();
    constraint.push(1.0);
    sort_dedup(&mut constraint);

    // Every constraint point plus a much finer grid must hold at the end;
    // the programs only ever see the points that were found to bind.
    let mut candidates: Vec<f64> = {
        let n = VERIFY_FACTOR * size.max(grid.num_slots());
        (0..=n).map(|i| i as f64 / n as f64).collect()
    };
    candidates.extend(&constraint);
    sort_dedup(&mut candidates);
    let candidates: Vec<(f64, Option<f64>)> =
        candidates.into_iter().map(|u| (u, folded.amplitude(u))).collect();

    let stride = (constraint.len() / (2 * basis.terms.len())).max(1);
    let mut active: Vec<f64> = constraint.iter().copied().step_by(stride).collect();
    active.extend(mask.breakpoints().into_iter().map(f64::abs));
    active.extend([0.0, 1.0]);
    let has_sidelobes = candidates.iter().any(|c| c.1.is_some());
    if has_sidelobes && !active.iter().any(|&u| folded.amplitude(u).is_some()) {
        active.extend(candidates.iter().find(|c| c.1.is_some()).map(|c| c.0));
    }
    sort_dedup(&mut active);

    let scale = if has_sidelobes {
        let (_, s) = exchange(&mut active, &candidates, |pts, warm| {
            let (v, s, next) = min_scale(&basis, &folded, pts, warm)?;
            Ok((v, s, s, next))
        }, &basis)?;
        s.max(0.0)
    } else {
        0.0
    };
    let bound = scale.max(1.0) * (1.0 + SCALE_TOL);
    let (v, _) = exchange(&mut active, &candidates, |pts, warm| {
        let (v, next) = max_broadside(&basis, &folded, pts, bound, warm)?;
        Ok((v, bound, bound, next))
    }, &basis)?;

    let mut weights = basis.expand(&v);
    let peak = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    weights.iter_mut().for_each(|w| *w /= peak);
    Ok(AuxExcitations {
        weights,
        sidelobe_scale: scale,
    })
}

/// `E(u_k; w) / E(0; w)` at the `P` sample directions.
pub fn feasible_samples(w: &AuxExcitations, grid: &GridSpec) -> Result<Vec<f64>> {
    if w.weights.len() != grid.num_slots() {
        return Err(Error::LengthMismatch {
            left: w.weights.len(),
            right: grid.num_slots(),
        });
    }
    let peak = weighted_power(&w.weights, grid, 0.0);
    if peak <= f64::MIN_POSITIVE {
        return Err(Error::InvalidConfig("auxiliary array factor vanishes at u = 0".into()));
    }
    Ok((0..grid.num_slots())
        .map(|k| weighted_power(&w.weights, grid, grid.sample_direction(k)) / peak)
        .collect())
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
}

/// Symmetric excitations written with one variable per mirrored pair (plus
/// the centre element for odd `P`), so the array factor is real and linear.
struct HalfBasis {
    /// Distance of each pair from the array centre, and its multiplicity.
    terms: Vec<(f64, f64)>,
    len: usize,
}

impl HalfBasis {
    fn new(grid: &GridSpec) -> Self {
        let p = grid.num_slots();
        let terms = (0..p.div_ceil(2))
            .map(|m| {
                let d = grid.position(p - 1 - m);
                let mult = if m == p - 1 - m { 1.0 } else { 2.0 };
                (d, mult)
            })
            .collect();
        Self { terms, len: p }
    }

    /// `mult·cos(2π d u)` for every term. The distances are evenly spaced,
    /// so the cosines follow from one rotation per term.
    fn row(&self, u: f64) -> Vec<f64> {
        let Some(&(d0, _)) = self.terms.first() else {
            return Vec::new();
        };
        let step = self.terms.get(1).map_or(0.0, |t| t.0 - d0);
        let (s0, c0) = (std::f64::consts::TAU * d0 * u).sin_cos();
        let (ds, dc) = (std::f64::consts::TAU * step * u).sin_cos();
        let (mut c, mut s) = (c0, s0);
        self.terms
            .iter()
            .map(|&(_, mult)| {
                let out = mult * c;
                (c, s) = (c * dc - s * ds, s * dc + c * ds);
                out
            })
            .collect()
    }

    fn af(&self, v: &[f64], u: f64) -> f64 {
        let Some(&(d0, _)) = self.terms.first() else {
            return 0.0;
        };
        let step = self.terms.get(1).map_or(0.0, |t| t.0 - d0);
        let (mut s, mut c) = (std::f64::consts::TAU * d0 * u).sin_cos();
        let (ds, dc) = (std::f64::consts::TAU * step * u).sin_cos();
        let mut sum = 0.0;
        for (&(_, mult), x) in self.terms.iter().zip(v) {
            sum += mult * c * x;
            (c, s) = (c * dc - s * ds, s * dc + c * ds);
        }
        sum
    }

    fn expand(&self, v: &[f64]) -> Vec<f64> {
        (0..self.len)
            .map(|p| v[p.min(self.len - 1 - p)])
            .collect()
    }
}

/// Mask folded onto `u ≥ 0` by taking the tighter of `M(u)` and `M(-u)`.
struct FoldedMask<'a> {
    mask: &'a Mask,
}

impl FoldedMask<'_> {
    fn new(mask: &Mask) -> FoldedMask<'_> {
        FoldedMask { mask }
    }

    /// `None` inside the main lobe, otherwise `√M(u)` relative to the peak.
    fn amplitude(&self, u: f64) -> Option<f64> {
        let m = self.mask;
        if m.in_mainlobe(u) && m.in_mainlobe(-u) {
            return None;
        }
        let db = m.level_db(u).unwrap_or(f64::NEG_INFINITY).min(m.level_db(-u).unwrap_or(f64::NEG_INFINITY));
        Some(10f64.powf((db - m.max_level_db()) / 20.0))
    }
}

/// Cutting-plane loop: solve on the active points, add the local maxima of
/// the violation ratio over `candidates`, repeat until nothing is violated.
/// New points are appended so each solve can start from the previous basis.
/// `solve` returns the half-weights, the sidelobe limit they were solved
/// for, and a value handed back to the caller.
fn exchange<F>(
    active: &mut Vec<f64>,
    candidates: &[(f64, Option<f64>)],
    solve: F,
    basis: &HalfBasis,
) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64], Option<&WarmStart>) -> Result<(Vec<f64>, f64, f64, WarmStart)>,
{
    let mut warm = None;
    for _ in 0..MAX_REFINEMENTS {
        let (v, limit, out, next) = solve(active, warm.as_ref())?;
        warm = Some(next);
        let mut extra = violations(basis, &v, limit, candidates);
        extra.retain(|u| !active.iter().any(|a| (a - u).abs() < 1e-13));
        if extra.is_empty() {
            return Ok((v, out));
        }
        active.extend(extra);
    }
    Err(Error::Lp("constraint refinement did not settle".into()))
}

/// Smallest sidelobe scale `s` with `|AF(u)| ≤ s·√M(u)` and `AF(0) = 1`.
fn min_scale(
    basis: &HalfBasis,
    mask: &FoldedMask,
    points: &[f64],
    warm: Option<&WarmStart>,
) -> Result<(Vec<f64>, f64, WarmStart)> {
    let h = basis.terms.len();
    let mut cost = vec![0.0; h + 1];
    cost[h] = 1.0;
    let mut lp = LinearProgram::minimize(cost);
    for &u in points {
        let row = basis.row(u);
        for sign in [1.0, -1.0] {
            let mut r: Vec<f64> = row.iter().map(|a| sign * a).collect();
            match mask.amplitude(u) {
                Some(a) => {
                    r.push(-a);
                    lp.less_eq(r, 0.0);
                }
                None => {
                    r.push(0.0);
                    lp.less_eq(r, 1.0);
                }
            }
        }
    }
    let mut eq = basis.row(0.0);
    eq.push(0.0);
    lp.equal(eq, 1.0);
    let (mut v, next) = lp.solve_warm(warm)?;
    let s = v.pop().expect("scale variable");
    Ok((v, s, next))
}

/// Largest `AF(0)` with `|w_p| ≤ 1` and `|AF(u)| ≤ bound·√M(u)·AF(0)`,
/// returned normalized to `AF(0) = 1`. Keeps the excitation as close to
/// uniform as the mask allows.
fn max_broadside(
    basis: &HalfBasis,
    mask: &FoldedMask,
    points: &[f64],
    bound: f64,
    warm: Option<&WarmStart>,
) -> Result<(Vec<f64>, WarmStart)> {
    let h = basis.terms.len();
    let broadside = basis.row(0.0);
    let mut lp = LinearProgram::minimize(broadside.iter().map(|a| -a).collect());
    for m in 0..h {
        for sign in [1.0, -1.0] {
            let mut r = vec![0.0; h];
            r[m] = sign;
            lp.less_eq(r, 1.0);
        }
    }
    for &u in points {
        let row = basis.row(u);
        let limit = mask.amplitude(u).map_or(1.0, |a| a * bound);
        for sign in [1.0, -1.0] {
            let r: Vec<f64> = row
                .iter()
                .zip(&broadside)
                .map(|(a, b)| sign * a - limit * b)
                .collect();
            lp.less_eq(r, 0.0);
        }
    }
    let (v, next) = lp.solve_warm(warm)?;
    let af0 = basis.af(&v, 0.0);
    if !(af0 > 0.0) {
        return Err(Error::Lp("auxiliary array has no broadside response".into()));
    }
    Ok((v.iter().map(|x| x / af0).collect(), next))
}

/// Local maxima of the constraint ratio that exceed the limit.
fn violations(basis: &HalfBasis, v: &[f64], limit: f64, points: &[(f64, Option<f64>)]) -> Vec<f64> {
    let ratio: Vec<f64> = points
        .iter()
        .map(|&(u, amp)| {
            let af = basis.af(v, u).abs();
            match amp {
                Some(a) => af / (a * limit),
                None => af,
            }
        })
        .collect();
    let tol = 1.0 + VIOLATION_TOL;
    (0..points.len())
        .filter(|&i| {
            ratio[i] > tol
                && (i == 0 || ratio[i] >= ratio[i - 1])
                && (i + 1 == points.len() || ratio[i] >= ratio[i + 1])
        })
        .map(|i| points[i].0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::sample_mask;
    use proptest::prelude::*;

    fn grid(p: usize) -> GridSpec {
        GridSpec::half_wavelength(p).unwrap()
    }

    #[test]
    fn unconstrained_mask_gives_uniform_weights() {
        for p in [8, 13, 24] {
            let g = grid(p);
            let w = solve_afpa(&Mask::unconstrained(), &g, default_constraint_grid_size(&g)).unwrap();
            for x in w.weights() {
                assert!((x - 1.0).abs() < 1e-12, "{:?}", w.weights());
            }
            let s = feasible_samples(&w, &g).unwrap();
            assert!((s[0] - 1.0).abs() < 1e-9);
            assert!(s[1..].iter().all(|x| x.abs() < 1e-9), "{s:?}");
        }
    }

    #[test]
    fn flat_mask_samples_stay_under_mask() {
        let g = grid(24);
        let mask = Mask::benchmark_flat(&g, -15.0).unwrap();
        let w = solve_afpa(&mask, &g, default_constraint_grid_size(&g)).unwrap();
        assert!(w.compliant());
        let e = feasible_samples(&w, &g).unwrap();
        let m = sample_mask(&mask, &g).unwrap();
        for (e, m) in e.iter().zip(m.values()) {
            assert!(*e <= m + 1e-9, "{e} > {m}");
        }
    }

    #[test]
    fn dense_feasibility_and_symmetry() {
        let g = grid(24);
        let mask = Mask::tapered(&g, -15.0, -25.0, 4).unwrap();
        let w = solve_afpa(&mask, &g, default_constraint_grid_size(&g)).unwrap();
        let ws = w.weights();
        for p in 0..24 {
            assert_eq!(ws[p], ws[23 - p]);
        }
        let top = ws.iter().cloned().fold(0.0, f64::max);
        assert!((top - 1.0).abs() < 1e-12);
        assert!(ws.iter().all(|x| x.abs() <= 1.0 + 1e-12));
        let peak = weighted_power(ws, &g, 0.0);
        let n = 103 * 24;
        for i in 0..=n {
            let u = -1.0 + 2.0 * i as f64 / n as f64;
            let e = weighted_power(ws, &g, u) / peak;
            assert!(e <= mask.level(u).unwrap() + 1e-6, "u={u} e={e}");
        }
    }

    #[test]
    fn impossible_mask_is_reported() {
        let g = grid(8);
        let mask = Mask::benchmark_flat(&g, -60.0).unwrap();
        match solve_afpa(&mask, &g, 80) {
            Err(Error::AfpaInfeasible { scale, .. }) => assert!(scale > 1.0),
            other => panic!("expected infeasibility, got {other:?}"),
        }
        let relaxed = solve_afpa_relaxed(&mask, &g, 80).unwrap();
        assert!(!relaxed.compliant());
    }

    #[test]
    fn doubling_the_constraint_grid_keeps_feasibility() {
        let g = grid(16);
        let mask = Mask::benchmark_flat(&g, -15.0).unwrap();
        for size in [40, 80, 160, 320] {
            assert!(solve_afpa(&mask, &g, size).is_ok(), "size {size}");
        }
    }

    #[test]
    fn csv_export() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        AuxExcitations::uniform(4).write_csv(&path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("p,weight"));
    }

    proptest! {
        #[test]
        fn samples_are_mirror_symmetric(half in prop::collection::vec(0.05f64..1.0, 2..12), odd in any::<bool>()) {
            let mut w: Vec<f64> = half.clone();
            if odd { w.push(0.7); }
            w.extend(half.iter().rev());
            let g = grid(w.len());
            let aux = AuxExcitations { weights: w, sidelobe_scale: 0.0 };
            let s = feasible_samples(&aux, &g).unwrap();
            prop_assert!((s[0] - 1.0).abs() < 1e-12);
            let p = s.len();
            for k in 1..p {
                prop_assert!((s[k] - s[p - k]).abs() < 1e-9);
            }
        }
    }
}
