//! Genetic search in the autocorrelation domain, followed by the cyclic-shift
//! selection of the final layout.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::afpa::{
    default_constraint_grid_size, feasible_samples, solve_afpa, solve_afpa_relaxed, AuxExcitations,
};
use crate::autocorr::{autocorrelation, target_fpe, target_me, AutocorrTarget};
use crate::error::{Error, Result};
use crate::layout::{cyclic_shift, GridSpec, ThinningSequence};
use crate::mask::{sample_mask, Mask};
use crate::pattern::{DenseEvaluator, MetricMode};

/// RNG stream used for population initialization.
const INIT_STREAM: u64 = 0;
/// RNG stream used by selection, crossover, mutation and repair.
const EVOLVE_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_iterations: usize,
    pub stagnation_window: usize,
    pub stagnation_threshold: f64,
    pub crossover_probability: f64,
    /// Per-bit flip probability; `None` means `1 / P`.
    pub mutation_probability: Option<f64>,
    pub tournament_size: usize,
    pub elite_count: usize,
    pub seed: u64,
    /// Element count every individual is repaired to. When unset, the
    /// synthesis drivers use the requested `N` unless `enforce_count` is off.
    pub fixed_n: Option<usize>,
    pub enforce_count: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            max_iterations: 200,
            stagnation_window: 10,
            stagnation_threshold: 1e-9,
            crossover_probability: 0.9,
            mutation_probability: None,
            tournament_size: 3,
            elite_count: 1,
            seed: 0,
            fixed_n: None,
            enforce_count: true,
        }
    }
}

impl GaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.population_size == 0 {
            return bad("population_size must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if self.stagnation_window == 0 {
            return bad("stagnation_window must be positive");
        }
        if !(self.stagnation_threshold >= 0.0) {
            return bad("stagnation_threshold must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.crossover_probability) {
            return bad("crossover_probability must lie in [0, 1]");
        }
        if let Some(m) = self.mutation_probability {
            if !(0.0..=1.0).contains(&m) {
                return bad("mutation_probability must lie in [0, 1]");
            }
        }
        if self.tournament_size < 2 {
            return bad("tournament_size must be at least 2");
        }
        if self.elite_count >= self.population_size {
            return bad("elite_count must be smaller than population_size");
        }
        if let Some(n) = self.fixed_n {
            if n > len {
                return Err(Error::ElementCount { count: n, len });
            }
        }
        Ok(())
    }

    fn mutation_rate(&self, len: usize) -> f64 {
        self.mutation_probability.unwrap_or(1.0 / len as f64)
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    fn for_count(&self, n: usize) -> Self {
        let mut c = self.clone();
        if c.fixed_n.is_none() && c.enforce_count {
            c.fixed_n = Some(n);
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    MaxIterations,
    Stagnation,
    /// The best cost reached zero, which no individual can improve on.
    ZeroCost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    /// Best cost found up to and including each iteration.
    pub best_costs: Vec<f64>,
    /// Iteration at which the search stopped (1-based).
    pub converged_at: usize,
    pub termination: Termination,
    pub evaluations: usize,
    #[serde(skip)]
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    MeAd,
    FpeAd,
    Pd,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::MeAd => "me-ad",
            Mode::FpeAd => "fpe-ad",
            Mode::Pd => "pd",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub mode: Mode,
    pub parent: ThinningSequence,
    pub layout: ThinningSequence,
    pub shift: usize,
    /// Final GA cost of the parent (Φ for the AD modes, ξ for PD).
    pub cost: f64,
    pub mask_error: f64,
    pub parent_mask_error: f64,
    pub sidelobe_level: Option<f64>,
    pub parent_sidelobe_level: Option<f64>,
    pub element_count: usize,
    pub target: Option<AutocorrTarget>,
    pub excitations: Option<AuxExcitations>,
    pub trace: RunTrace,
}

/// Grid, mask and evaluation settings shared by every synthesis mode.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: GridSpec,
    pub mask: Mask,
    pub metric: MetricMode,
    /// Constraint points for the auxiliary array; `None` uses the default.
    pub constraint_grid_size: Option<usize>,
    /// Continue with the closest auxiliary array when the mask cannot be met.
    pub afpa_best_effort: bool,
}

impl Problem {
    pub fn new(grid: GridSpec, mask: Mask) -> Self {
        Self {
            grid,
            mask,
            metric: MetricMode::default(),
            constraint_grid_size: None,
            afpa_best_effort: false,
        }
    }

    pub fn with_metric(mut self, metric: MetricMode) -> Self {
        self.metric = metric;
        self
    }

    pub fn evaluator(&self) -> Result<DenseEvaluator> {
        DenseEvaluator::new(&self.grid, &self.mask, self.metric)
    }

    pub fn auxiliary_array(&self) -> Result<AuxExcitations> {
        let size = self
            .constraint_grid_size
            .unwrap_or_else(|| default_constraint_grid_size(&self.grid));
        if self.afpa_best_effort {
            solve_afpa_relaxed(&self.mask, &self.grid, size)
        } else {
            solve_afpa(&self.mask, &self.grid, size)
        }
    }
}

/// `Φ = (1/P) Σ_s (γ_s − γ*_s)²`.
pub fn cost_ad(seq: &ThinningSequence, target: &AutocorrTarget) -> Result<f64> {
    if seq.len() != target.len() {
        return Err(Error::LengthMismatch {
            left: seq.len(),
            right: target.len(),
        });
    }
    Ok(cost_ad_unchecked(seq, &target.values))
}

fn cost_ad_unchecked(seq: &ThinningSequence, target: &[f64]) -> f64 {
    let gamma = autocorrelation(seq);
    let sum: f64 = gamma
        .values()
        .iter()
        .zip(target)
        .map(|(&g, &t)| (g as f64 - t).powi(2))
        .sum();
    sum / seq.len() as f64
}

/// Flips random bits until exactly `n` are set.
fn repair(seq: &mut ThinningSequence, n: usize, rng: &mut ChaCha8Rng) {
    let mut count = seq.count();
    while count != n {
        let want = count < n;
        let candidates: Vec<usize> = (0..seq.len()).filter(|&p| seq.get(p) != want).collect();
        let p = candidates[rng.random_range(0..candidates.len())];
        seq.set(p, want);
        count = if want { count + 1 } else { count - 1 };
    }
}

fn random_individual(len: usize, config: &GaConfig, rng: &mut ChaCha8Rng) -> ThinningSequence {
    let mut seq = ThinningSequence::new((0..len).map(|_| rng.random_bool(0.5)).collect());
    if let Some(n) = config.fixed_n {
        repair(&mut seq, n, rng);
    }
    seq
}

/// Uniformly random population, repaired to `fixed_n` ones when set.
pub fn initialize_me(config: &GaConfig, len: usize) -> Result<Vec<ThinningSequence>> {
    config.validate(len)?;
    let mut rng = config.rng(INIT_STREAM);
    Ok((0..config.population_size)
        .map(|_| random_individual(len, config, &mut rng))
        .collect())
}

/// Individual `q < P` is the rounded auxiliary excitation read from slot `q`
/// onwards; further individuals are random.
pub fn initialize_fpe(config: &GaConfig, w: &AuxExcitations) -> Result<Vec<ThinningSequence>> {
    let weights = w.weights();
    let len = weights.len();
    config.validate(len)?;
    let mut rng = config.rng(INIT_STREAM);
    Ok((0..config.population_size)
        .map(|q| {
            if q < len {
                let mut seq = ThinningSequence::new(
                    (0..len).map(|p| weights[(p + q) % len] >= 0.5).collect(),
                );
                if let Some(n) = config.fixed_n {
                    repair(&mut seq, n, &mut rng);
                }
                seq
            } else {
                random_individual(len, config, &mut rng)
            }
        })
        .collect())
}

fn tournament(costs: &[f64], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut best = rng.random_range(0..costs.len());
    for _ in 1..size {
        let c = rng.random_range(0..costs.len());
        if costs[c] < costs[best] || (costs[c] == costs[best] && c < best) {
            best = c;
        }
    }
    best
}

/// Runs the GA from `population` and returns the best individual ever seen.
pub fn evolve<F>(
    mut population: Vec<ThinningSequence>,
    cost: F,
    config: &GaConfig,
) -> Result<(ThinningSequence, RunTrace)>
where
    F: Fn(&ThinningSequence) -> f64 + Sync,
{
    let start = Instant::now();
    let len = population.first().map(|s| s.len()).ok_or_else(|| {
        Error::InvalidConfig("population is empty".into())
    })?;
    config.validate(len)?;
    let q = population.len();
    let mutation = config.mutation_rate(len);
    let mut rng = config.rng(EVOLVE_STREAM);

    let mut best: Option<(ThinningSequence, f64)> = None;
    let mut history: Vec<f64> = Vec::with_capacity(config.max_iterations);
    let mut evaluations = 0;
    let mut termination = Termination::MaxIterations;

    for l in 1..=config.max_iterations {
        let costs: Vec<f64> = population.par_iter().map(&cost).collect();
        evaluations += q;
        for (seq, &c) in population.iter().zip(&costs) {
            if best.as_ref().is_none_or(|(_, b)| c < *b) {
                best = Some((seq.clone(), c));
            }
        }
        let best_cost = best.as_ref().expect("population is non-empty").1;
        history.push(best_cost);

        if best_cost == 0.0 {
            termination = Termination::ZeroCost;
            break;
        }
        let window = config.stagnation_window;
        if l > window {
            let mean = history[l - 1 - window..l - 1].iter().sum::<f64>() / window as f64;
            if (best_cost - mean).abs() <= config.stagnation_threshold {
                termination = Termination::Stagnation;
                break;
            }
        }
        if l == config.max_iterations {
            break;
        }

        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
        let mut next: Vec<ThinningSequence> =
            order[..config.elite_count].iter().map(|&i| population[i].clone()).collect();
        while next.len() < q {
            let a = &population[tournament(&costs, config.tournament_size, &mut rng)];
            let b = &population[tournament(&costs, config.tournament_size, &mut rng)];
            let (mut c1, mut c2) = (a.clone(), b.clone());
            if len > 1 && rng.random_bool(config.crossover_probability) {
                let cut = rng.random_range(1..len);
                c1.bits_mut()[cut..].copy_from_slice(&b.bits()[cut..]);
                c2.bits_mut()[cut..].copy_from_slice(&a.bits()[cut..]);
            }
            for child in [c1, c2] {
                if next.len() == q {
                    break;
                }
                let mut child = child;
                for bit in child.bits_mut() {
                    if rng.random_bool(mutation) {
                        *bit = !*bit;
                    }
                }
                if let Some(n) = config.fixed_n {
                    repair(&mut child, n, &mut rng);
                }
                next.push(child);
            }
        }
        population = next;
    }

    let (seq, _) = best.expect("at least one iteration");
    Ok((
        seq,
        RunTrace {
            converged_at: history.len(),
            best_costs: history,
            termination,
            evaluations,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Mask errors of every cyclic shift of a parent and the best of them.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftScan {
    pub layout: ThinningSequence,
    pub shift: usize,
    pub mask_error: f64,
    /// `ξ` of the shift by `σ`, for `σ = 0..P`.
    pub errors: Vec<f64>,
}

/// Evaluates all `P` cyclic shifts on the dense grid; the smallest shift
/// wins ties.
pub fn post_ga_cyclic_shift(parent: &ThinningSequence, mask: &Mask, grid: &GridSpec) -> Result<ShiftScan> {
    post_ga_cyclic_shift_with(parent, &DenseEvaluator::new(grid, mask, MetricMode::default())?)
}

pub fn post_ga_cyclic_shift_with(parent: &ThinningSequence, evaluator: &DenseEvaluator) -> Result<ShiftScan> {
    let shifts = (0..parent.len())
        .map(|s| cyclic_shift(parent, s))
        .collect::<Result<Vec<_>>>()?;
    let errors = evaluator.mask_errors(&shifts)?;
    let mut shift = 0;
    for (s, &e) in errors.iter().enumerate() {
        if e < errors[shift] {
            shift = s;
        }
    }
    Ok(ShiftScan {
        layout: shifts[shift].clone(),
        shift,
        mask_error: errors[shift],
        errors,
    })
}

fn sidelobe(evaluator: &DenseEvaluator, seq: &ThinningSequence) -> Result<Option<f64>> {
    match evaluator.sidelobe_level(seq) {
        Ok(v) => Ok(Some(v)),
        Err(Error::NoSidelobeRegion) => Ok(None),
        Err(e) => Err(e),
    }
}

fn run_ad(
    problem: &Problem,
    mode: Mode,
    target: AutocorrTarget,
    population: Vec<ThinningSequence>,
    config: &GaConfig,
    excitations: Option<AuxExcitations>,
) -> Result<SynthesisResult> {
    let start = Instant::now();
    let values = target.values.clone();
    let (parent, mut trace) = evolve(population, |s| cost_ad_unchecked(s, &values), config)?;
    let evaluator = problem.evaluator()?;
    let scan = post_ga_cyclic_shift_with(&parent, &evaluator)?;
    trace.wall_seconds = start.elapsed().as_secs_f64();
    Ok(SynthesisResult {
        mode,
        cost: cost_ad_unchecked(&parent, &target.values),
        parent_mask_error: scan.errors[0],
        mask_error: scan.mask_error,
        sidelobe_level: sidelobe(&evaluator, &scan.layout)?,
        parent_sidelobe_level: sidelobe(&evaluator, &parent)?,
        element_count: scan.layout.count(),
        parent,
        layout: scan.layout,
        shift: scan.shift,
        target: Some(target),
        excitations,
        trace,
    })
}

/// Synthesis against the autocorrelation of the sampled mask itself.
pub fn run_me_ad(problem: &Problem, n: usize, config: &GaConfig) -> Result<SynthesisResult> {
    let p = problem.grid.num_slots();
    if n == 0 || n > p {
        return Err(Error::ElementCount { count: n, len: p });
    }
    let config = config.for_count(n);
    let samples = sample_mask(&problem.mask, &problem.grid)?;
    let target = target_me(&samples, n);
    let population = initialize_me(&config, p)?;
    run_ad(problem, Mode::MeAd, target, population, &config, None)
}

/// Default element count for the feasible-pattern mode: the weights of the
/// auxiliary array that round to one.
pub fn default_fpe_count(w: &AuxExcitations) -> usize {
    w.weights().iter().filter(|&&x| x >= 0.5).count()
}

/// Synthesis against the autocorrelation of a mask-compliant fully populated
/// array. `n = None` takes the count from the rounded auxiliary excitation.
pub fn run_fpe_ad(problem: &Problem, n: Option<usize>, config: &GaConfig) -> Result<SynthesisResult> {
    let start = Instant::now();
    let p = problem.grid.num_slots();
    let w = problem.auxiliary_array()?;
    let n = n.unwrap_or_else(|| default_fpe_count(&w)).max(1);
    if n > p {
        return Err(Error::ElementCount { count: n, len: p });
    }
    let config = config.for_count(n);
    let samples = feasible_samples(&w, &problem.grid)?;
    let target = target_fpe(&samples, n);
    let population = initialize_fpe(&config, &w)?;
    let mut result = run_ad(problem, Mode::FpeAd, target, population, &config, Some(w))?;
    result.trace.wall_seconds = start.elapsed().as_secs_f64();
    Ok(result)
}
