//! Command-line front end: `synthesize`, `sweep` and `exhaust`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::autocorr::{target_fpe, target_me, AutocorrTarget};
use crate::config::{
    self, ElementRule, ExhaustConfig, LandscapeKind, SweepConfig, SynthesizeConfig, TargetConfig,
};
use crate::afpa::feasible_samples;
use crate::error::{Error, Result};
use crate::io;
use crate::layout::ThinningSequence;
use crate::mask::{consistent_element_count, sample_mask};
use crate::optimizer::{
    default_fpe_count, run_fpe_ad, run_me_ad, GaConfig, Mode, Problem, SynthesisResult, Termination,
};
use crate::oracle::{exhaust_landscape, ExhaustOptions, Landscape, Objective, AD_CAP, PD_CAP};
use crate::pd::run_pd;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INVALID_CONFIG: u8 = 2;
pub const EXIT_AFPA_INFEASIBLE: u8 = 3;
pub const EXIT_ENUMERATION_CAP: u8 = 4;

const DEFAULT_OUT: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "adthin", version, about = "Thinned linear array synthesis in the autocorrelation domain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one synthesis (me-ad, fpe-ad or pd) and write its artifacts.
    Synthesize(CommonArgs),
    /// Run a sweep over sidelobe level or aperture for several modes.
    Sweep(CommonArgs),
    /// Enumerate every layout of a small grid and write cost landscapes.
    Exhaust(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// GA seed (overrides the config; a sweep then uses this seed only).
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads, 0 = one per core.
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub threads: usize,
    /// Single-threaded run that also writes wall times.
    #[arg(long)]
    pub timing: bool,
}

/// Parses the process arguments and runs; for `main`.
pub fn main() -> ExitCode {
    run(Cli::parse())
}

pub fn run(cli: Cli) -> ExitCode {
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) | Error::InvalidMask(_) | Error::MaskGap(_) | Error::InvalidGrid(_) => {
            EXIT_INVALID_CONFIG
        }
        Error::AfpaInfeasible { .. } => EXIT_AFPA_INFEASIBLE,
        Error::EnumerationCap { .. } => EXIT_ENUMERATION_CAP,
        _ => EXIT_FAILURE,
    }
}

fn dispatch(command: &Command) -> Result<()> {
    let args = match command {
        Command::Synthesize(a) | Command::Sweep(a) | Command::Exhaust(a) => a,
    };
    let threads = if args.timing { 1 } else { args.threads };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    pool.install(|| match command {
        Command::Synthesize(a) => synthesize(a),
        Command::Sweep(a) => sweep(a),
        Command::Exhaust(a) => exhaust(a),
    })
}

fn out_dir(args: &CommonArgs, configured: &Option<PathBuf>) -> PathBuf {
    args.out
        .clone()
        .or_else(|| configured.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Runs one mode; `n` is required for `me-ad` and `pd`.
pub fn run_mode(problem: &Problem, mode: Mode, n: Option<usize>, ga: &GaConfig) -> Result<SynthesisResult> {
    let need = || Error::InvalidConfig(format!("an element count is required for mode {mode}"));
    match mode {
        Mode::MeAd => run_me_ad(problem, n.ok_or_else(need)?, ga),
        Mode::FpeAd => run_fpe_ad(problem, n, ga),
        Mode::Pd => run_pd(problem, n.ok_or_else(need)?, ga),
    }
}

/// Everything a synthesis run records about its final layout.
#[derive(Debug, Serialize)]
pub struct LayoutReport<'a> {
    pub run_id: &'a str,
    pub mode: Mode,
    pub slots: usize,
    pub elements: usize,
    pub layout: String,
    pub parent: String,
    pub shift: usize,
    pub cost: f64,
    pub mask_error: f64,
    pub parent_mask_error: f64,
    pub sidelobe_level_db: Option<f64>,
    pub parent_sidelobe_level_db: Option<f64>,
    pub sidelobe_scale: Option<f64>,
    pub termination: Termination,
    pub iterations: usize,
    pub evaluations: usize,
    pub config: &'a SynthesizeConfig,
}

fn synthesize(args: &CommonArgs) -> Result<()> {
    let (mut cfg, base): (SynthesizeConfig, _) = config::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.ga.seed = seed;
    }
    cfg.validate()?;
    let problem = cfg.problem(&base)?;
    let out = out_dir(args, &cfg.output_dir);
    let file = |suffix: &str| out.join(format!("{}.{suffix}", cfg.run_id));

    let start = Instant::now();
    let result = run_mode(&problem, cfg.mode, cfg.synthesis.elements, &cfg.ga)?;
    let wall = start.elapsed().as_secs_f64();

    let report = LayoutReport {
        run_id: &cfg.run_id,
        mode: result.mode,
        slots: result.layout.len(),
        elements: result.element_count,
        layout: result.layout.to_string(),
        parent: result.parent.to_string(),
        shift: result.shift,
        cost: result.cost,
        mask_error: result.mask_error,
        parent_mask_error: result.parent_mask_error,
        sidelobe_level_db: result.sidelobe_level,
        parent_sidelobe_level_db: result.parent_sidelobe_level,
        sidelobe_scale: result.excitations.as_ref().map(|w| w.sidelobe_scale()),
        termination: result.trace.termination,
        iterations: result.trace.converged_at,
        evaluations: result.trace.evaluations,
        config: &cfg,
    };
    io::write_json(file("layout.json"), &report)?;
    let curve = problem.evaluator()?.pattern(&result.layout)?;
    io::write_pattern_csv(file("pattern.csv"), &curve, &problem.mask)?;
    if let Some(target) = &result.target {
        io::write_autocorr_csv(file("autocorr.csv"), target, &result.parent, &result.layout)?;
    }
    io::write_trace_csv(file("trace.csv"), &result.trace)?;
    if let Some(w) = &result.excitations {
        w.write_csv(file("excitations.csv"))?;
    }
    if args.timing {
        io::write_json(file("timing.json"), &Timing { wall_seconds: wall, threads: 1 })?;
    }
    println!(
        "{} {}: N = {}, shift = {}, cost = {:.6e}, xi = {:.6e}, SLL = {}",
        cfg.run_id,
        result.mode,
        result.element_count,
        result.shift,
        result.cost,
        result.mask_error,
        fmt_db(result.sidelobe_level),
    );
    println!("wrote {}", out.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct Timing {
    wall_seconds: f64,
    threads: usize,
}

fn fmt_db(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.2} dB"))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// One synthesis inside a sweep.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub value: f64,
    pub mode: Mode,
    pub seed: u64,
    pub elements: Option<usize>,
    pub outcome: std::result::Result<SweepOutcome, String>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub mask_error: f64,
    pub sidelobe_level: Option<f64>,
    pub iterations: usize,
    pub cost: f64,
}

/// Element count for one mode at one sweep point.
pub fn sweep_elements(problem: &Problem, mode: Mode, fixed: Option<usize>, rule: ElementRule) -> Result<usize> {
    if let Some(n) = fixed {
        return Ok(n);
    }
    let rule = match (rule, mode) {
        (ElementRule::Natural, Mode::MeAd) => ElementRule::Mask,
        (ElementRule::Natural, _) => ElementRule::Afpa,
        (r, _) => r,
    };
    match rule {
        ElementRule::Natural => unreachable!("resolved above"),
        ElementRule::Mask => Ok(consistent_element_count(
            sample_mask(&problem.mask, &problem.grid)?.values(),
        )),
        ElementRule::Afpa => Ok(default_fpe_count(&problem.auxiliary_array()?)),
    }
}

/// Runs every (point, mode, seed) combination; failures are recorded.
pub fn run_sweep(cfg: &SweepConfig, base: &Path) -> Result<Vec<SweepRun>> {
    let mut runs = Vec::new();
    for point in cfg.points(base)? {
        for &mode in &cfg.sweep.modes {
            let n = sweep_elements(&point.problem, mode, cfg.synthesis.elements, cfg.sweep.element_rule);
            for &seed in &cfg.sweep.seeds {
                let ga = cfg.ga.clone().with_seed(seed);
                let start = Instant::now();
                let outcome = match &n {
                    Ok(n) => run_mode(&point.problem, mode, Some(*n), &ga)
                        .map(|r| SweepOutcome {
                            mask_error: r.mask_error,
                            sidelobe_level: r.sidelobe_level,
                            iterations: r.trace.converged_at,
                            cost: r.cost,
                        })
                        .map_err(|e| e.to_string()),
                    Err(e) => Err(e.to_string()),
                };
                runs.push(SweepRun {
                    value: point.value,
                    mode,
                    seed,
                    elements: n.as_ref().ok().copied(),
                    outcome,
                    wall_seconds: start.elapsed().as_secs_f64(),
                });
            }
        }
    }
    Ok(runs)
}

/// Best run (smallest `ξ`, then smallest seed) per point and mode.
pub fn best_runs(runs: &[SweepRun]) -> Vec<&SweepRun> {
    let mut best: Vec<&SweepRun> = Vec::new();
    for r in runs {
        match best.iter_mut().find(|b| b.value == r.value && b.mode == r.mode) {
            None => best.push(r),
            Some(b) => {
                let better = match (&r.outcome, &b.outcome) {
                    (Ok(x), Ok(y)) => x.mask_error < y.mask_error,
                    (Ok(_), Err(_)) => true,
                    _ => false,
                };
                if better {
                    *b = r;
                }
            }
        }
    }
    best
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn sweep(args: &CommonArgs) -> Result<()> {
    let (mut cfg, base): (SweepConfig, _) = config::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.sweep.seeds = vec![seed];
    }
    cfg.validate()?;
    let out = out_dir(args, &cfg.output_dir);
    let file = |suffix: &str| out.join(format!("{}.{suffix}", cfg.run_id));
    let runs = run_sweep(&cfg, &base)?;
    let axis = match cfg.sweep.axis {
        config::SweepAxis::Sll => "sll",
        config::SweepAxis::Aperture => "aperture",
    };

    let mut csv = String::from("axis,value,mode,elements,seed,xi_opt,sll_db,i_conv,cost,status\n");
    for r in &runs {
        csv += &run_row(axis, r);
    }
    write_text(&file("runs.csv"), &csv)?;

    let mut csv = String::from("axis,value,mode,elements,seed,xi_opt,sll_db,i_conv,cost,status\n");
    for r in best_runs(&runs) {
        csv += &run_row(axis, r);
    }
    write_text(&file("sweep.csv"), &csv)?;

    let mut csv = String::from("value,mode,seed,wall_seconds\n");
    for r in &runs {
        csv += &format!("{},{},{},{}\n", r.value, r.mode, r.seed, r.wall_seconds);
    }
    write_text(&file("timing.csv"), &csv)?;

    for b in best_runs(&runs) {
        let times: Vec<f64> = runs
            .iter()
            .filter(|r| r.value == b.value && r.mode == b.mode)
            .map(|r| r.wall_seconds)
            .collect();
        match &b.outcome {
            Ok(o) => println!(
                "{axis} = {}: {:<6} N = {:>3}  xi = {:.4e}  SLL = {}  median dt = {:.3} s",
                b.value,
                b.mode.to_string(),
                b.elements.unwrap_or(0),
                o.mask_error,
                fmt_db(o.sidelobe_level),
                median(times)
            ),
            Err(e) => println!("{axis} = {}: {:<6} failed: {e}", b.value, b.mode.to_string()),
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn run_row(axis: &str, r: &SweepRun) -> String {
    let n = r.elements.map_or_else(String::new, |n| n.to_string());
    match &r.outcome {
        Ok(o) => format!(
            "{axis},{},{},{n},{},{},{},{},{},ok\n",
            r.value,
            r.mode,
            r.seed,
            o.mask_error,
            fmt_opt(o.sidelobe_level),
            o.iterations,
            o.cost
        ),
        Err(e) => format!(
            "{axis},{},{},{n},{},,,,,\"{}\"\n",
            r.value,
            r.mode,
            r.seed,
            e.replace('"', "'")
        ),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct LandscapeSummary {
    objective: LandscapeKind,
    slots: usize,
    evaluated: u64,
    minimum: f64,
    maximum: f64,
    optimum_count: u64,
    witnesses: Vec<String>,
}

impl LandscapeSummary {
    fn new(objective: LandscapeKind, l: &Landscape) -> Self {
        Self {
            objective,
            slots: l.len,
            evaluated: l.evaluated,
            minimum: l.minimum,
            maximum: l.maximum,
            optimum_count: l.optimum_count(),
            witnesses: l.witnesses.iter().map(ToString::to_string).collect(),
        }
    }
}

fn ad_target(cfg: &ExhaustConfig, problem: &Problem, pd: Option<&Landscape>) -> Result<AutocorrTarget> {
    let target = cfg
        .exhaust
        .target
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("exhaust.target is required for the ad landscape".into()))?;
    match target {
        TargetConfig::MaskEquality { elements } => {
            Ok(target_me(&sample_mask(&problem.mask, &problem.grid)?, *elements))
        }
        TargetConfig::FeasiblePattern { elements } => {
            let w = problem.auxiliary_array()?;
            let n = elements.unwrap_or_else(|| default_fpe_count(&w));
            Ok(target_fpe(&feasible_samples(&w, &problem.grid)?, n))
        }
        TargetConfig::Planted { sequence } => Ok(AutocorrTarget::from_sequence(&ThinningSequence::parse(sequence)?)),
        TargetConfig::PdOptimum => {
            let l = pd.ok_or_else(|| Error::InvalidConfig("pd-optimum target needs the pd landscape".into()))?;
            let best = l
                .witnesses
                .first()
                .ok_or_else(|| Error::InvalidConfig("pattern landscape has no optimum".into()))?;
            Ok(AutocorrTarget::from_sequence(best))
        }
    }
}

fn exhaust(args: &CommonArgs) -> Result<()> {
    let (cfg, base): (ExhaustConfig, _) = config::load(&args.config)?;
    cfg.validate()?;
    let problem = cfg.problem(&base)?;
    let p = problem.grid.num_slots();
    let wants = |k| cfg.exhaust.landscapes.contains(&k);
    let needs_pd = wants(LandscapeKind::Pd) || matches!(cfg.exhaust.target, Some(TargetConfig::PdOptimum));
    if needs_pd && p > PD_CAP {
        return Err(Error::EnumerationCap { len: p, cap: PD_CAP });
    }
    if wants(LandscapeKind::Ad) && p > AD_CAP {
        return Err(Error::EnumerationCap { len: p, cap: AD_CAP });
    }
    let out = out_dir(args, &cfg.output_dir);
    let file = |suffix: &str| out.join(format!("{}.{suffix}", cfg.run_id));
    let options = ExhaustOptions {
        n_filter: cfg.exhaust.n_filter,
        bin_width: cfg.exhaust.bin_width,
        progress: cfg.exhaust.progress,
    };

    let pd = if needs_pd {
        let objective = Objective::Pattern {
            mask: problem.mask.clone(),
            metric: problem.metric,
        };
        Some(exhaust_landscape(&problem.grid, &objective, &options)?)
    } else {
        None
    };
    let mut outputs = Vec::new();
    if let Some(l) = pd.as_ref().filter(|_| wants(LandscapeKind::Pd)) {
        outputs.push((LandscapeKind::Pd, l.clone()));
    }
    if wants(LandscapeKind::Ad) {
        let target = ad_target(&cfg, &problem, pd.as_ref())?;
        let l = exhaust_landscape(&problem.grid, &Objective::Autocorrelation(target), &options)?;
        outputs.push((LandscapeKind::Ad, l));
    }
    for (kind, l) in &outputs {
        let tag = match kind {
            LandscapeKind::Pd => "pd",
            LandscapeKind::Ad => "ad",
        };
        io::write_histogram_csv(file(&format!("{tag}.histogram.csv")), l)?;
        io::write_raw_costs_csv(file(&format!("{tag}.costs.csv")), l)?;
        io::write_json(file(&format!("{tag}.witnesses.json")), &LandscapeSummary::new(*kind, l))?;
        println!(
            "{tag}: {} layouts, minimum {:.6e} reached by {}, maximum {:.6e}",
            l.evaluated,
            l.minimum,
            l.optimum_count(),
            l.maximum
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
