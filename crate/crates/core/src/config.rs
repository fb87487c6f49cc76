//! Run configuration files for the command-line front end.
//!
//! Every file is TOML with a closed schema: unknown keys are rejected and the
//! error names them. Relative paths resolve against the config file's
//! directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{GridSpec, ThinningSequence};
use crate::mask::{Mask, MaskSegment};
use crate::optimizer::{GaConfig, Mode, Problem};
use crate::pattern::MetricMode;

fn default_run_id() -> String {
    "run".into()
}

fn default_spacing() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub slots: usize,
    /// Slot spacing in wavelengths.
    #[serde(default = "default_spacing")]
    pub spacing: f64,
}

impl GridConfig {
    pub fn spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.slots, self.spacing)
            .map_err(|e| Error::InvalidConfig(format!("grid: {e}")))
    }
}

/// Mask source: a file, a named preset, or inline segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MaskConfig {
    File { path: PathBuf },
    /// Flat sidelobe ceiling outside `|u| < 1/(P·Δz)`.
    Flat { sll_db: f64 },
    Tapered { near_db: f64, far_db: f64, steps: usize },
    Irregular,
    IrregularType2,
    Unconstrained,
    Segments { segments: Vec<MaskSegment> },
}

impl MaskConfig {
    pub fn build(&self, grid: &GridSpec, base: &Path) -> Result<Mask> {
        match self {
            MaskConfig::File { path } => Mask::load(base.join(path)),
            MaskConfig::Flat { sll_db } => Mask::benchmark_flat(grid, *sll_db),
            MaskConfig::Tapered { near_db, far_db, steps } => Mask::tapered(grid, *near_db, *far_db, *steps),
            MaskConfig::Irregular => Mask::irregular(grid),
            MaskConfig::IrregularType2 => Mask::irregular_type2(grid),
            MaskConfig::Unconstrained => Ok(Mask::unconstrained()),
            MaskConfig::Segments { segments } => Mask::new(segments.clone()),
        }
    }

    /// Same mask family with a different flat level.
    fn with_sll(&self, sll_db: f64) -> Result<Self> {
        match self {
            MaskConfig::Flat { .. } => Ok(MaskConfig::Flat { sll_db }),
            _ => Err(Error::InvalidConfig(
                "sweep.axis = \"sll\" requires mask.kind = \"flat\"".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisOptions {
    /// Element count `N`; required for `me-ad`.
    pub elements: Option<usize>,
    pub metric: MetricMode,
    pub constraint_grid_size: Option<usize>,
    pub afpa_best_effort: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            elements: None,
            metric: MetricMode::Step,
            constraint_grid_size: None,
            afpa_best_effort: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesizeConfig {
    #[serde(default = "default_run_id")]
    pub run_id: String,
    /// Output directory, relative to the working directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub mode: Mode,
    pub grid: GridConfig,
    pub mask: MaskConfig,
    #[serde(default)]
    pub synthesis: SynthesisOptions,
    #[serde(default)]
    pub ga: GaConfig,
}

impl SynthesizeConfig {
    pub fn validate(&self) -> Result<()> {
        validate_run_id(&self.run_id)?;
        let grid = self.grid.spec()?;
        self.ga
            .validate(grid.num_slots())
            .map_err(|e| Error::InvalidConfig(format!("ga: {e}")))?;
        match (self.mode, self.synthesis.elements) {
            (Mode::MeAd | Mode::Pd, None) => Err(Error::InvalidConfig(format!(
                "synthesis.elements is required for mode {}",
                self.mode
            ))),
            (_, Some(n)) if n == 0 || n > grid.num_slots() => Err(Error::InvalidConfig(format!(
                "synthesis.elements = {n} must lie in 1..={}",
                grid.num_slots()
            ))),
            _ => Ok(()),
        }
    }

    pub fn problem(&self, base: &Path) -> Result<Problem> {
        let grid = self.grid.spec()?;
        problem(grid, self.mask.build(&grid, base)?, &self.synthesis)
    }
}

fn problem(grid: GridSpec, mask: Mask, options: &SynthesisOptions) -> Result<Problem> {
    let mut p = Problem::new(grid, mask).with_metric(options.metric);
    p.constraint_grid_size = options.constraint_grid_size;
    p.afpa_best_effort = options.afpa_best_effort;
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Flat-mask sidelobe level in dB.
    Sll,
    /// Number of grid slots.
    Aperture,
}

/// How `N` is chosen at each sweep point when it is not fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementRule {
    /// `me-ad` takes the mask rule, `fpe-ad` and `pd` the auxiliary-array rule.
    #[default]
    Natural,
    /// `N` from the sampled mask (see [`crate::mask::consistent_element_count`]).
    Mask,
    /// `N` from the rounded auxiliary array.
    Afpa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub modes: Vec<Mode>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub element_rule: ElementRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_run_id")]
    pub run_id: String,
    /// Output directory, relative to the working directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub grid: GridConfig,
    pub mask: MaskConfig,
    pub sweep: SweepSpec,
    #[serde(default)]
    pub synthesis: SynthesisOptions,
    #[serde(default)]
    pub ga: GaConfig,
}

/// One point of a sweep: the axis value and its problem.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub problem: Problem,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        validate_run_id(&self.run_id)?;
        let s = &self.sweep;
        if s.values.is_empty() {
            return Err(Error::InvalidConfig("sweep.values is empty".into()));
        }
        if s.modes.is_empty() {
            return Err(Error::InvalidConfig("sweep.modes is empty".into()));
        }
        if s.seeds.is_empty() {
            return Err(Error::InvalidConfig("sweep.seeds is empty".into()));
        }
        if s.axis == SweepAxis::Aperture
            && s.values.iter().any(|v| !(v.fract() == 0.0 && *v >= 1.0))
        {
            return Err(Error::InvalidConfig(
                "sweep.values must be positive integers for the aperture axis".into(),
            ));
        }
        if s.axis == SweepAxis::Sll {
            self.mask.with_sll(0.0)?;
        }
        let grid = self.grid.spec()?;
        let sizes: Vec<usize> = match s.axis {
            SweepAxis::Sll => vec![grid.num_slots()],
            SweepAxis::Aperture => s.values.iter().map(|&v| v as usize).collect(),
        };
        for p in sizes {
            self.ga
                .validate(p)
                .map_err(|e| Error::InvalidConfig(format!("ga: {e}")))?;
            if let Some(n) = self.synthesis.elements.filter(|&n| n == 0 || n > p) {
                return Err(Error::InvalidConfig(format!(
                    "synthesis.elements = {n} must lie in 1..={p}"
                )));
            }
        }
        Ok(())
    }

    pub fn points(&self, base: &Path) -> Result<Vec<SweepPoint>> {
        let grid = self.grid.spec()?;
        self.sweep
            .values
            .iter()
            .map(|&value| {
                let (grid, mask) = match self.sweep.axis {
                    SweepAxis::Sll => (grid, self.mask.with_sll(value)?),
                    SweepAxis::Aperture => (
                        GridSpec::new(value as usize, grid.spacing())
                            .map_err(|e| Error::InvalidConfig(format!("sweep.values: {e}")))?,
                        self.mask.clone(),
                    ),
                };
                let mask = mask.build(&grid, base)?;
                Ok(SweepPoint {
                    value,
                    problem: problem(grid, mask, &self.synthesis)?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LandscapeKind {
    Pd,
    Ad,
}

/// Target used for the autocorrelation landscape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetConfig {
    /// Autocorrelation of the sampled mask, scaled by `N²`.
    MaskEquality { elements: usize },
    /// Autocorrelation of the auxiliary array; `N` defaults to its rounding.
    FeasiblePattern {
        #[serde(default)]
        elements: Option<usize>,
    },
    /// Autocorrelation of a given layout.
    Planted { sequence: String },
    /// Autocorrelation of the first optimum of the pattern landscape.
    PdOptimum,
}

fn default_landscapes() -> Vec<LandscapeKind> {
    vec![LandscapeKind::Pd, LandscapeKind::Ad]
}

fn default_bin_width() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExhaustSpec {
    #[serde(default = "default_landscapes")]
    pub landscapes: Vec<LandscapeKind>,
    pub target: Option<TargetConfig>,
    #[serde(default)]
    pub n_filter: Option<usize>,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    #[serde(default)]
    pub progress: bool,
}

impl Default for ExhaustSpec {
    fn default() -> Self {
        Self {
            landscapes: default_landscapes(),
            target: None,
            n_filter: None,
            bin_width: default_bin_width(),
            progress: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExhaustConfig {
    #[serde(default = "default_run_id")]
    pub run_id: String,
    /// Output directory, relative to the working directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub grid: GridConfig,
    #[serde(default = "default_exhaust_mask")]
    pub mask: MaskConfig,
    #[serde(default)]
    pub synthesis: SynthesisOptions,
    #[serde(default)]
    pub exhaust: ExhaustSpec,
}

fn default_exhaust_mask() -> MaskConfig {
    MaskConfig::Unconstrained
}

impl ExhaustConfig {
    pub fn validate(&self) -> Result<()> {
        validate_run_id(&self.run_id)?;
        self.grid.spec()?;
        let e = &self.exhaust;
        if e.landscapes.is_empty() {
            return Err(Error::InvalidConfig("exhaust.landscapes is empty".into()));
        }
        if !(e.bin_width > 0.0) {
            return Err(Error::InvalidConfig("exhaust.bin_width must be positive".into()));
        }
        if e.landscapes.contains(&LandscapeKind::Ad) && e.target.is_none() {
            return Err(Error::InvalidConfig(
                "exhaust.target is required for the ad landscape".into(),
            ));
        }
        if let Some(TargetConfig::Planted { sequence }) = &e.target {
            let seq = ThinningSequence::parse(sequence)
                .map_err(|err| Error::InvalidConfig(format!("exhaust.target.sequence: {err}")))?;
            if seq.len() != self.grid.slots {
                return Err(Error::InvalidConfig(format!(
                    "exhaust.target.sequence has {} slots, grid.slots is {}",
                    seq.len(),
                    self.grid.slots
                )));
            }
        }
        Ok(())
    }

    pub fn problem(&self, base: &Path) -> Result<Problem> {
        let grid = self.grid.spec()?;
        problem(grid, self.mask.build(&grid, base)?, &self.synthesis)
    }
}

fn validate_run_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !id.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "run_id {id:?} must be non-empty and use only letters, digits, '-', '_' or '.'"
        )))
    }
}

/// Parses a config, reporting the failing key and position.
pub fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let at = e
            .span()
            .map(|s| {
                let line = text[..s.start].matches('\n').count() + 1;
                format!(" (line {line})")
            })
            .unwrap_or_default();
        Error::InvalidConfig(format!("{}{at}", e.message().trim_end()))
    })
}

/// Reads and parses a config file; returns it with the directory that
/// relative paths resolve against.
pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(T, PathBuf)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((parse(&text)?, base))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FPE: &str = r#"
        run_id = "fpe24"
        mode = "fpe-ad"
        [grid]
        slots = 24
        [mask]
        kind = "flat"
        sll_db = -15.0
        [ga]
        seed = 3
    "#;

    #[test]
    fn parses_with_defaults() {
        let c: SynthesizeConfig = parse(FPE).unwrap();
        c.validate().unwrap();
        assert_eq!(c.grid.spacing, 0.5);
        assert_eq!(c.ga.population_size, 20);
        assert_eq!(c.ga.seed, 3);
        assert_eq!(c.synthesis.metric, MetricMode::Step);
        let p = c.problem(Path::new(".")).unwrap();
        assert_eq!(p.grid.num_slots(), 24);
    }

    #[test]
    fn unknown_key_is_named() {
        let text = FPE.replace("seed = 3", "seed = 3\npopulaton_size = 5");
        let err = parse::<SynthesizeConfig>(&text).unwrap_err().to_string();
        assert!(err.contains("populaton_size"), "{err}");
        let text = FPE.replace("slots = 24", "slots = 24\nspaceing = 0.5");
        let err = parse::<SynthesizeConfig>(&text).unwrap_err().to_string();
        assert!(err.contains("spaceing"), "{err}");
    }

    #[test]
    fn element_count_rules() {
        let me: SynthesizeConfig = parse(&FPE.replace("fpe-ad", "me-ad")).unwrap();
        let err = me.validate().unwrap_err().to_string();
        assert!(err.contains("synthesis.elements"), "{err}");
        let text = format!("{}\n[synthesis]\nelements = 30\n", FPE.replace("[ga]\n        seed = 3", ""));
        let c: SynthesizeConfig = parse(&text).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn sweep_points() {
        let c: SweepConfig = parse(
            r#"
            [grid]
            slots = 24
            [mask]
            kind = "flat"
            sll_db = -15.0
            [sweep]
            axis = "sll"
            values = [-10.0, -20.0]
            modes = ["me-ad", "fpe-ad"]
            seeds = [0, 1]
            "#,
        )
        .unwrap();
        c.validate().unwrap();
        let pts = c.points(Path::new(".")).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].problem.mask.segments()[0].level_db, -20.0);

        let mut a = c.clone();
        a.sweep.axis = SweepAxis::Aperture;
        a.sweep.values = vec![16.0, 32.0];
        a.validate().unwrap();
        let pts = a.points(Path::new(".")).unwrap();
        assert_eq!(pts[1].problem.grid.num_slots(), 32);
        a.sweep.values = vec![16.5];
        assert!(a.validate().is_err());
    }

    #[test]
    fn exhaust_needs_a_target_for_ad() {
        let c: ExhaustConfig = parse("[grid]\nslots = 8\n").unwrap();
        assert!(c.validate().is_err());
        let c: ExhaustConfig = parse(
            "[grid]\nslots = 4\n[exhaust]\nlandscapes = [\"ad\"]\ntarget = { kind = \"planted\", sequence = \"1101\" }\n",
        )
        .unwrap();
        c.validate().unwrap();
    }

    #[test]
    fn run_id_is_a_plain_name() {
        let c: SynthesizeConfig = parse(&FPE.replace("fpe24", "../x")).unwrap();
        assert!(c.validate().is_err());
    }
}
