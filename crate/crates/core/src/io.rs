//! CSV and JSON writers for synthesis artifacts.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! identical results give byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::autocorr::{autocorrelation, AutocorrTarget};
use crate::error::{Error, Result};
use crate::layout::ThinningSequence;
use crate::mask::{linear_to_db, Mask};
use crate::optimizer::RunTrace;
use crate::oracle::Landscape;
use crate::pattern::PatternCurve;

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

/// `u,value_db,mask_db` with the pattern normalized to its peak.
pub fn write_pattern_csv(path: impl AsRef<Path>, curve: &PatternCurve, mask: &Mask) -> Result<()> {
    let mut out = create(path.as_ref())?;
    writeln!(out, "u,value_db,mask_db")?;
    for (&u, &v) in curve.u.iter().zip(&curve.values) {
        writeln!(out, "{u},{},{}", linear_to_db(v), mask.level_db(u)?)?;
    }
    out.flush()?;
    Ok(())
}

/// `s,target,parent,final`: the target against the autocorrelation of the
/// GA parent and of the selected shift (identical by construction).
pub fn write_autocorr_csv(
    path: impl AsRef<Path>,
    target: &AutocorrTarget,
    parent: &ThinningSequence,
    layout: &ThinningSequence,
) -> Result<()> {
    let a = autocorrelation(parent);
    let b = autocorrelation(layout);
    if a.len() != target.len() || b.len() != target.len() {
        return Err(Error::LengthMismatch {
            left: target.len(),
            right: a.len().max(b.len()),
        });
    }
    let mut out = create(path.as_ref())?;
    writeln!(out, "s,target,parent,final")?;
    for s in 0..target.len() {
        writeln!(out, "{s},{},{},{}", target.values[s], a.values()[s], b.values()[s])?;
    }
    out.flush()?;
    Ok(())
}

/// `iteration,best_cost`, one row per GA iteration.
pub fn write_trace_csv(path: impl AsRef<Path>, trace: &RunTrace) -> Result<()> {
    let mut out = create(path.as_ref())?;
    writeln!(out, "iteration,best_cost")?;
    for (i, c) in trace.best_costs.iter().enumerate() {
        writeln!(out, "{},{c}", i + 1)?;
    }
    out.flush()?;
    Ok(())
}

/// `cost_bin,relative_frequency`; `cost_bin` is the lower bin edge.
pub fn write_histogram_csv(path: impl AsRef<Path>, landscape: &Landscape) -> Result<()> {
    let mut out = create(path.as_ref())?;
    writeln!(out, "cost_bin,relative_frequency")?;
    for bin in &landscape.histogram {
        writeln!(out, "{},{}", bin.cost_bin, bin.relative_frequency)?;
    }
    out.flush()?;
    Ok(())
}

/// `cost,count`: every distinct cost value, for rebinning elsewhere.
pub fn write_raw_costs_csv(path: impl AsRef<Path>, landscape: &Landscape) -> Result<()> {
    let mut out = create(path.as_ref())?;
    writeln!(out, "cost,count")?;
    for (c, n) in &landscape.raw {
        writeln!(out, "{c},{n}")?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut out = create(path.as_ref())?;
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
