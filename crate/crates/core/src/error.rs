use thiserror::Error;

/// Errors raised by the synthesis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shift {shift} out of range for {len} slots")]
    ShiftOutOfRange { shift: usize, len: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("layout has no active elements")]
    EmptyLayout,
    #[error("invalid mask: {0}")]
    InvalidMask(String),
    #[error("mask does not cover u = {0}")]
    MaskGap(f64),
    #[error("invalid element pattern: {0}")]
    InvalidElementPattern(String),
    #[error("pattern grid does not cover the visible range [-1, 1]")]
    GridCoverage,
    #[error("mask main lobe covers the whole visible range")]
    NoSidelobeRegion,
    #[error(
        "auxiliary array is infeasible: best sidelobe scale {scale:.4} exceeds the mask by {excess_db:.2} dB"
    )]
    AfpaInfeasible { scale: f64, excess_db: f64 },
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("enumeration over {len} slots exceeds the cap of {cap}")]
    EnumerationCap { len: usize, cap: usize },
    #[error("element count {count} exceeds {len} slots")]
    ElementCount { count: usize, len: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
