//! Synthesis of thinned isophoric linear arrays by matching the cyclic
//! autocorrelation of the element layout.
//!
//! A layout is a binary sequence over `P` equally spaced slots. The power
//! pattern sampled at `u_k = k/(P·Δz)` is the DFT of the layout's cyclic
//! autocorrelation, so a mask can be turned into an autocorrelation target
//! and matched directly, with every cyclic shift of a layout sharing one
//! cost. The final layout is the shift that best fits the mask.
//!
//! Entry points: [`optimizer::run_me_ad`], [`optimizer::run_fpe_ad`] and the
//! pattern-domain baseline [`pd::run_pd`]; [`oracle::exhaust_landscape`]
//! enumerates small apertures exhaustively.

pub mod afpa;
pub mod autocorr;
pub mod cli;
pub mod config;
pub mod element;
pub mod error;
pub mod io;
pub mod layout;
pub mod lp;
pub mod mask;
pub mod optimizer;
pub mod oracle;
pub mod pattern;
pub mod pd;

pub use error::{Error, Result};
