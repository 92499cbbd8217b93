//! ε-balanced binary linear codes from free expander walks.
//!
//! A small-bias base code is lifted through a length-ℓ walk that takes every
//! step on a *different* expander, drawn from an ensemble whose signed
//! averages are all certified near-Ramanujan. The crate provides the whole
//! pipeline at desk scale:
//!
//! * [`spectra`] — dense vectors over `[n0]` with the normalized inner
//!   product, sign operators, projections, and power-iteration operator
//!   norms;
//! * [`basecode`] — an explicit field-powering small-bias code with
//!   exhaustive bias certification;
//! * [`ensemble`] — random regular multigraphs as rotation maps plus the
//!   all-signings spectral certificate;
//! * [`schedule`] — the walk schedule (every word in `[t]^κ`, repeated) and
//!   the asymptotic parameter calculator;
//! * [`lift`] — the walk lift itself: coordinate enumeration, streamed
//!   encoding, and bias both by brute force and by the matrix-product
//!   formula;
//! * [`analyzer`] — numerical verification of every inequality the
//!   construction's analysis rests on, assembled into serializable reports.
//!
//! Hot loops (certification, Monte Carlo sweeps, walk enumeration) are
//! data-parallel via rayon when the `parallel` feature is enabled (default)
//! and fall back to sequential execution otherwise. All parallel reductions
//! are order-fixed, so results are byte-identical across thread counts.

pub mod analyzer;
pub mod basecode;
pub mod ensemble;
pub mod error;
pub mod lift;
pub(crate) mod par;
pub mod rng;
pub mod schedule;
pub mod spectra;

pub use error::{Error, Result};
