//! Exact counting, asymptotic formulas and Monte Carlo verification for the
//! number of k-colourings of sparse random graphs.
//!
//! The crate is organised in layers:
//!
//! * [`graph`] samples the random (multi)graph ensembles and computes the
//!   structural observables on them (colour densities, overlaps, short-cycle
//!   census, balance buckets).
//! * [`exact`] counts colourings exactly and evaluates exact finite-n
//!   expectations. It is the oracle layer for everything else.
//! * [`asymptotics`] holds the closed-form limits: Poisson parameters,
//!   exponent functions, saddle-point constants and Gaussian lattice sums.
//! * [`limit_law`] samples the limiting log-fluctuation variable `W`.
//! * [`second_moment`] maximises the pair exponent over uniform-margin
//!   overlap matrices.
//! * [`harness`] wires all of the above into reproducible experiments that
//!   emit JSONL run records and CSV summaries.
//!
//! Data-parallel loops go through [`par`]; with the `parallel` feature
//! (default) they run on rayon, otherwise sequentially. Results never depend
//! on the number of threads.

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod graph;
pub mod harness;
pub mod limit_law;
pub mod par;
pub mod rng;
pub mod second_moment;

pub use error::{Error, Result};
