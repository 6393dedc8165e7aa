//! Random graph ensembles and the structural observables defined on them.

mod balance;
mod census;
mod colouring;
mod multigraph;
mod params;
mod planted;
mod sample;

pub use balance::{bucket_index, is_balanced, BalanceSpec};
pub use census::{cycle_census, CycleCensus};
pub use colouring::{colour_density, overlap, ColourAssignment, ColourDensity, OverlapMatrix};
pub use multigraph::Multigraph;
pub use params::ModelParams;
pub use planted::{
    balance_augment, balance_augment_with, planted_edge_probability, sample_planted, sample_planted_with, strip_augment,
};
pub use sample::{sample_gnm_multi, sample_gnm_simple, GnmSampler, SIMPLE_REJECTION_LIMIT};
