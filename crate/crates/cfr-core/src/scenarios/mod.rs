//! Worked-example drivers: the two-user multiple-access region, the
//! two-way relay with unequal powers, the MIMO integer-forcing receiver,
//! and the near-singular-channel scaling experiment.

pub mod dioph;
pub mod mac;
pub mod mimo;
pub mod twr;

pub use dioph::{
    dioph_lower_bound, dioph_scaling_experiment, regular_if_rate_on_dioph_channel, DiophConfig,
    DiophExperiment, DiophWitness, QChoice,
};
pub use mac::{mac_region, MacRegion, DEFAULT_MAC_FUNCTIONS};
pub use mimo::{
    mimo_if_rate_modified, mimo_if_rate_regular, mimo_sweep, search_modified_if,
    search_regular_if, MimoConfig, MimoSearchResult, MimoSweepRow,
};
pub use twr::{
    twr_best_sum, twr_modified_rates, twr_region, twr_regular_rates, TwrBestSum, TwrConfig,
    TwrGrid, TwrRegion, DEFAULT_TWR_FUNCTIONS,
};
