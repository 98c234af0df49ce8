//! Link-quality measurement and per-trial aggregation.

mod link;
mod record;

pub use link::{
    error_and_reference_energy, evm, evm_from_energy, goodput, sinr_estimate, sinr_from_energy, throughput,
};
pub use record::{
    aggregate, aggregate_log, improvement_table, mean_goodput, read_frame_log, read_trials_csv, write_frame_log,
    write_improvement_csv, write_trials_csv, FrameRecord, Improvement, TrialResult,
};
