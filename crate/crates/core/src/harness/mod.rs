//! Experiment orchestration: payloads, burst trials, sweeps and dataset output.

mod iq;
mod payload;
mod sigmf;
mod sweep;
mod trial;

pub use iq::{read_cf32_le, write_cf32_le};
pub use payload::generate_payload;
pub use sigmf::{
    emit_sigmf, parse_sigmf, run_id, SigmfAnnotation, SigmfCapture, SigmfGlobal, SigmfRecord, SigmfSource, DATATYPE,
    REQUIRED_GLOBAL, SIGMF_VERSION,
};
pub use sweep::{run_sweep, Environment, NamedProfile, SweepSpec, SweepTask};
pub use trial::{frame_airtime, run_trial, transmit_frame, SimSettings, TrialOutput, TrialSpec};
