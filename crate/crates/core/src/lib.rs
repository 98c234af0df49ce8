pub mod channel;
pub mod error;
pub mod framing;
pub mod harness;
pub mod kv;
pub mod metrics;
pub mod seed;
pub mod sync;
pub mod waveform;

pub use error::{Error, Result};
