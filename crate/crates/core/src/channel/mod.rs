//! Flat-fading carrier-offset channel.

mod impair;
mod profile;

pub use impair::{
    apply_awgn, apply_awgn_at_power, apply_block_fading, apply_cfo_phase, apply_channel, carrier_phase, fading_gains,
    frequency_walk, ChannelTruth, EpochGrid,
};
pub use profile::{ChannelProfile, Fading};
