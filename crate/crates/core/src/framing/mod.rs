//! Frame construction and deconstruction.
//!
//! A frame is a repeated training field for coarse CFO estimation, a Golay
//! preamble for frame detection, and a payload section in which `λ_p` pilot
//! blocks are interleaved with data segments. The data segments carry the
//! user bytes followed by a CRC-32.

mod config;
mod frame;
mod layout;

pub use config::{parse_modulation, FrameConfig, LAMBDA_CHOICES, MODULATION_CHOICES};
pub use frame::{
    assemble_frame, crc32, crc_attach, crc_check, decode_payload, parse_frame, FrameTables, PacketPayload, ParsedFrame,
};
pub use layout::{compute_layout, data_segment_lengths, FrameLayout};
