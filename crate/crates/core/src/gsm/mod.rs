//! GSM radio-interface operations as pipeline stages.
//!
//! Bit vectors hold one bit per byte (`0` or `1`). PCM is 16-bit signed
//! little-endian mono at 8 kHz; IQ samples are little-endian `f32` pairs.

mod channel;
mod cipher;
mod gmsk;
mod interleave;
mod ops;
mod speech;

pub use channel::{channel_decode, channel_encode, conv_encode, crc3, viterbi, Decoded, Layout, LAYOUT};
pub use cipher::{cipher, keystream, Lfsr};
pub use gmsk::{gmsk_demodulate, gmsk_modulate, iq_from_bytes, iq_to_bytes, Gmsk, Iq};
pub use interleave::{deinterleave, interleave};
pub use ops::{
    build_downlink, build_round_trip, build_uplink, downlink_config, round_trip_config, stage_from_config,
    uplink_config, OpEnv, OPS,
};
pub use speech::{speech_decode, speech_encode};

use thiserror::Error;

pub const FRAME_SAMPLES: usize = 160;
pub const SPEECH_BITS: usize = 260;
pub const CODED_BITS: usize = 456;
pub const BURSTS: usize = 8;
pub const BURST_BITS: usize = 57;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GsmError {
    #[error("expected {expected} items, got {got}")]
    WrongFrameLength { expected: usize, got: usize },
    #[error("expected {BURSTS} bursts of {BURST_BITS} bits, got {0} bursts")]
    WrongBurstCount(usize),
    #[error("frame fails its parity check after decoding")]
    UncorrectableFrame,
    #[error("keystream of {have} bits for a {need}-bit burst")]
    ShortKeystream { need: usize, have: usize },
    #[error("oversampling must be at least 4, got {0}")]
    BadOversampling(usize),
    #[error("empty bit vector")]
    Empty,
}

pub(crate) fn check_len<T>(v: &[T], expected: usize) -> Result<(), GsmError> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(GsmError::WrongFrameLength { expected, got: v.len() })
    }
}

/// `width` bits of `v`, most significant first.
pub(crate) fn push_bits(out: &mut Vec<u8>, v: u32, width: u32) {
    for k in (0..width).rev() {
        out.push(((v >> k) & 1) as u8);
    }
}

pub(crate) fn read_bits(bits: &[u8]) -> u32 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as u32)
}
