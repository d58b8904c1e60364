//! Runtime decoding: Tanner graphs, alist files, the fixed-point MIM-QBP
//! decoder and a floating-point BP baseline.

mod bp;
mod construct;
mod encode;
mod graph;
mod mimqbp;

pub use bp::{bp_check_update, decode_bp_float, BpDecoder};
pub use construct::peg_regular;
pub use encode::Encoder;
pub use graph::{parse_alist, TannerGraph};
pub use mimqbp::{decode_mim_qbp, quantize_channel_output, IterationTrace, MimQbpDecoder};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub hard_bits: Vec<u8>,
    pub iterations_used: usize,
    pub converged: bool,
}

impl DecodeResult {
    /// Errors against the all-zero codeword.
    pub fn bit_errors(&self) -> usize {
        self.hard_bits.iter().filter(|&&b| b != 0).count()
    }

    pub fn errors_against(&self, codeword: &[u8]) -> usize {
        self.hard_bits.iter().zip(codeword).filter(|(a, b)| a != b).count()
    }
}
