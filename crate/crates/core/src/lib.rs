//! Mutual-information-maximizing quantized belief propagation (MIM-QBP) for
//! regular LDPC codes.

pub mod chanquant;
pub mod cn_design;
pub mod codec;
pub mod de;
pub mod dmc;
pub mod domain;
pub mod error;
pub mod sdq;
pub mod sim;
pub mod vn_design;

pub use error::{Error, Result};
