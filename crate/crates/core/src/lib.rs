pub mod channel;
pub mod digital;
pub mod error;
mod fft;
pub mod harness;
pub mod linearize;
pub mod metrics;
pub mod oracle;
pub mod rf;
pub mod signal;

pub use error::{Error, Result};
