//! From-scratch implementation of an attention-enhanced stacked LSTM
//! classifier for coarse single-channel EEG score streams: synthetic data
//! generation, preprocessing, training with exact BPTT and Adam, a full
//! evaluation suite, and streaming class-to-command inference.

pub mod error;
pub mod eval;
pub mod network;
pub mod preprocess;
pub mod rng;
pub mod signal;
pub mod stream;
pub mod synth;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};
