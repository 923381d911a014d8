//! Quantum one-time pad, key generation and the client's correction frame.

mod frame;
mod key;

pub use frame::{conjugate_frame, decrypt, decrypt_measurement, encrypt, CorrectionFrame, FrameSnapshot};
pub use key::{protocol1_keygen, KeySource, KeySourceMode, KeygenOutput, PadKey};
