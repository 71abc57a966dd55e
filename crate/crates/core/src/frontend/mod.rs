//! Time-domain conditioning and time/frequency transport.

pub mod hpf;
pub mod stft;
pub mod window;

pub use hpf::{design_hpf, HpfState};
pub use stft::{
    assemble_frame, assemble_frame_into, forward_transform, inverse_transform_ola,
    ForwardTransform, Frame, Framer, OlaState, Spectrum,
};
pub use window::{make_window, WindowKind, WolaWindows};
