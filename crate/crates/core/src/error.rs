use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("frame size {0} must be even, at least 4, with an even half-size")]
    InvalidFrameSize(usize),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("imaginary residue {ratio:e} of output norm exceeds tolerance; basis is not real")]
    ImaginaryResidue { ratio: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("tap list is empty")]
    EmptyTaps,
    #[error("invalid tap: {0}")]
    InvalidTap(String),
    #[error("modem index {index} out of range for {n_plm} modems")]
    ModemOutOfRange { index: usize, n_plm: usize },
    #[error("frame size {frame_size} is not divisible by {divisor}")]
    Indivisible { frame_size: usize, divisor: usize },
    #[error("cyclic prefix length {cp} must be shorter than frame size {frame_size}")]
    CyclicPrefixTooLong { cp: usize, frame_size: usize },
    #[error("echo delay {delay:e} s exceeds the cap of {cap:e} s")]
    DelayCapExceeded { delay: f64, cap: f64 },
    #[error("spectrum is not Hermitian-symmetric at bin {0}")]
    NotHermitian(usize),
    #[error("{n_plm} modems exceed the {max} usable subcarrier combs")]
    TooManyModems { n_plm: usize, max: usize },
    #[error("CDMA requires a power-of-two number of modems, got {0}")]
    NotPowerOfTwo(usize),
    #[error("reference impulse response is all zeros")]
    ZeroTruth,
    #[error("window is all zeros")]
    ZeroWindow,
    #[error("interpolation factor must be at least 2, got {0}")]
    InvalidFactor(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
