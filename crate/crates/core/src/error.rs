use thiserror::Error;

/// Everything that can go wrong while loading, transforming or analyzing a design.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("gate type `{0}` is defined more than once")]
    DuplicateGateType(String),
    #[error("complement of `{0}` is `{1}`, but `{1}` does not point back")]
    AsymmetricComplement(String, String),
    #[error("`{0}` and `{1}` are declared complements but their truth tables are not inverse")]
    NotComplementary(String, String),
    #[error("library has no usable default {0} cell")]
    MissingDefaultCell(&'static str),
    #[error("gate type `{0}`: {1}")]
    InvalidGateType(String, String),

    #[error("unknown gate type `{0}`")]
    UnknownGateType(String),
    #[error("net `{0}` has more than one driver")]
    MultipleDrivers(String),
    #[error("net `{0}` is used but never driven")]
    UndefinedNet(String),
    #[error("combinational cycle through net `{0}`")]
    CombinationalCycle(String),
    #[error("name `{0}` is used more than once")]
    DuplicateName(String),
    #[error("unknown net `{0}`")]
    UnknownNet(String),
    #[error("unknown cell `{0}`")]
    UnknownCell(String),

    #[error("stimulus vector has {got} values, netlist has {expected} inputs")]
    VectorWidth { expected: usize, got: usize },
    #[error("key has {got} bits, design expects {expected}")]
    KeyLength { expected: usize, got: usize },
    #[error("exhaustive check over {0} inputs exceeds the 2^20 limit")]
    InputSpaceTooLarge(usize),
    #[error("designs do not share interface signal `{0}`")]
    InterfaceMismatch(String),

    #[error("cell `{0}` of type `{1}` cannot be locked")]
    UnsupportedType(String, String),
    #[error("cell `{0}` is already locked")]
    AlreadyLocked(String),
    #[error("keychain needs {expected} key-select nets, found {got}")]
    SelectCountMismatch { expected: usize, got: usize },
    #[error("asset `{0}` not found")]
    UnknownAsset(String),
    #[error("asset `{0}` is not a flip-flop")]
    NotAnFf(String),
    #[error("locked design is not equivalent to the original: {0}")]
    EquivalenceFailed(String),

    #[error("design needs {needed} sites but floorplan has {total}")]
    Overflow { needed: u64, total: u64 },
    #[error("invalid target utilization {0}")]
    InvalidTarget(f64),

    #[error("cell `{0}` of type `{1}` has no decomposition into BENCH primitives")]
    NoDecomposition(String, String),
    #[error("no key MUXes found")]
    NoKeyMuxes,
    #[error("key index {0} out of range")]
    InvalidKeyIndex(usize),
    #[error("prediction set has {got} entries, key has {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Parse and format errors, as opposed to semantic ones.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::DuplicateGateType(_)
                | Error::AsymmetricComplement(..)
                | Error::NotComplementary(..)
                | Error::MissingDefaultCell(_)
                | Error::InvalidGateType(..)
                | Error::UnknownGateType(_)
                | Error::MultipleDrivers(_)
                | Error::UndefinedNet(_)
                | Error::CombinationalCycle(_)
                | Error::DuplicateName(_)
        )
    }

    /// Failures of a self-check that should never happen on valid input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::EquivalenceFailed(_))
    }
}
