use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("SHA1 round index {0} outside 0..80")]
    RoundOutOfRange(usize),

    #[error("HMAC key of {0} bytes exceeds the 64-byte block")]
    KeyTooLong(usize),
    #[error("passphrase must be 8..=63 bytes, got {0}")]
    PassphraseLength(usize),
    #[error("SSID must be at most 32 bytes, got {0}")]
    SsidTooLong(usize),
    #[error("PBKDF2 block index must be 1 or 2, got {0}")]
    BlockIndex(u32),
    #[error("field `{field}` must be {expected} bytes, got {actual}")]
    FieldLength {
        field: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("capture field `{field}`: {reason}")]
    CaptureField { field: String, reason: String },
    #[error("capture line {line}: {reason}")]
    CaptureSyntax { line: usize, reason: String },
    #[error("MIC field at offset {offset} does not fit a {len}-byte frame")]
    MicOffset { offset: usize, len: usize },

    #[error("invalid charset: {0}")]
    Charset(String),
    #[error("password length must be at least 1")]
    ZeroLength,
    #[error("password {0:?} is not in the space")]
    NotInSpace(String),
    #[error("candidate index {idx} out of range (space holds {count})")]
    IndexOutOfRange { idx: u64, count: u64 },
    #[error("keyspace of {symbols}^{length} overflows 64-bit offsets")]
    SpaceOverflow { symbols: usize, length: usize },
    #[error("block size must be at least 1")]
    ZeroBlockSize,

    #[error("invalid device spec: {0}")]
    DeviceSpec(String),
    #[error("cluster has no devices")]
    EmptyCluster,
    #[error("rate must be positive")]
    ZeroRate,
    #[error("device table line {line}: {reason}")]
    DeviceTable { line: usize, reason: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown block {0}")]
    UnknownBlock(u64),
    #[error("block {id}: cannot {action} a block that is {status}")]
    IllegalTransition {
        id: u64,
        action: &'static str,
        status: &'static str,
    },
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("block {id} failed {attempts} times")]
    BlockFailed { id: u64, attempts: u32 },

    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("invalid SSID pattern: {0}")]
    Pattern(String),
}
