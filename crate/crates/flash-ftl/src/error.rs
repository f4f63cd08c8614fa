use thiserror::Error;

/// Errors from device-level flash legality, allocation, and image parsing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlashError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("page {page} programmed twice without an intervening erase")]
    ProgramWithoutErase { page: usize },
    #[error("NOR program at offset {offset} would set bits 0→1 (erase required)")]
    NorBitSet { offset: usize },
    #[error("address range {offset}+{len} exceeds device capacity {capacity}")]
    OutOfRange {
        offset: usize,
        len: usize,
        capacity: usize,
    },
    #[error("device retains counters only; stored bytes are unavailable")]
    CountersOnly,
    #[error("no contiguous run of {needed} free clusters (largest is {largest})")]
    NoContiguousSpace { needed: usize, largest: usize },
    #[error("a file named `{0}` already exists")]
    DuplicateName(String),
    #[error("invalid 8.3 file name `{0}`")]
    BadName(String),
    #[error("file size {requested} rejected: {reason}")]
    BadFileSize { requested: u64, reason: String },
    #[error("root directory is full")]
    DirectoryFull,
    #[error("append of {len} bytes would pass the pre-allocated size ({cursor}/{size})")]
    AppendOverflow { len: usize, cursor: u64, size: u64 },
    #[error("file is closed; pre-allocated files cannot be reopened for append")]
    FileClosed,
    #[error("unknown file handle")]
    UnknownFile,
    #[error("no FAT16 boot sector found in {scanned} bytes of NOR image")]
    BootSectorNotFound { scanned: usize },
    #[error("boot sector at offset {offset} is malformed: {reason}")]
    BadBootSector { offset: usize, reason: String },
    #[error("image truncated: structure at offset {offset} needs {needed} bytes, {available} available")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("FAT chain for `{name}` broken at cluster {cluster}: {reason}")]
    BadFatChain {
        name: String,
        cluster: u16,
        reason: String,
    },
    #[error("page {page} spare metadata corrupt at NAND offset {offset}")]
    BadSpare { page: usize, offset: usize },
    #[error("NAND image length {len} is not a whole number of {unit}-byte page units")]
    BadNandImageLen { len: usize, unit: usize },
}
