//! Simulated NOR+NAND flash pair behind a pre-allocated FAT16 layer.
//!
//! The allocation table (boot sector, FAT, root directory) lives on a small
//! byte-programmable NOR device at a configurable offset, surrounded by
//! opaque runtime bytes; file data lives in 4 KiB clusters on a page-
//! programmable NAND device. Files are pre-allocated — size and timestamp
//! are fixed at creation — so appends never modify the allocation table and
//! file creation never erases NAND. Both devices count every erase and
//! program and attribute them to the operation class that caused them; see
//! [`WearReport`].
//!
//! [`mount_and_extract`] rebuilds file contents from raw device dumps alone,
//! locating the allocation table by boot-signature scan.

mod device;
mod error;
mod extract;
mod fat16;
mod geometry;
mod image;
pub mod records;
mod wear;

pub use device::{
    FlashDevice, FlashKind, OpCause, Retention, NAND_BLOCK_SIZE, NAND_PAGE_SIZE, NAND_SPARE_SIZE,
    NOR_BLOCK_SIZE, NOR_PAGE_SIZE,
};
pub use error::FlashError;
pub use extract::{find_boot_sector, mount_and_extract, ExtractedFile};
pub use geometry::{FtlGeometry, MAX_CLUSTERS, ROOT_DIR_ENTRIES, SECTOR_SIZE};
pub use image::{FileEntry, FileId, FlashImage};
pub use wear::WearReport;
