//! Raw flash device models with erase/program legality checks and wear
//! accounting.
//!
//! NOR is byte-programmable (a program may only clear bits) with 4 KiB erase
//! sectors. NAND is page-programmable with a per-page spare area and large
//! erase blocks; a page may be programmed once per erase. Every erase and
//! program is tallied per block/page and attributed to the operation class
//! that caused it, which is what the wear report reads.

use crate::FlashError;

pub const NOR_PAGE_SIZE: usize = 256;
pub const NOR_BLOCK_SIZE: usize = 4096;
pub const NAND_PAGE_SIZE: usize = 2048;
pub const NAND_SPARE_SIZE: usize = 64;
pub const NAND_BLOCK_SIZE: usize = 128 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlashKind {
    Nor,
    Nand,
}

/// Why a device operation happened, for wear attribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpCause {
    /// Initial layout of the file system.
    Format,
    /// Allocation-table or directory maintenance (file creation).
    Metadata,
    /// Payload writes into file clusters.
    Data,
    /// Host-commanded storage erase.
    HostErase,
}

impl OpCause {
    const COUNT: usize = 4;

    fn index(self) -> usize {
        match self {
            OpCause::Format => 0,
            OpCause::Metadata => 1,
            OpCause::Data => 2,
            OpCause::HostErase => 3,
        }
    }
}

/// Whether a device stores page contents or only accounting state.
///
/// `CountersOnly` keeps the legality bitmap and all wear counters exact while
/// dropping the payload bytes; long scenario runs use it so simulated bands
/// do not hold multi-gigabyte images in memory. Reads and dumps require
/// `Full`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retention {
    Full,
    CountersOnly,
}

#[derive(Debug, Clone)]
pub struct FlashDevice {
    kind: FlashKind,
    page_size: usize,
    spare_size: usize,
    block_size: usize,
    capacity: usize,
    retention: Retention,
    data: Vec<u8>,
    spare: Vec<u8>,
    programmed: Vec<bool>,
    erase_counts: Vec<u64>,
    write_counts: Vec<u64>,
    erases_by_cause: [u64; OpCause::COUNT],
    programs_by_cause: [u64; OpCause::COUNT],
}

impl FlashDevice {
    /// A NOR device is small and always retains content.
    pub fn nor(capacity: usize) -> Result<Self, FlashError> {
        Self::new(
            FlashKind::Nor,
            capacity,
            NOR_PAGE_SIZE,
            0,
            NOR_BLOCK_SIZE,
            Retention::Full,
        )
    }

    pub fn nand(capacity: usize, retention: Retention) -> Result<Self, FlashError> {
        Self::new(
            FlashKind::Nand,
            capacity,
            NAND_PAGE_SIZE,
            NAND_SPARE_SIZE,
            NAND_BLOCK_SIZE,
            retention,
        )
    }

    fn new(
        kind: FlashKind,
        capacity: usize,
        page_size: usize,
        spare_size: usize,
        block_size: usize,
        retention: Retention,
    ) -> Result<Self, FlashError> {
        if capacity == 0 || capacity % block_size != 0 {
            return Err(FlashError::InvalidGeometry(format!(
                "capacity {capacity} is not a positive multiple of the {block_size}-byte erase block"
            )));
        }
        let pages = capacity / page_size;
        let keep = retention == Retention::Full;
        Ok(Self {
            kind,
            page_size,
            spare_size,
            block_size,
            capacity,
            retention,
            data: if keep { vec![0xFF; capacity] } else { Vec::new() },
            spare: if keep {
                vec![0xFF; pages * spare_size]
            } else {
                Vec::new()
            },
            programmed: vec![false; pages],
            erase_counts: vec![0; capacity / block_size],
            write_counts: vec![0; pages],
            erases_by_cause: [0; OpCause::COUNT],
            programs_by_cause: [0; OpCause::COUNT],
        })
    }

    pub fn kind(&self) -> FlashKind {
        self.kind
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn page_size(&self) -> usize {
        self.page_size
    }

    pub fn spare_size(&self) -> usize {
        self.spare_size
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn block_count(&self) -> usize {
        self.capacity / self.block_size
    }

    pub fn page_count(&self) -> usize {
        self.capacity / self.page_size
    }

    pub fn retention(&self) -> Retention {
        self.retention
    }

    pub fn erase_count(&self, block: usize) -> u64 {
        self.erase_counts[block]
    }

    pub fn write_count(&self, page: usize) -> u64 {
        self.write_counts[page]
    }

    pub fn total_erases(&self) -> u64 {
        self.erases_by_cause.iter().sum()
    }

    pub fn total_programs(&self) -> u64 {
        self.programs_by_cause.iter().sum()
    }

    pub fn erases_caused_by(&self, cause: OpCause) -> u64 {
        self.erases_by_cause[cause.index()]
    }

    pub fn programs_caused_by(&self, cause: OpCause) -> u64 {
        self.programs_by_cause[cause.index()]
    }

    /// Erases one block: contents to 0xFF, pages re-armed for programming.
    pub fn erase_block(&mut self, block: usize, cause: OpCause) -> Result<(), FlashError> {
        if block >= self.block_count() {
            return Err(FlashError::OutOfRange {
                offset: block * self.block_size,
                len: self.block_size,
                capacity: self.capacity,
            });
        }
        let start = block * self.block_size;
        if self.retention == Retention::Full {
            self.data[start..start + self.block_size].fill(0xFF);
        }
        let pages_per_block = self.block_size / self.page_size;
        let first_page = start / self.page_size;
        for p in first_page..first_page + pages_per_block {
            self.programmed[p] = false;
            if self.retention == Retention::Full && self.spare_size > 0 {
                let s = p * self.spare_size;
                self.spare[s..s + self.spare_size].fill(0xFF);
            }
        }
        self.erase_counts[block] += 1;
        self.erases_by_cause[cause.index()] += 1;
        Ok(())
    }

    /// NOR byte-granularity program. Legal only when every bit transition is
    /// 1→0; re-programming previously written bytes with compatible values is
    /// allowed, as on real NOR.
    pub fn program_bytes(
        &mut self,
        offset: usize,
        bytes: &[u8],
        cause: OpCause,
    ) -> Result<(), FlashError> {
        assert_eq!(self.kind, FlashKind::Nor, "byte programming is a NOR operation");
        if bytes.is_empty() {
            return Ok(());
        }
        if offset + bytes.len() > self.capacity {
            return Err(FlashError::OutOfRange {
                offset,
                len: bytes.len(),
                capacity: self.capacity,
            });
        }
        for (i, &b) in bytes.iter().enumerate() {
            let old = self.data[offset + i];
            if b & !old != 0 {
                return Err(FlashError::NorBitSet { offset: offset + i });
            }
        }
        self.data[offset..offset + bytes.len()].copy_from_slice(bytes);
        let first_page = offset / self.page_size;
        let last_page = (offset + bytes.len() - 1) / self.page_size;
        for p in first_page..=last_page {
            self.write_counts[p] += 1;
        }
        self.programs_by_cause[cause.index()] += 1;
        Ok(())
    }

    /// NAND page program: main bytes from the page start plus spare bytes.
    /// A page accepts exactly one program per erase.
    pub fn program_page(
        &mut self,
        page: usize,
        main: &[u8],
        spare: &[u8],
        cause: OpCause,
    ) -> Result<(), FlashError> {
        assert_eq!(self.kind, FlashKind::Nand, "page programming is a NAND operation");
        if page >= self.page_count() {
            return Err(FlashError::OutOfRange {
                offset: page * self.page_size,
                len: self.page_size,
                capacity: self.capacity,
            });
        }
        if main.len() > self.page_size || spare.len() > self.spare_size {
            return Err(FlashError::OutOfRange {
                offset: page * self.page_size,
                len: main.len().max(spare.len()),
                capacity: self.page_size,
            });
        }
        if self.programmed[page] {
            return Err(FlashError::ProgramWithoutErase { page });
        }
        if self.retention == Retention::Full {
            let start = page * self.page_size;
            self.data[start..start + main.len()].copy_from_slice(main);
            let s = page * self.spare_size;
            self.spare[s..s + spare.len()].copy_from_slice(spare);
        }
        self.programmed[page] = true;
        self.write_counts[page] += 1;
        self.programs_by_cause[cause.index()] += 1;
        Ok(())
    }

    pub fn read(&self, offset: usize, len: usize) -> Result<&[u8], FlashError> {
        if self.retention != Retention::Full {
            return Err(FlashError::CountersOnly);
        }
        if offset + len > self.capacity {
            return Err(FlashError::OutOfRange {
                offset,
                len,
                capacity: self.capacity,
            });
        }
        Ok(&self.data[offset..offset + len])
    }

    pub fn read_spare(&self, page: usize) -> Result<&[u8], FlashError> {
        if self.retention != Retention::Full {
            return Err(FlashError::CountersOnly);
        }
        let s = page * self.spare_size;
        Ok(&self.spare[s..s + self.spare_size])
    }

    pub fn is_programmed(&self, page: usize) -> bool {
        self.programmed[page]
    }

    /// Serializes device contents. NOR dumps are the main array verbatim;
    /// NAND dumps interleave each page's main bytes with its spare bytes.
    pub fn dump(&self) -> Result<Vec<u8>, FlashError> {
        if self.retention != Retention::Full {
            return Err(FlashError::CountersOnly);
        }
        if self.spare_size == 0 {
            return Ok(self.data.clone());
        }
        let unit = self.page_size + self.spare_size;
        let mut out = Vec::with_capacity(self.page_count() * unit);
        for p in 0..self.page_count() {
            out.extend_from_slice(&self.data[p * self.page_size..(p + 1) * self.page_size]);
            out.extend_from_slice(&self.spare[p * self.spare_size..(p + 1) * self.spare_size]);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nand_page_cannot_be_programmed_twice() {
        let mut d = FlashDevice::nand(NAND_BLOCK_SIZE, Retention::Full).unwrap();
        d.erase_block(0, OpCause::Format).unwrap();
        d.program_page(0, b"hello", b"", OpCause::Data).unwrap();
        let err = d.program_page(0, b"again", b"", OpCause::Data).unwrap_err();
        assert_eq!(err, FlashError::ProgramWithoutErase { page: 0 });
        d.erase_block(0, OpCause::HostErase).unwrap();
        d.program_page(0, b"again", b"", OpCause::Data).unwrap();
        assert_eq!(d.write_count(0), 2);
        assert_eq!(d.erase_count(0), 2);
    }

    #[test]
    fn nor_programs_may_only_clear_bits() {
        let mut d = FlashDevice::nor(NOR_BLOCK_SIZE).unwrap();
        d.erase_block(0, OpCause::Format).unwrap();
        d.program_bytes(10, &[0xF0], OpCause::Metadata).unwrap();
        // Clearing more bits of the same byte is legal.
        d.program_bytes(10, &[0x30], OpCause::Metadata).unwrap();
        // Setting a cleared bit back is not.
        let err = d.program_bytes(10, &[0x40], OpCause::Metadata).unwrap_err();
        assert_eq!(err, FlashError::NorBitSet { offset: 10 });
    }

    #[test]
    fn counters_only_tracks_wear_without_bytes() {
        let mut d = FlashDevice::nand(NAND_BLOCK_SIZE, Retention::CountersOnly).unwrap();
        d.erase_block(0, OpCause::Format).unwrap();
        d.program_page(3, &[1, 2, 3], &[9], OpCause::Data).unwrap();
        assert_eq!(d.write_count(3), 1);
        assert!(d.is_programmed(3));
        assert_eq!(d.read(0, 4).unwrap_err(), FlashError::CountersOnly);
        assert_eq!(d.dump().unwrap_err(), FlashError::CountersOnly);
        // Legality still enforced.
        let err = d.program_page(3, &[4], &[], OpCause::Data).unwrap_err();
        assert_eq!(err, FlashError::ProgramWithoutErase { page: 3 });
    }

    #[test]
    fn cause_attribution_is_separated() {
        let mut d = FlashDevice::nand(2 * NAND_BLOCK_SIZE, Retention::Full).unwrap();
        d.erase_block(0, OpCause::Format).unwrap();
        d.erase_block(1, OpCause::Format).unwrap();
        d.program_page(0, &[0], &[], OpCause::Data).unwrap();
        assert_eq!(d.erases_caused_by(OpCause::Format), 2);
        assert_eq!(d.erases_caused_by(OpCause::Metadata), 0);
        assert_eq!(d.programs_caused_by(OpCause::Data), 1);
        assert_eq!(d.total_erases(), 2);
    }
}
