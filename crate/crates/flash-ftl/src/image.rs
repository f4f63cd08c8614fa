//! The live flash translation layer: a NOR device holding the allocation
//! table region (boot sector, FAT, root directory, surrounded by opaque
//! runtime bytes) and a NAND device holding file data clusters.
//!
//! Files are pre-allocated: the size is fixed at creation, the FAT chain is
//! written once, and appends stream payload into NAND pages without ever
//! touching NOR. Partial trailing pages are buffered in RAM and programmed
//! at close, so no page is programmed twice between erases.

use crate::device::{FlashDevice, OpCause, NAND_PAGE_SIZE, NOR_BLOCK_SIZE};
use crate::fat16::{
    build_boot_sector, encode_dir_entry, encode_name, DirEntry, DIR_ENTRY_SIZE, FAT_EOC, FAT_FREE,
    FIRST_DATA_CLUSTER,
};
use crate::geometry::{FtlGeometry, ROOT_DIR_ENTRIES, SECTOR_SIZE};
use crate::wear::WearReport;
use crate::FlashError;

/// Handle to a file within one [`FlashImage`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FileId(usize);

/// Snapshot of one pre-allocated file's metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FileEntry {
    pub id: FileId,
    pub name: String,
    pub created_t: f64,
    /// Pre-allocated size in bytes, fixed at creation.
    pub size: u64,
    pub start_cluster: u16,
    /// Bytes appended so far (committed plus RAM-buffered).
    pub write_cursor: u64,
    pub closed: bool,
}

#[derive(Debug, Clone)]
struct FileState {
    entry: FileEntry,
    /// Bytes already programmed into NAND pages.
    committed: u64,
    /// Pending partial page, always shorter than a page.
    page_buf: Vec<u8>,
}

/// Spare-area record for a programmed page: payload length and its
/// complement, so extraction can recover exact appended lengths.
fn encode_spare(payload_len: usize) -> [u8; 4] {
    let len = payload_len as u16;
    let inv = !len;
    [
        len.to_le_bytes()[0],
        len.to_le_bytes()[1],
        inv.to_le_bytes()[0],
        inv.to_le_bytes()[1],
    ]
}

pub(crate) fn decode_spare(spare: &[u8]) -> Option<usize> {
    if spare.len() < 4 {
        return None;
    }
    let len = u16::from_le_bytes([spare[0], spare[1]]);
    let inv = u16::from_le_bytes([spare[2], spare[3]]);
    if len == 0xFFFF && inv == 0xFFFF {
        return None; // erased spare: page never programmed
    }
    if len != !inv {
        return None;
    }
    Some(len as usize)
}

#[derive(Debug, Clone)]
pub struct FlashImage {
    geometry: FtlGeometry,
    nor: FlashDevice,
    nand: FlashDevice,
    /// In-RAM mirror of the FAT (entries 0 and 1 reserved).
    fat: Vec<u16>,
    files: Vec<FileState>,
    next_dir_slot: usize,
}

impl FlashImage {
    /// Formats fresh devices: NOR gets the boot sector, an empty FAT, a
    /// zeroed root directory and the opaque runtime fill; every NAND block
    /// overlapping the data region is erased.
    pub fn format(geometry: FtlGeometry) -> Result<Self, FlashError> {
        geometry.validate()?;
        if geometry.cluster_size % NAND_PAGE_SIZE != 0 {
            return Err(FlashError::InvalidGeometry(format!(
                "cluster size {} must be a multiple of the {NAND_PAGE_SIZE}-byte NAND page",
                geometry.cluster_size
            )));
        }
        let mut image = Self {
            geometry,
            nor: FlashDevice::nor(geometry.nor_capacity)?,
            nand: FlashDevice::nand(geometry.nand_capacity, geometry.retention)?,
            fat: Vec::new(),
            files: Vec::new(),
            next_dir_slot: 0,
        };
        image.lay_down(OpCause::Format)?;
        Ok(image)
    }

    /// Re-runs the format layout in place, keeping wear counters. This is
    /// the host "erase storage" path.
    pub fn erase_all(&mut self) -> Result<(), FlashError> {
        self.lay_down(OpCause::HostErase)
    }

    fn lay_down(&mut self, cause: OpCause) -> Result<(), FlashError> {
        let g = self.geometry;
        for b in 0..self.nor.block_count() {
            self.nor.erase_block(b, cause)?;
        }
        self.nor
            .program_bytes(g.fat_nor_offset, &build_boot_sector(&g), cause)?;

        let mut fat = vec![FAT_FREE; g.cluster_count() + FIRST_DATA_CLUSTER as usize];
        fat[0] = 0xFFF8; // media descriptor entry
        fat[1] = FAT_EOC;
        let mut fat_bytes = vec![0u8; g.fat_sectors() * SECTOR_SIZE];
        for (i, e) in fat.iter().enumerate() {
            fat_bytes[i * 2..i * 2 + 2].copy_from_slice(&e.to_le_bytes());
        }
        let fat_start = g.fat_nor_offset + SECTOR_SIZE;
        self.nor.program_bytes(fat_start, &fat_bytes, cause)?;

        let root_start = fat_start + g.fat_sectors() * SECTOR_SIZE;
        let root_bytes = vec![0u8; ROOT_DIR_ENTRIES * DIR_ENTRY_SIZE];
        self.nor.program_bytes(root_start, &root_bytes, cause)?;

        // Opaque runtime bytes on both sides of the FAT region.
        let region_end = g.fat_nor_offset + g.fat_region_len();
        self.program_fill(0, g.fat_nor_offset, cause)?;
        self.program_fill(region_end, g.nor_capacity - region_end, cause)?;

        let first_block = g.nand_data_start / self.nand.block_size();
        let last_block = (g.nand_data_start + g.nand_data_len - 1) / self.nand.block_size();
        for b in first_block..=last_block {
            self.nand.erase_block(b, cause)?;
        }

        self.fat = fat;
        self.files.clear();
        self.next_dir_slot = 0;
        Ok(())
    }

    fn program_fill(&mut self, offset: usize, len: usize, cause: OpCause) -> Result<(), FlashError> {
        if len == 0 {
            return Ok(());
        }
        let mut state = self.geometry.runtime_fill_seed ^ offset as u64;
        let mut buf = vec![0u8; len];
        for chunk in buf.chunks_mut(8) {
            // splitmix64 stream
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            let bytes = z.to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
        self.nor.program_bytes(offset, &buf, cause)
    }

    pub fn geometry(&self) -> &FtlGeometry {
        &self.geometry
    }

    pub fn nor(&self) -> &FlashDevice {
        &self.nor
    }

    pub fn nand(&self) -> &FlashDevice {
        &self.nand
    }

    pub fn free_clusters(&self) -> usize {
        self.fat[FIRST_DATA_CLUSTER as usize..]
            .iter()
            .filter(|&&e| e == FAT_FREE)
            .count()
    }

    /// Fraction of data clusters allocated to files, 0.0–1.0.
    pub fn used_fraction(&self) -> f64 {
        let total = self.geometry.cluster_count();
        (total - self.free_clusters()) as f64 / total as f64
    }

    pub fn files(&self) -> impl Iterator<Item = &FileEntry> {
        self.files.iter().map(|f| &f.entry)
    }

    pub fn file(&self, id: FileId) -> Result<&FileEntry, FlashError> {
        self.files
            .get(id.0)
            .map(|f| &f.entry)
            .ok_or(FlashError::UnknownFile)
    }

    /// Creates a pre-allocated file: finds a contiguous free cluster run,
    /// writes the FAT chain and directory entry on NOR, and touches NAND
    /// not at all.
    pub fn create_file(
        &mut self,
        name: &str,
        size: u64,
        created_t: f64,
    ) -> Result<FileEntry, FlashError> {
        encode_name(name)?;
        if self.files.iter().any(|f| f.entry.name == name) {
            return Err(FlashError::DuplicateName(name.to_string()));
        }
        if size == 0 {
            return Err(FlashError::BadFileSize {
                requested: 0,
                reason: "pre-allocated files must have a nonzero size".into(),
            });
        }
        if size > u32::MAX as u64 {
            return Err(FlashError::BadFileSize {
                requested: size,
                reason: "FAT16 directory entries cap file size at 4 GiB - 1".into(),
            });
        }
        if self.next_dir_slot >= ROOT_DIR_ENTRIES {
            return Err(FlashError::DirectoryFull);
        }
        let clusters_needed = (size as usize).div_ceil(self.geometry.cluster_size);
        let start = self.find_contiguous_run(clusters_needed)?;

        // Chain the run: consecutive entries, end-of-chain terminator.
        let mut patches: Vec<(usize, Vec<u8>)> = Vec::with_capacity(2);
        let mut chain_bytes = Vec::with_capacity(clusters_needed * 2);
        for i in 0..clusters_needed {
            let c = start as usize + i;
            let value = if i + 1 == clusters_needed {
                FAT_EOC
            } else {
                (c + 1) as u16
            };
            self.fat[c] = value;
            chain_bytes.extend_from_slice(&value.to_le_bytes());
        }
        let fat_start = self.geometry.fat_nor_offset + SECTOR_SIZE;
        patches.push((fat_start + start as usize * 2, chain_bytes));

        let dir_slot = self.next_dir_slot;
        let entry = DirEntry {
            name: name.to_string(),
            created_t,
            size,
            start_cluster: start,
        };
        let root_start = fat_start + self.geometry.fat_sectors() * SECTOR_SIZE;
        patches.push((
            root_start + dir_slot * DIR_ENTRY_SIZE,
            encode_dir_entry(&entry)?.to_vec(),
        ));
        self.rewrite_nor(&patches, OpCause::Metadata)?;

        self.next_dir_slot += 1;
        let id = FileId(self.files.len());
        let entry = FileEntry {
            id,
            name: name.to_string(),
            created_t,
            size,
            start_cluster: start,
            write_cursor: 0,
            closed: false,
        };
        self.files.push(FileState {
            entry: entry.clone(),
            committed: 0,
            page_buf: Vec::with_capacity(NAND_PAGE_SIZE),
        });
        Ok(entry)
    }

    fn find_contiguous_run(&self, needed: usize) -> Result<u16, FlashError> {
        let first = FIRST_DATA_CLUSTER as usize;
        let end = first + self.geometry.cluster_count();
        let mut run_start = first;
        let mut run_len = 0usize;
        let mut largest = 0usize;
        for c in first..end {
            if self.fat[c] == FAT_FREE {
                if run_len == 0 {
                    run_start = c;
                }
                run_len += 1;
                largest = largest.max(run_len);
                if run_len == needed {
                    return Ok(run_start as u16);
                }
            } else {
                run_len = 0;
            }
        }
        Err(FlashError::NoContiguousSpace { needed, largest })
    }

    /// Rewrites the NOR erase blocks covered by the patch list:
    /// read-modify-erase-program per 4 KiB sector. Wear lands on NOR only.
    fn rewrite_nor(&mut self, patches: &[(usize, Vec<u8>)], cause: OpCause) -> Result<(), FlashError> {
        let mut blocks: Vec<usize> = patches
            .iter()
            .flat_map(|(off, bytes)| {
                let first = off / NOR_BLOCK_SIZE;
                let last = (off + bytes.len() - 1) / NOR_BLOCK_SIZE;
                first..=last
            })
            .collect();
        blocks.sort_unstable();
        blocks.dedup();
        for block in blocks {
            let base = block * NOR_BLOCK_SIZE;
            let mut content = self.nor.read(base, NOR_BLOCK_SIZE)?.to_vec();
            for (off, bytes) in patches {
                let lo = (*off).max(base);
                let hi = (off + bytes.len()).min(base + NOR_BLOCK_SIZE);
                if lo < hi {
                    content[lo - base..hi - base]
                        .copy_from_slice(&bytes[lo - off..hi - off]);
                }
            }
            self.nor.erase_block(block, cause)?;
            self.nor.program_bytes(base, &content, cause)?;
        }
        Ok(())
    }

    /// Appends payload bytes at the file's write cursor. Whole pages are
    /// programmed immediately; a trailing partial page stays buffered until
    /// [`Self::close_file`]. The allocation table is never touched.
    pub fn append(&mut self, id: FileId, bytes: &[u8]) -> Result<u64, FlashError> {
        let cluster_size = self.geometry.cluster_size;
        let data_start = self.geometry.nand_data_start;
        let state = self.files.get_mut(id.0).ok_or(FlashError::UnknownFile)?;
        if state.entry.closed {
            return Err(FlashError::FileClosed);
        }
        if state.entry.write_cursor + bytes.len() as u64 > state.entry.size {
            return Err(FlashError::AppendOverflow {
                len: bytes.len(),
                cursor: state.entry.write_cursor,
                size: state.entry.size,
            });
        }
        let file_base =
            data_start + (state.entry.start_cluster - FIRST_DATA_CLUSTER) as usize * cluster_size;
        let mut remaining = bytes;
        while !remaining.is_empty() {
            let take = (NAND_PAGE_SIZE - state.page_buf.len()).min(remaining.len());
            state.page_buf.extend_from_slice(&remaining[..take]);
            remaining = &remaining[take..];
            if state.page_buf.len() == NAND_PAGE_SIZE {
                let page = (file_base + state.committed as usize) / NAND_PAGE_SIZE;
                self.nand.program_page(
                    page,
                    &state.page_buf,
                    &encode_spare(NAND_PAGE_SIZE),
                    OpCause::Data,
                )?;
                state.committed += NAND_PAGE_SIZE as u64;
                state.page_buf.clear();
            }
        }
        state.entry.write_cursor += bytes.len() as u64;
        Ok(state.entry.write_cursor)
    }

    /// Programs any buffered partial page and seals the file. Pre-allocated
    /// files cannot be reopened: the next session uses a fresh file.
    pub fn close_file(&mut self, id: FileId) -> Result<(), FlashError> {
        let cluster_size = self.geometry.cluster_size;
        let data_start = self.geometry.nand_data_start;
        let state = self.files.get_mut(id.0).ok_or(FlashError::UnknownFile)?;
        if state.entry.closed {
            return Ok(());
        }
        if !state.page_buf.is_empty() {
            let file_base = data_start
                + (state.entry.start_cluster - FIRST_DATA_CLUSTER) as usize * cluster_size;
            let page = (file_base + state.committed as usize) / NAND_PAGE_SIZE;
            self.nand.program_page(
                page,
                &state.page_buf,
                &encode_spare(state.page_buf.len()),
                OpCause::Data,
            )?;
            state.committed += state.page_buf.len() as u64;
            state.page_buf.clear();
        }
        state.entry.closed = true;
        Ok(())
    }

    pub fn close_all(&mut self) -> Result<(), FlashError> {
        for id in (0..self.files.len()).map(FileId) {
            self.close_file(id)?;
        }
        Ok(())
    }

    /// Reads back everything appended to a file, including bytes still in
    /// the RAM page buffer. Requires full retention.
    pub fn file_data(&self, id: FileId) -> Result<Vec<u8>, FlashError> {
        let state = self.files.get(id.0).ok_or(FlashError::UnknownFile)?;
        let file_base = self.geometry.nand_data_start
            + (state.entry.start_cluster - FIRST_DATA_CLUSTER) as usize * self.geometry.cluster_size;
        let mut out = self.nand.read(file_base, state.committed as usize)?.to_vec();
        out.extend_from_slice(&state.page_buf);
        Ok(out)
    }

    pub fn wear_report(&self) -> WearReport {
        WearReport {
            nand_erases_from_fat_ops: self.nand.erases_caused_by(OpCause::Metadata),
            nand_erases_total: self.nand.total_erases(),
            nor_erases_total: self.nor.total_erases(),
            nand_programs_total: self.nand.total_programs(),
            nor_programs_total: self.nor.total_programs(),
            nand_programs_data: self.nand.programs_caused_by(OpCause::Data),
            nor_programs_metadata: self.nor.programs_caused_by(OpCause::Metadata),
        }
    }

    /// Raw NOR image: exactly the device's main bytes.
    pub fn dump_nor(&self) -> Result<Vec<u8>, FlashError> {
        self.nor.dump()
    }

    /// Raw NAND image: per page, main bytes then spare bytes.
    pub fn dump_nand(&self) -> Result<Vec<u8>, FlashError> {
        self.nand.dump()
    }
}
