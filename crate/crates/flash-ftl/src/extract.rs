//! Host-side extraction: reassembles files from raw NOR and NAND dumps with
//! no access to the live FTL state.
//!
//! The allocation table region is located by scanning the NOR image for a
//! plausible FAT16 boot sector at every 512-byte boundary (the region is
//! deliberately surrounded by opaque runtime bytes). The data region lives
//! on the NAND device at the byte offset recorded in the boot sector's
//! hidden-sectors field. Appended lengths are recovered exactly from the
//! per-page payload-length records in each page's spare area.

use crate::device::{NAND_PAGE_SIZE, NAND_SPARE_SIZE};
use crate::fat16::{
    decode_dir_entry, parse_boot_sector, read_le16, BootSector, DIR_ENTRY_SIZE, FAT_EOC_MIN,
    FAT_FREE, FIRST_DATA_CLUSTER,
};
use crate::geometry::SECTOR_SIZE;
use crate::image::decode_spare;
use crate::FlashError;

/// One recovered file: directory metadata plus the exact appended bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedFile {
    pub name: String,
    pub created_t: f64,
    /// Pre-allocated size from the directory entry.
    pub size: u64,
    pub start_cluster: u16,
    /// Bytes actually appended before the dump was taken.
    pub data: Vec<u8>,
}

/// Locates the boot sector in a raw NOR image.
pub fn find_boot_sector(raw_nor: &[u8]) -> Result<(usize, BootSector), FlashError> {
    let mut offset = 0;
    while offset + SECTOR_SIZE <= raw_nor.len() {
        if let Some(parsed) = parse_boot_sector(&raw_nor[offset..offset + SECTOR_SIZE]) {
            return Ok((offset, parsed));
        }
        offset += SECTOR_SIZE;
    }
    Err(FlashError::BootSectorNotFound {
        scanned: raw_nor.len(),
    })
}

/// Splits a raw NAND dump (page main bytes interleaved with spare bytes)
/// into indexable pages.
struct NandDump<'a> {
    raw: &'a [u8],
}

impl<'a> NandDump<'a> {
    fn new(raw: &'a [u8]) -> Result<Self, FlashError> {
        let unit = NAND_PAGE_SIZE + NAND_SPARE_SIZE;
        if raw.is_empty() || raw.len() % unit != 0 {
            return Err(FlashError::BadNandImageLen {
                len: raw.len(),
                unit,
            });
        }
        Ok(Self { raw })
    }

    fn page_count(&self) -> usize {
        self.raw.len() / (NAND_PAGE_SIZE + NAND_SPARE_SIZE)
    }

    fn main(&self, page: usize) -> &'a [u8] {
        let base = page * (NAND_PAGE_SIZE + NAND_SPARE_SIZE);
        &self.raw[base..base + NAND_PAGE_SIZE]
    }

    fn spare(&self, page: usize) -> &'a [u8] {
        let base = page * (NAND_PAGE_SIZE + NAND_SPARE_SIZE) + NAND_PAGE_SIZE;
        &self.raw[base..base + NAND_SPARE_SIZE]
    }
}

/// Recovers every file from raw device dumps. Fails closed: structural
/// damage yields an error naming the offset rather than partial output.
pub fn mount_and_extract(
    raw_nor: &[u8],
    raw_nand: &[u8],
) -> Result<Vec<ExtractedFile>, FlashError> {
    let (boot_offset, boot) = find_boot_sector(raw_nor)?;
    let fat_offset = boot_offset + SECTOR_SIZE;
    let fat_len = boot.fat_sectors * SECTOR_SIZE;
    let root_offset = fat_offset + fat_len;
    let root_len = boot.root_dir_entries * DIR_ENTRY_SIZE;
    if root_offset + root_len > raw_nor.len() {
        return Err(FlashError::Truncated {
            offset: root_offset,
            needed: root_len,
            available: raw_nor.len().saturating_sub(root_offset),
        });
    }
    let fat = &raw_nor[fat_offset..fat_offset + fat_len];
    let root = &raw_nor[root_offset..root_offset + root_len];
    let nand = NandDump::new(raw_nand)?;
    let cluster_size = boot.cluster_size();
    let cluster_count = boot.cluster_count();

    let mut out = Vec::new();
    for slot in 0..boot.root_dir_entries {
        let raw_entry = &root[slot * DIR_ENTRY_SIZE..(slot + 1) * DIR_ENTRY_SIZE];
        let Some(entry) = decode_dir_entry(raw_entry) else {
            continue;
        };
        let chain = walk_chain(fat, &entry.name, entry.start_cluster, entry.size, cluster_size, cluster_count)?;
        let data = read_appended(&nand, &entry.name, &chain, boot.nand_data_start, cluster_size)?;
        out.push(ExtractedFile {
            name: entry.name,
            created_t: entry.created_t,
            size: entry.size,
            start_cluster: entry.start_cluster,
            data,
        });
    }
    Ok(out)
}

/// Follows and validates a FAT chain: entries must be in range, unbroken,
/// consecutive (the pre-allocation contract), and exactly as long as the
/// directory size implies.
fn walk_chain(
    fat: &[u8],
    name: &str,
    start: u16,
    size: u64,
    cluster_size: usize,
    cluster_count: usize,
) -> Result<Vec<u16>, FlashError> {
    let expected = (size as usize).div_ceil(cluster_size);
    let mut chain = Vec::with_capacity(expected);
    let mut cluster = start;
    loop {
        let idx = cluster as usize;
        if idx < FIRST_DATA_CLUSTER as usize || idx >= FIRST_DATA_CLUSTER as usize + cluster_count {
            return Err(FlashError::BadFatChain {
                name: name.to_string(),
                cluster,
                reason: "cluster out of data-region range".into(),
            });
        }
        if let Some(prev) = chain.last() {
            if cluster != prev + 1 {
                return Err(FlashError::BadFatChain {
                    name: name.to_string(),
                    cluster,
                    reason: format!("chain not contiguous after cluster {prev}"),
                });
            }
        }
        chain.push(cluster);
        if chain.len() > expected {
            return Err(FlashError::BadFatChain {
                name: name.to_string(),
                cluster,
                reason: format!("chain longer than the {expected} clusters the size implies"),
            });
        }
        let next = read_le16(fat, idx * 2);
        if next >= FAT_EOC_MIN {
            break;
        }
        if next == FAT_FREE {
            return Err(FlashError::BadFatChain {
                name: name.to_string(),
                cluster,
                reason: "chain runs into a free cluster".into(),
            });
        }
        cluster = next;
    }
    if chain.len() != expected {
        return Err(FlashError::BadFatChain {
            name: name.to_string(),
            cluster: *chain.last().unwrap_or(&start),
            reason: format!("chain has {} clusters, size implies {expected}", chain.len()),
        });
    }
    Ok(chain)
}

/// Reads the appended bytes of one file: pages in cluster order until the
/// first unprogrammed page, trusting each page's spare length record.
fn read_appended(
    nand: &NandDump<'_>,
    name: &str,
    chain: &[u16],
    data_start: usize,
    cluster_size: usize,
) -> Result<Vec<u8>, FlashError> {
    let pages_per_cluster = cluster_size / NAND_PAGE_SIZE;
    let mut data = Vec::new();
    'clusters: for &cluster in chain {
        let byte_base = data_start + (cluster - FIRST_DATA_CLUSTER) as usize * cluster_size;
        let first_page = byte_base / NAND_PAGE_SIZE;
        for page in first_page..first_page + pages_per_cluster {
            if page >= nand.page_count() {
                return Err(FlashError::Truncated {
                    offset: page * (NAND_PAGE_SIZE + NAND_SPARE_SIZE),
                    needed: NAND_PAGE_SIZE + NAND_SPARE_SIZE,
                    available: nand.raw.len(),
                });
            }
            let spare = nand.spare(page);
            match decode_spare(spare) {
                None if spare.iter().all(|&b| b == 0xFF) => break 'clusters,
                None => {
                    return Err(FlashError::BadSpare {
                        page,
                        offset: page * (NAND_PAGE_SIZE + NAND_SPARE_SIZE) + NAND_PAGE_SIZE,
                    })
                }
                Some(len) => {
                    data.extend_from_slice(&nand.main(page)[..len]);
                    if len < NAND_PAGE_SIZE {
                        // Partial page: the close-time flush, nothing follows.
                        break 'clusters;
                    }
                }
            }
        }
    }
    let _ = name;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{FlashImage, FtlGeometry};

    fn small_geometry() -> FtlGeometry {
        FtlGeometry {
            nor_capacity: 256 * 1024,
            nand_capacity: 2 << 20,
            nand_data_len: 2 << 20,
            fat_nor_offset: 128 * 1024,
            ..FtlGeometry::desk_default()
        }
    }

    #[test]
    fn known_pattern_round_trips() {
        let mut image = FlashImage::format(small_geometry()).unwrap();
        let entry = image.create_file("DATA0001.BIN", 16384, 1_767_571_200.0).unwrap();
        let pattern: Vec<u8> = (0..12 * 1024).map(|i| (i * 7 % 256) as u8).collect();
        image.append(entry.id, &pattern).unwrap();
        image.close_file(entry.id).unwrap();

        let files =
            mount_and_extract(&image.dump_nor().unwrap(), &image.dump_nand().unwrap()).unwrap();
        assert_eq!(files.len(), 1);
        assert_eq!(files[0].name, "DATA0001.BIN");
        assert_eq!(files[0].size, 16384);
        assert_eq!(files[0].data, pattern);
    }

    #[test]
    fn fresh_image_extracts_to_empty_list() {
        let image = FlashImage::format(small_geometry()).unwrap();
        let files =
            mount_and_extract(&image.dump_nor().unwrap(), &image.dump_nand().unwrap()).unwrap();
        assert!(files.is_empty());
    }

    #[test]
    fn truncated_nor_fails_closed() {
        let mut image = FlashImage::format(small_geometry()).unwrap();
        let entry = image.create_file("DATA0001.BIN", 4096, 0.0).unwrap();
        image.append(entry.id, &[9; 1000]).unwrap();
        image.close_file(entry.id).unwrap();
        let nor = image.dump_nor().unwrap();
        let nand = image.dump_nand().unwrap();
        // The FAT region sits at the NOR midpoint; half the image loses it.
        let err = mount_and_extract(&nor[..nor.len() / 2], &nand).unwrap_err();
        assert!(matches!(err, FlashError::BootSectorNotFound { .. }), "{err}");
        // Cutting inside the region is also structural, never partial output.
        let err = mount_and_extract(&nor[..128 * 1024 + 600], &nand).unwrap_err();
        assert!(matches!(err, FlashError::Truncated { .. }), "{err}");
    }

    #[test]
    fn corrupted_boot_signature_names_the_problem() {
        let image = FlashImage::format(small_geometry()).unwrap();
        let mut nor = image.dump_nor().unwrap();
        nor[128 * 1024 + 510] = 0; // break the 0x55AA signature
        let err = mount_and_extract(&nor, &image.dump_nand().unwrap()).unwrap_err();
        assert_eq!(
            err,
            FlashError::BootSectorNotFound {
                scanned: nor.len()
            }
        );
    }

    #[test]
    fn data_appended_after_a_dump_is_not_in_that_dump() {
        let mut image = FlashImage::format(small_geometry()).unwrap();
        let entry = image.create_file("DATA0001.BIN", 8192, 0.0).unwrap();
        image.append(entry.id, &[1; 2048]).unwrap();
        let early_nor = image.dump_nor().unwrap();
        let early_nand = image.dump_nand().unwrap();
        image.append(entry.id, &[2; 2048]).unwrap();
        image.close_file(entry.id).unwrap();

        let early = mount_and_extract(&early_nor, &early_nand).unwrap();
        assert_eq!(early[0].data, vec![1; 2048]);
        let late = mount_and_extract(&image.dump_nor().unwrap(), &image.dump_nand().unwrap())
            .unwrap();
        assert_eq!(late[0].data.len(), 4096);
    }
}
