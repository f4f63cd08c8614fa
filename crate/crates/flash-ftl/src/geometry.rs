use crate::device::{NAND_BLOCK_SIZE, NOR_BLOCK_SIZE};
use crate::{FlashError, Retention};

/// FAT16 caps usable clusters at this count.
pub const MAX_CLUSTERS: usize = 65524;
/// Logical sector size of the file system.
pub const SECTOR_SIZE: usize = 512;
/// Fixed root directory: 512 entries of 32 bytes = 32 sectors.
pub const ROOT_DIR_ENTRIES: usize = 512;

/// Placement of the file system across the two devices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtlGeometry {
    pub nor_capacity: usize,
    pub nand_capacity: usize,
    /// Allocation unit, bytes. Power-of-two multiple of 512, at most 64 KiB.
    pub cluster_size: usize,
    /// Where on NOR the boot sector (and the FAT region behind it) starts.
    /// The rest of the NOR is filled with opaque runtime bytes, so readers
    /// must locate the region by boot-signature scan.
    pub fat_nor_offset: usize,
    /// Start of the data region on NAND, block-aligned.
    pub nand_data_start: usize,
    /// Length of the data region, a whole number of clusters.
    pub nand_data_len: usize,
    pub retention: Retention,
    /// Seed for the deterministic opaque fill around the FAT region.
    pub runtime_fill_seed: u64,
}

impl FtlGeometry {
    /// Desk-scale default: 1 MiB NOR, 16 MiB NAND, 4 KiB clusters, FAT
    /// region hidden at the NOR midpoint.
    pub fn desk_default() -> Self {
        let nor = 1 << 20;
        let nand = 16 << 20;
        Self {
            nor_capacity: nor,
            nand_capacity: nand,
            cluster_size: 4096,
            fat_nor_offset: nor / 2,
            nand_data_start: 0,
            nand_data_len: nand,
            retention: Retention::Full,
            runtime_fill_seed: 0x5EED_F111,
        }
    }

    /// Same layout scaled to an arbitrary NAND size.
    pub fn with_nand_capacity(nand_capacity: usize) -> Self {
        Self {
            nand_capacity,
            nand_data_len: nand_capacity,
            ..Self::desk_default()
        }
    }

    pub fn cluster_count(&self) -> usize {
        self.nand_data_len / self.cluster_size
    }

    pub fn sectors_per_cluster(&self) -> usize {
        self.cluster_size / SECTOR_SIZE
    }

    /// FAT sectors needed for `cluster_count + 2` 16-bit entries.
    pub fn fat_sectors(&self) -> usize {
        ((self.cluster_count() + 2) * 2).div_ceil(SECTOR_SIZE)
    }

    pub fn root_dir_sectors(&self) -> usize {
        ROOT_DIR_ENTRIES * 32 / SECTOR_SIZE
    }

    /// Bytes of NOR occupied by boot sector + FAT + root directory.
    pub fn fat_region_len(&self) -> usize {
        (1 + self.fat_sectors() + self.root_dir_sectors()) * SECTOR_SIZE
    }

    pub fn validate(&self) -> Result<(), FlashError> {
        let fail = |m: String| Err(FlashError::InvalidGeometry(m));
        if self.nand_capacity == 0 {
            return fail("NAND capacity must be nonzero".into());
        }
        if self.nor_capacity == 0 || self.nor_capacity % NOR_BLOCK_SIZE != 0 {
            return fail(format!(
                "NOR capacity {} must be a positive multiple of {NOR_BLOCK_SIZE}",
                self.nor_capacity
            ));
        }
        if self.nand_capacity % NAND_BLOCK_SIZE != 0 {
            return fail(format!(
                "NAND capacity {} must be a multiple of the {NAND_BLOCK_SIZE}-byte erase block",
                self.nand_capacity
            ));
        }
        if self.cluster_size < SECTOR_SIZE
            || self.cluster_size > 64 * 1024
            || !self.cluster_size.is_power_of_two()
        {
            return fail(format!(
                "cluster size {} must be a power of two between 512 and 65536",
                self.cluster_size
            ));
        }
        if self.nand_data_start % NAND_BLOCK_SIZE != 0 {
            return fail(format!(
                "NAND data start {} must be erase-block aligned",
                self.nand_data_start
            ));
        }
        if self.nand_data_len == 0 || self.nand_data_len % self.cluster_size != 0 {
            return fail(format!(
                "NAND data length {} must be a positive multiple of the cluster size",
                self.nand_data_len
            ));
        }
        if self.nand_data_start + self.nand_data_len > self.nand_capacity {
            return fail("NAND data region exceeds device capacity".into());
        }
        if self.cluster_count() > MAX_CLUSTERS {
            return fail(format!(
                "{} clusters exceed the FAT16 maximum of {MAX_CLUSTERS}; increase cluster_size",
                self.cluster_count()
            ));
        }
        if self.fat_nor_offset % NOR_BLOCK_SIZE != 0 {
            return fail(format!(
                "FAT region offset {} must be NOR erase-sector aligned",
                self.fat_nor_offset
            ));
        }
        if self.fat_nor_offset + self.fat_region_len() > self.nor_capacity {
            return fail(format!(
                "FAT region ({} bytes at offset {}) does not fit the {}-byte NOR",
                self.fat_region_len(),
                self.fat_nor_offset,
                self.nor_capacity
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_default_is_valid_with_4096_clusters() {
        let g = FtlGeometry::desk_default();
        g.validate().unwrap();
        assert_eq!(g.cluster_count(), 4096);
        assert_eq!(g.sectors_per_cluster(), 8);
        assert_eq!(g.fat_sectors(), 17);
    }

    #[test]
    fn zero_nand_is_rejected() {
        let g = FtlGeometry {
            nand_capacity: 0,
            nand_data_len: 0,
            ..FtlGeometry::desk_default()
        };
        assert!(g.validate().is_err());
    }

    #[test]
    fn paper_scale_needs_bigger_clusters() {
        // 4 GiB of 4 KiB clusters overflows the FAT16 cluster count.
        let four_gib = 4usize << 30;
        let small = FtlGeometry {
            nor_capacity: 8 << 20,
            nand_capacity: four_gib,
            nand_data_len: four_gib,
            ..FtlGeometry::desk_default()
        };
        assert!(small.validate().is_err());
        // With 64 KiB clusters and the data region capped at the FAT16
        // cluster maximum, a 4 GiB device validates.
        let cluster = 64 * 1024;
        let big = FtlGeometry {
            cluster_size: cluster,
            nand_data_len: MAX_CLUSTERS * cluster,
            ..small
        };
        big.validate().unwrap();
        assert_eq!(big.cluster_count(), MAX_CLUSTERS);
    }
}
