//! On-media FAT16 structures: boot sector, 32-byte directory entries, and
//! the 2-second-granularity FAT timestamps.

use chrono::{Datelike, TimeZone, Timelike, Utc};

use crate::geometry::{FtlGeometry, ROOT_DIR_ENTRIES, SECTOR_SIZE};
use crate::FlashError;

pub const FAT_FREE: u16 = 0x0000;
pub const FAT_EOC: u16 = 0xFFFF;
/// Entries at or above this mark end-of-chain on parse.
pub const FAT_EOC_MIN: u16 = 0xFFF8;
pub const FIRST_DATA_CLUSTER: u16 = 2;
pub const DIR_ENTRY_SIZE: usize = 32;

fn le16(buf: &mut [u8], off: usize, v: u16) {
    buf[off..off + 2].copy_from_slice(&v.to_le_bytes());
}

fn le32(buf: &mut [u8], off: usize, v: u32) {
    buf[off..off + 4].copy_from_slice(&v.to_le_bytes());
}

pub fn read_le16(buf: &[u8], off: usize) -> u16 {
    u16::from_le_bytes([buf[off], buf[off + 1]])
}

pub fn read_le32(buf: &[u8], off: usize) -> u32 {
    u32::from_le_bytes([buf[off], buf[off + 1], buf[off + 2], buf[off + 3]])
}

/// Builds the 512-byte boot sector. The BPB is standard FAT16 except that
/// the hidden-sector field records where the data region starts on the NAND
/// device, which is what lets an extractor reassemble the split volume.
pub fn build_boot_sector(geom: &FtlGeometry) -> [u8; SECTOR_SIZE] {
    let mut s = [0u8; SECTOR_SIZE];
    s[0] = 0xEB;
    s[1] = 0x3C;
    s[2] = 0x90;
    s[3..11].copy_from_slice(b"MSDOS5.0");
    le16(&mut s, 11, SECTOR_SIZE as u16);
    s[13] = geom.sectors_per_cluster() as u8;
    le16(&mut s, 14, 1); // reserved sectors: just the boot sector
    s[16] = 1; // one FAT copy, no mirror
    le16(&mut s, 17, ROOT_DIR_ENTRIES as u16);
    let total_sectors =
        1 + geom.fat_sectors() + geom.root_dir_sectors() + geom.cluster_count() * geom.sectors_per_cluster();
    if total_sectors <= u16::MAX as usize {
        le16(&mut s, 19, total_sectors as u16);
    } else {
        le32(&mut s, 32, total_sectors as u32);
    }
    s[21] = 0xF8; // fixed-disk media descriptor
    le16(&mut s, 22, geom.fat_sectors() as u16);
    le16(&mut s, 24, 63); // sectors/track, unused
    le16(&mut s, 26, 255); // heads, unused
    le32(&mut s, 28, (geom.nand_data_start / SECTOR_SIZE) as u32); // hidden: NAND data start
    s[36] = 0x80; // drive number
    s[38] = 0x29; // extended boot signature
    le32(&mut s, 39, 0x4D50_4649); // volume serial
    s[43..54].copy_from_slice(b"NO NAME    ");
    s[54..62].copy_from_slice(b"FAT16   ");
    s[510] = 0x55;
    s[511] = 0xAA;
    s
}

/// Parsed view of a boot sector that passed the plausibility checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootSector {
    pub sectors_per_cluster: usize,
    pub fat_sectors: usize,
    pub root_dir_entries: usize,
    pub total_sectors: usize,
    /// NAND byte offset of the data region.
    pub nand_data_start: usize,
}

impl BootSector {
    pub fn cluster_size(&self) -> usize {
        self.sectors_per_cluster * SECTOR_SIZE
    }

    pub fn cluster_count(&self) -> usize {
        (self.total_sectors - 1 - self.fat_sectors - self.root_dir_entries * DIR_ENTRY_SIZE / SECTOR_SIZE)
            / self.sectors_per_cluster
    }
}

/// Validates a candidate 512-byte window as our boot sector. Returns `None`
/// on any mismatch; random runtime fill essentially never passes.
pub fn parse_boot_sector(sector: &[u8]) -> Option<BootSector> {
    if sector.len() < SECTOR_SIZE {
        return None;
    }
    if sector[510] != 0x55 || sector[511] != 0xAA {
        return None;
    }
    if sector[0] != 0xEB && sector[0] != 0xE9 {
        return None;
    }
    if read_le16(sector, 11) as usize != SECTOR_SIZE {
        return None;
    }
    let spc = sector[13] as usize;
    if spc == 0 || spc > 128 || !spc.is_power_of_two() {
        return None;
    }
    if read_le16(sector, 14) != 1 || sector[16] != 1 || sector[21] != 0xF8 || sector[38] != 0x29 {
        return None;
    }
    let root_entries = read_le16(sector, 17) as usize;
    if root_entries != ROOT_DIR_ENTRIES {
        return None;
    }
    if &sector[54..62] != b"FAT16   " {
        return None;
    }
    let total16 = read_le16(sector, 19) as usize;
    let total_sectors = if total16 != 0 {
        total16
    } else {
        read_le32(sector, 32) as usize
    };
    let fat_sectors = read_le16(sector, 22) as usize;
    if fat_sectors == 0 || total_sectors <= 1 + fat_sectors {
        return None;
    }
    Some(BootSector {
        sectors_per_cluster: spc,
        fat_sectors,
        root_dir_entries: root_entries,
        total_sectors,
        nand_data_start: read_le32(sector, 28) as usize * SECTOR_SIZE,
    })
}

/// Validates and canonicalizes an `NAME.EXT` 8.3 file name into the padded
/// 11-byte directory form.
pub fn encode_name(name: &str) -> Result<[u8; 11], FlashError> {
    let bad = || FlashError::BadName(name.to_string());
    let (stem, ext) = match name.split_once('.') {
        Some((s, e)) => (s, e),
        None => (name, ""),
    };
    if stem.is_empty() || stem.len() > 8 || ext.len() > 3 {
        return Err(bad());
    }
    let mut out = [b' '; 11];
    for (i, c) in stem.bytes().enumerate() {
        if !c.is_ascii_uppercase() && !c.is_ascii_digit() && c != b'_' && c != b'-' {
            return Err(bad());
        }
        out[i] = c;
    }
    for (i, c) in ext.bytes().enumerate() {
        if !c.is_ascii_uppercase() && !c.is_ascii_digit() {
            return Err(bad());
        }
        out[8 + i] = c;
    }
    Ok(out)
}

pub fn decode_name(raw: &[u8; 11]) -> String {
    let stem = String::from_utf8_lossy(&raw[..8]).trim_end().to_string();
    let ext = String::from_utf8_lossy(&raw[8..]).trim_end().to_string();
    if ext.is_empty() {
        stem
    } else {
        format!("{stem}.{ext}")
    }
}

/// FAT timestamps: 2-second resolution, epoch 1980. Sub-range inputs clamp.
pub fn encode_fat_datetime(unix_seconds: f64) -> (u16, u16) {
    let secs = unix_seconds.max(315_532_800.0) as i64; // 1980-01-01
    let dt = Utc.timestamp_opt(secs, 0).single().expect("valid timestamp");
    let date = (((dt.year() - 1980).clamp(0, 127) as u16) << 9)
        | ((dt.month() as u16) << 5)
        | dt.day() as u16;
    let time = ((dt.hour() as u16) << 11) | ((dt.minute() as u16) << 5) | (dt.second() as u16 / 2);
    (date, time)
}

pub fn decode_fat_datetime(date: u16, time: u16) -> f64 {
    let year = 1980 + (date >> 9) as i32;
    let month = ((date >> 5) & 0xF).max(1) as u32;
    let day = (date & 0x1F).max(1) as u32;
    let hour = (time >> 11) as u32;
    let minute = ((time >> 5) & 0x3F) as u32;
    let second = ((time & 0x1F) * 2) as u32;
    Utc.with_ymd_and_hms(year, month, day, hour, minute, second)
        .single()
        .map(|dt| dt.timestamp() as f64)
        .unwrap_or(0.0)
}

/// One used root-directory entry.
#[derive(Debug, Clone, PartialEq)]
pub struct DirEntry {
    pub name: String,
    pub created_t: f64,
    pub size: u64,
    pub start_cluster: u16,
}

pub fn encode_dir_entry(entry: &DirEntry) -> Result<[u8; DIR_ENTRY_SIZE], FlashError> {
    let mut e = [0u8; DIR_ENTRY_SIZE];
    e[..11].copy_from_slice(&encode_name(&entry.name)?);
    e[11] = 0x20; // archive attribute: a plain file
    let (date, time) = encode_fat_datetime(entry.created_t);
    le16(&mut e, 14, time);
    le16(&mut e, 16, date);
    le16(&mut e, 18, date); // last-access date
    le16(&mut e, 22, time); // write time mirrors creation: files never grow
    le16(&mut e, 24, date);
    le16(&mut e, 26, entry.start_cluster);
    le32(&mut e, 28, entry.size as u32);
    Ok(e)
}

/// Decodes a used directory entry; `None` for never-used or deleted slots.
pub fn decode_dir_entry(raw: &[u8]) -> Option<DirEntry> {
    if raw[0] == 0x00 || raw[0] == 0xE5 {
        return None;
    }
    let mut name = [0u8; 11];
    name.copy_from_slice(&raw[..11]);
    let time = read_le16(raw, 14);
    let date = read_le16(raw, 16);
    Some(DirEntry {
        name: decode_name(&name),
        created_t: decode_fat_datetime(date, time),
        size: read_le32(raw, 28) as u64,
        start_cluster: read_le16(raw, 26),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boot_sector_round_trips() {
        let g = FtlGeometry::desk_default();
        let raw = build_boot_sector(&g);
        let parsed = parse_boot_sector(&raw).expect("own boot sector must parse");
        assert_eq!(parsed.sectors_per_cluster, 8);
        assert_eq!(parsed.fat_sectors, g.fat_sectors());
        assert_eq!(parsed.cluster_count(), g.cluster_count());
        assert_eq!(parsed.nand_data_start, 0);
    }

    #[test]
    fn corrupt_signature_does_not_parse() {
        let g = FtlGeometry::desk_default();
        let mut raw = build_boot_sector(&g);
        raw[511] = 0x00;
        assert!(parse_boot_sector(&raw).is_none());
    }

    #[test]
    fn names_encode_and_decode() {
        assert_eq!(decode_name(&encode_name("IMU00001.BIN").unwrap()), "IMU00001.BIN");
        assert_eq!(decode_name(&encode_name("LOG").unwrap()), "LOG");
        assert!(encode_name("toolongname.bin").is_err());
        assert!(encode_name("lower.bin").is_err());
        assert!(encode_name(".BIN").is_err());
        assert!(encode_name("A.LONG".chars().as_str()).is_err());
    }

    #[test]
    fn fat_datetime_has_two_second_resolution() {
        let t = 1_767_571_200.0 + 3661.0; // 01:01:01 on an even date
        let (date, time) = encode_fat_datetime(t);
        let back = decode_fat_datetime(date, time);
        assert!((back - t).abs() <= 1.0, "off by {}", back - t);
    }

    #[test]
    fn dir_entry_round_trips() {
        let entry = DirEntry {
            name: "PPG00002.BIN".into(),
            created_t: 1_767_571_200.0,
            size: 2_076_672,
            start_cluster: 509,
        };
        let raw = encode_dir_entry(&entry).unwrap();
        let back = decode_dir_entry(&raw).unwrap();
        assert_eq!(back, entry);
    }
}
