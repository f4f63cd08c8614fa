use std::fmt;

/// Per-device erase/program totals with NAND erases attributed to
/// allocation-table maintenance broken out. Rendered as a flat
/// `key=value` text block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WearReport {
    /// NAND erases caused by file-creation/metadata operations. The whole
    /// point of hosting the FAT on NOR is that this stays zero.
    pub nand_erases_from_fat_ops: u64,
    pub nand_erases_total: u64,
    pub nor_erases_total: u64,
    pub nand_programs_total: u64,
    pub nor_programs_total: u64,
    pub nand_programs_data: u64,
    pub nor_programs_metadata: u64,
}

impl fmt::Display for WearReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nand_erases_from_fat_ops={}", self.nand_erases_from_fat_ops)?;
        writeln!(f, "nand_erases_total={}", self.nand_erases_total)?;
        writeln!(f, "nor_erases_total={}", self.nor_erases_total)?;
        writeln!(f, "nand_programs_total={}", self.nand_programs_total)?;
        writeln!(f, "nor_programs_total={}", self.nor_programs_total)?;
        writeln!(f, "nand_programs_data={}", self.nand_programs_data)?;
        writeln!(f, "nor_programs_metadata={}", self.nor_programs_metadata)
    }
}
