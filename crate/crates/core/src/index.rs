//! Region and sector taxonomies and the canonical flat layout.
//!
//! Every vector and matrix in the engine is laid out region-major: all sectors
//! of region 0, then all sectors of region 1, and so on. The flat position of
//! `(region r, sector s)` is `r * n_sectors + s`, which makes each
//! region-to-region block of a matrix a contiguous range of rows/columns.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IndexError {
    #[error("taxonomy of {0} is empty")]
    EmptyTaxonomy(&'static str),
    #[error("duplicate code `{0}`")]
    DuplicateCode(String),
    #[error("invalid region code `{0}` (expected uppercase ASCII letters, digits, `_` or `-`)")]
    InvalidRegionCode(String),
    #[error("invalid sector code `{0}` (expected 3 ASCII digits or `WIND`)")]
    InvalidSectorCode(String),
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("unknown sector `{0}`")]
    UnknownSector(String),
    #[error("malformed region:sector label `{0}`")]
    MalformedLabel(String),
}

/// A geographic region, e.g. a US state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub code: String,
    pub name: String,
}

impl Region {
    pub fn new(code: impl Into<String>, name: impl Into<String>) -> Result<Self, IndexError> {
        let code = code.into();
        let valid = !code.is_empty()
            && code
                .bytes()
                .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit() || b == b'_' || b == b'-');
        if !valid {
            return Err(IndexError::InvalidRegionCode(code));
        }
        Ok(Region {
            code,
            name: name.into(),
        })
    }
}

/// Sector identifier: a 3-digit NAICS subsector or the dedicated wind energy sector.
///
/// Ordering matches the ordering of the textual codes (`"111" < "999" < "WIND"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SectorCode {
    Naics([u8; 3]),
    Wind,
}

impl SectorCode {
    pub const WIND_TAG: &'static str = "WIND";

    /// Truncates a NAICS code of 3 to 6 digits to its 3-digit subsector.
    pub fn from_naics_prefix(code: &str) -> Result<Self, IndexError> {
        let code = code.trim();
        if code.len() < 3 || code.len() > 6 || !code.bytes().all(|b| b.is_ascii_digit()) {
            return Err(IndexError::InvalidSectorCode(code.to_string()));
        }
        let b = code.as_bytes();
        Ok(SectorCode::Naics([b[0], b[1], b[2]]))
    }

    pub fn is_wind(&self) -> bool {
        matches!(self, SectorCode::Wind)
    }
}

impl FromStr for SectorCode {
    type Err = IndexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == Self::WIND_TAG {
            return Ok(SectorCode::Wind);
        }
        let b = s.as_bytes();
        if b.len() == 3 && b.iter().all(|c| c.is_ascii_digit()) {
            Ok(SectorCode::Naics([b[0], b[1], b[2]]))
        } else {
            Err(IndexError::InvalidSectorCode(s.to_string()))
        }
    }
}

impl fmt::Display for SectorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectorCode::Naics(d) => {
                // digits are validated ASCII on construction
                let s = core::str::from_utf8(d).map_err(|_| fmt::Error)?;
                f.write_str(s)
            }
            SectorCode::Wind => f.write_str(Self::WIND_TAG),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sector {
    pub code: SectorCode,
    pub name: String,
}

impl Sector {
    pub fn new(code: SectorCode, name: impl Into<String>) -> Self {
        Sector {
            code,
            name: name.into(),
        }
    }

    pub fn parse(code: &str, name: impl Into<String>) -> Result<Self, IndexError> {
        Ok(Sector::new(code.parse()?, name))
    }
}

/// Bijection between `(region, sector)` pairs and flat positions `0..n`.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct RegionSectorIndex {
    regions: Vec<Region>,
    sectors: Vec<Sector>,
    region_lookup: BTreeMap<String, usize>,
    sector_lookup: BTreeMap<SectorCode, usize>,
}

impl PartialEq for RegionSectorIndex {
    fn eq(&self, other: &Self) -> bool {
        self.regions == other.regions && self.sectors == other.sectors
    }
}

impl Eq for RegionSectorIndex {}

impl RegionSectorIndex {
    /// Builds the index. Both lists must be nonempty and free of duplicate codes.
    pub fn new(regions: Vec<Region>, sectors: Vec<Sector>) -> Result<Self, IndexError> {
        if regions.is_empty() {
            return Err(IndexError::EmptyTaxonomy("regions"));
        }
        if sectors.is_empty() {
            return Err(IndexError::EmptyTaxonomy("sectors"));
        }
        let mut region_lookup = BTreeMap::new();
        for (i, r) in regions.iter().enumerate() {
            if region_lookup.insert(r.code.clone(), i).is_some() {
                return Err(IndexError::DuplicateCode(r.code.clone()));
            }
        }
        let mut sector_lookup = BTreeMap::new();
        for (i, s) in sectors.iter().enumerate() {
            if sector_lookup.insert(s.code, i).is_some() {
                return Err(IndexError::DuplicateCode(s.code.to_string()));
            }
        }
        Ok(RegionSectorIndex {
            regions,
            sectors,
            region_lookup,
            sector_lookup,
        })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn n_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn n_sectors(&self) -> usize {
        self.sectors.len()
    }

    /// Dimension `n = |regions| * |sectors|`.
    pub fn len(&self) -> usize {
        self.regions.len() * self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn flatten(&self, region: usize, sector: usize) -> usize {
        debug_assert!(region < self.n_regions() && sector < self.n_sectors());
        region * self.sectors.len() + sector
    }

    #[inline]
    pub fn unflatten(&self, flat: usize) -> (usize, usize) {
        debug_assert!(flat < self.len());
        (flat / self.sectors.len(), flat % self.sectors.len())
    }

    pub fn region_position(&self, code: &str) -> Option<usize> {
        self.region_lookup.get(code).copied()
    }

    pub fn sector_position(&self, code: SectorCode) -> Option<usize> {
        self.sector_lookup.get(&code).copied()
    }

    pub fn require_region(&self, code: &str) -> Result<usize, IndexError> {
        self.region_position(code)
            .ok_or_else(|| IndexError::UnknownRegion(code.to_string()))
    }

    pub fn require_sector(&self, code: SectorCode) -> Result<usize, IndexError> {
        self.sector_position(code)
            .ok_or_else(|| IndexError::UnknownSector(code.to_string()))
    }

    /// Half-open flat range covering every sector of region `region`.
    pub fn block(&self, region: usize) -> Range<usize> {
        let k = self.sectors.len();
        region * k..(region + 1) * k
    }

    /// Flat range of a region looked up by code.
    pub fn block_of(&self, code: &str) -> Result<Range<usize>, IndexError> {
        Ok(self.block(self.require_region(code)?))
    }

    /// Flat position of a `(region code, sector code)` pair.
    pub fn position(&self, region: &str, sector: SectorCode) -> Result<usize, IndexError> {
        Ok(self.flatten(self.require_region(region)?, self.require_sector(sector)?))
    }

    /// `REGION:SECTOR` label of a flat position.
    pub fn label(&self, flat: usize) -> String {
        let (r, s) = self.unflatten(flat);
        format!("{}:{}", self.regions[r].code, self.sectors[s].code)
    }

    /// Parses a `REGION:SECTOR` label into a flat position.
    pub fn parse_label(&self, label: &str) -> Result<usize, IndexError> {
        let (region, sector) = label
            .trim()
            .split_once(':')
            .ok_or_else(|| IndexError::MalformedLabel(label.to_string()))?;
        self.position(region, sector.parse()?)
    }

    pub fn region(&self, r: usize) -> &Region {
        &self.regions[r]
    }

    pub fn sector(&self, s: usize) -> &Sector {
        &self.sectors[s]
    }

    /// Positions of the wind energy sector in every region, if the taxonomy has one.
    pub fn wind_positions(&self) -> Vec<usize> {
        match self.sector_position(SectorCode::Wind) {
            Some(s) => (0..self.n_regions()).map(|r| self.flatten(r, s)).collect(),
            None => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn regions(n: usize) -> Vec<Region> {
        (0..n)
            .map(|i| Region::new(format!("R{i}"), format!("Region {i}")).unwrap())
            .collect()
    }

    fn sectors(n: usize) -> Vec<Sector> {
        (0..n)
            .map(|i| Sector::parse(&format!("{:03}", 100 + i), format!("Sector {i}")).unwrap())
            .collect()
    }

    #[test]
    fn singleton() {
        let idx = RegionSectorIndex::new(regions(1), sectors(1)).unwrap();
        assert_eq!(idx.len(), 1);
        assert_eq!(idx.flatten(0, 0), 0);
    }

    #[test]
    fn full_scale_dimension() {
        let idx = RegionSectorIndex::new(regions(52), sectors(101)).unwrap();
        assert_eq!(idx.len(), 5252);
        assert_eq!(idx.block(51), 5151..5252);
    }

    #[test]
    fn flatten_and_blocks() {
        let idx = RegionSectorIndex::new(regions(3), sectors(4)).unwrap();
        assert_eq!(idx.flatten(2, 1), 9);
        assert_eq!(idx.block_of("R1").unwrap(), 4..8);
        let one = RegionSectorIndex::new(regions(1), sectors(7)).unwrap();
        assert_eq!(one.block_of("R0").unwrap(), 0..7);
    }

    #[test]
    fn bijection_exhaustive() {
        let idx = RegionSectorIndex::new(regions(5), sectors(7)).unwrap();
        let mut seen = vec![false; idx.len()];
        for r in 0..5 {
            for s in 0..7 {
                let f = idx.flatten(r, s);
                assert!(!seen[f]);
                seen[f] = true;
                assert_eq!(idx.unflatten(f), (r, s));
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn errors() {
        assert_eq!(
            RegionSectorIndex::new(vec![], sectors(1)).unwrap_err(),
            IndexError::EmptyTaxonomy("regions")
        );
        assert_eq!(
            RegionSectorIndex::new(regions(1), vec![]).unwrap_err(),
            IndexError::EmptyTaxonomy("sectors")
        );
        let mut dup = regions(2);
        dup.push(Region::new("R0", "again").unwrap());
        assert_eq!(
            RegionSectorIndex::new(dup, sectors(1)).unwrap_err(),
            IndexError::DuplicateCode("R0".into())
        );
        let dup_s = vec![Sector::parse("333", "a").unwrap(), Sector::parse("333", "b").unwrap()];
        assert_eq!(
            RegionSectorIndex::new(regions(1), dup_s).unwrap_err(),
            IndexError::DuplicateCode("333".into())
        );
        let idx = RegionSectorIndex::new(regions(2), sectors(2)).unwrap();
        assert_eq!(
            idx.block_of("XX").unwrap_err(),
            IndexError::UnknownRegion("XX".into())
        );
        assert!(Region::new("va", "lower").is_err());
        assert!(Region::new("", "empty").is_err());
    }

    #[test]
    fn sector_codes() {
        assert_eq!("333".parse::<SectorCode>().unwrap(), SectorCode::Naics(*b"333"));
        assert_eq!("WIND".parse::<SectorCode>().unwrap(), SectorCode::Wind);
        assert!("33".parse::<SectorCode>().is_err());
        assert!("3a3".parse::<SectorCode>().is_err());
        assert_eq!(
            SectorCode::from_naics_prefix("237130").unwrap(),
            SectorCode::Naics(*b"237")
        );
        assert!(SectorCode::from_naics_prefix("5242100").is_err());
        assert!(SectorCode::Naics(*b"999") < SectorCode::Wind);
        assert_eq!(SectorCode::Wind.to_string(), "WIND");
    }

    #[test]
    fn labels_round_trip() {
        let idx = RegionSectorIndex::new(regions(3), sectors(2)).unwrap();
        for i in 0..idx.len() {
            assert_eq!(idx.parse_label(&idx.label(i)).unwrap(), i);
        }
        assert!(matches!(idx.parse_label("R0-100"), Err(IndexError::MalformedLabel(_))));
    }
}
