//! Regional GHG satellite account, emissions factors and emissions impacts.
//!
//! A national inventory (MT CO2-eq per sector) is disaggregated to regions.
//! Large-facility records are placed directly; the uncovered remainder of
//! each sector is spread by proxy shares. When facilities report more than
//! the national control total, they are scaled down proportionally so that
//! every sector still sums to its national value.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::accounts::RegionSectorVector;
use crate::index::{IndexError, RegionSectorIndex, SectorCode};
use crate::mrio::{same_index, ImpactVector};

/// Relative tolerance on shares and conservation checks.
pub const SHARE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SatelliteError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("facility in region `{region}` references unknown sector `{sector}`")]
    UnknownSectorInFacility { region: String, sector: String },
    #[error("facility references unknown region `{0}`")]
    UnknownRegionInFacility(String),
    #[error("national inventory references sector `{0}` missing from the taxonomy")]
    UnknownSectorInInventory(String),
    #[error("sector {0} has unallocated emissions but no proxy shares")]
    ProxyMissingForSector(String),
    #[error("proxy shares for sector {sector} sum to {sum}, expected 1")]
    ProxySharesInvalid { sector: String, sum: f64 },
    #[error("invalid emissions value {value} in {what}")]
    InvalidEmissions { what: String, value: f64 },
    #[error("the wind energy sector is emission-free but {0} assigns it emissions")]
    EmissionsInWindSector(&'static str),
    #[error("vectors are laid out over different indices")]
    IndexMismatch,
    #[error("negative or non-finite industry output {value} at {position}")]
    NegativeOutput { position: String, value: f64 },
    #[error("concordance weights for source `{source_code}` sum to {sum}, expected 1")]
    ConcordanceWeights { source_code: String, sum: f64 },
    #[error("source code `{0}` has no concordance rows")]
    UnmappedSource(String),
}

fn check_emissions(what: impl Into<String>, value: f64) -> Result<(), SatelliteError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(SatelliteError::InvalidEmissions {
            what: what.into(),
            value,
        })
    }
}

/// National emissions by sector, MT CO2-eq per year. Missing sectors are zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NationalInventory {
    emissions: BTreeMap<SectorCode, f64>,
}

impl NationalInventory {
    pub fn new(emissions: BTreeMap<SectorCode, f64>) -> Result<Self, SatelliteError> {
        for (s, &v) in &emissions {
            check_emissions(alloc::format!("national inventory sector {s}"), v)?;
        }
        Ok(NationalInventory { emissions })
    }

    pub fn get(&self, sector: SectorCode) -> f64 {
        self.emissions.get(&sector).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (SectorCode, f64)> + '_ {
        self.emissions.iter().map(|(k, v)| (*k, *v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacilityRecord {
    pub region: String,
    pub sector: SectorCode,
    pub emissions: f64,
}

/// Per-sector regional allocation fractions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProxyShares {
    shares: BTreeMap<SectorCode, BTreeMap<String, f64>>,
}

impl ProxyShares {
    /// Each sector's fractions must be nonnegative and sum to one within
    /// [`SHARE_TOLERANCE`].
    pub fn new(shares: BTreeMap<SectorCode, BTreeMap<String, f64>>) -> Result<Self, SatelliteError> {
        for (sector, row) in &shares {
            let sum: f64 = row.values().sum();
            let bad = row.values().any(|v| !v.is_finite() || *v < 0.0);
            if bad || (sum - 1.0).abs() > SHARE_TOLERANCE {
                return Err(SatelliteError::ProxySharesInvalid {
                    sector: sector.to_string(),
                    sum,
                });
            }
        }
        Ok(ProxyShares { shares })
    }

    /// Regional output shares per sector: the economic fallback proxy.
    /// Sectors with zero national output get no row.
    pub fn from_output(index: &RegionSectorIndex, output: &[f64]) -> Result<Self, SatelliteError> {
        if output.len() != index.len() {
            return Err(SatelliteError::IndexMismatch);
        }
        let mut shares = BTreeMap::new();
        for s in 0..index.n_sectors() {
            let total: f64 = (0..index.n_regions()).map(|r| output[index.flatten(r, s)]).sum();
            if !(total > 0.0) {
                continue;
            }
            let row = (0..index.n_regions())
                .map(|r| (index.region(r).code.clone(), output[index.flatten(r, s)] / total))
                .collect();
            shares.insert(index.sector(s).code, row);
        }
        ProxyShares::new(shares)
    }

    pub fn sector(&self, sector: SectorCode) -> Option<&BTreeMap<String, f64>> {
        self.shares.get(&sector)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SectorCode, &BTreeMap<String, f64>)> {
        self.shares.iter()
    }
}

/// Many-to-one bridge from source classification codes to NAICS sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Concordance {
    rows: BTreeMap<String, Vec<(SectorCode, f64)>>,
}

impl Concordance {
    /// Rows are `(source code, NAICS code of 3-6 digits, weight)`. A source's
    /// weights must sum to one.
    pub fn new<'a>(rows: impl IntoIterator<Item = (&'a str, &'a str, f64)>) -> Result<Self, SatelliteError> {
        let mut map: BTreeMap<String, Vec<(SectorCode, f64)>> = BTreeMap::new();
        for (source, naics, weight) in rows {
            let code = SectorCode::from_naics_prefix(naics)?;
            map.entry(source.to_string()).or_default().push((code, weight));
        }
        for (source, targets) in &map {
            let sum: f64 = targets.iter().map(|t| t.1).sum();
            let bad = targets.iter().any(|t| !t.1.is_finite() || t.1 < 0.0);
            if bad || (sum - 1.0).abs() > SHARE_TOLERANCE {
                return Err(SatelliteError::ConcordanceWeights {
                    source_code: source.clone(),
                    sum,
                });
            }
        }
        Ok(Concordance { rows: map })
    }

    /// Re-expresses an inventory keyed by source code in NAICS sectors.
    pub fn apply<'a>(
        &self,
        source: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<NationalInventory, SatelliteError> {
        let mut out: BTreeMap<SectorCode, f64> = BTreeMap::new();
        for (code, value) in source {
            check_emissions(alloc::format!("source inventory `{code}`"), value)?;
            let targets = self
                .rows
                .get(code)
                .ok_or_else(|| SatelliteError::UnmappedSource(code.to_string()))?;
            for (sector, w) in targets {
                *out.entry(*sector).or_insert(0.0) += value * w;
            }
        }
        NationalInventory::new(out)
    }
}

/// Region-by-sector emissions, MT CO2-eq per year.
#[derive(Debug, Clone, PartialEq)]
pub struct SatelliteAccount {
    index: Arc<RegionSectorIndex>,
    emissions: Vec<f64>,
}

impl SatelliteAccount {
    pub fn new(index: Arc<RegionSectorIndex>, emissions: Vec<f64>) -> Result<Self, SatelliteError> {
        if emissions.len() != index.len() {
            return Err(SatelliteError::IndexMismatch);
        }
        for (i, &v) in emissions.iter().enumerate() {
            check_emissions(index.label(i), v)?;
        }
        if index.wind_positions().iter().any(|&i| emissions[i] != 0.0) {
            return Err(SatelliteError::EmissionsInWindSector("the satellite account"));
        }
        Ok(SatelliteAccount { index, emissions })
    }
}

impl RegionSectorVector for SatelliteAccount {
    fn index(&self) -> &Arc<RegionSectorIndex> {
        &self.index
    }
    fn values(&self) -> &[f64] {
        &self.emissions
    }
}

/// Every taxonomy or share problem in the satellite inputs, without stopping
/// at the first.
pub fn audit_inputs(
    index: &RegionSectorIndex,
    national: &NationalInventory,
    facilities: &[FacilityRecord],
    proxy: &ProxyShares,
) -> Vec<SatelliteError> {
    let mut findings = Vec::new();
    for (s, v) in national.iter() {
        if index.sector_position(s).is_none() {
            findings.push(SatelliteError::UnknownSectorInInventory(s.to_string()));
        } else if s.is_wind() && v > 0.0 {
            findings.push(SatelliteError::EmissionsInWindSector("the national inventory"));
        }
    }
    for f in facilities {
        if index.region_position(&f.region).is_none() {
            findings.push(SatelliteError::UnknownRegionInFacility(f.region.clone()));
        }
        if index.sector_position(f.sector).is_none() {
            findings.push(SatelliteError::UnknownSectorInFacility {
                region: f.region.clone(),
                sector: f.sector.to_string(),
            });
        } else if f.sector.is_wind() && f.emissions > 0.0 {
            findings.push(SatelliteError::EmissionsInWindSector("a facility record"));
        }
        if let Err(e) = check_emissions(alloc::format!("facility in {}", f.region), f.emissions) {
            findings.push(e);
        }
    }
    for (s, row) in proxy.iter() {
        for region in row.keys() {
            if index.region_position(region).is_none() {
                findings.push(SatelliteError::Index(IndexError::UnknownRegion(region.clone())));
            }
        }
        if index.sector_position(*s).is_none() {
            findings.push(SatelliteError::Index(IndexError::UnknownSector(s.to_string())));
        }
    }
    findings
}

/// Disaggregates the national inventory to the region-by-sector layout.
///
/// Per sector: facility emissions are summed per region (in sorted order, so
/// the result does not depend on record order). A nonnegative remainder is
/// allocated by proxy share; a negative one scales the facility totals down
/// to the national value.
pub fn regionalize(
    index: Arc<RegionSectorIndex>,
    national: &NationalInventory,
    facilities: &[FacilityRecord],
    proxy: &ProxyShares,
) -> Result<SatelliteAccount, SatelliteError> {
    for (s, _) in national.iter() {
        if index.sector_position(s).is_none() {
            return Err(SatelliteError::UnknownSectorInInventory(s.to_string()));
        }
    }
    let n = index.len();
    let mut cells: Vec<Vec<f64>> = vec![Vec::new(); n];
    for f in facilities {
        check_emissions(alloc::format!("facility in {}", f.region), f.emissions)?;
        let r = index
            .region_position(&f.region)
            .ok_or_else(|| SatelliteError::UnknownRegionInFacility(f.region.clone()))?;
        let s = index
            .sector_position(f.sector)
            .ok_or_else(|| SatelliteError::UnknownSectorInFacility {
                region: f.region.clone(),
                sector: f.sector.to_string(),
            })?;
        cells[index.flatten(r, s)].push(f.emissions);
    }
    let covered: Vec<f64> = cells
        .into_iter()
        .map(|mut c| {
            c.sort_by(f64::total_cmp);
            c.iter().sum()
        })
        .collect();

    let mut emissions = vec![0.0; n];
    for s in 0..index.n_sectors() {
        let code = index.sector(s).code;
        let target = national.get(code);
        let positions: Vec<usize> = (0..index.n_regions()).map(|r| index.flatten(r, s)).collect();
        let cov_total: f64 = positions.iter().map(|&i| covered[i]).sum();
        if code.is_wind() {
            if target > 0.0 {
                return Err(SatelliteError::EmissionsInWindSector("the national inventory"));
            }
            if cov_total > 0.0 {
                return Err(SatelliteError::EmissionsInWindSector("a facility record"));
            }
            continue;
        }
        let residual = target - cov_total;
        if residual >= 0.0 {
            for &i in &positions {
                emissions[i] = covered[i];
            }
            if residual > 1e-12 * target {
                let row = proxy
                    .sector(code)
                    .ok_or_else(|| SatelliteError::ProxyMissingForSector(code.to_string()))?;
                let share_sum: f64 = row.values().sum();
                for (region, share) in row {
                    let r = index.require_region(region)?;
                    emissions[index.flatten(r, s)] += residual * (share / share_sum);
                }
            }
        } else {
            let scale = target / cov_total;
            for &i in &positions {
                emissions[i] = covered[i] * scale;
            }
        }
    }
    Ok(SatelliteAccount { index, emissions })
}

/// Emissions per unit of industry output, MT CO2-eq per million USD.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionsFactors {
    index: Arc<RegionSectorIndex>,
    ef: Vec<f64>,
}

impl RegionSectorVector for EmissionsFactors {
    fn index(&self) -> &Arc<RegionSectorIndex> {
        &self.index
    }
    fn values(&self) -> &[f64] {
        &self.ef
    }
}

/// `ef[i] = emissions[i] / output[i]`, zero where output is zero.
pub fn emissions_factors(sat: &SatelliteAccount, total_output: &[f64]) -> Result<EmissionsFactors, SatelliteError> {
    if total_output.len() != sat.index.len() {
        return Err(SatelliteError::IndexMismatch);
    }
    let ef = sat
        .emissions
        .iter()
        .zip(total_output)
        .enumerate()
        .map(|(i, (&e, &o))| {
            if !o.is_finite() || o < 0.0 {
                Err(SatelliteError::NegativeOutput {
                    position: sat.index.label(i),
                    value: o,
                })
            } else if o > 0.0 {
                Ok(e / o)
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EmissionsFactors {
        index: sat.index.clone(),
        ef,
    })
}

/// Emissions induced by an economic impact, MT CO2-eq.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionsImpact {
    index: Arc<RegionSectorIndex>,
    values: Vec<f64>,
}

impl RegionSectorVector for EmissionsImpact {
    fn index(&self) -> &Arc<RegionSectorIndex> {
        &self.index
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Elementwise `dE = ef * dx`.
pub fn emissions_impact(ef: &EmissionsFactors, dx: &ImpactVector) -> Result<EmissionsImpact, SatelliteError> {
    same_index(&ef.index, dx.index()).map_err(|_| SatelliteError::IndexMismatch)?;
    Ok(EmissionsImpact {
        index: ef.index.clone(),
        values: ef.ef.iter().zip(dx.values()).map(|(f, x)| f * x).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{Region, Sector};

    fn index() -> Arc<RegionSectorIndex> {
        let r = ["A", "B"].iter().map(|c| Region::new(*c, "").unwrap()).collect();
        let s = ["111", "222", "WIND"]
            .iter()
            .map(|c| Sector::parse(c, "").unwrap())
            .collect();
        Arc::new(RegionSectorIndex::new(r, s).unwrap())
    }

    fn code(s: &str) -> SectorCode {
        s.parse().unwrap()
    }

    fn inventory(pairs: &[(&str, f64)]) -> NationalInventory {
        NationalInventory::new(pairs.iter().map(|(c, v)| (code(c), *v)).collect()).unwrap()
    }

    fn proxy(pairs: &[(&str, &[(&str, f64)])]) -> ProxyShares {
        ProxyShares::new(
            pairs
                .iter()
                .map(|(c, row)| (code(c), row.iter().map(|(r, v)| (r.to_string(), *v)).collect()))
                .collect(),
        )
        .unwrap()
    }

    fn fac(region: &str, sector: &str, e: f64) -> FacilityRecord {
        FacilityRecord {
            region: region.into(),
            sector: code(sector),
            emissions: e,
        }
    }

    #[test]
    fn pure_proxy_split() {
        let idx = index();
        let sat = regionalize(
            idx.clone(),
            &inventory(&[("111", 100.0)]),
            &[],
            &proxy(&[("111", &[("A", 0.5), ("B", 0.5)])]),
        )
        .unwrap();
        assert_eq!(sat.values()[idx.position("A", code("111")).unwrap()], 50.0);
        assert_eq!(sat.values()[idx.position("B", code("111")).unwrap()], 50.0);
    }

    #[test]
    fn residual_goes_to_proxy_region() {
        let idx = index();
        let sat = regionalize(
            idx.clone(),
            &inventory(&[("111", 100.0)]),
            &[fac("A", "111", 90.0)],
            &proxy(&[("111", &[("B", 1.0)])]),
        )
        .unwrap();
        assert_eq!(sat.values()[idx.position("A", code("111")).unwrap()], 90.0);
        assert_eq!(sat.values()[idx.position("B", code("111")).unwrap()], 10.0);
    }

    #[test]
    fn over_coverage_scaled_down() {
        let idx = index();
        let sat = regionalize(
            idx.clone(),
            &inventory(&[("111", 100.0)]),
            &[fac("A", "111", 55.0), fac("B", "111", 55.0)],
            &ProxyShares::default(),
        )
        .unwrap();
        assert!((sat.values()[idx.position("A", code("111")).unwrap()] - 50.0).abs() < 1e-12);
        assert!((sat.values()[idx.position("B", code("111")).unwrap()] - 50.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let idx = index();
        let err = regionalize(
            idx.clone(),
            &inventory(&[("111", 100.0)]),
            &[fac("A", "999", 1.0)],
            &ProxyShares::default(),
        )
        .unwrap_err();
        assert!(matches!(err, SatelliteError::UnknownSectorInFacility { .. }));
        let err = regionalize(idx.clone(), &inventory(&[("222", 5.0)]), &[], &ProxyShares::default()).unwrap_err();
        assert_eq!(err, SatelliteError::ProxyMissingForSector("222".into()));
        // fully covered: no proxy needed
        regionalize(idx.clone(), &inventory(&[("222", 5.0)]), &[fac("B", "222", 5.0)], &ProxyShares::default())
            .unwrap();
        let err = regionalize(idx.clone(), &inventory(&[("WIND", 5.0)]), &[], &ProxyShares::default()).unwrap_err();
        assert!(matches!(err, SatelliteError::EmissionsInWindSector(_)));
        assert!(matches!(
            ProxyShares::new([(code("111"), [("A".to_string(), 0.7)].into_iter().collect())].into_iter().collect()),
            Err(SatelliteError::ProxySharesInvalid { .. })
        ));
        assert!(NationalInventory::new([(code("111"), -1.0)].into_iter().collect()).is_err());
    }

    #[test]
    fn factors_and_impacts() {
        let idx = index();
        let mut e = vec![0.0; 6];
        e[0] = 50.0;
        e[1] = 3.0;
        let sat = SatelliteAccount::new(idx.clone(), e).unwrap();
        let mut out = vec![1.0; 6];
        out[0] = 25.0;
        out[1] = 0.0;
        let ef = emissions_factors(&sat, &out).unwrap();
        assert_eq!(ef.values()[0], 2.0);
        assert_eq!(ef.values()[1], 0.0);
        for w in idx.wind_positions() {
            assert_eq!(ef.values()[w], 0.0);
        }
        out[3] = -1.0;
        assert!(matches!(
            emissions_factors(&sat, &out),
            Err(SatelliteError::NegativeOutput { .. })
        ));

        let r = [Region::new("A", "").unwrap()].to_vec();
        let s = ["111", "222"].iter().map(|c| Sector::parse(c, "").unwrap()).collect();
        let small = Arc::new(RegionSectorIndex::new(r, s).unwrap());
        let sat = SatelliteAccount::new(small.clone(), vec![20.0, 1.0]).unwrap();
        let ef = emissions_factors(&sat, &[10.0, 2.0]).unwrap();
        let dx = ImpactVector::new(small.clone(), vec![10.0, 4.0]).unwrap();
        assert_eq!(emissions_impact(&ef, &dx).unwrap().values(), &[20.0, 2.0]);
        let zero = emissions_factors(&SatelliteAccount::new(small.clone(), vec![0.0, 0.0]).unwrap(), &[1.0, 1.0]).unwrap();
        assert_eq!(emissions_impact(&zero, &dx).unwrap().values(), &[0.0, 0.0]);
        let other = ImpactVector::new(idx, vec![0.0; 6]).unwrap();
        assert_eq!(emissions_impact(&ef, &other).unwrap_err(), SatelliteError::IndexMismatch);
    }

    #[test]
    fn output_proxy_and_concordance() {
        let idx = index();
        let out = vec![1.0, 0.0, 0.0, 3.0, 0.0, 0.0];
        let p = ProxyShares::from_output(&idx, &out).unwrap();
        let row = p.sector(code("111")).unwrap();
        assert_eq!(row["A"], 0.25);
        assert_eq!(row["B"], 0.75);
        assert!(p.sector(code("222")).is_none());

        let c = Concordance::new([("S1", "111110", 0.6), ("S1", "222", 0.4), ("S2", "111", 1.0)]).unwrap();
        let inv = c.apply([("S1", 10.0), ("S2", 1.0)]).unwrap();
        assert_eq!(inv.get(code("111")), 7.0);
        assert_eq!(inv.get(code("222")), 4.0);
        assert_eq!(c.apply([("S3", 1.0)]).unwrap_err(), SatelliteError::UnmappedSource("S3".into()));
        assert!(matches!(
            Concordance::new([("S1", "111", 0.6)]),
            Err(SatelliteError::ConcordanceWeights { .. })
        ));
    }
}
