//! CSV input readers. Every error names the file and, where possible, the line.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use eemrio_core::linalg::DenseMatrix;
use eemrio_core::payback::{GridTrajectory, SccSchedule};
use eemrio_core::satellite::{Concordance, FacilityRecord, NationalInventory, ProxyShares};
use eemrio_core::wind_cost::{CostParameters, NaicsMapping, WeatherSeries};
use eemrio_core::{Region, RegionSectorIndex, Sector, SectorCode};

pub const SHIPPED_COST_PARAMS: &str = include_str!("../data/cost_params.csv");
pub const SHIPPED_NAICS_MAP: &str = include_str!("../data/cost_naics_map.csv");
pub const SHIPPED_CALIBRATION_TARGETS: &str = include_str!("../data/calibration_targets.csv");

/// A CSV file with a checked header. Fields are trimmed.
struct Table {
    name: String,
    header: Vec<String>,
    rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    fn read(path: &Path) -> Result<Table> {
        let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        Self::parse(path.display().to_string(), file)
    }

    fn parse(name: String, input: impl std::io::Read) -> Result<Table> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(input);
        let header = rdr
            .headers()
            .with_context(|| format!("{name}: reading header"))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.with_context(|| format!("{name}: malformed row"))?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec.iter().map(str::to_string).collect()));
        }
        Ok(Table { name, header, rows })
    }

    fn expect(&self, columns: &[&str]) -> Result<()> {
        if self.header != columns {
            bail!(
                "{}: expected header `{}`, found `{}`",
                self.name,
                columns.join(","),
                self.header.join(",")
            );
        }
        Ok(())
    }

    fn at(&self, line: u64) -> String {
        format!("{}:{line}", self.name)
    }

    fn num(&self, line: u64, field: &str, what: &str) -> Result<f64> {
        let v: f64 = field
            .parse()
            .map_err(|_| anyhow!("{}: {what} `{field}` is not a number", self.at(line)))?;
        if !v.is_finite() {
            bail!("{}: {what} must be finite", self.at(line));
        }
        Ok(v)
    }

    fn opt_num(&self, line: u64, field: &str, what: &str) -> Result<Option<f64>> {
        if field.is_empty() {
            Ok(None)
        } else {
            self.num(line, field, what).map(Some)
        }
    }
}

pub fn read_regions(path: &Path) -> Result<Vec<Region>> {
    let t = Table::read(path)?;
    t.expect(&["code", "name"])?;
    t.rows
        .iter()
        .map(|(line, r)| Region::new(r[0].as_str(), r[1].as_str()).with_context(|| t.at(*line)))
        .collect()
}

pub fn read_sectors(path: &Path) -> Result<Vec<Sector>> {
    let t = Table::read(path)?;
    t.expect(&["naics", "name"])?;
    t.rows
        .iter()
        .map(|(line, r)| Sector::parse(&r[0], r[1].as_str()).with_context(|| t.at(*line)))
        .collect()
}

/// Dense labelled matrix: the header holds column labels after one corner
/// cell, every row starts with its label. Rows and columns may come in any
/// order but each label must appear exactly once.
pub fn read_matrix(path: &Path, rows: &RegionSectorIndex, cols: &RegionSectorIndex) -> Result<DenseMatrix> {
    let t = Table::read(path)?;
    let name = &t.name;
    let mut col_pos = Vec::with_capacity(cols.len());
    let mut seen = vec![false; cols.len()];
    for label in t.header.iter().skip(1) {
        let j = cols.parse_label(label).with_context(|| format!("{name}: column `{label}`"))?;
        if std::mem::replace(&mut seen[j], true) {
            bail!("{name}: duplicate column `{label}`");
        }
        col_pos.push(j);
    }
    if let Some(j) = seen.iter().position(|s| !s) {
        bail!("{name}: missing column `{}`", cols.label(j));
    }
    let mut m = DenseMatrix::zeros(rows.len(), cols.len());
    let mut seen = vec![false; rows.len()];
    for (line, rec) in &t.rows {
        let i = rows.parse_label(&rec[0]).with_context(|| t.at(*line))?;
        if std::mem::replace(&mut seen[i], true) {
            bail!("{}: duplicate row `{}`", t.at(*line), rec[0]);
        }
        for (field, &j) in rec.iter().skip(1).zip(&col_pos) {
            m.set(i, j, t.num(*line, field, "value")?);
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        bail!("{name}: missing row `{}`", rows.label(i));
    }
    Ok(m)
}

/// `region,sector,<value>` vector. With `complete` every position must be
/// present; otherwise missing positions are zero.
pub fn read_vector(path: &Path, index: &RegionSectorIndex, value_column: &str, complete: bool) -> Result<Vec<f64>> {
    let t = Table::read(path)?;
    t.expect(&["region", "sector", value_column])?;
    let mut out = vec![0.0; index.len()];
    let mut seen = vec![false; index.len()];
    for (line, r) in &t.rows {
        let sector: SectorCode = r[1].parse().with_context(|| t.at(*line))?;
        let p = index.position(&r[0], sector).with_context(|| t.at(*line))?;
        if std::mem::replace(&mut seen[p], true) {
            bail!("{}: duplicate entry for {}", t.at(*line), index.label(p));
        }
        out[p] = t.num(*line, &r[2], value_column)?;
    }
    if complete {
        if let Some(p) = seen.iter().position(|s| !s) {
            bail!("{}: missing entry for {}", t.name, index.label(p));
        }
    }
    Ok(out)
}

/// National inventory keyed by NAICS, or by source code when a concordance
/// is supplied.
pub fn read_national(path: &Path, concordance: Option<&Concordance>) -> Result<NationalInventory> {
    let t = Table::read(path)?;
    t.expect(&["naics", "emissions_mt"])?;
    let mut pairs = Vec::new();
    for (line, r) in &t.rows {
        pairs.push((r[0].clone(), t.num(*line, &r[1], "emissions_mt")?, *line));
    }
    match concordance {
        Some(c) => c
            .apply(pairs.iter().map(|(code, v, _)| (code.as_str(), *v)))
            .with_context(|| format!("{}: applying concordance", t.name)),
        None => {
            let mut map = BTreeMap::new();
            for (code, v, line) in pairs {
                let s = SectorCode::from_naics_prefix(&code).with_context(|| t.at(line))?;
                *map.entry(s).or_insert(0.0) += v;
            }
            NationalInventory::new(map).with_context(|| t.name.clone())
        }
    }
}

pub fn read_facilities(path: &Path) -> Result<Vec<FacilityRecord>> {
    let t = Table::read(path)?;
    t.expect(&["region", "naics", "emissions_mt"])?;
    t.rows
        .iter()
        .map(|(line, r)| {
            Ok(FacilityRecord {
                region: r[0].clone(),
                sector: SectorCode::from_naics_prefix(&r[1]).with_context(|| t.at(*line))?,
                emissions: t.num(*line, &r[2], "emissions_mt")?,
            })
        })
        .collect()
}

pub fn read_proxy(path: &Path) -> Result<BTreeMap<SectorCode, BTreeMap<String, f64>>> {
    let t = Table::read(path)?;
    t.expect(&["naics", "region", "share"])?;
    let mut shares: BTreeMap<SectorCode, BTreeMap<String, f64>> = BTreeMap::new();
    for (line, r) in &t.rows {
        let s = SectorCode::from_naics_prefix(&r[0]).with_context(|| t.at(*line))?;
        let v = t.num(*line, &r[2], "share")?;
        if shares.entry(s).or_default().insert(r[1].clone(), v).is_some() {
            bail!("{}: duplicate share for {} in {}", t.at(*line), r[0], r[1]);
        }
    }
    // share validity is checked when combined with the fallback
    Ok(shares)
}

/// Explicit proxy rows override output-based shares sector by sector.
pub fn merge_proxy(
    explicit: BTreeMap<SectorCode, BTreeMap<String, f64>>,
    index: &RegionSectorIndex,
    output: &[f64],
) -> Result<ProxyShares> {
    let mut shares: BTreeMap<SectorCode, BTreeMap<String, f64>> = ProxyShares::from_output(index, output)?
        .iter()
        .map(|(s, row)| (*s, row.clone()))
        .collect();
    shares.extend(explicit);
    Ok(ProxyShares::new(shares)?)
}

pub fn read_concordance(path: &Path) -> Result<Concordance> {
    let t = Table::read(path)?;
    t.expect(&["source_code", "naics", "weight"])?;
    let mut rows = Vec::new();
    for (line, r) in &t.rows {
        rows.push((r[0].as_str(), r[1].as_str(), t.num(*line, &r[2], "weight")?));
    }
    Concordance::new(rows).with_context(|| t.name.clone())
}

fn cost_params_from(t: Table) -> Result<CostParameters> {
    t.expect(&["parameter", "value", "unit"])?;
    let mut pairs = Vec::new();
    for (line, r) in &t.rows {
        pairs.push((r[0].as_str(), t.num(*line, &r[1], "value")?));
    }
    CostParameters::from_pairs(pairs).with_context(|| t.name.clone())
}

pub fn read_cost_params(path: Option<&Path>) -> Result<CostParameters> {
    match path {
        Some(p) => cost_params_from(Table::read(p)?),
        None => cost_params_from(Table::parse("shipped cost_params.csv".into(), SHIPPED_COST_PARAMS.as_bytes())?),
    }
}

fn naics_map_from(t: Table) -> Result<NaicsMapping> {
    t.expect(&["category", "naics"])?;
    NaicsMapping::from_rows(t.rows.iter().map(|(_, r)| (r[0].as_str(), r[1].as_str()))).with_context(|| t.name.clone())
}

pub fn read_naics_map(path: Option<&Path>) -> Result<NaicsMapping> {
    match path {
        Some(p) => naics_map_from(Table::read(p)?),
        None => naics_map_from(Table::parse("shipped cost_naics_map.csv".into(), SHIPPED_NAICS_MAP.as_bytes())?),
    }
}

pub fn read_weather(path: &Path) -> Result<WeatherSeries> {
    let t = Table::read(path)?;
    t.expect(&["timestamp", "wind_ms", "wave_m"])?;
    let mut records = Vec::with_capacity(t.rows.len());
    for (line, r) in &t.rows {
        records.push((t.num(*line, &r[1], "wind_ms")?, t.num(*line, &r[2], "wave_m")?));
    }
    WeatherSeries::new(records).with_context(|| t.name.clone())
}

pub fn read_grid(path: &Path) -> Result<GridTrajectory> {
    let t = Table::read(path)?;
    t.expect(&["year_offset", "intensity_t_per_mwh"])?;
    let mut pts = Vec::new();
    for (line, r) in &t.rows {
        pts.push((
            t.num(*line, &r[0], "year_offset")?,
            t.num(*line, &r[1], "intensity_t_per_mwh")?,
        ));
    }
    GridTrajectory::new(pts).with_context(|| t.name.clone())
}

pub fn read_scc(path: &Path) -> Result<SccSchedule> {
    let t = Table::read(path)?;
    t.expect(&["year", "usd_per_tonne"])?;
    let mut pts = Vec::new();
    for (line, r) in &t.rows {
        let year: i32 = r[0]
            .parse()
            .map_err(|_| anyhow!("{}: year `{}` is not an integer", t.at(*line), r[0]))?;
        pts.push((year, t.num(*line, &r[1], "usd_per_tonne")?));
    }
    SccSchedule::new(pts).with_context(|| t.name.clone())
}

/// One row of `payback_inputs.csv`; blank fields are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct PaybackRow {
    pub c_i_musd: Option<f64>,
    pub aep_mwh: Option<f64>,
    pub p_s_usd_mwh: f64,
    pub c_op_musd: f64,
    pub em_lifetime_mt: Option<f64>,
    pub capacity_mw: Option<f64>,
    pub cf: Option<f64>,
}

pub fn read_payback_inputs(path: &Path) -> Result<BTreeMap<String, PaybackRow>> {
    let t = Table::read(path)?;
    t.expect(&[
        "project",
        "c_i_musd",
        "aep_mwh",
        "p_s_usd_mwh",
        "c_op_musd",
        "em_lifetime_mt",
        "capacity_mw",
        "cf",
    ])?;
    let mut out = BTreeMap::new();
    for (line, r) in &t.rows {
        let row = PaybackRow {
            c_i_musd: t.opt_num(*line, &r[1], "c_i_musd")?,
            aep_mwh: t.opt_num(*line, &r[2], "aep_mwh")?,
            p_s_usd_mwh: t.num(*line, &r[3], "p_s_usd_mwh")?,
            c_op_musd: t.num(*line, &r[4], "c_op_musd")?,
            em_lifetime_mt: t.opt_num(*line, &r[5], "em_lifetime_mt")?,
            capacity_mw: t.opt_num(*line, &r[6], "capacity_mw")?,
            cf: t.opt_num(*line, &r[7], "cf")?,
        };
        if out.insert(r[0].clone(), row).is_some() {
            bail!("{}: duplicate project `{}`", t.at(*line), r[0]);
        }
    }
    Ok(out)
}

/// Reported totals for fitting the cost surrogate; defaults to the shipped
/// five-project table.
pub fn read_calibration_targets(path: Option<&Path>) -> Result<Vec<(eemrio_core::wind_cost::ProjectSpec, f64)>> {
    let t = match path {
        Some(p) => Table::read(p)?,
        None => Table::parse(
            "shipped calibration_targets.csv".into(),
            SHIPPED_CALIBRATION_TARGETS.as_bytes(),
        )?,
    };
    t.expect(&[
        "project",
        "state",
        "capacity_mw",
        "turbine_rating_mw",
        "n_turbines",
        "depth_m",
        "distance_to_landfall_km",
        "mean_windspeed_ms",
        "total_musd",
    ])?;
    let mut out = Vec::new();
    for (line, r) in &t.rows {
        let n = if r[4].is_empty() {
            None
        } else {
            Some(
                r[4].parse::<u32>()
                    .map_err(|_| anyhow!("{}: n_turbines `{}` is not a count", t.at(*line), r[4]))?,
            )
        };
        let spec = eemrio_core::wind_cost::ProjectSpec::new(
            r[0].as_str(),
            r[1].as_str(),
            t.num(*line, &r[2], "capacity_mw")?,
            t.num(*line, &r[3], "turbine_rating_mw")?,
            n,
            t.num(*line, &r[5], "depth_m")?,
            t.num(*line, &r[6], "distance_to_landfall_km")?,
            t.num(*line, &r[7], "mean_windspeed_ms")?,
        )
        .with_context(|| t.at(*line))?;
        out.push((spec, t.num(*line, &r[8], "total_musd")?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_data_parses() {
        let p = read_cost_params(None).unwrap();
        p.validate().unwrap();
        let m = read_naics_map(None).unwrap();
        assert_eq!(m, NaicsMapping::reference());
    }

    #[test]
    fn header_mismatch_is_reported() {
        let t = Table::parse("x.csv".into(), "a,b\n1,2\n".as_bytes()).unwrap();
        let err = t.expect(&["code", "name"]).unwrap_err().to_string();
        assert!(err.contains("x.csv") && err.contains("code,name"), "{err}");
    }

    #[test]
    fn blank_fields_are_none() {
        let t = Table::parse("p.csv".into(), "a\n\n".as_bytes()).unwrap();
        assert_eq!(t.opt_num(2, "", "a").unwrap(), None);
        assert!(t.num(2, "abc", "a").is_err());
    }
}
