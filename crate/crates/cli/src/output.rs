//! Output tables. Everything is rendered into memory first and written only
//! once a stage has fully succeeded.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use eemrio_core::accounts::{InStateSplit, RegionSectorVector};
use eemrio_core::linalg::DenseMatrix;
use eemrio_core::wind_cost::{CostLine, CostParameters};
use eemrio_core::{RegionSectorIndex, Sector};

/// Six significant digits in fixed notation. Zero (of either sign) is `0`.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (_, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let rounded: f64 = sci.parse().expect("round-trips");
    let decimals = (5 - exp).max(0) as usize;
    format!("{rounded:.decimals$}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// In-memory CSV builder.
pub struct Csv(csv::Writer<Vec<u8>>);

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header).expect("writing to memory");
        Csv(w)
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.0.write_record(fields).expect("writing to memory");
    }

    pub fn finish(self) -> String {
        String::from_utf8(self.0.into_inner().expect("flushing memory")).expect("utf-8 fields")
    }
}

/// Files produced by a stage, relative to the output directory, in the order
/// they were added.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct OutputSet {
    files: Vec<(PathBuf, String)>,
}

impl OutputSet {
    pub fn add(&mut self, rel: impl Into<PathBuf>, content: String) {
        self.files.push((rel.into(), content));
    }

    pub fn get(&self, rel: impl AsRef<Path>) -> Option<&str> {
        self.files
            .iter()
            .find(|(p, _)| p == rel.as_ref())
            .map(|(_, c)| c.as_str())
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn write_all(&self, dir: &Path) -> Result<()> {
        for (rel, content) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
            log::debug!("wrote {}", path.display());
        }
        Ok(())
    }
}

/// Directory name for a project: ASCII alphanumerics, `-` and `_` kept,
/// anything else replaced by `_`.
pub fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

pub fn costs_csv(lines: &[CostLine]) -> String {
    let mut c = Csv::new(&["category", "naics3", "value_musd", "shock"]);
    for l in lines {
        c.row([
            l.category.name().to_string(),
            l.sector.to_string(),
            fmt_num(l.value_musd),
            l.shock.as_str().to_string(),
        ]);
    }
    c.finish()
}

/// `region,sector,<value_column>` for every position in index order.
pub fn vector_csv(index: &RegionSectorIndex, values: &[f64], value_column: &str) -> String {
    let mut c = Csv::new(&["region", "sector", value_column]);
    for (p, v) in values.iter().enumerate() {
        let (r, s) = index.unflatten(p);
        c.row([
            index.region(r).code.clone(),
            index.sector(s).code.to_string(),
            fmt_num(*v),
        ]);
    }
    c.finish()
}

/// `region,value` block sums, optionally without the home region.
pub fn choropleth_csv(v: &impl RegionSectorVector, home: usize, exclude_home: bool) -> String {
    let idx = v.index();
    let mut c = Csv::new(&["region", "value"]);
    for (r, sum) in v.region_sums().into_iter().enumerate() {
        if exclude_home && r == home {
            continue;
        }
        c.row([idx.region(r).code.clone(), fmt_num(sum)]);
    }
    c.finish()
}

pub fn top_sectors_csv(rows: &[(Sector, f64)], value_column: &str) -> String {
    let mut c = Csv::new(&["rank", "sector", "name", value_column]);
    for (i, (s, v)) in rows.iter().enumerate() {
        c.row([(i + 1).to_string(), s.code.to_string(), s.name.clone(), fmt_num(*v)]);
    }
    c.finish()
}

pub fn splits_csv(rows: &[(&str, InStateSplit)]) -> String {
    let mut c = Csv::new(&["vector", "in_state", "out_of_state", "total"]);
    for (name, s) in rows {
        c.row([
            name.to_string(),
            fmt_num(s.in_state),
            fmt_num(s.out_of_state),
            fmt_num(s.total),
        ]);
    }
    c.finish()
}

/// Labelled dense matrix in the same layout the readers accept.
pub fn matrix_csv(rows: &RegionSectorIndex, cols: &RegionSectorIndex, m: &DenseMatrix) -> String {
    let mut header = vec!["label".to_string()];
    header.extend((0..cols.len()).map(|j| cols.label(j)));
    let mut c = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    let mut rec = Vec::with_capacity(cols.len() + 1);
    for i in 0..rows.len() {
        rec.clear();
        rec.push(rows.label(i));
        // full precision so the matrix can be read back exactly
        rec.extend(m.row(i).iter().map(|v| v.to_string()));
        c.row(&rec);
    }
    c.finish()
}

pub fn cost_params_csv(p: &CostParameters) -> String {
    let mut c = Csv::new(&["parameter", "value", "unit"]);
    for (name, value, unit) in p.to_rows() {
        c.row([name.to_string(), value.to_string(), unit.to_string()]);
    }
    c.finish()
}

pub struct SummaryRow {
    pub project: String,
    pub cost_musd: f64,
    pub impact_musd: f64,
    pub emissions_mt: f64,
    pub in_state_musd: f64,
    pub out_state_musd: f64,
    pub epb_years: Option<f64>,
    pub cpb_months: Option<f64>,
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut c = Csv::new(&[
        "project",
        "cost_musd",
        "impact_musd",
        "emissions_mt",
        "in_state_musd",
        "out_state_musd",
        "epb_years",
        "cpb_months",
    ]);
    for r in rows {
        c.row([
            r.project.clone(),
            fmt_num(r.cost_musd),
            fmt_num(r.impact_musd),
            fmt_num(r.emissions_mt),
            fmt_num(r.in_state_musd),
            fmt_num(r.out_state_musd),
            opt_num(r.epb_years),
            opt_num(r.cpb_months),
        ]);
    }
    c.finish()
}

pub struct PaybackRowOut {
    pub project: String,
    pub epb_years: f64,
    pub scc_epb_years: Option<f64>,
    pub cpb_months: f64,
    pub en_annual_mwh: f64,
    pub en_offset_mwh: f64,
}

pub fn payback_csv(rows: &[PaybackRowOut]) -> String {
    let mut c = Csv::new(&[
        "project",
        "epb_years",
        "scc_epb_years",
        "cpb_months",
        "en_annual_mwh",
        "en_offset_mwh",
    ]);
    for r in rows {
        c.row([
            r.project.clone(),
            fmt_num(r.epb_years),
            opt_num(r.scc_epb_years),
            fmt_num(r.cpb_months),
            fmt_num(r.en_annual_mwh),
            fmt_num(r.en_offset_mwh),
        ]);
    }
    c.finish()
}
