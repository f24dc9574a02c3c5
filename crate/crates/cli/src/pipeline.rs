//! Loading, validation and stage execution.
//!
//! Every stage first parses all of its inputs (failures there are input
//! errors, exit code 1), then computes (numeric failures, exit code 2), and
//! only then renders its output files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use eemrio_core::accounts::RegionSectorVector;
use eemrio_core::linalg::DenseMatrix;
use eemrio_core::mrio::{
    derive_direct_requirements, DirectRequirements, LeontiefMethod, MrioError, SupplyUseTables, NEUMANN_MAX_ITER,
    NEUMANN_TOLERANCE,
};
use eemrio_core::satellite::{
    audit_inputs, emissions_factors, regionalize, FacilityRecord, NationalInventory, ProxyShares, SatelliteAccount,
    SatelliteError,
};
use eemrio_core::scenario::{Model, PaybackSpec, ProjectInputs, ProjectResult, SccSettings};
use eemrio_core::wind_cost::{
    self, CostCategory, CostParameters, NaicsMapping, OperabilityLimits, ProjectSpec, WeatherSeries,
};
use eemrio_core::{RegionSectorIndex, SectorCode};
use serde_json::{json, Value};

use crate::config::{Config, Method};
use crate::output::{self, fmt_num, slug, OutputSet, PaybackRowOut, SummaryRow};
use crate::readers;

/// A failed stage, classified for the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Configuration or input validation failure.
    Input(anyhow::Error),
    /// Numeric or runtime failure after inputs were accepted.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(e) => write!(f, "invalid input: {e:#}"),
            Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for Failure {}

pub trait Classify<T> {
    fn input(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }
    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

pub struct Taxonomy {
    pub index: Arc<RegionSectorIndex>,
    pub products: Arc<RegionSectorIndex>,
}

pub fn load_taxonomy(cfg: &Config) -> anyhow::Result<Taxonomy> {
    let regions = readers::read_regions(&cfg.taxonomy.regions)?;
    let sectors = readers::read_sectors(&cfg.taxonomy.sectors)?;
    let index = Arc::new(
        RegionSectorIndex::new(regions.clone(), sectors).with_context(|| cfg.taxonomy.sectors.display().to_string())?,
    );
    let products = match &cfg.taxonomy.product_sectors {
        None => index.clone(),
        Some(p) => Arc::new(RegionSectorIndex::new(regions, readers::read_sectors(p)?).with_context(|| p.display().to_string())?),
    };
    Ok(Taxonomy { index, products })
}

pub enum EconomyInputs {
    Sut(SupplyUseTables),
    Direct { a: DenseMatrix, output: Vec<f64> },
}

impl EconomyInputs {
    /// Total industry output per position, million USD.
    pub fn output(&self) -> &[f64] {
        match self {
            EconomyInputs::Sut(s) => s.industry_output(),
            EconomyInputs::Direct { output, .. } => output,
        }
    }
}

fn read_output(cfg: &Config, index: &RegionSectorIndex) -> anyhow::Result<Option<Vec<f64>>> {
    cfg.economy
        .industry_output
        .as_deref()
        .map(|p| readers::read_vector(p, index, "value_musd", true))
        .transpose()
}

pub fn load_economy(cfg: &Config, tax: &Taxonomy) -> anyhow::Result<EconomyInputs> {
    let e = &cfg.economy;
    if let Some(path) = &e.a_matrix {
        let a = readers::read_matrix(path, &tax.index, &tax.index)?;
        let output = read_output(cfg, &tax.index)?.ok_or_else(|| anyhow!("economy.a_matrix requires economy.industry_output"))?;
        return Ok(EconomyInputs::Direct { a, output });
    }
    let (Some(use_path), Some(supply_path)) = (&e.use_table, &e.supply) else {
        bail!("set either economy.use and economy.supply, or economy.a_matrix");
    };
    let u = readers::read_matrix(use_path, &tax.products, &tax.index)?;
    let v = readers::read_matrix(supply_path, &tax.index, &tax.products)?;
    let g = read_output(cfg, &tax.index)?;
    let sut = SupplyUseTables::new(tax.index.clone(), tax.products.clone(), u, v, g)
        .context("supply and use tables")?;
    Ok(EconomyInputs::Sut(sut))
}

pub fn derive_economy(inputs: &EconomyInputs, index: &Arc<RegionSectorIndex>) -> Result<DirectRequirements, MrioError> {
    match inputs {
        EconomyInputs::Sut(sut) => derive_direct_requirements(sut),
        EconomyInputs::Direct { a, .. } => DirectRequirements::new(index.clone(), a.clone()),
    }
}

pub fn leontief_method(cfg: &Config) -> LeontiefMethod {
    match cfg.economy.method {
        Method::Direct => LeontiefMethod::Direct,
        Method::Neumann => LeontiefMethod::Neumann {
            tol: cfg.economy.neumann_tolerance.unwrap_or(NEUMANN_TOLERANCE),
            max_iter: cfg.economy.neumann_max_iter.unwrap_or(NEUMANN_MAX_ITER),
        },
    }
}

pub enum SatelliteInputs {
    Account(Vec<f64>),
    Regionalize {
        national: NationalInventory,
        facilities: Vec<FacilityRecord>,
        proxy: BTreeMap<SectorCode, BTreeMap<String, f64>>,
    },
}

struct RawSatellite {
    national: NationalInventory,
    facilities: Vec<FacilityRecord>,
    proxy: BTreeMap<SectorCode, BTreeMap<String, f64>>,
}

fn read_raw_satellite(cfg: &Config) -> anyhow::Result<RawSatellite> {
    let s = &cfg.satellite;
    let national_path = s.national.as_deref().ok_or_else(|| anyhow!("satellite.national is not set"))?;
    let concordance = s.concordance.as_deref().map(readers::read_concordance).transpose()?;
    Ok(RawSatellite {
        national: readers::read_national(national_path, concordance.as_ref())?,
        facilities: s.facilities.as_deref().map(readers::read_facilities).transpose()?.unwrap_or_default(),
        proxy: s.proxy.as_deref().map(readers::read_proxy).transpose()?.unwrap_or_default(),
    })
}

fn satellite_findings(index: &RegionSectorIndex, raw: &RawSatellite) -> Vec<SatelliteError> {
    match ProxyShares::new(raw.proxy.clone()) {
        Err(e) => vec![e],
        Ok(proxy) => audit_inputs(index, &raw.national, &raw.facilities, &proxy),
    }
}

fn satellite_area(e: &SatelliteError) -> &'static str {
    match e {
        SatelliteError::Index(_)
        | SatelliteError::UnknownRegionInFacility(_)
        | SatelliteError::UnknownSectorInFacility { .. }
        | SatelliteError::UnknownSectorInInventory(_) => "taxonomy",
        _ => "satellite",
    }
}

pub fn load_satellite(cfg: &Config, index: &RegionSectorIndex) -> anyhow::Result<SatelliteInputs> {
    if let Some(path) = &cfg.satellite.account {
        return Ok(SatelliteInputs::Account(readers::read_vector(path, index, "emissions_mt", false)?));
    }
    let raw = read_raw_satellite(cfg)?;
    let findings = satellite_findings(index, &raw);
    if !findings.is_empty() {
        let msgs: Vec<String> = findings.iter().map(ToString::to_string).collect();
        bail!("satellite inputs: {}", msgs.join("; "));
    }
    Ok(SatelliteInputs::Regionalize {
        national: raw.national,
        facilities: raw.facilities,
        proxy: raw.proxy,
    })
}

pub fn build_satellite(
    inputs: SatelliteInputs,
    index: &Arc<RegionSectorIndex>,
    output: &[f64],
) -> anyhow::Result<SatelliteAccount> {
    match inputs {
        SatelliteInputs::Account(values) => Ok(SatelliteAccount::new(index.clone(), values)?),
        SatelliteInputs::Regionalize {
            national,
            facilities,
            proxy,
        } => {
            let proxy = readers::merge_proxy(proxy, index, output)?;
            Ok(regionalize(index.clone(), &national, &facilities, &proxy)?)
        }
    }
}

pub struct CostInputs {
    pub params: CostParameters,
    pub mapping: NaicsMapping,
    pub weather: Option<WeatherSeries>,
    pub limits: OperabilityLimits,
}

pub fn load_costs(cfg: &Config) -> anyhow::Result<CostInputs> {
    let c = &cfg.costs;
    let defaults = OperabilityLimits::default();
    Ok(CostInputs {
        params: readers::read_cost_params(c.params.as_deref())?,
        mapping: readers::read_naics_map(c.naics_map.as_deref())?,
        weather: c.weather.as_deref().map(readers::read_weather).transpose()?,
        limits: OperabilityLimits {
            max_wind_ms: c.max_wind_ms.unwrap_or(defaults.max_wind_ms),
            max_wave_m: c.max_wave_m.unwrap_or(defaults.max_wave_m),
        },
    })
}

pub fn load_projects(cfg: &Config) -> anyhow::Result<Vec<ProjectSpec>> {
    cfg.projects
        .iter()
        .map(|p| {
            ProjectSpec::new(
                p.name.as_str(),
                p.state.as_str(),
                p.capacity_mw,
                p.turbine_rating_mw,
                p.n_turbines,
                p.depth_m,
                p.distance_to_landfall_km,
                p.mean_windspeed_ms,
            )
            .with_context(|| format!("project `{}`", p.name))
        })
        .collect()
}

/// Payback settings per project, in project order.
pub fn load_payback(cfg: &Config, projects: &[ProjectSpec]) -> anyhow::Result<Vec<Option<PaybackSpec>>> {
    let pb = &cfg.payback;
    let Some(path) = &pb.inputs else {
        return Ok(vec![None; projects.len()]);
    };
    let mut rows = readers::read_payback_inputs(path)?;
    if let Some(unknown) = rows.keys().find(|k| !projects.iter().any(|p| &p.name == *k)) {
        bail!("{}: unknown project `{unknown}`", path.display());
    }
    let grid = match (&pb.grid_trajectory, pb.grid_intensity) {
        (Some(p), _) => readers::read_grid(p)?,
        (None, Some(r)) => eemrio_core::payback::GridTrajectory::constant(r).context("payback.grid_intensity")?,
        (None, None) => bail!("payback inputs need payback.grid_trajectory or payback.grid_intensity"),
    };
    let scc = match &pb.scc {
        None => None,
        Some(p) => Some(SccSettings {
            schedule: readers::read_scc(p)?,
            install_year: pb.install_year.ok_or_else(|| anyhow!("payback.scc requires payback.install_year"))?,
            annual_op_emissions: pb.annual_op_emissions_mt,
        }),
    };
    Ok(projects
        .iter()
        .map(|p| {
            rows.remove(&p.name).map(|r| PaybackSpec {
                c_i_musd: r.c_i_musd,
                aep_mwh: r.aep_mwh,
                p_s_usd_mwh: r.p_s_usd_mwh,
                c_op_musd: r.c_op_musd,
                em_lifetime_t: r.em_lifetime_mt,
                capacity_mw: r.capacity_mw,
                capacity_factor: r.cf.unwrap_or(pb.capacity_factor),
                lifetime_years: pb.lifetime_years,
                r_osw: pb.r_osw,
                grid: grid.clone(),
                scc: scc.clone(),
            })
        })
        .collect())
}

/// A problem found by [`validate_inputs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub area: &'static str,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.area, self.message)
    }
}

/// Lists every violated input invariant without running the pipeline.
pub fn validate_inputs(cfg: &Config) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut push = |area: &'static str, message: String| out.push(Finding { area, message });
    if let Err(e) = cfg.check() {
        push("config", format!("{e:#}"));
    }
    if cfg.projects.is_empty() {
        push("config", "config has no [[projects]]".into());
    }
    let tax = match load_taxonomy(cfg) {
        Ok(t) => t,
        Err(e) => {
            push("taxonomy", format!("{e:#}"));
            return out;
        }
    };
    let index = &tax.index;

    // economy
    let e = &cfg.economy;
    let output = read_output(cfg, index);
    if let Err(err) = &output {
        push("economy", format!("{err:#}"));
    }
    let output = output.ok().flatten();
    if let Some(path) = &e.a_matrix {
        match readers::read_matrix(path, index, index) {
            Err(err) => push("economy", format!("{err:#}")),
            Ok(a) => {
                if let Err(err) = DirectRequirements::new(index.clone(), a) {
                    push("economy", err.to_string());
                }
            }
        }
    } else if let (Some(up), Some(sp)) = (&e.use_table, &e.supply) {
        let u = readers::read_matrix(up, &tax.products, index);
        let v = readers::read_matrix(sp, index, &tax.products);
        match (u, v) {
            (Ok(u), Ok(v)) => {
                for f in SupplyUseTables::audit(index, &tax.products, &u, &v, output.as_deref()) {
                    push("sut", f.to_string());
                }
            }
            (u, v) => {
                for err in [u.err(), v.err()].into_iter().flatten() {
                    push("economy", format!("{err:#}"));
                }
            }
        }
    }

    // satellite
    if let Some(path) = &cfg.satellite.account {
        match readers::read_vector(path, index, "emissions_mt", false) {
            Err(err) => push("satellite", format!("{err:#}")),
            Ok(v) => {
                if let Err(err) = SatelliteAccount::new(index.clone(), v) {
                    push("satellite", err.to_string());
                }
            }
        }
    } else if cfg.satellite.national.is_some() {
        match read_raw_satellite(cfg) {
            Err(err) => push("satellite", format!("{err:#}")),
            Ok(raw) => {
                for f in satellite_findings(index, &raw) {
                    push(satellite_area(&f), f.to_string());
                }
            }
        }
    }

    // costs and projects
    let costs = load_costs(cfg);
    match &costs {
        Err(err) => push("costs", format!("{err:#}")),
        Ok(c) => {
            for cat in CostCategory::ALL {
                match c.mapping.sector_of(cat) {
                    Err(err) => push("costs", err.to_string()),
                    Ok(s) if index.sector_position(s).is_none() => push(
                        "taxonomy",
                        format!("cost category `{cat}` maps to sector {s}, which is not in the sector list"),
                    ),
                    Ok(_) => {}
                }
            }
        }
    }
    match load_projects(cfg) {
        Err(err) => push("projects", format!("{err:#}")),
        Ok(projects) => {
            for p in &projects {
                if index.region_position(&p.state).is_none() {
                    push(
                        "taxonomy",
                        format!("project `{}` is in unknown region `{}`", p.name, p.state),
                    );
                }
            }
            if let Err(err) = load_payback(cfg, &projects) {
                push("payback", format!("{err:#}"));
            }
        }
    }
    out
}

/// Everything a full evaluation produces.
pub struct Evaluation {
    pub index: Arc<RegionSectorIndex>,
    pub results: Vec<ProjectResult>,
    pub top_k: usize,
}

/// Parses every input, builds the model once and evaluates all projects.
pub fn evaluate(cfg: &Config, top_k: usize) -> Result<Evaluation, Failure> {
    cfg.check().input()?;
    cfg.require_projects().input()?;
    let tax = load_taxonomy(cfg).input()?;
    let economy = load_economy(cfg, &tax).input()?;
    let satellite = load_satellite(cfg, &tax.index).input()?;
    let costs = load_costs(cfg).input()?;
    let specs = load_projects(cfg).input()?;
    let paybacks = load_payback(cfg, &specs).input()?;
    let projects: Vec<ProjectInputs> = specs
        .into_iter()
        .zip(paybacks)
        .map(|(spec, payback)| ProjectInputs { spec, payback })
        .collect();
    log::info!("inputs loaded: {} positions, {} projects", tax.index.len(), projects.len());

    let model = build_model(cfg, &tax.index, economy, satellite, costs)?;
    let t = Instant::now();
    let results = evaluate_projects(&model, &projects, top_k).runtime()?;
    log::info!("evaluated {} projects in {:.2?}", results.len(), t.elapsed());
    Ok(Evaluation {
        index: tax.index,
        results,
        top_k,
    })
}

fn build_model(
    cfg: &Config,
    index: &Arc<RegionSectorIndex>,
    economy: EconomyInputs,
    satellite: SatelliteInputs,
    costs: CostInputs,
) -> Result<Model, Failure> {
    let t = Instant::now();
    let a = derive_economy(&economy, index).runtime()?;
    log::info!("direct requirements ready in {:.2?} ({:?})", t.elapsed(), a.evidence());
    let sat = build_satellite(satellite, index, economy.output()).runtime()?;
    let ef = emissions_factors(&sat, economy.output()).runtime()?;
    let t = Instant::now();
    let mut model = Model::new(a, leontief_method(cfg), ef, costs.params, costs.mapping).runtime()?;
    log::info!("total requirements ready in {:.2?}", t.elapsed());
    if let Some(w) = costs.weather {
        model = model.with_weather(w, costs.limits);
    }
    Ok(model)
}

/// Evaluates projects on scoped worker threads sharing one model. Results
/// keep project order; the first error in project order is returned.
pub fn evaluate_projects(
    model: &Model,
    projects: &[ProjectInputs],
    top_k: usize,
) -> Result<Vec<ProjectResult>, eemrio_core::scenario::ScenarioError> {
    if projects.is_empty() {
        return Ok(Vec::new());
    }
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(projects.len());
    let chunk = projects.len().div_ceil(workers);
    let mut slots: Vec<Option<Result<ProjectResult, _>>> = (0..projects.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        for (out, inp) in slots.chunks_mut(chunk).zip(projects.chunks(chunk)) {
            s.spawn(move || {
                for (o, p) in out.iter_mut().zip(inp) {
                    *o = Some(model.evaluate_project(p, top_k));
                }
            });
        }
    });
    slots.into_iter().map(|r| r.expect("every slot filled")).collect()
}

fn project_files(out: &mut OutputSet, r: &ProjectResult) {
    let dir = slug(&r.spec.name);
    let idx = r.impact.index();
    let home = idx.region_position(&r.spec.state).expect("state validated");
    let f = |name: &str| format!("{dir}/{name}");
    out.add(f("costs.csv"), output::costs_csv(&r.cost_lines));
    out.add(f("impact.csv"), output::vector_csv(idx, r.impact.values(), "value_musd"));
    out.add(
        f("impact_installation.csv"),
        output::vector_csv(idx, r.installation_impact.values(), "value_musd"),
    );
    out.add(
        f("impact_turbines.csv"),
        output::vector_csv(idx, r.turbine_impact.values(), "value_musd"),
    );
    out.add(f("emissions.csv"), output::vector_csv(idx, r.emissions.values(), "emissions_mt"));
    out.add(
        f("emissions_installation.csv"),
        output::vector_csv(idx, r.installation_emissions.values(), "emissions_mt"),
    );
    out.add(
        f("emissions_turbines.csv"),
        output::vector_csv(idx, r.turbine_emissions.values(), "emissions_mt"),
    );
    out.add(f("choropleth_impact.csv"), output::choropleth_csv(&r.impact, home, false));
    out.add(
        f("choropleth_impact_out_of_state.csv"),
        output::choropleth_csv(&r.impact, home, true),
    );
    out.add(f("choropleth_emissions.csv"), output::choropleth_csv(&r.emissions, home, false));
    out.add(
        f("choropleth_emissions_out_of_state.csv"),
        output::choropleth_csv(&r.emissions, home, true),
    );
    out.add(
        f("top_sectors_impact.csv"),
        output::top_sectors_csv(&r.top_impact_sectors, "value_musd"),
    );
    out.add(
        f("top_sectors_emissions.csv"),
        output::top_sectors_csv(&r.top_emissions_sectors, "emissions_mt"),
    );
    let split = |v: &dyn RegionSectorVector| v.split_in_state(&r.spec.state).expect("state validated");
    out.add(
        f("splits.csv"),
        output::splits_csv(&[
            ("impact_installation", split(&r.installation_impact)),
            ("impact_turbines", split(&r.turbine_impact)),
            ("impact", r.impact_split),
            ("emissions_installation", split(&r.installation_emissions)),
            ("emissions_turbines", split(&r.turbine_emissions)),
            ("emissions", r.emissions_split),
        ]),
    );
}

fn summary_rows(results: &[ProjectResult]) -> Vec<SummaryRow> {
    results
        .iter()
        .map(|r| SummaryRow {
            project: r.spec.name.clone(),
            cost_musd: r.costs.total(),
            impact_musd: r.impact_split.total,
            emissions_mt: r.emissions_split.total,
            in_state_musd: r.impact_split.in_state,
            out_state_musd: r.impact_split.out_of_state,
            epb_years: r.payback.as_ref().map(|p| p.economic_years),
            cpb_months: r.payback.as_ref().map(|p| p.carbon.months),
        })
        .collect()
}

fn payback_rows(results: &[ProjectResult]) -> Vec<PaybackRowOut> {
    results
        .iter()
        .filter_map(|r| {
            r.payback.as_ref().map(|p| PaybackRowOut {
                project: r.spec.name.clone(),
                epb_years: p.economic_years,
                scc_epb_years: p.scc_adjusted_years,
                cpb_months: p.carbon.months,
                en_annual_mwh: p.carbon.en_annual,
                en_offset_mwh: p.carbon.en_offset,
            })
        })
        .collect()
}

fn split_json(s: &eemrio_core::accounts::InStateSplit) -> Value {
    json!({ "in_state": s.in_state, "out_of_state": s.out_of_state, "total": s.total })
}

/// Full-precision machine-readable results.
pub fn results_json(ev: &Evaluation) -> String {
    let projects: Vec<Value> = ev
        .results
        .iter()
        .map(|r| {
            json!({
                "name": r.spec.name,
                "state": r.spec.state,
                "capacity_mw": r.spec.capacity_mw,
                "n_turbines": r.spec.n_turbines,
                "cost_musd": r.costs.total(),
                "costs": r.cost_lines.iter().map(|l| json!({
                    "category": l.category.name(),
                    "naics3": l.sector.to_string(),
                    "value_musd": l.value_musd,
                    "shock": l.shock.as_str(),
                })).collect::<Vec<_>>(),
                "impact_musd": {
                    "installation": r.installation_impact.total(),
                    "turbines": r.turbine_impact.total(),
                    "split": split_json(&r.impact_split),
                },
                "emissions_mt": {
                    "installation": r.installation_emissions.total(),
                    "turbines": r.turbine_emissions.total(),
                    "split": split_json(&r.emissions_split),
                },
                "additivity_residual": r.additivity_residual,
                "payback": r.payback.as_ref().map(|p| json!({
                    "economic_years": p.economic_years,
                    "scc_adjusted_years": p.scc_adjusted_years,
                    "carbon_months": p.carbon.months,
                    "en_annual_mwh": p.carbon.en_annual,
                    "en_offset_mwh": p.carbon.en_offset,
                })),
                "impact_vector": r.impact.values(),
                "emissions_vector": r.emissions.values(),
            })
        })
        .collect();
    let labels: Vec<String> = (0..ev.index.len()).map(|p| ev.index.label(p)).collect();
    let doc = json!({ "labels": labels, "top_k": ev.top_k, "projects": projects });
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

pub fn stage_derive_a(cfg: &Config) -> Result<OutputSet, Failure> {
    let tax = load_taxonomy(cfg).input()?;
    let economy = load_economy(cfg, &tax).input()?;
    let a = derive_economy(&economy, &tax.index).runtime()?;
    let mut out = OutputSet::default();
    out.add("a_matrix.csv", output::matrix_csv(&tax.index, &tax.index, a.matrix()));
    // full precision, like the matrix, so the pair can be fed back in
    let mut c = output::Csv::new(&["region", "sector", "value_musd"]);
    for (p, v) in economy.output().iter().enumerate() {
        let (r, s) = tax.index.unflatten(p);
        c.row([
            tax.index.region(r).code.clone(),
            tax.index.sector(s).code.to_string(),
            v.to_string(),
        ]);
    }
    out.add("industry_output.csv", c.finish());
    Ok(out)
}

pub fn stage_satellite(cfg: &Config) -> Result<OutputSet, Failure> {
    let tax = load_taxonomy(cfg).input()?;
    let economy = load_economy(cfg, &tax).input()?;
    let inputs = load_satellite(cfg, &tax.index).input()?;
    let sat = build_satellite(inputs, &tax.index, economy.output()).runtime()?;
    let ef = emissions_factors(&sat, economy.output()).runtime()?;
    let mut out = OutputSet::default();
    out.add("satellite.csv", output::vector_csv(&tax.index, sat.values(), "emissions_mt"));
    out.add(
        "emissions_factors.csv",
        output::vector_csv(&tax.index, ef.values(), "mt_per_musd"),
    );
    Ok(out)
}

pub fn stage_cost(cfg: &Config) -> Result<OutputSet, Failure> {
    cfg.require_projects().input()?;
    let costs = load_costs(cfg).input()?;
    let specs = load_projects(cfg).input()?;
    let mut out = OutputSet::default();
    let mut totals = output::Csv::new(&["project", "installation_musd", "turbines_musd", "cost_musd"]);
    for spec in &specs {
        let b = wind_cost::estimate_costs(spec, &costs.params, costs.weather.as_ref(), &costs.limits)
            .with_context(|| format!("project `{}`", spec.name))
            .runtime()?;
        let lines = wind_cost::cost_lines(&b, &costs.mapping)
            .with_context(|| format!("project `{}`", spec.name))
            .input()?;
        out.add(format!("{}/costs.csv", slug(&spec.name)), output::costs_csv(&lines));
        totals.row([
            spec.name.clone(),
            fmt_num(b.installation_cost()),
            fmt_num(b.turbine_cost()),
            fmt_num(b.total()),
        ]);
    }
    out.add("cost_totals.csv", totals.finish());
    Ok(out)
}

pub fn stage_impact(cfg: &Config, top_k: usize) -> Result<OutputSet, Failure> {
    let ev = evaluate(cfg, top_k)?;
    let mut out = OutputSet::default();
    for r in &ev.results {
        project_files(&mut out, r);
    }
    Ok(out)
}

pub fn stage_payback(cfg: &Config, top_k: usize) -> Result<OutputSet, Failure> {
    if cfg.payback.inputs.is_none() {
        return Err(Failure::Input(anyhow!("payback.inputs is not set")));
    }
    let ev = evaluate(cfg, top_k)?;
    let mut out = OutputSet::default();
    out.add("payback.csv", output::payback_csv(&payback_rows(&ev.results)));
    Ok(out)
}

pub fn stage_run(cfg: &Config, top_k: usize) -> Result<OutputSet, Failure> {
    let ev = evaluate(cfg, top_k)?;
    let mut out = OutputSet::default();
    for r in &ev.results {
        project_files(&mut out, r);
    }
    out.add("summary.csv", output::summary_csv(&summary_rows(&ev.results)));
    if ev.results.iter().any(|r| r.payback.is_some()) {
        out.add("payback.csv", output::payback_csv(&payback_rows(&ev.results)));
    }
    if cfg.json {
        out.add("results.json", results_json(&ev));
    }
    Ok(out)
}

/// Fits the shipped parameter structure to reported project totals.
pub fn stage_calibrate(targets: Option<&Path>, base: Option<&Path>) -> Result<(OutputSet, String), Failure> {
    let targets = readers::read_calibration_targets(targets).input()?;
    let base = match base {
        Some(p) => readers::read_cost_params(Some(p)).input()?,
        None => CostParameters::reference(),
    };
    let cal = wind_cost::calibrate(&base, &targets).runtime()?;
    let mut report = format!(
        "bos capex scale {:.6}, installation scale {:.6}\nproject,model_musd,target_musd,error_pct\n",
        cal.bos_capex_scale, cal.installation_scale
    );
    for (name, model, target) in &cal.fit {
        report.push_str(&format!(
            "{name},{},{},{}\n",
            fmt_num(*model),
            fmt_num(*target),
            fmt_num(100.0 * (model - target) / target)
        ));
    }
    let mut out = OutputSet::default();
    out.add("cost_params.csv", output::cost_params_csv(&cal.params));
    Ok((out, report))
}
