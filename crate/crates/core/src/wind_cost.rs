//! Parametric offshore wind balance-of-system cost surrogate.
//!
//! Costs are produced per category of the ORBIT cost taxonomy:
//!
//! * capital expenditure: turbines, substructures, array and export cables,
//!   offshore substation, scour protection;
//! * installation: vessel time (mobilization plus per-unit work) priced at a
//!   day rate, stretched by a weather-delay multiplier;
//! * soft costs: fixed fractions of the capex subtotal;
//! * project development: lump sums.
//!
//! Categories are then mapped to NAICS sectors and placed in the project
//! state as two final-demand shocks: turbine manufacturing and everything else.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::index::{IndexError, RegionSectorIndex, SectorCode};
use crate::mrio::{FinalDemandShock, MrioError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CostError {
    #[error("invalid project spec: {0}")]
    InvalidSpec(String),
    #[error("missing cost parameter `{0}`")]
    MissingParameter(String),
    #[error("unknown cost parameter `{0}`")]
    UnknownParameter(String),
    #[error("cost parameter `{name}` has invalid value {value}")]
    InvalidParameter { name: String, value: f64 },
    #[error("weather series has no hour within the operability limits")]
    NoOperableWindow,
    #[error("invalid weather series: {0}")]
    InvalidWeather(String),
    #[error("cost category `{0}` has no NAICS mapping")]
    UnmappedCategory(String),
    #[error("unknown cost category `{0}`")]
    UnknownCategory(String),
    #[error("invalid cost {value} for category `{category}`")]
    InvalidCost { category: String, value: f64 },
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Mrio(#[from] MrioError),
}

/// Cost categories in the order of the NAICS mapping table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CostCategory {
    ArraySystem,
    ExportSystem,
    OffshoreSubstation,
    ScourProtection,
    Substructure,
    ArraySystemInstallation,
    ExportSystemInstallation,
    OffshoreSubstationInstallation,
    ScourProtectionInstallation,
    SubstructureInstallation,
    TurbineInstallation,
    Turbines,
    Insurance,
    Financing,
    Contingency,
    Commissioning,
    Decommissioning,
    SiteAuction,
    SiteAssessment,
    ConstructionPlan,
    InstallationPlan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostGroup {
    Capex,
    Installation,
    Soft,
    Development,
}

impl CostCategory {
    pub const ALL: [CostCategory; 21] = [
        CostCategory::ArraySystem,
        CostCategory::ExportSystem,
        CostCategory::OffshoreSubstation,
        CostCategory::ScourProtection,
        CostCategory::Substructure,
        CostCategory::ArraySystemInstallation,
        CostCategory::ExportSystemInstallation,
        CostCategory::OffshoreSubstationInstallation,
        CostCategory::ScourProtectionInstallation,
        CostCategory::SubstructureInstallation,
        CostCategory::TurbineInstallation,
        CostCategory::Turbines,
        CostCategory::Insurance,
        CostCategory::Financing,
        CostCategory::Contingency,
        CostCategory::Commissioning,
        CostCategory::Decommissioning,
        CostCategory::SiteAuction,
        CostCategory::SiteAssessment,
        CostCategory::ConstructionPlan,
        CostCategory::InstallationPlan,
    ];

    pub fn name(self) -> &'static str {
        use CostCategory::*;
        match self {
            ArraySystem => "Array System",
            ExportSystem => "Export System",
            OffshoreSubstation => "Offshore Substation",
            ScourProtection => "Scour Protection",
            Substructure => "Substructure",
            ArraySystemInstallation => "Array System Installation",
            ExportSystemInstallation => "Export System Installation",
            OffshoreSubstationInstallation => "Offshore Substation Installation",
            ScourProtectionInstallation => "Scour Protection Installation",
            SubstructureInstallation => "Substructure Installation",
            TurbineInstallation => "Turbine Installation",
            Turbines => "Turbines",
            Insurance => "Insurance",
            Financing => "Financing",
            Contingency => "Contingency",
            Commissioning => "Commissioning",
            Decommissioning => "Decommissioning",
            SiteAuction => "Site Auction",
            SiteAssessment => "Site Assessment",
            ConstructionPlan => "Construction Plan",
            InstallationPlan => "Installation Plan",
        }
    }

    /// Accepts display names case-insensitively as well as ORBIT-style keys
    /// such as `soft_insurance` or `project_site_auction`.
    pub fn from_name(name: &str) -> Option<Self> {
        let mut key = name.trim().to_ascii_lowercase().replace('_', " ");
        for prefix in ["soft ", "project "] {
            if let Some(rest) = key.strip_prefix(prefix) {
                key = rest.to_string();
            }
        }
        if key == "turbine" {
            return Some(CostCategory::Turbines);
        }
        CostCategory::ALL
            .into_iter()
            .find(|c| c.name().to_ascii_lowercase() == key)
    }

    pub fn group(self) -> CostGroup {
        use CostCategory::*;
        match self {
            ArraySystem | ExportSystem | OffshoreSubstation | ScourProtection | Substructure | Turbines => {
                CostGroup::Capex
            }
            ArraySystemInstallation
            | ExportSystemInstallation
            | OffshoreSubstationInstallation
            | ScourProtectionInstallation
            | SubstructureInstallation
            | TurbineInstallation => CostGroup::Installation,
            Insurance | Financing | Contingency | Commissioning | Decommissioning => CostGroup::Soft,
            SiteAuction | SiteAssessment | ConstructionPlan | InstallationPlan => CostGroup::Development,
        }
    }
}

impl fmt::Display for CostCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Design specification of one offshore wind project.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectSpec {
    pub name: String,
    /// Region code of the installation state.
    pub state: String,
    pub capacity_mw: f64,
    pub turbine_rating_mw: f64,
    pub n_turbines: u32,
    pub depth_m: f64,
    pub distance_to_landfall_km: f64,
    pub mean_windspeed_ms: f64,
}

impl ProjectSpec {
    /// Builds a validated spec. `n_turbines` defaults to
    /// `ceil(capacity / rating)`; an explicit count must be within one turbine
    /// of the nameplate capacity.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        state: impl Into<String>,
        capacity_mw: f64,
        turbine_rating_mw: f64,
        n_turbines: Option<u32>,
        depth_m: f64,
        distance_to_landfall_km: f64,
        mean_windspeed_ms: f64,
    ) -> Result<Self, CostError> {
        let mut spec = ProjectSpec {
            name: name.into(),
            state: state.into(),
            capacity_mw,
            turbine_rating_mw,
            n_turbines: 0,
            depth_m,
            distance_to_landfall_km,
            mean_windspeed_ms,
        };
        spec.check_physical()?;
        let derived = libm::ceil(capacity_mw / turbine_rating_mw) as u32;
        spec.n_turbines = match n_turbines {
            None => derived,
            Some(n) => {
                let installed = n as f64 * turbine_rating_mw;
                if n == 0 || (installed - capacity_mw).abs() >= turbine_rating_mw {
                    return Err(CostError::InvalidSpec(alloc::format!(
                        "{n} turbines of {turbine_rating_mw} MW do not match {capacity_mw} MW"
                    )));
                }
                n
            }
        };
        Ok(spec)
    }

    fn check_physical(&self) -> Result<(), CostError> {
        let fields = [
            ("capacity", self.capacity_mw),
            ("turbine rating", self.turbine_rating_mw),
            ("depth", self.depth_m),
            ("distance to landfall", self.distance_to_landfall_km),
            ("mean windspeed", self.mean_windspeed_ms),
        ];
        for (what, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(CostError::InvalidSpec(alloc::format!("{what} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `n_turbines * turbine_rating`, MW.
    pub fn installed_capacity_mw(&self) -> f64 {
        self.n_turbines as f64 * self.turbine_rating_mw
    }
}

macro_rules! cost_parameters {
    ($($field:ident : $unit:literal),* $(,)?) => {
        /// Unit rates, scaling exponents, soft-cost fractions and development
        /// lump sums of the surrogate. Monetary rates are in million USD
        /// unless the unit says otherwise.
        #[derive(Debug, Clone, PartialEq)]
        pub struct CostParameters {
            $(pub $field: f64,)*
        }

        impl CostParameters {
            /// `(name, unit)` of every parameter, in file order.
            pub const FIELDS: &'static [(&'static str, &'static str)] = &[$((stringify!($field), $unit)),*];

            fn slot(&mut self, name: &str) -> Option<&mut f64> {
                match name {
                    $(stringify!($field) => Some(&mut self.$field),)*
                    _ => None,
                }
            }

            /// `(name, value, unit)` triples in file order.
            pub fn to_rows(&self) -> Vec<(&'static str, f64, &'static str)> {
                alloc::vec![$((stringify!($field), self.$field, $unit)),*]
            }
        }
    };
}

cost_parameters! {
    turbine_price_per_kw: "USD/kW",
    substructure_cost_per_turbine: "MUSD",
    reference_depth: "m",
    depth_exponent: "1",
    array_cable_km_per_turbine: "km",
    array_cable_cost_per_km: "MUSD/km",
    export_cable_cost_per_km: "MUSD/km",
    export_cable_capacity: "MW",
    substation_fixed_cost: "MUSD",
    substation_cost_per_mw: "MUSD/MW",
    scour_cost_per_turbine: "MUSD",
    vessel_day_rate: "MUSD/day",
    turbine_install_mobilization_days: "day",
    turbine_install_days_per_turbine: "day",
    substructure_install_mobilization_days: "day",
    substructure_install_days_per_turbine: "day",
    scour_install_mobilization_days: "day",
    scour_install_days_per_turbine: "day",
    array_install_mobilization_days: "day",
    array_install_days_per_km: "day/km",
    export_install_mobilization_days: "day",
    export_install_days_per_km: "day/km",
    substation_install_mobilization_days: "day",
    substation_install_days: "day",
    soft_insurance_fraction: "1",
    soft_financing_fraction: "1",
    soft_contingency_fraction: "1",
    soft_commissioning_fraction: "1",
    soft_decommissioning_fraction: "1",
    site_auction_cost: "MUSD",
    site_assessment_cost: "MUSD",
    construction_plan_cost: "MUSD",
    installation_plan_cost: "MUSD",
}

impl CostParameters {
    /// Uncalibrated starting point for the fit, loosely following ORBIT's
    /// default project. Shipped parameter files are fitted from these.
    pub fn reference() -> Self {
        CostParameters {
            turbine_price_per_kw: 1800.0,
            substructure_cost_per_turbine: 5.0,
            reference_depth: 30.0,
            depth_exponent: 0.3,
            array_cable_km_per_turbine: 1.5,
            array_cable_cost_per_km: 0.5,
            export_cable_cost_per_km: 3.0,
            export_cable_capacity: 400.0,
            substation_fixed_cost: 40.0,
            substation_cost_per_mw: 0.08,
            scour_cost_per_turbine: 0.4,
            vessel_day_rate: 0.25,
            turbine_install_mobilization_days: 30.0,
            turbine_install_days_per_turbine: 2.5,
            substructure_install_mobilization_days: 30.0,
            substructure_install_days_per_turbine: 2.0,
            scour_install_mobilization_days: 10.0,
            scour_install_days_per_turbine: 0.5,
            array_install_mobilization_days: 15.0,
            array_install_days_per_km: 0.4,
            export_install_mobilization_days: 20.0,
            export_install_days_per_km: 0.5,
            substation_install_mobilization_days: 20.0,
            substation_install_days: 15.0,
            soft_insurance_fraction: 0.0115,
            soft_financing_fraction: 0.05,
            soft_contingency_fraction: 0.0316,
            soft_commissioning_fraction: 0.0115,
            soft_decommissioning_fraction: 0.15,
            site_auction_cost: 50.0,
            site_assessment_cost: 35.0,
            construction_plan_cost: 10.0,
            installation_plan_cost: 5.0,
        }
    }

    /// Builds parameters from `(name, value)` pairs. Every parameter must be
    /// present exactly once.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self, CostError> {
        let mut params = CostParameters::reference();
        let mut seen = BTreeMap::new();
        for (name, value) in pairs {
            let name = name.trim();
            let slot = params
                .slot(name)
                .ok_or_else(|| CostError::UnknownParameter(name.to_string()))?;
            *slot = value;
            seen.insert(name.to_string(), ());
        }
        if let Some((missing, _)) = Self::FIELDS.iter().find(|(n, _)| !seen.contains_key(*n)) {
            return Err(CostError::MissingParameter(missing.to_string()));
        }
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), CostError> {
        for (name, value, unit) in self.to_rows() {
            let ok = value.is_finite()
                && value >= 0.0
                && (unit != "1" || !name.starts_with("soft_") || value < 1.0);
            if !ok {
                return Err(CostError::InvalidParameter {
                    name: name.to_string(),
                    value,
                });
            }
        }
        for (name, value) in [
            ("reference_depth", self.reference_depth),
            ("export_cable_capacity", self.export_cable_capacity),
        ] {
            if value <= 0.0 {
                return Err(CostError::InvalidParameter {
                    name: name.to_string(),
                    value,
                });
            }
        }
        Ok(())
    }

    pub fn soft_fraction_total(&self) -> f64 {
        self.soft_insurance_fraction
            + self.soft_financing_fraction
            + self.soft_contingency_fraction
            + self.soft_commissioning_fraction
            + self.soft_decommissioning_fraction
    }

    /// Multiplies the balance-of-system capex unit rates (not turbines).
    pub fn scale_bos_capex(&mut self, factor: f64) {
        self.substructure_cost_per_turbine *= factor;
        self.array_cable_cost_per_km *= factor;
        self.export_cable_cost_per_km *= factor;
        self.substation_fixed_cost *= factor;
        self.substation_cost_per_mw *= factor;
        self.scour_cost_per_turbine *= factor;
    }
}

/// Hourly metocean record.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    records: Vec<(f64, f64)>,
}

impl WeatherSeries {
    /// `(wind speed m/s, significant wave height m)` per hour.
    pub fn new(records: Vec<(f64, f64)>) -> Result<Self, CostError> {
        if records.is_empty() {
            return Err(CostError::InvalidWeather("no records".into()));
        }
        if let Some(i) = records
            .iter()
            .position(|(w, h)| !(w.is_finite() && h.is_finite() && *w >= 0.0 && *h >= 0.0))
        {
            return Err(CostError::InvalidWeather(alloc::format!("record {i} is negative or non-finite")));
        }
        Ok(WeatherSeries { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Installation is possible in an hour when both values are at or below the limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperabilityLimits {
    pub max_wind_ms: f64,
    pub max_wave_m: f64,
}

impl Default for OperabilityLimits {
    fn default() -> Self {
        OperabilityLimits {
            max_wind_ms: 15.0,
            max_wave_m: 2.0,
        }
    }
}

impl OperabilityLimits {
    pub fn unlimited() -> Self {
        OperabilityLimits {
            max_wind_ms: f64::INFINITY,
            max_wave_m: f64::INFINITY,
        }
    }
}

/// Total hours over operable hours.
pub fn weather_delay_multiplier(weather: &WeatherSeries, limits: &OperabilityLimits) -> Result<f64, CostError> {
    let operable = weather
        .records
        .iter()
        .filter(|(w, h)| *w <= limits.max_wind_ms && *h <= limits.max_wave_m)
        .count();
    if operable == 0 {
        return Err(CostError::NoOperableWindow);
    }
    Ok(weather.records.len() as f64 / operable as f64)
}

/// Million USD per cost category.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostBreakdown {
    costs: BTreeMap<CostCategory, f64>,
}

impl CostBreakdown {
    pub fn new(costs: BTreeMap<CostCategory, f64>) -> Result<Self, CostError> {
        for (c, &v) in &costs {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CostError::InvalidCost {
                    category: c.to_string(),
                    value: v,
                });
            }
        }
        Ok(CostBreakdown { costs })
    }

    pub fn get(&self, category: CostCategory) -> f64 {
        self.costs.get(&category).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (CostCategory, f64)> + '_ {
        self.costs.iter().map(|(c, v)| (*c, *v))
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    /// Sum over categories in category order.
    pub fn total(&self) -> f64 {
        self.costs.values().sum()
    }

    pub fn turbine_cost(&self) -> f64 {
        self.get(CostCategory::Turbines)
    }

    /// Everything except turbine manufacturing.
    pub fn installation_cost(&self) -> f64 {
        self.iter()
            .filter(|(c, _)| *c != CostCategory::Turbines)
            .map(|(_, v)| v)
            .sum()
    }

    pub fn group_total(&self, group: CostGroup) -> f64 {
        self.iter().filter(|(c, _)| c.group() == group).map(|(_, v)| v).sum()
    }
}

/// Estimates every cost category for a project.
///
/// Turbine cost is exactly linear in `n_turbines * rating`. Vessel-time
/// categories are multiplied by the weather-delay multiplier (1 without a
/// weather series); capex is not.
pub fn estimate_costs(
    spec: &ProjectSpec,
    params: &CostParameters,
    weather: Option<&WeatherSeries>,
    limits: &OperabilityLimits,
) -> Result<CostBreakdown, CostError> {
    spec.check_physical()?;
    params.validate()?;
    let delay = match weather {
        Some(w) => weather_delay_multiplier(w, limits)?,
        None => 1.0,
    };
    let p = params;
    let n = spec.n_turbines as f64;
    let depth_factor = libm::pow(spec.depth_m / p.reference_depth, p.depth_exponent);
    let array_km = n * p.array_cable_km_per_turbine;
    let export_cables = libm::ceil(spec.capacity_mw / p.export_cable_capacity);
    let export_km = spec.distance_to_landfall_km * export_cables;
    let vessel = p.vessel_day_rate * delay;

    use CostCategory::*;
    let mut c = BTreeMap::new();
    // MW * 1000 kW/MW * USD/kW / 1e6 USD per MUSD
    c.insert(Turbines, spec.installed_capacity_mw() * p.turbine_price_per_kw / 1000.0);
    c.insert(Substructure, p.substructure_cost_per_turbine * n * depth_factor);
    c.insert(ArraySystem, p.array_cable_cost_per_km * array_km);
    c.insert(ExportSystem, p.export_cable_cost_per_km * export_km);
    c.insert(
        OffshoreSubstation,
        p.substation_fixed_cost + p.substation_cost_per_mw * spec.capacity_mw,
    );
    c.insert(ScourProtection, p.scour_cost_per_turbine * n);

    c.insert(
        TurbineInstallation,
        vessel * (p.turbine_install_mobilization_days + p.turbine_install_days_per_turbine * n),
    );
    c.insert(
        SubstructureInstallation,
        vessel * (p.substructure_install_mobilization_days + p.substructure_install_days_per_turbine * n * depth_factor),
    );
    c.insert(
        ScourProtectionInstallation,
        vessel * (p.scour_install_mobilization_days + p.scour_install_days_per_turbine * n),
    );
    c.insert(
        ArraySystemInstallation,
        vessel * (p.array_install_mobilization_days + p.array_install_days_per_km * array_km),
    );
    c.insert(
        ExportSystemInstallation,
        vessel * (p.export_install_mobilization_days + p.export_install_days_per_km * export_km),
    );
    c.insert(
        OffshoreSubstationInstallation,
        vessel * (p.substation_install_mobilization_days + p.substation_install_days),
    );

    let capex: f64 = c
        .iter()
        .filter(|(k, _)| k.group() == CostGroup::Capex)
        .map(|(_, v)| v)
        .sum();
    c.insert(Insurance, p.soft_insurance_fraction * capex);
    c.insert(Financing, p.soft_financing_fraction * capex);
    c.insert(Contingency, p.soft_contingency_fraction * capex);
    c.insert(Commissioning, p.soft_commissioning_fraction * capex);
    c.insert(Decommissioning, p.soft_decommissioning_fraction * capex);

    c.insert(SiteAuction, p.site_auction_cost);
    c.insert(SiteAssessment, p.site_assessment_cost);
    c.insert(ConstructionPlan, p.construction_plan_cost);
    c.insert(InstallationPlan, p.installation_plan_cost);

    CostBreakdown::new(c)
}

/// Cost category to NAICS code (3 to 6 digits).
#[derive(Debug, Clone, PartialEq)]
pub struct NaicsMapping {
    rows: BTreeMap<CostCategory, String>,
}

impl NaicsMapping {
    /// Default category-to-NAICS assignment.
    pub fn reference() -> Self {
        use CostCategory::*;
        let rows = [
            (ArraySystem, "33592"),
            (ExportSystem, "33592"),
            (OffshoreSubstation, "237130"),
            (ScourProtection, "237990"),
            (Substructure, "333611"),
            (ArraySystemInstallation, "237130"),
            (ExportSystemInstallation, "237130"),
            (OffshoreSubstationInstallation, "237130"),
            (ScourProtectionInstallation, "237990"),
            (SubstructureInstallation, "238120"),
            (TurbineInstallation, "237"),
            (Turbines, "333"),
            (Insurance, "524210"),
            (Financing, "522"),
            (Contingency, "624230"),
            (Commissioning, "541350"),
            (Decommissioning, "238910"),
            (SiteAuction, "531"),
            (SiteAssessment, "238910"),
            (ConstructionPlan, "236"),
            (InstallationPlan, "541"),
        ];
        NaicsMapping {
            rows: rows.into_iter().map(|(c, n)| (c, n.to_string())).collect(),
        }
    }

    /// Builds a mapping from `(category name, NAICS code)` rows.
    pub fn from_rows<'a>(rows: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, CostError> {
        let mut map = BTreeMap::new();
        for (name, naics) in rows {
            let cat = CostCategory::from_name(name).ok_or_else(|| CostError::UnknownCategory(name.to_string()))?;
            SectorCode::from_naics_prefix(naics)?;
            map.insert(cat, naics.trim().to_string());
        }
        Ok(NaicsMapping { rows: map })
    }

    pub fn naics(&self, category: CostCategory) -> Option<&str> {
        self.rows.get(&category).map(String::as_str)
    }

    /// 3-digit sector of a category.
    pub fn sector_of(&self, category: CostCategory) -> Result<SectorCode, CostError> {
        let code = self
            .naics(category)
            .ok_or_else(|| CostError::UnmappedCategory(category.name().to_string()))?;
        Ok(SectorCode::from_naics_prefix(code)?)
    }

    pub fn iter(&self) -> impl Iterator<Item = (CostCategory, &str)> {
        self.rows.iter().map(|(c, n)| (*c, n.as_str()))
    }
}

/// Sums category costs per 3-digit NAICS sector.
pub fn map_costs_to_naics(
    costs: &CostBreakdown,
    mapping: &NaicsMapping,
) -> Result<BTreeMap<SectorCode, f64>, CostError> {
    let mut out = BTreeMap::new();
    for (cat, v) in costs.iter() {
        *out.entry(mapping.sector_of(cat)?).or_insert(0.0) += v;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ShockKind {
    Installation,
    Turbines,
}

impl ShockKind {
    pub fn of(category: CostCategory) -> Self {
        if category == CostCategory::Turbines {
            ShockKind::Turbines
        } else {
            ShockKind::Installation
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ShockKind::Installation => "installation",
            ShockKind::Turbines => "turbines",
        }
    }
}

/// One row of a project's cost table.
#[derive(Debug, Clone, PartialEq)]
pub struct CostLine {
    pub category: CostCategory,
    pub sector: SectorCode,
    pub value_musd: f64,
    pub shock: ShockKind,
}

pub fn cost_lines(costs: &CostBreakdown, mapping: &NaicsMapping) -> Result<Vec<CostLine>, CostError> {
    costs
        .iter()
        .map(|(category, value_musd)| {
            Ok(CostLine {
                category,
                sector: mapping.sector_of(category)?,
                value_musd,
                shock: ShockKind::of(category),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectShocks {
    pub installation: FinalDemandShock,
    pub turbines: FinalDemandShock,
}

/// Places every cost in the project state. The turbine category forms its
/// own shock; all other categories form the installation shock.
pub fn build_shocks(
    spec: &ProjectSpec,
    costs: &CostBreakdown,
    mapping: &NaicsMapping,
    index: &Arc<RegionSectorIndex>,
) -> Result<ProjectShocks, CostError> {
    let region = index.require_region(&spec.state)?;
    let mut installation = FinalDemandShock::zeros(ShockKind::Installation.as_str(), index.clone());
    let mut turbines = FinalDemandShock::zeros(ShockKind::Turbines.as_str(), index.clone());
    for line in cost_lines(costs, mapping)? {
        let s = index.require_sector(line.sector)?;
        let target = match line.shock {
            ShockKind::Installation => &mut installation,
            ShockKind::Turbines => &mut turbines,
        };
        target.add(index.flatten(region, s), line.value_musd)?;
    }
    Ok(ProjectShocks {
        installation,
        turbines,
    })
}

/// Result of fitting the surrogate to reported project totals.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub params: CostParameters,
    /// Multiplier applied to the balance-of-system capex rates.
    pub bos_capex_scale: f64,
    /// Multiplier applied to the vessel day rate.
    pub installation_scale: f64,
    /// `(project, modeled total, target total)` after the fit.
    pub fit: Vec<(String, f64, f64)>,
}

/// Least-squares fit of the balance-of-system capex rates and the vessel day
/// rate to project totals, minimizing squared relative error. Turbine price,
/// soft-cost fractions and development lump sums stay at their given values.
/// Both multipliers are constrained to be nonnegative.
pub fn calibrate(base: &CostParameters, targets: &[(ProjectSpec, f64)]) -> Result<Calibration, CostError> {
    if targets.len() < 2 {
        return Err(CostError::Calibration("need at least two target projects".into()));
    }
    let sf = base.soft_fraction_total();
    let limits = OperabilityLimits::unlimited();
    // rows: [capex feature, installation feature] / target, rhs = 1 - fixed / target
    let mut rows = Vec::with_capacity(targets.len());
    for (spec, target) in targets {
        if !(target.is_finite() && *target > 0.0) {
            return Err(CostError::Calibration(alloc::format!("target for {} must be positive", spec.name)));
        }
        let b = estimate_costs(spec, base, None, &limits)?;
        let bos = b.group_total(CostGroup::Capex) - b.turbine_cost();
        let fixed = b.turbine_cost() * (1.0 + sf) + b.group_total(CostGroup::Development);
        let install = b.group_total(CostGroup::Installation);
        rows.push([bos * (1.0 + sf) / target, install / target, 1.0 - fixed / target]);
    }
    let objective = |x: f64, y: f64| -> f64 {
        rows.iter()
            .map(|r| {
                let e = r[0] * x + r[1] * y - r[2];
                e * e
            })
            .sum()
    };
    let (mut s00, mut s01, mut s11, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in &rows {
        s00 += r[0] * r[0];
        s01 += r[0] * r[1];
        s11 += r[1] * r[1];
        t0 += r[0] * r[2];
        t1 += r[1] * r[2];
    }
    let mut candidates = Vec::new();
    let det = s00 * s11 - s01 * s01;
    if det.abs() > 1e-300 {
        let x = (t0 * s11 - t1 * s01) / det;
        let y = (s00 * t1 - s01 * t0) / det;
        if x >= 0.0 && y >= 0.0 {
            candidates.push((x, y));
        }
    }
    if s00 > 0.0 {
        candidates.push(((t0 / s00).max(0.0), 0.0));
    }
    if s11 > 0.0 {
        candidates.push((0.0, (t1 / s11).max(0.0)));
    }
    candidates.push((0.0, 0.0));
    let (x, y) = candidates
        .into_iter()
        .min_by(|a, b| objective(a.0, a.1).total_cmp(&objective(b.0, b.1)))
        .ok_or_else(|| CostError::Calibration("no feasible solution".into()))?;

    let mut params = base.clone();
    params.scale_bos_capex(x);
    params.vessel_day_rate *= y;
    let fit = targets
        .iter()
        .map(|(spec, target)| {
            estimate_costs(spec, &params, None, &limits).map(|b| (spec.name.clone(), b.total(), *target))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Calibration {
        params,
        bos_capex_scale: x,
        installation_scale: y,
        fit,
    })
}
