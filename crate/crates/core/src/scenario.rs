//! Project evaluation against a prepared model.
//!
//! A [`Model`] holds the total requirements, emissions factors and cost
//! surrogate. It is immutable once built, so projects can be evaluated from
//! several threads against one factorization.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::accounts::{InStateSplit, RegionSectorVector};
use crate::index::{IndexError, RegionSectorIndex, Sector};
use crate::mrio::{self, DirectRequirements, ImpactVector, LeontiefMethod, MrioError, TotalRequirements};
use crate::payback::{
    self, CarbonInputs, EconomicInputs, GridTrajectory, PaybackError, PaybackResult, SccSchedule,
};
use crate::satellite::{self, EmissionsFactors, EmissionsImpact, SatelliteError};
use crate::wind_cost::{
    self, CostBreakdown, CostError, CostLine, CostParameters, NaicsMapping, OperabilityLimits, ProjectShocks,
    ProjectSpec, WeatherSeries,
};

/// Relative tolerance of the per-project additivity audit.
pub const ADDITIVITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Mrio(#[from] MrioError),
    #[error(transparent)]
    Satellite(#[from] SatelliteError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Payback(#[from] PaybackError),
    #[error("project `{project}`: {source}")]
    Project {
        project: String,
        #[source]
        source: alloc::boxed::Box<ScenarioError>,
    },
    #[error("additivity audit failed: relative residual {0:e}")]
    Additivity(f64),
}

impl ScenarioError {
    fn in_project(self, name: &str) -> Self {
        ScenarioError::Project {
            project: name.into(),
            source: alloc::boxed::Box::new(self),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SccSettings {
    pub schedule: SccSchedule,
    pub install_year: i32,
    /// t CO2-eq per operating year.
    pub annual_op_emissions: f64,
}

/// Payback inputs for one project. `None` fields are filled from the model:
/// investment from the cost total, lifetime emissions from the emissions
/// total, capacity from the spec and generation from capacity and capacity
/// factor.
#[derive(Debug, Clone, PartialEq)]
pub struct PaybackSpec {
    pub c_i_musd: Option<f64>,
    pub aep_mwh: Option<f64>,
    pub p_s_usd_mwh: f64,
    pub c_op_musd: f64,
    pub em_lifetime_t: Option<f64>,
    pub capacity_mw: Option<f64>,
    pub capacity_factor: f64,
    pub lifetime_years: u32,
    pub r_osw: f64,
    pub grid: GridTrajectory,
    pub scc: Option<SccSettings>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectInputs {
    pub spec: ProjectSpec,
    pub payback: Option<PaybackSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectResult {
    pub spec: ProjectSpec,
    pub costs: CostBreakdown,
    pub cost_lines: Vec<CostLine>,
    pub shocks: ProjectShocks,
    pub installation_impact: ImpactVector,
    pub turbine_impact: ImpactVector,
    /// Elementwise sum of the two shock impacts.
    pub impact: ImpactVector,
    pub installation_emissions: EmissionsImpact,
    pub turbine_emissions: EmissionsImpact,
    pub emissions: EmissionsImpact,
    pub impact_split: InStateSplit,
    pub emissions_split: InStateSplit,
    pub top_impact_sectors: Vec<(Sector, f64)>,
    pub top_emissions_sectors: Vec<(Sector, f64)>,
    pub payback: Option<PaybackResult>,
    /// `|total(L(dy1 + dy2)) - total(L dy1) - total(L dy2)| / |total(L(dy1 + dy2))|`
    pub additivity_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Model {
    a: DirectRequirements,
    l: TotalRequirements,
    ef: EmissionsFactors,
    params: CostParameters,
    mapping: NaicsMapping,
    weather: Option<WeatherSeries>,
    limits: OperabilityLimits,
}

impl Model {
    /// Computes `L` once for all later evaluations.
    pub fn new(
        a: DirectRequirements,
        method: LeontiefMethod,
        ef: EmissionsFactors,
        params: CostParameters,
        mapping: NaicsMapping,
    ) -> Result<Self, ScenarioError> {
        mrio::same_index(a.index(), ef.index())?;
        params.validate()?;
        let l = mrio::leontief_inverse(&a, method)?;
        Ok(Model {
            a,
            l,
            ef,
            params,
            mapping,
            weather: None,
            limits: OperabilityLimits::default(),
        })
    }

    pub fn with_weather(mut self, weather: WeatherSeries, limits: OperabilityLimits) -> Self {
        self.weather = Some(weather);
        self.limits = limits;
        self
    }

    pub fn index(&self) -> &Arc<RegionSectorIndex> {
        self.a.index()
    }

    pub fn direct_requirements(&self) -> &DirectRequirements {
        &self.a
    }

    pub fn total_requirements(&self) -> &TotalRequirements {
        &self.l
    }

    pub fn emissions_factors(&self) -> &EmissionsFactors {
        &self.ef
    }

    pub fn cost_parameters(&self) -> &CostParameters {
        &self.params
    }

    pub fn naics_mapping(&self) -> &NaicsMapping {
        &self.mapping
    }

    pub fn estimate_costs(&self, spec: &ProjectSpec) -> Result<CostBreakdown, CostError> {
        wind_cost::estimate_costs(spec, &self.params, self.weather.as_ref(), &self.limits)
    }

    /// Full evaluation of one project. Errors carry the project name.
    pub fn evaluate_project(&self, project: &ProjectInputs, top_k: usize) -> Result<ProjectResult, ScenarioError> {
        self.evaluate_inner(project, top_k)
            .map_err(|e| e.in_project(&project.spec.name))
    }

    fn evaluate_inner(&self, project: &ProjectInputs, top_k: usize) -> Result<ProjectResult, ScenarioError> {
        let spec = &project.spec;
        let index = self.index();
        let costs = self.estimate_costs(spec)?;
        let cost_lines = wind_cost::cost_lines(&costs, &self.mapping)?;
        let shocks = wind_cost::build_shocks(spec, &costs, &self.mapping, index)?;

        let installation_impact = mrio::impact(&self.l, &shocks.installation)?;
        let turbine_impact = mrio::impact(&self.l, &shocks.turbines)?;
        let impact = ImpactVector::new(
            index.clone(),
            installation_impact
                .values()
                .iter()
                .zip(turbine_impact.values())
                .map(|(a, b)| a + b)
                .collect(),
        )?;

        let combined = shocks.installation.combined(&shocks.turbines, "combined")?;
        let direct = mrio::impact(&self.l, &combined)?.total();
        let parts = installation_impact.total() + turbine_impact.total();
        let additivity_residual = if direct == 0.0 {
            parts.abs()
        } else {
            ((direct - parts) / direct).abs()
        };
        if !(additivity_residual <= ADDITIVITY_TOLERANCE) {
            return Err(ScenarioError::Additivity(additivity_residual));
        }

        let installation_emissions = satellite::emissions_impact(&self.ef, &installation_impact)?;
        let turbine_emissions = satellite::emissions_impact(&self.ef, &turbine_impact)?;
        let emissions = satellite::emissions_impact(&self.ef, &impact)?;

        let impact_split = impact.split_in_state(&spec.state)?;
        let emissions_split = emissions.split_in_state(&spec.state)?;
        let top_impact_sectors = impact.top_sectors(top_k);
        let top_emissions_sectors = emissions.top_sectors(top_k);

        let payback = match &project.payback {
            None => None,
            Some(p) => Some(evaluate_payback(spec, p, costs.total(), emissions.total())?),
        };

        Ok(ProjectResult {
            spec: spec.clone(),
            costs,
            cost_lines,
            shocks,
            installation_impact,
            turbine_impact,
            impact,
            installation_emissions,
            turbine_emissions,
            emissions,
            impact_split,
            emissions_split,
            top_impact_sectors,
            top_emissions_sectors,
            payback,
            additivity_residual,
        })
    }
}

/// Fills model-derived defaults into the payback inputs and evaluates all
/// payback measures.
pub fn evaluate_payback(
    spec: &ProjectSpec,
    p: &PaybackSpec,
    cost_total: f64,
    emissions_total: f64,
) -> Result<PaybackResult, PaybackError> {
    let carbon = CarbonInputs {
        em_lifetime: p.em_lifetime_t.unwrap_or(emissions_total),
        capacity_mw: p.capacity_mw.unwrap_or(spec.capacity_mw),
        capacity_factor: p.capacity_factor,
        lifetime_years: p.lifetime_years,
        r_osw: p.r_osw,
        grid: p.grid.clone(),
    };
    carbon.validate()?;
    let econ = EconomicInputs::new(
        p.c_i_musd.unwrap_or(cost_total),
        p.aep_mwh.unwrap_or_else(|| carbon.annual_energy()),
        p.p_s_usd_mwh,
        p.c_op_musd,
    )?;
    let economic_years = payback::economic_payback(&econ)?;
    let carbon_result = payback::carbon_payback(&carbon)?;
    let scc_adjusted_years = match &p.scc {
        None => None,
        Some(s) => Some(payback::scc_adjusted_payback(
            &econ,
            carbon.em_lifetime,
            s.annual_op_emissions,
            &s.schedule,
            s.install_year,
            p.lifetime_years,
        )?),
    };
    Ok(PaybackResult {
        economic_years,
        carbon: carbon_result,
        scc_adjusted_years,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::Region;
    use crate::linalg::DenseMatrix;
    use crate::satellite::SatelliteAccount;
    use alloc::vec;

    // Two regions, sectors 237 / 333 / WIND; mapping everything onto the two
    // NAICS sectors present.
    fn model() -> Model {
        let r = ["MD", "VA"].iter().map(|c| Region::new(*c, "").unwrap()).collect();
        let s = ["237", "333", "WIND"].iter().map(|c| Sector::parse(c, "").unwrap()).collect();
        let idx = Arc::new(RegionSectorIndex::new(r, s).unwrap());
        let a = DenseMatrix::from_rows(&[
            &[0.10, 0.05, 0.00, 0.02, 0.01, 0.00],
            &[0.05, 0.20, 0.00, 0.01, 0.03, 0.00],
            &[0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
            &[0.03, 0.01, 0.00, 0.15, 0.05, 0.00],
            &[0.01, 0.04, 0.00, 0.05, 0.10, 0.00],
            &[0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
        ]);
        let a = DirectRequirements::new(idx.clone(), a).unwrap();
        let sat = SatelliteAccount::new(idx.clone(), vec![50.0, 200.0, 0.0, 30.0, 100.0, 0.0]).unwrap();
        let ef = satellite::emissions_factors(&sat, &[100.0, 400.0, 0.0, 60.0, 250.0, 0.0]).unwrap();
        let mapping = NaicsMapping::from_rows(
            wind_cost::CostCategory::ALL
                .iter()
                .map(|c| (c.name(), if *c == wind_cost::CostCategory::Turbines { "333" } else { "237" })),
        )
        .unwrap();
        Model::new(a, LeontiefMethod::Direct, ef, CostParameters::reference(), mapping).unwrap()
    }

    fn project(state: &str) -> ProjectInputs {
        ProjectInputs {
            spec: ProjectSpec::new("Toy", state, 120.0, 12.0, None, 25.0, 20.0, 8.0).unwrap(),
            payback: Some(PaybackSpec {
                c_i_musd: None,
                aep_mwh: None,
                p_s_usd_mwh: 120.0,
                c_op_musd: 10.0,
                em_lifetime_t: None,
                capacity_mw: None,
                capacity_factor: 0.51,
                lifetime_years: 25,
                r_osw: 0.0,
                grid: GridTrajectory::constant(0.35).unwrap(),
                scc: Some(SccSettings {
                    schedule: SccSchedule::constant(50.0).unwrap(),
                    install_year: 2025,
                    annual_op_emissions: 0.0,
                }),
            }),
        }
    }

    #[test]
    fn end_to_end_consistency() {
        let m = model();
        let r = m.evaluate_project(&project("VA"), 2).unwrap();
        let cost = r.costs.total();
        let shock_total = r.shocks.installation.total() + r.shocks.turbines.total();
        assert!((shock_total - cost).abs() <= 1e-12 * cost);
        assert!(r.additivity_residual <= ADDITIVITY_TOLERANCE);
        assert_eq!(r.impact_split.total, r.impact_split.in_state + r.impact_split.out_of_state);
        // output multipliers exceed one for a productive economy
        assert!(r.impact.total() > cost);
        // no emissions or output in the wind sector
        for p in m.index().wind_positions() {
            assert_eq!(r.emissions.values()[p], 0.0);
        }
        let pb = r.payback.unwrap();
        assert!(pb.scc_adjusted_years.unwrap() > pb.economic_years);
        assert!((pb.carbon.months - 12.0 * r.emissions.total() / 0.35 / (120.0 * 8760.0 * 0.51)).abs() < 1e-9);
        assert_eq!(r.top_impact_sectors.len(), 2);
    }

    #[test]
    fn impact_matches_explicit_inverse() {
        let m = model();
        let r = m.evaluate_project(&project("MD"), 3).unwrap();
        let l = m.total_requirements().to_matrix();
        let mut dy = r.shocks.installation.values().to_vec();
        for (d, t) in dy.iter_mut().zip(r.shocks.turbines.values()) {
            *d += t;
        }
        let dx = l.matvec(&dy).unwrap();
        for (a, b) in dx.iter().zip(r.impact.values()) {
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn errors_name_the_project() {
        let m = model();
        let err = m.evaluate_project(&project("RI"), 3).unwrap_err();
        assert!(alloc::format!("{err}").contains("Toy"));
    }
}
