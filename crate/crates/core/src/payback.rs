//! Economic and carbon payback periods.
//!
//! Units: money in million USD, energy in MWh, emissions in metric tons
//! CO2-eq, intensities in t/MWh. Social cost of carbon schedules are in USD
//! per tonne and converted to million USD internally.

use alloc::string::String;
use alloc::vec::Vec;

pub const HOURS_PER_YEAR: f64 = 8760.0;
pub const DEFAULT_CAPACITY_FACTOR: f64 = 0.51;
pub const DEFAULT_LIFETIME_YEARS: u32 = 25;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PaybackError {
    #[error("net annual revenue {0} MUSD/yr is not positive")]
    NonPositiveNetRevenue(f64),
    #[error("project never pays back its emissions: {0}")]
    NeverPaysBack(String),
    #[error("invalid {what}: {value}")]
    InvalidInput { what: &'static str, value: f64 },
    #[error("invalid grid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("invalid social cost of carbon schedule: {0}")]
    InvalidSchedule(String),
}

fn nonneg(what: &'static str, value: f64) -> Result<f64, PaybackError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(PaybackError::InvalidInput { what, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomicInputs {
    /// Initial investment, MUSD.
    pub c_i: f64,
    /// Net annual generation, MWh/yr.
    pub aep: f64,
    /// Electricity price, USD/MWh.
    pub p_s: f64,
    /// Annual operating cost, MUSD/yr.
    pub c_op: f64,
}

impl EconomicInputs {
    pub fn new(c_i: f64, aep: f64, p_s: f64, c_op: f64) -> Result<Self, PaybackError> {
        Ok(EconomicInputs {
            c_i: nonneg("initial investment", c_i)?,
            aep: nonneg("annual energy production", aep)?,
            p_s: nonneg("electricity price", p_s)?,
            c_op: nonneg("operating cost", c_op)?,
        })
    }

    /// `AEP * P_s - C_op`, MUSD/yr.
    pub fn net_revenue(&self) -> f64 {
        self.aep * self.p_s / 1e6 - self.c_op
    }

    fn positive_net_revenue(&self) -> Result<f64, PaybackError> {
        let net = self.net_revenue();
        if net > 0.0 && net.is_finite() {
            Ok(net)
        } else {
            Err(PaybackError::NonPositiveNetRevenue(net))
        }
    }
}

/// Simple payback in years.
pub fn economic_payback(inputs: &EconomicInputs) -> Result<f64, PaybackError> {
    Ok(inputs.c_i / inputs.positive_net_revenue()?)
}

/// Grid emissions intensity by year offset, linearly interpolated and held
/// constant after the last point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTrajectory {
    points: Vec<(f64, f64)>,
}

impl GridTrajectory {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, PaybackError> {
        match points.first() {
            None => return Err(PaybackError::InvalidTrajectory("no points".into())),
            Some((t0, _)) if *t0 != 0.0 => {
                return Err(PaybackError::InvalidTrajectory("first year offset must be 0".into()))
            }
            _ => {}
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return Err(PaybackError::InvalidTrajectory(alloc::format!(
                    "year offsets must increase strictly ({} then {})",
                    w[0].0,
                    w[1].0
                )));
            }
        }
        for &(t, r) in &points {
            if !(r.is_finite() && r >= 0.0) {
                return Err(PaybackError::InvalidTrajectory(alloc::format!("intensity {r} at offset {t}")));
            }
        }
        Ok(GridTrajectory { points })
    }

    pub fn constant(intensity: f64) -> Result<Self, PaybackError> {
        Self::new(alloc::vec![(0.0, intensity)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn is_constant(&self) -> bool {
        self.points.iter().all(|p| p.1 == self.points[0].1)
    }

    pub fn intensity_at(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        match pts.iter().position(|p| p.0 > t) {
            None => pts[pts.len() - 1].1,
            Some(i) => {
                let (t0, r0) = pts[i - 1];
                let (t1, r1) = pts[i];
                r0 + (r1 - r0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarbonInputs {
    /// Construction-phase emissions, t CO2-eq.
    pub em_lifetime: f64,
    pub capacity_mw: f64,
    pub capacity_factor: f64,
    pub lifetime_years: u32,
    /// Lifecycle intensity of the wind plant, t/MWh.
    pub r_osw: f64,
    pub grid: GridTrajectory,
}

impl CarbonInputs {
    /// Inputs with the default capacity factor, lifetime and zero plant intensity.
    pub fn new(em_lifetime: f64, capacity_mw: f64, grid: GridTrajectory) -> Result<Self, PaybackError> {
        let c = CarbonInputs {
            em_lifetime,
            capacity_mw,
            capacity_factor: DEFAULT_CAPACITY_FACTOR,
            lifetime_years: DEFAULT_LIFETIME_YEARS,
            r_osw: 0.0,
            grid,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), PaybackError> {
        nonneg("lifetime emissions", self.em_lifetime)?;
        nonneg("plant intensity", self.r_osw)?;
        if !(self.capacity_mw.is_finite() && self.capacity_mw > 0.0) {
            return Err(PaybackError::InvalidInput {
                what: "capacity",
                value: self.capacity_mw,
            });
        }
        if !(self.capacity_factor > 0.0 && self.capacity_factor <= 1.0) {
            return Err(PaybackError::InvalidInput {
                what: "capacity factor",
                value: self.capacity_factor,
            });
        }
        if self.lifetime_years == 0 {
            return Err(PaybackError::InvalidInput {
                what: "lifetime",
                value: 0.0,
            });
        }
        Ok(())
    }

    /// `capacity * 8760 * capacity_factor`, MWh/yr.
    pub fn annual_energy(&self) -> f64 {
        self.capacity_mw * HOURS_PER_YEAR * self.capacity_factor
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarbonPayback {
    pub months: f64,
    /// Generation per year, MWh/yr.
    pub en_annual: f64,
    /// Generation needed to offset construction emissions, MWh.
    pub en_offset: f64,
    /// Avoided intensity per elapsed month, t/MWh.
    pub r_avoided: Vec<f64>,
}

/// Carbon payback in months.
///
/// A constant trajectory uses the closed form; any other trajectory goes
/// through [`carbon_payback_monthly`].
pub fn carbon_payback(inputs: &CarbonInputs) -> Result<CarbonPayback, PaybackError> {
    inputs.validate()?;
    if !inputs.grid.is_constant() {
        return carbon_payback_monthly(inputs);
    }
    let en_annual = inputs.annual_energy();
    if inputs.em_lifetime == 0.0 {
        return Ok(zero_payback(en_annual));
    }
    let r_avoided = inputs.grid.points()[0].1 - inputs.r_osw;
    if r_avoided <= 0.0 {
        return Err(PaybackError::NeverPaysBack(alloc::format!(
            "avoided intensity {r_avoided} t/MWh is not positive"
        )));
    }
    let en_offset = inputs.em_lifetime / r_avoided;
    let months = 12.0 * en_offset / en_annual;
    if months > 12.0 * inputs.lifetime_years as f64 {
        return Err(PaybackError::NeverPaysBack(alloc::format!(
            "{months:.1} months exceeds the plant lifetime"
        )));
    }
    Ok(CarbonPayback {
        months,
        en_annual,
        en_offset,
        r_avoided: alloc::vec![r_avoided],
    })
}

fn zero_payback(en_annual: f64) -> CarbonPayback {
    CarbonPayback {
        months: 0.0,
        en_annual,
        en_offset: 0.0,
        r_avoided: Vec::new(),
    }
}

/// Accumulates avoided emissions month by month using the mean of the
/// interpolated intensity at each month's endpoints. The crossing month
/// contributes a linear fraction.
pub fn carbon_payback_monthly(inputs: &CarbonInputs) -> Result<CarbonPayback, PaybackError> {
    inputs.validate()?;
    let en_annual = inputs.annual_energy();
    if inputs.em_lifetime == 0.0 {
        return Ok(zero_payback(en_annual));
    }
    let horizon = 12 * inputs.lifetime_years as usize;
    let en_month = en_annual / 12.0;
    let mut remaining = inputs.em_lifetime;
    let mut trace = Vec::new();
    for m in 0..horizon {
        let a = inputs.grid.intensity_at(m as f64 / 12.0) - inputs.r_osw;
        let b = inputs.grid.intensity_at((m + 1) as f64 / 12.0) - inputs.r_osw;
        let r_avoided = 0.5 * (a + b);
        trace.push(r_avoided);
        if r_avoided <= 0.0 {
            return Err(PaybackError::NeverPaysBack(alloc::format!(
                "grid intensity falls to the plant intensity in month {}",
                m + 1
            )));
        }
        let avoided = en_month * r_avoided;
        if avoided >= remaining {
            let months = m as f64 + remaining / avoided;
            return Ok(CarbonPayback {
                months,
                en_annual,
                en_offset: months * en_month,
                r_avoided: trace,
            });
        }
        remaining -= avoided;
    }
    Err(PaybackError::NeverPaysBack(alloc::format!(
        "offset incomplete after {horizon} months"
    )))
}

/// Social cost of carbon in USD per tonne by calendar year, linearly
/// interpolated between points and clamped outside them.
#[derive(Debug, Clone, PartialEq)]
pub struct SccSchedule {
    points: Vec<(i32, f64)>,
}

impl SccSchedule {
    pub fn new(points: Vec<(i32, f64)>) -> Result<Self, PaybackError> {
        if points.is_empty() {
            return Err(PaybackError::InvalidSchedule("no points".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(PaybackError::InvalidSchedule("years must increase strictly".into()));
        }
        if let Some((y, v)) = points.iter().find(|p| !(p.1.is_finite() && p.1 >= 0.0)) {
            return Err(PaybackError::InvalidSchedule(alloc::format!("value {v} in {y}")));
        }
        Ok(SccSchedule { points })
    }

    pub fn constant(usd_per_tonne: f64) -> Result<Self, PaybackError> {
        Self::new(alloc::vec![(0, usd_per_tonne)])
    }

    pub fn value_at(&self, year: i32) -> f64 {
        let pts = &self.points;
        if year <= pts[0].0 {
            return pts[0].1;
        }
        match pts.iter().position(|p| p.0 > year) {
            None => pts[pts.len() - 1].1,
            Some(i) => {
                let (y0, v0) = pts[i - 1];
                let (y1, v1) = pts[i];
                v0 + (v1 - v0) * (year - y0) as f64 / (y1 - y0) as f64
            }
        }
    }
}

/// Monetized project emissions in MUSD: installation emissions at the
/// installation-year price plus each operating year's emissions at that
/// year's price.
pub fn project_social_cost(
    install_emissions: f64,
    annual_op_emissions: f64,
    scc: &SccSchedule,
    install_year: i32,
    lifetime_years: u32,
) -> Result<f64, PaybackError> {
    nonneg("installation emissions", install_emissions)?;
    nonneg("operating emissions", annual_op_emissions)?;
    let mut usd = scc.value_at(install_year) * install_emissions;
    if annual_op_emissions > 0.0 {
        for y in 1..=lifetime_years as i32 {
            usd += scc.value_at(install_year + y) * annual_op_emissions;
        }
    }
    Ok(usd / 1e6)
}

/// Economic payback with the social cost of the project's emissions added
/// to the initial investment.
pub fn scc_adjusted_payback(
    inputs: &EconomicInputs,
    install_emissions: f64,
    annual_op_emissions: f64,
    scc: &SccSchedule,
    install_year: i32,
    lifetime_years: u32,
) -> Result<f64, PaybackError> {
    let net = inputs.positive_net_revenue()?;
    let social = project_social_cost(install_emissions, annual_op_emissions, scc, install_year, lifetime_years)?;
    Ok((inputs.c_i + social) / net)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaybackResult {
    pub economic_years: f64,
    pub carbon: CarbonPayback,
    pub scc_adjusted_years: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn econ(c_i: f64, net: f64) -> EconomicInputs {
        // price 100 USD/MWh, zero operating cost
        EconomicInputs::new(c_i, net * 1e6 / 100.0, 100.0, 0.0).unwrap()
    }

    #[test]
    fn economic_examples() {
        assert!((economic_payback(&econ(100.0, 10.0)).unwrap() - 10.0).abs() < 1e-12);
        let aep = 36.0 * 8760.0 * 0.51;
        let e = EconomicInputs::new(296.0, aep, 150.0, aep * 150.0 / 1e6 - 19.47).unwrap();
        let epb = economic_payback(&e).unwrap();
        assert!((epb - 296.0 / 19.47).abs() < 1e-9, "{epb}");
        let bad = EconomicInputs::new(1.0, 1000.0, 10.0, 0.01).unwrap();
        assert!(matches!(economic_payback(&bad), Err(PaybackError::NonPositiveNetRevenue(_))));
        assert!(EconomicInputs::new(-1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn carbon_examples() {
        let grid = GridTrajectory::constant(0.35).unwrap();
        let va = carbon_payback(&CarbonInputs::new(689_000.0, 2640.0, grid).unwrap()).unwrap();
        let en_annual = 2640.0 * 8760.0 * 0.51;
        assert!((va.en_annual - en_annual).abs() < 1e-6);
        assert!((va.en_offset - 689_000.0 / 0.35).abs() < 1e-6);
        assert!((va.months - 2.0).abs() < 0.05, "{}", va.months);

        let ri = carbon_payback(&CarbonInputs::new(21_000.0, 36.0, GridTrajectory::constant(0.26).unwrap()).unwrap())
            .unwrap();
        assert!((ri.months - 6.0).abs() < 0.1, "{}", ri.months);

        let zero = carbon_payback(&CarbonInputs::new(0.0, 36.0, GridTrajectory::constant(0.26).unwrap()).unwrap())
            .unwrap();
        assert_eq!(zero.months, 0.0);
    }

    #[test]
    fn carbon_never_pays_back() {
        let mut c = CarbonInputs::new(1000.0, 10.0, GridTrajectory::constant(0.1).unwrap()).unwrap();
        c.r_osw = 0.1;
        assert!(matches!(carbon_payback(&c), Err(PaybackError::NeverPaysBack(_))));
        // grid falls to zero within the first year, before a large offset completes
        let falling = GridTrajectory::new(vec![(0.0, 0.4), (1.0, 0.0)]).unwrap();
        let c = CarbonInputs::new(1e9, 10.0, falling).unwrap();
        assert!(matches!(carbon_payback(&c), Err(PaybackError::NeverPaysBack(_))));
        let c = CarbonInputs::new(1e12, 10.0, GridTrajectory::constant(0.4).unwrap()).unwrap();
        assert!(matches!(carbon_payback(&c), Err(PaybackError::NeverPaysBack(_))));
    }

    #[test]
    fn monthly_accumulation_matches_closed_form() {
        let c = CarbonInputs::new(689_000.0, 2640.0, GridTrajectory::constant(0.35).unwrap()).unwrap();
        let closed = carbon_payback(&c).unwrap().months;
        let monthly = carbon_payback_monthly(&c).unwrap().months;
        assert!((closed - monthly).abs() < 1e-9);

        // flat for ten years, so payback happens before the decline
        let grid = GridTrajectory::new(vec![(0.0, 0.3), (10.0, 0.3), (11.0, 0.2)]).unwrap();
        let c = CarbonInputs::new(50_000.0, 100.0, grid).unwrap();
        let stepped = carbon_payback(&c).unwrap();
        let closed = 12.0 * 50_000.0 / 0.3 / (100.0 * 8760.0 * 0.51);
        assert!((stepped.months - closed).abs() < 1e-9, "{} vs {closed}", stepped.months);
        assert_eq!(stepped.r_avoided.len(), libm::ceil(closed) as usize);
    }

    #[test]
    fn decarbonizing_grid_delays_payback() {
        let flat = CarbonInputs::new(235_000.0, 804.0, GridTrajectory::constant(0.35).unwrap()).unwrap();
        let falling = GridTrajectory::new(vec![(0.0, 0.35), (1.0, 0.2), (25.0, 0.1)]).unwrap();
        let mut declining = flat.clone();
        declining.grid = falling;
        assert!(carbon_payback(&declining).unwrap().months > carbon_payback(&flat).unwrap().months);
    }

    #[test]
    fn trajectory_interpolation() {
        let g = GridTrajectory::new(vec![(0.0, 0.4), (2.0, 0.2), (4.0, 0.2)]).unwrap();
        assert_eq!(g.intensity_at(0.0), 0.4);
        assert!((g.intensity_at(1.0) - 0.3).abs() < 1e-15);
        assert_eq!(g.intensity_at(10.0), 0.2);
        assert!(GridTrajectory::new(vec![(1.0, 0.4)]).is_err());
        assert!(GridTrajectory::new(vec![(0.0, 0.4), (0.0, 0.3)]).is_err());
        assert!(GridTrajectory::new(vec![(0.0, -0.4)]).is_err());
        assert!(GridTrajectory::new(vec![]).is_err());
    }

    #[test]
    fn scc_examples() {
        let e = econ(100.0, 10.0);
        let zero = SccSchedule::constant(0.0).unwrap();
        assert_eq!(
            scc_adjusted_payback(&e, 1e6, 5e4, &zero, 2025, 25).unwrap(),
            economic_payback(&e).unwrap()
        );
        let fifty = SccSchedule::constant(50.0).unwrap();
        let adj = scc_adjusted_payback(&e, 1e6, 0.0, &fifty, 2025, 25).unwrap();
        assert!((adj - 15.0).abs() < 1e-12);
        let with_op = scc_adjusted_payback(&e, 1e6, 1e3, &fifty, 2025, 25).unwrap();
        assert!(with_op > adj);
    }

    #[test]
    fn scc_schedule_interpolates_and_clamps() {
        let s = SccSchedule::new(vec![(2020, 50.0), (2030, 70.0)]).unwrap();
        assert_eq!(s.value_at(2000), 50.0);
        assert_eq!(s.value_at(2025), 60.0);
        assert_eq!(s.value_at(2050), 70.0);
        // yearly operating terms follow the schedule
        let c = project_social_cost(0.0, 1e6, &s, 2020, 2).unwrap();
        assert!((c - (52.0 + 54.0)).abs() < 1e-9);
        assert!(SccSchedule::new(vec![(2030, 1.0), (2020, 1.0)]).is_err());
        assert!(SccSchedule::new(vec![]).is_err());
    }
}
