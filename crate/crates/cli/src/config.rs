//! Scenario configuration file (TOML).
//!
//! Relative paths are resolved against the directory holding the config.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    /// Also write `results.json` with full-precision values.
    #[serde(default = "yes")]
    pub json: bool,
    pub taxonomy: TaxonomyConfig,
    pub economy: EconomyConfig,
    pub satellite: SatelliteConfig,
    #[serde(default)]
    pub costs: CostsConfig,
    #[serde(default)]
    pub payback: PaybackConfig,
    #[serde(default)]
    pub projects: Vec<ProjectConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxonomyConfig {
    pub regions: PathBuf,
    pub sectors: PathBuf,
    /// Product taxonomy for the supply and use tables. Defaults to `sectors`.
    pub product_sectors: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Direct,
    Neumann,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomyConfig {
    #[serde(rename = "use")]
    pub use_table: Option<PathBuf>,
    pub supply: Option<PathBuf>,
    pub a_matrix: Option<PathBuf>,
    /// `region,sector,value_musd`. Required with `a_matrix`; optional
    /// cross-check with supply and use tables.
    pub industry_output: Option<PathBuf>,
    #[serde(default)]
    pub method: Method,
    pub neumann_tolerance: Option<f64>,
    pub neumann_max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatelliteConfig {
    /// Ready-made `region,sector,emissions_mt` account; skips regionalization.
    pub account: Option<PathBuf>,
    pub national: Option<PathBuf>,
    pub facilities: Option<PathBuf>,
    pub proxy: Option<PathBuf>,
    /// When set, the first column of the national inventory holds source
    /// category codes that are mapped to NAICS through this table.
    pub concordance: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsConfig {
    /// Defaults to the shipped fitted parameters.
    pub params: Option<PathBuf>,
    /// Defaults to the shipped category mapping.
    pub naics_map: Option<PathBuf>,
    pub weather: Option<PathBuf>,
    pub max_wind_ms: Option<f64>,
    pub max_wave_m: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaybackConfig {
    pub inputs: Option<PathBuf>,
    pub grid_trajectory: Option<PathBuf>,
    /// Constant grid intensity, t/MWh, used when no trajectory file is given.
    pub grid_intensity: Option<f64>,
    pub scc: Option<PathBuf>,
    pub install_year: Option<i32>,
    #[serde(default)]
    pub annual_op_emissions_mt: f64,
    #[serde(default = "default_cf")]
    pub capacity_factor: f64,
    #[serde(default = "default_lifetime")]
    pub lifetime_years: u32,
    #[serde(default)]
    pub r_osw: f64,
}

impl Default for PaybackConfig {
    fn default() -> Self {
        PaybackConfig {
            inputs: None,
            grid_trajectory: None,
            grid_intensity: None,
            scc: None,
            install_year: None,
            annual_op_emissions_mt: 0.0,
            capacity_factor: default_cf(),
            lifetime_years: default_lifetime(),
            r_osw: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub name: String,
    pub state: String,
    pub capacity_mw: f64,
    pub turbine_rating_mw: f64,
    pub n_turbines: Option<u32>,
    pub depth_m: f64,
    pub distance_to_landfall_km: f64,
    pub mean_windspeed_ms: f64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_top_k() -> usize {
    10
}

fn default_cf() -> f64 {
    eemrio_core::payback::DEFAULT_CAPACITY_FACTOR
}

fn default_lifetime() -> u32 {
    eemrio_core::payback::DEFAULT_LIFETIME_YEARS
}

fn yes() -> bool {
    true
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config: Config = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve(base);
        Ok(config)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let fix_opt = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                fix(p);
            }
        };
        fix(&mut self.output_dir);
        fix(&mut self.taxonomy.regions);
        fix(&mut self.taxonomy.sectors);
        fix_opt(&mut self.taxonomy.product_sectors);
        fix_opt(&mut self.economy.use_table);
        fix_opt(&mut self.economy.supply);
        fix_opt(&mut self.economy.a_matrix);
        fix_opt(&mut self.economy.industry_output);
        fix_opt(&mut self.satellite.account);
        fix_opt(&mut self.satellite.national);
        fix_opt(&mut self.satellite.facilities);
        fix_opt(&mut self.satellite.proxy);
        fix_opt(&mut self.satellite.concordance);
        fix_opt(&mut self.costs.params);
        fix_opt(&mut self.costs.naics_map);
        fix_opt(&mut self.costs.weather);
        fix_opt(&mut self.payback.inputs);
        fix_opt(&mut self.payback.grid_trajectory);
        fix_opt(&mut self.payback.scc);
    }

    /// Structural checks that do not need any input file.
    pub fn check(&self) -> Result<()> {
        let e = &self.economy;
        match (&e.a_matrix, &e.use_table, &e.supply) {
            (Some(_), None, None) => {
                if e.industry_output.is_none() {
                    bail!("economy.a_matrix requires economy.industry_output");
                }
            }
            (None, Some(_), Some(_)) => {}
            _ => bail!("set either economy.use and economy.supply, or economy.a_matrix"),
        }
        let s = &self.satellite;
        if s.account.is_none() && s.national.is_none() {
            bail!("set satellite.account or satellite.national");
        }
        if s.account.is_some() && (s.national.is_some() || s.facilities.is_some()) {
            bail!("satellite.account cannot be combined with regionalization inputs");
        }
        if self.payback.scc.is_some() && self.payback.install_year.is_none() {
            bail!("payback.scc requires payback.install_year");
        }
        let mut names: Vec<&str> = self.projects.iter().map(|p| p.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            bail!("duplicate project name `{}`", w[0]);
        }
        Ok(())
    }

    pub fn require_projects(&self) -> Result<()> {
        if self.projects.is_empty() {
            bail!("config has no [[projects]]");
        }
        Ok(())
    }
}
