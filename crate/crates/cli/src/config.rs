//! Run configuration: TOML file, built-in defaults and dotted-key overrides.

use std::path::PathBuf;

use kerr_cavity::model::ParamsFile;
use kerr_cavity::{Error, Result, SystemParams};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

/// Evenly spaced values from `min` to `max`; one point means `min` alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub const fn new(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points }
    }

    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        if self.points == 0 || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Config(format!("grid `{name}` needs finite bounds and at least one point")));
        }
        if self.points > 1 && !(self.max > self.min) {
            return Err(Error::Config(format!("grid `{name}` needs max > min")));
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let h = (self.max - self.min) / (self.points - 1) as f64;
        Ok((0..self.points).map(|k| self.min + h * k as f64).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Output {
    Sweep,
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Lowest,
    Highest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClosedConfig {
    pub delta2: Grid,
    pub omega2: Grid,
}

impl Default for ClosedConfig {
    fn default() -> Self {
        Self {
            delta2: Grid::new(0.1, 5.0, 50),
            omega2: Grid::new(0.0, 6.0, 61),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceConfig {
    pub ics: usize,
    pub ic_radius: f64,
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            ics: 4,
            ic_radius: 5.0,
            t_end: 200.0,
            dt: 1e-3,
            stride: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedPointsConfig {
    /// Random Newton seeds in addition to the uniform roots.
    pub seeds: usize,
    pub seed_radius: f64,
}

impl Default for FixedPointsConfig {
    fn default() -> Self {
        Self {
            seeds: 200,
            seed_radius: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityConfig {
    /// Drive values to scan; the `params` drive alone when absent.
    pub omega2: Option<Grid>,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self { omega2: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub method: String,
    pub omega: Grid,
    /// Uniform stationary state used as the background.
    pub branch: Branch,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            method: "numeric_6x6".into(),
            omega: Grid::new(-15.0, 15.0, 3001),
            branch: Branch::Lowest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CumulantConfig {
    pub modes: usize,
    pub output: Output,
    pub omega2: Grid,
    pub t_end: f64,
    pub dt: f64,
    pub transient_fraction: f64,
    pub stride: usize,
}

impl Default for CumulantConfig {
    fn default() -> Self {
        Self {
            modes: 3,
            output: Output::Sweep,
            omega2: Grid::new(0.0, 6.0, 61),
            t_end: 200.0,
            dt: 2e-3,
            transient_fraction: 0.5,
            stride: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub modes: usize,
    /// Highest Fock level per mode; 30 for one mode and 5 for three when absent.
    pub cutoff: Option<usize>,
    pub output: Output,
    pub omega2: Grid,
    pub t_end: f64,
    /// Time step of RK4 runs; derived from the generator's rate bound when absent.
    pub dt: Option<f64>,
    pub stride: usize,
    pub dim_cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            modes: 1,
            cutoff: None,
            output: Output::Sweep,
            omega2: Grid::new(0.0, 6.0, 61),
            t_end: 200.0,
            dt: None,
            stride: 10,
            dim_cap: kerr_cavity::lindblad::DEFAULT_DIM_CAP,
        }
    }
}

pub fn default_cutoff(modes: usize) -> usize {
    if modes == 1 {
        30
    } else {
        5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseDiagramConfig {
    pub delta2: Grid,
    pub omega2: Grid,
    pub ics_per_point: usize,
    pub ic_radius: f64,
    pub t_end: f64,
    pub dt: f64,
    pub transient_fraction: f64,
}

impl Default for PhaseDiagramConfig {
    fn default() -> Self {
        use kerr_cavity::phase_diagram::{DEFAULT_DELTA_RANGE, DEFAULT_GRID_POINTS, DEFAULT_OMEGA_RANGE};
        Self {
            delta2: Grid::new(DEFAULT_DELTA_RANGE.0, DEFAULT_DELTA_RANGE.1, DEFAULT_GRID_POINTS),
            omega2: Grid::new(DEFAULT_OMEGA_RANGE.0, DEFAULT_OMEGA_RANGE.1, DEFAULT_GRID_POINTS),
            ics_per_point: 100,
            ic_radius: 5.0,
            t_end: 200.0,
            dt: 1e-3,
            transient_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    pub modes: usize,
    pub cutoff: Option<usize>,
    pub omega2: Grid,
    pub t_end: f64,
    pub dt: f64,
    pub transient_fraction: f64,
    pub stride: usize,
    pub oracle_t_end: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            modes: 1,
            cutoff: None,
            omega2: Grid::new(0.0, 6.0, 61),
            t_end: 200.0,
            dt: 2e-3,
            transient_fraction: 0.5,
            stride: 10,
            oracle_t_end: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub params: ParamsFile,
    #[serde(default)]
    pub closed: ClosedConfig,
    #[serde(default)]
    pub trace: TraceConfig,
    #[serde(default, rename = "fixed-points")]
    pub fixed_points: FixedPointsConfig,
    #[serde(default)]
    pub stability: StabilityConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub cumulant: CumulantConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default, rename = "phase-diagram")]
    pub phase_diagram: PhaseDiagramConfig,
    #[serde(default)]
    pub compare: CompareConfig,
}

fn default_seed() -> u64 {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    /// Reference cavity: side modes one unit either side, unit losses.
    pub fn reference_params() -> ParamsFile {
        SystemParams::equally_spaced(5.0, -1.0, 3.0).into()
    }

    pub fn params(&self) -> SystemParams {
        self.params.into()
    }
}

/// Table used when no configuration file is given.
fn reference_table() -> Table {
    let mut t = Table::new();
    t.insert(
        "params".into(),
        Value::try_from(RunConfig::reference_params()).expect("params serialize"),
    );
    t
}

/// Every key at its default. `params` is left out unless `with_params`, so a
/// config file still has to supply it.
pub fn default_table(with_params: bool) -> Table {
    let cfg = resolve(reference_table()).expect("defaults are valid");
    let Value::Table(mut t) = Value::try_from(&cfg).expect("config serializes") else {
        unreachable!("a struct serializes to a table")
    };
    if !with_params {
        t.remove("params");
    }
    t
}

/// Deep merge: tables merge key by key, anything else in `over` replaces.
pub fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

pub fn parse_table(text: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| Error::Config(e.message().trim().to_string()))
}

fn parse_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("key just inserted"),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// Apply `section.key=value`, creating tables along the path.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("bad override key `{path}`")));
    }
    let mut cur = table;
    for k in &keys[..keys.len() - 1] {
        let entry = cur.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{k}` in `{path}` is not a table")))?;
    }
    cur.insert(keys[keys.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

pub fn resolve(table: Table) -> Result<RunConfig> {
    let cfg: RunConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.message().trim().to_string()))?;
    cfg.params().ensure_valid()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values() {
        assert_eq!(Grid::new(0.0, 1.0, 3).values("g").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(Grid::new(2.0, 2.0, 1).values("g").unwrap(), vec![2.0]);
        assert!(Grid::new(0.0, 1.0, 0).values("g").is_err());
        assert!(Grid::new(1.0, 0.0, 4).values("g").is_err());
    }

    #[test]
    fn defaults_resolve() {
        let cfg = resolve(default_table(true)).unwrap();
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.params().delta, [4.0, 5.0, 6.0]);
        assert_eq!(cfg.phase_diagram.delta2.points, 61);
    }

    #[test]
    fn overrides_create_sections() {
        let mut t = default_table(true);
        apply_override(&mut t, "cumulant.modes=1").unwrap();
        apply_override(&mut t, "spectrum.method=analytic_uniform").unwrap();
        apply_override(&mut t, "params.omega2 = 2.5").unwrap();
        let cfg = resolve(t).unwrap();
        assert_eq!(cfg.cumulant.modes, 1);
        assert_eq!(cfg.spectrum.method, "analytic_uniform");
        assert_eq!(cfg.params.omega2, 2.5);
        assert!(apply_override(&mut default_table(true), "nothing").is_err());
    }

    #[test]
    fn unknown_and_missing_keys() {
        let e = resolve(parse_table("[params]\ndelta1 = 1\ndelta2 = 2\ndelta3 = 3\ngamma1 = 1\ngamma2 = 1\ngamma3 = 1\nomega2 = 1").unwrap())
            .unwrap_err();
        assert!(e.to_string().contains("u0"), "{e}");
        let mut t = default_table(true);
        apply_override(&mut t, "closed.bogus=1").unwrap();
        assert!(resolve(t).unwrap_err().to_string().contains("bogus"));
    }

    #[test]
    fn partial_grids_merge_over_defaults() {
        let mut t = default_table(false);
        merge(&mut t, parse_table("[params]\ndelta1 = 4\ndelta2 = 5\ndelta3 = 6\ngamma1 = 1\ngamma2 = 1\ngamma3 = 1\nu0 = -1\nomega2 = 1\n[closed]\ndelta2 = { points = 7 }").unwrap());
        apply_override(&mut t, "closed.omega2.max=2").unwrap();
        let cfg = resolve(t).unwrap();
        assert_eq!(cfg.closed.delta2.points, 7);
        assert_eq!(cfg.closed.omega2, Grid::new(0.0, 2.0, 61));
        assert!(resolve(default_table(false)).unwrap_err().to_string().contains("params"));
    }
}
