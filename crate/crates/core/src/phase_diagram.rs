//! Open-system phase diagram over `(delta2, omega2)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::closed::boundary_pump;
use crate::dynamics::{
    attractor_census, random_initial_conditions, uniform_roots, AttractorKind, AttractorLabel, SettleOptions,
    DEFAULT_IC_RADIUS,
};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::stability::{bogoliubov_matrix, exceptional_point_diagnostics, stability_eigenvalues, STABILITY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Region {
    I,
    II,
    III,
    IV,
    #[serde(rename = "EP_band")]
    EpBand,
    #[serde(rename = "unresolved")]
    Unresolved,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::IV => "IV",
            Region::EpBand => "EP_band",
            Region::Unresolved => "unresolved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySide {
    Below,
    Above,
}

impl BoundarySide {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundarySide::Below => "below",
            BoundarySide::Above => "above",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPointResult {
    pub delta2: f64,
    pub omega2: f64,
    /// One representative per distinct attractor.
    pub attractors: Vec<AttractorLabel>,
    pub counts: Vec<usize>,
    pub region: Region,
    pub closed_boundary_side: BoundarySide,
    /// Every fixed-point attractor passed the linear stability check.
    pub stability_consistent: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepOptions {
    pub ics_per_point: usize,
    pub ic_radius: f64,
    pub seed: u64,
    pub settle: SettleOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            ics_per_point: 100,
            ic_radius: DEFAULT_IC_RADIUS,
            seed: 1,
            settle: SettleOptions::default(),
        }
    }
}

pub const DEFAULT_DELTA_RANGE: (f64, f64) = (-5.0, 5.0);
pub const DEFAULT_OMEGA_RANGE: (f64, f64) = (0.0, 6.0);
pub const DEFAULT_GRID_POINTS: usize = 61;

/// Region from the set of attractor kinds. A lone uniform attractor whose
/// fluctuation spectrum shows coalesced imaginary parts lies in the EP band.
pub fn label_region(kinds: &[AttractorKind], lone_uniform_coalesced: bool) -> Region {
    use AttractorKind::*;
    let mut k: Vec<AttractorKind> = kinds.to_vec();
    k.sort();
    k.dedup();
    match k.as_slice() {
        [LP] | [HP] if lone_uniform_coalesced => Region::EpBand,
        [LP] => Region::I,
        [HP] => Region::IV,
        [LP, HP] => Region::III,
        [LP, HP, LC] => Region::II,
        _ => Region::Unresolved,
    }
}

/// Side of the closed-system boundary; the boundary sits at 0 for `delta2 <= 0`.
pub fn closed_boundary_side(delta2: f64, omega2: f64, u0: f64) -> BoundarySide {
    let b = if delta2 <= 0.0 { 0.0 } else { boundary_pump(delta2, u0).unwrap_or(f64::NAN) };
    if omega2 > b {
        BoundarySide::Above
    } else {
        BoundarySide::Below
    }
}

fn coalesced_at(p: &SystemParams, label: &AttractorLabel) -> Result<bool> {
    match label.fixed_point {
        Some(s) => Ok(exceptional_point_diagnostics(&bogoliubov_matrix(p, &s))?.coalesced),
        None => Ok(false),
    }
}

fn fixed_points_stable(p: &SystemParams, labels: &[AttractorLabel]) -> Result<bool> {
    for l in labels {
        if let Some(s) = l.fixed_point {
            if stability_eigenvalues(&bogoliubov_matrix(p, &s))?.max_real > STABILITY_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Census and region label at one grid point.
pub fn classify_point(p: &SystemParams, ics: &[crate::model::ModeAmplitudes], settle: &SettleOptions) -> GridPointResult {
    let delta2 = p.delta[crate::model::PUMP];
    let side = closed_boundary_side(delta2, p.omega2, p.u0);
    let census = attractor_census(p, ics, settle);
    let attractors: Vec<AttractorLabel> = census.classes.iter().map(|c| c.representative.clone()).collect();
    let counts = census.classes.iter().map(|c| c.count).collect();
    let kinds: Vec<AttractorKind> = attractors.iter().map(|a| a.kind).collect();
    let checks = || -> Result<(bool, bool)> {
        let lone = attractors.len() == 1 && coalesced_at(p, &attractors[0])?;
        Ok((lone, fixed_points_stable(p, &attractors)?))
    };
    let (region, stable, error) = match checks() {
        Ok((lone, stable)) => {
            let r = if stable { label_region(&kinds, lone) } else { Region::Unresolved };
            (r, stable, None)
        }
        Err(e) => (Region::Unresolved, false, Some(e.to_string())),
    };
    GridPointResult {
        delta2,
        omega2: p.omega2,
        attractors,
        counts,
        region,
        closed_boundary_side: side,
        stability_consistent: stable,
        error,
    }
}

/// Region map over the product grid, ordered with `omega2` fastest.
///
/// Every point uses the same seeded set of initial conditions, so the result
/// depends only on the inputs.
pub fn sweep(p: &SystemParams, delta2_grid: &[f64], omega2_grid: &[f64], opts: &SweepOptions) -> Result<Vec<GridPointResult>> {
    if delta2_grid.is_empty() || omega2_grid.is_empty() {
        return Err(Error::InvalidArgument("phase-diagram grids must be nonempty".into()));
    }
    if opts.ics_per_point < 10 {
        return Err(Error::InvalidArgument(format!(
            "ics_per_point must be at least 10, got {}",
            opts.ics_per_point
        )));
    }
    let ics = random_initial_conditions(opts.ics_per_point, opts.ic_radius, opts.seed)?;
    let points: Vec<(f64, f64)> = delta2_grid
        .iter()
        .flat_map(|&d| omega2_grid.iter().map(move |&o| (d, o)))
        .collect();
    Ok(points
        .par_iter()
        .map(|&(d, o)| classify_point(&p.with_delta2(d).with_omega2(o), &ics, &opts.settle))
        .collect())
}

/// One-dimensional path through parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Cut {
    /// Vary `delta2` at fixed `omega2`.
    AlongDelta { omega2: f64 },
    /// Vary `omega2` at fixed `delta2`.
    AlongOmega { delta2: f64 },
}

impl Cut {
    pub fn params(&self, template: &SystemParams, x: f64) -> SystemParams {
        match *self {
            Cut::AlongDelta { omega2 } => template.with_delta2(x).with_omega2(omega2),
            Cut::AlongOmega { delta2 } => template.with_delta2(delta2).with_omega2(x),
        }
    }
}

/// Whether the EP detector fires at `p`: exactly one stable uniform state,
/// whose spectrum has coalesced imaginary parts.
pub fn ep_at(p: &SystemParams) -> Result<bool> {
    let roots = uniform_roots(p);
    let mut stable = Vec::new();
    for r in &roots {
        let b = bogoliubov_matrix(p, &r.state);
        if stability_eigenvalues(&b)?.stable {
            stable.push(b);
        }
    }
    if roots.len() != 1 || stable.len() != 1 {
        return Ok(false);
    }
    Ok(exceptional_point_diagnostics(&stable[0])?.coalesced)
}

/// Closed intervals of consecutive path values where [`ep_at`] fires.
pub fn ep_band(template: &SystemParams, cut: Cut, values: &[f64]) -> Result<Vec<(f64, f64)>> {
    let flags: Vec<bool> = values
        .iter()
        .map(|&x| ep_at(&cut.params(template, x)))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((values[s], values[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((values[s], values[values.len() - 1]));
    }
    Ok(out)
}

/// Closed-system boundary `(delta2, omega2)` along a grid, clipped to 0 for `delta2 <= 0`.
pub fn overlay_closed_boundary(delta2_grid: &[f64], u0: f64) -> Result<Vec<(f64, f64)>> {
    delta2_grid
        .iter()
        .map(|&d| Ok((d, if d <= 0.0 { 0.0 } else { boundary_pump(d, u0)? })))
        .collect()
}
