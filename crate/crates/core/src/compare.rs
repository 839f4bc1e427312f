//! Mean field, Gaussian closure and density matrix side by side along a pump sweep.

use serde::Serialize;

use crate::cumulant::{cumulant_sweep, single_mode_sweep, MomentSweepOptions};
use crate::dynamics::uniform_roots;
use crate::error::Result;
use crate::lindblad::{oracle_sweep, FockConfig};
use crate::model::{SystemParams, PUMP};
use crate::stability::{stability_of, turning_points};

/// A uniform mean-field state and whether it is linearly stable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branch {
    pub n2: f64,
    pub stable: bool,
}

/// Drive `omega2` at which the uniform branch reaches population `n2`.
pub fn pump_for_population(p: &SystemParams, n2: f64) -> f64 {
    let (u, d, g) = (p.u0, p.delta[PUMP], p.gamma[PUMP]);
    (n2 * ((d + u * n2).powi(2) + g * g)).max(0.0).sqrt()
}

/// Pump interval between the two turning points of the uniform branch.
pub fn bistable_window(p: &SystemParams) -> Option<(f64, f64)> {
    let (lo, hi) = turning_points(p)?;
    let (a, b) = (pump_for_population(p, lo), pump_for_population(p, hi));
    Some((a.min(b), a.max(b)))
}

/// Pumped-mode stability of a single driven Kerr mode at population `n`.
fn single_mode_stable(p: &SystemParams, n: f64) -> bool {
    let (u, d, g) = (p.u0, p.delta[PUMP], p.gamma[PUMP]);
    let x = u * u * n * n - (d + 2.0 * u * n).powi(2);
    let re = if x > 0.0 { -g + x.sqrt() } else { -g };
    re < 0.0
}

/// Uniform branches at one drive; `modes` selects the single-mode or
/// three-mode stability criterion.
pub fn meanfield_branches(p: &SystemParams, modes: usize) -> Result<Vec<Branch>> {
    uniform_roots(p)
        .iter()
        .map(|r| {
            let stable = if modes == 1 {
                single_mode_stable(p, r.n2)
            } else {
                stability_of(p, &r.state)?.stable
            };
            Ok(Branch { n2: r.n2, stable })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareOptions {
    pub modes: usize,
    /// Fock cutoff of the density-matrix reference; `None` skips it.
    pub cutoff: Option<usize>,
    /// Integration time for RK4 steady states of the reference.
    pub oracle_t_end: f64,
    pub moments: MomentSweepOptions,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            modes: 1,
            cutoff: Some(30),
            oracle_t_end: 200.0,
            moments: MomentSweepOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub omega2: f64,
    pub branches: Vec<Branch>,
    /// Time-averaged pumped population of the moment equations from vacuum.
    pub cumulant_n2: f64,
    /// Relative peak-to-peak spread of that population in the averaging window.
    pub cumulant_spread: f64,
    pub oracle_n2: Option<f64>,
    /// `(cumulant - oracle) / oracle`
    pub rel_deviation: Option<f64>,
    pub in_window: bool,
    pub error: Option<String>,
}

pub fn compare(p: &SystemParams, omega2_values: &[f64], opts: &CompareOptions) -> Result<Vec<CompareRow>> {
    let window = bistable_window(p);
    let cumulant: Vec<(f64, f64, Option<String>)> = if opts.modes == 1 {
        single_mode_sweep(p, omega2_values, &opts.moments)?
            .into_iter()
            .map(|r| (r.n, r.n_spread, r.error))
            .collect()
    } else {
        cumulant_sweep(p, omega2_values, &opts.moments)?
            .into_iter()
            .map(|r| (r.n[PUMP], r.n2_spread, r.error))
            .collect()
    };
    let oracle = match opts.cutoff {
        Some(c) => {
            let f = FockConfig::new(opts.modes, c)?;
            Some(oracle_sweep(p, &f, omega2_values, opts.oracle_t_end))
        }
        None => None,
    };
    let mut rows = Vec::with_capacity(omega2_values.len());
    for (i, &om) in omega2_values.iter().enumerate() {
        let q = p.with_omega2(om);
        let (cn, spread, mut error) = cumulant[i].clone();
        let oracle_n2 = oracle.as_ref().and_then(|o| {
            if let Some(e) = &o[i].error {
                error.get_or_insert_with(|| e.clone());
            }
            o[i].moments.map(|m| m.population(PUMP))
        });
        let rel_deviation = oracle_n2.filter(|&o| o > 0.0).map(|o| (cn - o) / o);
        rows.push(CompareRow {
            omega2: om,
            branches: meanfield_branches(&q, opts.modes)?,
            cumulant_n2: cn,
            cumulant_spread: spread,
            oracle_n2,
            rel_deviation,
            in_window: window.is_some_and(|(a, b)| om >= a && om <= b),
            error,
        });
    }
    Ok(rows)
}
