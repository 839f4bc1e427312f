use rayon::prelude::*;
use serde::Serialize;

use super::state::{pair_index, CorrelationState};
use super::{integrate_cumulant_sampled, integrate_single_mode, SingleModeState, DEFAULT_CUMULANT_DT};
use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Relative peak-to-peak spread of `n2` above which a point counts as oscillating.
pub const OSCILLATION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSweepOptions {
    pub t_end: f64,
    pub dt: f64,
    /// Fraction of the run discarded before averaging.
    pub transient_fraction: f64,
    pub stride: usize,
}

impl Default for MomentSweepOptions {
    fn default() -> Self {
        Self {
            t_end: 200.0,
            dt: DEFAULT_CUMULANT_DT,
            transient_fraction: 0.5,
            stride: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulantSweepRow {
    pub omega2: f64,
    /// Time-averaged populations over the post-transient window.
    pub n: [f64; 3],
    /// Time average of `|<a1 a3>|`.
    pub abs_a13: f64,
    /// Relative peak-to-peak spread of `n2` in the window.
    pub n2_spread: f64,
    pub oscillating: bool,
    pub last: Option<CorrelationState>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleModeSweepRow {
    pub omega2: f64,
    pub n: f64,
    pub abs_a: f64,
    pub n_spread: f64,
    pub last: Option<SingleModeState>,
    pub error: Option<String>,
}

fn check_grid(values: &[f64]) -> Result<()> {
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("omega2 grid must be strictly increasing".into()));
    }
    Ok(())
}

fn window<T>(xs: &[T], fraction: f64) -> &[T] {
    let start = ((xs.len() as f64) * fraction).floor() as usize;
    &xs[start.min(xs.len().saturating_sub(1))..]
}

fn spread(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    (hi - lo) / mean.abs().max(1e-12)
}

/// Steady or time-averaged three-mode moments from vacuum at each pump strength.
pub fn cumulant_sweep(p: &SystemParams, omega2_values: &[f64], opts: &MomentSweepOptions) -> Result<Vec<CumulantSweepRow>> {
    check_grid(omega2_values)?;
    Ok(omega2_values
        .par_iter()
        .map(|&om| {
            let q = p.with_omega2(om);
            match integrate_cumulant_sampled(&q, &CorrelationState::VACUUM, opts.t_end, opts.dt, opts.stride) {
                Ok(tr) => {
                    let w = window(&tr.states, opts.transient_fraction);
                    let len = w.len() as f64;
                    let mut n = [0.0; 3];
                    for s in w {
                        for m in 0..3 {
                            n[m] += s.population(m) / len;
                        }
                    }
                    let abs_a13 = w.iter().map(|s| s.anomalous[pair_index(0, 2)].norm()).sum::<f64>() / len;
                    let n2: Vec<f64> = w.iter().map(|s| s.population(1)).collect();
                    let n2_spread = spread(&n2);
                    CumulantSweepRow {
                        omega2: om,
                        n,
                        abs_a13,
                        n2_spread,
                        oscillating: n2_spread > OSCILLATION_TOL,
                        last: tr.states.last().copied(),
                        error: None,
                    }
                }
                Err(e) => CumulantSweepRow {
                    omega2: om,
                    n: [f64::NAN; 3],
                    abs_a13: f64::NAN,
                    n2_spread: f64::NAN,
                    oscillating: false,
                    last: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Single-mode counterpart of [`cumulant_sweep`] using the pumped-mode parameters.
pub fn single_mode_sweep(p: &SystemParams, omega2_values: &[f64], opts: &MomentSweepOptions) -> Result<Vec<SingleModeSweepRow>> {
    check_grid(omega2_values)?;
    Ok(omega2_values
        .par_iter()
        .map(|&om| {
            let q = p.with_omega2(om);
            match integrate_single_mode(&q, &SingleModeState::VACUUM, opts.t_end, opts.dt, opts.stride) {
                Ok(tr) => {
                    let w = window(&tr.states, opts.transient_fraction);
                    let ns: Vec<f64> = w.iter().map(|s| s.n).collect();
                    SingleModeSweepRow {
                        omega2: om,
                        n: ns.iter().sum::<f64>() / ns.len() as f64,
                        abs_a: w.iter().map(|s| s.a.norm()).sum::<f64>() / ns.len() as f64,
                        n_spread: spread(&ns),
                        last: tr.states.last().copied(),
                        error: None,
                    }
                }
                Err(e) => SingleModeSweepRow {
                    omega2: om,
                    n: f64::NAN,
                    abs_a: f64::NAN,
                    n_spread: f64::NAN,
                    last: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}
