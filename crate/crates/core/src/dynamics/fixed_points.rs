use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cubic::solve_cubic;
use crate::model::{meanfield_rhs, ModeAmplitudes, SystemParams, C64, PUMP};
use crate::stability::{bogoliubov_matrix, real_jacobian};

/// Required residual `|F|_2` of an accepted root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;
/// Roots closer than this (Euclidean, real coordinates) are merged.
pub const ROOT_DEDUP_TOL: f64 = 1e-6;
const MAX_NEWTON_ITER: usize = 200;

/// A stationary state with empty side modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformRoot {
    pub n2: f64,
    pub state: ModeAmplitudes,
}

/// All uniform stationary states, ascending in `n2`.
///
/// Solves `U^2 n^3 + 2 U D2 n^2 + (D2^2 + g2^2) n - W^2 = 0` and sets
/// `a2 = -W / (D2 - i g2 + U n)`.
pub fn uniform_roots(p: &SystemParams) -> Vec<UniformRoot> {
    let (u, d, g, om) = (p.u0, p.delta[PUMP], p.gamma[PUMP], p.omega2);
    let ns: Vec<f64> = if u == 0.0 {
        vec![om * om / (d * d + g * g)]
    } else {
        solve_cubic(u * u, 2.0 * u * d, d * d + g * g, -om * om)
            .roots
            .into_iter()
            .filter(|&n| n >= -1e-12)
            .map(|n| n.max(0.0))
            .collect()
    };
    let mut out: Vec<UniformRoot> = Vec::with_capacity(ns.len());
    for n2 in ns {
        let a2 = -C64::new(om, 0.0) / C64::new(d + u * n2, -g);
        let root = UniformRoot {
            n2,
            state: ModeAmplitudes::uniform(a2),
        };
        // a double root of the cubic is one state
        if !out.iter().any(|r| (r.state - root.state).norm() < ROOT_DEDUP_TOL) {
            out.push(root);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointSet {
    pub roots: Vec<ModeAmplitudes>,
    /// Seeds whose Newton iteration did not reach the residual tolerance.
    pub failed_seeds: usize,
}

fn residual(p: &SystemParams, s: &ModeAmplitudes) -> f64 {
    meanfield_rhs(p, s).norm()
}

/// Damped Newton iteration on the six real stationarity equations.
pub fn newton_polish(p: &SystemParams, seed: &ModeAmplitudes) -> Option<ModeAmplitudes> {
    let mut s = *seed;
    let mut r = residual(p, &s);
    for _ in 0..MAX_NEWTON_ITER {
        if !r.is_finite() {
            return None;
        }
        if r <= ROOT_RESIDUAL_TOL {
            return Some(s);
        }
        let f = DVector::from_row_slice(&meanfield_rhs(p, &s).to_real());
        let j: DMatrix<f64> = real_jacobian(&bogoliubov_matrix(p, &s));
        // pseudo-inverse handles the singular direction of phase-degenerate roots
        let step = j.svd(true, true).solve(&(-f), 1e-13).ok()?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut x = s.to_real();
            for k in 0..6 {
                x[k] += lambda * step[k];
            }
            let trial = ModeAmplitudes::from_real(&x);
            let rt = residual(p, &trial);
            if rt < r {
                s = trial;
                r = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return (r <= ROOT_RESIDUAL_TOL).then_some(s);
        }
    }
    (r <= ROOT_RESIDUAL_TOL).then_some(s)
}

/// Stationary states reached by Newton from each seed, de-duplicated.
pub fn find_fixed_points(p: &SystemParams, seeds: &[ModeAmplitudes]) -> FixedPointSet {
    let mut roots: Vec<ModeAmplitudes> = Vec::new();
    let mut failed_seeds = 0;
    for seed in seeds {
        match newton_polish(p, seed) {
            Some(r) => {
                if !roots.iter().any(|q| (*q - r).norm() < ROOT_DEDUP_TOL) {
                    roots.push(r);
                }
            }
            None => failed_seeds += 1,
        }
    }
    FixedPointSet { roots, failed_seeds }
}
