//! Second-order cumulant (Gaussian) closure of the moment hierarchy.

pub mod closure;
pub mod engine;
pub mod equations;
pub mod state;
pub mod sweep;

pub use equations::*;
pub use state::*;
pub use sweep::*;

use serde::Serialize;

use crate::dynamics::{check_step, DIVERGENCE_GUARD};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::ode::{rk4_step, step_count, VectorSpace};

/// Populations below this abort the integration.
pub const NEGATIVITY_TOL: f64 = 1e-9;
pub const DEFAULT_CUMULANT_DT: f64 = 2e-3;

#[derive(Debug, Clone, Serialize)]
pub struct MomentTrajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub dt: f64,
    /// Smallest population seen at any step.
    pub min_population: f64,
}

pub type CumulantTrajectory = MomentTrajectory<CorrelationState>;
pub type SingleModeTrajectory = MomentTrajectory<SingleModeState>;

trait Moments: VectorSpace {
    fn pops(&self) -> Vec<f64>;
    fn scale_of(&self) -> f64;
}

impl Moments for CorrelationState {
    fn pops(&self) -> Vec<f64> {
        self.populations().to_vec()
    }
    fn scale_of(&self) -> f64 {
        let a = self.first.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let n = self.normal.iter().chain(&self.anomalous).map(|z| z.norm().sqrt()).fold(0.0, f64::max);
        if self.is_finite() {
            a.max(n)
        } else {
            f64::INFINITY
        }
    }
}

impl Moments for SingleModeState {
    fn pops(&self) -> Vec<f64> {
        vec![self.n]
    }
    fn scale_of(&self) -> f64 {
        let v = self.a.norm().max(self.n.abs().sqrt()).max(self.aa.norm().sqrt());
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    }
}

fn integrate_moments<S: Moments, F: Fn(&S) -> S>(
    f: F,
    s0: &S,
    t_end: f64,
    dt: f64,
    stride: usize,
    pop_modes: &[usize],
) -> Result<MomentTrajectory<S>> {
    check_step(dt, t_end)?;
    let stride = stride.max(1);
    let steps = step_count(t_end, dt);
    let mut times = vec![0.0];
    let mut states = vec![s0.clone()];
    let mut min_population = s0.pops().into_iter().fold(f64::INFINITY, f64::min);
    let mut s = s0.clone();
    for k in 1..=steps {
        s = rk4_step(&f, &s, dt);
        let t = k as f64 * dt;
        let amp = s.scale_of();
        if !(amp <= DIVERGENCE_GUARD) {
            return Err(Error::Divergence { time: t, amplitude: amp });
        }
        for (i, n) in s.pops().into_iter().enumerate() {
            min_population = min_population.min(n);
            if n < -NEGATIVITY_TOL {
                return Err(Error::NegativePopulation { mode: pop_modes[i], time: t, value: n });
            }
        }
        if k % stride == 0 || k == steps {
            times.push(t);
            states.push(s.clone());
        }
    }
    Ok(MomentTrajectory { times, states, dt, min_population })
}

/// RK4 over the three-mode moment equations.
pub fn integrate_cumulant(p: &SystemParams, c0: &CorrelationState, t_end: f64, dt: f64) -> Result<CumulantTrajectory> {
    integrate_cumulant_sampled(p, c0, t_end, dt, 1)
}

pub fn integrate_cumulant_sampled(
    p: &SystemParams,
    c0: &CorrelationState,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<CumulantTrajectory> {
    let g = CumulantGenerator::new(p);
    integrate_moments(|c: &CorrelationState| g.rhs(c), c0, t_end, dt, stride, &[1, 2, 3])
}

/// RK4 over the single-mode moment equations.
pub fn integrate_single_mode(
    p: &SystemParams,
    s0: &SingleModeState,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<SingleModeTrajectory> {
    integrate_moments(|s: &SingleModeState| single_mode_cumulant_rhs(p, s), s0, t_end, dt, stride, &[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModeAmplitudes, C64};

    #[test]
    fn linear_cavity_steady_state() {
        let p = SystemParams::equally_spaced(2.0, 0.0, 1.5);
        let tr = integrate_cumulant_sampled(&p, &CorrelationState::VACUUM, 30.0, 2e-3, 1000).unwrap();
        let s = tr.states.last().unwrap();
        let a2 = -C64::new(1.5, 0.0) / C64::new(2.0, -1.0);
        let want = CorrelationState::coherent(&ModeAmplitudes::uniform(a2));
        assert!((*s - want).norm() < 1e-9);

        let tr = integrate_single_mode(&p, &SingleModeState::VACUUM, 30.0, 2e-3, 1000).unwrap();
        let s = tr.states.last().unwrap();
        assert!((s.a - a2).norm() < 1e-9);
        assert!((s.n - a2.norm_sqr()).abs() < 1e-9);
        assert!((s.aa - a2 * a2).norm() < 1e-9);
    }

    #[test]
    fn dark_vacuum_stays_empty() {
        let p = SystemParams::equally_spaced(5.0, -1.0, 0.0);
        let tr = integrate_cumulant(&p, &CorrelationState::VACUUM, 2.0, 1e-2).unwrap();
        assert!(tr.states.iter().all(|s| s.norm() == 0.0));
        let tr = integrate_single_mode(&p, &SingleModeState::VACUUM, 2.0, 1e-2, 1).unwrap();
        assert!(tr.states.iter().all(|s| *s == SingleModeState::VACUUM));
    }

    #[test]
    fn negative_population_aborts() {
        let p = SystemParams::equally_spaced(0.0, 0.0, 0.0);
        let mut c0 = CorrelationState::VACUUM;
        c0.normal[0] = C64::new(-1e-3, 0.0);
        match integrate_cumulant(&p, &c0, 1.0, 1e-2) {
            Err(Error::NegativePopulation { mode: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fourth_order_self_convergence() {
        let p = SystemParams::equally_spaced(5.0, -1.0, 3.0);
        let end = |dt: f64| *integrate_cumulant_sampled(&p, &CorrelationState::VACUUM, 2.0, dt, 100_000).unwrap().states.last().unwrap();
        let (a, b, c) = (end(0.02), end(0.01), end(0.005));
        let order = ((a - b).norm() / (b - c).norm()).log2();
        assert!((order - 4.0).abs() < 0.3, "order {order}");
    }
}
