use crate::error::{Error, Result};
use crate::model::{meanfield_rhs, ModeAmplitudes, SystemParams};
use crate::ode::{rk4_step, step_count};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 200.0;
pub const DIVERGENCE_GUARD: f64 = 1e6;

/// Sampled mean-field time evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ModeAmplitudes>,
    /// Integration step (not the sampling interval).
    pub dt: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&ModeAmplitudes> {
        self.states.last()
    }

    /// Spacing between stored samples.
    pub fn sample_interval(&self) -> f64 {
        if self.times.len() < 2 {
            self.dt
        } else {
            self.times[1] - self.times[0]
        }
    }
}

pub(crate) fn check_step(dt: f64, t_end: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= dt) {
        return Err(Error::InvalidArgument(format!(
            "t_end ({t_end}) must be at least dt ({dt})"
        )));
    }
    Ok(())
}

/// Classical RK4 over the mean-field equations, storing every step.
pub fn integrate_rk4(p: &SystemParams, s0: &ModeAmplitudes, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_rk4_sampled(p, s0, t_end, dt, 1)
}

/// Like [`integrate_rk4`] but keeps only every `stride`-th state.
pub fn integrate_rk4_sampled(
    p: &SystemParams,
    s0: &ModeAmplitudes,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    check_step(dt, t_end)?;
    let stride = stride.max(1);
    let steps = step_count(t_end, dt);
    let cap = steps / stride + 2;
    let mut times = Vec::with_capacity(cap);
    let mut states = Vec::with_capacity(cap);
    times.push(0.0);
    states.push(*s0);

    let f = |s: &ModeAmplitudes| meanfield_rhs(p, s);
    let mut s = *s0;
    for k in 1..=steps {
        s = rk4_step(&f, &s, dt);
        let amp = s.max_abs();
        if !(amp <= DIVERGENCE_GUARD) {
            return Err(Error::Divergence {
                time: k as f64 * dt,
                amplitude: amp,
            });
        }
        if k % stride == 0 || k == steps {
            times.push(k as f64 * dt);
            states.push(s);
        }
    }
    Ok(Trajectory { times, states, dt })
}

/// Final state only; no storage.
pub fn evolve(p: &SystemParams, s0: &ModeAmplitudes, t_end: f64, dt: f64) -> Result<ModeAmplitudes> {
    check_step(dt, t_end)?;
    let f = |s: &ModeAmplitudes| meanfield_rhs(p, s);
    let mut s = *s0;
    for k in 1..=step_count(t_end, dt) {
        s = rk4_step(&f, &s, dt);
        if !(s.max_abs() <= DIVERGENCE_GUARD) {
            return Err(Error::Divergence {
                time: k as f64 * dt,
                amplitude: s.max_abs(),
            });
        }
    }
    Ok(s)
}
