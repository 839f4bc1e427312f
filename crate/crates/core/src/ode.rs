//! Classical fourth-order Runge-Kutta stepping shared by every integrator.

use crate::model::{ModeAmplitudes, C64};

/// States that can be combined linearly by the stepper.
pub trait VectorSpace: Clone {
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);
}

impl VectorSpace for ModeAmplitudes {
    fn axpy(&mut self, a: f64, x: &Self) {
        for m in 0..3 {
            self.alpha[m] += x.alpha[m] * a;
        }
    }
}

impl VectorSpace for Vec<C64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (y, x) in self.iter_mut().zip(x) {
            *y += x * a;
        }
    }
}

pub fn rk4_step<S, F>(f: &F, y: &S, dt: f64) -> S
where
    S: VectorSpace,
    F: Fn(&S) -> S,
{
    let k1 = f(y);
    let mut tmp = y.clone();
    tmp.axpy(0.5 * dt, &k1);
    let k2 = f(&tmp);
    let mut tmp = y.clone();
    tmp.axpy(0.5 * dt, &k2);
    let k3 = f(&tmp);
    let mut tmp = y.clone();
    tmp.axpy(dt, &k3);
    let k4 = f(&tmp);

    let mut out = y.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    out
}

/// Number of whole steps of size `dt` needed to reach `t_end`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    (t_end / dt - 1e-9).ceil().max(0.0) as usize
}
