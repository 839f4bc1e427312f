use serde::{Deserialize, Serialize};

use crate::model::{ModeAmplitudes, C64};
use crate::ode::VectorSpace;

/// Stored index pairs `(m, n)` with `m <= n`.
pub const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

pub fn pair_index(m: usize, n: usize) -> usize {
    let (a, b) = if m <= n { (m, n) } else { (n, m) };
    PAIRS.iter().position(|&q| q == (a, b)).expect("mode index below 3")
}

/// First and second moments of the three modes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelationState {
    /// `<a_m>`
    pub first: [C64; 3],
    /// `<a_m^+ a_n>` for `m <= n`, ordered as [`PAIRS`]
    pub normal: [C64; 6],
    /// `<a_m a_n>` for `m <= n`
    pub anomalous: [C64; 6],
}

pub const N_MOMENTS: usize = 15;

impl CorrelationState {
    pub const VACUUM: Self = Self {
        first: [C64::new(0.0, 0.0); 3],
        normal: [C64::new(0.0, 0.0); 6],
        anomalous: [C64::new(0.0, 0.0); 6],
    };

    /// Moments of the product coherent state `|a1, a2, a3>`.
    pub fn coherent(s: &ModeAmplitudes) -> Self {
        let a = s.alpha;
        let mut c = Self { first: a, ..Self::VACUUM };
        for (k, &(m, n)) in PAIRS.iter().enumerate() {
            c.normal[k] = a[m].conj() * a[n];
            c.anomalous[k] = a[m] * a[n];
        }
        c
    }

    /// `<a_m^+ a_n>` for any order of indices.
    pub fn normal_at(&self, m: usize, n: usize) -> C64 {
        let v = self.normal[pair_index(m, n)];
        if m <= n {
            v
        } else {
            v.conj()
        }
    }

    pub fn anomalous_at(&self, m: usize, n: usize) -> C64 {
        self.anomalous[pair_index(m, n)]
    }

    pub fn population(&self, m: usize) -> f64 {
        self.normal[pair_index(m, m)].re
    }

    pub fn populations(&self) -> [f64; 3] {
        [self.population(0), self.population(1), self.population(2)]
    }

    pub fn means(&self) -> ModeAmplitudes {
        ModeAmplitudes { alpha: self.first }
    }

    pub fn to_flat(&self) -> [C64; N_MOMENTS] {
        let mut v = [C64::new(0.0, 0.0); N_MOMENTS];
        v[..3].copy_from_slice(&self.first);
        v[3..9].copy_from_slice(&self.normal);
        v[9..].copy_from_slice(&self.anomalous);
        v
    }

    pub fn from_flat(v: &[C64; N_MOMENTS]) -> Self {
        let mut c = Self::VACUUM;
        c.first.copy_from_slice(&v[..3]);
        c.normal.copy_from_slice(&v[3..9]);
        c.anomalous.copy_from_slice(&v[9..]);
        c
    }

    /// Exchange of modes 1 and 3.
    pub fn swapped(&self) -> Self {
        let sw = |m: usize| 2 - m;
        let mut c = Self::VACUUM;
        for m in 0..3 {
            c.first[m] = self.first[sw(m)];
        }
        for (k, &(m, n)) in PAIRS.iter().enumerate() {
            c.normal[k] = self.normal_at(sw(m), sw(n));
            c.anomalous[k] = self.anomalous_at(sw(m), sw(n));
        }
        c
    }

    pub fn norm(&self) -> f64 {
        self.to_flat().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl VectorSpace for CorrelationState {
    fn axpy(&mut self, a: f64, x: &Self) {
        for m in 0..3 {
            self.first[m] += x.first[m] * a;
        }
        for k in 0..6 {
            self.normal[k] += x.normal[k] * a;
            self.anomalous[k] += x.anomalous[k] * a;
        }
    }
}

impl std::ops::Sub for CorrelationState {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.axpy(-1.0, &rhs);
        self
    }
}
