use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::closure::{close, eval_products, Factor, Product};
use super::engine::{adjoint_generator, hamiltonian, word, Poly};
use super::state::{CorrelationState, N_MOMENTS, PAIRS};
use crate::model::{SystemParams, C64, I, PUMP};
use crate::ode::VectorSpace;

/// Operator whose expectation is stored at each flat index.
pub fn moment_operator(k: usize) -> Poly {
    match k {
        0..=2 => Poly::annihilate(k),
        3..=8 => {
            let (m, n) = PAIRS[k - 3];
            word(&[(m, true), (n, false)])
        }
        9..=14 => {
            let (m, n) = PAIRS[k - 9];
            word(&[(m, false), (n, false)])
        }
        _ => panic!("moment index {k} out of range"),
    }
}

/// Closed second-order moment equations for fixed parameters, generated from
/// the master equation and expanded into sums of moment products.
#[derive(Debug, Clone)]
pub struct CumulantGenerator {
    eqs: Vec<Vec<Product>>,
}

/// Closes every monomial of `poly` and merges identical products.
pub fn close_poly(poly: &Poly) -> Vec<Product> {
    let mut merged: BTreeMap<Vec<Factor>, C64> = BTreeMap::new();
    for (mono, coef) in &poly.terms {
        for (c, mut fs) in close(mono) {
            fs.sort();
            *merged.entry(fs).or_default() += coef * c;
        }
    }
    merged
        .into_iter()
        .filter(|(_, c)| c.norm() > 1e-14)
        .map(|(fs, c)| (c, fs))
        .collect()
}

impl CumulantGenerator {
    pub fn new(p: &SystemParams) -> Self {
        let h = hamiltonian(p);
        let eqs = (0..N_MOMENTS)
            .map(|k| close_poly(&adjoint_generator(p, &h, &moment_operator(k))))
            .collect();
        Self { eqs }
    }

    /// Number of product terms per moment equation.
    pub fn term_counts(&self) -> Vec<usize> {
        self.eqs.iter().map(Vec::len).collect()
    }

    pub fn rhs(&self, c: &CorrelationState) -> CorrelationState {
        let v = c.to_flat();
        let mut out = [C64::new(0.0, 0.0); N_MOMENTS];
        for (k, eq) in self.eqs.iter().enumerate() {
            out[k] = eval_products(eq, &v);
        }
        CorrelationState::from_flat(&out)
    }
}

/// Right-hand side of the three-mode moment equations. Builds the generator on
/// every call; use [`CumulantGenerator`] inside loops.
pub fn three_mode_cumulant_rhs(p: &SystemParams, c: &CorrelationState) -> CorrelationState {
    CumulantGenerator::new(p).rhs(c)
}

/// Moments of a single driven Kerr mode.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SingleModeState {
    /// `<a>`
    pub a: C64,
    /// `<a^+ a>`
    pub n: f64,
    /// `<a a>`
    pub aa: C64,
}

impl SingleModeState {
    pub const VACUUM: Self = Self {
        a: C64::new(0.0, 0.0),
        n: 0.0,
        aa: C64::new(0.0, 0.0),
    };

    pub fn coherent(a: C64) -> Self {
        Self { a, n: a.norm_sqr(), aa: a * a }
    }
}

impl VectorSpace for SingleModeState {
    fn axpy(&mut self, s: f64, x: &Self) {
        self.a += x.a * s;
        self.n += x.n * s;
        self.aa += x.aa * s;
    }
}

/// Gaussian moment equations of one Kerr mode, using the pumped-mode entries
/// of `p` (`delta[1]`, `gamma[1]`, `u0`, `omega2`).
pub fn single_mode_cumulant_rhs(p: &SystemParams, s: &SingleModeState) -> SingleModeState {
    let (d, g, u, om) = (p.delta[PUMP], p.gamma[PUMP], p.u0, p.omega2);
    let a = s.a;
    let lin = C64::new(d, -g);
    let da = -I * (lin + 2.0 * u * s.n - 2.0 * u * a.norm_sqr()) * a - I * u * s.aa * a.conj() - I * om;
    let dn = -2.0 * g * s.n + (I * om * (a - a.conj())).re;
    let daa = -2.0 * I * om * a - 2.0 * I * (lin + 0.5 * u + 3.0 * u * s.n) * s.aa + 4.0 * I * u * a * a * a * a.conj();
    SingleModeState { a: da, n: dn, aa: daa }
}
