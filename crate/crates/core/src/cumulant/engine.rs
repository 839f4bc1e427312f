//! Symbolic bosonic algebra on three modes: polynomials of normal-ordered
//! monomials `a1^+^p1 a2^+^p2 a3^+^p3 a1^q1 a2^q2 a3^q3`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use crate::model::{SystemParams, C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub dag: [u8; 3],
    pub ann: [u8; 3],
}

impl Monomial {
    pub const ONE: Self = Self { dag: [0; 3], ann: [0; 3] };

    pub fn order(&self) -> usize {
        self.dag.iter().chain(&self.ann).map(|&k| k as usize).sum()
    }

    /// Operator sequence in normal order: creators first, then annihilators,
    /// each by ascending mode. Entries are `(mode, is_creator)`.
    pub fn sequence(&self) -> Vec<(usize, bool)> {
        let mut out = Vec::with_capacity(self.order());
        for m in 0..3 {
            out.extend(std::iter::repeat_n((m, true), self.dag[m] as usize));
        }
        for m in 0..3 {
            out.extend(std::iter::repeat_n((m, false), self.ann[m] as usize));
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self { dag: self.ann, ann: self.dag }
    }
}

/// Linear combination of normal-ordered monomials.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, C64>,
}

fn binom(n: u8, k: u8) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

fn factorial(k: u8) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `a^q a^+^r = sum_k C(q,k) C(r,k) k! a^+^(r-k) a^(q-k)` for one mode.
fn reorder(q: u8, r: u8) -> Vec<(u8, f64)> {
    (0..=q.min(r)).map(|k| (k, binom(q, k) * binom(r, k) * factorial(k))).collect()
}

fn mono_mul(x: &Monomial, y: &Monomial) -> Vec<(Monomial, f64)> {
    let mut out = vec![(Monomial { dag: x.dag, ann: y.ann }, 1.0)];
    for m in 0..3 {
        let opts = reorder(x.ann[m], y.dag[m]);
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for (mono, c) in &out {
            for &(k, w) in &opts {
                let mut mm = *mono;
                mm.dag[m] += y.dag[m] - k;
                mm.ann[m] += x.ann[m] - k;
                next.push((mm, c * w));
            }
        }
        out = next;
    }
    out
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(c: C64, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn one() -> Self {
        Self::term(C64::new(1.0, 0.0), Monomial::ONE)
    }

    pub fn create(mode: usize) -> Self {
        let mut m = Monomial::ONE;
        m.dag[mode] = 1;
        Self::term(C64::new(1.0, 0.0), m)
    }

    pub fn annihilate(mode: usize) -> Self {
        let mut m = Monomial::ONE;
        m.ann[mode] = 1;
        Self::term(C64::new(1.0, 0.0), m)
    }

    pub fn add_term(&mut self, m: Monomial, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let e = self.terms.entry(m).or_insert(C64::new(0.0, 0.0));
        *e += c;
        if e.norm() == 0.0 {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(*m, v * c);
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.adjoint(), v.conj());
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    /// Drop terms with `|c| <= tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.terms.retain(|_, v| v.norm() > tol);
        self
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for (m, v) in rhs.terms {
            self.add_term(m, v);
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + rhs.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (x, cx) in &self.terms {
            for (y, cy) in &rhs.terms {
                for (m, w) in mono_mul(x, y) {
                    out.add_term(m, cx * cy * w);
                }
            }
        }
        out
    }
}

/// Product of ladder operators in the given order, normal-ordered.
pub fn word(ops: &[(usize, bool)]) -> Poly {
    ops.iter().fold(Poly::one(), |acc, &(m, dag)| {
        let f = if dag { Poly::create(m) } else { Poly::annihilate(m) };
        &acc * &f
    })
}

/// Hamiltonian of the driven three-mode cavity in the rotating frame.
pub fn hamiltonian(p: &SystemParams) -> Poly {
    let u = C64::new(p.u0, 0.0);
    let mut h = Poly::zero();
    for m in 0..3 {
        h = h + word(&[(m, true), (m, false)]).scale(C64::new(p.delta[m], 0.0));
        h = h + word(&[(m, true), (m, true), (m, false), (m, false)]).scale(u * 0.5);
    }
    for (m, n) in [(0, 1), (0, 2), (2, 1)] {
        h = h + word(&[(m, true), (n, true), (m, false), (n, false)]).scale(u * 2.0);
    }
    let scatter = word(&[(1, true), (1, true), (0, false), (2, false)]).scale(u);
    h = h + scatter.adjoint() + scatter;
    let drive = Poly::create(1).scale(C64::new(p.omega2, 0.0));
    h + drive.adjoint() + drive
}

/// Heisenberg-picture generator of the master equation acting on `o`:
/// `i[H, O] + sum_m g_m (2 a_m^+ O a_m - a_m^+ a_m O - O a_m^+ a_m)`.
pub fn adjoint_generator(p: &SystemParams, h: &Poly, o: &Poly) -> Poly {
    let mut out = h.commutator(o).scale(I);
    for m in 0..3 {
        if p.gamma[m] == 0.0 {
            continue;
        }
        let a = Poly::annihilate(m);
        let ad = Poly::create(m);
        let num = &ad * &a;
        let jump = &(&ad * o) * &a;
        let d = jump.scale(C64::new(2.0, 0.0)) - &num * o - o * &num;
        out = out + d.scale(C64::new(p.gamma[m], 0.0));
    }
    out.pruned(1e-14)
}
