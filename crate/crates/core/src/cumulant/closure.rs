//! Gaussian closure of higher moments in terms of first and second moments.

use super::engine::Monomial;
use super::state::{pair_index, CorrelationState, N_MOMENTS};
use crate::model::C64;

/// One moment, possibly conjugated, as an index into the flat 15-vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Factor {
    pub var: u8,
    pub conj: bool,
}

impl Factor {
    pub fn eval(&self, v: &[C64; N_MOMENTS]) -> C64 {
        let z = v[self.var as usize];
        if self.conj {
            z.conj()
        } else {
            z
        }
    }
}

/// Product of moments with a coefficient.
pub type Product = (C64, Vec<Factor>);

type Op = (usize, bool);

fn first(op: Op) -> Factor {
    let (m, dag) = op;
    Factor { var: m as u8, conj: dag }
}

/// `<x y>` for `x` standing left of `y` in a normal-ordered sequence.
fn pair(x: Op, y: Op) -> Factor {
    match (x.1, y.1) {
        (true, false) => {
            let (m, n) = (x.0, y.0);
            Factor { var: 3 + pair_index(m, n) as u8, conj: m > n }
        }
        (false, false) => Factor { var: 9 + pair_index(x.0, y.0) as u8, conj: false },
        (true, true) => Factor { var: 9 + pair_index(x.0, y.0) as u8, conj: true },
        (false, true) => unreachable!("closure only sees normal-ordered sequences"),
    }
}

/// Three-body rule with a vanishing third cumulant:
/// `<ABC> = <AB><C> + <AC><B> + <BC><A> - 2<A><B><C>`.
fn three(s: &[Op]) -> Vec<Product> {
    let one = C64::new(1.0, 0.0);
    let (a, b, c) = (s[0], s[1], s[2]);
    vec![
        (one, vec![pair(a, b), first(c)]),
        (one, vec![pair(a, c), first(b)]),
        (one, vec![pair(b, c), first(a)]),
        (C64::new(-2.0, 0.0), vec![first(a), first(b), first(c)]),
    ]
}

/// Four-body rule: `<ABCD> = <AB><CD> + <AC><BD> + <AD><BC> - 2<A><B><C><D>`.
fn four(s: &[Op]) -> Vec<Product> {
    let one = C64::new(1.0, 0.0);
    let (a, b, c, d) = (s[0], s[1], s[2], s[3]);
    vec![
        (one, vec![pair(a, b), pair(c, d)]),
        (one, vec![pair(a, c), pair(b, d)]),
        (one, vec![pair(a, d), pair(b, c)]),
        (C64::new(-2.0, 0.0), vec![first(a), first(b), first(c), first(d)]),
    ]
}

/// Expectation of a normal-ordered monomial as a sum of moment products.
///
/// # Panics
/// For monomials above fourth order, which the quartic generator never produces.
pub fn close(m: &Monomial) -> Vec<Product> {
    let s = m.sequence();
    let one = C64::new(1.0, 0.0);
    match s.len() {
        0 => vec![(one, vec![])],
        1 => vec![(one, vec![first(s[0])])],
        2 => vec![(one, vec![pair(s[0], s[1])])],
        3 => three(&s),
        4 => four(&s),
        k => panic!("no closure rule for a moment of order {k}"),
    }
}

pub fn eval_products(terms: &[Product], v: &[C64; N_MOMENTS]) -> C64 {
    terms
        .iter()
        .map(|(c, fs)| fs.iter().fold(*c, |acc, f| acc * f.eval(v)))
        .sum()
}

/// Closed expectation value of a monomial in a given state.
pub fn closed_expectation(m: &Monomial, c: &CorrelationState) -> C64 {
    eval_products(&close(m), &c.to_flat())
}
