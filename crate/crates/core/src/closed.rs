//! Closed-system (lossless) analysis of the uniform branch: energy landscape
//! of the driven mode, its extrema, and the excitation spectrum on top of them.

use serde::Serialize;

use crate::cubic::solve_cubic;
use crate::error::{Error, Result};
use crate::model::{SystemParams, C64, PUMP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
    /// Degenerate extremum with a zero excitation frequency.
    Saddle,
    /// Imaginary excitation frequencies; not a physical state.
    Unphysical,
}

impl ExtremumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExtremumKind::Minimum => "minimum",
            ExtremumKind::Maximum => "maximum",
            ExtremumKind::Saddle => "saddle",
            ExtremumKind::Unphysical => "unphysical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeExtremum {
    pub re_alpha2: f64,
    pub energy: f64,
    pub kind: ExtremumKind,
    /// `(omega_+, omega_-)`, with `omega_- = -omega_+`.
    pub eigenfrequencies: [C64; 2],
    /// Symplectic norms of the two branches, same order.
    pub norms: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClosedLabel {
    /// One extremum (the high-population state only).
    I,
    /// Three extrema, counting a double root on the boundary.
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClosedRegion {
    pub label: ClosedLabel,
    pub n_real_roots: usize,
}

/// Energy of the driven mode alone, side modes empty.
pub fn landscape_energy(p: &SystemParams, alpha2: C64) -> f64 {
    let n = alpha2.norm_sqr();
    p.delta[PUMP] * n + 0.5 * p.u0 * n * n + 2.0 * p.omega2 * alpha2.re
}

/// Excitation frequencies `+/- sqrt((U n + D)(3 U n + D))` on top of a uniform state.
pub fn eigenfrequencies(p: &SystemParams, n2: f64) -> [C64; 2] {
    let (u, d) = (p.u0, p.delta[PUMP]);
    let w = C64::new((u * n2 + d) * (3.0 * u * n2 + d), 0.0).sqrt();
    [w, -w]
}

/// Symplectic norm `|U a^2 / (w - D - 2 U n)|^2 - 1` of the excitation at `omega`.
pub fn symplectic_norm(p: &SystemParams, alpha2: C64, omega: C64) -> Result<f64> {
    let (u, d) = (p.u0, p.delta[PUMP]);
    let num = u * alpha2 * alpha2;
    if num == C64::new(0.0, 0.0) {
        return Ok(-1.0);
    }
    let den = omega - d - 2.0 * u * alpha2.norm_sqr();
    let scale = 1.0 + omega.norm() + d.abs() + (2.0 * u * alpha2.norm_sqr()).abs();
    if den.norm() <= 1e-12 * scale {
        return Err(Error::ResonantDenominator(den.norm()));
    }
    Ok((num / den).norm_sqr() - 1.0)
}

fn kind_at(p: &SystemParams, n2: f64) -> ExtremumKind {
    // Hessian of the landscape at a real extremum is diag(2(D + 3Un), 2(D + Un)).
    let (u, d) = (p.u0, p.delta[PUMP]);
    let hx = d + 3.0 * u * n2;
    let hy = d + u * n2;
    let tol = 1e-12 * (d.abs() + (3.0 * u * n2).abs() + 1.0);
    if hx.abs() <= tol || hy.abs() <= tol {
        ExtremumKind::Saddle
    } else if hx * hy < 0.0 {
        ExtremumKind::Unphysical
    } else if hx > 0.0 {
        ExtremumKind::Minimum
    } else {
        ExtremumKind::Maximum
    }
}

/// All real extrema of the landscape, ascending in `Re(alpha2)`.
pub fn landscape_extrema(p: &SystemParams) -> Result<Vec<LandscapeExtremum>> {
    if p.u0 == 0.0 {
        return Err(Error::ZeroInteraction);
    }
    let roots = solve_cubic(p.u0, 0.0, p.delta[PUMP], p.omega2).roots;
    let mut out = Vec::with_capacity(roots.len());
    for r in roots {
        let alpha = C64::new(r, 0.0);
        let n2 = r * r;
        let w = eigenfrequencies(p, n2);
        let norms = [
            symplectic_norm(p, alpha, w[0]).unwrap_or(f64::NAN),
            symplectic_norm(p, alpha, w[1]).unwrap_or(f64::NAN),
        ];
        out.push(LandscapeExtremum {
            re_alpha2: r,
            energy: landscape_energy(p, alpha),
            kind: kind_at(p, n2),
            eigenfrequencies: w,
            norms,
        });
    }
    Ok(out)
}

/// Drive strength separating the one- and three-extremum regions.
pub fn boundary_pump(delta2: f64, u0: f64) -> Result<f64> {
    if !(u0 < 0.0) {
        return Err(Error::InvalidArgument(format!("boundary requires u0 < 0, got {u0}")));
    }
    if !(delta2 >= 0.0) {
        return Err(Error::InvalidArgument(format!("boundary requires delta2 >= 0, got {delta2}")));
    }
    Ok(2.0 / (3.0 * 3f64.sqrt()) * (delta2.powi(3) / u0.abs()).sqrt())
}

pub fn classify_region(p: &SystemParams) -> Result<ClosedRegion> {
    let n = landscape_extrema(p)?.len();
    let label = if n == 3 { ClosedLabel::II } else { ClosedLabel::I };
    Ok(ClosedRegion { label, n_real_roots: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: f64, u: f64, om: f64) -> SystemParams {
        SystemParams::equally_spaced(d, u, om)
    }

    #[test]
    fn energy_values() {
        assert_eq!(landscape_energy(&params(5.0, -1.0, 3.0), C64::new(0.0, 0.0)), 0.0);
        assert!((landscape_energy(&params(1.0, -1.0, 0.0), C64::new(1.0, 0.0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn energy_gradient_vanishes_at_extrema() {
        let p = params(5.0, -1.0, 3.0);
        let h = 1e-6;
        for e in landscape_extrema(&p).unwrap() {
            let x = e.re_alpha2;
            let gx = (landscape_energy(&p, C64::new(x + h, 0.0)) - landscape_energy(&p, C64::new(x - h, 0.0))) / (2.0 * h);
            let gy = (landscape_energy(&p, C64::new(x, h)) - landscape_energy(&p, C64::new(x, -h))) / (2.0 * h);
            assert!(gx.abs() < 1e-6 && gy.abs() < 1e-6);
        }
    }

    #[test]
    fn symmetric_cubic() {
        let p = params(4.0, -1.0, 0.0);
        let r: Vec<f64> = landscape_extrema(&p).unwrap().iter().map(|e| e.re_alpha2).collect();
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-2.0, 0.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_point_kinds() {
        let p = params(5.0, -1.0, 3.0);
        let ex = landscape_extrema(&p).unwrap();
        let kinds: Vec<_> = ex.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![ExtremumKind::Unphysical, ExtremumKind::Minimum, ExtremumKind::Maximum]);
        for e in &ex {
            let r = e.re_alpha2;
            assert!((p.u0 * r * r * r + p.delta[1] * r + p.omega2).abs() < 1e-10);
            assert_eq!(e.eigenfrequencies[0], -e.eigenfrequencies[1]);
        }
        assert!(ex[0].eigenfrequencies[0].re.abs() < 1e-12 && ex[0].eigenfrequencies[0].im != 0.0);
        assert!(ex[1].norms[0] > 0.0);
        assert!(ex[2].norms[0] < 0.0);
    }

    #[test]
    fn boundary_values() {
        assert_eq!(boundary_pump(0.0, -1.0).unwrap(), 0.0);
        assert!((boundary_pump(3.0, -1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(boundary_pump(1.0, 1.0).is_err());
        assert!(boundary_pump(-1.0, -1.0).is_err());
        let b = boundary_pump(3.0, -1.0).unwrap();
        assert_eq!(classify_region(&params(3.0, -1.0, b - 1e-6)).unwrap().n_real_roots, 3);
        assert_eq!(classify_region(&params(3.0, -1.0, b + 1e-6)).unwrap().label, ClosedLabel::I);
    }

    #[test]
    fn norm_of_empty_mode() {
        let p = params(5.0, -1.0, 3.0);
        assert_eq!(symplectic_norm(&p, C64::new(0.0, 0.0), C64::new(5.0, 0.0)).unwrap(), -1.0);
    }

    #[test]
    fn zero_interaction_rejected() {
        assert_eq!(landscape_extrema(&params(1.0, 0.0, 1.0)), Err(Error::ZeroInteraction));
    }
}
