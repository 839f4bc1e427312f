//! Linear (Bogoliubov) stability of mean-field states, the analytic uniform
//! branch, and the fluctuation covariance spectrum.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::{ModeAmplitudes, SystemParams, C64, I, PUMP};

/// Real parts below `-STABILITY_TOL` count as decaying.
pub const STABILITY_TOL: f64 = 1e-9;
/// Eigenvalue proximity (both components) for the strict exceptional-point test.
pub const EP_GAP_TOL: f64 = 1e-3;
/// Eigenvector condition number above which a near-degeneracy counts as defective.
pub const EP_CONDITION_TOL: f64 = 1e6;
/// Tolerance for "equal imaginary parts, split real parts".
pub const COALESCENCE_TOL: f64 = 1e-6;

/// Linearisation on `(da1, da2, da3, da1^+, da2^+, da3^+)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovMatrix {
    pub m: CMat,
    pub r: CMat,
    pub s: CMat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Sorted by imaginary part, then real part.
    pub eigenvalues: Vec<C64>,
    pub stable: bool,
    pub max_real: f64,
}

pub fn bogoliubov_matrix(p: &SystemParams, s: &ModeAmplitudes) -> BogoliubovMatrix {
    let [a1, a2, a3] = s.alpha;
    let u = p.u0;
    let total: f64 = s.populations().iter().sum();
    let diag = |m: usize| -I * C64::new(p.delta[m], -p.gamma[m]) - 2.0 * I * u * total;
    let k = -2.0 * I * u;
    let x12 = a1 * a2.conj() + a2 * a3.conj();
    let x21 = a1.conj() * a2 + a2.conj() * a3;

    #[rustfmt::skip]
    let r = CMat::from_row_slice(3, 3, &[
        diag(0),                  k * x12, k * a1 * a3.conj(),
        k * x21,                  diag(1), k * x12,
        k * a1.conj() * a3,       k * x21, diag(2),
    ]);
    let ks = -I * u;
    let mix = a2 * a2 + 2.0 * a1 * a3;
    #[rustfmt::skip]
    let s_blk = CMat::from_row_slice(3, 3, &[
        ks * a1 * a1,       ks * 2.0 * a1 * a2, ks * mix,
        ks * 2.0 * a1 * a2, ks * mix,           ks * 2.0 * a2 * a3,
        ks * mix,           ks * 2.0 * a2 * a3, ks * a3 * a3,
    ]);

    let mut m = CMat::zeros(6, 6);
    m.view_mut((0, 0), (3, 3)).copy_from(&r);
    m.view_mut((0, 3), (3, 3)).copy_from(&s_blk);
    m.view_mut((3, 0), (3, 3)).copy_from(&s_blk.map(|z| z.conj()));
    m.view_mut((3, 3), (3, 3)).copy_from(&r.map(|z| z.conj()));
    BogoliubovMatrix { m, r, s: s_blk }
}

/// Real 6x6 Jacobian of the mean-field flow in `(Re a1..3, Im a1..3)`.
pub fn real_jacobian(b: &BogoliubovMatrix) -> DMatrix<f64> {
    // d(a) = R da + S da*, with da = dx + i dy.
    let plus = &b.r + &b.s;
    let minus = (&b.r - &b.s) * I;
    let mut j = DMatrix::zeros(6, 6);
    for r in 0..3 {
        for c in 0..3 {
            j[(r, c)] = plus[(r, c)].re;
            j[(r, c + 3)] = minus[(r, c)].re;
            j[(r + 3, c)] = plus[(r, c)].im;
            j[(r + 3, c + 3)] = minus[(r, c)].im;
        }
    }
    j
}

fn sort_spectrum(ev: &mut [C64]) {
    ev.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
}

pub fn stability_eigenvalues(b: &BogoliubovMatrix) -> Result<StabilityReport> {
    let mut ev = linalg::eigenvalues(&b.m)?;
    sort_spectrum(&mut ev);
    let max_real = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport {
        stable: max_real < -STABILITY_TOL,
        max_real,
        eigenvalues: ev,
    })
}

pub fn stability_of(p: &SystemParams, s: &ModeAmplitudes) -> Result<StabilityReport> {
    stability_eigenvalues(&bogoliubov_matrix(p, s))
}

/// Closed-form spectrum on the uniform branch (side modes empty), with the
/// pumped pair first and the coupled side-mode quartet after it.
///
/// For equal losses this is `-g +/- i sqrt(3U^2n^2 + 4U D2 n + D2^2)` and
/// `-g +/- i((D1 - D3)/2 +/- sqrt(3U^2n^2 + 4U D' n + D'^2))`, `D' = (D1 + D3)/2`.
pub fn uniform_eigenvalues(p: &SystemParams, n2: f64) -> [C64; 6] {
    let u = p.u0;
    let x = u * n2;
    let d2 = p.delta[PUMP];
    let g2 = p.gamma[PUMP];
    let e2 = C64::new(3.0 * x * x + 4.0 * x * d2 + d2 * d2, 0.0).sqrt();

    // (a1, a3^+) block: [[A, -iU a^2], [iU a*^2, D]]
    let a = C64::new(-p.gamma[0], -(p.delta[0] + 2.0 * x));
    let d = C64::new(-p.gamma[2], p.delta[2] + 2.0 * x);
    let mean = (a + d) * 0.5;
    let root = ((a - d) * (a - d) * 0.25 + x * x).sqrt();
    let l1 = [mean + root, mean - root];
    // the (a3, a1^+) block is the complex conjugate
    let l3 = [l1[0].conj(), l1[1].conj()];
    [
        C64::new(-g2, 0.0) + I * e2,
        C64::new(-g2, 0.0) - I * e2,
        l1[0],
        l1[1],
        l3[0],
        l3[1],
    ]
}

/// `dn2/dOmega2` along the uniform branch, with the drive reconstructed from `n2`.
///
/// Returns a signed infinity when the denominator vanishes within 1e-12.
pub fn uniform_slope(p: &SystemParams, n2: f64) -> f64 {
    let (u, d, g) = (p.u0, p.delta[PUMP], p.gamma[PUMP]);
    let omega = (n2 * ((d + u * n2).powi(2) + g * g)).max(0.0).sqrt();
    let den = 3.0 * u * u * n2 * n2 + 4.0 * u * d * n2 + d * d + g * g;
    let num = 2.0 * omega;
    if den.abs() <= 1e-12 {
        return f64::INFINITY.copysign(num * den.signum());
    }
    num / den
}

/// Denominator of [`uniform_slope`]; zero at the turning points.
pub fn slope_denominator(p: &SystemParams, n2: f64) -> f64 {
    let (u, d, g) = (p.u0, p.delta[PUMP], p.gamma[PUMP]);
    3.0 * u * u * n2 * n2 + 4.0 * u * d * n2 + d * d + g * g
}

/// Populations bounding the multistable stretch of the uniform branch.
pub fn turning_points(p: &SystemParams) -> Option<(f64, f64)> {
    let (u, d, g) = (p.u0, p.delta[PUMP], p.gamma[PUMP]);
    if !(u * d < 0.0) {
        return None;
    }
    let mut disc = d * d - 3.0 * g * g;
    if disc < 0.0 {
        if disc > -1e-12 * (d * d + 3.0 * g * g) {
            disc = 0.0;
        } else {
            return None;
        }
    }
    let s = (u * u * disc).sqrt();
    let lo = (-2.0 * u * d - s) / (3.0 * u * u);
    let hi = (-2.0 * u * d + s) / (3.0 * u * u);
    Some((lo, hi))
}

/// Noise matrix of the fluctuation vector (normal-ordered vacuum input).
pub fn diffusion_matrix(p: &SystemParams) -> CMat {
    let mut d = CMat::zeros(6, 6);
    for m in 0..3 {
        d[(m, m)] = C64::new(2.0 * p.gamma[m], 0.0);
    }
    d
}

/// `Gamma(w) = (-iw - M)^-1 D (-iw - M)^-+` on each grid frequency.
pub fn covariance_spectrum(p: &SystemParams, s: &ModeAmplitudes, omega_grid: &[f64]) -> Result<Vec<CMat>> {
    let b = bogoliubov_matrix(p, s);
    let report = stability_eigenvalues(&b)?;
    if let Some(z) = report.eigenvalues.iter().find(|z| z.re.abs() < STABILITY_TOL) {
        return Err(Error::MarginalStability(z.re.abs()));
    }
    let d = diffusion_matrix(p);
    omega_grid
        .iter()
        .map(|&w| {
            let a = CMat::identity(6, 6) * (-I * w) - &b.m;
            let inv = linalg::inverse(&a).ok_or(Error::SingularInversion { omega: w })?;
            Ok(&inv * &d * inv.adjoint())
        })
        .collect()
}

/// Unitary map from `(a1, a2, a3, a1^+, a2^+, a3^+)` to quadratures
/// `(x2, p2, x1, p1, x3, p3)`, with `x = (a + a^+)/sqrt2`, `p = (a - a^+)/(i sqrt2)`.
pub fn quadrature_transform() -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut t = CMat::zeros(6, 6);
    for (row, mode) in [(0, 1), (2, 0), (4, 2)] {
        t[(row, mode)] = C64::new(h, 0.0);
        t[(row, mode + 3)] = C64::new(h, 0.0);
        t[(row + 1, mode)] = C64::new(0.0, -h);
        t[(row + 1, mode + 3)] = C64::new(0.0, h);
    }
    t
}

pub fn quadrature_covariance(gamma: &CMat) -> CMat {
    let t = quadrature_transform();
    &t * gamma * t.adjoint()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpDiagnostics {
    /// Smallest distance between two eigenvalues.
    pub min_gap: f64,
    /// Condition number of the eigenvector matrix.
    pub eigvec_condition: f64,
    /// Near-degenerate pair with an ill-conditioned eigenbasis.
    pub strict: bool,
    /// Some pair shares its imaginary part while the real parts differ
    /// (over- and under-damped partners).
    pub coalesced: bool,
}

pub fn exceptional_point_diagnostics(b: &BogoliubovMatrix) -> Result<EpDiagnostics> {
    let ev = linalg::eigenvalues(&b.m)?;
    let mut min_gap = f64::INFINITY;
    let mut close_pair = false;
    let mut coalesced = false;
    for i in 0..ev.len() {
        for j in i + 1..ev.len() {
            let dz = ev[i] - ev[j];
            min_gap = min_gap.min(dz.norm());
            if dz.re.abs() < EP_GAP_TOL && dz.im.abs() < EP_GAP_TOL {
                close_pair = true;
            }
            let scale = 1.0 + ev[i].im.abs();
            if dz.im.abs() <= COALESCENCE_TOL * scale && dz.re.abs() > COALESCENCE_TOL {
                coalesced = true;
            }
        }
    }
    let vecs: Vec<_> = ev.iter().map(|&l| linalg::eigenvector(&b.m, l)).collect();
    let eigvec_condition = linalg::condition_number(&CMat::from_columns(&vecs));
    Ok(EpDiagnostics {
        min_gap,
        eigvec_condition,
        strict: close_pair && eigvec_condition > EP_CONDITION_TOL,
        coalesced,
    })
}
