//! Gaussian Keldysh blocks around a mean-field background, retarded Green's
//! functions and spectral functions.
//!
//! Backgrounds enter through classical fields `alpha_c = sqrt(2) alpha`, where
//! `alpha` is the mean field used everywhere else in the crate. Fluctuations are
//! ordered `(a1, a1^+, a2, a2^+, a3, a3^+)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::{meanfield_rhs, ModeAmplitudes, SystemParams, C64, I, PUMP};

pub const DEFAULT_GRID_MIN: f64 = -15.0;
pub const DEFAULT_GRID_MAX: f64 = 15.0;
pub const DEFAULT_GRID_POINTS: usize = 3001;

pub fn default_grid() -> Vec<f64> {
    linear_grid(DEFAULT_GRID_MIN, DEFAULT_GRID_MAX, DEFAULT_GRID_POINTS)
}

pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Second-order background seen by the fluctuations, in classical-field
/// normalisation: `normal[m][n] ~ alpha_m^* alpha_n`, `anomalous[m][n] ~ alpha_m alpha_n`
/// and `total` the population entering the Kerr shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairBackground {
    pub normal: [[C64; 3]; 3],
    pub anomalous: [[C64; 3]; 3],
    pub total: f64,
}

impl PairBackground {
    /// Factorised background of classical fields.
    pub fn from_classical(alpha_c: &ModeAmplitudes) -> Self {
        let a = alpha_c.alpha;
        let mut normal = [[C64::new(0.0, 0.0); 3]; 3];
        let mut anomalous = normal;
        for m in 0..3 {
            for n in 0..3 {
                normal[m][n] = a[m].conj() * a[n];
                anomalous[m][n] = a[m] * a[n];
            }
        }
        Self {
            normal,
            anomalous,
            total: a.iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    /// Background of a mean-field state (`alpha_c = sqrt(2) alpha`).
    pub fn from_meanfield(s: &ModeAmplitudes) -> Self {
        Self::from_classical(&to_classical(s))
    }
}

pub fn to_classical(s: &ModeAmplitudes) -> ModeAmplitudes {
    s.scale(C64::new(std::f64::consts::SQRT_2, 0.0))
}

pub fn from_classical(s: &ModeAmplitudes) -> ModeAmplitudes {
    s.scale(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0))
}

/// Saddle-point equations of the classical fields.
pub fn classical_field_rhs(p: &SystemParams, c: &ModeAmplitudes) -> ModeAmplitudes {
    let [a1, a2, a3] = c.alpha;
    let n = c.populations();
    let h = 0.5 * p.u0;
    let lin = |m: usize| C64::new(p.delta[m], -p.gamma[m]);
    let d1 = -I * lin(0) * a1 - I * h * ((n[0] + 2.0 * n[1] + 2.0 * n[2]) * a1 + a2 * a2 * a3.conj());
    let d2 = -I * lin(1) * a2
        - I * h * ((n[1] + 2.0 * n[0] + 2.0 * n[2]) * a2 + 2.0 * a2.conj() * a1 * a3)
        - I * p.omega2 * std::f64::consts::SQRT_2;
    let d3 = -I * lin(2) * a3 - I * h * ((n[2] + 2.0 * n[1] + 2.0 * n[0]) * a3 + a2 * a2 * a1.conj());
    ModeAmplitudes::new(d1, d2, d3)
}

/// `sqrt(2)` times the mean-field flow at `alpha_c / sqrt(2)`; equal to
/// [`classical_field_rhs`].
pub fn classical_field_rhs_via_meanfield(p: &SystemParams, c: &ModeAmplitudes) -> ModeAmplitudes {
    to_classical(&meanfield_rhs(p, &from_classical(c)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeldyshBlocks {
    pub ga_inv: CMat,
    pub gr_inv: CMat,
    pub pk: CMat,
}

fn inverse_block(p: &SystemParams, bg: &PairBackground, omega: f64, loss_sign: f64) -> CMat {
    let u = p.u0;
    let nn = |m: usize, n: usize| bg.normal[m][n];
    let aa = |m: usize, n: usize| bg.anomalous[m][n];
    let hop_f = nn(1, 0) + nn(2, 1); // a1 a2^* + a2 a3^*
    let hop_b = nn(0, 1) + nn(1, 2); // a1^* a2 + a2^* a3
    let mix = aa(1, 1) + 2.0 * aa(0, 2);
    let nt = bg.total;
    let part = |m: usize| C64::new(omega - p.delta[m] - u * nt, loss_sign * p.gamma[m]);
    let hole = |m: usize| C64::new(-omega - p.delta[m] - u * nt, -loss_sign * p.gamma[m]);
    let h = 0.5 * u;

    #[rustfmt::skip]
    let rows: [[C64; 6]; 6] = [
        [part(0), -h * aa(0, 0), -u * hop_f, -u * aa(0, 1), -u * nn(2, 0), -h * mix],
        [-h * aa(0, 0).conj(), hole(0), -u * aa(0, 1).conj(), -u * hop_b, -h * mix.conj(), -u * nn(0, 2)],
        [-u * hop_b, -u * aa(0, 1), part(1), -h * mix, -u * hop_f, -u * aa(1, 2)],
        [-u * aa(0, 1).conj(), -u * hop_f, -h * mix.conj(), hole(1), -u * aa(1, 2).conj(), -u * hop_b],
        [-u * nn(0, 2), -h * mix, -u * hop_b, -u * aa(1, 2), part(2), -h * aa(2, 2)],
        [-h * mix.conj(), -u * nn(2, 0), -u * aa(1, 2).conj(), -u * hop_f, -h * aa(2, 2).conj(), hole(2)],
    ];
    CMat::from_fn(6, 6, |r, c| rows[r][c])
}

/// Inverse retarded/advanced blocks and the Keldysh component at frequency `omega`.
pub fn assemble_keldysh_blocks(p: &SystemParams, alpha_c: &ModeAmplitudes, omega: f64) -> KeldyshBlocks {
    assemble_from_background(p, &PairBackground::from_classical(alpha_c), omega)
}

pub fn assemble_from_background(p: &SystemParams, bg: &PairBackground, omega: f64) -> KeldyshBlocks {
    let mut pk = CMat::zeros(6, 6);
    for m in 0..3 {
        pk[(2 * m, 2 * m)] = C64::new(0.0, 2.0 * p.gamma[m]);
        pk[(2 * m + 1, 2 * m + 1)] = C64::new(0.0, 2.0 * p.gamma[m]);
    }
    KeldyshBlocks {
        ga_inv: inverse_block(p, bg, omega, -1.0),
        gr_inv: inverse_block(p, bg, omega, 1.0),
        pk,
    }
}

/// Closed-form retarded Green's functions on the uniform branch, `n2 = |alpha_2c|^2`.
pub fn retarded_gf_uniform(p: &SystemParams, n2: f64, omega: f64) -> [C64; 3] {
    let u = p.u0;
    let w = C64::new(omega, 0.0);
    let (d2, g2) = (p.delta[PUMP], p.gamma[PUMP]);
    let num2 = -4.0 * (w + d2 + I * g2 + u * n2);
    let den2 = 4.0 * (w + d2 + I * g2) * (-w + d2 - I * g2) + 8.0 * u * d2 * n2 + 3.0 * u * u * n2 * n2;
    let side = |m: usize, mb: usize| {
        let num = 4.0 * (w + p.delta[mb] + I * p.gamma[mb] + u * n2);
        let den = 4.0 * (w + p.delta[mb] + u * n2 + I * p.gamma[mb]) * (w - p.delta[m] - u * n2 + I * p.gamma[m]) + u * u * n2 * n2;
        num / den
    };
    [side(0, 2), num2 / den2, side(2, 0)]
}

/// Poles of the uniform-branch retarded Green's functions (lower half plane).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GfPoles {
    pub pumped: [C64; 2],
    pub side1: [C64; 2],
    pub side3: [C64; 2],
}

impl GfPoles {
    pub fn all(&self) -> [C64; 6] {
        [self.pumped[0], self.pumped[1], self.side1[0], self.side1[1], self.side3[0], self.side3[1]]
    }

    /// Poles of the advanced functions (complex conjugates).
    pub fn advanced(&self) -> Self {
        let c = |x: [C64; 2]| [x[0].conj(), x[1].conj()];
        Self {
            pumped: c(self.pumped),
            side1: c(self.side1),
            side3: c(self.side3),
        }
    }
}

pub fn gf_poles_uniform(p: &SystemParams, n2: f64) -> GfPoles {
    let u = p.u0;
    let (d2, g2) = (p.delta[PUMP], p.gamma[PUMP]);
    let e = 0.5 * C64::new(4.0 * d2 * d2 + 8.0 * d2 * u * n2 + 3.0 * u * u * n2 * n2, 0.0).sqrt();
    let side = |m: usize, mb: usize| {
        let centre = C64::new(p.delta[m] - p.delta[mb], -(p.gamma[m] + p.gamma[mb])) * 0.5;
        let s = C64::new(p.delta[m] + p.delta[mb], -p.gamma[m] + p.gamma[mb]);
        let r = 0.5 * (s * s + 4.0 * u * n2 * s + 3.0 * u * u * n2 * n2).sqrt();
        [centre + r, centre - r]
    };
    GfPoles {
        pumped: [e - I * g2, -e - I * g2],
        side1: side(0, 2),
        side3: side(2, 0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMethod {
    AnalyticUniform,
    Numeric6x6,
}

impl std::str::FromStr for SpectralMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic_uniform" | "analytic" => Ok(Self::AnalyticUniform),
            "numeric_6x6" | "numeric" => Ok(Self::Numeric6x6),
            _ => Err(Error::InvalidArgument(format!("unknown spectral method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralCurve {
    pub omega: Vec<f64>,
    /// `A_m(w) = -2 Im G^R_m(w)` for the three modes.
    pub a: [Vec<f64>; 3],
}

impl SpectralCurve {
    /// Frequency of the largest value of `A_m`.
    pub fn peak(&self, m: usize) -> (f64, f64) {
        let (i, v) = self.a[m]
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty grid");
        (self.omega[i], *v)
    }

    /// Trapezoid estimate of `int A_m dw / 2pi`.
    pub fn weight(&self, m: usize) -> f64 {
        let mut s = 0.0;
        for k in 1..self.omega.len() {
            s += 0.5 * (self.a[m][k] + self.a[m][k - 1]) * (self.omega[k] - self.omega[k - 1]);
        }
        s / std::f64::consts::TAU
    }
}

/// Retarded Green's functions `G^R_m(w)` from the inverse of the 6x6 block.
pub fn retarded_gf_numeric(p: &SystemParams, bg: &PairBackground, omega: f64) -> Result<[C64; 3]> {
    let gr_inv = inverse_block(p, bg, omega, 1.0);
    let g = linalg::inverse(&gr_inv).ok_or(Error::SingularInversion { omega })?;
    Ok([g[(0, 0)], g[(2, 2)], g[(4, 4)]])
}

/// Spectral functions around a mean-field `background` (not classical fields).
pub fn spectral_function(
    p: &SystemParams,
    background: &ModeAmplitudes,
    grid: &[f64],
    method: SpectralMethod,
) -> Result<SpectralCurve> {
    match method {
        SpectralMethod::Numeric6x6 => spectral_function_background(p, &PairBackground::from_meanfield(background), grid),
        SpectralMethod::AnalyticUniform => {
            if background.alpha[0].norm() > 1e-12 || background.alpha[2].norm() > 1e-12 {
                return Err(Error::InvalidArgument(
                    "analytic spectral function needs empty side modes".into(),
                ));
            }
            let n2 = 2.0 * background.alpha[PUMP].norm_sqr();
            let mut a = [vec![], vec![], vec![]];
            for &w in grid {
                let g = retarded_gf_uniform(p, n2, w);
                for m in 0..3 {
                    if !g[m].re.is_finite() || !g[m].im.is_finite() {
                        return Err(Error::SingularInversion { omega: w });
                    }
                    a[m].push(-2.0 * g[m].im);
                }
            }
            Ok(SpectralCurve { omega: grid.to_vec(), a })
        }
    }
}

/// Numeric spectral functions around an arbitrary pair background, e.g. one
/// built from Gaussian moments.
pub fn spectral_function_background(p: &SystemParams, bg: &PairBackground, grid: &[f64]) -> Result<SpectralCurve> {
    let mut a = [vec![], vec![], vec![]];
    for &w in grid {
        let g = retarded_gf_numeric(p, bg, w)?;
        for m in 0..3 {
            a[m].push(-2.0 * g[m].im);
        }
    }
    Ok(SpectralCurve { omega: grid.to_vec(), a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::bogoliubov_matrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn generic() -> ModeAmplitudes {
        ModeAmplitudes::new(c(0.3, -0.2), c(0.9, 0.5), c(-0.4, 0.1))
    }

    #[test]
    fn empty_cavity_blocks() {
        let p = SystemParams::equally_spaced(2.0, -1.0, 1.0);
        let b = assemble_keldysh_blocks(&p, &ModeAmplitudes::VACUUM, 0.7);
        for m in 0..3 {
            assert_eq!(b.gr_inv[(2 * m, 2 * m)], c(0.7 - p.delta[m], p.gamma[m]));
            assert_eq!(b.gr_inv[(2 * m + 1, 2 * m + 1)], c(-0.7 - p.delta[m], -p.gamma[m]));
            assert_eq!(b.pk[(2 * m, 2 * m)], c(0.0, 2.0 * p.gamma[m]));
        }
        let offdiag = b.gr_inv.iter().filter(|z| **z != c(0.0, 0.0)).count();
        assert_eq!(offdiag, 6);
    }

    #[test]
    fn matches_bogoliubov_generator() {
        // gr_inv = sz (w - i M) with M written on the interleaved fluctuation vector
        let p = SystemParams::equally_spaced(1.5, -1.2, 2.0);
        let mf = generic();
        let m = bogoliubov_matrix(&p, &mf).m;
        let perm = [0, 3, 1, 4, 2, 5];
        let w = -0.8;
        let b = assemble_keldysh_blocks(&p, &to_classical(&mf), w);
        for r in 0..6 {
            for col in 0..6 {
                let sz = if r % 2 == 0 { 1.0 } else { -1.0 };
                let id = if r == col { c(w, 0.0) } else { c(0.0, 0.0) };
                let want = sz * (id - I * m[(perm[r], perm[col])]);
                assert!((b.gr_inv[(r, col)] - want).norm() < 1e-12, "({r},{col})");
            }
        }
    }

    #[test]
    fn retarded_advanced_relations() {
        let p = SystemParams::equally_spaced(1.5, -1.2, 2.0);
        let b = assemble_keldysh_blocks(&p, &generic(), 0.3);
        assert!((b.gr_inv.adjoint() - &b.ga_inv).norm() < 1e-12);
        let mut q = p;
        q.gamma = [-p.gamma[0], -p.gamma[1], -p.gamma[2]];
        assert_eq!(assemble_keldysh_blocks(&q, &generic(), 0.3).gr_inv, b.ga_inv);
    }

    #[test]
    fn blocks_are_linear_in_omega() {
        let p = SystemParams::equally_spaced(1.5, -1.2, 2.0);
        let s = generic();
        let g = |w| assemble_keldysh_blocks(&p, &s, w).gr_inv;
        let extrap = g(1.0) * c(2.0, 0.0) - g(0.0);
        assert!((extrap - g(2.0)).norm() < 1e-12);
    }

    #[test]
    fn uniform_coupling_pattern() {
        let p = SystemParams::equally_spaced(5.0, -1.0, 3.0);
        let b = assemble_keldysh_blocks(&p, &ModeAmplitudes::uniform(c(1.0, -0.5)), 0.2);
        for r in 0..6 {
            for col in 0..6 {
                let pair = [r.min(col), r.max(col)];
                let allowed = r == col || pair == [2, 3] || pair == [0, 5] || pair == [1, 4];
                if !allowed {
                    assert_eq!(b.gr_inv[(r, col)], c(0.0, 0.0), "({r},{col})");
                }
            }
        }
    }

    #[test]
    fn saddle_equations_are_rescaled_meanfield() {
        let p = SystemParams::equally_spaced(1.5, -1.2, 2.0);
        let s = generic();
        let a = classical_field_rhs(&p, &s);
        let b = classical_field_rhs_via_meanfield(&p, &s);
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn bare_mode_lorentzian() {
        let p = SystemParams::equally_spaced(5.0, -1.0, 0.0);
        let g = retarded_gf_uniform(&p, 0.0, 5.0);
        assert!((-2.0 * g[1].im - 2.0).abs() < 1e-14);
        let poles = gf_poles_uniform(&p, 0.0);
        assert!((poles.pumped[0] - c(5.0, -1.0)).norm() < 1e-14);
        assert!((poles.advanced().pumped[1] - c(-5.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn tail_decays_like_inverse_frequency() {
        let p = SystemParams::equally_spaced(5.0, -1.0, 3.0);
        let w = 1e7;
        for g in retarded_gf_uniform(&p, 2.0, w) {
            assert!((g * w - 1.0).norm() < 1e-5);
        }
    }

    #[test]
    fn poles_zero_the_denominators() {
        let p = SystemParams::equally_spaced(5.0, -1.0, 3.0);
        let (u, d2, g2) = (p.u0, p.delta[1], p.gamma[1]);
        for n2 in [0.3, 1.7, 6.0] {
            let poles = gf_poles_uniform(&p, n2);
            for w in poles.pumped {
                let den = 4.0 * (w + d2 + I * g2) * (-w + d2 - I * g2) + 8.0 * u * d2 * n2 + 3.0 * u * u * n2 * n2;
                assert!(den.norm() < 1e-9);
            }
            // advanced denominators at the advanced poles
            for w in poles.advanced().pumped {
                let den = 4.0 * (w + d2 - I * g2) * (-w + d2 + I * g2) + 8.0 * u * d2 * n2 + 3.0 * u * u * n2 * n2;
                assert!(den.norm() < 1e-9);
            }
            for (m, mb, ws) in [(0, 2, poles.side1), (2, 0, poles.side3)] {
                for w in ws {
                    let den = 4.0 * (w + p.delta[mb] + u * n2 + I * p.gamma[mb]) * (w - p.delta[m] - u * n2 + I * p.gamma[m]) + u * u * n2 * n2;
                    assert!(den.norm() < 1e-9);
                }
            }
        }
    }

    fn lone_uniform(d2: f64, om: f64) -> ModeAmplitudes {
        let roots = crate::dynamics::uniform_roots(&SystemParams::equally_spaced(d2, -1.0, om));
        assert_eq!(roots.len(), 1);
        roots[0].state
    }

    #[test]
    fn numeric_inverse_matches_closed_form() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = SystemParams::equally_spaced(5.0, -1.0, 3.0);
        for _ in 0..100 {
            let w = rng.gen_range(-10.0..10.0);
            let n2: f64 = rng.gen_range(0.0..8.0);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let bg = PairBackground::from_classical(&ModeAmplitudes::uniform(C64::from_polar(n2.sqrt(), phase)));
            let num = retarded_gf_numeric(&p, &bg, w).unwrap();
            let ana = retarded_gf_uniform(&p, n2, w);
            for m in 0..3 {
                assert!((num[m] - ana[m]).norm() < 1e-9 * (1.0 + ana[m].norm()), "m={m} w={w} n2={n2}");
            }
        }
    }

    #[test]
    fn poles_are_stability_eigenvalues() {
        for (d2, om) in [(5.0, 0.5), (-5.0, 0.5), (0.0, 1.0), (5.0, 3.0)] {
            let p = SystemParams::equally_spaced(d2, -1.0, om);
            for r in crate::dynamics::uniform_roots(&p) {
                let lam = crate::stability::uniform_eigenvalues(&p, r.n2);
                for w in gf_poles_uniform(&p, 2.0 * r.n2).all() {
                    let best = lam.iter().map(|l| (I * l - w).norm()).fold(f64::INFINITY, f64::min);
                    assert!(best < 1e-9, "pole {w} at d2={d2} n2={}", r.n2);
                }
            }
        }
    }

    #[test]
    fn analytic_and_numeric_agree() {
        let p = SystemParams::equally_spaced(-5.0, -1.0, 0.5);
        let s = lone_uniform(-5.0, 0.5);
        let grid = linear_grid(-12.0, 12.0, 481);
        let a = spectral_function(&p, &s, &grid, SpectralMethod::AnalyticUniform).unwrap();
        let b = spectral_function(&p, &s, &grid, SpectralMethod::Numeric6x6).unwrap();
        for m in 0..3 {
            for k in 0..grid.len() {
                assert!((a.a[m][k] - b.a[m][k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sum_rule() {
        for (d2, om) in [(5.0, 0.5), (-5.0, 0.5)] {
            let p = SystemParams::equally_spaced(d2, -1.0, om);
            let grid = linear_grid(-4000.0, 4000.0, 800_001);
            let a = spectral_function(&p, &lone_uniform(d2, om), &grid, SpectralMethod::AnalyticUniform).unwrap();
            for m in 0..3 {
                assert!((a.weight(m) - 1.0).abs() < 1e-3, "d2={d2} m={m}: {}", a.weight(m));
            }
        }
    }

    #[test]
    fn peak_swap_between_phases() {
        let grid = default_grid();
        let lp = spectral_function(&SystemParams::equally_spaced(5.0, -1.0, 0.5), &lone_uniform(5.0, 0.5), &grid, SpectralMethod::Numeric6x6).unwrap();
        let hp = spectral_function(&SystemParams::equally_spaced(-5.0, -1.0, 0.5), &lone_uniform(-5.0, 0.5), &grid, SpectralMethod::Numeric6x6).unwrap();
        for m in 0..3 {
            assert!(lp.peak(m).0 > 0.0 && lp.peak(m).1 > 0.0);
            assert!(hp.peak(m).0 < 0.0 && hp.peak(m).1 > 0.0);
        }
    }

    #[test]
    fn side_mode_exchange() {
        let mut p = SystemParams::equally_spaced(1.0, -1.0, 1.0);
        p.delta = [0.3, 1.0, 2.1];
        p.gamma = [0.8, 1.0, 1.3];
        let s = ModeAmplitudes::new(c(0.2, 0.1), c(0.6, -0.4), c(-0.1, 0.3));
        let grid = linear_grid(-8.0, 8.0, 161);
        let a = spectral_function(&p, &s, &grid, SpectralMethod::Numeric6x6).unwrap();
        let b = spectral_function(&p.swapped(), &s.swapped(), &grid, SpectralMethod::Numeric6x6).unwrap();
        for k in 0..grid.len() {
            assert!((a.a[0][k] - b.a[2][k]).abs() < 1e-10);
            assert!((a.a[1][k] - b.a[1][k]).abs() < 1e-10);
        }
    }

    #[test]
    fn analytic_rejects_side_populations() {
        let p = SystemParams::equally_spaced(5.0, -1.0, 0.5);
        assert!(spectral_function(&p, &generic(), &[0.0], SpectralMethod::AnalyticUniform).is_err());
    }
}
