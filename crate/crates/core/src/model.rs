//! Physical parameters, mean-field state and the mean-field equations of motion.
//!
//! All rates are measured in units of the common cavity decay rate, so the
//! reference parameter set uses `gamma = [1, 1, 1]`. Mode indices are
//! zero-based in code: index 1 is the driven mode, indices 0 and 2 are the
//! parametrically populated side modes.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Index of the driven mode.
pub const PUMP: usize = 1;

/// Detunings, loss half-rates, Kerr interaction and drive of the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    pub delta: [f64; 3],
    pub gamma: [f64; 3],
    pub u0: f64,
    pub omega2: f64,
}

impl SystemParams {
    /// Equally spaced side modes `delta1,3 = delta2 -/+ 1`, unit losses.
    pub fn equally_spaced(delta2: f64, u0: f64, omega2: f64) -> Self {
        Self {
            delta: [delta2 - 1.0, delta2, delta2 + 1.0],
            gamma: [1.0; 3],
            u0,
            omega2,
        }
    }

    /// Dispersion `delta_D = delta2 - (delta1 + delta3) / 2`.
    pub fn dispersion(&self) -> f64 {
        self.delta[1] - 0.5 * (self.delta[0] + self.delta[2])
    }

    pub fn with_omega2(mut self, omega2: f64) -> Self {
        self.omega2 = omega2;
        self
    }

    pub fn with_delta2(self, delta2: f64) -> Self {
        let shift = delta2 - self.delta[1];
        Self {
            delta: [self.delta[0] + shift, delta2, self.delta[2] + shift],
            ..self
        }
    }

    /// Exchange of the two side modes.
    pub fn swapped(&self) -> Self {
        Self {
            delta: [self.delta[2], self.delta[1], self.delta[0]],
            gamma: [self.gamma[2], self.gamma[1], self.gamma[0]],
            ..*self
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_params(self)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(report.violations.join("; ")))
        }
    }

    /// Parse the flat key-value form (`delta1..3`, `gamma1..3`, `u0`, `omega2`).
    pub fn from_config_str(s: &str) -> Result<Self> {
        let file: ParamsFile = toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))?;
        Ok(file.into())
    }

    pub fn to_config_string(&self) -> String {
        toml::to_string(&ParamsFile::from(*self)).expect("flat params always serialize")
    }
}

/// On-disk representation of [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub u0: f64,
    pub omega2: f64,
}

impl From<ParamsFile> for SystemParams {
    fn from(f: ParamsFile) -> Self {
        Self {
            delta: [f.delta1, f.delta2, f.delta3],
            gamma: [f.gamma1, f.gamma2, f.gamma3],
            u0: f.u0,
            omega2: f.omega2,
        }
    }
}

impl From<SystemParams> for ParamsFile {
    fn from(p: SystemParams) -> Self {
        Self {
            delta1: p.delta[0],
            delta2: p.delta[1],
            delta3: p.delta[2],
            gamma1: p.gamma[0],
            gamma2: p.gamma[1],
            gamma3: p.gamma[2],
            u0: p.u0,
            omega2: p.omega2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    /// `U0 * delta2 < 0` and `|delta2 - delta_D| >= sqrt(3) gamma2`.
    pub multistability_possible: bool,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_params(p: &SystemParams) -> ValidationReport {
    let mut violations = Vec::new();
    let all = p.delta.iter().chain(&p.gamma).chain([&p.u0, &p.omega2]);
    if all.into_iter().any(|x| !x.is_finite()) {
        violations.push("all parameters must be finite".to_string());
    }
    for (m, g) in p.gamma.iter().enumerate() {
        if !(*g > 0.0) {
            violations.push(format!("gamma must be positive (gamma{} = {g})", m + 1));
        }
    }
    if !(p.omega2 >= 0.0) {
        violations.push(format!("omega2 must be non-negative (omega2 = {})", p.omega2));
    }
    let shifted = p.delta[1] - p.dispersion();
    let multistability_possible =
        p.u0 * p.delta[1] < 0.0 && shifted.abs() >= 3f64.sqrt() * p.gamma[1];
    ValidationReport {
        violations,
        multistability_possible,
    }
}

/// The three complex mean fields.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeAmplitudes {
    pub alpha: [C64; 3],
}

impl ModeAmplitudes {
    pub const VACUUM: Self = Self {
        alpha: [C64 { re: 0.0, im: 0.0 }; 3],
    };

    pub fn new(a1: C64, a2: C64, a3: C64) -> Self {
        Self { alpha: [a1, a2, a3] }
    }

    pub fn uniform(a2: C64) -> Self {
        Self::new(C64::new(0.0, 0.0), a2, C64::new(0.0, 0.0))
    }

    pub fn populations(&self) -> [f64; 3] {
        self.alpha.map(|a| a.norm_sqr())
    }

    pub fn derived(&self) -> DerivedQuantities {
        let n = self.populations();
        let [a1, a2, a3] = self.alpha;
        DerivedQuantities {
            n,
            total_n: n[0] + n[1] + n[2],
            phase_combo: 2.0 * a2.arg() - a1.arg() - a3.arg(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Euclidean norm in the six real coordinates.
    pub fn norm(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.alpha[2], self.alpha[1], self.alpha[0])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            alpha: self.alpha.map(|a| a * s),
        }
    }

    pub fn to_real(&self) -> [f64; 6] {
        let a = &self.alpha;
        [a[0].re, a[1].re, a[2].re, a[0].im, a[1].im, a[2].im]
    }

    pub fn from_real(x: &[f64; 6]) -> Self {
        Self::new(
            C64::new(x[0], x[3]),
            C64::new(x[1], x[4]),
            C64::new(x[2], x[5]),
        )
    }
}

impl Add for ModeAmplitudes {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            alpha: std::array::from_fn(|m| self.alpha[m] + rhs.alpha[m]),
        }
    }
}

impl Sub for ModeAmplitudes {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            alpha: std::array::from_fn(|m| self.alpha[m] - rhs.alpha[m]),
        }
    }
}

impl Mul<f64> for ModeAmplitudes {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self {
            alpha: self.alpha.map(|a| a * s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub n: [f64; 3],
    pub total_n: f64,
    /// `2 phi2 - phi1 - phi3`, not wrapped.
    pub phase_combo: f64,
}

/// Time derivative of the mean fields.
pub fn meanfield_rhs(p: &SystemParams, s: &ModeAmplitudes) -> ModeAmplitudes {
    let [a1, a2, a3] = s.alpha;
    let [n1, n2, n3] = s.populations();
    let u = p.u0;
    let lin = |m: usize| C64::new(p.delta[m], -p.gamma[m]);

    let d1 = -I * lin(0) * a1 - I * u * ((n1 + 2.0 * n2 + 2.0 * n3) * a1 + a2 * a2 * a3.conj());
    let d2 = -I * lin(1) * a2
        - I * u * ((n2 + 2.0 * n1 + 2.0 * n3) * a2 + 2.0 * a2.conj() * a1 * a3)
        - I * p.omega2;
    let d3 = -I * lin(2) * a3 - I * u * ((n3 + 2.0 * n2 + 2.0 * n1) * a3 + a2 * a2 * a1.conj());
    ModeAmplitudes::new(d1, d2, d3)
}

/// Mean-field energy functional (drive included) and total photon number.
///
/// Both are constants of motion of [`meanfield_rhs`] when all losses vanish;
/// the photon number additionally requires zero drive.
pub fn conserved_quantities(p: &SystemParams, s: &ModeAmplitudes) -> (f64, f64) {
    let [a1, a2, a3] = s.alpha;
    let n = s.populations();
    let u = p.u0;
    let mut energy = 0.0;
    for m in 0..3 {
        energy += p.delta[m] * n[m] + 0.5 * u * n[m] * n[m];
    }
    energy += 2.0 * u * (n[0] * n[1] + n[0] * n[2] + n[1] * n[2]);
    energy += 2.0 * u * (a2.conj() * a2.conj() * a1 * a3).re;
    energy += 2.0 * p.omega2 * a2.re;
    (energy, n.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn reference_point_flags_multistability() {
        let p = SystemParams::equally_spaced(5.0, -1.0, 3.0);
        let r = validate_params(&p);
        assert!(r.is_ok());
        assert!(r.multistability_possible);
    }

    #[test]
    fn zero_loss_is_a_violation() {
        let mut p = SystemParams::equally_spaced(5.0, -1.0, 3.0);
        p.gamma[1] = 0.0;
        let r = validate_params(&p);
        assert_eq!(r.violations.len(), 1);
        assert!(r.violations[0].contains("gamma must be positive"));
        assert!(p.ensure_valid().is_err());
    }

    #[test]
    fn resonant_drive_has_no_multistability_flag() {
        let p = SystemParams::equally_spaced(0.0, -1.0, 3.0);
        let r = validate_params(&p);
        assert!(r.is_ok());
        assert!(!r.multistability_possible);
    }

    #[test]
    fn negative_drive_rejected() {
        let p = SystemParams::equally_spaced(1.0, -1.0, -0.1);
        assert!(!validate_params(&p).is_ok());
    }

    #[test]
    fn pure_decay_of_pumped_mode() {
        let p = SystemParams {
            delta: [0.0; 3],
            gamma: [1.0; 3],
            u0: 0.0,
            omega2: 0.0,
        };
        let d = meanfield_rhs(&p, &ModeAmplitudes::uniform(c(1.0, 0.0)));
        assert_eq!(d.alpha[1], c(-1.0, 0.0));
        assert_eq!(d.alpha[0], c(0.0, 0.0));
    }

    #[test]
    fn drive_only() {
        let p = SystemParams {
            delta: [0.3, -0.2, 1.1],
            gamma: [1.0; 3],
            u0: 0.0,
            omega2: 2.0,
        };
        let d = meanfield_rhs(&p, &ModeAmplitudes::VACUUM);
        assert_eq!(d.alpha, [c(0.0, 0.0), c(0.0, -2.0), c(0.0, 0.0)]);
    }

    /// Real-arithmetic transcription of the same equations, term by term.
    fn rhs_expanded(p: &SystemParams, s: &ModeAmplitudes) -> [f64; 6] {
        let (x1, y1) = (s.alpha[0].re, s.alpha[0].im);
        let (x2, y2) = (s.alpha[1].re, s.alpha[1].im);
        let (x3, y3) = (s.alpha[2].re, s.alpha[2].im);
        let n1 = x1 * x1 + y1 * y1;
        let n2 = x2 * x2 + y2 * y2;
        let n3 = x3 * x3 + y3 * y3;
        let u = p.u0;
        // a2^2 a3* and a2^2 a1*
        let sq_re = x2 * x2 - y2 * y2;
        let sq_im = 2.0 * x2 * y2;
        let t1_re = sq_re * x3 + sq_im * y3;
        let t1_im = sq_im * x3 - sq_re * y3;
        let t3_re = sq_re * x1 + sq_im * y1;
        let t3_im = sq_im * x1 - sq_re * y1;
        // 2 a2* a1 a3
        let p13_re = x1 * x3 - y1 * y3;
        let p13_im = x1 * y3 + y1 * x3;
        let t2_re = 2.0 * (x2 * p13_re + y2 * p13_im);
        let t2_im = 2.0 * (x2 * p13_im - y2 * p13_re);
        // -i (d - i g) z = (-g x + d y) + i(-d x - g y); -i u w = u w_im - i u w_re
        let lin = |d: f64, g: f64, x: f64, y: f64| (-g * x + d * y, -d * x - g * y);
        let (l1r, l1i) = lin(p.delta[0], p.gamma[0], x1, y1);
        let (l2r, l2i) = lin(p.delta[1], p.gamma[1], x2, y2);
        let (l3r, l3i) = lin(p.delta[2], p.gamma[2], x3, y3);
        let w1 = ((n1 + 2.0 * n2 + 2.0 * n3) * x1 + t1_re, (n1 + 2.0 * n2 + 2.0 * n3) * y1 + t1_im);
        let w2 = ((n2 + 2.0 * n1 + 2.0 * n3) * x2 + t2_re, (n2 + 2.0 * n1 + 2.0 * n3) * y2 + t2_im);
        let w3 = ((n3 + 2.0 * n2 + 2.0 * n1) * x3 + t3_re, (n3 + 2.0 * n2 + 2.0 * n1) * y3 + t3_im);
        [
            l1r + u * w1.1,
            l2r + u * w2.1,
            l3r + u * w3.1,
            l1i - u * w1.0,
            l2i - u * w2.0 - p.omega2,
            l3i - u * w3.0,
        ]
    }

    #[test]
    fn rhs_matches_real_expansion() {
        let p = SystemParams {
            delta: [3.7, 5.0, 6.1],
            gamma: [0.8, 1.0, 1.3],
            u0: -1.2,
            omega2: 2.5,
        };
        let s = ModeAmplitudes::new(c(0.3, -1.1), c(-2.1, 0.7), c(1.4, 0.2));
        let got = meanfield_rhs(&p, &s).to_real();
        let want = rhs_expanded(&p, &s);
        for k in 0..6 {
            assert!((got[k] - want[k]).abs() < 1e-12, "{k}: {} vs {}", got[k], want[k]);
        }
    }

    #[test]
    fn vacuum_energy() {
        let p = SystemParams::equally_spaced(5.0, -1.0, 3.0);
        assert_eq!(conserved_quantities(&p, &ModeAmplitudes::VACUUM), (0.0, 0.0));
    }

    #[test]
    fn single_mode_energy() {
        let p = SystemParams::equally_spaced(2.5, -0.7, 0.0);
        let a2 = c(0.6, -1.3);
        let (e, n) = conserved_quantities(&p, &ModeAmplitudes::uniform(a2));
        let n2 = a2.norm_sqr();
        assert!((e - (2.5 * n2 - 0.35 * n2 * n2)).abs() < 1e-12);
        assert!((n - n2).abs() < 1e-15);
    }

    #[test]
    fn config_round_trip_is_exact() {
        let p = SystemParams {
            delta: [0.1 + 0.2, 5.0, 1.0 / 3.0],
            gamma: [1.0, 0.7, std::f64::consts::PI],
            u0: -1.0e-17,
            omega2: 3.000000000000001,
        };
        let back = SystemParams::from_config_str(&p.to_config_string()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn config_rejects_unknown_and_missing_keys() {
        let p = SystemParams::equally_spaced(5.0, -1.0, 3.0);
        let mut s = p.to_config_string();
        s.push_str("bogus = 1.0\n");
        assert!(SystemParams::from_config_str(&s).is_err());
        let s = p.to_config_string().replace("u0 = -1.0\n", "");
        let err = SystemParams::from_config_str(&s).unwrap_err();
        assert!(err.to_string().contains("u0"), "{err}");
    }
}
