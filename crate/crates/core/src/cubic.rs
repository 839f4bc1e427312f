//! Real roots of cubic polynomials by the trigonometric / hyperbolic closed form.

use std::f64::consts::TAU;

/// Relative tolerance below which the discriminant counts as zero.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CubicRoots {
    /// Real roots in ascending order, repeated according to multiplicity.
    pub roots: Vec<f64>,
    /// Discriminant of the depressed cubic `t^3 + p t + q`, i.e. `-(4p^3 + 27q^2)`.
    pub discriminant: f64,
}

/// Real roots of `a x^3 + b x^2 + c x + d` with `a != 0`.
///
/// A discriminant that vanishes within [`DISCRIMINANT_TOL`] (relative) is
/// treated as a repeated root, so the count is 3 there.
pub fn solve_cubic(a: f64, b: f64, c: f64, d: f64) -> CubicRoots {
    debug_assert!(a != 0.0);
    let (b, c, d) = (b / a, c / a, d / a);
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;

    let p3 = 4.0 * p * p * p;
    let q2 = 27.0 * q * q;
    let discriminant = -(p3 + q2);
    let scale = p3.abs() + q2;

    let mut ts: Vec<f64> = if scale == 0.0 {
        vec![0.0; 3]
    } else if discriminant.abs() <= DISCRIMINANT_TOL * scale {
        // double root at -3q/(2p) (times two) and simple root 3q/p
        let simple = 3.0 * q / p;
        let double = -1.5 * q / p;
        vec![simple, double, double]
    } else if discriminant > 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3).map(|k| m * (theta - TAU * k as f64 / 3.0).cos()).collect()
    } else if p < 0.0 {
        let arg = (-1.5 * q.abs() / p) * (-3.0 / p).sqrt();
        vec![-2.0 * q.signum() * (-p / 3.0).sqrt() * (arg.acosh() / 3.0).cosh()]
    } else if p > 0.0 {
        let arg = (1.5 * q / p) * (3.0 / p).sqrt();
        vec![-2.0 * (p / 3.0).sqrt() * (arg.asinh() / 3.0).sinh()]
    } else {
        vec![-q.cbrt()]
    };

    let poly = |x: f64| ((x + b) * x + c) * x + d;
    let deriv = |x: f64| (3.0 * x + 2.0 * b) * x + c;
    for t in ts.iter_mut() {
        let mut x = *t - shift;
        let dp = deriv(x);
        if dp.abs() > 1e-8 * (1.0 + x.abs()).powi(2) {
            let step = poly(x) / dp;
            if step.is_finite() {
                x -= step;
            }
        }
        *t = x;
    }
    ts.sort_by(f64::total_cmp);
    CubicRoots {
        roots: ts,
        discriminant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(r: f64, a: f64, b: f64, c: f64, d: f64) -> f64 {
        ((a * r + b) * r + c) * r + d
    }

    #[test]
    fn three_distinct() {
        // (x-1)(x-2)(x+3) = x^3 - 7x + 6
        let r = solve_cubic(1.0, 0.0, -7.0, 6.0);
        assert_eq!(r.roots.len(), 3);
        for (got, want) in r.roots.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-13, "{got}");
        }
    }

    #[test]
    fn single_root_both_signs_of_p() {
        for (a, b, c, d) in [(1.0, 0.0, 1.0, 1.0), (1.0, 0.0, -1.0, 5.0), (-2.0, 1.0, 0.3, 4.0), (1.0, 0.0, 0.0, 8.0)] {
            let r = solve_cubic(a, b, c, d);
            assert_eq!(r.roots.len(), 1);
            assert!(residual(r.roots[0], a, b, c, d).abs() < 1e-12);
        }
    }

    #[test]
    fn repeated_roots() {
        // (x-1)^2 (x+2) = x^3 - 3x + 2
        let r = solve_cubic(1.0, 0.0, -3.0, 2.0);
        assert_eq!(r.roots.len(), 3);
        assert!((r.roots[0] + 2.0).abs() < 1e-12);
        assert!((r.roots[1] - 1.0).abs() < 1e-12 && (r.roots[2] - 1.0).abs() < 1e-12);
        assert_eq!(solve_cubic(1.0, 0.0, 0.0, 0.0).roots, vec![0.0; 3]);
    }

    #[test]
    fn general_coefficients() {
        // 2 (x - 0.5)(x - 4)(x + 1.5)
        let (a, b, c, d) = (2.0, -6.0, -9.5, 6.0);
        let r = solve_cubic(a, b, c, d);
        for (got, want) in r.roots.iter().zip([-1.5, 0.5, 4.0]) {
            assert!((got - want).abs() < 1e-12, "{got}");
        }
    }
}
