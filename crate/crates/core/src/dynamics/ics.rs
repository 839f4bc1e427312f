use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ModeAmplitudes, C64};

pub const DEFAULT_IC_RADIUS: f64 = 5.0;
pub const DEFAULT_IC_COUNT: usize = 100;

/// Seeded initial conditions, each amplitude uniform in the disc `|alpha| <= radius`.
pub fn random_initial_conditions(count: usize, radius: f64, seed: u64) -> Result<Vec<ModeAmplitudes>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disc = move || {
        let r = radius * rng.gen::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.gen::<f64>();
        C64::from_polar(r, theta)
    };
    Ok((0..count)
        .map(|_| ModeAmplitudes::new(disc(), disc(), disc()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = random_initial_conditions(10, 2.0, 42).unwrap();
        let b = random_initial_conditions(10, 2.0, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_initial_conditions(10, 2.0, 43).unwrap());
    }

    #[test]
    fn bounded_support() {
        let ics = random_initial_conditions(100, 5.0, 1).unwrap();
        assert_eq!(ics.len(), 100);
        assert!(ics.iter().all(|s| s.max_abs() <= 5.0));
    }

    #[test]
    fn zero_mean() {
        let n = 10_000;
        let radius = 5.0;
        let ics = random_initial_conditions(n, radius, 9).unwrap();
        // uniform disc: Var(Re) = Var(Im) = R^2 / 4
        let sigma = (radius * radius / 4.0 / n as f64).sqrt();
        for m in 0..3 {
            let mean: C64 = ics.iter().map(|s| s.alpha[m]).sum::<C64>() / n as f64;
            assert!(mean.re.abs() < 3.0 * sigma && mean.im.abs() < 3.0 * sigma, "{m}: {mean}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(random_initial_conditions(0, 1.0, 0).is_err());
        assert!(random_initial_conditions(3, 0.0, 0).is_err());
    }
}
