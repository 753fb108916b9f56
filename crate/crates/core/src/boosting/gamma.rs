//! Method-of-moments Gamma fits of weight trajectories, and seeded sampling
//! of replacement weights from those fits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::weak::WeightVector;

/// Below this mean or variance a trajectory is treated as constant.
pub const DEGENERATE_EPS: f64 = 1e-18;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaParams {
    /// Shape `alpha` and scale `theta`; mean `alpha * theta`, variance `alpha * theta^2`.
    Fitted { alpha: f64, theta: f64 },
    /// Zero-variance (or zero-mean) trajectory; always yields `value`.
    Degenerate { value: f64 },
}

impl GammaParams {
    pub fn mean(&self) -> f64 {
        match *self {
            GammaParams::Fitted { alpha, theta } => alpha * theta,
            GammaParams::Degenerate { value } => value,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            GammaParams::Fitted { alpha, theta } => alpha * theta * theta,
            GammaParams::Degenerate { .. } => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            GammaParams::Fitted { alpha, theta } => {
                if !(alpha.is_finite() && alpha > 0.0 && theta.is_finite() && theta > 0.0) {
                    return Err(Error::param(format!("invalid Gamma parameters alpha={alpha} theta={theta}")));
                }
            }
            GammaParams::Degenerate { value } => {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(Error::param(format!("invalid degenerate weight {value}")));
                }
            }
        }
        Ok(())
    }
}

/// Fits one sample's weight history by matching mean and population variance:
/// `theta = var / mean`, `alpha = mean^2 / var`.
pub fn fit_gamma(trajectory: &[f64]) -> Result<GammaParams> {
    if trajectory.len() < 2 {
        return Err(Error::param(format!(
            "Gamma fit needs at least 2 weights, got {}",
            trajectory.len()
        )));
    }
    if let Some(w) = trajectory.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::Data(format!("invalid weight {w} in trajectory")));
    }
    let n = trajectory.len() as f64;
    let mean = trajectory.iter().sum::<f64>() / n;
    let var = trajectory.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / n;
    if var < DEGENERATE_EPS || mean < DEGENERATE_EPS {
        return Ok(GammaParams::Degenerate { value: mean });
    }
    let theta = var / mean;
    Ok(GammaParams::Fitted {
        alpha: mean / theta,
        theta,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the random stream owned by `(seed, round, sample)`.
pub fn substream_seed(seed: u64, round: usize, sample: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ round as u64) ^ sample as u64)
}

/// One independent draw per sample, renormalized to sum 1. Each draw comes
/// from its own `(seed, round, sample)` stream, so the result does not
/// depend on how the work is scheduled.
pub fn sample_weights(params: &[GammaParams], seed: u64, round: usize) -> Result<WeightVector> {
    for p in params {
        p.validate()?;
    }
    let raw: Vec<f64> = params
        .par_iter()
        .enumerate()
        .map(|(i, p)| match *p {
            GammaParams::Degenerate { value } => value,
            GammaParams::Fitted { alpha, theta } => {
                let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, round, i));
                // validated above, so construction cannot fail
                Gamma::new(alpha, theta).expect("validated Gamma parameters").sample(&mut rng)
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::DegenerateWeights { round });
    }
    WeightVector::normalized(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_case() {
        // mean 2, population variance 4
        let fit = fit_gamma(&[0.0, 4.0]).unwrap();
        match fit {
            GammaParams::Fitted { alpha, theta } => {
                assert!((theta - 2.0).abs() < 1e-15);
                assert!((alpha - 1.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_trajectory_is_degenerate() {
        assert_eq!(fit_gamma(&[0.01; 7]).unwrap(), GammaParams::Degenerate { value: 0.01 });
        assert_eq!(fit_gamma(&[0.0, 0.0]).unwrap(), GammaParams::Degenerate { value: 0.0 });
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(fit_gamma(&[0.5]), Err(Error::Parameter(_))));
        assert!(matches!(fit_gamma(&[0.5, -0.1]), Err(Error::Data(_))));
    }

    #[test]
    fn moments_reproduced() {
        let traj = [0.011, 0.004, 0.02, 0.007, 0.013];
        let fit = fit_gamma(&traj).unwrap();
        let mean = traj.iter().sum::<f64>() / 5.0;
        let var = traj.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / 5.0;
        assert!((fit.mean() - mean).abs() < 1e-9);
        assert!((fit.variance() - var).abs() < 1e-9);
    }

    #[test]
    fn equal_degenerates_sample_uniform() {
        let params = vec![GammaParams::Degenerate { value: 0.2 }; 5];
        let w = sample_weights(&params, 1, 3).unwrap();
        assert!(w.as_slice().iter().all(|&x| (x - 0.2).abs() < 1e-15));
    }

    #[test]
    fn zero_degenerates_fail() {
        let params = vec![GammaParams::Degenerate { value: 0.0 }; 3];
        assert!(matches!(
            sample_weights(&params, 1, 9),
            Err(Error::DegenerateWeights { round: 9 })
        ));
    }

    #[test]
    fn sampling_is_normalized_and_seeded() {
        let params: Vec<_> = (1..50)
            .map(|i| GammaParams::Fitted { alpha: 0.3 + i as f64 * 0.1, theta: 0.01 })
            .collect();
        let a = sample_weights(&params, 4, 10).unwrap();
        assert!((a.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(a, sample_weights(&params, 4, 10).unwrap());
        assert_ne!(a, sample_weights(&params, 4, 11).unwrap());
        assert_ne!(a, sample_weights(&params, 5, 10).unwrap());
    }

    #[test]
    fn substreams_differ() {
        assert_ne!(substream_seed(1, 2, 3), substream_seed(1, 3, 2));
        assert_ne!(substream_seed(0, 0, 1), substream_seed(0, 1, 0));
    }
}
