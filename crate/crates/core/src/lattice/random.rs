use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{GroupShape, LatticeFunction, ResourceCaps, Side};
use crate::error::{Error, Result};

/// Test-function families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Distribution {
    /// Independent entries with `E|z|^2 = 1` (real and imaginary parts `N(0, 1/2)`).
    ComplexGaussian,
    /// Independent `+-1` Fourier coefficient entries.
    RademacherCoefficients,
    /// `s` distinct random frequencies with complex Gaussian coefficient blocks.
    SparseFourier { s: usize },
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Deterministic (given `seed`) random position-side function.
pub fn random_function(
    shape: &GroupShape,
    dim: usize,
    distribution: Distribution,
    seed: u64,
    caps: &ResourceCaps,
) -> Result<LatticeFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dd = dim * dim;
    match distribution {
        Distribution::ComplexGaussian => {
            let mut f = LatticeFunction::zeros(shape.clone(), dim, Side::Position, caps)?;
            for v in f.values_mut() {
                *v = complex_gaussian(&mut rng);
            }
            Ok(f)
        }
        Distribution::RademacherCoefficients => {
            let mut big_f = LatticeFunction::zeros(shape.clone(), dim, Side::Fourier, caps)?;
            for v in big_f.values_mut() {
                *v = Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0);
            }
            big_f.idft()
        }
        Distribution::SparseFourier { s } => {
            let order = shape.order();
            if s == 0 || s as u128 > order {
                return Err(Error::argument(format!(
                    "sparse-fourier support {s} must lie in [1, {order}]"
                )));
            }
            let mut big_f = LatticeFunction::zeros(shape.clone(), dim, Side::Fourier, caps)?;
            let picks = sample(&mut rng, order as usize, s);
            for i in picks.iter() {
                for e in 0..dd {
                    big_f.values_mut()[i * dd + e] = complex_gaussian(&mut rng);
                }
            }
            big_f.idft()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_function() {
        let shape = GroupShape::new(vec![3, 4]).unwrap();
        for dist in [
            Distribution::ComplexGaussian,
            Distribution::RademacherCoefficients,
            Distribution::SparseFourier { s: 3 },
        ] {
            let a = random_function(&shape, 2, dist, 11, &ResourceCaps::default()).unwrap();
            let b = random_function(&shape, 2, dist, 11, &ResourceCaps::default()).unwrap();
            assert_eq!(a, b);
            let c = random_function(&shape, 2, dist, 12, &ResourceCaps::default()).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn single_sparse_coefficient() {
        let shape = GroupShape::new(vec![5, 4]).unwrap();
        for seed in 0..20 {
            let f = random_function(
                &shape,
                1,
                Distribution::SparseFourier { s: 1 },
                seed,
                &ResourceCaps::default(),
            )
            .unwrap();
            let big_f = f.dft().unwrap();
            let nonzero = big_f.values().iter().filter(|z| z.norm() > 1e-12).count();
            assert_eq!(nonzero, 1);
        }
    }

    #[test]
    fn gaussian_energy_law_of_large_numbers() {
        // E sum_x |f(x)|^2 = |G| * dim^2 * (per-entry variance 1)
        let shape = GroupShape::uniform(4, 2).unwrap();
        for dim in [1usize, 2] {
            let draws = 1000;
            let total: f64 = (0..draws)
                .map(|seed| {
                    let f = random_function(
                        &shape,
                        dim,
                        Distribution::ComplexGaussian,
                        seed,
                        &ResourceCaps::default(),
                    )
                    .unwrap();
                    f.values().iter().map(|z| z.norm_sqr()).sum::<f64>()
                })
                .sum();
            let mean = total / draws as f64;
            let expected = (dim * dim * 16) as f64;
            assert!((mean - expected).abs() < 0.1 * expected, "dim={dim} mean={mean}");
        }
    }

    #[test]
    fn sparse_support_bounds() {
        let shape = GroupShape::new(vec![2, 2]).unwrap();
        assert!(random_function(
            &shape,
            1,
            Distribution::SparseFourier { s: 0 },
            0,
            &ResourceCaps::default()
        )
        .is_err());
        assert!(random_function(
            &shape,
            1,
            Distribution::SparseFourier { s: 5 },
            0,
            &ResourceCaps::default()
        )
        .is_err());
    }
}
