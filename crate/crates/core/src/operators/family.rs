use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{translate, EtaMap};
use crate::error::{Error, Result};
use crate::lattice::{character_unchecked, GroupShape, LatticeFunction, MultiIndex, ResourceCaps, SubsetMask};
use crate::norms::lp_norm_pow;

/// Objects a multiplier family acts on.
pub trait MultiplierTarget: Clone + Send + Sync {
    /// `self + c * other`.
    fn combine(&self, other: &Self, c: Complex64) -> Result<Self>;

    fn scaled(&self, z: Complex64) -> Self;

    /// `||self||_p^p`.
    fn norm_pow(&self, p: f64, caps: &ResourceCaps) -> Result<f64>;

    /// Data that determines the distribution of values: the sorted moduli of
    /// the values when they can be listed, otherwise a moment sequence.
    fn distribution_signature(&self, caps: &ResourceCaps) -> Result<Vec<f64>>;

    fn difference(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }
}

impl MultiplierTarget for LatticeFunction {
    fn combine(&self, other: &Self, c: Complex64) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(self.with_values(
            self.values()
                .iter()
                .zip(other.values())
                .map(|(a, b)| a + c * b)
                .collect(),
        ))
    }

    fn scaled(&self, z: Complex64) -> Self {
        self.scale(z)
    }

    fn norm_pow(&self, p: f64, _caps: &ResourceCaps) -> Result<f64> {
        lp_norm_pow(self, p)
    }

    fn distribution_signature(&self, _caps: &ResourceCaps) -> Result<Vec<f64>> {
        // singular values of every block, pooled and sorted
        let d = self.dim();
        let mut out: Vec<f64> = (0..self.len())
            .flat_map(|i| crate::matrix::singular_values(d, self.block(i)))
            .collect();
        out.sort_by(f64::total_cmp);
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Translation,
    Modulation,
    FreeCharacter,
    Custom,
}

/// `{M_gamma}` indexed by a finite parameter group.
pub trait MultiplierFamily<T>: Send + Sync {
    fn kind(&self) -> FamilyKind;

    fn parameters(&self) -> &GroupShape;

    fn apply(&self, gamma: &MultiIndex, f: &T) -> Result<T>;
}

/// `M_gamma f(x) = f(x + gamma)` on a fixed group.
#[derive(Debug, Clone, PartialEq)]
pub struct Translations {
    shape: GroupShape,
}

impl Translations {
    pub fn new(shape: GroupShape) -> Self {
        Translations { shape }
    }
}

impl MultiplierFamily<LatticeFunction> for Translations {
    fn kind(&self) -> FamilyKind {
        FamilyKind::Translation
    }

    fn parameters(&self) -> &GroupShape {
        &self.shape
    }

    fn apply(&self, gamma: &MultiIndex, f: &LatticeFunction) -> Result<LatticeFunction> {
        if f.shape() != &self.shape {
            return Err(Error::shape("function lives on a different group than the family"));
        }
        translate(f, gamma)
    }
}

/// `M_gamma f(x) = chi_gamma(x) f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Modulations {
    shape: GroupShape,
}

impl Modulations {
    pub fn new(shape: GroupShape) -> Self {
        Modulations { shape }
    }
}

impl MultiplierFamily<LatticeFunction> for Modulations {
    fn kind(&self) -> FamilyKind {
        FamilyKind::Modulation
    }

    fn parameters(&self) -> &GroupShape {
        &self.shape
    }

    fn apply(&self, gamma: &MultiIndex, f: &LatticeFunction) -> Result<LatticeFunction> {
        if f.shape() != &self.shape {
            return Err(Error::shape("function lives on a different group than the family"));
        }
        self.shape.check_compatible(gamma)?;
        let dd = f.dim() * f.dim();
        let mut values = f.values().to_vec();
        for (i, x) in self.shape.points().enumerate() {
            let chi = character_unchecked(gamma, &x, &self.shape);
            for v in &mut values[i * dd..(i + 1) * dd] {
                *v *= chi;
            }
        }
        Ok(f.with_values(values))
    }
}

type Action<T> = dyn Fn(&MultiIndex, &T) -> Result<T> + Send + Sync;

/// A family given by an arbitrary closure.
pub struct CustomFamily<T> {
    parameters: GroupShape,
    action: Box<Action<T>>,
}

impl<T> CustomFamily<T> {
    pub fn new<F>(parameters: GroupShape, action: F) -> Self
    where
        F: Fn(&MultiIndex, &T) -> Result<T> + Send + Sync + 'static,
    {
        CustomFamily {
            parameters,
            action: Box::new(action),
        }
    }
}

impl<T> MultiplierFamily<T> for CustomFamily<T> {
    fn kind(&self) -> FamilyKind {
        FamilyKind::Custom
    }

    fn parameters(&self) -> &GroupShape {
        &self.parameters
    }

    fn apply(&self, gamma: &MultiIndex, f: &T) -> Result<T> {
        (self.action)(gamma, f)
    }
}

/// Tolerances and sample sizes for [`validate_multiplier_family`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub trials: usize,
    pub seed: u64,
    pub product_tol: f64,
    /// Largest accepted `||M_y^k f||_p / ||f||_p`.
    pub power_bound: f64,
    pub symmetry_tol: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            trials: 16,
            seed: 0,
            product_tol: 1e-10,
            power_bound: 1.0 + 1e-10,
            symmetry_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Max relative `L_2` distance between `M_y f` and `M_{y_S} M_{y_{S^c}} f`.
    pub product_deviation: f64,
    /// Max of `||M_y^k f||_p / ||f||_p` over `|k| <= 4m`.
    pub max_power_ratio: f64,
    /// Max relative distance between the signatures of `M_y^k f` and `M_y^{-k} f`.
    pub symmetry_deviation: f64,
    pub product_ok: bool,
    pub bounded_ok: bool,
    pub symmetry_ok: bool,
    pub trials: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.product_ok && self.bounded_ok && self.symmetry_ok
    }
}

fn signature_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let scale = a.iter().chain(b).fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// Empirical check of product structure, uniform boundedness of powers and
/// symmetry for the family `y -> M_{eta(y)}` on the given inputs.
///
/// `M_y^k` is `k`-fold application of `M_{eta(y)}` (of `M_{-eta(y)}` for `k < 0`).
pub fn validate_multiplier_family<T, F>(
    family: &F,
    eta: &EtaMap,
    m: u32,
    p: f64,
    inputs: &[T],
    config: &ValidationConfig,
    caps: &ResourceCaps,
) -> Result<ValidationReport>
where
    T: MultiplierTarget,
    F: MultiplierFamily<T> + ?Sized,
{
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::argument(format!(
            "validation exponent must be finite and >= 2, got {p}"
        )));
    }
    if m == 0 {
        return Err(Error::argument("m must be at least 1"));
    }
    if family.parameters() != eta.target() {
        return Err(Error::shape("eta target differs from the multiplier parameter group"));
    }
    if inputs.is_empty() {
        return Err(Error::argument("validation needs at least one input"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = eta.rank();
    let source = eta.source().clone();
    let mut product_dev = 0.0f64;
    let mut max_ratio = 0.0f64;
    let mut sym_dev = 0.0f64;
    for trial in 0..config.trials {
        let f = &inputs[trial % inputs.len()];
        let y = MultiIndex::from_reduced((0..n).map(|j| rng.random_range(0..source.modulus(j))).collect());
        let s = SubsetMask::from_bits(n, rng.random());

        let f2 = f.norm_pow(2.0, caps)?;
        let whole = family.apply(&eta.scaled_image(&y, 1, None), f)?;
        let inner = family.apply(&eta.scaled_image(&y, 1, Some(&s.complement())), f)?;
        let split = family.apply(&eta.scaled_image(&y, 1, Some(&s)), &inner)?;
        let diff = whole.difference(&split)?.norm_pow(2.0, caps)?;
        if f2 > 0.0 {
            product_dev = product_dev.max((diff / f2).sqrt());
        } else if diff > 0.0 {
            product_dev = f64::INFINITY;
        }

        let fp = f.norm_pow(p, caps)?;
        let forward = eta.scaled_image(&y, 1, None);
        let backward = eta.scaled_image(&y, -1, None);
        let mut up = f.clone();
        let mut down = f.clone();
        for _ in 1..=4 * m {
            up = family.apply(&forward, &up)?;
            down = family.apply(&backward, &down)?;
            for g in [&up, &down] {
                let gp = g.norm_pow(p, caps)?;
                if fp > 0.0 {
                    max_ratio = max_ratio.max((gp / fp).powf(1.0 / p));
                } else if gp > 0.0 {
                    max_ratio = f64::INFINITY;
                }
            }
            let a = up.distribution_signature(caps)?;
            let b = down.distribution_signature(caps)?;
            sym_dev = sym_dev.max(signature_distance(&a, &b));
        }
    }
    Ok(ValidationReport {
        product_deviation: product_dev,
        max_power_ratio: max_ratio,
        symmetry_deviation: sym_dev,
        product_ok: product_dev <= config.product_tol,
        bounded_ok: max_ratio <= config.power_bound,
        symmetry_ok: sym_dev <= config.symmetry_tol,
        trials: config.trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{random_function, Distribution};

    fn inputs(shape: &GroupShape, count: u64) -> Vec<LatticeFunction> {
        (0..count)
            .map(|s| random_function(shape, 1, Distribution::ComplexGaussian, s, &ResourceCaps::default()).unwrap())
            .collect()
    }

    #[test]
    fn translations_pass() {
        let shape = GroupShape::uniform(2, 8).unwrap();
        let eta = EtaMap::beta(2, 1, 8).unwrap();
        let fam = Translations::new(shape.clone());
        let rep = validate_multiplier_family(
            &fam,
            &eta,
            1,
            4.0,
            &inputs(&shape, 3),
            &ValidationConfig::default(),
            &ResourceCaps::default(),
        )
        .unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.product_deviation <= 1e-10 && rep.symmetry_deviation <= 1e-10);
    }

    #[test]
    fn modulations_pass() {
        let shape = GroupShape::uniform(2, 8).unwrap();
        let eta = EtaMap::beta(2, 2, 8).unwrap();
        let rep = validate_multiplier_family(
            &Modulations::new(shape.clone()),
            &eta,
            1,
            3.0,
            &inputs(&shape, 2),
            &ValidationConfig::default(),
            &ResourceCaps::default(),
        )
        .unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn amplified_translations_are_unbounded() {
        let shape = GroupShape::uniform(2, 8).unwrap();
        let eta = EtaMap::beta(2, 1, 8).unwrap();
        let sh = shape.clone();
        let fam = CustomFamily::new(shape.clone(), move |g: &MultiIndex, f: &LatticeFunction| {
            let c = 1.0 + sh.centered(0, g.coords()[0]).unsigned_abs() as f64;
            Ok(translate(f, g)?.scale(Complex64::new(c, 0.0)))
        });
        let rep = validate_multiplier_family(
            &fam,
            &eta,
            1,
            2.0,
            &inputs(&shape, 2),
            &ValidationConfig::default(),
            &ResourceCaps::default(),
        )
        .unwrap();
        assert!(!rep.bounded_ok);
        assert!(!rep.passed());
        assert!(rep.max_power_ratio > 2.0);
    }

    #[test]
    fn group_law() {
        let shape = GroupShape::new(vec![8, 6]).unwrap();
        let f = &inputs(&shape, 1)[0];
        let fam = Translations::new(shape.clone());
        let modu = Modulations::new(shape.clone());
        let g = MultiIndex::from_reduced(vec![3, 5]);
        let h = MultiIndex::from_reduced(vec![7, 2]);
        let gh = shape.add(&g, &h);
        for fam in [&fam as &dyn MultiplierFamily<LatticeFunction>, &modu] {
            let a = fam.apply(&g, &fam.apply(&h, f).unwrap()).unwrap();
            let b = fam.apply(&gh, f).unwrap();
            assert!(a.relative_error(&b) < 1e-12);
        }
    }
}
