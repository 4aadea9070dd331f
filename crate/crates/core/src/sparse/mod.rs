//! Sparse trigonometric polynomials `g = sum_w A_w chi_w` on a finite product
//! group, for groups too large to store densely.
//!
//! Even `L_{2r}` norms are exact finite sums over frequency tuples; see
//! [`moments`].

pub mod moments;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{character_unchecked, GroupShape, LatticeFunction, MultiIndex, ResourceCaps, Side, SubsetMask};
use crate::matrix::CMatrix;
use crate::norms::{even_half, lp_norm_pow};
use crate::operators::{DerivativeMode, FamilyKind, MultiplierFamily, MultiplierTarget, Translations};

/// Coefficients whose Frobenius norm does not exceed this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrigPolyRepr", into = "TrigPolyRepr")]
pub struct TrigPoly {
    shape: GroupShape,
    dim: usize,
    terms: BTreeMap<MultiIndex, CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct TrigPolyRepr {
    shape: GroupShape,
    dim: usize,
    terms: Vec<(MultiIndex, CMatrix)>,
}

impl TryFrom<TrigPolyRepr> for TrigPoly {
    type Error = Error;

    fn try_from(r: TrigPolyRepr) -> Result<Self> {
        TrigPoly::from_terms(r.shape, r.dim, r.terms)
    }
}

impl From<TrigPoly> for TrigPolyRepr {
    fn from(p: TrigPoly) -> Self {
        TrigPolyRepr {
            shape: p.shape,
            dim: p.dim,
            terms: p.terms.into_iter().collect(),
        }
    }
}

impl TrigPoly {
    pub fn zero(shape: GroupShape, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::argument("matrix dimension must be at least 1"));
        }
        Ok(TrigPoly {
            shape,
            dim,
            terms: BTreeMap::new(),
        })
    }

    /// Sums the given terms; repeated frequencies accumulate.
    pub fn from_terms<I>(shape: GroupShape, dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, CMatrix)>,
    {
        let mut out = Self::zero(shape, dim)?;
        for (w, a) in terms {
            out.shape.check_compatible(&w)?;
            if a.dim() != dim {
                return Err(Error::shape(format!(
                    "coefficient block has dim {}, expected {dim}",
                    a.dim()
                )));
            }
            if !a.is_finite() {
                return Err(Error::NonFinite("polynomial coefficient"));
            }
            let slot = out.terms.entry(w).or_insert_with(|| CMatrix::zeros(dim));
            *slot = slot.add(&a);
        }
        out.prune();
        Ok(out)
    }

    pub fn from_scalar_terms<I>(shape: GroupShape, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        Self::from_terms(shape, 1, terms.into_iter().map(|(w, c)| (w, CMatrix::scalar(c))))
    }

    pub fn character(shape: GroupShape, w: &MultiIndex) -> Result<Self> {
        Self::from_scalar_terms(shape, [(w.clone(), Complex64::new(1.0, 0.0))])
    }

    /// Fourier coefficients of a dense position-side function.
    pub fn from_dense(f: &LatticeFunction) -> Result<Self> {
        let big_f = f.dft()?;
        let dd = f.dim() * f.dim();
        let shape = f.shape().clone();
        let terms = shape.points().enumerate().filter_map(|(i, w)| {
            let block = &big_f.values()[i * dd..(i + 1) * dd];
            (crate::matrix::frobenius(block) > PRUNE_THRESHOLD)
                .then(|| (w, CMatrix::from_row_major(f.dim(), block.to_vec()).expect("block size")))
        });
        Self::from_terms(shape.clone(), f.dim(), terms.collect::<Vec<_>>())
    }

    pub fn to_dense(&self, caps: &ResourceCaps) -> Result<LatticeFunction> {
        let mut big_f = LatticeFunction::zeros(self.shape.clone(), self.dim, Side::Fourier, caps)?;
        let dd = self.dim * self.dim;
        for (w, a) in &self.terms {
            let i = self.shape.linear_index(w);
            big_f.values_mut()[i * dd..(i + 1) * dd].copy_from_slice(a.as_slice());
        }
        big_f.idft()
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.frobenius() > PRUNE_THRESHOLD);
    }

    pub fn shape(&self) -> &GroupShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing frequency order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &CMatrix)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &MultiIndex) -> Option<&CMatrix> {
        self.terms.get(w)
    }

    /// Mean block (the coefficient at frequency zero).
    pub fn mean(&self) -> CMatrix {
        self.terms
            .get(&MultiIndex::zero(self.shape.rank()))
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.dim))
    }

    pub fn without_mean(&self) -> Self {
        let zero = MultiIndex::zero(self.shape.rank());
        self.map_terms(|w, a| (w != &zero).then(|| a.clone()))
    }

    /// Applies `rule` to every term; `None` drops the term.
    pub fn map_terms<F>(&self, mut rule: F) -> Self
    where
        F: FnMut(&MultiIndex, &CMatrix) -> Option<CMatrix>,
    {
        let mut out = TrigPoly {
            shape: self.shape.clone(),
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter_map(|(w, a)| rule(w, a).map(|b| (w.clone(), b)))
                .collect(),
        };
        out.prune();
        out
    }

    /// Diagonal Fourier multiplier with scalar symbol.
    pub fn multiply_symbol<F>(&self, mut symbol: F) -> Self
    where
        F: FnMut(&MultiIndex) -> Complex64,
    {
        self.map_terms(|w, a| Some(a.scale(symbol(w))))
    }

    /// `g(x + gamma)`.
    pub fn translate(&self, gamma: &MultiIndex) -> Result<Self> {
        self.shape.check_compatible(gamma)?;
        Ok(self.multiply_symbol(|w| character_unchecked(w, gamma, &self.shape)))
    }

    /// `E_{[n]\S} g`: keeps the frequencies supported inside `S`.
    pub fn truncate(&self, s: &SubsetMask) -> Self {
        self.map_terms(|w, a| w.support().is_subset_of(s).then(|| a.clone()))
    }

    pub fn derivative(&self, j: usize, mode: DerivativeMode) -> Result<Self> {
        if j >= self.shape.rank() {
            return Err(Error::argument(format!("coordinate {j} out of range")));
        }
        let m = self.shape.modulus(j);
        match mode {
            DerivativeMode::Spectral => Ok(self.map_terms(|w, a| (w.coords()[j] != 0).then(|| a.clone()))),
            DerivativeMode::HypercubeDifference => {
                if m != 2 {
                    return Err(Error::argument(format!(
                        "hypercube difference needs modulus 2 at coordinate {j}, found {m}"
                    )));
                }
                Ok(self.map_terms(|w, a| (w.coords()[j] != 0).then(|| a.scale(Complex64::new(2.0, 0.0)))))
            }
            DerivativeMode::ClassicalTorus => Ok(self.multiply_symbol(|w| {
                let c = self.shape.centered(j, w.coords()[j]) as f64;
                Complex64::new(0.0, std::f64::consts::TAU * c / m as f64)
            })),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, z: Complex64) -> Self {
        self.map_terms(|_, a| Some(a.scale(z)))
    }

    /// Point evaluation `g(x) = sum_w A_w chi_w(x)`.
    pub fn eval_at(&self, x: &MultiIndex) -> Result<CMatrix> {
        self.shape.check_compatible(x)?;
        let mut acc = CMatrix::zeros(self.dim);
        for (w, a) in &self.terms {
            acc = acc.add(&a.scale(character_unchecked(w, x, &self.shape)));
        }
        Ok(acc)
    }

    /// Largest Frobenius norm of a coefficient block.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().map(CMatrix::frobenius).fold(0.0, f64::max)
    }

    /// `||g||_p^p`: exact moment sum for even `p`, dense evaluation otherwise.
    pub fn norm_pow(&self, p: f64, caps: &ResourceCaps) -> Result<f64> {
        if let Some(r) = even_half(p) {
            return moments::even_norm_pow(self, r as usize, caps);
        }
        lp_norm_pow(&self.to_dense(caps)?, p)
    }
}

impl MultiplierTarget for TrigPoly {
    fn combine(&self, other: &Self, c: Complex64) -> Result<Self> {
        if self.shape != other.shape || self.dim != other.dim {
            return Err(Error::shape("polynomials live on different groups or fibers"));
        }
        let mut terms = self.terms.clone();
        for (w, b) in &other.terms {
            let slot = terms.entry(w.clone()).or_insert_with(|| CMatrix::zeros(self.dim));
            *slot = slot.add(&b.scale(c));
        }
        let mut out = TrigPoly {
            shape: self.shape.clone(),
            dim: self.dim,
            terms,
        };
        out.prune();
        Ok(out)
    }

    fn scaled(&self, z: Complex64) -> Self {
        self.scale(z)
    }

    fn norm_pow(&self, p: f64, caps: &ResourceCaps) -> Result<f64> {
        TrigPoly::norm_pow(self, p, caps)
    }

    /// Sorted singular values of the dense values when the group is small
    /// enough, otherwise the moments `||g||_{2r}^{2r}` for `r = 1, 2, 3`.
    fn distribution_signature(&self, caps: &ResourceCaps) -> Result<Vec<f64>> {
        const DENSE_LIMIT: u128 = 1 << 16;
        if self.shape.order() * (self.dim * self.dim) as u128 <= DENSE_LIMIT {
            return self.to_dense(caps)?.distribution_signature(caps);
        }
        (1..=3).map(|r| moments::even_norm_pow(self, r, caps)).collect()
    }
}

impl MultiplierFamily<TrigPoly> for Translations {
    fn kind(&self) -> FamilyKind {
        FamilyKind::Translation
    }

    fn parameters(&self) -> &GroupShape {
        MultiplierFamily::<LatticeFunction>::parameters(self)
    }

    fn apply(&self, gamma: &MultiIndex, f: &TrigPoly) -> Result<TrigPoly> {
        if f.shape() != MultiplierFamily::<LatticeFunction>::parameters(self) {
            return Err(Error::shape("polynomial lives on a different group than the family"));
        }
        f.translate(gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{random_function, Distribution};
    use crate::operators::{cond_expect, derivative, translate};

    fn caps() -> ResourceCaps {
        ResourceCaps::default()
    }

    fn dense_pair(moduli: Vec<u32>, dim: usize, seed: u64) -> (LatticeFunction, TrigPoly) {
        let shape = GroupShape::new(moduli).unwrap();
        let f = random_function(&shape, dim, Distribution::SparseFourier { s: 5 }, seed, &caps()).unwrap();
        let g = TrigPoly::from_dense(&f).unwrap();
        (f, g)
    }

    #[test]
    fn dense_round_trip() {
        let (f, g) = dense_pair(vec![4, 6], 2, 3);
        assert_eq!(g.len(), 5);
        assert!(g.to_dense(&caps()).unwrap().relative_error(&f) < 1e-12);
        for x in f.shape().points() {
            let v = g.eval_at(&x).unwrap();
            for (a, b) in v.as_slice().iter().zip(f.block_at(&x)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn operators_match_dense() {
        let (f, g) = dense_pair(vec![4, 2, 3], 1, 8);
        let gamma = MultiIndex::from_reduced(vec![3, 1, 2]);
        let a = g.translate(&gamma).unwrap().to_dense(&caps()).unwrap();
        assert!(a.relative_error(&translate(&f, &gamma).unwrap()) < 1e-12);
        let s = SubsetMask::new(3, &[0, 2]).unwrap();
        let b = g.truncate(&s).to_dense(&caps()).unwrap();
        assert!(b.max_abs_diff(&cond_expect(&f, &s).unwrap()) < 1e-12);
        for (j, mode) in [
            (0, DerivativeMode::Spectral),
            (1, DerivativeMode::HypercubeDifference),
            (2, DerivativeMode::ClassicalTorus),
        ] {
            let c = g.derivative(j, mode).unwrap().to_dense(&caps()).unwrap();
            assert!(c.max_abs_diff(&derivative(&f, j, mode).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn norms_match_dense() {
        for dim in [1, 2] {
            let (f, g) = dense_pair(vec![5, 4], dim, 21);
            for p in [2.0, 4.0, 6.0, 3.0] {
                let a = g.norm_pow(p, &caps()).unwrap();
                let b = lp_norm_pow(&f, p).unwrap();
                assert!((a - b).abs() < 1e-10 * b, "p={p} dim={dim}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn mean_projection() {
        let shape = GroupShape::new(vec![3]).unwrap();
        let g = TrigPoly::from_scalar_terms(
            shape,
            [
                (MultiIndex::zero(1), Complex64::new(2.0, 0.0)),
                (MultiIndex::from_reduced(vec![1]), Complex64::new(1.0, 1.0)),
            ],
        )
        .unwrap();
        assert_eq!(g.mean().get(0, 0), Complex64::new(2.0, 0.0));
        assert_eq!(g.without_mean().len(), 1);
    }

    #[test]
    fn serde_round_trip() {
        let (_, g) = dense_pair(vec![3, 3], 2, 1);
        let s = serde_json::to_string(&g).unwrap();
        let back: TrigPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
