//! Finite products of cyclic groups `Z_{m_1} x ... x Z_{m_n}`, their points,
//! coordinate subsets and dense (scalar or matrix valued) functions on them.
//!
//! Position side carries the normalized counting (probability) measure and
//! the frequency side carries counting measure, so that
//! `F(w) = |G|^{-1} sum_x f(x) conj(chi_w(x))` and `f = sum_w F(w) chi_w`.

mod function;
mod random;

pub use function::{LatticeFunction, Side};
pub(crate) use random::complex_gaussian;
pub use random::{random_function, Distribution};

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allocation limits checked before any dense or sparse buffer is built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourceCaps {
    /// Complex scalars in one dense lattice function (`order * d^2`).
    #[serde(deserialize_with = "wide_cap")]
    pub max_scalars: u128,
    /// Words in the support of a free group algebra element.
    pub max_words: usize,
    /// Index tuples visited by an exact even moment expansion.
    #[serde(deserialize_with = "wide_cap")]
    pub max_tuples: u128,
}

// Formats without 128-bit integers (TOML) still hand caps over as u64.
fn wide_cap<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<u128, D::Error> {
    u64::deserialize(d).map(u128::from)
}

impl Default for ResourceCaps {
    fn default() -> Self {
        ResourceCaps {
            max_scalars: 100_000_000,
            max_words: 1_000_000,
            max_tuples: 50_000_000,
        }
    }
}

impl ResourceCaps {
    pub fn unlimited() -> Self {
        ResourceCaps {
            max_scalars: u128::MAX,
            max_words: usize::MAX,
            max_tuples: u128::MAX,
        }
    }

    pub fn check_scalars(&self, requested: u128) -> Result<()> {
        if requested > self.max_scalars {
            return Err(Error::Resource {
                what: "dense lattice storage",
                requested,
                cap: self.max_scalars,
            });
        }
        Ok(())
    }
}

/// Descriptor of `Z_{m_1} x ... x Z_{m_n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct GroupShape {
    moduli: Vec<u32>,
    order: u128,
}

impl TryFrom<Vec<u32>> for GroupShape {
    type Error = Error;
    fn try_from(moduli: Vec<u32>) -> Result<Self> {
        GroupShape::new(moduli)
    }
}

impl From<GroupShape> for Vec<u32> {
    fn from(shape: GroupShape) -> Self {
        shape.moduli
    }
}

impl GroupShape {
    pub fn new(moduli: Vec<u32>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::argument("a group shape needs at least one factor"));
        }
        if let Some(j) = moduli.iter().position(|&m| m == 0) {
            return Err(Error::argument(format!("modulus {j} is zero")));
        }
        let order = moduli
            .iter()
            .try_fold(1u128, |acc, &m| acc.checked_mul(m as u128))
            .ok_or_else(|| Error::argument("group order overflows"))?;
        Ok(GroupShape { moduli, order })
    }

    /// `Z_m^n`.
    pub fn uniform(n: usize, m: u32) -> Result<Self> {
        GroupShape::new(vec![m; n])
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn moduli(&self) -> &[u32] {
        &self.moduli
    }

    pub fn modulus(&self, j: usize) -> u32 {
        self.moduli[j]
    }

    pub fn order(&self) -> u128 {
        self.order
    }

    /// Common modulus when every factor has the same order.
    pub fn uniform_modulus(&self) -> Option<u32> {
        let m = self.moduli[0];
        self.moduli.iter().all(|&x| x == m).then_some(m)
    }

    /// Dense buffers are indexed row-major (last coordinate fastest).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.rank()];
        for j in (0..self.rank().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * self.moduli[j + 1] as usize;
        }
        strides
    }

    pub fn linear_index(&self, x: &MultiIndex) -> usize {
        let mut idx = 0usize;
        for (j, &c) in x.coords.iter().enumerate() {
            idx = idx * self.moduli[j] as usize + c as usize;
        }
        idx
    }

    pub fn point(&self, mut idx: usize) -> MultiIndex {
        let mut coords = vec![0u32; self.rank()];
        for j in (0..self.rank()).rev() {
            let m = self.moduli[j] as usize;
            coords[j] = (idx % m) as u32;
            idx /= m;
        }
        MultiIndex { coords }
    }

    /// Iterates all points in linear-index order.
    pub fn points(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.order as usize).map(move |i| self.point(i))
    }

    pub fn check_compatible(&self, x: &MultiIndex) -> Result<()> {
        if x.coords.len() != self.rank() {
            return Err(Error::shape(format!(
                "point has {} coordinates, group has rank {}",
                x.coords.len(),
                self.rank()
            )));
        }
        for (j, (&c, &m)) in x.coords.iter().zip(&self.moduli).enumerate() {
            if c >= m {
                return Err(Error::shape(format!("coordinate {j} = {c} is not reduced modulo {m}")));
            }
        }
        Ok(())
    }

    /// Reduces an integer vector coordinatewise.
    pub fn reduce(&self, coords: &[i64]) -> Result<MultiIndex> {
        if coords.len() != self.rank() {
            return Err(Error::shape(format!(
                "vector has {} coordinates, group has rank {}",
                coords.len(),
                self.rank()
            )));
        }
        Ok(MultiIndex {
            coords: coords
                .iter()
                .zip(&self.moduli)
                .map(|(&c, &m)| c.rem_euclid(m as i64) as u32)
                .collect(),
        })
    }

    pub fn add(&self, x: &MultiIndex, y: &MultiIndex) -> MultiIndex {
        MultiIndex {
            coords: x
                .coords
                .iter()
                .zip(&y.coords)
                .zip(&self.moduli)
                .map(|((&a, &b), &m)| ((a as u64 + b as u64) % m as u64) as u32)
                .collect(),
        }
    }

    pub fn neg(&self, x: &MultiIndex) -> MultiIndex {
        MultiIndex {
            coords: x
                .coords
                .iter()
                .zip(&self.moduli)
                .map(|(&a, &m)| if a == 0 { 0 } else { m - a })
                .collect(),
        }
    }

    pub fn scale(&self, x: &MultiIndex, k: i64) -> MultiIndex {
        MultiIndex {
            coords: x
                .coords
                .iter()
                .zip(&self.moduli)
                .map(|(&a, &m)| ((a as i128 * k as i128).rem_euclid(m as i128)) as u32)
                .collect(),
        }
    }

    /// Representative of coordinate `j` in `(-m/2, m/2]`.
    pub fn centered(&self, j: usize, c: u32) -> i64 {
        let m = self.moduli[j] as i64;
        let c = c as i64;
        if 2 * c > m {
            c - m
        } else {
            c
        }
    }

    /// Checks `order * dim^2` against the scalar cap.
    pub fn check_dense(&self, dim: usize, caps: &ResourceCaps) -> Result<()> {
        let requested = self.order.checked_mul((dim * dim) as u128).unwrap_or(u128::MAX);
        caps.check_scalars(requested)
    }
}

impl fmt::Display for GroupShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.moduli.iter().map(|m| format!("Z_{m}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// A point (or frequency) of a [`GroupShape`], coordinates reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex {
    coords: Vec<u32>,
}

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex { coords: vec![0; n] }
    }

    /// Unit vector `e_j`.
    pub fn unit(n: usize, j: usize) -> Self {
        let mut coords = vec![0; n];
        coords[j] = 1;
        MultiIndex { coords }
    }

    /// Caller guarantees the coordinates are already reduced.
    pub fn from_reduced(coords: Vec<u32>) -> Self {
        MultiIndex { coords }
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Coordinates where the index is nonzero.
    pub fn support(&self) -> SubsetMask {
        let mut bits = 0u64;
        for (j, &c) in self.coords.iter().enumerate() {
            if c != 0 {
                bits |= 1 << j;
            }
        }
        SubsetMask {
            bits,
            n: self.coords.len(),
        }
    }

    /// `x_S`: zero the coordinates outside `s`.
    pub fn truncate(&self, s: &SubsetMask) -> MultiIndex {
        MultiIndex {
            coords: self
                .coords
                .iter()
                .enumerate()
                .map(|(j, &c)| if s.contains(j) { c } else { 0 })
                .collect(),
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

/// A subset `S` of the coordinate set `{0, .., n-1}` (at most 64 coordinates).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubsetMask {
    bits: u64,
    n: usize,
}

impl SubsetMask {
    pub const MAX_RANK: usize = 64;

    pub fn new(n: usize, members: &[usize]) -> Result<Self> {
        if n > Self::MAX_RANK {
            return Err(Error::argument(format!("subset masks support n <= 64, got {n}")));
        }
        let mut bits = 0u64;
        for &j in members {
            if j >= n {
                return Err(Error::argument(format!("coordinate {j} outside [0, {n})")));
            }
            bits |= 1 << j;
        }
        Ok(SubsetMask { bits, n })
    }

    pub fn from_bits(n: usize, bits: u64) -> Self {
        debug_assert!(n <= Self::MAX_RANK);
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        SubsetMask { bits: bits & mask, n }
    }

    pub fn empty(n: usize) -> Self {
        SubsetMask { bits: 0, n }
    }

    pub fn full(n: usize) -> Self {
        Self::from_bits(n, u64::MAX)
    }

    pub fn singleton(n: usize, j: usize) -> Self {
        Self::from_bits(n, 1 << j)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    /// `k = |S|`.
    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, j: usize) -> bool {
        j < 64 && self.bits & (1 << j) != 0
    }

    pub fn complement(&self) -> SubsetMask {
        Self::from_bits(self.n, !self.bits)
    }

    pub fn is_subset_of(&self, other: &SubsetMask) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.contains(j))
    }
}

/// `exp(2 pi i t / m)` for every residue `t` of `m`.
pub(crate) fn root_table(m: u32) -> Vec<Complex64> {
    (0..m).map(|t| unit_phase(t as u64, m as u64)).collect()
}

/// `exp(2 pi i num / den)` with the fraction reduced before the trigonometric call.
pub(crate) fn unit_phase(num: u64, den: u64) -> Complex64 {
    let r = num % den;
    Complex64::cis(TAU * r as f64 / den as f64)
}

/// `chi_w(x) = exp(2 pi i sum_j w_j x_j / m_j)`.
pub fn character_eval(w: &MultiIndex, x: &MultiIndex, shape: &GroupShape) -> Result<Complex64> {
    shape.check_compatible(w)?;
    shape.check_compatible(x)?;
    Ok(character_unchecked(w, x, shape))
}

pub(crate) fn character_unchecked(w: &MultiIndex, x: &MultiIndex, shape: &GroupShape) -> Complex64 {
    let mut phase = 0.0f64;
    for ((&a, &b), &m) in w.coords.iter().zip(&x.coords).zip(&shape.moduli) {
        let r = (a as u64 * b as u64) % m as u64;
        phase += r as f64 / m as f64;
    }
    Complex64::cis(TAU * phase.fract())
}
