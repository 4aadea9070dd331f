//! Group algebras of the free products `Z_N^{*n}` and of the free group `F_n`.
//!
//! Elements are finite sums `a = sum_w a(w) lambda(w)` over reduced words.
//! The trace is the coefficient at the empty word, and even `L_p` norms are
//! computed exactly by convolution.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{complex_gaussian, GroupShape, MultiIndex, ResourceCaps};
use crate::norms::even_half;
use crate::operators::{FamilyKind, MultiplierFamily, MultiplierTarget};

/// Coefficients with modulus at or below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Order of every generator: `Cyclic(N)` for `Z_N^{*n}`, `Infinite` for `F_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Modulus {
    Cyclic(u32),
    Infinite,
}

impl Modulus {
    /// `Cyclic(8m)`.
    pub fn for_m(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::argument("m must be at least 1"));
        }
        Ok(Modulus::Cyclic(8 * m))
    }

    /// Canonical exponent, or `None` when it is trivial.
    pub fn reduce(&self, e: i64) -> Option<i64> {
        let r = match *self {
            Modulus::Cyclic(n) => e.rem_euclid(n as i64),
            Modulus::Infinite => e,
        };
        (r != 0).then_some(r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReducedWord {
    n: usize,
    modulus: Modulus,
    /// `(generator, exponent)`, adjacent generators distinct, exponents canonical.
    letters: Vec<(u32, i64)>,
}

impl ReducedWord {
    pub fn identity(n: usize, modulus: Modulus) -> Self {
        ReducedWord {
            n,
            modulus,
            letters: Vec::new(),
        }
    }

    /// `g_k^e`.
    pub fn generator(n: usize, modulus: Modulus, k: usize, e: i64) -> Result<Self> {
        Self::from_letters(n, modulus, &[(k, e)])
    }

    /// Reduces an arbitrary product of generator powers.
    pub fn from_letters(n: usize, modulus: Modulus, letters: &[(usize, i64)]) -> Result<Self> {
        if let Modulus::Cyclic(0) = modulus {
            return Err(Error::argument("cyclic modulus must be positive"));
        }
        let mut w = Self::identity(n, modulus);
        for &(k, e) in letters {
            if k >= n {
                return Err(Error::argument(format!("generator {k} out of range for n = {n}")));
            }
            w.push(k as u32, e);
        }
        Ok(w)
    }

    fn push(&mut self, k: u32, e: i64) {
        let Some(e) = self.modulus.reduce(e) else {
            return;
        };
        match self.letters.last_mut() {
            Some(last) if last.0 == k => match self.modulus.reduce(last.1 + e) {
                Some(s) => last.1 = s,
                None => {
                    self.letters.pop();
                }
            },
            _ => self.letters.push((k, e)),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn letters(&self) -> &[(u32, i64)] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        let mut w = Self::identity(self.n, self.modulus);
        for &(k, e) in self.letters.iter().rev() {
            w.push(k, -e);
        }
        w
    }

    /// Total exponent of each generator (canonical representatives summed).
    pub fn exponent_sums(&self) -> Vec<i64> {
        let mut s = vec![0i64; self.n];
        for &(k, e) in &self.letters {
            s[k as usize] += e;
        }
        s
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (i, (k, e)) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "g{}^{}", k + 1, e)?;
        }
        Ok(())
    }
}

fn check_same_group(w: &ReducedWord, v: &ReducedWord) -> Result<()> {
    if w.n != v.n || w.modulus != v.modulus {
        return Err(Error::shape(format!(
            "words live in different groups: ({}, {:?}) vs ({}, {:?})",
            w.n, w.modulus, v.n, v.modulus
        )));
    }
    Ok(())
}

/// Reduced product `w v`.
pub fn word_mul(w: &ReducedWord, v: &ReducedWord) -> Result<ReducedWord> {
    check_same_group(w, v)?;
    Ok(mul_unchecked(w, v))
}

fn mul_unchecked(w: &ReducedWord, v: &ReducedWord) -> ReducedWord {
    let mut out = w.clone();
    for &(k, e) in &v.letters {
        out.push(k, e);
    }
    out
}

/// `chi_u(w) = exp(2 pi i sum_j u_j s_j / 8m)` with `s_j` the exponent sums of `w`.
///
/// For `F_n` this is the character at the torus point `theta = u / 8m`.
pub fn chi_u(w: &ReducedWord, u: &MultiIndex, m: u32) -> Complex64 {
    let big_n = 8 * m as i64;
    let phase: i64 = w
        .exponent_sums()
        .iter()
        .zip(u.coords())
        .map(|(&s, &uj)| (s.rem_euclid(big_n) * uj as i64).rem_euclid(big_n))
        .sum();
    crate::lattice::unit_phase(phase as u64, big_n as u64)
}

/// `exp(2 pi i sum_j theta_j s_j)` for a torus point `theta`.
pub fn chi_theta(w: &ReducedWord, theta: &[f64]) -> Complex64 {
    let phase: f64 = w
        .exponent_sums()
        .iter()
        .zip(theta)
        .map(|(&s, &t)| (s as f64 * t).rem_euclid(1.0))
        .sum();
    Complex64::cis(std::f64::consts::TAU * phase.fract())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FreeElementRepr", into = "FreeElementRepr")]
pub struct FreeElement {
    n: usize,
    modulus: Modulus,
    coeffs: BTreeMap<ReducedWord, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct FreeElementRepr {
    n: usize,
    modulus: Modulus,
    terms: Vec<(Vec<(u32, i64)>, Complex64)>,
}

impl TryFrom<FreeElementRepr> for FreeElement {
    type Error = Error;

    fn try_from(r: FreeElementRepr) -> Result<Self> {
        let terms = r
            .terms
            .into_iter()
            .map(|(letters, c)| {
                let letters: Vec<(usize, i64)> = letters.into_iter().map(|(k, e)| (k as usize, e)).collect();
                Ok((ReducedWord::from_letters(r.n, r.modulus, &letters)?, c))
            })
            .collect::<Result<Vec<_>>>()?;
        FreeElement::from_terms(r.n, r.modulus, terms)
    }
}

impl From<FreeElement> for FreeElementRepr {
    fn from(a: FreeElement) -> Self {
        FreeElementRepr {
            n: a.n,
            modulus: a.modulus,
            terms: a.coeffs.into_iter().map(|(w, c)| (w.letters, c)).collect(),
        }
    }
}

impl FreeElement {
    pub fn zero(n: usize, modulus: Modulus) -> Self {
        FreeElement {
            n,
            modulus,
            coeffs: BTreeMap::new(),
        }
    }

    /// `lambda(w)`.
    pub fn delta(w: ReducedWord) -> Self {
        let mut a = Self::zero(w.n, w.modulus);
        a.coeffs.insert(w, Complex64::new(1.0, 0.0));
        a
    }

    /// Sums the terms; repeated words accumulate.
    pub fn from_terms<I>(n: usize, modulus: Modulus, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ReducedWord, Complex64)>,
    {
        let mut a = Self::zero(n, modulus);
        for (w, c) in terms {
            if w.n != n || w.modulus != modulus {
                return Err(Error::shape("word belongs to a different group"));
            }
            if !c.is_finite() {
                return Err(Error::NonFinite("free algebra coefficient"));
            }
            *a.coeffs.entry(w).or_default() += c;
        }
        a.prune();
        Ok(a)
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| c.norm() > PRUNE_THRESHOLD);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ReducedWord, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, w: &ReducedWord) -> Complex64 {
        self.coeffs.get(w).copied().unwrap_or_default()
    }

    /// `tau(a)`: the coefficient at the empty word.
    pub fn trace(&self) -> Complex64 {
        self.coefficient(&ReducedWord::identity(self.n, self.modulus))
    }

    /// `a*(w) = conj(a(w^{-1}))`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.n, self.modulus);
        out.coeffs = self.coeffs.iter().map(|(w, c)| (w.inverse(), c.conj())).collect();
        out
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.modulus != other.modulus {
            return Err(Error::shape("free algebra elements live in different groups"));
        }
        Ok(())
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= z;
        }
        out.prune();
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    /// `M_u`: `lambda(w) -> chi_u(w) lambda(w)`, with `u` in `Z_{8m}^n`.
    pub fn multiplier_mu(&self, u: &MultiIndex, m: u32) -> Result<Self> {
        if u.rank() != self.n {
            return Err(Error::shape(format!("u has rank {}, expected {}", u.rank(), self.n)));
        }
        if u.coords().iter().any(|&c| c >= 8 * m) {
            return Err(Error::argument(format!("u must be reduced modulo {}", 8 * m)));
        }
        let mut out = self.clone();
        for (w, c) in out.coeffs.iter_mut() {
            *c *= chi_u(w, u, m);
        }
        Ok(out)
    }

    /// `lambda(w) -> chi_theta(w) lambda(w)` for a torus point `theta`.
    pub fn multiplier_theta(&self, theta: &[f64]) -> Result<Self> {
        if theta.len() != self.n {
            return Err(Error::shape(format!(
                "theta has length {}, expected {}",
                theta.len(),
                self.n
            )));
        }
        let mut out = self.clone();
        for (w, c) in out.coeffs.iter_mut() {
            *c *= chi_theta(w, theta);
        }
        Ok(out)
    }
}

/// Convolution `ab`.
pub fn algebra_mul(a: &FreeElement, b: &FreeElement, caps: &ResourceCaps) -> Result<FreeElement> {
    a.check_compatible(b)?;
    let mut out = FreeElement::zero(a.n, a.modulus);
    for (w, x) in &a.coeffs {
        for (v, y) in &b.coeffs {
            *out.coeffs.entry(mul_unchecked(w, v)).or_default() += x * y;
        }
        if out.coeffs.len() > caps.max_words {
            return Err(support_error(out.coeffs.len(), caps));
        }
    }
    out.prune();
    Ok(out)
}

fn support_error(found: usize, caps: &ResourceCaps) -> Error {
    Error::Resource {
        what: "free algebra support",
        requested: found as u128,
        cap: caps.max_words as u128,
    }
}

/// `tau(a b)` without forming the product.
pub fn trace_of_product(a: &FreeElement, b: &FreeElement) -> Result<Complex64> {
    a.check_compatible(b)?;
    Ok(a.coeffs.iter().map(|(w, x)| x * b.coefficient(&w.inverse())).sum())
}

fn power(b: &FreeElement, r: usize, caps: &ResourceCaps) -> Result<FreeElement> {
    let mut acc = FreeElement::delta(ReducedWord::identity(b.n, b.modulus));
    for _ in 0..r {
        acc = algebra_mul(&acc, b, caps)?;
    }
    Ok(acc)
}

/// `||a||_p^p = tau((a* a)^{p/2})` for even `p`.
pub fn freelp_norm_pow_even(a: &FreeElement, p: f64, caps: &ResourceCaps) -> Result<f64> {
    let r = even_half(p).ok_or_else(|| Error::argument(format!("free algebra norms need even p, got {p}")))? as usize;
    if a.len() > caps.max_words {
        return Err(support_error(a.len(), caps));
    }
    let b = algebra_mul(&a.adjoint(), a, caps)?;
    let (r1, r2) = (r.div_ceil(2), r / 2);
    let left = power(&b, r1, caps)?;
    let right = if r2 == r1 { left.clone() } else { power(&b, r2, caps)? };
    let t = trace_of_product(&left, &right)?;
    if !t.re.is_finite() {
        return Err(Error::NonFinite("free algebra trace"));
    }
    Ok(t.re.max(0.0))
}

/// `||a||_p` for even `p`.
pub fn freelp_norm_even(a: &FreeElement, p: f64, caps: &ResourceCaps) -> Result<f64> {
    Ok(freelp_norm_pow_even(a, p, caps)?.powf(1.0 / p))
}

/// Random element: `support` distinct words of length at most `max_len`
/// with complex Gaussian coefficients.
pub fn random_element(n: usize, modulus: Modulus, max_len: usize, support: usize, seed: u64) -> Result<FreeElement> {
    if n == 0 || max_len == 0 || support == 0 {
        return Err(Error::argument("random elements need n, max_len, support >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = BTreeMap::new();
    let mut attempts = 0usize;
    while coeffs.len() < support {
        attempts += 1;
        if attempts > 100 * support + 1000 {
            return Err(Error::argument("could not draw enough distinct words"));
        }
        let len = rng.random_range(1..=max_len);
        let mut w = ReducedWord::identity(n, modulus);
        for _ in 0..len {
            let k = rng.random_range(0..n as u32);
            let e = match modulus {
                Modulus::Cyclic(big_n) => rng.random_range(1..big_n as i64),
                Modulus::Infinite => {
                    let e = rng.random_range(1..=3i64);
                    if rng.random_bool(0.5) {
                        e
                    } else {
                        -e
                    }
                }
            };
            w.push(k, e);
        }
        coeffs.entry(w).or_insert_with(|| complex_gaussian(&mut rng));
    }
    FreeElement::from_terms(n, modulus, coeffs)
}

impl MultiplierTarget for FreeElement {
    fn combine(&self, other: &Self, c: Complex64) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, y) in &other.coeffs {
            *out.coeffs.entry(w.clone()).or_default() += c * y;
        }
        out.prune();
        Ok(out)
    }

    fn scaled(&self, z: Complex64) -> Self {
        self.scale(z)
    }

    fn norm_pow(&self, p: f64, caps: &ResourceCaps) -> Result<f64> {
        freelp_norm_pow_even(self, p, caps)
    }

    /// `tau((a* a)^r)` for `r = 1, 2, 3`.
    fn distribution_signature(&self, caps: &ResourceCaps) -> Result<Vec<f64>> {
        (1..=3)
            .map(|r| freelp_norm_pow_even(self, 2.0 * r as f64, caps))
            .collect()
    }
}

/// `{M_u : u in Z_{8m}^n}` acting on the algebra of `Z_{8m}^{*n}` or `F_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeCharacters {
    m: u32,
    params: GroupShape,
}

impl FreeCharacters {
    pub fn new(n: usize, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::argument("m must be at least 1"));
        }
        Ok(FreeCharacters {
            m,
            params: GroupShape::uniform(n, 8 * m)?,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }
}

impl MultiplierFamily<FreeElement> for FreeCharacters {
    fn kind(&self) -> FamilyKind {
        FamilyKind::FreeCharacter
    }

    fn parameters(&self) -> &GroupShape {
        &self.params
    }

    fn apply(&self, gamma: &MultiIndex, f: &FreeElement) -> Result<FreeElement> {
        f.multiplier_mu(gamma, self.m)
    }
}
