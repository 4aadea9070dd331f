//! Exact even moments of sparse polynomials.
//!
//! For `g = sum_w A_w chi_w` on the probability space `G`,
//!
//! ```text
//! ||g||_{2r}^{2r} = E tr (g* g)^r
//!                 = sum tr(A*_{w_1} A_{w_2} A*_{w_3} ... A_{w_{2r}})
//! ```
//!
//! over the tuples with `-w_1 + w_2 - w_3 + ... + w_{2r} = 0`. The same tuples
//! give every translate difference and every Fourier truncation of `g`, which
//! is what [`ShiftMoments`] and [`TruncationMoments`] aggregate.

use std::collections::HashMap;

use num_complex::Complex64;

use super::TrigPoly;
use crate::error::{Error, Result};
use crate::lattice::{character_unchecked, GroupShape, MultiIndex, ResourceCaps};
use crate::matrix::CMatrix;
use crate::numeric::binomial;
use crate::subsets::SubsetPlan;

/// Sign of position `t` (0-based) in the alternating frequency sum.
fn sign(t: usize) -> i64 {
    if t % 2 == 0 {
        -1
    } else {
        1
    }
}

fn add_signed(shape: &GroupShape, acc: &mut [u32], w: &[u32], s: i64) {
    for (j, (a, &b)) in acc.iter_mut().zip(w).enumerate() {
        let m = shape.modulus(j) as i64;
        *a = (*a as i64 + s * b as i64).rem_euclid(m) as u32;
    }
}

/// Half of a tuple: its frequency indices, partial sum and matrix product.
struct Half {
    digits: Vec<usize>,
    product: CMatrix,
}

fn halves(
    poly: &TrigPoly,
    freqs: &[&MultiIndex],
    blocks: &[CMatrix],
    r: usize,
    offset: usize,
) -> Vec<(Vec<u32>, Half)> {
    let s = freqs.len();
    let n = poly.shape().rank();
    let total = s.pow(r as u32);
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; r];
    for _ in 0..total {
        let mut key = vec![0u32; n];
        let mut product = CMatrix::identity(poly.dim());
        for (t, &i) in digits.iter().enumerate() {
            let pos = offset + t;
            add_signed(poly.shape(), &mut key, freqs[i].coords(), sign(pos));
            let factor = if sign(pos) < 0 {
                blocks[i].adjoint()
            } else {
                blocks[i].clone()
            };
            product = product.matmul(&factor);
        }
        out.push((
            key,
            Half {
                digits: digits.clone(),
                product,
            },
        ));
        // odometer, last digit fastest
        for t in (0..r).rev() {
            digits[t] += 1;
            if digits[t] < s {
                break;
            }
            digits[t] = 0;
        }
    }
    out
}

fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let d = a.dim();
    let (x, y) = (a.as_slice(), b.as_slice());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += x[i * d + j] * y[j * d + i];
        }
    }
    acc
}

/// Calls `visit(indices, weight)` for every `2r`-tuple of term indices with
/// vanishing alternating frequency sum, in a deterministic order.
///
/// Indices refer to the terms of `poly` in increasing frequency order. Fails
/// with a resource error when the tuple count exceeds `caps.max_tuples`.
pub fn visit_tuples<F>(poly: &TrigPoly, r: usize, caps: &ResourceCaps, mut visit: F) -> Result<()>
where
    F: FnMut(&[usize], Complex64),
{
    if r == 0 {
        return Err(Error::argument("moment order must be at least 1"));
    }
    let s = poly.len();
    if s == 0 {
        return Ok(());
    }
    let half_count = (s as u128).saturating_pow(r as u32);
    let half_cost = half_count.saturating_mul((poly.dim() * poly.dim()) as u128);
    if half_cost > caps.max_tuples as u128 {
        return Err(Error::Resource {
            what: "moment half-tuples",
            requested: half_cost,
            cap: caps.max_tuples as u128,
        });
    }
    let (freqs, blocks): (Vec<&MultiIndex>, Vec<CMatrix>) = poly.terms().map(|(w, a)| (w, a.clone())).unzip();
    let left = halves(poly, &freqs, &blocks, r, 0);
    let right = halves(poly, &freqs, &blocks, r, r);

    let mut buckets: HashMap<&[u32], Vec<usize>> = HashMap::new();
    for (i, (key, _)) in left.iter().enumerate() {
        buckets.entry(key.as_slice()).or_default().push(i);
    }
    let shape = poly.shape();
    let negated: Vec<Vec<u32>> = right
        .iter()
        .map(|(key, _)| {
            let mut neg = vec![0u32; key.len()];
            add_signed(shape, &mut neg, key, -1);
            neg
        })
        .collect();
    let count: u128 = negated
        .iter()
        .map(|k| buckets.get(k.as_slice()).map_or(0, Vec::len) as u128)
        .sum();
    if count > caps.max_tuples as u128 {
        return Err(Error::Resource {
            what: "moment tuples",
            requested: count,
            cap: caps.max_tuples as u128,
        });
    }
    let mut indices = vec![0usize; 2 * r];
    for ((_, rh), neg) in right.iter().zip(&negated) {
        let Some(bucket) = buckets.get(neg.as_slice()) else {
            continue;
        };
        indices[r..].copy_from_slice(&rh.digits);
        for &li in bucket {
            let lh = &left[li].1;
            indices[..r].copy_from_slice(&lh.digits);
            visit(&indices, trace_of_product(&lh.product, &rh.product));
        }
    }
    Ok(())
}

/// `||g||_{2r}^{2r}`.
pub fn even_norm_pow(poly: &TrigPoly, r: usize, caps: &ResourceCaps) -> Result<f64> {
    let mut acc = Complex64::new(0.0, 0.0);
    visit_tuples(poly, r, caps, |_, w| acc += w)?;
    finish(acc)
}

fn finish(z: Complex64) -> Result<f64> {
    if !z.re.is_finite() {
        return Err(Error::NonFinite("moment sum"));
    }
    // exact value is non-negative; only rounding can push it below zero
    Ok(z.re.max(0.0))
}

/// Moments of translate differences:
/// `||g(. + v) - g||_{2r}^{2r} = Re sum_u W(u) chi_u(v)` for every shift `v`.
#[derive(Debug, Clone)]
pub struct ShiftMoments {
    shape: GroupShape,
    weights: Vec<(MultiIndex, Complex64)>,
}

impl ShiftMoments {
    pub fn build(poly: &TrigPoly, r: usize, caps: &ResourceCaps) -> Result<Self> {
        let shape = poly.shape().clone();
        let n = shape.rank();
        let freqs: Vec<Vec<u32>> = poly.terms().map(|(w, _)| w.coords().to_vec()).collect();
        let mut table: HashMap<Vec<u32>, Complex64> = HashMap::new();
        let mut left_sums: Vec<Vec<u32>> = Vec::new();
        let mut right_sums: Vec<Vec<u32>> = Vec::new();
        let subset_sums = |idx: &[usize], offset: usize, out: &mut Vec<Vec<u32>>| {
            out.clear();
            out.push(vec![0u32; n]);
            for (t, &i) in idx.iter().enumerate() {
                for k in 0..out.len() {
                    let mut next = out[k].clone();
                    add_signed(&shape, &mut next, &freqs[i], sign(offset + t));
                    out.push(next);
                }
            }
        };
        let mut key = vec![0u32; n];
        visit_tuples(poly, r, caps, |idx, w| {
            subset_sums(&idx[..r], 0, &mut left_sums);
            subset_sums(&idx[r..], r, &mut right_sums);
            // the subset-sum list doubles per element, so bit parity of the
            // position in the list is the parity of |T|
            for (a, ls) in left_sums.iter().enumerate() {
                for (b, rs) in right_sums.iter().enumerate() {
                    key.copy_from_slice(ls);
                    add_signed(&shape, &mut key, rs, 1);
                    let parity = (a.count_ones() + b.count_ones()) % 2;
                    let c = if parity == 0 { w } else { -w };
                    *table.entry(key.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
                }
            }
        })?;
        let mut weights: Vec<(MultiIndex, Complex64)> = table
            .into_iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(k, c)| (MultiIndex::from_reduced(k), c))
            .collect();
        weights.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(ShiftMoments { shape, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `||g(. + v) - g||_{2r}^{2r}`.
    pub fn at_shift(&self, v: &MultiIndex) -> Result<f64> {
        self.shape.check_compatible(v)?;
        let acc: Complex64 = self
            .weights
            .iter()
            .map(|(u, c)| c * character_unchecked(u, v, &self.shape))
            .sum();
        finish(acc)
    }

    /// `E ||g(. + v) - g||_{2r}^{2r}` for independent coordinates `v_j` with
    /// characteristic functions `psi(j, u_j) = E exp(2 pi i u_j v_j / m_j)`.
    pub fn expect_product<P>(&self, psi: P) -> Result<f64>
    where
        P: Fn(usize, u32) -> Complex64,
    {
        let acc: Complex64 = self
            .weights
            .iter()
            .map(|(u, c)| {
                let phase: Complex64 = u
                    .coords()
                    .iter()
                    .enumerate()
                    .filter(|(_, &uj)| uj != 0)
                    .map(|(j, &uj)| psi(j, uj))
                    .product();
                c * phase
            })
            .sum();
        finish(acc)
    }

    /// `sum_j ||g(. + e_j) - g||_{2r}^{2r}`.
    pub fn sum_unit_shifts(&self) -> Result<f64> {
        let n = self.shape.rank();
        let mut total = Complex64::new(0.0, 0.0);
        for (u, c) in &self.weights {
            for j in 0..n {
                let m = self.shape.modulus(j);
                total += c * crate::lattice::unit_phase(u.coords()[j] as u64, m as u64);
            }
        }
        finish(total)
    }

    /// `E ||g(. + v e_j) - g||_{2r}^{2r}` for a single coordinate `j`, with
    /// `psi(u_j) = E exp(2 pi i u_j v / m_j)`.
    pub fn expect_coordinate<P>(&self, j: usize, psi: P) -> Result<f64>
    where
        P: Fn(u32) -> Complex64,
    {
        if j >= self.shape.rank() {
            return Err(Error::argument(format!("coordinate {j} out of range")));
        }
        let acc: Complex64 = self
            .weights
            .iter()
            .map(|(u, c)| {
                let uj = u.coords()[j];
                if uj == 0 {
                    *c
                } else {
                    c * psi(uj)
                }
            })
            .sum();
        finish(acc)
    }

    /// Average over the subsets `S` of `plan` of `E ||g(. + v_S) - g||_{2r}^{2r}`,
    /// where `v` is as in [`expect_product`](Self::expect_product) and `v_S`
    /// vanishes off `S`.
    pub fn expect_subsets<P>(&self, plan: &SubsetPlan, psi: P) -> Result<f64>
    where
        P: Fn(usize, u32) -> Complex64,
    {
        let n = self.shape.rank();
        if plan.n() != n {
            return Err(Error::shape(format!(
                "subset plan has n = {}, group rank is {n}",
                plan.n()
            )));
        }
        let k = plan.k();
        let acc: Complex64 = if plan.is_exact() {
            let total = binomial(n, k) as f64;
            self.weights
                .iter()
                .map(|(u, c)| {
                    let vals: Vec<Complex64> = u
                        .coords()
                        .iter()
                        .enumerate()
                        .filter(|(_, &uj)| uj != 0)
                        .map(|(j, &uj)| psi(j, uj))
                        .collect();
                    let size = vals.len();
                    // e[t] = elementary symmetric polynomial of degree t
                    let mut e = vec![Complex64::new(0.0, 0.0); size.min(k) + 1];
                    e[0] = Complex64::new(1.0, 0.0);
                    for v in &vals {
                        for t in (1..e.len()).rev() {
                            let prev = e[t - 1];
                            e[t] += prev * v;
                        }
                    }
                    let mix: Complex64 = e
                        .iter()
                        .enumerate()
                        .filter(|&(t, _)| k - t <= n - size)
                        .map(|(t, et)| et * (binomial(n - size, k - t) as f64 / total))
                        .sum();
                    c * mix
                })
                .sum()
        } else {
            let list = plan.sampled();
            let inv = 1.0 / list.len() as f64;
            let mut patterns: HashMap<u64, Vec<(u64, usize)>> = HashMap::new();
            self.weights
                .iter()
                .map(|(u, c)| {
                    let support = u.support().bits();
                    let hist = patterns.entry(support).or_insert_with(|| {
                        let mut h: HashMap<u64, usize> = HashMap::new();
                        for s in list {
                            *h.entry(s.bits() & support).or_default() += 1;
                        }
                        let mut v: Vec<_> = h.into_iter().collect();
                        v.sort_unstable();
                        v
                    });
                    let mix: Complex64 = hist
                        .iter()
                        .map(|&(pattern, count)| {
                            let phase: Complex64 = (0..n)
                                .filter(|&j| pattern >> j & 1 == 1)
                                .map(|j| psi(j, u.coords()[j]))
                                .product();
                            phase * (count as f64 * inv)
                        })
                        .sum();
                    c * mix
                })
                .sum()
        };
        finish(acc)
    }
}

/// Moments of Fourier truncations: `avg_S ||E_{[n]\S} g||_{2r}^{2r}`.
#[derive(Debug, Clone)]
pub struct TruncationMoments {
    n: usize,
    by_support: Vec<(u64, Complex64)>,
}

impl TruncationMoments {
    pub fn build(poly: &TrigPoly, r: usize, caps: &ResourceCaps) -> Result<Self> {
        let supports: Vec<u64> = poly.terms().map(|(w, _)| w.support().bits()).collect();
        let mut table: HashMap<u64, Complex64> = HashMap::new();
        visit_tuples(poly, r, caps, |idx, w| {
            let union = idx.iter().fold(0u64, |acc, &i| acc | supports[i]);
            *table.entry(union).or_insert(Complex64::new(0.0, 0.0)) += w;
        })?;
        let mut by_support: Vec<_> = table.into_iter().collect();
        by_support.sort_unstable_by_key(|&(u, _)| u);
        Ok(TruncationMoments {
            n: poly.shape().rank(),
            by_support,
        })
    }

    pub fn average(&self, plan: &SubsetPlan) -> Result<f64> {
        if plan.n() != self.n {
            return Err(Error::shape(format!(
                "subset plan has n = {}, group rank is {}",
                plan.n(),
                self.n
            )));
        }
        let (n, k) = (self.n, plan.k());
        let acc: Complex64 = if plan.is_exact() {
            let total = binomial(n, k) as f64;
            self.by_support
                .iter()
                .filter(|(u, _)| u.count_ones() as usize <= k)
                .map(|&(u, c)| {
                    let size = u.count_ones() as usize;
                    c * (binomial(n - size, k - size) as f64 / total)
                })
                .sum()
        } else {
            let list = plan.sampled();
            let inv = 1.0 / list.len() as f64;
            self.by_support
                .iter()
                .map(|&(u, c)| {
                    let hits = list.iter().filter(|s| s.bits() & u == u).count();
                    c * (hits as f64 * inv)
                })
                .sum()
        };
        finish(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{random_function, Distribution, LatticeFunction};
    use crate::norms::lp_norm_pow;
    use crate::operators::{cond_expect, translate, MultiplierTarget};
    use crate::subsets::SubsetPolicy;

    fn caps() -> ResourceCaps {
        ResourceCaps::default()
    }

    fn sample(moduli: Vec<u32>, dim: usize, s: usize, seed: u64) -> (LatticeFunction, TrigPoly) {
        let shape = GroupShape::new(moduli).unwrap();
        let f = random_function(&shape, dim, Distribution::SparseFourier { s }, seed, &caps()).unwrap();
        let g = TrigPoly::from_dense(&f).unwrap();
        (f, g)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-10 * b.abs().max(1.0)
    }

    #[test]
    fn shift_moments_match_dense() {
        for dim in [1, 2] {
            let (f, g) = sample(vec![4, 3, 2], dim, 6, 5);
            for r in 1..=2 {
                let sm = ShiftMoments::build(&g, r, &caps()).unwrap();
                for v in f.shape().points() {
                    let d = translate(&f, &v).unwrap().sub(&f).unwrap();
                    let want = lp_norm_pow(&d, 2.0 * r as f64).unwrap();
                    assert!(close(sm.at_shift(&v).unwrap(), want));
                }
                let units: f64 = (0..3)
                    .map(|j| {
                        let e = MultiIndex::unit(3, j);
                        lp_norm_pow(&translate(&f, &e).unwrap().sub(&f).unwrap(), 2.0 * r as f64).unwrap()
                    })
                    .sum();
                assert!(close(sm.sum_unit_shifts().unwrap(), units));
            }
        }
    }

    #[test]
    fn product_expectation_matches_average() {
        let (f, g) = sample(vec![8, 8], 1, 5, 2);
        let sm = ShiftMoments::build(&g, 2, &caps()).unwrap();
        // v_j uniform on {-1, +1}
        let psi = |_: usize, u: u32| Complex64::new((std::f64::consts::TAU * u as f64 / 8.0).cos(), 0.0);
        let got = sm.expect_product(psi).unwrap();
        let mut want = 0.0;
        for a in [1u32, 7] {
            for b in [1u32, 7] {
                let v = MultiIndex::from_reduced(vec![a, b]);
                want += lp_norm_pow(&translate(&f, &v).unwrap().sub(&f).unwrap(), 4.0).unwrap() / 4.0;
            }
        }
        assert!(close(got, want));
    }

    #[test]
    fn subset_expectation_matches_enumeration() {
        let (f, g) = sample(vec![4, 4, 4, 4], 1, 6, 9);
        let sm = ShiftMoments::build(&g, 1, &caps()).unwrap();
        let psi = |_: usize, u: u32| crate::lattice::unit_phase(2 * u as u64, 4);
        for policy in [SubsetPolicy::Exact, SubsetPolicy::Sampled { count: 3, seed: 4 }] {
            let plan = policy.resolve(4, 2).unwrap();
            let got = sm.expect_subsets(&plan, psi).unwrap();
            let members = plan.members().unwrap();
            let want: f64 = members
                .iter()
                .map(|s| {
                    let coords = (0..4).map(|j| if s.contains(j) { 2 } else { 0 }).collect();
                    let v = MultiIndex::from_reduced(coords);
                    lp_norm_pow(&translate(&f, &v).unwrap().sub(&f).unwrap(), 2.0).unwrap()
                })
                .sum::<f64>()
                / members.len() as f64;
            assert!(close(got, want), "{got} vs {want}");
        }
    }

    #[test]
    fn truncation_moments_match_dense() {
        let (f, g) = sample(vec![3, 2, 3, 2], 2, 7, 13);
        for r in 1..=2 {
            let tm = TruncationMoments::build(&g, r, &caps()).unwrap();
            for policy in [SubsetPolicy::Exact, SubsetPolicy::Sampled { count: 4, seed: 1 }] {
                let plan = policy.resolve(4, 2).unwrap();
                let members = plan.members().unwrap();
                let want: f64 = members
                    .iter()
                    .map(|s| lp_norm_pow(&cond_expect(&f, s).unwrap(), 2.0 * r as f64).unwrap())
                    .sum::<f64>()
                    / members.len() as f64;
                assert!(close(tm.average(&plan).unwrap(), want));
            }
        }
    }

    #[test]
    fn tuple_cap_is_enforced() {
        let (_, g) = sample(vec![16, 16], 1, 40, 1);
        let tight = ResourceCaps {
            max_tuples: 1000,
            ..ResourceCaps::default()
        };
        let err = even_norm_pow(&g, 2, &tight).unwrap_err();
        assert!(err.is_resource());
        assert!(g.distribution_signature(&caps()).is_ok());
    }
}
