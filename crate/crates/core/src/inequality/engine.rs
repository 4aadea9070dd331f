//! Averages of `||M_v f - f||_p^p` over laws of translation vectors `v`,
//! computed densely or from exact shift moments.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::Resolved;
use crate::error::{Error, Result};
use crate::lattice::{unit_phase, GroupShape, LatticeFunction, MultiIndex, ResourceCaps, SubsetMask};
use crate::norms::{even_half, lp_norm_pow};
use crate::numeric::pairwise_sum;
use crate::operators::{translate, EtaMap};
use crate::sparse::moments::ShiftMoments;
use crate::subsets::SubsetPlan;

/// Independent coordinates, `v_j` uniform over `columns[j]` (integers, reduced
/// modulo the group when used).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ShiftLaw {
    columns: Vec<Vec<i64>>,
}

/// Weighted distinct shift vectors; weights sum to one.
pub(crate) type Mixture = BTreeMap<MultiIndex, f64>;

impl ShiftLaw {
    pub fn uniform(n: usize, column: Vec<i64>) -> Self {
        ShiftLaw {
            columns: vec![column; n],
        }
    }

    /// Law of `c * eta(y)` for uniform `y`.
    pub fn from_eta(eta: &EtaMap, c: i64) -> Self {
        ShiftLaw {
            columns: (0..eta.rank())
                .map(|j| eta.column(j).iter().map(|v| c * v).collect())
                .collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    /// `E exp(2 pi i u v_j / modulus)`.
    pub fn psi(&self, j: usize, u: u32, modulus: u32) -> Complex64 {
        let col = &self.columns[j];
        let big_n = modulus as i64;
        let total: Complex64 = col
            .iter()
            .map(|&v| unit_phase((u as i64 * v).rem_euclid(big_n) as u64, big_n as u64))
            .sum();
        total / col.len() as f64
    }

    /// Average over `members` of the law of `v_S` (zero off `S`).
    pub fn subset_mixture(&self, shape: &GroupShape, members: &[SubsetMask], caps: &ResourceCaps) -> Result<Mixture> {
        if shape.rank() != self.rank() {
            return Err(Error::shape("shift law and group have different ranks"));
        }
        let work: u128 = members
            .iter()
            .map(|s| s.members().map(|j| self.columns[j].len() as u128).product::<u128>())
            .sum();
        if work > caps.max_tuples {
            return Err(Error::Resource {
                what: "shift enumeration",
                requested: work,
                cap: caps.max_tuples,
            });
        }
        let mut mix = Mixture::new();
        let inv_members = 1.0 / members.len() as f64;
        for s in members {
            let js: Vec<usize> = s.members().collect();
            let count: usize = js.iter().map(|&j| self.columns[j].len()).product();
            let weight = inv_members / count as f64;
            let mut digits = vec![0usize; js.len()];
            let mut coords = vec![0u32; shape.rank()];
            for _ in 0..count {
                for (t, &j) in js.iter().enumerate() {
                    let m = shape.modulus(j) as i64;
                    coords[j] = self.columns[j][digits[t]].rem_euclid(m) as u32;
                }
                *mix.entry(MultiIndex::from_reduced(coords.clone())).or_default() += weight;
                for t in (0..js.len()).rev() {
                    digits[t] += 1;
                    if digits[t] < self.columns[js[t]].len() {
                        break;
                    }
                    digits[t] = 0;
                }
            }
        }
        Ok(mix)
    }

    /// Law of the full vector `v`.
    pub fn full_mixture(&self, shape: &GroupShape, caps: &ResourceCaps) -> Result<Mixture> {
        self.subset_mixture(shape, &[SubsetMask::full(self.rank())], caps)
    }

    /// `sum_j` of the law of `v_j e_j`, each with total weight one.
    pub fn coordinate_mixture(&self, shape: &GroupShape) -> Mixture {
        let n = self.rank();
        let mut mix = Mixture::new();
        for (j, col) in self.columns.iter().enumerate() {
            let w = 1.0 / col.len() as f64;
            for &v in col {
                let mut coords = vec![0u32; n];
                coords[j] = v.rem_euclid(shape.modulus(j) as i64) as u32;
                *mix.entry(MultiIndex::from_reduced(coords)).or_default() += w;
            }
        }
        mix
    }
}

/// `sum_v weight(v) * norm(v)` with norms evaluated in parallel and summed
/// in key order.
pub(crate) fn mixture_sum<F>(mix: &Mixture, norm: F) -> Result<f64>
where
    F: Fn(&MultiIndex) -> Result<f64> + Sync,
{
    let entries: Vec<(&MultiIndex, &f64)> = mix.iter().collect();
    let values: Vec<f64> = entries
        .par_iter()
        .map(|(v, w)| norm(v).map(|x| **w * x))
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&values))
}

pub(crate) fn dense_shift_norm(f: &LatticeFunction, p: f64, v: &MultiIndex) -> Result<f64> {
    lp_norm_pow(&translate(f, v)?.sub(f)?, p)
}

pub(crate) enum ShiftEngine<'a> {
    Dense {
        f: &'a LatticeFunction,
        p: f64,
        caps: ResourceCaps,
    },
    Sparse {
        shape: GroupShape,
        moments: ShiftMoments,
    },
}

impl<'a> ShiftEngine<'a> {
    pub fn new(resolved: &'a Resolved<'a>, p: f64, caps: &ResourceCaps) -> Result<Self> {
        match resolved {
            Resolved::Dense(f) => Ok(ShiftEngine::Dense {
                f: f.as_ref(),
                p,
                caps: *caps,
            }),
            Resolved::Sparse(g) => {
                let r = even_half(p).ok_or_else(|| Error::argument("the sparse route needs even p"))?;
                Ok(ShiftEngine::Sparse {
                    shape: g.shape().clone(),
                    moments: ShiftMoments::build(g, r as usize, caps)?,
                })
            }
        }
    }

    /// `avg_S E ||M_{v_S} f - f||_p^p` over the subsets of `plan`.
    pub fn subset_law(&self, law: &ShiftLaw, plan: &SubsetPlan) -> Result<f64> {
        match self {
            ShiftEngine::Dense { f, p, caps } => {
                let mix = law.subset_mixture(f.shape(), &plan.members()?, caps)?;
                mixture_sum(&mix, |v| dense_shift_norm(f, *p, v))
            }
            ShiftEngine::Sparse { shape, moments } => {
                moments.expect_subsets(plan, |j, u| law.psi(j, u, shape.modulus(j)))
            }
        }
    }

    /// `E ||M_v f - f||_p^p`.
    pub fn product_law(&self, law: &ShiftLaw) -> Result<f64> {
        match self {
            ShiftEngine::Dense { f, p, caps } => {
                let mix = law.full_mixture(f.shape(), caps)?;
                mixture_sum(&mix, |v| dense_shift_norm(f, *p, v))
            }
            ShiftEngine::Sparse { shape, moments } => moments.expect_product(|j, u| law.psi(j, u, shape.modulus(j))),
        }
    }

    /// `sum_j E ||M_{v_j e_j} f - f||_p^p`.
    pub fn coordinate_sum(&self, law: &ShiftLaw) -> Result<f64> {
        match self {
            ShiftEngine::Dense { f, p, .. } => {
                let mix = law.coordinate_mixture(f.shape());
                mixture_sum(&mix, |v| dense_shift_norm(f, *p, v))
            }
            ShiftEngine::Sparse { shape, moments } => {
                let parts: Vec<f64> = (0..shape.rank())
                    .map(|j| moments.expect_coordinate(j, |u| law.psi(j, u, shape.modulus(j))))
                    .collect::<Result<_>>()?;
                Ok(pairwise_sum(&parts))
            }
        }
    }
}
