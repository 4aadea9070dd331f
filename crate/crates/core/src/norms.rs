//! Schatten norms of matrix blocks and mixed `L_p(G; S_p)` norms of lattice
//! functions under the normalized counting measure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeFunction, Side};
use crate::matrix::{gram, mul_slices, singular_values, CMatrix};

/// Exponent and fiber of a mixed norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    p: f64,
    dim: usize,
}

impl NormSpec {
    pub fn new(p: f64, dim: usize) -> Result<Self> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(Error::argument(format!(
                "norm exponent must be finite and >= 2, got {p}"
            )));
        }
        if dim == 0 {
            return Err(Error::argument("fiber dimension must be >= 1"));
        }
        Ok(NormSpec { p, dim })
    }

    pub fn scalar(p: f64) -> Result<Self> {
        Self::new(p, 1)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Half the exponent when `p` is an even integer.
    pub fn even_half(&self) -> Option<u32> {
        even_half(self.p)
    }
}

pub(crate) fn even_half(p: f64) -> Option<u32> {
    (p.fract() == 0.0 && p >= 2.0 && p <= 64.0 && (p as u32) % 2 == 0).then(|| p as u32 / 2)
}

/// `sum_i sigma_i(A)^p` for a row-major `d x d` block, `p >= 1` finite.
pub(crate) fn schatten_power(d: usize, block: &[Complex64], p: f64) -> f64 {
    if d == 1 {
        return block[0].norm().powf(p);
    }
    if p == 2.0 {
        return block.iter().map(|z| z.norm_sqr()).sum();
    }
    if let Some(r) = even_half(p) {
        let g = gram(d, block);
        let mut acc = g.clone();
        for _ in 1..r {
            acc = mul_slices(d, acc.as_slice(), g.as_slice());
        }
        return acc.trace().re.max(0.0);
    }
    singular_values(d, block).into_iter().map(|s| s.powf(p)).sum()
}

/// Schatten `p`-norm of a square matrix; `p = f64::INFINITY` gives the operator norm.
pub fn schatten_norm(a: &CMatrix, p: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix entries"));
    }
    if p == f64::INFINITY {
        return Ok(singular_values(a.dim(), a.as_slice()).first().copied().unwrap_or(0.0));
    }
    if !(p >= 1.0) {
        return Err(Error::argument(format!("Schatten exponent must be >= 1, got {p}")));
    }
    Ok(schatten_power(a.dim(), a.as_slice(), p).powf(1.0 / p))
}

/// `(|G|^{-1} sum_x ||f(x)||_{S_p}^p)`, the p-th power of the mixed norm.
pub fn lp_norm_pow(f: &LatticeFunction, p: f64) -> Result<f64> {
    f.require_side(Side::Position)?;
    let d = f.dim();
    let dd = d * d;
    let total: f64 =
        crate::numeric::pairwise_sum_by(f.len(), |i| schatten_power(d, &f.values()[i * dd..(i + 1) * dd], p));
    Ok(total / f.len() as f64)
}

/// `(|G|^{-1} sum_x ||f(x)||_{S_p}^p)^{1/p}`.
pub fn lp_norm(f: &LatticeFunction, spec: &NormSpec) -> Result<f64> {
    if f.dim() != spec.dim() {
        return Err(Error::shape(format!(
            "norm fiber dimension {} does not match function dimension {}",
            spec.dim(),
            f.dim()
        )));
    }
    Ok(lp_norm_pow(f, spec.p())?.powf(1.0 / spec.p()))
}
