use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{character_unchecked, root_table, GroupShape, MultiIndex, ResourceCaps};
use crate::error::{Error, Result};
use crate::matrix::{frobenius, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Position,
    Fourier,
}

impl Side {
    fn name(self) -> &'static str {
        match self {
            Side::Position => "position",
            Side::Fourier => "fourier",
        }
    }
}

/// Dense function on a finite product group with `dim x dim` complex blocks
/// (`dim == 1` is the scalar case). Blocks are stored row-major, one after
/// another in linear-index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeFunction {
    shape: GroupShape,
    dim: usize,
    side: Side,
    values: Vec<Complex64>,
}

impl LatticeFunction {
    pub fn zeros(shape: GroupShape, dim: usize, side: Side, caps: &ResourceCaps) -> Result<Self> {
        if dim == 0 {
            return Err(Error::argument("matrix dimension must be at least 1"));
        }
        shape.check_dense(dim, caps)?;
        let len = shape.order() as usize * dim * dim;
        Ok(LatticeFunction {
            shape,
            dim,
            side,
            values: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn from_values(shape: GroupShape, dim: usize, side: Side, values: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::argument("matrix dimension must be at least 1"));
        }
        let expected = shape.order() as usize * dim * dim;
        if values.len() != expected {
            return Err(Error::shape(format!(
                "value array has {} entries, expected {expected}",
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("lattice function values"));
        }
        Ok(LatticeFunction {
            shape,
            dim,
            side,
            values,
        })
    }

    /// Position-side function from a pointwise rule returning row-major blocks.
    pub fn from_fn<F>(shape: GroupShape, dim: usize, caps: &ResourceCaps, mut rule: F) -> Result<Self>
    where
        F: FnMut(&MultiIndex) -> Vec<Complex64>,
    {
        let mut f = Self::zeros(shape, dim, Side::Position, caps)?;
        let dd = dim * dim;
        for i in 0..f.shape.order() as usize {
            let x = f.shape.point(i);
            let block = rule(&x);
            if block.len() != dd {
                return Err(Error::shape(format!(
                    "rule returned {} entries, expected {dd}",
                    block.len()
                )));
            }
            f.values[i * dd..(i + 1) * dd].copy_from_slice(&block);
        }
        Ok(f)
    }

    pub fn scalar_fn<F>(shape: GroupShape, caps: &ResourceCaps, mut rule: F) -> Result<Self>
    where
        F: FnMut(&MultiIndex) -> Complex64,
    {
        Self::from_fn(shape, 1, caps, |x| vec![rule(x)])
    }

    pub fn constant(shape: GroupShape, block: &CMatrix, caps: &ResourceCaps) -> Result<Self> {
        let data = block.as_slice().to_vec();
        Self::from_fn(shape, block.dim(), caps, |_| data.clone())
    }

    /// Scalar character `chi_w` on the position side.
    pub fn character(shape: GroupShape, w: &MultiIndex, caps: &ResourceCaps) -> Result<Self> {
        shape.check_compatible(w)?;
        let s = shape.clone();
        Self::scalar_fn(shape, caps, |x| character_unchecked(w, x, &s))
    }

    pub fn shape(&self) -> &GroupShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.shape.order() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn block(&self, i: usize) -> &[Complex64] {
        let dd = self.dim * self.dim;
        &self.values[i * dd..(i + 1) * dd]
    }

    pub fn block_at(&self, x: &MultiIndex) -> &[Complex64] {
        self.block(self.shape.linear_index(x))
    }

    pub fn require_side(&self, side: Side) -> Result<()> {
        if self.side != side {
            return Err(Error::Side {
                expected: side.name(),
                found: self.side.name(),
            });
        }
        Ok(())
    }

    pub fn check_same_layout(&self, other: &LatticeFunction) -> Result<()> {
        if self.shape != other.shape || self.dim != other.dim || self.side != other.side {
            return Err(Error::shape(format!(
                "functions differ: ({}, d={}) vs ({}, d={})",
                self.shape, self.dim, other.shape, other.dim
            )));
        }
        Ok(())
    }

    pub(crate) fn with_values(&self, values: Vec<Complex64>) -> LatticeFunction {
        LatticeFunction {
            shape: self.shape.clone(),
            dim: self.dim,
            side: self.side,
            values,
        }
    }

    pub fn sub(&self, other: &LatticeFunction) -> Result<LatticeFunction> {
        self.check_same_layout(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &LatticeFunction) -> Result<LatticeFunction> {
        self.check_same_layout(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect()))
    }

    pub fn scale(&self, z: Complex64) -> LatticeFunction {
        self.with_values(self.values.iter().map(|&a| a * z).collect())
    }

    /// Multiplies every block on the left and right: `x -> U f(x) V`.
    pub fn conjugate_blocks(&self, left: &CMatrix, right: &CMatrix) -> Result<LatticeFunction> {
        if left.dim() != self.dim || right.dim() != self.dim {
            return Err(Error::shape("conjugating matrices have the wrong dimension"));
        }
        let dd = self.dim * self.dim;
        let mut out = Vec::with_capacity(self.values.len());
        for chunk in self.values.chunks(dd) {
            let b = CMatrix::from_row_major(self.dim, chunk.to_vec())?;
            out.extend(left.matmul(&b).matmul(right).into_vec());
        }
        Ok(self.with_values(out))
    }

    /// Average block over the probability measure (position side).
    pub fn mean(&self) -> CMatrix {
        let dd = self.dim * self.dim;
        let mut acc = vec![Complex64::new(0.0, 0.0); dd];
        for chunk in self.values.chunks(dd) {
            for (a, b) in acc.iter_mut().zip(chunk) {
                *a += b;
            }
        }
        let inv = 1.0 / self.len() as f64;
        CMatrix::from_row_major(self.dim, acc.into_iter().map(|z| z * inv).collect())
            .expect("mean block has dim^2 entries")
    }

    /// Subtracts the mean block from every point.
    pub fn centered(&self) -> LatticeFunction {
        let mean = self.mean();
        let dd = self.dim * self.dim;
        let mut values = self.values.clone();
        for chunk in values.chunks_mut(dd) {
            for (a, b) in chunk.iter_mut().zip(mean.as_slice()) {
                *a -= b;
            }
        }
        self.with_values(values)
    }

    /// Frobenius norm of the whole value array (counting measure).
    pub fn raw_norm(&self) -> f64 {
        frobenius(&self.values)
    }

    /// `||self - other||_F / max(||other||_F, tiny)` on the raw arrays.
    pub fn relative_error(&self, other: &LatticeFunction) -> f64 {
        let diff: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        diff / other.raw_norm().max(f64::MIN_POSITIVE)
    }

    pub fn max_abs_diff(&self, other: &LatticeFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Forward transform: `F(w) = |G|^{-1} sum_x f(x) conj(chi_w(x))`, blockwise.
    pub fn dft(&self) -> Result<LatticeFunction> {
        self.require_side(Side::Position)?;
        let mut out = self.clone();
        transform_axes(&mut out, true);
        out.side = Side::Fourier;
        Ok(out)
    }

    /// Inverse transform: `f(x) = sum_w F(w) chi_w(x)`.
    pub fn idft(&self) -> Result<LatticeFunction> {
        self.require_side(Side::Fourier)?;
        let mut out = self.clone();
        transform_axes(&mut out, false);
        out.side = Side::Position;
        Ok(out)
    }
}

/// Direct `O(m_j^2)` transform along every axis in turn.
fn transform_axes(f: &mut LatticeFunction, forward: bool) {
    let dd = f.dim * f.dim;
    let strides = f.shape.strides();
    let order = f.shape.order() as usize;
    for (axis, &m) in f.shape.moduli().to_vec().iter().enumerate() {
        let m = m as usize;
        if m == 1 {
            continue;
        }
        let roots = root_table(m as u32);
        let step = strides[axis] * dd;
        let block_span = m * step;
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        let norm = if forward { 1.0 / m as f64 } else { 1.0 };
        for outer in 0..order / (m * strides[axis]) {
            for inner in 0..step {
                let base = outer * block_span + inner;
                for t in 0..m {
                    line[t] = f.values[base + t * step];
                }
                for (w, o) in out.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (x, &v) in line.iter().enumerate() {
                        let r = roots[(w * x) % m];
                        acc += v * if forward { r.conj() } else { r };
                    }
                    *o = acc * norm;
                }
                for t in 0..m {
                    f.values[base + t * step] = out[t];
                }
            }
        }
    }
}
