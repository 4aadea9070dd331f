//! Small dense complex matrices and a cyclic Jacobi eigensolver for
//! Hermitian matrices. Dimensions here are tiny (fibers of lattice
//! functions), so everything is plain row-major `Vec<Complex64>`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major `dim x dim` complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn scalar(z: Complex64) -> Self {
        CMatrix { dim: 1, data: vec![z] }
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * entries.len() + i] = z;
        }
        m
    }

    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::shape(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(CMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.dim + j] = z;
    }

    pub fn adjoint(&self) -> CMatrix {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        mul_slices(self.dim, &self.data, &other.data)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn scale(&self, z: Complex64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&a| a * z).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius(&self) -> f64 {
        frobenius(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

pub(crate) fn frobenius(block: &[Complex64]) -> f64 {
    block.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn mul_slices(d: usize, a: &[Complex64], b: &[Complex64]) -> CMatrix {
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    CMatrix { dim: d, data: out }
}

/// `A^* A` for a row-major block.
pub(crate) fn gram(d: usize, a: &[Complex64]) -> CMatrix {
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in i..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += a[k * d + i].conj() * a[k * d + j];
            }
            out[i * d + j] = acc;
            if i != j {
                out[j * d + i] = acc.conj();
            }
        }
    }
    CMatrix { dim: d, data: out }
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius mass drops below
/// `tol * ||H||_F` (or a sweep limit is reached).
pub fn hermitian_eigenvalues(h: &CMatrix, tol: f64) -> Vec<f64> {
    let d = h.dim;
    let mut a = h.data.clone();
    let scale = frobenius(&a);
    if d == 1 || scale == 0.0 {
        return (0..d).map(|i| a[i * d + i].re).collect();
    }
    let threshold = tol * scale;
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * d + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..d - 1 {
            for q in p + 1..d {
                let apq = a[p * d + q];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                // Phase-rotate so the (p, q) entry is real, then apply the real Jacobi rotation.
                let phase = apq / r;
                let app = a[p * d + p].re;
                let aqq = a[q * d + q].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Unitary G acts on columns p, q: col_p' = c col_p - s conj(phase) col_q, col_q' = s phase col_p + c col_q
                let sp = phase * s;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = akp * c - akq * sp.conj();
                    a[k * d + q] = akp * sp + akq * c;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = apk * c - aqk * sp;
                    a[q * d + k] = apk * sp.conj() + aqk * c;
                }
                a[p * d + q] = Complex64::new(0.0, 0.0);
                a[q * d + p] = Complex64::new(0.0, 0.0);
            }
        }
    }
    (0..d).map(|i| a[i * d + i].re).collect()
}

/// Singular values of a square block, descending.
pub fn singular_values(d: usize, block: &[Complex64]) -> Vec<f64> {
    let g = gram(d, block);
    let mut sv: Vec<f64> = hermitian_eigenvalues(&g, 1e-14)
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn jacobi_diagonalizes_known_hermitian() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let h = CMatrix::from_row_major(2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]).unwrap();
        let mut ev = hermitian_eigenvalues(&h, 1e-14);
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-13);
        assert!((ev[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let a = CMatrix::diagonal(&[c(3.0, 0.0), c(0.0, -4.0)]);
        let sv = singular_values(2, a.as_slice());
        assert!((sv[0] - 4.0).abs() < 1e-14);
        assert!((sv[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn adjoint_and_product() {
        let a = CMatrix::from_row_major(2, vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 3.0)]).unwrap();
        let g = a.adjoint().matmul(&a);
        assert_eq!(g, gram(2, a.as_slice()));
        assert!((g.trace().re - a.frobenius().powi(2)).abs() < 1e-12);
    }
}
