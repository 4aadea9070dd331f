//! Conditional expectations, derivatives, translations, the averaging
//! operator `T_S`, coordinatewise eta maps and multiplier families.

mod eta;
mod family;

pub use eta::{eta_beta, EtaKind, EtaMap};
pub use family::{
    validate_multiplier_family, CustomFamily, FamilyKind, Modulations, MultiplierFamily, MultiplierTarget,
    Translations, ValidationConfig, ValidationReport,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GroupShape, LatticeFunction, MultiIndex, Side, SubsetMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    /// `chi_w -> [w_j != 0] chi_w`, i.e. `id - E_{j}`.
    Spectral,
    /// `f(x) - f(x + e_j)` on a coordinate of order two.
    HypercubeDifference,
    /// Fourier multiplier `2 pi i w_j / m_j` with `w_j` centred in `(-m_j/2, m_j/2]`.
    ClassicalTorus,
}

/// Visits every line along `axis`: calls `visit(base, step)` where the line
/// entries sit at `base + t * step` for `t < m_axis` (offsets into the raw array).
fn for_each_line(shape: &GroupShape, dim: usize, axis: usize, mut visit: impl FnMut(usize, usize)) {
    let dd = dim * dim;
    let m = shape.modulus(axis) as usize;
    let stride = shape.strides()[axis];
    let step = stride * dd;
    let outer_count = shape.order() as usize / (m * stride);
    for outer in 0..outer_count {
        for inner in 0..step {
            visit(outer * m * step + inner, step);
        }
    }
}

fn average_axis(values: &mut [Complex64], shape: &GroupShape, dim: usize, axis: usize) {
    let m = shape.modulus(axis) as usize;
    if m == 1 {
        return;
    }
    let inv = 1.0 / m as f64;
    for_each_line(shape, dim, axis, |base, step| {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in 0..m {
            acc += values[base + t * step];
        }
        acc *= inv;
        for t in 0..m {
            values[base + t * step] = acc;
        }
    });
}

fn shift_axis(values: &mut [Complex64], shape: &GroupShape, dim: usize, axis: usize, by: usize) {
    let m = shape.modulus(axis) as usize;
    if by % m == 0 {
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for_each_line(shape, dim, axis, |base, step| {
        for (t, slot) in line.iter_mut().enumerate() {
            *slot = values[base + ((t + by) % m) * step];
        }
        for (t, &v) in line.iter().enumerate() {
            values[base + t * step] = v;
        }
    });
}

/// `E_{[n]\S} f`: averages `f` over every coordinate outside `S`.
pub fn cond_expect(f: &LatticeFunction, s: &SubsetMask) -> Result<LatticeFunction> {
    f.require_side(Side::Position)?;
    check_mask(f.shape(), s)?;
    let mut values = f.values().to_vec();
    for axis in 0..f.shape().rank() {
        if !s.contains(axis) {
            average_axis(&mut values, f.shape(), f.dim(), axis);
        }
    }
    Ok(f.with_values(values))
}

/// Fourier form of [`cond_expect`]: drops every coefficient with `supp(w)` not inside `S`.
pub fn fourier_truncation(f: &LatticeFunction, s: &SubsetMask) -> Result<LatticeFunction> {
    check_mask(f.shape(), s)?;
    let mut big_f = f.dft()?;
    let dd = f.dim() * f.dim();
    let shape = f.shape().clone();
    for (i, w) in shape.points().enumerate() {
        if !w.support().is_subset_of(s) {
            big_f.values_mut()[i * dd..(i + 1) * dd].fill(Complex64::new(0.0, 0.0));
        }
    }
    big_f.idft()
}

fn check_mask(shape: &GroupShape, s: &SubsetMask) -> Result<()> {
    if s.rank() != shape.rank() {
        return Err(Error::shape(format!(
            "subset of [{}] used on a rank {} group",
            s.rank(),
            shape.rank()
        )));
    }
    Ok(())
}

/// `M_gamma f(x) = f(x + gamma)`.
pub fn translate(f: &LatticeFunction, gamma: &MultiIndex) -> Result<LatticeFunction> {
    f.require_side(Side::Position)?;
    f.shape().check_compatible(gamma)?;
    let mut values = f.values().to_vec();
    for (axis, &g) in gamma.coords().iter().enumerate() {
        shift_axis(&mut values, f.shape(), f.dim(), axis, g as usize);
    }
    Ok(f.with_values(values))
}

/// Directional derivative along coordinate `j`.
pub fn derivative(f: &LatticeFunction, j: usize, mode: DerivativeMode) -> Result<LatticeFunction> {
    f.require_side(Side::Position)?;
    let shape = f.shape();
    if j >= shape.rank() {
        return Err(Error::argument(format!(
            "coordinate {j} out of range for rank {}",
            shape.rank()
        )));
    }
    match mode {
        DerivativeMode::Spectral => {
            let mut avg = f.values().to_vec();
            average_axis(&mut avg, shape, f.dim(), j);
            Ok(f.with_values(f.values().iter().zip(&avg).map(|(a, b)| a - b).collect()))
        }
        DerivativeMode::HypercubeDifference => {
            if shape.modulus(j) != 2 {
                return Err(Error::argument(format!(
                    "hypercube difference needs modulus 2 at coordinate {j}, found {}",
                    shape.modulus(j)
                )));
            }
            f.sub(&translate(f, &MultiIndex::unit(shape.rank(), j))?)
        }
        DerivativeMode::ClassicalTorus => {
            let mut big_f = f.dft()?;
            let dd = f.dim() * f.dim();
            let m = shape.modulus(j) as f64;
            let shape = shape.clone();
            for (i, w) in shape.points().enumerate() {
                let c = shape.centered(j, w.coords()[j]) as f64;
                let factor = Complex64::new(0.0, std::f64::consts::TAU * c / m);
                for v in &mut big_f.values_mut()[i * dd..(i + 1) * dd] {
                    *v *= factor;
                }
            }
            big_f.idft()
        }
    }
}

/// `T_S f = E_y M_{2 eta_S(y)} f` for the translation family on `f`'s group.
pub fn t_s_average(f: &LatticeFunction, s: &SubsetMask, eta: &EtaMap) -> Result<LatticeFunction> {
    t_s_average_with(&Translations::new(f.shape().clone()), f, s, eta)
}

/// `T_S f = E_y M_{2 eta_S(y)} f` for an arbitrary multiplier family.
///
/// Only `y_S` matters, so the average runs over `prod_{j in S} H_j`.
pub fn t_s_average_with<T, F>(family: &F, f: &T, s: &SubsetMask, eta: &EtaMap) -> Result<T>
where
    T: MultiplierTarget,
    F: MultiplierFamily<T> + ?Sized,
{
    if family.parameters() != eta.target() {
        return Err(Error::shape("eta target differs from the multiplier parameter group"));
    }
    check_mask(eta.source(), s)?;
    let members: Vec<usize> = s.members().collect();
    let sub_moduli: Vec<u32> = members.iter().map(|&j| eta.source().modulus(j)).collect();
    if members.is_empty() {
        return Ok(f.clone());
    }
    let sub = GroupShape::new(sub_moduli)?;
    let n = eta.rank();
    let mut acc: Option<T> = None;
    for ys in sub.points() {
        let mut y = vec![0u32; n];
        for (&j, &c) in members.iter().zip(ys.coords()) {
            y[j] = c;
        }
        let gamma = eta.scaled_image(&MultiIndex::from_reduced(y), 2, Some(s));
        let term = family.apply(&gamma, f)?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.combine(&term, Complex64::new(1.0, 0.0))?,
        });
    }
    let total = acc.expect("subgroup is non-empty");
    Ok(total.scaled(Complex64::new(1.0 / sub.order() as f64, 0.0)))
}
