use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GroupShape, MultiIndex, SubsetMask};

/// Which built-in rule produced an [`EtaMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EtaKind {
    /// `beta_l` on `Z_{2l}`: `y -> y - l` for `y < l`, `y -> y - (l - 1)` otherwise.
    Beta {
        ell: u32,
    },
    /// `Z_2 -> {-scale, +scale}`.
    Sign {
        scale: u32,
    },
    /// Grid sample of `y -> y / 4m` on `[-1/2, 1/2)` at resolution `l`: `t -> t - l`.
    ScaledIdentity {
        ell: u32,
    },
    Custom,
}

/// `beta_l(y)`, defined for `0 <= y < 2l`.
pub fn eta_beta(y: i64, ell: i64) -> Result<i64> {
    if ell < 1 {
        return Err(Error::argument(format!("beta needs l >= 1, got {ell}")));
    }
    if !(0..2 * ell).contains(&y) {
        return Err(Error::argument(format!(
            "beta_{ell} is defined on [0, {}), got {y}",
            2 * ell
        )));
    }
    Ok(if y < ell { y - ell } else { y - (ell - 1) })
}

/// A coordinatewise map `eta: H -> Gamma` between finite product groups.
///
/// `table[j][y_j]` holds the integer value of `eta(y)_j` before reduction
/// modulo the target modulus, so that scaled images `c * eta(y)` are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaMap {
    kind: EtaKind,
    source: GroupShape,
    target: GroupShape,
    table: Vec<Vec<i64>>,
}

impl EtaMap {
    /// `eta_l = (beta_l, ..., beta_l): Z_{2l}^n -> Z_N^n`.
    pub fn beta(n: usize, ell: u32, target_modulus: u32) -> Result<Self> {
        if ell == 0 {
            return Err(Error::argument("beta needs l >= 1"));
        }
        let column: Vec<i64> = (0..2 * ell as i64)
            .map(|y| eta_beta(y, ell as i64))
            .collect::<Result<_>>()?;
        Self::build(
            EtaKind::Beta { ell },
            GroupShape::uniform(n, 2 * ell)?,
            GroupShape::uniform(n, target_modulus)?,
            vec![column; n],
        )
    }

    /// `Z_2^n -> Z_N^n`, `0 -> -scale`, `1 -> +scale`.
    pub fn sign(n: usize, scale: u32, target_modulus: u32) -> Result<Self> {
        let column = vec![-(scale as i64), scale as i64];
        Self::build(
            EtaKind::Sign { scale },
            GroupShape::uniform(n, 2)?,
            GroupShape::uniform(n, target_modulus)?,
            vec![column; n],
        )
    }

    /// `Z_{2l}^n -> Z_{8lm}^n`, `t -> t - l`.
    pub fn scaled_identity(n: usize, ell: u32, m: u32) -> Result<Self> {
        if ell == 0 || m == 0 {
            return Err(Error::argument("scaled identity needs l, m >= 1"));
        }
        let column: Vec<i64> = (0..2 * ell as i64).map(|t| t - ell as i64).collect();
        Self::build(
            EtaKind::ScaledIdentity { ell },
            GroupShape::uniform(n, 2 * ell)?,
            GroupShape::uniform(n, 8 * ell * m)?,
            vec![column; n],
        )
    }

    /// Explicit tables; rejected unless the symmetric-inclusion check passes.
    pub fn custom(source: GroupShape, target: GroupShape, table: Vec<Vec<i64>>) -> Result<Self> {
        let eta = Self::build(EtaKind::Custom, source, target, table)?;
        if let Some(j) = eta.asymmetric_coordinate() {
            return Err(Error::Validation(format!(
                "custom eta fails symmetric inclusion at coordinate {j}"
            )));
        }
        Ok(eta)
    }

    fn build(kind: EtaKind, source: GroupShape, target: GroupShape, table: Vec<Vec<i64>>) -> Result<Self> {
        if source.rank() != target.rank() || table.len() != source.rank() {
            return Err(Error::shape("eta source, target and table must have the same rank"));
        }
        for (j, col) in table.iter().enumerate() {
            if col.len() != source.modulus(j) as usize {
                return Err(Error::shape(format!(
                    "eta table column {j} has {} entries, source modulus is {}",
                    col.len(),
                    source.modulus(j)
                )));
            }
        }
        Ok(EtaMap {
            kind,
            source,
            target,
            table,
        })
    }

    pub fn kind(&self) -> EtaKind {
        self.kind
    }

    pub fn source(&self) -> &GroupShape {
        &self.source
    }

    pub fn target(&self) -> &GroupShape {
        &self.target
    }

    pub fn rank(&self) -> usize {
        self.source.rank()
    }

    pub fn column(&self, j: usize) -> &[i64] {
        &self.table[j]
    }

    /// Integer vector `eta(y)`.
    pub fn apply(&self, y: &MultiIndex) -> Vec<i64> {
        y.coords()
            .iter()
            .enumerate()
            .map(|(j, &c)| self.table[j][c as usize])
            .collect()
    }

    /// `c * eta_S(y)` reduced in the target group (`subset = None` means all coordinates).
    pub fn scaled_image(&self, y: &MultiIndex, c: i64, subset: Option<&SubsetMask>) -> MultiIndex {
        let coords: Vec<u32> = y
            .coords()
            .iter()
            .enumerate()
            .map(|(j, &yj)| {
                if subset.is_some_and(|s| !s.contains(j)) {
                    return 0;
                }
                let n = self.target.modulus(j) as i64;
                (c * self.table[j][yj as usize]).rem_euclid(n) as u32
            })
            .collect();
        MultiIndex::from_reduced(coords)
    }

    /// Per-coordinate histogram of `c * eta_j` over the uniform source, indexed by residue.
    pub fn histogram(&self, j: usize, c: i64) -> Vec<u32> {
        let n = self.target.modulus(j) as i64;
        let mut h = vec![0u32; n as usize];
        for &v in &self.table[j] {
            h[(c * v).rem_euclid(n) as usize] += 1;
        }
        h
    }

    /// First coordinate whose law of `eta_j` differs from that of `-eta_j`.
    ///
    /// The law of `eta_S(y)` is the product of the coordinate laws, so
    /// equality of every marginal is equivalent to equality for every `S`.
    pub fn asymmetric_coordinate(&self) -> Option<usize> {
        (0..self.rank()).find(|&j| self.histogram(j, 1) != self.histogram(j, -1))
    }

    pub fn is_symmetric(&self) -> bool {
        self.asymmetric_coordinate().is_none()
    }
}
