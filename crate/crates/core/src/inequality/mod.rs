//! Evaluators for the balanced-truncation and metric `X_p` inequalities.
//!
//! Every evaluator returns an [`InequalityReport`] with the left-hand side,
//! the two right-hand terms and
//! `ratio = lhs / (m_factor * (rhs_derivative_term + rhs_full_term))`.

mod engine;
mod free;
mod registry;
mod shifts;
mod theorem_a;
mod truncation;

pub use free::eval_free_transfer;
pub use registry::{Domain, EvalParams, Evaluator, FreeModulusKind, Registry};
pub use shifts::{eval_cyclic, eval_nc, eval_torus, TorusVariant};
pub use theorem_a::{eval_theorem_a, ReportTarget, TheoremAMode};
pub use truncation::{eval_np, eval_rp1};

pub(crate) use engine::{ShiftEngine, ShiftLaw};

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freealg::FreeElement;
use crate::lattice::{LatticeFunction, ResourceCaps};
use crate::norms::even_half;
use crate::operators::{DerivativeMode, ValidationConfig};
use crate::sparse::TrigPoly;
use crate::subsets::{SubsetMode, SubsetPolicy};

/// Denominators below this make the ratio absent.
pub const RATIO_FLOOR: f64 = 1e-14;
/// Largest accepted mean for inputs that must be mean-zero.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

/// The function an evaluator is applied to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    Dense { f: LatticeFunction },
    Sparse { f: TrigPoly },
    Free { f: FreeElement },
}

impl Witness {
    pub fn dense(f: LatticeFunction) -> Self {
        Witness::Dense { f }
    }

    pub fn sparse(f: TrigPoly) -> Self {
        Witness::Sparse { f }
    }

    pub fn free(f: FreeElement) -> Self {
        Witness::Free { f }
    }

    /// Norm of the mean (the trace coefficient for free elements).
    pub fn mean_norm(&self) -> f64 {
        match self {
            Witness::Dense { f } => f.mean().frobenius(),
            Witness::Sparse { f } => f.mean().frobenius(),
            Witness::Free { f } => f.trace().norm(),
        }
    }

    pub fn require_mean_zero(&self) -> Result<()> {
        let mean = self.mean_norm();
        if mean > MEAN_ZERO_TOL {
            return Err(Error::NotMeanZero(mean));
        }
        Ok(())
    }

    pub fn scaled(&self, z: num_complex::Complex64) -> Self {
        match self {
            Witness::Dense { f } => Witness::Dense { f: f.scale(z) },
            Witness::Sparse { f } => Witness::Sparse { f: f.scale(z) },
            Witness::Free { f } => Witness::Free { f: f.scale(z) },
        }
    }
}

/// How lattice norms are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Dense storage for dense witnesses; exact moments for sparse witnesses
    /// when `p` is even.
    #[default]
    Auto,
    Dense,
    Sparse,
}

/// The route an evaluation actually took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteTaken {
    Dense,
    Sparse,
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub subsets: SubsetPolicy,
    pub route: Route,
    pub caps: ResourceCaps,
    /// Family validation run before generic evaluations (`None` skips it).
    pub validation: Option<ValidationConfig>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            subsets: SubsetPolicy::default(),
            route: Route::Auto,
            caps: ResourceCaps::default(),
            validation: Some(ValidationConfig::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub n: usize,
    pub k: usize,
    pub m: u32,
    pub ell: Option<u32>,
    pub p: f64,
    pub d: usize,
    pub variant: Option<String>,
    pub derivative_mode: Option<DerivativeMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub evaluator: String,
    pub lhs: f64,
    pub rhs_derivative_term: f64,
    pub rhs_full_term: f64,
    pub m_factor: f64,
    /// Constant already included in `rhs_derivative_term`.
    pub derivative_constant: f64,
    pub ratio: Option<f64>,
    pub subset_mode: SubsetMode,
    pub params: ReportParams,
    /// Whether `m >= sqrt(n / k)`; absent when `m` plays no role.
    pub threshold_met: Option<bool>,
    pub route: RouteTaken,
    pub notes: Vec<String>,
}

/// The three norm components before assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Terms {
    pub lhs: f64,
    pub derivative: f64,
    pub full: f64,
}

impl InequalityReport {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        evaluator: &str,
        terms: Terms,
        m_factor: f64,
        derivative_constant: f64,
        subset_mode: SubsetMode,
        params: ReportParams,
        threshold_met: Option<bool>,
        route: RouteTaken,
        notes: Vec<String>,
    ) -> Result<Self> {
        for (what, v) in [
            ("inequality lhs", terms.lhs),
            ("inequality derivative term", terms.derivative),
            ("inequality full term", terms.full),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(what));
            }
        }
        let denom = m_factor * (terms.derivative + terms.full);
        let ratio = (denom >= RATIO_FLOOR).then(|| terms.lhs / denom);
        Ok(InequalityReport {
            evaluator: evaluator.to_string(),
            lhs: terms.lhs,
            rhs_derivative_term: terms.derivative,
            rhs_full_term: terms.full,
            m_factor,
            derivative_constant,
            ratio,
            subset_mode,
            params,
            threshold_met,
            route,
            notes,
        })
    }
}

/// `m >= sqrt(n / k)`, decided in integers.
pub fn threshold_met(n: usize, k: usize, m: u32) -> bool {
    (m as u128) * (m as u128) * (k as u128) >= n as u128
}

pub(crate) fn check_nk(n: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::argument(format!("need 1 <= k <= n, got n = {n}, k = {k}")));
    }
    Ok(())
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !p.is_finite() || p < 2.0 {
        return Err(Error::argument(format!("p must be a finite real >= 2, got {p}")));
    }
    Ok(())
}

/// A lattice witness after route selection.
pub(crate) enum Resolved<'a> {
    Dense(Cow<'a, LatticeFunction>),
    Sparse(Cow<'a, TrigPoly>),
}

impl Resolved<'_> {
    pub fn route(&self) -> RouteTaken {
        match self {
            Resolved::Dense(_) => RouteTaken::Dense,
            Resolved::Sparse(_) => RouteTaken::Sparse,
        }
    }

    pub fn shape(&self) -> &crate::lattice::GroupShape {
        match self {
            Resolved::Dense(f) => f.shape(),
            Resolved::Sparse(f) => f.shape(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Resolved::Dense(f) => f.dim(),
            Resolved::Sparse(f) => f.dim(),
        }
    }
}

pub(crate) fn resolve<'a>(w: &'a Witness, p: f64, route: Route, caps: &ResourceCaps) -> Result<Resolved<'a>> {
    let even = even_half(p).is_some();
    match (w, route) {
        (Witness::Free { .. }, _) => Err(Error::argument("this evaluator needs a lattice witness")),
        (Witness::Dense { f }, Route::Auto | Route::Dense) => {
            f.require_side(crate::lattice::Side::Position)?;
            Ok(Resolved::Dense(Cow::Borrowed(f)))
        }
        (Witness::Sparse { f }, Route::Auto) if even => Ok(Resolved::Sparse(Cow::Borrowed(f))),
        (Witness::Sparse { f }, Route::Auto | Route::Dense) => Ok(Resolved::Dense(Cow::Owned(f.to_dense(caps)?))),
        (_, Route::Sparse) if !even => Err(Error::argument(format!("the sparse route needs even p, got {p}"))),
        (Witness::Sparse { f }, Route::Sparse) => Ok(Resolved::Sparse(Cow::Borrowed(f))),
        (Witness::Dense { f }, Route::Sparse) => Ok(Resolved::Sparse(Cow::Owned(TrigPoly::from_dense(f)?))),
    }
}
