use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::mixture_sum;
use super::{
    check_nk, check_p, threshold_met, EvalOptions, InequalityReport, ReportParams, RouteTaken, ShiftLaw, Terms,
};
use crate::error::{Error, Result};
use crate::freealg::FreeElement;
use crate::lattice::{LatticeFunction, MultiIndex};
use crate::numeric::pairwise_sum;
use crate::operators::{
    validate_multiplier_family, DerivativeMode, EtaKind, EtaMap, MultiplierFamily, MultiplierTarget,
};
use crate::sparse::TrigPoly;

/// Derivative used in the first right-hand term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremAMode {
    /// `(k/n) sum_j avg_y ||g(y) - avg_t g(y with y_j = t)||_p^p`, `g(y) = M_{2 eta(y)} f`.
    #[default]
    Spectral,
    /// `(k/n) sum_j avg_y ||g(y) - g(y + e_j)||_p^p` on `H = Z_2^n`.
    HypercubeDifference,
    /// `(k/n) sum_j ||M_{e_j} f - f||_p^p`.
    UnitShift,
}

impl TheoremAMode {
    fn label(self) -> &'static str {
        match self {
            TheoremAMode::Spectral => "spectral",
            TheoremAMode::HypercubeDifference => "hypercube-difference",
            TheoremAMode::UnitShift => "unit-shift",
        }
    }
}

/// Targets the generic evaluator can report on.
pub trait ReportTarget: MultiplierTarget {
    fn route() -> RouteTaken;

    fn fiber_dim(&self) -> usize;
}

impl ReportTarget for LatticeFunction {
    fn route() -> RouteTaken {
        RouteTaken::Dense
    }

    fn fiber_dim(&self) -> usize {
        self.dim()
    }
}

impl ReportTarget for TrigPoly {
    fn route() -> RouteTaken {
        RouteTaken::Sparse
    }

    fn fiber_dim(&self) -> usize {
        self.dim()
    }
}

impl ReportTarget for FreeElement {
    fn route() -> RouteTaken {
        RouteTaken::Free
    }

    fn fiber_dim(&self) -> usize {
        1
    }
}

/// The abstract inequality for a pair `(H, G)` with eta map and multiplier family:
///
/// `lhs = avg_{|S|=k} avg_y ||M_{4m eta_S(y)} f - f||_p^p`,
/// `rhs_full_term = (k/n)^{p/2} avg_y ||M_{eta(y)} f - f||_p^p`,
/// `m_factor = m^p`, derivative term per [`TheoremAMode`].
#[allow(clippy::too_many_arguments)]
pub fn eval_theorem_a<T, F>(
    f: &T,
    family: &F,
    eta: &EtaMap,
    mode: TheoremAMode,
    p: f64,
    k: usize,
    m: u32,
    opts: &EvalOptions,
) -> Result<InequalityReport>
where
    T: ReportTarget,
    F: MultiplierFamily<T> + ?Sized,
{
    check_p(p)?;
    if m == 0 {
        return Err(Error::argument("m must be at least 1"));
    }
    let target = family.parameters();
    if target != eta.target() {
        return Err(Error::shape("eta target and multiplier parameter group differ"));
    }
    if let Some(j) = eta.asymmetric_coordinate() {
        return Err(Error::Validation(format!(
            "eta fails symmetric inclusion at coordinate {j}"
        )));
    }
    if let Some(config) = &opts.validation {
        let report = validate_multiplier_family(family, eta, m, p, std::slice::from_ref(f), config, &opts.caps)?;
        if !report.passed() {
            return Err(Error::Validation(format!(
                "multiplier family failed validation: {report:?}"
            )));
        }
    }
    let n = eta.rank();
    check_nk(n, k)?;
    let plan = opts.subsets.resolve(n, k)?;
    let caps = &opts.caps;
    let kn = k as f64 / n as f64;
    let norm = |gamma: &MultiIndex| -> Result<f64> { family.apply(gamma, f)?.difference(f)?.norm_pow(p, caps) };

    let lhs_mix = ShiftLaw::from_eta(eta, 4 * m as i64).subset_mixture(target, &plan.members()?, caps)?;
    let lhs = mixture_sum(&lhs_mix, norm)?;
    let full_mix = ShiftLaw::from_eta(eta, 1).full_mixture(target, caps)?;
    let full = mixture_sum(&full_mix, norm)?;
    let deriv_sum = match mode {
        TheoremAMode::UnitShift => mixture_sum(&ShiftLaw::uniform(n, vec![1]).coordinate_mixture(target), norm)?,
        TheoremAMode::Spectral | TheoremAMode::HypercubeDifference => derivative_in_y(f, family, eta, mode, p, opts)?,
    };
    let terms = Terms {
        lhs,
        derivative: kn * deriv_sum,
        full: kn.powf(p / 2.0) * full,
    };
    let ell = match eta.kind() {
        EtaKind::Beta { ell } | EtaKind::ScaledIdentity { ell } => Some(ell),
        _ => None,
    };
    let params = ReportParams {
        n,
        k,
        m,
        ell,
        p,
        d: f.fiber_dim(),
        variant: Some(mode.label().to_string()),
        derivative_mode: match mode {
            TheoremAMode::Spectral => Some(DerivativeMode::Spectral),
            TheoremAMode::HypercubeDifference => Some(DerivativeMode::HypercubeDifference),
            TheoremAMode::UnitShift => None,
        },
    };
    InequalityReport::assemble(
        "theorem_a",
        terms,
        (m as f64).powf(p),
        1.0,
        plan.mode(),
        params,
        Some(threshold_met(n, k, m)),
        T::route(),
        Vec::new(),
    )
}

/// `sum_j avg_y ||partial_j^y M_{2 eta(y)} f||_p^p`.
fn derivative_in_y<T, F>(f: &T, family: &F, eta: &EtaMap, mode: TheoremAMode, p: f64, opts: &EvalOptions) -> Result<f64>
where
    T: ReportTarget,
    F: MultiplierFamily<T> + ?Sized,
{
    let source = eta.source();
    let n = source.rank();
    let order = source.order();
    let work = order.saturating_mul(n as u128);
    if work > opts.caps.max_tuples {
        return Err(Error::Resource {
            what: "index group enumeration",
            requested: work,
            cap: opts.caps.max_tuples,
        });
    }
    if mode == TheoremAMode::HypercubeDifference && source.moduli().iter().any(|&q| q != 2) {
        return Err(Error::argument("hypercube differences in y need H = Z_2^n"));
    }
    let points: Vec<MultiIndex> = source.points().collect();
    let images: Vec<T> = points
        .par_iter()
        .map(|y| family.apply(&eta.scaled_image(y, 2, None), f))
        .collect::<Result<_>>()?;
    let per_point: Vec<f64> = points
        .par_iter()
        .enumerate()
        .map(|(i, y)| {
            let mut parts = Vec::with_capacity(n);
            for j in 0..n {
                let mut coords = y.coords().to_vec();
                let other = match mode {
                    TheoremAMode::HypercubeDifference => {
                        coords[j] ^= 1;
                        images[source.linear_index(&MultiIndex::from_reduced(coords))].clone()
                    }
                    _ => {
                        let q = source.modulus(j);
                        let weight = num_complex::Complex64::new(1.0 / q as f64, 0.0);
                        let mut acc: Option<T> = None;
                        for t in 0..q {
                            coords[j] = t;
                            let g = &images[source.linear_index(&MultiIndex::from_reduced(coords.clone()))];
                            acc = Some(match acc {
                                None => g.scaled(weight),
                                Some(a) => a.combine(g, weight)?,
                            });
                        }
                        acc.expect("modulus is positive")
                    }
                };
                parts.push(images[i].difference(&other)?.norm_pow(p, &opts.caps)?);
            }
            Ok(pairwise_sum(&parts))
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&per_point) / order as f64)
}
