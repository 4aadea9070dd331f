use rayon::prelude::*;

use super::{check_nk, check_p, resolve, EvalOptions, InequalityReport, ReportParams, Resolved, Terms, Witness};
use crate::error::{Error, Result};
use crate::norms::{even_half, lp_norm_pow};
use crate::numeric::{pairwise_mean, pairwise_sum};
use crate::operators::{cond_expect, derivative, DerivativeMode};
use crate::sparse::moments::TruncationMoments;

/// Balanced Fourier truncations on `Z_2^n` with hypercube differences.
///
/// `lhs = avg_{|S|=k} ||E_{[n]\S} f||_p^p`,
/// `rhs_derivative_term = (k/n) sum_j ||f - f(. + e_j)||_p^p`,
/// `rhs_full_term = (k/n)^{p/2} ||f||_p^p`.
pub fn eval_np(w: &Witness, p: f64, k: usize, opts: &EvalOptions) -> Result<InequalityReport> {
    let resolved = resolve(w, p, opts.route, &opts.caps)?;
    if resolved.shape().moduli().iter().any(|&m| m != 2) {
        return Err(Error::shape("eval_np needs a function on Z_2^n"));
    }
    truncation_report("np", w, &resolved, p, k, DerivativeMode::HypercubeDifference, opts)
}

/// Balanced truncations on any finite product with matrix fibers and the
/// chosen derivative.
pub fn eval_rp1(w: &Witness, p: f64, k: usize, mode: DerivativeMode, opts: &EvalOptions) -> Result<InequalityReport> {
    let resolved = resolve(w, p, opts.route, &opts.caps)?;
    truncation_report("rp1", w, &resolved, p, k, mode, opts)
}

fn truncation_report(
    id: &str,
    w: &Witness,
    resolved: &Resolved<'_>,
    p: f64,
    k: usize,
    mode: DerivativeMode,
    opts: &EvalOptions,
) -> Result<InequalityReport> {
    check_p(p)?;
    w.require_mean_zero()?;
    let n = resolved.shape().rank();
    check_nk(n, k)?;
    let plan = opts.subsets.resolve(n, k)?;
    let kn = k as f64 / n as f64;
    let (lhs, deriv_sum, norm) = match resolved {
        Resolved::Dense(f) => {
            let members = plan.members()?;
            let parts: Vec<f64> = members
                .par_iter()
                .map(|s| lp_norm_pow(&cond_expect(f, s)?, p))
                .collect::<Result<_>>()?;
            let derivs: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|j| lp_norm_pow(&derivative(f, j, mode)?, p))
                .collect::<Result<_>>()?;
            (pairwise_mean(&parts), pairwise_sum(&derivs), lp_norm_pow(f, p)?)
        }
        Resolved::Sparse(g) => {
            let r = even_half(p).expect("sparse route has even p") as usize;
            let lhs = TruncationMoments::build(g, r, &opts.caps)?.average(&plan)?;
            let derivs: Vec<f64> = (0..n)
                .map(|j| g.derivative(j, mode)?.norm_pow(p, &opts.caps))
                .collect::<Result<_>>()?;
            (lhs, pairwise_sum(&derivs), g.norm_pow(p, &opts.caps)?)
        }
    };
    let terms = Terms {
        lhs,
        derivative: kn * deriv_sum,
        full: kn.powf(p / 2.0) * norm,
    };
    let params = ReportParams {
        n,
        k,
        m: 1,
        ell: None,
        p,
        d: resolved.dim(),
        variant: None,
        derivative_mode: Some(mode),
    };
    InequalityReport::assemble(
        id,
        terms,
        1.0,
        1.0,
        plan.mode(),
        params,
        None,
        resolved.route(),
        Vec::new(),
    )
}
