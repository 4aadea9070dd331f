use serde::{Deserialize, Serialize};

use super::{
    check_nk, check_p, resolve, threshold_met, EvalOptions, InequalityReport, ReportParams, Resolved, ShiftEngine,
    ShiftLaw, Terms, Witness,
};
use crate::error::{Error, Result};
use crate::norms::lp_norm_pow;
use crate::numeric::pairwise_sum;
use crate::operators::{derivative, eta_beta, DerivativeMode};

const M_NOTE: &str = "stated with m^-p on the left; reported with m^p on the right";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TorusVariant {
    /// Grid version of `eta(y) = y / 4m` with `y` sampled at `beta_l` points.
    #[default]
    UniformEta,
    /// `eta(y) = sgn(y) / 8m`: half-period shifts on the left.
    SignEta,
    /// Uniform eta on the left, classical partial derivatives on the right.
    ClassicalDerivative,
}

impl TorusVariant {
    fn label(self) -> &'static str {
        match self {
            TorusVariant::UniformEta => "uniform-eta",
            TorusVariant::SignEta => "sign-eta",
            TorusVariant::ClassicalDerivative => "classical-derivative",
        }
    }
}

fn require_uniform(resolved: &Resolved<'_>, modulus: u32, what: &str) -> Result<usize> {
    let shape = resolved.shape();
    if shape.moduli().iter().any(|&q| q != modulus) {
        return Err(Error::shape(format!(
            "{what} needs every modulus equal to {modulus}, found {:?}",
            shape.moduli()
        )));
    }
    Ok(shape.rank())
}

fn beta_column(ell: u32) -> Vec<i64> {
    (0..2 * ell as i64)
        .map(|y| eta_beta(y, ell as i64).expect("y in range"))
        .collect()
}

fn check_ml(m: u32, ell: u32) -> Result<()> {
    if m == 0 || ell == 0 {
        return Err(Error::argument("m and l must be at least 1"));
    }
    Ok(())
}

/// Cyclic inequality on `Z_{8lm}^n`:
///
/// `lhs = avg_S avg_y ||f(. + 4m eta_l(y)_S) - f||_p^p`,
/// `rhs_derivative_term = (4l)^{p-1} (k/n) sum_j ||f(. + e_j) - f||_p^p`,
/// `rhs_full_term = (k/n)^{p/2} avg_y ||f(. + eta_l(y)) - f||_p^p`.
pub fn eval_cyclic(w: &Witness, p: f64, k: usize, m: u32, ell: u32, opts: &EvalOptions) -> Result<InequalityReport> {
    check_p(p)?;
    check_ml(m, ell)?;
    let resolved = resolve(w, p, opts.route, &opts.caps)?;
    let n = require_uniform(&resolved, 8 * ell * m, "eval_cyclic")?;
    check_nk(n, k)?;
    let plan = opts.subsets.resolve(n, k)?;
    let engine = ShiftEngine::new(&resolved, p, &opts.caps)?;
    let beta = beta_column(ell);
    let kn = k as f64 / n as f64;
    let constant = (4.0 * ell as f64).powf(p - 1.0);
    let lhs_law = ShiftLaw::uniform(n, beta.iter().map(|b| 4 * m as i64 * b).collect());
    let terms = Terms {
        lhs: engine.subset_law(&lhs_law, &plan)?,
        derivative: constant * kn * engine.coordinate_sum(&ShiftLaw::uniform(n, vec![1]))?,
        full: kn.powf(p / 2.0) * engine.product_law(&ShiftLaw::uniform(n, beta))?,
    };
    let params = ReportParams {
        n,
        k,
        m,
        ell: Some(ell),
        p,
        d: resolved.dim(),
        variant: None,
        derivative_mode: None,
    };
    InequalityReport::assemble(
        "cyclic",
        terms,
        (m as f64).powf(p),
        constant,
        plan.mode(),
        params,
        Some(threshold_met(n, k, m)),
        resolved.route(),
        vec![M_NOTE.to_string()],
    )
}

/// Schatten-valued inequality on `Z_{8m}^n`:
///
/// `lhs = avg_S avg_eps ||f(. + 4m eps_S) - f||_p^p`,
/// `rhs_derivative_term = (k/n) sum_j ||f(. + e_j) - f||_p^p`,
/// `rhs_full_term = (k/n)^{p/2} avg_eps ||f(. + eps) - f||_p^p`, `eps` in `{-1, 1}^n`.
pub fn eval_nc(w: &Witness, p: f64, k: usize, m: u32, opts: &EvalOptions) -> Result<InequalityReport> {
    check_p(p)?;
    check_ml(m, 1)?;
    let resolved = resolve(w, p, opts.route, &opts.caps)?;
    let n = require_uniform(&resolved, 8 * m, "eval_nc")?;
    check_nk(n, k)?;
    let plan = opts.subsets.resolve(n, k)?;
    let engine = ShiftEngine::new(&resolved, p, &opts.caps)?;
    let kn = k as f64 / n as f64;
    let terms = Terms {
        lhs: engine.subset_law(&ShiftLaw::uniform(n, vec![4 * m as i64]), &plan)?,
        derivative: kn * engine.coordinate_sum(&ShiftLaw::uniform(n, vec![1]))?,
        full: kn.powf(p / 2.0) * engine.product_law(&ShiftLaw::uniform(n, vec![-1, 1]))?,
    };
    let params = ReportParams {
        n,
        k,
        m,
        ell: None,
        p,
        d: resolved.dim(),
        variant: None,
        derivative_mode: None,
    };
    InequalityReport::assemble(
        "nc",
        terms,
        (m as f64).powf(p),
        1.0,
        plan.mode(),
        params,
        Some(threshold_met(n, k, m)),
        resolved.route(),
        vec![M_NOTE.to_string()],
    )
}

/// Torus inequalities evaluated on the grid `Z_N^n`, `N = 8lm`, where a grid
/// step is `1/N` of the period.
///
/// * uniform-eta: left shifts `4m beta_l(y)_S` (that is `beta_l(y)_S / 2l`
///   periods), right shifts `beta_l(t) e_j` and `beta_l(y)`.
/// * sign-eta: left shifts `N/2` on `S`, right shifts `l e_j` and `l eps`.
/// * classical-derivative: left and full terms as uniform-eta, derivative
///   term `(k/n) (1/2m)^p sum_j ||partial_j f||_p^p` with `partial_j` the
///   derivative along the period.
#[allow(clippy::too_many_arguments)]
pub fn eval_torus(
    w: &Witness,
    p: f64,
    k: usize,
    m: u32,
    variant: TorusVariant,
    ell: u32,
    opts: &EvalOptions,
) -> Result<InequalityReport> {
    check_p(p)?;
    check_ml(m, ell)?;
    let resolved = resolve(w, p, opts.route, &opts.caps)?;
    let big_n = 8 * ell * m;
    let n = require_uniform(&resolved, big_n, "eval_torus at this resolution")?;
    check_nk(n, k)?;
    let plan = opts.subsets.resolve(n, k)?;
    let engine = ShiftEngine::new(&resolved, p, &opts.caps)?;
    let kn = k as f64 / n as f64;
    let beta = beta_column(ell);
    let uniform_lhs = ShiftLaw::uniform(n, beta.iter().map(|b| 4 * m as i64 * b).collect());
    let uniform_full = ShiftLaw::uniform(n, beta.clone());
    let (terms, constant) = match variant {
        TorusVariant::UniformEta => (
            Terms {
                lhs: engine.subset_law(&uniform_lhs, &plan)?,
                derivative: kn * engine.coordinate_sum(&ShiftLaw::uniform(n, beta))?,
                full: kn.powf(p / 2.0) * engine.product_law(&uniform_full)?,
            },
            1.0,
        ),
        TorusVariant::SignEta => {
            let l = ell as i64;
            (
                Terms {
                    lhs: engine.subset_law(&ShiftLaw::uniform(n, vec![big_n as i64 / 2]), &plan)?,
                    derivative: kn * engine.coordinate_sum(&ShiftLaw::uniform(n, vec![l]))?,
                    full: kn.powf(p / 2.0) * engine.product_law(&ShiftLaw::uniform(n, vec![-l, l]))?,
                },
                1.0,
            )
        }
        TorusVariant::ClassicalDerivative => {
            // grid derivative times N is the derivative along the period
            let constant = (big_n as f64 / (2.0 * m as f64)).powf(p);
            let parts: Vec<f64> = (0..n)
                .map(|j| match &resolved {
                    Resolved::Dense(f) => lp_norm_pow(&derivative(f, j, DerivativeMode::ClassicalTorus)?, p),
                    Resolved::Sparse(g) => g.derivative(j, DerivativeMode::ClassicalTorus)?.norm_pow(p, &opts.caps),
                })
                .collect::<Result<_>>()?;
            (
                Terms {
                    lhs: engine.subset_law(&uniform_lhs, &plan)?,
                    derivative: constant * kn * pairwise_sum(&parts),
                    full: kn.powf(p / 2.0) * engine.product_law(&uniform_full)?,
                },
                constant,
            )
        }
    };
    let params = ReportParams {
        n,
        k,
        m,
        ell: Some(ell),
        p,
        d: resolved.dim(),
        variant: Some(variant.label().to_string()),
        derivative_mode: (variant == TorusVariant::ClassicalDerivative).then_some(DerivativeMode::ClassicalTorus),
    };
    InequalityReport::assemble(
        "torus",
        terms,
        (m as f64).powf(p),
        constant,
        plan.mode(),
        params,
        Some(threshold_met(n, k, m)),
        resolved.route(),
        Vec::new(),
    )
}
