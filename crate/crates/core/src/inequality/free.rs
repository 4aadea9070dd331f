use super::{eval_theorem_a, EvalOptions, InequalityReport, TheoremAMode};
use crate::error::{Error, Result};
use crate::freealg::{FreeCharacters, FreeElement, Modulus};
use crate::norms::even_half;
use crate::operators::EtaMap;

/// Transferred inequality on the algebra of `Z_{8m}^{*n}` (or `F_n`):
///
/// `lhs = avg_S avg_eps ||M_{4m eps_S} f - f||_p^p`,
/// `rhs_derivative_term = (k/n) sum_j ||M_{e_j} f - f||_p^p`,
/// `rhs_full_term = (k/n)^{p/2} avg_eps ||M_eps f - f||_p^p`,
/// with `eps` in `{-1, 1}^n` and every norm an exact trace moment.
pub fn eval_free_transfer(f: &FreeElement, p: f64, k: usize, m: u32, opts: &EvalOptions) -> Result<InequalityReport> {
    if even_half(p).is_none() {
        return Err(Error::argument(format!("free algebra norms need even p, got {p}")));
    }
    let modulus = f.modulus();
    let mut notes = Vec::new();
    match modulus {
        Modulus::Cyclic(q) if q == 8 * m => {}
        Modulus::Infinite => notes.push(format!("free group: characters at theta = u / {}", 8 * m)),
        Modulus::Cyclic(q) => {
            return Err(Error::shape(format!(
                "element lives in Z_{q}^*n, expected modulus {}",
                8 * m
            )));
        }
    }
    let n = f.n();
    let family = FreeCharacters::new(n, m)?;
    let eta = EtaMap::beta(n, 1, 8 * m)?;
    let mut report = eval_theorem_a(f, &family, &eta, TheoremAMode::UnitShift, p, k, m, opts)?;
    report.evaluator = "free_transfer".to_string();
    report.params.variant = Some(
        match modulus {
            Modulus::Infinite => "free-group",
            Modulus::Cyclic(_) => "free-product",
        }
        .to_string(),
    );
    report.notes.extend(notes);
    Ok(report)
}
