//! Ratio maximisation over random witnesses and sharpness scans over `(n, m)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freealg::{random_element, FreeElement, ReducedWord};
use crate::inequality::{Domain, EvalOptions, EvalParams, Evaluator, InequalityReport, Registry, Witness};
use crate::lattice::{complex_gaussian, GroupShape, MultiIndex, ResourceCaps};
use crate::matrix::CMatrix;
use crate::sparse::TrigPoly;

/// Consecutive non-improving hill-climb steps before stopping.
pub const CLIMB_PATIENCE: usize = 200;
/// The perturbation scale halves after this many consecutive failures.
pub const CLIMB_DECAY_BATCH: usize = 50;
/// Tolerance of the witness round-trip check.
pub const ROUND_TRIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Random,
    #[default]
    RandomHillClimb,
}

/// How random witnesses are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    /// Lattice witnesses with `|G| d^2` up to this size are evaluated from dense storage.
    pub dense_limit: u128,
    /// Number of frequencies (or words) in sparse witnesses.
    pub support: usize,
    /// Longest word in free algebra witnesses.
    pub max_word_len: usize,
}

impl Default for WitnessSpec {
    fn default() -> Self {
        WitnessSpec {
            dense_limit: 4096,
            support: 6,
            max_word_len: 3,
        }
    }
}

fn default_perturbation() -> f64 {
    0.25
}

fn default_climb_steps() -> usize {
    5000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub evaluator: String,
    pub params: EvalParams,
    /// Number of random trials.
    pub budget: usize,
    #[serde(default)]
    pub strategy: Strategy,
    /// Initial hill-climb step, relative to the rms coefficient size.
    #[serde(default = "default_perturbation")]
    pub perturbation: f64,
    /// Hard limit on hill-climb steps.
    #[serde(default = "default_climb_steps")]
    pub max_climb_steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub witness: WitnessSpec,
    #[serde(default)]
    pub keep_trace: bool,
}

impl SearchConfig {
    pub fn new(evaluator: &str, params: EvalParams, budget: usize, seed: u64) -> Self {
        SearchConfig {
            evaluator: evaluator.to_string(),
            params,
            budget,
            strategy: Strategy::default(),
            perturbation: default_perturbation(),
            max_climb_steps: default_climb_steps(),
            seed,
            witness: WitnessSpec::default(),
            keep_trace: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::argument("search budget must be at least 1"));
        }
        if !(self.perturbation.is_finite() && self.perturbation > 0.0) {
            return Err(Error::argument("perturbation scale must be positive"));
        }
        if self.witness.support == 0 || self.witness.max_word_len == 0 {
            return Err(Error::argument("witness support and word length must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub ratio: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub evaluator: String,
    pub params: EvalParams,
    pub budget: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub best_ratio: f64,
    /// Random trial the best witness descends from.
    pub best_trial: usize,
    pub random_phase_best: f64,
    pub climb_steps: usize,
    pub climb_accepted: usize,
    pub failed_trials: usize,
    pub witness: Witness,
    pub report: InequalityReport,
    pub trace: Option<Vec<TrialRecord>>,
}

/// RNG stream `stream` of the generator seeded by `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A search state: Fourier coefficients of a lattice function or a free algebra element.
#[derive(Debug, Clone, PartialEq)]
enum Candidate {
    Lattice { f: TrigPoly, dense: bool },
    Free { f: FreeElement },
}

impl Candidate {
    fn witness(&self, caps: &ResourceCaps) -> Result<Witness> {
        match self {
            Candidate::Lattice { f, dense: true } => Ok(Witness::dense(f.to_dense(caps)?)),
            Candidate::Lattice { f, dense: false } => Ok(Witness::sparse(f.clone())),
            Candidate::Free { f } => Ok(Witness::free(f.clone())),
        }
    }

    fn len(&self) -> usize {
        match self {
            Candidate::Lattice { f, .. } => f.len(),
            Candidate::Free { f } => f.len(),
        }
    }

    fn rms(&self) -> f64 {
        let (sum, count) = match self {
            Candidate::Lattice { f, .. } => (
                f.terms().map(|(_, a)| a.frobenius().powi(2)).sum::<f64>(),
                f.len() * f.dim() * f.dim(),
            ),
            Candidate::Free { f } => (f.terms().map(|(_, c)| c.norm_sqr()).sum::<f64>(), f.len()),
        };
        if count == 0 {
            1.0
        } else {
            (sum / count as f64).sqrt()
        }
    }

    /// Adds a random step of size `step` to one coefficient.
    fn perturb<R: Rng>(&self, rng: &mut R, step: f64, mean_zero: bool) -> Result<Candidate> {
        let i = rng.random_range(0..self.len().max(1));
        let z = Complex64::new(step, 0.0);
        match self {
            Candidate::Lattice { f, dense } => {
                let dim = f.dim();
                let Some((w, _)) = f.terms().nth(i) else {
                    return Ok(self.clone());
                };
                let delta = gaussian_block(rng, dim).scale(z);
                let mut g = f.add(&TrigPoly::from_terms(f.shape().clone(), dim, [(w.clone(), delta)])?)?;
                if mean_zero {
                    g = g.without_mean();
                }
                Ok(Candidate::Lattice { f: g, dense: *dense })
            }
            Candidate::Free { f } => {
                let Some((w, _)) = f.terms().nth(i) else {
                    return Ok(self.clone());
                };
                let delta = FreeElement::delta(w.clone()).scale(complex_gaussian(rng) * z);
                let mut g = f.add(&delta)?;
                if mean_zero {
                    g = without_trace(&g)?;
                }
                Ok(Candidate::Free { f: g })
            }
        }
    }
}

fn without_trace(f: &FreeElement) -> Result<FreeElement> {
    FreeElement::from_terms(
        f.n(),
        f.modulus(),
        f.terms()
            .filter(|(w, _)| !w.is_identity())
            .map(|(w, c)| (w.clone(), *c)),
    )
}

fn gaussian_block<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let data = (0..dim * dim).map(|_| complex_gaussian(rng)).collect();
    CMatrix::from_row_major(dim, data).expect("block length matches")
}

/// Random frequency: each coordinate is zero with probability 1/2, otherwise
/// `+-a` with `P(a) = 2^-a` (the last admissible magnitude takes the tail).
fn random_frequency<R: Rng>(rng: &mut R, shape: &GroupShape) -> MultiIndex {
    let coords = shape
        .moduli()
        .iter()
        .map(|&q| {
            if q == 1 || rng.random_bool(0.5) {
                return 0;
            }
            let mut a = 1u32;
            while 2 * a < q && rng.random_bool(0.5) {
                a += 1;
            }
            if rng.random_bool(0.5) {
                a
            } else {
                q - a
            }
        })
        .collect();
    MultiIndex::from_reduced(coords)
}

/// Between 1 and `spec.support` distinct frequencies with complex Gaussian blocks.
fn random_candidate<R: Rng>(rng: &mut R, domain: &Domain, spec: &WitnessSpec, mean_zero: bool) -> Result<Candidate> {
    match domain {
        Domain::Lattice { shape, dim } => {
            let available = shape.order() - u128::from(mean_zero);
            if available == 0 {
                return Err(Error::argument("the group has no nonzero frequency"));
            }
            let count = rng
                .random_range(1..=spec.support)
                .min(available.min(usize::MAX as u128) as usize);
            let mut picked: Vec<MultiIndex> = Vec::with_capacity(count);
            let mut attempts = 0usize;
            while picked.len() < count {
                attempts += 1;
                if attempts > 100 * count + 1000 {
                    return Err(Error::argument("could not draw enough distinct frequencies"));
                }
                let w = random_frequency(rng, shape);
                if (mean_zero && w.is_zero()) || picked.contains(&w) {
                    continue;
                }
                picked.push(w);
            }
            let terms: Vec<(MultiIndex, CMatrix)> =
                picked.into_iter().map(|w| (w, gaussian_block(rng, *dim))).collect();
            let dd = (*dim * *dim) as u128;
            Ok(Candidate::Lattice {
                f: TrigPoly::from_terms(shape.clone(), *dim, terms)?,
                dense: shape.order().saturating_mul(dd) <= spec.dense_limit,
            })
        }
        Domain::Free { n, modulus } => {
            let mut f = random_element(*n, *modulus, spec.max_word_len, spec.support, rng.random())?;
            if mean_zero {
                f = without_trace(&f)?;
            }
            Ok(Candidate::Free { f })
        }
    }
}

/// One witness from the distribution the search draws its trials from.
pub fn random_witness(
    domain: &Domain,
    spec: &WitnessSpec,
    mean_zero: bool,
    seed: u64,
    caps: &ResourceCaps,
) -> Result<Witness> {
    random_candidate(&mut trial_rng(seed, 0), domain, spec, mean_zero)?.witness(caps)
}

fn evaluate(
    ev: &dyn Evaluator,
    c: &Candidate,
    params: &EvalParams,
    opts: &EvalOptions,
) -> Result<(Witness, InequalityReport)> {
    let w = c.witness(&opts.caps)?;
    let report = ev.evaluate(&w, params, opts)?;
    Ok((w, report))
}

/// Maximises `ratio` over `budget` random witnesses, then (optionally) hill-climbs
/// from the best one. Trial `t` draws from RNG stream `t`, so the result does
/// not depend on the number of worker threads.
///
/// Multiplier-family validation, when enabled, runs on the first trial witness and
/// on the final witness only; the family does not change between trials.
pub fn maximize_ratio(cfg: &SearchConfig, registry: &Registry, opts: &EvalOptions) -> Result<SearchResult> {
    cfg.validate()?;
    let ev = registry.get(&cfg.evaluator)?;
    let domain = ev.domain(&cfg.params)?;
    let mean_zero = ev.requires_mean_zero();
    if opts.validation.is_some() {
        let first = random_candidate(&mut trial_rng(cfg.seed, 0), &domain, &cfg.witness, mean_zero)?;
        if let Err(e @ Error::Validation(_)) = evaluate(ev, &first, &cfg.params, opts) {
            return Err(e);
        }
    }
    let fast = EvalOptions {
        validation: None,
        ..opts.clone()
    };
    let trial = |t: usize| -> Result<Option<f64>> {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let c = random_candidate(&mut rng, &domain, &cfg.witness, mean_zero)?;
        Ok(evaluate(ev, &c, &cfg.params, &fast)?.1.ratio)
    };
    let outcomes: Vec<Result<Option<f64>>> = (0..cfg.budget).into_par_iter().map(trial).collect();

    let mut best: Option<(usize, f64)> = None;
    let mut failed = 0usize;
    let mut first_error: Option<Error> = None;
    for (t, o) in outcomes.iter().enumerate() {
        match o {
            Ok(Some(r)) if best.is_none_or(|(_, b)| *r > b) => best = Some((t, *r)),
            Ok(_) => {}
            Err(e) => {
                failed += 1;
                if first_error.is_none() {
                    first_error = Some(e.clone());
                }
            }
        }
    }
    let Some((best_trial, random_best)) = best else {
        return Err(first_error.unwrap_or_else(|| Error::argument("no trial produced a ratio")));
    };
    let trace = cfg.keep_trace.then(|| {
        outcomes
            .iter()
            .enumerate()
            .map(|(t, o)| TrialRecord {
                trial: t,
                ratio: o.as_ref().ok().copied().flatten(),
                error: o.as_ref().err().map(|e| e.to_string()),
            })
            .collect()
    });

    let mut rng = trial_rng(cfg.seed, best_trial as u64);
    let mut current = random_candidate(&mut rng, &domain, &cfg.witness, mean_zero)?;
    let mut best_ratio = random_best;
    let (mut steps, mut accepted) = (0usize, 0usize);
    if cfg.strategy == Strategy::RandomHillClimb {
        let mut rng = trial_rng(cfg.seed, u64::MAX);
        let mut scale = cfg.perturbation;
        let mut failures = 0usize;
        while failures < CLIMB_PATIENCE && steps < cfg.max_climb_steps {
            steps += 1;
            let step = scale * current.rms();
            let improved = match current.perturb(&mut rng, step, mean_zero) {
                Ok(next) => match evaluate(ev, &next, &cfg.params, &fast) {
                    Ok((_, rep)) => match rep.ratio {
                        Some(r) if r > best_ratio => Some((next, r)),
                        _ => None,
                    },
                    Err(_) => None,
                },
                Err(_) => None,
            };
            match improved {
                Some((next, r)) => {
                    current = next;
                    best_ratio = r;
                    accepted += 1;
                    failures = 0;
                }
                None => {
                    failures += 1;
                    if failures % CLIMB_DECAY_BATCH == 0 {
                        scale *= 0.5;
                    }
                }
            }
        }
    }

    let (witness, report) = evaluate(ev, &current, &cfg.params, opts)?;
    let again = report
        .ratio
        .ok_or_else(|| Error::Validation("best witness lost its ratio on re-evaluation".into()))?;
    if (again - best_ratio).abs() > ROUND_TRIP_TOL * best_ratio.abs().max(1.0) {
        return Err(Error::Validation(format!(
            "witness round trip gave {again}, recorded {best_ratio}"
        )));
    }
    Ok(SearchResult {
        evaluator: cfg.evaluator.clone(),
        params: cfg.params.clone(),
        budget: cfg.budget,
        seed: cfg.seed,
        strategy: cfg.strategy,
        best_ratio,
        best_trial,
        random_phase_best: random_best,
        climb_steps: steps,
        climb_accepted: accepted,
        failed_trials: failed,
        witness,
        report,
        trace,
    })
}

/// Witness used in a sharpness scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScanWitness {
    /// `f(x) = sum_j exp(2 pi i x_j / q)` (`sum_j lambda(g_j)` on free algebras).
    ExtremalExponential,
    Search {
        budget: usize,
        seed: u64,
        #[serde(default)]
        strategy: Strategy,
    },
}

/// `sum_j chi_{e_j}` on the evaluator's domain.
pub fn extremal_witness(domain: &Domain) -> Result<Witness> {
    match domain {
        Domain::Lattice { shape, dim } => {
            let n = shape.rank();
            let terms = (0..n).map(|j| (MultiIndex::unit(n, j), CMatrix::identity(*dim)));
            Ok(Witness::sparse(TrigPoly::from_terms(shape.clone(), *dim, terms)?))
        }
        Domain::Free { n, modulus } => {
            let terms = (0..*n)
                .map(|j| Ok((ReducedWord::generator(*n, *modulus, j, 1)?, Complex64::new(1.0, 0.0))))
                .collect::<Result<Vec<_>>>()?;
            Ok(Witness::free(FreeElement::from_terms(*n, *modulus, terms)?))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: usize,
    pub k: usize,
    pub m: u32,
    pub ratio: Option<f64>,
    pub lhs: f64,
    pub rhs_derivative_term: f64,
    pub rhs_full_term: f64,
    pub m_factor: f64,
    pub threshold_met: Option<bool>,
}

/// Whether the ratio never increased along the scanned `m` for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monotonicity {
    pub n: usize,
    pub non_increasing_in_m: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub evaluator: String,
    pub witness: ScanWitness,
    pub rows: Vec<ScanRow>,
    pub monotonicity: Vec<Monotonicity>,
}

/// Ratio table over `n_list x m_list` at fixed `k`; other parameters come from `base`.
pub fn sharpness_scan(
    registry: &Registry,
    evaluator: &str,
    base: &EvalParams,
    n_list: &[usize],
    k: usize,
    m_list: &[u32],
    witness: ScanWitness,
    opts: &EvalOptions,
) -> Result<ScanTable> {
    if n_list.is_empty() || m_list.is_empty() {
        return Err(Error::argument("sharpness scan needs at least one n and one m"));
    }
    let ev = registry.get(evaluator)?;
    let mut rows = Vec::with_capacity(n_list.len() * m_list.len());
    for &n in n_list {
        for &m in m_list {
            let params = EvalParams {
                n,
                k,
                m,
                ..base.clone()
            };
            let report = match witness {
                ScanWitness::ExtremalExponential => {
                    let w = extremal_witness(&ev.domain(&params)?)?;
                    ev.evaluate(&w, &params, opts)?
                }
                ScanWitness::Search { budget, seed, strategy } => {
                    let cfg = SearchConfig {
                        strategy,
                        ..SearchConfig::new(evaluator, params.clone(), budget, seed)
                    };
                    maximize_ratio(&cfg, registry, opts)?.report
                }
            };
            rows.push(ScanRow {
                n,
                k,
                m,
                ratio: report.ratio,
                lhs: report.lhs,
                rhs_derivative_term: report.rhs_derivative_term,
                rhs_full_term: report.rhs_full_term,
                m_factor: report.m_factor,
                threshold_met: report.threshold_met,
            });
        }
    }
    let monotonicity = n_list
        .iter()
        .map(|&n| {
            let mut by_m: Vec<&ScanRow> = rows.iter().filter(|r| r.n == n).collect();
            by_m.sort_by_key(|r| r.m);
            let ratios: Vec<Option<f64>> = by_m.iter().map(|r| r.ratio).collect();
            Monotonicity {
                n,
                non_increasing_in_m: ratios.windows(2).all(|w| match (w[0], w[1]) {
                    (Some(a), Some(b)) => b <= a,
                    _ => false,
                }),
            }
        })
        .collect();
    Ok(ScanTable {
        evaluator: evaluator.to_string(),
        witness,
        rows,
        monotonicity,
    })
}
