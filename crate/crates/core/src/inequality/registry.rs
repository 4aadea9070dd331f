use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    eval_cyclic, eval_free_transfer, eval_nc, eval_np, eval_rp1, eval_theorem_a, eval_torus, EvalOptions,
    InequalityReport, TheoremAMode, TorusVariant, Witness,
};
use crate::error::{Error, Result};
use crate::freealg::{FreeCharacters, Modulus};
use crate::lattice::GroupShape;
use crate::operators::{DerivativeMode, EtaMap, Translations};

/// Which free algebra `free_transfer` witnesses live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreeModulusKind {
    /// `Z_{8m}^{*n}`.
    #[default]
    FreeProduct,
    /// `F_n`.
    FreeGroup,
}

fn one() -> u32 {
    1
}

fn one_usize() -> usize {
    1
}

fn spectral() -> DerivativeMode {
    DerivativeMode::Spectral
}

/// Parameters shared by every evaluator; each one reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalParams {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    #[serde(default = "one")]
    pub m: u32,
    #[serde(default = "one")]
    pub ell: u32,
    #[serde(default = "one_usize")]
    pub d: usize,
    #[serde(default = "spectral")]
    pub derivative_mode: DerivativeMode,
    #[serde(default)]
    pub torus_variant: TorusVariant,
    #[serde(default)]
    pub theorem_a_mode: TheoremAMode,
    #[serde(default)]
    pub free_modulus: FreeModulusKind,
}

impl EvalParams {
    pub fn new(n: usize, k: usize, p: f64) -> Self {
        EvalParams {
            n,
            k,
            p,
            m: 1,
            ell: 1,
            d: 1,
            derivative_mode: DerivativeMode::Spectral,
            torus_variant: TorusVariant::default(),
            theorem_a_mode: TheoremAMode::default(),
            free_modulus: FreeModulusKind::default(),
        }
    }
}

/// Where an evaluator's witnesses live.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Lattice { shape: GroupShape, dim: usize },
    Free { n: usize, modulus: Modulus },
}

pub trait Evaluator: Send + Sync {
    fn id(&self) -> &'static str;

    fn summary(&self) -> &'static str;

    /// The [`EvalParams`] fields this evaluator reads.
    fn parameters(&self) -> &'static [&'static str];

    fn requires_mean_zero(&self) -> bool {
        false
    }

    fn domain(&self, params: &EvalParams) -> Result<Domain>;

    fn evaluate(&self, witness: &Witness, params: &EvalParams, opts: &EvalOptions) -> Result<InequalityReport>;
}

fn lattice(n: usize, modulus: u32, dim: usize) -> Result<Domain> {
    if dim == 0 {
        return Err(Error::argument("d must be at least 1"));
    }
    Ok(Domain::Lattice {
        shape: GroupShape::uniform(n, modulus)?,
        dim,
    })
}

struct Np;

impl Evaluator for Np {
    fn id(&self) -> &'static str {
        "np"
    }

    fn summary(&self) -> &'static str {
        "balanced Fourier truncations on Z_2^n, hypercube differences"
    }

    fn requires_mean_zero(&self) -> bool {
        true
    }

    fn parameters(&self) -> &'static [&'static str] {
        &["n", "k", "p"]
    }

    fn domain(&self, params: &EvalParams) -> Result<Domain> {
        lattice(params.n, 2, 1)
    }

    fn evaluate(&self, w: &Witness, params: &EvalParams, opts: &EvalOptions) -> Result<InequalityReport> {
        eval_np(w, params.p, params.k, opts)
    }
}

struct Rp1;

impl Evaluator for Rp1 {
    fn id(&self) -> &'static str {
        "rp1"
    }

    fn summary(&self) -> &'static str {
        "balanced truncations on Z_{2l}^n with matrix fibers"
    }

    fn requires_mean_zero(&self) -> bool {
        true
    }

    fn parameters(&self) -> &'static [&'static str] {
        &["n", "k", "p", "ell", "d", "derivative_mode"]
    }

    fn domain(&self, params: &EvalParams) -> Result<Domain> {
        lattice(params.n, 2 * params.ell, params.d)
    }

    fn evaluate(&self, w: &Witness, params: &EvalParams, opts: &EvalOptions) -> Result<InequalityReport> {
        eval_rp1(w, params.p, params.k, params.derivative_mode, opts)
    }
}

struct TheoremA;

impl Evaluator for TheoremA {
    fn id(&self) -> &'static str {
        "theorem_a"
    }

    fn summary(&self) -> &'static str {
        "generic pair: Z_{2l}^n into Z_{8lm}^n by beta_l with translations, or free characters"
    }

    fn parameters(&self) -> &'static [&'static str] {
        &["n", "k", "m", "ell", "p", "d", "theorem_a_mode"]
    }

    fn domain(&self, params: &EvalParams) -> Result<Domain> {
        lattice(params.n, 8 * params.ell * params.m, params.d)
    }

    fn evaluate(&self, w: &Witness, params: &EvalParams, opts: &EvalOptions) -> Result<InequalityReport> {
        let (n, p, k, m, mode) = (params.n, params.p, params.k, params.m, params.theorem_a_mode);
        match w {
            Witness::Dense { f } => {
                let eta = EtaMap::beta(n, params.ell, 8 * params.ell * m)?;
                eval_theorem_a(f, &Translations::new(f.shape().clone()), &eta, mode, p, k, m, opts)
            }
            Witness::Sparse { f } => {
                let eta = EtaMap::beta(n, params.ell, 8 * params.ell * m)?;
                eval_theorem_a(f, &Translations::new(f.shape().clone()), &eta, mode, p, k, m, opts)
            }
            Witness::Free { f } => {
                let eta = EtaMap::beta(n, params.ell, 8 * m)?;
                eval_theorem_a(f, &FreeCharacters::new(n, m)?, &eta, mode, p, k, m, opts)
            }
        }
    }
}

struct Cyclic;

impl Evaluator for Cyclic {
    fn id(&self) -> &'static str {
        "cyclic"
    }

    fn summary(&self) -> &'static str {
        "cyclic inequality on Z_{8lm}^n"
    }

    fn parameters(&self) -> &'static [&'static str] {
        &["n", "k", "m", "ell", "p", "d"]
    }

    fn domain(&self, params: &EvalParams) -> Result<Domain> {
        lattice(params.n, 8 * params.ell * params.m, params.d)
    }

    fn evaluate(&self, w: &Witness, params: &EvalParams, opts: &EvalOptions) -> Result<InequalityReport> {
        eval_cyclic(w, params.p, params.k, params.m, params.ell, opts)
    }
}

struct Torus;

impl Evaluator for Torus {
    fn id(&self) -> &'static str {
        "torus"
    }

    fn summary(&self) -> &'static str {
        "torus inequalities on the grid Z_{8lm}^n"
    }

    fn parameters(&self) -> &'static [&'static str] {
        &["n", "k", "m", "ell", "p", "d", "torus_variant"]
    }

    fn domain(&self, params: &EvalParams) -> Result<Domain> {
        lattice(params.n, 8 * params.ell * params.m, params.d)
    }

    fn evaluate(&self, w: &Witness, params: &EvalParams, opts: &EvalOptions) -> Result<InequalityReport> {
        eval_torus(w, params.p, params.k, params.m, params.torus_variant, params.ell, opts)
    }
}

struct Nc;

impl Evaluator for Nc {
    fn id(&self) -> &'static str {
        "nc"
    }

    fn summary(&self) -> &'static str {
        "Schatten-valued inequality on Z_{8m}^n"
    }

    fn parameters(&self) -> &'static [&'static str] {
        &["n", "k", "m", "p", "d"]
    }

    fn domain(&self, params: &EvalParams) -> Result<Domain> {
        lattice(params.n, 8 * params.m, params.d)
    }

    fn evaluate(&self, w: &Witness, params: &EvalParams, opts: &EvalOptions) -> Result<InequalityReport> {
        eval_nc(w, params.p, params.k, params.m, opts)
    }
}

struct FreeTransfer;

impl Evaluator for FreeTransfer {
    fn id(&self) -> &'static str {
        "free_transfer"
    }

    fn summary(&self) -> &'static str {
        "transferred inequality on the algebra of Z_{8m}^{*n} or F_n"
    }

    fn parameters(&self) -> &'static [&'static str] {
        &["n", "k", "m", "p", "free_modulus"]
    }

    fn domain(&self, params: &EvalParams) -> Result<Domain> {
        let modulus = match params.free_modulus {
            FreeModulusKind::FreeProduct => Modulus::for_m(params.m)?,
            FreeModulusKind::FreeGroup => Modulus::Infinite,
        };
        Ok(Domain::Free { n: params.n, modulus })
    }

    fn evaluate(&self, w: &Witness, params: &EvalParams, opts: &EvalOptions) -> Result<InequalityReport> {
        match w {
            Witness::Free { f } => eval_free_transfer(f, params.p, params.k, params.m, opts),
            _ => Err(Error::argument("free_transfer needs a free algebra witness")),
        }
    }
}

/// Evaluators keyed by id, listed in sorted order.
pub struct Registry {
    entries: BTreeMap<&'static str, Box<dyn Evaluator>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            entries: BTreeMap::new(),
        }
    }

    /// Every built-in evaluator.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        let all: Vec<Box<dyn Evaluator>> = vec![
            Box::new(Np),
            Box::new(Rp1),
            Box::new(TheoremA),
            Box::new(Cyclic),
            Box::new(Torus),
            Box::new(Nc),
            Box::new(FreeTransfer),
        ];
        for e in all {
            r.register(e).expect("built-in ids are distinct");
        }
        r
    }

    pub fn register(&mut self, evaluator: Box<dyn Evaluator>) -> Result<()> {
        let id = evaluator.id();
        if self.entries.contains_key(id) {
            return Err(Error::argument(format!("evaluator {id} is already registered")));
        }
        self.entries.insert(id, evaluator);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&dyn Evaluator> {
        self.entries
            .get(id)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::argument(format!("unknown evaluator {id}; known: {}", self.ids().join(", "))))
    }

    pub fn ids(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Evaluator> {
        self.entries.values().map(|b| b.as_ref())
    }
}

impl Default for Registry {
    fn default() -> Self {
        Self::standard()
    }
}
