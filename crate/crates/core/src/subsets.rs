//! Averaging over the `k`-subsets of `[n]`: exact enumeration or seeded sampling.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::SubsetMask;
use crate::numeric::binomial;

/// Largest `C(n, k)` averaged exactly under [`SubsetPolicy::Auto`].
pub const EXACT_LIMIT: u128 = 10_000;
/// Number of sampled subsets under [`SubsetPolicy::Auto`].
pub const SAMPLE_COUNT: usize = 10_000;
/// Largest explicit subset list ever materialized.
const LIST_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SubsetPolicy {
    /// Exact when `C(n, k) <= 10^4`, otherwise `10^4` sampled subsets.
    Auto {
        seed: u64,
    },
    Exact,
    Sampled {
        count: usize,
        seed: u64,
    },
}

impl Default for SubsetPolicy {
    fn default() -> Self {
        SubsetPolicy::Auto { seed: 0 }
    }
}

/// How a reported subset average was formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SubsetMode {
    Exact,
    Sampled { count: usize, seed: u64 },
}

/// Resolved averaging plan for fixed `(n, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetPlan {
    n: usize,
    k: usize,
    mode: SubsetMode,
    sampled: Vec<SubsetMask>,
}

impl SubsetPolicy {
    pub fn resolve(&self, n: usize, k: usize) -> Result<SubsetPlan> {
        if n == 0 || n > SubsetMask::MAX_RANK {
            return Err(Error::argument(format!(
                "n must lie in [1, {}], got {n}",
                SubsetMask::MAX_RANK
            )));
        }
        if k == 0 || k > n {
            return Err(Error::argument(format!("k must lie in [1, n] = [1, {n}], got {k}")));
        }
        let total = binomial(n, k);
        let (count, seed) = match *self {
            SubsetPolicy::Exact => return Ok(SubsetPlan::exact(n, k)),
            SubsetPolicy::Auto { .. } if total <= EXACT_LIMIT => return Ok(SubsetPlan::exact(n, k)),
            SubsetPolicy::Auto { seed } => (SAMPLE_COUNT, seed),
            SubsetPolicy::Sampled { count, seed } => (count, seed),
        };
        if count == 0 {
            return Err(Error::argument("sampled subset count must be positive"));
        }
        let sampled = if count as u128 >= total {
            all_k_subsets(n, k)?
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut seen = BTreeSet::new();
            while seen.len() < count {
                let bits = sample(&mut rng, n, k).iter().fold(0u64, |b, j| b | (1u64 << j));
                seen.insert(bits);
            }
            seen.into_iter().map(|b| SubsetMask::from_bits(n, b)).collect()
        };
        Ok(SubsetPlan {
            n,
            k,
            mode: SubsetMode::Sampled { count, seed },
            sampled,
        })
    }
}

impl SubsetPlan {
    fn exact(n: usize, k: usize) -> Self {
        SubsetPlan {
            n,
            k,
            mode: SubsetMode::Exact,
            sampled: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> SubsetMode {
        self.mode
    }

    pub fn is_exact(&self) -> bool {
        self.mode == SubsetMode::Exact
    }

    /// The sampled subsets (empty for exact plans).
    pub fn sampled(&self) -> &[SubsetMask] {
        &self.sampled
    }

    /// Every subset the average runs over, in increasing bit order.
    pub fn members(&self) -> Result<Vec<SubsetMask>> {
        if self.is_exact() {
            all_k_subsets(self.n, self.k)
        } else {
            Ok(self.sampled.clone())
        }
    }
}

/// All `k`-subsets of `[n]` in increasing bit order.
pub fn all_k_subsets(n: usize, k: usize) -> Result<Vec<SubsetMask>> {
    let total = binomial(n, k);
    if total > LIST_CAP {
        return Err(Error::Resource {
            what: "explicit subset list",
            requested: total,
            cap: LIST_CAP,
        });
    }
    if k == 0 {
        return Ok(vec![SubsetMask::empty(n)]);
    }
    if n >= 64 {
        return Err(Error::argument("explicit subset lists need n < 64"));
    }
    let mut out = Vec::with_capacity(total as usize);
    let limit = 1u64 << n;
    let mut v: u64 = (1u64 << k) - 1;
    while v < limit {
        out.push(SubsetMask::from_bits(n, v));
        // next bit pattern with the same popcount
        let t = v | (v - 1);
        let next = (t + 1) | (((!t & (!t).wrapping_neg()) - 1) >> (v.trailing_zeros() + 1));
        if next <= v {
            break;
        }
        v = next;
    }
    Ok(out)
}
