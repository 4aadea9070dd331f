//! Grid metrics `[m]_q^n`, the rounded circle map `h`, distortion of given
//! embeddings and the closed-form distortion and snowflake bounds.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::trial_rng;

/// Grids up to this many points are measured over every pair by default.
pub const EXACT_PAIR_LIMIT: usize = 20_000;
/// Pairs drawn when a large grid is sampled by default.
pub const DEFAULT_PAIR_SAMPLES: usize = 1_000_000;

/// `({1..m}^n, l_q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub m: u32,
    pub n: usize,
    pub q: f64,
}

impl GridSpec {
    pub fn new(m: u32, n: usize, q: f64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::argument("grid needs m, n >= 1"));
        }
        if !(q.is_finite() && q >= 2.0) {
            return Err(Error::argument(format!("grid exponent q must be >= 2, got {q}")));
        }
        Ok(GridSpec { m, n, q })
    }

    pub fn len(&self) -> u128 {
        (self.m as u128).saturating_pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Every point, last coordinate fastest.
    pub fn points(&self) -> Result<Vec<Vec<u32>>> {
        let len = self.len();
        if len > 1u128 << 26 {
            return Err(Error::Resource {
                what: "grid points",
                requested: len,
                cap: 1 << 26,
            });
        }
        let mut out = Vec::with_capacity(len as usize);
        let mut x = vec![1u32; self.n];
        loop {
            out.push(x.clone());
            let mut j = self.n;
            loop {
                if j == 0 {
                    return Ok(out);
                }
                j -= 1;
                if x[j] < self.m {
                    x[j] += 1;
                    break;
                }
                x[j] = 1;
            }
        }
    }

    fn check(&self, x: &[u32]) -> Result<()> {
        if x.len() != self.n || x.iter().any(|&c| c == 0 || c > self.m) {
            return Err(Error::argument(format!(
                "point {x:?} is not in [{}]^{}",
                self.m, self.n
            )));
        }
        Ok(())
    }
}

fn lq(diffs: impl Iterator<Item = f64>, q: f64) -> f64 {
    diffs.map(|d| d.abs().powf(q)).sum::<f64>().powf(1.0 / q)
}

/// `(sum_j |x_j - y_j|^q)^{1/q}`.
pub fn grid_dist(x: &[u32], y: &[u32], spec: &GridSpec) -> Result<f64> {
    spec.check(x)?;
    spec.check(y)?;
    Ok(lq(x.iter().zip(y).map(|(&a, &b)| a as f64 - b as f64), spec.q))
}

/// `h_m^n`: coordinate `x_j` of `Z_m^n` goes to
/// `(round(2m(1 + cos t)), round(2m(1 + sin t)))`, `t = 2 pi x_j / m`, a point of `{0..4m}^{2n}`.
pub fn circle_embed_h(x: &[u32], m: u32) -> Vec<u32> {
    let r = 2.0 * m as f64;
    x.iter()
        .flat_map(|&c| {
            let t = TAU * (c % m) as f64 / m as f64;
            [
                (r * (1.0 + t.cos())).round() as u32,
                (r * (1.0 + t.sin())).round() as u32,
            ]
        })
        .collect()
}

/// `m (sum_j |e^{2 pi i x_j / m} - e^{2 pi i y_j / m}|^q)^{1/q}`.
pub fn circle_dist(x: &[u32], y: &[u32], m: u32, q: f64) -> f64 {
    let chord = |a: u32, b: u32| {
        let t = TAU * (a as f64 - b as f64) / m as f64;
        2.0 * (t / 2.0).sin().abs()
    };
    m as f64 * lq(x.iter().zip(y).map(|(&a, &b)| chord(a, b)), q)
}

/// Two-sided bounds `c_1 <= ||h(x) - h(y)||_q / circle_dist(x, y) <= c_2` over all pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparability {
    pub m: u32,
    pub n: usize,
    pub q: f64,
    pub c1: f64,
    pub c2: f64,
    /// `c_2 / c_1`; infinite when `h` identifies two points.
    pub spread: f64,
    pub pairs: u64,
}

fn z_points(m: u32, n: usize) -> Result<Vec<Vec<u32>>> {
    Ok(GridSpec::new(m, n, 2.0)?
        .points()?
        .into_iter()
        .map(|x| x.into_iter().map(|c| c - 1).collect())
        .collect())
}

/// Exhaustive comparability of [`circle_embed_h`] on `Z_m^n`.
pub fn h_comparability(m: u32, n: usize, q: f64) -> Result<Comparability> {
    if m < 2 {
        return Err(Error::argument("comparability needs m >= 2"));
    }
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::argument(format!("q must be >= 1, got {q}")));
    }
    let pts = z_points(m, n)?;
    let imgs: Vec<Vec<u32>> = pts.iter().map(|x| circle_embed_h(x, m)).collect();
    let (c1, c2, pairs) = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = (f64::INFINITY, 0.0f64, 0u64);
            for j in i + 1..pts.len() {
                let target = lq(imgs[i].iter().zip(&imgs[j]).map(|(&a, &b)| a as f64 - b as f64), q);
                let r = target / circle_dist(&pts[i], &pts[j], m, q);
                acc = (acc.0.min(r), acc.1.max(r), acc.2 + 1);
            }
            acc
        })
        .reduce(
            || (f64::INFINITY, 0.0, 0),
            |a, b| (a.0.min(b.0), a.1.max(b.1), a.2 + b.2),
        );
    Ok(Comparability {
        m,
        n,
        q,
        c1,
        c2,
        spread: if c1 > 0.0 { c2 / c1 } else { f64::INFINITY },
        pairs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    UserSupplied,
    HComposition,
}

/// Images of the grid points (in [`GridSpec::points`] order) in `l_p^D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCandidate {
    pub images: Vec<Vec<f64>>,
    pub p: f64,
    pub provenance: Provenance,
}

impl EmbeddingCandidate {
    pub fn new(images: Vec<Vec<f64>>, p: f64, provenance: Provenance) -> Result<Self> {
        let dim = images.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::argument("embedding needs at least one point and D >= 1"));
        }
        if images.iter().any(|v| v.len() != dim) {
            return Err(Error::shape("embedding images have different dimensions"));
        }
        if images.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding image"));
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::argument(format!("target exponent must be >= 1, got {p}")));
        }
        Ok(EmbeddingCandidate { images, p, provenance })
    }

    /// `F = g o h` on `Z_m^n`, listed in the order of `Z_m^n` points.
    pub fn h_composition<G>(m: u32, n: usize, p: f64, g: G) -> Result<Self>
    where
        G: Fn(&[u32]) -> Vec<f64>,
    {
        let images = z_points(m, n)?.iter().map(|x| g(&circle_embed_h(x, m))).collect();
        Self::new(images, p, Provenance::HComposition)
    }

    /// The identity map scaled by `c`.
    pub fn scaled_identity(spec: &GridSpec, p: f64, c: f64) -> Result<Self> {
        let images = spec
            .points()?
            .into_iter()
            .map(|x| x.into_iter().map(|v| c * v as f64).collect())
            .collect();
        Self::new(images, p, Provenance::UserSupplied)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PairSample {
    /// Exact up to [`EXACT_PAIR_LIMIT`] points, else [`DEFAULT_PAIR_SAMPLES`] pairs.
    Auto {
        seed: u64,
    },
    Exact,
    Pairs {
        count: usize,
        seed: u64,
    },
}

impl Default for PairSample {
    fn default() -> Self {
        PairSample::Auto { seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    /// `expansion * contraction`; absent when two distinct points share an image.
    pub distortion: Option<f64>,
    /// Largest `||F(x) - F(y)||_p / d(x, y)`.
    pub expansion: f64,
    /// Largest `d(x, y) / ||F(x) - F(y)||_p`.
    pub contraction: Option<f64>,
    pub pairs: u64,
    pub exact: bool,
}

/// Distortion of `images` against the metric `dist` on point indices.
pub fn distortion_with<D>(images: &[Vec<f64>], p: f64, dist: D, sample: PairSample) -> Result<DistortionReport>
where
    D: Fn(usize, usize) -> f64 + Sync,
{
    let len = images.len();
    if len < 2 {
        return Err(Error::argument("distortion needs at least two points"));
    }
    let pair = |i: usize, j: usize| -> Option<(f64, f64)> {
        let d = dist(i, j);
        if d == 0.0 {
            return None;
        }
        let t = lq(images[i].iter().zip(&images[j]).map(|(a, b)| a - b), p);
        Some((t / d, if t > 0.0 { d / t } else { f64::INFINITY }))
    };
    let merge = |a: (f64, f64, u64), b: (f64, f64, u64)| (a.0.max(b.0), a.1.max(b.1), a.2 + b.2);
    let (exact, draws) = match sample {
        PairSample::Exact => (true, None),
        PairSample::Auto { .. } if len <= EXACT_PAIR_LIMIT => (true, None),
        PairSample::Auto { seed } => (false, Some((DEFAULT_PAIR_SAMPLES, seed))),
        PairSample::Pairs { count, seed } => (false, Some((count, seed))),
    };
    let (expansion, contraction, pairs) = match draws {
        None => (0..len)
            .into_par_iter()
            .map(|i| {
                (i + 1..len)
                    .filter_map(|j| pair(i, j))
                    .fold((0.0, 0.0, 0u64), |a, (e, c)| merge(a, (e, c, 1)))
            })
            .reduce(|| (0.0, 0.0, 0), merge),
        Some((count, seed)) => {
            if count == 0 {
                return Err(Error::argument("pair sample count must be at least 1"));
            }
            (0..count)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(seed, t as u64);
                    let i = rng.random_range(0..len);
                    let j = rng.random_range(0..len - 1);
                    let j = if j >= i { j + 1 } else { j };
                    pair(i, j).map_or((0.0, 0.0, 0), |(e, c)| (e, c, 1))
                })
                .reduce(|| (0.0, 0.0, 0), merge)
        }
    };
    let contraction = contraction.is_finite().then_some(contraction);
    Ok(DistortionReport {
        distortion: contraction.map(|c| expansion * c).filter(|_| pairs > 0),
        expansion,
        contraction,
        pairs,
        exact,
    })
}

/// Distortion of one candidate map on `[m]_q^n`; says nothing about other maps.
pub fn measure_distortion(emb: &EmbeddingCandidate, spec: &GridSpec, sample: PairSample) -> Result<DistortionReport> {
    let pts = spec.points()?;
    if emb.images.len() != pts.len() {
        return Err(Error::shape(format!(
            "embedding has {} images, grid has {} points",
            emb.images.len(),
            pts.len()
        )));
    }
    let q = spec.q;
    distortion_with(
        &emb.images,
        emb.p,
        |i, j| lq(pts[i].iter().zip(&pts[j]).map(|(&a, &b)| a as f64 - b as f64), q),
        sample,
    )
}

/// Distortion of `F = g o h` on `Z_m^n` with the circle metric.
pub fn measure_circle_distortion(emb: &EmbeddingCandidate, m: u32, n: usize, q: f64) -> Result<DistortionReport> {
    let pts = z_points(m, n)?;
    if emb.images.len() != pts.len() {
        return Err(Error::shape("embedding does not cover Z_m^n"));
    }
    distortion_with(
        &emb.images,
        emb.p,
        |i, j| circle_dist(&pts[i], &pts[j], m, q),
        PairSample::Exact,
    )
}

fn check_order(p: f64, q: f64) -> Result<()> {
    if !(p.is_finite() && q.is_finite() && 2.0 < q && q < p) {
        return Err(Error::argument(format!("need 2 < q < p, got p = {p}, q = {q}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionBound {
    pub bound: f64,
    /// `n^{(p-q)(q-2)/(q^2(p-2))}`.
    pub dimension_term: f64,
    /// `m^{1-2/q}`.
    pub scale_term: f64,
    pub exponent: f64,
    /// `ceil(n^{p(q-2)/(q(p-2))})`.
    pub k_choice: u64,
    /// `ceil(n^{(p-q)/(q(p-2))})`.
    pub m_choice: u64,
    /// `m_choice^2 k_choice >= n`.
    pub choices_meet_threshold: bool,
}

/// `min{n^{(p-q)(q-2)/(q^2(p-2))}, m^{1-2/q}}` with the matching `(k, m)` choices.
pub fn distortion_bound(n: u64, m: u64, p: f64, q: f64) -> Result<DistortionBound> {
    check_order(p, q)?;
    if n == 0 || m == 0 {
        return Err(Error::argument("n and m must be at least 1"));
    }
    let exponent = (p - q) * (q - 2.0) / (q * q * (p - 2.0));
    let dimension_term = (n as f64).powf(exponent);
    let scale_term = (m as f64).powf(1.0 - 2.0 / q);
    let k_choice = (n as f64).powf(p * (q - 2.0) / (q * (p - 2.0))).ceil() as u64;
    let m_choice = (n as f64).powf((p - q) / (q * (p - 2.0))).ceil() as u64;
    let lhs = (m_choice as u128) * (m_choice as u128) * (k_choice as u128);
    Ok(DistortionBound {
        bound: dimension_term.min(scale_term),
        dimension_term,
        scale_term,
        exponent,
        k_choice,
        m_choice,
        choices_meet_threshold: lhs >= n as u128,
    })
}

/// Largest snowflake exponent: `q / p`.
pub fn snowflake_bound(p: f64, q: f64) -> Result<f64> {
    check_order(p, q)?;
    Ok(q / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_distance_examples() {
        let s = GridSpec::new(5, 2, 2.0).unwrap();
        assert_eq!(grid_dist(&[2, 3], &[2, 3], &s).unwrap(), 0.0);
        assert_eq!(grid_dist(&[2, 3], &[2, 4], &s).unwrap(), 1.0);
        assert!((grid_dist(&[1, 1], &[3, 5], &s).unwrap() - 20f64.sqrt()).abs() < 1e-15);
        assert!(grid_dist(&[0, 1], &[1, 1], &s).is_err());
        assert!(grid_dist(&[6, 1], &[1, 1], &s).is_err());
    }

    #[test]
    fn grid_distance_is_a_metric() {
        let s = GridSpec::new(9, 3, 3.0).unwrap();
        let mut rng = trial_rng(1, 0);
        let mut pt = || (0..3).map(|_| rng.random_range(1..=9)).collect::<Vec<u32>>();
        for _ in 0..10_000 {
            let (x, y, z) = (pt(), pt(), pt());
            let d = |a: &[u32], b: &[u32]| grid_dist(a, b, &s).unwrap();
            assert_eq!(d(&x, &y), d(&y, &x));
            assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        }
    }

    #[test]
    fn h_examples() {
        assert_eq!(circle_embed_h(&[0], 4), vec![16, 8]);
        assert_eq!(circle_embed_h(&[1, 3], 4), circle_embed_h(&[1, 3], 4));
        let h = circle_embed_h(&[0, 1, 2, 3, 4, 5, 6, 7], 8);
        assert!(h.iter().all(|&v| v <= 32));
    }

    #[test]
    fn identity_has_distortion_one() {
        let s = GridSpec::new(4, 2, 3.0).unwrap();
        for c in [1.0, 2.5, -0.3] {
            let e = EmbeddingCandidate::scaled_identity(&s, 3.0, c).unwrap();
            let r = measure_distortion(&e, &s, PairSample::Exact).unwrap();
            assert!((r.distortion.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_map_has_no_distortion() {
        let s = GridSpec::new(3, 2, 2.0).unwrap();
        let e = EmbeddingCandidate::new(vec![vec![1.0]; 9], 2.0, Provenance::UserSupplied).unwrap();
        assert_eq!(measure_distortion(&e, &s, PairSample::Exact).unwrap().distortion, None);
    }

    #[test]
    fn sampled_pairs_bound_the_exact_value() {
        let s = GridSpec::new(5, 2, 2.0).unwrap();
        let images = s
            .points()
            .unwrap()
            .into_iter()
            .map(|x| vec![(x[0] as f64).powf(1.5), x[1] as f64])
            .collect();
        let e = EmbeddingCandidate::new(images, 4.0, Provenance::UserSupplied).unwrap();
        let exact = measure_distortion(&e, &s, PairSample::Exact)
            .unwrap()
            .distortion
            .unwrap();
        let sampled = measure_distortion(&e, &s, PairSample::Pairs { count: 500, seed: 2 })
            .unwrap()
            .distortion
            .unwrap();
        assert!(sampled <= exact + 1e-12 && sampled > 1.0);
    }

    #[test]
    fn bound_examples() {
        let b = distortion_bound(1 << 12, 2, 4.0, 3.0).unwrap();
        assert!((b.bound - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!((b.dimension_term - 2f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert!(b.choices_meet_threshold);
        let near = distortion_bound(1 << 20, 1000, 4.0, 4.0 - 1e-9).unwrap();
        assert!((near.dimension_term - 1.0).abs() < 1e-6);
        assert!(distortion_bound(10, 2, 4.0, 2.0).is_err());
        assert!(distortion_bound(10, 2, 4.0, 4.0).is_err());
        assert_eq!(snowflake_bound(4.0, 3.0).unwrap(), 0.75);
        assert_eq!(snowflake_bound(6.0, 3.0).unwrap(), 0.5);
        assert!(snowflake_bound(3.0, 3.0).is_err());
    }

    #[test]
    fn composition_respects_the_h_constants() {
        let (m, n, q, p) = (6u32, 2usize, 2.0, 4.0);
        let g = |v: &[u32]| v.iter().map(|&c| (c as f64 + 1.0).powf(1.3)).collect::<Vec<f64>>();
        let f = EmbeddingCandidate::h_composition(m, n, p, g).unwrap();
        let df = measure_circle_distortion(&f, m, n, q).unwrap().distortion.unwrap();
        let imgs: Vec<Vec<u32>> = z_points(m, n).unwrap().iter().map(|x| circle_embed_h(x, m)).collect();
        let g_imgs: Vec<Vec<f64>> = imgs.iter().map(|v| g(v)).collect();
        let dg = distortion_with(
            &g_imgs,
            p,
            |i, j| lq(imgs[i].iter().zip(&imgs[j]).map(|(&a, &b)| a as f64 - b as f64), q),
            PairSample::Exact,
        )
        .unwrap()
        .distortion
        .unwrap();
        let h = h_comparability(m, n, q).unwrap();
        assert!(df >= dg / h.spread - 1e-12);
    }
}
