//! Slow, direct reference computations on plain arrays.
//!
//! Nothing here shares code with `xplab`: transforms are direct sums,
//! conditional expectations average over explicit completions, norms go
//! through a dense SVD and every inequality term enumerates its whole index
//! group.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C = Complex64;

/// A function on `Z_{m_1} x ... x Z_{m_n}` with `d x d` blocks, last
/// coordinate fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub moduli: Vec<u32>,
    pub d: usize,
    pub values: Vec<C>,
}

pub fn all_points(moduli: &[u32]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &m in moduli {
        let mut next = Vec::with_capacity(out.len() * m as usize);
        for p in &out {
            for t in 0..m as i64 {
                let mut q = p.clone();
                q.push(t);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            go(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

pub fn beta(y: i64, ell: i64) -> i64 {
    if y <= ell - 1 {
        y - ell
    } else {
        y - ell + 1
    }
}

pub fn phase(t: f64) -> C {
    C::from_polar(1.0, TAU * t)
}

impl Table {
    pub fn from_fn<F: FnMut(&[i64]) -> Vec<C>>(moduli: &[u32], d: usize, mut f: F) -> Table {
        let values = all_points(moduli).iter().flat_map(|x| f(x)).collect();
        Table {
            moduli: moduli.to_vec(),
            d,
            values,
        }
    }

    pub fn order(&self) -> usize {
        self.moduli.iter().map(|&m| m as usize).product()
    }

    pub fn index(&self, x: &[i64]) -> usize {
        x.iter().zip(&self.moduli).fold(0usize, |acc, (&c, &m)| {
            acc * m as usize + c.rem_euclid(m as i64) as usize
        })
    }

    pub fn block(&self, i: usize) -> &[C] {
        let dd = self.d * self.d;
        &self.values[i * dd..(i + 1) * dd]
    }

    pub fn at(&self, x: &[i64]) -> &[C] {
        self.block(self.index(x))
    }

    /// `x -> f(x + v)`.
    pub fn shifted(&self, v: &[i64]) -> Table {
        Table::from_fn(&self.moduli, self.d, |x| {
            let y: Vec<i64> = x.iter().zip(v).map(|(a, b)| a + b).collect();
            self.at(&y).to_vec()
        })
    }

    pub fn minus(&self, other: &Table) -> Table {
        Table {
            moduli: self.moduli.clone(),
            d: self.d,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, z: C) -> Table {
        Table {
            moduli: self.moduli.clone(),
            d: self.d,
            values: self.values.iter().map(|a| a * z).collect(),
        }
    }

    pub fn add(&self, other: &Table) -> Table {
        self.minus(&other.scale(C::new(-1.0, 0.0)))
    }
}

pub fn schatten_pow(block: &[C], d: usize, p: f64) -> f64 {
    if d == 1 {
        return block[0].norm().powf(p);
    }
    let a = DMatrix::from_row_slice(d, d, block);
    a.singular_values().iter().map(|s| s.powf(p)).sum()
}

/// `|G|^{-1} sum_x ||f(x)||_{S_p}^p`.
pub fn lp_pow(t: &Table, p: f64) -> f64 {
    (0..t.order()).map(|i| schatten_pow(t.block(i), t.d, p)).sum::<f64>() / t.order() as f64
}

pub fn shift_diff_pow(t: &Table, v: &[i64], p: f64) -> f64 {
    lp_pow(&t.shifted(v).minus(t), p)
}

fn pairing(w: &[i64], x: &[i64], moduli: &[u32]) -> f64 {
    w.iter()
        .zip(x)
        .zip(moduli)
        .map(|((a, b), &m)| (a * b).rem_euclid(m as i64) as f64 / m as f64)
        .sum()
}

/// `F(w) = |G|^{-1} sum_x f(x) exp(-2 pi i <w, x>)`.
pub fn dft(t: &Table) -> Table {
    let points = all_points(&t.moduli);
    let inv = 1.0 / t.order() as f64;
    Table::from_fn(&t.moduli, t.d, |w| {
        let mut acc = vec![C::new(0.0, 0.0); t.d * t.d];
        for x in &points {
            let ph = phase(-pairing(w, x, &t.moduli));
            for (a, v) in acc.iter_mut().zip(t.at(x)) {
                *a += v * ph;
            }
        }
        acc.iter().map(|a| a * inv).collect()
    })
}

/// `f(x) = sum_w F(w) exp(2 pi i <w, x>)`.
pub fn idft(big_f: &Table) -> Table {
    let points = all_points(&big_f.moduli);
    Table::from_fn(&big_f.moduli, big_f.d, |x| {
        let mut acc = vec![C::new(0.0, 0.0); big_f.d * big_f.d];
        for w in &points {
            let ph = phase(pairing(w, x, &big_f.moduli));
            for (a, v) in acc.iter_mut().zip(big_f.at(w)) {
                *a += v * ph;
            }
        }
        acc
    })
}

/// Averages over every completion of `x` outside `keep`.
pub fn cond_expect(t: &Table, keep: &[usize]) -> Table {
    let n = t.moduli.len();
    let free: Vec<usize> = (0..n).filter(|j| !keep.contains(j)).collect();
    let free_moduli: Vec<u32> = free.iter().map(|&j| t.moduli[j]).collect();
    let completions = all_points(&free_moduli);
    let inv = 1.0 / completions.len() as f64;
    Table::from_fn(&t.moduli, t.d, |x| {
        let mut acc = vec![C::new(0.0, 0.0); t.d * t.d];
        for z in &completions {
            let mut y = x.to_vec();
            for (&j, &zj) in free.iter().zip(z) {
                y[j] = zj;
            }
            for (a, v) in acc.iter_mut().zip(t.at(&y)) {
                *a += v * inv;
            }
        }
        acc
    })
}

/// Derivatives, computed independently of any library code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    Spectral,
    Hypercube,
    Classical,
}

pub fn derivative(t: &Table, j: usize, mode: Deriv) -> Table {
    let n = t.moduli.len();
    match mode {
        Deriv::Spectral => {
            let others: Vec<usize> = (0..n).filter(|&i| i != j).collect();
            t.minus(&cond_expect(t, &others))
        }
        Deriv::Hypercube => {
            let mut e = vec![0i64; n];
            e[j] = 1;
            t.minus(&t.shifted(&e))
        }
        Deriv::Classical => {
            let big_f = dft(t);
            let m = t.moduli[j] as i64;
            let scaled = Table::from_fn(&t.moduli, t.d, |w| {
                let mut c = w[j].rem_euclid(m);
                if c > m / 2 {
                    c -= m;
                }
                let s = C::new(0.0, TAU * c as f64 / m as f64);
                big_f.at(w).iter().map(|v| v * s).collect()
            });
            idft(&scaled)
        }
    }
}

/// Inequality terms by full enumeration of every index group.
pub mod brute {
    use super::*;

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Terms {
        pub lhs: f64,
        pub deriv: f64,
        pub full: f64,
    }

    fn mean(values: impl Iterator<Item = f64>) -> f64 {
        let v: Vec<f64> = values.collect();
        v.iter().sum::<f64>() / v.len() as f64
    }

    fn restrict(v: &[i64], s: &[usize]) -> Vec<i64> {
        (0..v.len()).map(|j| if s.contains(&j) { v[j] } else { 0 }).collect()
    }

    fn unit(n: usize, j: usize, c: i64) -> Vec<i64> {
        let mut e = vec![0i64; n];
        e[j] = c;
        e
    }

    /// Balanced truncations with the given derivative.
    pub fn truncations(t: &Table, p: f64, k: usize, mode: Deriv) -> Terms {
        let n = t.moduli.len();
        let kn = k as f64 / n as f64;
        Terms {
            lhs: mean(k_subsets(n, k).iter().map(|s| lp_pow(&cond_expect(t, s), p))),
            deriv: kn * (0..n).map(|j| lp_pow(&derivative(t, j, mode), p)).sum::<f64>(),
            full: kn.powf(p / 2.0) * lp_pow(t, p),
        }
    }

    /// Averages `||f(. + v) - f||^p` over `S` and over every `y` in `Z_{2l}^n`.
    fn subset_shift_average(t: &Table, p: f64, k: usize, ell: i64, image: impl Fn(i64) -> i64) -> f64 {
        let n = t.moduli.len();
        let ys = all_points(&vec![2 * ell as u32; n]);
        mean(k_subsets(n, k).iter().map(|s| {
            mean(ys.iter().map(|y| {
                let v: Vec<i64> = y.iter().map(|&yj| image(yj)).collect();
                shift_diff_pow(t, &restrict(&v, s), p)
            }))
        }))
    }

    fn full_shift_average(t: &Table, p: f64, ell: i64, image: impl Fn(i64) -> i64) -> f64 {
        let n = t.moduli.len();
        let ys = all_points(&vec![2 * ell as u32; n]);
        mean(ys.iter().map(|y| {
            let v: Vec<i64> = y.iter().map(|&yj| image(yj)).collect();
            shift_diff_pow(t, &v, p)
        }))
    }

    fn unit_sum(t: &Table, p: f64, c: i64) -> f64 {
        let n = t.moduli.len();
        (0..n).map(|j| shift_diff_pow(t, &unit(n, j, c), p)).sum()
    }

    pub fn cyclic(t: &Table, p: f64, k: usize, m: i64, ell: i64) -> Terms {
        let n = t.moduli.len();
        let kn = k as f64 / n as f64;
        Terms {
            lhs: subset_shift_average(t, p, k, ell, |y| 4 * m * beta(y, ell)),
            deriv: (4.0 * ell as f64).powf(p - 1.0) * kn * unit_sum(t, p, 1),
            full: kn.powf(p / 2.0) * full_shift_average(t, p, ell, |y| beta(y, ell)),
        }
    }

    /// Signs enumerated as `y in Z_2^n`, `eps = 2y - 1`.
    pub fn nc(t: &Table, p: f64, k: usize, m: i64) -> Terms {
        let n = t.moduli.len();
        let kn = k as f64 / n as f64;
        Terms {
            lhs: subset_shift_average(t, p, k, 1, |y| 4 * m * (2 * y - 1)),
            deriv: kn * unit_sum(t, p, 1),
            full: kn.powf(p / 2.0) * full_shift_average(t, p, 1, |y| 2 * y - 1),
        }
    }

    pub fn torus_uniform(t: &Table, p: f64, k: usize, m: i64, ell: i64) -> Terms {
        let n = t.moduli.len();
        let kn = k as f64 / n as f64;
        let per_coord: f64 = (0..n)
            .map(|j| mean((0..2 * ell).map(|y| shift_diff_pow(t, &unit(n, j, beta(y, ell)), p))))
            .sum();
        Terms {
            lhs: subset_shift_average(t, p, k, ell, |y| 4 * m * beta(y, ell)),
            deriv: kn * per_coord,
            full: kn.powf(p / 2.0) * full_shift_average(t, p, ell, |y| beta(y, ell)),
        }
    }

    pub fn torus_sign(t: &Table, p: f64, k: usize, m: i64, ell: i64) -> Terms {
        let n = t.moduli.len();
        let kn = k as f64 / n as f64;
        let big_n = 8 * ell * m;
        Terms {
            lhs: mean(k_subsets(n, k).iter().map(|s| {
                let v: Vec<i64> = (0..n).map(|j| if s.contains(&j) { big_n / 2 } else { 0 }).collect();
                shift_diff_pow(t, &v, p)
            })),
            deriv: kn * unit_sum(t, p, ell),
            full: kn.powf(p / 2.0) * full_shift_average(t, p, 1, |y| ell * (2 * y - 1)),
        }
    }

    pub fn torus_classical(t: &Table, p: f64, k: usize, m: i64, ell: i64) -> Terms {
        let n = t.moduli.len();
        let kn = k as f64 / n as f64;
        let big_n = (8 * ell * m) as f64;
        let deriv: f64 = (0..n)
            .map(|j| {
                lp_pow(
                    &derivative(t, j, Deriv::Classical).scale(C::new(big_n / (2.0 * m as f64), 0.0)),
                    p,
                )
            })
            .sum();
        Terms {
            lhs: subset_shift_average(t, p, k, ell, |y| 4 * m * beta(y, ell)),
            deriv: kn * deriv,
            full: kn.powf(p / 2.0) * full_shift_average(t, p, ell, |y| beta(y, ell)),
        }
    }

    /// Abstract form on `(Z_{2l}^n, Z_{8lm}^n)` with translations; the
    /// derivative term differentiates `y -> f(. + 2 beta(y))` in `y`.
    pub fn theorem_a(t: &Table, p: f64, k: usize, m: i64, ell: i64, mode: Deriv) -> Terms {
        let n = t.moduli.len();
        let kn = k as f64 / n as f64;
        let ys = all_points(&vec![2 * ell as u32; n]);
        let g = |y: &[i64]| {
            let v: Vec<i64> = y.iter().map(|&yj| 2 * beta(yj, ell)).collect();
            t.shifted(&v)
        };
        let deriv: f64 = mean(ys.iter().map(|y| {
            (0..n)
                .map(|j| {
                    let other = match mode {
                        Deriv::Hypercube => {
                            let mut z = y.clone();
                            z[j] = 1 - z[j];
                            g(&z)
                        }
                        _ => {
                            let mut acc = t.scale(C::new(0.0, 0.0));
                            for s in 0..2 * ell {
                                let mut z = y.clone();
                                z[j] = s;
                                acc = acc.add(&g(&z).scale(C::new(1.0 / (2 * ell) as f64, 0.0)));
                            }
                            acc
                        }
                    };
                    lp_pow(&g(y).minus(&other), p)
                })
                .sum::<f64>()
        }));
        Terms {
            lhs: subset_shift_average(t, p, k, ell, |y| 4 * m * beta(y, ell)),
            deriv: kn * deriv,
            full: kn.powf(p / 2.0) * full_shift_average(t, p, ell, |y| beta(y, ell)),
        }
    }
}

/// Free products and free groups by explicit word expansion.
pub mod free {
    use super::*;

    /// `(generator, exponent)` letters; `modulus = None` for the free group.
    pub type Word = Vec<(usize, i64)>;

    pub fn reduce(letters: &[(usize, i64)], modulus: Option<i64>) -> Word {
        let norm = |e: i64| match modulus {
            Some(q) => e.rem_euclid(q),
            None => e,
        };
        let mut stack: Word = Vec::new();
        for &(g, e) in letters {
            let e = norm(e);
            if e == 0 {
                continue;
            }
            match stack.last_mut() {
                Some(top) if top.0 == g => {
                    let s = norm(top.1 + e);
                    if s == 0 {
                        stack.pop();
                    } else {
                        top.1 = s;
                    }
                }
                _ => stack.push((g, e)),
            }
        }
        stack
    }

    pub fn inverse(w: &[(usize, i64)]) -> Word {
        w.iter().rev().map(|&(g, e)| (g, -e)).collect()
    }

    /// `exp(2 pi i sum_j u_j s_j / big_n)` with `s_j` the exponent sums.
    pub fn chi(w: &[(usize, i64)], u: &[i64], big_n: i64) -> C {
        let total: i64 = w.iter().map(|&(g, e)| u[g] * e).sum();
        phase(total.rem_euclid(big_n) as f64 / big_n as f64)
    }

    /// `tau((a* a)^r)`: sum over every `2r`-tuple of terms whose alternating
    /// product `w_1^{-1} w_2 w_3^{-1} ... w_{2r}` reduces to the empty word.
    pub fn trace_moment(terms: &[(Word, C)], r: usize, modulus: Option<i64>) -> f64 {
        let s = terms.len();
        let total = s.pow(2 * r as u32);
        let mut acc = C::new(0.0, 0.0);
        for code in 0..total {
            let mut c = code;
            let mut letters: Vec<(usize, i64)> = Vec::new();
            let mut coeff = C::new(1.0, 0.0);
            for pos in 0..2 * r {
                let i = c % s;
                c /= s;
                let (w, a) = &terms[i];
                if pos % 2 == 0 {
                    letters.extend(inverse(w));
                    coeff *= a.conj();
                } else {
                    letters.extend(w.iter().copied());
                    coeff *= a;
                }
            }
            if reduce(&letters, modulus).is_empty() {
                acc += coeff;
            }
        }
        acc.re
    }

    /// Coefficients of `M_u a - a`.
    pub fn multiplier_difference(terms: &[(Word, C)], u: &[i64], big_n: i64) -> Vec<(Word, C)> {
        terms
            .iter()
            .map(|(w, a)| (w.clone(), a * (chi(w, u, big_n) - C::new(1.0, 0.0))))
            .collect()
    }
}
