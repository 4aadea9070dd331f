use num_complex::Complex64;
use xplab::freealg::{freelp_norm_pow_even, random_element, FreeElement, Modulus};
use xplab::inequality::{eval_free_transfer, EvalOptions, RouteTaken};
use xplab::ResourceCaps;
use xplab_oracles::free::{self, Word};
use xplab_oracles::{all_points, k_subsets, phase};

fn terms(a: &FreeElement) -> Vec<(Word, Complex64)> {
    a.terms()
        .map(|(w, c)| (w.letters().iter().map(|&(g, e)| (g as usize, e)).collect(), *c))
        .collect()
}

fn modulus_of(a: &FreeElement) -> Option<i64> {
    match a.modulus() {
        Modulus::Cyclic(q) => Some(q as i64),
        Modulus::Infinite => None,
    }
}

fn diff_pow(t: &[(Word, Complex64)], u: &[i64], big_n: i64, r: usize, modulus: Option<i64>) -> f64 {
    free::trace_moment(&free::multiplier_difference(t, u, big_n), r, modulus)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs()))
}

pub fn norms_match_word_expansion() {
    let caps = ResourceCaps::default();
    for (seed, modulus) in [
        (1, Modulus::Cyclic(8)),
        (2, Modulus::Cyclic(16)),
        (3, Modulus::Infinite),
    ] {
        let a = random_element(2, modulus, 3, 5, seed).unwrap();
        for r in 1..=3 {
            let got = freelp_norm_pow_even(&a, 2.0 * r as f64, &caps).unwrap();
            let want = free::trace_moment(&terms(&a), r, modulus_of(&a));
            assert!(close(got, want), "{modulus:?} r={r}: {got} vs {want}");
        }
    }
}

pub fn free_transfer_matches_word_expansion() {
    let opts = EvalOptions::default();
    for (seed, n, m, infinite) in [
        (10, 2usize, 1u32, false),
        (11, 3, 1, false),
        (12, 2, 2, false),
        (13, 2, 1, true),
    ] {
        let modulus = if infinite {
            Modulus::Infinite
        } else {
            Modulus::Cyclic(8 * m)
        };
        let a = random_element(n, modulus, 3, 4, seed).unwrap();
        let t = terms(&a);
        let big_n = 8 * m as i64;
        let signs: Vec<Vec<i64>> = all_points(&vec![2; n])
            .into_iter()
            .map(|y| y.iter().map(|&b| 2 * b - 1).collect())
            .collect();
        for p in [2.0, 4.0] {
            let r = (p / 2.0) as usize;
            for k in 1..=n {
                let kn = k as f64 / n as f64;
                let subsets = k_subsets(n, k);
                let mut lhs = 0.0;
                for s in &subsets {
                    for eps in &signs {
                        let u: Vec<i64> = (0..n)
                            .map(|j| if s.contains(&j) { 4 * m as i64 * eps[j] } else { 0 })
                            .collect();
                        lhs += diff_pow(&t, &u, big_n, r, modulus_of(&a));
                    }
                }
                lhs /= (subsets.len() * signs.len()) as f64;
                let deriv: f64 = (0..n)
                    .map(|j| {
                        let mut u = vec![0i64; n];
                        u[j] = 1;
                        diff_pow(&t, &u, big_n, r, modulus_of(&a))
                    })
                    .sum::<f64>()
                    * kn;
                let full = kn.powf(p / 2.0)
                    * signs
                        .iter()
                        .map(|e| diff_pow(&t, e, big_n, r, modulus_of(&a)))
                        .sum::<f64>()
                    / signs.len() as f64;
                let rep = eval_free_transfer(&a, p, k, m, &opts).unwrap();
                assert_eq!(rep.route, RouteTaken::Free);
                assert!(close(rep.lhs, lhs), "lhs {} vs {lhs}", rep.lhs);
                assert!(close(rep.rhs_derivative_term, deriv));
                assert!(close(rep.rhs_full_term, full));
            }
        }
    }
}

/// With one generator the algebra is functions on `Z_{8m}`: `a <-> sum_w a_w e(w x / 8m)`.
pub fn one_generator_is_the_cyclic_group() {
    let caps = ResourceCaps::default();
    for seed in 0..20 {
        let m = 1 + (seed % 3) as u32;
        let q = 8 * m as i64;
        let a = random_element(1, Modulus::Cyclic(8 * m), 1, 4, seed).unwrap();
        let values: Vec<Complex64> = (0..q)
            .map(|x| {
                a.terms()
                    .map(|(w, c)| c * phase((w.exponent_sums()[0] * x).rem_euclid(q) as f64 / q as f64))
                    .sum()
            })
            .collect();
        for p in [2.0, 4.0, 6.0] {
            let want = values.iter().map(|v| v.norm().powf(p)).sum::<f64>() / q as f64;
            let got = freelp_norm_pow_even(&a, p, &caps).unwrap();
            assert!((got - want).abs() <= 1e-12 * (1.0 + want), "{got} vs {want}");
        }
    }
}
