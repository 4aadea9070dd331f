use num_complex::Complex64;
use xplab::inequality::{
    eval_cyclic, eval_nc, eval_np, eval_rp1, eval_theorem_a, eval_torus, EvalOptions, InequalityReport, Route,
    TheoremAMode, TorusVariant, Witness,
};
use xplab::lattice::{random_function, Distribution};
use xplab::operators::{cond_expect, derivative, DerivativeMode, EtaMap, Translations};
use xplab::sparse::TrigPoly;
use xplab::{GroupShape, LatticeFunction, ResourceCaps, SubsetMask};
use xplab_oracles::brute::{self, Terms};
use xplab_oracles::{self as oracle, Deriv, Table};

const TOL: f64 = 1e-10;

fn caps() -> ResourceCaps {
    ResourceCaps::default()
}

fn table(f: &LatticeFunction) -> Table {
    Table {
        moduli: f.shape().moduli().to_vec(),
        d: f.dim(),
        values: f.values().to_vec(),
    }
}

fn sample(moduli: &[u32], d: usize, seed: u64) -> LatticeFunction {
    let shape = GroupShape::new(moduli.to_vec()).unwrap();
    random_function(&shape, d, Distribution::ComplexGaussian, seed, &caps()).unwrap()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs()))
}

fn check(report: &InequalityReport, want: Terms, label: &str) {
    assert!(
        close(report.lhs, want.lhs),
        "{label}: lhs {} vs {}",
        report.lhs,
        want.lhs
    );
    assert!(
        close(report.rhs_derivative_term, want.deriv),
        "{label}: derivative {} vs {}",
        report.rhs_derivative_term,
        want.deriv
    );
    assert!(
        close(report.rhs_full_term, want.full),
        "{label}: full {} vs {}",
        report.rhs_full_term,
        want.full
    );
}

/// A full-support function and a few-frequency one.
fn corpus(moduli: &[u32], d: usize, seed: u64) -> Vec<LatticeFunction> {
    let shape = GroupShape::new(moduli.to_vec()).unwrap();
    let s = (shape.order() as usize).min(6);
    vec![
        sample(moduli, d, seed),
        random_function(&shape, d, Distribution::SparseFourier { s }, seed + 1, &caps()).unwrap(),
    ]
}

/// Dense witness, plus the sparse witness when `p` is even and the spectrum is small.
fn witnesses(f: &LatticeFunction, p: f64) -> Vec<(Witness, EvalOptions)> {
    let mut out = vec![(Witness::dense(f.clone()), EvalOptions::default())];
    let g = TrigPoly::from_dense(f).unwrap();
    if p.fract() == 0.0 && (p as u32) % 2 == 0 && g.len() <= 8 {
        let opts = EvalOptions {
            route: Route::Sparse,
            ..EvalOptions::default()
        };
        out.push((Witness::sparse(g), opts));
    }
    out
}

fn mode_pair(mode: DerivativeMode) -> Deriv {
    match mode {
        DerivativeMode::Spectral => Deriv::Spectral,
        DerivativeMode::HypercubeDifference => Deriv::Hypercube,
        DerivativeMode::ClassicalTorus => Deriv::Classical,
    }
}

pub fn dft_and_cond_expect_match_direct_sums() {
    for (i, moduli) in [
        vec![2, 2, 2],
        vec![4, 4],
        vec![8, 8],
        vec![3, 5],
        vec![2, 3, 4],
        vec![8, 8, 8],
    ]
    .into_iter()
    .enumerate()
    {
        for d in [1, 2] {
            let f = sample(&moduli, d, 40 + i as u64);
            let t = table(&f);
            assert!(max_diff(f.dft().unwrap().values(), &oracle::dft(&t).values) < TOL);
            let n = moduli.len();
            for bits in 0..(1u64 << n) {
                let s = SubsetMask::from_bits(n, bits);
                let keep: Vec<usize> = s.members().collect();
                let got = cond_expect(&f, &s).unwrap();
                assert!(max_diff(got.values(), &oracle::cond_expect(&t, &keep).values) < TOL);
            }
        }
    }
}

pub fn derivatives_match_direct_definitions() {
    for moduli in [vec![2, 2, 2], vec![8, 8], vec![6, 4]] {
        let f = sample(&moduli, 2, 3);
        let t = table(&f);
        for j in 0..moduli.len() {
            for mode in [
                DerivativeMode::Spectral,
                DerivativeMode::ClassicalTorus,
                DerivativeMode::HypercubeDifference,
            ] {
                if mode == DerivativeMode::HypercubeDifference && moduli.iter().any(|&q| q != 2) {
                    continue;
                }
                let got = derivative(&f, j, mode).unwrap();
                let want = oracle::derivative(&t, j, mode_pair(mode));
                assert!(max_diff(got.values(), &want.values) < TOL, "{moduli:?} j={j} {mode:?}");
            }
        }
    }
}

pub fn np_matches_oracle() {
    for n in [2usize, 3, 4, 6] {
        for f in corpus(&vec![2; n], 1, n as u64) {
            let f = f.centered();
            let t = table(&f);
            for p in [2.0, 3.0, 4.0] {
                for k in 1..=n {
                    let want = brute::truncations(&t, p, k, Deriv::Hypercube);
                    for (w, opts) in witnesses(&f, p) {
                        let r = eval_np(&w, p, k, &opts).unwrap();
                        check(&r, want, &format!("np n={n} p={p} k={k} {:?}", r.route));
                    }
                }
            }
        }
    }
}

pub fn rp1_matches_oracle() {
    let cases: Vec<(Vec<u32>, usize)> = vec![
        (vec![2, 2, 2], 2),
        (vec![4, 4, 4], 1),
        (vec![4, 4], 2),
        (vec![6, 6, 6], 1),
        (vec![8, 8], 2),
    ];
    for (i, (moduli, d)) in cases.into_iter().enumerate() {
        for f in corpus(&moduli, d, 70 + i as u64) {
            let f = f.centered();
            let t = table(&f);
            let n = moduli.len();
            let mut modes = vec![DerivativeMode::Spectral, DerivativeMode::ClassicalTorus];
            if moduli[0] == 2 {
                modes.push(DerivativeMode::HypercubeDifference);
            }
            for mode in modes {
                for p in [2.0, 3.0, 4.0] {
                    for k in 1..=n {
                        let want = brute::truncations(&t, p, k, mode_pair(mode));
                        for (w, opts) in witnesses(&f, p) {
                            let r = eval_rp1(&w, p, k, mode, &opts).unwrap();
                            check(&r, want, &format!("rp1 {moduli:?} d={d} {mode:?} p={p} k={k}"));
                        }
                    }
                }
            }
        }
    }
}

/// `(n, m, l, d)` with `(8lm)^n <= 512`.
const SHIFT_CASES: [(usize, u32, u32, usize); 6] = [
    (1, 1, 1, 2),
    (2, 1, 1, 2),
    (3, 1, 1, 1),
    (2, 2, 1, 1),
    (2, 1, 2, 2),
    (1, 4, 2, 1),
];

pub fn cyclic_matches_oracle() {
    for (i, &(n, m, ell, d)) in SHIFT_CASES.iter().enumerate() {
        for f in corpus(&vec![8 * ell * m; n], d, 100 + i as u64) {
            let t = table(&f);
            for p in [2.0, 3.0, 4.0] {
                for k in 1..=n {
                    let want = brute::cyclic(&t, p, k, m as i64, ell as i64);
                    for (w, opts) in witnesses(&f, p) {
                        let r = eval_cyclic(&w, p, k, m, ell, &opts).unwrap();
                        check(&r, want, &format!("cyclic n={n} m={m} l={ell} d={d} p={p} k={k}"));
                        assert!(close(r.derivative_constant, (4.0 * ell as f64).powf(p - 1.0)));
                        assert_eq!(r.m_factor, (m as f64).powf(p));
                    }
                }
            }
        }
    }
}

pub fn nc_matches_oracle() {
    for (i, (n, m, d)) in [(1usize, 1u32, 2usize), (2, 1, 2), (3, 1, 1), (2, 2, 2), (1, 8, 2)]
        .into_iter()
        .enumerate()
    {
        for f in corpus(&vec![8 * m; n], d, 200 + i as u64) {
            let t = table(&f);
            for p in [2.0, 3.0, 4.0] {
                for k in 1..=n {
                    let want = brute::nc(&t, p, k, m as i64);
                    for (w, opts) in witnesses(&f, p) {
                        let r = eval_nc(&w, p, k, m, &opts).unwrap();
                        check(&r, want, &format!("nc n={n} m={m} d={d} p={p} k={k}"));
                    }
                }
            }
        }
    }
}

pub fn torus_matches_oracle() {
    for (i, &(n, m, ell, d)) in SHIFT_CASES.iter().enumerate() {
        for f in corpus(&vec![8 * ell * m; n], d, 300 + i as u64) {
            let t = table(&f);
            for p in [2.0, 4.0, 3.0] {
                for k in 1..=n {
                    let (mi, li) = (m as i64, ell as i64);
                    for (variant, want) in [
                        (TorusVariant::UniformEta, brute::torus_uniform(&t, p, k, mi, li)),
                        (TorusVariant::SignEta, brute::torus_sign(&t, p, k, mi, li)),
                        (
                            TorusVariant::ClassicalDerivative,
                            brute::torus_classical(&t, p, k, mi, li),
                        ),
                    ] {
                        for (w, opts) in witnesses(&f, p) {
                            let r = eval_torus(&w, p, k, m, variant, ell, &opts).unwrap();
                            check(
                                &r,
                                want,
                                &format!("torus {variant:?} n={n} m={m} l={ell} d={d} p={p} k={k}"),
                            );
                        }
                    }
                }
            }
        }
    }
}

pub fn theorem_a_matches_oracle() {
    for (i, &(n, m, ell, d)) in SHIFT_CASES.iter().enumerate() {
        for f in corpus(&vec![8 * ell * m; n], d, 400 + i as u64) {
            let t = table(&f);
            let eta = EtaMap::beta(n, ell, 8 * ell * m).unwrap();
            let family = Translations::new(f.shape().clone());
            for p in [2.0, 4.0, 3.0] {
                for k in 1..=n {
                    let mut modes = vec![(TheoremAMode::Spectral, Deriv::Spectral)];
                    if ell == 1 {
                        modes.push((TheoremAMode::HypercubeDifference, Deriv::Hypercube));
                    }
                    for (mode, dm) in modes {
                        let want = brute::theorem_a(&t, p, k, m as i64, ell as i64, dm);
                        let r = eval_theorem_a(&f, &family, &eta, mode, p, k, m, &EvalOptions::default()).unwrap();
                        check(
                            &r,
                            want,
                            &format!("theorem_a {mode:?} n={n} m={m} l={ell} d={d} p={p} k={k}"),
                        );
                        let g = TrigPoly::from_dense(&f).unwrap();
                        if p == 4.0 && g.len() <= 8 {
                            let family = Translations::new(g.shape().clone());
                            let r = eval_theorem_a(&g, &family, &eta, mode, p, k, m, &EvalOptions::default()).unwrap();
                            check(
                                &r,
                                want,
                                &format!("sparse theorem_a {mode:?} n={n} m={m} l={ell} k={k}"),
                            );
                        }
                    }
                }
            }
        }
    }
}
