use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pbn::markov::{
    amplitude_to_mass, apd_evolution, chapman_kolmogorov_continuous, chapman_kolmogorov_discrete,
    ctmc_evolve, dtmc_evolve, heisenberg_expectation, kolmogorov_backward_residual,
    kolmogorov_forward_residual, schrodinger_expectation, transition_matrix, AmplitudeVector,
    HeisenbergObservable,
    Chain, Elapsed, Generator, StochasticMatrix, SystemPKet,
};
use pbn::processes::PoissonSpec;
use pbn::prob::Observable;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stationary row vector from `π(P − I) = 0` with the last equation replaced
/// by `Σπ = 1`.
fn stationary(p: &DMatrix<f64>) -> DVector<f64> {
    let n = p.nrows();
    let mut a = p.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    a.lu().solve(&b).unwrap()
}

/// `Σ_j (Qt)^j / j!` after scaling by `2^s`, then squaring back.
fn taylor_expm(q: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let s = 10;
    let a = q * (t / f64::powi(2.0, s));
    let n = q.nrows();
    let mut term = DMatrix::identity(n, n);
    let mut sum = term.clone();
    for j in 1..30 {
        term = &term * &a / j as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn dtmc_matches_naive_power_and_converges_to_stationary() {
    let mut r = rng(1);
    for _ in 0..10 {
        let p = StochasticMatrix::random(5, &mut r);
        let u = SystemPKet::random(5, &mut r);
        let mut naive = DVector::from_column_slice(u.masses()).transpose();
        for _ in 0..10 {
            naive *= p.entries();
        }
        let got = dtmc_evolve(&u, &p, 10).unwrap();
        for (a, b) in got.masses().iter().zip(naive.iter()) {
            assert!((a - b).abs() <= 1e-12);
        }
        let pi = stationary(p.entries());
        let late = dtmc_evolve(&u, &p, 400).unwrap();
        for (a, b) in late.masses().iter().zip(pi.iter()) {
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn two_state_closed_form() {
    let (a, b) = (1.0, 2.0);
    let q = Generator::two_state(a, b).unwrap();
    let t = 1.0;
    let state = ctmc_evolve(&SystemPKet::point(2, 0).unwrap(), &q, t).unwrap();
    let p0 = b / (a + b) + (1.0 - b / (a + b)) * (-(a + b) * t).exp();
    assert!((state.masses()[0] - p0).abs() <= 1e-12);
    assert!((state.masses()[1] - (1.0 - p0)).abs() <= 1e-12);
}

#[test]
fn expm_matches_taylor_oracle() {
    let q = Generator::from_rows(&[
        vec![-1.0, 0.6, 0.4],
        vec![0.3, -0.5, 0.2],
        vec![0.7, 0.8, -1.5],
    ])
    .unwrap();
    let t = 0.7;
    let got = transition_matrix(&q, t).unwrap();
    let oracle = taylor_expm(q.entries(), t);
    let diff = (got.entries() - &oracle).abs().max();
    assert!(diff <= 1e-10, "{diff}");
}

#[test]
fn kolmogorov_residuals_are_small() {
    let q = Generator::two_state(1.0, 2.0).unwrap();
    assert!(kolmogorov_forward_residual(&q, 0.5).unwrap() <= 1e-6);
    assert!(kolmogorov_backward_residual(&q, 0.5).unwrap() <= 1e-6);
    let mut r = rng(3);
    for _ in 0..10 {
        let q = Generator::random(4, 2.0, &mut r);
        let t = r.random_range(0.1..2.0);
        assert!(kolmogorov_forward_residual(&q, t).unwrap() <= 1e-6);
        assert!(kolmogorov_backward_residual(&q, t).unwrap() <= 1e-6);
    }
}

#[test]
fn chapman_kolmogorov_holds() {
    let mut r = rng(4);
    for _ in 0..5 {
        let p = StochasticMatrix::random(10, &mut r);
        assert!(chapman_kolmogorov_discrete(&p, 3, 4) <= 1e-12);
        let q = Generator::random(6, 1.5, &mut r);
        assert!(chapman_kolmogorov_continuous(&q, 0.3, 0.9).unwrap() <= 1e-10);
    }
}

#[test]
fn apd_agrees_with_direct_evolution() {
    let mut r = rng(5);
    let q = Generator::random(5, 1.0, &mut r);
    let u = SystemPKet::random(5, &mut r);
    let chain = Chain::Continuous(q.clone());
    let a = apd_evolution(&u, &chain, Elapsed::Time(1.3)).unwrap();
    let b = ctmc_evolve(&u, &q, 1.3).unwrap();
    for (x, y) in a.masses().iter().zip(b.masses()) {
        assert!((x - y).abs() <= 1e-12);
    }
    let p = StochasticMatrix::random(5, &mut r);
    let chain = Chain::Discrete(p.clone());
    let a = apd_evolution(&u, &chain, Elapsed::Steps(7)).unwrap();
    let b = dtmc_evolve(&u, &p, 7).unwrap();
    for (x, y) in a.masses().iter().zip(b.masses()) {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn pictures_agree() {
    let mut r = rng(6);
    for _ in 0..10 {
        let q = Generator::random(4, 1.0, &mut r);
        let x = Observable::new((0..4).map(|_| r.random_range(-5.0..5.0)).collect());
        let u = SystemPKet::random(4, &mut r);
        let t = r.random_range(0.0..3.0);
        let chain = Chain::Continuous(q.clone());
        let h = heisenberg_expectation(&x, &chain, &u, Elapsed::Time(t)).unwrap();
        let s = schrodinger_expectation(&x, &ctmc_evolve(&u, &q, t).unwrap()).unwrap();
        assert!((h - s).abs() <= 1e-10, "{h} vs {s}");
    }
}

/// `1ᵀ·X̂(t)·ω₀` from the explicit operator, valid while `Û` is well
/// conditioned.
#[test]
fn explicit_operator_agrees_for_short_times() {
    let mut r = rng(8);
    for _ in 0..10 {
        let q = Generator::random(3, 1.0, &mut r);
        let x = Observable::new(vec![0.0, 1.0, 2.0]);
        let u = SystemPKet::random(3, &mut r);
        let chain = Chain::Continuous(q);
        let h = HeisenbergObservable::new(&x, &chain, Elapsed::Time(0.8)).unwrap();
        let explicit: f64 = (h.operator() * DVector::from_column_slice(u.masses())).sum();
        assert!((explicit - h.expectation(&u).unwrap()).abs() <= 1e-10);
        assert!(h.conservation_defect() <= 1e-12);
    }
    let chain = Chain::Continuous(Generator::random(3, 1.0, &mut r));
    let x = Observable::new(vec![4.0, -1.0, 0.5]);
    let h = HeisenbergObservable::new(&x, &chain, Elapsed::Time(0.0)).unwrap();
    assert_eq!(h.operator(), &DMatrix::from_diagonal(&DVector::from_vec(x.values().to_vec())));
}

#[test]
fn singular_discrete_propagator_is_reported() {
    let p = StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
    let x = Observable::new(vec![1.0, 2.0]);
    assert!(HeisenbergObservable::new(&x, &Chain::Discrete(p), Elapsed::Steps(1)).is_err());
}

#[test]
fn global_phase_leaves_masses_unchanged() {
    let mut r = rng(7);
    let amps: Vec<Complex64> = (0..8)
        .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    let c = AmplitudeVector::normalized(amps.clone()).unwrap();
    let phase = Complex64::from_polar(1.0, 0.83);
    let shifted =
        AmplitudeVector::normalized(amps.iter().map(|a| a * phase).collect()).unwrap();
    let (m1, m2) = (amplitude_to_mass(&c), amplitude_to_mass(&shifted));
    assert!((m1.total() - 1.0).abs() <= 1e-12);
    for (a, b) in m1.masses().iter().zip(m2.masses()) {
        assert!((a - b).abs() <= 1e-14);
    }
}

/// Truncated pure-birth chain at rate λ: `dP_ij/dt = λ(P_{i,j−1} − P_ij)` in
/// the interior, checked against the closed-form Poisson transition.
#[test]
fn poisson_transition_solves_forward_equation() {
    let lambda = 1.7;
    let spec = PoissonSpec::new(lambda).unwrap();
    for &t in &[0.2, 1.0, 3.5] {
        let h = 1e-5 * f64::max(1.0, t);
        for i in 0..5u64 {
            for j in i..i + 8 {
                let p = |s: f64, jj: u64| spec.transition(i, jj, s).unwrap();
                let lhs = (p(t + h, j) - p(t - h, j)) / (2.0 * h);
                let below = if j > i { p(t, j - 1) } else { 0.0 };
                let rhs = lambda * (below - p(t, j));
                assert!((lhs - rhs).abs() <= 1e-6, "i={i} j={j} t={t}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ctmc_conserves_mass(n in 1usize..=20, t in 0.0f64..100.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let q = Generator::random(n, 1.0, &mut r);
        let u = SystemPKet::random(n, &mut r);
        let out = ctmc_evolve(&u, &q, t).unwrap();
        prop_assert!((out.total() - 1.0).abs() <= 1e-10);
        prop_assert!(out.masses().iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn dtmc_conserves_mass(n in 1usize..=20, k in 0u64..200, seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = StochasticMatrix::random(n, &mut r);
        let u = SystemPKet::random(n, &mut r);
        let out = dtmc_evolve(&u, &p, k).unwrap();
        prop_assert!((out.total() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn transition_rows_are_stochastic(n in 1usize..=12, t in 0.0f64..20.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let q = Generator::random(n, 3.0, &mut r);
        let p = transition_matrix(&q, t).unwrap();
        for row in p.entries().row_iter() {
            prop_assert!((row.sum() - 1.0).abs() <= 1e-12);
        }
    }
}
