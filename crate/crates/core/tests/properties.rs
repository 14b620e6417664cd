use proptest::prelude::*;
use rand::Rng;

use qrel_core::channel::random_channel;
use qrel_core::operator::{conjugate, operator_norm, partial_trace_matrix};
use qrel_core::random::{haar_unitary, random_full_rank_state, random_positive, random_state, rng};
use qrel_core::{relative_entropy, PositiveOperator};

fn finite(x: qrel_core::ExtendedNonNegative) -> f64 {
    x.value().expect("finite divergence")
}

/// Scalar `Σ p ln(p/q) + Σq − Σp` for diagonal inputs.
fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| if a > 0.0 { a * (a / b).ln() } else { 0.0 })
        .sum::<f64>()
        + q.iter().sum::<f64>()
        - p.iter().sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn divergence_is_non_negative_and_zero_on_the_diagonal(seed in any::<u64>(), d in 2usize..=6) {
        let mut r = rng(seed);
        let rank = r.random_range(1..=d);
        let rho = random_positive(&mut r, d, rank);
        let sigma = random_full_rank_state(&mut r, d).scale(r.random_range(0.2..2.0)).unwrap();
        prop_assert!(finite(relative_entropy(&rho, &sigma, None)) >= -1e-12);
        prop_assert!(finite(relative_entropy(&rho, &rho, None)).abs() <= 1e-12);
    }

    #[test]
    fn unitary_invariance(seed in any::<u64>(), d in 2usize..=6) {
        let mut r = rng(seed);
        let rho = random_state(&mut r, d, d);
        let sigma = random_full_rank_state(&mut r, d);
        let u = haar_unitary(&mut r, d);
        let before = finite(relative_entropy(&rho, &sigma, None));
        let after = finite(relative_entropy(&rho.conjugate_by(&u).unwrap(), &sigma.conjugate_by(&u).unwrap(), None));
        prop_assert!((before - after).abs() <= 1e-10 * before.max(1.0));
    }

    #[test]
    fn data_processing(seed in any::<u64>(), d_in in 2usize..=4, d_out in 2usize..=4, k in 1usize..=3) {
        let mut r = rng(seed);
        let k = k.max(d_in.div_ceil(d_out));
        let ch = random_channel(d_in, d_out, k, r.random()).unwrap();
        let rank = r.random_range(1..=d_in);
        let rho = random_state(&mut r, d_in, rank);
        let sigma = random_full_rank_state(&mut r, d_in);
        let before = finite(relative_entropy(&rho, &sigma, None));
        let after = finite(relative_entropy(&ch.apply(&rho).unwrap(), &ch.apply(&sigma).unwrap(), None));
        prop_assert!(after <= before + 1e-8, "{after} > {before}");
    }

    #[test]
    fn joint_convexity(seed in any::<u64>(), d in 2usize..=6, lambda in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let states: Vec<PositiveOperator> = (0..4).map(|_| random_full_rank_state(&mut r, d)).collect();
        let mix = |a: &PositiveOperator, b: &PositiveOperator| {
            a.scale(lambda).unwrap().add(&b.scale(1.0 - lambda).unwrap()).unwrap()
        };
        let lhs = finite(relative_entropy(&mix(&states[0], &states[1]), &mix(&states[2], &states[3]), None));
        let rhs = lambda * finite(relative_entropy(&states[0], &states[2], None))
            + (1.0 - lambda) * finite(relative_entropy(&states[1], &states[3], None));
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn commuting_pairs_match_classical(seed in any::<u64>(), d in 2usize..=6) {
        let mut r = rng(seed);
        let p: Vec<f64> = (0..d).map(|_| r.random_range(0.0..1.0)).collect();
        let q: Vec<f64> = (0..d).map(|_| r.random_range(0.05..1.0)).collect();
        let u = haar_unitary(&mut r, d);
        let diag = |v: &[f64]| {
            let m = PositiveOperator::from_real_diagonal(v).unwrap();
            PositiveOperator::from_psd_matrix(&conjugate(&u, m.matrix())).unwrap()
        };
        let got = finite(relative_entropy(&diag(&p), &diag(&q), None));
        prop_assert!((got - kl(&p, &q)).abs() <= 1e-10 * kl(&p, &q).max(1.0));
    }

    #[test]
    fn stinespring_reproduces_the_channel(seed in any::<u64>(), d_in in 2usize..=3, d_out in 2usize..=4, k in 1usize..=3) {
        let k = k.max(d_in.div_ceil(d_out));
        let ch = random_channel(d_in, d_out, k, seed).unwrap();
        let dil = ch.stinespring().unwrap();
        let v = dil.v();
        prop_assert!(operator_norm(&(v.adjoint() * v - qrel_core::CMatrix::identity(d_in, d_in))) <= 1e-10);
        let mut r = rng(seed ^ 1);
        let rho = random_state(&mut r, d_in, d_in);
        let reduced = partial_trace_matrix(dil.dilate(&rho).unwrap().matrix(), d_out, dil.dim_env()).unwrap();
        prop_assert!(operator_norm(&(reduced - ch.apply(&rho).unwrap().matrix())) <= 1e-12);
    }
}
