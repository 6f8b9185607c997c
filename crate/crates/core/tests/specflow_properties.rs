use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specflow_core::gallery::{homotopy, random_hermitian, random_smooth, HomotopyFamily};
use specflow_core::path::unitary_exp;
use specflow_core::{
    concatenate, homotopy_invariance_check, regularize, sfl_crossings, sfl_morse_oracle, sfl_partition, sfl_tracking,
    Certificate, CrossingOptions, HermitianOperator, OperatorPath, SflOptions,
};

fn corpus_path(seed: u64) -> OperatorPath {
    random_smooth(2 + (seed % 7) as usize, seed, 4).unwrap()
}

fn invertible_ends(p: &OperatorPath) -> bool {
    p.start().min_abs_eigenvalue() > 1e-3 && p.end().min_abs_eigenvalue() > 1e-3
}

fn partition(p: &OperatorPath) -> i64 {
    sfl_partition(p, &SflOptions::default()).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn methods_agree(seed in 0u64..1_000_000) {
        let p = corpus_path(seed);
        let opts = SflOptions::default();
        let v = sfl_partition(&p, &opts).unwrap().value;
        prop_assert_eq!(sfl_tracking(&p, &opts).unwrap().value, v);
        if invertible_ends(&p) {
            prop_assert_eq!(sfl_morse_oracle(&p, &opts).unwrap().value, v);
            let copts = CrossingOptions::default();
            let reg = regularize(&p, 8, &copts).unwrap();
            prop_assert_eq!(sfl_crossings(&reg.path, &copts).unwrap().value, v);
        }
    }

    #[test]
    fn additivity_under_concatenation(seed in 0u64..1_000_000, cut in 0.05f64..0.95) {
        let p = corpus_path(seed);
        let (p1, p2) = (p.restrict(0.0, cut).unwrap(), p.restrict(cut, 1.0).unwrap());
        let joined = concatenate(&p1, &p2).unwrap();
        let whole = partition(&p);
        prop_assert_eq!(partition(&p1) + partition(&p2), whole);
        prop_assert_eq!(partition(&joined), whole);
        let tail = OperatorPath::constant(p.end(), 0.0, 1.0).unwrap();
        prop_assert_eq!(partition(&concatenate(&p, &tail).unwrap()), whole);
    }

    #[test]
    fn reversal_antisymmetry(seed in 0u64..1_000_000) {
        let p = corpus_path(seed);
        prop_assume!(invertible_ends(&p));
        prop_assert_eq!(partition(&p.reverse()), -partition(&p));
        let opts = SflOptions::default();
        prop_assert_eq!(sfl_tracking(&p.reverse(), &opts).unwrap().value, -sfl_tracking(&p, &opts).unwrap().value);
    }

    // U(t)* D U(t) with D invertible keeps the spectrum fixed.
    #[test]
    fn invertible_path_has_zero_flow(seed: u64, dim in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(dim, &mut rng);
        let d: Vec<f64> = (0..dim).map(|k| if k % 2 == 0 { 0.5 + k as f64 } else { -0.5 - k as f64 }).collect();
        let d = HermitianOperator::from_diag(&d);
        let p = OperatorPath::new(0.0, 1.0, move |t| d.conjugate_by(&unitary_exp(&h, 3.0 * t).unwrap())).unwrap();
        let opts = SflOptions::default();
        prop_assert_eq!(sfl_partition(&p, &opts).unwrap().value, 0);
        prop_assert_eq!(sfl_tracking(&p, &opts).unwrap().value, 0);
        prop_assert_eq!(sfl_morse_oracle(&p, &opts).unwrap().value, 0);
    }

    #[test]
    fn certificates_reverify_and_agree(seed in 0u64..1_000_000, jitter: u64) {
        let p = corpus_path(seed);
        let res = sfl_partition(&p, &SflOptions::default()).unwrap();
        let Certificate::Partition(cert) = &res.certificate else { panic!("partition certificate expected") };
        prop_assert!(cert.verify(&p, 4).is_ok());
        prop_assert_eq!(cert.value(), res.value);
        let other = sfl_partition(&p, &SflOptions { seed: Some(jitter), samples: 40, ..SflOptions::default() }).unwrap();
        prop_assert_eq!(other.value, res.value);
    }

    #[test]
    fn homotopy_families_are_invariant(seed in 0u64..1_000_000) {
        let p = corpus_path(seed);
        prop_assume!(invertible_ends(&p));
        for family in HomotopyFamily::ALL {
            let h = homotopy(family, &p, seed, 0.5).unwrap();
            let verdict = homotopy_invariance_check(move |s, t| h(s, t), (0.0, 1.0), 5, (0.0, 1.0), &SflOptions::default()).unwrap();
            prop_assert!(verdict.pass, "{:?}: {:?}", family, verdict.sfl_values);
        }
    }
}
