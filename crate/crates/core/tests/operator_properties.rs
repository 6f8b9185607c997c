use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specflow_core::gallery::random_hermitian;
use specflow_core::linalg::{ComplexMatrix, C64, I};
use specflow_core::metrics::{
    cayley, cayley_product_form, cayley_scalar, delta_distance, gap_distance, inverse_cayley, resolvent,
    resolvent_series, riesz_distance, riesz_map,
};
use specflow_core::operator::unitarity_defect;
use specflow_core::HermitianOperator;

fn herm(dim: usize, seed: u64) -> HermitianOperator {
    random_hermitian(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn eigh_reconstructs(dim in 1usize..=12, seed: u64) {
        let t = herm(dim, seed);
        let e = t.eigh().unwrap();
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(e.apply(|x| x).max_abs_diff(t.matrix()) <= 1e-10);
        prop_assert!(e.residual(&t) <= 1e-10);
        prop_assert!(e.orthonormality_defect() <= 1e-12);
        prop_assert!(max_diff(&e.eigenvalues, t.eigenvalues()) <= 1e-11);
    }

    #[test]
    fn cayley_round_trip(dim in 1usize..=16, seed: u64) {
        let t = herm(dim, seed);
        let back = inverse_cayley(&cayley(&t)).unwrap();
        prop_assert!(back.matrix().max_abs_diff(t.matrix()) <= 1e-10);
    }

    #[test]
    fn cayley_is_unitary(dim in 1usize..=16, seed: u64) {
        let t = herm(dim, seed);
        let k = cayley(&t);
        prop_assert!(unitarity_defect(k.matrix()) <= 1e-12);
        prop_assert!(k.matrix().max_abs_diff(&cayley_product_form(&t)) <= 1e-12);
    }

    // kappa(T) is normal, so its real and imaginary parts commute and any
    // real combination Re + c Im has spectrum {Re w + c Im w}; three
    // combinations pin down the eigenvalue set.
    #[test]
    fn cayley_spectral_mapping(dim in 1usize..=16, seed: u64) {
        let t = herm(dim, seed);
        let k = cayley(&t).matrix().clone();
        let ka = k.adjoint();
        let predicted: Vec<C64> = t.eigenvalues().iter().map(|&mu| cayley_scalar(mu)).collect();
        for c in [0.0, 1.0, 0.7] {
            // (k + k*)/2 + c (k - k*)/(2i)
            let mut m = (&k + &ka).scale_real(0.5);
            m.axpy(C64::new(0.0, -0.5 * c), &(&k - &ka));
            let h = HermitianOperator::new(m).unwrap();
            let expect = sorted(predicted.iter().map(|w| w.re + c * w.im).collect());
            prop_assert!(max_diff(h.eigenvalues(), &expect) <= 1e-10);
        }
    }

    #[test]
    fn cayley_factorization(dim in 1usize..=8, seed: u64, lambda in -5.0f64..5.0) {
        let t = herm(dim, seed);
        prop_assume!(t.spectrum().distance_to(C64::new(lambda, 0.0)).1 > 1e-3);
        let n = t.dim();
        let k = cayley(&t).matrix().clone();
        let id = ComplexMatrix::identity(n);
        let mut diff = id.scale(cayley_scalar(lambda));
        diff.axpy(C64::new(-1.0, 0.0), &k);
        let rhs = &(&diff.scale(C64::new(lambda, 1.0)) * &(&id - &k).inverse().unwrap()) * &id;
        let lhs = t.matrix().shift_diagonal(C64::new(-lambda, 0.0)).scale_real(-1.0);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9);
    }

    #[test]
    fn resolvent_norm_bound(dim in 1usize..=10, seed: u64, alpha in -4.0f64..4.0, beta in 0.1f64..10.0, sign: bool) {
        let t = herm(dim, seed);
        let beta = if sign { beta } else { -beta };
        let r = resolvent(&t, C64::new(alpha, beta)).unwrap();
        prop_assert!(r.norm2() <= 1.0 / beta.abs() + 1e-12);
        let back = &t.matrix().shift_diagonal(-C64::new(alpha, beta)) * &r;
        prop_assert!(back.max_abs_diff(&ComplexMatrix::identity(dim)) <= 1e-10);
    }

    #[test]
    fn neumann_series_inside_radius(dim in 1usize..=6, seed: u64, frac in 0.0f64..0.5, angle in 0.0f64..std::f64::consts::TAU) {
        let t = herm(dim, seed);
        let z0 = C64::new(0.3, 1.5);
        let radius = 1.0 / resolvent(&t, z0).unwrap().norm2();
        let z = z0 + C64::from_polar(frac * radius, angle);
        let series = resolvent_series(&t, z0, z, 80).unwrap();
        prop_assert!(series.max_abs_diff(&resolvent(&t, z).unwrap()) <= 1e-8);
    }

    #[test]
    fn gap_is_twice_delta(dim in 1usize..=16, s1: u64, s2: u64) {
        let (a, b) = (herm(dim, s1), herm(dim, s2));
        let (dg, delta) = (gap_distance(&a, &b).unwrap(), delta_distance(&a, &b).unwrap());
        prop_assert!((dg - 2.0 * delta).abs() <= 1e-12 * dg.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn riesz_spectral_mapping(dim in 1usize..=8, seed: u64) {
        let t = herm(dim, seed);
        let f = riesz_map(&t).unwrap();
        let expect: Vec<f64> = t.eigenvalues().iter().map(|m| m / (1.0 + m * m).sqrt()).collect();
        prop_assert!(max_diff(f.eigenvalues(), &expect) <= 1e-12);
        prop_assert!(f.norm() < 1.0);
    }

    #[test]
    fn riesz_triangle_inequality(dim in 1usize..=6, s1: u64, s2: u64, s3: u64) {
        let (a, b, c) = (herm(dim, s1), herm(dim, s2), herm(dim, s3));
        let ac = riesz_distance(&a, &c).unwrap();
        let ab = riesz_distance(&a, &b).unwrap();
        let bc = riesz_distance(&b, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
    }
}

#[test]
fn resolvent_multiply_back_at_2i() {
    let t = herm(5, 11);
    let r = resolvent(&t, C64::new(0.0, 2.0)).unwrap();
    let back = &t.matrix().shift_diagonal(-(I * 2.0)) * &r;
    assert!(back.max_abs_diff(&ComplexMatrix::identity(5)) <= 1e-10);
}

#[test]
fn neumann_series_sixty_terms() {
    let t = herm(4, 5);
    let z0 = C64::new(0.0, 3.0);
    let z = z0 + 0.1;
    let s = resolvent_series(&t, z0, z, 60).unwrap();
    assert!(s.max_abs_diff(&resolvent(&t, z).unwrap()) <= 1e-8);
}

#[test]
fn eigh_examples() {
    let e = HermitianOperator::from_diag(&[3.0, 1.0, 2.0]).eigh().unwrap();
    assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
    let pauli = HermitianOperator::new(ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()).unwrap();
    let ev = pauli.eigh().unwrap().eigenvalues;
    assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
}
