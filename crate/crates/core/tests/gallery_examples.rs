use std::f64::consts::PI;

use specflow_core::gallery::{
    linear_pencil, normalization, normalization_path, random_hermitian, random_smooth, twisted_fd, twisted_fd_path,
    twisted_fourier_path,
};
use specflow_core::{
    concatenate, sfl_crossings, sfl_morse_oracle, sfl_partition, sfl_tracking, CrossingOptions, HermitianOperator,
    OperatorPath, SflOptions,
};

fn nearest(mu: &[f64], target: f64) -> f64 {
    *mu.iter().min_by(|a, b| (*a - target).abs().total_cmp(&(*b - target).abs())).unwrap()
}

/// Least-squares slope of `log err` against `log h`.
fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn twisted_fd_low_modes_at_zero_twist() {
    let a = twisted_fd(200, 0.0).unwrap();
    let mu = a.eigenvalues();
    assert!(nearest(mu, 0.0).abs() <= 1e-10);
    for target in [2.0 * PI, -2.0 * PI] {
        assert!((nearest(mu, target) - target).abs() <= 1e-3 * target.abs());
    }
}

#[test]
fn twisted_fd_quarter_twist() {
    // The smallest |mu| is attained twice, at about +pi/2 and -pi/2: the
    // physical mode and the grid-scale mode of the central difference.
    let mu = twisted_fd(200, PI / 2.0).unwrap().eigenvalues().to_vec();
    let m = mu.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    let ties: Vec<f64> = mu.iter().copied().filter(|x| x.abs() <= m + 1e-9).collect();
    assert_eq!(ties.len(), 2);
    assert!((nearest(&ties, PI / 2.0) - PI / 2.0).abs() <= 1e-3 * 2.0 * PI);
}

#[test]
fn twisted_fd_second_order_convergence() {
    let (lambda, k) = (0.3, 1.0);
    let exact = 2.0 * PI * k + lambda;
    let ns = [50usize, 100, 200, 400];
    let errs: Vec<f64> = ns.iter().map(|&n| (nearest(twisted_fd(n, lambda).unwrap().eigenvalues(), exact) - exact).abs()).collect();
    let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let order = slope(&hs, &errs);
    assert!((order - 2.0).abs() <= 0.2, "order {order}");
}

#[test]
fn twisted_fd_path_derivative() {
    let p = twisted_fd_path(32, -PI, PI).unwrap();
    assert!(p.derivative_defect(&[-2.0, -0.5, 0.1, 1.3, 2.9], 1e-3).unwrap() < 1e-4);
}

#[test]
fn fourier_loop_and_its_reverse() {
    let opts = SflOptions::default();
    let p = twisted_fourier_path(5, -PI, PI).unwrap();
    assert_eq!(sfl_partition(&p, &opts).unwrap().value, 1);
    assert_eq!(sfl_tracking(&p, &opts).unwrap().value, 1);
    assert_eq!(sfl_partition(&p.reverse(), &opts).unwrap().value, -1);
    // Closed loop: the endpoint spectra coincide.
    let (a, b) = (p.start(), p.end());
    let (sa, sb) = (a.eigenvalues(), b.eigenvalues());
    assert!(sa[1..].iter().zip(&sb[..sb.len() - 1]).all(|(x, y)| (x - y).abs() < 1e-12));
}

#[test]
fn normalization_examples() {
    let opts = SflOptions::default();
    for n_side in [1, 2, 5] {
        let p = normalization_path(n_side, -1.0, 1.0).unwrap();
        assert_eq!(sfl_partition(&p, &opts).unwrap().value, 1);
        assert_eq!(sfl_tracking(&p, &opts).unwrap().value, 1);
        assert_eq!(sfl_morse_oracle(&p, &opts).unwrap().value, 1);
        assert_eq!(sfl_crossings(&p, &CrossingOptions::default()).unwrap().value, 1);
    }
    assert_eq!(normalization(2, 1.0).unwrap().spectrum().grouped(0.0), vec![(-1.0, 2), (1.0, 3)]);
}

#[test]
fn linear_pencil_examples() {
    let opts = SflOptions::default();
    let a = HermitianOperator::from_diag(&[-1.0]);
    let b = HermitianOperator::from_diag(&[1.0]);
    assert_eq!(sfl_partition(&linear_pencil(&a, &b).unwrap(), &opts).unwrap().value, 1);
    assert_eq!(sfl_morse_oracle(&linear_pencil(&a, &b).unwrap(), &opts).unwrap().value, 1);
    assert_eq!(sfl_partition(&linear_pencil(&a, &a).unwrap(), &opts).unwrap().value, 0);

    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(99);
    for _ in 0..20 {
        let (a0, a1) = (random_hermitian(8, &mut rng), random_hermitian(8, &mut rng));
        let p = linear_pencil(&a0, &a1).unwrap();
        let expect = a0.negative_count(1e-9) as i64 - a1.negative_count(1e-9) as i64;
        assert_eq!(sfl_partition(&p, &opts).unwrap().value, expect);
        assert_eq!(sfl_morse_oracle(&p, &opts).unwrap().value, expect);
    }
}

#[test]
fn scalar_paths() {
    let opts = SflOptions::default();
    let path = |f: fn(f64) -> f64| OperatorPath::new(0.0, 1.0, move |t| HermitianOperator::from_diag(&[f(t)])).unwrap();
    assert_eq!(sfl_partition(&path(|t| t - 0.5), &opts).unwrap().value, 1);
    assert_eq!(sfl_partition(&path(|t| t), &opts).unwrap().value, 0);
    assert_eq!(sfl_partition(&path(|t| -t), &opts).unwrap().value, -1);
    assert_eq!(sfl_tracking(&path(|t| t), &opts).unwrap().value, 0);
    assert_eq!(sfl_tracking(&path(|t| -t), &opts).unwrap().value, -1);
}

#[test]
fn concatenation_with_constant_tail() {
    let p = random_smooth(5, 17, 4).unwrap();
    let tail = OperatorPath::constant(p.end(), 0.0, 2.0).unwrap();
    let opts = SflOptions::default();
    assert_eq!(
        sfl_partition(&concatenate(&p, &tail).unwrap(), &opts).unwrap().value,
        sfl_partition(&p, &opts).unwrap().value
    );
    let wrong = OperatorPath::constant(p.end().shift(1.0), 0.0, 1.0).unwrap();
    assert!(concatenate(&p, &wrong).is_err());
}
