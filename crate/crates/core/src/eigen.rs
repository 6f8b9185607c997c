//! Hermitian eigensolvers.
//!
//! Two independent routes:
//!
//! * [`jacobi_eigh`]: cyclic complex Jacobi with a fixed (p, q) sweep order.
//!   Produces eigenvectors; deterministic for identical input bits.
//! * [`eigvalsh_unchecked`]: Householder reduction to a real symmetric
//!   tridiagonal followed by implicit QL. Eigenvalues only, much cheaper on
//!   the large discretized operators, and used wherever only counts matter.

use crate::error::{Result, SpecFlowError};
use crate::linalg::{ComplexMatrix, C64};

pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending. The input is
/// assumed Hermitian; only its upper triangle is trusted implicitly through
/// the rotations.
pub fn jacobi_eigh(m: &ComplexMatrix, max_sweeps: usize) -> Result<(Vec<f64>, ComplexMatrix)> {
    assert!(m.is_square());
    let n = m.rows();
    let mut a: Vec<C64> = m.as_slice().to_vec();
    // Rows of `w` are the eigenvectors (w = V^T), so rotations touch
    // contiguous memory.
    let mut w = ComplexMatrix::identity(n).into_vec();

    let fro = m.frobenius();
    let target = f64::EPSILON * fro.max(f64::MIN_POSITIVE);
    let mut converged = n <= 1;

    for sweep in 0..max_sweeps {
        if off_diagonal_norm(&a, n) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let beta = apq.norm();
                if beta == 0.0 {
                    continue;
                }
                let alpha = a[p * n + p].re;
                let gamma = a[q * n + q].re;
                // Late sweeps: drop entries that can no longer move the diagonal.
                if sweep > 3 && beta <= f64::EPSILON * 1e-2 * (alpha.abs() + gamma.abs()) {
                    a[p * n + q] = C64::new(0.0, 0.0);
                    a[q * n + p] = C64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / beta;
                let theta = (gamma - alpha) / (2.0 * beta);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let g00 = C64::new(c, 0.0);
                let g01 = C64::new(s, 0.0);
                let g10 = -phase.conj() * s;
                let g11 = phase.conj() * c;

                // A <- A G on columns p, q
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * g00 + akq * g10;
                    a[k * n + q] = akp * g01 + akq * g11;
                }
                // A <- G* A on rows p, q
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = g00.conj() * apk + g10.conj() * aqk;
                    a[q * n + k] = g01.conj() * apk + g11.conj() * aqk;
                }
                a[p * n + p] = C64::new(alpha - t * beta, 0.0);
                a[q * n + q] = C64::new(gamma + t * beta, 0.0);
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);

                // V <- V G, stored transposed
                for k in 0..n {
                    let vp = w[p * n + k];
                    let vq = w[q * n + k];
                    w[p * n + k] = vp * g00 + vq * g10;
                    w[q * n + k] = vp * g01 + vq * g11;
                }
            }
        }
    }
    if !converged {
        let off = off_diagonal_norm(&a, n);
        if off > target * 1e3 {
            return Err(SpecFlowError::NonConvergence { sweeps: max_sweeps, residual: off });
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep solver order
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |row, col| w[order[col] * n + row]);
    Ok((values, vectors))
}

fn off_diagonal_norm(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Reduce a Hermitian matrix to real symmetric tridiagonal form.
/// Returns `(diagonal, subdiagonal)`; the subdiagonal has length `n - 1`.
pub fn tridiagonalize(m: &ComplexMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = m.rows();
    let mut a: Vec<C64> = m.as_slice().to_vec();
    let mut sub = Vec::with_capacity(n.saturating_sub(1));
    let zero = C64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];

    for k in 0..n.saturating_sub(1) {
        let lo = k + 1;
        let len = n - lo;
        let alpha = (lo..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            sub.push(0.0);
            continue;
        }
        let x0 = a[lo * n + k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        // v = x + phase * alpha * e1, H = I - tau v v*
        for (idx, i) in (lo..n).enumerate() {
            v[idx] = a[i * n + k];
        }
        v[0] += phase * alpha;
        let vnorm2: f64 = v[..len].iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // p = tau * A22 v
        for r in 0..len {
            let row = &a[(lo + r) * n + lo..(lo + r) * n + n];
            let s: C64 = row.iter().zip(&v[..len]).map(|(x, y)| x * y).sum();
            p[r] = s * tau;
        }
        // K = tau/2 * v* p (real for Hermitian A22)
        let vp: C64 = v[..len].iter().zip(&p[..len]).map(|(x, y)| x.conj() * y).sum();
        let kk = 0.5 * tau * vp.re;
        for r in 0..len {
            p[r] -= v[r] * kk;
        }
        // A22 <- A22 - v w* - w v*
        for r in 0..len {
            let (vr, wr) = (v[r], p[r]);
            let row = &mut a[(lo + r) * n + lo..(lo + r) * n + n];
            for (cidx, entry) in row.iter_mut().enumerate() {
                *entry -= vr * p[cidx].conj() + wr * v[cidx].conj();
            }
        }
        // Hx = -phase * alpha * e1; only its modulus matters after the
        // diagonal phase similarity.
        sub.push(alpha);
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    (diag, sub)
}

/// Eigenvalues of a real symmetric tridiagonal matrix by implicit QL.
pub fn tridiagonal_eigenvalues(diag: &[f64], sub: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..sub.len()].copy_from_slice(sub);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(SpecFlowError::NonConvergence { sweeps: iter, residual: e[l].abs() });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Ascending eigenvalues of a matrix assumed Hermitian.
pub fn eigvalsh_unchecked(m: &ComplexMatrix) -> Vec<f64> {
    let (d, e) = tridiagonalize(m);
    match tridiagonal_eigenvalues(&d, &e) {
        Ok(v) => v,
        // QL practically never stalls; Jacobi is the unconditional fallback.
        Err(_) => jacobi_eigh(m, DEFAULT_MAX_SWEEPS).map(|(v, _)| v).unwrap_or(d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&g + &g.adjoint()).scale_real(0.5)
    }

    #[test]
    fn diagonal_input_gives_permuted_identity() {
        let m = ComplexMatrix::from_diag(&[3.0, 1.0, 2.0]);
        let (vals, vecs) = jacobi_eigh(&m, DEFAULT_MAX_SWEEPS).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
        let expected = ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(vecs, expected);
    }

    #[test]
    fn pauli_x() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let (vals, _) = jacobi_eigh(&m, DEFAULT_MAX_SWEEPS).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
        let vals = eigvalsh_unchecked(&m);
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_2x2_closed_form() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let m = ComplexMatrix::new(2, 2, vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(1.0, 0.0)]).unwrap();
        let (vals, _) = jacobi_eigh(&m, DEFAULT_MAX_SWEEPS).unwrap();
        assert!(vals[0].abs() < 1e-15 && (vals[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        for seed in 0..10 {
            let n = 1 + seed as usize % 9;
            let h = random_hermitian(n, seed);
            let (vals, v) = jacobi_eigh(&h, DEFAULT_MAX_SWEEPS).unwrap();
            let rebuilt = &(&v * &ComplexMatrix::from_diag(&vals)) * &v.adjoint();
            assert!(rebuilt.max_abs_diff(&h) < 1e-12, "seed {seed}");
            assert!((&v.adjoint() * &v).max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12);
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn tridiagonal_route_matches_jacobi() {
        for seed in 0..20 {
            let n = 1 + seed as usize % 17;
            let h = random_hermitian(n, 100 + seed);
            let (jac, _) = jacobi_eigh(&h, DEFAULT_MAX_SWEEPS).unwrap();
            let tri = eigvalsh_unchecked(&h);
            for (a, b) in jac.iter().zip(&tri) {
                assert!((a - b).abs() < 1e-12, "seed {seed}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        // Rotated diag(1, 1, -2): a repeated eigenvalue.
        let h = random_hermitian(3, 7);
        let (_, u) = jacobi_eigh(&h, DEFAULT_MAX_SWEEPS).unwrap();
        let m = &(&u * &ComplexMatrix::from_diag(&[1.0, 1.0, -2.0])) * &u.adjoint();
        let (vals, v) = jacobi_eigh(&m, DEFAULT_MAX_SWEEPS).unwrap();
        assert!((vals[0] + 2.0).abs() < 1e-13 && (vals[1] - 1.0).abs() < 1e-13 && (vals[2] - 1.0).abs() < 1e-13);
        assert!((&v.adjoint() * &v).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-13);
    }

    #[test]
    fn deterministic_bits() {
        let h = random_hermitian(7, 42);
        let a = jacobi_eigh(&h, DEFAULT_MAX_SWEEPS).unwrap();
        let b = jacobi_eigh(&h, DEFAULT_MAX_SWEEPS).unwrap();
        assert_eq!(a, b);
    }
}
