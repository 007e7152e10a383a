//! Internal dense solvers: cyclic Jacobi eigendecomposition for Hermitian
//! matrices and a one-sided Jacobi SVD for general complex matrices.
//!
//! Sizes here top out around 64x64, where Jacobi iteration is plenty fast and
//! delivers small singular values to full absolute accuracy (the one-sided
//! variant never forms the Gram matrix).

use num_complex::Complex64;

use super::matrix::ComplexMatrix;

/// Eigendecomposition of a Hermitian matrix: `a = V diag(values) V^dagger`.
pub struct HermitianEig {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

/// Given the 2x2 Hermitian block [[a, g e^{i phi}], [g e^{-i phi}, b]] return
/// (c, s, phase) so that the unitary [[c, s*phase], [-s*conj(phase), c]]
/// diagonalizes it. `g` must be > 0.
fn jacobi_rotation(a: f64, b: f64, off: Complex64) -> (f64, f64, Complex64) {
    let g = off.norm();
    let phase = off / g;
    let tau = (b - a) / (2.0 * g);
    // Smaller-magnitude root of t^2 + 2 tau t - 1 = 0.
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c, phase)
}

/// Cyclic Jacobi diagonalization. The input is symmetrized first, so callers
/// may pass matrices that are Hermitian only up to roundoff.
pub fn hermitian_eig(m: &ComplexMatrix) -> HermitianEig {
    assert!(m.is_square(), "hermitian_eig: matrix not square");
    let n = m.rows();
    let mut w = m.hermitized();
    let mut v = ComplexMatrix::identity(n);

    let scale = w.hs_norm().max(1e-300);
    let tol = 1e-15 * scale;

    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(w.get(p, q).norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let wpq = w.get(p, q);
                if wpq.norm() <= tol * 1e-2 {
                    continue;
                }
                let (c, s, phase) = jacobi_rotation(w.get(p, p).re, w.get(q, q).re, wpq);
                let sp = phase.scale(s);
                // Columns p, q of W and V: x' = c x - s conj(phase) y, y' = s phase x + c y.
                for k in 0..n {
                    let xk = w.get(k, p);
                    let yk = w.get(k, q);
                    w.set(k, p, xk.scale(c) - sp.conj() * yk);
                    w.set(k, q, sp * xk + yk.scale(c));
                }
                // Matching row update (J^dagger from the left).
                for k in 0..n {
                    let xk = w.get(p, k);
                    let yk = w.get(q, k);
                    w.set(p, k, xk.scale(c) - sp * yk);
                    w.set(q, k, sp.conj() * xk + yk.scale(c));
                }
                // Clean the pivot pair exactly.
                let zpq = Complex64::new(0.0, 0.0);
                w.set(p, q, zpq);
                w.set(q, p, zpq);
                w.set(p, p, Complex64::new(w.get(p, p).re, 0.0));
                w.set(q, q, Complex64::new(w.get(q, q).re, 0.0));
                for k in 0..n {
                    let xk = v.get(k, p);
                    let yk = v.get(k, q);
                    v.set(k, p, xk.scale(c) - sp.conj() * yk);
                    v.set(k, q, sp * xk + yk.scale(c));
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w.get(i, i).re.partial_cmp(&w.get(j, j).re).unwrap());
    let values = order.iter().map(|&i| w.get(i, i).re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    HermitianEig { values, vectors }
}

/// Singular value decomposition `a = U diag(s) V^dagger` with full square
/// unitary factors.
pub struct Svd {
    pub u: ComplexMatrix,
    /// Singular values in descending order, `min(rows, cols)` of them.
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    if m.rows() < m.cols() {
        let t = svd(&m.adjoint());
        return Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        };
    }
    let (rows, cols) = (m.rows(), m.cols());
    let mut w = m.clone();
    let mut v = ComplexMatrix::identity(cols);

    let col_dot = |w: &ComplexMatrix, p: usize, q: usize| -> Complex64 {
        (0..rows).map(|k| w.get(k, p).conj() * w.get(k, q)).sum()
    };

    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = col_dot(&w, p, p).re;
                let beta = col_dot(&w, q, q).re;
                let gamma = col_dot(&w, p, q);
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt().max(1e-300) {
                    continue;
                }
                rotated = true;
                let (c, s, phase) = jacobi_rotation(alpha, beta, gamma);
                let sp = phase.scale(s);
                for k in 0..rows {
                    let xk = w.get(k, p);
                    let yk = w.get(k, q);
                    w.set(k, p, xk.scale(c) - sp.conj() * yk);
                    w.set(k, q, sp * xk + yk.scale(c));
                }
                for k in 0..cols {
                    let xk = v.get(k, p);
                    let yk = v.get(k, q);
                    v.set(k, p, xk.scale(c) - sp.conj() * yk);
                    v.set(k, q, sp * xk + yk.scale(c));
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // Column norms are the singular values; sort descending.
    let mut norms: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|k| w.get(k, j).norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    norms = order.iter().map(|&j| norms[j]).collect();
    let v_sorted = ComplexMatrix::from_fn(cols, cols, |i, j| v.get(i, order[j]));

    // Left vectors: normalized columns of W for nonnegligible singular values,
    // then an orthonormal completion for the rest.
    let sigma_floor = norms.first().copied().unwrap_or(0.0) * 1e-13;
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(rows);
    for (slot, &j) in order.iter().enumerate() {
        if norms[slot] > sigma_floor && norms[slot] > 0.0 {
            u_cols.push((0..rows).map(|k| w.get(k, j) / norms[slot]).collect());
        }
    }
    complete_orthonormal(&mut u_cols, rows);
    let u = ComplexMatrix::from_fn(rows, rows, |i, j| u_cols[j][i]);

    Svd {
        u,
        singular_values: norms,
        v: v_sorted,
    }
}

/// Extend a set of orthonormal columns to a full orthonormal basis of C^dim.
/// Each round orthogonalizes every standard basis vector against the current
/// set and keeps the one with the largest residual; that residual norm is at
/// least sqrt((dim - k)/dim), so the loop always makes progress.
fn complete_orthonormal(cols: &mut Vec<Vec<Complex64>>, dim: usize) {
    let orthogonalize = |cols: &[Vec<Complex64>], vec: &mut Vec<Complex64>| {
        for existing in cols {
            let overlap: Complex64 = existing
                .iter()
                .zip(vec.iter())
                .map(|(e, x)| e.conj() * x)
                .sum();
            for (x, e) in vec.iter_mut().zip(existing.iter()) {
                *x -= overlap * e;
            }
        }
    };
    while cols.len() < dim {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for candidate in 0..dim {
            let mut vec: Vec<Complex64> = (0..dim)
                .map(|i| Complex64::new(if i == candidate { 1.0 } else { 0.0 }, 0.0))
                .collect();
            orthogonalize(cols, &mut vec);
            let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.as_ref().map_or(true, |(n, _)| norm > *n) {
                best = Some((norm, vec));
            }
        }
        let (norm, mut vec) = best.expect("dim > 0");
        assert!(norm > 1e-8, "orthonormal completion found no residual direction");
        for x in vec.iter_mut() {
            *x = *x / norm;
        }
        // Second pass keeps the basis orthonormal to machine precision.
        orthogonalize(cols, &mut vec);
        let norm2 = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in vec.iter_mut() {
            *x = *x / norm2;
        }
        cols.push(vec);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    fn unitary_deviation(m: &ComplexMatrix) -> f64 {
        m.adjoint()
            .matmul(m)
            .sub(&ComplexMatrix::identity(m.cols()))
            .max_abs()
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        for seed in 0..5u64 {
            let n = 2 + (seed as usize % 5) * 3; // 2, 5, 8, 11, 14
            let g = random_matrix(n, n, seed);
            let h = g.add(&g.adjoint());
            let eig = hermitian_eig(&h);
            assert!(unitary_deviation(&eig.vectors) < 1e-12);
            let d = ComplexMatrix::diagonal_real(&eig.values);
            let rebuilt = eig.vectors.matmul(&d).matmul(&eig.vectors.adjoint());
            assert!(rebuilt.sub(&h).max_abs() < 1e-12 * h.hs_norm().max(1.0));
            for w in eig.values.windows(2) {
                assert!(w[0] <= w[1] + 1e-12);
            }
        }
    }

    #[test]
    fn eig_known_two_by_two() {
        // [[0, -i], [i, 0]] has eigenvalues -1, 1.
        let m = ComplexMatrix::from_rows(vec![
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
            vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
        ])
        .unwrap();
        let eig = hermitian_eig(&m);
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn svd_reconstructs_random_rectangular() {
        for (rows, cols, seed) in [(4usize, 4usize, 1u64), (6, 3, 2), (3, 6, 3), (9, 9, 4)] {
            let a = random_matrix(rows, cols, seed);
            let f = svd(&a);
            assert!(unitary_deviation(&f.u) < 1e-12);
            assert!(unitary_deviation(&f.v) < 1e-12);
            let k = rows.min(cols);
            assert_eq!(f.singular_values.len(), k);
            let mut sigma = ComplexMatrix::zeros(rows, cols);
            for i in 0..k {
                sigma.set(i, i, Complex64::new(f.singular_values[i], 0.0));
                assert!(f.singular_values[i] >= -0.0);
            }
            let rebuilt = f.u.matmul(&sigma).matmul(&f.v.adjoint());
            assert!(rebuilt.sub(&a).max_abs() < 1e-12 * a.hs_norm().max(1.0));
        }
    }

    #[test]
    fn svd_exact_zero_singular_values_stay_small() {
        // Rank-1 matrix: second singular value must sit at absolute roundoff,
        // far below the 1e-10 rank cutoff.
        let a = ComplexMatrix::from_rows(vec![
            vec![Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)],
            vec![Complex64::new(1.2, 0.0), Complex64::new(1.6, 0.0)],
        ])
        .unwrap();
        let f = svd(&a);
        assert!(f.singular_values[1].abs() < 1e-14);
    }

    #[test]
    fn svd_known_diagonal() {
        let a = ComplexMatrix::diagonal_real(&[1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()]);
        let f = svd(&a);
        let s = 1.0 / 2f64.sqrt();
        assert!((f.singular_values[0] - s).abs() < 1e-15);
        assert!((f.singular_values[1] - s).abs() < 1e-15);
    }
}
