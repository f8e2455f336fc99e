//! Dense helpers for the small symmetric systems appearing in the score fit
//! and the one-step updates (dimensions are L <= 4 and p1 + p2 <= ~8).
//! Matrices are row-major `Vec<f64>` with explicit dimension.

/// Cholesky factor (lower triangular, row-major) of a symmetric
/// positive-definite matrix, or `None` if the matrix is not PD.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn solve_with_factor(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    // Ly = b
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    // L^T x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// Solve A x = b for symmetric positive-definite A.
pub fn solve_spd(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let l = cholesky(a, n)?;
    Some(solve_with_factor(&l, n, b))
}

/// Inverse of a symmetric positive-definite matrix.
pub fn inv_spd(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let l = cholesky(a, n)?;
    let mut inv = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = solve_with_factor(&l, n, &e);
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    Some(inv)
}

fn norm_1(a: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Reciprocal 1-norm condition number, 0.0 when the matrix is not PD.
pub fn rcond_spd(a: &[f64], n: usize) -> f64 {
    match inv_spd(a, n) {
        Some(inv) => {
            let denom = norm_1(a, n) * norm_1(&inv, n);
            if denom > 0.0 && denom.is_finite() {
                1.0 / denom
            } else {
                0.0
            }
        }
        None => 0.0,
    }
}

pub fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// True when the symmetric matrix is positive definite.
pub fn is_spd(a: &[f64], n: usize) -> bool {
    cholesky(a, n).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let a = vec![4.0, 1.0, 1.0, 3.0];
        let x = solve_spd(&a, 2, &[1.0, 2.0]).unwrap();
        // exact solution (1/11, 7/11)
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_round_trip() {
        let a = vec![2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.1];
        let inv = inv_spd(&a, 3).unwrap();
        for i in 0..3 {
            let ei = mat_vec(&a, 3, &inv[i * 3..(i + 1) * 3].to_vec());
            // rows of inv against columns of a give identity columns transposed;
            // symmetric matrices make this a valid check.
            for (j, v) in ei.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(cholesky(&a, 2).is_none());
        assert_eq!(rcond_spd(&a, 2), 0.0);
    }

    #[test]
    fn rcond_of_identity_is_one() {
        let a = vec![1.0, 0.0, 0.0, 1.0];
        assert!((rcond_spd(&a, 2) - 1.0).abs() < 1e-14);
    }
}
