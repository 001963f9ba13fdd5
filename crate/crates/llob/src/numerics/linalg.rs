//! Small dense linear algebra: tridiagonal solves and symmetric
//! eigenvalues (cyclic Jacobi), enough for the grid solver and the
//! positivity audit of the cost kernel.

use crate::scalar::Scalar;

/// Solve a tridiagonal system with the Thomas algorithm.
///
/// `lower[i]` multiplies x[i-1] in row i (lower[0] unused), `diag[i]` x[i],
/// `upper[i]` x[i+1] (upper[n-1] unused). `rhs` is overwritten with the
/// solution.
pub fn solve_tridiagonal<T: Scalar>(lower: &[T], diag: &[T], upper: &[T], rhs: &mut [T]) {
    let n = diag.len();
    let mut c_star = vec![T::zero(); n];
    let mut denom = diag[0];
    c_star[0] = upper[0] / denom;
    rhs[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c_star[i - 1];
        if i + 1 < n {
            c_star[i] = upper[i] / denom;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - c_star[i] * rhs[i + 1];
    }
}

/// Eigenvalues of a dense symmetric matrix (row-major, n x n) by the
/// cyclic Jacobi method. Returns the eigenvalues in ascending order.
pub fn symmetric_eigenvalues<T: Scalar>(matrix: &[T], n: usize) -> Vec<T> {
    let mut a = matrix.to_vec();
    let idx = |i: usize, j: usize| i * n + j;
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off = off + a[idx(i, j)] * a[idx(i, j)];
            }
        }
        let scale: T = (0..n).fold(T::zero(), |acc, i| acc + a[idx(i, i)].abs()) + off.sqrt();
        if off.sqrt() <= T::epsilon() * scale.max(T::one()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (T::two() * apq);
                let t = {
                    let s = if theta >= T::zero() { T::one() } else { -T::one() };
                    s / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<T> = (0..n).map(|i| a[idx(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solves_known_system() {
        // [2 1 0; 1 2 1; 0 1 2] x = [4; 8; 8] -> x = [1; 2; 3]
        let lower = [0.0_f64, 1.0, 1.0];
        let diag = [2.0, 2.0, 2.0];
        let upper = [1.0, 1.0, 0.0];
        let mut rhs = [4.0, 8.0, 8.0];
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs);
        assert!((rhs[0] - 1.0).abs() < 1e-14);
        assert!((rhs[1] - 2.0).abs() < 1e-14);
        assert!((rhs[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_eigenvalues_2x2() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let eig = symmetric_eigenvalues(&[2.0_f64, 1.0, 1.0, 2.0], 2);
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_diagonal() {
        let eig = symmetric_eigenvalues(&[3.0_f64, 0.0, 0.0, -1.0], 2);
        assert!((eig[0] + 1.0).abs() < 1e-14);
        assert!((eig[1] - 3.0).abs() < 1e-14);
    }
}
