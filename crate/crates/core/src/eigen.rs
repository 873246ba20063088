//! Eigenvalues of dense real symmetric matrices.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! iteration with Wilkinson-style shifts (the EISPACK tred/tql pair,
//! eigenvalues only).

use crate::dense::Matrix;
use crate::error::{GltError, Result};
use crate::scalar::Scalar;

/// Diagonal `d` and subdiagonal `e` (`e[0] = 0`, `e[i]` couples `i-1` and `i`).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    pub d: Vec<T>,
    pub e: Vec<T>,
}

/// Orthogonally similar tridiagonal form of a symmetric matrix. Only the
/// lower triangle and diagonal are trusted; the matrix is symmetrized first.
pub fn tridiagonalize<T: Scalar>(mut a: Matrix<T>) -> Result<Tridiagonal<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(GltError::DimensionMismatch(format!(
            "eigensolve of a {}x{} matrix",
            n,
            a.cols()
        )));
    }
    for i in 0..n {
        for j in 0..i {
            let v = a.get(i, j);
            a.set(j, i, v);
        }
    }
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    let mut u = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let two = T::lit(2.0);

    for i in (1..n).rev() {
        // Reflect coordinates 0..i so that row i keeps only its (i, i-1) entry.
        let scale: T = a.row(i)[..i].iter().map(|x| x.abs()).sum();
        if i == 1 || scale == T::zero() {
            e[i] = a.get(i, i - 1);
            d[i] = a.get(i, i);
            continue;
        }
        let mut sigma = T::zero();
        for (k, uk) in u.iter_mut().enumerate().take(i) {
            *uk = a.get(i, k) / scale;
            sigma += *uk * *uk;
        }
        let f = u[i - 1];
        let g = if f >= T::zero() {
            -sigma.sqrt()
        } else {
            sigma.sqrt()
        };
        e[i] = scale * g;
        let h = sigma - f * g;
        u[i - 1] = f - g;

        // p = B u / h, K = uᵀp / 2h, q = p − K u over the leading i×i block B.
        let mut k_num = T::zero();
        for r in 0..i {
            let row = &a.row(r)[..i];
            let s: T = row
                .iter()
                .zip(&u[..i])
                .fold(T::zero(), |acc, (&x, &y)| acc + x * y);
            p[r] = s / h;
            k_num += u[r] * p[r];
        }
        let kk = k_num / (two * h);
        for r in 0..i {
            p[r] -= kk * u[r];
        }
        // B ← B − u qᵀ − q uᵀ
        for r in 0..i {
            let (ur, qr) = (u[r], p[r]);
            let row = &mut a.row_mut(r)[..i];
            for (c, x) in row.iter_mut().enumerate() {
                *x -= ur * p[c] + qr * u[c];
            }
        }
        d[i] = a.get(i, i);
    }
    if n > 0 {
        d[0] = a.get(0, 0);
        e[0] = T::zero();
    }
    Ok(Tridiagonal { d, e })
}

#[inline]
fn hypot<T: Scalar>(a: T, b: T) -> T {
    a.hypot(b)
}

/// Eigenvalues of a symmetric tridiagonal matrix, ascending.
pub fn tridiagonal_eigenvalues<T: Scalar>(t: Tridiagonal<T>) -> Result<Vec<T>> {
    let Tridiagonal { mut d, mut e } = t;
    let n = d.len();
    if n == 0 {
        return Ok(d);
    }
    // Shift so that e[i] couples i and i+1.
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(GltError::NoConvergence(l));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = hypot(g, T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(d)
}

/// All eigenvalues of a dense symmetric matrix, ascending.
pub fn symmetric_eigenvalues<T: Scalar>(a: Matrix<T>) -> Result<Vec<T>> {
    tridiagonal_eigenvalues(tridiagonalize(a)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Cyclic Jacobi rotations; slow but independent of the Householder/QL path.
    fn jacobi_eigenvalues(mut a: Matrix<f64>) -> Vec<f64> {
        let n = a.rows();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a.get(i, j).powi(2))
                .sum();
            if off < 1e-26 {
                break;
            }
            for pp in 0..n {
                for q in pp + 1..n {
                    let apq = a.get(pp, q);
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a.get(q, q) - a.get(pp, pp)) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a.get(k, pp), a.get(k, q));
                        a.set(k, pp, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a.get(pp, k), a.get(q, k));
                        a.set(pp, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        let mut d: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
        d.sort_by(|x, y| x.partial_cmp(y).unwrap());
        d
    }

    #[test]
    fn matches_jacobi_on_random_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 3, 5, 8, 17, 30] {
            let mut m = Matrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    let v = rng.random_range(-1.0..1.0);
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
            let fast = symmetric_eigenvalues(m.clone()).unwrap();
            let slow = jacobi_eigenvalues(m);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-10, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn diagonal_and_zero_blocks() {
        let m = Matrix::<f64>::from_fn(4, 4, |i, j| {
            if i == j {
                [3.0, 0.0, -1.0, 0.0][i]
            } else {
                0.0
            }
        });
        assert_eq!(symmetric_eigenvalues(m).unwrap(), vec![-1.0, 0.0, 0.0, 3.0]);
        assert!(symmetric_eigenvalues(Matrix::<f64>::zeros(0, 0))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn single_precision() {
        let m = Matrix::<f32>::from_fn(2, 2, |i, j| if i == j { 0.0 } else { 1.0 });
        let ev = symmetric_eigenvalues(m).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-6 && (ev[1] - 1.0).abs() < 1e-6);
    }
}
