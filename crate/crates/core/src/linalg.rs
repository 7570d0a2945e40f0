//! Small dense linear algebra: Householder least squares, symmetric Jacobi
//! eigenvalues and the implicit QL iteration for symmetric tridiagonals.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Column-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Real> Dense<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }
}

impl<T> std::ops::Index<(usize, usize)> for Dense<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[j * self.rows + i]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Dense<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[j * self.rows + i]
    }
}

/// Result of a Householder least-squares solve.
#[derive(Clone, Debug)]
pub struct LeastSquares<T> {
    pub solution: Vec<T>,
    /// Upper-triangular factor `R` (p × p) of the design matrix.
    pub r: Dense<T>,
    pub residual_norm_sq: T,
}

/// Minimizes `‖A x − b‖₂` by Householder QR. `a` is overwritten.
pub fn least_squares<T: Real>(mut a: Dense<T>, mut b: Vec<T>) -> Result<LeastSquares<T>> {
    let (n, p) = (a.rows, a.cols);
    if n < p {
        return Err(Error::Fit(format!("underdetermined system ({n} rows, {p} unknowns)")));
    }
    for k in 0..p {
        let norm = a.col(k)[k..].iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(Error::Fit(format!("design matrix column {k} is zero")));
        }
        let alpha = if a[(k, k)] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a.col(k)[k..].to_vec();
        v[0] -= alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        if vnorm2 > T::zero() {
            for j in k..p {
                let col = &mut a.col_mut(j)[k..];
                let s = T::lit(2.0) * v.iter().zip(col.iter()).map(|(&x, &y)| x * y).sum::<T>() / vnorm2;
                for (c, &x) in col.iter_mut().zip(&v) {
                    *c -= s * x;
                }
            }
            let s = T::lit(2.0) * v.iter().zip(&b[k..]).map(|(&x, &y)| x * y).sum::<T>() / vnorm2;
            for (c, &x) in b[k..].iter_mut().zip(&v) {
                *c -= s * x;
            }
        }
    }
    let mut r = Dense::zeros(p, p);
    for j in 0..p {
        for i in 0..=j {
            r[(i, j)] = a[(i, j)];
        }
    }
    let mut x = vec![T::zero(); p];
    for i in (0..p).rev() {
        let mut s = b[i];
        for j in (i + 1)..p {
            s -= r[(i, j)] * x[j];
        }
        if r[(i, i)] == T::zero() {
            return Err(Error::Fit("rank-deficient design matrix".into()));
        }
        x[i] = s / r[(i, i)];
    }
    let residual_norm_sq = b[p..].iter().map(|&v| v * v).sum();
    Ok(LeastSquares { solution: x, r, residual_norm_sq })
}

/// `(RᵀR)⁻¹` from an invertible upper-triangular `R`.
pub fn normal_inverse<T: Real>(r: &Dense<T>) -> Dense<T> {
    let p = r.rows;
    // R⁻¹ by back substitution, column by column.
    let mut rinv = Dense::zeros(p, p);
    for j in 0..p {
        for i in (0..=j).rev() {
            let mut s = if i == j { T::one() } else { T::zero() };
            for k in (i + 1)..=j {
                s -= r[(i, k)] * rinv[(k, j)];
            }
            rinv[(i, j)] = s / r[(i, i)];
        }
    }
    let mut out = Dense::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let mut s = T::zero();
            for k in i.max(j)..p {
                s += rinv[(i, k)] * rinv[(j, k)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations (ascending).
pub fn symmetric_eigenvalues<T: Real>(m: &Dense<T>) -> Vec<T> {
    let n = m.rows;
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: T = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)] * a[(i, j)]).sum();
        let diag: T = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off <= T::epsilon() * T::epsilon() * diag {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalue"));
    ev
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e` (`e[i]` couples rows `i` and `i+1`).
///
/// Returns ascending eigenvalues and, when `vectors` is set, the matching
/// orthonormal eigenvectors as columns.
pub fn tridiagonal_eigen<T: Real>(d: &[T], e: &[T], vectors: bool) -> Result<(Vec<T>, Option<Dense<T>>)> {
    let n = d.len();
    let mut d = d.to_vec();
    let mut e: Vec<T> = e.iter().copied().chain(std::iter::once(T::zero())).collect();
    e.truncate(n);
    let mut z = vectors.then(|| Dense::identity(n));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::numeric("tridiagonal QL", format!("no convergence for eigenvalue {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (T::lit(2.0) * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + T::lit(2.0) * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_mut() {
                    for k in 0..n {
                        let f = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * f;
                        z[(k, i)] = c * z[(k, i)] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalue"));
    let values = order.iter().map(|&i| d[i]).collect();
    let vecs = z.map(|z| {
        let mut out = Dense::zeros(n, n);
        for (new, &old) in order.iter().enumerate() {
            out.col_mut(new).copy_from_slice(z.col(old));
        }
        out
    });
    Ok((values, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let mut a = Dense::zeros(5, 2);
        for (i, &x) in xs.iter().enumerate() {
            a[(i, 0)] = 1.0;
            a[(i, 1)] = x;
        }
        let b: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let ls = least_squares(a, b).unwrap();
        assert!((ls.solution[0] - 2.0).abs() < 1e-14);
        assert!((ls.solution[1] + 0.5).abs() < 1e-14);
        assert!(ls.residual_norm_sq < 1e-26);
    }

    #[test]
    fn jacobi_eigenvalues() {
        let mut m = Dense::zeros(3, 3);
        let vals = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = vals[i][j];
            }
        }
        let ev = symmetric_eigenvalues(&m);
        let s2 = 2f64.sqrt();
        for (got, want) in ev.iter().zip([2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn tridiagonal_matches_closed_form() {
        // Second-difference matrix: eigenvalues 2 − 2cos(kπ/(n+1)).
        let n = 40;
        let d = vec![2.0f64; n];
        let e = vec![-1.0f64; n - 1];
        let (vals, vecs) = tridiagonal_eigen(&d, &e, true).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * (((k + 1) as f64) * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((v - exact).abs() < 1e-13);
        }
        let z = vecs.unwrap();
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = z.col(i).iter().zip(z.col(j)).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }
}
