//! Small dense linear algebra used internally: Householder least squares,
//! one-sided Jacobi SVD, natural cubic spline interpolation and a banded
//! Cholesky solver. Sizes in this crate stay in the hundreds, so simplicity
//! and determinism win over blocked algorithms.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }
}

/// Least-squares fit `argmin ||X b - y||` with auxiliary quantities for
/// t statistics.
#[derive(Debug, Clone)]
pub(crate) struct LstsqFit {
    pub coef: Vec<f64>,
    pub rss: f64,
    /// Diagonal of (X'X)^-1, aligned with `coef`.
    pub xtx_inv_diag: Vec<f64>,
    pub n: usize,
    pub k: usize,
}

impl LstsqFit {
    /// Standard error of coefficient `j` with `n - k` residual degrees of
    /// freedom.
    pub fn coef_se(&self, j: usize) -> f64 {
        let dof = (self.n - self.k) as f64;
        (self.rss / dof * self.xtx_inv_diag[j]).sqrt()
    }
}

/// Householder-QR least squares. Errors on rank deficiency.
pub(crate) fn lstsq(x: &Mat, y: &[f64]) -> Result<LstsqFit> {
    let n = x.rows;
    let k = x.cols;
    if y.len() != n || n < k || k == 0 {
        return Err(Error::Degenerate("least-squares shape mismatch"));
    }
    let mut a = x.clone();
    let mut b = y.to_vec();

    // Factor A = QR, applying reflections to b as we go.
    let mut rdiag = vec![0.0; k];
    for j in 0..k {
        let mut norm_sq = 0.0;
        for i in j..n {
            norm_sq += a.at(i, j) * a.at(i, j);
        }
        let norm = norm_sq.sqrt();
        if norm == 0.0 {
            return Err(Error::Degenerate("singular design matrix"));
        }
        let alpha = if a.at(j, j) >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n - j];
        v[0] = a.at(j, j) - alpha;
        for i in (j + 1)..n {
            v[i - j] = a.at(i, j);
        }
        let vtv: f64 = v.iter().map(|t| t * t).sum();
        if vtv > 0.0 {
            for c in j..k {
                let mut dot = 0.0;
                for i in j..n {
                    dot += v[i - j] * a.at(i, c);
                }
                let scale = 2.0 * dot / vtv;
                for i in j..n {
                    let val = a.at(i, c) - scale * v[i - j];
                    a.set(i, c, val);
                }
            }
            let mut dot = 0.0;
            for i in j..n {
                dot += v[i - j] * b[i];
            }
            let scale = 2.0 * dot / vtv;
            for i in j..n {
                b[i] -= scale * v[i - j];
            }
        }
        rdiag[j] = a.at(j, j);
    }

    let max_diag = rdiag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = max_diag * (n as f64) * f64::EPSILON * 16.0;
    if rdiag.iter().any(|v| v.abs() <= tol) {
        return Err(Error::Degenerate("singular design matrix"));
    }

    // Back-substitute R coef = Qt y.
    let mut coef = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = b[j];
        for c in (j + 1)..k {
            s -= a.at(j, c) * coef[c];
        }
        coef[j] = s / a.at(j, j);
    }
    let rss: f64 = b[k..].iter().map(|v| v * v).sum();

    // (X'X)^-1 = R^-1 R^-T; diagonal entries are squared row norms of R^-1.
    let mut rinv = Mat::zeros(k, k);
    for col in 0..k {
        // solve R z = e_col
        let mut z = vec![0.0; k];
        z[col] = 1.0;
        for j in (0..=col).rev() {
            let mut s = z[j];
            for c in (j + 1)..k {
                s -= a.at(j, c) * rinv.at(c, col);
            }
            rinv.set(j, col, s / a.at(j, j));
        }
    }
    let xtx_inv_diag = (0..k)
        .map(|r| (0..k).map(|c| rinv.at(r, c) * rinv.at(r, c)).sum())
        .collect();

    Ok(LstsqFit {
        coef,
        rss: rss.max(0.0),
        xtx_inv_diag,
        n,
        k,
    })
}

/// Thin SVD `a = U diag(sigma) V'` for `a.rows >= a.cols`, by one-sided Jacobi
/// rotations on the columns. Singular values are sorted descending; columns of
/// `u` with numerically zero singular value are left as zero vectors.
pub(crate) struct Svd {
    pub u: Mat,
    pub sigma: Vec<f64>,
    pub v: Mat,
}

pub(crate) fn jacobi_svd(a: &Mat) -> Svd {
    assert!(a.rows >= a.cols, "jacobi_svd expects rows >= cols");
    let m = a.rows;
    let n = a.cols;
    let mut b = a.clone();
    let mut v = Mat::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }

    let tol = 1e-14;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..m {
                    let bp = b.at(i, p);
                    let bq = b.at(i, q);
                    app += bp * bp;
                    aqq += bq * bq;
                    apq += bp * bq;
                }
                if apq.abs() <= tol * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let bp = b.at(i, p);
                    let bq = b.at(i, q);
                    b.set(i, p, c * bp - s * bq);
                    b.set(i, q, s * bp + c * bq);
                }
                for i in 0..n {
                    let vp = v.at(i, p);
                    let vq = v.at(i, q);
                    v.set(i, p, c * vp - s * vq);
                    v.set(i, q, s * vp + c * vq);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| b.at(i, j) * b.at(i, j)).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());

    let mut u = Mat::zeros(m, n);
    let mut vs = Mat::zeros(n, n);
    let mut sigma = vec![0.0; n];
    let sig_max = norms.iter().cloned().fold(0.0f64, f64::max);
    for (new_j, &old_j) in order.iter().enumerate() {
        sigma[new_j] = norms[old_j];
        if norms[old_j] > sig_max * 1e-300 && norms[old_j] > 0.0 {
            for i in 0..m {
                u.set(i, new_j, b.at(i, old_j) / norms[old_j]);
            }
        }
        for i in 0..n {
            vs.set(i, new_j, v.at(i, old_j));
        }
    }
    Svd { u, sigma, v: vs }
}

/// Natural cubic spline through strictly increasing knots.
#[derive(Debug, Clone)]
pub(crate) struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at the knots
    d2: Vec<f64>,
}

impl CubicSpline {
    pub fn fit(xs: &[f64], ys: &[f64]) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() >= 2);
        let n = xs.len();
        let mut d2 = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior tridiagonal system.
            let mut sub = vec![0.0; n - 2];
            let mut diag = vec![0.0; n - 2];
            let mut sup = vec![0.0; n - 2];
            let mut rhs = vec![0.0; n - 2];
            for i in 1..(n - 1) {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                sub[i - 1] = h0 / 6.0;
                diag[i - 1] = (h0 + h1) / 3.0;
                sup[i - 1] = h1 / 6.0;
                rhs[i - 1] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
            }
            for i in 1..(n - 2) {
                let w = sub[i] / diag[i - 1];
                diag[i] -= w * sup[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut sol = vec![0.0; n - 2];
            sol[n - 3] = rhs[n - 3] / diag[n - 3];
            for i in (0..(n - 3)).rev() {
                sol[i] = (rhs[i] - sup[i] * sol[i + 1]) / diag[i];
            }
            d2[1..(n - 1)].copy_from_slice(&sol);
        }
        CubicSpline {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            d2,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        // segment index by binary search, clamped to the boundary segments
        let mut seg = self.xs.partition_point(|&k| k < x);
        seg = seg.clamp(1, n - 1);
        let (x0, x1) = (self.xs[seg - 1], self.xs[seg]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * self.ys[seg - 1]
            + b * self.ys[seg]
            + ((a * a * a - a) * self.d2[seg - 1] + (b * b * b - b) * self.d2[seg]) * h * h / 6.0
    }
}

/// Solve the symmetric positive-definite pentadiagonal system given by the
/// main diagonal and the first and second off-diagonals (banded Cholesky).
pub(crate) fn solve_pentadiagonal(
    diag: &[f64],
    off1: &[f64],
    off2: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(off1.len() + 1 == n || n == 0);
    assert!(n < 2 || off2.len() + 2 == n);
    // L with bands l0 (diag), l1, l2 such that L L' = A.
    let mut l0 = vec![0.0; n];
    let mut l1 = vec![0.0; n.saturating_sub(1)];
    let mut l2 = vec![0.0; n.saturating_sub(2)];
    for i in 0..n {
        let mut v = diag[i];
        if i >= 1 {
            v -= l1[i - 1] * l1[i - 1];
        }
        if i >= 2 {
            v -= l2[i - 2] * l2[i - 2];
        }
        if v <= 0.0 {
            return Err(Error::Degenerate(
                "pentadiagonal system not positive definite",
            ));
        }
        l0[i] = v.sqrt();
        if i + 1 < n {
            let mut v = off1[i];
            if i >= 1 {
                v -= l1[i - 1] * l2[i - 1];
            }
            l1[i] = v / l0[i];
        }
        if i + 2 < n {
            l2[i] = off2[i] / l0[i];
        }
    }
    // forward solve L z = rhs
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut v = rhs[i];
        if i >= 1 {
            v -= l1[i - 1] * z[i - 1];
        }
        if i >= 2 {
            v -= l2[i - 2] * z[i - 2];
        }
        z[i] = v / l0[i];
    }
    // back solve L' c = z
    let mut c = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = z[i];
        if i + 1 < n {
            v -= l1[i] * c[i + 1];
        }
        if i + 2 < n {
            v -= l2[i] * c[i + 2];
        }
        c[i] = v / l0[i];
    }
    Ok(c)
}
