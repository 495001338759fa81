//! Small dense kernels for n <= 3 plus a CSR matrix with a preconditioned
//! BiCGStab solver. Everything here is deterministic; no randomized pivoting.

use crate::error::{Error, Result};

/// Symmetric matrix in packed storage for n in {1, 2, 3}.
///
/// Layout: diagonal first, then off-diagonals row by row:
/// n=2 -> [a11, a22, a12]; n=3 -> [a11, a22, a33, a12, a13, a23].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat {
    pub n: usize,
    pub a: [f64; 6],
}

impl SymMat {
    pub fn zero(n: usize) -> Self {
        SymMat { n, a: [0.0; 6] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if i == j {
            self.a[i]
        } else {
            match (self.n, i, j) {
                (2, 0, 1) => self.a[2],
                (3, 0, 1) => self.a[3],
                (3, 0, 2) => self.a[4],
                (3, 1, 2) => self.a[5],
                _ => unreachable!("bad index"),
            }
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if i == j {
            self.a[i] = v;
        } else {
            match (self.n, i, j) {
                (2, 0, 1) => self.a[2] = v,
                (3, 0, 1) => self.a[3] = v,
                (3, 0, 2) => self.a[4] = v,
                (3, 1, 2) => self.a[5] = v,
                _ => unreachable!("bad index"),
            }
        }
    }

    pub fn det(&self) -> f64 {
        match self.n {
            1 => self.a[0],
            2 => self.a[0] * self.a[1] - self.a[2] * self.a[2],
            3 => {
                let (a, b, c) = (self.a[0], self.a[1], self.a[2]);
                let (d, e, f) = (self.a[3], self.a[4], self.a[5]);
                a * (b * c - f * f) - d * (d * c - f * e) + e * (d * f - b * e)
            }
            _ => unreachable!(),
        }
    }

    pub fn trace(&self) -> f64 {
        self.a[..self.n].iter().sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        match self.n {
            1 => [self.a[0], 0.0, 0.0],
            2 => {
                let (p, q, r) = (self.a[0], self.a[1], self.a[2]);
                let mean = 0.5 * (p + q);
                let disc = (0.5 * (p - q)).hypot(r);
                [mean - disc, mean + disc, 0.0]
            }
            3 => {
                let mut l = eig3(self);
                l.sort_by(|x, y| x.partial_cmp(y).unwrap());
                l
            }
            _ => unreachable!(),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Inverse, assuming the determinant is safely away from zero.
    pub fn inverse(&self) -> Result<SymMat> {
        let det = self.det();
        if det.abs() < 1e-300 || !det.is_finite() {
            return Err(Error::SingularHessian(format!("det = {det:e}")));
        }
        let mut inv = SymMat::zero(self.n);
        match self.n {
            1 => inv.a[0] = 1.0 / det,
            2 => {
                inv.a[0] = self.a[1] / det;
                inv.a[1] = self.a[0] / det;
                inv.a[2] = -self.a[2] / det;
            }
            3 => {
                let (a, b, c) = (self.a[0], self.a[1], self.a[2]);
                let (d, e, f) = (self.a[3], self.a[4], self.a[5]);
                inv.a[0] = (b * c - f * f) / det;
                inv.a[1] = (a * c - e * e) / det;
                inv.a[2] = (a * b - d * d) / det;
                inv.a[3] = (e * f - d * c) / det;
                inv.a[4] = (d * f - e * b) / det;
                inv.a[5] = (d * e - a * f) / det;
            }
            _ => unreachable!(),
        }
        Ok(inv)
    }

    /// Rebuild the matrix with eigenvalues floored at `floor`.
    /// Returns the floored matrix and whether any eigenvalue was clipped.
    pub fn floor_eigenvalues(&self, floor: f64) -> (SymMat, bool) {
        let evs = self.eigenvalues();
        let clipped = (0..self.n).any(|i| evs[i] < floor);
        if !clipped {
            return (*self, false);
        }
        match self.n {
            1 => {
                let mut m = *self;
                m.a[0] = m.a[0].max(floor);
                (m, true)
            }
            2 => {
                let (l, q) = eig2_full(self);
                let l0 = l[0].max(floor);
                let l1 = l[1].max(floor);
                // A = Q diag(l) Q^T with Q = [[c,-s],[s,c]]
                let (c, s) = q;
                let mut m = SymMat::zero(2);
                m.a[0] = c * c * l0 + s * s * l1;
                m.a[1] = s * s * l0 + c * c * l1;
                m.a[2] = c * s * (l0 - l1);
                (m, true)
            }
            3 => {
                let (l, v) = eig3_full(self);
                let mut m = SymMat::zero(3);
                for i in 0..3 {
                    for j in i..3 {
                        let mut s = 0.0;
                        for k in 0..3 {
                            s += v[k][i] * l[k].max(floor) * v[k][j];
                        }
                        m.set(i, j, s);
                    }
                }
                (m, true)
            }
            _ => unreachable!(),
        }
    }

    /// Generalized eigenvalues of the pencil (self, g) with g positive definite,
    /// ascending. These are the eigenvalues of L^{-1} A L^{-T} for g = L L^T.
    pub fn generalized_eigenvalues(&self, g: &SymMat) -> Result<[f64; 3]> {
        let l = cholesky(g)?;
        // B = L^{-1} A L^{-T}
        let n = self.n;
        let mut a = [[0.0f64; 3]; 3];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = self.get(i, j);
            }
        }
        // Solve L X = A (column-wise), then B = X L^{-T}: solve L B^T = X^T.
        for j in 0..n {
            for i in 0..n {
                let mut s = a[i][j];
                for k in 0..i {
                    s -= l[i][k] * a[k][j];
                }
                a[i][j] = s / l[i][i];
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[j][k] * a[i][k];
                }
                a[i][j] = s / l[j][j];
            }
        }
        let mut b = SymMat::zero(n);
        for i in 0..n {
            for j in i..n {
                b.set(i, j, 0.5 * (a[i][j] + a[j][i]));
            }
        }
        Ok(b.eigenvalues())
    }
}

/// Eigen pair of a 2x2 symmetric matrix: eigenvalues and the rotation (c, s)
/// such that the first eigenvector is (c, s).
fn eig2_full(m: &SymMat) -> ([f64; 2], (f64, f64)) {
    let (p, q, r) = (m.a[0], m.a[1], m.a[2]);
    let mean = 0.5 * (p + q);
    let disc = (0.5 * (p - q)).hypot(r);
    let l0 = mean - disc;
    let l1 = mean + disc;
    if r.abs() < 1e-300 {
        if p <= q {
            ([l0, l1], (1.0, 0.0))
        } else {
            ([l0, l1], (0.0, 1.0))
        }
    } else {
        // (p - l0) c + r s = 0
        let (vx, vy) = (r, l0 - p);
        let nrm = vx.hypot(vy);
        ([l0, l1], (vx / nrm, vy / nrm))
    }
}

/// Eigenvalues of a 3x3 symmetric matrix, unordered (analytic method).
fn eig3(m: &SymMat) -> [f64; 3] {
    let p1 = m.a[3] * m.a[3] + m.a[4] * m.a[4] + m.a[5] * m.a[5];
    if p1 < 1e-300 {
        return [m.a[0], m.a[1], m.a[2]];
    }
    let q = m.trace() / 3.0;
    let p2 = (m.a[0] - q).powi(2) + (m.a[1] - q).powi(2) + (m.a[2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = *m;
    for i in 0..3 {
        b.a[i] -= q;
    }
    let r = b.det() / (2.0 * p * p * p);
    let phi = (r.clamp(-1.0, 1.0)).acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let l2 = 3.0 * q - l1 - l3;
    [l1, l2, l3]
}

/// Eigenvalues plus orthonormal eigenvectors of a 3x3 symmetric matrix.
/// Vectors are refined by inverse-iteration-free cross products, adequate at
/// the tolerances used here (flooring of nearly singular Hessians).
fn eig3_full(m: &SymMat) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut l = eig3(m);
    l.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut vecs = [[0.0f64; 3]; 3];
    for (idx, &lam) in l.iter().enumerate() {
        // rows of (A - lam I)
        let rows = [
            [m.get(0, 0) - lam, m.get(0, 1), m.get(0, 2)],
            [m.get(0, 1), m.get(1, 1) - lam, m.get(1, 2)],
            [m.get(0, 2), m.get(1, 2), m.get(2, 2) - lam],
        ];
        let c01 = cross(&rows[0], &rows[1]);
        let c02 = cross(&rows[0], &rows[2]);
        let c12 = cross(&rows[1], &rows[2]);
        let cands = [c01, c02, c12];
        let mut best = cands[0];
        for c in &cands[1..] {
            if norm3(c) > norm3(&best) {
                best = *c;
            }
        }
        let nrm = norm3(&best);
        if nrm < 1e-14 {
            // degenerate pair: fall back to a coordinate axis orthogonal to
            // previously found vectors
            let mut v = [0.0; 3];
            v[idx] = 1.0;
            for prev in vecs.iter().take(idx) {
                let d = dot3(&v, prev);
                for k in 0..3 {
                    v[k] -= d * prev[k];
                }
            }
            let n2 = norm3(&v).max(1e-300);
            for x in v.iter_mut() {
                *x /= n2;
            }
            vecs[idx] = v;
        } else {
            vecs[idx] = [best[0] / nrm, best[1] / nrm, best[2] / nrm];
        }
    }
    (l, vecs)
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Lower-triangular Cholesky factor of a small SPD matrix.
pub fn cholesky(g: &SymMat) -> Result<[[f64; 3]; 3]> {
    let n = g.n;
    let mut l = [[0.0f64; 3]; 3];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g.get(i, j);
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::NotConvex(format!(
                        "metric not positive definite (pivot {s:e})"
                    )));
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from per-row (col, val) lists; duplicate columns are summed.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut iter = row.into_iter();
            if let Some((mut c, mut v)) = iter.next() {
                for (c2, v2) in iter {
                    if c2 == c {
                        v += v2;
                    } else {
                        cols.push(c);
                        vals.push(v);
                        c = c2;
                        v = v2;
                    }
                }
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[k] == i {
                    d[i] = self.vals[k];
                }
            }
        }
        d
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned BiCGStab. Reduces the residual to
/// `rel_tol * |b|` or fails after `max_iter` iterations.
pub fn bicgstab(a: &CsrMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let bn = norm(b);
    if bn == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let diag = a.diagonal();
    let minv: Vec<f64> = diag
        .iter()
        .map(|&d| if d.abs() > 1e-300 { 1.0 / d } else { 1.0 })
        .collect();
    let precond = |r: &[f64], z: &mut [f64]| {
        for i in 0..n {
            z[i] = minv[i] * r[i];
        }
    };

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = r.clone();
    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut t = vec![0.0; n];

    for _ in 0..max_iter {
        let rho1 = dot(&r0, &r);
        if rho1.abs() < 1e-300 {
            return Err(Error::LinearSolve("bicgstab breakdown (rho = 0)".into()));
        }
        let beta = (rho1 / rho) * (alpha / omega);
        rho = rho1;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond(&p, &mut phat);
        a.matvec(&phat, &mut v);
        let r0v = dot(&r0, &v);
        if r0v.abs() < 1e-300 {
            return Err(Error::LinearSolve("bicgstab breakdown (r0.v = 0)".into()));
        }
        alpha = rho / r0v;
        let mut s = r.clone();
        for i in 0..n {
            s[i] -= alpha * v[i];
        }
        if norm(&s) <= rel_tol * bn {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            return Ok(x);
        }
        precond(&s, &mut shat);
        a.matvec(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt.abs() < 1e-300 {
            return Err(Error::LinearSolve("bicgstab breakdown (t = 0)".into()));
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm(&r) <= rel_tol * bn {
            return Ok(x);
        }
        if omega.abs() < 1e-300 {
            return Err(Error::LinearSolve("bicgstab breakdown (omega = 0)".into()));
        }
    }
    Err(Error::LinearSolve(format!(
        "bicgstab did not reach rel_tol {rel_tol:e} in {max_iter} iterations"
    )))
}
