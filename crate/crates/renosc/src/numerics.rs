//! Small dense complex linear algebra kernel.
//!
//! Everything here targets matrices of size 2n ≲ 16: cyclic Jacobi for
//! Hermitian eigenproblems, one-sided Jacobi for singular values, LU with
//! partial pivoting for solves, and a real/imaginary-part splitting for
//! unitary eigendecompositions. No external linear algebra dependency.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: C64 = Complex64 { re: 0.0, im: 1.0 };

/// Default tolerances for the whole pipeline, in one place.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Relative Hermiticity defect allowed by `hermitian_eig`.
    pub hermiticity: f64,
    /// Relative unitarity defect allowed by `unitary_eigphases`.
    pub unitarity: f64,
    /// Reciprocal condition floor for `solve`.
    pub rcond_min: f64,
    /// Relative threshold for `kernel_dim` and intersection dimensions.
    pub kernel: f64,
    /// ODE relative tolerance.
    pub ode_rtol: f64,
    /// ODE absolute tolerance.
    pub ode_atol: f64,
    /// Smallest step before the integrator reports a stall, relative to span.
    pub min_step_rel: f64,
    /// Conjugate-point localization halfwidth in the path parameter.
    pub flow_locate: f64,
    /// Hysteresis band (radians) around phase π for crossing detection.
    pub flow_hysteresis: f64,
    /// Phase distance from π treated as "at -1" for endpoint rules.
    pub phase_at: f64,
    /// Relative last-window variation below which a track is a plateau.
    pub plateau_rel: f64,
    /// Factor over the initial scale above which a track is divergent.
    pub divergence_factor: f64,
    /// Eigen-curve values below this times the matrix norm get the
    /// cancellation-free Rayleigh refinement.
    pub refine_floor: f64,
    /// Minimum approach distance to a singular endpoint.
    pub min_approach: f64,
    /// Niessen curves stop marching once the matrix norm exceeds this:
    /// beyond it even refined small eigenvalues drown in rounding noise.
    pub curve_norm_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity: 1e-9,
            unitarity: 1e-8,
            rcond_min: 1e-13,
            kernel: 1e-8,
            ode_rtol: 1e-10,
            ode_atol: 1e-12,
            min_step_rel: 1e-14,
            flow_locate: 1e-3,
            flow_hysteresis: 1e-4,
            phase_at: 1e-8,
            plateau_rel: 1e-3,
            divergence_factor: 1e6,
            refine_floor: 1e-6,
            min_approach: 1e-6,
            curve_norm_cap: 1e17,
        }
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Construct from row-major data, checking shape and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Contract(format!(
                "entry count {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Contract("non-finite matrix entry".into()));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Contract("ragged rows".into()));
            }
            data.extend_from_slice(row);
        }
        CMatrix::from_vec(r, c, data)
    }

    /// The standard symplectic matrix J = [[0, -I], [I, 0]] of size 2n.
    pub fn symplectic_j(n: usize) -> Self {
        let mut j = CMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            j[(k, n + k)] = -ONE;
            j[(n + k, k)] = ONE;
        }
        j
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[C64]) {
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn from_cols(cols: &[Vec<C64>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, |v| v.len());
        let mut m = CMatrix::zeros(r, c);
        for (j, v) in cols.iter().enumerate() {
            if v.len() != r {
                return Err(Error::Contract("ragged columns".into()));
            }
            m.set_col(j, v);
        }
        Ok(m)
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> CMatrix {
        let data = self.data.iter().map(|z| z.conj()).collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![ZERO; self.rows];
        for i in 0..self.rows {
            let mut s = ZERO;
            for k in 0..self.cols {
                s += self[(i, k)] * v[k];
            }
            out[i] = s;
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        let data = self.data.iter().map(|z| z * s).collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Max-magnitude entry norm.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.sub(&self.adjoint()).norm_max()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Inner product (u, v) = Σ conj(v_i) u_i matching the convention (Ju, v) = v* J u.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| b.conj() * a).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Rotate the phase of `v` so its largest-magnitude component is real positive.
pub fn phase_normalize(v: &mut [C64]) {
    let mut k = 0;
    let mut best = 0.0;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        if a > best {
            best = a;
            k = i;
        }
    }
    if best == 0.0 {
        return;
    }
    let ph = v[k] / best;
    for z in v.iter_mut() {
        *z /= ph;
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvalues in ascending order with orthonormal eigenvectors as
/// the columns of the second component; each eigenvector is phase-normalized
/// so its largest component is real positive.
pub fn hermitian_eig(m: &CMatrix, tol: &Tolerances) -> Result<(Vec<f64>, CMatrix)> {
    if !m.is_square() {
        return Err(Error::Contract("hermitian_eig: non-square input".into()));
    }
    let scale = m.norm_max().max(1e-300);
    if m.hermitian_defect() > tol.hermiticity * scale {
        return Err(Error::Contract(format!(
            "hermitian_eig: Hermiticity defect {:.3e} above {:.3e}",
            m.hermitian_defect(),
            tol.hermiticity * scale
        )));
    }
    let n = m.rows;
    // Work on the exactly-Hermitian part to keep rotations consistent.
    let mut a = m.add(&m.adjoint()).scale(C64::new(0.5, 0.0));
    let mut v = CMatrix::identity(n);

    let off = |a: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&a) > 1e-14 * scale.max(1.0) * (n as f64) && sweeps < 60 {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let abs_apq = apq.norm();
                if abs_apq <= 1e-300 {
                    continue;
                }
                // Phase factor turning the 2x2 block real symmetric.
                let z = apq / abs_apq;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * abs_apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G acts on columns p, q: col_p' = c*col_p - s*conj(z)*col_q,
                // col_q' = s*z*col_p + c*col_q. Apply A <- G* A G, V <- V G.
                let cs = C64::new(c, 0.0);
                let szn = z * s; // s * z
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * cs - aiq * szn.conj();
                    a[(i, q)] = aip * szn + aiq * cs;
                }
                for jj in 0..n {
                    let apj = a[(p, jj)];
                    let aqj = a[(q, jj)];
                    a[(p, jj)] = apj * cs - aqj * szn;
                    a[(q, jj)] = apj * szn.conj() + aqj * cs;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * cs - viq * szn.conj();
                    v[(i, q)] = vip * szn + viq * cs;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (jnew, &(_, jold)) in pairs.iter().enumerate() {
        let mut col = v.col(jold);
        phase_normalize(&mut col);
        vectors.set_col(jnew, &col);
    }
    Ok((values, vectors))
}

/// Eigendecomposition of a unitary matrix via its commuting Hermitian
/// real/imaginary parts. Returns phases in (-π, π] (ascending) and the
/// matching orthonormal eigenvectors.
pub fn unitary_eig(u: &CMatrix, tol: &Tolerances) -> Result<(Vec<f64>, CMatrix)> {
    if !u.is_square() {
        return Err(Error::Contract("unitary_eig: non-square input".into()));
    }
    let n = u.rows;
    let defect = u.adjoint().mul(u).sub(&CMatrix::identity(n)).norm_max();
    if defect > tol.unitarity {
        return Err(Error::Contract(format!(
            "unitary_eig: unitarity defect {defect:.3e} above {:.3e}",
            tol.unitarity
        )));
    }
    let h1 = u.add(&u.adjoint()).scale(C64::new(0.5, 0.0));
    let (cvals, mut v) = hermitian_eig(&h1, tol)?;
    // Split clusters of cos-values with the imaginary part.
    let h2 = u.sub(&u.adjoint()).scale(C64::new(0.0, -0.5));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (cvals[end] - cvals[start]).abs() < 1e-7 {
            end += 1;
        }
        if end - start > 1 {
            let k = end - start;
            let mut w = CMatrix::zeros(n, k);
            for (jj, j) in (start..end).enumerate() {
                w.set_col(jj, &v.col(j));
            }
            let sub = w.adjoint().mul(&h2).mul(&w);
            let (_, q) = hermitian_eig(&sub, tol)?;
            let rot = w.mul(&q);
            for (jj, j) in (start..end).enumerate() {
                v.set_col(j, &rot.col(jj));
            }
        }
        start = end;
    }
    let mut items: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|j| {
            let col = v.col(j);
            let uv = u.matvec(&col);
            let d = inner(&uv, &col); // v* U v
            (d.im.atan2(d.re), col)
        })
        .collect();
    // Map -π to π so phases live in (-π, π].
    for it in items.iter_mut() {
        if it.0 <= -std::f64::consts::PI + 1e-15 {
            it.0 = std::f64::consts::PI;
        }
    }
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let phases: Vec<f64> = items.iter().map(|it| it.0).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (j, it) in items.iter().enumerate() {
        let mut col = it.1.clone();
        phase_normalize(&mut col);
        vectors.set_col(j, &col);
    }
    Ok((phases, vectors))
}

/// Eigenphases of a unitary matrix, ascending in (-π, π].
pub fn unitary_eigphases(u: &CMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    unitary_eig(u, tol).map(|(p, _)| p)
}

struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

fn lu_factor(a: &CMatrix) -> Option<Lu> {
    let n = a.rows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut pk = k;
        let mut best = lu[(k, k)].norm();
        for i in (k + 1)..n {
            let m = lu[(i, k)].norm();
            if m > best {
                best = m;
                pk = i;
            }
        }
        if best == 0.0 {
            return None;
        }
        if pk != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pk, j)];
                lu[(pk, j)] = tmp;
            }
            perm.swap(k, pk);
        }
        let piv = lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] / piv;
            lu[(i, k)] = f;
            for j in (k + 1)..n {
                let sub = f * lu[(k, j)];
                lu[(i, j)] -= sub;
            }
        }
    }
    Some(Lu { lu, perm })
}

fn lu_solve_vec(f: &Lu, b: &[C64]) -> Vec<C64> {
    let n = f.lu.rows;
    let mut y: Vec<C64> = f.perm.iter().map(|&p| b[p]).collect();
    // L y' = P b with unit lower triangle
    for i in 0..n {
        for j in 0..i {
            let sub = f.lu[(i, j)] * y[j];
            y[i] -= sub;
        }
    }
    // U x = y', column-oriented sweep
    for i in (0..n).rev() {
        y[i] /= f.lu[(i, i)];
        for j in 0..i {
            let sub = f.lu[(j, i)] * y[i];
            y[j] -= sub;
        }
    }
    y
}

fn lu_solve_mat(f: &Lu, b: &CMatrix) -> CMatrix {
    let mut x = CMatrix::zeros(b.rows, b.cols);
    for j in 0..b.cols {
        let col = lu_solve_vec(f, &b.col(j));
        x.set_col(j, &col);
    }
    x
}

/// Solve A X = B for square A with a reciprocal-condition guard.
pub fn solve(a: &CMatrix, b: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    if !a.is_square() || a.rows != b.rows {
        return Err(Error::Contract("solve: shape mismatch".into()));
    }
    let f = match lu_factor(a) {
        Some(f) => f,
        None => return Err(Error::SingularMatrix { rcond: 0.0 }),
    };
    let inv = lu_solve_mat(&f, &CMatrix::identity(a.rows));
    let rcond = 1.0 / (mat_norm_1(a) * mat_norm_1(&inv)).max(1e-300);
    if rcond < tol.rcond_min {
        return Err(Error::SingularMatrix { rcond });
    }
    Ok(lu_solve_mat(&f, b))
}

fn mat_norm_1(a: &CMatrix) -> f64 {
    (0..a.cols)
        .map(|j| (0..a.rows).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Singular value decomposition by one-sided Jacobi on columns.
///
/// Returns (u, sigma, v) with sigma descending, m = u · diag(sigma) · v*.
/// Columns of u with zero singular value are filled arbitrarily orthonormal
/// only up to rank; callers needing the kernel use the trailing columns of v.
pub fn svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    // Work on the transpose when wide so columns number <= rows.
    if m.cols > m.rows {
        let (u, s, v) = svd(&m.adjoint());
        return (v, s, u);
    }
    let rows = m.rows;
    let n = m.cols;
    let mut a = m.clone();
    let mut v = CMatrix::identity(n);
    for _sweep in 0..60 {
        let mut offmax: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                let cp = a.col(p);
                let cq = a.col(q);
                let app: f64 = cp.iter().map(|z| z.norm_sqr()).sum();
                let aqq: f64 = cq.iter().map(|z| z.norm_sqr()).sum();
                let apq: C64 = cp.iter().zip(&cq).map(|(x, y)| x.conj() * y).sum();
                let mag = apq.norm();
                offmax = offmax.max(mag / (app * aqq).sqrt().max(1e-300));
                if mag <= 1e-16 * (app * aqq).sqrt().max(1e-300) {
                    continue;
                }
                let z = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cs = C64::new(c, 0.0);
                let sz = z * s;
                for i in 0..rows {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * cs - aiq * sz.conj();
                    a[(i, q)] = aip * sz + aiq * cs;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * cs - viq * sz.conj();
                    v[(i, q)] = vip * sz + viq * cs;
                }
            }
        }
        if offmax < 1e-15 {
            break;
        }
    }
    let mut items: Vec<(f64, usize)> = (0..n)
        .map(|j| (vec_norm(&a.col(j)), j))
        .collect();
    items.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let sigma: Vec<f64> = items.iter().map(|it| it.0).collect();
    let mut u = CMatrix::zeros(rows, n);
    let mut vv = CMatrix::zeros(n, n);
    for (jnew, &(s, jold)) in items.iter().enumerate() {
        let col = a.col(jold);
        if s > 0.0 {
            let scaled: Vec<C64> = col.iter().map(|zz| zz / s).collect();
            u.set_col(jnew, &scaled);
        }
        vv.set_col(jnew, &v.col(jold));
    }
    (u, sigma, vv)
}

/// Number of singular values of M below tol times the largest singular
/// value (or below tol itself when M = 0).
pub fn kernel_dim(m: &CMatrix, tol: f64) -> usize {
    let (_, sigma, _) = svd(m);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let thresh = if smax == 0.0 { tol } else { tol * smax };
    sigma.iter().filter(|&&s| s < thresh).count()
}

/// Orthonormalize the columns of `m` in place (modified Gram-Schmidt),
/// preserving the column span. Errors if the columns are rank deficient.
pub fn orthonormalize_columns(m: &CMatrix) -> Result<CMatrix> {
    let mut q = m.clone();
    for j in 0..q.cols {
        let mut col = q.col(j);
        for k in 0..j {
            let prev = q.col(k);
            let proj = inner(&col, &prev);
            for i in 0..col.len() {
                col[i] -= proj * prev[i];
            }
        }
        // second pass for stability
        for k in 0..j {
            let prev = q.col(k);
            let proj = inner(&col, &prev);
            for i in 0..col.len() {
                col[i] -= proj * prev[i];
            }
        }
        let nrm = vec_norm(&col);
        if nrm < 1e-13 * (1.0 + m.norm_max()) {
            return Err(Error::Contract(
                "orthonormalize_columns: rank-deficient frame".into(),
            ));
        }
        for z in col.iter_mut() {
            *z /= C64::new(nrm, 0.0);
        }
        q.set_col(j, &col);
    }
    Ok(q)
}
