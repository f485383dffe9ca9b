//! Dense symmetric linear algebra.
//!
//! [`SymMatrix`] stores the upper triangle of a real symmetric matrix row by
//! row, so symmetry holds by construction. Eigendecompositions use cyclic
//! Jacobi rotations, which are slow for large `n` but deliver orthogonality
//! and reconstruction errors at the level of machine precision.

use crate::error::{Error, Result};

/// Relative off-diagonal threshold at which Jacobi sweeps stop.
const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;
/// Asymmetry tolerated by the strict constructors, relative to `‖A‖_F`.
const STRICT_ASYMMETRY: f64 = 1e-8;

/// Dense real symmetric `n × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle (`i <= j`).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                data.push(f(i, j));
            }
        }
        SymMatrix { n, data }
    }

    /// Symmetrizes a row-major dense square array as `(A + Aᵀ)/2` and returns
    /// the asymmetry residual `‖A − Aᵀ‖_F / 2`.
    pub fn from_dense_lenient(n: usize, dense: &[f64]) -> Result<(Self, f64)> {
        if dense.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: dense.len(),
            });
        }
        if dense.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let mut residual = 0.0;
        let m = Self::from_fn(n, |i, j| {
            let (a, b) = (dense[i * n + j], dense[j * n + i]);
            if i != j {
                residual += 2.0 * (0.5 * (a - b)).powi(2);
            }
            0.5 * (a + b)
        });
        Ok((m, residual.sqrt()))
    }

    /// Strict variant of [`SymMatrix::from_dense_lenient`]: rejects arrays whose
    /// asymmetry residual exceeds `1e-8·‖A‖_F`.
    pub fn from_dense(n: usize, dense: &[f64]) -> Result<Self> {
        let (m, residual) = Self::from_dense_lenient(n, dense)?;
        let norm = dense.iter().map(|v| v * v).sum::<f64>().sqrt();
        let limit = STRICT_ASYMMETRY * norm;
        if residual > limit {
            return Err(Error::Asymmetric { residual, limit });
        }
        Ok(m)
    }

    /// Strict constructor from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut dense = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            dense.extend_from_slice(row);
        }
        Self::from_dense(n, &dense)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[packed_index(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = packed_index(self.n, i, j);
        self.data[k] = v;
    }

    /// Upper-triangle entries in packed row order.
    pub fn packed(&self) -> &[f64] {
        &self.data
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.get(i, j);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Applies `f` to every entry; symmetry is preserved because each
    /// off-diagonal pair is stored once.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_dims(self, other)?;
        Ok(SymMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &SymMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + alpha·other`
    pub fn axpy(&self, alpha: f64, other: &SymMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a + alpha * b)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    pub fn add_identity(&self, alpha: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            let v = m.get(i, i);
            m.set(i, i, v + alpha);
        }
        m
    }

    /// Entrywise ℓ1 norm over all `n²` entries.
    pub fn l1_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j).abs();
                s += if i == j { v } else { 2.0 * v };
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Dense row-major product `self · other` (not symmetric in general).
    pub fn matmul(&self, other: &SymMatrix) -> Result<Vec<f64>> {
        check_dims(self, other)?;
        Ok(dense_matmul(self.n, &self.to_dense(), &other.to_dense()))
    }
}

fn check_dims(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            got: b.n,
        });
    }
    Ok(())
}

/// Row-major dense `n × n` product.
pub fn dense_matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let row_b = &b[k * n..(k + 1) * n];
            let row_o = &mut out[i * n..(i + 1) * n];
            for (o, &bkj) in row_o.iter_mut().zip(row_b) {
                *o += aik * bkj;
            }
        }
    }
    out
}

pub fn fro_norm(a: &SymMatrix) -> f64 {
    inner_unchecked(a, a).sqrt()
}

pub fn trace(a: &SymMatrix) -> f64 {
    (0..a.n).map(|i| a.get(i, i)).sum()
}

/// `trace(A·B)`, i.e. the Frobenius inner product.
pub fn inner(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    check_dims(a, b)?;
    Ok(inner_unchecked(a, b))
}

fn inner_unchecked(a: &SymMatrix, b: &SymMatrix) -> f64 {
    let n = a.n;
    let mut s = 0.0;
    let mut k = 0;
    for i in 0..n {
        s += a.data[k] * b.data[k];
        k += 1;
        for _ in (i + 1)..n {
            s += 2.0 * a.data[k] * b.data[k];
            k += 1;
        }
    }
    s
}

/// Orthogonal eigendecomposition `A = U·diag(λ)·Uᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomp {
    /// Row-major `n × n`; column `k` is the eigenvector of `lambda[k]`.
    pub u: Vec<f64>,
    /// Eigenvalues, nonincreasing.
    pub lambda: Vec<f64>,
}

impl EigenDecomp {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn min_eig(&self) -> f64 {
        self.lambda.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn max_eig(&self) -> f64 {
        self.lambda.first().copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// `U·diag(d)·Uᵀ` in this eigenbasis.
    pub fn with_values(&self, d: &[f64]) -> Result<SymMatrix> {
        let n = self.n();
        if d.len() != n || self.u.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: d.len(),
            });
        }
        Ok(recompose_raw(n, &self.u, d))
    }

    /// Spectral function `U·diag(f(λ))·Uᵀ`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let d: Vec<f64> = self.lambda.iter().map(|&l| f(l)).collect();
        recompose_raw(self.n(), &self.u, &d)
    }
}

fn recompose_raw(n: usize, u: &[f64], d: &[f64]) -> SymMatrix {
    // scaled[k][i] = d_k · U_ik, laid out so the inner loop is contiguous
    let mut cols = vec![0.0; n * n];
    let mut scaled = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            cols[k * n + i] = u[i * n + k];
            scaled[k * n + i] = d[k] * u[i * n + k];
        }
    }
    let mut out = SymMatrix::zeros(n);
    let mut row = vec![0.0; n];
    for i in 0..n {
        row[i..].iter_mut().for_each(|v| *v = 0.0);
        for k in 0..n {
            let s = scaled[k * n + i];
            if s == 0.0 {
                continue;
            }
            let col = &cols[k * n..(k + 1) * n];
            for j in i..n {
                row[j] += s * col[j];
            }
        }
        for j in i..n {
            out.set(i, j, row[j]);
        }
    }
    out
}

/// Recomposes `U·diag(λ)·Uᵀ`.
pub fn recompose(e: &EigenDecomp) -> Result<SymMatrix> {
    e.with_values(&e.lambda)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues are sorted in nonincreasing order (stable with respect to the
/// Jacobi output on ties) and each eigenvector is signed so that its
/// largest-magnitude component is positive.
pub fn eig_sym(a: &SymMatrix) -> Result<EigenDecomp> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let n = a.n();
    let mut m = a.to_dense();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = JACOBI_TOL * total;

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * m[p * n + q] * m[p * n + q];
            }
        }
        if off.sqrt() <= threshold || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    0.0
                };
                if t == 0.0 {
                    // rotation below resolution of the diagonal gap
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    continue;
                }
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    let nkp = c * akp - s * akq;
                    let nkq = s * akp + c * akq;
                    m[k * n + p] = nkp;
                    m[p * n + k] = nkp;
                    m[k * n + q] = nkq;
                    m[q * n + k] = nkq;
                }
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps Jacobi order on ties
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let lambda: Vec<f64> = order.iter().map(|&k| m[k * n + k]).collect();
    let mut u = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        let mut pivot = 0;
        let mut best = -1.0;
        for i in 0..n {
            let x = v[i * n + src].abs();
            if x > best {
                best = x;
                pivot = i;
            }
        }
        let sign = if v[pivot * n + src] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            u[i * n + dst] = sign * v[i * n + src];
        }
    }
    Ok(EigenDecomp { u, lambda })
}

/// Inverse of a symmetric positive definite matrix through its eigenbasis.
///
/// Fails with [`Error::Conditioning`] when the smallest eigenvalue is not
/// above `1e-12·max(1, λ_max)`.
pub fn spd_inverse(a: &SymMatrix) -> Result<SymMatrix> {
    let e = eig_sym(a)?;
    let min = e.min_eig();
    if !(min > 1e-12 * e.max_eig().max(1.0)) {
        return Err(Error::Conditioning { min_eig: min });
    }
    Ok(e.map_values(|l| 1.0 / l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(n: usize, seed: u64) -> SymMatrix {
        let mut s = seed;
        SymMatrix::from_fn(n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    fn orthogonality_defect(e: &EigenDecomp) -> f64 {
        let n = e.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| e.u[k * n + i] * e.u[k * n + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                s += (dot - target).powi(2);
            }
        }
        s.sqrt()
    }

    #[test]
    fn packed_indexing_covers_upper_triangle() {
        let n = 5;
        let m = SymMatrix::from_fn(n, |i, j| (10 * i + j) as f64);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                assert_eq!(m.get(i, j), (10 * a + b) as f64);
            }
        }
    }

    #[test]
    fn eig_identity() {
        let e = eig_sym(&SymMatrix::identity(4)).unwrap();
        assert_eq!(e.lambda, vec![1.0; 4]);
        assert!(orthogonality_defect(&e) < 1e-14);
    }

    #[test]
    fn eig_diagonal_is_signed_permutation() {
        let e = eig_sym(&SymMatrix::from_diag(&[1.0, 3.0])).unwrap();
        assert_eq!(e.lambda, vec![3.0, 1.0]);
        assert_eq!(e.u, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn eig_random_round_trip() {
        for (n, seed) in [(8, 1), (20, 2), (50, 3)] {
            let a = lcg_matrix(n, seed);
            let e = eig_sym(&a).unwrap();
            let back = recompose(&e).unwrap();
            let err = fro_norm(&back.sub(&a).unwrap());
            assert!(err <= 1e-10 * fro_norm(&a).max(1.0), "n={n} err={err}");
            assert!(orthogonality_defect(&e) <= 1e-10 * (n as f64).sqrt());
            assert!(e.lambda.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eig_rejects_non_finite() {
        let mut a = SymMatrix::identity(2);
        a.set(0, 1, f64::NAN);
        assert!(matches!(eig_sym(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn recompose_rotation() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let e = EigenDecomp {
            u: vec![r, -r, r, r],
            lambda: vec![1.0, -1.0],
        };
        let m = recompose(&e).unwrap();
        assert!(m.get(0, 0).abs() < 1e-15);
        assert!(m.get(1, 1).abs() < 1e-15);
        assert!((m.get(0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn recompose_identity_basis() {
        let e = EigenDecomp {
            u: vec![1.0, 0.0, 0.0, 1.0],
            lambda: vec![5.0, 2.0],
        };
        assert_eq!(recompose(&e).unwrap(), SymMatrix::from_diag(&[5.0, 2.0]));
    }

    #[test]
    fn recompose_dimension_mismatch() {
        let e = EigenDecomp {
            u: vec![1.0, 0.0, 0.0, 1.0],
            lambda: vec![5.0],
        };
        assert!(matches!(recompose(&e), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn spd_inverse_cases() {
        assert_eq!(spd_inverse(&SymMatrix::identity(3)).unwrap(), SymMatrix::identity(3));
        let inv = spd_inverse(&SymMatrix::from_diag(&[2.0, 4.0])).unwrap();
        assert!((inv.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((inv.get(1, 1) - 0.25).abs() < 1e-15);

        let b = lcg_matrix(6, 9);
        let a = SymMatrix::from_dense(6, &b.matmul(&b).unwrap())
            .unwrap()
            .add_identity(0.5);
        let inv = spd_inverse(&a).unwrap();
        let prod = a.matmul(&inv).unwrap();
        let mut err = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                let t = if i == j { 1.0 } else { 0.0 };
                err += (prod[i * 6 + j] - t).powi(2);
            }
        }
        assert!(err.sqrt() <= 1e-8);
    }

    #[test]
    fn spd_inverse_rejects_singular() {
        let a = SymMatrix::from_diag(&[1.0, 0.0]);
        match spd_inverse(&a) {
            Err(Error::Conditioning { min_eig }) => assert_eq!(min_eig, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn norms_and_traces() {
        assert!((fro_norm(&SymMatrix::identity(3)) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(trace(&SymMatrix::from_diag(&[1.0, 2.0, 3.0])), 6.0);
        let a = lcg_matrix(7, 4);
        let b = lcg_matrix(7, 5);
        let (da, db) = (a.to_dense(), b.to_dense());
        let brute: f64 = da.iter().zip(&db).map(|(x, y)| x * y).sum();
        assert!((inner(&a, &b).unwrap() - brute).abs() < 1e-12);
        assert!((inner(&a, &b).unwrap() - inner(&b, &a).unwrap()).abs() < 1e-15);
        assert!(inner(&a, &SymMatrix::zeros(3)).is_err());
    }

    #[test]
    fn strict_constructor_rejects_asymmetry() {
        let dense = [1.0, 2.0, 2.1, 1.0];
        assert!(matches!(
            SymMatrix::from_dense(2, &dense),
            Err(Error::Asymmetric { .. })
        ));
        let (m, res) = SymMatrix::from_dense_lenient(2, &dense).unwrap();
        assert!((m.get(0, 1) - 2.05).abs() < 1e-15);
        assert!((res - 0.05 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn l1_norm_counts_both_triangles() {
        let m = SymMatrix::from_rows(&[vec![1.0, -2.0], vec![-2.0, 3.0]]).unwrap();
        assert_eq!(m.l1_norm(), 8.0);
    }
}
