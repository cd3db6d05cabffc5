//! Dense real linear algebra specialized to skew-symmetric matrices:
//! Frobenius geometry, spectra, ranks, kernels, eigenspaces, and subspace
//! intersections.
//!
//! Spectra are never computed with a complex eigensolver. For skew `A` the
//! matrix `-A² = A Aᵀ` is symmetric positive semidefinite and its eigenvalue
//! `b²` carries the conjugate pair `±bi`, so a symmetric eigensolve keeps all
//! arithmetic real and makes the `±` pairing structural.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{HlieError, Result};
use crate::exactmat::RatMat;
use crate::multiset::AdmissibleMultiset;
use crate::scalar::Scalar;

/// Absolute tolerance floor for singular-value thresholds (rank, kernels,
/// subspace intersections); scaled by the matrix Frobenius norm or largest
/// singular value so it tracks the data size.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default tolerance for spectrum extraction, on the scale of the eigenvalue
/// magnitudes `b`. Spectra go through the symmetric eigensolve of `-A²`,
/// whose absolute eigenvalue error is on the order of `ε·‖A‖²`; thresholds
/// in `b`-space therefore cannot be pushed below roughly `√ε ≈ 1e-8`.
pub const SPECTRUM_TOL: f64 = 1e-7;

/// Skew-symmetry acceptance for floating-point input.
const SKEW_INPUT_TOL: f64 = 1e-12;

fn threshold(tol: f64, scale: f64) -> f64 {
    tol * scale.max(1.0)
}

/// One-sided Jacobi SVD: `A = U·diag(σ)·Vᵀ` with `σ` descending. Used for
/// every singular-value verdict instead of the library SVD, which was
/// observed to return singular values off by 1e-2 on small well-conditioned
/// inputs; Jacobi rotations converge to full relative accuracy for the
/// matrix sizes handled here.
pub(crate) fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    if m < n {
        let (u, s, v) = jacobi_svd(&a.transpose());
        return (v, s, u);
    }
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..64 {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let mut aii = 0.0;
                let mut ajj = 0.0;
                let mut aij = 0.0;
                for r in 0..m {
                    aii += w[(r, i)] * w[(r, i)];
                    ajj += w[(r, j)] * w[(r, j)];
                    aij += w[(r, i)] * w[(r, j)];
                }
                if aij.abs() <= 1e-15 * (aii * ajj).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (ajj - aii) / (2.0 * aij);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..m {
                    let wi = w[(r, i)];
                    let wj = w[(r, j)];
                    w[(r, i)] = c * wi - s * wj;
                    w[(r, j)] = s * wi + c * wj;
                }
                for r in 0..n {
                    let vi = v[(r, i)];
                    let vj = v[(r, j)];
                    v[(r, i)] = c * vi - s * vj;
                    v[(r, j)] = s * vi + c * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = (0..n).map(|j| (w.column(j).norm(), j)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut u = DMatrix::zeros(m, n);
    let mut v_sorted = DMatrix::zeros(n, n);
    let mut sigmas = Vec::with_capacity(n);
    for (k, (sigma, j)) in order.iter().enumerate() {
        sigmas.push(*sigma);
        if *sigma > 0.0 {
            u.set_column(k, &(w.column(*j) / *sigma));
        }
        v_sorted.set_column(k, &v.column(*j));
    }
    (u, sigmas, v_sorted)
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues ascending and
/// eigenvector columns in matching order.
pub(crate) fn symmetric_eigen_sorted(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (&m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// A real skew-symmetric matrix. Carries exact rational entries alongside
/// the float view whenever it was built from exact data.
#[derive(Clone, Debug)]
pub struct SkewMatrix {
    mat: DMatrix<f64>,
    exact: Option<RatMat>,
}

impl SkewMatrix {
    /// Accepts a computed (floating-point) matrix: skew-symmetry is checked
    /// within `1e-12` relative to the largest entry, then the matrix is
    /// symmetrized to `(A - Aᵀ)/2`.
    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<SkewMatrix> {
        if m.nrows() != m.ncols() {
            return Err(HlieError::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
                context: "skew matrix must be square",
            });
        }
        let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let mut max_defect = 0.0f64;
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                max_defect = max_defect.max((m[(i, j)] + m[(j, i)]).abs());
            }
        }
        if max_defect > threshold(SKEW_INPUT_TOL, scale) {
            return Err(HlieError::NotSkewSymmetric { max_defect });
        }
        let sym = (&m - m.transpose()) * 0.5;
        Ok(SkewMatrix {
            mat: sym,
            exact: None,
        })
    }

    /// Builds from scalar entries. When every entry is exact the skew check
    /// is performed with zero tolerance and exactness is retained.
    pub fn from_scalar_rows(rows: &[Vec<Scalar>]) -> Result<SkewMatrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(HlieError::InvalidParameter("ragged matrix rows".into()));
        }
        let exact_rows: Option<Vec<Vec<_>>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| s.as_exact().cloned())
                    .collect::<Option<Vec<_>>>()
            })
            .collect();
        match exact_rows {
            Some(rws) => Self::from_ratmat(RatMat::from_rows(rws)),
            None => {
                let m = DMatrix::from_fn(n, n, |i, j| rows[i][j].to_f64());
                Self::from_dmatrix(m)
            }
        }
    }

    pub(crate) fn from_ratmat(r: RatMat) -> Result<SkewMatrix> {
        if !r.is_skew() {
            let m = r.to_dmatrix();
            let mut max_defect = 0.0f64;
            for i in 0..m.nrows() {
                for j in i..m.ncols() {
                    max_defect = max_defect.max((m[(i, j)] + m[(j, i)]).abs());
                }
            }
            return Err(HlieError::NotSkewSymmetric { max_defect });
        }
        Ok(SkewMatrix {
            mat: r.to_dmatrix(),
            exact: Some(r),
        })
    }

    /// Trusted constructor for matrices that are skew by construction
    /// (sums and scalings of skew matrices).
    fn from_parts(mat: DMatrix<f64>, exact: Option<RatMat>) -> SkewMatrix {
        SkewMatrix { mat, exact }
    }

    pub fn zero(q: usize) -> SkewMatrix {
        SkewMatrix {
            mat: DMatrix::zeros(q, q),
            exact: Some(RatMat::zero(q)),
        }
    }

    pub fn q(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub(crate) fn exact(&self) -> Option<&RatMat> {
        self.exact.as_ref()
    }

    pub fn entry_scalar(&self, i: usize, j: usize) -> Scalar {
        match &self.exact {
            Some(r) => Scalar::Exact(r.get(i, j).clone()),
            None => Scalar::Approx(self.mat[(i, j)]),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: &Scalar) -> SkewMatrix {
        let exact = match (&self.exact, c.as_exact()) {
            (Some(r), Some(k)) => Some(r.scaled(k)),
            _ => None,
        };
        SkewMatrix::from_parts(&self.mat * c.to_f64(), exact)
    }

    /// `P A Pᵀ` for orthogonal `P`; the result is float-valued.
    pub fn conjugated(&self, p: &DMatrix<f64>) -> SkewMatrix {
        let m = p * &self.mat * p.transpose();
        let sym = (&m - m.transpose()) * 0.5;
        SkewMatrix::from_parts(sym, None)
    }

    /// Kronecker product with a symmetric matrix; skew ⊗ symmetric is skew.
    pub fn kronecker_sym(&self, s: &SymMatrix) -> SkewMatrix {
        let exact = match (&self.exact, &s.exact) {
            (Some(a), Some(b)) => Some(a.kronecker(b)),
            _ => None,
        };
        SkewMatrix::from_parts(self.mat.kronecker(&s.mat), exact)
    }
}

/// `Σ cᵢ·Aᵢ`, exact whenever all inputs and coefficients are exact.
pub fn linear_combination(mats: &[SkewMatrix], coeffs: &[Scalar]) -> Result<SkewMatrix> {
    if mats.is_empty() || mats.len() != coeffs.len() {
        return Err(HlieError::DimensionMismatch {
            expected: mats.len(),
            got: coeffs.len(),
            context: "linear combination of skew matrices",
        });
    }
    let q = mats[0].q();
    if mats.iter().any(|m| m.q() != q) {
        return Err(HlieError::DimensionMismatch {
            expected: q,
            got: 0,
            context: "mixed dimensions in linear combination",
        });
    }
    let all_exact = mats.iter().all(|m| m.is_exact()) && coeffs.iter().all(|c| c.is_exact());
    let exact = if all_exact {
        let mut acc = RatMat::zero(q);
        for (m, c) in mats.iter().zip(coeffs) {
            acc.add_scaled(m.exact().unwrap(), c.as_exact().unwrap());
        }
        Some(acc)
    } else {
        None
    };
    let mut mat = DMatrix::zeros(q, q);
    for (m, c) in mats.iter().zip(coeffs) {
        mat += m.mat() * c.to_f64();
    }
    Ok(SkewMatrix::from_parts(mat, exact))
}

/// Block-diagonal sum of skew matrices.
pub fn block_diag(mats: &[&SkewMatrix]) -> SkewMatrix {
    let q: usize = mats.iter().map(|m| m.q()).sum();
    let exact = if mats.iter().all(|m| m.is_exact()) {
        let rats: Vec<&RatMat> = mats.iter().map(|m| m.exact().unwrap()).collect();
        Some(RatMat::block_diag(&rats))
    } else {
        None
    };
    let mut mat = DMatrix::zeros(q, q);
    let mut off = 0;
    for m in mats {
        mat.view_mut((off, off), (m.q(), m.q())).copy_from(m.mat());
        off += m.q();
    }
    SkewMatrix::from_parts(mat, exact)
}

/// A real symmetric matrix (the second tensor factor in the tensor-product
/// construction).
#[derive(Clone, Debug)]
pub struct SymMatrix {
    mat: DMatrix<f64>,
    exact: Option<RatMat>,
}

impl SymMatrix {
    pub fn from_scalar_rows(rows: &[Vec<Scalar>]) -> Result<SymMatrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(HlieError::InvalidParameter("ragged matrix rows".into()));
        }
        let exact_rows: Option<Vec<Vec<_>>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| s.as_exact().cloned())
                    .collect::<Option<Vec<_>>>()
            })
            .collect();
        if let Some(rws) = exact_rows {
            let r = RatMat::from_rows(rws);
            for i in 0..n {
                for j in (i + 1)..n {
                    if r.get(i, j) != r.get(j, i) {
                        return Err(HlieError::NotSymmetric {
                            max_defect: (r.get(i, j) - r.get(j, i)).to_f64_lossy().abs(),
                        });
                    }
                }
            }
            return Ok(SymMatrix {
                mat: r.to_dmatrix(),
                exact: Some(r),
            });
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j].to_f64());
        let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let mut max_defect = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                max_defect = max_defect.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if max_defect > threshold(SKEW_INPUT_TOL, scale) {
            return Err(HlieError::NotSymmetric { max_defect });
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(SymMatrix {
            mat: sym,
            exact: None,
        })
    }

    pub fn diagonal(entries: &[Scalar]) -> SymMatrix {
        let n = entries.len();
        let rows: Vec<Vec<Scalar>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            entries[i].clone()
                        } else {
                            Scalar::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        SymMatrix::from_scalar_rows(&rows).expect("diagonal matrices are symmetric")
    }

    pub fn identity(n: usize) -> SymMatrix {
        SymMatrix::diagonal(&vec![Scalar::from_int(1); n])
    }

    pub fn m(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        symmetric_eigen_sorted(self.mat.clone()).0
    }

    pub fn min_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, x| a.min(x.abs()))
    }
}

trait ToF64Lossy {
    fn to_f64_lossy(&self) -> f64;
}
impl ToF64Lossy for num::rational::BigRational {
    fn to_f64_lossy(&self) -> f64 {
        num::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Eigenvalue multiset of a skew-symmetric matrix, via the symmetric
/// eigensolve of `-A²`. Eigenvalues of `-A²` below `tol²·(1 + ‖A‖²_F)` are
/// reported as zeros; the rest are clustered into distinct values `b²`, each
/// of which must carry an even-dimensional eigenspace.
pub fn skew_spectrum(a: &SkewMatrix, tol: f64) -> Result<AdmissibleMultiset> {
    let q = a.q();
    if q == 0 {
        return Ok(AdmissibleMultiset::default());
    }
    let fro2 = a.mat.iter().map(|x| x * x).sum::<f64>();
    let m = &a.mat * a.mat.transpose();
    let (betas, _) = symmetric_eigen_sorted(m);
    let zero_thr = tol * tol * (1.0 + fro2);
    let beta_max = betas.last().copied().unwrap_or(0.0);
    let cluster_gap = tol * (1.0 + beta_max);

    let mut pairs: Vec<(Scalar, usize)> = Vec::new();
    let zeros = betas.iter().take_while(|&&b| b <= zero_thr).count();
    if zeros > 0 {
        pairs.push((Scalar::from_int(0), zeros));
    }
    let mut i = zeros;
    while i < q {
        let mut j = i + 1;
        let mut sum = betas[i];
        while j < q && betas[j] - betas[j - 1] <= cluster_gap {
            sum += betas[j];
            j += 1;
        }
        let dim = j - i;
        let mean = sum / dim as f64;
        if dim % 2 != 0 {
            return Err(HlieError::BrokenSpectrumPairing {
                value: mean.sqrt(),
                mult: dim,
            });
        }
        pairs.push((Scalar::Approx(mean.max(0.0).sqrt()), dim / 2));
        i = j;
    }
    AdmissibleMultiset::new(pairs)
}

/// Frobenius inner product `⟨A, B⟩ = trace(A Bᵀ)`.
pub fn frobenius_inner(a: &SkewMatrix, b: &SkewMatrix) -> Result<f64> {
    if a.q() != b.q() {
        return Err(HlieError::DimensionMismatch {
            expected: a.q(),
            got: b.q(),
            context: "frobenius inner product",
        });
    }
    Ok(a.mat.iter().zip(b.mat.iter()).map(|(x, y)| x * y).sum())
}

/// Exact Frobenius inner product when both operands are exact.
pub fn frobenius_inner_scalar(a: &SkewMatrix, b: &SkewMatrix) -> Result<Scalar> {
    if a.q() != b.q() {
        return Err(HlieError::DimensionMismatch {
            expected: a.q(),
            got: b.q(),
            context: "frobenius inner product",
        });
    }
    match (a.exact(), b.exact()) {
        (Some(x), Some(y)) => Ok(Scalar::Exact(x.frob_inner(y))),
        _ => Ok(Scalar::Approx(frobenius_inner(a, b)?)),
    }
}

/// Number of singular values above `tol·max(1, σ_max)`; even for any
/// genuinely skew-symmetric input.
pub fn rank(a: &SkewMatrix, tol: f64) -> usize {
    if a.q() == 0 {
        return 0;
    }
    let (_, sigmas, _) = jacobi_svd(&a.mat);
    let thr = threshold(tol, sigmas[0]);
    sigmas.iter().filter(|&&s| s > thr).count()
}

/// A linear subspace of ℝⁿ held as an orthonormal basis (columns).
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: DMatrix::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: DMatrix::identity(ambient, ambient),
        }
    }

    /// Spans the given columns; the basis is re-orthonormalized by modified
    /// Gram-Schmidt with one re-orthogonalization pass, dropping directions
    /// that fall below `DEFAULT_TOL` of their original length.
    pub fn from_columns(ambient: usize, cols: &[DVector<f64>]) -> Subspace {
        let mut kept: Vec<DVector<f64>> = Vec::new();
        for c in cols {
            assert_eq!(c.len(), ambient, "column dimension mismatch");
            let mut v = c.clone();
            for _pass in 0..2 {
                for u in &kept {
                    let proj = u.dot(&v);
                    v -= u * proj;
                }
            }
            let n = v.norm();
            if n > threshold(DEFAULT_TOL, c.norm()) {
                kept.push(v / n);
            }
        }
        let basis = DMatrix::from_fn(ambient, kept.len(), |i, j| kept[j][i]);
        Subspace { ambient, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn column(&self, j: usize) -> DVector<f64> {
        self.basis.column(j).into_owned()
    }

    /// Orthogonal projector `U Uᵀ`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Orthogonal complement.
    pub fn complement(&self) -> Subspace {
        if self.dim() == 0 {
            return Subspace::full(self.ambient);
        }
        if self.dim() == self.ambient {
            return Subspace::zero(self.ambient);
        }
        let p = DMatrix::identity(self.ambient, self.ambient) - self.projector();
        let (vals, vecs) = symmetric_eigen_sorted(p);
        let cols: Vec<DVector<f64>> = (0..self.ambient)
            .filter(|&i| vals[i] > 0.5)
            .map(|i| vecs.column(i).into_owned())
            .collect();
        Subspace::from_columns(self.ambient, &cols)
    }

    /// Equality as subspaces: same dimension and projector difference below
    /// `tol` in Frobenius norm.
    pub fn approx_eq(&self, other: &Subspace, tol: f64) -> bool {
        self.ambient == other.ambient
            && self.dim() == other.dim()
            && (self.projector() - other.projector()).norm() <= tol
    }
}

/// Eigenspace of `-A²` for its single distinct nonzero eigenvalue. Errors if
/// the spectrum carries zero or several distinct nonzero values.
pub fn nonzero_eigenspace(a: &SkewMatrix, tol: f64) -> Result<Subspace> {
    let spec = skew_spectrum(a, tol)?;
    let distinct = spec.distinct_positive();
    if distinct != 1 {
        return Err(HlieError::EigenspaceUndefined { count: distinct });
    }
    let fro2 = a.mat.iter().map(|x| x * x).sum::<f64>();
    let m = &a.mat * a.mat.transpose();
    let (betas, vecs) = symmetric_eigen_sorted(m);
    let zero_thr = tol * tol * (1.0 + fro2);
    let cols: Vec<DVector<f64>> = (0..a.q())
        .filter(|&i| betas[i] > zero_thr)
        .map(|i| vecs.column(i).into_owned())
        .collect();
    Ok(Subspace::from_columns(a.q(), &cols))
}

/// Intersection via principal angles: directions of `U` whose singular value
/// against `V` exceeds `1 - tol`.
pub fn intersect(u: &Subspace, v: &Subspace, tol: f64) -> Result<Subspace> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(HlieError::DimensionMismatch {
            expected: u.ambient_dim(),
            got: v.ambient_dim(),
            context: "subspace intersection",
        });
    }
    if u.dim() == 0 || v.dim() == 0 {
        return Ok(Subspace::zero(u.ambient_dim()));
    }
    let gram = u.basis().transpose() * v.basis();
    let (left, sigmas, _) = jacobi_svd(&gram);
    let cols: Vec<DVector<f64>> = sigmas
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 1.0 - tol)
        .map(|(i, _)| u.basis() * left.column(i))
        .collect();
    Ok(Subspace::from_columns(u.ambient_dim(), &cols))
}

/// Common kernel of a family of skew matrices, via the stacked matrix
/// `[A₁; …; A_p]`: singular values below `tol·max(1, ‖stack‖_F)` count as
/// zero.
pub fn common_kernel(mats: &[SkewMatrix], tol: f64) -> Result<Subspace> {
    let (sub, _gap) = common_kernel_with_gap(mats, tol)?;
    Ok(sub)
}

/// As [`common_kernel`], also reporting the margin between the smallest
/// accepted and the largest rejected singular value.
pub fn common_kernel_with_gap(mats: &[SkewMatrix], tol: f64) -> Result<(Subspace, f64)> {
    let Some(first) = mats.first() else {
        return Err(HlieError::InvalidParameter(
            "common kernel of an empty family".into(),
        ));
    };
    let q = first.q();
    if mats.iter().any(|m| m.q() != q) {
        return Err(HlieError::DimensionMismatch {
            expected: q,
            got: 0,
            context: "common kernel of mixed dimensions",
        });
    }
    let mut stack = DMatrix::zeros(mats.len() * q, q);
    for (k, m) in mats.iter().enumerate() {
        stack.view_mut((k * q, 0), (q, q)).copy_from(m.mat());
    }
    let fro = stack.norm();
    let (_, sigmas, v) = jacobi_svd(&stack);
    let thr = threshold(tol, fro);
    // σ descending: the kernel sits at the tail.
    let cols: Vec<DVector<f64>> = (0..q)
        .rev()
        .take_while(|&i| sigmas[i] < thr)
        .map(|i| v.column(i).into_owned())
        .collect();
    let kernel_dim = cols.len();
    let rejected_max = if kernel_dim > 0 {
        sigmas[q - kernel_dim]
    } else {
        0.0
    };
    let accepted_min = if kernel_dim < q {
        sigmas[q - kernel_dim - 1]
    } else {
        f64::INFINITY
    };
    Ok((
        Subspace::from_columns(q, &cols),
        accepted_min - rejected_max,
    ))
}

pub(crate) fn gauss(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Random orthogonal matrix: QR of a Gaussian matrix with the R diagonal
/// signs absorbed into Q.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| gauss(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

pub fn random_unit_vector(n: usize, rng: &mut impl Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| gauss(rng));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Random skew matrix with Gaussian entries above the diagonal.
pub fn random_skew(q: usize, rng: &mut impl Rng) -> SkewMatrix {
    let mut m = DMatrix::zeros(q, q);
    for i in 0..q {
        for j in (i + 1)..q {
            let x = gauss(rng);
            m[(i, j)] = -x;
            m[(j, i)] = x;
        }
    }
    SkewMatrix::from_parts(m, None)
}
