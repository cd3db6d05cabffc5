//! Deterministic grid evaluation of the trace power-sum identities.
//!
//! Constant spectrum on the unit sphere is equivalent to the polynomial
//! identities
//!
//! ```text
//! trace((Σ Yᵢ Bᵢ)^{2k}) · w₁^k  =  trace(B₁^{2k}) · (Σ wᵢ Yᵢ²)^k,   k = 1..⌊q/2⌋
//! ```
//!
//! where the weights are all 1 when the `Bᵢ` are the J-images of an
//! orthonormal basis of the center, and are the squared Frobenius norms when
//! the `Bᵢ` are an exactly-orthogonal unnormalized spanning set. Both sides
//! are homogeneous of degree `2k` with per-variable degree at most `2k`, so
//! evaluation on the grid `{0, …, 2K}^p` (K = ⌊q/2⌋) decides each identity.
//!
//! Rational inputs are cleared to integers and evaluated exactly, in `i128`
//! when a precomputed magnitude bound allows it and in `BigInt` otherwise,
//! so exact mode never overflows. Float inputs run the same grid in `f64`
//! with a relative tolerance.

use nalgebra::DMatrix;
use num::bigint::BigInt;
use num::{Signed, ToPrimitive};

use crate::exactmat::{clear_denominators, RatMat};

/// Grids beyond this many points fall back to sampled verification.
pub(crate) const GRID_LIMIT: u128 = 5_000_000;

/// Number of points in the exact grid for type `(p, q)`.
pub(crate) fn grid_count(p: usize, q: usize) -> u128 {
    let side = (q / 2) as u128 * 2 + 1;
    side.checked_pow(p as u32).unwrap_or(u128::MAX)
}

#[derive(Clone, Debug)]
pub(crate) struct GridReport {
    pub constant: bool,
    /// Worst grid point: coordinates, power index `k`, relative violation.
    pub worst_point: Option<(Vec<u32>, usize, f64)>,
    pub max_violation: f64,
    pub exact_arithmetic: bool,
    pub points: u128,
    /// The weights used, as floats; needed to map grid coordinates back to
    /// center directions in the weighted case.
    pub weights_f64: Vec<f64>,
}

pub(crate) trait GridElem: Clone {
    fn zero() -> Self;
    fn add_assign(&mut self, other: &Self);
    fn mul(&self, other: &Self) -> Self;
    fn from_u32(x: u32) -> Self;
    fn approx(&self) -> f64;
    fn matches(lhs: &Self, rhs: &Self, tol: f64) -> bool;
}

impl GridElem for i128 {
    fn zero() -> Self {
        0
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn from_u32(x: u32) -> Self {
        x as i128
    }
    fn approx(&self) -> f64 {
        *self as f64
    }
    fn matches(lhs: &Self, rhs: &Self, _tol: f64) -> bool {
        lhs == rhs
    }
}

impl GridElem for BigInt {
    fn zero() -> Self {
        BigInt::ZERO
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn from_u32(x: u32) -> Self {
        BigInt::from(x)
    }
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn matches(lhs: &Self, rhs: &Self, _tol: f64) -> bool {
        lhs == rhs
    }
}

impl GridElem for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn from_u32(x: u32) -> Self {
        x as f64
    }
    fn approx(&self) -> f64 {
        *self
    }
    fn matches(lhs: &Self, rhs: &Self, tol: f64) -> bool {
        (lhs - rhs).abs() <= tol * (1.0 + rhs.abs())
    }
}

fn matmul<T: GridElem>(a: &[T], b: &[T], n: usize, out: &mut [T]) {
    for i in 0..n {
        for j in 0..n {
            let mut acc = T::zero();
            for k in 0..n {
                acc.add_assign(&a[i * n + k].mul(&b[k * n + j]));
            }
            out[i * n + j] = acc;
        }
    }
}

fn trace<T: GridElem>(m: &[T], n: usize) -> T {
    let mut acc = T::zero();
    for i in 0..n {
        acc.add_assign(&m[i * n + i]);
    }
    acc
}

fn relative_violation(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / (1.0 + rhs.abs())
}

/// Runs the full grid. `mats` are row-major `q×q`; `weights` has one entry
/// per matrix. `tol` only matters for `f64` elements.
fn run_grid<T: GridElem>(
    mats: &[Vec<T>],
    q: usize,
    weights: &[T],
    tol: f64,
    exact_arithmetic: bool,
) -> GridReport {
    let p = mats.len();
    let k_max = q / 2;
    let weights_f64: Vec<f64> = weights.iter().map(|w| w.approx()).collect();
    let mut report = GridReport {
        constant: true,
        worst_point: None,
        max_violation: 0.0,
        exact_arithmetic,
        points: grid_count(p, q),
        weights_f64,
    };
    if k_max == 0 {
        return report;
    }

    // Reference power traces c_k = trace(B₁^{2k}) and w₁^k.
    let mut m1 = vec![T::zero(); q * q];
    matmul(&mats[0], &mats[0], q, &mut m1);
    let mut c = Vec::with_capacity(k_max);
    let mut pow = m1.clone();
    let mut tmp = vec![T::zero(); q * q];
    for k in 0..k_max {
        c.push(trace(&pow, q));
        if k + 1 < k_max {
            matmul(&pow, &m1, q, &mut tmp);
            std::mem::swap(&mut pow, &mut tmp);
        }
    }
    let mut w1_pow = Vec::with_capacity(k_max);
    let mut wp = weights[0].clone();
    for _ in 0..k_max {
        w1_pow.push(wp.clone());
        wp = wp.mul(&weights[0]);
    }

    let side = 2 * k_max as u32 + 1;
    let mut coords = vec![0u32; p];
    let mut j_mat = vec![T::zero(); q * q];
    let mut m_mat = vec![T::zero(); q * q];
    let mut p_mat = vec![T::zero(); q * q];

    'points: loop {
        if coords.iter().any(|&y| y != 0) {
            for e in j_mat.iter_mut() {
                *e = T::zero();
            }
            for (y, b) in coords.iter().zip(mats) {
                if *y == 0 {
                    continue;
                }
                let yv = T::from_u32(*y);
                for (dst, src) in j_mat.iter_mut().zip(b) {
                    dst.add_assign(&src.mul(&yv));
                }
            }
            matmul(&j_mat, &j_mat, q, &mut m_mat);
            p_mat.clone_from_slice(&m_mat);

            let mut norm2 = T::zero();
            for (y, w) in coords.iter().zip(weights) {
                let yv = T::from_u32(*y);
                norm2.add_assign(&yv.mul(&yv).mul(w));
            }
            let mut norm2_pow = norm2.clone();

            for k in 1..=k_max {
                let tk = trace(&p_mat, q);
                let lhs = tk.mul(&w1_pow[k - 1]);
                let rhs = c[k - 1].mul(&norm2_pow);
                let viol = relative_violation(lhs.approx(), rhs.approx());
                report.max_violation = report.max_violation.max(viol);
                if !T::matches(&lhs, &rhs, tol) {
                    report.constant = false;
                    let better = report
                        .worst_point
                        .as_ref()
                        .is_none_or(|(_, _, v)| viol > *v);
                    if better {
                        report.worst_point = Some((coords.clone(), k, viol));
                    }
                }
                if k < k_max {
                    matmul(&p_mat, &m_mat, q, &mut tmp);
                    std::mem::swap(&mut p_mat, &mut tmp);
                    norm2_pow = norm2_pow.mul(&norm2);
                }
            }
        }

        // Odometer increment.
        for i in (0..p).rev() {
            coords[i] += 1;
            if coords[i] < side {
                continue 'points;
            }
            coords[i] = 0;
        }
        break;
    }
    report
}

/// Conservative bound on the bit sizes produced by the grid, to decide
/// whether `i128` arithmetic is safe.
fn i128_safe(int_mats: &[crate::exactmat::IntMat], weights_log2: f64, q: usize, p: usize) -> bool {
    let k_max = (q / 2).max(1) as f64;
    let e_log = int_mats
        .iter()
        .map(|m| m.log2_max_entry())
        .fold(0.0, f64::max);
    let a_log = ((p as f64) * 2.0 * k_max).log2().max(0.0) + e_log;
    let m_log = (q as f64).log2() + 2.0 * a_log;
    let pk_log = (k_max - 1.0) * (q as f64).log2() + k_max * m_log;
    let t_log = (q as f64).log2() + pk_log;
    let norm_log = ((p as f64) * (2.0 * k_max).powi(2)).log2() + weights_log2;
    let lhs_log = t_log + k_max * weights_log2;
    let rhs_log = t_log + k_max * norm_log;
    lhs_log.max(rhs_log) + 2.0 < 126.0
}

/// Exact grid over rational matrices. With `weighted` set, the weights are
/// the squared Frobenius norms of the (denominator-cleared) matrices; the
/// caller must guarantee exact pairwise Frobenius orthogonality in that
/// case. Without it, all weights are 1.
pub(crate) fn run_exact(mats: &[&RatMat], weighted: bool) -> GridReport {
    let q = mats[0].n();
    let owned: Vec<RatMat> = mats.iter().map(|&m| m.clone()).collect();
    let int_mats = clear_denominators(&owned);
    let weights: Vec<BigInt> = if weighted {
        int_mats.iter().map(|m| m.frob_norm_sq()).collect()
    } else {
        vec![BigInt::from(1); mats.len()]
    };
    let w_log = weights
        .iter()
        .map(|w| w.abs().to_f64().unwrap_or(f64::INFINITY).max(1.0).log2())
        .fold(0.0, f64::max);

    if i128_safe(&int_mats, w_log, q, mats.len()) {
        let small: Option<Vec<Vec<i128>>> = int_mats.iter().map(|m| m.to_i128()).collect();
        if let Some(small) = small {
            let w128: Vec<i128> = weights
                .iter()
                .map(|w| w.to_i128().expect("bounded by i128_safe"))
                .collect();
            return run_grid(&small, q, &w128, 0.0, true);
        }
    }
    let big: Vec<Vec<BigInt>> = int_mats.into_iter().map(|m| m.d).collect();
    run_grid(&big, q, &weights, 0.0, true)
}

/// Float grid with unit weights, for algebras without exact data.
pub(crate) fn run_float(mats: &[&DMatrix<f64>], tol: f64) -> GridReport {
    let q = mats[0].nrows();
    let data: Vec<Vec<f64>> = mats
        .iter()
        .map(|m| {
            let mut row_major = Vec::with_capacity(q * q);
            for i in 0..q {
                for j in 0..q {
                    row_major.push(m[(i, j)]);
                }
            }
            row_major
        })
        .collect();
    let weights = vec![1.0f64; mats.len()];
    run_grid(&data, q, &weights, tol, false)
}
