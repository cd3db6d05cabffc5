//! Numerical search for p-dimensional subspaces of cones over conjugacy
//! classes in `so(ℝ^q)`.
//!
//! The frame is parametrized in `so(q)`-coordinates (dimension `q(q-1)/2`
//! per basis matrix) and hard-constrained to be Frobenius-orthogonal with
//! every matrix of norm `N(S)`, a necessary condition for any solution
//! since the J-map of an H-like algebra is unitary onto its image. The
//! objective sums, over a fixed low-discrepancy set of unit directions `Z`,
//! the squared residuals of the trace power sums `trace(J_Z^{2k})` against
//! the even power sums of the target multiset; it vanishes exactly when
//! every sampled direction has the target spectrum. Eigenvalues are not
//! sorted or differentiated anywhere; power sums stay smooth across
//! multiplicity crossings.
//!
//! Multi-start projected gradient descent with backtracking line search;
//! deterministic for a fixed seed. Starts are independent and run in
//! parallel; the result is the minimum objective with the lowest start
//! index as tie-break. A found candidate is never trusted: verification
//! re-runs `subspace_in_cone` on its own direction set, escalating to exact
//! arithmetic when the entries round to small rationals.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{HlieError, Result};
use crate::linalg::{frobenius_inner, SkewMatrix};
use crate::multiset::AdmissibleMultiset;
use crate::scalar::Scalar;
use crate::verify::{self, Mode};

pub const DEFAULT_SAMPLES: usize = 32;
pub const DEFAULT_STARTS: usize = 20;
pub const DEFAULT_MAX_ITERS: usize = 2000;
pub const DEFAULT_TOL_OBJECTIVE: f64 = 1e-12;

/// Search specification: find a `p`-dimensional subspace of `ℝC_target` in
/// `so(ℝ^q)`.
#[derive(Clone, Debug, Serialize)]
pub struct SearchProblem {
    pub q: usize,
    pub p: usize,
    pub target: AdmissibleMultiset,
    pub n_samples: usize,
    pub n_starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub tol_objective: f64,
}

impl SearchProblem {
    pub fn new(q: usize, p: usize, target: AdmissibleMultiset) -> Result<Self> {
        if p == 0 {
            return Err(HlieError::InvalidParameter("search needs p >= 1".into()));
        }
        if target.size() != q {
            return Err(HlieError::DimensionMismatch {
                expected: q,
                got: target.size(),
                context: "target multiset size",
            });
        }
        if target.is_all_zero() {
            return Err(HlieError::InvalidParameter(
                "target spectrum must have a nonzero entry".into(),
            ));
        }
        Ok(SearchProblem {
            q,
            p,
            target,
            n_samples: DEFAULT_SAMPLES,
            n_starts: DEFAULT_STARTS,
            seed: 0,
            max_iters: DEFAULT_MAX_ITERS,
            tol_objective: DEFAULT_TOL_OBJECTIVE,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, n: usize) -> Self {
        self.n_starts = n.max(1);
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = n.max(4);
        self
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n.max(1);
        self
    }

    pub fn with_tol_objective(mut self, tol: f64) -> Self {
        self.tol_objective = tol;
        self
    }
}

/// Per-start convergence summary.
#[derive(Clone, Debug, Serialize)]
pub struct StartTrace {
    pub start: usize,
    pub iters: usize,
    pub objective: f64,
    pub converged: bool,
}

/// Search outcome. When `verified` is set, `basis` spans a subspace that
/// independently passed `subspace_in_cone` against the target.
#[derive(Clone, Debug)]
pub struct SearchResult {
    /// Frobenius-orthogonal basis, each matrix of norm `N(target)`.
    pub basis: Vec<SkewMatrix>,
    pub objective: f64,
    pub verified: bool,
    /// Whether verification also succeeded in exact arithmetic after
    /// rounding the entries to small rationals.
    pub verified_exact: bool,
    pub best_start: Option<usize>,
    pub trace: Vec<StartTrace>,
}

impl Serialize for SearchResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let basis: Vec<Vec<Vec<f64>>> = self
            .basis
            .iter()
            .map(|m| {
                (0..m.q())
                    .map(|i| (0..m.q()).map(|j| m.mat()[(i, j)]).collect())
                    .collect()
            })
            .collect();
        let mut st = serializer.serialize_struct("SearchResult", 6)?;
        st.serialize_field("basis", &basis)?;
        st.serialize_field("objective", &self.objective)?;
        st.serialize_field("verified", &self.verified)?;
        st.serialize_field("verified_exact", &self.verified_exact)?;
        st.serialize_field("best_start", &self.best_start)?;
        st.serialize_field("trace", &self.trace)?;
        st.end()
    }
}

/// Coordinates on frames of skew matrices: each basis matrix is a vector in
/// `ℝ^{q(q-1)/2}`, the constraint manifold is the scaled Stiefel manifold
/// of frames with pairwise-orthogonal columns of squared norm `N(S)²/2`.
struct FrameSpace {
    q: usize,
    p: usize,
    dim: usize,
    pairs: Vec<(usize, usize)>,
    /// `N(S)²/2`: squared column norm in parameter coordinates.
    alpha: f64,
}

impl FrameSpace {
    fn new(q: usize, p: usize, target_norm_sq: f64) -> FrameSpace {
        let pairs: Vec<(usize, usize)> = (0..q)
            .flat_map(|a| ((a + 1)..q).map(move |b| (a, b)))
            .collect();
        FrameSpace {
            q,
            p,
            dim: pairs.len(),
            pairs,
            alpha: target_norm_sq / 2.0,
        }
    }

    fn skew_of(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.q, self.q);
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            m[(b, a)] = x[k];
            m[(a, b)] = -x[k];
        }
        m
    }

    fn params_of(&self, m: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim, |k, _| {
            let (a, b) = self.pairs[k];
            m[(b, a)]
        })
    }

    /// Projection onto the constraint manifold: QR orthonormalization of
    /// the columns with deterministic signs, rescaled to norm `√α`.
    fn retract(&self, frame: &DMatrix<f64>) -> DMatrix<f64> {
        let qr = frame.clone().qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..self.p {
            if r[(j, j)] < 0.0 {
                for i in 0..self.dim {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        q * self.alpha.sqrt()
    }

    fn tangent_project(&self, frame: &DMatrix<f64>, grad: &DMatrix<f64>) -> DMatrix<f64> {
        let vg = frame.transpose() * grad;
        let sym = (&vg + vg.transpose()) * 0.5;
        grad - frame * sym / self.alpha
    }

    /// Objective and (optionally) its Euclidean gradient in frame
    /// coordinates. With `b_sq` supplied, the annihilator residual is added
    /// to the power-sum terms (the polish phase).
    fn evaluate(
        &self,
        frame: &DMatrix<f64>,
        directions: &[DVector<f64>],
        c: &[f64],
        b_sq: Option<&[f64]>,
        want_grad: bool,
    ) -> (f64, Option<DMatrix<f64>>) {
        let k_max = c.len();
        let mut obj = 0.0;
        let mut grad = if want_grad {
            Some(DMatrix::zeros(self.dim, self.p))
        } else {
            None
        };
        for z in directions {
            let x = frame * z;
            let j = self.skew_of(&x);
            let j2 = &j * &j;
            // odd = J^{2k-1}, even = J^{2k}.
            let mut odd = j.clone();
            let mut even = j2.clone();
            let mut g_param: Option<DVector<f64>> = want_grad.then(|| DVector::zeros(self.dim));
            for k in 1..=k_max {
                let r = even.trace() - c[k - 1];
                obj += r * r;
                if let Some(g) = g_param.as_mut() {
                    // ∂ trace(J^{2k})/∂x_(a,b) = 4k·(J^{2k-1})_(a,b) with the
                    // (b,a)=+x convention; chain through the residual.
                    let coeff = 8.0 * k as f64 * r;
                    for (idx, &(a, b)) in self.pairs.iter().enumerate() {
                        g[idx] += coeff * odd[(a, b)];
                    }
                }
                if k < k_max {
                    odd = &even * &j;
                    even = &even * &j2;
                }
            }
            if let Some(b_sq) = b_sq {
                let (value, m) = annihilator_term(&j, b_sq, want_grad);
                obj += value;
                if let (Some(g), Some(m)) = (g_param.as_mut(), m) {
                    for (idx, &(a, b)) in self.pairs.iter().enumerate() {
                        g[idx] += m[(b, a)] - m[(a, b)];
                    }
                }
            }
            if let (Some(g), Some(gp)) = (grad.as_mut(), g_param) {
                // x = F·z, so ∂/∂F(:,i) picks up zᵢ.
                for i in 0..self.p {
                    for idx in 0..self.dim {
                        g[(idx, i)] += z[i] * gp[idx];
                    }
                }
            }
        }
        (obj, grad)
    }
}

/// `(-1)^k Σ 2·mult·b^{2k}`: the trace power sums any matrix with the
/// target spectrum must have.
fn target_power_sums(target: &AdmissibleMultiset, k_max: usize) -> Vec<f64> {
    (1..=k_max)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * target.even_power_sum(k)
        })
        .collect()
}

/// Distinct values `b²` of the target, zero included when present: the
/// roots of the annihilating polynomial `Π (J² + b²I)` of any matrix with
/// spectrum inside the target's value set.
fn annihilator_roots(target: &AdmissibleMultiset) -> Vec<f64> {
    target
        .entries()
        .iter()
        .map(|e| {
            let b = e.b.to_f64();
            b * b
        })
        .collect()
}

/// `‖Π_j (J² + bⱼ²·I)‖²_F` and, on request, its derivative with respect to
/// the entries of `J` (as `M` with `d(term) = Σ M_uv dJ_uv`).
///
/// This residual vanishes exactly when the spectrum values of `J` lie in
/// the target's value set. Unlike the power sums, which are quartic in an
/// eigenvalue splitting at a repeated target value, it is quadratic there,
/// so descent can resolve degenerate spectra to machine precision.
fn annihilator_term(
    j: &DMatrix<f64>,
    b_sq: &[f64],
    want_grad: bool,
) -> (f64, Option<DMatrix<f64>>) {
    let q = j.nrows();
    let j2 = j * j;
    let factors: Vec<DMatrix<f64>> = b_sq
        .iter()
        .map(|&b2| &j2 + DMatrix::identity(q, q) * b2)
        .collect();
    let r = factors.len();
    let mut prefixes = Vec::with_capacity(r + 1);
    prefixes.push(DMatrix::identity(q, q));
    for f in &factors {
        let last = prefixes.last().unwrap() * f;
        prefixes.push(last);
    }
    let mut suffixes = vec![DMatrix::identity(q, q); r + 1];
    for idx in (0..r).rev() {
        suffixes[idx] = &factors[idx] * &suffixes[idx + 1];
    }
    let p = prefixes[r].clone();
    let value = p.iter().map(|x| x * x).sum::<f64>();
    if !want_grad {
        return (value, None);
    }
    let jt = j.transpose();
    let mut m = DMatrix::zeros(q, q);
    for idx in 0..r {
        let lt_p = prefixes[idx].transpose() * &p;
        let rt = suffixes[idx + 1].transpose();
        m += &lt_p * &rt * &jt * 2.0;
        m += &jt * &lt_p * &rt * 2.0;
    }
    (value, Some(m))
}

fn primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut candidate = 2u64;
    while out.len() < n {
        if out.iter().all(|p| !candidate.is_multiple_of(*p)) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

/// Acklam's rational approximation to the inverse normal CDF; ample
/// accuracy for direction sampling.
fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p = p.clamp(1e-300, 1.0 - 1e-16);
    let p_low = 0.02425;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inverse_normal_cdf(1.0 - p)
    }
}

/// Fixed low-discrepancy unit directions: a Kronecker lattice with a
/// seed-dependent offset, mapped through the inverse normal CDF and
/// normalized.
pub fn sample_sphere_directions(p: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let alphas: Vec<f64> = primes(p)
        .iter()
        .map(|&pr| (pr as f64).sqrt().fract())
        .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let offsets: Vec<f64> = (0..p).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
    let mut out = Vec::with_capacity(count);
    let mut n = 1u64;
    while out.len() < count {
        let v = DVector::from_fn(p, |i, _| {
            let u = (offsets[i] + n as f64 * alphas[i]).fract();
            inverse_normal_cdf(u)
        });
        let norm = v.norm();
        if norm > 1e-8 {
            out.push(v / norm);
        }
        n += 1;
    }
    out
}

/// Sum over the sampled unit directions of the squared power-sum residuals
/// against the target. Zero iff every sampled direction carries exactly the
/// target spectrum. The basis must be Frobenius-orthogonal with each matrix
/// of norm `N(target)`.
pub fn objective(
    basis: &[SkewMatrix],
    target: &AdmissibleMultiset,
    directions: &[DVector<f64>],
) -> Result<f64> {
    let Some(first) = basis.first() else {
        return Err(HlieError::InvalidParameter("empty search basis".into()));
    };
    let q = first.q();
    let n_sq = target.norm_squared().to_f64();
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate().skip(i) {
            let inner = frobenius_inner(a, b)?;
            let expected = if i == j { n_sq } else { 0.0 };
            if (inner - expected).abs() > 1e-6 * n_sq.max(1.0) {
                return Err(HlieError::PreconditionFailed(format!(
                    "search basis violates the Frobenius-orthogonality constraint: \
                     <B{i}, B{j}> = {inner}, expected {expected}"
                )));
            }
        }
    }
    let space = FrameSpace::new(q, basis.len(), n_sq);
    let mut frame = DMatrix::zeros(space.dim, basis.len());
    for (i, m) in basis.iter().enumerate() {
        frame.set_column(i, &space.params_of(m.mat()));
    }
    let c = target_power_sums(target, q / 2);
    Ok(space.evaluate(&frame, directions, &c, None, false).0)
}

struct StartOutcome {
    frame: DMatrix<f64>,
    trace: StartTrace,
}

/// Projected gradient descent with backtracking, from `frame`, stopping at
/// `target_obj`, iteration budget `max_iters`. Returns the final frame,
/// objective, and iterations spent.
fn descend(
    space: &FrameSpace,
    directions: &[DVector<f64>],
    c: &[f64],
    b_sq: Option<&[f64]>,
    mut frame: DMatrix<f64>,
    target_obj: f64,
    max_iters: usize,
) -> (DMatrix<f64>, f64, usize) {
    let (mut obj, mut grad) = space.evaluate(&frame, directions, c, b_sq, true);
    let mut step = 0.25;
    let mut iters = 0;
    while iters < max_iters && obj > target_obj {
        iters += 1;
        let tangent = space.tangent_project(&frame, grad.as_ref().expect("gradient requested"));
        let slope = tangent.iter().map(|x| x * x).sum::<f64>();
        if slope < 1e-300 {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let trial = space.retract(&(&frame - &tangent * step));
            let (trial_obj, trial_grad) = space.evaluate(&trial, directions, c, b_sq, true);
            if trial_obj <= obj - 1e-4 * step * slope {
                frame = trial;
                obj = trial_obj;
                grad = trial_grad;
                step = (step * 1.3).min(1e3);
                accepted = true;
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    (frame, obj, iters)
}

fn run_single_start(
    space: &FrameSpace,
    directions: &[DVector<f64>],
    c: &[f64],
    b_sq: &[f64],
    problem: &SearchProblem,
    start: usize,
) -> StartOutcome {
    let seed = problem
        .seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(start as u64 + 1));
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let init = DMatrix::from_fn(space.dim, space.p, |_, _| crate::linalg::gauss(&mut rng));
    let frame = space.retract(&init);

    // Phase 1: the power-sum objective, down to roughly the square root of
    // the final tolerance (residuals go like the square of eigenvalue
    // errors at worst).
    let coarse_target = (problem.tol_objective * 1e-4).max(1e-22);
    let (frame, obj, iters) = descend(
        space,
        directions,
        c,
        None,
        frame,
        coarse_target,
        problem.max_iters,
    );

    // Phase 2: once inside a basin, add the annihilator residual, which is
    // quadratic in eigenvalue splittings at repeated target values where
    // the power sums alone are quartically flat. The reported objective
    // stays the plain power-sum one.
    let (frame, obj, iters) = if obj < 1e-4 {
        let polish_target = (problem.tol_objective * 1e-8).max(1e-26);
        let (frame, _, extra) = descend(
            space,
            directions,
            c,
            Some(b_sq),
            frame,
            polish_target,
            problem.max_iters,
        );
        let obj = space.evaluate(&frame, directions, c, None, false).0;
        (frame, obj, iters + extra)
    } else {
        (frame, obj, iters)
    };

    StartOutcome {
        frame,
        trace: StartTrace {
            start,
            iters,
            objective: obj,
            converged: obj <= problem.tol_objective,
        },
    }
}

/// Attempts to round every entry to a rational with a small denominator;
/// `None` when some entry is not close to one.
fn snap_to_rational(basis: &[SkewMatrix]) -> Option<Vec<SkewMatrix>> {
    const MAX_DEN: i64 = 64;
    const SNAP_TOL: f64 = 1e-6;
    let snap_entry = |x: f64| -> Option<Scalar> {
        for den in 1..=MAX_DEN {
            let num = (x * den as f64).round();
            if num.abs() > 1e15 {
                return None;
            }
            if (x - num / den as f64).abs() <= SNAP_TOL * x.abs().max(1.0) {
                return Some(Scalar::from_ratio(num as i64, den));
            }
        }
        None
    };
    basis
        .iter()
        .map(|m| {
            let q = m.q();
            let rows: Option<Vec<Vec<Scalar>>> = (0..q)
                .map(|i| (0..q).map(|j| snap_entry(m.mat()[(i, j)])).collect())
                .collect();
            rows.and_then(|r| SkewMatrix::from_scalar_rows(&r).ok())
        })
        .collect()
}

/// Multi-start search. Deterministic for a fixed problem (including seed);
/// non-convergence yields the best candidate with `verified = false`, never
/// an error.
pub fn run_search(problem: &SearchProblem) -> SearchResult {
    let space = FrameSpace::new(problem.q, problem.p, problem.target.norm_squared().to_f64());
    if problem.p > space.dim {
        // so(q) is too small to hold a p-frame; no subspace exists.
        return SearchResult {
            basis: vec![SkewMatrix::zero(problem.q); problem.p],
            objective: f64::MAX,
            verified: false,
            verified_exact: false,
            best_start: None,
            trace: Vec::new(),
        };
    }
    let directions = sample_sphere_directions(problem.p, problem.n_samples, problem.seed);
    let c = target_power_sums(&problem.target, problem.q / 2);
    let b_sq = annihilator_roots(&problem.target);

    let outcomes: Vec<StartOutcome> = (0..problem.n_starts)
        .into_par_iter()
        .map(|s| run_single_start(&space, &directions, &c, &b_sq, problem, s))
        .collect();

    let best = outcomes
        .iter()
        .min_by(|a, b| {
            a.trace
                .objective
                .total_cmp(&b.trace.objective)
                .then(a.trace.start.cmp(&b.trace.start))
        })
        .expect("n_starts >= 1");

    let basis: Vec<SkewMatrix> = (0..problem.p)
        .map(|i| {
            SkewMatrix::from_dmatrix(space.skew_of(&best.frame.column(i).into_owned()))
                .expect("frame parametrization is skew by construction")
        })
        .collect();

    let objective = best.trace.objective;
    let mut verified = false;
    let mut verified_exact = false;
    if objective <= problem.tol_objective {
        // Verification never trusts the optimizer's samples.
        verified = verify::subspace_in_cone(
            &basis,
            &problem.target,
            Mode::Sampled,
            crate::multiset::DEFAULT_TOL,
        )
        .map(|r| r.contained)
        .unwrap_or(false);
        if verified {
            if let Some(exact_basis) = snap_to_rational(&basis) {
                verified_exact = verify::subspace_in_cone(
                    &exact_basis,
                    &problem.target,
                    Mode::Exact,
                    crate::multiset::DEFAULT_TOL,
                )
                .map(|r| r.contained && r.exact_arithmetic)
                .unwrap_or(false);
            }
        }
    }

    SearchResult {
        basis,
        objective,
        verified,
        verified_exact,
        best_start: Some(best.trace.start),
        trace: outcomes.into_iter().map(|o| o.trace).collect(),
    }
}

fn frame_of_basis(space: &FrameSpace, basis: &[SkewMatrix]) -> DMatrix<f64> {
    let mut frame = DMatrix::zeros(space.dim, basis.len());
    for (i, m) in basis.iter().enumerate() {
        frame.set_column(i, &space.params_of(m.mat()));
    }
    frame
}

/// Central finite-difference gradient of the objective in frame
/// coordinates (`q(q-1)/2` rows, one column per basis matrix), for
/// validating the analytic gradient.
pub fn finite_difference_gradient(
    basis: &[SkewMatrix],
    target: &AdmissibleMultiset,
    directions: &[DVector<f64>],
    h: f64,
) -> Result<DMatrix<f64>> {
    let q = basis[0].q();
    let space = FrameSpace::new(q, basis.len(), target.norm_squared().to_f64());
    let frame = frame_of_basis(&space, basis);
    let c = target_power_sums(target, q / 2);
    let mut fd = DMatrix::zeros(space.dim, basis.len());
    for i in 0..basis.len() {
        for k in 0..space.dim {
            let mut plus = frame.clone();
            plus[(k, i)] += h;
            let mut minus = frame.clone();
            minus[(k, i)] -= h;
            let fp = space.evaluate(&plus, directions, &c, None, false).0;
            let fm = space.evaluate(&minus, directions, &c, None, false).0;
            fd[(k, i)] = (fp - fm) / (2.0 * h);
        }
    }
    Ok(fd)
}

/// Analytic gradient in the same frame coordinates as
/// [`finite_difference_gradient`].
pub fn analytic_gradient(
    basis: &[SkewMatrix],
    target: &AdmissibleMultiset,
    directions: &[DVector<f64>],
) -> Result<DMatrix<f64>> {
    let q = basis[0].q();
    let space = FrameSpace::new(q, basis.len(), target.norm_squared().to_f64());
    let frame = frame_of_basis(&space, basis);
    let c = target_power_sums(target, q / 2);
    let (_, grad) = space.evaluate(&frame, directions, &c, None, true);
    Ok(grad.expect("gradient requested"))
}

/// A seeded random point on the constraint manifold, as basis matrices:
/// Frobenius-orthogonal, each of norm `N(target)`.
pub fn random_constrained_basis(
    q: usize,
    p: usize,
    target: &AdmissibleMultiset,
    seed: u64,
) -> Result<Vec<SkewMatrix>> {
    let space = FrameSpace::new(q, p, target.norm_squared().to_f64());
    if p > space.dim {
        return Err(HlieError::InvalidParameter(format!(
            "no {p}-frame exists in so({q}) (dimension {})",
            space.dim
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let init = DMatrix::from_fn(space.dim, p, |_, _| crate::linalg::gauss(&mut rng));
    let frame = space.retract(&init);
    Ok((0..p)
        .map(|i| {
            SkewMatrix::from_dmatrix(space.skew_of(&frame.column(i).into_owned()))
                .expect("frame parametrization is skew")
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{fixture, Fixture, GmVariant};
    use crate::linalg::{block_diag, random_skew};
    use crate::verify::classify;

    fn gm_basis() -> Vec<SkewMatrix> {
        fixture(Fixture::GornetMast {
            a: Scalar::from_int(1),
            b: Scalar::from_int(2),
            variant: GmVariant::NegBA,
        })
        .unwrap()
        .j_basis()
        .to_vec()
    }

    #[test]
    fn objective_vanishes_on_known_solution() {
        let target = AdmissibleMultiset::from_int_pairs(&[(1, 1), (2, 1)]);
        let dirs = sample_sphere_directions(2, 24, 7);
        let obj = objective(&gm_basis(), &target, &dirs).unwrap();
        assert!(obj < 1e-18, "objective {obj}");
    }

    #[test]
    fn objective_positive_on_disjoint_rotations() {
        let rot = fixture(Fixture::H3).unwrap().j_basis()[0].clone();
        let zero2 = SkewMatrix::zero(2);
        let a = block_diag(&[&rot, &zero2]);
        let b = block_diag(&[&zero2, &rot]);
        // Rescale to the constraint norm N({±i ×2}) = 2.
        let a = a.scaled(&Scalar::Approx(2.0 / a.frobenius_norm()));
        let b = b.scaled(&Scalar::Approx(2.0 / b.frobenius_norm()));
        let target = AdmissibleMultiset::from_int_pairs(&[(1, 2)]);
        let dirs = sample_sphere_directions(2, 24, 7);
        let obj = objective(&[a, b], &target, &dirs).unwrap();
        assert!(obj > 1e-2, "objective {obj}");
    }

    #[test]
    fn objective_rejects_unconstrained_basis() {
        let target = AdmissibleMultiset::from_int_pairs(&[(1, 1), (2, 1)]);
        let dirs = sample_sphere_directions(2, 8, 7);
        let mut basis = gm_basis();
        basis[0] = basis[0].scaled(&Scalar::from_int(2));
        assert!(matches!(
            objective(&basis, &target, &dirs),
            Err(HlieError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn one_dimensional_objective_is_zero_on_own_spectrum() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let m = random_skew(5, &mut rng);
        let target = crate::linalg::skew_spectrum(&m, crate::linalg::SPECTRUM_TOL).unwrap();
        let scaled = m.scaled(&Scalar::Approx(target.norm() / m.frobenius_norm()));
        let dirs = sample_sphere_directions(1, 8, 1);
        let obj = objective(&[scaled], &target, &dirs).unwrap();
        assert!(obj < 1e-16, "objective {obj}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let target = AdmissibleMultiset::from_int_pairs(&[(1, 1), (2, 1)]);
        let space = FrameSpace::new(4, 2, target.norm_squared().to_f64());
        let dirs = sample_sphere_directions(2, 12, 5);
        let c = target_power_sums(&target, 2);
        for _ in 0..5 {
            let init = DMatrix::from_fn(space.dim, 2, |_, _| crate::linalg::gauss(&mut rng));
            let frame = space.retract(&init);
            let (_, grad) = space.evaluate(&frame, &dirs, &c, None, true);
            let grad = grad.unwrap();
            let h = 1e-6;
            for i in 0..2 {
                for k in 0..space.dim {
                    let mut plus = frame.clone();
                    plus[(k, i)] += h;
                    let mut minus = frame.clone();
                    minus[(k, i)] -= h;
                    let fd = (space.evaluate(&plus, &dirs, &c, None, false).0
                        - space.evaluate(&minus, &dirs, &c, None, false).0)
                        / (2.0 * h);
                    let scale = fd.abs().max(grad[(k, i)].abs()).max(1e-3);
                    assert!(
                        (fd - grad[(k, i)]).abs() <= 1e-5 * scale,
                        "grad mismatch at ({k},{i}): analytic {} vs fd {fd}",
                        grad[(k, i)]
                    );
                }
            }
        }
    }

    #[test]
    fn search_finds_gornet_mast_type_subspace() {
        let target = AdmissibleMultiset::from_int_pairs(&[(1, 1), (2, 1)]);
        let problem = SearchProblem::new(4, 2, target.clone())
            .unwrap()
            .with_seed(11)
            .with_starts(8);
        let result = run_search(&problem);
        assert!(result.verified, "objective {}", result.objective);
        assert!(result.objective < 1e-10);
        // A verified result's standard algebra has the target spectrum.
        let alg = crate::algebra::standard_from_subspace(&result.basis).unwrap();
        let rep = classify(&alg, Mode::Sampled, 1e-8).unwrap();
        assert!(rep.verdict.is_hlike());
        let s = rep.spectrum.unwrap();
        let lambda = Scalar::Approx(s.norm() / target.norm());
        assert!(s.equals_approx(&target.scale(&lambda), 1e-7));
    }

    #[test]
    fn search_respects_dimension_bound() {
        // so(2) is 1-dimensional: no 2-dimensional subspace exists.
        let target = AdmissibleMultiset::from_int_pairs(&[(1, 1)]);
        let problem = SearchProblem::new(2, 2, target).unwrap();
        let result = run_search(&problem);
        assert!(!result.verified);
    }

    #[test]
    fn search_is_deterministic() {
        let target = AdmissibleMultiset::from_int_pairs(&[(1, 1), (0, 1)]);
        let problem = SearchProblem::new(3, 3, target)
            .unwrap()
            .with_seed(4)
            .with_starts(3)
            .with_max_iters(50);
        let a = serde_json::to_string(&run_search(&problem)).unwrap();
        let b = serde_json::to_string(&run_search(&problem)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_escalation_on_rational_basis() {
        let snapped = snap_to_rational(&gm_basis()).expect("integer entries snap");
        assert!(snapped.iter().all(|m| m.is_exact()));
        let target = AdmissibleMultiset::from_int_pairs(&[(1, 1), (2, 1)]);
        let rep =
            verify::subspace_in_cone(&snapped, &target, Mode::Exact, crate::multiset::DEFAULT_TOL)
                .unwrap();
        assert!(rep.contained && rep.exact_arithmetic);
    }

    #[test]
    fn problem_validation() {
        let s = AdmissibleMultiset::from_int_pairs(&[(1, 1)]);
        assert!(SearchProblem::new(2, 0, s.clone()).is_err());
        assert!(SearchProblem::new(3, 1, s).is_err()); // size mismatch
        assert!(SearchProblem::new(2, 1, AdmissibleMultiset::zeros(2)).is_err());
    }
}
