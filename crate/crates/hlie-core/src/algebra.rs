//! Two-step metric nilpotent Lie algebras of type `(p, q)`, represented by
//! their J-map.
//!
//! The algebra `n = v ⊕ z` is stored through `j_basis = [J(Z₁), …, J(Z_p)]`
//! for a fixed orthonormal basis of `z`, with `v = ℝ^q` carrying the standard
//! inner product. The bracket is recovered from
//! `⟨J(Z)X, Y⟩ = ⟨Z, [X, Y]⟩`. General inner products are handled by
//! pre-conjugating inputs; every two-step metric nilpotent Lie algebra is
//! metrically isomorphic to one of this shape.

use nalgebra::{DMatrix, DVector};
use num::rational::BigRational;
use num::Zero;

use crate::error::{HlieError, Result};
use crate::exactmat::RatMat;
use crate::linalg::{self, common_kernel, frobenius_inner, linear_combination, SkewMatrix};
use crate::scalar::Scalar;

/// Exactly orthogonal (not normalized) spanning matrices for the image of J,
/// kept alongside a float `j_basis` when the algebra was built from exact
/// data through `standard_from_subspace`. `weights[i]` is the exact squared
/// Frobenius norm of `mats[i]`; the orthonormal basis matrix `j_basis[i]`
/// equals `mats[i]/√weights[i]`.
#[derive(Clone, Debug)]
pub(crate) struct ExactSpan {
    pub mats: Vec<RatMat>,
    pub weights: Vec<BigRational>,
}

/// A two-step metric nilpotent Lie algebra of type `(p, q)`.
#[derive(Clone, Debug)]
pub struct MetricAlgebra {
    q: usize,
    j_basis: Vec<SkewMatrix>,
    label: Option<String>,
    exact_span: Option<ExactSpan>,
}

impl MetricAlgebra {
    /// Wraps a J-basis. The matrices must share one dimension `q ≥ 1`;
    /// linear independence is a property checked by
    /// [`MetricAlgebra::check_commutator_exact`], not enforced here.
    pub fn new(j_basis: Vec<SkewMatrix>) -> Result<Self> {
        let Some(first) = j_basis.first() else {
            return Err(HlieError::InvalidParameter(
                "empty j_basis; use MetricAlgebra::abelian for p = 0".into(),
            ));
        };
        let q = first.q();
        if q == 0 {
            return Err(HlieError::InvalidParameter("q must be at least 1".into()));
        }
        if j_basis.iter().any(|m| m.q() != q) {
            return Err(HlieError::DimensionMismatch {
                expected: q,
                got: 0,
                context: "j_basis matrices of mixed dimension",
            });
        }
        Ok(MetricAlgebra {
            q,
            j_basis,
            label: None,
            exact_span: None,
        })
    }

    /// The abelian algebra ℝ^q seen as a degenerate member with `p = 0`.
    /// Only direct sums accept these.
    pub fn abelian(q: usize) -> Self {
        MetricAlgebra {
            q,
            j_basis: Vec::new(),
            label: Some(format!("abelian({q})")),
            exact_span: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn p(&self) -> usize {
        self.j_basis.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn is_abelian(&self) -> bool {
        self.j_basis.is_empty()
    }

    pub fn j_basis(&self) -> &[SkewMatrix] {
        &self.j_basis
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub(crate) fn exact_span(&self) -> Option<&ExactSpan> {
        self.exact_span.as_ref()
    }

    /// True when every J-basis matrix carries exact rational entries.
    pub fn is_exact(&self) -> bool {
        self.j_basis.iter().all(|m| m.is_exact())
    }

    /// `J(Z) = Σ Zᵢ·J(Zᵢ)`.
    pub fn j_of(&self, z: &[f64]) -> Result<SkewMatrix> {
        if z.len() != self.p() {
            return Err(HlieError::DimensionMismatch {
                expected: self.p(),
                got: z.len(),
                context: "j_of direction",
            });
        }
        let coeffs: Vec<Scalar> = z.iter().map(|&x| Scalar::Approx(x)).collect();
        linear_combination(&self.j_basis, &coeffs)
    }

    /// Exactness-preserving variant of [`MetricAlgebra::j_of`].
    pub fn j_of_scalar(&self, z: &[Scalar]) -> Result<SkewMatrix> {
        if z.len() != self.p() {
            return Err(HlieError::DimensionMismatch {
                expected: self.p(),
                got: z.len(),
                context: "j_of direction",
            });
        }
        linear_combination(&self.j_basis, z)
    }

    /// `[X, Y] ∈ ℝ^p` with components `⟨J(Zᵢ)X, Y⟩`; bilinear and
    /// antisymmetric.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.q || y.len() != self.q {
            return Err(HlieError::DimensionMismatch {
                expected: self.q,
                got: x.len().max(y.len()),
                context: "bracket arguments",
            });
        }
        let xv = DVector::from_column_slice(x);
        let yv = DVector::from_column_slice(y);
        Ok(self
            .j_basis
            .iter()
            .map(|j| (j.mat() * &xv).dot(&yv))
            .collect())
    }

    /// `J'(Z) = A·J(BᵀZ)·Aᵀ` for `A ∈ O(q)`, `B ∈ O(p)`: the metric
    /// isomorphism action on stored bases. The result is float-valued.
    pub fn transformed(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> MetricAlgebra {
        let p = self.p();
        let j_basis: Vec<SkewMatrix> = (0..p)
            .map(|i| {
                let coeffs: Vec<Scalar> = (0..p).map(|jj| Scalar::Approx(b[(jj, i)])).collect();
                linear_combination(&self.j_basis, &coeffs)
                    .expect("dimensions agree")
                    .conjugated(a)
            })
            .collect();
        MetricAlgebra {
            q: self.q,
            j_basis,
            label: self.label.clone(),
            exact_span: None,
        }
    }

    /// Homothety: scales every J-basis matrix (hence the spectrum) by `c`.
    pub fn scaled(&self, c: &Scalar) -> MetricAlgebra {
        MetricAlgebra {
            q: self.q,
            j_basis: self.j_basis.iter().map(|m| m.scaled(c)).collect(),
            label: self.label.clone(),
            exact_span: None,
        }
    }

    /// True iff the J-basis is linearly independent, i.e. the declared `z`
    /// really is the commutator `[n, n]` and the algebra has type `(p, q)`.
    pub fn check_commutator_exact(&self, tol: f64) -> bool {
        self.min_gram_singular_value() > tol * self.max_gram_singular_value().max(1.0)
    }

    fn gram_singular_values(&self) -> Vec<f64> {
        if self.j_basis.is_empty() {
            return Vec::new();
        }
        let p = self.p();
        let gram = DMatrix::from_fn(p, p, |i, j| {
            frobenius_inner(&self.j_basis[i], &self.j_basis[j]).expect("same dimension")
        });
        crate::linalg::symmetric_eigen_sorted(gram)
            .0
            .into_iter()
            .map(|l| l.max(0.0).sqrt())
            .collect()
    }

    /// Smallest singular value of the `p × q²` flattening of the J-basis.
    pub fn min_gram_singular_value(&self) -> f64 {
        self.gram_singular_values()
            .first()
            .copied()
            .unwrap_or(f64::INFINITY)
    }

    fn max_gram_singular_value(&self) -> f64 {
        self.gram_singular_values().last().copied().unwrap_or(0.0)
    }

    /// Dimension of the common kernel of all `J(Zᵢ)`: the largest abelian
    /// factor sitting inside `v`. Zero for H-like algebras.
    pub fn abelian_factor_dim(&self, tol: f64) -> usize {
        if self.j_basis.is_empty() {
            return self.q;
        }
        common_kernel(&self.j_basis, tol)
            .expect("same dimension")
            .dim()
    }
}

/// The standard two-step metric nilpotent Lie algebra defined by a subspace
/// `W ⊆ so(ℝ^q)`: Frobenius-orthonormalizes the spanning matrices (modified
/// Gram-Schmidt with one re-orthogonalization pass) and takes them as the
/// J-basis. Fails if the input is linearly dependent.
///
/// When every input matrix is exact, an exactly-orthogonal unnormalized span
/// is retained internally so that exact-mode verification stays available
/// even though the normalized basis itself is irrational.
pub fn standard_from_subspace(basis: &[SkewMatrix]) -> Result<MetricAlgebra> {
    let Some(first) = basis.first() else {
        return Err(HlieError::InvalidParameter("empty spanning set".into()));
    };
    let q = first.q();
    if basis.iter().any(|m| m.q() != q) {
        return Err(HlieError::DimensionMismatch {
            expected: q,
            got: 0,
            context: "spanning matrices of mixed dimension",
        });
    }

    let mut ortho: Vec<DMatrix<f64>> = Vec::new();
    for m in basis {
        let mut v = m.mat().clone();
        let orig_norm = v.norm();
        for _pass in 0..2 {
            for u in &ortho {
                let proj: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                v -= u * proj;
            }
        }
        let n = v.norm();
        if n <= linalg::DEFAULT_TOL * orig_norm.max(1.0) {
            return Err(HlieError::DependentBasis { min_singular: n });
        }
        ortho.push(v / n);
    }
    let j_basis: Vec<SkewMatrix> = ortho
        .into_iter()
        .map(|m| SkewMatrix::from_dmatrix(m).expect("combinations of skew matrices are skew"))
        .collect();

    let exact_span = if basis.iter().all(|m| m.is_exact()) {
        exact_orthogonal_span(basis)
    } else {
        None
    };

    let mut alg = MetricAlgebra::new(j_basis)?;
    alg.exact_span = exact_span;
    Ok(alg)
}

/// Rational Gram-Schmidt without normalization; returns `None` if the exact
/// arithmetic discovers dependence (the float path has its own check).
fn exact_orthogonal_span(basis: &[SkewMatrix]) -> Option<ExactSpan> {
    let mut mats: Vec<RatMat> = Vec::new();
    let mut weights: Vec<BigRational> = Vec::new();
    for m in basis {
        let mut v = m.exact()?.clone();
        for (u, w) in mats.iter().zip(&weights) {
            let coeff = -(u.frob_inner(&v) / w);
            v.add_scaled(u, &coeff);
        }
        let w = v.frob_inner(&v);
        if w.is_zero() {
            return None;
        }
        mats.push(v);
        weights.push(w);
    }
    Some(ExactSpan { mats, weights })
}

/// The Gornet-Mast parameter choice `(c, d) ∈ {±(-b, a), ±(-a, b)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GmVariant {
    /// `(c, d) = (-b, a)`
    NegBA,
    /// `(c, d) = (b, -a)`
    BNegA,
    /// `(c, d) = (-a, b)`
    NegAB,
    /// `(c, d) = (a, -b)`
    ANegB,
}

impl GmVariant {
    pub const ALL: [GmVariant; 4] = [
        GmVariant::NegBA,
        GmVariant::BNegA,
        GmVariant::NegAB,
        GmVariant::ANegB,
    ];

    pub fn cd(&self, a: &Scalar, b: &Scalar) -> (Scalar, Scalar) {
        match self {
            GmVariant::NegBA => (b.neg(), a.clone()),
            GmVariant::BNegA => (b.clone(), a.neg()),
            GmVariant::NegAB => (a.neg(), b.clone()),
            GmVariant::ANegB => (a.clone(), b.neg()),
        }
    }

    pub fn parse(s: &str) -> Result<GmVariant> {
        match s.trim().replace(' ', "").as_str() {
            "-b,a" => Ok(GmVariant::NegBA),
            "b,-a" => Ok(GmVariant::BNegA),
            "-a,b" => Ok(GmVariant::NegAB),
            "a,-b" => Ok(GmVariant::ANegB),
            other => Err(HlieError::InvalidParameter(format!(
                "unknown gornet-mast variant {other:?}; expected one of -b,a  b,-a  -a,b  a,-b"
            ))),
        }
    }
}

/// Named example algebras.
#[derive(Clone, Debug)]
pub enum Fixture {
    /// The 3-dimensional Heisenberg algebra, type (1, 2).
    H3,
    /// Type (1, 4) with `J(Z)` built from two rotation blocks `a`, `b`;
    /// requires `(a, b) ≠ (0, 0)`.
    H5 { a: Scalar, b: Scalar },
    /// The Gornet-Mast type (2, 4) family; requires `(a, b) ≠ (0, 0)`.
    GornetMast {
        a: Scalar,
        b: Scalar,
        variant: GmVariant,
    },
    /// The free two-step nilpotent Lie algebra on three generators,
    /// type (3, 3).
    F32,
    /// The almost abelian algebra n^m of type (m, m+1) with
    /// `[E₀, E_k] = F_k`.
    Star { m: usize },
    /// Quaternionic H-type algebra of type (3, 4): J given by left
    /// multiplication by i, j, k on ℝ⁴ ≅ ℍ. Extra fixture, not printed in
    /// the source examples.
    HType34,
    /// ℝ^q with p = 0.
    Abelian { q: usize },
}

fn s0() -> Scalar {
    Scalar::from_int(0)
}

fn skew(rows: Vec<Vec<Scalar>>) -> SkewMatrix {
    SkewMatrix::from_scalar_rows(&rows).expect("fixture matrices are skew")
}

/// Builds the named fixture, with the exact matrices from the source
/// examples. Parameters supplied exactly produce exact algebras.
pub fn fixture(fx: Fixture) -> Result<MetricAlgebra> {
    match fx {
        Fixture::H3 => {
            let j = skew(vec![
                vec![s0(), Scalar::from_int(-1)],
                vec![Scalar::from_int(1), s0()],
            ]);
            Ok(MetricAlgebra::new(vec![j])?.with_label("h3"))
        }
        Fixture::H5 { a, b } => {
            if a.is_zero() && b.is_zero() {
                return Err(HlieError::InvalidParameter(
                    "h5 requires (a, b) != (0, 0): the bracket would vanish".into(),
                ));
            }
            let j = skew(vec![
                vec![s0(), a.neg(), s0(), s0()],
                vec![a.clone(), s0(), s0(), s0()],
                vec![s0(), s0(), s0(), b.neg()],
                vec![s0(), s0(), b.clone(), s0()],
            ]);
            Ok(MetricAlgebra::new(vec![j])?.with_label(format!(
                "h5(a={},b={})",
                a.format(),
                b.format()
            )))
        }
        Fixture::GornetMast { a, b, variant } => {
            if a.is_zero() && b.is_zero() {
                return Err(HlieError::InvalidParameter(
                    "gornet_mast requires (a, b) != (0, 0)".into(),
                ));
            }
            let (c, d) = variant.cd(&a, &b);
            let j1 = skew(vec![
                vec![s0(), a.clone(), s0(), s0()],
                vec![a.neg(), s0(), s0(), s0()],
                vec![s0(), s0(), s0(), b.clone()],
                vec![s0(), s0(), b.neg(), s0()],
            ]);
            let j2 = skew(vec![
                vec![s0(), s0(), c.clone(), s0()],
                vec![s0(), s0(), s0(), d.clone()],
                vec![c.neg(), s0(), s0(), s0()],
                vec![s0(), d.neg(), s0(), s0()],
            ]);
            Ok(MetricAlgebra::new(vec![j1, j2])?.with_label(format!(
                "gornet_mast(a={},b={},cd=({},{}))",
                a.format(),
                b.format(),
                c.format(),
                d.format()
            )))
        }
        Fixture::F32 => {
            let one = Scalar::from_int(1);
            let j1 = skew(vec![
                vec![s0(), one.neg(), s0()],
                vec![one.clone(), s0(), s0()],
                vec![s0(), s0(), s0()],
            ]);
            let j2 = skew(vec![
                vec![s0(), s0(), s0()],
                vec![s0(), s0(), one.neg()],
                vec![s0(), one.clone(), s0()],
            ]);
            let j3 = skew(vec![
                vec![s0(), s0(), one.neg()],
                vec![s0(), s0(), s0()],
                vec![one.clone(), s0(), s0()],
            ]);
            Ok(MetricAlgebra::new(vec![j1, j2, j3])?.with_label("f32"))
        }
        Fixture::Star { m } => {
            if m == 0 {
                return Err(HlieError::InvalidParameter("star requires m >= 1".into()));
            }
            let q = m + 1;
            let j_basis: Vec<SkewMatrix> = (1..=m)
                .map(|k| {
                    let mut rows = vec![vec![s0(); q]; q];
                    rows[k][0] = Scalar::from_int(1);
                    rows[0][k] = Scalar::from_int(-1);
                    skew(rows)
                })
                .collect();
            Ok(MetricAlgebra::new(j_basis)?.with_label(format!("star({m})")))
        }
        Fixture::HType34 => {
            let rows = |entries: [[i64; 4]; 4]| -> Vec<Vec<Scalar>> {
                entries
                    .iter()
                    .map(|r| r.iter().map(|&x| Scalar::from_int(x)).collect())
                    .collect()
            };
            let li = skew(rows([
                [0, -1, 0, 0],
                [1, 0, 0, 0],
                [0, 0, 0, -1],
                [0, 0, 1, 0],
            ]));
            let lj = skew(rows([
                [0, 0, -1, 0],
                [0, 0, 0, 1],
                [1, 0, 0, 0],
                [0, -1, 0, 0],
            ]));
            let lk = skew(rows([
                [0, 0, 0, -1],
                [0, 0, -1, 0],
                [0, 1, 0, 0],
                [1, 0, 0, 0],
            ]));
            Ok(MetricAlgebra::new(vec![li, lj, lk])?.with_label("htype34 (quaternionic)"))
        }
        Fixture::Abelian { q } => Ok(MetricAlgebra::abelian(q)),
    }
}
