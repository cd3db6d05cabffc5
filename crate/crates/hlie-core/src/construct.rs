//! Constructions that produce new algebras from old: direct sums, tensor
//! products with symmetric maps, central sums along the centers, submersion
//! quotients, and block subspace sums.
//!
//! Each constructor returns the algebra together with a
//! [`ConstructionRecord`] carrying the construction history and, when the
//! theory guarantees one, the predicted spectrum. Predictions assume the
//! inputs have constant spectra; callers compare predicted against measured.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::{standard_from_subspace, MetricAlgebra};
use crate::error::{HlieError, Result};
use crate::linalg::{
    self, block_diag, frobenius_inner, linear_combination, skew_spectrum, SkewMatrix, Subspace,
    SymMatrix, SPECTRUM_TOL,
};
use crate::multiset::AdmissibleMultiset;
use crate::scalar::Scalar;
use crate::verify::{self, Mode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConstructionKind {
    DirectSum,
    TensorProduct,
    CentralSum,
    Submersion,
    SubspaceSum,
}

/// Provenance of a constructed algebra.
#[derive(Clone, Debug, Serialize)]
pub struct ConstructionRecord {
    pub kind: ConstructionKind,
    pub inputs: Vec<String>,
    /// Spectrum the construction guarantees, when the inputs have constant
    /// spectra; `None` when no guarantee exists.
    pub predicted_spectrum: Option<AdmissibleMultiset>,
}

fn label_of(alg: &MetricAlgebra) -> String {
    alg.label().unwrap_or("unlabeled").to_string()
}

/// Spectrum at the first basis direction; equals the constant spectrum when
/// there is one.
fn spectrum_at_e1(alg: &MetricAlgebra) -> Option<AdmissibleMultiset> {
    if alg.is_abelian() {
        return Some(AdmissibleMultiset::zeros(alg.q()));
    }
    skew_spectrum(&alg.j_basis()[0], SPECTRUM_TOL).ok()
}

/// Orthogonal direct sum `(n₁ ⊕ n₂, Q)`. The result has constant spectrum
/// iff one summand is abelian, in which case the spectrum is the other
/// summand's with zeros appended.
pub fn direct_sum(a1: &MetricAlgebra, a2: &MetricAlgebra) -> (MetricAlgebra, ConstructionRecord) {
    let q = a1.q() + a2.q();
    let mut j_basis: Vec<SkewMatrix> = Vec::with_capacity(a1.p() + a2.p());
    for j in a1.j_basis() {
        j_basis.push(block_diag(&[j, &SkewMatrix::zero(a2.q())]));
    }
    for j in a2.j_basis() {
        j_basis.push(block_diag(&[&SkewMatrix::zero(a1.q()), j]));
    }
    let label = format!("direct_sum({}, {})", label_of(a1), label_of(a2));
    let alg = if j_basis.is_empty() {
        MetricAlgebra::abelian(q).with_label(label.clone())
    } else {
        MetricAlgebra::new(j_basis)
            .expect("block matrices share dimension")
            .with_label(label)
    };

    let predicted_spectrum = match (a1.is_abelian(), a2.is_abelian()) {
        (true, true) => Some(AdmissibleMultiset::zeros(q)),
        (true, false) => spectrum_at_e1(a2).map(|s| s.sum(&AdmissibleMultiset::zeros(a1.q()))),
        (false, true) => spectrum_at_e1(a1).map(|s| s.sum(&AdmissibleMultiset::zeros(a2.q()))),
        (false, false) => None,
    };
    let record = ConstructionRecord {
        kind: ConstructionKind::DirectSum,
        inputs: vec![label_of(a1), label_of(a2)],
        predicted_spectrum,
    };
    (alg, record)
}

/// Tensor product `J^S(Z) = J_Z ⊗ S` with a symmetric nonsingular `S` on
/// ℝ^m, `m > 1`. The spectrum becomes all products `λμ` over the two
/// spectra, multiplicities summed over coincident products.
pub fn tensor_product(
    alg: &MetricAlgebra,
    s_mat: &SymMatrix,
) -> Result<(MetricAlgebra, ConstructionRecord)> {
    let m = s_mat.m();
    if m <= 1 {
        return Err(HlieError::InvalidParameter(
            "tensor product needs m > 1".into(),
        ));
    }
    let eigs = s_mat.eigenvalues();
    let max_abs = eigs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if s_mat.min_abs_eigenvalue() <= linalg::DEFAULT_TOL * max_abs.max(1.0) {
        return Err(HlieError::InvalidParameter(
            "tensor product needs a nonsingular symmetric map".into(),
        ));
    }
    let label = format!("tensor({}, sym{}x{})", label_of(alg), m, m);
    let new_alg = if alg.is_abelian() {
        MetricAlgebra::abelian(alg.q() * m).with_label(label.clone())
    } else {
        let j_basis: Vec<SkewMatrix> = alg
            .j_basis()
            .iter()
            .map(|j| j.kronecker_sym(s_mat))
            .collect();
        MetricAlgebra::new(j_basis)?.with_label(label)
    };

    let predicted_spectrum = spectrum_at_e1(alg).and_then(|s| {
        let mut pairs: Vec<(Scalar, usize)> = Vec::new();
        for e in s.entries() {
            if e.b.is_zero() {
                pairs.push((Scalar::from_int(0), e.mult * m));
            } else {
                for mu in &eigs {
                    pairs.push((Scalar::Approx(e.b.to_f64() * mu.abs()), e.mult));
                }
            }
        }
        AdmissibleMultiset::new(pairs).ok()
    });

    let record = ConstructionRecord {
        kind: ConstructionKind::TensorProduct,
        inputs: vec![label_of(alg)],
        predicted_spectrum,
    };
    Ok((new_alg, record))
}

/// Metric central sum of two algebras along their centers via the isometry
/// `φ` given by an orthogonal `p×p` matrix in the fixed center bases:
/// `J(Zᵢ) = J₁(Zᵢ) ⊕ J₂(φZᵢ)`. Both inputs must have trivial abelian
/// factor and independent J-bases, so their centers coincide with their
/// commutators.
pub fn central_sum(
    a1: &MetricAlgebra,
    a2: &MetricAlgebra,
    phi: &[Vec<Scalar>],
) -> Result<(MetricAlgebra, ConstructionRecord)> {
    let p = a1.p();
    if p == 0 || a2.p() != p {
        return Err(HlieError::DimensionMismatch {
            expected: p,
            got: a2.p(),
            context: "central sum needs equal nonzero center dimensions",
        });
    }
    if phi.len() != p || phi.iter().any(|r| r.len() != p) {
        return Err(HlieError::DimensionMismatch {
            expected: p,
            got: phi.len(),
            context: "central sum isometry must be p x p",
        });
    }
    let b = DMatrix::from_fn(p, p, |i, j| phi[i][j].to_f64());
    let defect = (b.transpose() * &b - DMatrix::identity(p, p)).norm();
    if defect > 1e-10 {
        return Err(HlieError::InvalidParameter(format!(
            "central sum isometry is not orthogonal (‖BᵀB − I‖ = {defect:e})"
        )));
    }
    for (name, alg) in [("first", a1), ("second", a2)] {
        if !alg.check_commutator_exact(linalg::DEFAULT_TOL) {
            return Err(HlieError::PreconditionFailed(format!(
                "{name} central-sum input has a dependent j_basis"
            )));
        }
        if alg.abelian_factor_dim(linalg::DEFAULT_TOL) > 0 {
            return Err(HlieError::PreconditionFailed(format!(
                "{name} central-sum input has a nontrivial abelian factor; \
                 its center exceeds its commutator"
            )));
        }
    }

    let j_basis: Vec<SkewMatrix> = (0..p)
        .map(|i| {
            let phi_col: Vec<Scalar> = (0..p).map(|l| phi[l][i].clone()).collect();
            let j2 = linear_combination(a2.j_basis(), &phi_col)?;
            Ok(block_diag(&[&a1.j_basis()[i], &j2]))
        })
        .collect::<Result<_>>()?;
    let label = format!("central_sum({}, {})", label_of(a1), label_of(a2));
    let alg = MetricAlgebra::new(j_basis)?.with_label(label);

    let predicted_spectrum = match (spectrum_at_e1(a1), spectrum_at_e1(a2)) {
        (Some(s1), Some(s2)) => Some(s1.sum(&s2)),
        _ => None,
    };
    let record = ConstructionRecord {
        kind: ConstructionKind::CentralSum,
        inputs: vec![label_of(a1), label_of(a2)],
        predicted_spectrum,
    };
    Ok((alg, record))
}

/// Quotient along a subspace `K` of the center: the image algebra of the
/// Riemannian submersion with kernel `K`, realized by restricting `J` to an
/// orthonormal basis of `K^⊥`. Constant spectra are preserved.
pub fn submersion_quotient(
    alg: &MetricAlgebra,
    kernel: &Subspace,
) -> Result<(MetricAlgebra, ConstructionRecord)> {
    let p = alg.p();
    if kernel.ambient_dim() != p {
        return Err(HlieError::DimensionMismatch {
            expected: p,
            got: kernel.ambient_dim(),
            context: "submersion kernel lives in the center",
        });
    }
    if kernel.dim() >= p {
        return Err(HlieError::InvalidParameter(
            "submersion kernel must be a proper subspace of the center".into(),
        ));
    }
    let predicted_spectrum = spectrum_at_e1(alg);
    let record = ConstructionRecord {
        kind: ConstructionKind::Submersion,
        inputs: vec![label_of(alg)],
        predicted_spectrum,
    };
    if kernel.dim() == 0 {
        return Ok((alg.clone(), record));
    }
    let complement = kernel.complement();
    let j_basis: Vec<SkewMatrix> = (0..complement.dim())
        .map(|i| alg.j_of(complement.column(i).as_slice()))
        .collect::<Result<_>>()?;
    let label = format!("submersion({}, kernel_dim={})", label_of(alg), kernel.dim());
    Ok((MetricAlgebra::new(j_basis)?.with_label(label), record))
}

/// Block subspace sum: given a `k×p` array of skew matrices `Aᵢʲ` and per-slot
/// spectra `Sᵢ`, validates the hypotheses
///
/// 1. each slot's matrices share one dimension `qᵢ ≥ 2` with `|Sᵢ| = qᵢ`,
/// 2. every `Aᵢʲ` has spectrum `Sᵢ`,
/// 3. each slot's span lies in the cone `ℝC_{Sᵢ}`,
/// 4. each slot's matrices are pairwise Frobenius-orthogonal,
///
/// and returns the standard algebra of the span of `Bⱼ = ⊕ᵢ Aᵢʲ`, which is
/// then guaranteed to lie in `ℝC_S` for `S = S₁ ⊎ … ⊎ S_k`.
pub fn subspace_sum(
    blocks: &[Vec<SkewMatrix>],
    spectra: &[AdmissibleMultiset],
    tol: f64,
) -> Result<(MetricAlgebra, ConstructionRecord)> {
    let k = blocks.len();
    if k == 0 || spectra.len() != k {
        return Err(HlieError::DimensionMismatch {
            expected: k,
            got: spectra.len(),
            context: "one spectrum per block slot",
        });
    }
    let p = blocks[0].len();
    if p == 0 || blocks.iter().any(|row| row.len() != p) {
        return Err(HlieError::InvalidParameter(
            "subspace sum needs a rectangular k x p block array".into(),
        ));
    }

    // (1) dimensions.
    for (i, row) in blocks.iter().enumerate() {
        let qi = row[0].q();
        if qi < 2 {
            return Err(HlieError::SubspaceSumHypothesis {
                number: 1,
                detail: format!("slot {i} has dimension {qi} < 2"),
            });
        }
        if row.iter().any(|m| m.q() != qi) {
            return Err(HlieError::SubspaceSumHypothesis {
                number: 1,
                detail: format!("slot {i} mixes matrix dimensions"),
            });
        }
        if spectra[i].size() != qi {
            return Err(HlieError::SubspaceSumHypothesis {
                number: 1,
                detail: format!(
                    "slot {i}: |S| = {} does not match dimension {qi}",
                    spectra[i].size()
                ),
            });
        }
    }

    // (2) declared spectra.
    for (i, row) in blocks.iter().enumerate() {
        for (j, a) in row.iter().enumerate() {
            let measured = skew_spectrum(a, SPECTRUM_TOL)?;
            if !measured.equals_approx(&spectra[i], tol) {
                return Err(HlieError::SubspaceSumHypothesis {
                    number: 2,
                    detail: format!(
                        "A[{i}][{j}] has spectrum {measured}, declared {}",
                        spectra[i]
                    ),
                });
            }
        }
    }

    // (4) pairwise orthogonality within slots (before (3): the cone check
    // needs independent spanning sets).
    for (i, row) in blocks.iter().enumerate() {
        for j1 in 0..p {
            for j2 in (j1 + 1)..p {
                let inner = frobenius_inner(&row[j1], &row[j2])?;
                let scale = row[j1].frobenius_norm() * row[j2].frobenius_norm();
                if inner.abs() > tol * scale.max(1.0) {
                    return Err(HlieError::SubspaceSumHypothesis {
                        number: 4,
                        detail: format!(
                            "A[{i}][{j1}] and A[{i}][{j2}] are not Frobenius-orthogonal \
                             (inner product {inner:e})"
                        ),
                    });
                }
            }
        }
    }

    // (3) slot spans inside their cones.
    for (i, row) in blocks.iter().enumerate() {
        let report = verify::subspace_in_cone(row, &spectra[i], Mode::Exact, tol)?;
        if !report.contained {
            return Err(HlieError::SubspaceSumHypothesis {
                number: 3,
                detail: format!(
                    "slot {i} span is not contained in the cone over {}",
                    spectra[i]
                ),
            });
        }
    }

    let b: Vec<SkewMatrix> = (0..p)
        .map(|j| {
            let parts: Vec<&SkewMatrix> = blocks.iter().map(|row| &row[j]).collect();
            block_diag(&parts)
        })
        .collect();
    let alg = standard_from_subspace(&b)?.with_label(format!("subspace_sum(k={k}, p={p})"));

    let predicted = spectra
        .iter()
        .skip(1)
        .fold(spectra[0].clone(), |acc, s| acc.sum(s));
    let record = ConstructionRecord {
        kind: ConstructionKind::SubspaceSum,
        inputs: (0..k).map(|i| format!("slot{i}")).collect(),
        predicted_spectrum: Some(predicted),
    };
    Ok((alg, record))
}
