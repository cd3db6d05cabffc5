//! Deciding where an algebra sits in the hierarchy
//! H-type ⇒ H-like ⇒ constant J-spectrum, plus cone membership and
//! J-unitarity checks.
//!
//! Constancy of the spectrum over the unit sphere in `z` is decided through
//! the trace power-sum identities `t_k(Z) = c_k·(ZᵀZ)^k`, `t_k(Z) =
//! trace(J_Z^{2k})`, `c_k = t_k(e₁)`, for `k = 1..⌊q/2⌋`: the even power
//! sums determine the eigenvalue multiset through Newton's identities.
//! Exact mode evaluates both sides on the integer grid `{0,…,2k}^p`, which
//! determines polynomials of per-variable degree `≤ 2k`; with rational
//! inputs the comparison is exact integer arithmetic, with float inputs the
//! same grid runs in `f64`. Sampled mode checks `64·p` pseudorandom unit
//! directions drawn from a fixed seed.

mod grid;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::algebra::{standard_from_subspace, MetricAlgebra};
use crate::error::{HlieError, Result};
use crate::linalg::{
    self, common_kernel_with_gap, frobenius_inner, random_unit_vector, skew_spectrum, SkewMatrix,
    SPECTRUM_TOL,
};
use crate::multiset::AdmissibleMultiset;

pub(crate) use grid::grid_count;
pub(crate) use grid::GRID_LIMIT;

/// Seed for the sampled-mode direction set. Fixed so that sampled verdicts
/// are reproducible run to run.
pub const SAMPLE_SEED: u64 = 0x484C_4945; // "HLIE"

/// Directions per center dimension in sampled mode.
pub const SAMPLES_PER_DIM: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    Exact,
    Sampled,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Sampled => f.write_str("sampled"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    HType,
    HLike,
    ConstantSpectrumWithAbelianFactor,
    NotConstantSpectrum,
}

impl Verdict {
    /// Whether the algebra is H-like; true for `HType` too, since
    /// H-type ⇒ H-like.
    pub fn is_hlike(&self) -> bool {
        matches!(self, Verdict::HType | Verdict::HLike)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::HType => "HType",
            Verdict::HLike => "HLike",
            Verdict::ConstantSpectrumWithAbelianFactor => "ConstantSpectrumWithAbelianFactor",
            Verdict::NotConstantSpectrum => "NotConstantSpectrum",
        };
        f.write_str(s)
    }
}

/// A direction where spectrum constancy fails, with the two differing trace
/// power sums at that (unit) direction.
#[derive(Clone, Debug, Serialize)]
pub struct ConstancyWitness {
    pub direction: Vec<f64>,
    /// The power index `k` whose identity failed.
    pub power_index: usize,
    /// `trace(J_Z^{2k})` at the unit witness direction.
    pub observed: f64,
    /// `c_k = trace(J_{e₁}^{2k})`.
    pub expected: f64,
}

/// Outcome of the constancy check alone.
#[derive(Clone, Debug, Serialize)]
pub struct ConstancyReport {
    pub constant: bool,
    /// Unit-sphere spectrum; present when constant.
    pub spectrum: Option<AdmissibleMultiset>,
    pub witness: Option<ConstancyWitness>,
    /// Mode actually used (Exact falls back to Sampled on oversized grids).
    pub mode: Mode,
    /// Whether the verdict was established in exact integer arithmetic.
    pub exact_arithmetic: bool,
    pub margins: BTreeMap<String, f64>,
}

/// Full classification verdict with evidence.
#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub verdict: Verdict,
    pub spectrum: Option<AdmissibleMultiset>,
    pub j_rank: Option<usize>,
    pub witness: Option<ConstancyWitness>,
    pub mode: Mode,
    pub exact_arithmetic: bool,
    pub margins: BTreeMap<String, f64>,
}

impl ClassReport {
    pub fn is_constant(&self) -> bool {
        self.verdict != Verdict::NotConstantSpectrum
    }
}

/// `trace(J^{2k})` for `k = 1..k_max`, by successive products of `J²`.
pub(crate) fn trace_power_sums(j: &DMatrix<f64>, k_max: usize) -> Vec<f64> {
    let m = j * j;
    let mut out = Vec::with_capacity(k_max);
    let mut p = m.clone();
    for k in 0..k_max {
        out.push(p.trace());
        if k + 1 < k_max {
            p *= &m;
        }
    }
    out
}

/// The sampled-mode direction set: `64·p` unit vectors from the fixed seed.
pub(crate) fn sample_directions(p: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_unit_vector(p, &mut rng))
        .collect()
}

fn witness_from_direction(
    alg: &MetricAlgebra,
    direction: DVector<f64>,
    k: usize,
    c_k: f64,
) -> ConstancyWitness {
    let j = alg
        .j_of(direction.as_slice())
        .expect("witness direction has length p");
    let observed = trace_power_sums(j.mat(), k)[k - 1];
    ConstancyWitness {
        direction: direction.as_slice().to_vec(),
        power_index: k,
        observed,
        expected: c_k,
    }
}

fn insert_margin(margins: &mut BTreeMap<String, f64>, key: &str, value: f64) {
    margins.insert(key.to_string(), value);
}

/// Decides whether `spectrum(J_Z)` is one multiset `S` for all unit `Z`.
///
/// Precondition: the J-basis is linearly independent
/// ([`MetricAlgebra::check_commutator_exact`]); violating it is an error
/// because the algebra is then not of its declared type.
pub fn constant_spectrum(alg: &MetricAlgebra, mode: Mode, tol: f64) -> Result<ConstancyReport> {
    if alg.p() == 0 {
        return Err(HlieError::PreconditionFailed(
            "constant_spectrum needs p >= 1".into(),
        ));
    }
    if !alg.check_commutator_exact(linalg::DEFAULT_TOL) {
        return Err(HlieError::PreconditionFailed(format!(
            "j_basis is linearly dependent (min singular value {:e}); \
             the algebra is not of type (p, q) as declared",
            alg.min_gram_singular_value()
        )));
    }

    let mut margins = BTreeMap::new();
    insert_margin(
        &mut margins,
        "commutator_min_singular",
        alg.min_gram_singular_value(),
    );

    let (p, q) = (alg.p(), alg.q());
    let effective_mode = match mode {
        Mode::Exact if grid_count(p, q) <= GRID_LIMIT => Mode::Exact,
        Mode::Exact => {
            insert_margin(&mut margins, "grid_fallback_sampled", 1.0);
            Mode::Sampled
        }
        Mode::Sampled => Mode::Sampled,
    };

    let (constant, witness, exact_arithmetic) = match effective_mode {
        Mode::Exact => {
            let report = if alg.is_exact() {
                let mats: Vec<_> = alg.j_basis().iter().map(|m| m.exact().unwrap()).collect();
                grid::run_exact(&mats, false)
            } else if let Some(span) = alg.exact_span() {
                let mats: Vec<_> = span.mats.iter().collect();
                grid::run_exact(&mats, true)
            } else {
                let mats: Vec<_> = alg.j_basis().iter().map(|m| m.mat()).collect();
                grid::run_float(&mats, tol)
            };
            insert_margin(&mut margins, "grid_points", report.points as f64);
            insert_margin(
                &mut margins,
                "constancy_max_violation",
                report.max_violation,
            );
            let witness = report.worst_point.as_ref().map(|(coords, k, _)| {
                // Grid coordinates live in the weighted parametrization
                // Yᵢ = Zᵢ/√wᵢ; map back and normalize.
                let mut z =
                    DVector::from_fn(p, |i, _| coords[i] as f64 * report.weights_f64[i].sqrt());
                z /= z.norm();
                let c_k = trace_power_sums(alg.j_basis()[0].mat(), *k)[*k - 1];
                witness_from_direction(alg, z, *k, c_k)
            });
            (report.constant, witness, report.exact_arithmetic)
        }
        Mode::Sampled => {
            let k_max = q / 2;
            let count = SAMPLES_PER_DIM * p;
            insert_margin(&mut margins, "sample_count", count as f64);
            let c = trace_power_sums(alg.j_basis()[0].mat(), k_max);
            let mut worst: Option<(DVector<f64>, usize, f64)> = None;
            let mut max_violation = 0.0f64;
            for z in sample_directions(p, count, SAMPLE_SEED) {
                let j = alg.j_of(z.as_slice())?;
                let t = trace_power_sums(j.mat(), k_max);
                for k in 1..=k_max {
                    let viol = (t[k - 1] - c[k - 1]).abs() / (1.0 + c[k - 1].abs());
                    max_violation = max_violation.max(viol);
                    if (t[k - 1] - c[k - 1]).abs() > tol * (1.0 + c[k - 1].abs())
                        && worst.as_ref().is_none_or(|(_, _, v)| viol > *v)
                    {
                        worst = Some((z.clone(), k, viol));
                    }
                }
            }
            insert_margin(&mut margins, "constancy_max_violation", max_violation);
            let witness = worst.map(|(z, k, _)| {
                let c_k = c[k - 1];
                witness_from_direction(alg, z, k, c_k)
            });
            (witness.is_none(), witness, false)
        }
    };

    let spectrum = if constant {
        Some(skew_spectrum(&alg.j_basis()[0], SPECTRUM_TOL)?)
    } else {
        None
    };

    Ok(ConstancyReport {
        constant,
        spectrum,
        witness,
        mode: effective_mode,
        exact_arithmetic,
        margins,
    })
}

/// Exact test that `-J₁² = c·Id` for some `c > 0`, on whichever exact data
/// the algebra carries. `None` when no exact data is available.
fn exact_htype_scale(alg: &MetricAlgebra) -> Option<Option<f64>> {
    let (mat, weight): (&crate::exactmat::RatMat, BigRational) = if alg.is_exact() {
        (
            alg.j_basis()[0].exact().unwrap(),
            BigRational::from_integer(1.into()),
        )
    } else {
        let span = alg.exact_span()?;
        (&span.mats[0], span.weights[0].clone())
    };
    let sq = mat.matmul(mat);
    let n = sq.n();
    let c = -sq.get(0, 0).clone();
    if !c.is_positive() {
        return Some(None);
    }
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j {
                -c.clone()
            } else {
                BigRational::zero()
            };
            if *sq.get(i, j) != expected {
                return Some(None);
            }
        }
    }
    // J₁ = mat/√weight, so J₁² = -c/weight · Id.
    let scale_sq = c / weight;
    Some(Some(scale_sq.to_f64().unwrap_or(f64::NAN).sqrt()))
}

/// Runs the commutator check, the constancy check, and the abelian factor
/// detection; assembles the verdict in the hierarchy.
///
/// H-type is recognized up to homothety: constant spectrum `{±ci}` with one
/// positive `c` and no zeros. The scale `c` is recorded in the margins
/// rather than gating the verdict.
pub fn classify(alg: &MetricAlgebra, mode: Mode, tol: f64) -> Result<ClassReport> {
    if alg.p() == 0 {
        let mut margins = BTreeMap::new();
        insert_margin(&mut margins, "abelian_factor_dim", alg.q() as f64);
        return Ok(ClassReport {
            verdict: Verdict::ConstantSpectrumWithAbelianFactor,
            spectrum: Some(AdmissibleMultiset::zeros(alg.q())),
            j_rank: Some(0),
            witness: None,
            mode,
            exact_arithmetic: true,
            margins,
        });
    }

    let constancy = constant_spectrum(alg, mode, tol)?;
    let mut margins = constancy.margins.clone();

    if !constancy.constant {
        return Ok(ClassReport {
            verdict: Verdict::NotConstantSpectrum,
            spectrum: None,
            j_rank: None,
            witness: constancy.witness,
            mode: constancy.mode,
            exact_arithmetic: constancy.exact_arithmetic,
            margins,
        });
    }

    let spectrum = constancy.spectrum.expect("constant implies spectrum");
    let j_rank = alg.q() - spectrum.zero_mult();

    let (kernel, gap) = common_kernel_with_gap(alg.j_basis(), linalg::DEFAULT_TOL)?;
    let factor_dim = kernel.dim();
    insert_margin(&mut margins, "abelian_factor_dim", factor_dim as f64);
    insert_margin(&mut margins, "abelian_kernel_gap", gap);

    let verdict = if factor_dim > 0 {
        Verdict::ConstantSpectrumWithAbelianFactor
    } else {
        let htype = match exact_htype_scale(alg) {
            Some(Some(c)) => {
                insert_margin(&mut margins, "htype_scale", c);
                true
            }
            Some(None) => false,
            None => {
                // Float data: single-valued nonzero spectrum up to tolerance.
                let single = spectrum.distinct_positive() == 1 && spectrum.zero_mult() == 0;
                if single {
                    let c = spectrum.max_b();
                    insert_margin(&mut margins, "htype_scale", c);
                    let j1 = alg.j_basis()[0].mat();
                    let defect = (j1 * j1 + DMatrix::identity(alg.q(), alg.q()) * (c * c)).norm()
                        / (1.0 + c * c);
                    insert_margin(&mut margins, "htype_identity_defect", defect);
                    defect <= tol.max(SPECTRUM_TOL)
                } else {
                    false
                }
            }
        };
        if htype {
            Verdict::HType
        } else {
            Verdict::HLike
        }
    };

    Ok(ClassReport {
        verdict,
        spectrum: Some(spectrum),
        j_rank: Some(j_rank),
        witness: None,
        mode: constancy.mode,
        exact_arithmetic: constancy.exact_arithmetic,
        margins,
    })
}

/// Membership of one matrix in the cone `ℝC_S`.
#[derive(Clone, Debug, Serialize)]
pub struct ConeMembership {
    pub in_cone: bool,
    /// `λ = ‖A‖_F / N(S)`: the unique candidate scale.
    pub scale: f64,
}

/// Checks `spectrum(A) = λ·S` for `λ = ‖A‖_F/N(S)`; any member of the cone
/// over `C_S` has exactly this spectrum.
pub fn cone_membership(a: &SkewMatrix, s: &AdmissibleMultiset, tol: f64) -> Result<ConeMembership> {
    if s.size() != a.q() {
        return Err(HlieError::DimensionMismatch {
            expected: a.q(),
            got: s.size(),
            context: "cone membership multiset size",
        });
    }
    if s.is_all_zero() {
        return Err(HlieError::InvalidParameter(
            "cone membership needs a multiset with a nonzero entry".into(),
        ));
    }
    let scale = a.frobenius_norm() / s.norm();
    let measured = skew_spectrum(a, SPECTRUM_TOL)?;
    let target = s.scale(&crate::scalar::Scalar::Approx(scale));
    Ok(ConeMembership {
        in_cone: measured.equals_approx(&target, tol),
        scale,
    })
}

/// Result of the subspace-in-cone test.
#[derive(Clone, Debug, Serialize)]
pub struct ConeReport {
    pub contained: bool,
    /// Positive scale relating the measured unit-sphere spectrum to `S`.
    pub scale: f64,
    pub witness: Option<ConstancyWitness>,
    pub mode: Mode,
    pub exact_arithmetic: bool,
}

/// Whether `span(basis) ⊆ ℝC_S`: the standard algebra of the span must have
/// constant spectrum, and that spectrum must be a single positive multiple
/// of `S`. This realizes both directions of the cone correspondence.
pub fn subspace_in_cone(
    basis: &[SkewMatrix],
    s: &AdmissibleMultiset,
    mode: Mode,
    tol: f64,
) -> Result<ConeReport> {
    let alg = standard_from_subspace(basis)?;
    if s.size() != alg.q() {
        return Err(HlieError::DimensionMismatch {
            expected: alg.q(),
            got: s.size(),
            context: "subspace_in_cone multiset size",
        });
    }
    let constancy = constant_spectrum(&alg, mode, tol)?;
    if !constancy.constant {
        return Ok(ConeReport {
            contained: false,
            scale: 0.0,
            witness: constancy.witness,
            mode: constancy.mode,
            exact_arithmetic: constancy.exact_arithmetic,
        });
    }
    let measured = constancy.spectrum.expect("constant implies spectrum");
    let n_target = s.norm();
    if n_target == 0.0 {
        return Ok(ConeReport {
            contained: measured.is_all_zero(),
            scale: 0.0,
            witness: None,
            mode: constancy.mode,
            exact_arithmetic: constancy.exact_arithmetic,
        });
    }
    let scale = measured.norm() / n_target;
    let contained = measured.equals_approx(&s.scale(&crate::scalar::Scalar::Approx(scale)), tol);
    Ok(ConeReport {
        contained,
        scale,
        witness: None,
        mode: constancy.mode,
        exact_arithmetic: constancy.exact_arithmetic,
    })
}

/// `max_{i,j} |⟨Jᵢ, Jⱼ⟩/N(S)² − δᵢⱼ|`. Zero (to numerical tolerance) for
/// H-like algebras: the J-map is unitary onto its image under the rescaled
/// Frobenius inner product.
pub fn j_unitary_defect(alg: &MetricAlgebra, spectrum: &AdmissibleMultiset) -> Result<f64> {
    let n2 = spectrum.norm_squared().to_f64();
    if n2 == 0.0 {
        return Err(HlieError::InvalidParameter(
            "j_unitary_defect needs a spectrum with a nonzero entry".into(),
        ));
    }
    let p = alg.p();
    let mut defect = 0.0f64;
    for i in 0..p {
        for j in i..p {
            let inner = frobenius_inner(&alg.j_basis()[i], &alg.j_basis()[j])?;
            let delta = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((inner / n2 - delta).abs());
        }
    }
    Ok(defect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{fixture, Fixture, GmVariant};
    use crate::linalg::{block_diag, random_orthogonal};
    use crate::multiset::DEFAULT_TOL as MS_TOL;
    use crate::scalar::Scalar;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn h5(a: i64, b: i64) -> MetricAlgebra {
        fixture(Fixture::H5 {
            a: Scalar::from_int(a),
            b: Scalar::from_int(b),
        })
        .unwrap()
    }

    fn gm12() -> MetricAlgebra {
        fixture(Fixture::GornetMast {
            a: Scalar::from_int(1),
            b: Scalar::from_int(2),
            variant: GmVariant::NegBA,
        })
        .unwrap()
    }

    fn h3_plus_h3() -> MetricAlgebra {
        let rot = fixture(Fixture::H3).unwrap().j_basis()[0].clone();
        let zero2 = SkewMatrix::zero(2);
        let j1 = block_diag(&[&rot, &zero2]);
        let j2 = block_diag(&[&zero2, &rot]);
        MetricAlgebra::new(vec![j1, j2]).unwrap()
    }

    #[test]
    fn h5_constant_spectrum_exact() {
        let rep = constant_spectrum(&h5(1, 2), Mode::Exact, MS_TOL).unwrap();
        assert!(rep.constant);
        assert!(rep.exact_arithmetic);
        let s = rep.spectrum.unwrap();
        assert!(s.equals_approx(
            &AdmissibleMultiset::from_int_pairs(&[(1, 1), (2, 1)]),
            MS_TOL
        ));
    }

    #[test]
    fn gornet_mast_constant_spectrum() {
        for variant in GmVariant::ALL {
            let alg = fixture(Fixture::GornetMast {
                a: Scalar::from_int(1),
                b: Scalar::from_int(2),
                variant,
            })
            .unwrap();
            let rep = constant_spectrum(&alg, Mode::Exact, MS_TOL).unwrap();
            assert!(rep.constant, "variant {variant:?}");
            assert!(rep.spectrum.unwrap().equals_approx(
                &AdmissibleMultiset::from_int_pairs(&[(1, 1), (2, 1)]),
                MS_TOL
            ));
        }
    }

    #[test]
    fn direct_sum_of_heisenbergs_is_not_constant() {
        let alg = h3_plus_h3();
        let rep = constant_spectrum(&alg, Mode::Exact, MS_TOL).unwrap();
        assert!(!rep.constant);
        assert!(rep.exact_arithmetic);
        let w = rep.witness.unwrap();
        // The worst direction is the diagonal (Z₁+Z₂)/√2.
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        assert!((w.direction[0].abs() - inv_sqrt2).abs() < 1e-12);
        assert!((w.direction[1].abs() - inv_sqrt2).abs() < 1e-12);
        assert_eq!(w.power_index, 2);
        // trace(J^4) = 2·(1/2)² + 2·(1/2)² = 1 versus c₂ = 2.
        assert!((w.observed - 1.0).abs() < 1e-12);
        assert!((w.expected - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_and_sampled_agree_on_fixtures() {
        let fixtures: Vec<MetricAlgebra> = vec![
            h5(1, 1),
            h5(1, 2),
            h5(1, 0),
            gm12(),
            fixture(Fixture::F32).unwrap(),
            fixture(Fixture::Star { m: 3 }).unwrap(),
            fixture(Fixture::HType34).unwrap(),
        ];
        for alg in fixtures {
            let e = classify(&alg, Mode::Exact, MS_TOL).unwrap();
            let s = classify(&alg, Mode::Sampled, MS_TOL).unwrap();
            assert_eq!(e.verdict, s.verdict, "{:?}", alg.label());
            assert_eq!(e.j_rank, s.j_rank);
        }
        let ns = h3_plus_h3();
        assert_eq!(
            classify(&ns, Mode::Exact, MS_TOL).unwrap().verdict,
            classify(&ns, Mode::Sampled, MS_TOL).unwrap().verdict
        );
    }

    #[test]
    fn classify_hierarchy_fixtures() {
        assert_eq!(
            classify(&h5(1, 1), Mode::Exact, MS_TOL).unwrap().verdict,
            Verdict::HType
        );

        let f32_rep = classify(&fixture(Fixture::F32).unwrap(), Mode::Exact, MS_TOL).unwrap();
        assert_eq!(f32_rep.verdict, Verdict::HLike);
        assert_eq!(f32_rep.j_rank, Some(2));

        assert_eq!(
            classify(&h5(1, 0), Mode::Exact, MS_TOL).unwrap().verdict,
            Verdict::ConstantSpectrumWithAbelianFactor
        );

        let ns = classify(&h3_plus_h3(), Mode::Exact, MS_TOL).unwrap();
        assert_eq!(ns.verdict, Verdict::NotConstantSpectrum);
        assert!(ns.spectrum.is_none());
        assert!(ns.witness.is_some());

        // Scaled H-type stays H-type (homothety normalization).
        let scaled = h5(1, 1).scaled(&Scalar::from_int(3));
        let rep = classify(&scaled, Mode::Exact, MS_TOL).unwrap();
        assert_eq!(rep.verdict, Verdict::HType);
        assert!((rep.margins["htype_scale"] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn oversized_grids_fall_back_to_sampling() {
        // star(8) has type (8, 9): the exact grid would hold 9^8 points.
        let alg = fixture(Fixture::Star { m: 8 }).unwrap();
        let rep = classify(&alg, Mode::Exact, MS_TOL).unwrap();
        assert_eq!(rep.mode, Mode::Sampled);
        assert!(!rep.exact_arithmetic);
        assert_eq!(rep.margins.get("grid_fallback_sampled"), Some(&1.0));
        assert_eq!(rep.verdict, Verdict::HLike);
    }

    #[test]
    fn huge_rational_entries_use_bigint_arithmetic() {
        // Entries around 10^12 overflow the i128 magnitude bound for the
        // grid products; the verdict must still be exact.
        let big = 1_000_000_000_000i64;
        let alg = fixture(Fixture::H5 {
            a: Scalar::from_ratio(big, 7),
            b: Scalar::from_int(2 * big),
        })
        .unwrap();
        let rep = classify(&alg, Mode::Exact, MS_TOL).unwrap();
        assert!(rep.exact_arithmetic);
        assert_eq!(rep.verdict, Verdict::HLike);
        assert_eq!(rep.j_rank, Some(4));
    }

    #[test]
    fn dependent_basis_is_an_error() {
        let a = fixture(Fixture::F32).unwrap().j_basis()[0].clone();
        let dep = MetricAlgebra::new(vec![a.clone(), a.scaled(&Scalar::from_int(2))]).unwrap();
        assert!(matches!(
            classify(&dep, Mode::Exact, MS_TOL),
            Err(HlieError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn classify_invariant_under_metric_isomorphism() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let alg = fixture(Fixture::F32).unwrap();
        let base = classify(&alg, Mode::Exact, MS_TOL).unwrap();
        for _ in 0..5 {
            let a = random_orthogonal(alg.q(), &mut rng);
            let b = random_orthogonal(alg.p(), &mut rng);
            let moved = alg.transformed(&a, &b);
            let rep = classify(&moved, Mode::Exact, MS_TOL).unwrap();
            assert_eq!(rep.verdict, base.verdict);
            assert_eq!(rep.j_rank, base.j_rank);
            assert!(rep
                .spectrum
                .unwrap()
                .equals_approx(base.spectrum.as_ref().unwrap(), MS_TOL));
        }
    }

    #[test]
    fn cone_membership_examples() {
        let rot3 = SkewMatrix::from_scalar_rows(&[
            vec![Scalar::from_int(0), Scalar::from_int(-3)],
            vec![Scalar::from_int(3), Scalar::from_int(0)],
        ])
        .unwrap();
        let s = AdmissibleMultiset::from_int_pairs(&[(1, 1)]);
        let m = cone_membership(&rot3, &s, MS_TOL).unwrap();
        assert!(m.in_cone);
        assert!((m.scale - 3.0).abs() < 1e-12);

        let zero = SkewMatrix::zero(2);
        let m = cone_membership(&zero, &s, MS_TOL).unwrap();
        assert!(m.in_cone);
        assert_eq!(m.scale, 0.0);

        // diag-blocks(rot(1), rot(2)) has spectrum {±i, ±2i}, not a multiple
        // of {±i ×2}.
        let blocks = block_diag(&[
            &fixture(Fixture::H3).unwrap().j_basis()[0],
            &rot3.scaled(&Scalar::from_ratio(2, 3)),
        ]);
        let s2 = AdmissibleMultiset::from_int_pairs(&[(1, 2)]);
        assert!(!cone_membership(&blocks, &s2, MS_TOL).unwrap().in_cone);

        // Size mismatch and all-zero multisets are rejected.
        assert!(cone_membership(&rot3, &s2, MS_TOL).is_err());
        assert!(cone_membership(&rot3, &AdmissibleMultiset::zeros(2), MS_TOL).is_err());
    }

    #[test]
    fn subspace_in_cone_examples() {
        let f32_alg = fixture(Fixture::F32).unwrap();
        let s = AdmissibleMultiset::from_int_pairs(&[(1, 1), (0, 1)]);
        let rep = subspace_in_cone(f32_alg.j_basis(), &s, Mode::Exact, 1e-9).unwrap();
        assert!(rep.contained);
        assert!(rep.exact_arithmetic);
        assert!((rep.scale - 1.0 / 2f64.sqrt()).abs() < 1e-9);

        // Two rotations in disjoint blocks break constancy on the diagonal.
        let rot = fixture(Fixture::H3).unwrap().j_basis()[0].clone();
        let zero2 = SkewMatrix::zero(2);
        let a = block_diag(&[&rot, &zero2]);
        let b = block_diag(&[&zero2, &rot]);
        let s = AdmissibleMultiset::from_int_pairs(&[(1, 1), (0, 2)]);
        let rep = subspace_in_cone(&[a, b], &s, Mode::Exact, 1e-9).unwrap();
        assert!(!rep.contained);
        assert!(rep.witness.is_some());

        // Any 1-dimensional span is in the cone over its own normalized
        // spectrum.
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let m = crate::linalg::random_skew(5, &mut rng);
        let unit = m.scaled(&Scalar::Approx(1.0 / m.frobenius_norm()));
        let s = skew_spectrum(&unit, SPECTRUM_TOL).unwrap();
        let rep = subspace_in_cone(&[m], &s, Mode::Exact, 1e-7).unwrap();
        assert!(rep.contained);
        assert!((rep.scale - 1.0).abs() < 1e-9);
    }

    #[test]
    fn j_unitary_examples() {
        let gm = gm12();
        let s = AdmissibleMultiset::from_int_pairs(&[(1, 1), (2, 1)]);
        assert!(j_unitary_defect(&gm, &s).unwrap() < 1e-12);

        let h = h5(1, 2);
        assert!(j_unitary_defect(&h, &s).unwrap() < 1e-12);

        // Rescaling one basis matrix by 2 gives defect (1/N²)·4N² − 1 = 3.
        let mut basis = h.j_basis().to_vec();
        basis[0] = basis[0].scaled(&Scalar::from_int(2));
        let bad = MetricAlgebra::new(basis).unwrap();
        assert!((j_unitary_defect(&bad, &s).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn scale_consistency_for_hlike() {
        // spectrum(J_Z) = ‖Z‖·S for H-like algebras.
        let alg = gm12();
        let s = classify(&alg, Mode::Exact, MS_TOL)
            .unwrap()
            .spectrum
            .unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..10 {
            let z: Vec<f64> = (0..alg.p())
                .map(|_| 4.0 * (rng.random::<f64>() - 0.5))
                .collect();
            let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
            let spec = skew_spectrum(&alg.j_of(&z).unwrap(), SPECTRUM_TOL).unwrap();
            assert!(spec.equals_approx(&s.scale(&Scalar::Approx(norm)), 1e-7));
        }
    }

    #[test]
    fn integer_grid_agrees_with_eigensolve_oracle_on_random_spans() {
        // Random small-integer J-bases: the exact integer grid and a dense
        // per-direction eigensolve must reach the same constancy verdict.
        let mut rng = ChaCha20Rng::seed_from_u64(0xA11CE);
        let mut random_int_skew = |q: usize| {
            let mut rows = vec![vec![Scalar::from_int(0); q]; q];
            for i in 0..q {
                for j in (i + 1)..q {
                    let v = (rng.random::<f64>() * 5.0) as i64 - 2;
                    rows[i][j] = Scalar::from_int(-v);
                    rows[j][i] = Scalar::from_int(v);
                }
            }
            SkewMatrix::from_scalar_rows(&rows).unwrap()
        };
        let mut dir_rng = ChaCha20Rng::seed_from_u64(0xB0B);
        for q in [3usize, 4, 5] {
            for _ in 0..5 {
                let a = random_int_skew(q);
                let b = random_int_skew(q);
                let Ok(alg) = MetricAlgebra::new(vec![a, b]) else {
                    continue;
                };
                if !alg.check_commutator_exact(linalg::DEFAULT_TOL) {
                    continue;
                }
                let grid = constant_spectrum(&alg, Mode::Exact, MS_TOL).unwrap();
                assert!(grid.exact_arithmetic);
                let reference = skew_spectrum(&alg.j_basis()[0], SPECTRUM_TOL).unwrap();
                let oracle = (0..200).all(|_| {
                    let z = crate::linalg::random_unit_vector(2, &mut dir_rng);
                    let spec =
                        skew_spectrum(&alg.j_of(z.as_slice()).unwrap(), SPECTRUM_TOL).unwrap();
                    spec.equals_approx(&reference, MS_TOL)
                });
                assert_eq!(grid.constant, oracle);
            }
        }
    }
}
