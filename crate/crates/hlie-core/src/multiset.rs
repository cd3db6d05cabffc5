//! Admissible multisets of purely imaginary eigenvalues.
//!
//! A skew-symmetric matrix has spectrum `{±b₁i, ±b₂i, …} ∪ {0, …}` with the
//! multiplicities of `bi` and `-bi` equal. We store one entry per distinct
//! `b ≥ 0`: a positive `b` with multiplicity `m` encodes the conjugate pair
//! `±bi` with multiplicity `m` each, and `b = 0` encodes the zero eigenvalue
//! with its own multiplicity. Admissibility therefore holds by construction
//! and cannot be violated.

use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{HlieError, Result};
use crate::scalar::Scalar;

/// Default comparison tolerance for spectra: relative to the largest `b`
/// when that exceeds 1, absolute otherwise.
pub const DEFAULT_TOL: f64 = 1e-8;

/// One entry of an admissible multiset: the pair `±bi` (or the eigenvalue 0
/// when `b = 0`) with multiplicity `mult`.
#[derive(Clone, Debug)]
pub struct SpectrumEntry {
    pub b: Scalar,
    pub mult: usize,
}

/// Multiset of eigenvalues of a skew-symmetric matrix, in the paired
/// encoding. Entries are strictly increasing in `b`; all multiplicities are
/// at least 1.
#[derive(Clone, Debug, Default)]
pub struct AdmissibleMultiset {
    entries: Vec<SpectrumEntry>,
}

impl AdmissibleMultiset {
    /// Builds a multiset from `(b, mult)` pairs. Negative `b` is rejected;
    /// coincident values merge by summing multiplicities; zero-multiplicity
    /// pairs are ignored.
    pub fn new(pairs: Vec<(Scalar, usize)>) -> Result<Self> {
        let mut entries: Vec<SpectrumEntry> = Vec::new();
        for (b, mult) in pairs {
            if b.to_f64() < 0.0 {
                return Err(HlieError::InvalidParameter(format!(
                    "negative multiset value {}",
                    b.format()
                )));
            }
            if !b.to_f64().is_finite() {
                return Err(HlieError::InvalidParameter(
                    "non-finite multiset value".into(),
                ));
            }
            if mult == 0 {
                continue;
            }
            entries.push(SpectrumEntry { b, mult });
        }
        entries.sort_by(|x, y| x.b.value_cmp(&y.b));
        let mut merged: Vec<SpectrumEntry> = Vec::new();
        for e in entries {
            match merged.last_mut() {
                Some(last) if last.b.value_eq(&e.b) => last.mult += e.mult,
                _ => merged.push(e),
            }
        }
        Ok(AdmissibleMultiset { entries: merged })
    }

    /// Multiset with exact integer `b` values, for tests and fixtures.
    pub fn from_int_pairs(pairs: &[(i64, usize)]) -> Self {
        Self::new(
            pairs
                .iter()
                .map(|&(b, m)| (Scalar::from_int(b), m))
                .collect(),
        )
        .expect("integer pairs are valid")
    }

    /// The all-zero spectrum of the given size.
    pub fn zeros(n: usize) -> Self {
        Self::new(vec![(Scalar::from_int(0), n)]).unwrap()
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    /// Total number of eigenvalues: each positive entry counts twice (the
    /// pair `±bi`), zeros count once.
    pub fn size(&self) -> usize {
        self.entries
            .iter()
            .map(|e| if e.b.is_zero() { e.mult } else { 2 * e.mult })
            .sum()
    }

    /// Multiplicity of the eigenvalue 0.
    pub fn zero_mult(&self) -> usize {
        self.entries
            .iter()
            .find(|e| e.b.is_zero())
            .map_or(0, |e| e.mult)
    }

    /// Number of distinct positive `b` values.
    pub fn distinct_positive(&self) -> usize {
        self.entries.iter().filter(|e| !e.b.is_zero()).count()
    }

    pub fn is_all_zero(&self) -> bool {
        self.distinct_positive() == 0
    }

    pub fn max_b(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.b.to_f64())
    }

    /// `N(S)² = Σ 2·b²·mult`, exact when every `b` is exact.
    pub fn norm_squared(&self) -> Scalar {
        let mut acc = Scalar::zero();
        for e in &self.entries {
            if e.b.is_zero() {
                continue;
            }
            let sq = e.b.mul(&e.b);
            let term = sq.mul(&Scalar::from_int(2 * e.mult as i64));
            acc = acc.add(&term);
        }
        acc
    }

    /// `N(S) = sqrt(Σ |a|²·m(a))`, the Frobenius norm shared by all skew
    /// matrices with this spectrum.
    pub fn norm(&self) -> f64 {
        self.norm_squared().to_f64().sqrt()
    }

    /// `Σ 2·mult·b^{2k}`: the k-th even power sum, equal to
    /// `(-1)^k · trace(A^{2k})` for any skew `A` with this spectrum.
    pub fn even_power_sum(&self, k: usize) -> f64 {
        self.entries
            .iter()
            .filter(|e| !e.b.is_zero())
            .map(|e| 2.0 * e.mult as f64 * e.b.to_f64().powi(2 * k as i32))
            .sum()
    }

    /// Multiset sum: pointwise sum of multiplicity functions.
    pub fn sum(&self, other: &AdmissibleMultiset) -> AdmissibleMultiset {
        let pairs = self
            .entries
            .iter()
            .chain(other.entries.iter())
            .map(|e| (e.b.clone(), e.mult))
            .collect();
        AdmissibleMultiset::new(pairs).expect("entries of valid multisets remain valid")
    }

    /// Scales every eigenvalue by `k`. The sign of `k` is absorbed by the
    /// `±` pairing; `k = 0` collapses everything onto the zero eigenvalue
    /// (each pair contributing multiplicity 2).
    pub fn scale(&self, k: &Scalar) -> AdmissibleMultiset {
        let factor = k.abs();
        let mut pairs: Vec<(Scalar, usize)> = Vec::new();
        let mut zero_mult = 0usize;
        for e in &self.entries {
            if e.b.is_zero() {
                zero_mult += e.mult;
                continue;
            }
            let nb = e.b.mul(&factor);
            if nb.is_zero() {
                zero_mult += 2 * e.mult;
            } else {
                pairs.push((nb, e.mult));
            }
        }
        if zero_mult > 0 {
            pairs.push((Scalar::from_int(0), zero_mult));
        }
        AdmissibleMultiset::new(pairs).expect("scaling preserves validity")
    }

    /// Clusters near-equal positive values: entries whose consecutive gap is
    /// at most `tol` merge into one entry at the multiplicity-weighted mean.
    /// The zero entry never merges with positive ones (they contribute to
    /// the size differently).
    fn clustered(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        if self.zero_mult() > 0 {
            out.push((0.0, self.zero_mult()));
        }
        let mut cluster_sum = 0.0;
        let mut cluster_mult = 0usize;
        let mut last_b = f64::NEG_INFINITY;
        for e in self.entries.iter().filter(|e| !e.b.is_zero()) {
            let b = e.b.to_f64();
            if cluster_mult > 0 && b - last_b > tol {
                out.push((cluster_sum / cluster_mult as f64, cluster_mult));
                cluster_sum = 0.0;
                cluster_mult = 0;
            }
            cluster_sum += b * e.mult as f64;
            cluster_mult += e.mult;
            last_b = b;
        }
        if cluster_mult > 0 {
            out.push((cluster_sum / cluster_mult as f64, cluster_mult));
        }
        out
    }

    /// Tolerance-aware equality: sizes must match and, after merging
    /// near-equal values on both sides, corresponding values must differ by
    /// at most the effective tolerance with equal multiplicities. The
    /// effective tolerance is `tol·max(1, max b)`.
    pub fn equals_approx(&self, other: &AdmissibleMultiset, tol: f64) -> bool {
        if self.size() != other.size() {
            return false;
        }
        let eff = tol * f64::max(1.0, f64::max(self.max_b(), other.max_b()));
        let a = self.clustered(eff);
        let b = other.clustered(eff);
        a.len() == b.len()
            && a.iter()
                .zip(&b)
                .all(|(x, y)| x.1 == y.1 && (x.0 - y.0).abs() <= eff)
    }
}

impl fmt::Display for AdmissibleMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for e in &self.entries {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            if e.b.is_zero() {
                write!(f, "0")?;
            } else {
                write!(f, "±{}i", e.b.format())?;
            }
            if e.mult > 1 {
                write!(f, "×{}", e.mult)?;
            }
        }
        write!(f, "}}")
    }
}

impl Serialize for AdmissibleMultiset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            b: &'a str,
            mult: usize,
        }
        let mut seq = serializer.serialize_seq(Some(self.entries.len()))?;
        for e in &self.entries {
            let b = e.b.format();
            seq.serialize_element(&Entry {
                b: &b,
                mult: e.mult,
            })?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for AdmissibleMultiset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Entry {
            b: String,
            mult: usize,
        }
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = AdmissibleMultiset;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a sequence of {b, mult} objects")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut pairs = Vec::new();
                while let Some(e) = seq.next_element::<Entry>()? {
                    let b = Scalar::parse(&e.b).map_err(de::Error::custom)?;
                    pairs.push((b, e.mult));
                }
                AdmissibleMultiset::new(pairs).map_err(de::Error::custom)
            }
        }
        deserializer.deserialize_seq(V)
    }
}
