//! The `hlie-v1` algebra file format and the subspace-sum input format.
//!
//! An algebra file is a JSON document
//!
//! ```json
//! {
//!   "format": "hlie-v1",
//!   "p": 1,
//!   "q": 2,
//!   "J": [[["0", "-1"], ["1", "0"]]],
//!   "label": "h3"
//! }
//! ```
//!
//! Number strings are exact rationals (`"3"`, `"-5/7"`) or decimals
//! (`"1.5"`, `"2e-3"`). Rational entries are preserved end-to-end so the
//! exact verification mode stays available after a round trip; decimals
//! re-read bit-identically. Rational blocks must be skew-symmetric exactly;
//! decimal blocks within 1e-12, and are symmetrized on load with the
//! adjustment recorded.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use hlie_core::multiset::AdmissibleMultiset;
use hlie_core::scalar::Scalar;
use hlie_core::{MetricAlgebra, SkewMatrix};

pub const FORMAT: &str = "hlie-v1";
pub const SUBSPACE_SUM_FORMAT: &str = "hlie-subspace-sum-v1";

#[derive(Serialize, Deserialize)]
struct AlgebraDoc {
    format: String,
    p: usize,
    q: usize,
    #[serde(rename = "J")]
    j: Vec<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    abelian: Option<bool>,
}

/// Diagnostics from loading an algebra file.
pub struct LoadReport {
    pub algebra: MetricAlgebra,
    /// Largest skew-symmetry adjustment applied while symmetrizing decimal
    /// blocks; zero for fully rational input.
    pub skew_adjustment: f64,
}

pub fn read_algebra(path: &Path) -> Result<LoadReport> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let doc: AlgebraDoc = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a valid algebra file", path.display()))?;
    if doc.format != FORMAT {
        bail!(
            "{}: unsupported format {:?} (expected {FORMAT:?})",
            path.display(),
            doc.format
        );
    }
    if doc.q == 0 {
        bail!("{}: q must be at least 1", path.display());
    }
    if doc.p == 0 && doc.abelian != Some(true) {
        bail!(
            "{}: p = 0 requires an explicit \"abelian\": true flag",
            path.display()
        );
    }
    if doc.j.len() != doc.p {
        bail!(
            "{}: J has {} blocks but p = {}",
            path.display(),
            doc.j.len(),
            doc.p
        );
    }

    let mut skew_adjustment = 0.0f64;
    let mut j_basis = Vec::with_capacity(doc.p);
    for (bi, block) in doc.j.iter().enumerate() {
        if block.len() != doc.q || block.iter().any(|row| row.len() != doc.q) {
            bail!(
                "{}: J[{bi}] is not a {q}x{q} matrix",
                path.display(),
                q = doc.q
            );
        }
        let mut rows: Vec<Vec<Scalar>> = Vec::with_capacity(doc.q);
        for (ri, row) in block.iter().enumerate() {
            let mut parsed = Vec::with_capacity(doc.q);
            for (ci, entry) in row.iter().enumerate() {
                let s = Scalar::parse(entry).with_context(|| {
                    format!("{}: J[{bi}][{ri}][{ci}] = {entry:?}", path.display())
                })?;
                parsed.push(s);
            }
            rows.push(parsed);
        }
        // Record the symmetrization adjustment for decimal blocks; the
        // access pattern is by symmetric index pairs.
        #[allow(clippy::needless_range_loop)]
        for i in 0..doc.q {
            for jx in i..doc.q {
                let defect = (rows[i][jx].to_f64() + rows[jx][i].to_f64()).abs() / 2.0;
                skew_adjustment = skew_adjustment.max(defect);
            }
        }
        let m = SkewMatrix::from_scalar_rows(&rows)
            .with_context(|| format!("{}: J[{bi}]", path.display()))?;
        j_basis.push(m);
    }

    let algebra = if doc.p == 0 {
        MetricAlgebra::abelian(doc.q)
    } else {
        let alg = MetricAlgebra::new(j_basis)?;
        if alg.q() != doc.q {
            bail!(
                "{}: declared q = {} but blocks are {}x{}",
                path.display(),
                doc.q,
                alg.q(),
                alg.q()
            );
        }
        alg
    };
    let algebra = match doc.label {
        Some(label) => algebra.with_label(label),
        None => algebra,
    };
    Ok(LoadReport {
        algebra,
        skew_adjustment,
    })
}

pub fn write_algebra(path: &Path, alg: &MetricAlgebra) -> Result<()> {
    let q = alg.q();
    let j = alg
        .j_basis()
        .iter()
        .map(|m| {
            (0..q)
                .map(|i| (0..q).map(|jx| m.entry_scalar(i, jx).format()).collect())
                .collect()
        })
        .collect();
    let doc = AlgebraDoc {
        format: FORMAT.to_string(),
        p: alg.p(),
        q,
        j,
        label: alg.label().map(str::to_string),
        abelian: alg.is_abelian().then_some(true),
    };
    let text = serde_json::to_string_pretty(&doc)?;
    fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[derive(Deserialize)]
struct SubspaceSumDoc {
    format: String,
    /// `blocks[i][j]` is the slot-i component of the j-th basis vector.
    blocks: Vec<Vec<Vec<Vec<String>>>>,
    spectra: Vec<AdmissibleMultiset>,
}

pub fn read_subspace_sum(path: &Path) -> Result<(Vec<Vec<SkewMatrix>>, Vec<AdmissibleMultiset>)> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let doc: SubspaceSumDoc = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a valid subspace-sum file", path.display()))?;
    if doc.format != SUBSPACE_SUM_FORMAT {
        bail!(
            "{}: unsupported format {:?} (expected {SUBSPACE_SUM_FORMAT:?})",
            path.display(),
            doc.format
        );
    }
    let mut blocks = Vec::with_capacity(doc.blocks.len());
    for (i, row) in doc.blocks.iter().enumerate() {
        let mut slot = Vec::with_capacity(row.len());
        for (j, mat) in row.iter().enumerate() {
            let rows: Vec<Vec<Scalar>> = mat
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|e| Scalar::parse(e))
                        .collect::<hlie_core::Result<_>>()
                })
                .collect::<hlie_core::Result<_>>()
                .with_context(|| format!("{}: blocks[{i}][{j}]", path.display()))?;
            slot.push(
                SkewMatrix::from_scalar_rows(&rows)
                    .with_context(|| format!("{}: blocks[{i}][{j}]", path.display()))?,
            );
        }
        blocks.push(slot);
    }
    Ok((blocks, doc.spectra))
}

/// Parses a matrix literal of the form `"1,0;0,2"` (rows separated by `;`).
pub fn parse_matrix_literal(s: &str) -> Result<Vec<Vec<Scalar>>> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|e| Scalar::parse(e).map_err(anyhow::Error::from))
                .collect()
        })
        .collect()
}

/// Parses a spectrum literal `"b:mult,..."`, e.g. `"1:1,2:1"` or `"1/2:3,0:2"`.
pub fn parse_spectrum_literal(s: &str) -> Result<AdmissibleMultiset> {
    let mut pairs = Vec::new();
    for item in s.split(',') {
        let (b, mult) = item
            .split_once(':')
            .with_context(|| format!("spectrum entry {item:?} is not b:mult"))?;
        let b = Scalar::parse(b.trim())?;
        let mult: usize = mult
            .trim()
            .parse()
            .with_context(|| format!("multiplicity in {item:?}"))?;
        pairs.push((b, mult));
    }
    Ok(AdmissibleMultiset::new(pairs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hlie_core::algebra::{fixture, Fixture};

    #[test]
    fn round_trip_preserves_exact_and_float_entries() {
        let dir = tempfile::tempdir().unwrap();

        let exact = fixture(Fixture::H5 {
            a: Scalar::from_ratio(2, 3),
            b: Scalar::from_int(-7),
        })
        .unwrap();
        let path = dir.path().join("exact.json");
        write_algebra(&path, &exact).unwrap();
        let back = read_algebra(&path).unwrap();
        assert_eq!(back.skew_adjustment, 0.0);
        assert!(back.algebra.is_exact());
        for (a, b) in exact.j_basis().iter().zip(back.algebra.j_basis()) {
            assert_eq!(a.mat(), b.mat());
        }
        // Writing again reproduces the file byte for byte.
        let copy = dir.path().join("copy.json");
        write_algebra(&copy, &back.algebra).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            fs::read_to_string(&copy).unwrap()
        );

        // Floats survive bit-identically and stay floats.
        let rows = vec![
            vec![Scalar::Approx(0.0), Scalar::Approx(-0.1)],
            vec![Scalar::Approx(0.1), Scalar::Approx(0.0)],
        ];
        let m = SkewMatrix::from_scalar_rows(&rows).unwrap();
        let float_alg = MetricAlgebra::new(vec![m]).unwrap();
        let path = dir.path().join("float.json");
        write_algebra(&path, &float_alg).unwrap();
        let back = read_algebra(&path).unwrap().algebra;
        assert!(!back.is_exact());
        assert_eq!(back.j_basis()[0].mat()[(1, 0)].to_bits(), 0.1f64.to_bits());
    }

    #[test]
    fn spectrum_literal_parsing() {
        let s = parse_spectrum_literal("1:1,2:1").unwrap();
        assert_eq!(s.size(), 4);
        let s = parse_spectrum_literal("1/2:3, 0:2").unwrap();
        assert_eq!(s.size(), 8);
        assert!(parse_spectrum_literal("nope").is_err());
        assert!(parse_spectrum_literal("1:x").is_err());
    }
}
