//! Square matrices over the rationals, used wherever exactness survives:
//! fixture construction, block constructions, Gram-Schmidt on spanning sets,
//! and the integer grid evaluation behind exact-mode verification.

use nalgebra::DMatrix;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};

/// Dense square rational matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RatMat {
    n: usize,
    d: Vec<BigRational>,
}

impl RatMat {
    pub fn zero(n: usize) -> Self {
        RatMat {
            n,
            d: vec![BigRational::zero(); n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "ragged rational matrix");
        RatMat {
            n,
            d: rows.into_iter().flatten().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.d[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.d[i * self.n + j] = v;
    }

    pub fn is_skew(&self) -> bool {
        for i in 0..self.n {
            for j in i..self.n {
                if *self.get(i, j) != -self.get(j, i).clone() {
                    return false;
                }
            }
        }
        true
    }

    pub fn scaled(&self, c: &BigRational) -> RatMat {
        RatMat {
            n: self.n,
            d: self.d.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &RatMat, c: &BigRational) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.d.iter_mut().zip(&other.d) {
            *a += b * c;
        }
    }

    pub fn matmul(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = RatMat::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Frobenius inner product `trace(A Bᵀ) = Σ aᵢⱼ bᵢⱼ`.
    pub fn frob_inner(&self, other: &RatMat) -> BigRational {
        assert_eq!(self.n, other.n);
        self.d
            .iter()
            .zip(&other.d)
            .fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn block_diag(blocks: &[&RatMat]) -> RatMat {
        let n: usize = blocks.iter().map(|b| b.n).sum();
        let mut out = RatMat::zero(n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.n {
                for j in 0..b.n {
                    out.set(off + i, off + j, b.get(i, j).clone());
                }
            }
            off += b.n;
        }
        out
    }

    pub fn kronecker(&self, other: &RatMat) -> RatMat {
        let n = self.n * other.n;
        let mut out = RatMat::zero(n);
        for i in 0..self.n {
            for j in 0..self.n {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.n {
                    for l in 0..other.n {
                        out.set(i * other.n + k, j * other.n + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            self.get(i, j).to_f64().unwrap_or(f64::NAN)
        })
    }
}

/// Clears denominators across a family of rational matrices: returns integer
/// matrices `L·Aᵢ` for the least common multiple `L` of every denominator.
pub fn clear_denominators(mats: &[RatMat]) -> Vec<IntMat> {
    let mut lcm = BigInt::one();
    for m in mats {
        for x in &m.d {
            lcm = lcm.lcm(x.denom());
        }
    }
    mats.iter()
        .map(|m| IntMat {
            d: m.d.iter().map(|x| x.numer() * (&lcm / x.denom())).collect(),
        })
        .collect()
}

/// Dense square integer matrix, row-major.
#[derive(Clone, Debug)]
pub struct IntMat {
    pub d: Vec<BigInt>,
}

impl IntMat {
    /// log2 of the largest absolute entry (0 for the zero matrix), used to
    /// decide whether i128 arithmetic is safe on the evaluation grid.
    pub fn log2_max_entry(&self) -> f64 {
        self.d
            .iter()
            .map(|x| x.abs().to_f64().unwrap_or(f64::INFINITY).max(1.0).log2())
            .fold(0.0, f64::max)
    }

    pub fn frob_norm_sq(&self) -> BigInt {
        self.d.iter().fold(BigInt::zero(), |acc, x| acc + x * x)
    }

    pub fn to_i128(&self) -> Option<Vec<i128>> {
        self.d.iter().map(|x| x.to_i128()).collect()
    }
}
