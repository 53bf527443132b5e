//! Binary forms `Σ c_i p^{n-i} u^i` and the involution relating ML
//! bidegrees to sectional ML degrees.

use std::fmt;

use num::{BigInt, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A binary form of degree `n`; `coeffs[i]` multiplies `p^{n-i} u^i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryForm {
    pub coeffs: Vec<i64>,
}

impl BinaryForm {
    pub fn new(coeffs: Vec<i64>) -> Self {
        assert!(!coeffs.is_empty(), "a binary form has at least one coefficient");
        BinaryForm { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Leading nonzero coefficient (highest power of `p`).
    pub fn leading(&self) -> Option<i64> {
        self.coeffs.iter().copied().find(|&c| c != 0)
    }

    /// Trailing nonzero coefficient (highest power of `u`).
    pub fn trailing(&self) -> Option<i64> {
        self.coeffs.iter().rev().copied().find(|&c| c != 0)
    }

    /// `B = (u·S(p,u−p) − p·S(p,0)) / (u−p)`.
    pub fn b_from_s(&self) -> Result<BinaryForm> {
        self.transform(-1)
    }

    /// `S = (u·B(p,u+p) + p·B(p,0)) / (u+p)`.
    pub fn s_from_b(&self) -> Result<BinaryForm> {
        self.transform(1)
    }

    // With p = 1 both maps read (u·f(u+s) + s·f(0)·... ) / (u+s) for s = ±1:
    //   s = -1: (u·f(u−1) − f(0)) / (u−1)
    //   s = +1: (u·f(u+1) + f(0)) / (u+1)
    fn transform(&self, s: i64) -> Result<BinaryForm> {
        let n = self.degree();
        let c: Vec<BigInt> = self.coeffs.iter().map(|&x| BigInt::from(x)).collect();
        let shifted = taylor_shift(&c, s);
        // numerator T(u) = u·f(u+s) + s·f(0)
        let mut t = vec![BigInt::zero(); n + 2];
        for (i, a) in shifted.iter().enumerate() {
            t[i + 1] += a;
        }
        t[0] += &c[0] * s;
        // divide by (u + s): synthetic division with root −s
        let root = BigInt::from(-s);
        let mut q = vec![BigInt::zero(); n + 1];
        let mut carry = BigInt::zero();
        for k in (0..=n + 1).rev() {
            let v = &t[k] + &carry * &root;
            if k == 0 {
                if !v.is_zero() {
                    return Err(Error::InexactDivision(v.to_string()));
                }
            } else {
                q[k - 1] = v.clone();
            }
            carry = v;
        }
        let out: Option<Vec<i64>> = q.iter().map(|x| x.to_i64()).collect();
        out.map(BinaryForm::new).ok_or(Error::Overflow("binary form involution"))
    }
}

/// Coefficients of `f(u + s)` given those of `f(u)` (ascending powers).
fn taylor_shift(c: &[BigInt], s: i64) -> Vec<BigInt> {
    let n = c.len();
    let mut out = vec![BigInt::zero(); n];
    for (i, ci) in c.iter().enumerate() {
        if ci.is_zero() {
            continue;
        }
        // (u + s)^i = Σ_k C(i,k) s^{i-k} u^k
        let mut binom = BigInt::one();
        for k in 0..=i {
            let spow = BigInt::from(s).pow((i - k) as u32);
            out[k] += ci * &binom * spow;
            binom = binom * BigInt::from(i - k) / BigInt::from(k + 1);
        }
    }
    out
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let mut parts = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mono = match (n - i, i) {
                (0, 0) => String::new(),
                (a, 0) => pw("p", a),
                (0, b) => pw("u", b),
                (a, b) => format!("{}*{}", pw("p", a), pw("u", b)),
            };
            parts.push(match (c, mono.is_empty()) {
                (_, true) => c.to_string(),
                (1, false) => mono,
                (-1, false) => format!("-{mono}"),
                _ => format!("{c}*{mono}"),
            });
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
    }
}

fn pw(v: &str, k: usize) -> String {
    if k == 1 {
        v.to_string()
    } else {
        format!("{v}^{k}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bf(c: &[i64]) -> BinaryForm {
        BinaryForm::new(c.to_vec())
    }

    #[test]
    fn grassmannian_and_secant() {
        assert_eq!(bf(&[4, 20, 24, 12, 2, 0]).b_from_s().unwrap(), bf(&[4, 6, 6, 6, 2, 0]));
        assert_eq!(bf(&[12, 30, 18, 3, 0]).b_from_s().unwrap(), bf(&[12, 15, 12, 3, 0]));
    }

    #[test]
    fn symmetric_and_toric_fourfold() {
        assert_eq!(bf(&[6, 12, 15, 12, 3, 0]).s_from_b().unwrap(), bf(&[6, 42, 48, 21, 3, 0]));
        assert_eq!(bf(&[3, 3, 3, 3, 3, 0]).s_from_b().unwrap(), bf(&[3, 12, 18, 12, 3, 0]));
    }

    #[test]
    fn point_is_fixed() {
        for n in 0..6 {
            let mut c = vec![0; n + 1];
            c[0] = 1;
            assert_eq!(bf(&c).b_from_s().unwrap(), bf(&c));
            assert_eq!(bf(&c).s_from_b().unwrap(), bf(&c));
        }
    }

    #[test]
    fn display() {
        assert_eq!(bf(&[6, 3, 1, 0, 0]).to_string(), "6*p^4 + 3*p^3*u + p^2*u^2");
        assert_eq!(bf(&[1, -2]).to_string(), "p - 2*u");
    }
}
