//! Dense univariate polynomials over the rationals; just enough for
//! counting distinct roots of binary forms.

use num::{BigRational, Zero};

/// Ascending coefficients, no trailing zeros (empty = zero polynomial).
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly(pub Vec<BigRational>);

impl UniPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UniPoly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer((i as i64).into()))
                .collect(),
        )
    }

    pub fn rem(&self, d: &UniPoly) -> UniPoly {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.0.clone();
        let dd = d.0.len() - 1;
        let lead = d.0[dd].clone();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1;
            let f = &r[k] / &lead;
            for j in 0..=dd {
                let t = &f * &d.0[j];
                r[k - dd + j] -= t;
            }
            r.pop();
            while r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        UniPoly::new(r)
    }

    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    /// Number of distinct complex roots.
    pub fn distinct_roots(&self) -> usize {
        match self.degree() {
            None => panic!("zero polynomial has infinitely many roots"),
            Some(0) => 0,
            Some(d) => d - self.gcd(&self.derivative()).degree().unwrap_or(0),
        }
    }
}

/// Distinct roots in P^1 of a binary form with coefficients `c[i]` of
/// `x^i y^{deg-i}`. Returns `None` for the zero form.
pub fn binary_form_distinct_roots(c: &[BigRational]) -> Option<usize> {
    let f = UniPoly::new(c.to_vec());
    let deg = f.degree()?;
    let at_infinity = usize::from(deg + 1 < c.len());
    Some(f.distinct_roots() + at_infinity)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(c: &[i64]) -> Vec<BigRational> {
        c.iter().map(|&x| BigRational::from_integer(x.into())).collect()
    }

    #[test]
    fn counts() {
        // (x-1)^2 (x+2)
        assert_eq!(UniPoly::new(u(&[2, -3, 0, 1])).distinct_roots(), 2);
        // y^2 x : roots x=0 and infinity
        assert_eq!(binary_form_distinct_roots(&u(&[0, 1, 0])), Some(2));
        assert_eq!(binary_form_distinct_roots(&u(&[0, 0, 0])), None);
        assert_eq!(binary_form_distinct_roots(&u(&[5, 0, 0])), Some(1));
    }
}
