//! Sparse multivariate polynomials over exact rationals or complex doubles,
//! plus binary forms in `(p, u)`.

mod binform;
mod io;
pub mod univariate;

pub use binform::BinaryForm;
pub use io::{parse_rational, parse_text, poly_from_json, poly_to_json, rational_from_json, rational_to_json, PolyJson};
pub use univariate::binary_form_distinct_roots;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::C64;

/// Coefficient field of a [`SparsePoly`].
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + 'static
{
    fn from_rational(q: &BigRational) -> Self;
    fn from_i64(v: i64) -> Self;
    /// A size used for normalization (absolute value or modulus).
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> C64;
}

impl Coeff for BigRational {
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn magnitude(&self) -> f64 {
        rational_to_f64(&self.abs())
    }
    fn to_c64(&self) -> C64 {
        C64::new(rational_to_f64(self), 0.0)
    }
}

impl Coeff for C64 {
    fn from_rational(q: &BigRational) -> Self {
        C64::new(rational_to_f64(q), 0.0)
    }
    fn from_i64(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> C64 {
        *self
    }
}

/// Correctly rounded enough conversion for huge numerators/denominators.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift > 0 {
        q / BigRational::from_integer(BigInt::one() << shift as usize)
    } else {
        q * BigRational::from_integer(BigInt::one() << (-shift) as usize)
    };
    let base = scaled.to_integer().to_f64().unwrap_or(0.0);
    base * 2f64.powi(shift as i32)
}

pub type Exponent = Vec<u32>;

/// Multivariate polynomial stored as a map from exponent vectors to
/// nonzero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePoly<S> {
    nvars: usize,
    terms: BTreeMap<Exponent, S>,
}

pub type QPoly = SparsePoly<BigRational>;
pub type CPoly = SparsePoly<C64>;

impl<S: Coeff> SparsePoly<S> {
    pub fn zero(nvars: usize) -> Self {
        SparsePoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, S::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, S::one())
    }

    pub fn monomial(nvars: usize, exp: Exponent, c: S) -> Self {
        assert_eq!(exp.len(), nvars, "exponent length must equal nvars");
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exp, c);
        }
        p
    }

    /// Linear form `Σ c_i x_i + c0`.
    pub fn linear(coeffs: &[S], c0: S) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, c0);
        for (i, c) in coeffs.iter().enumerate() {
            p.add_term(unit_exp(n, i), c.clone());
        }
        p
    }

    /// Build from explicit terms; repeated exponents are summed.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponent, S)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: e.len() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: &[u32]) -> S {
        self.terms.get(exp).cloned().unwrap_or_else(S::zero)
    }

    pub fn add_term(&mut self, exp: Exponent, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&exp);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Degree in the given subset of variables.
    pub fn degree_in(&self, vars: &[usize]) -> u32 {
        self.terms
            .keys()
            .map(|e| vars.iter().map(|&v| e[v]).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            p.add_term(e.clone(), v.clone() * c.clone());
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluate at a point. Exact for rational data.
    pub fn eval(&self, point: &[S]) -> Result<S> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: point.len() });
        }
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = t * point[i].clone();
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Formal partial derivative with respect to variable `i`.
    pub fn diff(&self, i: usize) -> Self {
        assert!(i < self.nvars, "variable index out of range");
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i] -= 1;
            p.add_term(f, c.clone() * S::from_i64(e[i] as i64));
        }
        p
    }

    /// Substitute a polynomial for every variable. All substitutes must
    /// share the same number of variables.
    pub fn compose(&self, subs: &[SparsePoly<S>]) -> Result<Self> {
        if subs.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: subs.len() });
        }
        let m = subs.first().map(|s| s.nvars).unwrap_or(0);
        let mut powers: Vec<Vec<SparsePoly<S>>> = subs.iter().map(|s| vec![Self::one(s.nvars), s.clone()]).collect();
        let mut out = Self::zero(m);
        for (e, c) in &self.terms {
            let mut t = Self::constant(m, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap() * &subs[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][k as usize];
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Reindex into a polynomial ring with `nvars` variables, sending
    /// variable `i` to `map[i]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in &self.terms {
            let mut f = vec![0; nvars];
            for (i, &k) in e.iter().enumerate() {
                f[map[i]] += k;
            }
            p.add_term(f, c.clone());
        }
        p
    }

    pub fn map_coeffs<T: Coeff>(&self, f: impl Fn(&S) -> T) -> SparsePoly<T> {
        let mut p = SparsePoly::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), f(c));
        }
        p
    }

    /// Largest coefficient magnitude.
    pub fn max_magnitude(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }
}

impl QPoly {
    pub fn to_complex(&self) -> CPoly {
        self.map_coeffs(C64::from_rational)
    }

    /// Divide by the coefficient of largest absolute value.
    pub fn normalized(&self) -> QPoly {
        let big = self.terms.values().max_by(|a, b| a.abs().cmp(&b.abs()));
        match big {
            Some(b) => {
                let s = BigRational::one() / b.abs();
                self.scale(&s)
            }
            None => self.clone(),
        }
    }
}

/// Exponent vector of the variable `x_i`.
pub fn unit_exp(n: usize, i: usize) -> Exponent {
    let mut e = vec![0; n];
    e[i] = 1;
    e
}

fn check_same<S>(a: &SparsePoly<S>, b: &SparsePoly<S>) {
    assert_eq!(a.nvars, b.nvars, "polynomials live in different rings");
}

impl<S: Coeff> Add for &SparsePoly<S> {
    type Output = SparsePoly<S>;
    fn add(self, rhs: Self) -> SparsePoly<S> {
        check_same(self, rhs);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }
}

impl<S: Coeff> Sub for &SparsePoly<S> {
    type Output = SparsePoly<S>;
    fn sub(self, rhs: Self) -> SparsePoly<S> {
        check_same(self, rhs);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), -c.clone());
        }
        p
    }
}

impl<S: Coeff> Neg for &SparsePoly<S> {
    type Output = SparsePoly<S>;
    fn neg(self) -> SparsePoly<S> {
        self.scale(&(-S::one()))
    }
}

impl<S: Coeff> Mul for &SparsePoly<S> {
    type Output = SparsePoly<S>;
    fn mul(self, rhs: Self) -> SparsePoly<S> {
        check_same(self, rhs);
        let mut p = SparsePoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                p.add_term(e, ca.clone() * cb.clone());
            }
        }
        p
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl<S: Coeff> $tr for SparsePoly<S> {
            type Output = SparsePoly<S>;
            fn $m(self, rhs: Self) -> SparsePoly<S> {
                (&self).$m(&rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

/// Determinant of a square matrix of polynomials by cofactor expansion.
pub fn det<S: Coeff>(m: &[Vec<SparsePoly<S>>]) -> SparsePoly<S> {
    let n = m.len();
    let nv = m[0][0].nvars();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = SparsePoly::zero(nv);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<SparsePoly<S>>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let t = &m[0][j] * &det(&minor);
        acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn hw() -> QPoly {
        parse_text("4*p0*p2 - p1^2", Some(3)).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(hw().eval(&[q(1), q(2), q(1)]).unwrap(), q(0));
        let s = parse_text("p0 + p1 + p2", Some(3)).unwrap();
        assert_eq!(s.eval(&[q(1), q(1), q(1)]).unwrap(), q(3));
        let m: Vec<Vec<QPoly>> = (0..3)
            .map(|i| (0..3).map(|j| QPoly::var(9, 3 * i + j)).collect())
            .collect();
        let d = det(&m);
        let id: Vec<BigRational> = (0..9).map(|k| if k % 4 == 0 { q(1) } else { q(0) }).collect();
        assert_eq!(d.eval(&id).unwrap(), q(1));
        assert!(matches!(hw().eval(&[q(1)]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn diff_examples() {
        assert_eq!(hw().diff(1), parse_text("-2*p1", Some(3)).unwrap());
        let m = parse_text("p0*p1*p2", Some(3)).unwrap();
        assert_eq!(m.diff(0), parse_text("p1*p2", Some(3)).unwrap());
        assert!(QPoly::constant(3, q(5)).diff(0).is_zero());
    }

    #[test]
    fn compose_and_embed() {
        let f = parse_text("p0^2 - p1", Some(2)).unwrap();
        let s = [parse_text("p0 + p1", Some(2)).unwrap(), parse_text("2*p0*p1", Some(2)).unwrap()];
        assert_eq!(f.compose(&s).unwrap(), parse_text("p0^2 + p1^2", Some(2)).unwrap());
        let g = f.embed(3, &[2, 0]);
        assert_eq!(g, parse_text("p2^2 - p0", Some(3)).unwrap());
    }

    #[test]
    fn homogeneity_and_degree() {
        assert!(hw().is_homogeneous());
        assert!(!parse_text("p0^2 + p1", Some(2)).unwrap().is_homogeneous());
        assert_eq!(hw().degree(), Some(2));
        assert_eq!(QPoly::zero(2).degree(), None);
    }

    #[test]
    fn big_rational_to_f64() {
        let big = BigRational::new(BigInt::from(10).pow(400) * 3, BigInt::from(10).pow(399));
        assert!((rational_to_f64(&big) - 30.0).abs() < 1e-12);
    }
}
