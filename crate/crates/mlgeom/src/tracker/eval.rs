//! Flattened polynomial systems for fast evaluation with Jacobians.

use crate::poly::CPoly;
use crate::C64;

const MAX_FACTORS: usize = 48;

/// Anything that can be evaluated together with its Jacobian.
pub trait Evaluate: Sync {
    fn nvars(&self) -> usize;
    fn neqs(&self) -> usize;
    /// Values into `f`, Jacobian row-major (`neqs × nvars`) into `jac`.
    fn eval_jac(&self, x: &[C64], f: &mut [C64], jac: &mut [C64]);
    fn eval(&self, x: &[C64], f: &mut [C64]);
}

/// A polynomial system laid out as flat arrays of terms and factors.
#[derive(Clone, Debug)]
pub struct Compiled {
    nvars: usize,
    eq_start: Vec<usize>,
    coef: Vec<C64>,
    fac_start: Vec<usize>,
    fac: Vec<(u32, u32)>,
}

impl Compiled {
    /// Compile, rescaling every equation so its largest coefficient has
    /// modulus one.
    pub fn new(eqs: &[CPoly], nvars: usize) -> Self {
        let mut c = Compiled { nvars, eq_start: vec![0], coef: Vec::new(), fac_start: vec![0], fac: Vec::new() };
        for e in eqs {
            assert_eq!(e.nvars(), nvars, "equation ring mismatch");
            let s = e.max_magnitude();
            let s = if s > 0.0 { 1.0 / s } else { 1.0 };
            for (exp, co) in e.terms() {
                c.coef.push(*co * s);
                let mut k = 0;
                for (v, &d) in exp.iter().enumerate() {
                    if d > 0 {
                        c.fac.push((v as u32, d));
                        k += 1;
                    }
                }
                assert!(k <= MAX_FACTORS, "monomial with too many variables");
                c.fac_start.push(c.fac.len());
            }
            c.eq_start.push(c.coef.len());
        }
        c
    }

    /// Per equation, the sum of absolute term values at `x`.
    pub fn term_magnitudes(&self, x: &[C64]) -> Vec<f64> {
        (0..self.neqs())
            .map(|e| {
                (self.eq_start[e]..self.eq_start[e + 1])
                    .map(|t| {
                        let mut v = self.coef[t].norm();
                        for &(var, d) in &self.fac[self.fac_start[t]..self.fac_start[t + 1]] {
                            v *= x[var as usize].norm().powi(d as i32);
                        }
                        v
                    })
                    .sum()
            })
            .collect()
    }

    /// Relative residual `max_i |F_i(x)| / max(1, Σ_t |term_t|)`.
    pub fn relative_residual(&self, x: &[C64]) -> f64 {
        let mut f = vec![C64::new(0.0, 0.0); self.neqs()];
        self.eval(x, &mut f);
        let mags = self.term_magnitudes(x);
        f.iter().zip(mags).map(|(v, m)| v.norm() / m.max(1.0)).fold(0.0, f64::max)
    }
}

fn powu(z: C64, k: u32) -> C64 {
    match k {
        0 => C64::new(1.0, 0.0),
        1 => z,
        2 => z * z,
        3 => z * z * z,
        _ => z.powu(k),
    }
}

impl Evaluate for Compiled {
    fn nvars(&self) -> usize {
        self.nvars
    }

    fn neqs(&self) -> usize {
        self.eq_start.len() - 1
    }

    fn eval(&self, x: &[C64], f: &mut [C64]) {
        for e in 0..self.neqs() {
            let mut acc = C64::new(0.0, 0.0);
            for t in self.eq_start[e]..self.eq_start[e + 1] {
                let mut v = self.coef[t];
                for &(var, d) in &self.fac[self.fac_start[t]..self.fac_start[t + 1]] {
                    v *= powu(x[var as usize], d);
                }
                acc += v;
            }
            f[e] = acc;
        }
    }

    fn eval_jac(&self, x: &[C64], f: &mut [C64], jac: &mut [C64]) {
        let n = self.nvars;
        let one = C64::new(1.0, 0.0);
        jac.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        let mut pw = [one; MAX_FACTORS];
        let mut dpw = [one; MAX_FACTORS];
        let mut pre = [one; MAX_FACTORS + 1];
        for e in 0..self.neqs() {
            let mut acc = C64::new(0.0, 0.0);
            let row = &mut jac[e * n..(e + 1) * n];
            for t in self.eq_start[e]..self.eq_start[e + 1] {
                let fs = &self.fac[self.fac_start[t]..self.fac_start[t + 1]];
                let k = fs.len();
                for (i, &(var, d)) in fs.iter().enumerate() {
                    let xv = x[var as usize];
                    let lower = powu(xv, d - 1);
                    dpw[i] = lower * d as f64;
                    pw[i] = lower * xv;
                }
                pre[0] = self.coef[t];
                for i in 0..k {
                    pre[i + 1] = pre[i] * pw[i];
                }
                acc += pre[k];
                let mut suf = one;
                for i in (0..k).rev() {
                    row[fs[i].0 as usize] += pre[i] * dpw[i] * suf;
                    suf *= pw[i];
                }
            }
            f[e] = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_text;

    #[test]
    fn jacobian_matches_symbolic() {
        let polys = [parse_text("3*p0^2*p1 - p2^3 + 2", Some(3)).unwrap(), parse_text("p0*p1*p2 - 1/2*p1", Some(3)).unwrap()];
        let cp: Vec<CPoly> = polys.iter().map(|p| p.to_complex()).collect();
        let c = Compiled::new(&cp, 3);
        let x = [C64::new(0.3, -1.2), C64::new(2.0, 0.5), C64::new(-0.7, 0.1)];
        let mut f = [C64::new(0.0, 0.0); 2];
        let mut j = [C64::new(0.0, 0.0); 6];
        c.eval_jac(&x, &mut f, &mut j);
        for e in 0..2 {
            let s = 1.0 / cp[e].max_magnitude();
            assert!((f[e] - cp[e].eval(&x).unwrap() * s).norm() < 1e-12);
            for v in 0..3 {
                let d = cp[e].diff(v).eval(&x).unwrap() * s;
                assert!((j[e * 3 + v] - d).norm() < 1e-12);
            }
        }
        let mut g = [C64::new(0.0, 0.0); 2];
        c.eval(&x, &mut g);
        assert_eq!(f, g);
    }
}
