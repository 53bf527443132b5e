//! Start systems: total degree `x_i^{d_i} − 1` and linear products
//! respecting a partition of the unknowns into groups.

use std::collections::HashMap;

use super::eval::Evaluate;
use crate::error::{invalid, Result};
use crate::linalg::lu_solve;
use crate::poly::CPoly;
use crate::rng::{complex, Rng64};
use crate::C64;

#[derive(Clone, Debug)]
pub struct LinForm {
    group: usize,
    vars: Vec<usize>,
    coeffs: Vec<C64>,
    c0: C64,
}

impl LinForm {
    fn eval(&self, x: &[C64]) -> C64 {
        self.vars.iter().zip(&self.coeffs).fold(self.c0, |a, (&v, &c)| a + c * x[v])
    }
}

#[derive(Clone, Debug)]
pub enum StartSystem {
    TotalDegree { degrees: Vec<u32> },
    LinearProduct { nvars: usize, factors: Vec<Vec<LinForm>> },
}

/// Degree of each equation in each group.
pub fn group_degrees(eqs: &[CPoly], groups: &[Vec<usize>]) -> Vec<Vec<u32>> {
    eqs.iter().map(|e| groups.iter().map(|g| e.degree_in(g)).collect()).collect()
}

/// Multihomogeneous Bézout number for the given degree table.
pub fn bezout_number(degrees: &[Vec<u32>], sizes: &[usize]) -> u128 {
    fn rec(e: usize, rem: &mut Vec<usize>, deg: &[Vec<u32>], memo: &mut HashMap<(usize, Vec<usize>), u128>) -> u128 {
        if e == deg.len() {
            return u128::from(rem.iter().all(|&r| r == 0));
        }
        if let Some(&v) = memo.get(&(e, rem.clone())) {
            return v;
        }
        let mut total = 0u128;
        for g in 0..rem.len() {
            if rem[g] > 0 && deg[e][g] > 0 {
                rem[g] -= 1;
                total += deg[e][g] as u128 * rec(e + 1, rem, deg, memo);
                rem[g] += 1;
            }
        }
        memo.insert((e, rem.clone()), total);
        total
    }
    let mut rem = sizes.to_vec();
    rec(0, &mut rem, degrees, &mut HashMap::new())
}

pub fn total_degree_count(eqs: &[CPoly]) -> u128 {
    eqs.iter().map(|e| e.degree().unwrap_or(0) as u128).product()
}

impl StartSystem {
    pub fn total_degree(eqs: &[CPoly]) -> Result<Self> {
        let degrees: Vec<u32> = eqs.iter().map(|e| e.degree().unwrap_or(0)).collect();
        if degrees.contains(&0) {
            return invalid("constant equation in system");
        }
        Ok(StartSystem::TotalDegree { degrees })
    }

    pub fn linear_product(eqs: &[CPoly], groups: &[Vec<usize>], nvars: usize, rng: &mut Rng64) -> Result<Self> {
        if groups.iter().any(|g| g.is_empty()) {
            return invalid("empty variable group");
        }
        let mut seen = vec![false; nvars];
        for &v in groups.iter().flatten() {
            if v >= nvars || seen[v] {
                return invalid("variable groups do not partition the unknowns");
            }
            seen[v] = true;
        }
        if seen.iter().any(|&s| !s) {
            return invalid("variable groups do not partition the unknowns");
        }
        let deg = group_degrees(eqs, groups);
        let mut factors = Vec::with_capacity(eqs.len());
        for row in &deg {
            let mut fs = Vec::new();
            for (g, &d) in row.iter().enumerate() {
                for _ in 0..d {
                    fs.push(LinForm {
                        group: g,
                        vars: groups[g].clone(),
                        coeffs: groups[g].iter().map(|_| complex(rng)).collect(),
                        c0: complex(rng),
                    });
                }
            }
            if fs.is_empty() {
                return invalid("constant equation in system");
            }
            factors.push(fs);
        }
        Ok(StartSystem::LinearProduct { nvars, factors })
    }

    /// All start solutions (roots of unity or products of hyperplane
    /// intersections).
    pub fn solutions(&self, groups: &[Vec<usize>]) -> Result<Vec<Vec<C64>>> {
        match self {
            StartSystem::TotalDegree { degrees } => {
                let n = degrees.len();
                let mut out = Vec::new();
                let mut idx = vec![0u32; n];
                loop {
                    out.push(
                        (0..n)
                            .map(|i| C64::from_polar(1.0, std::f64::consts::TAU * idx[i] as f64 / degrees[i] as f64))
                            .collect(),
                    );
                    let mut k = 0;
                    loop {
                        if k == n {
                            return Ok(out);
                        }
                        idx[k] += 1;
                        if idx[k] < degrees[k] {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                }
            }
            StartSystem::LinearProduct { nvars, factors } => {
                let mut out = Vec::new();
                let mut choice: Vec<&LinForm> = Vec::with_capacity(factors.len());
                let mut rem: Vec<usize> = groups.iter().map(|g| g.len()).collect();
                enumerate(0, factors, &mut rem, &mut choice, groups, *nvars, &mut out);
                Ok(out)
            }
        }
    }
}

fn enumerate<'a>(
    e: usize,
    factors: &'a [Vec<LinForm>],
    rem: &mut Vec<usize>,
    choice: &mut Vec<&'a LinForm>,
    groups: &[Vec<usize>],
    nvars: usize,
    out: &mut Vec<Vec<C64>>,
) {
    if e == factors.len() {
        if let Some(x) = solve_choice(choice, groups, nvars) {
            out.push(x);
        }
        return;
    }
    for f in &factors[e] {
        let g = f.group;
        if rem[g] == 0 {
            continue;
        }
        rem[g] -= 1;
        choice.push(f);
        enumerate(e + 1, factors, rem, choice, groups, nvars, out);
        choice.pop();
        rem[g] += 1;
    }
}

fn solve_choice(choice: &[&LinForm], groups: &[Vec<usize>], nvars: usize) -> Option<Vec<C64>> {
    let mut x = vec![C64::new(0.0, 0.0); nvars];
    for (g, vars) in groups.iter().enumerate() {
        let forms: Vec<&&LinForm> = choice.iter().filter(|f| f.group == g).collect();
        let k = vars.len();
        let mut a = vec![C64::new(0.0, 0.0); k * k];
        let mut b = vec![C64::new(0.0, 0.0); k];
        for (i, f) in forms.iter().enumerate() {
            for j in 0..k {
                a[i * k + j] = f.coeffs[j];
            }
            b[i] = -f.c0;
        }
        if !lu_solve(&mut a, k, &mut b) {
            return None;
        }
        for (j, &v) in vars.iter().enumerate() {
            x[v] = b[j];
        }
    }
    Some(x)
}

impl Evaluate for StartSystem {
    fn nvars(&self) -> usize {
        match self {
            StartSystem::TotalDegree { degrees } => degrees.len(),
            StartSystem::LinearProduct { nvars, .. } => *nvars,
        }
    }

    fn neqs(&self) -> usize {
        match self {
            StartSystem::TotalDegree { degrees } => degrees.len(),
            StartSystem::LinearProduct { factors, .. } => factors.len(),
        }
    }

    fn eval(&self, x: &[C64], f: &mut [C64]) {
        match self {
            StartSystem::TotalDegree { degrees } => {
                for (i, &d) in degrees.iter().enumerate() {
                    f[i] = x[i].powu(d) - 1.0;
                }
            }
            StartSystem::LinearProduct { factors, .. } => {
                for (e, fs) in factors.iter().enumerate() {
                    f[e] = fs.iter().map(|l| l.eval(x)).product();
                }
            }
        }
    }

    fn eval_jac(&self, x: &[C64], f: &mut [C64], jac: &mut [C64]) {
        let n = self.nvars();
        jac.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        match self {
            StartSystem::TotalDegree { degrees } => {
                for (i, &d) in degrees.iter().enumerate() {
                    let lower = x[i].powu(d - 1);
                    f[i] = lower * x[i] - 1.0;
                    jac[i * n + i] = lower * d as f64;
                }
            }
            StartSystem::LinearProduct { factors, .. } => {
                let one = C64::new(1.0, 0.0);
                for (e, fs) in factors.iter().enumerate() {
                    let vals: Vec<C64> = fs.iter().map(|l| l.eval(x)).collect();
                    let k = vals.len();
                    let mut pre = vec![one; k + 1];
                    for i in 0..k {
                        pre[i + 1] = pre[i] * vals[i];
                    }
                    f[e] = pre[k];
                    let mut suf = one;
                    for i in (0..k).rev() {
                        let w = pre[i] * suf;
                        for (&v, &c) in fs[i].vars.iter().zip(&fs[i].coeffs) {
                            jac[e * n + v] += w * c;
                        }
                        suf *= vals[i];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_text;
    use crate::rng::seeded;

    #[test]
    fn bilinear_pair() {
        let eqs: Vec<CPoly> = ["p0*p1 + p0 - 2*p1 + 1", "3*p0*p1 - p1 + 5"]
            .iter()
            .map(|s| parse_text(s, Some(2)).unwrap().to_complex())
            .collect();
        let groups = vec![vec![0], vec![1]];
        let deg = group_degrees(&eqs, &groups);
        assert_eq!(bezout_number(&deg, &[1, 1]), 2);
        assert_eq!(total_degree_count(&eqs), 4);
        let s = StartSystem::linear_product(&eqs, &groups, 2, &mut seeded(3)).unwrap();
        let sols = s.solutions(&groups).unwrap();
        assert_eq!(sols.len(), 2);
        let mut f = [C64::new(0.0, 0.0); 2];
        for x in &sols {
            s.eval(x, &mut f);
            assert!(f.iter().all(|v| v.norm() < 1e-12));
        }
    }

    #[test]
    fn single_group_matches_total_degree_count() {
        let eqs: Vec<CPoly> = ["p0^2 + p1 - 1", "p0*p1^2 - 2"]
            .iter()
            .map(|s| parse_text(s, Some(2)).unwrap().to_complex())
            .collect();
        let groups = vec![vec![0, 1]];
        assert_eq!(bezout_number(&group_degrees(&eqs, &groups), &[2]), total_degree_count(&eqs));
        let td = StartSystem::total_degree(&eqs).unwrap();
        assert_eq!(td.solutions(&groups).unwrap().len(), 6);
    }

    #[test]
    fn start_jacobian_consistent() {
        let eqs: Vec<CPoly> = ["p0*p1^2 + p2", "p0 + p1*p2", "p2^2*p0 - 1"]
            .iter()
            .map(|s| parse_text(s, Some(3)).unwrap().to_complex())
            .collect();
        let groups = vec![vec![0], vec![1, 2]];
        let s = StartSystem::linear_product(&eqs, &groups, 3, &mut seeded(9)).unwrap();
        let x = [C64::new(0.2, 0.3), C64::new(-1.0, 0.4), C64::new(0.5, -0.5)];
        let mut f0 = [C64::new(0.0, 0.0); 3];
        let mut j = [C64::new(0.0, 0.0); 9];
        s.eval_jac(&x, &mut f0, &mut j);
        let h = 1e-7;
        for v in 0..3 {
            let mut y = x;
            y[v] += h;
            let mut f1 = [C64::new(0.0, 0.0); 3];
            s.eval(&y, &mut f1);
            for e in 0..3 {
                assert!(((f1[e] - f0[e]) / h - j[e * 3 + v]).norm() < 1e-5);
            }
        }
    }
}
