//! Tracking a single path of `H(x,t) = (1−t)·F(x) + t·γ·G(x)` from `t = 1`
//! to `t = 0`: RK4 predictor on the Davidenko equation, Newton corrector.

use super::eval::Evaluate;
use super::TrackerConfig;
use crate::linalg::lu_solve;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathStatus {
    /// Reached `t = 0`.
    Finished,
    /// The solution norm exceeded the divergence bound.
    Diverged,
    /// Step size fell below the minimum at parameter `t`.
    Stalled(f64),
    /// Step budget exhausted at parameter `t`.
    MaxSteps(f64),
}

#[derive(Clone, Debug)]
pub struct PathEnd {
    pub x: Vec<C64>,
    pub status: PathStatus,
    pub steps: usize,
}

pub struct Homotopy<'a> {
    pub target: &'a dyn Evaluate,
    pub start: &'a dyn Evaluate,
    pub gamma: C64,
}

struct Work {
    n: usize,
    ft: Vec<C64>,
    jt: Vec<C64>,
    fs: Vec<C64>,
    js: Vec<C64>,
    a: Vec<C64>,
    b: Vec<C64>,
}

impl Work {
    fn new(n: usize) -> Self {
        let z = C64::new(0.0, 0.0);
        Work { n, ft: vec![z; n], jt: vec![z; n * n], fs: vec![z; n], js: vec![z; n * n], a: vec![z; n * n], b: vec![z; n] }
    }
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl<'a> Homotopy<'a> {
    fn eval_both(&self, x: &[C64], w: &mut Work) {
        self.target.eval_jac(x, &mut w.ft, &mut w.jt);
        self.start.eval_jac(x, &mut w.fs, &mut w.js);
    }

    fn assemble_hx(&self, t: f64, w: &mut Work) {
        let a = C64::new(1.0 - t, 0.0);
        let b = self.gamma * t;
        for k in 0..w.n * w.n {
            w.a[k] = a * w.jt[k] + b * w.js[k];
        }
    }

    /// dx/dt = −H_x^{-1} H_t with H_t = γG − F.
    fn velocity(&self, x: &[C64], t: f64, w: &mut Work, out: &mut [C64]) -> bool {
        self.eval_both(x, w);
        self.assemble_hx(t, w);
        for i in 0..w.n {
            w.b[i] = w.ft[i] - self.gamma * w.fs[i];
        }
        if !lu_solve(&mut w.a, w.n, &mut w.b) {
            return false;
        }
        out.copy_from_slice(&w.b);
        out.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// One Newton step on `H(·,t)`; returns the update.
    fn newton(&self, x: &mut [C64], t: f64, w: &mut Work) -> Option<f64> {
        self.eval_both(x, w);
        self.assemble_hx(t, w);
        let a = C64::new(1.0 - t, 0.0);
        let b = self.gamma * t;
        for i in 0..w.n {
            w.b[i] = -(a * w.ft[i] + b * w.fs[i]);
        }
        if !lu_solve(&mut w.a, w.n, &mut w.b) {
            return None;
        }
        for i in 0..w.n {
            x[i] += w.b[i];
        }
        let d = norm(&w.b);
        d.is_finite().then_some(d)
    }

    pub fn track(&self, x0: &[C64], cfg: &TrackerConfig) -> PathEnd {
        let n = x0.len();
        let mut w = Work::new(n);
        let mut x = x0.to_vec();
        let mut t = 1.0f64;
        let mut h = cfg.initial_step;
        let mut streak = 0usize;
        let mut steps = 0usize;
        let z = C64::new(0.0, 0.0);
        let (mut k1, mut k2, mut k3, mut k4) = (vec![z; n], vec![z; n], vec![z; n], vec![z; n]);
        let mut y = vec![z; n];
        while t > 0.0 {
            if steps >= cfg.max_steps {
                return PathEnd { x, status: PathStatus::MaxSteps(t), steps };
            }
            steps += 1;
            let dt = h.min(t);
            let t1 = if dt >= t { 0.0 } else { t - dt };
            let s = -dt;
            let mut ok = self.velocity(&x, t, &mut w, &mut k1);
            if ok {
                for i in 0..n {
                    y[i] = x[i] + k1[i] * (s / 2.0);
                }
                ok = self.velocity(&y, t + s / 2.0, &mut w, &mut k2);
            }
            if ok {
                for i in 0..n {
                    y[i] = x[i] + k2[i] * (s / 2.0);
                }
                ok = self.velocity(&y, t + s / 2.0, &mut w, &mut k3);
            }
            if ok {
                for i in 0..n {
                    y[i] = x[i] + k3[i] * s;
                }
                ok = self.velocity(&y, t1, &mut w, &mut k4);
            }
            if ok {
                for i in 0..n {
                    y[i] = x[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (s / 6.0);
                }
                ok = self.correct(&mut y, t1, &mut w, cfg);
            }
            if ok {
                x.copy_from_slice(&y);
                t = t1;
                streak += 1;
                if streak >= 5 {
                    h = (h * 2.0).min(cfg.max_step);
                    streak = 0;
                }
                if norm(&x) > cfg.divergence_bound {
                    return PathEnd { x, status: PathStatus::Diverged, steps };
                }
            } else {
                streak = 0;
                h /= 2.0;
                if h < cfg.min_step {
                    return PathEnd { x, status: PathStatus::Stalled(t), steps };
                }
            }
        }
        PathEnd { x, status: PathStatus::Finished, steps }
    }

    fn correct(&self, y: &mut [C64], t: f64, w: &mut Work, cfg: &TrackerConfig) -> bool {
        let mut prev = f64::INFINITY;
        for it in 0..3 {
            let Some(d) = self.newton(y, t, w) else { return false };
            let scale = 1.0 + norm(y);
            if it == 0 && d > cfg.max_correction * scale {
                return false;
            }
            if d <= cfg.corrector_tol * scale {
                return true;
            }
            if d > 0.5 * prev {
                return false;
            }
            prev = d;
        }
        false
    }
}
