//! Linear return to equilibrium from the Laplace transform of δ.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::setup::PhysicalSetup;

/// Largest tolerated disagreement between the two inversions.
pub const AGREEMENT_GATE: f64 = 1e-4;

const EULER_A: f64 = 18.4;
const EULER_M: usize = 11;
const TALBOT_NODES: usize = 64;

/// δ̂(s) for the linear decay problem.
#[derive(Clone, Copy, Debug)]
pub struct DecayTransform {
    pub tau0_sq: f64,
    pub ell: f64,
    pub kappa: f64,
    pub delta0: f64,
}

impl DecayTransform {
    /// Requires a constant equilibrium depth.
    pub fn from_setup(setup: &PhysicalSetup<f64>, delta0: f64) -> Result<Self> {
        let h = setup
            .h_eq
            .as_constant()
            .ok_or_else(|| Error::Config("linear decay oracle needs a constant depth".into()))?;
        let (k, l) = (setup.kappa, setup.ell);
        let tau0_sq = 3.0 * k * k * (1.0 - h) + l * l / (3.0 * h) + k * k / h;
        Ok(DecayTransform { tau0_sq, ell: l, kappa: k, delta0 })
    }

    /// √(1+κ²s²) with cuts running horizontally from ±i/κ to the left.
    fn root(&self, s: Complex64) -> Complex64 {
        let ik = Complex64::new(0.0, 1.0 / self.kappa);
        self.kappa * (s - ik).sqrt() * (s + ik).sqrt()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        let r = self.root(s);
        let lr = self.ell * r;
        self.delta0 * (self.tau0_sq * s + lr) / (self.tau0_sq * s * s + s * lr + 1.0)
    }
}

/// Abate-Whitt Euler summation.
pub fn invert_euler(f: &DecayTransform, t: f64) -> f64 {
    let n = 21 + (2.0 * t / (std::f64::consts::PI * f.kappa)).ceil() as usize;
    let a = EULER_A;
    let scale = (a / 2.0).exp() / t;
    let term = |k: usize| {
        let s = Complex64::new(a, 2.0 * k as f64 * std::f64::consts::PI) / (2.0 * t);
        let v = f.eval(s).re;
        if k == 0 {
            0.5 * v
        } else if k % 2 == 1 {
            -v
        } else {
            v
        }
    };
    let mut partial = Vec::with_capacity(EULER_M + 1);
    let mut sum = 0.0;
    for k in 0..=n + EULER_M {
        sum += term(k);
        if k >= n {
            partial.push(sum);
        }
    }
    let mut binom = 1.0;
    let mut acc = 0.0;
    for (j, s) in partial.iter().enumerate() {
        acc += binom * s;
        binom *= (EULER_M - j) as f64 / (j + 1) as f64;
    }
    scale * acc / 2f64.powi(EULER_M as i32)
}

/// Talbot inversion on s(θ) = λ(θ cot θ + iνθ).
pub fn invert_talbot(f: &DecayTransform, t: f64) -> f64 {
    let lambda = 6.0 / t;
    let nu = (3.0 / (std::f64::consts::PI * f.kappa * lambda)).max(1.0);
    let m = TALBOT_NODES;
    let mut acc = 0.0;
    for k in 0..m {
        let th = (k as f64 + 0.5) * std::f64::consts::PI / m as f64;
        let (sn, cs) = th.sin_cos();
        let cot = cs / sn;
        let s = lambda * Complex64::new(th * cot, nu * th);
        let ds = lambda * Complex64::new(cot - th / (sn * sn), nu);
        let v = (s * t).exp() * f.eval(s) * ds / Complex64::new(0.0, 1.0);
        acc += v.re;
    }
    acc / m as f64
}

/// Per-time comparison of the two inversions.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceCheck {
    pub t: Vec<f64>,
    pub euler: Vec<f64>,
    pub talbot: Vec<f64>,
    pub max_disagreement: f64,
}

/// δ(t) on `t_grid` from the Euler inversion, cross-checked by Talbot.
pub fn linear_decay_exact(t_grid: &[f64], delta0: f64, setup: &PhysicalSetup<f64>) -> Result<LaplaceCheck> {
    if setup.epsilon != 0.0 {
        return Err(Error::Config("linear decay oracle needs epsilon = 0".into()));
    }
    let f = DecayTransform::from_setup(setup, delta0)?;
    let pairs: Vec<(f64, f64)> = t_grid
        .par_iter()
        .map(|&t| if t <= 0.0 { (delta0, delta0) } else { (invert_euler(&f, t), invert_talbot(&f, t)) })
        .collect();
    let euler: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let talbot: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut max_dis = 0.0f64;
    for (i, (e, tb)) in pairs.iter().enumerate() {
        let d = (e - tb).abs();
        if !(d <= AGREEMENT_GATE) {
            return Err(Error::OracleInvalid(format!(
                "Euler and Talbot disagree by {d:e} at t = {}",
                t_grid[i]
            )));
        }
        max_dis = max_dis.max(d);
    }
    Ok(LaplaceCheck { t: t_grid.to_vec(), euler, talbot, max_disagreement: max_dis })
}
