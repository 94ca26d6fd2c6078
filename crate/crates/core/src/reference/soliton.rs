//! Solitary waves of the Boussinesq-Abbott system.

use crate::error::{Error, Result};

/// Tail cut-off below which the profile is set to zero.
pub const TAIL_CUTOFF: f64 = 1e-12;
/// Integrator step.
pub const STEP: f64 = 1e-3;

/// c² for a solitary wave of amplitude `zeta_max`.
pub fn soliton_speed_sq(zeta_max: f64, epsilon: f64) -> f64 {
    let z = zeta_max;
    epsilon / 6.0 * (3.0 * z * z + epsilon * z * z * z) / (z - (epsilon * z).ln_1p() / epsilon)
}

/// Even profile ζ_c, stored on x ≥ 0 at the integrator nodes.
#[derive(Clone, Debug)]
pub struct SolitonProfile {
    pub zeta_max: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub c: f64,
    h: f64,
    /// ζ and ζ' at x = j·h.
    nodes: Vec<(f64, f64)>,
}

impl SolitonProfile {
    /// Extent of the non-zero part.
    pub fn support(&self) -> f64 {
        (self.nodes.len() - 1) as f64 * self.h
    }

    /// ζ_c(x) by cubic Hermite interpolation; 0 beyond the support.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        let s = x / self.h;
        let j = s.floor() as usize;
        if j + 1 >= self.nodes.len() {
            return 0.0;
        }
        let u = s - j as f64;
        let (z0, d0) = self.nodes[j];
        let (z1, d1) = self.nodes[j + 1];
        let (u2, u3) = (u * u, u * u * u);
        (2.0 * u3 - 3.0 * u2 + 1.0) * z0
            + (u3 - 2.0 * u2 + u) * self.h * d0
            + (-2.0 * u3 + 3.0 * u2) * z1
            + (u3 - u2) * self.h * d1
    }

    /// Samples on [x_min, x_max] with the given spacing.
    pub fn samples(&self, x_min: f64, x_max: f64, dx: f64) -> Vec<(f64, f64)> {
        let n = ((x_max - x_min) / dx).ceil() as usize;
        (0..=n).map(|j| {
            let x = (x_min + j as f64 * dx).min(x_max);
            (x, self.eval(x))
        }).collect()
    }

    /// Node values ζ(j·h), j ≥ 0.
    pub fn node_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.0)
    }

    pub fn node_spacing(&self) -> f64 {
        self.h
    }

    /// Residual of the profile ODE with ζ'' from a fourth-order difference of
    /// every tenth node (spacing 10h, which keeps round-off below 1e-9).
    pub fn ode_residual(&self) -> f64 {
        const S: i64 = 10;
        let z = |j: i64| self.nodes[j.unsigned_abs() as usize].0;
        let (c2, k2, e) = (self.c * self.c, self.kappa * self.kappa, self.epsilon);
        let h = S as f64 * self.h;
        let h2 = h * h;
        let last = self.nodes.len() as i64 - 1 - 2 * S;
        (0..=last)
            .map(|j| {
                let d2 = (-z(j + 2 * S) + 16.0 * z(j + S) - 30.0 * z(j) + 16.0 * z(j - S) - z(j - 2 * S)) / (12.0 * h2);
                let zj = z(j);
                (c2 * k2 * d2 - c2 * zj / (1.0 + e * zj) + zj + 0.5 * e * zj * zj).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn accel(z: f64, c2: f64, k2: f64, e: f64) -> f64 {
    (c2 * z / (1.0 + e * z) - z - 0.5 * e * z * z) / (c2 * k2)
}

/// (ζ/ε − ln(1+εζ)/ε²)/ζ², accurate for small εζ.
fn s_over_z2(z: f64, e: f64) -> f64 {
    let y = e * z;
    if y.abs() < 1e-3 {
        let mut sum = 0.0;
        let mut p = 1.0;
        for k in 2..12 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * p / k as f64;
            p *= y;
        }
        sum
    } else {
        (y - y.ln_1p()) / (y * y)
    }
}

/// Solves c²κ²ζ'' − c²ζ/(1+εζ) + ζ + εζ²/2 = 0 from the crest outward.
pub fn soliton_profile(zeta_max: f64, epsilon: f64, kappa: f64) -> Result<SolitonProfile> {
    if !(zeta_max > 0.0 && epsilon > 0.0 && kappa > 0.0) {
        return Err(Error::Config("soliton needs zeta_max, epsilon, kappa > 0".into()));
    }
    let c2 = soliton_speed_sq(zeta_max, epsilon);
    if !(c2 > 1.0) {
        return Err(Error::Physical(format!("no solitary wave: c^2 = {c2}")));
    }
    let (k2, e, h) = (kappa * kappa, epsilon, STEP);
    let lambda = ((c2 - 1.0) / (c2 * k2)).sqrt();
    let max_steps = (10.0 * (1.0 / TAIL_CUTOFF).ln() / lambda / h) as usize + 100_000;

    let mut nodes = vec![(zeta_max, 0.0)];
    let (mut z, mut d) = (zeta_max, 0.0);
    // crest region, second-order form
    while z > 0.5 * zeta_max {
        let f = |z: f64, d: f64| (d, accel(z, c2, k2, e));
        let k1 = f(z, d);
        let k2_ = f(z + 0.5 * h * k1.0, d + 0.5 * h * k1.1);
        let k3 = f(z + 0.5 * h * k2_.0, d + 0.5 * h * k2_.1);
        let k4 = f(z + h * k3.0, d + h * k3.1);
        z += h / 6.0 * (k1.0 + 2.0 * k2_.0 + 2.0 * k3.0 + k4.0);
        d += h / 6.0 * (k1.1 + 2.0 * k2_.1 + 2.0 * k3.1 + k4.1);
        if !(d < 0.0) || nodes.len() > max_steps {
            return Err(Error::Physical("soliton profile does not decay".into()));
        }
        nodes.push((z, d));
    }
    // tail, w = ln ζ with w' = −√(P(ζ)/ζ²)
    let slope = |w: f64| -> Result<f64> {
        let z = w.exp();
        let p = 2.0 / (c2 * k2) * (c2 * s_over_z2(z, e) - 0.5 - e * z / 6.0);
        if !(p > 0.0) {
            return Err(Error::Physical("soliton profile does not decay".into()));
        }
        Ok(-p.sqrt())
    };
    let mut w = z.ln();
    let w_end = TAIL_CUTOFF.ln();
    while w > w_end {
        let k1 = slope(w)?;
        let k2_ = slope(w + 0.5 * h * k1)?;
        let k3 = slope(w + 0.5 * h * k2_)?;
        let k4 = slope(w + h * k3)?;
        w += h / 6.0 * (k1 + 2.0 * k2_ + 2.0 * k3 + k4);
        if nodes.len() > max_steps {
            return Err(Error::Physical("soliton profile does not decay".into()));
        }
        let z = w.exp();
        nodes.push((z, z * slope(w)?));
    }
    if let Some(last) = nodes.last_mut() {
        *last = (0.0, 0.0);
    }
    Ok(SolitonProfile { zeta_max, epsilon, kappa, c: c2.sqrt(), h, nodes })
}
