//! Time-periodic linear waves around a fixed object.

use crate::error::{Error, Result};
use crate::setup::PhysicalSetup;

/// Tolerance on the two amplitude constraints.
pub const CONSTRAINT_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicSolutionSpec {
    pub k: f64,
    pub omega: f64,
    pub zeta_c_plus: f64,
    pub zeta_c_minus: f64,
    pub zeta_s: f64,
    pub q_s_plus: f64,
    pub q_s_minus: f64,
    pub q_c: f64,
}

/// ω > 0 with ω² = k²/(1+κ²k²).
pub fn dispersion_omega(k: f64, kappa: f64) -> f64 {
    (k * k / (1.0 + kappa * kappa * k * k)).sqrt()
}

fn alpha0(setup: &PhysicalSetup<f64>) -> f64 {
    setup.object_mean(|_, h| 1.0 / h)
}

impl PeriodicSolutionSpec {
    /// Builds a spec from the four free amplitudes; ζ^s and q^c follow from
    /// the constraints.
    pub fn new(setup: &PhysicalSetup<f64>, k: f64, zeta_c_plus: f64, zeta_c_minus: f64, q_s_plus: f64, q_s_minus: f64) -> Result<Self> {
        if k == 0.0 {
            return Err(Error::Config("wavenumber must be non-zero".into()));
        }
        let den = 2.0 * setup.ell * alpha0(setup) * k;
        Ok(PeriodicSolutionSpec {
            k,
            omega: dispersion_omega(k, setup.kappa),
            zeta_c_plus,
            zeta_c_minus,
            zeta_s: (zeta_c_plus - zeta_c_minus) / den,
            q_s_plus,
            q_s_minus,
            q_c: -(q_s_plus - q_s_minus) / den,
        })
    }

    /// Checks the dispersion relation and both constraints.
    pub fn validate(&self, setup: &PhysicalSetup<f64>) -> Result<()> {
        let (k, w, kap) = (self.k, self.omega, setup.kappa);
        if (w * w * (1.0 + kap * kap * k * k) - k * k).abs() > 1e-12 * k * k {
            return Err(Error::Config(format!("omega = {w} violates the dispersion relation")));
        }
        let den = 2.0 * setup.ell * alpha0(setup) * k;
        let r1 = self.q_c + (self.q_s_plus - self.q_s_minus) / den;
        let r2 = self.zeta_s - (self.zeta_c_plus - self.zeta_c_minus) / den;
        let scale = 1.0f64.max(self.q_c.abs()).max(self.zeta_s.abs());
        if r1.abs() > CONSTRAINT_TOL * scale || r2.abs() > CONSTRAINT_TOL * scale {
            return Err(Error::Config(format!("periodic spec violates constraints ({r1:e}, {r2:e})")));
        }
        Ok(())
    }

    fn side(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Plus => (self.zeta_c_plus, self.q_s_plus),
            Side::Minus => (self.zeta_c_minus, self.q_s_minus),
        }
    }

    /// (ζ, q) at offset X = x ∓ ℓ from the contact point on `side`.
    pub fn fields_at_offset(&self, side: Side, xo: f64, t: f64) -> (f64, f64) {
        let (zc, qs) = self.side(side);
        let (k, w) = (self.k, self.omega);
        let (sm, cm) = (k * xo - w * t).sin_cos();
        let (sp, cp) = (k * xo + w * t).sin_cos();
        let (a, b) = (zc + self.q_c, zc - self.q_c);
        let (c, d) = (self.zeta_s + qs, self.zeta_s - qs);
        let zeta = 0.5 * k * (a * cm + b * cp + c * sm + d * sp);
        let q = 0.5 * w * (a * cm - b * cp + c * sm - d * sp);
        (zeta, q)
    }

    pub fn qi_avg(&self, t: f64) -> f64 {
        let (s, c) = (self.omega * t).sin_cos();
        self.omega * (self.q_c * c - self.zeta_s * s)
    }
}

/// Exact (ζ, q) at physical position x on `side`, and ⟨q_i⟩(t).
pub fn fixed_object_exact(spec: &PeriodicSolutionSpec, setup: &PhysicalSetup<f64>, t: f64, x: f64, side: Side) -> Result<(f64, f64, f64)> {
    if setup.epsilon != 0.0 {
        return Err(Error::Config("periodic family needs epsilon = 0".into()));
    }
    spec.validate(setup)?;
    let xo = match side {
        Side::Plus => x - setup.ell,
        Side::Minus => x + setup.ell,
    };
    let (z, q) = spec.fields_at_offset(side, xo, t);
    Ok((z, q, spec.qi_avg(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setup::DepthProfile;

    fn setup() -> PhysicalSetup<f64> {
        PhysicalSetup::from_mu(0.0, 0.3, 1.0, DepthProfile::Constant(0.8)).unwrap()
    }

    #[test]
    fn omega_example() {
        assert!((dispersion_omega(2.0, 0.1f64.sqrt()) - (4.0f64 / 1.4).sqrt()).abs() < 1e-15);
        assert!((dispersion_omega(2.0, 0.1f64.sqrt()) - 1.690309).abs() < 1e-6);
    }

    #[test]
    fn zero_amplitudes() {
        let s = setup();
        let p = PeriodicSolutionSpec::new(&s, 2.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        for x in [1.5, 3.0] {
            assert_eq!(fixed_object_exact(&p, &s, 0.7, x, Side::Plus).unwrap(), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn rejects_inconsistent_spec() {
        let s = setup();
        let mut p = PeriodicSolutionSpec::new(&s, 2.0, 0.1, 0.05, 0.08, 0.02).unwrap();
        p.zeta_s += 1e-6;
        assert!(fixed_object_exact(&p, &s, 0.0, 2.0, Side::Plus).is_err());
        let mut p = PeriodicSolutionSpec::new(&s, 2.0, 0.1, 0.05, 0.08, 0.02).unwrap();
        p.omega *= 1.01;
        assert!(p.validate(&s).is_err());
    }

    #[test]
    fn initial_data() {
        let s = setup();
        let p = PeriodicSolutionSpec::new(&s, 2.0, 0.1, 0.05, 0.08, 0.02).unwrap();
        for (side, zc, qs) in [(Side::Plus, 0.1, 0.08), (Side::Minus, 0.05, 0.02)] {
            for xo in [-1.3, 0.0, 0.4] {
                let (z, q) = p.fields_at_offset(side, xo, 0.0);
                let kx = 2.0 * xo;
                assert!((z - (2.0 * zc * kx.cos() + 2.0 * p.zeta_s * kx.sin())).abs() < 1e-15);
                assert!((q - (p.omega * p.q_c * kx.cos() + p.omega * qs * kx.sin())).abs() < 1e-15);
            }
        }
        assert!((p.qi_avg(0.0) - p.omega * p.q_c).abs() < 1e-16);
    }

    /// Hand-differentiated residuals of the PDE, the transmission conditions
    /// and the interior discharge ODE.
    #[test]
    fn solves_linear_system() {
        let s = setup();
        let a0 = 1.0 / 0.8;
        let kap2 = s.kappa * s.kappa;
        let p = PeriodicSolutionSpec::new(&s, 2.0, 0.1, -0.05, 0.08, 0.03).unwrap();
        let (k, w) = (p.k, p.omega);
        for &t in &[0.0, 0.3, 1.1, 2.7] {
            for side in [Side::Plus, Side::Minus] {
                let (zc, qs) = p.side(side);
                let (a, b) = (zc + p.q_c, zc - p.q_c);
                let (c, d) = (p.zeta_s + qs, p.zeta_s - qs);
                for &xo in &[0.0, 0.25, -0.8, 3.0] {
                    let (sm, cm) = (k * xo - w * t).sin_cos();
                    let (sp, cp) = (k * xo + w * t).sin_cos();
                    let zt = 0.5 * k * w * (a * sm - b * sp - c * cm + d * cp);
                    let qx = 0.5 * w * k * (-a * sm + b * sp + c * cm - d * cp);
                    assert!((zt + qx).abs() < 1e-12);
                    // q_t, q_xxt, ζ_x
                    let qt = 0.5 * w * w * (a * sm + b * sp - c * cm - d * cp);
                    let qxxt = -k * k * qt;
                    let zx = 0.5 * k * k * (-a * sm - b * sp + c * cm + d * cp);
                    assert!((qt - kap2 * qxxt + zx).abs() < 1e-12);
                }
            }
            let (_, qp) = p.fields_at_offset(Side::Plus, 0.0, t);
            let (_, qm) = p.fields_at_offset(Side::Minus, 0.0, t);
            assert!((qp - qm).abs() < 1e-15);
            assert!((0.5 * (qp + qm) - p.qi_avg(t)).abs() < 1e-15);
            let (zp, _) = p.fields_at_offset(Side::Plus, 0.0, t);
            let (zm, _) = p.fields_at_offset(Side::Minus, 0.0, t);
            let jump = (1.0 - kap2 * w * w) * (zp - zm);
            let (sn, cs) = (w * t).sin_cos();
            let dqi = -w * w * (p.q_c * sn + p.zeta_s * cs);
            assert!((a0 * dqi + jump / (2.0 * s.ell)).abs() < 1e-12);
        }
    }
}
