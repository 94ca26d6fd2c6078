//! Coupling ODE for Θ: geometry coefficients, the triangularized mass matrix
//! and its explicit inverse, quadratic terms, and the right-hand sides of the
//! free, forced and symmetric systems.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::setup::PhysicalSetup;
use crate::state::Theta;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometryCoeffs<T: Real> {
    pub alpha: T,
    pub alpha_prime: T,
    pub beta: T,
    pub tau2: T,
}

pub fn geometry_coeffs<T: Real>(setup: &PhysicalSetup<T>, eps_delta: T) -> Result<GeometryCoeffs<T>> {
    let ell = setup.ell;
    let k2 = setup.kappa * setup.kappa;
    let three_k2_m = lit::<T>(3.0) * k2 * setup.mass;
    if let Some(h0) = setup.h_eq.as_constant() {
        let h = h0 + eps_delta;
        if !(h > T::zero()) {
            return Err(Error::Physical(format!("object grounded: h_eq + eps*delta = {h}")));
        }
        let inv = T::one() / h;
        return Ok(GeometryCoeffs {
            alpha: inv,
            alpha_prime: -inv * inv,
            beta: ell * ell * inv * inv / lit(6.0),
            tau2: three_k2_m + ell * ell * inv / lit(3.0) + k2 * inv,
        });
    }
    let mut grounded = None;
    let alpha = setup.object_mean(|_, h| {
        let d = h + eps_delta;
        if !(d > T::zero()) {
            grounded = Some(d);
        }
        T::one() / d
    });
    if let Some(d) = grounded {
        return Err(Error::Physical(format!("object grounded: h_eq + eps*delta = {d}")));
    }
    let alpha_prime = -setup.object_mean(|_, h| T::one() / ((h + eps_delta) * (h + eps_delta)));
    let beta = setup.object_mean(|x, h| x * x / ((h + eps_delta) * (h + eps_delta))) * lit(0.5);
    let second = setup.object_mean(|x, h| x * x / (h + eps_delta));
    let hp = setup.h_eq.eval(ell) + eps_delta;
    let hm = setup.h_eq.eval(-ell) + eps_delta;
    let trace_avg = (T::one() / hp + T::one() / hm) * lit(0.5);
    Ok(GeometryCoeffs { alpha, alpha_prime, beta, tau2: three_k2_m + second + k2 * trace_avg })
}

#[inline]
fn depths<T: Real>(setup: &PhysicalSetup<T>, zu_plus: T, zu_minus: T) -> Result<(T, T)> {
    let hp = T::one() + setup.epsilon * zu_plus;
    let hm = T::one() + setup.epsilon * zu_minus;
    if !(hp > T::zero()) || !(hm > T::zero()) {
        return Err(Error::Physical(format!("dry contact point: h = ({hp}, {hm})")));
    }
    Ok((hp, hm))
}

/// M̃ (block-triangular) together with its explicit inverse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingMatrix<T: Real> {
    pub m: [[T; 4]; 4],
    pub inv: [[T; 4]; 4],
    pub d: T,
}

impl<T: Real> CouplingMatrix<T> {
    pub fn apply_inverse(&self, b: &[T; 4]) -> [T; 4] {
        let mut out = [T::zero(); 4];
        for (o, row) in out.iter_mut().zip(&self.inv) {
            *o = row[0] * b[0] + row[1] * b[1] + row[2] * b[2] + row[3] * b[3];
        }
        out
    }
}

pub fn assemble_and_invert_m<T: Real>(
    setup: &PhysicalSetup<T>,
    coeffs: &GeometryCoeffs<T>,
    zu_plus: T,
    zu_minus: T,
) -> Result<CouplingMatrix<T>> {
    let (hp, hm) = depths(setup, zu_plus, zu_minus)?;
    let (k, ell) = (setup.kappa, setup.ell);
    let (ip, im) = (T::one() / hp, T::one() / hm);
    let half = lit::<T>(0.5);
    let avg = half * (ip + im);
    let jump = ip - im;
    let a = coeffs.alpha + k / ell * avg;
    let tp = coeffs.tau2 + k * ell * avg;
    let z = T::zero();
    let k2 = k * k;
    let m = [
        [a, -half * k * jump, z, z],
        [-half * k * jump, tp, z, z],
        [-k, ell * k, k2, z],
        [k, ell * k, z, k2],
    ];
    let d = -lit::<T>(4.0) * a * tp + k2 * jump * jump;
    if d.abs() < lit(1e-14) {
        return Err(Error::Singular(d.as_f64()));
    }
    let four = lit::<T>(4.0);
    let inv = [
        [-four * tp / d, -lit::<T>(2.0) * k * jump / d, z, z],
        [-lit::<T>(2.0) * k * jump / d, -four * a / d, z, z],
        [
            -four / (k * d) * (coeffs.tau2 + k * ell * im),
            four / (k * d) * (k * im + ell * coeffs.alpha),
            T::one() / k2,
            z,
        ],
        [
            four / (k * d) * (coeffs.tau2 + k * ell * ip),
            four / (k * d) * (k * ip + ell * coeffs.alpha),
            z,
            T::one() / k2,
        ],
    ];
    Ok(CouplingMatrix { m, inv, d })
}

/// (Q̃_i, Q̃_δ, Q̃₊, Q̃₋) of the triangularized system.
pub fn quadratic_terms<T: Real>(
    setup: &PhysicalSetup<T>,
    coeffs: &GeometryCoeffs<T>,
    qi_avg: T,
    delta_dot: T,
    zu_plus: T,
    zu_minus: T,
) -> Result<[T; 4]> {
    let (hp, hm) = depths(setup, zu_plus, zu_minus)?;
    let ell = setup.ell;
    let (ip, im) = (T::one() / hp, T::one() / hm);
    let (ip2, im2) = (ip * ip, im * im);
    let half = lit::<T>(0.5);
    let quarter = lit::<T>(0.25);
    let j2 = ip2 - im2;
    let a2 = half * (ip2 + im2);
    let (q, dd) = (qi_avg, delta_dot);
    let (zp2, zm2) = (zu_plus * zu_plus, zu_minus * zu_minus);
    let qi = -quarter / ell * (ip * zp2 - im * zm2) + quarter * ell * j2 * dd * dd + quarter / ell * j2 * q * q
        - (coeffs.alpha_prime + a2) * dd * q;
    let qd = half * half * (ip * zp2 + im * zm2)
        + (coeffs.beta - half * ell * ell * a2) * dd * dd
        + half * (coeffs.alpha_prime - a2) * q * q
        + half * ell * j2 * dd * q;
    let two_l = lit::<T>(2.0) * ell;
    let qp = -half * zp2 - ip * q * q - ell * ell * ip * dd * dd + two_l * ip * q * dd;
    let qm = -half * zm2 - im * q * q - ell * ell * im * dd * dd - two_l * im * q * dd;
    Ok([qi, qd, qp, qm])
}

/// dΘ/dt for the freely moving object.
pub fn rhs_g<T: Real>(setup: &PhysicalSetup<T>, theta: &Theta<T>, r1f_plus: T, r1f_minus: T, f_ext: T) -> Result<[T; 7]> {
    let eps = setup.epsilon;
    let coeffs = geometry_coeffs(setup, eps * theta.delta)?;
    let cm = assemble_and_invert_m(setup, &coeffs, theta.zu_plus, theta.zu_minus)?;
    let q = quadratic_terms(setup, &coeffs, theta.qi_avg, theta.delta_dot, theta.zu_plus, theta.zu_minus)?;
    let ip = T::one() / (T::one() + eps * theta.zu_plus);
    let im = T::one() / (T::one() + eps * theta.zu_minus);
    let half = lit::<T>(0.5);
    let b = [
        eps * q[0] - half / setup.ell * (ip * r1f_plus - im * r1f_minus),
        -theta.delta + eps * q[1] + half * (ip * r1f_plus + im * r1f_minus) + f_ext,
        -theta.zu_plus + eps * q[2] + r1f_plus,
        -theta.zu_minus + eps * q[3] + r1f_minus,
    ];
    let g = cm.apply_inverse(&b);
    Ok([g[0], g[1], g[2], g[3], theta.delta_dot, theta.zu_plus_dot, theta.zu_minus_dot])
}

/// Prescribed vertical motion: (δ, δ̇, δ̈) at a given time.
pub type Trajectory<T> = [T; 3];

/// dΘ/dt for Θ = (⟨q_i⟩, ζ̲̇₊, ζ̲̇₋, ζ̲₊, ζ̲₋) with δ prescribed.
pub fn rhs_g_forced<T: Real>(
    setup: &PhysicalSetup<T>,
    theta5: &[T; 5],
    r1f_plus: T,
    r1f_minus: T,
    forced: &Trajectory<T>,
) -> Result<[T; 5]> {
    let eps = setup.epsilon;
    let (k, ell) = (setup.kappa, setup.ell);
    let [qi, zpd, zmd, zp, zm] = *theta5;
    let [delta, delta_dot, delta_ddot] = *forced;
    let coeffs = geometry_coeffs(setup, eps * delta)?;
    let (hp, hm) = depths(setup, zp, zm)?;
    let (ip, im) = (T::one() / hp, T::one() / hm);
    let half = lit::<T>(0.5);
    let a = coeffs.alpha + k / ell * half * (ip + im);
    let q = quadratic_terms(setup, &coeffs, qi, delta_dot, zp, zm)?;
    let b0 = eps * q[0] - half / ell * (ip * r1f_plus - im * r1f_minus) + half * k * (ip - im) * delta_ddot;
    let b1 = -zp + eps * q[2] + r1f_plus - ell * k * delta_ddot;
    let b2 = -zm + eps * q[3] + r1f_minus - ell * k * delta_ddot;
    let g1 = b0 / a;
    let k2 = k * k;
    Ok([g1, g1 / k + b1 / k2, -g1 / k + b2 / k2, zpd, zmd])
}

/// dΘ/dt for the symmetric reduction Θ = (δ̇, ζ̲̇₊, δ, ζ̲₊).
pub fn rhs_g_symmetric<T: Real>(setup: &PhysicalSetup<T>, theta4: &[T; 4], r1f_plus: T, f_ext: T) -> Result<[T; 4]> {
    let eps = setup.epsilon;
    let (k, ell) = (setup.kappa, setup.ell);
    let [dd, zpd, delta, zp] = *theta4;
    let coeffs = geometry_coeffs(setup, eps * delta)?;
    let (hp, _) = depths(setup, zp, zp)?;
    let ip = T::one() / hp;
    let q = quadratic_terms(setup, &coeffs, T::zero(), dd, zp, zp)?;
    let b0 = -delta + eps * q[1] + ip * r1f_plus + f_ext;
    let b1 = -zp + eps * q[2] + r1f_plus;
    let g1 = b0 / (coeffs.tau2 + k * ell * ip);
    Ok([g1, (b1 - ell * k * g1) / (k * k), dd, zpd])
}

/// Boundary source coefficients 𝒮± = 𝒢₁ ∓ ℓ𝒢₂ from an evaluated right-hand side.
#[inline]
pub fn source_from_g<T: Real>(g: &[T; 7], ell: T) -> (T, T) {
    (g[0] - ell * g[1], g[0] + ell * g[1])
}

pub fn source_coeffs<T: Real>(
    setup: &PhysicalSetup<T>,
    theta: &Theta<T>,
    r1f_plus: T,
    r1f_minus: T,
    f_ext: T,
) -> Result<(T, T)> {
    let g = rhs_g(setup, theta, r1f_plus, r1f_minus, f_ext)?;
    Ok(source_from_g(&g, setup.ell))
}

/// External force that makes the free system follow the prescribed motion.
pub fn control_force<T: Real>(
    setup: &PhysicalSetup<T>,
    theta5: &[T; 5],
    r1f_plus: T,
    r1f_minus: T,
    forced: &Trajectory<T>,
) -> Result<T> {
    let eps = setup.epsilon;
    let (k, ell) = (setup.kappa, setup.ell);
    let [qi, _, _, zp, zm] = *theta5;
    let [delta, delta_dot, delta_ddot] = *forced;
    let coeffs = geometry_coeffs(setup, eps * delta)?;
    let cm = assemble_and_invert_m(setup, &coeffs, zp, zm)?;
    let (hp, hm) = depths(setup, zp, zm)?;
    let (ip, im) = (T::one() / hp, T::one() / hm);
    let half = lit::<T>(0.5);
    let a = cm.m[0][0];
    let jump = ip - im;
    let q = quadratic_terms(setup, &coeffs, qi, delta_dot, zp, zm)?;
    let bracket = eps * q[0] - half / ell * (ip * r1f_plus - im * r1f_minus);
    Ok(delta - eps * q[1] - half * (ip * r1f_plus + im * r1f_minus)
        - cm.d / (lit::<T>(4.0) * a) * delta_ddot
        - half * k * jump / a * bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setup::DepthProfile;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn setup(eps: f64, kappa2: f64, ell: f64, h0: f64) -> PhysicalSetup<f64> {
        PhysicalSetup::new(eps, kappa2.sqrt(), ell, DepthProfile::Constant(h0)).unwrap()
    }

    fn matmul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut c = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        c
    }

    #[test]
    fn constant_depth_coefficients() {
        let s = setup(0.0, 0.1, 4.0, 0.7);
        assert_relative_eq!(s.mass, 0.3, epsilon = 1e-15);
        let c = geometry_coeffs(&s, 0.0).unwrap();
        assert_relative_eq!(c.alpha, 1.0 / 0.7, epsilon = 1e-14);
        assert_relative_eq!(c.beta, 16.0 / (6.0 * 0.49), epsilon = 1e-13);
        assert_relative_eq!(c.beta, 5.442177, epsilon = 1e-6);
        assert_relative_eq!(c.tau2, 0.09 + 16.0 / 2.1 + 0.1 / 0.7, epsilon = 1e-13);
        assert_relative_eq!(c.tau2, 7.851905, epsilon = 1e-6);
        assert!(c.alpha_prime < 0.0);
    }

    #[test]
    fn simpson_matches_closed_form() {
        let c = setup(0.3, 0.1, 4.0, 0.7);
        let p = PhysicalSetup::new(0.3, 0.1f64.sqrt(), 4.0, DepthProfile::profile(|_x: f64| 0.7)).unwrap();
        assert_relative_eq!(p.mass, c.mass, epsilon = 1e-13);
        for ed in [-0.2, 0.0, 0.15] {
            let a = geometry_coeffs(&c, ed).unwrap();
            let b = geometry_coeffs(&p, ed).unwrap();
            assert_relative_eq!(a.alpha, b.alpha, epsilon = 1e-12);
            assert_relative_eq!(a.alpha_prime, b.alpha_prime, epsilon = 1e-12);
            assert_relative_eq!(a.beta, b.beta, epsilon = 1e-12);
            assert_relative_eq!(a.tau2, b.tau2, epsilon = 1e-12);
        }
    }

    #[test]
    fn varying_depth_quadrature() {
        // h_eq = 0.6 + 0.1 x²/ℓ², mass = 1 − 0.6 − 0.1/3.
        let ell = 2.0;
        let p = PhysicalSetup::new(0.2, 0.3, ell, DepthProfile::profile(move |x: f64| 0.6 + 0.1 * x * x / (ell * ell)))
            .unwrap();
        assert_relative_eq!(p.mass, 0.4 - 0.1 / 3.0, epsilon = 1e-12);
        let c = geometry_coeffs(&p, 0.0).unwrap();
        // (1/2ℓ)∫ dx/(0.6 + 0.1 u²), u = x/ℓ: ∫₀¹ du/(0.6+0.1u²) = atan(√(1/6))/√0.06.
        let exact_alpha = (1.0f64 / 6.0).sqrt().atan() / 0.06f64.sqrt();
        assert_relative_eq!(c.alpha, exact_alpha, epsilon = 1e-10);
        assert!(geometry_coeffs(&p, -3.5).is_err());
    }

    #[test]
    fn grounding_is_an_error() {
        let s = setup(0.3, 0.1, 4.0, 0.7);
        assert!(matches!(geometry_coeffs(&s, -0.7), Err(Error::Physical(_))));
    }

    #[test]
    fn symmetric_state_has_diagonal_top_block() {
        let s = setup(0.3, 0.1, 4.0, 0.7);
        let c = geometry_coeffs(&s, 0.03).unwrap();
        let m = assemble_and_invert_m(&s, &c, 0.1, 0.1).unwrap();
        assert_eq!(m.m[0][1], 0.0);
        assert_eq!(m.m[1][0], 0.0);
        assert!(m.d < 0.0);
    }

    #[test]
    fn linear_matrix_is_state_independent() {
        let s = setup(0.0, 0.1, 4.0, 0.7);
        let c = geometry_coeffs(&s, 0.0).unwrap();
        let a = assemble_and_invert_m(&s, &c, 0.2, -0.1).unwrap();
        let b = assemble_and_invert_m(&s, &c, -0.3, 0.05).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rest_is_an_equilibrium() {
        let s = setup(0.3, 0.1, 4.0, 0.7);
        assert_eq!(rhs_g(&s, &Theta::zero(), 0.0, 0.0, 0.0).unwrap(), [0.0; 7]);
        assert_eq!(rhs_g_forced(&s, &[0.0; 5], 0.0, 0.0, &[0.0; 3]).unwrap(), [0.0; 5]);
        assert_eq!(rhs_g_symmetric(&s, &[0.0; 4], 0.0, 0.0).unwrap(), [0.0; 4]);
        assert_eq!(source_coeffs(&s, &Theta::zero(), 0.0, 0.0, 0.0).unwrap(), (0.0, 0.0));
        assert_eq!(control_force(&s, &[0.0; 5], 0.0, 0.0, &[0.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn linear_release_from_rest() {
        let s = setup(0.0, 0.1, 4.0, 0.7);
        let d0 = 0.1;
        let theta = Theta { delta: d0, ..Theta::zero() };
        let g = rhs_g(&s, &theta, 0.0, 0.0, 0.0).unwrap();
        let c = geometry_coeffs(&s, 0.0).unwrap();
        let (k, ell) = (s.kappa, s.ell);
        let a = c.alpha + k / ell;
        let tp = c.tau2 + k * ell;
        let d = -4.0 * a * tp;
        assert_relative_eq!(g[1], 4.0 * a * d0 / d, epsilon = 1e-15);
        assert_relative_eq!(g[1], -d0 / tp, epsilon = 1e-15);
        assert_eq!(g[0], 0.0);
        // rows 3 and 4 of the explicit inverse applied to (0, −δ₀, 0, 0)
        assert_relative_eq!(g[2], -4.0 / (k * d) * (k + ell * c.alpha) * d0, epsilon = 1e-14);
        assert_relative_eq!(g[3], g[2], epsilon = 0.0);
        let sym = rhs_g_symmetric(&s, &[0.0, 0.0, d0, 0.0], 0.0, 0.0).unwrap();
        assert_relative_eq!(sym[0], g[1], epsilon = 1e-15);
        assert_relative_eq!(sym[1], g[2], epsilon = 1e-14);
    }

    #[test]
    fn symmetric_linear_row() {
        let s = setup(0.0, 0.1, 4.0, 0.7);
        let (d0, r, f) = (0.2, 0.05, -0.3);
        let g = rhs_g_symmetric(&s, &[0.0, 0.0, d0, 0.0], r, f).unwrap();
        let c = geometry_coeffs(&s, 0.0).unwrap();
        assert_relative_eq!(g[0], (-d0 + r + f) / (c.tau2 + s.kappa * s.ell), epsilon = 1e-15);
    }

    #[test]
    fn forced_linear_interior_discharge() {
        let s = setup(0.0, 0.1, 4.0, 0.8);
        let (rp, rm) = (0.03, -0.02);
        let g = rhs_g_forced(&s, &[0.1, 0.0, 0.0, 0.02, -0.01], rp, rm, &[0.05, 0.01, -0.04]).unwrap();
        let c = geometry_coeffs(&s, 0.0).unwrap();
        let a = c.alpha + s.kappa / s.ell;
        assert_relative_eq!(a * g[0], -(rp - rm) / (2.0 * s.ell), epsilon = 1e-15);
    }

    #[test]
    fn source_identities() {
        let s = setup(0.3, 0.1, 4.0, 0.7);
        let th = Theta::from_array([0.1, 0.05, -0.02, 0.03, 0.1, 0.02, -0.01]);
        let g = rhs_g(&s, &th, 0.04, -0.03, 0.2).unwrap();
        let (sp, sm) = source_coeffs(&s, &th, 0.04, -0.03, 0.2).unwrap();
        assert_relative_eq!(sp + sm, 2.0 * g[0], epsilon = 1e-15);
        assert_relative_eq!(sp - sm, -2.0 * s.ell * g[1], epsilon = 1e-14);
        let sym = Theta { qi_avg: 0.0, zu_minus: 0.02, zu_minus_dot: -0.02, ..th };
        let (sp, sm) = source_coeffs(&s, &sym, 0.04, 0.04, 0.2).unwrap();
        assert_eq!(sp, -sm);
    }

    #[test]
    fn quadratic_terms_special_cases() {
        let s = setup(0.3, 0.1, 4.0, 0.7);
        let c = geometry_coeffs(&s, 0.0).unwrap();
        assert_eq!(quadratic_terms(&s, &c, 0.0, 0.0, 0.0, 0.0).unwrap(), [0.0; 4]);
        let q = quadratic_terms(&s, &c, 0.0, 0.07, 0.03, 0.03).unwrap();
        assert_eq!(q[0], 0.0);
        assert_eq!(q[2], q[3]);
    }

    /// Untriangularized system, (M, −L + εQ + f), with the sign of ½ζ̲±² in
    /// Q± chosen so that the triangularization reproduces the tilde forms.
    fn untriangularized(s: &PhysicalSetup<f64>, th: &Theta<f64>, rp: f64, rm: f64, f: f64) -> ([[f64; 4]; 4], [f64; 4]) {
        let (k, ell, eps) = (s.kappa, s.ell, s.epsilon);
        let c = geometry_coeffs(s, eps * th.delta).unwrap();
        let hp = 1.0 + eps * th.zu_plus;
        let hm = 1.0 + eps * th.zu_minus;
        let k2 = k * k;
        let m = [
            [c.alpha, 0.0, k2 / (2.0 * ell) / hp, -k2 / (2.0 * ell) / hm],
            [0.0, c.tau2, -0.5 * k2 / hp, -0.5 * k2 / hm],
            [-k, ell * k, k2, 0.0],
            [k, ell * k, 0.0, k2],
        ];
        let (q, dd) = (th.qi_avg, th.delta_dot);
        let up = (-ell * dd + q) / hp;
        let um = (ell * dd + q) / hm;
        let qi = -c.alpha_prime * q * dd - (up * up - um * um) / (4.0 * ell);
        let qd = c.beta * dd * dd + 0.5 * c.alpha_prime * q * q + 0.25 * (up * up + um * um);
        let qp = -0.5 * th.zu_plus.powi(2) - (-ell * dd + q).powi(2) / hp;
        let qm = -0.5 * th.zu_minus.powi(2) - (ell * dd + q).powi(2) / hm;
        let lhs = [
            (th.zu_plus - th.zu_minus) / (2.0 * ell),
            th.delta - 0.5 * (th.zu_plus + th.zu_minus),
            th.zu_plus,
            th.zu_minus,
        ];
        let rhs = [
            -lhs[0] + eps * qi,
            -lhs[1] + eps * qd + f,
            -lhs[2] + eps * qp + rp,
            -lhs[3] + eps * qm + rm,
        ];
        (m, rhs)
    }

    fn triangularizer(hp: f64, hm: f64, ell: f64) -> [[f64; 4]; 4] {
        [
            [1.0, 0.0, -1.0 / (2.0 * ell * hp), 1.0 / (2.0 * ell * hm)],
            [0.0, 1.0, 0.5 / hp, 0.5 / hm],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    #[test]
    fn quadratic_terms_match_triangularized_untilded_system() {
        let s = setup(0.3, 0.1, 4.0, 0.7);
        let th = Theta::from_array([0.1, 0.05, 0.0, 0.0, 0.0, 0.02, -0.01]);
        let (m, b) = untriangularized(&s, &th, 0.0, 0.0, 0.0);
        let p = triangularizer(1.0 + 0.3 * 0.02, 1.0 - 0.3 * 0.01, 4.0);
        let c = geometry_coeffs(&s, 0.0).unwrap();
        let cm = assemble_and_invert_m(&s, &c, 0.02, -0.01).unwrap();
        let pm = matmul(&p, &m);
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(pm[i][j], cm.m[i][j], epsilon = 1e-14);
            }
        }
        let pb: Vec<f64> = (0..4).map(|i| (0..4).map(|j| p[i][j] * b[j]).sum()).collect();
        let q = quadratic_terms(&s, &c, 0.1, 0.05, 0.02, -0.01).unwrap();
        let expect = [0.3 * q[0], -0.0 + 0.3 * q[1], -0.02 + 0.3 * q[2], 0.01 + 0.3 * q[3]];
        for i in 0..4 {
            assert_relative_eq!(pb[i], expect[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn control_force_linear_reduction() {
        let s = setup(0.0, 0.1, 4.0, 0.7);
        let traj = [0.04, 0.03, -0.02];
        let (rp, rm) = (0.01, 0.015);
        let f = control_force(&s, &[0.02, 0.0, 0.0, 0.01, 0.01], rp, rm, &traj).unwrap();
        let c = geometry_coeffs(&s, 0.0).unwrap();
        let a = c.alpha + s.kappa / s.ell;
        let d = -4.0 * a * (c.tau2 + s.kappa * s.ell);
        let expect = traj[0] - 0.5 * (rp + rm) - d / 4.0 / a * traj[2];
        assert_relative_eq!(f, expect, epsilon = 1e-15);
    }

    fn state_strategy() -> impl Strategy<Value = [f64; 7]> {
        proptest::array::uniform7(-0.2f64..0.2)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn explicit_inverse_is_inverse(th in state_strategy(), eps in 0.0f64..0.5, kappa2 in 0.01f64..0.5,
                                       ell in 0.25f64..6.0, h0 in 0.3f64..0.95) {
            let s = setup(eps, kappa2, ell, h0);
            let c = geometry_coeffs(&s, eps * th[4]).unwrap();
            let cm = assemble_and_invert_m(&s, &c, th[5], th[6]).unwrap();
            prop_assert!(cm.d < 0.0);
            prop_assert!(c.alpha_prime < 0.0 && c.alpha > 0.0 && c.tau2 > 0.0);
            prop_assert_eq!(cm.m[0][2], 0.0);
            prop_assert_eq!(cm.m[0][3], 0.0);
            prop_assert_eq!(cm.m[1][2], 0.0);
            prop_assert_eq!(cm.m[1][3], 0.0);
            let id = matmul(&cm.m, &cm.inv);
            for i in 0..4 {
                for j in 0..4 {
                    let e = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((id[i][j] - e).abs() <= 1e-12, "entry {} {}: {}", i, j, id[i][j]);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn triangularization_consistency(th in state_strategy(), rp in -0.2f64..0.2, rm in -0.2f64..0.2,
                                         f in -0.5f64..0.5, eps in 0.0f64..0.5) {
            let s = setup(eps, 0.1, 4.0, 0.7);
            let theta = Theta::from_array(th);
            let (m, b) = untriangularized(&s, &theta, rp, rm, f);
            let g = rhs_g(&s, &theta, rp, rm, f).unwrap();
            for i in 0..4 {
                let lhs: f64 = (0..4).map(|j| m[i][j] * g[j]).sum();
                prop_assert!((lhs - b[i]).abs() <= 1e-12, "row {}: {} vs {}", i, lhs, b[i]);
            }
        }

        #[test]
        fn symmetric_path_embeds(dd in -0.2f64..0.2, zpd in -0.2f64..0.2, d in -0.2f64..0.2, zp in -0.2f64..0.2,
                                 r in -0.2f64..0.2, f in -0.5f64..0.5, eps in 0.0f64..0.5) {
            let s = setup(eps, 0.1, 4.0, 0.7);
            let theta = Theta::from_array([0.0, dd, zpd, zpd, d, zp, zp]);
            let g = rhs_g(&s, &theta, r, r, f).unwrap();
            let h = rhs_g_symmetric(&s, &[dd, zpd, d, zp], r, f).unwrap();
            for (a, b) in [(g[1], h[0]), (g[2], h[1]), (g[4], h[2]), (g[5], h[3])] {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            prop_assert_eq!(g[0], 0.0);
        }

        #[test]
        fn forced_path_matches_free_rows(th in state_strategy(), rp in -0.2f64..0.2, rm in -0.2f64..0.2,
                                         eps in 0.0f64..0.5, traj in proptest::array::uniform3(-0.2f64..0.2)) {
            let s = setup(eps, 0.1, 4.0, 0.7);
            let t5 = [th[0], th[2], th[3], th[5], th[6]];
            let g5 = rhs_g_forced(&s, &t5, rp, rm, &traj).unwrap();
            // The control force makes the free system accelerate exactly like the prescription.
            let f = control_force(&s, &t5, rp, rm, &traj).unwrap();
            let theta = Theta::from_array([th[0], traj[1], th[2], th[3], traj[0], th[5], th[6]]);
            let g = rhs_g(&s, &theta, rp, rm, f).unwrap();
            prop_assert!((g[1] - traj[2]).abs() <= 1e-12);
            for (a, b) in [(g[0], g5[0]), (g[2], g5[1]), (g[3], g5[2]), (g[5], g5[3]), (g[6], g5[4])] {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn fixed_object_rows_without_newton(th in state_strategy(), rp in -0.2f64..0.2, rm in -0.2f64..0.2,
                                            eps in 0.0f64..0.5) {
            // δ ≡ 0: rows 1, 3, 4 of M̃ applied to (G₁, 0, G₂, G₃) reproduce the right-hand side.
            let s = setup(eps, 0.1, 4.0, 0.7);
            let t5 = [th[0], th[2], th[3], th[5], th[6]];
            let g5 = rhs_g_forced(&s, &t5, rp, rm, &[0.0; 3]).unwrap();
            let c = geometry_coeffs(&s, 0.0).unwrap();
            let cm = assemble_and_invert_m(&s, &c, th[5], th[6]).unwrap();
            let q = quadratic_terms(&s, &c, th[0], 0.0, th[5], th[6]).unwrap();
            let hp = 1.0 + eps * th[5];
            let hm = 1.0 + eps * th[6];
            let b = [eps * q[0] - (rp / hp - rm / hm) / 8.0, 0.0, -th[5] + eps * q[2] + rp, -th[6] + eps * q[3] + rm];
            let x = [g5[0], 0.0, g5[1], g5[2]];
            for i in [0usize, 2, 3] {
                let lhs: f64 = (0..4).map(|j| cm.m[i][j] * x[j]).sum();
                prop_assert!((lhs - b[i]).abs() <= 1e-12);
            }
        }
    }
}
