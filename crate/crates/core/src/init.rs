//! Initial data consistent with the compatibility conditions.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{lit, Real};
use crate::setup::PhysicalSetup;
use crate::state::{State, Theta};

/// Largest violation of the compatibility conditions tolerated for a
/// user-supplied Θ⁰.
pub const COMPAT_TOL: f64 = 1e-10;

/// How the object's initial state is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ObjectInit<T: Real> {
    /// δ⁰ given, δ̇⁰ deduced from the discharge jump.
    Displaced { delta: T },
    /// δ⁰ and δ̇⁰ given; δ̇⁰ must agree with the discharge jump.
    Moving { delta: T, delta_dot: T },
    /// Full Θ⁰ supplied; checked against the field.
    Explicit(Theta<T>),
}

/// Samples (ζ^in, q^in) on every node and builds Θ⁰ from the discrete
/// compatibility conditions.
pub fn init_from_scenario<T: Real>(
    setup: &PhysicalSetup<T>,
    grid: &Grid<T>,
    zeta_in: &dyn Fn(T) -> T,
    q_in: &dyn Fn(T) -> T,
    object: ObjectInit<T>,
) -> Result<(State<T>, Theta<T>)> {
    let n = grid.n;
    let mut state = State::zeros(n);
    for k in 0..=n {
        let (xp, xm) = (grid.x_right(k), grid.x_left(k));
        state.plus.zeta[k] = zeta_in(xp);
        state.plus.q[k] = q_in(xp);
        state.minus.zeta[k] = zeta_in(xm);
        state.minus.q[k] = q_in(xm);
    }
    let derived = compatible_theta(setup, grid, &state, T::zero());
    let theta = match object {
        ObjectInit::Displaced { delta } => Theta { delta, ..derived },
        ObjectInit::Moving { delta, delta_dot } => {
            if (delta_dot - derived.delta_dot).abs() > lit(COMPAT_TOL) {
                return Err(Error::Config(format!(
                    "delta_dot = {delta_dot} contradicts the discharge jump (needs {})",
                    derived.delta_dot
                )));
            }
            Theta { delta, delta_dot, ..derived }
        }
        ObjectInit::Explicit(th) => {
            let r = compatibility_residual(setup, grid, &state, &th);
            if r > lit(COMPAT_TOL) {
                return Err(Error::Config(format!("initial Theta violates compatibility by {r:e}")));
            }
            th
        }
    };
    for z in [theta.zu_plus, theta.zu_minus] {
        if !(T::one() + setup.epsilon * z > T::zero()) {
            return Err(Error::Physical(format!("dry initial contact point, zeta = {z}")));
        }
    }
    if !(state.min_depth(setup.epsilon) > T::zero()) {
        return Err(Error::Physical("initial water depth is not positive".into()));
    }
    Ok((state, theta))
}

/// One-sided second-order ∂ₓq at +ℓ and −ℓ from the stored nodes.
pub fn boundary_dqdx<T: Real>(grid: &Grid<T>, state: &State<T>) -> (T, T) {
    let two_dx = lit::<T>(2.0) * grid.dx;
    let p = &state.plus.q;
    let m = &state.minus.q;
    let plus = (-lit::<T>(3.0) * p[0] + lit::<T>(4.0) * p[1] - p[2]) / two_dx;
    let minus = (lit::<T>(3.0) * m[0] - lit::<T>(4.0) * m[1] + m[2]) / two_dx;
    (plus, minus)
}

fn compatible_theta<T: Real>(setup: &PhysicalSetup<T>, grid: &Grid<T>, state: &State<T>, delta: T) -> Theta<T> {
    let (qp, qm) = (state.plus.q[0], state.minus.q[0]);
    let (dp, dm) = boundary_dqdx(grid, state);
    Theta {
        qi_avg: (qp + qm) * lit(0.5),
        delta_dot: -(qp - qm) / (lit::<T>(2.0) * setup.ell),
        zu_plus_dot: -dp,
        zu_minus_dot: -dm,
        delta,
        zu_plus: state.plus.zeta[0],
        zu_minus: state.minus.zeta[0],
    }
}

/// Max violation of the discrete compatibility conditions.
pub fn compatibility_residual<T: Real>(setup: &PhysicalSetup<T>, grid: &Grid<T>, state: &State<T>, theta: &Theta<T>) -> T {
    let c = compatible_theta(setup, grid, state, theta.delta);
    let d = [
        c.qi_avg - theta.qi_avg,
        c.delta_dot - theta.delta_dot,
        c.zu_plus_dot - theta.zu_plus_dot,
        c.zu_minus_dot - theta.zu_minus_dot,
        c.zu_plus - theta.zu_plus,
        c.zu_minus - theta.zu_minus,
    ];
    d.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}
