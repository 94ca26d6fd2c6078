use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Points used by composite Simpson quadrature over the object (odd count).
pub const SIMPSON_POINTS: usize = 401;

/// Equilibrium water depth below the object, h_eq(x) on [−ℓ, ℓ].
#[derive(Clone)]
pub enum DepthProfile<T: Real> {
    Constant(T),
    Profile(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: Real> DepthProfile<T> {
    pub fn profile(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        DepthProfile::Profile(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        match self {
            DepthProfile::Constant(h) => *h,
            DepthProfile::Profile(f) => f(x),
        }
    }

    pub fn as_constant(&self) -> Option<T> {
        match self {
            DepthProfile::Constant(h) => Some(*h),
            DepthProfile::Profile(_) => None,
        }
    }
}

impl<T: Real> fmt::Debug for DepthProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepthProfile::Constant(h) => write!(f, "Constant({h})"),
            DepthProfile::Profile(_) => write!(f, "Profile(<fn>)"),
        }
    }
}

/// Physical parameters of the wave-structure problem (dimensionless).
#[derive(Clone, Debug)]
pub struct PhysicalSetup<T: Real> {
    pub epsilon: T,
    pub kappa: T,
    pub ell: T,
    pub h_eq: DepthProfile<T>,
    pub mass: T,
}

impl<T: Real> PhysicalSetup<T> {
    pub fn new(epsilon: T, kappa: T, ell: T, h_eq: DepthProfile<T>) -> Result<Self> {
        if !(epsilon >= T::zero()) || !epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon must be >= 0, got {epsilon}")));
        }
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(Error::Config(format!("kappa must be > 0, got {kappa}")));
        }
        if !(ell > T::zero()) || !ell.is_finite() {
            return Err(Error::Config(format!("ell must be > 0, got {ell}")));
        }
        let mut setup = PhysicalSetup { epsilon, kappa, ell, h_eq, mass: T::zero() };
        setup.check_profile()?;
        setup.mass = match setup.h_eq.as_constant() {
            Some(h0) => T::one() - h0,
            None => setup.object_mean(|_, h| T::one() - h),
        };
        Ok(setup)
    }

    /// Builds a setup from μ = 3κ² instead of κ.
    pub fn from_mu(epsilon: T, mu: T, ell: T, h_eq: DepthProfile<T>) -> Result<Self> {
        if !(mu > T::zero()) {
            return Err(Error::Config(format!("mu must be > 0, got {mu}")));
        }
        Self::new(epsilon, (mu / lit(3.0)).sqrt(), ell, h_eq)
    }

    pub fn mu(&self) -> T {
        lit::<T>(3.0) * self.kappa * self.kappa
    }

    fn check_profile(&self) -> Result<()> {
        let n = SIMPSON_POINTS;
        for j in 0..n {
            let x = self.ell * (lit::<T>(2.0) * T::from_usize_lossy(j) / T::from_usize_lossy(n - 1) - T::one());
            let h = self.h_eq.eval(x);
            let hm = self.h_eq.eval(-x);
            if !(h > T::zero()) || !h.is_finite() {
                return Err(Error::Config(format!("h_eq must be positive, h_eq({x}) = {h}")));
            }
            if (h - hm).abs() > lit::<T>(1e-12).max(T::epsilon() * lit(16.0)) * h {
                return Err(Error::Config(format!("h_eq must be even, h_eq({x}) = {h} but h_eq(-x) = {hm}")));
            }
        }
        Ok(())
    }

    /// (1/2ℓ)∫_{−ℓ}^{ℓ} f(x, h_eq(x)) dx by composite Simpson.
    pub fn object_mean(&self, mut f: impl FnMut(T, T) -> T) -> T {
        let n = SIMPSON_POINTS - 1;
        let h = lit::<T>(2.0) * self.ell / T::from_usize_lossy(n);
        let mut acc = T::zero();
        for j in 0..=n {
            let x = -self.ell + h * T::from_usize_lossy(j);
            let w: T = if j == 0 || j == n {
                T::one()
            } else if j % 2 == 1 {
                lit(4.0)
            } else {
                lit(2.0)
            };
            acc += w * f(x, self.h_eq.eval(x));
        }
        acc * h / lit(3.0) / (lit::<T>(2.0) * self.ell)
    }
}
