use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Two-component exterior grid. Each half-line holds cells k = 1..N (distance
/// order from the object) centered at distance ℓ + kΔx, plus the boundary
/// cell at ℓ of width Δx/2. The left component mirrors the right one.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T: Real> {
    pub ell: T,
    pub l_outer: T,
    pub n: usize,
    pub dx: T,
}

impl<T: Real> Grid<T> {
    /// Δx = (L − ℓ)/(N + 1), so that the outer node N + 1 sits exactly at L.
    pub fn build(l_outer: T, ell: T, n: usize) -> Result<Self> {
        if !(ell > T::zero()) || !(l_outer > ell) || !l_outer.is_finite() {
            return Err(Error::Config(format!("need L > ell > 0, got L = {l_outer}, ell = {ell}")));
        }
        if n < 4 {
            return Err(Error::Config(format!("need N >= 4 cells per side, got {n}")));
        }
        let dx = (l_outer - ell) / T::from_usize_lossy(n + 1);
        Ok(Grid { ell, l_outer, n, dx })
    }

    /// Grid with a prescribed cell width; L follows as ℓ + (N + 1)Δx.
    pub fn with_dx(ell: T, dx: T, n: usize) -> Result<Self> {
        if !(dx > T::zero()) {
            return Err(Error::Config(format!("dx must be > 0, got {dx}")));
        }
        Self::build(ell + dx * T::from_usize_lossy(n + 1), ell, n)
    }

    /// Distance-order coordinate of cell k on the right half-line (k = 0 is the
    /// boundary node at ℓ, k = N + 1 the outer node at L).
    #[inline]
    pub fn x_right(&self, k: usize) -> T {
        if k == self.n + 1 {
            return self.l_outer;
        }
        self.ell + T::from_usize_lossy(k) * self.dx
    }

    #[inline]
    pub fn x_left(&self, k: usize) -> T {
        -self.x_right(k)
    }

    /// Cell faces on the right half-line, x_{k−1/2} for k = 1..=N+1.
    pub fn faces_right(&self) -> Vec<T> {
        (1..=self.n + 1)
            .map(|k| self.ell + (T::from_usize_lossy(k) - lit(0.5)) * self.dx)
            .collect()
    }

    pub fn centers_right(&self) -> Vec<T> {
        (1..=self.n).map(|k| self.x_right(k)).collect()
    }

    /// Every stored node in increasing x: left cells, −ℓ, ℓ, right cells.
    pub fn nodes_physical(&self) -> Vec<T> {
        let mut xs = Vec::with_capacity(2 * self.n + 2);
        xs.extend((0..=self.n).rev().map(|k| self.x_left(k)));
        xs.extend((0..=self.n).map(|k| self.x_right(k)));
        xs
    }

    /// Width attached to stored index k in volume sums.
    #[inline]
    pub fn width(&self, k: usize) -> T {
        if k == 0 {
            self.dx * lit(0.5)
        } else {
            self.dx
        }
    }
}
