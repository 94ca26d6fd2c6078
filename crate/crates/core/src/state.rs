use crate::grid::Grid;
use crate::scalar::{lit, Real};

/// One exterior component in distance order. Index 0 is the boundary cell at
/// ±ℓ, index k ≥ 1 the k-th cell away from the object. Values are physical
/// (not mirrored), so on the left side q keeps its sign convention.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfLine<T: Real> {
    pub zeta: Vec<T>,
    pub q: Vec<T>,
}

impl<T: Real> HalfLine<T> {
    pub fn zeros(n: usize) -> Self {
        HalfLine { zeta: vec![T::zero(); n + 1], q: vec![T::zero(); n + 1] }
    }

    pub fn n(&self) -> usize {
        self.zeta.len() - 1
    }
}

/// Exterior wave field on both components.
#[derive(Clone, Debug, PartialEq)]
pub struct State<T: Real> {
    pub plus: HalfLine<T>,
    pub minus: HalfLine<T>,
}

impl<T: Real> State<T> {
    pub fn zeros(n: usize) -> Self {
        State { plus: HalfLine::zeros(n), minus: HalfLine::zeros(n) }
    }

    pub fn n(&self) -> usize {
        self.plus.n()
    }

    /// Smallest water depth 1 + εζ over all stored cells.
    pub fn min_depth(&self, epsilon: T) -> T {
        self.plus
            .zeta
            .iter()
            .chain(self.minus.zeta.iter())
            .fold(T::infinity(), |m, &z| m.min(T::one() + epsilon * z))
    }

    /// (x, ζ, q) in increasing x.
    pub fn physical_rows(&self, grid: &Grid<T>) -> Vec<(T, T, T)> {
        let n = self.n();
        let mut rows = Vec::with_capacity(2 * n + 2);
        for k in (0..=n).rev() {
            rows.push((grid.x_left(k), self.minus.zeta[k], self.minus.q[k]));
        }
        for k in 0..=n {
            rows.push((grid.x_right(k), self.plus.zeta[k], self.plus.q[k]));
        }
        rows
    }
}

/// Coupling vector Θ = (⟨q_i⟩, δ̇, ζ̲̇₊, ζ̲̇₋, δ, ζ̲₊, ζ̲₋).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Theta<T: Real> {
    pub qi_avg: T,
    pub delta_dot: T,
    pub zu_plus_dot: T,
    pub zu_minus_dot: T,
    pub delta: T,
    pub zu_plus: T,
    pub zu_minus: T,
}

impl<T: Real> Theta<T> {
    pub fn zero() -> Self {
        Self::from_array([T::zero(); 7])
    }

    pub fn to_array(&self) -> [T; 7] {
        [
            self.qi_avg,
            self.delta_dot,
            self.zu_plus_dot,
            self.zu_minus_dot,
            self.delta,
            self.zu_plus,
            self.zu_minus,
        ]
    }

    pub fn from_array(a: [T; 7]) -> Self {
        Theta {
            qi_avg: a[0],
            delta_dot: a[1],
            zu_plus_dot: a[2],
            zu_minus_dot: a[3],
            delta: a[4],
            zu_plus: a[5],
            zu_minus: a[6],
        }
    }

    /// θ + h·g, componentwise.
    pub fn axpy(&self, h: T, g: &[T; 7]) -> Self {
        let mut a = self.to_array();
        for (ai, gi) in a.iter_mut().zip(g) {
            *ai += h * *gi;
        }
        Self::from_array(a)
    }

    /// Boundary discharges q_{0±} = Θ₁ ∓ ℓΘ₂.
    #[inline]
    pub fn boundary_discharge(&self, ell: T) -> (T, T) {
        (self.qi_avg - ell * self.delta_dot, self.qi_avg + ell * self.delta_dot)
    }
}

/// Discrete volume: Σ ζ·(cell width) over both components + 2ℓδ.
pub fn volume<T: Real>(state: &State<T>, theta: &Theta<T>, grid: &Grid<T>) -> T {
    let mut v = T::zero();
    for side in [&state.plus, &state.minus] {
        for (k, z) in side.zeta.iter().enumerate() {
            v += grid.width(k) * *z;
        }
    }
    v + lit::<T>(2.0) * grid.ell * theta.delta
}
