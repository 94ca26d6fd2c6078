//! Discrete inverse R₁ of (1 − κ²∂ₓ²) on one exterior component, with the
//! second-order Neumann rows at the object and at the outer end.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Prefactored tridiagonal system for one half-line. Both components share the
/// same matrix, so one workspace serves both.
#[derive(Clone, Debug)]
pub struct HelmholtzWorkspace<T: Real> {
    pub kappa: T,
    pub dx: T,
    n: usize,
    r: T,
    /// Modified super-diagonal c'_i of the forward sweep.
    cp: Vec<T>,
    /// 1 / (b_i − a_i c'_{i−1}).
    inv_piv: Vec<T>,
}

impl<T: Real> HelmholtzWorkspace<T> {
    pub fn new(kappa: T, dx: T, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Size { expected: 2, got: n });
        }
        if !(kappa > T::zero()) || !(dx > T::zero()) {
            return Err(Error::Config(format!("need kappa > 0 and dx > 0, got {kappa}, {dx}")));
        }
        let r = kappa * kappa / (dx * dx);
        let mut ws = HelmholtzWorkspace { kappa, dx, n, r, cp: vec![T::zero(); n], inv_piv: vec![T::zero(); n] };
        let mut prev_cp = T::zero();
        for i in 0..n {
            let (a, b, c) = ws.row(i);
            let piv = b - a * prev_cp;
            ws.inv_piv[i] = T::one() / piv;
            ws.cp[i] = c * ws.inv_piv[i];
            prev_cp = ws.cp[i];
        }
        Ok(ws)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// (sub, diag, super) of row i (0-based cell index i + 1).
    #[inline]
    pub fn row(&self, i: usize) -> (T, T, T) {
        let r = self.r;
        let two3 = lit::<T>(2.0) / lit(3.0);
        if i == 0 {
            (T::zero(), T::one() + two3 * r, -two3 * r)
        } else if i == self.n - 1 {
            (-two3 * r, T::one() + two3 * r, T::zero())
        } else {
            (-r, T::one() + lit::<T>(2.0) * r, -r)
        }
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::Size { expected: self.n, got: len });
        }
        Ok(())
    }

    /// Solves R₁: writes V with (1 − κ²D²)V = F into `v`.
    pub fn solve_into(&self, f: &[T], v: &mut [T]) -> Result<()> {
        self.check(f.len())?;
        self.check(v.len())?;
        let n = self.n;
        v[0] = f[0] * self.inv_piv[0];
        for i in 1..n {
            let (a, _, _) = self.row(i);
            v[i] = (f[i] - a * v[i - 1]) * self.inv_piv[i];
        }
        for i in (0..n - 1).rev() {
            v[i] -= self.cp[i] * v[i + 1];
        }
        Ok(())
    }

    pub fn solve_r1(&self, f: &[T]) -> Result<Vec<T>> {
        let mut v = vec![T::zero(); f.len()];
        self.solve_into(f, &mut v)?;
        Ok(v)
    }

    /// Forward operator, the same stencil the solve inverts.
    pub fn apply_helmholtz(&self, v: &[T]) -> Result<Vec<T>> {
        self.check(v.len())?;
        let n = self.n;
        Ok((0..n)
            .map(|i| {
                let (a, b, c) = self.row(i);
                let mut s = b * v[i];
                if i > 0 {
                    s += a * v[i - 1];
                }
                if i + 1 < n {
                    s += c * v[i + 1];
                }
                s
            })
            .collect())
    }
}

/// Second-order trace at the object, (4/3)v₁ − (1/3)v₂.
#[inline]
pub fn trace_r1<T: Real>(v: &[T]) -> T {
    (lit::<T>(4.0) * v[0] - v[1]) / lit(3.0)
}

/// Same formula at the outer end of the half-line.
#[inline]
pub fn far_trace_r1<T: Real>(v: &[T]) -> T {
    let n = v.len();
    (lit::<T>(4.0) * v[n - 1] - v[n - 2]) / lit(3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Dense Gaussian elimination with partial pivoting on the assembled matrix.
    fn dense_solve(ws: &HelmholtzWorkspace<f64>, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let mut a = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            let (lo, d, up) = ws.row(i);
            if i > 0 {
                a[i][i - 1] = lo;
            }
            a[i][i] = d;
            if i + 1 < n {
                a[i][i + 1] = up;
            }
            a[i][n] = f[i];
        }
        for col in 0..n {
            let p = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
            a.swap(col, p);
            for r in col + 1..n {
                let m = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= m * a[col][c];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (a[i][n] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn constants_are_preserved() {
        let ws = HelmholtzWorkspace::new(0.3_f64, 0.05, 50).unwrap();
        let v = ws.solve_r1(&vec![2.5; 50]).unwrap();
        for x in v {
            assert_relative_eq!(x, 2.5, max_relative = 1e-14);
        }
        assert_eq!(ws.apply_helmholtz(&vec![1.0; 50]).unwrap(), vec![1.0; 50]);
    }

    #[test]
    fn impulse_matches_dense_green_column() {
        let ws = HelmholtzWorkspace::new(0.316228_f64, 0.1, 20).unwrap();
        let mut f = vec![0.0; 20];
        f[4] = 1.0;
        let v = ws.solve_r1(&f).unwrap();
        let d = dense_solve(&ws, &f);
        for (a, b) in v.iter().zip(&d) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn boundary_row_by_hand() {
        let ws = HelmholtzWorkspace::new(0.1_f64, 0.5, 6).unwrap();
        let mut v = vec![0.0; 6];
        v[0] = 1.0;
        let f = ws.apply_helmholtz(&v).unwrap();
        assert_relative_eq!(f[0], 1.0 + 0.01 * (2.0 / 3.0) / 0.25, epsilon = 1e-15);
        assert_relative_eq!(f[0], 1.026667, epsilon = 1e-6);
    }

    #[test]
    fn trace_arithmetic() {
        assert_eq!(trace_r1(&[1.0_f64, 4.0, 9.0]), 0.0);
        assert_relative_eq!(trace_r1(&[3.0_f64, 3.0]), 3.0);
        assert_relative_eq!(far_trace_r1(&[0.0_f64, 4.0, 1.0]), 0.0);
    }

    #[test]
    fn trace_is_second_order() {
        // u(x) = cos(π(x − ℓ)/(L − ℓ)) has u'(ℓ) = 0 and u(ℓ) = 1.
        let (ell, big_l) = (1.0_f64, 3.0);
        let mut errs = Vec::new();
        for n in [20usize, 40, 80, 160] {
            let dx = (big_l - ell) / (n as f64 + 1.0);
            let v: Vec<f64> = (1..=n)
                .map(|k| (std::f64::consts::PI * k as f64 * dx / (big_l - ell)).cos())
                .collect();
            errs.push((trace_r1(&v) - 1.0).abs());
        }
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            // even about ℓ, so the observed rate is 4; second order is the guarantee
            assert!(rate > 1.9, "rate {rate}");
        }
    }

    #[test]
    fn sizes_are_checked() {
        let ws = HelmholtzWorkspace::new(0.3_f64, 0.1, 8).unwrap();
        assert!(ws.solve_r1(&[1.0; 7]).is_err());
        assert!(ws.apply_helmholtz(&[1.0; 9]).is_err());
        assert!(HelmholtzWorkspace::new(0.3_f64, 0.1, 1).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let ws = HelmholtzWorkspace::new(0.3_f32, 0.1, 16).unwrap();
        let v = ws.solve_r1(&[1.0_f32; 16]).unwrap();
        assert!(v.iter().all(|x| (x - 1.0).abs() < 1e-5));
    }

    proptest! {
        #[test]
        fn round_trip(n in 4usize..=256, kappa in 0.05f64..1.0, r in 0.01f64..1000.0,
                      seed in proptest::collection::vec(-10.0f64..10.0, 256)) {
            let ws = HelmholtzWorkspace::new(kappa, kappa / r.sqrt(), n).unwrap();
            let f = &seed[..n];
            let v = ws.solve_r1(f).unwrap();
            let back = ws.apply_helmholtz(&v).unwrap();
            let fmax = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (a, b) in back.iter().zip(f) {
                prop_assert!((a - b).abs() <= 1e-12 * fmax.max(1e-300));
            }
        }

        #[test]
        fn agrees_with_dense_solve(n in 4usize..=40, kappa in 0.05f64..1.0, dx in 0.01f64..0.5,
                                   seed in proptest::collection::vec(-1.0f64..1.0, 40)) {
            let ws = HelmholtzWorkspace::new(kappa, dx, n).unwrap();
            let f = &seed[..n];
            let v = ws.solve_r1(f).unwrap();
            let d = dense_solve(&ws, f);
            for (a, b) in v.iter().zip(&d) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn maximum_principle(n in 4usize..=128, kappa in 0.05f64..1.0, dx in 0.005f64..0.5,
                             seed in proptest::collection::vec(0.0f64..5.0, 128)) {
            let ws = HelmholtzWorkspace::new(kappa, dx, n).unwrap();
            let v = ws.solve_r1(&seed[..n]).unwrap();
            prop_assert!(v.iter().all(|&x| x >= 0.0));
        }
    }
}
