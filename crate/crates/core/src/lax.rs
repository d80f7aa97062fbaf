//! Lax-pair matrices built from sampled field data, their Laurent
//! coefficients in `k`, and the gridded Cauchy data they are evaluated from.

use crate::algebra::{build_p, invert_p, Mat3, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::grid::{self, UniformGrid};

/// Field values and derivatives at a single point of the quarter plane.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FieldPoint {
    pub u: f64,
    pub v: f64,
    pub ux: f64,
    pub uxx: f64,
    pub vx: f64,
}

impl FieldPoint {
    pub fn is_finite(&self) -> bool {
        [self.u, self.v, self.ux, self.uxx, self.vx].iter().all(|f| f.is_finite())
    }
}

/// Undressed x-coefficient: only the third row `(−u_x − v, −2u, 0)` is nonzero.
pub fn x_potential(p: &FieldPoint) -> Mat3 {
    let mut e = Mat3::zeros();
    e[(2, 0)] = C64::from(-p.ux - p.v);
    e[(2, 1)] = C64::from(-2.0 * p.u);
    e
}

/// Undressed t-coefficient (lower triangular, traceless).
pub fn t_potential(p: &FieldPoint) -> Mat3 {
    let c = |f: f64| C64::from(f);
    Mat3::new(
        c(4.0 * p.u / 3.0),
        ZERO,
        ZERO,
        c(p.ux / 3.0 - p.v),
        c(-2.0 * p.u / 3.0),
        ZERO,
        c(p.uxx / 3.0 - p.vx),
        c(-p.ux / 3.0 - p.v),
        c(-2.0 * p.u / 3.0),
    )
}

/// `𝖴(k) = P(k)⁻¹ E P(k)`.
pub fn build_u(p: &FieldPoint, k: C64) -> Result<Mat3> {
    let pinv = invert_p(k).map_err(|_| Error::SingularPoint("U(k)"))?;
    Ok(pinv * x_potential(p) * build_p(k))
}

/// `𝖵(k) = P(k)⁻¹ F P(k)`.
pub fn build_v(p: &FieldPoint, k: C64) -> Result<Mat3> {
    let pinv = invert_p(k).map_err(|_| Error::SingularPoint("V(k)"))?;
    Ok(pinv * t_potential(p) * build_p(k))
}

/// `P(1)`: writing `P(k) = diag(1, k, k²)·P(1)` turns the conjugation into a
/// rescaling of the entries by powers of `k`.
fn dft() -> (Mat3, Mat3) {
    (build_p(ONE), invert_p(ONE).expect("P(1) is invertible"))
}

/// Powers of `k` picked up by entry `(i, j)` under the conjugation.
fn split_by_power(m: &Mat3) -> [Mat3; 3] {
    let mut parts = [Mat3::zeros(), Mat3::zeros(), Mat3::zeros()];
    for i in 0..3 {
        for j in 0..=i {
            parts[i - j][(i, j)] = m[(i, j)];
        }
    }
    for i in 0..3 {
        for j in i + 1..3 {
            assert!(m[(i, j)] == ZERO, "potential must be lower triangular");
        }
    }
    parts
}

/// `(U1, U2)` with `𝖴 = U1/k + U2/k²`.
pub fn laurent_u(p: &FieldPoint) -> (Mat3, Mat3) {
    let (o, oinv) = dft();
    let parts = split_by_power(&x_potential(p));
    (oinv * parts[1] * o, oinv * parts[2] * o)
}

/// `(V0, V1, V2)` with `𝖵 = V0 + V1/k + V2/k²`.
pub fn laurent_v(p: &FieldPoint) -> (Mat3, Mat3, Mat3) {
    let (o, oinv) = dft();
    let parts = split_by_power(&t_potential(p));
    (oinv * parts[0] * o, oinv * parts[1] * o, oinv * parts[2] * o)
}

/// Default decay threshold on the last tenth of an initial profile.
pub const DECAY_THRESHOLD: f64 = 1e-10;

/// Uniformly gridded data on `x ∈ [0, X_max]` at a fixed time, with
/// fourth-order finite-difference derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialProfile {
    pub grid: UniformGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub ux: Vec<f64>,
    pub uxx: Vec<f64>,
    pub vx: Vec<f64>,
}

impl InitialProfile {
    /// Builds the profile and enforces the tail-decay invariant.
    pub fn new(xs: &[f64], u: Vec<f64>, v: Vec<f64>, decay_threshold: f64) -> Result<Self> {
        let p = Self::unchecked(xs, u, v)?;
        p.check_decay(decay_threshold)?;
        Ok(p)
    }

    /// Builds the profile without the decay check.
    pub fn unchecked(xs: &[f64], u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let grid = UniformGrid::from_samples(xs)?;
        if u.len() != xs.len() || v.len() != xs.len() {
            return Err(Error::InvalidInput("profile columns have different lengths".into()));
        }
        if u.iter().chain(v.iter()).any(|f| !f.is_finite()) {
            return Err(Error::InvalidInput("profile contains non-finite samples".into()));
        }
        if grid.start.abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("profile must start at x = 0, got {}", grid.start)));
        }
        let ux = grid::first_derivative(&u, grid.step);
        let uxx = grid::second_derivative(&u, grid.step);
        let vx = grid::first_derivative(&v, grid.step);
        Ok(InitialProfile { grid, u, v, ux, uxx, vx })
    }

    pub fn from_fn(x_max: f64, len: usize, u: impl Fn(f64) -> f64, v: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = UniformGrid::new(0.0, x_max, len)?;
        let xs = grid.points();
        let us = xs.iter().map(|&x| u(x)).collect();
        let vs = xs.iter().map(|&x| v(x)).collect();
        Self::new(&xs, us, vs, DECAY_THRESHOLD)
    }

    pub fn zero(x_max: f64, len: usize) -> Result<Self> {
        Self::from_fn(x_max, len, |_| 0.0, |_| 0.0)
    }

    pub fn x_max(&self) -> f64 {
        self.grid.end()
    }

    /// Largest `|u|`, `|v|` over the last tenth of the grid.
    pub fn tail_magnitude(&self) -> f64 {
        let from = self.grid.len - (self.grid.len / 10).max(1);
        self.u[from..].iter().chain(&self.v[from..]).fold(0.0f64, |m, f| m.max(f.abs()))
    }

    pub fn check_decay(&self, threshold: f64) -> Result<()> {
        let tail = self.tail_magnitude();
        if tail > threshold {
            return Err(Error::InvalidInput(format!(
                "profile does not decay: tail magnitude {tail:.3e} exceeds {threshold:.1e}"
            )));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().chain(&self.v).all(|f| *f == 0.0)
    }

    /// Interpolated field point at `x`.
    pub fn at(&self, x: f64) -> FieldPoint {
        let (b, w) = self.grid.weights(x);
        FieldPoint {
            u: grid::apply(&self.u, b, &w),
            v: grid::apply(&self.v, b, &w),
            ux: grid::apply(&self.ux, b, &w),
            uxx: grid::apply(&self.uxx, b, &w),
            vx: grid::apply(&self.vx, b, &w),
        }
    }
}

/// Traces at `x = 0` on a uniform grid of `t ∈ [0, T]`. `v_x(0, t)` is not an
/// input: it is recovered from `u_t = v_x` as `dũ₀/dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProfile {
    pub grid: UniformGrid,
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub v0: Vec<f64>,
    pub vx: Vec<f64>,
}

impl BoundaryProfile {
    pub fn new(ts: &[f64], u0: Vec<f64>, u1: Vec<f64>, u2: Vec<f64>, v0: Vec<f64>) -> Result<Self> {
        let grid = UniformGrid::from_samples(ts)?;
        if [&u0, &u1, &u2, &v0].iter().any(|c| c.len() != ts.len()) {
            return Err(Error::InvalidInput("boundary columns have different lengths".into()));
        }
        if u0.iter().chain(&u1).chain(&u2).chain(&v0).any(|f| !f.is_finite()) {
            return Err(Error::InvalidInput("boundary profile contains non-finite samples".into()));
        }
        if grid.start.abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("boundary profile must start at t = 0, got {}", grid.start)));
        }
        let vx = grid::first_derivative(&u0, grid.step);
        Ok(BoundaryProfile { grid, u0, u1, u2, v0, vx })
    }

    pub fn zero(t_end: f64, len: usize) -> Result<Self> {
        let grid = UniformGrid::new(0.0, t_end, len)?;
        let z = vec![0.0; len];
        Self::new(&grid.points(), z.clone(), z.clone(), z.clone(), z)
    }

    pub fn t_end(&self) -> f64 {
        self.grid.end()
    }

    pub fn is_zero(&self) -> bool {
        self.u0.iter().chain(&self.u1).chain(&self.u2).chain(&self.v0).all(|f| *f == 0.0)
    }

    pub fn at(&self, t: f64) -> FieldPoint {
        let (b, w) = self.grid.weights(t);
        FieldPoint {
            u: grid::apply(&self.u0, b, &w),
            v: grid::apply(&self.v0, b, &w),
            ux: grid::apply(&self.u1, b, &w),
            uxx: grid::apply(&self.u2, b, &w),
            vx: grid::apply(&self.vx, b, &w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{approx_eq, matrix_a, matrix_b, OMEGA};

    fn sample() -> FieldPoint {
        FieldPoint { u: 0.31, v: -0.72, ux: 1.4, uxx: -0.25, vx: 0.6 }
    }

    fn ks() -> Vec<C64> {
        vec![ONE, C64::new(0.0, 2.0), C64::new(-3.0, 0.0), C64::new(0.4, -1.1), C64::new(-2.2, 0.9)]
    }

    #[test]
    fn zero_fields_give_zero_matrices() {
        let p = FieldPoint::default();
        for k in ks() {
            assert_eq!(build_u(&p, k).unwrap(), Mat3::zeros());
            assert_eq!(build_v(&p, k).unwrap(), Mat3::zeros());
        }
        assert!(build_u(&p, ZERO).is_err());
        assert!(build_v(&p, ZERO).is_err());
    }

    #[test]
    fn unit_u_matches_triple_product() {
        let p = FieldPoint { u: 1.0, ..Default::default() };
        let mut e = Mat3::zeros();
        e[(2, 1)] = C64::from(-2.0);
        let expected = invert_p(ONE).unwrap() * e * build_p(ONE);
        assert!(approx_eq(&build_u(&p, ONE).unwrap(), &expected, 1e-15));
    }

    #[test]
    fn unit_v_matches_triple_product() {
        let p = FieldPoint { v: 1.0, ..Default::default() };
        let mut e = Mat3::zeros();
        e[(1, 0)] = C64::from(-1.0);
        e[(2, 1)] = C64::from(-1.0);
        let expected = invert_p(ONE).unwrap() * e * build_p(ONE);
        assert!(approx_eq(&build_v(&p, ONE).unwrap(), &expected, 1e-15));
    }

    #[test]
    fn v_is_traceless() {
        for k in ks() {
            assert!(build_v(&sample(), k).unwrap().trace().norm() < 1e-13);
        }
    }

    #[test]
    fn rotation_and_conjugation_identities() {
        let (a, b) = (matrix_a(), matrix_b());
        for k in ks() {
            for build in [build_u, build_v] {
                let m = build(&sample(), k).unwrap();
                let rot = build(&sample(), OMEGA * k).unwrap();
                assert!(approx_eq(&rot, &(a.transpose() * m * a), 1e-12));
                let conj = build(&sample(), k.conj()).unwrap();
                assert!(approx_eq(&conj, &(b * m.map(|z| z.conj()) * b), 1e-12));
            }
        }
    }

    #[test]
    fn laurent_coefficients_reproduce_the_matrices() {
        let p = sample();
        let (u1, u2) = laurent_u(&p);
        let (v0, v1, v2) = laurent_v(&p);
        for k in ks() {
            let uk = u1 / k + u2 / (k * k);
            let vk = v0 + v1 / k + v2 / (k * k);
            assert!(approx_eq(&uk, &build_u(&p, k).unwrap(), 1e-12));
            assert!(approx_eq(&vk, &build_v(&p, k).unwrap(), 1e-12));
        }
        let (z1, z2) = laurent_u(&FieldPoint::default());
        assert_eq!(z1 + z2, Mat3::zeros());
    }

    #[test]
    fn profile_derivatives_are_fourth_order() {
        let f = |x: f64| (-(x - 3.0) * (x - 3.0)).exp();
        let f2 = |x: f64| (4.0 * (x - 3.0) * (x - 3.0) - 2.0) * f(x);
        let err = |n: usize| {
            let p = InitialProfile::from_fn(12.0, n, f, |_| 0.0).unwrap();
            p.grid
                .points()
                .iter()
                .zip(&p.uxx)
                .fold(0.0f64, |m, (&x, &d)| m.max((d - f2(x)).abs()))
        };
        let (e1, e2) = (err(241), err(481));
        let order = (e1 / e2).log2();
        assert!(order > 3.7, "observed order {order} ({e1:.2e} -> {e2:.2e})");
    }

    #[test]
    fn decay_violation_is_an_error() {
        let r = InitialProfile::from_fn(10.0, 101, |x| (-(x - 9.0).powi(2)).exp(), |_| 0.0);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn boundary_vx_follows_time_derivative() {
        let ts: Vec<f64> = (0..201).map(|i| i as f64 / 200.0).collect();
        let u0: Vec<f64> = ts.iter().map(|t| (2.0 * t).sin()).collect();
        let z = vec![0.0; ts.len()];
        let b = BoundaryProfile::new(&ts, u0, z.clone(), z.clone(), z).unwrap();
        for (t, vx) in ts.iter().zip(&b.vx) {
            assert!((vx - 2.0 * (2.0 * t).cos()).abs() < 1e-8);
        }
    }
}
