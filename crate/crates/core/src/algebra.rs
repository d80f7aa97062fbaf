//! Cube-root-of-unity algebra, the diagonalising matrix `P(k)`, the exponents
//! `l_j`, `z_j`, `θ_ij`, the twelve-ray geometry of the spectral plane and the
//! two discrete symmetries shared by every other module.

use std::f64::consts::PI;

use nalgebra::{Matrix3, RowVector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
/// Universal 3×3 complex container (Lax matrices, eigenfunctions, jumps).
pub type Mat3 = Matrix3<C64>;
/// Row vector used for the solution of the vector Riemann–Hilbert problem.
pub type Row3 = RowVector3<C64>;

pub const SQRT3: f64 = 1.732_050_807_568_877_2;
pub const OMEGA: C64 = C64::new(-0.5, 0.5 * SQRT3);
pub const OMEGA2: C64 = C64::new(-0.5, -0.5 * SQRT3);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default absolute tolerance for matrix equality.
pub const MATRIX_TOL: f64 = 1e-10;
/// Angular tolerance (radians) for deciding that a point lies on a ray.
pub const RAY_TOL: f64 = 1e-12;

/// `ω^n` for any integer `n`.
pub fn omega_pow(n: i64) -> C64 {
    match n.rem_euclid(3) {
        0 => ONE,
        1 => OMEGA,
        _ => OMEGA2,
    }
}

/// `(l_1, l_2, l_3)` and `(z_1, z_2, z_3)` with `l_j = ω^j k`, `z_j = ω^{2j} k²`.
pub fn lz_values(k: C64) -> ([C64; 3], [C64; 3]) {
    let k2 = k * k;
    let l = [OMEGA * k, OMEGA2 * k, k];
    let z = [OMEGA2 * k2, OMEGA * k2, k2];
    (l, z)
}

/// `θ_ij(x, t, k) = (l_i − l_j) x + (z_i − z_j) t`, indices 1-based.
pub fn theta(i: usize, j: usize, x: f64, t: f64, k: C64) -> C64 {
    assert!((1..=3).contains(&i) && (1..=3).contains(&j), "theta indices must be in 1..=3");
    let (l, z) = lz_values(k);
    (l[i - 1] - l[j - 1]) * x + (z[i - 1] - z[j - 1]) * t
}

/// `P(k)`: column `j` is `(ω^j, ω^{2j} k, k²)ᵀ`.
pub fn build_p(k: C64) -> Mat3 {
    let k2 = k * k;
    Mat3::new(
        OMEGA, OMEGA2, ONE, //
        OMEGA2 * k, OMEGA * k, k, //
        k2, k2, k2,
    )
}

/// Closed-form inverse of `P(k)`: `P = diag(1, k, k²)·Ω` with `Ω⁻¹ = Ω̄ᵀ / 3`.
pub fn invert_p(k: C64) -> Result<Mat3> {
    if k == ZERO {
        return Err(Error::SingularPoint("P(k)"));
    }
    let third = 1.0 / 3.0;
    let (ik, ik2) = (k.inv(), (k * k).inv());
    let mut m = Mat3::zeros();
    for r in 0..3 {
        for c in 0..3 {
            // Ω_{cr} = ω^{(c+1)(r+1)}; the inverse uses the conjugate power.
            let w = omega_pow(-(((c + 1) * (r + 1)) as i64)) * third;
            let scale = match c {
                0 => ONE,
                1 => ik,
                _ => ik2,
            };
            m[(r, c)] = w * scale;
        }
    }
    Ok(m)
}

/// Diagonal matrix `ℒ = diag(l_1, l_2, l_3)`.
pub fn l_matrix(k: C64) -> Mat3 {
    let (l, _) = lz_values(k);
    Mat3::from_diagonal(&nalgebra::Vector3::new(l[0], l[1], l[2]))
}

/// Diagonal matrix `𝒵 = diag(z_1, z_2, z_3)`.
pub fn z_matrix(k: C64) -> Mat3 {
    let (_, z) = lz_values(k);
    Mat3::from_diagonal(&nalgebra::Vector3::new(z[0], z[1], z[2]))
}

/// Cyclic permutation `𝒜`.
pub fn matrix_a() -> Mat3 {
    Mat3::new(ZERO, ZERO, ONE, ONE, ZERO, ZERO, ZERO, ONE, ZERO)
}

/// Transposition `ℬ` of the first two indices.
pub fn matrix_b() -> Mat3 {
    Mat3::new(ZERO, ONE, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ONE)
}

/// `𝒜 F 𝒜⁻¹`, where `F` is the value at `ωk`.
pub fn symmetry_a(f: &Mat3) -> Mat3 {
    let a = matrix_a();
    a * f * a.transpose()
}

/// `ℬ conj(F) ℬ`, where `F` is the value at `conj k`.
pub fn symmetry_b(f: &Mat3) -> Mat3 {
    let b = matrix_b();
    b * f.map(|z| z.conj()) * b
}

/// Largest entrywise modulus.
pub fn max_abs(m: &Mat3) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Tolerance-based matrix equality.
pub fn approx_eq(a: &Mat3, b: &Mat3, tol: f64) -> bool {
    max_abs(&(a - b)) <= tol
}

/// `(ω, ω², 1)`, the normalisation of the vector problem at infinity.
pub fn n_infinity() -> Row3 {
    Row3::new(OMEGA, OMEGA2, ONE)
}

/// Argument of `k` mapped to `[0, 2π)`.
pub fn arg_2pi(k: C64) -> f64 {
    let a = k.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Point on ray `n` (1..=12) at distance `rho` from the origin.
pub fn ray_point(n: usize, rho: f64) -> C64 {
    C64::from_polar(rho, ray_angle(n))
}

/// Direction angle of ray `n`.
pub fn ray_angle(n: usize) -> f64 {
    assert!((1..=12).contains(&n), "ray index must be in 1..=12");
    (n as f64 - 1.0) * PI / 6.0
}

/// Position of a nonzero spectral point relative to the contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Ray(usize),
    Sector(usize),
}

/// Ray or open sector containing `k`. Points within [`RAY_TOL`] of a ray
/// direction count as ray points.
pub fn classify(k: C64) -> Result<Location> {
    if k == ZERO {
        return Err(Error::SingularPoint("sector classification"));
    }
    let a = arg_2pi(k) / (PI / 6.0);
    let nearest = a.round();
    if (a - nearest).abs() * (PI / 6.0) <= RAY_TOL {
        return Ok(Location::Ray((nearest as usize % 12) + 1));
    }
    Ok(Location::Sector(a.floor() as usize % 12 + 1))
}

/// Orderings of `Re l_j` and `Re z_j` (indices 1-based, increasing real part).
/// Each open sector has its own pair of orderings.
pub fn ordering_signature(k: C64) -> ([usize; 3], [usize; 3]) {
    let (l, z) = lz_values(k);
    let order = |v: [C64; 3]| {
        let mut idx = [1usize, 2, 3];
        idx.sort_by(|&a, &b| v[a - 1].re.partial_cmp(&v[b - 1].re).unwrap());
        idx
    };
    (order(l), order(z))
}

/// Whether column `j` (1-based) of an eigenfunction normalised at `x = +∞` is
/// bounded at `k`: `Re l_j ≤ Re l_i` for all `i` (reversed for the adjoint).
/// Boundary points are included with a relative slack of `1e-12`.
pub fn column_bounded(j: usize, adjoint: bool, k: C64) -> bool {
    let (l, _) = lz_values(k);
    let slack = 1e-12 * k.norm().max(1.0);
    (0..3).all(|i| {
        let d = (l[i] - l[j - 1]).re;
        if adjoint {
            d <= slack
        } else {
            d >= -slack
        }
    })
}

/// Base sets of the spectral plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseRegion {
    /// `arg k ∈ [2π/3, 4π/3]`
    S,
    /// `arg k ∈ [−π/6, π/6]`
    T,
    /// `arg k ∈ [π/3, 2π/3]`
    R,
}

/// A base set rotated by `ω^rotation`, optionally symmetrised as `U ∪ (−U)`.
/// Membership is closed (boundary points included).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub base: BaseRegion,
    pub rotation: u8,
    pub checked: bool,
}

impl Region {
    pub fn new(base: BaseRegion) -> Self {
        Region { base, rotation: 0, checked: false }
    }

    pub fn rotated(self, rotation: u8) -> Self {
        Region { rotation: (self.rotation + rotation) % 3, ..self }
    }

    pub fn checked(self) -> Self {
        Region { checked: true, ..self }
    }

    fn base_contains(base: BaseRegion, k: C64) -> bool {
        let a = arg_2pi(k);
        let tol = RAY_TOL;
        let (lo, hi) = match base {
            BaseRegion::S => (2.0 * PI / 3.0, 4.0 * PI / 3.0),
            BaseRegion::T => (-PI / 6.0, PI / 6.0),
            BaseRegion::R => (PI / 3.0, 2.0 * PI / 3.0),
        };
        let within = |a: f64| a >= lo - tol && a <= hi + tol;
        within(a) || within(a - 2.0 * PI)
    }

    pub fn contains(&self, k: C64) -> bool {
        if k == ZERO {
            return false;
        }
        let back = k * omega_pow(-(self.rotation as i64));
        Self::base_contains(self.base, back) || (self.checked && Self::base_contains(self.base, -back))
    }
}

/// Closed boundedness region of column `j` of `μ_3` (or of its adjoint).
pub fn column_region(j: usize, adjoint: bool) -> impl Fn(C64) -> bool {
    let rotation = match j {
        1 => 2,
        2 => 1,
        _ => 0,
    };
    let region = Region::new(BaseRegion::S).rotated(rotation);
    move |k: C64| if adjoint { region.contains(-k) } else { region.contains(k) }
}
