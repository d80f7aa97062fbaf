//! Reference solutions of `u_t = v_x`, `v_t + u_xxx/3 + 4(u²)_x/3 = 0` on a
//! periodic box much wider than the half-line window, advanced with an
//! integrating-factor fourth-order Runge–Kutta scheme in Fourier space.
//! Restricting to `x ≥ 0` yields compatible initial, boundary and final data.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::algebra::{C64, SQRT3, ZERO};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::lax::{BoundaryProfile, InitialProfile, DECAY_THRESHOLD};
use crate::volterra::CauchyData;

/// Gaussian bump `u₀ = a·exp(−(x−x_c)²/σ²)` with `v₀ = −c·∂ₓu₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDatum {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    pub v_coeff: f64,
}

impl GaussianDatum {
    /// Default datum for a window `[0, x_max]`: a depression of amplitude 0.3
    /// centred at `x_max/3`. Positive bumps of this size carry a zero of
    /// `(S⁻¹s)₁₁` near `arg k = π/6` (a soliton) and are rejected by the scan.
    pub fn default_for(x_max: f64) -> Self {
        GaussianDatum { amplitude: -0.3, center: x_max / 3.0, width: 7.0 * x_max / 60.0, v_coeff: 0.5 }
    }

    pub fn u0(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.width;
        self.amplitude * (-s * s).exp()
    }

    pub fn v0(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.width;
        self.v_coeff * 2.0 * s / self.width * self.amplitude * (-s * s).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    /// Box `[−L, L)`.
    pub half_width: f64,
    /// Number of grid points (a power of two keeps `x = 0` on the grid).
    pub points: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Save every `save_every` steps.
    pub save_every: usize,
}

impl OracleSettings {
    pub fn for_window(x_max: f64, t_end: f64) -> Self {
        OracleSettings { half_width: 2.0 * x_max, points: 2048, dt: t_end / 400.0, t_end, save_every: 1 }
    }
}

/// Evolved fields on the periodic box at the saved time levels.
#[derive(Debug, Clone)]
pub struct LineField {
    pub half_width: f64,
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

struct Spectral {
    n: usize,
    kappa: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    dealias: Vec<bool>,
}

impl Spectral {
    fn new(n: usize, half_width: f64) -> Self {
        let mut planner = FftPlanner::new();
        let kappa: Vec<f64> = (0..n)
            .map(|m| {
                let mm = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
                if m == n / 2 {
                    0.0
                } else {
                    std::f64::consts::PI * mm / half_width
                }
            })
            .collect();
        let dealias = (0..n)
            .map(|m| {
                let mm = if m <= n / 2 { m } else { n - m };
                3 * mm <= n
            })
            .collect();
        Spectral { n, kappa, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n), dealias }
    }

    fn forward(&self, f: &[f64]) -> Vec<C64> {
        let mut buf: Vec<C64> = f.iter().map(|&x| C64::from(x)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn inverse(&self, f: &[C64]) -> Vec<f64> {
        let mut buf = f.to_vec();
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|z| z.re * s).collect()
    }

    /// Nonlinear part of the `v̂` equation, `−(4/3) iκ F[u²]` (dealiased).
    fn nonlinear(&self, uh: &[C64]) -> Vec<C64> {
        let u = self.inverse(uh);
        let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
        let mut f = self.forward(&sq);
        for m in 0..self.n {
            f[m] = if self.dealias[m] { C64::new(0.0, -4.0 / 3.0 * self.kappa[m]) * f[m] } else { ZERO };
        }
        f
    }

    /// Applies `exp(τ·L_κ)` with `L_κ = [[0, iκ], [iκ³/3, 0]]` to `(û, v̂)`.
    fn propagate(&self, tau: f64, uh: &[C64], vh: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let mut a = vec![ZERO; self.n];
        let mut b = vec![ZERO; self.n];
        for m in 0..self.n {
            let k = self.kappa[m];
            if k == 0.0 {
                a[m] = uh[m];
                b[m] = vh[m];
                continue;
            }
            let w = k * k / SQRT3;
            let (s, c) = (w * tau).sin_cos();
            let i = C64::new(0.0, 1.0);
            a[m] = uh[m] * c + vh[m] * i * (SQRT3 * s / k);
            b[m] = uh[m] * i * (k * s / SQRT3) + vh[m] * c;
        }
        (a, b)
    }
}

fn axpy(y: &[C64], a: f64, x: &[C64]) -> Vec<C64> {
    y.iter().zip(x).map(|(p, q)| p + q * a).collect()
}

/// Largest spectral amplitude accepted in the dealiased band, relative to the peak.
pub const RESOLUTION_TOL: f64 = 1e-10;

/// `max |f̂|` over the modes removed by the 2/3 rule, relative to `max |f̂|`.
pub fn spectral_tail(f: &[f64], half_width: f64) -> f64 {
    let sp = Spectral::new(f.len(), half_width);
    let fh = sp.forward(f);
    let peak = fh.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if peak == 0.0 {
        return 0.0;
    }
    let tail = fh.iter().zip(&sp.dealias).filter(|(_, keep)| !**keep).fold(0.0f64, |m, (z, _)| m.max(z.norm()));
    tail / peak
}

/// Advances `(u₀, v₀)` given on the box grid to `t_end`.
pub fn evolve_line(u0: &[f64], v0: &[f64], s: &OracleSettings) -> Result<LineField> {
    let n = s.points;
    if u0.len() != n || v0.len() != n {
        return Err(Error::InvalidInput("initial data length differs from the grid".into()));
    }
    if !(s.dt > 0.0 && s.t_end >= 0.0 && s.save_every > 0) {
        return Err(Error::InvalidInput("oracle time stepping parameters must be positive".into()));
    }
    for (name, f) in [("u", u0), ("v", v0)] {
        let tail = spectral_tail(f, s.half_width);
        if tail > RESOLUTION_TOL {
            return Err(Error::InvalidInput(format!("initial {name} is under-resolved: spectral tail {tail:.2e} exceeds {RESOLUTION_TOL:.0e}")));
        }
    }
    let sp = Spectral::new(n, s.half_width);
    let steps = (s.t_end / s.dt).round() as usize;
    if ((steps as f64) * s.dt - s.t_end).abs() > 1e-9 * s.t_end.max(1.0) {
        return Err(Error::InvalidInput(format!("dt = {} does not divide T = {}", s.dt, s.t_end)));
    }
    let h = s.dt;
    let x: Vec<f64> = (0..n).map(|m| -s.half_width + 2.0 * s.half_width * m as f64 / n as f64).collect();
    let sup0 = u0.iter().chain(v0).fold(0.0f64, |m, f| m.max(f.abs()));
    let mut uh = sp.forward(u0);
    let mut vh = sp.forward(v0);
    let mut field = LineField { half_width: s.half_width, x, times: vec![0.0], u: vec![u0.to_vec()], v: vec![v0.to_vec()] };

    for step in 1..=steps {
        // Lawson RK4. The nonlinear term only enters the v-equation and only
        // depends on û, so stage 3 sees the propagated state unchanged.
        let zero = vec![ZERO; n];
        let k1 = sp.nonlinear(&uh);
        let (ua, _) = sp.propagate(h / 2.0, &uh, &axpy(&vh, h / 2.0, &k1));
        let k2 = sp.nonlinear(&ua);
        let (uhalf, _) = sp.propagate(h / 2.0, &uh, &vh);
        let k3 = sp.nonlinear(&uhalf);
        let (u_full, v_full) = sp.propagate(h, &uh, &vh);
        let (u_k3, _) = sp.propagate(h / 2.0, &zero, &k3);
        let u4: Vec<C64> = u_full.iter().zip(&u_k3).map(|(a, b)| a + b * h).collect();
        let k4 = sp.nonlinear(&u4);
        let (u_k1, v_k1) = sp.propagate(h, &zero, &k1);
        let ksum: Vec<C64> = k2.iter().zip(&k3).map(|(a, b)| a + b).collect();
        let (u_k23, v_k23) = sp.propagate(h / 2.0, &zero, &ksum);
        let c = h / 6.0;
        uh = (0..n).map(|m| u_full[m] + (u_k1[m] + u_k23[m] * 2.0) * c).collect();
        vh = (0..n).map(|m| v_full[m] + (v_k1[m] + v_k23[m] * 2.0 + k4[m]) * c).collect();
        if step % s.save_every == 0 || step == steps {
            let u = sp.inverse(&uh);
            let v = sp.inverse(&vh);
            let sup = u.iter().chain(&v).fold(0.0f64, |m, f| m.max(f.abs()));
            if !sup.is_finite() || (sup0 > 0.0 && sup > 10.0 * sup0) {
                return Err(Error::Numerical(format!("oracle blow-up at t = {:.4}: sup-norm {sup:.3e}", step as f64 * h)));
            }
            field.times.push(step as f64 * h);
            field.u.push(u);
            field.v.push(v);
        }
    }
    Ok(field)
}

/// Evolves a Gaussian datum on the box that contains `[0, x_max]`.
pub fn evolve_gaussian(datum: &GaussianDatum, s: &OracleSettings) -> Result<LineField> {
    let x: Vec<f64> = (0..s.points).map(|m| -s.half_width + 2.0 * s.half_width * m as f64 / s.points as f64).collect();
    let u0: Vec<f64> = x.iter().map(|&x| datum.u0(x)).collect();
    let v0: Vec<f64> = x.iter().map(|&x| datum.v0(x)).collect();
    evolve_line(&u0, &v0, s)
}

/// Trigonometric interpolation of periodic samples on `[−L, L)`.
struct TrigInterpolant {
    coeffs: Vec<C64>,
    kappa: Vec<f64>,
    half_width: f64,
}

impl TrigInterpolant {
    fn new(f: &[f64], half_width: f64) -> Self {
        let sp = Spectral::new(f.len(), half_width);
        let mut coeffs = sp.forward(f);
        let n = f.len() as f64;
        for c in coeffs.iter_mut() {
            *c /= n;
        }
        coeffs[f.len() / 2] = ZERO;
        TrigInterpolant { coeffs, kappa: sp.kappa, half_width }
    }

    /// `d`-th derivative at `x`.
    fn eval(&self, x: f64, d: u32) -> f64 {
        let y = x + self.half_width;
        let mut acc = 0.0;
        for (c, &k) in self.coeffs.iter().zip(&self.kappa) {
            let phase = C64::from_polar(1.0, k * y);
            let fac = C64::new(0.0, k).powu(d);
            acc += (c * phase * fac).re;
        }
        acc
    }
}

impl LineField {
    fn level(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * (1.0 + t.abs()))
            .ok_or_else(|| Error::InvalidInput(format!("no saved level at t = {t}")))
    }

    /// Restriction of the level at time `t` to a uniform grid on `[0, x_max]`.
    pub fn half_line_profile(&self, t: f64, x_max: f64, nx: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let lvl = self.level(t)?;
        let grid = UniformGrid::new(0.0, x_max, nx)?;
        let iu = TrigInterpolant::new(&self.u[lvl], self.half_width);
        let iv = TrigInterpolant::new(&self.v[lvl], self.half_width);
        let xs = grid.points();
        let u = xs.iter().map(|&x| iu.eval(x, 0)).collect();
        let v = xs.iter().map(|&x| iv.eval(x, 0)).collect();
        Ok((xs, u, v))
    }

    /// Sup-norm of `u` over the box at every saved level.
    pub fn sup_norms(&self) -> Vec<f64> {
        self.u.iter().map(|u| u.iter().fold(0.0f64, |m, f| m.max(f.abs()))).collect()
    }

    /// `∫ u dx` over the box (rectangle rule, spectrally accurate for periodic data).
    pub fn mass(&self, level: usize) -> f64 {
        let h = 2.0 * self.half_width / self.x.len() as f64;
        self.u[level].iter().sum::<f64>() * h
    }

    /// `max |v_x(0, t) − ∂ₜu(0, t)|` over the saved levels, with `v_x` from the
    /// spectral interpolant and `∂ₜ` by fourth-order differences in time.
    pub fn boundary_consistency(&self) -> Result<f64> {
        let grid = UniformGrid::from_samples(&self.times)?;
        let mut u = Vec::with_capacity(self.times.len());
        let mut vx = Vec::with_capacity(self.times.len());
        for lvl in 0..self.times.len() {
            u.push(TrigInterpolant::new(&self.u[lvl], self.half_width).eval(0.0, 0));
            vx.push(TrigInterpolant::new(&self.v[lvl], self.half_width).eval(0.0, 1));
        }
        let ut = crate::grid::first_derivative(&u, grid.step);
        Ok(ut.iter().zip(&vx).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// `(x, u, v)` of the saved level `level` on the box grid.
    pub fn snapshot(&self, level: usize) -> (&[f64], &[f64], &[f64]) {
        (&self.x, &self.u[level], &self.v[level])
    }

    /// `u(x, t)`, `v(x, t)` at arbitrary points: trigonometric in `x`, six-point
    /// Lagrange across saved levels in `t`.
    pub fn sampler(&self) -> Result<FieldSampler<'_>> {
        let grid = UniformGrid::from_samples(&self.times)?;
        Ok(FieldSampler { field: self, grid, cache: std::cell::RefCell::new(std::collections::HashMap::new()) })
    }
}

type LevelInterp = Arc<(TrigInterpolant, TrigInterpolant)>;

pub struct FieldSampler<'a> {
    field: &'a LineField,
    grid: UniformGrid,
    cache: std::cell::RefCell<std::collections::HashMap<usize, LevelInterp>>,
}

impl FieldSampler<'_> {
    fn interp(&self, lvl: usize) -> LevelInterp {
        self.cache
            .borrow_mut()
            .entry(lvl)
            .or_insert_with(|| {
                Arc::new((
                    TrigInterpolant::new(&self.field.u[lvl], self.field.half_width),
                    TrigInterpolant::new(&self.field.v[lvl], self.field.half_width),
                ))
            })
            .clone()
    }

    /// `(u, v)` at `(x, t)`.
    pub fn at(&self, x: f64, t: f64) -> (f64, f64) {
        if let Some(lvl) = self.field.times.iter().position(|&s| (s - t).abs() <= 1e-12 * (1.0 + t.abs())) {
            let ip = self.interp(lvl);
            return (ip.0.eval(x, 0), ip.1.eval(x, 0));
        }
        let (base, w) = self.grid.weights(t);
        let (mut u, mut v) = (0.0, 0.0);
        for (j, wj) in w.iter().enumerate() {
            let ip = self.interp(base + j);
            u += wj * ip.0.eval(x, 0);
            v += wj * ip.1.eval(x, 0);
        }
        (u, v)
    }
}

/// Initial, boundary and final half-line data of an evolved field.
pub fn extract_half_line(f: &LineField, x_max: f64, nx: usize) -> Result<CauchyData> {
    let t_end = *f.times.last().expect("at least one level");
    let (xs, u, v) = f.half_line_profile(0.0, x_max, nx)?;
    let initial = InitialProfile::new(&xs, u, v, DECAY_THRESHOLD)?;
    let (xs, u, v) = f.half_line_profile(t_end, x_max, nx)?;
    let final_profile = InitialProfile::unchecked(&xs, u, v)?;
    let mut tr = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for lvl in 0..f.times.len() {
        let iu = TrigInterpolant::new(&f.u[lvl], f.half_width);
        let iv = TrigInterpolant::new(&f.v[lvl], f.half_width);
        tr[0].push(iu.eval(0.0, 0));
        tr[1].push(iu.eval(0.0, 1));
        tr[2].push(iu.eval(0.0, 2));
        tr[3].push(iv.eval(0.0, 0));
    }
    let [u0, u1, u2, v0] = tr;
    let boundary = BoundaryProfile::new(&f.times, u0, u1, u2, v0)?;
    Ok(CauchyData { initial, boundary, final_profile: Some(final_profile) })
}

/// `ũ(x, t) = (4/√3)·u(x/3^{1/4}, t) + 1/2`, mapping the system's `u` to a
/// solution of `ũ_tt = ũ_xx − (ũ²)_xx − ũ_xxxx`.
pub fn rescale_to_good_boussinesq(u: impl Fn(f64, f64) -> f64) -> impl Fn(f64, f64) -> f64 {
    let beta = 3f64.powf(-0.25);
    move |x, t| 4.0 / SQRT3 * u(beta * x, t) + 0.5
}

/// Inverse of [`rescale_to_good_boussinesq`].
pub fn rescale_from_good_boussinesq(ut: impl Fn(f64, f64) -> f64) -> impl Fn(f64, f64) -> f64 {
    let beta = 3f64.powf(0.25);
    move |x, t| SQRT3 / 4.0 * (ut(beta * x, t) - 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_settings() -> OracleSettings {
        OracleSettings { half_width: 30.0, points: 512, dt: 0.01, t_end: 0.5, save_every: 5 }
    }

    #[test]
    fn zero_data_stays_zero() {
        let s = small_settings();
        let z = vec![0.0; s.points];
        let f = evolve_line(&z, &z, &s).unwrap();
        assert!(f.u.iter().chain(&f.v).all(|l| l.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn mass_is_conserved() {
        let s = small_settings();
        let d = GaussianDatum { amplitude: 0.3, center: 2.0, width: 2.0, v_coeff: 0.5 };
        let f = evolve_gaussian(&d, &s).unwrap();
        let m0 = f.mass(0);
        for lvl in 0..f.times.len() {
            assert!((f.mass(lvl) - m0).abs() < 1e-10);
        }
    }

    #[test]
    fn fourth_order_in_time() {
        let d = GaussianDatum { amplitude: 0.3, center: 0.0, width: 1.5, v_coeff: 0.5 };
        let run = |dt: f64| {
            let s = OracleSettings { half_width: 30.0, points: 512, dt, t_end: 0.5, save_every: 1_000_000 };
            evolve_gaussian(&d, &s).unwrap().u.pop().unwrap()
        };
        let (a, b, c) = (run(0.05), run(0.025), run(0.0125));
        let diff = |p: &[f64], q: &[f64]| p.iter().zip(q).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        let ratio = diff(&a, &b) / diff(&b, &c);
        assert!(ratio.log2() > 3.7, "observed order {}", ratio.log2());
    }

    #[test]
    fn linear_time_reversal() {
        let s = small_settings();
        let sp = Spectral::new(s.points, s.half_width);
        let d = GaussianDatum { amplitude: 0.3, center: 1.0, width: 2.0, v_coeff: 0.5 };
        let x: Vec<f64> = (0..s.points).map(|m| -30.0 + 60.0 * m as f64 / s.points as f64).collect();
        let u: Vec<f64> = x.iter().map(|&x| d.u0(x)).collect();
        let v: Vec<f64> = x.iter().map(|&x| d.v0(x)).collect();
        let (uh, vh) = (sp.forward(&u), sp.forward(&v));
        let (a, b) = sp.propagate(0.7, &uh, &vh);
        let (c, e) = sp.propagate(-0.7, &a, &b);
        let (u1, v1) = (sp.inverse(&c), sp.inverse(&e));
        for m in 0..s.points {
            assert!((u1[m] - u[m]).abs() < 1e-12 && (v1[m] - v[m]).abs() < 1e-12);
        }
    }

    #[test]
    fn under_resolved_data_are_rejected() {
        let s = small_settings();
        let x: Vec<f64> = (0..s.points).map(|m| -30.0 + 60.0 * m as f64 / s.points as f64).collect();
        let spike: Vec<f64> = x.iter().map(|&x| (-(x / 0.05).powi(2)).exp()).collect();
        let z = vec![0.0; s.points];
        assert!(matches!(evolve_line(&spike, &z, &s), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn blow_up_is_detected() {
        let s = OracleSettings { half_width: 30.0, points: 512, dt: 0.2, t_end: 4.0, save_every: 1 };
        let d = GaussianDatum { amplitude: 3.0, center: 0.0, width: 2.0, v_coeff: 0.5 };
        assert!(matches!(evolve_gaussian(&d, &s), Err(Error::Numerical(_))));
    }

    #[test]
    fn default_datum_has_zero_mean_velocity_gradient() {
        let d = GaussianDatum::default_for(30.0);
        let s = OracleSettings::for_window(30.0, 1.0);
        let x: Vec<f64> = (0..s.points).map(|m| -s.half_width + 2.0 * s.half_width * m as f64 / s.points as f64).collect();
        let v: Vec<f64> = x.iter().map(|&x| d.v0(x)).collect();
        let ip = TrigInterpolant::new(&v, s.half_width);
        let h = 2.0 * s.half_width / s.points as f64;
        let integral: f64 = x.iter().map(|&x| ip.eval(x, 1)).sum::<f64>() * h;
        assert!(integral.abs() < 1e-10);
    }

    #[test]
    fn boundary_traces_satisfy_ut_equals_vx() {
        let d = GaussianDatum::default_for(30.0);
        let f = evolve_gaussian(&d, &OracleSettings::for_window(30.0, 1.0)).unwrap();
        let defect = f.boundary_consistency().unwrap();
        assert!(defect < 1e-8, "defect {defect:.2e}");
    }

    #[test]
    fn rescaled_field_solves_the_scalar_equation() {
        // Residual of ũ_tt = ũ_xx − (ũ²)_xx − ũ_xxxx with x-derivatives from
        // the chain rule on spectral derivatives and ũ_tt by differences.
        let d = GaussianDatum { amplitude: 0.3, center: 0.0, width: 2.0, v_coeff: 0.5 };
        let s = OracleSettings { half_width: 30.0, points: 512, dt: 0.005, t_end: 0.5, save_every: 1 };
        let f = evolve_gaussian(&d, &s).unwrap();
        let lvl = 50;
        let h = s.dt;
        let ip = |l: usize| TrigInterpolant::new(&f.u[l], s.half_width);
        let (a, b, c) = (ip(lvl - 1), ip(lvl), ip(lvl + 1));
        let beta = 3f64.powf(-0.25);
        let scale = 4.0 / SQRT3;
        for y in [-2.0, -0.5, 0.7, 1.9, 3.0] {
            let x = beta * y;
            let ut = |ip: &TrigInterpolant| scale * ip.eval(x, 0) + 0.5;
            let u_tt = (ut(&a) - 2.0 * ut(&b) + ut(&c)) / (h * h);
            let d1 = scale * beta * b.eval(x, 1);
            let d2 = scale * beta.powi(2) * b.eval(x, 2);
            let d4 = scale * beta.powi(4) * b.eval(x, 4);
            let u = ut(&b);
            let sq_xx = 2.0 * (d1 * d1 + u * d2);
            let residual = u_tt - d2 + sq_xx + d4;
            assert!(residual.abs() < 1e-4, "residual {residual:.2e} at y = {y}");
        }
    }

    #[test]
    fn rescaling_round_trip() {
        let u = |x: f64, t: f64| (x * 0.3 - t).sin();
        let back = rescale_from_good_boussinesq(rescale_to_good_boussinesq(u));
        for (x, t) in [(0.0, 0.0), (1.3, 0.2), (-4.0, 2.0)] {
            assert!((back(x, t) - u(x, t)).abs() < 1e-12);
        }
        assert_eq!(rescale_to_good_boussinesq(|_, _| 0.0)(3.0, 1.0), 0.5);
    }
}
