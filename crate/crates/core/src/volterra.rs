//! Eigenfunctions of the Lax pair, integrated column by column from the
//! corner where they equal the identity, and the spectral matrices
//! `s, S, sᴬ, Sᴬ` read off at the origin of the quarter plane.
//!
//! Columns are integrated in the undressed gauge: with
//! `μ = P⁻¹ Ψ e^{−xℒ}` the generator `L̃(k) + E(x)` is polynomial in `k`, so
//! nothing is singular at small `|k|`. The dressed column is `P⁻¹φ`.

use crate::algebra::{self, build_p, invert_p, lz_values, Mat3, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::lax::{t_potential, x_potential, BoundaryProfile, FieldPoint, InitialProfile};
use crate::ode::Dopri5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSettings {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step in `x`; steps in `t` are capped at `T/20`.
    pub max_step: f64,
    pub x_max: f64,
    pub k_max: f64,
}

impl Default for OdeSettings {
    fn default() -> Self {
        OdeSettings { rtol: 1e-10, atol: 1e-12, max_step: 0.25, x_max: 30.0, k_max: 40.0 }
    }
}

impl OdeSettings {
    fn integrator(&self, max_step: f64) -> Dopri5 {
        Dopri5 { rtol: self.rtol, atol: self.atol, max_step, max_steps: 5_000_000 }
    }
}

/// Integration variable of an eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `μ_3(x, t₀, k)` normalised at `x = X_max`.
    X,
    /// `μ_1(0, t, k)` normalised at `t = T`.
    T,
}

/// Values of an eigenfunction along its integration variable.
#[derive(Debug, Clone)]
pub struct EigenfunctionSlice {
    pub k: C64,
    pub family: Family,
    pub adjoint: bool,
    pub grid: Vec<f64>,
    /// Uncomputed columns hold NaN.
    pub values: Vec<Mat3>,
    pub columns: [bool; 3],
}

impl EigenfunctionSlice {
    /// Value at the grid point closest to `s`.
    pub fn at(&self, s: f64) -> &Mat3 {
        let i = self
            .grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - s).abs().partial_cmp(&(b.1 - s).abs()).unwrap())
            .map(|(i, _)| i)
            .expect("slice has at least one node");
        &self.values[i]
    }

    pub fn full(&self) -> bool {
        self.columns.iter().all(|&c| c)
    }
}

/// Growth exponent of column `j`: the largest `Re` of the exponents that
/// multiply the column over an interval of length `span`.
pub fn growth_exponent(family: Family, adjoint: bool, j: usize, k: C64, span: f64) -> f64 {
    let (l, z) = lz_values(k);
    let lam = match family {
        Family::X => l,
        Family::T => z,
    };
    let sign = if adjoint { 1.0 } else { -1.0 };
    (0..3).map(|i| sign * (lam[i] - lam[j - 1]).re * span).fold(0.0, f64::max)
}

fn undressed(family: Family, k: C64, p: &FieldPoint) -> Mat3 {
    let k3 = k * k * k;
    match family {
        Family::X => Mat3::new(ZERO, ONE, ZERO, ZERO, ZERO, ONE, k3, ZERO, ZERO) + x_potential(p),
        Family::T => Mat3::new(ZERO, ZERO, ONE, k3, ZERO, ZERO, ZERO, k3, ZERO) + t_potential(p),
    }
}

/// Shared column integrator. `field` evaluates the data along the integration
/// variable, which runs from `terminal` down to the smallest output.
#[allow(clippy::too_many_arguments)]
fn solve_columns(
    k: C64,
    family: Family,
    adjoint: bool,
    field: &dyn Fn(f64) -> FieldPoint,
    terminal: f64,
    outputs: &[f64],
    columns: [bool; 3],
    settings: &OdeSettings,
    max_step: f64,
    vanishing: bool,
) -> Result<EigenfunctionSlice> {
    if k == ZERO {
        return Err(Error::SingularPoint("eigenfunction"));
    }
    for &s in outputs {
        if !(s >= -1e-12 && s <= terminal + 1e-12) {
            return Err(Error::InvalidInput(format!("output {s} outside [0, {terminal}]")));
        }
    }
    let mut order: Vec<usize> = (0..outputs.len()).collect();
    order.sort_by(|&a, &b| outputs[b].partial_cmp(&outputs[a]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| outputs[i].min(terminal)).collect();

    let (l, z) = lz_values(k);
    let lam = match family {
        Family::X => l,
        Family::T => z,
    };
    let p = build_p(k);
    let pinv = invert_p(k)?;
    let m = k.norm().max(1.0);
    let scale = if adjoint { [m * m, m, 1.0] } else { [1.0, m, m * m] };
    let k2 = k * k;
    let integrator = settings.integrator(max_step);

    let mut values = vec![Mat3::from_element(C64::new(f64::NAN, f64::NAN)); outputs.len()];
    for j in 0..3 {
        if !columns[j] {
            continue;
        }
        if vanishing {
            // Without a potential the eigenfunction is exactly the identity.
            for v in values.iter_mut() {
                for i in 0..3 {
                    v[(i, j)] = if i == j { ONE } else { ZERO };
                }
            }
            continue;
        }
        let lj = lam[j];
        let y0: [C64; 3] = if adjoint {
            std::array::from_fn(|i| pinv[(j, i)] * k2)
        } else {
            std::array::from_fn(|i| p[(i, j)])
        };
        let rhs = |s: f64, y: &[C64; 3]| -> [C64; 3] {
            let g = undressed(family, k, &field(s));
            if adjoint {
                std::array::from_fn(|i| lj * y[i] - (g[(0, i)] * y[0] + g[(1, i)] * y[1] + g[(2, i)] * y[2]))
            } else {
                std::array::from_fn(|i| g[(i, 0)] * y[0] + g[(i, 1)] * y[1] + g[(i, 2)] * y[2] - lj * y[i])
            }
        };
        let ys = integrator.integrate(rhs, terminal, y0, &sorted, &scale)?;
        for (slot, y) in order.iter().zip(ys) {
            let col = if adjoint {
                std::array::from_fn::<C64, 3, _>(|i| (p[(0, i)] * y[0] + p[(1, i)] * y[1] + p[(2, i)] * y[2]) / k2)
            } else {
                std::array::from_fn::<C64, 3, _>(|i| pinv[(i, 0)] * y[0] + pinv[(i, 1)] * y[1] + pinv[(i, 2)] * y[2])
            };
            for i in 0..3 {
                values[*slot][(i, j)] = col[i];
            }
        }
    }
    Ok(EigenfunctionSlice { k, family, adjoint, grid: outputs.to_vec(), values, columns })
}

fn check_bounded(k: C64, adjoint: bool, columns: [bool; 3], allow_growth: bool) -> Result<()> {
    if allow_growth {
        return Ok(());
    }
    for j in 1..=3 {
        if columns[j - 1] && !algebra::column_bounded(j, adjoint, k) {
            return Err(Error::UnboundedColumn { column: j, k });
        }
    }
    Ok(())
}

/// `μ_3(x, t₀, k)` from the profile at time `t₀`, evaluated at `outputs ⊂ [0, X_max]`.
pub fn solve_mu3(
    k: C64,
    data: &InitialProfile,
    columns: [bool; 3],
    allow_growth: bool,
    outputs: &[f64],
    settings: &OdeSettings,
) -> Result<EigenfunctionSlice> {
    check_bounded(k, false, columns, allow_growth)?;
    let field = |x: f64| data.at(x);
    solve_columns(k, Family::X, false, &field, data.x_max(), outputs, columns, settings, settings.max_step, data.is_zero())
}

/// Adjoint eigenfunction `μ_3ᴬ(x, t₀, k)`.
pub fn solve_mu3_adjoint(
    k: C64,
    data: &InitialProfile,
    columns: [bool; 3],
    allow_growth: bool,
    outputs: &[f64],
    settings: &OdeSettings,
) -> Result<EigenfunctionSlice> {
    check_bounded(k, true, columns, allow_growth)?;
    let field = |x: f64| data.at(x);
    solve_columns(k, Family::X, true, &field, data.x_max(), outputs, columns, settings, settings.max_step, data.is_zero())
}

/// `μ_1(0, t, k)` from the boundary traces, evaluated at `outputs ⊂ [0, T]`.
pub fn solve_mu1(
    k: C64,
    data: &BoundaryProfile,
    columns: [bool; 3],
    outputs: &[f64],
    settings: &OdeSettings,
) -> Result<EigenfunctionSlice> {
    let field = |t: f64| data.at(t);
    let t_end = data.t_end();
    solve_columns(k, Family::T, false, &field, t_end, outputs, columns, settings, t_end / 20.0, data.is_zero())
}

/// Adjoint eigenfunction `μ_1ᴬ(0, t, k)`.
pub fn solve_mu1_adjoint(
    k: C64,
    data: &BoundaryProfile,
    columns: [bool; 3],
    outputs: &[f64],
    settings: &OdeSettings,
) -> Result<EigenfunctionSlice> {
    let field = |t: f64| data.at(t);
    let t_end = data.t_end();
    solve_columns(k, Family::T, true, &field, t_end, outputs, columns, settings, t_end / 20.0, data.is_zero())
}

/// Initial profile, boundary traces and (optionally) the profile at the final
/// time of one half-line solution.
#[derive(Debug, Clone)]
pub struct CauchyData {
    pub initial: InitialProfile,
    pub boundary: BoundaryProfile,
    pub final_profile: Option<InitialProfile>,
}

impl CauchyData {
    pub fn t_end(&self) -> f64 {
        self.boundary.t_end()
    }

    pub fn zero(x_max: f64, t_end: f64) -> Result<Self> {
        Ok(CauchyData {
            initial: InitialProfile::zero(x_max, 301)?,
            boundary: BoundaryProfile::zero(t_end, 101)?,
            final_profile: Some(InitialProfile::zero(x_max, 301)?),
        })
    }
}

/// Column requests for each spectral matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SpectralRequest {
    pub s: [bool; 3],
    pub sa: [bool; 3],
    pub big_s: [bool; 3],
    pub big_sa: [bool; 3],
    /// `μ_3(0, T, k)` and its adjoint, from the final profile.
    pub s_final: [bool; 3],
    pub sa_final: [bool; 3],
}

impl SpectralRequest {
    pub fn all() -> Self {
        let t = [true; 3];
        SpectralRequest { s: t, sa: t, big_s: t, big_sa: t, s_final: t, sa_final: t }
    }
}

/// Which requested columns are actually computed: bounded columns always,
/// others only while their growth factor stays below `e^{growth_limit}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnPolicy {
    pub growth_limit: f64,
}

impl Default for ColumnPolicy {
    fn default() -> Self {
        ColumnPolicy { growth_limit: 1e6f64.ln() }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralMatrices {
    pub k: C64,
    pub s: Mat3,
    pub big_s: Mat3,
    pub sa: Mat3,
    pub big_sa: Mat3,
    pub s_final: Option<Mat3>,
    pub sa_final: Option<Mat3>,
    pub s_cols: [bool; 3],
    pub sa_cols: [bool; 3],
    pub big_s_cols: [bool; 3],
    pub big_sa_cols: [bool; 3],
    pub s_final_cols: [bool; 3],
    pub sa_final_cols: [bool; 3],
    pub t_end: f64,
    pub x_max: f64,
}

fn admitted(request: [bool; 3], family: Family, adjoint: bool, k: C64, span: f64, policy: &ColumnPolicy) -> [bool; 3] {
    std::array::from_fn(|j| request[j] && growth_exponent(family, adjoint, j + 1, k, span) <= policy.growth_limit)
}

/// Spectral matrices at `k`; columns outside the policy are NaN.
pub fn spectral_matrices(
    k: C64,
    data: &CauchyData,
    request: &SpectralRequest,
    policy: &ColumnPolicy,
    settings: &OdeSettings,
) -> Result<SpectralMatrices> {
    let x_max = data.initial.x_max();
    let t_end = data.t_end();
    let at0 = [0.0];
    let x_cols = |req, adj| admitted(req, Family::X, adj, k, x_max, policy);
    let t_cols = |req, adj| admitted(req, Family::T, adj, k, t_end, policy);

    let s_cols = x_cols(request.s, false);
    let sa_cols = x_cols(request.sa, true);
    let big_s_cols = t_cols(request.big_s, false);
    let big_sa_cols = t_cols(request.big_sa, true);
    let s = solve_mu3(k, &data.initial, s_cols, true, &at0, settings)?.values[0];
    let sa = solve_mu3_adjoint(k, &data.initial, sa_cols, true, &at0, settings)?.values[0];
    let big_s = solve_mu1(k, &data.boundary, big_s_cols, &at0, settings)?.values[0];
    let big_sa = solve_mu1_adjoint(k, &data.boundary, big_sa_cols, &at0, settings)?.values[0];
    let (mut s_final, mut sa_final) = (None, None);
    let (mut s_final_cols, mut sa_final_cols) = ([false; 3], [false; 3]);
    if let Some(fin) = &data.final_profile {
        s_final_cols = x_cols(request.s_final, false);
        sa_final_cols = x_cols(request.sa_final, true);
        if s_final_cols.iter().any(|&c| c) {
            s_final = Some(solve_mu3(k, fin, s_final_cols, true, &at0, settings)?.values[0]);
        }
        if sa_final_cols.iter().any(|&c| c) {
            sa_final = Some(solve_mu3_adjoint(k, fin, sa_final_cols, true, &at0, settings)?.values[0]);
        }
    }
    Ok(SpectralMatrices {
        k,
        s,
        big_s,
        sa,
        big_sa,
        s_final,
        sa_final,
        s_cols,
        sa_cols,
        big_s_cols,
        big_sa_cols,
        s_final_cols,
        sa_final_cols,
        t_end,
        x_max,
    })
}

/// `e^{−T𝒵̂} M`, i.e. entry `(i, j)` times `e^{−T(z_i − z_j)}`.
pub fn conjugate_by_t(k: C64, t: f64, m: &Mat3, sign: f64) -> Mat3 {
    let (_, z) = lz_values(k);
    Mat3::from_fn(|i, j| m[(i, j)] * ((z[i] - z[j]) * (-sign * t)).exp())
}

/// Largest entrywise defect of `S⁻¹s − e^{−T𝒵̂} μ_3(0, T, k)` over the
/// columns where both sides are available.
pub fn global_relation_residual(m: &SpectralMatrices) -> Result<f64> {
    let fin = m.s_final.ok_or_else(|| Error::InvalidInput("global relation needs the final profile".into()))?;
    if !m.big_s_cols.iter().all(|&c| c) {
        return Err(Error::InvalidInput(format!("S(k) not fully available at k = {}", m.k)));
    }
    let sinv = m.big_s.try_inverse().ok_or_else(|| Error::Numerical("S(k) is singular".into()))?;
    let lhs = sinv * m.s;
    let rhs = conjugate_by_t(m.k, m.t_end, &fin, 1.0);
    let mut worst: Option<f64> = None;
    for j in 0..3 {
        if m.s_cols[j] && m.s_final_cols[j] {
            for i in 0..3 {
                let d = (lhs[(i, j)] - rhs[(i, j)]).norm();
                worst = Some(worst.map_or(d, |w: f64| w.max(d)));
            }
        }
    }
    worst.ok_or_else(|| Error::InvalidInput(format!("no common valid column at k = {}", m.k)))
}

/// Adjoint form `Sᵀsᴬ − e^{T𝒵̂} μ_3ᴬ(0, T, k)`.
pub fn adjoint_global_relation_residual(m: &SpectralMatrices) -> Result<f64> {
    let fin = m.sa_final.ok_or_else(|| Error::InvalidInput("global relation needs the final profile".into()))?;
    if !m.big_s_cols.iter().all(|&c| c) {
        return Err(Error::InvalidInput(format!("S(k) not fully available at k = {}", m.k)));
    }
    let lhs = m.big_s.transpose() * m.sa;
    let rhs = conjugate_by_t(m.k, m.t_end, &fin, -1.0);
    let mut worst: Option<f64> = None;
    for j in 0..3 {
        if m.sa_cols[j] && m.sa_final_cols[j] {
            for i in 0..3 {
                let d = (lhs[(i, j)] - rhs[(i, j)]).norm();
                worst = Some(worst.map_or(d, |w: f64| w.max(d)));
            }
        }
    }
    worst.ok_or_else(|| Error::InvalidInput(format!("no common valid column at k = {}", m.k)))
}

/// Outcome of the small-`k` pattern check on `k² μ_3(x, 0, k)`.
#[derive(Debug, Clone)]
pub struct OriginPattern {
    pub x: f64,
    /// Extrapolated limit of `k² μ_3`.
    pub limit: Mat3,
    /// Largest relative difference between rows.
    pub row_defect: f64,
    /// Largest relative distance of a row from the line spanned by `(ω, ω², 1)`.
    pub direction_defect: f64,
    /// Difference between the two highest extrapolation levels.
    pub extrapolation_error: f64,
    /// `false` when the limit vanishes (non-generic data); defects are then not meaningful.
    pub generic: bool,
}

/// Extrapolates `k² μ_3(x, 0, k)` to `k → 0` along `arg k = angle` from radii
/// `r0, r0/2, r0/4, …` (`levels` of them) by polynomial Richardson in `k`.
pub fn origin_pattern_check(
    data: &InitialProfile,
    x: f64,
    angle: f64,
    r0: f64,
    levels: usize,
    settings: &OdeSettings,
) -> Result<OriginPattern> {
    let dir = C64::from_polar(1.0, angle);
    let mut table: Vec<Vec<Mat3>> = Vec::new();
    for lvl in 0..levels {
        let rho = r0 / 2f64.powi(lvl as i32);
        let k = dir * rho;
        let mu = solve_mu3(k, data, [true; 3], true, &[x], settings)?.values[0];
        let mut row = vec![mu * (k * k)];
        // Neville-type elimination of the powers k, k², … (ratio 2 in radius).
        for m in 1..=lvl {
            let f = 2f64.powi(m as i32);
            let prev = &table[lvl - 1][m - 1];
            let cur = row[m - 1];
            row.push((cur * C64::from(f) - prev) / C64::from(f - 1.0));
        }
        table.push(row);
    }
    let last = table.last().expect("at least one level");
    let limit = *last.last().unwrap();
    let extrapolation_error = if levels > 1 {
        let prev = table[levels - 2].last().unwrap();
        algebra::max_abs(&(limit - prev))
    } else {
        f64::NAN
    };
    let scale = algebra::max_abs(&limit);
    let generic = scale > 1e-8;
    let n_inf = algebra::n_infinity();
    let mut row_defect = 0.0f64;
    let mut direction_defect = 0.0f64;
    for i in 0..3 {
        let row = limit.row(i);
        row_defect = row_defect.max((row - limit.row(0)).norm() / scale.max(1e-300));
        let alpha = (row * n_inf.adjoint())[(0, 0)] / 3.0;
        direction_defect = direction_defect.max((row - n_inf * alpha).norm() / row.norm().max(1e-300));
    }
    Ok(OriginPattern { x, limit, row_defect, direction_defect, extrapolation_error, generic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{approx_eq, max_abs, symmetry_a, symmetry_b, OMEGA};

    fn gaussian_profile() -> InitialProfile {
        InitialProfile::from_fn(20.0, 2001, |x| 0.3 * (-(x - 6.0f64).powi(2) / 4.0).exp(), |x| -0.1 * (-(x - 6.0f64).powi(2) / 4.0).exp())
            .unwrap()
    }

    fn smooth_boundary() -> BoundaryProfile {
        let ts: Vec<f64> = (0..401).map(|i| i as f64 / 400.0).collect();
        let f = |a: f64, b: f64| ts.iter().map(|t| a * (b * t).sin() + 0.1 * a).collect::<Vec<_>>();
        BoundaryProfile::new(&ts, f(0.2, 1.0), f(-0.1, 2.0), f(0.05, 0.5), f(0.15, -1.5)).unwrap()
    }

    #[test]
    fn zero_data_gives_identity() {
        let p = InitialProfile::zero(10.0, 101).unwrap();
        let b = BoundaryProfile::zero(1.0, 51).unwrap();
        let s = OdeSettings::default();
        for (k, cols) in [(C64::new(-1.5, 0.2), [false, false, true]), (C64::new(0.1, 0.05), [true; 3])] {
            let mu = solve_mu3(k, &p, cols, true, &[0.0, 5.0, 10.0], &s).unwrap();
            for m in &mu.values {
                for j in (0..3).filter(|&j| cols[j]) {
                    assert!((m.column(j) - Mat3::identity().column(j)).norm() < 1e-12);
                }
            }
            let mu1 = solve_mu1(k, &b, [true; 3], &[0.0, 0.5], &s).unwrap();
            for m in &mu1.values {
                assert!(approx_eq(m, &Mat3::identity(), 1e-12));
            }
        }
    }

    #[test]
    fn unbounded_column_needs_opt_in() {
        let p = gaussian_profile();
        let r = solve_mu3(C64::new(1.0, 0.0), &p, [false, false, true], false, &[0.0], &OdeSettings::default());
        assert!(matches!(r, Err(Error::UnboundedColumn { column: 3, .. })));
        assert!(solve_mu3(C64::new(-1.0, 0.0), &p, [false, false, true], false, &[0.0], &OdeSettings::default()).is_ok());
    }

    #[test]
    fn terminal_value_is_identity() {
        let p = gaussian_profile();
        let k = C64::new(0.4, 0.3);
        let mu = solve_mu3(k, &p, [true; 3], true, &[p.x_max(), 0.0], &OdeSettings::default()).unwrap();
        assert!(approx_eq(&mu.values[0], &Mat3::identity(), 1e-12));
    }

    #[test]
    fn determinant_and_adjoint_inverse() {
        let b = smooth_boundary();
        let s = OdeSettings::default();
        let ts = [0.0, 0.25, 0.6];
        for k in [C64::new(0.8, 0.5), C64::new(-1.1, 0.3), C64::new(0.2, -1.4)] {
            let mu = solve_mu1(k, &b, [true; 3], &ts, &s).unwrap();
            let mua = solve_mu1_adjoint(k, &b, [true; 3], &ts, &s).unwrap();
            for (m, ma) in mu.values.iter().zip(&mua.values) {
                assert!((m.determinant() - ONE).norm() < 1e-9);
                let inv_t = m.try_inverse().unwrap().transpose();
                assert!(max_abs(&(ma - inv_t)) < 1e-8);
            }
        }
    }

    #[test]
    fn rotation_and_conjugation_symmetry_of_mu1() {
        let b = smooth_boundary();
        let s = OdeSettings::default();
        let k = C64::new(0.7, 0.45);
        let f = |k| solve_mu1(k, &b, [true; 3], &[0.3], &s).unwrap().values[0];
        let m = f(k);
        assert!(approx_eq(&m, &symmetry_a(&f(OMEGA * k)), 1e-8));
        assert!(approx_eq(&m, &symmetry_b(&f(k.conj())), 1e-8));
    }

    #[test]
    fn volterra_residual_of_mu3() {
        // Independent check of the integral equation with Simpson's rule on a
        // fine grid, in the dressed gauge.
        let p = gaussian_profile();
        let k = C64::new(-0.9, 0.4);
        let n = 4001;
        let xs: Vec<f64> = (0..n).map(|i| p.x_max() * i as f64 / (n - 1) as f64).collect();
        let s = OdeSettings::default();
        let mu = solve_mu3(k, &p, [false, false, true], false, &xs, &s).unwrap();
        let (l, _) = lz_values(k);
        let h = xs[1] - xs[0];
        let j = 2;
        let x0 = 0usize;
        for i in 0..3 {
            let integrand: Vec<C64> = (0..n)
                .map(|m| {
                    let u = crate::lax::build_u(&p.at(xs[m]), k).unwrap();
                    let um = (u * mu.values[m])[(i, j)];
                    ((l[i] - l[j]) * (xs[x0] - xs[m])).exp() * um
                })
                .collect();
            let mut acc = integrand[0] + integrand[n - 1];
            for (m, v) in integrand.iter().enumerate().take(n - 1).skip(1) {
                acc += *v * if m % 2 == 1 { 4.0 } else { 2.0 };
            }
            let integral = acc * (h / 3.0);
            let delta = if i == j { ONE } else { ZERO };
            let residual = (mu.values[x0][(i, j)] - (delta - integral)).norm();
            assert!(residual < 1e-9, "row {i}: residual {residual:.2e}");
        }
    }

    #[test]
    fn origin_pattern_for_gaussian_data() {
        let p = gaussian_profile();
        let r = origin_pattern_check(&p, 0.0, std::f64::consts::PI / 12.0, 0.05, 4, &OdeSettings::default()).unwrap();
        assert!(r.generic);
        assert!(r.row_defect < 1e-2, "{r:?}");
        assert!(r.direction_defect < 1e-2, "{r:?}");
        let z = origin_pattern_check(&InitialProfile::zero(10.0, 101).unwrap(), 0.0, 0.3, 0.2, 3, &OdeSettings::default())
            .unwrap();
        assert!(!z.generic);
    }

    #[test]
    fn growth_exponents() {
        let k = C64::new(2.0, 0.0);
        assert_eq!(growth_exponent(Family::X, false, 1, k, 10.0), 0.0);
        assert!(growth_exponent(Family::X, false, 3, k, 10.0) > 20.0);
        assert!(growth_exponent(Family::T, true, 1, k, 1.0) > 5.0);
        assert_eq!(growth_exponent(Family::T, true, 3, k, 1.0), 0.0);
    }
}
