//! The four reflection coefficients on their rays, large-`k` tail fits,
//! origin limits, unitarity identities and the soliton/genericity scans.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{classify, lz_values, omega_pow, ray_angle, ray_point, Location, Mat3, C64, OMEGA, OMEGA2, ZERO};
use crate::error::{Error, Result};
use crate::volterra::{growth_exponent, spectral_matrices, CauchyData, ColumnPolicy, Family, OdeSettings, SpectralMatrices, SpectralRequest};

/// Denominators below this modulus are treated as zeros of the spectral data.
pub const DENOMINATOR_TOL: f64 = 1e-13;
/// Zero-detection threshold of the assumption scans.
pub const ZERO_THRESHOLD: f64 = 1e-6;
/// Smallest sampled radius.
pub const R_MIN: f64 = 0.05;
/// Largest amplification `e^{growth}` accepted for a product of spectral
/// matrices before switching to the global relation.
pub const RELATION_SWITCH: f64 = 1e2;
/// Relative residual allowed in a tail fit.
pub const TAIL_RESIDUAL_TOL: f64 = 1e-2;
/// Window samples below this make the tail beyond `K_max` zero.
pub const NEGLIGIBLE_TAIL: f64 = 1e-6;
pub const SCHEMA: &str = "bqhl/1";

/// Ray carrying `r_j`.
pub fn ray_of(j: usize) -> usize {
    match j {
        1 => 1,
        2 => 7,
        3 | 4 => 2,
        _ => panic!("reflection index must be 1..=4"),
    }
}

/// Columns needed for the coefficients living on `ray` and their identities.
pub fn request_for_ray(ray: usize) -> SpectralRequest {
    let (y, n) = (true, false);
    match ray {
        1 => SpectralRequest {
            s: [y, y, n],
            sa: [n, n, y],
            big_s: [n, n, y],
            big_sa: [y, n, n],
            s_final: [y, y, n],
            sa_final: [n, n, y],
        },
        7 => SpectralRequest { sa: [y, y, n], big_sa: [n, n, y], ..Default::default() },
        2 => SpectralRequest { s: [y, n, n], sa: [n, n, y], big_sa: [y, n, n], s_final: [y, n, n], ..Default::default() },
        _ => SpectralRequest::all(),
    }
}

fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `sᴸ = (Sᴬ)ᵀ s`; entries depending on uncomputed columns are NaN.
pub fn compute_sl(m: &SpectralMatrices) -> Mat3 {
    m.big_sa.transpose() * m.s
}

/// Entry `(i, j)` of `sᴸ = S⁻¹s` (1-based). The matrix product is used while its
/// growth stays below [`RELATION_SWITCH`]; otherwise the global relation
/// `sᴸ = e^{−T𝒵̂} μ_3(0, T, k)` supplies the entry from the final profile.
pub fn sl_entry(m: &SpectralMatrices, i: usize, j: usize) -> Result<C64> {
    let growth = growth_exponent(Family::T, true, i, m.k, m.t_end) + growth_exponent(Family::X, false, j, m.k, m.x_max);
    let direct: C64 = (0..3).map(|l| m.big_sa[(l, i - 1)] * m.s[(l, j - 1)]).sum();
    let relation = match (&m.s_final, m.s_final_cols[j - 1]) {
        (Some(fin), true) => {
            let (_, z) = lz_values(m.k);
            Some(fin[(i - 1, j - 1)] * (-(z[i - 1] - z[j - 1]) * m.t_end).exp())
        }
        _ => None,
    };
    pick(direct, growth, relation, m.k, j)
}

/// Entry `(i, j)` of `Sᵀsᴬ`, with the adjoint global relation
/// `Sᵀsᴬ = e^{T𝒵̂} μ_3ᴬ(0, T, k)` as fallback.
pub fn st_sa_entry(m: &SpectralMatrices, i: usize, j: usize) -> Result<C64> {
    let growth = growth_exponent(Family::T, false, i, m.k, m.t_end) + growth_exponent(Family::X, true, j, m.k, m.x_max);
    let direct: C64 = (0..3).map(|l| m.big_s[(l, i - 1)] * m.sa[(l, j - 1)]).sum();
    let relation = match (&m.sa_final, m.sa_final_cols[j - 1]) {
        (Some(fin), true) => {
            let (_, z) = lz_values(m.k);
            Some(fin[(i - 1, j - 1)] * ((z[i - 1] - z[j - 1]) * m.t_end).exp())
        }
        _ => None,
    };
    pick(direct, growth, relation, m.k, j)
}

fn pick(direct: C64, growth: f64, relation: Option<C64>, k: C64, column: usize) -> Result<C64> {
    if is_finite(direct) && growth <= RELATION_SWITCH.ln() {
        return Ok(direct);
    }
    match relation {
        Some(r) if is_finite(r) => Ok(r),
        _ if is_finite(direct) => Ok(direct),
        _ => Err(Error::UnboundedColumn { column, k }),
    }
}

fn checked_quotient(num: C64, den: C64, what: &str, k: C64) -> Result<C64> {
    if !is_finite(num) || !is_finite(den) {
        return Err(Error::Numerical(format!("{what} unavailable at k = {k}")));
    }
    if den.norm() < DENOMINATOR_TOL {
        return Err(Error::Assumption(format!("{what} vanishes at k = {k}")));
    }
    Ok(num / den)
}

/// Denominator of `r₂`: `sᴬ₁₁Sᴬ₃₃ − sᴬ₃₁Sᴬ₁₃`.
pub fn r2_denominator(m: &SpectralMatrices) -> C64 {
    m.sa[(0, 0)] * m.big_sa[(2, 2)] - m.sa[(2, 0)] * m.big_sa[(0, 2)]
}

/// Denominator of `r₄`: `sᴬ₃₃Sᴬ₁₁ − sᴬ₁₃Sᴬ₃₁`.
pub fn r4_denominator(m: &SpectralMatrices) -> C64 {
    m.sa[(2, 2)] * m.big_sa[(0, 0)] - m.sa[(0, 2)] * m.big_sa[(2, 0)]
}

/// The quotient defining `r_j`, evaluated at `m.k` without checking the ray.
pub fn reflection_formula(j: usize, m: &SpectralMatrices) -> Result<C64> {
    let k = m.k;
    match j {
        1 => checked_quotient(sl_entry(m, 1, 2)?, sl_entry(m, 1, 1)?, "sᴸ₁₁", k),
        2 => {
            let num = m.sa[(0, 1)] * m.big_sa[(2, 2)] - m.sa[(2, 1)] * m.big_sa[(0, 2)];
            checked_quotient(num, r2_denominator(m), "sᴬ₁₁Sᴬ₃₃ − sᴬ₃₁Sᴬ₁₃", k)
        }
        3 => {
            let den = m.sa[(2, 2)] * sl_entry(m, 1, 1)?;
            checked_quotient(m.big_sa[(2, 0)], den, "sᴬ₃₃·sᴸ₁₁", k)
        }
        4 => {
            let q = checked_quotient(m.big_sa[(2, 0)], m.sa[(2, 2)], "sᴬ₃₃", k)?;
            Ok(q * checked_quotient(m.s[(1, 0)], r4_denominator(m), "sᴬ₃₃Sᴬ₁₁ − sᴬ₁₃Sᴬ₃₁", k)?)
        }
        _ => Err(Error::InvalidInput(format!("no reflection coefficient r{j}"))),
    }
}

/// `r_j(k)` for `k` on the ray carrying `r_j`.
pub fn reflection_coefficient(j: usize, k: C64, m: &SpectralMatrices) -> Result<C64> {
    if !(1..=4).contains(&j) {
        return Err(Error::InvalidInput(format!("no reflection coefficient r{j}")));
    }
    if (m.k - k).norm() > 1e-14 * k.norm().max(1.0) {
        return Err(Error::InvalidInput("spectral matrices belong to a different k".into()));
    }
    let ray = ray_of(j);
    if classify(k)? != Location::Ray(ray) {
        return Err(Error::InvalidInput(format!("r{j} is defined on ray {ray}, not at k = {k}")));
    }
    reflection_formula(j, m)
}

/// Spectral data needed on one ray, evaluated at distance `rho`.
pub fn ray_matrices(ray: usize, rho: f64, data: &CauchyData, settings: &OdeSettings) -> Result<SpectralMatrices> {
    spectral_matrices(ray_point(ray, rho), data, &request_for_ray(ray), &ColumnPolicy::default(), settings)
}

/// All coefficients carried by `ray` at distance `rho`, as `(j, r_j)`.
pub fn evaluate_ray(ray: usize, rho: f64, data: &CauchyData, settings: &OdeSettings) -> Result<Vec<(usize, C64)>> {
    let m = ray_matrices(ray, rho, data, settings)?;
    let js: &[usize] = match ray {
        1 => &[1],
        7 => &[2],
        2 => &[3, 4],
        _ => return Err(Error::InvalidInput(format!("no reflection coefficient lives on ray {ray}"))),
    };
    js.iter().map(|&j| Ok((j, reflection_coefficient(j, m.k, &m)?))).collect()
}

/// Both sides of the conjugation identity behind the `r₂` denominator:
/// `(sᴬ₁₁Sᴬ₃₃ − sᴬ₃₁Sᴬ₁₃)(k)` and `conj((sᴬ₃₃Sᴬ₁₁ − sᴬ₁₃Sᴬ₃₁)(ω²k))` for `k < 0`.
pub fn r2_denominator_pair(k: f64, data: &CauchyData, settings: &OdeSettings) -> Result<(C64, C64)> {
    if k >= 0.0 {
        return Err(Error::InvalidInput("the r2 denominator identity needs k < 0".into()));
    }
    let policy = ColumnPolicy::default();
    let direct = spectral_matrices(C64::from(k), data, &request_for_ray(7), &policy, settings)?;
    let rot = spectral_matrices(OMEGA2 * k, data, &request_for_ray(2), &policy, settings)?;
    Ok((r2_denominator(&direct), r4_denominator(&rot).conj()))
}

/// `1 − |r_j(k)|²` and the closed-form right-hand side: for `k > 0`
/// `(Sᵀsᴬ)₃₃ / |(S⁻¹s)₁₁|²`; for `k < 0`
/// `Sᴬ₃₃(k)(S⁻¹s)₁₁(ω²k) / |sᴬ₁₁Sᴬ₃₃ − sᴬ₃₁Sᴬ₁₃|²`.
pub fn unitarity_defect(k: f64, data: &CauchyData, settings: &OdeSettings) -> Result<(f64, f64)> {
    let policy = ColumnPolicy::default();
    if k > 0.0 {
        let m = spectral_matrices(C64::from(k), data, &request_for_ray(1), &policy, settings)?;
        let r1 = reflection_coefficient(1, m.k, &m)?;
        let rhs = st_sa_entry(&m, 3, 3)? / sl_entry(&m, 1, 1)?.norm_sqr();
        Ok((1.0 - r1.norm_sqr(), rhs.re))
    } else if k < 0.0 {
        let m = spectral_matrices(C64::from(k), data, &request_for_ray(7), &policy, settings)?;
        let r2 = reflection_coefficient(2, m.k, &m)?;
        let rot = spectral_matrices(OMEGA2 * k, data, &request_for_ray(2), &policy, settings)?;
        let rhs = m.big_sa[(2, 2)] * sl_entry(&rot, 1, 1)? / r2_denominator(&m).norm_sqr();
        Ok((1.0 - r2.norm_sqr(), rhs.re))
    } else {
        Err(Error::InvalidInput("unitarity identities need k ≠ 0".into()))
    }
}

/// `n` radii on `[r_min, r_max]`, log-spaced with cosine clustering so that
/// both ends are densely sampled.
pub fn graded_nodes(r_min: f64, r_max: f64, n: usize) -> Vec<f64> {
    let ratio = (r_max / r_min).ln();
    (0..n)
        .map(|m| {
            let s = if n == 1 { 0.0 } else { m as f64 / (n - 1) as f64 };
            let w = 0.5 * (1.0 - (std::f64::consts::PI * s).cos());
            r_min * (ratio * w).exp()
        })
        .collect()
}

/// Least-squares fit of `r_j` on the window `[K/2, K]`.
///
/// On every ray the boundary contributes terms carrying `e^{±iφ}`,
/// `φ = √3 T |k|²`, at the same order as the second coefficient, so the basis
/// holds three plain powers plus those phases times `k⁻², k⁻³, k⁻⁴`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailFit {
    /// Leading two powers; `coeffs` are the reported tail coefficients.
    pub powers: [i32; 2],
    pub coeffs: [C64; 2],
    /// Coefficient of the third plain power.
    pub next: C64,
    /// `[p][0]` multiplies `e^{iφ}k^{-2-p}`, `[p][1]` multiplies `e^{-iφ}k^{-2-p}`.
    pub oscillatory: [[C64; 2]; 3],
    /// `√3 T`.
    pub phase_rate: f64,
    /// `‖residual‖ / ‖samples‖` over the window.
    pub relative_residual: f64,
    pub in_sample_rms: f64,
    pub leave_one_out_rms: f64,
    /// `|c₀|` when a constant term is added to the basis.
    pub constant_term: f64,
    pub window_nodes: usize,
}

impl TailFit {
    pub fn eval(&self, k: C64) -> C64 {
        let basis = tail_basis(k, self.powers[0], self.phase_rate);
        let c = self.coefficients();
        basis.iter().zip(&c).map(|(b, c)| b * c).sum()
    }

    fn coefficients(&self) -> [C64; TAIL_TERMS] {
        let o = &self.oscillatory;
        [self.coeffs[0], self.coeffs[1], self.next, o[0][0], o[0][1], o[1][0], o[1][1], o[2][0], o[2][1]]
    }
}

const TAIL_TERMS: usize = 9;
/// Extra samples placed in the fit window on top of the graded nodes.
pub const TAIL_WINDOW_NODES: usize = 40;

fn tail_basis(k: C64, lead: i32, phase_rate: f64) -> [C64; TAIL_TERMS] {
    let e = C64::from_polar(1.0, phase_rate * k.norm_sqr());
    let (p2, p3, p4) = (k.powi(-2), k.powi(-3), k.powi(-4));
    [k.powi(lead), k.powi(lead - 1), k.powi(lead - 2), e * p2, e.conj() * p2, e * p3, e.conj() * p3, e * p4, e.conj() * p4]
}

/// Radii of the dedicated tail-window samples: geometric on `[K/2, K]`.
pub fn tail_window_nodes(k_max: f64) -> Vec<f64> {
    let n = TAIL_WINDOW_NODES;
    (0..n).map(|i| 0.5 * k_max * 2f64.powf(i as f64 / (n - 1) as f64)).collect()
}

fn nan_from_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Polynomial-in-`k` extrapolation of `r_j` to the origin along its ray.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OriginLimit {
    /// `r(0)`, `r′(0)`, `r″(0)` (derivatives along `k`).
    pub value: C64,
    pub derivative: C64,
    pub second_derivative: C64,
    /// Change of `r(0)` when the largest radius is dropped.
    pub error: f64,
    /// Local slope of `log|r|` against `log|k|` at the smallest radii; NaN
    /// (written as `null`) when `r` vanishes there.
    #[serde(deserialize_with = "nan_from_null")]
    pub slope_exponent: f64,
    pub radii: Vec<f64>,
    pub samples: Vec<C64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RaySamples {
    pub j: usize,
    pub ray: usize,
    pub nodes: Vec<C64>,
    pub values: Vec<C64>,
    pub tail: Option<TailFit>,
    /// Why no tail fit is available, when the window is not negligible.
    #[serde(default)]
    pub tail_error: Option<String>,
    pub origin: Option<OriginLimit>,
}

impl RaySamples {
    /// Largest `|r|` over samples in `[K_max/2, K_max]`.
    pub fn window_max(&self, k_max: f64) -> f64 {
        self.nodes.iter().zip(&self.values).filter(|(k, _)| k.norm() >= 0.5 * k_max * (1.0 - 1e-12)).fold(0.0, |m, (_, v)| m.max(v.norm()))
    }

    pub fn angle_deg(&self) -> f64 {
        ray_angle(self.ray).to_degrees()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralDataSet {
    pub t_end: f64,
    pub k_max: f64,
    pub rays: Vec<RaySamples>,
    pub assumptions: Option<AssumptionReport>,
}

/// Default number of halvings below `R_MIN` for origin extrapolation.
pub const ORIGIN_LEVELS: usize = 6;
const SLOPE_RADII: usize = 3;

/// Radii used for origin extrapolation: `R_MIN · 2^{-m}`.
pub fn origin_radii(levels: usize) -> Vec<f64> {
    (0..levels).map(|m| R_MIN / 2f64.powi(m as i32)).collect()
}

impl SpectralDataSet {
    /// Samples `r₁…r₄` on `nodes` graded nodes per ray in `[R_MIN, k_max]`
    /// plus the tail-window nodes.
    pub fn sample(data: &CauchyData, k_max: f64, nodes: usize, settings: &OdeSettings) -> Result<Self> {
        let mut radii = graded_nodes(R_MIN, k_max, nodes);
        radii.extend(tail_window_nodes(k_max));
        radii.sort_by(f64::total_cmp);
        radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        let mut rays = Vec::new();
        for (ray, js) in [(1usize, vec![1usize]), (7, vec![2]), (2, vec![3, 4])] {
            let mut per_j: Vec<Vec<C64>> = vec![Vec::new(); js.len()];
            for &rho in &radii {
                let vals = evaluate_ray(ray, rho, data, settings)?;
                for (slot, (_, r)) in per_j.iter_mut().zip(vals) {
                    slot.push(r);
                }
            }
            for (j, values) in js.iter().zip(per_j) {
                let nodes = radii.iter().map(|&r| ray_point(ray, r)).collect();
                rays.push(RaySamples { j: *j, ray, nodes, values, tail: None, tail_error: None, origin: None });
            }
        }
        rays.sort_by_key(|r| r.j);
        Ok(SpectralDataSet { t_end: data.t_end(), k_max, rays, assumptions: None })
    }

    pub fn ray(&self, j: usize) -> &RaySamples {
        self.rays.iter().find(|r| r.j == j).expect("all four coefficients are sampled")
    }

    /// Fits the large-`k` tails of all four coefficients. A coefficient whose
    /// window samples stay below `NEGLIGIBLE_TAIL` gets no fit and is zero
    /// beyond `K_max`; a failed fit is recorded in `tail_error`.
    pub fn fit_tails(&mut self) {
        for r in self.rays.iter_mut() {
            r.tail = None;
            r.tail_error = None;
            if r.window_max(self.k_max) < NEGLIGIBLE_TAIL {
                continue;
            }
            match fit_tail(r.j, &r.nodes, &r.values, self.k_max, self.t_end) {
                Ok(t) => r.tail = Some(t),
                Err(e) => r.tail_error = Some(e.to_string()),
            }
        }
    }

    /// Adds direct samples at `radii` (those not already present) on all
    /// three rays, keeping nodes sorted by modulus.
    pub fn add_samples(&mut self, data: &CauchyData, radii: &[f64], settings: &OdeSettings) -> Result<()> {
        for ray in [1usize, 7, 2] {
            let present: Vec<f64> = self.rays.iter().find(|r| r.ray == ray).map(|r| r.nodes.iter().map(|k| k.norm()).collect()).unwrap_or_default();
            for &rho in radii {
                if present.iter().any(|p| (p - rho).abs() <= 1e-12 * rho) {
                    continue;
                }
                for (j, v) in evaluate_ray(ray, rho, data, settings)? {
                    if let Some(slot) = self.rays.iter_mut().find(|r| r.j == j) {
                        slot.nodes.push(ray_point(ray, rho));
                        slot.values.push(v);
                    }
                }
            }
        }
        for r in self.rays.iter_mut() {
            let mut pairs: Vec<(C64, C64)> = r.nodes.iter().copied().zip(r.values.iter().copied()).collect();
            pairs.sort_by(|a, b| a.0.norm().total_cmp(&b.0.norm()));
            (r.nodes, r.values) = pairs.into_iter().unzip();
        }
        Ok(())
    }

    /// Extrapolates all four coefficients to `k = 0`.
    pub fn origin_limits(&mut self, data: &CauchyData, levels: usize, settings: &OdeSettings) -> Result<()> {
        let radii = origin_radii(levels);
        for ray in [1usize, 7, 2] {
            let mut per_j: Vec<(usize, Vec<C64>)> = Vec::new();
            for &rho in &radii {
                for (j, r) in evaluate_ray(ray, rho, data, settings)? {
                    match per_j.iter_mut().find(|(jj, _)| *jj == j) {
                        Some((_, v)) => v.push(r),
                        None => per_j.push((j, vec![r])),
                    }
                }
            }
            for (j, samples) in per_j {
                let lim = extrapolate_origin(ray, &radii, &samples)?;
                if let Some(slot) = self.rays.iter_mut().find(|r| r.j == j) {
                    slot.origin = Some(lim);
                }
            }
        }
        Ok(())
    }

    /// Tail identity `r₄⁽²⁾ = (conj(r₁⁽¹⁾) − ω²r₃⁽¹⁾)·r₃⁽¹⁾`: returns both sides.
    pub fn tail_identity(&self) -> Option<(C64, C64)> {
        let r1 = self.ray(1).tail.as_ref()?.coeffs[0];
        let r3 = self.ray(3).tail.as_ref()?.coeffs[0];
        let r4 = self.ray(4).tail.as_ref()?.coeffs[0];
        Some((r4, (r1.conj() - OMEGA2 * r3) * r3))
    }

    pub fn to_json(&self) -> Result<String> {
        let rays: Vec<RayJson> = self
            .rays
            .iter()
            .map(|r| RayJson {
                j: r.j,
                angle_deg: r.angle_deg(),
                samples: r.nodes.iter().zip(&r.values).map(|(k, v)| [k.re, k.im, v.re, v.im]).collect(),
                tail: r.tail.as_ref().map(|t| [t.coeffs[0].re, t.coeffs[0].im, t.coeffs[1].re, t.coeffs[1].im]),
                origin: r.origin.as_ref().map(|o| [o.value.re, o.value.im]),
                tail_fit: r.tail.clone(),
                tail_error: r.tail_error.clone(),
                origin_fit: r.origin.clone(),
            })
            .collect();
        let doc = DatasetJson { schema: SCHEMA.into(), rays, t: self.t_end, k_max: self.k_max, assumptions: self.assumptions.clone() };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DatasetJson = serde_json::from_str(text)?;
        if doc.schema != SCHEMA {
            return Err(Error::Schema(format!("expected schema {SCHEMA}, found {}", doc.schema)));
        }
        let mut rays = Vec::new();
        for r in doc.rays {
            if !(1..=4).contains(&r.j) {
                return Err(Error::Schema(format!("unknown coefficient r{}", r.j)));
            }
            let ray = ray_of(r.j);
            if (ray_angle(ray).to_degrees() - r.angle_deg).abs() > 1e-9 {
                return Err(Error::Schema(format!("r{} must live at {}°", r.j, ray_angle(ray).to_degrees())));
            }
            let nodes = r.samples.iter().map(|s| C64::new(s[0], s[1])).collect();
            let values = r.samples.iter().map(|s| C64::new(s[2], s[3])).collect();
            rays.push(RaySamples { j: r.j, ray, nodes, values, tail: r.tail_fit, tail_error: r.tail_error, origin: r.origin_fit });
        }
        for j in 1..=4 {
            if !rays.iter().any(|r| r.j == j) {
                return Err(Error::Schema(format!("missing coefficient r{j}")));
            }
        }
        rays.sort_by_key(|r| r.j);
        Ok(SpectralDataSet { t_end: doc.t, k_max: doc.k_max, rays, assumptions: doc.assumptions })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RayJson {
    j: usize,
    angle_deg: f64,
    samples: Vec<[f64; 4]>,
    tail: Option<[f64; 4]>,
    origin: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail_fit: Option<TailFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin_fit: Option<OriginLimit>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetJson {
    schema: String,
    rays: Vec<RayJson>,
    #[serde(rename = "T")]
    t: f64,
    k_max: f64,
    assumptions: Option<AssumptionReport>,
}

/// Complex least squares `min ‖A c − b‖` via QR.
fn lstsq(a: &DMatrix<C64>, b: &DVector<C64>) -> Result<DVector<C64>> {
    let qr = a.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..r.ncols()).map(|i| r[(i, i)].norm()).collect();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    if !(lo > 1e-13 * hi) {
        return Err(Error::Numerical("ill-conditioned least-squares fit".into()));
    }
    let qtb = qr.q().adjoint() * b;
    r.solve_upper_triangular(&qtb).ok_or_else(|| Error::Numerical("ill-conditioned least-squares fit".into()))
}

/// Scaled design matrix: columns are normalised to unit maximum so the QR
/// conditioning check sees the geometry of the basis, not its scale.
fn design(ks: &[C64], cols: usize, f: &dyn Fn(C64) -> Vec<C64>) -> (DMatrix<C64>, Vec<f64>) {
    let mut a = DMatrix::from_fn(ks.len(), cols, |i, p| f(ks[i])[p]);
    let scale: Vec<f64> = (0..cols).map(|p| a.column(p).iter().fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE)).collect();
    for (p, sc) in scale.iter().enumerate() {
        a.column_mut(p).scale_mut(1.0 / sc);
    }
    (a, scale)
}

fn scaled_lstsq(ks: &[C64], rs: &[C64], cols: usize, f: &dyn Fn(C64) -> Vec<C64>) -> Result<Vec<C64>> {
    let (a, scale) = design(ks, cols, f);
    let c = lstsq(&a, &DVector::from_column_slice(rs))?;
    Ok(c.iter().zip(&scale).map(|(c, s)| c / *s).collect())
}

/// Tail fit of `r_j` with leading powers `k⁻¹, k⁻²` (for `r₄`: `k⁻², k⁻³`).
pub fn fit_tail(j: usize, nodes: &[C64], values: &[C64], k_max: f64, t_end: f64) -> Result<TailFit> {
    let lead = if j == 4 { -2 } else { -1 };
    let powers = [lead, lead - 1];
    let phase_rate = 3f64.sqrt() * t_end;
    let (ks, rs): (Vec<C64>, Vec<C64>) = nodes
        .iter()
        .zip(values)
        .filter(|(k, _)| k.norm() >= 0.5 * k_max * (1.0 - 1e-12) && k.norm() <= k_max * (1.0 + 1e-12))
        .map(|(k, r)| (*k, *r))
        .unzip();
    if ks.len() < 6.max(TAIL_TERMS + 2) {
        return Err(Error::InvalidInput(format!("tail fit of r{j} needs ≥ {} samples in [K/2, K], found {}", TAIL_TERMS + 2, ks.len())));
    }
    let norm_b = rs.iter().map(|r| r.norm_sqr()).sum::<f64>().sqrt();
    let n = ks.len();
    let mut fit = TailFit {
        powers,
        coeffs: [ZERO; 2],
        next: ZERO,
        oscillatory: [[ZERO; 2]; 3],
        phase_rate,
        relative_residual: 0.0,
        in_sample_rms: 0.0,
        leave_one_out_rms: 0.0,
        constant_term: 0.0,
        window_nodes: n,
    };
    if norm_b == 0.0 {
        return Ok(fit);
    }
    let basis = |k: C64| tail_basis(k, lead, phase_rate).to_vec();
    let c = scaled_lstsq(&ks, &rs, TAIL_TERMS, &basis)?;
    fit.coeffs = [c[0], c[1]];
    fit.next = c[2];
    fit.oscillatory = [[c[3], c[4]], [c[5], c[6]], [c[7], c[8]]];
    let resid: f64 = ks.iter().zip(&rs).map(|(k, r)| (fit.eval(*k) - r).norm_sqr()).sum::<f64>().sqrt();
    fit.relative_residual = resid / norm_b;
    if fit.relative_residual > TAIL_RESIDUAL_TOL {
        return Err(Error::Numerical(format!("tail fit of r{j} leaves relative residual {:.2e}", fit.relative_residual)));
    }
    fit.in_sample_rms = resid / (n as f64).sqrt();
    let mut loo = 0.0;
    for skip in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&i| i != skip).collect();
        let ks_s: Vec<C64> = keep.iter().map(|&i| ks[i]).collect();
        let rs_s: Vec<C64> = keep.iter().map(|&i| rs[i]).collect();
        let c_s = scaled_lstsq(&ks_s, &rs_s, TAIL_TERMS, &basis)?;
        let pred: C64 = basis(ks[skip]).iter().zip(&c_s).map(|(b, c)| b * c).sum();
        loo += (pred - rs[skip]).norm_sqr();
    }
    fit.leave_one_out_rms = (loo / n as f64).sqrt();
    let augmented = |k: C64| {
        let mut v = vec![C64::from(1.0)];
        v.extend(tail_basis(k, lead, phase_rate));
        v
    };
    fit.constant_term = scaled_lstsq(&ks, &rs, TAIL_TERMS + 1, &augmented)?[0].norm();
    Ok(fit)
}

/// Interpolating polynomial in `k` through `(k_m, f_m)`; returns its first
/// three Taylor coefficients at 0 and the change of the constant term when the
/// point farthest from the origin is dropped.
pub fn polynomial_extrapolation(ks: &[C64], fs: &[C64]) -> Result<([C64; 3], f64)> {
    if ks.len() < 3 {
        return Err(Error::InvalidInput("origin extrapolation needs at least three radii".into()));
    }
    let solve = |ks: &[C64], fs: &[C64]| -> Result<DVector<C64>> {
        // Scale k by the largest radius to keep the Vandermonde matrix tame.
        let scale = ks.iter().fold(0.0f64, |m, k| m.max(k.norm()));
        let n = ks.len();
        let v = DMatrix::from_fn(n, n, |i, p| (ks[i] / scale).powi(p as i32));
        let c = v
            .lu()
            .solve(&DVector::from_column_slice(fs))
            .ok_or_else(|| Error::Numerical("origin extrapolation diverged".into()))?;
        Ok(DVector::from_iterator(n, (0..n).map(|p| c[p] / scale.powi(p as i32))))
    };
    let far = (0..ks.len()).max_by(|&a, &b| ks[a].norm().partial_cmp(&ks[b].norm()).unwrap()).unwrap();
    let c = solve(ks, fs)?;
    let keep: Vec<usize> = (0..ks.len()).filter(|&i| i != far).collect();
    let c_red = solve(&keep.iter().map(|&i| ks[i]).collect::<Vec<_>>(), &keep.iter().map(|&i| fs[i]).collect::<Vec<_>>())?;
    if !c.iter().all(|z| is_finite(*z)) {
        return Err(Error::Numerical("origin extrapolation diverged".into()));
    }
    Ok(([c[0], c[1], c[2] * 2.0], (c[0] - c_red[0]).norm()))
}

/// Least-squares slope of `log|r|` against `log|k|` over the three smallest radii.
fn slope_exponent(radii: &[f64], samples: &[C64]) -> f64 {
    let mut pts: Vec<(f64, f64)> = radii.iter().zip(samples).filter(|(_, s)| s.norm() > 0.0).map(|(r, s)| (r.ln(), s.norm().ln())).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.truncate(SLOPE_RADII);
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn extrapolate_origin(ray: usize, radii: &[f64], samples: &[C64]) -> Result<OriginLimit> {
    let ks: Vec<C64> = radii.iter().map(|&r| ray_point(ray, r)).collect();
    let (c, error) = polynomial_extrapolation(&ks, samples)?;
    Ok(OriginLimit {
        value: c[0],
        derivative: c[1],
        second_derivative: c[2],
        error,
        slope_exponent: slope_exponent(radii, samples),
        radii: radii.to_vec(),
        samples: samples.to_vec(),
    })
}

/// Minimum modulus of a scanned function and where it was attained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanMinimum {
    pub name: String,
    pub min_modulus: f64,
    pub at: C64,
    pub points: usize,
}

/// Extrapolated `k → 0` limit with its error bar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub name: String,
    pub value: C64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Non-vanishing conditions on the closed sectors.
    pub minima: Vec<ScanMinimum>,
    /// Extra hypotheses of the `|r₁| < 1`, `|r₂| < 1` statements; reported, not gating.
    pub extra_minima: Vec<ScanMinimum>,
    pub limits: Vec<LimitEstimate>,
    /// Winding number of `(S⁻¹s)₁₁` around the boundary of the scanned sector.
    pub winding: i64,
    pub threshold: f64,
    pub pass: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings {
    pub k_max: f64,
    pub radii: usize,
    pub angles_per_sector: usize,
    pub origin_levels: usize,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings { k_max: 10.0, radii: 16, angles_per_sector: 16, origin_levels: ORIGIN_LEVELS }
    }
}

fn scan_request() -> SpectralRequest {
    let (y, n) = (true, false);
    SpectralRequest { s: [y, n, n], sa: [n, n, y], big_sa: [y, n, n], s_final: [y, n, n], ..Default::default() }
}

/// `(S⁻¹s)₁₁` at `k`.
fn sl11_at(k: C64, data: &CauchyData, settings: &OdeSettings) -> Result<C64> {
    let m = spectral_matrices(k, data, &scan_request(), &ColumnPolicy::default(), settings)?;
    sl_entry(&m, 1, 1)
}

struct Tracker {
    name: &'static str,
    best: Option<(f64, C64)>,
    points: usize,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Tracker { name, best: None, points: 0 }
    }

    fn push(&mut self, k: C64, v: C64) {
        self.points += 1;
        let m = v.norm();
        if self.best.is_none_or(|(b, _)| m < b) {
            self.best = Some((m, k));
        }
    }

    fn finish(self) -> ScanMinimum {
        let (min_modulus, at) = self.best.unwrap_or((f64::NAN, ZERO));
        ScanMinimum { name: self.name.into(), min_modulus, at, points: self.points }
    }
}

/// Winding number of `f` along the closed polygon through `path`, refining
/// segments whose argument increment exceeds `π/4`.
fn winding_number(path: &[C64], f: &dyn Fn(C64) -> Result<C64>) -> Result<i64> {
    let mut total = 0.0;
    let mut prev_k = path[0];
    let mut prev_v = f(prev_k)?;
    let first_v = prev_v;
    for idx in 1..=path.len() {
        let target = if idx == path.len() { path[0] } else { path[idx] };
        let mut stack = vec![target];
        while let Some(next) = stack.pop() {
            let v = if next == path[0] && idx == path.len() { first_v } else { f(next)? };
            let d = (v / prev_v).arg();
            if d.abs() > std::f64::consts::FRAC_PI_4 && (next - prev_k).norm() > 1e-9 {
                stack.push(next);
                stack.push((prev_k + next) * 0.5);
                continue;
            }
            total += d;
            prev_k = next;
            prev_v = v;
        }
    }
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
}

/// Scans the non-vanishing conditions on `D̄₁ ∪ D̄₂` (`0 ≤ arg k ≤ π/3`) and
/// extrapolates the eight genericity limits at the origin.
pub fn assumption_scan(data: &CauchyData, scan: &ScanSettings, settings: &OdeSettings) -> Result<AssumptionReport> {
    use std::f64::consts::PI;
    let radii: Vec<f64> = (0..scan.radii)
        .map(|m| R_MIN * (scan.k_max / R_MIN).powf(m as f64 / (scan.radii - 1).max(1) as f64))
        .collect();
    let na = scan.angles_per_sector;
    let policy = ColumnPolicy::default();
    let mut f1 = Tracker::new("(S⁻¹s)₁₁ on D̄₁∪D̄₂");
    let mut f2 = Tracker::new("sᴬ₃₃ on D̄₁");
    let mut f3 = Tracker::new("sᴬ₃₃Sᴬ₁₁ − sᴬ₁₃Sᴬ₃₁ on D̄₂");
    for a in 0..=2 * na {
        let angle = a as f64 * PI / 6.0 / na as f64;
        let (in_d1, in_d2) = (a <= na, a >= na);
        for &rho in &radii {
            let k = C64::from_polar(rho, angle);
            let m = spectral_matrices(k, data, &scan_request(), &policy, settings)?;
            f1.push(k, sl_entry(&m, 1, 1)?);
            if in_d1 {
                f2.push(k, m.sa[(2, 2)]);
            }
            if in_d2 {
                f3.push(k, r4_denominator(&m));
            }
        }
    }

    let mut g1 = Tracker::new("(Sᵀsᴬ)₃₃ on k > 0");
    let mut g2 = Tracker::new("Sᴬ₃₃ on k < 0");
    for &rho in &radii {
        let m = spectral_matrices(C64::from(rho), data, &request_for_ray(1), &policy, settings)?;
        g1.push(m.k, st_sa_entry(&m, 3, 3)?);
        let m = spectral_matrices(C64::from(-rho), data, &request_for_ray(7), &policy, settings)?;
        g2.push(m.k, m.big_sa[(2, 2)]);
    }

    // Boundary of the scanned sector, traversed counter-clockwise.
    let (r0, r1) = (R_MIN, scan.k_max);
    let mut path = Vec::new();
    for &rho in &radii {
        path.push(C64::from(rho));
    }
    for a in 1..=2 * na {
        path.push(C64::from_polar(r1, a as f64 * PI / 6.0 / na as f64));
    }
    for &rho in radii.iter().rev().skip(1) {
        path.push(C64::from_polar(rho, PI / 3.0));
    }
    for a in (1..2 * na).rev() {
        path.push(C64::from_polar(r0, a as f64 * PI / 6.0 / na as f64));
    }
    let winding = winding_number(&path, &|k| sl11_at(k, data, settings))?;

    let limits = genericity_limits(data, scan.origin_levels, settings)?;

    let minima = vec![f1.finish(), f2.finish(), f3.finish()];
    let extra_minima = vec![g1.finish(), g2.finish()];
    let mut failures = Vec::new();
    for m in &minima {
        if !(m.min_modulus > ZERO_THRESHOLD) {
            failures.push(format!("{} reaches {:.3e} at k = {:.6}", m.name, m.min_modulus, m.at));
        }
    }
    for l in &limits {
        if !(l.value.norm() > ZERO_THRESHOLD) {
            failures.push(format!("{} = {:.3e} (±{:.1e})", l.name, l.value.norm(), l.error));
        }
    }
    if winding != 0 {
        failures.push(format!("(S⁻¹s)₁₁ winds {winding} times around the sector boundary"));
    }
    Ok(AssumptionReport { minima, extra_minima, limits, winding, threshold: ZERO_THRESHOLD, pass: failures.is_empty(), failures })
}

/// The eight `k → 0` limits required for generic behaviour at the origin.
pub fn genericity_limits(data: &CauchyData, levels: usize, settings: &OdeSettings) -> Result<Vec<LimitEstimate>> {
    use std::f64::consts::PI;
    let radii = origin_radii(levels);
    let policy = ColumnPolicy::default();
    let along = |angle: f64, f: &dyn Fn(&SpectralMatrices) -> Result<C64>| -> Result<(Vec<C64>, Vec<C64>)> {
        let mut ks = Vec::new();
        let mut vs = Vec::new();
        for &rho in &radii {
            let k = C64::from_polar(rho, angle);
            let m = spectral_matrices(k, data, &SpectralRequest::all(), &policy, settings)?;
            ks.push(k);
            vs.push(f(&m)?);
        }
        Ok((ks, vs))
    };
    let limit = |name: &str, (ks, vs): (Vec<C64>, Vec<C64>)| -> Result<LimitEstimate> {
        let (c, error) = polynomial_extrapolation(&ks, &vs)?;
        Ok(LimitEstimate { name: name.into(), value: c[0], error })
    };
    let mut out = Vec::new();
    out.push(limit("k²s₃₃", along(PI, &|m| Ok(m.k * m.k * m.s[(2, 2)]))?)?);
    out.push(limit("k²sᴬ₃₃", along(0.0, &|m| Ok(m.k * m.k * m.sa[(2, 2)]))?)?);
    out.push(limit("k²S₃₃", along(0.0, &|m| Ok(m.k * m.k * m.big_s[(2, 2)]))?)?);
    let sa_lead = limit("k²Sᴬ₃₃", along(0.0, &|m| Ok(m.k * m.k * m.big_sa[(2, 2)]))?)?;
    let lead = sa_lead.value;
    out.push(sa_lead);
    out.push(limit("k(Sᴬ₃₃ − k⁻²𝒮ᴬ)", along(0.0, &|m| Ok(m.k * m.big_sa[(2, 2)] - lead / m.k))?)?);
    out.push(limit("k(Sᴬ₃₂ − k⁻²𝒮ᴬ)", along(0.0, &|m| Ok(m.k * m.big_sa[(2, 1)] - lead / m.k))?)?);
    out.push(limit("k²(S⁻¹s)₁₁", along(PI / 12.0, &|m| Ok(m.k * m.k * sl_entry(m, 1, 1)?))?)?);
    out.push(limit("k³(sᴬ₃₃Sᴬ₁₁ − sᴬ₁₃Sᴬ₃₁)", along(PI / 4.0, &|m| Ok(m.k.powi(3) * r4_denominator(m)))?)?);
    Ok(out)
}

/// `ω^n` re-exported for callers composing symmetry checks.
pub fn rotation(n: i64) -> C64 {
    omega_pow(n)
}

/// Value of `ω` (the `r₁(0)` limit for generic data).
pub const R1_AT_ZERO: C64 = OMEGA;
