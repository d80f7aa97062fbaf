//! Vector RH problem for `n` on the twelve-ray contour: mesh, jump matrices,
//! Nyström collocation of the Cauchy density and recovery of `u`, `v`.
//!
//! The density `φ = n₊ − n₋` obeys `φ(ωk) = ω̄ φ(k) 𝒜`, so only rays 1–4 carry
//! unknowns; the other eight enter the Cauchy kernel as rotated copies.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{l_matrix, matrix_a, n_infinity, omega_pow, ray_angle, theta, z_matrix, Mat3, Row3, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::krylov::{gmres, LinearOperator};
use crate::reflection::{SpectralDataSet, NEGLIGIBLE_TAIL};

/// Default truncation radius of the contour.
pub const R_TRUNC: f64 = 60.0;
/// Relative condition estimate above which a solve is rejected.
pub const COND_LIMIT: f64 = 1e10;
/// Below this radius reflection coefficients come from the origin expansion.
pub const DIRECT_SAMPLE_MIN: f64 = 1e-3;

/// Which density components can be nonzero on rays 1–4 (0-based).
const SUPPORT: [&[usize]; 4] = [&[0, 1], &[2], &[1, 2], &[1]];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSettings {
    pub nodes_per_panel: usize,
    /// Grading scale at the origin: panels shrink geometrically below it.
    pub r_min: f64,
    /// Number of geometric panels below `r_min`; one more panel reaches 0.
    pub origin_levels: usize,
    /// Length ratio of consecutive panels below `r_min`.
    pub origin_ratio: f64,
    /// Panels of length at most `core_panel` cover `[r_min, core_radius]`.
    pub core_radius: f64,
    pub core_panel: f64,
    pub r_trunc: f64,
    /// Length of the first panel beyond `core_radius`.
    pub tail_panel: f64,
    /// Length ratio of consecutive panels beyond `core_radius`.
    pub tail_ratio: f64,
    /// Bounds for the phase of the jump: beyond `core_radius` moment
    /// integrals resolve `√3 phase_x + 2√3 ρ phase_t` radians per unit radius.
    /// Take `phase_x ≥ |x| + X` and `phase_t ≥ t + T`.
    pub phase_x: f64,
    pub phase_t: f64,
}

impl Default for MeshSettings {
    fn default() -> Self {
        MeshSettings { nodes_per_panel: 16, r_min: 0.05, origin_levels: 10, origin_ratio: 4.0, core_radius: 3.0, core_panel: 0.2, r_trunc: R_TRUNC, tail_panel: 0.4, tail_ratio: 1.3, phase_x: 60.0, phase_t: 2.0 }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * z * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Radial Gauss–Legendre mesh shared by all twelve rays.
#[derive(Debug, Clone)]
pub struct ContourMesh {
    pub settings: MeshSettings,
    pub panels: Vec<[f64; 2]>,
    /// Node radii in increasing order, `nodes_per_panel` per panel.
    pub radii: Vec<f64>,
    /// Radial quadrature weights.
    pub weights: Vec<f64>,
    pub panel_of: Vec<usize>,
    /// Checkpoints halfway between consecutive radii, with their panel.
    pub midpoints: Vec<(f64, usize)>,
    ref_nodes: Vec<f64>,
    bary: Vec<f64>,
    /// Differentiation matrix on the reference panel, row-major.
    diff: Vec<f64>,
    /// Phase-resolving quadrature on the panels beyond `core_radius`.
    pub fine: Vec<FineNode>,
}

/// Node of the fine quadrature, with the interpolation weights from the
/// nodes of its coarse panel.
#[derive(Debug, Clone)]
pub struct FineNode {
    pub radius: f64,
    pub weight: f64,
    pub panel: usize,
    pub interp: Vec<f64>,
}

/// Order of the fine sub-panels and the phase each may span.
const FINE_ORDER: usize = 16;
const FINE_PHASE: f64 = 16.0;

impl ContourMesh {
    pub fn new(settings: MeshSettings) -> Result<Self> {
        let s = settings;
        if s.nodes_per_panel < 2 || !(s.r_min > 0.0 && s.r_min < s.core_radius && s.core_radius < s.r_trunc) || s.core_panel <= 0.0 || s.tail_panel <= 0.0 || s.tail_ratio < 1.0 || s.origin_ratio <= 1.0 {
            return Err(Error::InvalidInput(format!("inconsistent mesh settings {s:?}")));
        }
        let mut breaks = vec![0.0];
        for m in (0..s.origin_levels).rev() {
            breaks.push(s.r_min / s.origin_ratio.powi(m as i32 + 1));
        }
        breaks.push(s.r_min);
        let core = ((s.core_radius - s.r_min) / s.core_panel).ceil() as usize;
        for i in 1..=core {
            breaks.push(s.r_min + (s.core_radius - s.r_min) * i as f64 / core as f64);
        }
        let mut len = s.tail_panel;
        let mut at = s.core_radius;
        while at < s.r_trunc * (1.0 - 1e-12) {
            at = (at + len).min(s.r_trunc);
            if s.r_trunc - at < 0.25 * len {
                at = s.r_trunc;
            }
            breaks.push(at);
            len *= s.tail_ratio;
        }
        let panels: Vec<[f64; 2]> = breaks.windows(2).map(|w| [w[0], w[1]]).collect();
        let (ref_nodes, ref_weights) = gauss_legendre(s.nodes_per_panel);
        let n = s.nodes_per_panel;
        let bary: Vec<f64> = (0..n).map(|j| 1.0 / (0..n).filter(|&k| k != j).map(|k| ref_nodes[j] - ref_nodes[k]).product::<f64>()).collect();
        let mut diff = vec![0.0; n * n];
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                if i != j {
                    let d = bary[j] / bary[i] / (ref_nodes[i] - ref_nodes[j]);
                    diff[i * n + j] = d;
                    sum += d;
                }
            }
            diff[i * n + i] = -sum;
        }
        let mut radii = Vec::new();
        let mut weights = Vec::new();
        let mut panel_of = Vec::new();
        for (p, [a, b]) in panels.iter().enumerate() {
            let h = 0.5 * (b - a);
            for (x, w) in ref_nodes.iter().zip(&ref_weights) {
                radii.push(a + h * (x + 1.0));
                weights.push(h * w);
                panel_of.push(p);
            }
        }
        let midpoints = radii
            .windows(2)
            .map(|w| {
                let m = 0.5 * (w[0] + w[1]);
                let p = panels.iter().position(|[a, b]| m >= *a && m <= *b).unwrap_or(panels.len() - 1);
                (m, p)
            })
            .collect();
        let mut mesh = ContourMesh { settings, panels, radii, weights, panel_of, midpoints, ref_nodes, bary, diff, fine: Vec::new() };
        let (fx, fw) = gauss_legendre(FINE_ORDER);
        let sq3 = 3f64.sqrt();
        for (p, &[a, b]) in mesh.panels.iter().enumerate() {
            if a < s.core_radius * (1.0 - 1e-12) {
                continue;
            }
            let phase = (sq3 * s.phase_x.abs() + 2.0 * sq3 * b * s.phase_t.abs()) * (b - a);
            let parts = (phase / FINE_PHASE).ceil().max(1.0) as usize;
            let h = (b - a) / parts as f64;
            for q in 0..parts {
                let lo = a + q as f64 * h;
                for (x, w) in fx.iter().zip(&fw) {
                    let radius = lo + 0.5 * h * (x + 1.0);
                    mesh.fine.push(FineNode { radius, weight: 0.5 * h * w, panel: p, interp: mesh.interpolation_weights(p, radius) });
                }
            }
        }
        Ok(mesh)
    }

    /// Same panels with twice the nodes per panel.
    pub fn refined(&self) -> Result<Self> {
        ContourMesh::new(MeshSettings { nodes_per_panel: 2 * self.settings.nodes_per_panel, ..self.settings })
    }

    pub fn radial_count(&self) -> usize {
        self.radii.len()
    }

    /// Nodes on all twelve rays.
    pub fn node_count(&self) -> usize {
        12 * self.radii.len()
    }

    pub fn nodes(&self, ray: usize) -> Vec<C64> {
        let e = C64::from_polar(1.0, ray_angle(ray));
        self.radii.iter().map(|&r| e * r).collect()
    }

    /// Complex weights `w_j e^{iα}` for `∫ f(s) ds` along `ray`.
    pub fn weights(&self, ray: usize) -> Vec<C64> {
        let e = C64::from_polar(1.0, ray_angle(ray));
        self.weights.iter().map(|&w| e * w).collect()
    }

    /// Every radius at which reflection coefficients are needed.
    pub fn sample_radii(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.radii.iter().copied().chain(self.midpoints.iter().map(|m| m.0)).chain(self.fine.iter().map(|f| f.radius)).collect();
        r.sort_by(f64::total_cmp);
        r
    }

    fn panel_range(&self, p: usize) -> std::ops::Range<usize> {
        let n = self.settings.nodes_per_panel;
        p * n..(p + 1) * n
    }

    /// Barycentric interpolation weights on panel `p` at radius `r`.
    fn interpolation_weights(&self, p: usize, r: f64) -> Vec<f64> {
        let [a, b] = self.panels[p];
        let x = 2.0 * (r - a) / (b - a) - 1.0;
        let n = self.settings.nodes_per_panel;
        if let Some(j) = self.ref_nodes.iter().position(|&xj| xj == x) {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            return e;
        }
        let terms: Vec<f64> = (0..n).map(|j| self.bary[j] / (x - self.ref_nodes[j])).collect();
        let total: f64 = terms.iter().sum();
        terms.iter().map(|t| t / total).collect()
    }
}

/// Values `r₁…r₄` at radius `ρ` on their own rays.
pub trait ReflectionSource {
    fn coefficients(&self, rho: f64) -> Result<[C64; 4]>;
    /// Whether anything beyond the contour truncation can be nonzero.
    fn coefficients_at(&self, radii: &[f64]) -> Result<Vec<[C64; 4]>> {
        radii.iter().map(|&r| self.coefficients(r)).collect()
    }
    fn has_tail(&self) -> bool {
        true
    }
}

/// Analytic source used in tests and for trivial data.
pub struct FnSource<F: Fn(f64) -> [C64; 4]>(pub F);

impl<F: Fn(f64) -> [C64; 4]> ReflectionSource for FnSource<F> {
    fn coefficients(&self, rho: f64) -> Result<[C64; 4]> {
        Ok((self.0)(rho))
    }
}

fn lagrange(xs: &[f64], ys: &[C64], x: f64) -> C64 {
    let mut total = ZERO;
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        let mut l = 1.0;
        for (j, &xj) in xs.iter().enumerate() {
            if i != j {
                l *= (x - xj) / (xi - xj);
            }
        }
        total += yi * l;
    }
    total
}

const INTERPOLATION_POINTS: usize = 6;

impl SpectralDataSet {
    /// `r_j` at radius `ρ` on its ray: exact at sample radii, local
    /// Lagrange interpolation between them, the origin interpolant below the
    /// smallest sample and the tail fit beyond `K_max`.
    pub fn coefficient_at(&self, j: usize, rho: f64) -> Result<C64> {
        self.lookup(j, &self.sample_table(j), rho)
    }

    fn sample_table(&self, j: usize) -> Vec<(f64, C64)> {
        let ray = self.ray(j);
        let mut table: Vec<(f64, C64)> = ray.nodes.iter().zip(&ray.values).map(|(k, v)| (k.norm(), *v)).collect();
        if let Some(o) = &ray.origin {
            table.extend(o.radii.iter().zip(&o.samples).map(|(r, v)| (*r, *v)));
        }
        table.sort_by(|a, b| a.0.total_cmp(&b.0));
        table.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-12 * b.0);
        table
    }

    fn lookup(&self, j: usize, table: &[(f64, C64)], rho: f64) -> Result<C64> {
        let ray = self.ray(j);
        let (lo, hi) = match (table.first(), table.last()) {
            (Some(a), Some(b)) => (a.0, b.0),
            _ => return Err(Error::InvalidInput(format!("r{j} has no samples"))),
        };
        if rho > hi * (1.0 + 1e-12) {
            if let Some(t) = &ray.tail {
                return Ok(t.eval(crate::algebra::ray_point(ray.ray, rho)));
            }
            if ray.window_max(self.k_max) < NEGLIGIBLE_TAIL {
                return Ok(ZERO);
            }
            let why = ray.tail_error.as_deref().unwrap_or("no tail fit");
            return Err(Error::InvalidInput(format!("interpolation out of range: r{j} at |k| = {rho} beyond K_max ({why})")));
        }
        if rho < lo * (1.0 - 1e-12) {
            let o = ray.origin.as_ref().ok_or_else(|| Error::InvalidInput(format!("interpolation out of range: r{j} at |k| = {rho} below the samples without origin data")))?;
            return Ok(lagrange(&o.radii, &o.samples, rho));
        }
        let pos = table.partition_point(|(r, _)| *r < rho);
        if let Some((r, v)) = table.get(pos) {
            if (r - rho).abs() <= 1e-12 * rho {
                return Ok(*v);
            }
        }
        let half = INTERPOLATION_POINTS / 2;
        let start = pos.saturating_sub(half).min(table.len().saturating_sub(INTERPOLATION_POINTS));
        let window = &table[start..(start + INTERPOLATION_POINTS).min(table.len())];
        let xs: Vec<f64> = window.iter().map(|p| p.0).collect();
        let ys: Vec<C64> = window.iter().map(|p| p.1).collect();
        Ok(lagrange(&xs, &ys, rho))
    }

    /// True when every stored sample vanishes.
    pub fn is_trivial(&self) -> bool {
        self.rays.iter().all(|r| r.values.iter().all(|v| *v == ZERO))
    }
}

impl ReflectionSource for SpectralDataSet {
    fn coefficients(&self, rho: f64) -> Result<[C64; 4]> {
        Ok([self.coefficient_at(1, rho)?, self.coefficient_at(2, rho)?, self.coefficient_at(3, rho)?, self.coefficient_at(4, rho)?])
    }

    fn coefficients_at(&self, radii: &[f64]) -> Result<Vec<[C64; 4]>> {
        let tables: Vec<_> = (1..=4).map(|j| self.sample_table(j)).collect();
        radii
            .iter()
            .map(|&r| Ok([self.lookup(1, &tables[0], r)?, self.lookup(2, &tables[1], r)?, self.lookup(3, &tables[2], r)?, self.lookup(4, &tables[3], r)?]))
            .collect()
    }

    fn has_tail(&self) -> bool {
        self.rays.iter().any(|r| r.tail.as_ref().is_some_and(|t| t.coeffs.iter().chain([&t.next]).any(|c| *c != ZERO) || t.oscillatory.iter().flatten().any(|c| *c != ZERO)))
    }
}

/// The jump matrix `v` on ray `n` (1..=12) at `k`, given `a = (r₁, r₂, r₃, r₄)`
/// evaluated at `|k|` on their own rays.
pub fn jump_matrix(n: usize, k: C64, x: f64, t: f64, a: &[C64; 4]) -> Mat3 {
    let e = |i: usize, j: usize| theta(i, j, x, t, k).exp();
    let ei = |i: usize, j: usize| (-theta(i, j, x, t, k)).exp();
    let [a1, a2, a3, a4] = *a;
    let (c1, c2, c3, c4) = (a1.conj(), a2.conj(), a3.conj(), a4.conj());
    let (d1, d2) = (ONE - a1.norm_sqr(), ONE - a2.norm_sqr());
    let o = ZERO;
    #[rustfmt::skip]
    let m = match n {
        1 => [[ONE, -a1 * ei(2, 1), o], [c1 * e(2, 1), d1, o], [o, o, ONE]],
        2 => [[ONE, o, -a3 * ei(3, 1)], [o, ONE, a4 * ei(3, 2)], [o, o, ONE]],
        3 => [[ONE, o, o], [o, d2, -c2 * ei(3, 2)], [o, a2 * e(3, 2), ONE]],
        4 => [[ONE, c3 * ei(2, 1), o], [o, ONE, o], [o, -c4 * e(3, 2), ONE]],
        5 => [[d1, o, c1 * ei(3, 1)], [o, ONE, o], [-a1 * e(3, 1), o, ONE]],
        6 => [[ONE, a4 * ei(2, 1), o], [o, ONE, o], [o, -a3 * e(3, 2), ONE]],
        7 => [[d2, -c2 * ei(2, 1), o], [a2 * e(2, 1), ONE, o], [o, o, ONE]],
        8 => [[ONE, o, o], [-c4 * e(2, 1), ONE, o], [c3 * e(3, 1), o, ONE]],
        9 => [[ONE, o, o], [o, ONE, -a1 * ei(3, 2)], [o, c1 * e(3, 2), d1]],
        10 => [[ONE, o, o], [-a3 * e(2, 1), ONE, o], [a4 * e(3, 1), o, ONE]],
        11 => [[ONE, o, a2 * ei(3, 1)], [o, ONE, o], [-c2 * e(3, 1), o, d2]],
        12 => [[ONE, o, -c4 * ei(3, 1)], [o, ONE, c3 * ei(3, 2)], [o, o, ONE]],
        _ => panic!("ray index must be in 1..=12"),
    };
    Mat3::from_fn(|i, j| m[i][j])
}

/// Reflection coefficients at the mesh radii and checkpoints; independent of
/// `(x, t)`, so computed once per mesh.
#[derive(Debug, Clone)]
pub struct MeshCoefficients {
    pub nodes: Vec<[C64; 4]>,
    pub midpoints: Vec<[C64; 4]>,
    pub fine: Vec<[C64; 4]>,
}

impl MeshCoefficients {
    pub fn from_source(source: &dyn ReflectionSource, mesh: &ContourMesh) -> Result<Self> {
        let mids: Vec<f64> = mesh.midpoints.iter().map(|m| m.0).collect();
        let fine: Vec<f64> = mesh.fine.iter().map(|f| f.radius).collect();
        Ok(MeshCoefficients { nodes: source.coefficients_at(&mesh.radii)?, midpoints: source.coefficients_at(&mids)?, fine: source.coefficients_at(&fine)? })
    }

    /// Requires an admissible dataset (assumption scan passed) unless all of
    /// its samples vanish.
    pub fn from_dataset(d: &SpectralDataSet, mesh: &ContourMesh) -> Result<Self> {
        if !d.is_trivial() {
            match &d.assumptions {
                Some(rep) if rep.pass => {}
                Some(rep) => return Err(Error::Assumption(format!("dataset is not admissible: {}", rep.failures.join("; ")))),
                None => return Err(Error::Assumption("dataset carries no assumption report".into())),
            }
        }
        MeshCoefficients::from_source(d, mesh)
    }

    pub fn is_trivial(&self) -> bool {
        self.nodes.iter().chain(&self.midpoints).chain(&self.fine).all(|a| a.iter().all(|z| *z == ZERO))
    }
}

/// `w = v − I` on rays 1–4 at fixed `(x, t)`; the other rays follow from
/// `w(ωk) = 𝒜⁻¹ w(k) 𝒜`.
#[derive(Debug, Clone)]
pub struct JumpField {
    pub x: f64,
    pub t: f64,
    pub nodes: Vec<[Mat3; 4]>,
    pub midpoints: Vec<[Mat3; 4]>,
    pub fine: Vec<[Mat3; 4]>,
}

impl JumpField {
    /// `w` at node `idx` of any ray 1..=12.
    pub fn at(&self, ray: usize, idx: usize) -> Mat3 {
        let base = (ray - 1) % 4;
        let turns = (ray - 1) / 4;
        let a = matrix_a();
        let mut w = self.nodes[idx][base];
        for _ in 0..turns {
            w = a.transpose() * w * a;
        }
        w
    }
}

pub fn assemble_jump(x: f64, t: f64, coeffs: &MeshCoefficients, mesh: &ContourMesh) -> JumpField {
    let block = |r: f64, a: &[C64; 4]| -> [Mat3; 4] {
        std::array::from_fn(|p| {
            let k = C64::from_polar(r, ray_angle(p + 1));
            jump_matrix(p + 1, k, x, t, a) - Mat3::identity()
        })
    };
    let nodes = mesh.radii.iter().zip(&coeffs.nodes).map(|(&r, a)| block(r, a)).collect();
    let midpoints = mesh.midpoints.iter().zip(&coeffs.midpoints).map(|(&(r, _), a)| block(r, a)).collect();
    let fine = mesh.fine.iter().zip(&coeffs.fine).map(|(f, a)| block(f.radius, a)).collect();
    JumpField { x, t, nodes, midpoints, fine }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub cond_limit: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { tol: 1e-13, max_iter: 600, cond_limit: COND_LIMIT }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RHSolutionRecord {
    pub x: f64,
    pub t: f64,
    /// Density on rays 1–4, ray-major.
    pub phi: Vec<[C64; 3]>,
    /// `n₋` at the same nodes.
    pub n_minus: Vec<[C64; 3]>,
    /// `m₁ = lim k(n₃ − 1)` from the mesh quadrature, and its `x`, `t` derivatives.
    pub m1: C64,
    pub m1_x: C64,
    pub m1_t: C64,
    /// Contribution of the contour beyond the truncation radius (already included).
    pub tail: [C64; 3],
    /// Checkpoint residual on `ρ ≥ r_min`.
    pub jump_residual: f64,
    /// Checkpoint residual inside the origin panels, where `n` is not smooth.
    pub origin_residual: f64,
    pub cond_estimate: f64,
    pub iterations: usize,
}

/// Geometry of rays 1–4 with the rotated source positions.
struct Geometry {
    /// Node positions on rays 1–4, ray-major.
    k: Vec<C64>,
    w: Vec<C64>,
    ray: Vec<usize>,
    radial: Vec<usize>,
}

impl Geometry {
    fn new(mesh: &ContourMesh) -> Self {
        let nr = mesh.radial_count();
        let mut g = Geometry { k: Vec::with_capacity(4 * nr), w: Vec::with_capacity(4 * nr), ray: Vec::new(), radial: Vec::new() };
        for p in 0..4 {
            let (nodes, weights) = (mesh.nodes(p + 1), mesh.weights(p + 1));
            for a in 0..nr {
                g.k.push(nodes[a]);
                g.w.push(weights[a]);
                g.ray.push(p);
                g.radial.push(a);
            }
        }
        g
    }
}

fn unknown_layout(nr: usize) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(4);
    let mut total = 0;
    for s in SUPPORT {
        offsets.push(total);
        total += s.len() * nr;
    }
    (offsets, total)
}

fn unknown_index(offsets: &[usize], p: usize, a: usize, slot: usize) -> usize {
    offsets[p] + a * SUPPORT[p].len() + slot
}

const TWO_PI_I: C64 = C64::new(0.0, 2.0 * PI);

/// Contribution of the density at node `j` with component `c`, through the
/// rotated copy `m`, to component `(c − m) mod 3` of `(1/2πi)∫ φ/(s − k)`.
#[inline]
fn kernel(g: &Geometry, j: usize, m: usize, k: C64) -> C64 {
    g.w[j] / (TWO_PI_I * (omega_pow(m as i64) * g.k[j] - k))
}

/// Linear map from the unknown vector to `C₋[φ]` at a point `k` on ray `p`
/// (0-based), with the same-ray principal value handled by subtracting
/// `φ(k)`. Calls `emit(unknown, component, coefficient)`. At node `at_node`
/// the local terms are emitted too; off the nodes the coefficient of `φ(k)`
/// is returned for the caller to apply.
fn cauchy_minus_row(mesh: &ContourMesh, g: &Geometry, offsets: &[usize], p: usize, k: C64, at_node: Option<usize>, emit: &mut dyn FnMut(usize, usize, C64)) -> C64 {
    let nr = mesh.radial_count();
    let rho = k.norm();
    let r_trunc = *mesh.panels.last().map(|p| &p[1]).unwrap();
    // Same ray, unrotated: subtract φ(k) so that the integrand is smooth.
    let mut own = 0.0;
    for b in 0..nr {
        if Some(b) == at_node {
            continue;
        }
        let d = mesh.weights[b] / (mesh.radii[b] - rho);
        own += d;
        for (slot, _) in SUPPORT[p].iter().enumerate() {
            emit(unknown_index(offsets, p, b, slot), SUPPORT[p][slot], C64::from(d) / TWO_PI_I);
        }
    }
    let pv = ((r_trunc - rho) / rho).ln();
    let self_coeff = (C64::from(pv - own) / TWO_PI_I) - 0.5;
    if let Some(a) = at_node {
        let panel = mesh.panel_of[a];
        let nodes = mesh.panel_range(panel);
        let n = mesh.settings.nodes_per_panel;
        let la = a - nodes.start;
        let [lo, hi] = mesh.panels[panel];
        for (l, b) in nodes.enumerate() {
            // Derivative term `w_a φ′(k_a)` replaces the excluded node.
            let mut c = C64::from(mesh.weights[a] * mesh.diff[la * n + l] * 2.0 / (hi - lo)) / TWO_PI_I;
            if l == la {
                c += self_coeff;
            }
            for (slot, &comp) in SUPPORT[p].iter().enumerate() {
                emit(unknown_index(offsets, p, b, slot), comp, c);
            }
        }
    }
    // Other rays of the base sector and all rotated copies.
    for j in 0..g.k.len() {
        let q = g.ray[j];
        let b = g.radial[j];
        for m in 0..3 {
            if m == 0 && q == p {
                continue;
            }
            let kern = kernel(g, j, m, k);
            for (slot, &c) in SUPPORT[q].iter().enumerate() {
                let d = (c + 3 - m) % 3;
                emit(unknown_index(offsets, q, b, slot), d, kern);
            }
        }
    }
    self_coeff
}

/// Solves the vector RH problem at `(jf.x, jf.t)`.
pub fn solve_vector_rh(jf: &JumpField, mesh: &ContourMesh, settings: &SolverSettings) -> Result<RHSolutionRecord> {
    let nr = mesh.radial_count();
    let g = Geometry::new(mesh);
    let (offsets, total) = unknown_layout(nr);
    let ninf = n_infinity();
    let trivial = jf.nodes.iter().chain(&jf.fine).all(|b| b.iter().all(|w| w.iter().all(|z| *z == ZERO)));
    if trivial {
        return Ok(RHSolutionRecord {
            x: jf.x,
            t: jf.t,
            phi: vec![[ZERO; 3]; 4 * nr],
            n_minus: vec![[ninf[0], ninf[1], ninf[2]]; 4 * nr],
            m1: ZERO,
            m1_x: ZERO,
            m1_t: ZERO,
            tail: [ZERO; 3],
            jump_residual: 0.0,
            origin_residual: 0.0,
            cond_estimate: 1.0,
            iterations: 0,
        });
    }
    let forcing = project_outer(mesh, |f, p| ninf * jf.fine[f][p]);
    let mut a_mat = DMatrix::<C64>::identity(total, total);
    let mut rhs = DVector::<C64>::zeros(total);
    let mut row_c = vec![[ZERO; 3]; total];
    let mut touched: Vec<usize> = Vec::new();
    for i in 0..4 * nr {
        let (p, a) = (g.ray[i], g.radial[i]);
        let w = jf.nodes[a][p];
        touched.clear();
        cauchy_minus_row(mesh, &g, &offsets, p, g.k[i], Some(a), &mut |u, d, c| {
            if row_c[u] == [ZERO; 3] {
                touched.push(u);
            }
            row_c[u][d] += c;
        });
        let nw = forcing[a].map_or(ninf * w, |f| f[p]);
        for (slot, &dp) in SUPPORT[p].iter().enumerate() {
            let row = unknown_index(&offsets, p, a, slot);
            rhs[row] = nw[dp];
            for &u in &touched {
                let c = row_c[u];
                let v = c[0] * w[(0, dp)] + c[1] * w[(1, dp)] + c[2] * w[(2, dp)];
                a_mat[(row, u)] -= v;
            }
        }
        for &u in &touched {
            row_c[u] = [ZERO; 3];
        }
    }
    let op = CollocationOperator::new(a_mat, &panel_blocks(mesh, &offsets));
    let pre = gmres(&op, &rhs, settings.tol, settings.max_iter)?;
    if pre.cond_estimate > settings.cond_limit {
        return Err(Error::Conditioning { x: jf.x, t: jf.t, cond: pre.cond_estimate });
    }
    let solution = op.precondition(&pre.solution);
    let unpack = |v: &DVector<C64>| -> Vec<[C64; 3]> {
        (0..4 * nr)
            .map(|i| {
                let (p, a) = (g.ray[i], g.radial[i]);
                let mut out = [ZERO; 3];
                for (slot, &c) in SUPPORT[p].iter().enumerate() {
                    out[c] = v[unknown_index(&offsets, p, a, slot)];
                }
                out
            })
            .collect()
    };
    let phi = unpack(&solution);
    // n₋ at the nodes, all three components.
    let n_minus: Vec<[C64; 3]> = (0..4 * nr)
        .map(|i| {
            let (p, a) = (g.ray[i], g.radial[i]);
            let mut out = [ninf[0], ninf[1], ninf[2]];
            cauchy_minus_row(mesh, &g, &offsets, p, g.k[i], Some(a), &mut |u, d, c| out[d] += c * solution[u]);
            out
        })
        .collect();
    // The moment functional `ℓ` with `m₁ = ℓᵀφ`.
    let mut ell = DVector::<C64>::zeros(total);
    for i in 0..4 * nr {
        let p = g.ray[i];
        for slot in 0..SUPPORT[p].len() {
            ell[unknown_index(&offsets, p, g.radial[i], slot)] = -g.w[i] / TWO_PI_I;
        }
    }
    let m1 = ell.dot(&solution);
    // Differentiated problems share the operator, with forcing n₋[L, w] and
    // n₋[Z, w]; one adjoint solve gives both moments.
    let adjoint = gmres(&AdjointOperator(&op), &op.precondition_transpose(&ell).map(|z| z.conj()), settings.tol, settings.max_iter)?;
    let mut dm = [ZERO; 2];
    let psi = |f: usize, p: usize| -> Row3 {
        let node = &mesh.fine[f];
        let mut out = Row3::zeros();
        for (l, b) in mesh.panel_range(node.panel).enumerate() {
            for c in 0..3 {
                out[c] += n_minus[p * nr + b][c] * node.interp[l];
            }
        }
        out
    };
    for (which, out) in dm.iter_mut().enumerate() {
        let commutator = |k: C64, w: &Mat3| {
            let d = if which == 0 { l_matrix(k) } else { z_matrix(k) };
            d * w - w * d
        };
        let fine_forcing = project_outer(mesh, |f, p| {
            let k = C64::from_polar(mesh.fine[f].radius, ray_angle(p + 1));
            psi(f, p) * commutator(k, &jf.fine[f][p])
        });
        let mut b = DVector::<C64>::zeros(total);
        for i in 0..4 * nr {
            let (p, a) = (g.ray[i], g.radial[i]);
            let f = fine_forcing[a].map_or_else(|| Row3::new(n_minus[i][0], n_minus[i][1], n_minus[i][2]) * commutator(g.k[i], &jf.nodes[a][p]), |f| f[p]);
            for (slot, &c) in SUPPORT[p].iter().enumerate() {
                b[unknown_index(&offsets, p, a, slot)] = f[c];
            }
        }
        *out = adjoint.solution.dotc(&b);
    }
    let (jump_residual, origin_residual) = midpoint_residual(jf, mesh, &g, &offsets, &solution, &n_minus);
    Ok(RHSolutionRecord {
        x: jf.x,
        t: jf.t,
        m1,
        m1_x: dm[0],
        m1_t: dm[1],
        tail: [ZERO; 3],
        phi,
        n_minus,
        jump_residual,
        origin_residual,
        cond_estimate: pre.cond_estimate,
        iterations: pre.iterations,
    })
}

/// On panels carrying fine nodes, replaces a forcing `f` at each coarse node
/// by `(1/W_a) ∫ f L_a`, with `L_a` the Lagrange basis of the panel. The
/// coarse quadrature then integrates `f` exactly against any function that is
/// smooth on the panel, however fast `f` oscillates. `None` elsewhere.
fn project_outer(mesh: &ContourMesh, f: impl Fn(usize, usize) -> Row3) -> Vec<Option<[Row3; 4]>> {
    let mut out: Vec<Option<[Row3; 4]>> = vec![None; mesh.radial_count()];
    for (i, node) in mesh.fine.iter().enumerate() {
        let values: [Row3; 4] = std::array::from_fn(|p| f(i, p));
        for (l, a) in mesh.panel_range(node.panel).enumerate() {
            let acc = out[a].get_or_insert([Row3::zeros(); 4]);
            let c = C64::from(node.weight * node.interp[l]);
            for p in 0..4 {
                acc[p] += values[p] * c;
            }
        }
    }
    for (a, slot) in out.iter_mut().enumerate() {
        if let Some(acc) = slot {
            for v in acc.iter_mut() {
                *v /= C64::from(mesh.weights[a]);
            }
        }
    }
    out
}

/// Unknowns grouped by radial panel across the four base rays.
fn panel_blocks(mesh: &ContourMesh, offsets: &[usize]) -> Vec<Vec<usize>> {
    (0..mesh.panels.len())
        .map(|pl| {
            let mut idx = Vec::new();
            for p in 0..4 {
                for a in mesh.panel_range(pl) {
                    for slot in 0..SUPPORT[p].len() {
                        idx.push(unknown_index(offsets, p, a, slot));
                    }
                }
            }
            idx
        })
        .collect()
}

/// Collocation matrix with a block-Jacobi right preconditioner `M`; applies
/// `A M⁻¹`. Storage is split into real and imaginary planes, column-major,
/// which keeps the matrix–vector product close to memory bandwidth.
struct CollocationOperator {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    blocks: Vec<(Vec<usize>, DMatrix<C64>)>,
}

impl CollocationOperator {
    fn new(a: DMatrix<C64>, groups: &[Vec<usize>]) -> Self {
        let n = a.nrows();
        let blocks = groups
            .iter()
            .map(|idx| {
                let b = DMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])]);
                let inv = b.clone().try_inverse().unwrap_or_else(|| DMatrix::identity(idx.len(), idx.len()));
                (idx.clone(), inv)
            })
            .collect();
        let re = a.iter().map(|z| z.re).collect();
        let im = a.iter().map(|z| z.im).collect();
        CollocationOperator { n, re, im, blocks }
    }

    fn blockwise(&self, x: &DVector<C64>, f: impl Fn(&DMatrix<C64>, &DVector<C64>) -> DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.n);
        for (idx, inv) in &self.blocks {
            let xb = DVector::from_iterator(idx.len(), idx.iter().map(|&i| x[i]));
            for (&i, v) in idx.iter().zip(f(inv, &xb).iter()) {
                y[i] = *v;
            }
        }
        y
    }

    /// `M⁻¹ x`.
    fn precondition(&self, x: &DVector<C64>) -> DVector<C64> {
        self.blockwise(x, |m, v| m * v)
    }

    /// `M⁻ᵀ x`.
    fn precondition_transpose(&self, x: &DVector<C64>) -> DVector<C64> {
        self.blockwise(x, |m, v| m.tr_mul(v))
    }

    fn multiply(&self, x: &DVector<C64>) -> DVector<C64> {
        let n = self.n;
        let (mut yr, mut yi) = (vec![0.0; n], vec![0.0; n]);
        for (j, xj) in x.iter().enumerate() {
            let (cr, ci) = (&self.re[j * n..(j + 1) * n], &self.im[j * n..(j + 1) * n]);
            for i in 0..n {
                yr[i] += cr[i] * xj.re - ci[i] * xj.im;
                yi[i] += cr[i] * xj.im + ci[i] * xj.re;
            }
        }
        DVector::from_iterator(n, yr.into_iter().zip(yi).map(|(r, i)| C64::new(r, i)))
    }

    /// `Aᴴ x`.
    fn multiply_adjoint(&self, x: &DVector<C64>) -> DVector<C64> {
        let n = self.n;
        let (xr, xi): (Vec<f64>, Vec<f64>) = x.iter().map(|z| (z.re, z.im)).unzip();
        DVector::from_fn(n, |j, _| {
            let (cr, ci) = (&self.re[j * n..(j + 1) * n], &self.im[j * n..(j + 1) * n]);
            let (mut sr, mut si) = (0.0, 0.0);
            for i in 0..n {
                sr += cr[i] * xr[i] + ci[i] * xi[i];
                si += cr[i] * xi[i] - ci[i] * xr[i];
            }
            C64::new(sr, si)
        })
    }
}

impl LinearOperator for CollocationOperator {
    fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        self.multiply(&self.precondition(x))
    }
}

/// `(A M⁻¹)ᴴ = M⁻ᴴ Aᴴ`.
struct AdjointOperator<'a>(&'a CollocationOperator);

impl LinearOperator for AdjointOperator<'_> {
    fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        self.0.blockwise(&self.0.multiply_adjoint(x), |m, v| m.ad_mul(v))
    }
}

/// `max |n₊ − n₋ v|` over the checkpoints between nodes. The smooth factor
/// `n₋` is interpolated on its panel and `φ = n₋ w` uses the exact jump, so
/// the check does not depend on resolving the oscillation of `w`. Returns the
/// worst value at `ρ ≥ r_min` and inside the origin panels separately.
fn midpoint_residual(jf: &JumpField, mesh: &ContourMesh, g: &Geometry, offsets: &[usize], x: &DVector<C64>, n_minus: &[[C64; 3]]) -> (f64, f64) {
    let nr = mesh.radial_count();
    let ninf = n_infinity();
    let (mut outer, mut inner) = (0.0f64, 0.0f64);
    for (m, &(r, panel)) in mesh.midpoints.iter().enumerate() {
        let interp = mesh.interpolation_weights(panel, r);
        for p in 0..4 {
            let k = C64::from_polar(r, ray_angle(p + 1));
            let mut psi = Row3::zeros();
            for (l, b) in mesh.panel_range(panel).enumerate() {
                for c in 0..3 {
                    psi[c] += n_minus[p * nr + b][c] * interp[l];
                }
            }
            let w = jf.midpoints[m][p];
            let phi = psi * w;
            let mut nm = ninf;
            let local = cauchy_minus_row(mesh, g, offsets, p, k, None, &mut |u, d, c| nm[d] += c * x[u]);
            nm += phi * local;
            let err = (phi - nm * w).iter().fold(0.0f64, |e, z| e.max(z.norm()));
            if r >= mesh.settings.r_min {
                outer = outer.max(err);
            } else {
                inner = inner.max(err);
            }
        }
    }
    (outer, inner)
}

/// `n(k)` off the contour from the Cauchy integral of the density.
pub fn evaluate_n(rec: &RHSolutionRecord, mesh: &ContourMesh, k: C64) -> Row3 {
    let g = Geometry::new(mesh);
    let mut out = n_infinity();
    for j in 0..g.k.len() {
        for m in 0..3 {
            let kern = kernel(&g, j, m, k);
            for c in 0..3 {
                out[(c + 3 - m) % 3] += kern * rec.phi[j][c];
            }
        }
    }
    out
}

/// Second estimator of `m₁`: `k(n₃(k) − 1)` at `k`.
pub fn direct_moment(rec: &RHSolutionRecord, mesh: &ContourMesh, k: C64) -> C64 {
    k * (evaluate_n(rec, mesh, k)[2] - ONE)
}

/// Contribution of `|k| ∈ [R_trunc, 4 R_trunc]` to `m₁`, `∂ₓm₁`, `∂ₜm₁`,
/// with `n₋ ≈ n∞` there.
pub fn tail_moments(x: f64, t: f64, source: &dyn ReflectionSource, mesh: &ContourMesh) -> Result<[C64; 3]> {
    if !source.has_tail() {
        return Ok([ZERO; 3]);
    }
    let r0 = mesh.settings.r_trunc;
    let r1 = 4.0 * r0;
    let n = mesh.settings.nodes_per_panel;
    let (xs, ws) = gauss_legendre(n);
    let ninf = n_infinity();
    let mut out = [ZERO; 3];
    let mut a = r0;
    while a < r1 {
        // Keep the phase change per panel below about 8 radians.
        let rate = 3f64.sqrt() * x.abs() + 2.0 * 3f64.sqrt() * a * t.abs() + 1.0;
        let b = (a + (8.0 / rate).min(r0)).min(r1);
        let h = 0.5 * (b - a);
        for (xi, wi) in xs.iter().zip(&ws) {
            let rho = a + h * (xi + 1.0);
            let coeffs = source.coefficients(rho)?;
            for p in 0..4 {
                let e = C64::from_polar(1.0, ray_angle(p + 1));
                let k = e * rho;
                let w = jump_matrix(p + 1, k, x, t, &coeffs) - Mat3::identity();
                let dx = l_matrix(k) * w - w * l_matrix(k);
                let dt = z_matrix(k) * w - w * z_matrix(k);
                for (slot, m) in [w, dx, dt].iter().enumerate() {
                    let f = ninf * m;
                    out[slot] += e * h * wi * (f[0] + f[1] + f[2]);
                }
            }
        }
        a = b;
    }
    Ok(out.map(|z| -z / TWO_PI_I))
}

/// One recovered field value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub x: f64,
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub u_imag: f64,
    pub v_imag: f64,
    pub jump_residual: f64,
    pub cond_estimate: f64,
}

/// Largest imaginary part tolerated in recovered fields.
pub const IMAG_TOL: f64 = 1e-6;

/// Solves at `(x, t)` and adds the truncated tail.
pub fn solve_point(x: f64, t: f64, coeffs: &MeshCoefficients, source: &dyn ReflectionSource, mesh: &ContourMesh, settings: &SolverSettings) -> Result<RHSolutionRecord> {
    let jf = assemble_jump(x, t, coeffs, mesh);
    let mut rec = solve_vector_rh(&jf, mesh, settings).map_err(|e| match e {
        Error::Conditioning { .. } => e,
        other => Error::Numerical(format!("solve at (x, t) = ({x}, {t}): {other}")),
    })?;
    if !coeffs.is_trivial() {
        let tail = tail_moments(x, t, source, mesh)?;
        rec.m1 += tail[0];
        rec.m1_x += tail[1];
        rec.m1_t += tail[2];
        rec.tail = tail;
    }
    Ok(rec)
}

/// `u = −(3/2) ∂ₓm₁`, `v = −(3/2) ∂ₜm₁` on the grid `xs × ts`, derivatives
/// taken through the differentiated RH problem.
pub fn recover_fields(xs: &[f64], ts: &[f64], source: &dyn ReflectionSource, mesh: &ContourMesh, settings: &SolverSettings) -> Result<Vec<FieldRow>> {
    let coeffs = MeshCoefficients::from_source(source, mesh)?;
    recover_with(xs, ts, &coeffs, source, mesh, settings)
}

pub fn recover_with(xs: &[f64], ts: &[f64], coeffs: &MeshCoefficients, source: &dyn ReflectionSource, mesh: &ContourMesh, settings: &SolverSettings) -> Result<Vec<FieldRow>> {
    let mut rows = Vec::with_capacity(xs.len() * ts.len());
    for &t in ts {
        for &x in xs {
            let rec = solve_point(x, t, coeffs, source, mesh, settings)?;
            let (u, v) = (-1.5 * rec.m1_x, -1.5 * rec.m1_t);
            if u.im.abs() > IMAG_TOL || v.im.abs() > IMAG_TOL {
                return Err(Error::Numerical(format!("recovered fields at (x, t) = ({x}, {t}) are not real: Im u = {:.2e}, Im v = {:.2e}", u.im, v.im)));
            }
            rows.push(FieldRow { x, t, u: u.re, v: v.re, u_imag: u.im, v_imag: v.im, jump_residual: rec.jump_residual, cond_estimate: rec.cond_estimate });
        }
    }
    Ok(rows)
}

/// Sampled data plus origin limits and tails, with extra samples at the mesh
/// radii so that the solver reads exact values.
pub fn sample_for_mesh(d: &mut SpectralDataSet, data: &crate::volterra::CauchyData, mesh: &ContourMesh, settings: &crate::volterra::OdeSettings) -> Result<()> {
    let radii: Vec<f64> = mesh.sample_radii().into_iter().filter(|&r| r >= DIRECT_SAMPLE_MIN && r <= d.k_max).collect();
    d.add_samples(data, &radii, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{approx_eq, matrix_b, symmetry_a, OMEGA};

    fn mesh() -> ContourMesh {
        ContourMesh::new(MeshSettings { nodes_per_panel: 8, origin_levels: 4, core_radius: 2.0, core_panel: 0.5, r_trunc: 8.0, ..Default::default() }).unwrap()
    }

    // Vanishes at the origin, so the jumps are compatible there.
    fn smooth(rho: f64) -> [C64; 4] {
        let g = rho * rho * (-rho * rho).exp();
        [
            C64::from_polar(0.4 * g, 0.3 + rho),
            C64::from_polar(0.3 * g, -0.2 * rho),
            C64::new(0.05, 0.02) * rho * g,
            C64::new(-0.03, 0.04) * g,
        ]
    }

    fn fine_mesh() -> ContourMesh {
        ContourMesh::new(MeshSettings { nodes_per_panel: 16, origin_levels: 4, core_radius: 2.0, core_panel: 0.5, r_trunc: 8.0, ..Default::default() }).unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let quad: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((quad - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn mesh_is_graded_and_covers_the_contour() {
        let m = ContourMesh::new(MeshSettings::default()).unwrap();
        assert_eq!(m.panels[0][0], 0.0);
        assert!((m.panels.last().unwrap()[1] - R_TRUNC).abs() < 1e-12);
        assert!(m.radii.windows(2).all(|w| w[1] > w[0]));
        assert!((m.weights.iter().sum::<f64>() - R_TRUNC).abs() < 1e-10);
        assert_eq!(m.node_count(), 12 * m.radii.len());
        assert_eq!(m.refined().unwrap().radii.len(), 2 * m.radii.len());
    }

    #[test]
    fn zero_coefficients_give_identity_jumps() {
        let m = mesh();
        let c = MeshCoefficients::from_source(&FnSource(|_| [ZERO; 4]), &m).unwrap();
        let jf = assemble_jump(1.0, 0.5, &c, &m);
        assert!(jf.nodes.iter().flatten().all(|w| w.iter().all(|z| *z == ZERO)));
        let rec = solve_vector_rh(&jf, &m, &SolverSettings::default()).unwrap();
        assert_eq!(rec.m1, ZERO);
        assert!(rec.phi.iter().flatten().all(|z| *z == ZERO));
        let n = evaluate_n(&rec, &m, C64::from_polar(0.7, 0.3));
        assert!((n - n_infinity()).norm() == 0.0);
    }

    #[test]
    fn jump_symmetries_and_determinant() {
        let (x, t) = (1.3, 0.4);
        for rho in [0.1, 0.7, 2.5] {
            let a = smooth(rho);
            for n in 1..=12 {
                let k = C64::from_polar(rho, ray_angle(n));
                let v = jump_matrix(n, k, x, t, &a);
                assert!((v.determinant() - ONE).norm() < 1e-10, "det on ray {n}");
                let rotated = ((n + 3) % 12) + 1;
                let va = jump_matrix(rotated, OMEGA * k, x, t, &a);
                assert!(approx_eq(&v, &symmetry_a(&va), 1e-10), "𝒜 symmetry on ray {n}");
                let mirror = ((12 - (n - 1)) % 12) + 1;
                let vb = jump_matrix(mirror, k.conj(), x, t, &a);
                let b = matrix_b();
                let expect = b * vb.map(|z| z.conj()).try_inverse().unwrap() * b;
                assert!(approx_eq(&v, &expect, 1e-10), "ℬ symmetry on ray {n}");
            }
        }
    }

    #[test]
    fn jump_field_rotation_matches_explicit_blocks() {
        let m = mesh();
        let c = MeshCoefficients::from_source(&FnSource(smooth), &m).unwrap();
        let jf = assemble_jump(0.8, 0.2, &c, &m);
        for idx in [0, 5, 20] {
            for n in 5..=12 {
                let k = C64::from_polar(m.radii[idx], ray_angle(n));
                let explicit = jump_matrix(n, k, 0.8, 0.2, &c.nodes[idx]) - Mat3::identity();
                assert!(approx_eq(&jf.at(n, idx), &explicit, 1e-12));
            }
        }
    }

    #[test]
    fn smooth_jump_is_solved_with_symmetric_real_output() {
        let m = fine_mesh();
        let c = MeshCoefficients::from_source(&FnSource(smooth), &m).unwrap();
        let jf = assemble_jump(0.5, 0.1, &c, &m);
        let rec = solve_vector_rh(&jf, &m, &SolverSettings::default()).unwrap();
        assert!(rec.jump_residual < 1e-8, "residual {}", rec.jump_residual);
        let coarse = solve_vector_rh(&assemble_jump(0.5, 0.1, &MeshCoefficients::from_source(&FnSource(smooth), &mesh()).unwrap(), &mesh()), &mesh(), &SolverSettings::default()).unwrap();
        assert!((coarse.m1 - rec.m1).norm() < 1e-7);
        assert!(rec.m1.im.abs() < 1e-10, "m1 = {}", rec.m1);
        // ℬ symmetry is not imposed by the folding, so it is a genuine check.
        let k = C64::from_polar(0.9, 0.2);
        let n1 = evaluate_n(&rec, &m, k);
        let n2 = evaluate_n(&rec, &m, k.conj());
        let reflected = n2.map(|z| z.conj()) * matrix_b();
        assert!((n1 - reflected).norm() < 1e-9);
        let nw = evaluate_n(&rec, &m, OMEGA * k);
        assert!((n1 - nw * matrix_a().transpose() * OMEGA).norm() < 1e-10);
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let m = fine_mesh();
        let c = MeshCoefficients::from_source(&FnSource(smooth), &m).unwrap();
        let at = |x: f64, t: f64| solve_vector_rh(&assemble_jump(x, t, &c, &m), &m, &SolverSettings::default()).unwrap();
        let (x, t, h) = (0.7, 0.3, 1e-4);
        let rec = at(x, t);
        let fx = (at(x + h, t).m1 - at(x - h, t).m1) / (2.0 * h);
        let ft = (at(x, t + h).m1 - at(x, t - h).m1) / (2.0 * h);
        assert!((fx - rec.m1_x).norm() < 1e-7, "{fx} vs {}", rec.m1_x);
        assert!((ft - rec.m1_t).norm() < 1e-7, "{ft} vs {}", rec.m1_t);
    }

    #[test]
    fn direct_estimator_agrees_with_quadrature_moment() {
        let m = fine_mesh();
        let c = MeshCoefficients::from_source(&FnSource(smooth), &m).unwrap();
        let rec = solve_vector_rh(&assemble_jump(0.5, 0.1, &c, &m), &m, &SolverSettings::default()).unwrap();
        // Off every ray and beyond the support, so the next term is O(1/k).
        let k = C64::from_polar(400.0, PI / 12.0);
        assert!((direct_moment(&rec, &m, k) - rec.m1).norm() < 1e-2 * rec.m1.norm().max(1e-3));
    }
}
