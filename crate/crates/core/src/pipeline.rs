//! End-to-end wiring: reference evolution, sampled scattering data, and
//! field recovery on an interior grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{evolve_gaussian, extract_half_line, GaussianDatum, LineField, OracleSettings};
use crate::reflection::{assumption_scan, ScanSettings, SpectralDataSet, ORIGIN_LEVELS};
use crate::rh::{sample_for_mesh, MeshSettings};
use crate::volterra::{CauchyData, OdeSettings};

/// Samples of the half-line window handed to the scattering side.
pub const HALF_LINE_POINTS: usize = 3001;
/// Graded sample nodes per ray before mesh-specific additions.
pub const SAMPLE_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatumConfig {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    pub v_coeff: f64,
}

impl From<GaussianDatum> for DatumConfig {
    fn from(d: GaussianDatum) -> Self {
        DatumConfig { amplitude: d.amplitude, center: d.center, width: d.width, v_coeff: d.v_coeff }
    }
}

impl From<DatumConfig> for GaussianDatum {
    fn from(d: DatumConfig) -> Self {
        GaussianDatum { amplitude: d.amplitude, center: d.center, width: d.width, v_coeff: d.v_coeff }
    }
}

/// Evolves the datum on `[0, T]` and restricts it to `[0, x_max]`.
pub fn reference_solution(datum: &GaussianDatum, x_max: f64, t_end: f64) -> Result<(LineField, CauchyData)> {
    let field = evolve_gaussian(datum, &OracleSettings::for_window(x_max, t_end))?;
    let data = extract_half_line(&field, x_max, HALF_LINE_POINTS)?;
    Ok((field, data))
}

/// ODE settings for spectral evaluations on `[0, x_max]` up to `k_max`.
pub fn ode_settings(x_max: f64, k_max: f64, tol: f64) -> OdeSettings {
    OdeSettings { rtol: tol, atol: tol * 1e-2, x_max, k_max, ..Default::default() }
}

/// Mesh whose moment quadrature resolves the phases of the window.
pub fn mesh_settings_for(x_max: f64, t_end: f64) -> MeshSettings {
    MeshSettings { phase_x: 2.0 * x_max, phase_t: 2.0 * t_end, ..Default::default() }
}

/// Samples, origin limits, tail fits and the assumption report; with a mesh
/// and admissible data, also direct samples at every radius it needs below
/// `K_max`. Inadmissible data are never inverted, so they skip that step.
pub fn build_dataset(data: &CauchyData, k_max: f64, mesh: Option<&crate::rh::ContourMesh>, settings: &OdeSettings) -> Result<SpectralDataSet> {
    let mut d = SpectralDataSet::sample(data, k_max, SAMPLE_NODES, settings)?;
    d.origin_limits(data, ORIGIN_LEVELS, settings)?;
    d.fit_tails();
    let report = assumption_scan(data, &ScanSettings::default(), settings)?;
    if let (Some(mesh), true) = (mesh, report.pass) {
        sample_for_mesh(&mut d, data, mesh, settings)?;
    }
    d.assumptions = Some(report);
    Ok(d)
}

/// `nx × nt` points strictly inside `(0, x_max) × (0, t_end)`.
pub fn interior_grid(x_max: f64, t_end: f64, nx: usize, nt: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if nx == 0 || nt == 0 || !(x_max > 0.0 && t_end > 0.0) {
        return Err(Error::InvalidInput(format!("grid {nx}×{nt} on [0, {x_max}]×[0, {t_end}] is empty")));
    }
    let xs = (1..=nx).map(|i| x_max * i as f64 / (nx + 1) as f64).collect();
    let ts = (1..=nt).map(|j| t_end * j as f64 / (nt + 1) as f64).collect();
    Ok((xs, ts))
}
