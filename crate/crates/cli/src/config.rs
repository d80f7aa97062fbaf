use std::path::{Path, PathBuf};

use bqhl::oracle::GaussianDatum;
use bqhl::rh::{MeshSettings, SolverSettings, COND_LIMIT, R_TRUNC};
use bqhl::{Error, Result};
use serde::{Deserialize, Serialize};

/// Settings shared by all commands. Defaults, then `--config`, then flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub x_max: f64,
    pub k_max: f64,
    pub nodes_per_panel: usize,
    pub r_trunc: f64,
    pub r_min: f64,
    /// Relative tolerance of the spectral ODE solves.
    pub tol: f64,
    pub grid: [usize; 2],
    /// Datum parameters; unset ones follow the default datum for `x_max`.
    pub amplitude: Option<f64>,
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub v_coeff: Option<f64>,
    /// Oracle time step; `T/400` when absent.
    pub dt: Option<f64>,
    pub snapshots: usize,
    /// Points of the grid re-solved on the doubled mesh in `roundtrip`.
    pub self_check: usize,
    pub cond_limit: f64,
    pub profiles: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t_end: 1.0,
            x_max: 30.0,
            k_max: 40.0,
            nodes_per_panel: MeshSettings::default().nodes_per_panel,
            r_trunc: R_TRUNC,
            r_min: MeshSettings::default().r_min,
            tol: 1e-10,
            grid: [10, 5],
            amplitude: None,
            center: None,
            width: None,
            v_coeff: None,
            dt: None,
            snapshots: 5,
            self_check: 0,
            cond_limit: COND_LIMIT,
            profiles: None,
            dataset: None,
            out: PathBuf::from("."),
        }
    }
}

/// Same fields, all optional, as read from a JSON file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    #[serde(rename = "T")]
    pub t_end: Option<f64>,
    pub x_max: Option<f64>,
    pub k_max: Option<f64>,
    pub nodes_per_panel: Option<usize>,
    pub r_trunc: Option<f64>,
    pub r_min: Option<f64>,
    pub tol: Option<f64>,
    pub grid: Option<[usize; 2]>,
    pub amplitude: Option<f64>,
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub v_coeff: Option<f64>,
    pub dt: Option<f64>,
    pub snapshots: Option<usize>,
    pub self_check: Option<usize>,
    pub cond_limit: Option<f64>,
    pub profiles: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

macro_rules! merge {
    ($dst:expr, $src:expr, $($f:ident),*) => {
        $( if let Some(v) = $src.$f { $dst.$f = v; } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<PartialConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("config {}: {e}", path.display())))
    }

    pub fn apply(&mut self, p: PartialConfig) {
        merge!(self, p, t_end, x_max, k_max, nodes_per_panel, r_trunc, r_min, tol, grid, snapshots, self_check, cond_limit, out);
        for (dst, src) in [(&mut self.dt, p.dt), (&mut self.amplitude, p.amplitude), (&mut self.center, p.center), (&mut self.width, p.width), (&mut self.v_coeff, p.v_coeff)] {
            if src.is_some() {
                *dst = src;
            }
        }
        if p.profiles.is_some() {
            self.profiles = p.profiles;
        }
        if p.dataset.is_some() {
            self.dataset = p.dataset;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("T", self.t_end),
            ("xmax", self.x_max),
            ("kmax", self.k_max),
            ("rtrunc", self.r_trunc),
            ("rmin", self.r_min),
            ("tol", self.tol),
            ("width", self.datum().width),
            ("cond-limit", self.cond_limit),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
            }
        }
        if self.nodes_per_panel < 2 || self.grid[0] == 0 || self.grid[1] == 0 {
            return Err(Error::InvalidInput("nodes per panel must be ≥ 2 and the grid non-empty".into()));
        }
        Ok(())
    }

    pub fn datum(&self) -> GaussianDatum {
        let d = GaussianDatum::default_for(self.x_max);
        GaussianDatum {
            amplitude: self.amplitude.unwrap_or(d.amplitude),
            center: self.center.unwrap_or(d.center),
            width: self.width.unwrap_or(d.width),
            v_coeff: self.v_coeff.unwrap_or(d.v_coeff),
        }
    }

    pub fn mesh(&self) -> MeshSettings {
        MeshSettings {
            nodes_per_panel: self.nodes_per_panel,
            r_trunc: self.r_trunc,
            r_min: self.r_min,
            ..bqhl::pipeline::mesh_settings_for(self.x_max, self.t_end)
        }
    }

    pub fn solver(&self) -> SolverSettings {
        SolverSettings { cond_limit: self.cond_limit, ..Default::default() }
    }

    pub fn profiles_dir(&self) -> PathBuf {
        self.profiles.clone().unwrap_or_else(|| self.out.clone())
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.dataset.clone().unwrap_or_else(|| self.out.join("dataset.json"))
    }
}

/// Parses `"nx,nt"`.
pub fn parse_grid(s: &str) -> std::result::Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([a.parse().map_err(|e| format!("nx: {e}"))?, b.parse().map_err(|e| format!("nt: {e}"))?]),
        _ => Err(format!("expected \"nx,nt\", got {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("10, 5"), Ok([10, 5]));
        assert!(parse_grid("10").is_err());
        assert!(parse_grid("a,5").is_err());
    }

    #[test]
    fn file_values_override_defaults() {
        let mut c = RunConfig::default();
        c.apply(serde_json::from_str(r#"{"T": 2.0, "grid": [3, 4]}"#).unwrap());
        assert_eq!((c.t_end, c.grid), (2.0, [3, 4]));
        assert_eq!(c.x_max, 30.0);
        assert!(serde_json::from_str::<PartialConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn non_positive_values_are_rejected() {
        let c = RunConfig { k_max: 0.0, ..Default::default() };
        assert_eq!(c.validate().unwrap_err().exit_code(), 4);
        assert!(RunConfig::default().validate().is_ok());
    }
}
