//! CSV formats for profiles, oracle snapshots and recovered field tables.
//! Floats are written in shortest round-trip form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lax::{BoundaryProfile, InitialProfile, DECAY_THRESHOLD};
use crate::oracle::LineField;
use crate::rh::FieldRow;
use crate::volterra::CauchyData;

#[derive(Debug, Serialize, Deserialize)]
struct InitialRow {
    x: f64,
    u0: f64,
    v0: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct BoundaryRow {
    t: f64,
    u0t: f64,
    u1t: f64,
    u2t: f64,
    v0t: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotRow {
    x: f64,
    u: f64,
    v: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldCsvRow {
    x: f64,
    t: f64,
    u: f64,
    v: f64,
    jump_residual: f64,
    cond_estimate: f64,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?;
    if rows.is_empty() {
        return Err(Error::Schema(format!("{} has no data rows", path.display())));
    }
    Ok(rows)
}

/// Columns `x, u0, v0`.
pub fn write_initial(path: &Path, p: &InitialProfile) -> Result<()> {
    let xs = p.grid.points();
    write_rows(path, xs.iter().zip(&p.u).zip(&p.v).map(|((&x, &u0), &v0)| InitialRow { x, u0, v0 }))
}

/// Reads a profile and re-checks the decay invariant when `checked`.
pub fn read_initial(path: &Path, checked: bool) -> Result<InitialProfile> {
    let rows: Vec<InitialRow> = read_rows(path)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
    let u = rows.iter().map(|r| r.u0).collect();
    let v = rows.iter().map(|r| r.v0).collect();
    if checked {
        InitialProfile::new(&xs, u, v, DECAY_THRESHOLD)
    } else {
        InitialProfile::unchecked(&xs, u, v)
    }
}

/// Columns `t, u0t, u1t, u2t, v0t`.
pub fn write_boundary(path: &Path, b: &BoundaryProfile) -> Result<()> {
    let ts = b.grid.points();
    write_rows(path, (0..ts.len()).map(|i| BoundaryRow { t: ts[i], u0t: b.u0[i], u1t: b.u1[i], u2t: b.u2[i], v0t: b.v0[i] }))
}

pub fn read_boundary(path: &Path) -> Result<BoundaryProfile> {
    let rows: Vec<BoundaryRow> = read_rows(path)?;
    let col = |f: fn(&BoundaryRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    BoundaryProfile::new(&col(|r| r.t), col(|r| r.u0t), col(|r| r.u1t), col(|r| r.u2t), col(|r| r.v0t))
}

pub const INITIAL_FILE: &str = "initial.csv";
pub const BOUNDARY_FILE: &str = "boundary.csv";
pub const FINAL_FILE: &str = "final.csv";

/// Writes `initial.csv`, `boundary.csv` and, when present, `final.csv`.
pub fn write_cauchy_data(dir: &Path, data: &CauchyData) -> Result<()> {
    write_initial(&dir.join(INITIAL_FILE), &data.initial)?;
    write_boundary(&dir.join(BOUNDARY_FILE), &data.boundary)?;
    if let Some(f) = &data.final_profile {
        write_initial(&dir.join(FINAL_FILE), f)?;
    }
    Ok(())
}

/// Reads the files written by [`write_cauchy_data`]; `final.csv` is optional.
pub fn read_cauchy_data(dir: &Path) -> Result<CauchyData> {
    let initial = read_initial(&dir.join(INITIAL_FILE), true)?;
    let boundary = read_boundary(&dir.join(BOUNDARY_FILE))?;
    let fin = dir.join(FINAL_FILE);
    let final_profile = if fin.exists() { Some(read_initial(&fin, false)?) } else { None };
    Ok(CauchyData { initial, boundary, final_profile })
}

/// One file `field_NNNN.csv` (columns `x, u, v`) per selected level.
pub fn write_snapshots(dir: &Path, f: &LineField, levels: &[usize]) -> Result<Vec<std::path::PathBuf>> {
    let mut out = Vec::new();
    for &l in levels {
        let (x, u, v) = f.snapshot(l);
        let path = dir.join(format!("field_{l:04}.csv"));
        write_rows(&path, (0..x.len()).map(|i| SnapshotRow { x: x[i], u: u[i], v: v[i] }))?;
        out.push(path);
    }
    Ok(out)
}

/// Columns `x, t, u, v, jump_residual, cond_estimate`.
pub fn write_fields(path: &Path, rows: &[FieldRow]) -> Result<()> {
    write_rows(
        path,
        rows.iter().map(|r| FieldCsvRow { x: r.x, t: r.t, u: r.u, v: r.v, jump_residual: r.jump_residual, cond_estimate: r.cond_estimate }),
    )
}

pub fn read_fields(path: &Path) -> Result<Vec<FieldRow>> {
    let rows: Vec<FieldCsvRow> = read_rows(path)?;
    Ok(rows
        .into_iter()
        .map(|r| FieldRow { x: r.x, t: r.t, u: r.u, v: r.v, u_imag: 0.0, v_imag: 0.0, jump_residual: r.jump_residual, cond_estimate: r.cond_estimate })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let p = InitialProfile::from_fn(10.0, 101, |x| 0.1 * (-(x - 3.0f64).powi(2)).exp() / 3.0, |x| (-(x - 3.0f64).powi(2)).exp() * 0.7).unwrap();
        let b = BoundaryProfile::zero(1.0, 21).unwrap();
        let data = CauchyData { initial: p.clone(), boundary: b.clone(), final_profile: None };
        write_cauchy_data(dir.path(), &data).unwrap();
        let back = read_cauchy_data(dir.path()).unwrap();
        assert_eq!(back.initial, p);
        assert_eq!(back.boundary, b);
        assert!(back.final_profile.is_none());
    }

    #[test]
    fn missing_columns_are_schema_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,u0\n0,1\n").unwrap();
        let e = read_initial(&path, false).unwrap_err();
        assert_eq!(e.exit_code(), 4);
    }

    #[test]
    fn field_table_has_the_documented_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let row = FieldRow { x: 1.0, t: 0.5, u: 0.1, v: -0.2, u_imag: 0.0, v_imag: 0.0, jump_residual: 1e-9, cond_estimate: 12.0 };
        write_fields(&path, &[row]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x,t,u,v,jump_residual,cond_estimate\n"));
        assert_eq!(read_fields(&path).unwrap()[0].v, -0.2);
    }
}
