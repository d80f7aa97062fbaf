//! Clause-by-clause checks of the structural properties of `r₁…r₄`:
//! origin values, vanishing orders, sub-unit moduli, the tail identity and
//! the unitarity identities.

use serde::{Deserialize, Serialize};

use crate::algebra::{OMEGA, ONE};
use crate::error::Result;
use crate::reflection::{unitarity_defect, SpectralDataSet};
use crate::volterra::{CauchyData, OdeSettings};

pub const ORIGIN_TOL: f64 = 5e-3;
pub const SLOPE_TOL: f64 = 0.2;
pub const UNITARITY_TOL: f64 = 1e-8;
pub const TAIL_IDENTITY_TOL: f64 = 5e-2;

/// Radii `|k|` at which the unitarity identities are checked, on both signs of `k`.
pub const UNITARITY_RADII: [f64; 6] = [0.3, 0.7, 1.5, 3.0, 6.0, 10.0];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Clause {
    pub id: String,
    pub description: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    /// `false` for data failing the genericity scan; every clause is then vacuous.
    pub generic: bool,
    pub clauses: Vec<Clause>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn clause(&self, id: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.id == id)
    }
}

fn clause(id: &str, description: &str, measured: f64, tolerance: f64, pass: bool, note: Option<String>) -> Clause {
    Clause { id: id.into(), description: description.into(), measured, tolerance, pass, note }
}

fn below(id: &str, description: &str, measured: f64, tolerance: f64) -> Clause {
    clause(id, description, measured, tolerance, measured <= tolerance, None)
}

/// Largest `|k|^p |r_j|` over the samples in the tail window `[K/2, K]`.
fn window_bound(d: &SpectralDataSet, j: usize, p: i32) -> f64 {
    let r = d.ray(j);
    r.nodes
        .iter()
        .zip(&r.values)
        .filter(|(k, _)| k.norm() >= 0.5 * d.k_max)
        .fold(0.0f64, |m, (k, v)| m.max(k.norm().powi(p) * v.norm()))
}

/// Runs all clauses. The unitarity clause needs the Cauchy data and is
/// reported as skipped without them.
pub fn verify_dataset(d: &SpectralDataSet, data: Option<&CauchyData>, settings: &OdeSettings) -> Result<VerifyReport> {
    let generic = match &d.assumptions {
        Some(rep) => rep.pass,
        None => !d.is_trivial(),
    };
    let mut clauses = Vec::new();

    let origin = |j: usize| d.ray(j).origin.as_ref();
    let missing = |j: usize| clause(&format!("origin-r{j}"), "origin data", f64::NAN, 0.0, false, Some(format!("r{j} has no origin extrapolation")));
    match origin(1) {
        Some(o) => clauses.push(below("i.r1", "|r₁(0) − ω|", (o.value - OMEGA).norm(), ORIGIN_TOL)),
        None => clauses.push(missing(1)),
    }
    match origin(2) {
        Some(o) => clauses.push(below("i.r2", "|r₂(0) − 1|", (o.value - ONE).norm(), ORIGIN_TOL)),
        None => clauses.push(missing(2)),
    }
    for (j, order) in [(3usize, 2.0), (4, 1.0)] {
        match origin(j) {
            Some(o) => {
                let dev = (o.slope_exponent - order).abs();
                let mut c = below(&format!("ii.r{j}"), &format!("|slope exponent of r{j} − {order}|"), dev, SLOPE_TOL);
                c.note = Some(format!("fitted exponent {:.4}", o.slope_exponent));
                c.pass = dev.is_finite() && c.pass;
                clauses.push(c);
            }
            None => clauses.push(missing(j)),
        }
    }
    for (j, ray) in [(1usize, 1usize), (2, 7)] {
        let max = d.ray(j).values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        clauses.push(clause(&format!("iii.r{j}"), &format!("max |r{j}| on ray {ray}"), max, 1.0, max < 1.0, None));
    }
    clauses.push(match d.tail_identity() {
        Some((lhs, rhs)) => {
            let scale = lhs.norm().max(rhs.norm());
            let rel = if scale > 0.0 { (lhs - rhs).norm() / scale } else { 0.0 };
            let note = format!("|r₄⁽²⁾| = {:.3e}, |(conj r₁⁽¹⁾ − ω²r₃⁽¹⁾) r₃⁽¹⁾| = {:.3e}", lhs.norm(), rhs.norm());
            clause("iv", "relative defect of the tail identity", rel, TAIL_IDENTITY_TOL, rel <= TAIL_IDENTITY_TOL, Some(note))
        }
        None => {
            let sizes: Vec<String> = [(1usize, 1), (3, 1), (4, 2)]
                .iter()
                .map(|&(j, p)| match &d.ray(j).tail {
                    Some(t) => format!("r{j}: |leading| = {:.1e}", t.coeffs[0].norm()),
                    None => format!("r{j}: no fit, |k^{p} r{j}| ≤ {:.1e} on [K/2, K]", window_bound(d, j, p)),
                })
                .collect();
            let note = format!("tail fits unavailable; {}", sizes.join(", "));
            clause("iv", "relative defect of the tail identity", f64::NAN, TAIL_IDENTITY_TOL, false, Some(note))
        }
    });
    match data {
        Some(data) => {
            let mut worst = 0.0f64;
            for &rho in &UNITARITY_RADII {
                for k in [rho, -rho] {
                    let (lhs, rhs) = unitarity_defect(k, data, settings)?;
                    worst = worst.max((lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE));
                }
            }
            clauses.push(below("v", "relative unitarity defect", worst, UNITARITY_TOL));
        }
        None => clauses.push(clause("v", "relative unitarity defect", f64::NAN, UNITARITY_TOL, false, Some("skipped: needs the Cauchy data".into()))),
    }
    if !generic {
        for c in clauses.iter_mut() {
            c.pass = true;
            c.note = Some("vacuous: non-generic data".into());
        }
    }
    let pass = clauses.iter().all(|c| c.pass);
    Ok(VerifyReport { generic, clauses, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reflection::{AssumptionReport, TailFit};
    use crate::algebra::{OMEGA2, ZERO};
    use crate::algebra::C64;

    fn synthetic() -> SpectralDataSet {
        let data = CauchyData::zero(10.0, 1.0).unwrap();
        let mut d = SpectralDataSet::sample(&data, 10.0, 12, &OdeSettings::default()).unwrap();
        d.assumptions = Some(AssumptionReport { minima: vec![], extra_minima: vec![], limits: vec![], winding: 0, threshold: 1e-6, pass: true, failures: vec![] });
        d
    }

    fn tail(lead: C64) -> TailFit {
        TailFit {
            powers: [-1, -2],
            coeffs: [lead, ZERO],
            next: ZERO,
            oscillatory: [[ZERO; 2]; 3],
            phase_rate: 0.0,
            relative_residual: 0.0,
            in_sample_rms: 0.0,
            leave_one_out_rms: 0.0,
            constant_term: 0.0,
            window_nodes: 0,
        }
    }

    #[test]
    fn zero_data_pass_vacuously() {
        let data = CauchyData::zero(10.0, 1.0).unwrap();
        let mut d = SpectralDataSet::sample(&data, 10.0, 12, &OdeSettings::default()).unwrap();
        d.assumptions = Some(AssumptionReport { minima: vec![], extra_minima: vec![], limits: vec![], winding: 0, threshold: 1e-6, pass: false, failures: vec!["zero".into()] });
        let rep = verify_dataset(&d, Some(&data), &OdeSettings::default()).unwrap();
        assert!(!rep.generic && rep.pass);
        assert!(rep.clauses.iter().all(|c| c.note.as_deref() == Some("vacuous: non-generic data")));
    }

    #[test]
    fn tampered_tail_breaks_the_identity() {
        let mut d = synthetic();
        let (r1, r3) = (C64::new(0.4, -0.2), C64::new(0.1, 0.3));
        let r4 = (r1.conj() - OMEGA2 * r3) * r3;
        d.rays[0].tail = Some(tail(r1));
        d.rays[2].tail = Some(tail(r3));
        d.rays[3].tail = Some(tail(r4));
        let ok = verify_dataset(&d, None, &OdeSettings::default()).unwrap();
        assert!(ok.clause("iv").unwrap().pass);
        d.rays[3].tail = Some(tail(r4 * 1.2));
        let bad = verify_dataset(&d, None, &OdeSettings::default()).unwrap();
        assert!(!bad.clause("iv").unwrap().pass);
        assert!(!bad.clause("v").unwrap().pass, "unitarity is skipped without data");
    }
}
