//! Unrestarted GMRES for dense complex systems.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{C64, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: DVector<C64>,
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` as tracked by the Givens recurrence.
    pub relative_residual: f64,
    /// Ratio of extreme singular values of the Hessenberg matrix, a lower
    /// bound for the condition number of `A` that is sharp once the Krylov
    /// space has captured the extreme spectrum.
    pub cond_estimate: f64,
}

/// Square operator applied by GMRES.
pub trait LinearOperator {
    fn apply(&self, x: &DVector<C64>) -> DVector<C64>;
}

impl LinearOperator for DMatrix<C64> {
    fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        self * x
    }
}

/// Solves `A x = b` to relative residual `tol`, starting from zero.
pub fn gmres<O: LinearOperator + ?Sized>(a: &O, b: &DVector<C64>, tol: f64, max_iter: usize) -> Result<GmresOutcome> {
    let n = b.len();
    let beta = b.norm();
    if beta == 0.0 {
        return Ok(GmresOutcome { solution: DVector::zeros(n), iterations: 0, relative_residual: 0.0, cond_estimate: 1.0 });
    }
    let m_max = max_iter.min(n);
    let mut basis: Vec<DVector<C64>> = vec![b / C64::from(beta)];
    let mut h = DMatrix::<C64>::zeros(m_max + 1, m_max);
    let mut cs: Vec<C64> = Vec::with_capacity(m_max);
    let mut sn: Vec<C64> = Vec::with_capacity(m_max);
    let mut g = DVector::<C64>::zeros(m_max + 1);
    g[0] = C64::from(beta);
    let mut r = DMatrix::<C64>::zeros(m_max + 1, m_max);
    let mut steps = 0;
    let mut residual = 1.0;
    for j in 0..m_max {
        let mut w = a.apply(&basis[j]);
        // Modified Gram–Schmidt, twice for stability.
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let c = q.dotc(&w);
                h[(i, j)] += c;
                w.axpy(-c, q, ONE_C);
            }
        }
        let hn = w.norm();
        h[(j + 1, j)] = C64::from(hn);
        for i in 0..=j + 1 {
            r[(i, j)] = h[(i, j)];
        }
        for i in 0..j {
            let (c, s) = (cs[i], sn[i]);
            let (x, y) = (r[(i, j)], r[(i + 1, j)]);
            r[(i, j)] = c.conj() * x + s.conj() * y;
            r[(i + 1, j)] = -s * x + c * y;
        }
        let (x, y) = (r[(j, j)], r[(j + 1, j)]);
        let d = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if d == 0.0 { (C64::from(1.0), ZERO) } else { (x / d, y / d) };
        r[(j, j)] = C64::from(d);
        r[(j + 1, j)] = ZERO;
        let gj = g[j];
        g[j] = c.conj() * gj;
        g[j + 1] = -s * gj;
        cs.push(c);
        sn.push(s);
        steps = j + 1;
        residual = g[j + 1].norm() / beta;
        if residual <= tol || hn == 0.0 {
            break;
        }
        basis.push(w / C64::from(hn));
    }
    if residual > tol {
        return Err(Error::Numerical(format!("GMRES stalled at relative residual {residual:.2e} after {steps} iterations")));
    }
    let rk = r.view((0, 0), (steps, steps)).into_owned();
    let y = rk
        .solve_upper_triangular(&g.rows(0, steps).into_owned())
        .ok_or_else(|| Error::Numerical("GMRES least-squares problem is singular".into()))?;
    let mut x = DVector::<C64>::zeros(n);
    for (i, yi) in y.iter().enumerate() {
        x.axpy(*yi, &basis[i], ONE_C);
    }
    let sv = h.view((0, 0), (steps + 1, steps)).into_owned().singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    Ok(GmresOutcome { solution: x, iterations: steps, relative_residual: residual, cond_estimate: hi / lo })
}

const ONE_C: C64 = C64::new(1.0, 0.0);
