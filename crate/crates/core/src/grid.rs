//! Uniform grids: fourth-order finite differences and local Lagrange
//! interpolation.

use crate::error::{Error, Result};

/// Points used by the local interpolant.
const STENCIL: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformGrid {
    pub fn new(start: f64, end: f64, len: usize) -> Result<Self> {
        if len < STENCIL || !(end > start) || !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidInput(format!(
                "grid [{start}, {end}] with {len} points (need at least {STENCIL} increasing points)"
            )));
        }
        Ok(UniformGrid { start, step: (end - start) / (len - 1) as f64, len })
    }

    /// Checks that `xs` is uniformly spaced to a relative tolerance of `1e-8`.
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.len() < STENCIL {
            return Err(Error::InvalidInput(format!("grid has {} points, need {STENCIL}", xs.len())));
        }
        let grid = UniformGrid::new(xs[0], xs[xs.len() - 1], xs.len())?;
        for (i, &x) in xs.iter().enumerate() {
            if (x - grid.point(i)).abs() > 1e-8 * grid.step.max(1e-300) * (1.0 + i as f64).sqrt() {
                return Err(Error::InvalidInput(format!("grid is not uniform at index {i} ({x})")));
            }
        }
        Ok(grid)
    }

    pub fn end(&self) -> f64 {
        self.point(self.len - 1)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.point(i)).collect()
    }

    /// First index and Lagrange weights of the six-point interpolant at `x`.
    pub fn weights(&self, x: f64) -> (usize, [f64; STENCIL]) {
        let s = (x - self.start) / self.step;
        let base = (s.floor() as i64 - (STENCIL as i64 / 2 - 1)).clamp(0, (self.len - STENCIL) as i64) as usize;
        let mut w = [0.0; STENCIL];
        let local = s - base as f64;
        for (j, wj) in w.iter_mut().enumerate() {
            let mut acc = 1.0;
            for m in 0..STENCIL {
                if m != j {
                    acc *= (local - m as f64) / (j as f64 - m as f64);
                }
            }
            *wj = acc;
        }
        (base, w)
    }

    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let (base, w) = self.weights(x);
        apply(values, base, &w)
    }
}

pub fn apply(values: &[f64], base: usize, w: &[f64; STENCIL]) -> f64 {
    w.iter().zip(&values[base..base + STENCIL]).map(|(a, b)| a * b).sum()
}

/// Fourth-order first derivative: centred five-point stencil in the interior,
/// one-sided five-point stencils at the two points nearest each edge.
pub fn first_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 6, "need at least six samples");
    let c = 1.0 / (12.0 * h);
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * c;
    }
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * c;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * c;
    d[n - 1] = -(-25.0 * f[n - 1] + 48.0 * f[n - 2] - 36.0 * f[n - 3] + 16.0 * f[n - 4] - 3.0 * f[n - 5]) * c;
    d[n - 2] = -(-3.0 * f[n - 1] - 10.0 * f[n - 2] + 18.0 * f[n - 3] - 6.0 * f[n - 4] + f[n - 5]) * c;
    d
}

/// Fourth-order second derivative; the edge stencils use six points.
pub fn second_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 6, "need at least six samples");
    let c = 1.0 / (12.0 * h * h);
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * c;
    }
    let edge0 = |g: &dyn Fn(usize) -> f64| {
        (45.0 * g(0) - 154.0 * g(1) + 214.0 * g(2) - 156.0 * g(3) + 61.0 * g(4) - 10.0 * g(5)) * c
    };
    let edge1 = |g: &dyn Fn(usize) -> f64| {
        (10.0 * g(0) - 15.0 * g(1) - 4.0 * g(2) + 14.0 * g(3) - 6.0 * g(4) + g(5)) * c
    };
    d[0] = edge0(&|i| f[i]);
    d[1] = edge1(&|i| f[i]);
    d[n - 1] = edge0(&|i| f[n - 1 - i]);
    d[n - 2] = edge1(&|i| f[n - 1 - i]);
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_exact_on_quartics() {
        let g = UniformGrid::new(-1.0, 2.0, 31).unwrap();
        let f: Vec<f64> = g.points().iter().map(|x| x.powi(4) - 2.0 * x.powi(3) + x).collect();
        let d1 = first_derivative(&f, g.step);
        let d2 = second_derivative(&f, g.step);
        for (i, x) in g.points().into_iter().enumerate() {
            assert!((d1[i] - (4.0 * x.powi(3) - 6.0 * x * x + 1.0)).abs() < 1e-10, "d1 at {i}");
            assert!((d2[i] - (12.0 * x * x - 12.0 * x)).abs() < 1e-8, "d2 at {i}");
        }
    }

    #[test]
    fn interpolation_is_exact_on_quintics() {
        let g = UniformGrid::new(0.0, 1.0, 11).unwrap();
        let p = |x: f64| 3.0 * x.powi(5) - x.powi(2) + 0.5;
        let f: Vec<f64> = g.points().into_iter().map(p).collect();
        for x in [0.0, 0.013, 0.37, 0.5, 0.93, 1.0] {
            assert!((g.interpolate(&f, x) - p(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_uniform_grids() {
        assert!(UniformGrid::from_samples(&[0.0, 1.0, 2.0, 3.5, 4.0, 5.0]).is_err());
        assert!(UniformGrid::from_samples(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).is_ok());
    }
}
