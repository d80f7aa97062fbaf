//! Adaptive Dormand–Prince 5(4) integrator for complex linear systems of
//! fixed size.

use crate::algebra::C64;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on `|h|`.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 { rtol: 1e-10, atol: 1e-12, max_step: f64::INFINITY, max_steps: 5_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[C64; N], terms: &[(f64, &[C64; N])], h: f64) -> [C64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let s = c * h;
        for i in 0..N {
            out[i] += k[i] * s;
        }
    }
    out
}

impl Dopri5 {
    /// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each
    /// of `outputs`, which must be ordered in the direction of integration
    /// (all `≥ t0` or all `≤ t0`). `scale[i]` multiplies the absolute
    /// tolerance of component `i`.
    pub fn integrate<const N: usize, F>(
        &self,
        mut f: F,
        t0: f64,
        y0: [C64; N],
        outputs: &[f64],
        scale: &[f64; N],
    ) -> Result<Vec<[C64; N]>>
    where
        F: FnMut(f64, &[C64; N]) -> [C64; N],
    {
        let mut out = Vec::with_capacity(outputs.len());
        if outputs.is_empty() {
            return Ok(out);
        }
        let dir = if outputs.iter().any(|&t| t < t0) { -1.0 } else { 1.0 };
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = self.initial_step(&mut f, t, &y, &k1, scale, dir, (outputs[outputs.len() - 1] - t0).abs());
        let mut steps = 0usize;
        for &target in outputs {
            if (target - t) * dir < -1e-14 * (1.0 + target.abs()) {
                return Err(Error::InvalidInput("output points are not ordered".into()));
            }
            while (target - t) * dir > 1e-14 * (1.0 + t.abs()) {
                steps += 1;
                if steps > self.max_steps {
                    return Err(Error::StepControl { at: t, reason: format!("more than {} steps", self.max_steps) });
                }
                let remaining = target - t;
                let last = h.abs() >= remaining.abs();
                let hh = if last { remaining } else { h };
                let (y_new, k7, err) = step(&mut f, t, &y, &k1, hh, self, scale);
                if !err.is_finite() {
                    return Err(Error::StepControl { at: t, reason: "non-finite state".into() });
                }
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
                if err <= 1.0 {
                    t = if last { target } else { t + hh };
                    y = y_new;
                    k1 = k7;
                    if !last || fac < 1.0 {
                        h = hh * fac;
                    }
                } else {
                    h = hh * fac.min(1.0);
                }
                h = dir * h.abs().min(self.max_step);
                if h.abs() < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::StepControl { at: t, reason: "step size underflow".into() });
                }
            }
            out.push(y);
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn initial_step<const N: usize, F>(
        &self,
        f: &mut F,
        t: f64,
        y: &[C64; N],
        f0: &[C64; N],
        scale: &[f64; N],
        dir: f64,
        span: f64,
    ) -> f64
    where
        F: FnMut(f64, &[C64; N]) -> [C64; N],
    {
        let sc: Vec<f64> = (0..N).map(|i| self.atol * scale[i] + self.rtol * y[i].norm()).collect();
        let norm = |v: &[C64; N]| (v.iter().zip(&sc).map(|(a, s)| (a.norm() / s).powi(2)).sum::<f64>() / N as f64).sqrt();
        let (d0, d1) = (norm(y), norm(f0));
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(span.max(1e-12)).min(self.max_step);
        let y1 = axpy(y, &[(1.0, f0)], dir * h0);
        let f1 = f(t + dir * h0, &y1);
        let diff: [C64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
        let d2 = norm(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        dir * (100.0 * h0).min(h1).min(self.max_step).min(span.max(1e-12))
    }
}

fn step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[C64; N],
    k1: &[C64; N],
    h: f64,
    s: &Dopri5,
    scale: &[f64; N],
) -> ([C64; N], [C64; N], f64)
where
    F: FnMut(f64, &[C64; N]) -> [C64; N],
{
    let k2 = f(t + C2 * h, &axpy(y, &[(A21, k1)], h));
    let k3 = f(t + C3 * h, &axpy(y, &[(A31, k1), (A32, &k2)], h));
    let k4 = f(t + C4 * h, &axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h));
    let k5 = f(t + C5 * h, &axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
    let k6 = f(t + h, &axpy(y, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h));
    let y_new = axpy(y, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], h);
    let k7 = f(t + h, &y_new);
    let mut acc = 0.0;
    for i in 0..N {
        let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        let sc = s.atol * scale[i] + s.rtol * y[i].norm().max(y_new[i].norm());
        acc += (e.norm() / sc).powi(2);
    }
    (y_new, k7, (acc / N as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillator_matches_exponential() {
        let lam = C64::new(-0.3, 7.0);
        let s = Dopri5::default();
        let outs = [0.5, 1.0, 2.0];
        let ys = s.integrate(|_, y: &[C64; 1]| [lam * y[0]], 0.0, [C64::new(1.0, 0.0)], &outs, &[1.0]).unwrap();
        for (t, y) in outs.iter().zip(&ys) {
            assert!((y[0] - (lam * t).exp()).norm() < 1e-9);
        }
    }

    #[test]
    fn backward_integration_hits_outputs_exactly() {
        let s = Dopri5::default();
        let outs = [3.0, 1.5, 0.0];
        let ys = s
            .integrate(|t, _y: &[C64; 2]| [C64::new(2.0 * t, 0.0), C64::new(0.0, 1.0)], 3.0, [C64::new(9.0, 0.0), C64::new(0.0, 0.0)], &outs, &[1.0, 1.0])
            .unwrap();
        assert_eq!(ys[0][0], C64::new(9.0, 0.0));
        for (t, y) in outs.iter().zip(&ys) {
            assert!((y[0].re - t * t).abs() < 1e-10);
            assert!((y[1].im - (t - 3.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn fifth_order_convergence_with_fixed_steps() {
        // Forcing max_step with a loose tolerance exposes the formal order.
        let run = |h: f64| {
            let s = Dopri5 { rtol: 1.0, atol: 1.0, max_step: h, max_steps: 1_000_000 };
            let y = s.integrate(|t, y: &[C64; 1]| [y[0] * t.cos()], 0.0, [C64::new(1.0, 0.0)], &[2.0], &[1.0]).unwrap();
            (y[0][0].re - (2.0f64).sin().exp()).abs()
        };
        let order = (run(0.1) / run(0.05)).log2();
        assert!(order > 4.5, "order {order}");
    }
}
