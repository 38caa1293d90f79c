//! Dormand-Prince 5(4) with adaptive step control.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dopri5Options<R> {
    pub rtol: R,
    pub atol: R,
    pub max_steps: usize,
}

impl<R: Real> Default for Dopri5Options<R> {
    fn default() -> Self {
        Self {
            rtol: R::lit(1e-12),
            atol: R::lit(1e-14),
            max_steps: 200_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = rhs(t, y)` from `t0` to `t1` (either direction) and
/// returns `y(t1)`.
pub fn integrate<R, F>(rhs: F, t0: R, y0: &[R], t1: R, opts: &Dopri5Options<R>) -> Result<Vec<R>>
where
    R: Real,
    F: Fn(R, &[R]) -> Vec<R>,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let span = t1 - t0;
    if span == R::zero() {
        return Ok(y);
    }
    let dir = span.signum();
    let mut h = span * R::lit(1e-3);
    let mut k: [Vec<R>; 7] = std::array::from_fn(|_| vec![R::zero(); n]);
    k[0] = rhs(t, &y);
    let mut steps = 0;
    let mut stage = vec![R::zero(); n];
    while (t1 - t) * dir > R::zero() {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Numerical(format!(
                "integrator exceeded {} steps before reaching t = {}",
                opts.max_steps,
                crate::scalar::Scalar::to_f64(&t1)
            )));
        }
        if (t + h - t1) * dir > R::zero() {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc = acc + h * R::lit(A[s][j]) * kj[i];
                }
                stage[i] = acc;
            }
            k[s] = rhs(t + R::lit(C[s]) * h, &stage);
        }
        // stage now holds the fifth-order solution (FSAL row)
        let mut err = R::zero();
        for i in 0..n {
            let mut e = R::zero();
            for s in 0..7 {
                e = e + h * R::lit(B5[s] - B4[s]) * k[s][i];
            }
            let scale = opts.atol + opts.rtol * y[i].abs().max(stage[i].abs());
            let r = e / scale;
            err = err + r * r;
        }
        err = (err / R::from_usize(n).unwrap()).sqrt();
        if err <= R::one() || h.abs() < R::lit(1e-14) * t.abs().max(R::one()) {
            t = t + h;
            y.copy_from_slice(&stage);
            k[0] = k[6].clone();
        }
        let factor = if err == R::zero() {
            R::lit(5.0)
        } else {
            (R::lit(0.9) * err.powf(R::lit(-0.2))).min(R::lit(5.0)).max(R::lit(0.2))
        };
        h = h * factor;
        if !h.is_finite() || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical("integrator produced a non-finite value".into()));
        }
    }
    Ok(y)
}
