//! Non-rigorous floating-point integrators used for estimates and as test oracles.

use super::poly::{PolyField, TaylorProgram};

/// Classical fourth-order Runge-Kutta step.
pub fn rk4_step(f: &PolyField, x: &[f64], h: f64) -> Vec<f64> {
    let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
    let k1 = f.eval(x);
    let k2 = f.eval(&add(x, &k1, 0.5 * h));
    let k3 = f.eval(&add(x, &k2, 0.5 * h));
    let k4 = f.eval(&add(x, &k3, h));
    (0..x.len()).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// High-order Taylor integrator in double precision.
#[derive(Clone, Debug)]
pub struct TaylorReference {
    prog: TaylorProgram,
    order: usize,
    h: f64,
}

impl TaylorReference {
    pub fn new(f: &PolyField, order: usize, h: f64) -> Self {
        TaylorReference { prog: f.compile(), order, h }
    }

    pub fn eval(&self, x: &[f64], t: f64) -> Vec<f64> {
        let s = self.prog.series(x, &[], self.order);
        (0..x.len()).map(|i| s.iter().rev().fold(0.0, |acc, c| acc * t + c[i])).collect()
    }

    pub fn flow(&self, x: &[f64], t: f64) -> Vec<f64> {
        let n = (t.abs() / self.h).ceil().max(1.0) as usize;
        let h = t / n as f64;
        (0..n).fold(x.to_vec(), |y, _| self.eval(&y, h))
    }

    /// First crossing of `x[coord] = 0` with `direction · ẋ[coord] > 0` after
    /// leaving the start point; returns `(time, point)`.
    pub fn first_return(&self, x: &[f64], coord: usize, direction: f64, max_time: f64) -> Option<(f64, Vec<f64>)> {
        let g = |y: &[f64]| direction * y[coord];
        let mut t = 0.0;
        let mut y = x.to_vec();
        while t < max_time {
            let next = self.eval(&y, self.h);
            if t > 0.0 && g(&y) < 0.0 && g(&next) >= 0.0 {
                // Newton on the local Taylor polynomial
                let s = self.prog.series(&y, &[], self.order);
                let mut tau = self.h * g(&y) / (g(&y) - g(&next));
                for _ in 0..30 {
                    let v: f64 = s.iter().rev().fold(0.0, |a, c| a * tau + c[coord]);
                    let dv: f64 = s.iter().enumerate().skip(1).rev().fold(0.0, |a, (k, c)| a * tau + k as f64 * c[coord]);
                    tau -= v / dv;
                }
                return Some((t + tau, self.eval(&y, tau)));
            }
            y = next;
            t += self.h;
        }
        None
    }
}
