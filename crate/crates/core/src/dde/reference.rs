//! Floating-point DDE integration for estimates and coordinate generation.

use crate::flow::{PolyField, TaylorProgram};

/// Taylor coefficients `0..=order` of the initial segment at `t ∈ [-τ, 0]`.
pub type InitialJet<'a> = dyn Fn(f64, usize) -> Vec<Vec<f64>> + 'a;

/// RK4 solution sampled on a uniform grid from `-τ`, interpolated by cubic
/// Hermite pieces.
pub struct DdeTrajectory<'a> {
    pub tau: f64,
    pub dt: f64,
    d: usize,
    hist: usize,
    values: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
    left0: Vec<f64>,
    prog: TaylorProgram,
    init: &'a InitialJet<'a>,
}

/// Integrate `u' = F(u, u(t - τ))` (`field` on `2d` variables) with `steps`
/// RK4 steps per delay up to `t_end`.
pub fn integrate<'a>(field: &PolyField, tau: f64, steps: usize, init: &'a InitialJet<'a>, t_end: f64) -> DdeTrajectory<'a> {
    let d = field.dim();
    let dt = tau / steps as f64;
    let mut values = Vec::new();
    let mut derivs = Vec::new();
    for i in 0..=steps {
        let t = -tau + i as f64 * dt;
        let j = init(t.min(0.0), 1);
        values.push(j[0].clone());
        derivs.push(j[1].clone());
    }
    let left0 = derivs[steps].clone();
    let mut traj = DdeTrajectory { tau, dt, d, hist: steps, values, derivs, left0, prog: field.compile(), init };
    let rhs = |traj: &DdeTrajectory, u: &[f64], t: f64| -> Vec<f64> {
        let mut uv = u.to_vec();
        uv.extend(traj.value(t - tau));
        field.eval(&uv)
    };
    let first = rhs(&traj, &traj.values[steps].clone(), 0.0);
    traj.derivs[steps] = first;
    let n = (t_end / dt).ceil() as usize;
    for s in 0..n {
        let t = s as f64 * dt;
        let u = traj.values[steps + s].clone();
        let add = |a: &[f64], b: &[f64], c: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + c * y).collect() };
        let k1 = traj.derivs[steps + s].clone();
        let k2 = rhs(&traj, &add(&u, &k1, 0.5 * dt), t + 0.5 * dt);
        let k3 = rhs(&traj, &add(&u, &k2, 0.5 * dt), t + 0.5 * dt);
        let k4 = rhs(&traj, &add(&u, &k3, dt), t + dt);
        let next: Vec<f64> = (0..d).map(|i| u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
        let dn = rhs(&traj, &next, t + dt);
        traj.values.push(next);
        traj.derivs.push(dn);
    }
    traj
}

impl DdeTrajectory<'_> {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn end_time(&self) -> f64 {
        (self.values.len() - 1 - self.hist) as f64 * self.dt
    }

    /// Value at time `t ∈ [-τ, end]`.
    pub fn value(&self, t: f64) -> Vec<f64> {
        if t <= 0.0 {
            return (self.init)(t.max(-self.tau), 0).swap_remove(0);
        }
        let x = (t + self.tau) / self.dt;
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let s = x - i as f64;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        let dr = if i + 1 == self.hist { &self.left0 } else { &self.derivs[i + 1] };
        (0..self.d)
            .map(|j| h00 * self.values[i][j] + h10 * self.dt * self.derivs[i][j] + h01 * self.values[i + 1][j] + h11 * self.dt * dr[j])
            .collect()
    }

    /// Normalized Taylor coefficients `0..=order` at time `t`, by recursion
    /// on the delayed jets.
    pub fn jet(&self, t: f64, order: usize) -> Vec<Vec<f64>> {
        if t <= 0.0 {
            return (self.init)(t.max(-self.tau), order);
        }
        let u = self.value(t);
        if order == 0 {
            return vec![u];
        }
        let v = self.jet(t - self.tau, order - 1);
        self.prog.series(&u, &v, order)
    }

    /// Upward crossings of `u[coord] = level` after time `after`, as
    /// `(time, head)` pairs.
    pub fn crossings(&self, coord: usize, level: f64, after: f64) -> Vec<(f64, Vec<f64>)> {
        let mut out = Vec::new();
        for i in self.hist..self.values.len() - 1 {
            let (a, b) = (self.values[i][coord] - level, self.values[i + 1][coord] - level);
            let ta = (i - self.hist) as f64 * self.dt;
            if ta < after || !(a < 0.0 && b >= 0.0) {
                continue;
            }
            let (mut lo, mut hi) = (ta, ta + self.dt);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if self.value(mid)[coord] < level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = 0.5 * (lo + hi);
            out.push((t, self.value(t)));
        }
        out
    }
}
