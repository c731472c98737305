//! First-return maps to a coordinate hyperplane.

use crate::hset::HSet;
use crate::interval::{IMatrix, IVector, Interval};

use super::lohner::{Doubleton, OdeSolver};
use super::FlowError;

/// The hyperplane `x[coord] = level`, crossed with `direction · ẋ[coord] > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Section {
    pub coord: usize,
    pub direction: f64,
    pub level: f64,
}

impl Section {
    pub fn new(coord: usize, direction: f64) -> Self {
        Section { coord, direction: direction.signum(), level: 0.0 }
    }

    /// Signed distance `direction · (x - level)`.
    pub fn g(&self, x: &[Interval]) -> Interval {
        (x[self.coord] - Interval::point(self.level)).scale(self.direction)
    }

    pub fn g_point(&self, x: &[f64]) -> f64 {
        self.direction * (x[self.coord] - self.level)
    }

    /// Full-space point from section coordinates.
    pub fn embed(&self, y: &[Interval]) -> IVector {
        let mut x = y.to_vec();
        x.insert(self.coord, Interval::point(self.level));
        IVector(x)
    }

    pub fn embed_matrix(&self, m: &IMatrix) -> IMatrix {
        let mut data = Vec::with_capacity((m.rows() + 1) * m.cols());
        for i in 0..=m.rows() {
            for j in 0..m.cols() {
                data.push(match i.cmp(&self.coord) {
                    std::cmp::Ordering::Less => m[(i, j)],
                    std::cmp::Ordering::Equal => Interval::ZERO,
                    std::cmp::Ordering::Greater => m[(i - 1, j)],
                });
            }
        }
        IMatrix::from_vec(m.rows() + 1, m.cols(), data)
    }

    /// Initial doubleton for the h-set `center + frame·ρ`, `ρ ∈ rho`.
    pub fn initial_set(&self, set: &HSet, rho: IVector) -> Doubleton {
        Doubleton::from_affine(&self.embed(set.center()), &self.embed_matrix(set.frame()), rho)
    }
}

/// `P ∈ center + C·r0 + B·r` in section coordinates, with interval `C`, `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoincareImage {
    pub center: IVector,
    pub cmat: IMatrix,
    pub r0: IVector,
    pub bmat: IMatrix,
    pub r: IVector,
    pub return_time: Interval,
    /// Bound on `direction · ẋ[coord]` during the crossing.
    pub transversality: Interval,
}

impl PoincareImage {
    pub fn hull(&self) -> IVector {
        self.center.add(&self.cmat.mul_vec(&self.r0)).add(&self.bmat.mul_vec(&self.r))
    }

    /// Frame coordinates in `set`, keeping the affine dependence on `r0`.
    pub fn frame_coords(&self, set: &HSet) -> IVector {
        let inv = set.inverse();
        inv.mul_vec(&self.center.sub(set.center()))
            .add(&inv.mul(&self.cmat).mul_vec(&self.r0))
            .add(&inv.mul(&self.bmat).mul_vec(&self.r))
    }
}

/// Crossing-time estimate for the trajectory through the point `c`.
fn center_crossing(solver: &OdeSolver, section: &Section, c: &[f64], h_cap: f64) -> Option<f64> {
    let s = solver.program().series(c, &[], solver.order);
    let g = |t: f64| {
        let x: f64 = s.iter().rev().fold(0.0, |acc, ck| acc * t + ck[section.coord]);
        section.direction * (x - section.level)
    };
    let dg = |t: f64| {
        let x: f64 = s.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, ck)| acc * t + k as f64 * ck[section.coord]);
        section.direction * x
    };
    let mut t = (-g(0.0) / dg(0.0)).clamp(0.0, h_cap);
    for _ in 0..50 {
        let dt = g(t) / dg(t);
        if !dt.is_finite() {
            return None;
        }
        t -= dt;
        if dt.abs() < 1e-16 * (1.0 + t.abs()) {
            break;
        }
    }
    (t.is_finite() && t >= 0.0 && t <= 4.0 * h_cap).then_some(t)
}

/// Rigorous enclosure of the first return of `x0` (lying on the section) to the section.
pub fn poincare_map(solver: &OdeSolver, section: &Section, x0: &Doubleton, max_time: f64) -> Result<PoincareImage, FlowError> {
    let d = x0.dim();
    let hull0 = x0.hull();
    if section.g(&hull0) != Interval::ZERO {
        return Err(FlowError::Precondition("initial set is not on the section".into()));
    }
    let f0 = solver.field().eval(&hull0.0);
    if !(section.direction * f0[section.coord].lo() > 0.0 || section.direction * f0[section.coord].hi() < 0.0) {
        return Err(FlowError::Transversality);
    }
    if section.direction > 0.0 && f0[section.coord].lo() <= 0.0 || section.direction < 0.0 && f0[section.coord].hi() >= 0.0 {
        return Err(FlowError::Precondition("initial set crosses the section in the wrong direction".into()));
    }
    let gdot = |w: &IVector| -> Interval { solver.field().eval(&w.0)[section.coord].scale(section.direction) };

    let mut set = x0.clone();
    let mut t = Interval::ZERO;
    let mut steps = 0usize;
    loop {
        steps += 1;
        if t.lo() > max_time || steps > 1_000_000 {
            return Err(FlowError::NoReturn(max_time));
        }
        let gs = section.g(&set.hull());
        let mut h = solver.suggest_step(&set.c);
        let out = loop {
            let out = match solver.step(&set, h) {
                Ok(o) => o,
                Err(FlowError::StepFailure(_)) if h > solver.h_min => {
                    h *= 0.5;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let gw = section.g(&out.enclosure);
            if !gw.contains_zero() {
                break Some(out);
            }
            let fw = gdot(&out.enclosure);
            if fw.hi() < 0.0 || (fw.lo() > 0.0 && gs.lo() >= 0.0) {
                break Some(out);
            }
            if fw.lo() > 0.0 && gs.hi() < 0.0 {
                if section.g(&out.set.hull()).hi() < 0.0 {
                    break Some(out);
                }
                break None;
            }
            if fw.lo() > 0.0 {
                return Err(FlowError::Transversality);
            }
            if h <= solver.h_min {
                return Err(FlowError::Transversality);
            }
            h *= 0.5;
        };
        match out {
            Some(o) => {
                set = o.set;
                t += Interval::point(o.h);
            }
            None => {
                match cross(solver, section, &set, h, &gdot)? {
                    Crossing::Done { y, tau, enclosure, h_c } => {
                        return finish(solver, section, d, &y, t, tau, h_c, &enclosure);
                    }
                    Crossing::Approach(o) => {
                        set = o.set;
                        t += Interval::point(o.h);
                    }
                }
            }
        }
    }
}

enum Crossing {
    Done { y: Doubleton, tau: f64, enclosure: IVector, h_c: f64 },
    Approach(super::lohner::StepOutcome),
}

fn cross(
    solver: &OdeSolver,
    section: &Section,
    set: &Doubleton,
    h: f64,
    gdot: &dyn Fn(&IVector) -> Interval,
) -> Result<Crossing, FlowError> {
    let tau = center_crossing(solver, section, &set.c, h).ok_or(FlowError::Transversality)?;
    let gs = section.g(&set.hull());
    let speed = gdot(&set.hull()).lo().max(1e-300);
    let spread = gs.width() / speed + 1e-12 * (1.0 + tau);
    for f in [2.0, 4.0, 8.0, 16.0, 32.0] {
        let h_c = tau + f * spread;
        let Ok(out) = solver.step(set, h_c) else { continue };
        if gdot(&out.enclosure).lo() > 0.0 && section.g(&out.set.hull()).lo() > 0.0 {
            let y = if tau > 0.0 { solver.step(set, tau)?.set } else { set.clone() };
            return Ok(Crossing::Done { y, tau, enclosure: out.enclosure, h_c });
        }
    }
    // move closer before trying again
    for f in [2.0, 4.0, 8.0, 16.0] {
        let h_a = tau - f * spread;
        if h_a <= 0.0 {
            break;
        }
        let Ok(out) = solver.step(set, h_a) else { continue };
        let gw = section.g(&out.enclosure);
        let ok = !gw.contains_zero() || (gdot(&out.enclosure).lo() > 0.0 && section.g(&out.set.hull()).hi() < 0.0);
        if ok {
            return Ok(Crossing::Approach(out));
        }
    }
    Err(FlowError::Transversality)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    solver: &OdeSolver,
    section: &Section,
    d: usize,
    y: &Doubleton,
    t_a: Interval,
    tau: f64,
    h_c: f64,
    w: &IVector,
) -> Result<PoincareImage, FlowError> {
    let s = section.coord;
    let yh = y.hull();
    let gy = section.g(&yh);
    // every point of y reaches the section within |g(y)| / inf ġ(w) of tau
    let speed = solver.field().eval(&w.0)[s].scale(section.direction);
    let delta = (gy.mag() / speed.lo()) * (1.0 + 1e-12) + 1e-300;
    let near = match (solver.rough_enclosure(&yh, delta), solver.rough_enclosure(&yh, -delta)) {
        (Some(a), Some(b)) => a.hull(&b).intersect(w).unwrap_or_else(|| w.clone()),
        _ => w.clone(),
    };
    let fw = solver.field().eval(&near.0);
    let inv_fx = fw[s].recip()?;
    let sigma = (-gy) * inv_fx.abs();
    let local = Interval::point(tau) + sigma;
    let local = local.intersect(&Interval::new(0.0, h_c)).unwrap_or(local);
    let return_time = t_a + local;

    let others: Vec<usize> = (0..d).filter(|&i| i != s).collect();
    let kappa: Vec<Interval> = others.iter().map(|&o| fw[o] * inv_fx).collect();
    let level = Interval::point(y.c[s] - section.level);
    let kp = y.params();
    let (cm, bm) = (y.cmat(), y.bmat());
    let mut center = IVector::zeros(others.len());
    let mut cmat = IMatrix::zeros(others.len(), kp);
    let mut bmat = IMatrix::zeros(others.len(), d);
    for (row, (&o, k)) in others.iter().zip(&kappa).enumerate() {
        center[row] = Interval::point(y.c[o]) - *k * level;
        for j in 0..kp {
            cmat[(row, j)] = cm[(o, j)] - *k * cm[(s, j)];
        }
        for j in 0..d {
            bmat[(row, j)] = bm[(o, j)] - *k * bm[(s, j)];
        }
    }
    Ok(PoincareImage {
        center,
        cmat,
        r0: y.r0.clone(),
        bmat,
        r: y.r.clone(),
        return_time,
        transversality: fw[s].scale(section.direction),
    })
}
