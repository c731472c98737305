use crate::flow::{FlowError, Section};
use crate::interval::{IMatrix, IVector, Interval};

use super::solver::{CellStep, DdeSolver};
use super::{shift_coeffs, DdeError, FSet, GridSpec};

/// First-return image `P(x) ∈ center + C·r0 + B·r + err` of a set of
/// segments, with the head's section coordinate pinned to the level.
#[derive(Clone, Debug, PartialEq)]
pub struct DdePoincareImage {
    pub grid: GridSpec,
    pub d: usize,
    pub center: IVector,
    pub cmat: IMatrix,
    pub r0: IVector,
    /// `M × d`: dependence on the head error parameters `r`.
    pub bmat: IMatrix,
    pub r: IVector,
    pub err: IVector,
    pub xi: Vec<IVector>,
    pub return_time: Interval,
    pub transversality: Interval,
}

impl DdePoincareImage {
    pub fn hull(&self) -> IVector {
        let mut x = self.center.add(&self.err).add(&self.bmat.mul_vec(&self.r));
        if !self.r0.is_empty() {
            x = x.add(&self.cmat.mul_vec(&self.r0));
        }
        x
    }

    pub fn head_hull(&self) -> IVector {
        IVector(self.hull()[..self.d].to_vec())
    }

    /// Row `i` as `(centre, C-row, B-row, error)`.
    pub fn row(&self, i: usize) -> (Interval, &[Interval], &[Interval], Interval) {
        (self.center[i], self.cmat.row(i), self.bmat.row(i), self.err[i])
    }

    pub fn to_fset(&self) -> Result<FSet, DdeError> {
        FSet::from_box(self.grid, self.d, &self.hull(), self.xi.clone())
    }
}

fn center_crossing(section: &Section, series: &[Vec<Interval>], h: f64) -> f64 {
    let c: Vec<f64> = series.iter().map(|v| section.direction * v[section.coord].mid()).collect();
    let lvl = section.direction * section.level;
    let g = |t: f64| c.iter().rev().fold(0.0, |acc, ck| acc * t + ck) - lvl;
    let dg = |t: f64| c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, ck)| acc * t + k as f64 * ck);
    let mut t = if dg(0.0) > 0.0 { (-g(0.0) / dg(0.0)).clamp(0.0, h) } else { h };
    for _ in 0..50 {
        let dt = g(t) / dg(t);
        if !dt.is_finite() {
            break;
        }
        t = (t - dt).clamp(0.0, h);
        if dt.abs() < 1e-16 {
            break;
        }
    }
    if t.is_finite() {
        t
    } else {
        h
    }
}

/// Value enclosure of the whole stored segment.
fn segment_hull(x: &FSet, extra: Option<&FSet>) -> IVector {
    let (d, n, p, h) = (x.d, x.grid.n, x.grid.p, x.grid.h);
    let t = Interval::new(0.0, h);
    let mut out = x.head_hull();
    let tn = t.powi(n as u32 + 1);
    let mut add_cell = |set: &FSet, hull: &IVector, i: usize| {
        for j in 0..d {
            let w = (0..=n).rev().fold(Interval::ZERO, |acc, k| acc * t + hull[set.index(i, k, j)]) + set.xi[i - 1][j] * tn;
            out[j] = out[j].hull(&w);
        }
    };
    let hx = x.hull();
    for i in 1..=p {
        add_cell(x, &hx, i);
    }
    if let Some(prev) = extra {
        add_cell(prev, &prev.hull(), p);
    }
    out
}

/// Rigorous first return of the head to `section` for every segment in `x0`.
///
/// The image is taken on the grid aligned with each segment's own return
/// time, which requires the solution to be `C^{n+1}` on the image segment;
/// returns shorter than `(n+1)·τ` are rejected.
pub fn dde_poincare(solver: &DdeSolver, section: &Section, x0: &FSet, max_time: f64) -> Result<DdePoincareImage, DdeError> {
    let grid = solver.grid;
    let h = grid.h;
    let head0 = x0.head_hull();
    if section.g(&head0) != Interval::ZERO {
        return Err(FlowError::Precondition("initial head is not on the section".into()).into());
    }
    let gdot = |w: &[Interval], v: &[Interval]| -> Interval {
        let mut uv = w.to_vec();
        uv.extend_from_slice(v);
        solver.field().eval(&uv)[section.coord].scale(section.direction)
    };
    let mut x = x0.clone();
    let mut prev: Option<FSet> = None;
    let mut t = Interval::ZERO;
    let mut first = true;
    loop {
        if t.lo() > max_time {
            return Err(FlowError::NoReturn(max_time).into());
        }
        let prep = solver.prepare(&x)?;
        let fw = gdot(&prep.enclosure, &prep.delayed[0]);
        if first && fw.lo() <= 0.0 {
            return Err(FlowError::Transversality.into());
        }
        first = false;
        let gw = section.g(&prep.enclosure);
        let gs = section.g(&x.head_hull());
        let advance = if !gw.contains_zero() || fw.hi() < 0.0 || (fw.lo() > 0.0 && gs.lo() >= 0.0) {
            None
        } else if fw.lo() > 0.0 && gs.hi() < 0.0 {
            let next = solver.step_prepared(&x, &prep)?;
            if section.g(&next.head_hull()).hi() < 0.0 {
                Some(next)
            } else {
                return cross(solver, section, &x, &prep, prev.as_ref(), t);
            }
        } else {
            return Err(FlowError::Transversality.into());
        };
        let next = match advance {
            Some(s) => s,
            None => solver.step_prepared(&x, &prep)?,
        };
        prev = Some(std::mem::replace(&mut x, next));
        t += Interval::point(h);
    }
}

fn cross(
    solver: &DdeSolver,
    section: &Section,
    x: &FSet,
    prep: &CellStep,
    prev: Option<&FSet>,
    t_a: Interval,
) -> Result<DdePoincareImage, DdeError> {
    let grid = solver.grid;
    let (d, n, p, h) = (x.d, grid.n, grid.p, grid.h);
    let s = section.coord;
    let tau = center_crossing(section, &prep.center_series, h);
    let y = solver.regrid(x, prep, tau)?;
    let yh = y.head_hull();
    let gy = section.g(&yh);
    let vcrude = segment_hull(x, prev);

    // window [-δ, δ] around tau containing every crossing, and the head over it
    let picard = |delta: f64| -> Option<IVector> {
        let win = Interval::new(-delta, delta);
        let step = |w: &IVector| -> IVector {
            let mut uv = w.0.clone();
            uv.extend_from_slice(&vcrude);
            let f = solver.field().eval(&uv);
            yh.iter().zip(f).map(|(a, fi)| *a + fi * win).collect()
        };
        let mut w: IVector = step(&yh).iter().map(|v| v.inflate(0.1 * v.width() + 1e-12)).collect();
        for _ in 0..16 {
            let z = step(&w);
            if w.interior_encloses(&z) {
                return Some(z);
            }
            w = w.hull(&z).iter().map(|v| v.inflate(0.1 * v.width() + 1e-12)).collect();
        }
        None
    };
    let speed_at = |w: &IVector| -> Interval {
        let mut uv = w.0.clone();
        uv.extend_from_slice(&vcrude);
        solver.field().eval(&uv)[s].scale(section.direction)
    };
    let mut delta = gy.mag() / speed_at(&yh).lo().max(1e-300) * 1.25 + 1e-15;
    let mut found = None;
    for _ in 0..8 {
        let Some(near) = picard(delta) else { break };
        let speed = speed_at(&near);
        if !(speed.lo() > 0.0) {
            break;
        }
        let need = gy.mag() / speed.lo();
        if need <= delta {
            found = Some((near, need));
            break;
        }
        delta = need * 1.25;
    }
    let (near, delta) = found.ok_or(FlowError::Transversality)?;

    // remainder bounds of the stored cells, indexed relative to the current state
    let mut next_xi: Option<IVector> = None;
    let mut stored_xi = |j: isize| -> Result<IVector, DdeError> {
        match j {
            1.. if j as usize <= p => Ok(x.xi[j as usize - 1].clone()),
            0 => Ok(prep.xi_new.clone()),
            -1 => {
                if next_xi.is_none() {
                    let nx = solver.step_prepared(x, prep)?;
                    next_xi = Some(solver.prepare(&nx)?.xi_new);
                }
                Ok(next_xi.clone().unwrap())
            }
            _ if j as usize == p + 1 => prev.map(|q| q.xi[p - 1].clone()).ok_or(FlowError::Transversality.into()),
            _ => Err(FlowError::Transversality.into()),
        }
    };
    // hull of ξ over stored offsets [lo, hi) from the base of cell i
    let mut xi_over = |i: usize, lo: f64, hi: f64| -> Result<IVector, DdeError> {
        let first = i as isize - (hi / h).floor() as isize;
        let last = i as isize - (lo / h).floor() as isize;
        let mut acc: Option<IVector> = None;
        for j in first..=last {
            let v = stored_xi(j)?;
            acc = Some(match acc {
                None => v,
                Some(a) => a.hull(&v),
            });
        }
        Ok(acc.unwrap())
    };

    let fw = {
        let mut uv = near.0.clone();
        uv.extend_from_slice(&vcrude);
        solver.field().eval(&uv)
    };
    let inv_fs = fw[s].recip()?;
    let m = y.dim();
    let k = y.params();
    // time derivative of every coordinate over the window
    let mut vel = IVector::zeros(m);
    vel[..d].copy_from_slice(&fw);
    let yhull = y.hull();
    let win = Interval::new(-delta, delta);
    let mut xi_img = Vec::with_capacity(p);
    for i in 1..=p {
        let xw = xi_over(i, tau - delta, tau + delta)?;
        let coeffs: Vec<Vec<Interval>> = (0..=n).map(|kk| (0..d).map(|j| yhull[y.index(i, kk, j)]).collect()).collect();
        let shifted = shift_coeffs(&coeffs, &xw, win, n);
        for kk in 0..=n {
            for j in 0..d {
                let v = if kk < n { shifted[kk + 1][j] } else { xw[j] };
                vel[y.index(i, kk, j)] = v.scale((kk + 1) as f64);
            }
        }
        xi_img.push(xi_over(i, tau - delta, tau + h + delta)?);
    }

    let level = Interval::point(section.level);
    let ys_c = Interval::point(y.c[s]) - level;
    let mut center = IVector::zeros(m);
    let mut cmat = IMatrix::zeros(m, k);
    let mut bmat = IMatrix::zeros(m, d);
    let mut err = IVector::zeros(m);
    for o in 0..m {
        if o == s {
            center[o] = level;
            continue;
        }
        let kappa = vel[o] * inv_fs;
        center[o] = Interval::point(y.c[o]) - kappa * ys_c;
        for q in 0..k {
            cmat[(o, q)] = Interval::point(y.cm[o * k + q]) - kappa * Interval::point(y.cm[s * k + q]);
        }
        for q in 0..d {
            let own = if o < d { Interval::point(y.b[o * d + q]) } else { Interval::ZERO };
            bmat[(o, q)] = own - kappa * Interval::point(y.b[s * d + q]);
        }
        if o >= d {
            err[o] = y.e[o - d];
        }
    }
    let sigma = ((-gy) * inv_fs.abs()).intersect(&win).unwrap_or(win);
    let return_time = t_a + Interval::point(tau) + sigma;
    let needed = (n + 1) as f64 * grid.tau;
    if !(return_time.lo() > needed) {
        return Err(DdeError::ReturnTooShort { time: return_time.lo(), needed });
    }
    Ok(DdePoincareImage {
        grid,
        d,
        center,
        cmat,
        r0: y.r0.clone(),
        bmat,
        r: y.r.clone(),
        err,
        xi: xi_img,
        return_time,
        transversality: fw[s].scale(section.direction),
    })
}
