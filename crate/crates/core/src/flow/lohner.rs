//! Lohner-type Taylor integrator on doubleton sets `c + C·r0 + B·r`.

use crate::interval::{IMatrix, IVector, Interval};

use super::poly::{horner, Dual, PolyField, TaylorProgram};
use super::FlowError;

/// The set `{ c + C·ρ + B·e : ρ ∈ r0, e ∈ r }` with point `c`, `C`, `B`.
///
/// `r0` carries the initial parameters and keeps their correlation; `r`
/// collects everything else in the rotating basis `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct Doubleton {
    pub c: Vec<f64>,
    /// `d × k`, row-major.
    pub cm: Vec<f64>,
    pub r0: IVector,
    /// `d × d`, row-major.
    pub b: Vec<f64>,
    pub r: IVector,
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

impl Doubleton {
    pub fn from_box(x: &IVector) -> Self {
        let c = x.mid();
        let r = x.sub(&IVector::from_points(&c));
        Doubleton { b: identity(c.len()), c, cm: Vec::new(), r0: IVector::default(), r }
    }

    /// `center + mat·r0` with interval data; non-point parts go to `r`.
    ///
    /// The parameters are recentred, so the stored `r0` is `r0 - mid(r0)`.
    pub fn from_affine(center: &IVector, mat: &IMatrix, r0: IVector) -> Self {
        let d = center.len();
        assert_eq!(mat.rows(), d);
        assert_eq!(mat.cols(), r0.len());
        let m0 = IVector::from_points(&r0.mid());
        let center = center.add(&mat.mul_vec(&m0));
        let r0 = r0.sub(&m0);
        let c = center.mid();
        let cm = mat.mid();
        let dm = mat.sub(&IMatrix::from_f64(d, r0.len(), &cm));
        let r = center.sub(&IVector::from_points(&c)).add(&dm.mul_vec(&r0));
        Doubleton { b: identity(d), c, cm, r0, r }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn params(&self) -> usize {
        self.r0.len()
    }

    pub fn cmat(&self) -> IMatrix {
        IMatrix::from_f64(self.dim(), self.params(), &self.cm)
    }

    pub fn bmat(&self) -> IMatrix {
        IMatrix::from_f64(self.dim(), self.dim(), &self.b)
    }

    /// Width of the part not tracked through `r0`.
    pub fn error_width(&self) -> f64 {
        self.bmat().mul_vec(&self.r).max_width()
    }

    pub fn hull(&self) -> IVector {
        let mut x = IVector::from_points(&self.c);
        if self.params() > 0 {
            x = x.add(&self.cmat().mul_vec(&self.r0));
        }
        x.add(&self.bmat().mul_vec(&self.r))
    }
}

const ROUGH_ORDER: usize = 6;

/// `sum_k c[k][i] t^k` for `k <= p`.
fn horner_at(c: &[Vec<Interval>], i: usize, t: Interval, p: usize) -> Interval {
    c[..=p].iter().rev().fold(Interval::ZERO, |acc, ck| acc * t + ck[i])
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub set: Doubleton,
    pub h: f64,
    /// Encloses every trajectory of the set over the step.
    pub enclosure: IVector,
}

#[derive(Clone, Debug)]
pub struct OdeSolver {
    field: PolyField,
    prog: TaylorProgram,
    pub order: usize,
    pub tol: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub blowup: f64,
}

impl OdeSolver {
    pub fn new(field: PolyField) -> Result<Self, FlowError> {
        if field.nvars() != field.dim() {
            return Err(FlowError::Field("ODE field must be square".into()));
        }
        let prog = field.compile();
        Ok(OdeSolver { field, prog, order: 20, tol: 1e-13, h_max: 0.5, h_min: 1e-10, blowup: 1.0 })
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order.max(1);
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn field(&self) -> &PolyField {
        &self.field
    }

    pub fn program(&self) -> &TaylorProgram {
        &self.prog
    }

    /// Step size from the decay of the point Taylor coefficients at `c`.
    pub fn suggest_step(&self, c: &[f64]) -> f64 {
        let k = self.order;
        let s = self.prog.series(c, &[], k);
        let norm = |v: &Vec<f64>| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut h = self.h_max;
        for j in [k - 1, k] {
            let n = norm(&s[j]);
            if j > 0 && n > 0.0 {
                h = h.min((self.tol / n).powf(1.0 / j as f64));
            }
        }
        h.clamp(self.h_min, self.h_max)
    }

    /// Validated enclosure of all trajectories from `x` over time `[0, h]`.
    ///
    /// A candidate `W` is accepted once the order-`p` Taylor polynomial of `x`
    /// with remainder `c_{p+1}(W) t^{p+1}` maps into its interior; the
    /// polynomial itself is then returned.
    pub fn rough_enclosure(&self, x: &IVector, h: f64) -> Option<IVector> {
        let t = Interval::new(h.min(0.0), h.max(0.0));
        let p = ROUGH_ORDER.min(self.order);
        let cx = self.prog.series(&x.0, &[], p);
        let base: IVector = (0..x.len()).map(|i| horner_at(&cx, i, t, p)).collect();
        let tp = t.powi(p as u32 + 1);
        let image = |w: &IVector| -> IVector {
            let cw = self.prog.series(&w.0, &[], p + 1);
            base.iter().zip(&cw[p + 1]).map(|(b, c)| *b + *c * tp).collect()
        };
        let widen = |w: &IVector| -> IVector {
            w.iter().map(|v| v.inflate(0.1 * v.width() + 1e-12 * (1.0 + v.mag()))).collect()
        };
        let mut w = widen(&base);
        for _ in 0..12 {
            let y = image(&w);
            if w.interior_encloses(&y) {
                return Some(y);
            }
            w = widen(&w.hull(&y));
        }
        None
    }

    /// One Taylor step of size `h` (either sign).
    pub fn step(&self, x: &Doubleton, h: f64) -> Result<StepOutcome, FlowError> {
        let d = x.dim();
        let k = self.order;
        let xh = x.hull();
        let w = self.rough_enclosure(&xh, h).ok_or(FlowError::StepFailure(h))?;
        let hi = Interval::point(h);
        let sw = self.prog.series(&w.0, &[], k + 1);
        let hk = hi.powi(k as u32 + 1);
        let cpt: Vec<Interval> = x.c.iter().map(|&v| Interval::point(v)).collect();
        let sc = self.prog.series(&cpt, &[], k);
        let y: IVector = horner(&sc, &hi).into_iter().zip(&sw[k + 1]).map(|(t, r)| t + *r * hk).collect();

        let xd: Vec<Dual<Interval>> = xh.iter().enumerate().map(|(i, v)| Dual::variable(*v, i, d)).collect();
        let sd = self.prog.series(&xd, &[], k);
        let td = horner(&sd, &Dual::constant(hi));
        let mut jac = IMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                jac[(i, j)] = td[i].grad(j);
            }
        }
        let set = lohner_update(x, &y, &jac)?;
        let width = set.error_width();
        if !(width <= self.blowup) {
            return Err(FlowError::BlowUp(width));
        }
        Ok(StepOutcome { set, h, enclosure: w })
    }

    /// One step of adaptive size, at most `h_cap` in magnitude.
    pub fn adaptive_step(&self, x: &Doubleton, h_cap: f64) -> Result<StepOutcome, FlowError> {
        let mut h = self.suggest_step(&x.c).min(h_cap.abs());
        loop {
            match self.step(x, h.copysign(h_cap)) {
                Err(FlowError::StepFailure(_)) if h > self.h_min => h *= 0.5,
                r => return r,
            }
        }
    }

    /// Integrate to time exactly `t_end` (either sign).
    pub fn advance(&self, x: &Doubleton, t_end: f64) -> Result<Doubleton, FlowError> {
        let mut set = x.clone();
        let mut t = Interval::ZERO;
        while t != Interval::point(t_end) {
            let rest = (Interval::point(t_end) - t).mid();
            let out = self.adaptive_step(&set, rest)?;
            set = out.set;
            t = if out.h == rest { Interval::point(t_end) } else { t + Interval::point(out.h) };
        }
        Ok(set)
    }
}

/// New doubleton for `T(x) ∈ y + J·(x - c)` with `x - c ∈ C·r0 + B·r`.
pub(crate) fn lohner_update(x: &Doubleton, y: &IVector, jac: &IMatrix) -> Result<Doubleton, FlowError> {
    let d = x.dim();
    let kp = x.params();
    let c_new = y.mid();
    let jc = jac.mul(&x.cmat());
    let cm_new = jc.mid();
    let a = jac.mul(&x.bmat());
    let rad: Vec<f64> = x.r.iter().map(Interval::rad).collect();
    let b_new = orthonormal_basis(&a.mid(), &rad, d);
    let b_inv = IMatrix::from_f64(d, d, &b_new).inverse()?;
    let mut rest = y.sub(&IVector::from_points(&c_new));
    if kp > 0 {
        rest = rest.add(&jc.sub(&IMatrix::from_f64(d, kp, &cm_new)).mul_vec(&x.r0));
    }
    let r_new = b_inv.mul(&a).mul_vec(&x.r).add(&b_inv.mul_vec(&rest));
    Ok(Doubleton { c: c_new, cm: cm_new, r0: x.r0.clone(), b: b_new, r: r_new })
}

/// Orthonormal basis from the columns of `a` (row-major `d × d`), taken in
/// decreasing order of `|a_j| · w_j`.
pub(crate) fn orthonormal_basis(a: &[f64], w: &[f64], d: usize) -> Vec<f64> {
    let col = |j: usize| -> Vec<f64> { (0..d).map(|i| a[i * d + j]).collect() };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut order: Vec<usize> = (0..d).collect();
    let key: Vec<f64> = (0..d).map(|j| norm(&col(j)) * w[j].max(1e-300)).collect();
    order.sort_by(|&i, &j| key[j].total_cmp(&key[i]));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut candidates: Vec<Vec<f64>> = order.iter().map(|&j| col(j)).collect();
    candidates.extend((0..d).map(|i| {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        e
    }));
    for mut v in candidates {
        if basis.len() == d {
            break;
        }
        let scale = norm(&v);
        if scale == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let p: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let n = norm(&v);
        if n > 1e-8 * scale {
            basis.push(v.iter().map(|x| x / n).collect());
        }
    }
    let mut out = vec![0.0; d * d];
    for (j, q) in basis.iter().enumerate() {
        for i in 0..d {
            out[i * d + j] = q[i];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::Term;

    fn linear(a: &[f64], d: usize) -> PolyField {
        let comps = (0..d)
            .map(|i| {
                (0..d)
                    .filter(|&j| a[i * d + j] != 0.0)
                    .map(|j| {
                        let mut p = vec![0; d];
                        p[j] = 1;
                        Term { coeff: Interval::point(a[i * d + j]), powers: p }
                    })
                    .collect()
            })
            .collect();
        PolyField::new(d, comps).unwrap()
    }

    #[test]
    fn exponential_growth() {
        let s = OdeSolver::new(linear(&[1.0], 1)).unwrap();
        let x = Doubleton::from_box(&IVector::from_points(&[1.0]));
        let out = s.step(&x, 0.1).unwrap();
        let h = out.set.hull();
        assert!(h[0].contains(0.1f64.exp()));
        assert!(h[0].width() < 1e-10);
    }

    #[test]
    fn rotation_keeps_wrapping_small() {
        let s = OdeSolver::new(linear(&[0.0, 1.0, -1.0, 0.0], 2)).unwrap();
        let x = Doubleton::from_box(&IVector(vec![Interval::new(0.9, 1.1), Interval::new(-0.1, 0.1)]));
        let y = s.advance(&x, 10.0).unwrap().hull();
        // exact image is a rotated square of side 0.2
        assert!(y.max_width() < 0.2 * 2f64.sqrt() + 1e-6, "{y:?}");
        let (c, sn) = (10f64.cos(), 10f64.sin());
        assert!(y[0].contains(c) && y[1].contains(-sn));
    }

    #[test]
    fn forward_then_backward_encloses_start() {
        let s = OdeSolver::new(linear(&[0.0, 1.0, -1.0, 0.0], 2)).unwrap();
        let x0 = IVector::from_points(&[0.3, 0.7]);
        let x = Doubleton::from_box(&x0);
        let fwd = s.step(&x, 0.2).unwrap().set;
        let back = s.step(&fwd, -0.2).unwrap().set.hull();
        assert!(back.contains_point(&[0.3, 0.7]));
    }

    #[test]
    fn basis_is_orthonormal() {
        let q = orthonormal_basis(&[1.0, 2.0, 0.0, 1.0, 0.0, 3.0, 1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], 3);
        for i in 0..3 {
            for j in 0..3 {
                let p: f64 = (0..3).map(|k| q[k * 3 + i] * q[k * 3 + j]).sum();
                assert!((p - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }
}
