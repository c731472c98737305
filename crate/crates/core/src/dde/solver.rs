use crate::flow::{horner, orthonormal_basis, Dual, PolyField, TaylorProgram};
use crate::interval::{IMatrix, IVector, Interval};

use super::{binom, shift_coeffs, DdeError, FSet, GridSpec};
use crate::flow::FlowError;

/// Data of the cell starting at the current state.
#[derive(Clone, Debug)]
pub struct CellStep {
    /// Encloses the head over the whole cell.
    pub enclosure: IVector,
    /// Encloses `u^{(n+1)}/(n+1)!` over the cell.
    pub xi_new: IVector,
    /// Encloses `u^{(n+2)}/(n+2)!` over the cell.
    pub rem: IVector,
    /// Delayed coefficients `0..=n+1` over the cell.
    pub delayed: Vec<Vec<Interval>>,
    /// Head coefficients `0..=n+1` at the set's centre.
    pub center_series: Vec<Vec<Interval>>,
    /// Head coefficients `0..=n+1` over the whole set.
    pub box_series: Vec<Vec<Interval>>,
}

/// Rigorous integrator for `u' = f(u) + ε g(u(t - τ))` on a fixed grid.
#[derive(Clone, Debug)]
pub struct DdeSolver {
    field: PolyField,
    prog: TaylorProgram,
    eps: Interval,
    pub grid: GridSpec,
    pub blowup: f64,
}

impl DdeSolver {
    pub fn new(f: &PolyField, g: &PolyField, eps: Interval, grid: GridSpec) -> Result<Self, DdeError> {
        let field = PolyField::with_delay(f, g, eps)?;
        let prog = field.compile();
        Ok(DdeSolver { field, prog, eps, grid, blowup: 1.0 })
    }

    /// The field on `(u, v)`, `v` the delayed state.
    pub fn field(&self) -> &PolyField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn eps(&self) -> Interval {
        self.eps
    }

    fn check(&self, x: &FSet) -> Result<(), DdeError> {
        if x.grid != self.grid || x.d != self.dim() {
            return Err(DdeError::Dimension(format!("f-set grid {:?} (d = {}) vs solver {:?} (d = {})", x.grid, x.d, self.grid, self.dim())));
        }
        Ok(())
    }

    fn cell_coeffs(&self, x: &[Interval], set: &FSet, i: usize) -> Vec<Vec<Interval>> {
        (0..=self.grid.n).map(|k| (0..set.d).map(|j| x[set.index(i, k, j)]).collect()).collect()
    }

    /// Rough enclosure, remainder bounds and series for the next cell.
    pub fn prepare(&self, x: &FSet) -> Result<CellStep, DdeError> {
        self.check(x)?;
        let (d, n, p, h) = (x.d, self.grid.n, self.grid.p, self.grid.h);
        let hull = x.hull();
        let zbox = &hull[..d];
        let jp = self.cell_coeffs(&hull, x, p);
        let t = Interval::new(0.0, h);
        let delayed = shift_coeffs(&jp, &x.xi[p - 1], t, n + 1);

        let box_series = self.prog.series(zbox, &jp, n + 1);
        let base: IVector = (0..d).map(|j| box_series.iter().rev().fold(Interval::ZERO, |acc, c| acc * t + c[j])).collect();
        let tp = t.powi(n as u32 + 2);
        let image = |w: &IVector| -> (IVector, Vec<Vec<Interval>>) {
            let s = self.prog.series(&w.0, &delayed, n + 2);
            let y = base.iter().zip(&s[n + 2]).map(|(b, c)| *b + *c * tp).collect();
            (y, s)
        };
        let widen = |w: &IVector| -> IVector { w.iter().map(|v| v.inflate(0.1 * v.width() + 1e-12 * (1.0 + v.mag()))).collect() };
        let mut w = widen(&base);
        let mut found = None;
        for _ in 0..16 {
            let (y, s) = image(&w);
            if w.interior_encloses(&y) {
                found = Some((y, s));
                break;
            }
            w = widen(&w.hull(&y));
        }
        let (enclosure, s) = found.ok_or(FlowError::StepFailure(h))?;
        let center: Vec<Interval> = x.c[..d].iter().map(|&v| Interval::point(v)).collect();
        let jc: Vec<Vec<Interval>> =
            (0..=n).map(|k| (0..d).map(|j| Interval::point(x.c[x.index(p, k, j)])).collect()).collect();
        let center_series = self.prog.series(&center, &jc, n + 1);
        Ok(CellStep {
            enclosure,
            xi_new: IVector(s[n + 1].clone()),
            rem: IVector(s[n + 2].clone()),
            delayed,
            center_series,
            box_series,
        })
    }

    /// Rows of the finite part the next cell depends on: the head and cell `p`.
    fn sources(&self, x: &FSet) -> Vec<usize> {
        let (d, n, p) = (x.d, self.grid.n, self.grid.p);
        let mut src: Vec<usize> = (0..d).collect();
        for k in 0..=n {
            for j in 0..d {
                src.push(x.index(p, k, j));
            }
        }
        src
    }

    /// Interval Jacobians of the head at time `s` and of the new jet with
    /// respect to the source rows, over the hull of the set.
    fn jacobians(&self, x: &FSet, s: f64) -> (IMatrix, IMatrix) {
        let (d, n) = (x.d, self.grid.n);
        let hull = x.hull();
        let src = self.sources(x);
        let nv = src.len();
        let vars: Vec<Dual<Interval>> = src.iter().enumerate().map(|(i, &row)| Dual::variable(hull[row], i, nv)).collect();
        let z = vars[..d].to_vec();
        let v: Vec<Vec<Dual<Interval>>> = (0..=n).map(|k| vars[d + k * d..d + (k + 1) * d].to_vec()).collect();
        let series = self.prog.series(&z, &v, n + 1);
        let head = horner(&series, &Dual::constant(Interval::point(s)));
        let mut a_head = IMatrix::zeros(d, nv);
        for i in 0..d {
            for j in 0..nv {
                a_head[(i, j)] = head[i].grad(j);
            }
        }
        let mut a_jet = IMatrix::zeros((n + 1) * d, nv);
        for k in 0..=n {
            for i in 0..d {
                for j in 0..nv {
                    a_jet[(k * d + i, j)] = series[k][i].grad(j);
                }
            }
        }
        (a_head, a_jet)
    }

    /// Variation of the source rows: `C_src` and the interval error box
    /// (zero on head rows, whose errors are `B·r`).
    fn source_variation(&self, x: &FSet) -> (IMatrix, IVector) {
        let src = self.sources(x);
        let k = x.params();
        let mut cs = IMatrix::zeros(src.len(), k);
        let mut es = IVector::zeros(src.len());
        for (row, &s) in src.iter().enumerate() {
            for j in 0..k {
                cs[(row, j)] = Interval::point(x.cm[s * k + j]);
            }
            if s >= x.d {
                es[row] = x.e[s - x.d];
            }
        }
        (cs, es)
    }

    /// Head at time `s ∈ [0, h]` in Lohner form: new `(c, C, B, r)`.
    #[allow(clippy::type_complexity)]
    fn head_update(&self, x: &FSet, prep: &CellStep, s: f64, a_head: &IMatrix) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, IVector), DdeError> {
        let (d, n) = (x.d, self.grid.n);
        let k = x.params();
        let si = Interval::point(s);
        let y: IVector = (0..d)
            .map(|j| {
                let poly = prep.center_series.iter().rev().fold(Interval::ZERO, |acc, c| acc * si + c[j]);
                poly + prep.rem[j] * si.powi(n as u32 + 2)
            })
            .collect();
        let (cs, es) = self.source_variation(x);
        let c_new = y.mid();
        let ac = a_head.mul(&cs);
        let cm_new = ac.mid();
        let a_zz = IMatrix::from_vec(d, d, (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| a_head[(i, j)]).collect());
        let ab = a_zz.mul(&IMatrix::from_f64(d, d, &x.b));
        let rad: Vec<f64> = x.r.iter().map(Interval::rad).collect();
        let b_new = orthonormal_basis(&ab.mid(), &rad, d);
        let b_inv = IMatrix::from_f64(d, d, &b_new).inverse()?;
        let mut rest = y.sub(&IVector::from_points(&c_new)).add(&a_head.mul_vec(&es));
        if k > 0 {
            rest = rest.add(&ac.sub(&IMatrix::from_f64(d, k, &cm_new)).mul_vec(&x.r0));
        }
        let r_new = b_inv.mul(&ab).mul_vec(&x.r).add(&b_inv.mul_vec(&rest));
        Ok((c_new, cm_new, b_new, r_new))
    }

    /// One full grid step: the set of segments `u_{t+h}` for `u_t ∈ x`.
    pub fn step(&self, x: &FSet) -> Result<(FSet, CellStep), DdeError> {
        let prep = self.prepare(x)?;
        let set = self.step_prepared(x, &prep)?;
        Ok((set, prep))
    }

    pub fn step_prepared(&self, x: &FSet, prep: &CellStep) -> Result<FSet, DdeError> {
        let (d, n, p, h) = (x.d, self.grid.n, self.grid.p, self.grid.h);
        let k = x.params();
        let (a_head, a_jet) = self.jacobians(x, h);
        let (c_head, cm_head, b_new, r_new) = self.head_update(x, prep, h, &a_head)?;

        // jet of the new cell: the head's Taylor coefficients at the old time
        let (cs, es) = self.source_variation(x);
        let y_jet: IVector = (0..=n).flat_map(|kk| prep.center_series[kk].clone()).collect();
        let c_jet = y_jet.mid();
        let acj = a_jet.mul(&cs);
        let cm_jet = acj.mid();
        let a_jz = IMatrix::from_vec((n + 1) * d, d, (0..(n + 1) * d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| a_jet[(i, j)]).collect());
        let mut e_jet = y_jet
            .sub(&IVector::from_points(&c_jet))
            .add(&a_jz.mul(&IMatrix::from_f64(d, d, &x.b)).mul_vec(&x.r))
            .add(&a_jet.mul_vec(&es));
        if k > 0 {
            e_jet = e_jet.add(&acj.sub(&IMatrix::from_f64((n + 1) * d, k, &cm_jet)).mul_vec(&x.r0));
        }

        let cell = (n + 1) * d;
        let mut c = c_head;
        c.extend_from_slice(&c_jet);
        c.extend_from_slice(&x.c[d..d + (p - 1) * cell]);
        let mut cm = cm_head;
        cm.extend_from_slice(&cm_jet);
        cm.extend_from_slice(&x.cm[d * k..(d + (p - 1) * cell) * k]);
        let mut e = e_jet.0;
        e.extend_from_slice(&x.e[..(p - 1) * cell]);
        let mut xi = vec![prep.xi_new.clone()];
        xi.extend_from_slice(&x.xi[..p - 1]);
        let set = FSet { grid: self.grid, d, c, cm, r0: x.r0.clone(), b: b_new, r: r_new, e: IVector(e), xi };
        let w = set.error_width();
        if !(w <= self.blowup) {
            return Err(FlowError::BlowUp(w).into());
        }
        Ok(set)
    }

    /// The set of segments at time `s ∈ [0, h]`, re-expanded on the grid
    /// `s - i·h`. Cell `i` of the result straddles old cells `i` and `i-1`, so
    /// the result is only a valid representation once solutions are smooth
    /// across grid points.
    pub fn regrid(&self, x: &FSet, prep: &CellStep, s: f64) -> Result<FSet, DdeError> {
        let (d, n, p) = (x.d, self.grid.n, self.grid.p);
        let k = x.params();
        let (a_head, _) = self.jacobians(x, s);
        let (c_head, cm_head, b_new, r_new) = self.head_update(x, prep, s, &a_head)?;
        let si = Interval::point(s);
        let pw: Vec<Interval> = (0..=n + 1).map(|j| si.powi(j as u32)).collect();
        let mut c = c_head;
        let mut cm = cm_head;
        let mut e = Vec::with_capacity(x.e.len());
        c.resize(x.dim(), 0.0);
        cm.resize(x.dim() * k, 0.0);
        for i in 1..=p {
            for kk in 0..=n {
                for j in 0..d {
                    let row = x.index(i, kk, j);
                    let mut val = Interval::ZERO;
                    let mut err = x.xi[i - 1][j] * pw[n + 1 - kk].scale(binom(n + 1, kk));
                    let mut crow = vec![Interval::ZERO; k];
                    for m in kk..=n {
                        let t = pw[m - kk].scale(binom(m, kk));
                        let src = x.index(i, m, j);
                        val += t * Interval::point(x.c[src]);
                        err += t * x.e[src - d];
                        for (q, cq) in crow.iter_mut().enumerate() {
                            *cq += t * Interval::point(x.cm[src * k + q]);
                        }
                    }
                    c[row] = val.mid();
                    err += val - Interval::point(c[row]);
                    for (q, cq) in crow.iter().enumerate() {
                        cm[row * k + q] = cq.mid();
                        err += (*cq - Interval::point(cm[row * k + q])) * x.r0[q];
                    }
                    e.push(err);
                }
            }
        }
        let xi = (0..p).map(|i| if i == 0 { x.xi[0].hull(&prep.xi_new) } else { x.xi[i].hull(&x.xi[i - 1]) }).collect();
        Ok(FSet { grid: self.grid, d, c, cm, r0: x.r0.clone(), b: b_new, r: r_new, e: IVector(e), xi })
    }

    /// Head enclosure at offsets `s ⊂ [0, h]` after the current state.
    pub fn eval_between(&self, x: &FSet, s: Interval) -> Result<IVector, DdeError> {
        if s.lo() < 0.0 || s.hi() > self.grid.h {
            return Err(DdeError::Grid(format!("offset {s} outside [0, h]")));
        }
        let prep = self.prepare(x)?;
        let n = self.grid.n;
        Ok((0..x.d)
            .map(|j| {
                let poly = prep.box_series.iter().rev().fold(Interval::ZERO, |acc, c| acc * s + c[j]);
                poly + prep.rem[j] * s.powi(n as u32 + 2)
            })
            .collect())
    }

    /// Integrate by whole grid steps.
    pub fn advance(&self, x: &FSet, steps: usize) -> Result<FSet, DdeError> {
        let mut set = x.clone();
        for _ in 0..steps {
            set = self.step(&set)?.0;
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::Term;

    fn scalar_delay() -> (PolyField, PolyField) {
        let f = PolyField::new(1, vec![vec![]]).unwrap();
        let g = PolyField::new(1, vec![vec![Term { coeff: -Interval::ONE, powers: vec![1] }]]).unwrap();
        (f, g)
    }

    #[test]
    fn linear_delay_one_step() {
        let (f, g) = scalar_delay();
        let grid = GridSpec::new(1, 2, 1.0).unwrap();
        let solver = DdeSolver::new(&f, &g, Interval::ONE, grid).unwrap();
        let x = FSet::constant(grid, &IVector(vec![Interval::ONE])).unwrap();
        let (y, _) = solver.step(&x).unwrap();
        let head = y.head_hull()[0];
        assert!(head.contains(0.0) && head.width() < 1e-12, "{head:?}");
    }

    #[test]
    fn zero_field_keeps_head() {
        let f = PolyField::new(2, vec![vec![], vec![]]).unwrap();
        let grid = GridSpec::new(4, 3, 1.0).unwrap();
        let solver = DdeSolver::new(&f, &f, Interval::point(0.5), grid).unwrap();
        let v = IVector(vec![Interval::new(1.0, 2.0), Interval::point(3.0)]);
        let x = FSet::constant(grid, &v).unwrap();
        let y = solver.advance(&x, 3).unwrap();
        assert!(y.head_hull().encloses(&v));
        assert!(y.head_hull().max_width() < 1.0 + 1e-12);
        for k in 1..=3 {
            assert_eq!(y.jet(1).coeffs[k], IVector::zeros(2));
        }
    }

    #[test]
    fn eval_between_at_zero_is_head() {
        let (f, g) = scalar_delay();
        let grid = GridSpec::new(2, 2, 1.0).unwrap();
        let solver = DdeSolver::new(&f, &g, Interval::ONE, grid).unwrap();
        let x = FSet::constant(grid, &IVector(vec![Interval::new(0.5, 1.0)])).unwrap();
        let z = solver.eval_between(&x, Interval::ZERO).unwrap();
        assert!(z.encloses(&x.head_hull()) && x.head_hull().encloses(&z));
    }
}
