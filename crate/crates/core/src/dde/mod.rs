//! Method-of-steps integration of `u'(t) = f(u(t)) + ε g(u(t - τ))` on
//! piecewise Taylor representations of solution segments.

mod poincare;
pub mod reference;
mod solver;

pub use poincare::{dde_poincare, DdePoincareImage};
pub use solver::{CellStep, DdeSolver};

use thiserror::Error;

use crate::flow::FlowError;
use crate::interval::{IMatrix, IVector, Interval, IntervalError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DdeError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("return time {time} does not exceed {needed}; the image is not smooth enough")]
    ReturnTooShort { time: f64, needed: f64 },
    #[error("malformed f-set text: {0}")]
    Format(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// Uniform grid of `p` cells of length `h = τ/p` carrying jets of order `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub p: usize,
    pub n: usize,
    pub tau: f64,
    pub h: f64,
}

impl GridSpec {
    /// Requires `τ/p` to be exact in binary64, so that the delay is exactly `p` steps.
    pub fn new(p: usize, n: usize, tau: f64) -> Result<Self, DdeError> {
        if p == 0 || !(tau > 0.0) || !tau.is_finite() {
            return Err(DdeError::Grid(format!("p = {p}, τ = {tau}")));
        }
        let h = tau / p as f64;
        if h * p as f64 != tau || Interval::point(h).scale(p as f64) != Interval::point(tau) {
            return Err(DdeError::Grid(format!("τ/p = {tau}/{p} is not exact")));
        }
        Ok(GridSpec { p, n, tau, h })
    }

    /// `t_i = -i·h`.
    pub fn grid_time(&self, i: usize) -> f64 {
        -(i as f64) * self.h
    }

    /// Length of the finite part `(z, j_1, …, j_p)` for state dimension `d`.
    pub fn finite_dim(&self, d: usize) -> usize {
        d * (1 + self.p * (self.n + 1))
    }
}

/// Taylor coefficients `coeffs[k] ⊇ u^{(k)}(t_i)/k!` of one grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub index: usize,
    pub coeffs: Vec<IVector>,
}

impl Jet {
    /// Value of the jet polynomial at offset `s` (no remainder).
    pub fn eval(&self, s: Interval) -> IVector {
        let d = self.coeffs[0].len();
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            for i in 0..d {
                acc[i] = acc[i] * s + c[i];
            }
        }
        acc
    }
}

/// A set of segments: finite part `c + C·r0 + [B·r ; e]` and remainder boxes `ξ`.
///
/// The finite part is ordered as the head `z = u(0)` followed by the jets of
/// cells `1..=p` (cell `i` starts at `t_i`), coefficient-major inside a cell.
/// Head errors live in the rotating basis `B`; jet errors in the box `e`.
#[derive(Clone, Debug, PartialEq)]
pub struct FSet {
    pub grid: GridSpec,
    pub d: usize,
    pub c: Vec<f64>,
    /// `M × k`, row-major.
    pub cm: Vec<f64>,
    pub r0: IVector,
    /// `d × d`, row-major.
    pub b: Vec<f64>,
    pub r: IVector,
    pub e: IVector,
    pub xi: Vec<IVector>,
}

pub(crate) fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

impl FSet {
    /// `center + mat·r0` with interval data; `r0` is recentred.
    pub fn from_affine(grid: GridSpec, d: usize, center: &IVector, mat: &IMatrix, r0: IVector, xi: Vec<IVector>) -> Result<Self, DdeError> {
        let m = grid.finite_dim(d);
        if center.len() != m || mat.rows() != m || mat.cols() != r0.len() {
            return Err(DdeError::Dimension(format!(
                "finite part {m}, center {}, matrix {}x{}, parameters {}",
                center.len(),
                mat.rows(),
                mat.cols(),
                r0.len()
            )));
        }
        if xi.len() != grid.p || xi.iter().any(|x| x.len() != d) {
            return Err(DdeError::Dimension(format!("expected {} remainder boxes of size {d}", grid.p)));
        }
        let k = r0.len();
        let m0 = IVector::from_points(&r0.mid());
        let center = if k > 0 { center.add(&mat.mul_vec(&m0)) } else { center.clone() };
        let r0 = r0.sub(&m0);
        let c = center.mid();
        let cm = mat.mid();
        let mut rest = center.sub(&IVector::from_points(&c));
        if k > 0 {
            rest = rest.add(&mat.sub(&IMatrix::from_f64(m, k, &cm)).mul_vec(&r0));
        }
        Ok(FSet {
            grid,
            d,
            c,
            cm,
            r0,
            b: identity(d),
            r: IVector(rest[..d].to_vec()),
            e: IVector(rest[d..].to_vec()),
            xi,
        })
    }

    pub fn from_box(grid: GridSpec, d: usize, x: &IVector, xi: Vec<IVector>) -> Result<Self, DdeError> {
        FSet::from_affine(grid, d, x, &IMatrix::zeros(x.len(), 0), IVector::default(), xi)
    }

    /// The constant segment `u ≡ value`.
    pub fn constant(grid: GridSpec, value: &IVector) -> Result<Self, DdeError> {
        let d = value.len();
        let mut x = IVector::zeros(grid.finite_dim(d));
        x[..d].copy_from_slice(value);
        for i in 1..=grid.p {
            let at = d + (i - 1) * (grid.n + 1) * d;
            x[at..at + d].copy_from_slice(value);
        }
        FSet::from_box(grid, d, &x, vec![IVector::zeros(d); grid.p])
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn params(&self) -> usize {
        self.r0.len()
    }

    /// Index of coefficient `k`, component `j` of cell `i` in the finite part.
    pub fn index(&self, i: usize, k: usize, j: usize) -> usize {
        self.d + ((i - 1) * (self.grid.n + 1) + k) * self.d + j
    }

    fn row_affine(&self, row: usize) -> Interval {
        let k = self.params();
        let mut v = Interval::point(self.c[row]);
        for (j, r) in self.r0.iter().enumerate() {
            v += Interval::point(self.cm[row * k + j]) * *r;
        }
        v
    }

    pub fn head_hull(&self) -> IVector {
        let d = self.d;
        (0..d)
            .map(|i| {
                let mut v = self.row_affine(i);
                for j in 0..d {
                    v += Interval::point(self.b[i * d + j]) * self.r[j];
                }
                v
            })
            .collect()
    }

    pub fn hull(&self) -> IVector {
        let mut x = self.head_hull();
        x.0.extend((self.d..self.dim()).map(|row| self.row_affine(row) + self.e[row - self.d]));
        x
    }

    pub fn jet(&self, i: usize) -> Jet {
        let h = self.hull();
        let coeffs = (0..=self.grid.n)
            .map(|k| {
                let at = self.index(i, k, 0);
                IVector(h[at..at + self.d].to_vec())
            })
            .collect();
        Jet { index: i, coeffs }
    }

    /// Width of the head part not tracked through `r0`.
    pub fn error_width(&self) -> f64 {
        IMatrix::from_f64(self.d, self.d, &self.b).mul_vec(&self.r).max_width()
    }

    /// Text form of the hull: header `fset d p n τ`, then `head`, `jet i k`,
    /// and `xi i` records of hexadecimal intervals.
    pub fn to_text(&self) -> String {
        let hex = |v: &[Interval]| v.iter().map(Interval::to_hex).collect::<Vec<_>>().join(" ");
        let g = &self.grid;
        let mut out = format!("fset {} {} {} {}\n", self.d, g.p, g.n, crate::interval::format_hex(g.tau));
        let h = self.hull();
        out.push_str(&format!("head {}\n", hex(&h[..self.d])));
        for i in 1..=g.p {
            for k in 0..=g.n {
                let at = self.index(i, k, 0);
                out.push_str(&format!("jet {i} {k} {}\n", hex(&h[at..at + self.d])));
            }
        }
        for (i, x) in self.xi.iter().enumerate() {
            out.push_str(&format!("xi {} {}\n", i + 1, hex(x)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, DdeError> {
        let bad = |m: &str| DdeError::Format(m.to_string());
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty"))?.split_whitespace().collect();
        if header.len() != 5 || header[0] != "fset" {
            return Err(bad("header must be `fset d p n tau`"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad(s));
        let (d, p, n) = (num(header[1])?, num(header[2])?, num(header[3])?);
        let tau = crate::interval::parse_hex(header[4]).map_err(|_| bad(header[4]))?;
        let grid = GridSpec::new(p, n, tau)?;
        let mut x = vec![None; grid.finite_dim(d)];
        let mut xi = vec![None; p];
        let intervals = |ws: &[&str]| -> Result<Vec<Interval>, DdeError> {
            if ws.len() != d {
                return Err(bad("wrong number of components"));
            }
            ws.iter().map(|w| Interval::from_hex(w).map_err(DdeError::from)).collect()
        };
        for line in lines {
            let ws: Vec<&str> = line.split_whitespace().collect();
            match ws[0] {
                "head" => {
                    for (j, v) in intervals(&ws[1..])?.into_iter().enumerate() {
                        x[j] = Some(v);
                    }
                }
                "jet" if ws.len() >= 3 => {
                    let (i, k) = (num(ws[1])?, num(ws[2])?);
                    if i == 0 || i > p || k > n {
                        return Err(bad(line));
                    }
                    let at = d + ((i - 1) * (n + 1) + k) * d;
                    for (j, v) in intervals(&ws[3..])?.into_iter().enumerate() {
                        x[at + j] = Some(v);
                    }
                }
                "xi" if ws.len() >= 2 => {
                    let i = num(ws[1])?;
                    if i == 0 || i > p {
                        return Err(bad(line));
                    }
                    xi[i - 1] = Some(IVector(intervals(&ws[2..])?));
                }
                _ => return Err(bad(line)),
            }
        }
        let x: Option<Vec<Interval>> = x.into_iter().collect();
        let xi: Option<Vec<IVector>> = xi.into_iter().collect();
        FSet::from_box(grid, d, &IVector(x.ok_or_else(|| bad("missing entries"))?), xi.ok_or_else(|| bad("missing remainders"))?)
    }
}

/// Binomial coefficient as an exact float (small arguments only).
pub(crate) fn binom(m: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// Coefficients `0..=upto` at offsets `s` of a function with jet `coeffs`
/// (orders `0..=n`) and `(n+1)`-st coefficient bounded by `xi` between the
/// base point and `base + s`.
pub(crate) fn shift_coeffs(coeffs: &[Vec<Interval>], xi: &[Interval], s: Interval, upto: usize) -> Vec<Vec<Interval>> {
    let n = coeffs.len() - 1;
    let d = xi.len();
    (0..=upto)
        .map(|k| {
            (0..d)
                .map(|j| {
                    let mut acc = Interval::ZERO;
                    for (m, cm) in coeffs.iter().enumerate().skip(k) {
                        acc += cm[j] * s.powi((m - k) as u32).scale(binom(m, k));
                    }
                    acc + xi[j] * s.powi((n + 1 - k) as u32).scale(binom(n + 1, k))
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_must_be_exact() {
        assert!(GridSpec::new(8, 2, 0.5).is_ok());
        assert!(GridSpec::new(3, 2, 1.0).is_err());
        assert_eq!(GridSpec::new(32, 3, 0.5).unwrap().finite_dim(3), 387);
    }

    #[test]
    fn text_round_trip() {
        let g = GridSpec::new(2, 1, 1.0).unwrap();
        let x = FSet::constant(g, &IVector(vec![Interval::new(1.0, 1.5), Interval::point(-2.0)])).unwrap();
        let y = FSet::from_text(&x.to_text()).unwrap();
        assert_eq!(x.hull(), y.hull());
        assert_eq!(x.xi, y.xi);
    }

    #[test]
    fn shifted_polynomial_is_exact() {
        // 1 + 2s + 3s^2 shifted by 1: 6 + 8s + 3s^2
        let c = vec![vec![Interval::point(1.0)], vec![Interval::point(2.0)], vec![Interval::point(3.0)]];
        let v = shift_coeffs(&c, &[Interval::ZERO], Interval::ONE, 2);
        assert_eq!(v[0][0], Interval::point(6.0));
        assert_eq!(v[1][0], Interval::point(8.0));
        assert_eq!(v[2][0], Interval::point(3.0));
    }

    #[test]
    fn linear_jet_evaluation() {
        let j = Jet { index: 1, coeffs: vec![IVector(vec![Interval::point(1.0)]), IVector(vec![Interval::point(4.0)])] };
        assert_eq!(j.eval(Interval::point(0.25))[0], Interval::point(2.0));
    }
}
