//! Polynomial vector fields and their Taylor coefficient recursion.

use std::collections::HashMap;

use crate::interval::Interval;

use super::FlowError;

/// Arithmetic needed by the Taylor recursion.
pub trait Scalar: Clone {
    fn zero() -> Self;
    fn from_coeff(c: &Interval) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn mul_coeff(&self, c: &Interval) -> Self;
    fn div_int(&self, k: u32) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_coeff(c: &Interval) -> Self {
        c.mid()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn mul_coeff(&self, c: &Interval) -> Self {
        self * c.mid()
    }
    fn div_int(&self, k: u32) -> Self {
        self / k as f64
    }
}

impl Scalar for Interval {
    fn zero() -> Self {
        Interval::ZERO
    }
    fn from_coeff(c: &Interval) -> Self {
        *c
    }
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
    fn mul_coeff(&self, c: &Interval) -> Self {
        *self * *c
    }
    fn div_int(&self, k: u32) -> Self {
        Interval::div_int(self, k)
    }
}

/// Value with first-order partial derivatives; an empty gradient means zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<S> {
    pub v: S,
    pub d: Vec<S>,
}

impl<S: Scalar> Dual<S> {
    pub fn constant(v: S) -> Self {
        Dual { v, d: Vec::new() }
    }

    /// The `i`-th of `n` independent variables at value `v`.
    pub fn variable(v: S, i: usize, n: usize) -> Self {
        let mut d = vec![S::zero(); n];
        d[i] = S::from_coeff(&Interval::ONE);
        Dual { v, d }
    }

    pub fn grad(&self, i: usize) -> S {
        self.d.get(i).cloned().unwrap_or_else(S::zero)
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn zero() -> Self {
        Dual::constant(S::zero())
    }
    fn from_coeff(c: &Interval) -> Self {
        Dual::constant(S::from_coeff(c))
    }
    fn add(&self, o: &Self) -> Self {
        let n = self.d.len().max(o.d.len());
        let d = (0..n)
            .map(|i| match (self.d.get(i), o.d.get(i)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) | (None, Some(a)) => a.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Dual { v: self.v.add(&o.v), d }
    }
    fn mul(&self, o: &Self) -> Self {
        let n = self.d.len().max(o.d.len());
        let d = (0..n)
            .map(|i| match (self.d.get(i), o.d.get(i)) {
                (Some(a), Some(b)) => a.mul(&o.v).add(&self.v.mul(b)),
                (Some(a), None) => a.mul(&o.v),
                (None, Some(b)) => self.v.mul(b),
                (None, None) => unreachable!(),
            })
            .collect();
        Dual { v: self.v.mul(&o.v), d }
    }
    fn mul_coeff(&self, c: &Interval) -> Self {
        Dual { v: self.v.mul_coeff(c), d: self.d.iter().map(|x| x.mul_coeff(c)).collect() }
    }
    fn div_int(&self, k: u32) -> Self {
        Dual { v: self.v.div_int(k), d: self.d.iter().map(|x| x.div_int(k)).collect() }
    }
}

/// `coeff · Π x_i^{powers_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Interval,
    pub powers: Vec<u32>,
}

/// A polynomial map from `nvars` variables to `comps.len()` components.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyField {
    nvars: usize,
    comps: Vec<Vec<Term>>,
}

impl PolyField {
    pub fn new(nvars: usize, comps: Vec<Vec<Term>>) -> Result<Self, FlowError> {
        for (c, terms) in comps.iter().enumerate() {
            for t in terms {
                if t.powers.len() != nvars {
                    return Err(FlowError::Field(format!(
                        "term in component {c} has {} exponents, expected {nvars}",
                        t.powers.len()
                    )));
                }
            }
        }
        Ok(PolyField { nvars, comps })
    }

    /// `(-y - z, x + b y, b + z (x - a))`.
    pub fn rossler(a: Interval, b: Interval) -> Self {
        let t = |coeff: Interval, p: [u32; 3]| Term { coeff, powers: p.to_vec() };
        let one = Interval::ONE;
        PolyField {
            nvars: 3,
            comps: vec![
                vec![t(-one, [0, 1, 0]), t(-one, [0, 0, 1])],
                vec![t(one, [1, 0, 0]), t(b, [0, 1, 0])],
                vec![t(b, [0, 0, 0]), t(one, [1, 0, 1]), t(-a, [0, 0, 1])],
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn components(&self) -> &[Vec<Term>] {
        &self.comps
    }

    pub fn scaled(&self, c: Interval) -> PolyField {
        let comps = self
            .comps
            .iter()
            .map(|ts| ts.iter().map(|t| Term { coeff: t.coeff * c, powers: t.powers.clone() }).collect())
            .collect();
        PolyField { nvars: self.nvars, comps }
    }

    /// `F(u, v) = f(u) + eps · g(v)` on `2d` variables.
    pub fn with_delay(f: &PolyField, g: &PolyField, eps: Interval) -> Result<PolyField, FlowError> {
        let d = f.dim();
        if f.nvars != d || g.nvars != d || g.dim() != d {
            return Err(FlowError::Field("delayed field needs square f and g of equal dimension".into()));
        }
        let mut comps = Vec::with_capacity(d);
        for i in 0..d {
            let mut ts: Vec<Term> = f.comps[i]
                .iter()
                .map(|t| {
                    let mut p = t.powers.clone();
                    p.resize(2 * d, 0);
                    Term { coeff: t.coeff, powers: p }
                })
                .collect();
            if eps != Interval::ZERO {
                for t in &g.comps[i] {
                    let mut p = vec![0; d];
                    p.extend(&t.powers);
                    ts.push(Term { coeff: t.coeff * eps, powers: p });
                }
            }
            comps.push(ts);
        }
        Ok(PolyField { nvars: 2 * d, comps })
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        self.comps
            .iter()
            .map(|ts| {
                let mut acc = S::zero();
                for t in ts {
                    let mut m = S::from_coeff(&t.coeff);
                    for (xi, &p) in x.iter().zip(&t.powers) {
                        for _ in 0..p {
                            m = m.mul(xi);
                        }
                    }
                    acc = acc.add(&m);
                }
                acc
            })
            .collect()
    }

    pub fn compile(&self) -> TaylorProgram {
        TaylorProgram::new(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Node {
    Var(usize),
    Mul(usize, usize),
}

/// A field compiled into shared monomial products for series arithmetic.
#[derive(Clone, Debug)]
pub struct TaylorProgram {
    dim: usize,
    nvars: usize,
    nodes: Vec<Node>,
    constants: Vec<Interval>,
    linear: Vec<Vec<(Interval, usize)>>,
}

impl TaylorProgram {
    fn new(f: &PolyField) -> Self {
        let mut nodes: Vec<Node> = (0..f.nvars).map(Node::Var).collect();
        let mut memo: HashMap<(usize, usize), usize> = HashMap::new();
        let mut constants = vec![Interval::ZERO; f.dim()];
        let mut linear = vec![Vec::new(); f.dim()];
        for (c, terms) in f.comps.iter().enumerate() {
            for t in terms {
                let mut node: Option<usize> = None;
                for (v, &p) in t.powers.iter().enumerate() {
                    for _ in 0..p {
                        node = Some(match node {
                            None => v,
                            Some(n) => *memo.entry((n, v)).or_insert_with(|| {
                                nodes.push(Node::Mul(n, v));
                                nodes.len() - 1
                            }),
                        });
                    }
                }
                match node {
                    None => constants[c] += t.coeff,
                    Some(n) => linear[c].push((t.coeff, n)),
                }
            }
        }
        TaylorProgram { dim: f.dim(), nvars: f.nvars, nodes, constants, linear }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Normalized Taylor coefficients `u[k] = u^{(k)}(0)/k!` for `k <= order`.
    ///
    /// Variables past the first `dim` take the given series `v[k]`, which
    /// must be available for `k < order`.
    pub fn series<S: Scalar>(&self, u0: &[S], v: &[Vec<S>], order: usize) -> Vec<Vec<S>> {
        assert_eq!(u0.len(), self.dim);
        let extra = self.nvars - self.dim;
        assert!(extra == 0 || v.len() >= order, "delayed series too short");
        let mut u: Vec<Vec<S>> = Vec::with_capacity(order + 1);
        u.push(u0.to_vec());
        let mut ns: Vec<Vec<S>> = vec![Vec::with_capacity(order + 1); self.nodes.len()];
        for k in 0..order {
            for (i, node) in self.nodes.iter().enumerate() {
                let val = match *node {
                    Node::Var(j) if j < self.dim => u[k][j].clone(),
                    Node::Var(j) => v[k][j - self.dim].clone(),
                    Node::Mul(a, b) => {
                        let mut acc = ns[a][0].mul(&ns[b][k]);
                        for q in 1..=k {
                            acc = acc.add(&ns[a][q].mul(&ns[b][k - q]));
                        }
                        acc
                    }
                };
                ns[i].push(val);
            }
            let next = (0..self.dim)
                .map(|c| {
                    let mut acc = if k == 0 { S::from_coeff(&self.constants[c]) } else { S::zero() };
                    for (coeff, n) in &self.linear[c] {
                        acc = acc.add(&ns[*n][k].mul_coeff(coeff));
                    }
                    acc.div_int(k as u32 + 1)
                })
                .collect();
            u.push(next);
        }
        u
    }
}

/// `Σ_k c[k] t^k` by Horner's rule.
pub fn horner<S: Scalar>(coeffs: &[Vec<S>], t: &S) -> Vec<S> {
    let d = coeffs[0].len();
    let mut acc = coeffs.last().unwrap().clone();
    for c in coeffs.iter().rev().skip(1) {
        for i in 0..d {
            acc[i] = acc[i].mul(t).add(&c[i]);
        }
    }
    acc
}
