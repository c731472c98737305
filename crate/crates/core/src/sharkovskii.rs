//! Sharkovskii's order, periodic-orbit patterns, and non-repeating loops of
//! orbit intervals for the piecewise-linear model map.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::interval::{parse_decimal, Interval};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SharkError {
    #[error("periods must be positive")]
    NonPositive,
    #[error("{m} does not succeed {n} in Sharkovskii's order")]
    NotForced { n: u64, m: u64 },
    #[error("invalid orbit pattern: {0}")]
    Pattern(String),
    #[error("no non-repeating {0}-loop exists for this pattern")]
    NoLoop(u64),
    #[error("loop check failed: {0}")]
    BadLoop(String),
    #[error("periodic point search failed: {0}")]
    Numerical(String),
}

fn split_two(n: u64) -> (u32, u64) {
    let k = n.trailing_zeros();
    (k, n >> k)
}

/// `Less` when `a ◁ b`, i.e. period `a` forces period `b`.
pub fn sharkovskii_compare(a: u64, b: u64) -> Result<Ordering, SharkError> {
    if a == 0 || b == 0 {
        return Err(SharkError::NonPositive);
    }
    let key = |n: u64| {
        let (k, q) = split_two(n);
        if q > 1 {
            (0u8, k as i64, q)
        } else {
            (1u8, -(k as i64), 0)
        }
    };
    Ok(key(a).cmp(&key(b)))
}

/// `true` when `a ◁ b` strictly.
pub fn precedes(a: u64, b: u64) -> Result<bool, SharkError> {
    Ok(sharkovskii_compare(a, b)? == Ordering::Less)
}

/// All `m <= limit` with `n ◁ m`, listed in Sharkovskii's order.
pub fn successors(n: u64, limit: u64) -> Result<Vec<u64>, SharkError> {
    if n == 0 {
        return Err(SharkError::NonPositive);
    }
    let mut out: Vec<u64> = (1..=limit).filter(|&m| precedes(n, m).unwrap_or(false)).collect();
    out.sort_by(|&a, &b| sharkovskii_compare(a, b).unwrap());
    Ok(out)
}

/// A cyclic permutation of sorted orbit points.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitPattern {
    points: Vec<Interval>,
    sigma: Vec<usize>,
}

impl OrbitPattern {
    /// `points` must be certainly increasing and `sigma` a single cycle.
    pub fn new(points: Vec<Interval>, sigma: Vec<usize>) -> Result<Self, SharkError> {
        let n = points.len();
        if n == 0 || sigma.len() != n {
            return Err(SharkError::Pattern(format!("{} points but {} successor entries", n, sigma.len())));
        }
        for w in points.windows(2) {
            if !w[0].precedes(&w[1]) {
                return Err(SharkError::Pattern(format!("points {:?} and {:?} are not certainly ordered", w[0], w[1])));
            }
        }
        if sigma.iter().any(|&s| s >= n) {
            return Err(SharkError::Pattern("successor index out of range".into()));
        }
        let mut seen = vec![false; n];
        let mut i = 0;
        for _ in 0..n {
            if seen[i] {
                return Err(SharkError::Pattern("successor map is not a single cycle".into()));
            }
            seen[i] = true;
            i = sigma[i];
        }
        if i != 0 || seen.iter().any(|s| !s) {
            return Err(SharkError::Pattern("successor map is not a single cycle".into()));
        }
        Ok(OrbitPattern { points, sigma })
    }

    /// Pattern from points listed in orbit order `x0 -> x1 -> ... -> x0`.
    pub fn from_cycle(orbit: &[Interval]) -> Result<Self, SharkError> {
        let n = orbit.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| orbit[a].mid().total_cmp(&orbit[b].mid()));
        let mut rank = vec![0; n];
        for (r, &i) in idx.iter().enumerate() {
            rank[i] = r;
        }
        let points = idx.iter().map(|&i| orbit[i]).collect();
        let mut sigma = vec![0; n];
        for i in 0..n {
            sigma[rank[i]] = rank[(i + 1) % n];
        }
        OrbitPattern::new(points, sigma)
    }

    /// Line-oriented text: `point <decimal>` in increasing order and
    /// `sigma <i> <j>` meaning `p_i -> p_j`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, SharkError> {
        let mut points = Vec::new();
        let mut pairs = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let w: Vec<&str> = line.split_whitespace().collect();
            let bad = |m: &str| SharkError::Pattern(format!("line {}: {m}", n + 1));
            match w.as_slice() {
                [] => {}
                ["point", v] => points.push(parse_decimal(v).map_err(|e| bad(&e.to_string()))?),
                ["sigma", i, j] => {
                    let i: usize = i.parse().map_err(|_| bad("bad index"))?;
                    let j: usize = j.parse().map_err(|_| bad("bad index"))?;
                    pairs.push((i, j));
                }
                _ => return Err(bad("expected `point <x>` or `sigma <i> <j>`")),
            }
        }
        let mut sigma = vec![usize::MAX; points.len()];
        for (i, j) in pairs {
            match sigma.get_mut(i) {
                Some(s) if *s == usize::MAX => *s = j,
                Some(_) => return Err(SharkError::Pattern(format!("sigma {i} given twice"))),
                None => return Err(SharkError::Pattern(format!("sigma index {i} out of range"))),
            }
        }
        OrbitPattern::new(points, sigma)
    }

    /// Štefan pattern of odd period `n >= 3`: the orbit spirals outwards from
    /// the middle point, first to the left, so the interval just left of the
    /// middle covers itself.
    pub fn stefan(n: usize) -> Result<Self, SharkError> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(SharkError::Pattern(format!("no built-in pattern for period {n}")));
        }
        let c = (n - 1) / 2;
        let mut order = vec![c];
        for j in 1..=c {
            order.push(c - j);
            order.push(c + j);
        }
        let mut sigma = vec![0; n];
        for w in 0..n {
            sigma[order[w]] = order[(w + 1) % n];
        }
        let points = (0..n).map(|i| Interval::point(i as f64)).collect();
        OrbitPattern::new(points, sigma)
    }

    pub fn period(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Interval] {
        &self.points
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    /// All orbit intervals, in lexicographic index order.
    pub fn intervals(&self) -> Vec<OInterval> {
        let n = self.period();
        let mut v = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                v.push(OInterval { a, b });
            }
        }
        v
    }

    /// Whether `from` covers `to` under any map realising the pattern.
    pub fn covers(&self, from: OInterval, to: OInterval) -> bool {
        let (x, y) = (self.sigma[from.a], self.sigma[from.b]);
        x.min(y) <= to.a && to.b <= x.max(y)
    }

    pub fn covering_graph(&self) -> Vec<(OInterval, OInterval)> {
        let iv = self.intervals();
        let mut edges = Vec::new();
        for &f in &iv {
            for &t in &iv {
                if self.covers(f, t) {
                    edges.push((f, t));
                }
            }
        }
        edges
    }
}

/// An orbit interval `[p_a, p_b]`, given by point indices `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OInterval {
    pub a: usize,
    pub b: usize,
}

impl OInterval {
    pub fn new(a: usize, b: usize) -> Self {
        assert!(a < b);
        OInterval { a, b }
    }

    fn contains_index(&self, i: usize) -> bool {
        self.a <= i && i <= self.b
    }

    fn interior_meets(&self, other: &OInterval) -> bool {
        other.a < self.b && self.a < other.b
    }
}

impl fmt::Display for OInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[p{},p{}]", self.a, self.b)
    }
}

/// `J_0 -> J_1 -> ... -> J_{m-1} -> J_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub intervals: Vec<OInterval>,
}

impl Loop {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// `{"loop":[[a,b],...],"m":m}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Json {
            #[serde(rename = "loop")]
            intervals: Vec<[usize; 2]>,
            m: usize,
        }
        let j = Json { intervals: self.intervals.iter().map(|j| [j.a, j.b]).collect(), m: self.len() };
        serde_json::to_string(&j).expect("plain data serializes")
    }
}

impl fmt::Display for Loop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in &self.intervals {
            write!(f, "{j}->")?;
        }
        match self.intervals.first() {
            Some(j) => write!(f, "{j}"),
            None => Ok(()),
        }
    }
}

/// Check both non-repeating conditions and every covering relation.
pub fn verify_loop(pattern: &OrbitPattern, lp: &Loop) -> Result<(), SharkError> {
    let m = lp.len();
    if m == 0 {
        return Err(SharkError::BadLoop("empty loop".into()));
    }
    let n = pattern.period();
    for j in &lp.intervals {
        if j.a >= j.b || j.b >= n {
            return Err(SharkError::BadLoop(format!("{j} is not an orbit interval")));
        }
    }
    for i in 0..m {
        let (from, to) = (lp.intervals[i], lp.intervals[(i + 1) % m]);
        if !pattern.covers(from, to) {
            return Err(SharkError::BadLoop(format!("{from} does not cover {to}")));
        }
    }
    let j0 = lp.intervals[0];
    if let Some(j) = lp.intervals[1..].iter().find(|j| j0.interior_meets(j)) {
        return Err(SharkError::BadLoop(format!("interior of {j0} meets {j}")));
    }
    if let Some(e) = endpoint_following(pattern, lp) {
        return Err(SharkError::BadLoop(format!("orbit point p{e} follows the loop")));
    }
    Ok(())
}

fn endpoint_following(pattern: &OrbitPattern, lp: &Loop) -> Option<usize> {
    let mut ends: Vec<usize> = lp.intervals.iter().flat_map(|j| [j.a, j.b]).collect();
    ends.sort_unstable();
    ends.dedup();
    ends.into_iter().find(|&e| {
        let mut x = e;
        for j in &lp.intervals {
            if !j.contains_index(x) {
                return false;
            }
            x = pattern.sigma[x];
        }
        x == e
    })
}

/// Depth-first search for a non-repeating `m`-loop.
///
/// Start intervals are tried from the highest lexicographic index down and
/// successors in ascending lexicographic order, so the result is deterministic.
pub fn find_nonrepeating_loop(pattern: &OrbitPattern, m: u64) -> Result<Loop, SharkError> {
    let n = pattern.period() as u64;
    if m == 0 {
        return Err(SharkError::NonPositive);
    }
    if !precedes(n, m)? {
        return Err(SharkError::NotForced { n, m });
    }
    let all = pattern.intervals();
    let m = m as usize;
    for &j0 in all.iter().rev() {
        let allowed: Vec<OInterval> = all.iter().copied().filter(|j| !j0.interior_meets(j)).collect();
        let mut path = vec![j0];
        if dfs(pattern, &allowed, j0, m, &mut path) {
            return Ok(Loop { intervals: path });
        }
    }
    Err(SharkError::NoLoop(m as u64))
}

fn dfs(pattern: &OrbitPattern, allowed: &[OInterval], j0: OInterval, m: usize, path: &mut Vec<OInterval>) -> bool {
    let last = *path.last().unwrap();
    if path.len() == m {
        if pattern.covers(last, j0) {
            let lp = Loop { intervals: path.clone() };
            return endpoint_following(pattern, &lp).is_none();
        }
        return false;
    }
    for &next in allowed {
        if pattern.covers(last, next) {
            path.push(next);
            if dfs(pattern, allowed, j0, m, path) {
                return true;
            }
            path.pop();
        }
    }
    false
}

/// The piecewise-linear map through `(p_i, p_σ(i))`, on the midpoints of the
/// orbit point enclosures.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelMap {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

pub fn build_model_map(pattern: &OrbitPattern) -> ModelMap {
    let xs: Vec<f64> = pattern.points.iter().map(Interval::mid).collect();
    let ys = pattern.sigma.iter().map(|&s| xs[s]).collect();
    ModelMap { xs, ys }
}

impl ModelMap {
    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 {
            return self.ys[0];
        }
        let k = match self.xs.iter().position(|&b| b > x) {
            Some(0) => 0,
            Some(k) => k - 1,
            None => n - 2,
        }
        .min(n - 2);
        let (x0, x1, y0, y1) = (self.xs[k], self.xs[k + 1], self.ys[k], self.ys[k + 1]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn iterate(&self, x: f64, k: usize) -> f64 {
        (0..k).fold(x, |y, _| self.eval(y))
    }

    /// Points of `[lo, hi]` where the map takes the value `y`.
    fn preimages(&self, lo: f64, hi: f64, y: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for k in 0..self.xs.len() - 1 {
            let (x0, x1, y0, y1) = (self.xs[k], self.xs[k + 1], self.ys[k], self.ys[k + 1]);
            if x1 < lo || x0 > hi || y < y0.min(y1) || y > y0.max(y1) || y0 == y1 {
                continue;
            }
            let x = (x0 + (y - y0) * (x1 - x0) / (y1 - y0)).clamp(x0, x1);
            if x >= lo && x <= hi {
                out.push(x);
            }
        }
        out
    }
}

/// Enclose (width at most 1e-12) a point of the model map following `lp`.
pub fn locate_periodic_point(model: &ModelMap, pattern: &OrbitPattern, lp: &Loop) -> Result<Interval, SharkError> {
    verify_loop(pattern, lp)?;
    let x = &model.xs;
    let m = lp.len();
    // pull the target back through the loop: L_i ⊂ J_i mapped onto L_{i+1}
    let j0 = lp.intervals[0];
    let mut target = (x[j0.a], x[j0.b]);
    for i in (0..m).rev() {
        let j = lp.intervals[i];
        let (lo, hi) = (x[j.a], x[j.b]);
        let pa = model.preimages(lo, hi, target.0);
        let pb = model.preimages(lo, hi, target.1);
        let mut best: Option<(f64, f64)> = None;
        for &u in &pa {
            for &v in &pb {
                let cand = (u.min(v), u.max(v));
                if best.is_none_or(|b| cand.1 - cand.0 < b.1 - b.0) {
                    best = Some(cand);
                }
            }
        }
        target = best.ok_or_else(|| SharkError::Numerical(format!("no preimage pair in {j}")))?;
    }
    let g = |t: f64| model.iterate(t, m) - t;
    let (mut a, mut b) = target;
    let (mut ga, gb) = (g(a), g(b));
    if ga == 0.0 {
        return Ok(Interval::point(a));
    }
    if gb == 0.0 {
        return Ok(Interval::point(b));
    }
    if ga.signum() == gb.signum() {
        return Err(SharkError::Numerical("no sign change on the pulled-back interval".into()));
    }
    while b - a > 5e-13 {
        let c = 0.5 * (a + b);
        if c <= a || c >= b {
            break;
        }
        let gc = g(c);
        if gc == 0.0 {
            return Ok(Interval::point(c));
        }
        if gc.signum() == ga.signum() {
            a = c;
            ga = gc;
        } else {
            b = c;
        }
    }
    Ok(Interval::new(a, b))
}

/// Least period of `x` among divisors of `m`, judged at tolerance `tol`.
pub fn least_period(model: &ModelMap, x: f64, m: usize, tol: f64) -> Option<usize> {
    (1..=m).filter(|d| m.is_multiple_of(*d)).find(|&d| (model.iterate(x, d) - x).abs() <= tol)
}
