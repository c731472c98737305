//! H-sets with one exit direction, optional tails, and the covering checks.

use thiserror::Error;

use crate::interval::{IMatrix, IVector, Interval, IntervalError};
use crate::sharkovskii::{Loop, OrbitPattern};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HSetError {
    #[error("h-set dimensions disagree: {0}")]
    Dimension(String),
    #[error("radius {0} is not positive")]
    Radius(usize),
    #[error("frame matrix is not certifiably invertible")]
    Singular,
    #[error("δ-neighbourhoods of orbit points {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("orbit interval is degenerate after removing δ-neighbourhoods")]
    Degenerate,
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// `{ center + frame·ρ : |ρ_i| <= radii_i }`; coordinate 0 is the exit direction.
#[derive(Clone, Debug, PartialEq)]
pub struct HSet {
    center: IVector,
    frame: IMatrix,
    inverse: IMatrix,
    radii: IVector,
}

impl HSet {
    pub fn new(center: IVector, frame: IMatrix, radii: IVector) -> Result<Self, HSetError> {
        let d = center.len();
        if frame.rows() != d || frame.cols() != d || radii.len() != d || d == 0 {
            return Err(HSetError::Dimension(format!(
                "center {d}, frame {}x{}, radii {}",
                frame.rows(),
                frame.cols(),
                radii.len()
            )));
        }
        if let Some(i) = radii.iter().position(|r| r.lo() <= 0.0) {
            return Err(HSetError::Radius(i));
        }
        if frame.det()?.contains_zero() {
            return Err(HSetError::Singular);
        }
        let inverse = frame.inverse().map_err(|_| HSetError::Singular)?;
        Ok(HSet { center, frame, inverse, radii })
    }

    /// Axis-aligned box `center ± radii`.
    pub fn axis_box(center: IVector, radii: IVector) -> Result<Self, HSetError> {
        let d = center.len();
        HSet::new(center, IMatrix::identity(d), radii)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &IVector {
        &self.center
    }

    pub fn frame(&self) -> &IMatrix {
        &self.frame
    }

    pub fn inverse(&self) -> &IMatrix {
        &self.inverse
    }

    pub fn radii(&self) -> &IVector {
        &self.radii
    }

    /// The box of admissible frame coordinates.
    pub fn frame_box(&self) -> IVector {
        self.radii.iter().map(|r| Interval::new(-r.hi(), r.hi())).collect()
    }

    /// Frame coordinates `frame⁻¹ (y - center)`.
    pub fn to_frame(&self, y: &IVector) -> Result<IVector, HSetError> {
        if y.len() != self.dim() {
            return Err(HSetError::Dimension(format!("point of length {} for a {}-dimensional set", y.len(), self.dim())));
        }
        Ok(self.inverse.mul_vec(&y.sub(&self.center)))
    }

    pub fn from_frame(&self, rho: &IVector) -> Result<IVector, HSetError> {
        if rho.len() != self.dim() {
            return Err(HSetError::Dimension(format!("frame vector of length {}", rho.len())));
        }
        Ok(self.frame.mul_vec(rho).add(&self.center))
    }

    /// Enclosure of the whole set in basic coordinates.
    pub fn hull(&self) -> IVector {
        self.frame.mul_vec(&self.frame_box()).add(&self.center)
    }
}

/// Closed box bounds on the (finitely many) tail coordinates.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Tail {
    pub bounds: Vec<Interval>,
    pub lipschitz: Option<Interval>,
}

impl Tail {
    pub fn empty() -> Self {
        Tail::default()
    }

    pub fn new(bounds: Vec<Interval>) -> Self {
        Tail { bounds, lipschitz: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HSetWithTail {
    pub head: HSet,
    pub tail: Tail,
}

impl HSetWithTail {
    pub fn new(head: HSet, tail: Tail) -> Self {
        HSetWithTail { head, tail }
    }

    pub fn finite(head: HSet) -> Self {
        HSetWithTail { head, tail: Tail::empty() }
    }
}

/// An image enclosure expressed in a target set's frame coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameImage {
    pub coords: IVector,
    pub tail: Vec<Interval>,
}

impl FrameImage {
    pub fn new(coords: IVector, tail: Vec<Interval>) -> Self {
        FrameImage { coords, tail }
    }

    /// Convert a basic-coordinate box; correlation inside the box is lost.
    pub fn from_box(target: &HSetWithTail, y: &IVector, tail: Vec<Interval>) -> Result<Self, HSetError> {
        Ok(FrameImage { coords: target.head.to_frame(y)?, tail })
    }

    pub fn hull(&self, other: &FrameImage) -> FrameImage {
        FrameImage {
            coords: self.coords.hull(&other.coords),
            tail: self.tail.iter().zip(&other.tail).map(|(a, b)| a.hull(b)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InclusionReport {
    pub passed: bool,
    /// `radius - |coordinate|` lower bound for every finite coordinate.
    pub margins: Vec<f64>,
    pub tail_ok: bool,
    pub failures: Vec<String>,
}

impl InclusionReport {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn margin(radius: &Interval, c: &Interval) -> f64 {
    // guaranteed slack: min over radius values and coordinate values
    (radius.lo() - c.mag()).min(radius.lo() - c.hi()).min(radius.lo() + c.lo())
}

/// Strict inclusion on all finite coordinates, closed inclusion on the tail.
pub fn check_inclusion(target: &HSetWithTail, image: &FrameImage) -> InclusionReport {
    let radii = target.head.radii();
    let mut failures = Vec::new();
    let mut margins = Vec::with_capacity(radii.len());
    if image.coords.len() != radii.len() {
        failures.push(format!("image has {} coordinates, set has {}", image.coords.len(), radii.len()));
    }
    for (i, (r, c)) in radii.iter().zip(image.coords.iter()).enumerate() {
        let m = margin(r, c);
        margins.push(m);
        if !(-r.lo() < c.lo() && c.hi() < r.lo()) {
            failures.push(format!("coordinate {i}: {c:?} not inside ±{:e}", r.lo()));
        }
    }
    let tail_ok = tail_inside(&target.tail, &image.tail, &mut failures);
    InclusionReport { passed: failures.is_empty(), margins, tail_ok, failures }
}

fn tail_inside(target: &Tail, image: &[Interval], failures: &mut Vec<String>) -> bool {
    if image.len() != target.bounds.len() {
        failures.push(format!("tail has {} entries, expected {}", image.len(), target.bounds.len()));
        return false;
    }
    let mut ok = true;
    for (i, (t, x)) in target.bounds.iter().zip(image).enumerate() {
        if !t.encloses(x) {
            failures.push(format!("tail entry {i}: {x:?} not within {t:?}"));
            ok = false;
        }
    }
    ok
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoveringCheckReport {
    pub cc1: bool,
    pub cc2a: bool,
    pub cc2b: bool,
    pub cc3: bool,
    pub failures: Vec<String>,
}

impl CoveringCheckReport {
    pub fn passed(&self) -> bool {
        self.cc1 && (self.cc2a || self.cc2b) && self.cc3
    }
}

/// Sufficient conditions for `N ⟹ M` with one exit direction.
///
/// All images are given in the frame coordinates of `m`: `image` encloses
/// the image of the whole set, `left`/`right` the images of the two edges.
pub fn check_covering(
    _n: &HSetWithTail,
    m: &HSetWithTail,
    image: &FrameImage,
    left: &FrameImage,
    right: &FrameImage,
) -> CoveringCheckReport {
    let mut failures = Vec::new();
    let cc1 = tail_inside(&m.tail, &image.tail, &mut failures);
    let r = m.head.radii()[0];
    let below = |x: &FrameImage| x.coords[0].hi() < -r.hi();
    let above = |x: &FrameImage| x.coords[0].lo() > r.hi();
    let cc2a = below(left) && above(right);
    let cc2b = above(left) && below(right);
    if !(cc2a || cc2b) {
        failures.push(format!(
            "edges map to {:?} and {:?}, not across ±{:e}",
            left.coords[0],
            right.coords[0],
            r.hi()
        ));
    }
    let mut cc3 = image.coords.len() == m.head.dim();
    for (i, (rad, c)) in m.head.radii().iter().zip(image.coords.iter()).enumerate().skip(1) {
        if !(-rad.lo() < c.lo() && c.hi() < rad.lo()) {
            failures.push(format!("stable coordinate {i}: {c:?} reaches ±{:e}", rad.lo()));
            cc3 = false;
        }
    }
    CoveringCheckReport { cc1, cc2a, cc2b, cc3, failures }
}

/// The h-sets `S(J)` for the intervals of a loop, in the coordinates of the
/// ambient set: exit range `[p_a + δ_a, p_b - δ_b]`, stable radii unchanged.
pub fn build_sj_sets(
    pattern: &OrbitPattern,
    deltas: &[Interval],
    stable_radii: &IVector,
    tail: &Tail,
    lp: &Loop,
) -> Result<Vec<HSetWithTail>, HSetError> {
    let p = pattern.points();
    if deltas.len() != p.len() {
        return Err(HSetError::Dimension(format!("{} deltas for {} orbit points", deltas.len(), p.len())));
    }
    for i in 0..p.len().saturating_sub(1) {
        if !(p[i] + deltas[i]).precedes(&(p[i + 1] - deltas[i + 1])) {
            return Err(HSetError::Overlap(i, i + 1));
        }
    }
    let mut out = Vec::with_capacity(lp.len());
    for j in &lp.intervals {
        let lo = p[j.a] + deltas[j.a];
        let hi = p[j.b] - deltas[j.b];
        if !lo.precedes(&hi) {
            return Err(HSetError::Degenerate);
        }
        let center = Interval::point(0.5 * (lo.mid() + hi.mid()));
        // radius reaching exactly the edge values up to outward rounding
        let rad = Interval::new((center - lo).lo().min((hi - center).lo()), (center - lo).hi().max((hi - center).hi()));
        let mut c = vec![center];
        c.extend(std::iter::repeat_n(Interval::ZERO, stable_radii.len()));
        let mut radii = vec![rad];
        radii.extend(stable_radii.iter().copied());
        let head = HSet::axis_box(IVector(c), IVector(radii))?;
        out.push(HSetWithTail::new(head, tail.clone()));
    }
    Ok(out)
}

/// The `S(J)` frame coordinate of a point's exit coordinate `p`, i.e.
/// `-1 + 2(p - lo)/(hi - lo)`.
pub fn sj_normalized(p: Interval, lo: Interval, hi: Interval) -> Result<Interval, HSetError> {
    Ok(Interval::point(-1.0) + (p - lo).scale(2.0).div(&(hi - lo))?)
}
