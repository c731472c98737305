use rayon::prelude::*;

use crate::dde::{dde_poincare, DdeSolver, FSet, GridSpec};
use crate::flow::{poincare_map, OdeSolver, Section};
use crate::hset::{build_sj_sets, check_covering, check_inclusion, FrameImage, HSet, HSetWithTail, Tail};
use crate::interval::{IMatrix, IVector, Interval};
use crate::sharkovskii::{find_nonrepeating_loop, verify_loop, Loop, OInterval, OrbitPattern};

use super::geometry::Geometry;
use super::job::{FieldSpec, Mode, ProofJob};
use super::tail::TailBasis;
use super::DriverError;

/// Enclosure of the image of one piece: ambient frame coordinates and tail.
#[derive(Clone, Debug, PartialEq)]
pub struct PieceImage {
    pub coords: IVector,
    pub tail: Vec<Interval>,
    pub return_time: Interval,
}

/// Rigorous Poincaré image of a box given in ambient frame coordinates.
pub trait Engine: Sync {
    fn image(&self, rho: &IVector) -> Result<PieceImage, String>;
}

pub struct OdeEngine {
    solver: OdeSolver,
    section: Section,
    ambient: HSet,
    max_time: f64,
}

impl OdeEngine {
    pub fn new(job: &ProofJob, geom: &Geometry) -> Result<Self, DriverError> {
        let solver = OdeSolver::new(job.field.poly()?).map_err(|e| DriverError::Precondition(e.to_string()))?;
        let i = geom.ambient;
        let ambient = HSet::new(geom.centers[i].clone(), geom.frame.clone(), geom.radii[i].clone()).map_err(|e| DriverError::Precondition(e.to_string()))?;
        Ok(OdeEngine { solver, section: job.section, ambient, max_time: job.max_time })
    }
}

impl Engine for OdeEngine {
    fn image(&self, rho: &IVector) -> Result<PieceImage, String> {
        let x0 = self.section.initial_set(&self.ambient, rho.clone());
        let img = poincare_map(&self.solver, &self.section, &x0, self.max_time).map_err(|e| e.to_string())?;
        Ok(PieceImage { coords: img.frame_coords(&self.ambient), tail: Vec::new(), return_time: img.return_time })
    }
}

pub struct DdeEngine {
    solver: DdeSolver,
    section: Section,
    center: IVector,
    frame: IMatrix,
    inverse: IMatrix,
    basis: TailBasis,
    max_time: f64,
}

impl DdeEngine {
    pub fn new(job: &ProofJob, geom: &Geometry, basis: TailBasis) -> Result<Self, DriverError> {
        let f = job.field.poly()?;
        let g = job.delay_field.as_ref().map(|s| s.poly()).transpose()?.unwrap_or_else(|| f.clone());
        if basis.d != f.dim() {
            return Err(DriverError::Precondition(format!("tail basis has dimension {}, field {}", basis.d, f.dim())));
        }
        if basis.grid.tau != job.tau {
            return Err(DriverError::Precondition(format!("tail basis delay {} differs from job delay {}", basis.grid.tau, job.tau)));
        }
        let solver = DdeSolver::new(&f, &g, job.eps, basis.grid).map_err(|e| DriverError::Precondition(e.to_string()))?;
        let i = geom.ambient;
        Ok(DdeEngine {
            solver,
            section: job.section,
            center: geom.centers[i].clone(),
            frame: geom.frame.clone(),
            inverse: geom.inverse.clone(),
            basis,
            max_time: job.max_time,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.basis.grid
    }

    /// The segments `ū0 + m̄1·ρ1 + Z` with head `c + M·ρ` and remainders `Ξ`.
    pub fn initial_set(&self, rho: &IVector) -> Result<FSet, String> {
        let b = &self.basis;
        let (d, m) = (b.d, b.dim());
        let mut center = IVector::zeros(m);
        center[..d].copy_from_slice(&self.section.embed(&self.center));
        for r in d..m {
            center[r] = Interval::point(b.u0[r]) + b.z[r - d];
        }
        let head = self.section.embed_matrix(&self.frame);
        let k = rho.len();
        let mut mat = IMatrix::zeros(m, k);
        for r in 0..d {
            for c in 0..k {
                mat[(r, c)] = head[(r, c)];
            }
        }
        for r in d..m {
            mat[(r, 0)] = Interval::point(b.m1[r]);
        }
        FSet::from_affine(b.grid, d, &center, &mat, rho.clone(), b.xi.clone()).map_err(|e| e.to_string())
    }
}

impl Engine for DdeEngine {
    fn image(&self, rho: &IVector) -> Result<PieceImage, String> {
        let x0 = self.initial_set(rho)?;
        let img = dde_poincare(&self.solver, &self.section, &x0, self.max_time).map_err(|e| e.to_string())?;
        let b = &self.basis;
        let (d, m) = (b.d, b.dim());
        let rows: Vec<usize> = (0..d).filter(|&r| r != self.section.coord).collect();
        let (kr, kb) = (img.r0.len(), img.r.len());
        let pick = |mat: &IMatrix, cols: usize| IMatrix::from_vec(rows.len(), cols, rows.iter().flat_map(|&r| mat.row(r).to_vec()).collect());
        let c_yz: IVector = rows.iter().map(|&r| img.center[r]).collect();
        let e_yz: IVector = rows.iter().map(|&r| img.err[r]).collect();
        let a0 = self.inverse.mul_vec(&c_yz.sub(&self.center));
        let ar = self.inverse.mul(&pick(&img.cmat, kr));
        let br = self.inverse.mul(&pick(&img.bmat, kb));
        let er = self.inverse.mul_vec(&e_yz);
        let mut coords = a0.add(&br.mul_vec(&img.r)).add(&er);
        if kr > 0 {
            coords = coords.add(&ar.mul_vec(&img.r0));
        }
        let mut tail = Vec::with_capacity(m - d + b.grid.p * d);
        for r in d..m {
            let w = Interval::point(b.m1[r]);
            let mut v = img.center[r] - Interval::point(b.u0[r]) - w * a0[0] + img.err[r] - w * er[0];
            for q in 0..kr {
                v += (img.cmat[(r, q)] - w * ar[(0, q)]) * img.r0[q];
            }
            for q in 0..kb {
                v += (img.bmat[(r, q)] - w * br[(0, q)]) * img.r[q];
            }
            tail.push(v);
        }
        for x in &img.xi {
            tail.extend(x.iter().copied());
        }
        Ok(PieceImage { coords, tail, return_time: img.return_time })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Pass {
        /// Image in the target's frame coordinates.
        coords: IVector,
        margin: f64,
        tail_slack: f64,
        digest: u64,
        return_time: Interval,
    },
    Fail {
        reason: String,
    },
}

/// A leaf of the subdivision tree; `path` is the initial index followed by
/// `.0`/`.1` for lower and upper halves.
#[derive(Clone, Debug, PartialEq)]
pub struct PieceRecord {
    pub path: String,
    pub rho1: Interval,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InclusionResult {
    pub source: String,
    pub target: String,
    pub records: Vec<PieceRecord>,
    /// Hull of all piece images in ambient frame coordinates.
    pub image: Option<FrameImage>,
}

impl InclusionResult {
    pub fn passed(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| matches!(r.outcome, Outcome::Pass { .. }))
    }

    pub fn min_margin(&self) -> f64 {
        self.records
            .iter()
            .map(|r| match r.outcome {
                Outcome::Pass { margin, .. } => margin,
                Outcome::Fail { .. } => f64::NEG_INFINITY,
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Strategy knobs; the defaults come from the job.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Strategy {
    /// Pieces along the unstable axis for the ambient set; other sources get
    /// the same piece width.
    pub pieces: usize,
    pub depth: usize,
}

fn fnv(acc: u64, x: f64) -> u64 {
    x.to_bits().to_le_bytes().iter().fold(acc, |h, b| (h ^ *b as u64).wrapping_mul(0x100000001b3))
}

pub(crate) fn digest(coords: &[Interval], tail: &[Interval]) -> u64 {
    coords.iter().chain(tail).fold(0xcbf29ce484222325, |h, v| fnv(fnv(h, v.lo()), v.hi()))
}

fn tail_slack(bounds: &[Interval], tail: &[Interval]) -> f64 {
    bounds.iter().zip(tail).map(|(b, x)| (x.lo() - b.lo()).min(b.hi() - x.hi())).fold(f64::INFINITY, f64::min)
}

fn split(rho: &IVector) -> (IVector, IVector) {
    let x = rho[0];
    let m = 0.5 * (x.lo() + x.hi());
    let mut a = rho.clone();
    let mut b = rho.clone();
    a[0] = Interval::new(x.lo(), m);
    b[0] = Interval::new(m, x.hi());
    (a, b)
}

/// Initial pieces of `source` along the first coordinate, `count` of them.
pub fn initial_pieces(source: &IVector, count: usize) -> Vec<IVector> {
    let (lo, hi) = (source[0].lo(), source[0].hi());
    let edge = |i: usize| if i == count { hi } else { lo + (hi - lo) * (i as f64 / count as f64) };
    (0..count)
        .map(|i| {
            let mut r = source.clone();
            r[0] = Interval::new(edge(i), edge(i + 1));
            r
        })
        .collect()
}

fn piece_count(geom: &Geometry, source: &IVector, pieces: usize) -> usize {
    let w = geom.ambient_box(geom.ambient)[0].width();
    ((pieces as f64 * source[0].width() / w).ceil() as usize).max(1)
}

struct Leafs {
    records: Vec<PieceRecord>,
    hull: Option<FrameImage>,
}

fn merge_hull(h: &mut Option<FrameImage>, img: FrameImage) {
    *h = Some(match h.take() {
        None => img,
        Some(a) => a.hull(&img),
    });
}

#[allow(clippy::too_many_arguments)]
fn process(engine: &dyn Engine, geom: &Geometry, target_idx: usize, target: &HSetWithTail, rho: IVector, path: String, depth: usize, out: &mut Leafs) {
    let outcome = match engine.image(&rho) {
        Ok(img) => {
            let local = geom.to_set(target_idx, &img.coords);
            let fi = FrameImage::new(local.clone(), img.tail.clone());
            let rep = check_inclusion(target, &fi);
            let ambient = FrameImage::new(img.coords.clone(), img.tail.clone());
            if rep.passed {
                merge_hull(&mut out.hull, ambient);
                Outcome::Pass {
                    digest: digest(&local, &img.tail),
                    tail_slack: tail_slack(&target.tail.bounds, &img.tail),
                    margin: rep.min_margin(),
                    coords: local,
                    return_time: img.return_time,
                }
            } else {
                Outcome::Fail { reason: rep.failures.join("; ") }
            }
        }
        Err(e) => Outcome::Fail { reason: e },
    };
    if matches!(outcome, Outcome::Fail { .. }) && depth > 0 {
        let (a, b) = split(&rho);
        process(engine, geom, target_idx, target, a, format!("{path}.0"), depth - 1, out);
        process(engine, geom, target_idx, target, b, format!("{path}.1"), depth - 1, out);
        return;
    }
    out.records.push(PieceRecord { path, rho1: rho[0], outcome });
}

/// Subdivided verification of `P(source) ⊂ int target`.
pub fn run_inclusion(engine: &dyn Engine, geom: &Geometry, source: usize, target: usize, tail: &Tail, strategy: Strategy) -> Result<InclusionResult, DriverError> {
    let src = geom
        .source_box(source)
        .ok_or_else(|| DriverError::Precondition(format!("set {} does not meet the ambient set", geom.names[source])))?;
    let tset = geom.target(target, tail.clone())?;
    let pieces = initial_pieces(&src, piece_count(geom, &src, strategy.pieces));
    let leafs: Vec<Leafs> = pieces
        .into_par_iter()
        .enumerate()
        .map(|(i, rho)| {
            let mut out = Leafs { records: Vec::new(), hull: None };
            process(engine, geom, target, &tset, rho, i.to_string(), strategy.depth, &mut out);
            out
        })
        .collect();
    let mut records = Vec::new();
    let mut hull = None;
    let mut all = true;
    for l in leafs {
        all &= l.records.iter().all(|r| matches!(r.outcome, Outcome::Pass { .. }));
        records.extend(l.records);
        if let Some(h) = l.hull {
            merge_hull(&mut hull, h);
        }
    }
    Ok(InclusionResult {
        source: geom.names[source].clone(),
        target: geom.names[target].clone(),
        records,
        image: if all { hull } else { None },
    })
}

/// Hull of the images of all pieces of `source`, splitting only pieces whose
/// image cannot be computed.
pub fn image_hull(engine: &dyn Engine, geom: &Geometry, source: usize, strategy: Strategy) -> Result<FrameImage, DriverError> {
    fn go(engine: &dyn Engine, rho: IVector, depth: usize) -> Result<FrameImage, String> {
        match engine.image(&rho) {
            Ok(img) => Ok(FrameImage::new(img.coords, img.tail)),
            Err(e) if depth == 0 => Err(format!("piece {:?}: {e}", rho[0])),
            Err(_) => {
                let (a, b) = split(&rho);
                Ok(go(engine, a, depth - 1)?.hull(&go(engine, b, depth - 1)?))
            }
        }
    }
    let src = geom.source_box(source).ok_or_else(|| DriverError::Precondition("empty source".into()))?;
    let parts: Vec<Result<FrameImage, String>> =
        initial_pieces(&src, piece_count(geom, &src, strategy.pieces)).into_par_iter().map(|rho| go(engine, rho, strategy.depth)).collect();
    let mut hull: Option<FrameImage> = None;
    for p in parts {
        merge_hull(&mut hull, p.map_err(DriverError::Inconclusive)?);
    }
    Ok(hull.expect("at least one piece"))
}

/// One covering `S(J_from) ⟹ S(J_to)` derived from the verified images.
#[derive(Clone, Debug, PartialEq)]
pub struct CoveringStep {
    pub from: OInterval,
    pub to: OInterval,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodResult {
    pub m: u64,
    pub lp: Loop,
    pub steps: Vec<CoveringStep>,
    pub passed: bool,
}

/// Existence of periodic points, only constructible from a full pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Conclusion {
    cycle: Vec<String>,
    periods: Vec<u64>,
}

impl Conclusion {
    pub fn periods(&self) -> &[u64] {
        &self.periods
    }

    pub fn statement(&self) -> String {
        let n = self.cycle.len();
        let list = self.periods.iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
        format!(
            "the return map has a periodic point of period {n} through {} and, by the covering loops, points of least period {list}; \
             period {n} forces every period that follows it in the Sharkovskii order",
            self.cycle.join(" -> ")
        )
    }
}

fn sorted_cycle(geom: &Geometry, cycle: &[usize]) -> Vec<usize> {
    let mut s = cycle.to_vec();
    s.sort_by(|a, b| geom.offsets[*a][0].mid().total_cmp(&geom.offsets[*b][0].mid()));
    s
}

/// Coverings between the `S(J)` sets of each requested loop, derived from
/// the inclusion images: edges of `S(J)` lie in the cycle sets, whose images
/// are known, and the whole of `S(J)` lies in the ambient set.
pub fn derive_coverings(geom: &Geometry, cycle: &[usize], inclusions: &[InclusionResult], tail: &Tail, periods: &[u64]) -> Result<Vec<PeriodResult>, DriverError> {
    let orbit: Vec<Interval> = cycle.iter().map(|&i| geom.offsets[i][0]).collect();
    let pattern = OrbitPattern::from_cycle(&orbit).map_err(|e| DriverError::Precondition(e.to_string()))?;
    let sorted = sorted_cycle(geom, cycle);
    // edges pulled slightly inside the cycle sets so that rounding keeps them there
    let deltas: Vec<Interval> = sorted.iter().map(|&i| Interval::point(geom.radii[i][0].lo() * (1.0 - 1e-9))).collect();
    let amb = geom.ambient;
    let stable = IVector(geom.radii[amb][1..].to_vec());
    let whole = inclusions.iter().find(|r| r.source == geom.names[amb]).and_then(|r| r.image.clone());
    let image_of = |set: usize| inclusions.iter().find(|r| r.source == geom.names[set]).and_then(|r| r.image.clone());
    let amb_src = geom.source_box(amb).expect("ambient");
    let mut out = Vec::new();
    // the cycle itself gives its own period
    for &m in periods.iter().filter(|&&m| m != cycle.len() as u64) {
        let lp = find_nonrepeating_loop(&pattern, m).map_err(|e| DriverError::Precondition(format!("period {m}: {e}")))?;
        verify_loop(&pattern, &lp).map_err(|e| DriverError::Precondition(format!("period {m}: {e}")))?;
        let sj = build_sj_sets(&pattern, &deltas, &stable, tail, &lp).map_err(|e| DriverError::Precondition(e.to_string()))?;
        let k = lp.len();
        let mut steps = Vec::with_capacity(k);
        for idx in 0..k {
            let (from, to) = (lp.intervals[idx], lp.intervals[(idx + 1) % k]);
            let (n_set, m_set) = (&sj[idx], &sj[(idx + 1) % k]);
            let mut failures = Vec::new();
            let c = n_set.head.center()[0];
            let r = n_set.head.radii()[0];
            let span = Interval::new((c - r).lo(), (c + r).hi());
            if !amb_src[0].encloses(&span) {
                failures.push(format!("S(J) range {span:?} leaves the ambient set"));
            }
            let edge = |at: Interval, set: usize| -> Option<FrameImage> {
                let mut e = IVector(vec![at]);
                e.0.extend(stable.iter().map(|s| Interval::new(-s.hi(), s.hi())));
                let src = geom.source_box(set)?;
                if src.encloses(&e) {
                    image_of(set)
                } else {
                    None
                }
            };
            let to_local = |img: &FrameImage| {
                let mut coords = img.coords.clone();
                for (i, v) in coords.iter_mut().enumerate() {
                    *v = *v - m_set.head.center()[i];
                }
                FrameImage::new(coords, img.tail.clone())
            };
            let left = edge(c - r, sorted[from.a]);
            let right = edge(c + r, sorted[from.b]);
            let passed = match (&whole, left, right) {
                (Some(w), Some(l), Some(rt)) if failures.is_empty() => {
                    let rep = check_covering(n_set, m_set, &to_local(w), &to_local(&l), &to_local(&rt));
                    failures.extend(rep.failures.iter().cloned());
                    rep.passed()
                }
                _ => {
                    failures.push("edge or whole-set images unavailable".into());
                    false
                }
            };
            steps.push(CoveringStep { from, to, passed, failures });
        }
        let passed = steps.iter().all(|s| s.passed);
        out.push(PeriodResult { m, lp, steps, passed });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProofCertificate {
    pub job_text: String,
    pub tail_text: Option<String>,
    pub mode: Mode,
    pub full: bool,
    pub grid: Option<(usize, usize)>,
    pub strategy: Strategy,
    pub inclusions: Vec<InclusionResult>,
    pub periods: Vec<PeriodResult>,
    pub conclusion: Option<Conclusion>,
}

impl ProofCertificate {
    pub fn proven(&self) -> bool {
        !self.inclusions.is_empty() && self.inclusions.iter().all(InclusionResult::passed) && self.periods.iter().all(|p| p.passed)
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub full: bool,
    pub pieces: Option<usize>,
    pub depth: Option<usize>,
    /// Tail basis text; read from the job's tail file when absent.
    pub tail_text: Option<String>,
}

pub fn load_tail(job: &ProofJob, opts: &VerifyOptions) -> Result<String, DriverError> {
    if let Some(t) = &opts.tail_text {
        return Ok(t.clone());
    }
    let path = job.tail_path(opts.full).ok_or_else(|| DriverError::Precondition("DDE job names no tail file".into()))?;
    std::fs::read_to_string(&path).map_err(|e| DriverError::Precondition(format!("{}: {e}; run gencoords and prepare-tail first", path.display())))
}

/// Verify every inclusion of the job and, if all pass, the coverings for
/// the requested periods.
pub fn verify_job(job: &ProofJob, opts: &VerifyOptions) -> Result<ProofCertificate, DriverError> {
    if job.unverified {
        return Err(DriverError::Precondition("job is marked unverified (example configuration only)".into()));
    }
    let geom = Geometry::new(job)?;
    let cycle: Vec<usize> = job.cycle.iter().map(|n| geom.index(n).expect("checked at parse time")).collect();
    geom.check_disjoint(&cycle)?;
    // the Rössler section is the half plane y < 0 of x = 0
    if matches!(job.field, FieldSpec::Rossler { .. }) && job.section.coord == 0 && !(geom.section_hull(geom.ambient)[0].hi() < 0.0) {
        return Err(DriverError::Precondition("the ambient set leaves the half plane y < 0 of the section".into()));
    }
    let strategy = Strategy { pieces: opts.pieces.unwrap_or(job.pieces), depth: opts.depth.unwrap_or(job.depth) };
    let (engine, tail, tail_text, grid): (Box<dyn Engine>, Tail, Option<String>, Option<(usize, usize)>) = match job.mode {
        Mode::Ode => (Box::new(OdeEngine::new(job, &geom)?), Tail::empty(), None, None),
        Mode::Dde => {
            let text = load_tail(job, opts)?;
            let basis = TailBasis::from_text(&text)?;
            let want = job.grid_for(opts.full);
            if (basis.grid.p, basis.grid.n) != want {
                return Err(DriverError::Precondition(format!("tail basis is for p={}, n={}, job asks for p={}, n={}", basis.grid.p, basis.grid.n, want.0, want.1)));
            }
            let tail = Tail::new(basis.bounds());
            (Box::new(DdeEngine::new(job, &geom, basis)?), tail, Some(text), Some(want))
        }
    };
    let mut inclusions = vec![run_inclusion(engine.as_ref(), &geom, geom.ambient, geom.ambient, &tail, strategy)?];
    for (k, &s) in cycle.iter().enumerate() {
        let t = cycle[(k + 1) % cycle.len()];
        inclusions.push(run_inclusion(engine.as_ref(), &geom, s, t, &tail, strategy)?);
    }
    let all_pass = inclusions.iter().all(InclusionResult::passed);
    let periods = if all_pass && cycle.len() >= 2 {
        let list: Vec<u64> = if job.periods.is_empty() { (1..=12).collect() } else { job.periods.clone() };
        derive_coverings(&geom, &cycle, &inclusions, &tail, &list)?
    } else {
        Vec::new()
    };
    let mut cert = ProofCertificate {
        job_text: job.text.clone(),
        tail_text,
        mode: job.mode,
        full: opts.full,
        grid,
        strategy,
        inclusions,
        periods,
        conclusion: None,
    };
    if cert.proven() && job.cycle.len() >= 2 {
        cert.conclusion = Some(Conclusion { cycle: job.cycle.clone(), periods: cert.periods.iter().map(|p| p.m).collect() });
    }
    Ok(cert)
}

/// Iterate the tail boxes until the images of the ambient set fall inside
/// them; residuals beyond `cap` abort.
pub fn prepare_tail(job: &ProofJob, mut basis: TailBasis, strategy: Strategy, cap: f64, max_iter: usize, log: &mut dyn FnMut(String)) -> Result<TailBasis, DriverError> {
    let geom = Geometry::new(job)?;
    let (d, m) = (basis.d, basis.dim());
    for it in 0..max_iter {
        let engine = DdeEngine::new(job, &geom, basis.clone())?;
        let hull = image_hull(&engine, &geom, geom.ambient, strategy)?;
        let bounds = basis.bounds();
        let inside = bounds.iter().zip(&hull.tail).all(|(b, x)| b.encloses(x));
        let worst = hull.tail[..m - d].iter().map(Interval::mag).fold(0.0, f64::max);
        log(format!("iteration {it}: residual {worst:.3e}, tail {}", if inside { "closed" } else { "grows" }));
        if worst > cap || !(worst <= cap) {
            return Err(DriverError::Inconclusive(format!("tail residual {worst:e} exceeds cap {cap:e}; regenerate the basis")));
        }
        if inside {
            basis.r_star = basis.z.iter().map(Interval::mag).fold(0.0, f64::max);
            return Ok(basis);
        }
        let grow = |x: &Interval| {
            let w = 0.25 * x.width() + 1e-12 * (1.0 + x.mag());
            Interval::new(x.lo() - w, x.hi() + w)
        };
        basis.z = hull.tail[..m - d].iter().map(grow).collect();
        basis.xi = hull.tail[m - d..].chunks(d).map(|c| c.iter().map(grow).collect()).collect();
    }
    Err(DriverError::Inconclusive(format!("tail boxes did not settle in {max_iter} iterations")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pieces_cover_the_source_exactly() {
        let src = IVector(vec![Interval::new(-1.0, 2.0), Interval::new(-1.0, 1.0)]);
        let p = initial_pieces(&src, 7);
        assert_eq!(p.len(), 7);
        assert_eq!(p[0][0].lo(), -1.0);
        assert_eq!(p[6][0].hi(), 2.0);
        for w in p.windows(2) {
            assert_eq!(w[0][0].hi(), w[1][0].lo());
        }
        let (a, b) = split(&p[3]);
        assert_eq!(a[0].hi(), b[0].lo());
        assert_eq!(a[1], p[3][1]);
    }

    #[test]
    fn digest_sees_every_bit() {
        let a = [Interval::new(1.0, 2.0)];
        let b = [Interval::new(1.0, f64::from_bits(2f64.to_bits() + 1))];
        assert_ne!(digest(&a, &[]), digest(&b, &[]));
        assert_eq!(digest(&a, &b), digest(&a, &b));
    }
}
