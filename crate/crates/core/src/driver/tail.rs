use crate::dde::reference::{integrate, InitialJet};
use crate::dde::GridSpec;
use crate::flow::PolyField;
use crate::interval::{format_hex, parse_hex, IMatrix, IVector, Interval};

use super::job::ProofJob;
use super::DriverError;

/// Center segment `ū0` and unstable segment `m̄1` in finite-part coordinates,
/// plus the tail boxes `Z` (jet rows, relative to `ū0 + m̄1·ρ1`) and `Ξ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailBasis {
    pub grid: GridSpec,
    pub d: usize,
    pub u0: Vec<f64>,
    pub m1: Vec<f64>,
    pub z: Vec<Interval>,
    pub xi: Vec<IVector>,
    /// Largest residual of the sampled segments off `ū0 + span(m̄1)`.
    pub r_star: f64,
}

impl TailBasis {
    pub fn dim(&self) -> usize {
        self.grid.finite_dim(self.d)
    }

    /// Target tail bounds: `Z` followed by the flattened `Ξ`.
    pub fn bounds(&self) -> Vec<Interval> {
        let mut b = self.z.clone();
        for x in &self.xi {
            b.extend(x.iter().copied());
        }
        b
    }

    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let pts = |v: &[f64]| v.iter().map(|x| format_hex(*x)).collect::<Vec<_>>().join(" ");
        let ivs = |v: &[Interval]| v.iter().map(Interval::to_hex).collect::<Vec<_>>().join(" ");
        let mut s = format!("tailbasis {} {} {} {}\n", self.d, g.p, g.n, format_hex(g.tau));
        s += &format!("u0 {}\nm1 {}\nz {}\n", pts(&self.u0), pts(&self.m1), ivs(&self.z));
        for (i, x) in self.xi.iter().enumerate() {
            s += &format!("xi {} {}\n", i + 1, ivs(x));
        }
        s += &format!("rstar {}\n", format_hex(self.r_star));
        s
    }

    pub fn from_text(text: &str) -> Result<Self, DriverError> {
        let err = |m: &str| DriverError::Format(format!("tail basis: {m}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head: Vec<&str> = lines.next().ok_or_else(|| err("empty"))?.split_whitespace().collect();
        if head.len() != 5 || head[0] != "tailbasis" {
            return Err(err("bad header"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| err("bad integer"));
        let (d, p, n) = (num(head[1])?, num(head[2])?, num(head[3])?);
        let tau = parse_hex(head[4]).map_err(|_| err("bad delay"))?;
        let grid = GridSpec::new(p, n, tau).map_err(|e| err(&e.to_string()))?;
        let m = grid.finite_dim(d);
        let mut basis = TailBasis { grid, d, u0: vec![], m1: vec![], z: vec![], xi: vec![], r_star: 0.0 };
        for line in lines {
            let w: Vec<&str> = line.split_whitespace().collect();
            let hexes = |ws: &[&str]| ws.iter().map(|s| parse_hex(s)).collect::<Result<Vec<_>, _>>().map_err(|_| err("bad float"));
            let ints = |ws: &[&str]| ws.iter().map(|s| Interval::from_hex(s)).collect::<Result<Vec<_>, _>>().map_err(|_| err("bad interval"));
            match w[0] {
                "u0" => basis.u0 = hexes(&w[1..])?,
                "m1" => basis.m1 = hexes(&w[1..])?,
                "z" => basis.z = ints(&w[1..])?,
                "xi" => basis.xi.push(IVector(ints(&w[2..])?)),
                "rstar" => basis.r_star = hexes(&w[1..2])?[0],
                other => return Err(err(&format!("unknown record `{other}`"))),
            }
        }
        if basis.u0.len() != m || basis.m1.len() != m || basis.z.len() != m - d || basis.xi.len() != p || basis.xi.iter().any(|x| x.len() != d) {
            return Err(err("dimensions do not match the header"));
        }
        Ok(basis)
    }

    /// Residual coordinates `j - ū0 - m̄1·ρ1` of a point segment.
    pub fn residual(&self, seg: &[f64], rho1: f64) -> Vec<f64> {
        (self.d..self.dim()).map(|r| seg[r] - self.u0[r] - self.m1[r] * rho1).collect()
    }
}

/// One sampled section segment: finite part on the grid aligned with the
/// crossing time, and its remainder coefficients.
#[derive(Clone, Debug)]
pub struct Segment {
    pub finite: Vec<f64>,
    pub top: Vec<Vec<f64>>,
}

/// Section segments of a floating-point trajectory started from the
/// constant segment at `seed`; the first `skip` returns are discarded.
pub fn sample_segments(
    f: &PolyField,
    g: &PolyField,
    eps: Interval,
    grid: GridSpec,
    coord: usize,
    seed: &[f64],
    count: usize,
    skip: usize,
) -> Result<Vec<Segment>, DriverError> {
    let field = PolyField::with_delay(f, g, eps).map_err(|e| DriverError::Precondition(e.to_string()))?;
    let d = seed.len();
    let seed_v = seed.to_vec();
    let init = move |_: f64, order: usize| {
        let mut j = vec![vec![0.0; d]; order + 1];
        j[0] = seed_v.clone();
        j
    };
    let init: &InitialJet = &init;
    // returns come roughly every 6 time units
    let t_end = 7.0 * (count + skip + 2) as f64;
    let steps = grid.p * 32;
    let traj = integrate(&field, grid.tau, steps, init, t_end);
    let after = ((grid.n + 2) as f64) * grid.tau;
    let crossings = traj.crossings(coord, 0.0, after);
    if crossings.len() < count + skip {
        return Err(DriverError::Precondition(format!("only {} section returns found, {} needed", crossings.len(), count + skip)));
    }
    let (n, p, h) = (grid.n, grid.p, grid.h);
    let segs = crossings[skip..skip + count]
        .iter()
        .map(|(t, head)| {
            let mut finite = head.clone();
            let mut top = Vec::with_capacity(p);
            for i in 1..=p {
                let jet = traj.jet(t - i as f64 * h, n + 1);
                for c in &jet[..=n] {
                    finite.extend_from_slice(c);
                }
                top.push(jet[n + 1].clone());
            }
            Segment { finite, top }
        })
        .collect();
    Ok(segs)
}

/// Non-rigorous tail basis from sampled segments (the rigorous tail boxes
/// are produced later from verified images).
///
/// `l` and `r` are the samples with extreme `π_y` head; `v' = (r - l) / π_y(r - l)`
/// gives the unstable segment, with its head replaced by `m1`; the sample
/// nearest `u0` gives the center segment, with its head replaced by `u0`.
pub fn basis_from_segments(grid: GridSpec, d: usize, segs: &[Segment], u0: &[f64], frame: &IMatrix, ycoord: usize, section_coord: usize) -> Result<TailBasis, DriverError> {
    if segs.len() < 2 {
        return Err(DriverError::Precondition("at least two segments are needed".into()));
    }
    let by_y = |a: &&Segment, b: &&Segment| a.finite[ycoord].total_cmp(&b.finite[ycoord]);
    let l = segs.iter().min_by(by_y).unwrap();
    let r = segs.iter().max_by(by_y).unwrap();
    let dy = r.finite[ycoord] - l.finite[ycoord];
    if dy == 0.0 {
        return Err(DriverError::Precondition("extreme segments coincide".into()));
    }
    let vprime: Vec<f64> = r.finite.iter().zip(&l.finite).map(|(a, b)| (a - b) / dy).collect();
    let embed = |v: &[f64]| -> Vec<f64> {
        let mut x = v.to_vec();
        x.insert(section_coord, 0.0);
        x
    };
    let head_u0 = embed(u0);
    let m1_head = embed(&frame.column(0).mid());
    let py_m1 = m1_head[ycoord];
    let mut m1: Vec<f64> = vprime.iter().map(|v| py_m1 * v).collect();
    m1[..d].copy_from_slice(&m1_head);
    let dist = |s: &Segment| s.finite[..d].iter().zip(&head_u0).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    let near = segs.iter().min_by(|a, b| dist(a).total_cmp(&dist(b))).unwrap();
    let mut c = near.finite.clone();
    c[..d].copy_from_slice(&head_u0);
    let inv = frame.inverse().map_err(|e| DriverError::Precondition(format!("frame: {e}")))?.mid_matrix();
    let mut basis = TailBasis { grid, d, u0: c, m1, z: vec![], xi: vec![], r_star: 0.0 };
    let m = basis.dim();
    let mut lo = vec![f64::INFINITY; m - d];
    let mut hi = vec![f64::NEG_INFINITY; m - d];
    let mut xlo = vec![vec![f64::INFINITY; d]; grid.p];
    let mut xhi = vec![vec![f64::NEG_INFINITY; d]; grid.p];
    for s in segs {
        let rho1 = frame_rho1(&inv, &s.finite[..d], &head_u0, section_coord);
        for (k, v) in basis.residual(&s.finite, rho1).into_iter().enumerate() {
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
            basis.r_star = basis.r_star.max(v.abs());
        }
        for (i, t) in s.top.iter().enumerate() {
            for j in 0..d {
                xlo[i][j] = xlo[i][j].min(t[j]);
                xhi[i][j] = xhi[i][j].max(t[j]);
            }
        }
    }
    let widen = |a: f64, b: f64| {
        let w = (b - a).max(1e-9);
        Interval::new(a - w, b + w)
    };
    basis.z = lo.iter().zip(&hi).map(|(a, b)| widen(*a, *b)).collect();
    basis.xi = xlo.iter().zip(&xhi).map(|(a, b)| a.iter().zip(b).map(|(x, y)| widen(*x, *y)).collect()).collect();
    Ok(basis)
}

/// `ρ1 = (M⁻¹ (π_{section} head - u0))_0` in floating point.
pub fn frame_rho1(inv: &IMatrix, head: &[f64], head_u0: &[f64], section_coord: usize) -> f64 {
    let diff: Vec<f64> = head.iter().zip(head_u0).enumerate().filter(|(i, _)| *i != section_coord).map(|(_, (a, b))| a - b).collect();
    inv.row(0).iter().zip(&diff).map(|(m, v)| m.mid() * v).sum()
}

/// Tail basis for `job` at the given resolution, from a long trajectory.
pub fn gencoords(job: &ProofJob, full: bool, count: usize, seed: &[f64]) -> Result<TailBasis, DriverError> {
    let f = job.field.poly()?;
    let g = job.delay_field.as_ref().map(|s| s.poly()).transpose()?.unwrap_or_else(|| f.clone());
    let (p, n) = job.grid_for(full);
    let grid = GridSpec::new(p, n, job.tau).map_err(|e| DriverError::Precondition(e.to_string()))?;
    let segs = sample_segments(&f, &g, job.eps, grid, job.section.coord, seed, count, 5)?;
    let amb = job.set(&job.ambient).expect("checked at parse time");
    let ycoord = if job.section.coord == 0 { 1 } else { 0 };
    basis_from_segments(grid, f.dim(), &segs, &amb.center.mid(), &job.frame, ycoord, job.section.coord)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(finite: Vec<f64>, d: usize, p: usize) -> Segment {
        Segment { finite, top: vec![vec![0.0; d]; p] }
    }

    #[test]
    fn two_segments_give_their_difference() {
        let grid = GridSpec::new(1, 0, 1.0).unwrap();
        // d = 2 (section coordinate 0), one cell of order 0
        let l = seg(vec![0.0, 1.0, 5.0, 7.0], 2, 1);
        let r = seg(vec![0.0, 3.0, 9.0, 8.0], 2, 1);
        let frame = IMatrix::identity(1);
        let b = basis_from_segments(grid, 2, &[l, r], &[1.5], &frame, 1, 0).unwrap();
        assert_eq!(b.u0[..2], [0.0, 1.5]);
        // nearest sample is l, jets kept
        assert_eq!(b.u0[2..], [5.0, 7.0]);
        assert_eq!(b.m1, vec![0.0, 1.0, 2.0, 0.5]);
    }

    #[test]
    fn text_round_trip() {
        let grid = GridSpec::new(2, 1, 0.5).unwrap();
        let m = grid.finite_dim(1);
        let b = TailBasis {
            grid,
            d: 1,
            u0: (0..m).map(|i| i as f64 * 0.1).collect(),
            m1: vec![1.0 / 3.0; m],
            z: vec![Interval::new(-1e-3, 2e-3); m - 1],
            xi: vec![IVector(vec![Interval::new(-0.5, 0.25)]); 2],
            r_star: 1e-4,
        };
        assert_eq!(TailBasis::from_text(&b.to_text()).unwrap(), b);
        assert!(TailBasis::from_text("tailbasis 1 2 1 0x1p-1\nu0 0x0p+0\n").is_err());
    }

    #[test]
    fn rossler_segments_sit_near_the_span() {
        let f = PolyField::rossler(Interval::point(5.25), Interval::point(0.2));
        let grid = GridSpec::new(4, 1, 0.5).unwrap();
        let segs = sample_segments(&f, &f, Interval::ZERO, grid, 0, &[0.0, -5.0, 0.03], 100, 5).unwrap();
        assert_eq!(segs.len(), 100);
        let frame = IMatrix::from_vec(2, 2, vec![Interval::point(-1.0), Interval::ZERO, Interval::ZERO, Interval::point(-1.0)]);
        let b = basis_from_segments(grid, 3, &segs, &[-6.38401, 0.0327544], &frame, 1, 0).unwrap();
        assert!(b.r_star < 0.15, "{}", b.r_star);
        assert_eq!(b.u0[1], -6.38401);
    }
}
