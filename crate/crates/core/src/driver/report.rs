use std::fmt::Write as _;
use std::path::Path;

use crate::interval::{IVector, Interval};
use crate::sharkovskii::{find_nonrepeating_loop, Loop, OInterval, OrbitPattern};

use super::cert::ParsedCertificate;
use super::geometry::Geometry;
use super::DriverError;

/// `J_A, J_B, ...` for intervals between neighbouring points, `[a,b]` for
/// the rest.
pub fn interval_name(j: OInterval) -> String {
    if j.b == j.a + 1 && j.a < 26 {
        format!("J_{}", (b'A' + j.a as u8) as char)
    } else {
        format!("[{},{}]", j.a, j.b)
    }
}

pub fn loop_names(lp: &Loop) -> String {
    let mut parts: Vec<String> = lp.intervals.iter().map(|j| interval_name(*j)).collect();
    if let Some(first) = lp.intervals.first() {
        parts.push(interval_name(*first));
    }
    parts.join("->")
}

/// Orbit pattern of the job's cycle sets, ordered by the first section
/// coordinate of their centers.
pub fn cycle_pattern(geom: &Geometry, cycle: &[String]) -> Result<OrbitPattern, DriverError> {
    let pts: Vec<Interval> = cycle
        .iter()
        .map(|n| geom.index(n).map(|i| geom.centers[i][0]).ok_or_else(|| DriverError::Format(format!("unknown set {n}"))))
        .collect::<Result<_, _>>()?;
    OrbitPattern::from_cycle(&pts).map_err(|e| DriverError::Precondition(e.to_string()))
}

fn corners(geom: &Geometry, offset: &IVector, rect: [(f64, f64); 2]) -> Vec<(f64, f64)> {
    let c = &geom.centers[geom.ambient];
    let pts = [(rect[0].0, rect[1].0), (rect[0].1, rect[1].0), (rect[0].1, rect[1].1), (rect[0].0, rect[1].1), (rect[0].0, rect[1].0)];
    pts.iter()
        .map(|&(a, b)| {
            let rho = [a + offset[0].mid(), b + offset[1].mid()];
            let m = |i: usize| c[i].mid() + geom.frame[(i, 0)].mid() * rho[0] + geom.frame[(i, 1)].mid() * rho[1];
            (m(0), m(1))
        })
        .collect()
}

/// Human-readable tables, loops for `m_list` and, with `plot`, gnuplot data
/// blocks (section coordinates; one block per set outline or image box).
pub fn report(cert: &ParsedCertificate, base: &Path, m_list: &[u64], plot: bool) -> Result<String, DriverError> {
    let job = cert.job(base)?;
    let geom = Geometry::new(&job)?;
    let mut s = String::new();
    let _ = writeln!(s, "verdict: {}", if cert.proven { "proven" } else { "inconclusive" });
    let _ = writeln!(s, "strategy: {} pieces, depth {}", cert.strategy.pieces, cert.strategy.depth);
    let _ = writeln!(s, "{:<8} {:<8} {:>7} {:>7} {:>12} {:>26} {:>26}", "source", "target", "leaves", "passed", "min margin", "image rho1", "image rho2");
    for inc in &cert.inclusions {
        let mut hull: Option<Vec<Interval>> = None;
        let mut margin = f64::INFINITY;
        for p in inc.pieces.iter().filter(|p| p.passed) {
            margin = margin.min(p.margin.unwrap_or(f64::NEG_INFINITY));
            hull = Some(match hull {
                None => p.image.clone(),
                Some(h) => h.iter().zip(&p.image).map(|(a, b)| a.hull(b)).collect(),
            });
        }
        let show = |k: usize| hull.as_ref().and_then(|h| h.get(k)).map(|v| format!("[{:.6e},{:.6e}]", v.lo(), v.hi())).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:<8} {:<8} {:>7} {:>7} {:>12.4e} {:>26} {:>26}",
            inc.source,
            inc.target,
            inc.pieces.len(),
            if inc.passed { "yes" } else { "NO" },
            margin,
            show(0),
            show(1)
        );
        for p in inc.pieces.iter().filter(|p| !p.passed) {
            let _ = writeln!(s, "  FAILED piece {} rho1=[{:e},{:e}]: {}", p.path, p.rho1.lo(), p.rho1.hi(), p.detail);
        }
    }
    for (m, passed, lp) in &cert.periods {
        let _ = writeln!(s, "coverings for period {m}: {} {lp}", if *passed { "verified" } else { "FAILED" });
    }
    if let Some(c) = &cert.conclusion {
        let _ = writeln!(s, "conclusion: {c}");
    }
    if !m_list.is_empty() && job.cycle.len() >= 2 {
        let pattern = cycle_pattern(&geom, &job.cycle)?;
        for &m in m_list {
            match find_nonrepeating_loop(&pattern, m) {
                Ok(lp) => {
                    let _ = writeln!(s, "loop m={m}: {}  {}", loop_names(&lp), lp.to_json());
                }
                Err(e) => {
                    let _ = writeln!(s, "loop m={m}: {e}");
                }
            }
        }
    }
    if plot && geom.frame.rows() == 2 {
        let _ = writeln!(s, "\n# gnuplot data: columns y z; blocks separated by two blank lines");
        for inc in &cert.inclusions {
            let (Some(si), Some(ti)) = (geom.index(&inc.source), geom.index(&inc.target)) else { continue };
            for (label, i) in [("source", si), ("target", ti)] {
                let r = &geom.radii[i];
                let _ = writeln!(s, "# {label} {}", geom.names[i]);
                for (y, z) in corners(&geom, &geom.offsets[i], [(-r[0].mid(), r[0].mid()), (-r[1].mid(), r[1].mid())]) {
                    let _ = writeln!(s, "{y:.9e} {z:.9e}");
                }
                s.push_str("\n\n");
            }
            let _ = writeln!(s, "# images {} -> {}", inc.source, inc.target);
            for p in inc.pieces.iter().filter(|p| p.image.len() >= 2) {
                for (y, z) in corners(&geom, &geom.offsets[ti], [(p.image[0].lo(), p.image[0].hi()), (p.image[1].lo(), p.image[1].hi())]) {
                    let _ = writeln!(s, "{y:.9e} {z:.9e}");
                }
                s.push('\n');
            }
            s.push('\n');
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_of_length_four_by_name() {
        // points in orbit order, largest -> middle -> smallest
        let orbit = [-3.46642, -6.26401, -9.74889].map(Interval::point);
        let p = OrbitPattern::from_cycle(&orbit).unwrap();
        let lp = find_nonrepeating_loop(&p, 4).unwrap();
        assert_eq!(loop_names(&lp), "J_B->J_A->J_A->J_A->J_B");
        assert_eq!(loop_names(&find_nonrepeating_loop(&p, 1).unwrap()), "J_A->J_A");
    }
}
