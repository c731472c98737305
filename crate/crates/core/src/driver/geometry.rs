use crate::hset::{HSet, HSetWithTail, Tail};
use crate::interval::{IMatrix, IVector, Interval};

use super::job::ProofJob;
use super::DriverError;

/// All sets of a job expressed as boxes in the frame coordinates of the
/// ambient set (the frame is shared, so every set is a box there).
#[derive(Clone, Debug)]
pub struct Geometry {
    pub names: Vec<String>,
    pub centers: Vec<IVector>,
    pub radii: Vec<IVector>,
    /// `M⁻¹ (c_X - c_G)`.
    pub offsets: Vec<IVector>,
    pub frame: IMatrix,
    pub inverse: IMatrix,
    pub ambient: usize,
}

fn sym(r: Interval) -> Interval {
    Interval::new(-r.hi(), r.hi())
}

impl Geometry {
    pub fn new(job: &ProofJob) -> Result<Self, DriverError> {
        let inverse = job.frame.inverse().map_err(|e| DriverError::Precondition(format!("frame is not invertible: {e}")))?;
        let ambient = job.sets.iter().position(|s| s.name == job.ambient).expect("checked at parse time");
        let cg = &job.sets[ambient].center;
        Ok(Geometry {
            names: job.sets.iter().map(|s| s.name.clone()).collect(),
            centers: job.sets.iter().map(|s| s.center.clone()).collect(),
            radii: job.sets.iter().map(|s| s.radii.clone()).collect(),
            offsets: job.sets.iter().map(|s| inverse.mul_vec(&s.center.sub(cg))).collect(),
            frame: job.frame.clone(),
            inverse,
            ambient,
        })
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Enclosure of set `i` in ambient frame coordinates.
    pub fn ambient_box(&self, i: usize) -> IVector {
        self.offsets[i].iter().zip(self.radii[i].iter()).map(|(o, r)| *o + sym(*r)).collect()
    }

    /// Box containing the part of set `i` inside the ambient set; used as
    /// the source of an inclusion.
    pub fn source_box(&self, i: usize) -> Option<IVector> {
        let g = self.ambient_box(self.ambient);
        if i == self.ambient {
            return Some(g);
        }
        self.ambient_box(i).intersect(&g)
    }

    /// The h-set `i` as an inclusion target, with the given tail bounds.
    pub fn target(&self, i: usize, tail: Tail) -> Result<HSetWithTail, DriverError> {
        let head = HSet::new(self.centers[i].clone(), self.frame.clone(), self.radii[i].clone()).map_err(|e| DriverError::Precondition(e.to_string()))?;
        Ok(HSetWithTail::new(head, tail))
    }

    /// Enclosure of set `i` in section coordinates.
    pub fn section_hull(&self, i: usize) -> IVector {
        let r: IVector = self.radii[i].iter().map(|r| sym(*r)).collect();
        self.centers[i].iter().zip(self.frame.mul_vec(&r).iter()).map(|(c, v)| *c + *v).collect()
    }

    /// Ambient frame coordinates to the frame coordinates of set `i`.
    pub fn to_set(&self, i: usize, coords: &IVector) -> IVector {
        coords.sub(&self.offsets[i])
    }

    /// The cycle sets must have pairwise disjoint unstable ranges.
    pub fn check_disjoint(&self, cycle: &[usize]) -> Result<(), DriverError> {
        let mut spans: Vec<(usize, Interval)> = cycle.iter().map(|&i| (i, self.ambient_box(i)[0])).collect();
        spans.sort_by(|a, b| a.1.mid().total_cmp(&b.1.mid()));
        for w in spans.windows(2) {
            if !(w[0].1.hi() < w[1].1.lo()) {
                return Err(DriverError::Precondition(format!(
                    "sets {} and {} overlap in the unstable coordinate ({:?} vs {:?})",
                    self.names[w[0].0], self.names[w[1].0], w[0].1, w[1].1
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn job(extra: &str) -> ProofJob {
        let text = format!(
            "frame -1 0.000656767 -0.000656767 -1\nset G center=-6.38401,0.0327544 radii=3.63687,0.0004\n\
             set C1 center=-3.46642,0.0346316 radii=0.072,0.00048\nset C2 center=-6.26401,0.0326544 radii=0.162,0.00066\n{extra}"
        );
        ProofJob::parse(&text, Path::new(".")).unwrap()
    }

    #[test]
    fn offsets_follow_the_frame() {
        let g = Geometry::new(&job("")).unwrap();
        let o = &g.offsets[1];
        assert!((o[0].mid() + 2.91759).abs() < 1e-2, "{o:?}");
        let s = g.source_box(1).unwrap();
        // the stable range of C1 covers that of G, so the source keeps G's
        assert!(s[1].contains(-0.0004) && s[1].contains(0.0004));
        assert!(s[0].width() < 0.145);
        let h = g.section_hull(0);
        assert!(h[0].contains(-10.0) && h[0].contains(-2.75) && h[0].hi() < 0.0, "{h:?}");
    }

    #[test]
    fn overlapping_cycle_sets_are_rejected() {
        let g = Geometry::new(&job("")).unwrap();
        assert!(g.check_disjoint(&[1, 2]).is_ok());
        let wide = job("set C3 center=-3.46642,0.0346316 radii=7.2,0.00048\n");
        let g = Geometry::new(&wide).unwrap();
        assert!(matches!(g.check_disjoint(&[1, 2, 3]), Err(DriverError::Precondition(_))));
    }
}
