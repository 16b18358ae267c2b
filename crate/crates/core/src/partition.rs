//! Partitions of `[a, b]` in a time scale and the δ-property.
//!
//! A partition is in `P_δ` when each gap either has length at most δ or is a
//! single jump of the scale (`rho(t_i) = t_{i-1}`). [`make_delta_partition`]
//! builds one by meshing every dense run with steps of at most δ and keeping
//! every jump as its own cell.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scale::{Segment, TimeScale};

/// Relative slack allowed when comparing a gap against δ.
const DELTA_SLACK: f64 = 1e-9;

/// Strictly increasing scale points `a = t_0 < ... < t_n = b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Partition {
    points: Vec<f64>,
}

impl Partition {
    /// Validates `points` against the scale; every point is replaced by its
    /// canonical representative.
    pub fn new(scale: &TimeScale, points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPartition("need at least two points".into()));
        }
        let points = points
            .into_iter()
            .map(|t| scale.snap(t))
            .collect::<Result<Vec<_>>>()?;
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition(format!(
                "points must increase strictly ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn start(&self) -> f64 {
        self.points[0]
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Consecutive cells `(t_{i-1}, t_i)`.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest gap that is not a single jump of the scale.
    pub fn dense_mesh(&self, scale: &TimeScale) -> Result<f64> {
        let mut mesh = 0.0_f64;
        for (lo, hi) in self.cells() {
            if !is_jump(scale, lo, hi)? {
                mesh = mesh.max(hi - lo);
            }
        }
        Ok(mesh)
    }
}

fn is_jump(scale: &TimeScale, lo: f64, hi: f64) -> Result<bool> {
    Ok(scale.rho(hi)? == lo)
}

/// Builds a partition of `[a, b]` with the δ-property.
///
/// Dense runs are meshed with steps of exactly δ plus a shorter final step;
/// each jump contributes its two endpoints.
pub fn make_delta_partition(scale: &TimeScale, a: f64, b: f64, delta: f64) -> Result<Partition> {
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDelta(delta));
    }
    let a = scale.snap(a)?;
    let b = scale.snap(b)?;
    if a >= b {
        return Err(Error::ReversedBounds { a, b });
    }
    let mut points = vec![a];
    for seg in scale.segments(a, b)? {
        match seg? {
            Segment::Jump { at, next, .. } => {
                debug_assert_eq!(points.last(), Some(&at));
                points.push(next);
            }
            Segment::DenseRun { lo, hi } => {
                let tol = scale.snap_tolerance().max(delta * DELTA_SLACK);
                let mut i = 1u64;
                loop {
                    let t = lo + i as f64 * delta;
                    if t >= hi - tol {
                        break;
                    }
                    points.push(t);
                    i += 1;
                }
                points.push(hi);
            }
        }
    }
    Ok(Partition { points })
}

/// True iff every gap is at most δ or is a single jump of the scale.
pub fn verify_delta_property(scale: &TimeScale, p: &Partition, delta: f64) -> bool {
    let slack = delta * (1.0 + DELTA_SLACK);
    p.cells().all(|(lo, hi)| {
        hi - lo <= slack || matches!(is_jump(scale, lo, hi), Ok(true))
    })
}

/// Splits every cell that contains scale points in its interior.
///
/// A cell is split at its midpoint when the midpoint lies in the scale, and
/// otherwise at the nearest scale point below (or above) it. Jump cells are
/// left alone since their open interior misses the scale.
pub fn refine(scale: &TimeScale, p: &Partition) -> Result<Partition> {
    let mut points = Vec::with_capacity(2 * p.len());
    points.push(p.start());
    for (lo, hi) in p.cells() {
        if scale.sigma(lo)? < hi {
            let mid = 0.5 * (lo + hi);
            let below = scale.floor(mid)?;
            let split = if below > lo { below } else { scale.ceil(mid)? };
            if split > lo && split < hi {
                points.push(split);
            }
        }
        points.push(hi);
    }
    Ok(Partition { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx_points(p: &Partition, expect: &[f64]) {
        assert_eq!(p.len(), expect.len(), "{:?} vs {:?}", p.points(), expect);
        for (x, y) in p.points().iter().zip(expect) {
            assert!((x - y).abs() < 1e-12, "{:?} vs {:?}", p.points(), expect);
        }
    }

    #[test]
    fn delta_partitions() {
        let r = TimeScale::reals(0.0);
        approx_points(&make_delta_partition(&r, 0.0, 1.0, 0.5).unwrap(), &[0.0, 0.5, 1.0]);

        let z = TimeScale::integers(0.0);
        let p = make_delta_partition(&z, 0.0, 3.0, 0.5).unwrap();
        approx_points(&p, &[0.0, 1.0, 2.0, 3.0]);
        assert!(verify_delta_property(&z, &p, 0.5));

        let h = TimeScale::hybrid();
        let p = make_delta_partition(&h, 0.0, 3.0, 0.4).unwrap();
        approx_points(&p, &[0.0, 0.4, 0.8, 1.0, 2.0, 2.4, 2.8, 3.0]);
        assert!(verify_delta_property(&h, &p, 0.4));
        assert_eq!(h.rho(2.0).unwrap(), 1.0);
    }

    #[test]
    fn delta_partition_errors() {
        let r = TimeScale::reals(0.0);
        assert_eq!(
            make_delta_partition(&r, 0.0, 1.0, 0.0),
            Err(Error::NonPositiveDelta(0.0))
        );
        assert!(make_delta_partition(&r, 1.0, 1.0, 0.1).is_err());
        assert!(make_delta_partition(&TimeScale::hybrid(), 0.0, 1.5, 0.1).is_err());
    }

    #[test]
    fn delta_property_checks() {
        let z = TimeScale::integers(0.0);
        let p = Partition::new(&z, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(verify_delta_property(&z, &p, 0.5));
        let p = Partition::new(&z, vec![0.0, 2.0, 3.0]).unwrap();
        assert!(!verify_delta_property(&z, &p, 0.5));

        let r = TimeScale::reals(0.0);
        let p = Partition::new(&r, vec![0.0, 0.6, 1.0]).unwrap();
        assert!(!verify_delta_property(&r, &p, 0.5));
        assert!(verify_delta_property(&r, &p, 0.6));
    }

    #[test]
    fn partition_validation() {
        let z = TimeScale::integers(0.0);
        assert!(Partition::new(&z, vec![0.0, 0.5]).is_err());
        assert!(Partition::new(&z, vec![2.0, 1.0]).is_err());
        assert!(Partition::new(&z, vec![1.0]).is_err());
    }

    #[test]
    fn refinement() {
        let r = TimeScale::reals(0.0);
        let p = Partition::new(&r, vec![0.0, 1.0]).unwrap();
        approx_points(&refine(&r, &p).unwrap(), &[0.0, 0.5, 1.0]);

        let z = TimeScale::integers(0.0);
        let p = Partition::new(&z, vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(refine(&z, &p).unwrap(), p);
        let p = Partition::new(&z, vec![0.0, 4.0]).unwrap();
        approx_points(&refine(&z, &p).unwrap(), &[0.0, 2.0, 4.0]);

        let h = TimeScale::hybrid();
        let p = Partition::new(&h, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        approx_points(&refine(&h, &p).unwrap(), &[0.0, 0.5, 1.0, 2.0, 2.5, 3.0]);

        // a cell spanning a gap of the scale is split at a scale point
        let p = Partition::new(&h, vec![0.0, 3.0]).unwrap();
        approx_points(&refine(&h, &p).unwrap(), &[0.0, 1.0, 3.0]);
    }

    #[test]
    fn refinement_halves_dense_mesh() {
        let h = TimeScale::hybrid();
        let mut p = make_delta_partition(&h, 0.0, 7.0, 0.3).unwrap();
        let initial = p.dense_mesh(&h).unwrap();
        for k in 1..=5 {
            p = refine(&h, &p).unwrap();
            let mesh = p.dense_mesh(&h).unwrap();
            assert!(mesh <= initial / f64::powi(2.0, k) + 1e-12);
        }
    }
}
