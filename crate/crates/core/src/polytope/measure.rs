//! Monte-Carlo volume of polytopes, unions and differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{HPolytope, PolytopeError, RegionDifference, RegionUnion};
use crate::scalar::Scalar;

/// Fixed number of sample streams; results depend on the seed and this
/// count only, not on the thread pool.
pub const PARTITIONS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, PolytopeError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(PolytopeError::DegenerateBox(format!("{} lower vs {} upper bounds", lower.len(), upper.len())));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(PolytopeError::DegenerateBox(format!("axis {i}: [{lo}, {hi}]")));
            }
        }
        Ok(BoundingBox { lower, upper })
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| hi - lo).product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureEstimate {
    pub value: f64,
    pub std_error: f64,
    pub hits: u64,
    pub samples: u64,
}

/// Anything `mc_measure` can sample.
#[derive(Debug, Clone, Copy)]
pub enum MeasureTarget<'a, S> {
    Polytope(&'a HPolytope<S>),
    Union(&'a RegionUnion<S>),
    Difference(&'a RegionDifference<S>),
}

impl<'a, S> From<&'a HPolytope<S>> for MeasureTarget<'a, S> {
    fn from(p: &'a HPolytope<S>) -> Self {
        MeasureTarget::Polytope(p)
    }
}

impl<'a, S> From<&'a RegionUnion<S>> for MeasureTarget<'a, S> {
    fn from(u: &'a RegionUnion<S>) -> Self {
        MeasureTarget::Union(u)
    }
}

impl<'a, S> From<&'a RegionDifference<S>> for MeasureTarget<'a, S> {
    fn from(d: &'a RegionDifference<S>) -> Self {
        MeasureTarget::Difference(d)
    }
}

impl<S: Scalar> MeasureTarget<'_, S> {
    fn dim(&self) -> usize {
        match self {
            MeasureTarget::Polytope(p) => p.dim(),
            MeasureTarget::Union(u) => u.labels().len(),
            MeasureTarget::Difference(d) => d.labels().len(),
        }
    }

    /// Members whose union encloses the target.
    fn outer_members(&self) -> Vec<&HPolytope<S>> {
        match self {
            MeasureTarget::Polytope(p) => vec![*p],
            MeasureTarget::Union(u) => u.members().iter().collect(),
            MeasureTarget::Difference(d) => d.minuend.members().iter().collect(),
        }
    }
}

enum FloatTarget {
    Union(Vec<HPolytope<f64>>),
    Difference(Vec<HPolytope<f64>>, Vec<HPolytope<f64>>),
}

impl FloatTarget {
    fn contains(&self, p: &[f64]) -> bool {
        match self {
            FloatTarget::Union(ms) => ms.iter().any(|m| m.contains(p)),
            FloatTarget::Difference(plus, minus) => {
                plus.iter().any(|m| m.contains(p)) && !minus.iter().any(|m| m.contains(p))
            }
        }
    }
}

/// Smallest axis box around the target's enclosing members.
pub fn bounding_box<S: Scalar>(target: MeasureTarget<'_, S>) -> Result<BoundingBox, PolytopeError> {
    let n = target.dim();
    let mut lower = vec![f64::INFINITY; n];
    let mut upper = vec![f64::NEG_INFINITY; n];
    for m in target.outer_members() {
        let ext = match m.extents() {
            Ok(e) => e,
            Err(PolytopeError::Empty) => continue,
            Err(e) => return Err(e),
        };
        for (j, (lo, hi)) in ext.iter().enumerate() {
            lower[j] = lower[j].min(lo.to_f64_lossy());
            upper[j] = upper[j].max(hi.to_f64_lossy());
        }
    }
    BoundingBox::new(lower, upper)
}

/// Hit-ratio volume estimate from `samples` uniform points in `bbox`.
pub fn mc_measure<S: Scalar>(
    target: MeasureTarget<'_, S>,
    bbox: &BoundingBox,
    samples: u64,
    seed: u64,
) -> Result<MeasureEstimate, PolytopeError> {
    let n = target.dim();
    if bbox.lower.len() != n {
        return Err(PolytopeError::DimensionMismatch(format!("box has {} axes, region has {n}", bbox.lower.len())));
    }
    let bbox = BoundingBox::new(bbox.lower.clone(), bbox.upper.clone())?;
    if samples == 0 {
        return Err(PolytopeError::DegenerateBox("zero samples".into()));
    }
    for m in target.outer_members() {
        let ext = match m.extents() {
            Ok(e) => e,
            Err(PolytopeError::Empty) => continue,
            Err(e) => return Err(e),
        };
        for (j, (lo, hi)) in ext.iter().enumerate() {
            let slack = crate::scalar::FEAS_TOL;
            if lo.to_f64_lossy() < bbox.lower[j] - slack || hi.to_f64_lossy() > bbox.upper[j] + slack {
                return Err(PolytopeError::BoxTooSmall(m.labels()[j].clone()));
            }
        }
    }
    let float = match target {
        MeasureTarget::Polytope(p) => FloatTarget::Union(vec![p.convert()]),
        MeasureTarget::Union(u) => FloatTarget::Union(u.members().iter().map(HPolytope::convert).collect()),
        MeasureTarget::Difference(d) => FloatTarget::Difference(
            d.minuend.members().iter().map(HPolytope::convert).collect(),
            d.subtrahend.members().iter().map(HPolytope::convert).collect(),
        ),
    };

    let per = samples / PARTITIONS as u64;
    let extra = samples % PARTITIONS as u64;
    let hits: u64 = (0..PARTITIONS)
        .into_par_iter()
        .map(|part| {
            let count = per + u64::from((part as u64) < extra);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(part as u64);
            let mut point = vec![0.0; n];
            let mut hits = 0u64;
            for _ in 0..count {
                for (j, x) in point.iter_mut().enumerate() {
                    *x = bbox.lower[j] + (bbox.upper[j] - bbox.lower[j]) * rng.random::<f64>();
                }
                if float.contains(&point) {
                    hits += 1;
                }
            }
            hits
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();

    let ratio = hits as f64 / samples as f64;
    let volume = bbox.volume();
    Ok(MeasureEstimate {
        value: volume * ratio,
        std_error: volume * (ratio * (1.0 - ratio) / samples as f64).sqrt(),
        hits,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{area_2d, RegionDifference, RegionUnion};
    use super::*;

    #[test]
    fn hexagon_estimate_brackets_shoelace() {
        let h = hexagon();
        let bbox = bounding_box((&h).into()).unwrap();
        assert_eq!(bbox, BoundingBox { lower: vec![-3.0, -4.0], upper: vec![3.0, 4.0] });
        let est = mc_measure((&h).into(), &bbox, 200_000, 7).unwrap();
        let exact = area_2d(&h).unwrap().to_f64_lossy();
        assert!((est.value - exact).abs() <= 3.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn reproducible_under_seed() {
        let h = hexagon();
        let bbox = bounding_box((&h).into()).unwrap();
        let a = mc_measure((&h).into(), &bbox, 50_001, 42).unwrap();
        let b = mc_measure((&h).into(), &bbox, 50_001, 42).unwrap();
        let c = mc_measure((&h).into(), &bbox, 50_001, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.hits, c.hits);
    }

    #[test]
    fn self_difference_is_empty() {
        let u = RegionUnion::single(hexagon());
        let d = RegionDifference::new(u.clone(), u).unwrap();
        let bbox = bounding_box((&d).into()).unwrap();
        let est = mc_measure((&d).into(), &bbox, 10_000, 1).unwrap();
        assert_eq!(est.hits, 0);
    }

    #[test]
    fn box_checks() {
        assert!(matches!(BoundingBox::new(vec![0.0], vec![0.0]), Err(PolytopeError::DegenerateBox(_))));
        let h = hexagon();
        let small = BoundingBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(mc_measure((&h).into(), &small, 10, 0), Err(PolytopeError::BoxTooSmall(_))));
    }
}
