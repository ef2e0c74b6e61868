//! H-representation polytopes over labeled variables, and finite unions and
//! differences of them.

mod fme;
mod measure;
mod planar;
mod redundancy;

pub use fme::{eliminate, project, project_in_order};
pub use measure::{bounding_box, mc_measure, BoundingBox, MeasureEstimate, MeasureTarget};
pub use planar::{area_2d, vertices_2d};
pub use redundancy::{containment_witness, contains_polytope, minimal_representation, region_equal, Witness};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::lp::{lp_solve, LinearProgram, LpError, LpOutcome};
use crate::scalar::{convert, normalize_row, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolytopeError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("duplicate label {0}")]
    DuplicateLabel(String),
    #[error("unknown label {0}")]
    UnknownLabel(String),
    #[error("label mismatch: {0:?} vs {1:?}")]
    LabelMismatch(Vec<String>, Vec<String>),
    #[error("row {0} is trivially infeasible (0 <= negative)")]
    InfeasibleRow(usize),
    #[error("empty polytope")]
    Empty,
    #[error("polytope is unbounded along {0}")]
    Unbounded(String),
    #[error("expected exactly 2 labels, found {0}")]
    NotPlanar(usize),
    #[error("degenerate bounding box: {0}")]
    DegenerateBox(String),
    #[error("bounding box does not enclose the region along {0}")]
    BoxTooSmall(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// `{ x : A·x <= b }` with one label per column.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope<S> {
    labels: Vec<String>,
    a: Vec<Vec<S>>,
    b: Vec<S>,
}

impl<S: Scalar> HPolytope<S> {
    /// Checks shapes and label uniqueness. All-zero rows with nonnegative
    /// right-hand side are vacuous and dropped; with a negative right-hand
    /// side they are rejected.
    pub fn new(labels: Vec<String>, a: Vec<Vec<S>>, b: Vec<S>) -> Result<Self, PolytopeError> {
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(PolytopeError::DuplicateLabel(l.clone()));
            }
        }
        if a.len() != b.len() {
            return Err(PolytopeError::DimensionMismatch(format!("{} rows but {} right-hand sides", a.len(), b.len())));
        }
        let mut poly = HPolytope { labels, a: Vec::with_capacity(b.len()), b: Vec::with_capacity(b.len()) };
        for (i, (row, rhs)) in a.into_iter().zip(b).enumerate() {
            if row.len() != poly.labels.len() {
                return Err(PolytopeError::DimensionMismatch(format!(
                    "row {i} has {} coefficients for {} labels",
                    row.len(),
                    poly.labels.len()
                )));
            }
            if row.iter().all(|c| c.near_zero()) {
                if rhs.lt_tol(&S::zero()) {
                    return Err(PolytopeError::InfeasibleRow(i));
                }
                continue;
            }
            poly.a.push(row);
            poly.b.push(rhs);
        }
        Ok(poly)
    }

    /// Whole space over `labels`.
    pub fn universe(labels: Vec<String>) -> Result<Self, PolytopeError> {
        Self::new(labels, vec![], vec![])
    }

    /// Axis-aligned box `lower <= x <= upper`.
    pub fn from_box(labels: Vec<String>, lower: &[S], upper: &[S]) -> Result<Self, PolytopeError> {
        let n = labels.len();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for j in 0..n {
            let mut up = vec![S::zero(); n];
            up[j] = S::one();
            let mut down = vec![S::zero(); n];
            down[j] = -S::one();
            a.push(up);
            b.push(upper[j].clone());
            a.push(down);
            b.push(-lower[j].clone());
        }
        Self::new(labels, a, b)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> &[Vec<S>] {
        &self.a
    }

    pub fn rhs(&self) -> &[S] {
        &self.b
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[S], &S)> {
        self.a.iter().map(Vec::as_slice).zip(&self.b)
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Append `coeffs·x <= rhs`; vacuous rows are skipped.
    pub fn push_row(&mut self, coeffs: Vec<S>, rhs: S) -> Result<(), PolytopeError> {
        if coeffs.len() != self.dim() {
            return Err(PolytopeError::DimensionMismatch(format!(
                "row has {} coefficients for {} labels",
                coeffs.len(),
                self.dim()
            )));
        }
        if coeffs.iter().all(|c| c.near_zero()) {
            if rhs.lt_tol(&S::zero()) {
                return Err(PolytopeError::InfeasibleRow(self.n_rows()));
            }
            return Ok(());
        }
        self.a.push(coeffs);
        self.b.push(rhs);
        Ok(())
    }

    /// `lo <= coeffs·x <= hi` as two rows.
    pub fn push_range(&mut self, coeffs: Vec<S>, lo: Option<S>, hi: Option<S>) -> Result<(), PolytopeError> {
        if let Some(hi) = hi {
            self.push_row(coeffs.clone(), hi)?;
        }
        if let Some(lo) = lo {
            self.push_row(coeffs.into_iter().map(|c| -c).collect(), -lo)?;
        }
        Ok(())
    }

    /// Row-wise membership with the scalar's comparison tolerance.
    pub fn contains(&self, point: &[S]) -> bool {
        debug_assert_eq!(point.len(), self.dim());
        self.rows().all(|(row, rhs)| {
            let lhs = row.iter().zip(point).fold(S::zero(), |acc, (a, x)| acc + a.clone() * x.clone());
            lhs.le_tol(rhs)
        })
    }

    /// Every row rescaled to canonical form (see [`normalize_row`]).
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        for (row, rhs) in out.a.iter_mut().zip(out.b.iter_mut()) {
            normalize_row(row, rhs);
        }
        out
    }

    /// Rows of both polytopes over the shared labels.
    pub fn intersect(&self, other: &Self) -> Result<Self, PolytopeError> {
        if self.labels != other.labels {
            return Err(PolytopeError::LabelMismatch(self.labels.clone(), other.labels.clone()));
        }
        let mut out = self.clone();
        out.a.extend(other.a.iter().cloned());
        out.b.extend(other.b.iter().cloned());
        Ok(out)
    }

    /// Columns permuted into `order`, which must be a permutation of the labels.
    pub fn reorder(&self, order: &[String]) -> Result<Self, PolytopeError> {
        if order.len() != self.dim() {
            return Err(PolytopeError::LabelMismatch(self.labels.clone(), order.to_vec()));
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|l| self.label_index(l).ok_or_else(|| PolytopeError::UnknownLabel(l.clone())))
            .collect::<Result<_, _>>()?;
        let a = self.a.iter().map(|row| perm.iter().map(|&j| row[j].clone()).collect()).collect();
        Self::new(order.to_vec(), a, self.b.clone())
    }

    /// Substitute fixed values for the named variables; the result lives over
    /// the remaining labels.
    pub fn fix(&self, assignment: &[(String, S)]) -> Result<Self, PolytopeError> {
        let mut fixed = vec![None; self.dim()];
        for (label, value) in assignment {
            let j = self.label_index(label).ok_or_else(|| PolytopeError::UnknownLabel(label.clone()))?;
            fixed[j] = Some(value.clone());
        }
        let keep: Vec<usize> = (0..self.dim()).filter(|&j| fixed[j].is_none()).collect();
        let labels = keep.iter().map(|&j| self.labels[j].clone()).collect();
        let mut a = Vec::with_capacity(self.n_rows());
        let mut b = Vec::with_capacity(self.n_rows());
        for (row, rhs) in self.rows() {
            let mut r = rhs.clone();
            for (j, v) in fixed.iter().enumerate() {
                if let Some(v) = v {
                    r = r - row[j].clone() * v.clone();
                }
            }
            a.push(keep.iter().map(|&j| row[j].clone()).collect::<Vec<_>>());
            b.push(r);
        }
        // Rows that lose all support become constants; keep them as checks.
        let mut out = HPolytope { labels, a: vec![], b: vec![] };
        for (row, rhs) in a.into_iter().zip(b) {
            if row.iter().all(|c| c.near_zero()) {
                if rhs.lt_tol(&S::zero()) {
                    return Err(PolytopeError::Empty);
                }
                continue;
            }
            out.a.push(row);
            out.b.push(rhs);
        }
        Ok(out)
    }

    /// Maximize `direction·x` over the polytope.
    pub fn maximize(&self, direction: &[S]) -> Result<LpOutcome<S>, PolytopeError> {
        let lp = LinearProgram::maximize(direction.to_vec(), self.a.clone(), self.b.clone());
        Ok(lp_solve(&lp)?)
    }

    pub fn feasible_point(&self) -> Result<Option<Vec<S>>, PolytopeError> {
        let lp = LinearProgram::feasibility(self.dim(), self.a.clone(), self.b.clone());
        Ok(lp_solve(&lp)?.point().map(<[S]>::to_vec))
    }

    pub fn is_feasible(&self) -> Result<bool, PolytopeError> {
        Ok(self.feasible_point()?.is_some())
    }

    /// Lower and upper extent along every axis.
    pub fn extents(&self) -> Result<Vec<(S, S)>, PolytopeError> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![S::zero(); n];
            e[j] = S::one();
            let hi = self.axis_extreme(&e, j)?;
            e[j] = -S::one();
            let lo = -self.axis_extreme(&e, j)?;
            out.push((lo, hi));
        }
        Ok(out)
    }

    fn axis_extreme(&self, direction: &[S], axis: usize) -> Result<S, PolytopeError> {
        match self.maximize(direction)? {
            LpOutcome::Optimal { value, .. } => Ok(value),
            LpOutcome::Unbounded => Err(PolytopeError::Unbounded(self.labels[axis].clone())),
            LpOutcome::Infeasible => Err(PolytopeError::Empty),
        }
    }

    /// Same system in another scalar type.
    pub fn convert<T: Scalar>(&self) -> HPolytope<T> {
        HPolytope {
            labels: self.labels.clone(),
            a: self.a.iter().map(|r| r.iter().map(convert).collect()).collect(),
            b: self.b.iter().map(convert).collect(),
        }
    }

    /// Every row scaled by the positive factor `k`.
    pub fn scaled(&self, k: &S) -> Self {
        let mut out = self.clone();
        for (row, rhs) in out.a.iter_mut().zip(out.b.iter_mut()) {
            for c in row.iter_mut() {
                *c = c.clone() * k.clone();
            }
            *rhs = rhs.clone() * k.clone();
        }
        out
    }

    pub(crate) fn from_parts_unchecked(labels: Vec<String>, a: Vec<Vec<S>>, b: Vec<S>) -> Self {
        HPolytope { labels, a, b }
    }
}

/// Finite union of polytopes over identical labels. Never convexified.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionUnion<S> {
    labels: Vec<String>,
    members: Vec<HPolytope<S>>,
}

impl<S: Scalar> RegionUnion<S> {
    pub fn new(labels: Vec<String>, members: Vec<HPolytope<S>>) -> Result<Self, PolytopeError> {
        for m in &members {
            if m.labels() != labels.as_slice() {
                return Err(PolytopeError::LabelMismatch(labels, m.labels().to_vec()));
            }
        }
        Ok(RegionUnion { labels, members })
    }

    pub fn single(poly: HPolytope<S>) -> Self {
        RegionUnion { labels: poly.labels().to_vec(), members: vec![poly] }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn members(&self) -> &[HPolytope<S>] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, point: &[S]) -> bool {
        self.members.iter().any(|m| m.contains(point))
    }

    /// Sufficient containment test: every member of `other` lies inside a
    /// single member of `self`.
    pub fn covers_memberwise(&self, other: &RegionUnion<S>) -> Result<bool, PolytopeError> {
        if self.labels != other.labels {
            return Err(PolytopeError::LabelMismatch(self.labels.clone(), other.labels.clone()));
        }
        for inner in &other.members {
            let mut covered = false;
            for outer in &self.members {
                if contains_polytope(outer, inner)? {
                    covered = true;
                    break;
                }
            }
            if !covered {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn convert<T: Scalar>(&self) -> RegionUnion<T> {
        RegionUnion { labels: self.labels.clone(), members: self.members.iter().map(HPolytope::convert).collect() }
    }
}

/// Points of `minuend` that are not in `subtrahend`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionDifference<S> {
    pub minuend: RegionUnion<S>,
    pub subtrahend: RegionUnion<S>,
}

impl<S: Scalar> RegionDifference<S> {
    pub fn new(minuend: RegionUnion<S>, subtrahend: RegionUnion<S>) -> Result<Self, PolytopeError> {
        if minuend.labels() != subtrahend.labels() {
            return Err(PolytopeError::LabelMismatch(minuend.labels().to_vec(), subtrahend.labels().to_vec()));
        }
        Ok(RegionDifference { minuend, subtrahend })
    }

    pub fn labels(&self) -> &[String] {
        self.minuend.labels()
    }

    pub fn contains(&self, point: &[S]) -> bool {
        self.minuend.contains(point) && !self.subtrahend.contains(point)
    }

    pub fn convert<T: Scalar>(&self) -> RegionDifference<T> {
        RegionDifference { minuend: self.minuend.convert(), subtrahend: self.subtrahend.convert() }
    }
}

pub fn difference_contains<S: Scalar>(diff: &RegionDifference<S>, point: &[S]) -> bool {
    diff.contains(point)
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn construction_checks() {
        assert_eq!(
            HPolytope::<Rational>::new(labels(&["x", "x"]), vec![], vec![]),
            Err(PolytopeError::DuplicateLabel("x".into()))
        );
        assert!(matches!(
            HPolytope::new(labels(&["x"]), vec![vec![q(1), q(2)]], vec![q(1)]),
            Err(PolytopeError::DimensionMismatch(_))
        ));
        assert_eq!(HPolytope::new(labels(&["x"]), vec![vec![q(0)]], vec![q(-1)]), Err(PolytopeError::InfeasibleRow(0)));
        let p = HPolytope::new(labels(&["x"]), vec![vec![q(0)], vec![q(1)]], vec![q(1), q(1)]).unwrap();
        assert_eq!(p.n_rows(), 1);
    }

    #[test]
    fn origin_in_hexagon() {
        assert!(hexagon().contains(&[q(0), q(0)]));
        assert!(!hexagon().contains(&[q(2), q(0)]));
    }

    #[test]
    fn fix_substitutes_values() {
        let p = hexagon();
        let slice = p.fix(&[("P2".into(), q(0))]).unwrap();
        assert_eq!(slice.labels(), &["P1".to_string()]);
        assert_eq!(slice.extents().unwrap(), vec![(qr(-3, 2), qr(3, 2))]);
        assert_eq!(p.fix(&[("P1".into(), q(10)), ("P2".into(), q(0))]), Err(PolytopeError::Empty));
    }

    #[test]
    fn difference_membership() {
        let diff = RegionDifference::new(RegionUnion::single(parallelogram()), RegionUnion::single(hexagon())).unwrap();
        // lobe point: 2*1.8 + 0 = 3.6 > 3 but |P1| <= 2, |P1+P2| <= 2
        assert!(difference_contains(&diff, &[qr(9, 5), q(0)]));
        assert!(!difference_contains(&diff, &[q(0), q(0)]));
        assert!(!difference_contains(&diff, &[q(3), q(0)]));
    }

    #[test]
    fn reorder_permutes_columns() {
        let p = hexagon();
        let r = p.reorder(&labels(&["P2", "P1"])).unwrap();
        assert!(r.contains(&[q(4), q(-2)]));
        assert!(!r.contains(&[q(-2), q(4) + qr(1, 10)]));
        assert!(matches!(p.reorder(&labels(&["P2", "P9"])), Err(PolytopeError::UnknownLabel(_))));
    }

    #[test]
    fn union_label_agreement() {
        let other = HPolytope::<Rational>::universe(labels(&["a", "b"])).unwrap();
        assert!(RegionUnion::new(labels(&["P1", "P2"]), vec![hexagon(), other]).is_err());
    }
}
