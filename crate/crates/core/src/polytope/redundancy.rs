//! LP-based redundancy removal and containment tests.

use super::{HPolytope, PolytopeError};
use crate::lp::{lp_solve, LinearProgram, LpOutcome};
use crate::scalar::Scalar;

/// Drop every row implied by the others.
///
/// Rows are normalized and deduplicated first; then each row, in order, is
/// tested by maximizing its left side over the rows still kept. A row whose
/// maximum does not exceed its bound is removed. Removing an implied row
/// leaves the set unchanged, so the sequential sweep ends in a minimal system.
pub fn minimal_representation<S: Scalar>(poly: &HPolytope<S>) -> Result<HPolytope<S>, PolytopeError> {
    let normalized = poly.normalized();
    let mut rows: Vec<Vec<S>> = Vec::new();
    let mut rhs: Vec<S> = Vec::new();
    for (row, b) in normalized.rows() {
        match rows.iter().position(|r| same_row(r, row)) {
            Some(k) => {
                if b < &rhs[k] {
                    rhs[k] = b.clone();
                }
            }
            None => {
                rows.push(row.to_vec());
                rhs.push(b.clone());
            }
        }
    }

    let lp = LinearProgram::feasibility(poly.dim(), rows.clone(), rhs.clone());
    if lp_solve(&lp)?.status() != crate::lp::LpStatus::Optimal {
        return Err(PolytopeError::Empty);
    }

    let mut keep = vec![true; rows.len()];
    for i in 0..rows.len() {
        let others: Vec<usize> = (0..rows.len()).filter(|&k| k != i && keep[k]).collect();
        let lp = LinearProgram::maximize(
            rows[i].clone(),
            others.iter().map(|&k| rows[k].clone()).collect(),
            others.iter().map(|&k| rhs[k].clone()).collect(),
        );
        if let LpOutcome::Optimal { value, .. } = lp_solve(&lp)? {
            if value.le_tol(&rhs[i]) {
                keep[i] = false;
            }
        }
    }
    let (a, b): (Vec<_>, Vec<_>) = rows.into_iter().zip(rhs).zip(&keep).filter(|(_, &k)| k).map(|(rb, _)| rb).unzip();
    Ok(HPolytope::from_parts_unchecked(poly.labels().to_vec(), a, b))
}

fn same_row<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
}

/// A point of the inner polytope that violates a row of the outer one.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness<S> {
    pub row: usize,
    pub point: Option<Vec<S>>,
    /// Maximum of the row's left side over the inner polytope (`None` when
    /// unbounded) next to the row's bound.
    pub attained: Option<S>,
    pub bound: S,
}

/// First row of `outer` that is not valid over `inner`, with a separating point.
pub fn containment_witness<S: Scalar>(
    outer: &HPolytope<S>,
    inner: &HPolytope<S>,
) -> Result<Option<Witness<S>>, PolytopeError> {
    if outer.labels() != inner.labels() {
        return Err(PolytopeError::LabelMismatch(outer.labels().to_vec(), inner.labels().to_vec()));
    }
    for (i, (row, bound)) in outer.rows().enumerate() {
        match inner.maximize(row)? {
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => {
                return Ok(Some(Witness { row: i, point: None, attained: None, bound: bound.clone() }));
            }
            LpOutcome::Optimal { value, point } => {
                if value.gt_tol(bound) {
                    return Ok(Some(Witness {
                        row: i,
                        point: Some(point),
                        attained: Some(value),
                        bound: bound.clone(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// `inner ⊆ outer`.
pub fn contains_polytope<S: Scalar>(outer: &HPolytope<S>, inner: &HPolytope<S>) -> Result<bool, PolytopeError> {
    Ok(containment_witness(outer, inner)?.is_none())
}

/// Mutual containment.
pub fn region_equal<S: Scalar>(p: &HPolytope<S>, q: &HPolytope<S>) -> Result<bool, PolytopeError> {
    Ok(contains_polytope(p, q)? && contains_polytope(q, p)?)
}
