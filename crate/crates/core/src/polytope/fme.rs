//! Fourier-Motzkin projection.

use super::{minimal_representation, HPolytope, PolytopeError};
use crate::scalar::Scalar;

/// Eliminate one column by pairing every row with a positive coefficient
/// against every row with a negative one. The result lives over the
/// remaining labels and is not reduced.
pub fn eliminate<S: Scalar>(poly: &HPolytope<S>, column: usize) -> Result<HPolytope<S>, PolytopeError> {
    let n = poly.dim();
    if column >= n {
        return Err(PolytopeError::DimensionMismatch(format!("column {column} out of {n}")));
    }
    let drop = |row: &[S]| -> Vec<S> {
        row.iter().enumerate().filter(|&(j, _)| j != column).map(|(_, v)| v.clone()).collect()
    };
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    let mut out_a = Vec::new();
    let mut out_b = Vec::new();
    for (row, b) in poly.rows() {
        let c = &row[column];
        if c.near_zero() {
            out_a.push(drop(row));
            out_b.push(b.clone());
        } else if c.is_positive() {
            positive.push((row, b));
        } else {
            negative.push((row, b));
        }
    }
    for (prow, pb) in &positive {
        let pc = prow[column].clone();
        for (nrow, nb) in &negative {
            let nc = -nrow[column].clone();
            // nc·prow + pc·nrow cancels the column; both multipliers positive.
            let combined: Vec<S> =
                prow.iter().zip(nrow.iter()).map(|(x, y)| nc.clone() * x.clone() + pc.clone() * y.clone()).collect();
            let rhs = nc.clone() * (*pb).clone() + pc.clone() * (*nb).clone();
            out_a.push(drop(&combined));
            out_b.push(rhs);
        }
    }
    let labels = poly.labels().iter().enumerate().filter(|&(j, _)| j != column).map(|(_, l)| l.clone()).collect();
    // A pair can cancel to 0 <= negative only when the input is empty.
    HPolytope::new(labels, out_a, out_b).map_err(|e| match e {
        PolytopeError::InfeasibleRow(_) => PolytopeError::Empty,
        other => other,
    })
}

/// Orthogonal projection onto `keep` (in the given order).
///
/// Variables are eliminated one at a time, cheapest pairing first (ties by
/// column order), with a redundancy sweep after each step.
pub fn project<S: Scalar>(poly: &HPolytope<S>, keep: &[String]) -> Result<HPolytope<S>, PolytopeError> {
    for (i, l) in keep.iter().enumerate() {
        if poly.label_index(l).is_none() {
            return Err(PolytopeError::UnknownLabel(l.clone()));
        }
        if keep[..i].contains(l) {
            return Err(PolytopeError::DuplicateLabel(l.clone()));
        }
    }
    if !poly.is_feasible()? {
        return Err(PolytopeError::Empty);
    }
    let mut current = minimal_representation(poly)?;
    loop {
        let candidates: Vec<usize> = (0..current.dim()).filter(|&j| !keep.contains(&current.labels()[j])).collect();
        let Some(&column) = candidates.iter().min_by_key(|&&j| pairing_cost(&current, j)) else {
            break;
        };
        current = minimal_representation(&eliminate(&current, column)?)?;
    }
    current.reorder(keep)
}

/// Projection with an explicit elimination order.
pub fn project_in_order<S: Scalar>(poly: &HPolytope<S>, order: &[String]) -> Result<HPolytope<S>, PolytopeError> {
    if !poly.is_feasible()? {
        return Err(PolytopeError::Empty);
    }
    let mut current = minimal_representation(poly)?;
    for label in order {
        let column = current.label_index(label).ok_or_else(|| PolytopeError::UnknownLabel(label.clone()))?;
        current = minimal_representation(&eliminate(&current, column)?)?;
    }
    Ok(current)
}

/// Net change in row count from eliminating `column`.
fn pairing_cost<S: Scalar>(poly: &HPolytope<S>, column: usize) -> i64 {
    let (mut pos, mut neg) = (0usize, 0usize);
    for (row, _) in poly.rows() {
        let c = &row[column];
        if c.near_zero() {
            continue;
        }
        if c.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    (pos * neg) as i64 - (pos + neg) as i64
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::region_equal;
    use super::*;
    use crate::scalar::Rational;

    /// The 3-bus security region over (P1, P2, P3): flow rows with the
    /// thirds matrix, the balance row as a pair, and |Pi| <= 4.
    fn three_bus_essr() -> HPolytope<Rational> {
        let t = |n| qr(n, 3);
        let rows = vec![
            (vec![t(1), t(-1), q(0)], q(-2), q(2)),
            (vec![t(1), t(2), q(0)], q(-2), q(2)),
            (vec![t(2), t(1), q(0)], q(-1), q(1)),
            (vec![t(1), t(1), t(1)], q(0), q(0)),
            (vec![q(1), q(0), q(0)], q(-4), q(4)),
            (vec![q(0), q(1), q(0)], q(-4), q(4)),
            (vec![q(0), q(0), q(1)], q(-4), q(4)),
        ];
        let mut p = HPolytope::universe(labels(&["P1", "P2", "P3"])).unwrap();
        for (row, lo, hi) in rows {
            p.push_range(row, Some(lo), Some(hi)).unwrap();
        }
        p
    }

    #[test]
    fn three_bus_projection_is_hexagon() {
        let projected = project(&three_bus_essr(), &labels(&["P1", "P2"])).unwrap();
        assert!(region_equal(&projected, &hexagon()).unwrap());
        // minimal, normalized rows read exactly like the hexagon
        assert_eq!(projected.n_rows(), 6);
        let mut rows: Vec<(Vec<Rational>, Rational)> = projected.rows().map(|(r, b)| (r.to_vec(), b.clone())).collect();
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expected: Vec<(Vec<Rational>, Rational)> =
            hexagon().rows().map(|(r, b)| (r.to_vec(), b.clone())).collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(rows, expected);
    }

    #[test]
    fn box_projects_to_interval() {
        let cube = HPolytope::from_box(labels(&["x", "y", "z"]), &[q(-1), q(-1), q(-1)], &[q(1), q(1), q(1)]).unwrap();
        let line = project(&cube, &labels(&["x"])).unwrap();
        assert_eq!(line.extents().unwrap(), vec![(q(-1), q(1))]);
        assert_eq!(line.n_rows(), 2);
    }

    #[test]
    fn elimination_order_does_not_matter() {
        let p = three_bus_essr();
        let a = project_in_order(&p, &labels(&["P3"])).unwrap();
        let mut cube = HPolytope::from_box(
            labels(&["a", "b", "c", "d"]),
            &[q(-2), q(-2), q(-2), q(-2)],
            &[q(2), q(2), q(2), q(2)],
        )
        .unwrap();
        cube.push_row(vec![q(1), q(1), q(1), q(1)], q(3)).unwrap();
        cube.push_row(vec![q(1), q(-2), q(1), q(0)], q(1)).unwrap();
        cube.push_row(vec![q(-1), q(1), q(0), q(3)], q(2)).unwrap();
        let x = project_in_order(&cube, &labels(&["c", "d"])).unwrap();
        let y = project_in_order(&cube, &labels(&["d", "c"])).unwrap();
        assert!(region_equal(&x, &y).unwrap());
        assert!(region_equal(&a, &hexagon()).unwrap());
    }

    #[test]
    fn empty_input_rejected() {
        let p =
            HPolytope::new(labels(&["x", "y"]), vec![vec![q(1), q(0)], vec![q(-1), q(0)]], vec![q(-1), q(0)]).unwrap();
        assert_eq!(project(&p, &labels(&["y"])), Err(PolytopeError::Empty));
    }

    #[test]
    fn unknown_keep_label() {
        assert_eq!(project(&hexagon(), &labels(&["P9"])), Err(PolytopeError::UnknownLabel("P9".into())));
    }

    #[test]
    fn projecting_everything_out_leaves_universe() {
        let p = project(&hexagon(), &[]).unwrap();
        assert_eq!(p.dim(), 0);
        assert_eq!(p.n_rows(), 0);
    }
}
