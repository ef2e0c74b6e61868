//! Vertex enumeration and area for planar polytopes.

use std::cmp::Ordering;

use super::{minimal_representation, HPolytope, PolytopeError};
use crate::scalar::Scalar;

/// Vertices in counter-clockwise order, starting from the one with the
/// smallest polar angle about the vertex centroid.
pub fn vertices_2d<S: Scalar>(poly: &HPolytope<S>) -> Result<Vec<[S; 2]>, PolytopeError> {
    if poly.dim() != 2 {
        return Err(PolytopeError::NotPlanar(poly.dim()));
    }
    // Fails with Unbounded/Empty before any enumeration.
    poly.extents()?;
    let m = minimal_representation(poly)?;
    let rows: Vec<(&[S], &S)> = m.rows().collect();
    let mut points: Vec<[S; 2]> = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (a, b) = (rows[i].0, rows[j].0);
            let det = a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone();
            if det.near_zero() {
                continue;
            }
            let (c, d) = (rows[i].1.clone(), rows[j].1.clone());
            let x = (c.clone() * b[1].clone() - a[1].clone() * d.clone()) / det.clone();
            let y = (a[0].clone() * d - c * b[0].clone()) / det;
            let p = [x, y];
            if m.contains(&p) && !points.iter().any(|q| q[0].approx_eq(&p[0]) && q[1].approx_eq(&p[1])) {
                points.push(p);
            }
        }
    }
    if points.is_empty() {
        // A single point with all facets parallel cannot occur for a bounded
        // nonempty planar set, but keep the error explicit.
        return Err(PolytopeError::Empty);
    }
    let n = S::from_int(points.len() as i64);
    let cx = points.iter().fold(S::zero(), |acc, p| acc + p[0].clone()) / n.clone();
    let cy = points.iter().fold(S::zero(), |acc, p| acc + p[1].clone()) / n;
    points.sort_by(|p, q| {
        polar_order(
            &(p[0].clone() - cx.clone()),
            &(p[1].clone() - cy.clone()),
            &(q[0].clone() - cx.clone()),
            &(q[1].clone() - cy.clone()),
        )
    });
    Ok(points)
}

/// Exact angular comparison of two offsets from the centroid.
fn polar_order<S: Scalar>(ax: &S, ay: &S, bx: &S, by: &S) -> Ordering {
    let half = |x: &S, y: &S| -> u8 {
        if y.is_positive() || (y.is_zero() && x.is_positive()) {
            0
        } else {
            1
        }
    };
    let (ha, hb) = (half(ax, ay), half(bx, by));
    if ha != hb {
        return ha.cmp(&hb);
    }
    let cross = ax.clone() * by.clone() - ay.clone() * bx.clone();
    if cross.is_positive() {
        Ordering::Less
    } else if cross.is_negative() {
        Ordering::Greater
    } else {
        Ordering::Equal
    }
}

/// Shoelace area of the vertex polygon.
pub fn area_2d<S: Scalar>(poly: &HPolytope<S>) -> Result<S, PolytopeError> {
    let v = vertices_2d(poly)?;
    Ok(shoelace(&v))
}

pub(crate) fn shoelace<S: Scalar>(v: &[[S; 2]]) -> S {
    let n = v.len();
    let twice = (0..n).fold(S::zero(), |acc, i| {
        let (p, q) = (&v[i], &v[(i + 1) % n]);
        acc + p[0].clone() * q[1].clone() - q[0].clone() * p[1].clone()
    });
    twice.abs() / S::from_int(2)
}
