//! Exact triangulation of polytopes and cones.
//!
//! Recursive scheme: pick a seed vertex, triangulate every facet the seed
//! does not lie on, and cone the pieces over the seed. Face structure at
//! each level is recomputed by a small convex hull in affine coordinates,
//! which keeps the recursion fully exact.

use super::dd;
use super::{Lattice, PolyCone, Polytope, Simplex, SimplicialCone, Vector};
use crate::linalg::{sub, Mat};
use crate::scalar::{cmp_s, Scalar};


/// Triangulates a polytope. `seed_last` selects the alternate fan apex so
/// callers can cross-check triangulation independence.
pub fn triangulate_polytope<S: Scalar>(p: &Polytope<S>, seed_last: bool) -> Vec<Simplex<S>> {
    let pts: Vec<Vec<S>> = p.vertices().iter().map(|v| v.coords.clone()).collect();
    let idx: Vec<usize> = (0..pts.len()).collect();
    let tris = triangulate_affine(&pts, &idx, seed_last);
    tris.into_iter()
        .map(|t| Simplex {
            vertices: t.into_iter().map(|i| p.vertices()[i].clone()).collect(),
        })
        .collect()
}

/// Triangulates a pointed full-dimensional cone into simplicial subcones.
pub fn triangulate_cone<S: Scalar, L: Lattice>(
    c: &PolyCone<S, L>,
    seed_last: bool,
) -> Vec<SimplicialCone<S, L>> {
    let gens: Vec<Vec<S>> = c.generators().iter().map(|g| g.coords.clone()).collect();
    let idx: Vec<usize> = (0..gens.len()).collect();
    let tris = triangulate_linear(&gens, &idx, seed_last);
    tris.into_iter()
        .map(|t| {
            SimplicialCone::new(
                t.into_iter()
                    .map(|i| Vector::new(gens[i].clone()))
                    .collect(),
            )
        })
        .collect()
}

/// Affine coordinates of `pts[subset]` within their affine hull.
/// Returns (coords, affine dimension).
fn affine_coords<S: Scalar>(pts: &[Vec<S>], subset: &[usize]) -> (Vec<Vec<S>>, usize) {
    let base = &pts[subset[0]];
    let diffs: Vec<Vec<S>> = subset[1..].iter().map(|&i| sub(&pts[i], base)).collect();
    // Greedy independent subset as a basis.
    let mut basis: Vec<Vec<S>> = Vec::new();
    for d in &diffs {
        let mut m = basis.clone();
        m.push(d.clone());
        if Mat::from_rows(&m).rank() == m.len() {
            basis.push(d.clone());
        }
    }
    let k = basis.len();
    if k == 0 {
        return (vec![vec![]; subset.len()], 0);
    }
    // Solve basis^T z = p - base for each point.
    let bt_rows: Vec<Vec<S>> = (0..base.len())
        .map(|r| basis.iter().map(|b| b[r].clone()).collect())
        .collect();
    let bt = Mat::from_rows(&bt_rows);
    let coords: Vec<Vec<S>> = subset
        .iter()
        .map(|&i| bt.solve(&sub(&pts[i], base)).expect("consistent affine system"))
        .collect();
    (coords, k)
}

/// Triangulates conv(pts[subset]) returning simplices as index lists into
/// the global point array.
fn triangulate_affine<S: Scalar>(
    pts: &[Vec<S>],
    subset: &[usize],
    seed_last: bool,
) -> Vec<Vec<usize>> {
    let (coords, k) = affine_coords(pts, subset);
    if subset.len() == k + 1 {
        return vec![subset.to_vec()];
    }
    if k == 0 {
        return vec![vec![subset[0]]];
    }
    // Hull facets in affine coordinates: rays of {(b,a): b + <z,a> >= 0}.
    let hs: Vec<Vec<S>> = coords
        .iter()
        .map(|z| {
            let mut h = Vec::with_capacity(k + 1);
            h.push(S::one());
            h.extend(z.iter().cloned());
            h
        })
        .collect();
    let facets = dd::extreme_rays(&hs, k + 1).expect("full-dim in affine hull");
    // Seed: lexicographic extreme among the subset coordinates.
    let seed_pos = lex_extreme(&coords, seed_last);
    let mut out = Vec::new();
    for f in &facets {
        let incident: Vec<usize> = (0..subset.len())
            .filter(|&i| {
                let mut acc = f[0].clone();
                for j in 0..k {
                    acc = acc + f[j + 1].clone() * coords[i][j].clone();
                }
                acc.is_zero()
            })
            .collect();
        if incident.contains(&seed_pos) {
            continue;
        }
        let face_subset: Vec<usize> = incident.iter().map(|&i| subset[i]).collect();
        for mut piece in triangulate_affine(pts, &face_subset, seed_last) {
            piece.push(subset[seed_pos]);
            out.push(piece);
        }
    }
    out
}

/// Triangulates cone(pts[subset]) (linear version: faces through the apex).
fn triangulate_linear<S: Scalar>(
    pts: &[Vec<S>],
    subset: &[usize],
    seed_last: bool,
) -> Vec<Vec<usize>> {
    // Linear span dimension of the subset.
    let rows: Vec<Vec<S>> = subset.iter().map(|&i| pts[i].clone()).collect();
    let k = Mat::from_rows(&rows).rank();
    if subset.len() == k {
        return vec![subset.to_vec()];
    }
    // Facets of the subcone: extreme rays of the dual within the span. Use
    // the DD in ambient coordinates on the dual: {y: <g_i, y> >= 0} has
    // lineality orthogonal to the span; handle by reducing generators to
    // span coordinates first.
    let (coords, kk) = linear_coords(&rows, k);
    let facets = dd::extreme_rays(&coords, kk).expect("pointed subcone");
    let seed_pos = lex_extreme(&coords, seed_last);
    let mut out = Vec::new();
    for f in &facets {
        let incident: Vec<usize> = (0..subset.len())
            .filter(|&i| crate::linalg::dot(&coords[i], f).is_zero())
            .collect();
        if incident.contains(&seed_pos) {
            continue;
        }
        let face_subset: Vec<usize> = incident.iter().map(|&i| subset[i]).collect();
        for mut piece in triangulate_linear(pts, &face_subset, seed_last) {
            piece.push(subset[seed_pos]);
            out.push(piece);
        }
    }
    out
}

/// Linear coordinates of the rows within their span (dimension `k`).
fn linear_coords<S: Scalar>(rows: &[Vec<S>], k: usize) -> (Vec<Vec<S>>, usize) {
    let mut basis: Vec<Vec<S>> = Vec::new();
    for r in rows {
        let mut m = basis.clone();
        m.push(r.clone());
        if Mat::from_rows(&m).rank() == m.len() {
            basis.push(r.clone());
        }
        if basis.len() == k {
            break;
        }
    }
    let bt_rows: Vec<Vec<S>> = (0..rows[0].len())
        .map(|r| basis.iter().map(|b| b[r].clone()).collect())
        .collect();
    let bt = Mat::from_rows(&bt_rows);
    let coords: Vec<Vec<S>> = rows
        .iter()
        .map(|p| bt.solve(p).expect("in span"))
        .collect();
    (coords, k)
}

fn lex_extreme<S: Scalar>(coords: &[Vec<S>], last: bool) -> usize {
    let mut best = 0usize;
    for i in 1..coords.len() {
        let cmp = coords[i]
            .iter()
            .zip(&coords[best])
            .map(|(a, b)| cmp_s(a, b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal);
        let better = if last {
            cmp == std::cmp::Ordering::Greater
        } else {
            cmp == std::cmp::Ordering::Less
        };
        if better {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polykernel::{Facet, LatM};
    use crate::Rat;
    use num_traits::One;

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    #[test]
    fn unit_square_two_triangles() {
        let p = Polytope::from_vertices(
            2,
            vec![
                Vector::new(vec![r(0), r(0)]),
                Vector::new(vec![r(1), r(0)]),
                Vector::new(vec![r(0), r(1)]),
                Vector::new(vec![r(1), r(1)]),
            ],
        )
        .unwrap();
        let t = triangulate_polytope(&p, false);
        assert_eq!(t.len(), 2);
        let total: Rat = t.iter().map(|s| s.volume()).sum();
        assert_eq!(total, Rat::one());
    }

    #[test]
    fn simplex_is_single_piece() {
        let p = Polytope::from_hrep(
            2,
            vec![
                Facet::new(vec![r(1), r(0)], r(1)),
                Facet::new(vec![r(0), r(1)], r(1)),
                Facet::new(vec![r(-1), r(-1)], r(1)),
            ],
        )
        .unwrap();
        let t = triangulate_polytope(&p, false);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].volume(), Rat::new(9.into(), 2.into()));
    }

    #[test]
    fn conifold_cone_two_pieces_unit_dets() {
        let c = PolyCone::<Rat, LatM>::from_generators(
            3,
            vec![
                Vector::new(vec![r(0), r(0), r(1)]),
                Vector::new(vec![r(1), r(0), r(1)]),
                Vector::new(vec![r(0), r(1), r(1)]),
                Vector::new(vec![r(1), r(1), r(1)]),
            ],
        )
        .unwrap();
        let t = triangulate_cone(&c, false);
        assert_eq!(t.len(), 2);
        for piece in &t {
            assert_eq!(piece.det_abs, Rat::one());
        }
        // Alternate seed still tiles with the same total determinant.
        let t2 = triangulate_cone(&c, true);
        let s1: Rat = t.iter().map(|p| p.det_abs.clone()).sum();
        let s2: Rat = t2.iter().map(|p| p.det_abs.clone()).sum();
        assert_eq!(s1, s2);
    }

    #[test]
    fn two_triangulations_same_volume() {
        // Bl_1 P^2 polytope.
        let p = Polytope::from_vertices(
            2,
            vec![
                Vector::new(vec![r(-1), r(0)]),
                Vector::new(vec![r(0), r(-1)]),
                Vector::new(vec![r(2), r(-1)]),
                Vector::new(vec![r(-1), r(2)]),
            ],
        )
        .unwrap();
        let v1: Rat = triangulate_polytope(&p, false).iter().map(|s| s.volume()).sum();
        let v2: Rat = triangulate_polytope(&p, true).iter().map(|s| s.volume()).sum();
        assert_eq!(v1, v2);
        assert_eq!(v1, r(4));
    }
}
