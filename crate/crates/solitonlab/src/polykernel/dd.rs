//! Double description: extreme rays of `{x : <x, h_i> >= 0}`.

use crate::linalg::{dot, Mat};
use crate::scalar::{cmp_s, Scalar};

/// Scale a ray so its largest coordinate magnitude is one (deterministic
/// canonical form that works for both exact and floating scalars).
pub fn normalize_ray<S: Scalar>(v: &mut [S]) {
    let mut m = S::zero();
    for c in v.iter() {
        let a = c.abs();
        if cmp_s(&a, &m) == std::cmp::Ordering::Greater {
            m = a;
        }
    }
    if !m.is_zero() {
        for c in v.iter_mut() {
            *c = c.clone() / m.clone();
        }
    }
}

/// Extreme rays of the polyhedral cone `{x in R^d : <x, h_i> >= 0 for all i}`.
///
/// Requires the cone to be pointed (equivalently the `h_i` must positively
/// span enough directions); returns `None` when no full-rank initial basis
/// exists, which means the cone contains a line.
pub fn extreme_rays<S: Scalar>(halfspaces: &[Vec<S>], dim: usize) -> Option<Vec<Vec<S>>> {
    assert!(halfspaces.iter().all(|h| h.len() == dim));
    // Greedy full-rank subset for initialization.
    let mut basis_idx: Vec<usize> = Vec::new();
    {
        let mut m: Vec<Vec<S>> = Vec::new();
        for (i, h) in halfspaces.iter().enumerate() {
            m.push(h.clone());
            if Mat::from_rows(&m).rank() == m.len() {
                basis_idx.push(i);
                if basis_idx.len() == dim {
                    break;
                }
            } else {
                m.pop();
            }
        }
    }
    if basis_idx.len() < dim {
        return None; // lineality space present
    }
    let hb = Mat::from_rows(&basis_idx.iter().map(|&i| halfspaces[i].clone()).collect::<Vec<_>>());
    let inv = hb.inverse().expect("full rank");
    // Rays of the initial simplicial cone: columns of inv.
    let mut rays: Vec<Vec<S>> = (0..dim)
        .map(|j| {
            let mut r: Vec<S> = (0..dim).map(|i| inv.at(i, j).clone()).collect();
            normalize_ray(&mut r);
            r
        })
        .collect();
    let mut processed: Vec<usize> = basis_idx.clone();
    for (i, h) in halfspaces.iter().enumerate() {
        if basis_idx.contains(&i) {
            continue;
        }
        rays = add_halfspace(rays, h, halfspaces, &processed);
        processed.push(i);
        if rays.is_empty() {
            break;
        }
    }
    Some(rays)
}

fn zero_set<S: Scalar>(ray: &[S], halfspaces: &[Vec<S>], processed: &[usize]) -> Vec<usize> {
    processed
        .iter()
        .copied()
        .filter(|&i| dot(ray, &halfspaces[i]).is_zero())
        .collect()
}

fn add_halfspace<S: Scalar>(
    rays: Vec<Vec<S>>,
    h: &[S],
    halfspaces: &[Vec<S>],
    processed: &[usize],
) -> Vec<Vec<S>> {
    let vals: Vec<S> = rays.iter().map(|r| dot(r, h)).collect();
    let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
    let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
    if neg.is_empty() {
        return rays;
    }
    let zsets: Vec<Vec<usize>> = rays
        .iter()
        .map(|r| zero_set(r, halfspaces, processed))
        .collect();
    let mut out: Vec<Vec<S>> = Vec::new();
    for (i, r) in rays.iter().enumerate() {
        if !vals[i].is_negative() {
            out.push(r.clone());
        }
    }
    for &p in &pos {
        for &q in &neg {
            // Combinatorial adjacency: no third ray's zero set contains
            // the common zero set of p and q.
            let common: Vec<usize> = zsets[p]
                .iter()
                .copied()
                .filter(|i| zsets[q].contains(i))
                .collect();
            let adjacent = (0..rays.len()).all(|k| {
                k == p || k == q || !common.iter().all(|i| zsets[k].contains(i))
            });
            if !adjacent {
                continue;
            }
            // new = <r_p, h> r_q - <r_q, h> r_p  (positive combination)
            let mut nr: Vec<S> = (0..h.len())
                .map(|j| vals[p].clone() * rays[q][j].clone() - vals[q].clone() * rays[p][j].clone())
                .collect();
            normalize_ray(&mut nr);
            out.push(nr);
        }
    }
    // Deduplicate (normalized rays compare exactly for exact scalars).
    let mut dedup: Vec<Vec<S>> = Vec::new();
    for r in out {
        if !dedup.iter().any(|s| rays_equal(s, &r)) {
            dedup.push(r);
        }
    }
    dedup
}

fn rays_equal<S: Scalar>(a: &[S], b: &[S]) -> bool {
    if S::exact() {
        a == b
    } else {
        a.iter()
            .zip(b)
            .all(|(x, y)| (x.clone() - y.clone()).abs().approx() < 1e-9)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    #[test]
    fn octant_rays() {
        // {x >= 0} in R^3: rays are the coordinate axes.
        let hs = vec![
            vec![r(1), r(0), r(0)],
            vec![r(0), r(1), r(0)],
            vec![r(0), r(0), r(1)],
        ];
        let rays = extreme_rays(&hs, 3).unwrap();
        assert_eq!(rays.len(), 3);
    }

    #[test]
    fn conifold_dual() {
        // Dual of the cone generated by (0,0,1),(1,0,1),(0,1,1),(1,1,1).
        let hs = vec![
            vec![r(0), r(0), r(1)],
            vec![r(1), r(0), r(1)],
            vec![r(0), r(1), r(1)],
            vec![r(1), r(1), r(1)],
        ];
        let rays = extreme_rays(&hs, 3).unwrap();
        assert_eq!(rays.len(), 4);
    }

    #[test]
    fn halfplane_has_lineality() {
        let hs = vec![vec![r(1), r(0)]];
        assert!(extreme_rays(&hs, 2).is_none());
    }
}
