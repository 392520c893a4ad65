//! Exact rational polytope and cone geometry with weighted integration.
//!
//! Bodies live in a pair of dual lattices: the weight lattice `M` (moment
//! coordinates) and the coweight lattice `N` (one-parameter subgroups).
//! The pairing is only defined across the two tags, which catches
//! coordinate-space mixups at compile time.

pub mod dd;
pub mod integrate;
pub mod measure;
pub mod section;
pub mod triangulate;
pub mod weighted;

use crate::error::{Error, Result};
use crate::linalg::{dot, Mat};
use crate::scalar::{cmp_s, Scalar};

use std::marker::PhantomData;

/// Marker for the weight lattice (moment polytope coordinates).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatM;
/// Marker for the coweight lattice (vector fields, Reeb vectors).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatN;

pub trait Lattice: 'static + std::fmt::Debug + Clone + Copy + PartialEq {
    type Dual: Lattice<Dual = Self>;
    const NAME: &'static str;
}

impl Lattice for LatM {
    type Dual = LatN;
    const NAME: &'static str = "M";
}

impl Lattice for LatN {
    type Dual = LatM;
    const NAME: &'static str = "N";
}

/// A vector tagged with the lattice it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector<S, L: Lattice> {
    pub coords: Vec<S>,
    _lat: PhantomData<L>,
}

pub type MVector<S> = Vector<S, LatM>;
pub type NVector<S> = Vector<S, LatN>;

impl<S: Scalar, L: Lattice> Vector<S, L> {
    pub fn new(coords: Vec<S>) -> Self {
        Vector { coords, _lat: PhantomData }
    }

    pub fn zeros(dim: usize) -> Self {
        Vector::new(vec![S::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Dual pairing; only defined against the dual lattice.
    pub fn pair(&self, other: &Vector<S, L::Dual>) -> S {
        dot(&self.coords, &other.coords)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn approx(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.approx()).collect()
    }
}

/// One facet inequality `<x, normal> >= -offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet<S> {
    pub normal: NVector<S>,
    pub offset: S,
}

impl<S: Scalar> Facet<S> {
    pub fn new(normal: Vec<S>, offset: S) -> Self {
        Facet { normal: Vector::new(normal), offset }
    }

    /// Slack `<x, normal> + offset` (nonnegative inside).
    pub fn slack(&self, x: &MVector<S>) -> S {
        x.pair(&self.normal) + self.offset.clone()
    }
}

/// Bounded full-dimensional rational polytope with synchronized
/// vertex and facet descriptions.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope<S> {
    dim: usize,
    vertices: Vec<MVector<S>>,
    facets: Vec<Facet<S>>,
    /// For each facet, the sorted indices of incident vertices.
    incidence: Vec<Vec<usize>>,
}

impl<S: Scalar> Polytope<S> {
    /// Builds from an H-representation. Facets may be redundant; the
    /// stored description is irredundant and canonically ordered.
    pub fn from_hrep(dim: usize, facets: Vec<Facet<S>>) -> Result<Self> {
        if dim == 0 || facets.is_empty() {
            return Err(Error::Invalid("empty facet description".into()));
        }
        for f in &facets {
            if f.normal.dim() != dim {
                return Err(Error::Invalid("facet dimension mismatch".into()));
            }
        }
        // Homogenize: rays of {(t,x): t >= 0, <x,a_i> + b_i t >= 0}.
        let mut hs: Vec<Vec<S>> = Vec::with_capacity(facets.len() + 1);
        let mut t_row = vec![S::zero(); dim + 1];
        t_row[0] = S::one();
        hs.push(t_row);
        for f in &facets {
            let mut h = Vec::with_capacity(dim + 1);
            h.push(f.offset.clone());
            h.extend(f.normal.coords.iter().cloned());
            hs.push(h);
        }
        let rays = match dd::extreme_rays(&hs, dim + 1) {
            Some(r) => r,
            None => {
                // Lineality space: unbounded if feasible, empty otherwise.
                return if fm_feasible(&facets, dim) {
                    Err(Error::Unbounded)
                } else {
                    Err(Error::Empty)
                };
            }
        };
        let mut vertices: Vec<MVector<S>> = Vec::new();
        for r in &rays {
            if r[0].is_zero() {
                if r.iter().any(|c| !c.is_zero()) {
                    return Err(Error::Unbounded);
                }
            } else if r[0].is_positive() {
                let t = r[0].clone();
                vertices.push(Vector::new(
                    r[1..].iter().map(|c| c.clone() / t.clone()).collect(),
                ));
            }
        }
        if vertices.is_empty() {
            return Err(Error::Empty);
        }
        sort_points(&mut vertices);
        vertices.dedup_by(|a, b| points_equal(&a.coords, &b.coords));
        Self::assemble(dim, vertices, facets)
    }

    /// Builds from a V-representation (the convex hull of the points).
    pub fn from_vertices(dim: usize, points: Vec<MVector<S>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty);
        }
        for p in &points {
            if p.dim() != dim {
                return Err(Error::Invalid("point dimension mismatch".into()));
            }
        }
        if affine_rank(&points.iter().map(|p| p.coords.clone()).collect::<Vec<_>>()) != dim {
            return Err(Error::NotFullDim);
        }
        // Facets of conv(V) are the extreme rays of {(b,a): b + <v,a> >= 0}.
        let hs: Vec<Vec<S>> = points
            .iter()
            .map(|p| {
                let mut h = Vec::with_capacity(dim + 1);
                h.push(S::one());
                h.extend(p.coords.iter().cloned());
                h
            })
            .collect();
        let rays = dd::extreme_rays(&hs, dim + 1).ok_or(Error::NotFullDim)?;
        let facets: Vec<Facet<S>> = rays
            .into_iter()
            .map(|r| Facet::new(r[1..].to_vec(), r[0].clone()))
            .collect();
        if facets.is_empty() {
            return Err(Error::NotFullDim);
        }
        Self::from_hrep(dim, facets)
    }

    /// Common tail of both constructors: prune non-extreme points and
    /// redundant facets, then build incidence.
    fn assemble(dim: usize, vertices: Vec<MVector<S>>, facets: Vec<Facet<S>>) -> Result<Self> {
        let coords: Vec<Vec<S>> = vertices.iter().map(|v| v.coords.clone()).collect();
        if affine_rank(&coords) != dim {
            return Err(Error::NotFullDim);
        }
        // Keep facets whose incident vertex set has affine rank dim-1.
        let mut kept: Vec<Facet<S>> = Vec::new();
        let mut incidence: Vec<Vec<usize>> = Vec::new();
        for f in facets {
            let inc: Vec<usize> = (0..vertices.len())
                .filter(|&i| f.slack(&vertices[i]).is_zero())
                .collect();
            if inc.len() < dim {
                continue;
            }
            let pts: Vec<Vec<S>> = inc.iter().map(|&i| coords[i].clone()).collect();
            if affine_rank(&pts) != dim - 1 {
                continue;
            }
            // Canonical positive scaling.
            let mut joint: Vec<S> = f.normal.coords.clone();
            joint.push(f.offset.clone());
            dd::normalize_ray(&mut joint);
            let cf = Facet::new(joint[..dim].to_vec(), joint[dim].clone());
            if !kept.iter().any(|k| facets_equal(k, &cf)) {
                kept.push(cf);
                incidence.push(inc);
            }
        }
        // Deterministic facet order.
        let mut order: Vec<usize> = (0..kept.len()).collect();
        order.sort_by(|&a, &b| {
            let ka: Vec<&S> = kept[a].normal.coords.iter().chain([&kept[a].offset]).collect();
            let kb: Vec<&S> = kept[b].normal.coords.iter().chain([&kept[b].offset]).collect();
            ka.iter().zip(&kb).map(|(x, y)| cmp_s(*x, *y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        });
        let facets: Vec<Facet<S>> = order.iter().map(|&i| kept[i].clone()).collect();
        let incidence: Vec<Vec<usize>> = order.iter().map(|&i| incidence[i].clone()).collect();
        if facets.len() < dim + 1 {
            return Err(Error::Unbounded);
        }
        Ok(Polytope { dim, vertices, facets, incidence })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[MVector<S>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet<S>] {
        &self.facets
    }

    pub fn facet_vertices(&self, facet: usize) -> &[usize] {
        &self.incidence[facet]
    }

    pub fn contains(&self, x: &MVector<S>) -> bool {
        self.facets.iter().all(|f| !f.slack(x).is_negative())
    }

    /// Barycenter of the vertex set (an interior point).
    pub fn vertex_centroid(&self) -> MVector<S> {
        let n = S::from_usize(self.vertices.len()).unwrap();
        let mut c = vec![S::zero(); self.dim];
        for v in &self.vertices {
            for (a, b) in c.iter_mut().zip(&v.coords) {
                *a = a.clone() + b.clone();
            }
        }
        Vector::new(c.into_iter().map(|x| x / n.clone()).collect())
    }

    /// Range of the linear functional `<., ell>` over the polytope.
    pub fn range(&self, ell: &NVector<S>) -> (S, S) {
        let vals: Vec<S> = self.vertices.iter().map(|v| v.pair(ell)).collect();
        let mut lo = vals[0].clone();
        let mut hi = vals[0].clone();
        for v in &vals[1..] {
            lo = crate::scalar::min_s(lo, v.clone());
            hi = crate::scalar::max_s(hi, v.clone());
        }
        (lo, hi)
    }

    /// Translate by `t` (exact; both representations updated).
    pub fn translate(&self, t: &MVector<S>) -> Polytope<S> {
        let vertices: Vec<MVector<S>> = self
            .vertices
            .iter()
            .map(|v| Vector::new(crate::linalg::add(&v.coords, &t.coords)))
            .collect();
        let facets: Vec<Facet<S>> = self
            .facets
            .iter()
            .map(|f| Facet {
                normal: f.normal.clone(),
                offset: f.offset.clone() - t.pair(&f.normal),
            })
            .collect();
        Polytope { dim: self.dim, vertices, facets, incidence: self.incidence.clone() }
    }

    /// Image under `x -> scale * (x - center)`.
    pub fn scale_about(&self, scale: &S, center: &MVector<S>) -> Result<Polytope<S>> {
        let pts: Vec<MVector<S>> = self
            .vertices
            .iter()
            .map(|v| {
                Vector::new(
                    v.coords
                        .iter()
                        .zip(&center.coords)
                        .map(|(a, c)| scale.clone() * (a.clone() - c.clone()))
                        .collect(),
                )
            })
            .collect();
        Polytope::from_vertices(self.dim, pts)
    }
}

/// Pointed rational polyhedral cone with generators in lattice `L` and the
/// dual description in `L::Dual`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCone<S, L: Lattice> {
    dim: usize,
    generators: Vec<Vector<S, L>>,
    dual_rays: Vec<Vector<S, L::Dual>>,
}

impl<S: Scalar, L: Lattice> PolyCone<S, L> {
    /// Builds a full-dimensional pointed cone from generators.
    pub fn from_generators(dim: usize, gens: Vec<Vector<S, L>>) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::Invalid("no generators".into()));
        }
        for g in &gens {
            if g.dim() != dim {
                return Err(Error::Invalid("generator dimension mismatch".into()));
            }
        }
        let rows: Vec<Vec<S>> = gens.iter().map(|g| g.coords.clone()).collect();
        if Mat::from_rows(&rows).rank() != dim {
            return Err(Error::NotFullDim);
        }
        // Dual cone rays; lineality there would mean we are not full-dim,
        // which was already excluded, so extreme_rays must succeed unless
        // the dual is lower-dimensional (cone not pointed).
        let dual = dd::extreme_rays(&rows, dim).ok_or(Error::NotPointed)?;
        let drows: Vec<Vec<S>> = dual.clone();
        if Mat::from_rows(&drows).rank() != dim {
            return Err(Error::NotPointed);
        }
        // Canonical generators: dual of the dual.
        let prim = dd::extreme_rays(&drows, dim).ok_or(Error::NotPointed)?;
        let mut generators: Vec<Vector<S, L>> = prim.into_iter().map(Vector::new).collect();
        let mut dual_rays: Vec<Vector<S, L::Dual>> = dual.into_iter().map(Vector::new).collect();
        sort_points(&mut generators);
        sort_points(&mut dual_rays);
        Ok(PolyCone { dim, generators, dual_rays })
    }

    /// Builds the dual cone description directly from facet normals.
    pub fn from_dual_rays(dim: usize, rays: Vec<Vector<S, L::Dual>>) -> Result<Self> {
        let dual_cone = PolyCone::<S, L::Dual>::from_generators(dim, rays)?;
        Ok(PolyCone {
            dim,
            generators: dual_cone.dual_rays,
            dual_rays: dual_cone.generators,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vector<S, L>] {
        &self.generators
    }

    /// Extreme rays of the dual cone (equivalently, facet normals).
    pub fn dual_rays(&self) -> &[Vector<S, L::Dual>] {
        &self.dual_rays
    }

    /// The dual cone as a first-class object.
    pub fn dual(&self) -> PolyCone<S, L::Dual> {
        PolyCone {
            dim: self.dim,
            generators: self.dual_rays.clone(),
            dual_rays: self.generators.clone(),
        }
    }

    pub fn contains(&self, x: &Vector<S, L>) -> bool {
        self.dual_rays.iter().all(|d| !x.pair(d).is_negative())
    }

    /// Strict interior test: positive pairing against every generator of
    /// the dual description.
    pub fn contains_interior(&self, x: &Vector<S, L>) -> bool {
        self.dual_rays.iter().all(|d| x.pair(d).is_positive())
    }
}

/// Full-dimensional simplex given by `dim + 1` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex<S> {
    pub vertices: Vec<MVector<S>>,
}

impl<S: Scalar> Simplex<S> {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// |det of edge matrix| (so volume = this / dim!).
    pub fn edge_det_abs(&self) -> S {
        let n = self.dim();
        let rows: Vec<Vec<S>> = (1..=n)
            .map(|i| crate::linalg::sub(&self.vertices[i].coords, &self.vertices[0].coords))
            .collect();
        Mat::from_rows(&rows).det().abs()
    }

    pub fn volume(&self) -> S {
        let n = self.dim();
        let mut f = S::one();
        for k in 2..=n {
            f = f * S::from_usize(k).unwrap();
        }
        self.edge_det_abs() / f
    }
}

/// Simplicial subcone with cached determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialCone<S, L: Lattice> {
    pub generators: Vec<Vector<S, L>>,
    pub det_abs: S,
}

impl<S: Scalar, L: Lattice> SimplicialCone<S, L> {
    pub fn new(generators: Vec<Vector<S, L>>) -> Self {
        let rows: Vec<Vec<S>> = generators.iter().map(|g| g.coords.clone()).collect();
        let det_abs = Mat::from_rows(&rows).det().abs();
        SimplicialCone { generators, det_abs }
    }
}

// ---- helpers ----

pub(crate) fn affine_rank<S: Scalar>(pts: &[Vec<S>]) -> usize {
    if pts.is_empty() {
        return 0;
    }
    if pts.len() == 1 {
        return 0;
    }
    let rows: Vec<Vec<S>> = pts[1..]
        .iter()
        .map(|p| crate::linalg::sub(p, &pts[0]))
        .collect();
    Mat::from_rows(&rows).rank()
}

fn points_equal<S: Scalar>(a: &[S], b: &[S]) -> bool {
    if S::exact() {
        a == b
    } else {
        a.iter().zip(b).all(|(x, y)| (x.clone() - y.clone()).abs().approx() < 1e-9)
    }
}

fn facets_equal<S: Scalar>(a: &Facet<S>, b: &Facet<S>) -> bool {
    points_equal(&a.normal.coords, &b.normal.coords)
        && points_equal(&[a.offset.clone()], &[b.offset.clone()])
}

pub(crate) fn sort_points<S: Scalar, L: Lattice>(pts: &mut [Vector<S, L>]) {
    pts.sort_by(|a, b| {
        a.coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| cmp_s(x, y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Fourier-Motzkin feasibility for `<x,a_i> >= -b_i` (tiny systems only;
/// used when the homogenized cone has a lineality space).
fn fm_feasible<S: Scalar>(facets: &[Facet<S>], dim: usize) -> bool {
    // Rows encode a.x + b >= 0 as (a_1..a_d, b).
    let mut rows: Vec<Vec<S>> = facets
        .iter()
        .map(|f| {
            let mut r = f.normal.coords.clone();
            r.push(f.offset.clone());
            r
        })
        .collect();
    for var in (0..dim).rev() {
        let mut lower: Vec<Vec<S>> = Vec::new(); // coeff > 0
        let mut upper: Vec<Vec<S>> = Vec::new(); // coeff < 0
        let mut rest: Vec<Vec<S>> = Vec::new();
        for r in rows {
            if r[var].is_positive() {
                lower.push(r);
            } else if r[var].is_negative() {
                upper.push(r);
            } else {
                rest.push(r);
            }
        }
        for lo in &lower {
            for hi in &upper {
                // combine: lo scaled by -hi[var], hi scaled by lo[var]
                let a = -hi[var].clone();
                let b = lo[var].clone();
                let mut comb: Vec<S> = (0..=dim)
                    .map(|j| a.clone() * lo[j].clone() + b.clone() * hi[j].clone())
                    .collect();
                comb[var] = S::zero();
                rest.push(comb);
            }
        }
        rows = rest;
    }
    // All variables eliminated: rows are constants b >= 0.
    rows.iter().all(|r| !r[dim].is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    fn rr(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    fn interval() -> Polytope<Rat> {
        // {x >= -1, -x >= -1}
        Polytope::from_hrep(
            1,
            vec![Facet::new(vec![r(1)], r(1)), Facet::new(vec![r(-1)], r(1))],
        )
        .unwrap()
    }

    #[test]
    fn interval_vertices() {
        let p = interval();
        let vs: Vec<Vec<Rat>> = p.vertices().iter().map(|v| v.coords.clone()).collect();
        assert_eq!(vs, vec![vec![r(-1)], vec![r(1)]]);
    }

    #[test]
    fn p2_polytope_from_facets() {
        // {x1 >= -1, x2 >= -1, -x1-x2 >= -1}
        let p = Polytope::from_hrep(
            2,
            vec![
                Facet::new(vec![r(1), r(0)], r(1)),
                Facet::new(vec![r(0), r(1)], r(1)),
                Facet::new(vec![r(-1), r(-1)], r(1)),
            ],
        )
        .unwrap();
        let vs: Vec<Vec<Rat>> = p.vertices().iter().map(|v| v.coords.clone()).collect();
        assert_eq!(
            vs,
            vec![vec![r(-1), r(-1)], vec![r(-1), r(2)], vec![r(2), r(-1)]]
        );
    }

    #[test]
    fn unbounded_detected() {
        // {x >= 0, x >= 1} has no upper bound.
        let e = Polytope::from_hrep(
            1,
            vec![Facet::new(vec![r(1)], r(0)), Facet::new(vec![r(1)], r(-1))],
        )
        .unwrap_err();
        assert_eq!(e, Error::Unbounded);
    }

    #[test]
    fn empty_detected() {
        // {x >= 1, -x >= 0} is empty.
        let e = Polytope::from_hrep(
            1,
            vec![Facet::new(vec![r(1)], r(-1)), Facet::new(vec![r(-1)], r(0))],
        )
        .unwrap_err();
        assert_eq!(e, Error::Empty);
    }

    #[test]
    fn vrep_roundtrip_square() {
        let pts = vec![
            Vector::new(vec![r(0), r(0)]),
            Vector::new(vec![r(1), r(0)]),
            Vector::new(vec![r(0), r(1)]),
            Vector::new(vec![r(1), r(1)]),
            Vector::new(vec![rr(1, 2), rr(1, 2)]), // interior point pruned
        ];
        let p = Polytope::from_vertices(2, pts).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.facets().len(), 4);
    }

    #[test]
    fn redundant_facet_removed() {
        let p = Polytope::from_hrep(
            1,
            vec![
                Facet::new(vec![r(1)], r(1)),
                Facet::new(vec![r(-1)], r(1)),
                Facet::new(vec![r(1)], r(5)), // x >= -5 redundant
            ],
        )
        .unwrap();
        assert_eq!(p.facets().len(), 2);
    }

    #[test]
    fn cone_roundtrip_conifold() {
        let gens = vec![
            Vector::<Rat, LatM>::new(vec![r(0), r(0), r(1)]),
            Vector::new(vec![r(1), r(0), r(1)]),
            Vector::new(vec![r(0), r(1), r(1)]),
            Vector::new(vec![r(1), r(1), r(1)]),
        ];
        let c = PolyCone::from_generators(3, gens).unwrap();
        assert_eq!(c.generators().len(), 4);
        assert_eq!(c.dual_rays().len(), 4);
        let dd = c.dual().dual();
        assert_eq!(dd.generators(), c.generators());
    }

    #[test]
    fn halfplane_not_pointed() {
        let gens = vec![
            Vector::<Rat, LatM>::new(vec![r(1), r(0)]),
            Vector::new(vec![r(-1), r(0)]),
            Vector::new(vec![r(0), r(1)]),
        ];
        let e = PolyCone::from_generators(2, gens).unwrap_err();
        assert_eq!(e, Error::NotPointed);
    }

    #[test]
    fn translate_is_exact() {
        let p = interval();
        let t = Vector::new(vec![rr(1, 3)]);
        let q = p.translate(&t);
        assert_eq!(q.vertices()[0].coords[0], rr(-2, 3));
        assert!(q.contains(&Vector::new(vec![rr(4, 3)])));
        assert!(!q.contains(&Vector::new(vec![rr(7, 5)])));
    }
}
