//! Cross sections of cones with recorded affine frames.

use super::{LatM, MVector, NVector, PolyCone, Polytope, Vector};
use crate::error::{Error, Result};
use crate::linalg::{dot, primitive_direction, unimodular_completion};
use crate::Rat;
use num_bigint::BigInt;
use num_traits::Signed;

/// Affine frame identifying the section hyperplane `{<y, chi> = 1}` with
/// coordinate space: `embed(x) = origin + sum_i x_i basis[i]`, and frame
/// coordinates of an ambient point are `x_i = <y, axes[i]>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionFrame {
    pub chi: NVector<Rat>,
    /// Primitive lattice direction of `chi`, with `chi = t * e0`.
    pub e0: Vec<BigInt>,
    pub t: Rat,
    pub origin: Vec<Rat>,
    /// Ambient directions of the frame axes (dual lattice basis vectors).
    pub basis: Vec<Vec<Rat>>,
    /// Covectors extracting frame coordinates.
    pub axes: Vec<Vec<Rat>>,
    /// The section measure is `density * n! * Lebesgue` in frame
    /// coordinates, with `density = 1/t`.
    pub density: Rat,
}

impl SectionFrame {
    pub fn ambient_dim(&self) -> usize {
        self.origin.len()
    }

    pub fn section_dim(&self) -> usize {
        self.basis.len()
    }

    /// Ambient point of frame coordinates `x`.
    pub fn embed(&self, x: &[Rat]) -> MVector<Rat> {
        let mut y = self.origin.clone();
        for (xi, b) in x.iter().zip(&self.basis) {
            for (yc, bc) in y.iter_mut().zip(b) {
                *yc = yc.clone() + xi.clone() * bc.clone();
            }
        }
        Vector::new(y)
    }

    /// Frame coordinates of an ambient point on the hyperplane.
    pub fn coords(&self, y: &MVector<Rat>) -> Vec<Rat> {
        self.axes.iter().map(|a| dot(&y.coords, a)).collect()
    }

    /// Pairing of the affine embedding against an ambient `N`-vector:
    /// returns `(linear, constant)` with `<embed(x), zeta> = linear . x + constant`.
    pub fn pair_form(&self, zeta: &NVector<Rat>) -> (Vec<Rat>, Rat) {
        let lin: Vec<Rat> = self.basis.iter().map(|b| dot(b, &zeta.coords)).collect();
        let cst = dot(&self.origin, &zeta.coords);
        (lin, cst)
    }
}

/// A cross-section polytope together with its frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub polytope: Polytope<Rat>,
    pub frame: SectionFrame,
}

impl CrossSection {
    /// Ambient vertices of the section.
    pub fn ambient_vertices(&self) -> Vec<MVector<Rat>> {
        self.polytope
            .vertices()
            .iter()
            .map(|v| self.frame.embed(&v.coords))
            .collect()
    }
}

/// Cross section `{y in cone : <y, chi> = 1}` of a pointed full-dimensional
/// cone in `M`, with frame coordinates adapted to the lattice: the frame
/// axes complete the primitive direction of `chi` to a unimodular basis.
pub fn cross_section(cone: &PolyCone<Rat, LatM>, chi: &NVector<Rat>) -> Result<CrossSection> {
    let dim = cone.dim();
    if chi.dim() != dim {
        return Err(Error::Invalid("section vector dimension mismatch".into()));
    }
    // chi must pair strictly positively with every generator, otherwise
    // the section is unbounded (or empty).
    for g in cone.generators() {
        if !g.pair(chi).is_positive() {
            return Err(Error::UnboundedSection);
        }
    }
    let (e0, t) = primitive_direction(&chi.coords).ok_or(Error::UnboundedSection)?;
    let (basis_int, dual_int) = unimodular_completion(&e0);
    // Frame origin: e0^* / t lies on the hyperplane.
    let origin: Vec<Rat> = dual_int[0]
        .iter()
        .map(|c| Rat::from_integer(c.clone()) / t.clone())
        .collect();
    let axes: Vec<Vec<Rat>> = basis_int[1..]
        .iter()
        .map(|b| b.iter().map(|c| Rat::from_integer(c.clone())).collect())
        .collect();
    let basis: Vec<Vec<Rat>> = dual_int[1..]
        .iter()
        .map(|b| b.iter().map(|c| Rat::from_integer(c.clone())).collect())
        .collect();
    let frame = SectionFrame {
        chi: chi.clone(),
        e0,
        t: t.clone(),
        origin,
        basis,
        axes,
        density: Rat::from_integer(1.into()) / t,
    };
    // Vertices of the section: scaled generators, in frame coordinates.
    let pts: Vec<MVector<Rat>> = cone
        .generators()
        .iter()
        .map(|g| {
            let s = g.pair(chi);
            let y = Vector::new(g.coords.iter().map(|c| c.clone() / s.clone()).collect());
            Vector::new(frame.coords(&y))
        })
        .collect();
    let polytope = Polytope::from_vertices(dim - 1, pts)?;
    Ok(CrossSection { polytope, frame })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    fn rr(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    fn conifold() -> PolyCone<Rat, LatM> {
        PolyCone::from_generators(
            3,
            vec![
                Vector::new(vec![r(0), r(0), r(1)]),
                Vector::new(vec![r(1), r(0), r(1)]),
                Vector::new(vec![r(0), r(1), r(1)]),
                Vector::new(vec![r(1), r(1), r(1)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn quadrant_diagonal_section_is_segment() {
        let c = PolyCone::<Rat, LatM>::from_generators(
            2,
            vec![Vector::new(vec![r(1), r(0)]), Vector::new(vec![r(0), r(1)])],
        )
        .unwrap();
        let cs = cross_section(&c, &Vector::new(vec![r(1), r(1)])).unwrap();
        assert_eq!(cs.polytope.dim(), 1);
        let mut amb: Vec<Vec<Rat>> = cs
            .ambient_vertices()
            .iter()
            .map(|v| v.coords.clone())
            .collect();
        amb.sort();
        assert_eq!(amb, vec![vec![r(0), r(1)], vec![r(1), r(0)]]);
    }

    #[test]
    fn conifold_unit_height_section_is_unit_square() {
        let cs = cross_section(&conifold(), &Vector::new(vec![r(0), r(0), r(1)])).unwrap();
        assert_eq!(cs.polytope.vertices().len(), 4);
        // Every ambient vertex lies on the hyperplane exactly.
        for v in cs.ambient_vertices() {
            assert_eq!(v.coords[2], r(1));
        }
        // Frame polytope is the unit square.
        let (lo, hi) = cs
            .polytope
            .range(&Vector::new(vec![r(1), r(0)]));
        assert_eq!((lo, hi), (r(0), r(1)));
    }

    #[test]
    fn negative_direction_unbounded() {
        let e = cross_section(&conifold(), &Vector::new(vec![r(0), r(0), r(-1)])).unwrap_err();
        assert_eq!(e, Error::UnboundedSection);
    }

    #[test]
    fn fractional_section_density() {
        let cs = cross_section(&conifold(), &Vector::new(vec![r(0), r(0), rr(3, 2)])).unwrap();
        assert_eq!(cs.frame.t, rr(3, 2));
        assert_eq!(cs.frame.density, rr(2, 3));
        // Section at height 2/3: frame polytope has side 2/3.
        let (lo, hi) = cs.polytope.range(&Vector::new(vec![r(1), r(0)]));
        assert_eq!(hi.clone() - lo, rr(2, 3));
        // Embedding lands on the hyperplane exactly.
        for v in cs.polytope.vertices() {
            let y = cs.frame.embed(&v.coords);
            assert_eq!(y.pair(&cs.frame.chi), r(1));
        }
    }
}
