//! Weighted integration over polytopes: the public face of the engine.
//!
//! Conventions: all integrals carry the Duistermaat-Heckman normalization
//! `DH = n! * Lebesgue`. Results are exact rationals whenever the weight
//! is polynomial with rational data.

use super::integrate::{
    bary_integral_exact, bary_integral_exp, expand_monomial, ExactProfile, LogLin,
};
use super::measure::{eval_poly, measure_from_mass, PiecewiseMeasure};
use super::triangulate::triangulate_polytope;
use super::{Facet, NVector, Polytope, Simplex};
#[cfg(test)]
use super::Vector;
use crate::error::{Error, Result};
use crate::scalar::{rat_from_f64, Scalar};
use crate::weights::{Expr, Weight, WeightFamily};
use crate::Rat;
use num_traits::{One, Signed, Zero};

/// An integral value: exact when the data allows, floating otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum IntegralValue {
    Exact(Rat),
    Approx(f64),
}

impl IntegralValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            IntegralValue::Exact(r) => r.approx(),
            IntegralValue::Approx(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            IntegralValue::Exact(r) => Some(r),
            IntegralValue::Approx(_) => None,
        }
    }

    fn from_loglin(v: LogLin) -> IntegralValue {
        if v.is_exact_rational() {
            IntegralValue::Exact(v.rational_part().clone())
        } else {
            IntegralValue::Approx(v.approx())
        }
    }
}

/// `n! * int_body x^monomial g(x) dx`.
///
/// The weight must be attached to `body`; integrating against any other
/// polytope is a coordinate error.
pub fn integrate(body: &Polytope<Rat>, w: &Weight, monomial: &[usize]) -> Result<IntegralValue> {
    if **w.polytope() != *body {
        return Err(Error::PolytopeMismatch);
    }
    integrate_family(body, w.family(), monomial)
}

/// Internal entry point that skips the attachment check (used for
/// sub-polytopes generated by slicing and subdivision).
pub(crate) fn integrate_family(
    body: &Polytope<Rat>,
    family: &WeightFamily,
    monomial: &[usize],
) -> Result<IntegralValue> {
    let dim = body.dim();
    let alpha = normalize_monomial(dim, monomial)?;
    let tri = triangulate_polytope(body, false);
    integrate_on_simplices(dim, &tri, family, &alpha)
}

fn normalize_monomial(dim: usize, monomial: &[usize]) -> Result<Vec<usize>> {
    if monomial.is_empty() {
        Ok(vec![0; dim])
    } else if monomial.len() == dim {
        Ok(monomial.to_vec())
    } else {
        Err(Error::Invalid("monomial length must match dimension".into()))
    }
}

fn factorial_rat(k: usize) -> Rat {
    let mut f = Rat::one();
    for j in 2..=k {
        f = f * Rat::from_integer((j as i64).into());
    }
    f
}

/// One additive component of an exactly-integrable weight:
/// `scale-bearing profile(beta + <x, xi>)` times optional affine factors.
struct ExactComponent {
    profile: ExactProfile,
    affines: Vec<(Vec<Rat>, Rat)>,
}

struct ExactIntegrand {
    xi: Vec<Rat>,
    components: Vec<ExactComponent>,
}

/// Decomposes a weight family into exactly integrable pieces, when
/// possible.
fn exact_integrand(dim: usize, family: &WeightFamily) -> Option<ExactIntegrand> {
    match family {
        WeightFamily::Constant(c) => Some(ExactIntegrand {
            xi: vec![Rat::zero(); dim],
            components: vec![ExactComponent {
                profile: ExactProfile::Poly(vec![c.clone()]),
                affines: vec![],
            }],
        }),
        WeightFamily::AffinePinned { xi, xbar } => Some(ExactIntegrand {
            xi: xi.coords.clone(),
            components: vec![ExactComponent {
                profile: ExactProfile::Poly(vec![Rat::one() - xbar.pair(xi), Rat::one()]),
                affines: vec![],
            }],
        }),
        WeightFamily::ConePower { xi, n } => Some(ExactIntegrand {
            xi: xi.coords.clone(),
            components: vec![ExactComponent {
                profile: ExactProfile::Power {
                    beta: Rat::from_integer((*n as i64 + 1).into()),
                    q: *n as i64 + 2,
                    scale: Rat::one(),
                },
                affines: vec![],
            }],
        }),
        WeightFamily::SectionTransformed {
            inner,
            ell_lin,
            ell_const,
            proj_lin,
            proj_const,
            power,
        } => match inner.family() {
            WeightFamily::Constant(c) => Some(ExactIntegrand {
                xi: ell_lin.clone(),
                components: vec![ExactComponent {
                    profile: ExactProfile::Power {
                        beta: ell_const.clone(),
                        q: *power,
                        scale: c.clone(),
                    },
                    affines: vec![],
                }],
            }),
            WeightFamily::AffinePinned { xi: xin, xbar } => {
                // ell^{-p} (1 - <xbar,xi>) + ell^{-p-1} <B x + c, xi>
                let c0 = Rat::one() - xbar.pair(xin);
                let mut lin2 = vec![Rat::zero(); dim];
                let mut cst2 = Rat::zero();
                for (i, xi_c) in xin.coords.iter().enumerate() {
                    for (j, v) in proj_lin[i].iter().enumerate() {
                        lin2[j] = lin2[j].clone() + xi_c.clone() * v.clone();
                    }
                    cst2 = cst2 + xi_c.clone() * proj_const[i].clone();
                }
                Some(ExactIntegrand {
                    xi: ell_lin.clone(),
                    components: vec![
                        ExactComponent {
                            profile: ExactProfile::Power {
                                beta: ell_const.clone(),
                                q: *power,
                                scale: c0,
                            },
                            affines: vec![],
                        },
                        ExactComponent {
                            profile: ExactProfile::Power {
                                beta: ell_const.clone(),
                                q: *power + 1,
                                scale: Rat::one(),
                            },
                            affines: vec![(lin2, cst2)],
                        },
                    ],
                })
            }
            WeightFamily::ConePower { xi: xin, n } if *n as i64 + 2 == *power => {
                // ((n+1) ell(x) + <B x + c, xi>)^{-(n+2)}: a single affine
                // power since the section factor cancels exactly.
                let np1 = Rat::from_integer((*n as i64 + 1).into());
                let mut lin = crate::linalg::scale(&np1, ell_lin);
                let mut cst = np1 * ell_const.clone();
                for (i, xi_c) in xin.coords.iter().enumerate() {
                    for (j, v) in proj_lin[i].iter().enumerate() {
                        lin[j] = lin[j].clone() + xi_c.clone() * v.clone();
                    }
                    cst = cst + xi_c.clone() * proj_const[i].clone();
                }
                Some(ExactIntegrand {
                    xi: lin,
                    components: vec![ExactComponent {
                        profile: ExactProfile::Power { beta: cst, q: *power, scale: Rat::one() },
                        affines: vec![],
                    }],
                })
            }
            _ => None,
        },
        _ => None,
    }
}

fn integrate_on_simplices(
    dim: usize,
    tri: &[Simplex<Rat>],
    family: &WeightFamily,
    alpha: &[usize],
) -> Result<IntegralValue> {
    if let Some(integrand) = exact_integrand(dim, family) {
        let mut total = LogLin::zero();
        for sx in tri {
            let det = sx.edge_det_abs();
            if det.is_zero() {
                continue;
            }
            let verts: Vec<&[Rat]> = sx.vertices.iter().map(|v| &v.coords[..]).collect();
            let cvals: Vec<Rat> = verts
                .iter()
                .map(|v| crate::linalg::dot(v, &integrand.xi))
                .collect();
            let base_terms = expand_monomial(&verts, alpha);
            for comp in &integrand.components {
                let mut terms = base_terms.clone();
                for (lin, cst) in &comp.affines {
                    terms = multiply_affine(&terms, &verts, lin, cst);
                }
                let v = bary_integral_exact(&det, &cvals, &terms, &comp.profile)?;
                total = total.add(&v);
            }
        }
        return Ok(IntegralValue::from_loglin(total.scale(&factorial_rat(dim))));
    }
    match family {
        WeightFamily::Exponential { xi } => {
            let xif: Vec<f64> = xi.coords.iter().map(|c| c.approx()).collect();
            let mut total = 0.0;
            for sx in tri {
                let det = sx.edge_det_abs().approx();
                if det == 0.0 {
                    continue;
                }
                let verts: Vec<&[Rat]> = sx.vertices.iter().map(|v| &v.coords[..]).collect();
                let vertsf: Vec<Vec<f64>> =
                    verts.iter().map(|v| v.iter().map(|c| c.approx()).collect()).collect();
                let cvals: Vec<f64> = vertsf
                    .iter()
                    .map(|v| v.iter().zip(&xif).map(|(a, b)| a * b).sum())
                    .collect();
                let termsr = expand_monomial(&verts, alpha);
                let terms: Vec<(f64, Vec<usize>)> =
                    termsr.into_iter().map(|(c, r)| (c.approx(), r)).collect();
                total += bary_integral_exp(det, &cvals, &terms);
            }
            Ok(IntegralValue::Approx(total * super::integrate::factorial_f64(dim)))
        }
        WeightFamily::Composite { b, xi } => {
            composite_integral(dim, tri, b, xi, alpha).map(IntegralValue::Approx)
        }
        WeightFamily::SectionTransformed { .. } => Err(Error::UnsupportedWeight(
            "transformed weight with a non-polynomial core: evaluation only".into(),
        )),
        _ => unreachable!("exact families handled above"),
    }
}

/// Multiplies barycentric terms by an affine factor via its vertex values.
fn multiply_affine(
    terms: &[(Rat, Vec<usize>)],
    verts: &[&[Rat]],
    lin: &[Rat],
    cst: &Rat,
) -> Vec<(Rat, Vec<usize>)> {
    let vals: Vec<Rat> = verts
        .iter()
        .map(|v| cst.clone() + crate::linalg::dot(v, lin))
        .collect();
    let mut out: std::collections::BTreeMap<Vec<usize>, Rat> = std::collections::BTreeMap::new();
    for (coef, r) in terms {
        for (i, val) in vals.iter().enumerate() {
            if val.is_zero() {
                continue;
            }
            let mut nr = r.clone();
            nr[i] += 1;
            let add = coef.clone() * val.clone();
            out.entry(nr).and_modify(|c| *c = c.clone() + add.clone()).or_insert(add);
        }
    }
    out.into_iter().map(|(r, c)| (c, r)).collect()
}

// --------------------------------------------------------------- moments

#[derive(Debug, Clone)]
pub struct Moments {
    pub mass: f64,
    pub barycenter: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

/// Weighted mass, barycenter and covariance, `DH`-normalized.
pub fn moments(body: &Polytope<Rat>, w: &Weight) -> Result<Moments> {
    if **w.polytope() != *body {
        return Err(Error::PolytopeMismatch);
    }
    let dim = body.dim();
    let mass = integrate(body, w, &[])?.to_f64();
    if mass <= 0.0 {
        return Err(Error::WeightNonpositive("zero or negative total mass".into()));
    }
    let mut bary = vec![0.0; dim];
    for k in 0..dim {
        let mut alpha = vec![0usize; dim];
        alpha[k] = 1;
        bary[k] = integrate(body, w, &alpha)?.to_f64() / mass;
    }
    let mut cov = vec![vec![0.0; dim]; dim];
    for k in 0..dim {
        for l in k..dim {
            let mut alpha = vec![0usize; dim];
            alpha[k] += 1;
            alpha[l] += 1;
            let second = integrate(body, w, &alpha)?.to_f64() / mass;
            let c = second - bary[k] * bary[l];
            cov[k][l] = c;
            cov[l][k] = c;
        }
    }
    Ok(Moments { mass, barycenter: bary, covariance: cov })
}

/// Exact moments for polynomial weights: `(mass, barycenter, covariance)`.
pub fn moments_exact(
    body: &Polytope<Rat>,
    w: &Weight,
) -> Result<(Rat, Vec<Rat>, crate::linalg::Mat<Rat>)> {
    if **w.polytope() != *body {
        return Err(Error::PolytopeMismatch);
    }
    if w.poly_degree().is_none() {
        return Err(Error::UnsupportedWeight("exact moments need a polynomial weight".into()));
    }
    let dim = body.dim();
    let exact = |alpha: &[usize]| -> Result<Rat> {
        match integrate(body, w, alpha)? {
            IntegralValue::Exact(r) => Ok(r),
            IntegralValue::Approx(_) => unreachable!("polynomial weight"),
        }
    };
    let mass = exact(&[])?;
    if !mass.is_positive() {
        return Err(Error::WeightNonpositive("nonpositive mass".into()));
    }
    let mut bary = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut alpha = vec![0usize; dim];
        alpha[k] = 1;
        bary.push(exact(&alpha)? / mass.clone());
    }
    let mut cov = crate::linalg::Mat::zeros(dim, dim);
    for k in 0..dim {
        for l in k..dim {
            let mut alpha = vec![0usize; dim];
            alpha[k] += 1;
            alpha[l] += 1;
            let c = exact(&alpha)? / mass.clone() - bary[k].clone() * bary[l].clone();
            *cov.at_mut(k, l) = c.clone();
            *cov.at_mut(l, k) = c;
        }
    }
    Ok((mass, bary, cov))
}

// ---------------------------------------------------------- pushforwards

/// Sub-polytope `body ∩ {<x, ell> <= s}`; `None` when it has no volume.
fn sublevel(body: &Polytope<Rat>, ell: &NVector<Rat>, s: &Rat) -> Result<Option<Polytope<Rat>>> {
    let mut facets = body.facets().to_vec();
    facets.push(Facet::new(
        ell.coords.iter().map(|c| -c.clone()).collect(),
        s.clone(),
    ));
    match Polytope::from_hrep(body.dim(), facets) {
        Ok(p) => Ok(Some(p)),
        Err(Error::Empty) | Err(Error::NotFullDim) => Ok(None),
        Err(e) => Err(e),
    }
}

fn line_breakpoints(body: &Polytope<Rat>, ell: &NVector<Rat>) -> Vec<Rat> {
    let mut vals: Vec<Rat> = body.vertices().iter().map(|v| v.pair(ell)).collect();
    vals.sort_by(crate::scalar::cmp_s);
    vals.dedup();
    vals
}

/// Pushforward of `g * DH` under `x -> <x, ell>`, exact densities.
/// Requires a polynomial weight.
pub fn pushforward_1d_exact(
    body: &Polytope<Rat>,
    w: &Weight,
    ell: &NVector<Rat>,
) -> Result<PiecewiseMeasure<Rat>> {
    if **w.polytope() != *body {
        return Err(Error::PolytopeMismatch);
    }
    let deg = w
        .poly_degree()
        .ok_or_else(|| Error::UnsupportedWeight("exact pushforward needs polynomial weight".into()))?;
    let breaks = line_breakpoints(body, ell);
    if breaks.len() < 2 {
        return Err(Error::Invalid("direction is constant on the polytope".into()));
    }
    let family = w.family().clone();
    measure_from_mass(&breaks, body.dim() + deg, false, |s| {
        match sublevel(body, ell, s)? {
            None => Ok(Rat::zero()),
            Some(p) => match integrate_family(&p, &family, &[])? {
                IntegralValue::Exact(r) => Ok(r),
                IntegralValue::Approx(_) => unreachable!("polynomial weight"),
            },
        }
    })
}

/// Pushforward of `g * DH` under `x -> <x, ell>` for any weight family.
pub fn pushforward_1d(
    body: &Polytope<Rat>,
    w: &Weight,
    ell: &NVector<Rat>,
) -> Result<PiecewiseMeasure<f64>> {
    if w.poly_degree().is_some() {
        return Ok(pushforward_1d_exact(body, w, ell)?.approx());
    }
    if **w.polytope() != *body {
        return Err(Error::PolytopeMismatch);
    }
    let breaks_r = line_breakpoints(body, ell);
    if breaks_r.len() < 2 {
        return Err(Error::Invalid("direction is constant on the polytope".into()));
    }
    let breaks: Vec<f64> = breaks_r.iter().map(|b| b.approx()).collect();
    let family = w.family().clone();
    measure_from_mass(&breaks, body.dim() + 12, true, |s| {
        let sr = rat_from_f64(*s);
        match sublevel(body, ell, &sr)? {
            None => Ok(0.0),
            Some(p) => Ok(integrate_family(&p, &family, &[])?.to_f64()),
        }
    })
}

// ------------------------------------------------------ composite weights

/// Integrates a composite weight by pushing the monomial measure forward
/// along the profile direction and integrating `b` against the exact
/// piecewise-polynomial density with adaptive Gauss-Legendre quadrature.
fn composite_integral(
    dim: usize,
    tri: &[Simplex<Rat>],
    b: &Expr,
    xi: &NVector<Rat>,
    alpha: &[usize],
) -> Result<f64> {
    // Reassemble the parent polytope information we need: breakpoints and
    // sublevel masses come from the simplices directly.
    if xi.is_zero() {
        // Degenerate direction: b is constant on the polytope.
        let c = b.eval(0.0);
        let one = WeightFamily::Constant(Rat::one());
        let base = integrate_on_simplices(dim, tri, &one, alpha)?;
        return Ok(c * base.to_f64());
    }
    let mut vals: Vec<Rat> = Vec::new();
    for sx in tri {
        for v in &sx.vertices {
            vals.push(crate::linalg::dot(&v.coords, &xi.coords));
        }
    }
    vals.sort_by(crate::scalar::cmp_s);
    vals.dedup();
    // Exact monomial pushforward: mass(s) = n! int_{<=s} x^alpha dx over
    // the union of simplices.
    let density_deg = dim + alpha.iter().sum::<usize>();
    let measure = measure_from_mass(&vals, density_deg, false, |s| {
        let mut acc = Rat::zero();
        for sx in tri {
            if let Some(p) = simplex_sublevel(sx, xi, s)? {
                let tri2 = triangulate_polytope(&p, false);
                if let IntegralValue::Exact(r) = integrate_on_simplices(
                    dim,
                    &tri2,
                    &WeightFamily::Constant(Rat::one()),
                    alpha,
                )? {
                    acc = acc + r;
                }
            }
        }
        Ok(acc)
    })?;
    // Integrate b against the density, interval by interval.
    let mut total = 0.0;
    for i in 0..measure.densities.len() {
        let a = measure.breakpoints[i].approx();
        let bb = measure.breakpoints[i + 1].approx();
        let coeffs: Vec<f64> = measure.densities[i].iter().map(|c| c.approx()).collect();
        let f = |s: f64| b.eval(s) * eval_poly(&coeffs, &(s - a));
        total += adaptive_gl(&f, a, bb, 1e-13, 24);
    }
    Ok(total)
}

fn simplex_sublevel(
    sx: &Simplex<Rat>,
    ell: &NVector<Rat>,
    s: &Rat,
) -> Result<Option<Polytope<Rat>>> {
    let p = Polytope::from_vertices(sx.dim(), sx.vertices.clone())?;
    sublevel(&p, ell, s)
}

// -------------------------------------------------- Gauss-Legendre nodes

/// Nodes and weights on [-1, 1], computed by Newton iteration.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn gl_fixed(f: &impl Fn(f64) -> f64, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive Gauss-Legendre by interval bisection.
pub fn adaptive_gl(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        nodes: &[f64],
        weights: &[f64],
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = gl_fixed(f, a, m, nodes, weights);
        let right = gl_fixed(f, m, b, nodes, weights);
        if depth == 0 || (left + right - whole).abs() <= tol * (1.0 + whole.abs()) {
            return left + right;
        }
        recurse(f, a, m, left, tol, nodes, weights, depth - 1)
            + recurse(f, m, b, right, tol, nodes, weights, depth - 1)
    }
    let whole = gl_fixed(f, a, b, &nodes, &weights);
    recurse(f, a, b, whole, tol, &nodes, &weights, 12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polykernel::Facet;
    use std::sync::Arc;

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    fn rr(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    fn interval() -> Arc<Polytope<Rat>> {
        Arc::new(
            Polytope::from_hrep(
                1,
                vec![Facet::new(vec![r(1)], r(1)), Facet::new(vec![r(-1)], r(1))],
            )
            .unwrap(),
        )
    }

    fn p2() -> Arc<Polytope<Rat>> {
        Arc::new(
            Polytope::from_hrep(
                2,
                vec![
                    Facet::new(vec![r(1), r(0)], r(1)),
                    Facet::new(vec![r(0), r(1)], r(1)),
                    Facet::new(vec![r(-1), r(-1)], r(1)),
                ],
            )
            .unwrap(),
        )
    }

    fn bl1p2() -> Arc<Polytope<Rat>> {
        Arc::new(
            Polytope::from_vertices(
                2,
                vec![
                    Vector::new(vec![r(-1), r(0)]),
                    Vector::new(vec![r(0), r(-1)]),
                    Vector::new(vec![r(2), r(-1)]),
                    Vector::new(vec![r(-1), r(2)]),
                ],
            )
            .unwrap(),
        )
    }

    #[test]
    fn interval_mass() {
        let p = interval();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        assert_eq!(integrate(&p, &w, &[]).unwrap(), IntegralValue::Exact(r(2)));
    }

    #[test]
    fn interval_exponential_mass() {
        let p = interval();
        let w = Weight::exponential(p.clone(), vec![r(1)]).unwrap();
        let v = integrate(&p, &w, &[]).unwrap().to_f64();
        assert!((v - 2.0 * 1f64.sinh()).abs() < 1e-14);
    }

    #[test]
    fn p2_area_with_convention() {
        let p = p2();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        // 2! * area(P) = 2 * 9/2 = 9.
        assert_eq!(integrate(&p, &w, &[]).unwrap(), IntegralValue::Exact(r(9)));
    }

    #[test]
    fn interval_second_moment() {
        let p = interval();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        let (mass, bary, cov) = moments_exact(&p, &w).unwrap();
        assert_eq!(mass, r(2));
        assert_eq!(bary[0], r(0));
        assert_eq!(cov.at(0, 0), &rr(1, 3));
    }

    #[test]
    fn bl1p2_barycenter() {
        let p = bl1p2();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        let (_, bary, _) = moments_exact(&p, &w).unwrap();
        assert_eq!(bary, vec![rr(1, 12), rr(1, 12)]);
    }

    #[test]
    fn barycenter_translation_equivariance() {
        let p = bl1p2();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        let (_, bary, cov) = moments_exact(&p, &w).unwrap();
        let t = Vector::new(vec![rr(3, 7), rr(-2, 5)]);
        let q = Arc::new(p.translate(&t));
        let wq = Weight::constant(q.clone(), r(1)).unwrap();
        let (_, bary_t, cov_t) = moments_exact(&q, &wq).unwrap();
        assert_eq!(bary_t[0], bary[0].clone() + t.coords[0].clone());
        assert_eq!(bary_t[1], bary[1].clone() + t.coords[1].clone());
        assert_eq!(cov, cov_t);
    }

    #[test]
    fn attachment_enforced() {
        let p = interval();
        let w = Weight::constant(p, r(1)).unwrap();
        let other = p2();
        assert!(matches!(
            integrate(&other, &w, &[]).unwrap_err(),
            Error::PolytopeMismatch
        ));
    }

    #[test]
    fn pushforward_density_examples() {
        // Unit square, ell = (1,0): density 2 on [0,1] (factor n! = 2).
        let sq = Arc::new(
            Polytope::from_vertices(
                2,
                vec![
                    Vector::new(vec![r(0), r(0)]),
                    Vector::new(vec![r(1), r(0)]),
                    Vector::new(vec![r(0), r(1)]),
                    Vector::new(vec![r(1), r(1)]),
                ],
            )
            .unwrap(),
        );
        let w = Weight::constant(sq.clone(), r(1)).unwrap();
        let m = pushforward_1d_exact(&sq, &w, &Vector::new(vec![r(1), r(0)])).unwrap();
        assert_eq!(m.density_at(&rr(1, 2)), r(2));
        assert_eq!(m.total_mass(), r(2));

        // Bl1 P^2, ell = (1,1): density 2(s+2) on [-1,1].
        let p = bl1p2();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        let m = pushforward_1d_exact(&p, &w, &Vector::new(vec![r(1), r(1)])).unwrap();
        assert_eq!(m.density_at(&rr(1, 2)), r(5)); // 2*(1/2+2)
        assert_eq!(m.density_at(&rr(-1, 2)), r(3));
        assert_eq!(m.total_mass(), r(8));

        // Interval, ell = 1: density 1.
        let iv = interval();
        let wi = Weight::constant(iv.clone(), r(1)).unwrap();
        let m = pushforward_1d_exact(&iv, &wi, &Vector::new(vec![r(1)])).unwrap();
        assert_eq!(m.density_at(&rr(1, 3)), r(1));
    }

    #[test]
    fn pushforward_moment_consistency() {
        // int s^k d(pushforward) == integrate with the expanded monomial,
        // for k <= 4 (here along a coordinate direction so the monomial
        // expansion is immediate).
        let p = bl1p2();
        for w in [
            Weight::constant(p.clone(), r(1)).unwrap(),
            Weight::exponential(p.clone(), vec![rr(1, 3), rr(-1, 5)]).unwrap(),
        ] {
            let ell = Vector::new(vec![r(1), r(0)]);
            let m = pushforward_1d(&p, &w, &ell).unwrap();
            for k in 0..=4usize {
                let lhs = m.moment(k);
                let rhs = integrate(&p, &w, &[k, 0]).unwrap().to_f64();
                assert!(
                    (lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()),
                    "k={k}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn composite_matches_exponential() {
        let p = interval();
        let we = Weight::exponential(p.clone(), vec![rr(1, 2)]).unwrap();
        let wc =
            Weight::composite(p.clone(), Expr::parse("exp(s)").unwrap(), vec![rr(1, 2)]).unwrap();
        for alpha in [vec![0usize], vec![1], vec![2]] {
            let a = integrate(&p, &we, &alpha).unwrap().to_f64();
            let b = integrate(&p, &wc, &alpha).unwrap().to_f64();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn cone_power_exact_mass() {
        // int_{-1}^1 (2+s)^{-3} ds = 1/2 [ (1)^{-2} - (3)^{-2} ] = 4/9.
        let p = interval();
        let w = Weight::cone_power(p.clone(), vec![r(1)], 1).unwrap();
        let v = integrate(&p, &w, &[]).unwrap();
        assert_eq!(v, IntegralValue::Exact(rr(4, 9)));
    }

    #[test]
    fn triangulation_independence_exact() {
        let p = bl1p2();
        let w = Weight::affine_pinned(p.clone(), vec![rr(1, 4), rr(1, 8)], vec![r(0), r(0)])
            .unwrap();
        let t1 = triangulate_polytope(&p, false);
        let t2 = triangulate_polytope(&p, true);
        let a = integrate_on_simplices(2, &t1, w.family(), &[1, 1]).unwrap();
        let b = integrate_on_simplices(2, &t2, w.family(), &[1, 1]).unwrap();
        assert_eq!(a, b);
    }
}
