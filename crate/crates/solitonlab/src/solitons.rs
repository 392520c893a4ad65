//! Weighted Futaki invariants and canonical soliton vectors.
//!
//! Each weight family has a potential whose critical point is the soliton
//! vector: strictly convex for the exponential family, strictly concave
//! for the cone family, and quadratic (closed form) for the pinned affine
//! family. Futaki residuals are the potential gradients.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::polykernel::integrate::{bary_integral_exact, expdd, ExactProfile};
use crate::polykernel::triangulate::triangulate_polytope;
use crate::polykernel::weighted::{integrate, moments_exact, IntegralValue};
use crate::scalar::{rat_from_f64, Scalar};
use crate::weights::{Weight, WeightFamily};
use crate::{QPolytope, Rat, Vector};
use num_traits::{One, Signed, Zero};
use std::sync::Arc;

/// `futaki(P, g, zeta) = - n! * int_P <x, zeta> g(x) dx`.
///
/// The sign is pinned so that the necessary vanishing condition for a
/// soliton reads `futaki = 0` componentwise, and the normalized invariant
/// `Fut_g = futaki / V_g` enters the twist identities of the
/// non-Archimedean calculus.
pub fn futaki(body: &QPolytope, w: &Weight, zeta: &[Rat]) -> Result<IntegralValue> {
    if zeta.len() != body.dim() {
        return Err(Error::Invalid("zeta dimension mismatch".into()));
    }
    let mut exact = Some(Rat::zero());
    let mut approx = 0.0f64;
    for (k, z) in zeta.iter().enumerate() {
        if z.is_zero() {
            continue;
        }
        let mut alpha = vec![0usize; body.dim()];
        alpha[k] = 1;
        match integrate(body, w, &alpha)? {
            IntegralValue::Exact(r) => {
                let term = z.clone() * r;
                approx += term.approx();
                if let Some(e) = exact.as_mut() {
                    *e = e.clone() + term;
                }
            }
            IntegralValue::Approx(v) => {
                approx += z.approx() * v;
                exact = None;
            }
        }
    }
    Ok(match exact {
        Some(e) => IntegralValue::Exact(-e),
        None => IntegralValue::Approx(-approx),
    })
}

/// Weight family selector for the soliton solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolitonFamily {
    /// `g = e^{<x, xi>}` (Kahler-Ricci).
    KahlerRicci,
    /// `g = 1 + <x - xbar, xi>` (Mabuchi), closed-form linear solve.
    Mabuchi,
    /// `g = (n + 1 + <x, xi>)^{-(n+2)}` (Ricci-flat cone reduction).
    ConePower { n: usize },
}

#[derive(Debug, Clone)]
pub struct SolitonSolution {
    pub xi: Vec<f64>,
    /// Exact solution vector when the family admits one (Mabuchi).
    pub xi_exact: Option<Vec<Rat>>,
    /// `max_k |int x_k g dDH|` at the returned vector.
    pub residual: f64,
    pub iterations: usize,
    /// Weight positivity on the polytope at the returned vector.
    pub feasible: bool,
    /// Potential value at the returned vector.
    pub potential: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Stop when the sup-norm gradient falls below `tol * V_g`.
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_iterations: 100, tol: 1e-12 }
    }
}

/// Solves the vanishing condition `int x_k g_xi dDH = 0` for the family.
pub fn solve_weight_vector(
    body: &Arc<QPolytope>,
    family: SolitonFamily,
    opts: SolveOptions,
) -> Result<SolitonSolution> {
    match family {
        SolitonFamily::Mabuchi => solve_mabuchi(body),
        SolitonFamily::KahlerRicci => solve_newton(body, NewtonFamily::Exp, opts),
        SolitonFamily::ConePower { n } => solve_newton(body, NewtonFamily::Cone { n }, opts),
    }
}

/// Mabuchi: closed form `xi = -C^{-1} xbar` over the rationals, followed
/// by the exact vertex feasibility check. Infeasibility is reported in the
/// flag, not as an error.
fn solve_mabuchi(body: &Arc<QPolytope>) -> Result<SolitonSolution> {
    let one = Weight::constant(body.clone(), Rat::one())?;
    let (_mass, bary, cov) = moments_exact(body, &one)?;
    let xi = cov
        .solve(&bary)
        .ok_or_else(|| Error::Infeasible("degenerate covariance".into()))?
        .into_iter()
        .map(|c| -c)
        .collect::<Vec<Rat>>();
    let w = Weight::unchecked(
        WeightFamily::AffinePinned {
            xi: Vector::new(xi.clone()),
            xbar: Vector::new(bary.clone()),
        },
        body.clone(),
    );
    let feasible = w.is_positive()?;
    // Residual of the vanishing condition, computed exactly.
    let mut residual = Rat::zero();
    for k in 0..body.dim() {
        let mut alpha = vec![0usize; body.dim()];
        alpha[k] = 1;
        if let IntegralValue::Exact(r) = crate::polykernel::weighted::integrate_family(
            body,
            w.family(),
            &alpha,
        )? {
            let a = r.abs();
            if a > residual {
                residual = a;
            }
        }
    }
    // Quadratic potential value at the solution.
    let dim = body.dim();
    let mut potential = 0.0;
    {
        let xif: Vec<f64> = xi.iter().map(|c| c.approx()).collect();
        let baryf: Vec<f64> = bary.iter().map(|c| c.approx()).collect();
        let mass = crate::polykernel::weighted::integrate(body, &one, &[])?.to_f64();
        // V(xi) = int [ l_xi + <x-xbar,xi>^2/2 ] dDH
        let mut lin = 0.0;
        let mut quad = 0.0;
        for k in 0..dim {
            let mut alpha = vec![0usize; dim];
            alpha[k] = 1;
            let m1 = crate::polykernel::weighted::integrate(body, &one, &alpha)?.to_f64();
            lin += xif[k] * m1;
            for l in 0..dim {
                let mut alpha2 = vec![0usize; dim];
                alpha2[k] += 1;
                alpha2[l] += 1;
                let m2 = crate::polykernel::weighted::integrate(body, &one, &alpha2)?.to_f64();
                quad += xif[k] * xif[l] * (m2 - mass * baryf[k] * baryf[l]);
            }
        }
        potential = potential + lin + 0.5 * quad;
    }
    Ok(SolitonSolution {
        xi: xi.iter().map(|c| c.approx()).collect(),
        xi_exact: Some(xi),
        residual: residual.approx(),
        iterations: 0,
        feasible,
        potential,
    })
}

enum NewtonFamily {
    Exp,
    Cone { n: usize },
}

/// Precomputed simplex data for the Newton loop.
struct TriData {
    dets: Vec<Rat>,
    verts: Vec<Vec<Vec<Rat>>>,
    detsf: Vec<f64>,
    vertsf: Vec<Vec<Vec<f64>>>,
}

fn tri_data(body: &QPolytope) -> TriData {
    let tri = triangulate_polytope(body, false);
    let mut dets = Vec::new();
    let mut verts = Vec::new();
    for sx in &tri {
        dets.push(sx.edge_det_abs());
        verts.push(sx.vertices.iter().map(|v| v.coords.clone()).collect());
    }
    let detsf = dets.iter().map(|d| d.approx()).collect();
    let vertsf = verts
        .iter()
        .map(|sx: &Vec<Vec<Rat>>| {
            sx.iter()
                .map(|v| v.iter().map(|c| c.approx()).collect())
                .collect()
        })
        .collect();
    TriData { dets, verts, detsf, vertsf }
}

/// Potential value, gradient and Hessian at `xi` for the Newton families.
/// Conventions: for Exp the potential is `int e^{l_xi} dDH` (minimized);
/// for Cone it is `-(n+1)^{-1} int (n+1+l_xi)^{-(n+1)} dDH` (maximized, so
/// the solver minimizes its negative).
fn potential_data(
    td: &TriData,
    fam: &NewtonFamily,
    dim: usize,
    xi: &[f64],
    need_hess: bool,
) -> Result<(f64, Vec<f64>, Mat<f64>)> {
    let nfac: f64 = (1..=dim).map(|i| i as f64).product();
    let mut val = 0.0;
    let mut grad = vec![0.0; dim];
    let mut hess = Mat::<f64>::zeros(dim, dim);
    match fam {
        NewtonFamily::Exp => {
            for (det, verts) in td.detsf.iter().zip(&td.vertsf) {
                let c: Vec<f64> = verts
                    .iter()
                    .map(|v| v.iter().zip(xi).map(|(a, b)| a * b).sum())
                    .collect();
                let mut nodes = c.clone();
                val += det * expdd(&nodes);
                for i in 0..verts.len() {
                    nodes.push(c[i]);
                    let di = expdd(&nodes);
                    for k in 0..dim {
                        grad[k] += det * verts[i][k] * di;
                    }
                    if need_hess {
                        for j in i..verts.len() {
                            nodes.push(c[j]);
                            let dij = expdd(&nodes) * if i == j { 2.0 } else { 1.0 };
                            nodes.pop();
                            for k in 0..dim {
                                for l in 0..dim {
                                    let sym = if i == j {
                                        verts[i][k] * verts[j][l]
                                    } else {
                                        verts[i][k] * verts[j][l] + verts[j][k] * verts[i][l]
                                    };
                                    *hess.at_mut(k, l) += det * sym * dij;
                                }
                            }
                        }
                    }
                    nodes.pop();
                }
            }
            val *= nfac;
            for g in grad.iter_mut() {
                *g *= nfac;
            }
            for k in 0..dim {
                for l in 0..dim {
                    *hess.at_mut(k, l) *= nfac;
                }
            }
        }
        NewtonFamily::Cone { n } => {
            // Exact rational divided differences at the rationalized
            // iterate keep clustered nodes stable.
            let np1 = Rat::from_integer((*n as i64 + 1).into());
            let xir: Vec<Rat> = xi.iter().map(|&v| rat_from_f64(v)).collect();
            let prof_val = ExactProfile::Power {
                beta: np1.clone(),
                q: *n as i64 + 1,
                scale: -Rat::one() / np1.clone(),
            };
            let prof_grad = ExactProfile::Power {
                beta: np1.clone(),
                q: *n as i64 + 2,
                scale: Rat::one(),
            };
            let prof_hess = ExactProfile::Power {
                beta: np1.clone(),
                q: *n as i64 + 3,
                scale: -Rat::from_integer((*n as i64 + 2).into()),
            };
            for (det, verts) in td.dets.iter().zip(&td.verts) {
                let c: Vec<Rat> = verts
                    .iter()
                    .map(|v| crate::linalg::dot(v, &xir))
                    .collect();
                // Admissibility: n+1+c_i > 0 at every vertex.
                for ci in &c {
                    if !(np1.clone() + ci.clone()).is_positive() {
                        return Err(Error::WeightDomain);
                    }
                }
                let nv = verts.len();
                let unit = vec![(Rat::one(), vec![0usize; nv])];
                val += bary_integral_exact(det, &c, &unit, &prof_val)?.approx();
                for i in 0..nv {
                    let mut r = vec![0usize; nv];
                    r[i] = 1;
                    let term = vec![(Rat::one(), r)];
                    let di = bary_integral_exact(det, &c, &term, &prof_grad)?.approx();
                    for k in 0..dim {
                        grad[k] += verts[i][k].approx() * di;
                    }
                }
                if need_hess {
                    // bary_integral_exact already includes the r! factor,
                    // so the (i,i) term needs no extra multiplier.
                    for i in 0..nv {
                        for j in i..nv {
                            let mut r = vec![0usize; nv];
                            r[i] += 1;
                            r[j] += 1;
                            let term = vec![(Rat::one(), r)];
                            let dij = bary_integral_exact(det, &c, &term, &prof_hess)?.approx();
                            for k in 0..dim {
                                for l in 0..dim {
                                    let sym = if i == j {
                                        verts[i][k].approx() * verts[j][l].approx()
                                    } else {
                                        verts[i][k].approx() * verts[j][l].approx()
                                            + verts[j][k].approx() * verts[i][l].approx()
                                    };
                                    *hess.at_mut(k, l) += sym * dij;
                                }
                            }
                        }
                    }
                }
            }
            val *= nfac;
            for g in grad.iter_mut() {
                *g *= nfac;
            }
            for k in 0..dim {
                for l in 0..dim {
                    *hess.at_mut(k, l) *= nfac;
                }
            }
        }
    }
    Ok((val, grad, hess))
}

/// Damped Newton on the convex potential (Exp) or on the negative of the
/// concave potential (Cone). Backtracking keeps Cone iterates inside the
/// admissible domain.
fn solve_newton(
    body: &Arc<QPolytope>,
    fam: NewtonFamily,
    opts: SolveOptions,
) -> Result<SolitonSolution> {
    let dim = body.dim();
    let td = tri_data(body);
    let sign = match fam {
        NewtonFamily::Exp => 1.0,
        NewtonFamily::Cone { .. } => -1.0,
    };
    let mut xi = vec![0.0; dim];
    let (mut val, mut grad, mut hess) = potential_data(&td, &fam, dim, &xi, true)?;
    let mut iterations = 0usize;
    loop {
        // V_g at the current iterate scales the convergence test.
        let vg = match fam {
            NewtonFamily::Exp => val,
            NewtonFamily::Cone { n } => {
                // mass = -(n+1) * potential for the cone profile
                ((n as f64) + 1.0) * val.abs()
            }
        };
        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm < opts.tol * vg.max(1e-300) {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NewtonDiverged(format!(
                "no convergence after {} iterations (|grad| = {gnorm:.3e})",
                opts.max_iterations
            )));
        }
        iterations += 1;
        // Newton direction for minimizing sign*V.
        let rhs: Vec<f64> = grad.iter().map(|g| -sign * g).collect();
        let hessm = {
            let mut m = Mat::<f64>::zeros(dim, dim);
            for k in 0..dim {
                for l in 0..dim {
                    *m.at_mut(k, l) = sign * hess.at(k, l);
                }
            }
            m
        };
        let step = hessm
            .solve(&rhs)
            .ok_or_else(|| Error::NewtonDiverged("singular Hessian".into()))?;
        let slope: f64 = grad.iter().zip(&step).map(|(g, s)| sign * g * s).sum();
        let mut alpha = 1.0f64;
        let mut accepted = None;
        for _ in 0..70 {
            let cand: Vec<f64> = xi.iter().zip(&step).map(|(x, s)| x + alpha * s).collect();
            match potential_data(&td, &fam, dim, &cand, true) {
                Ok((v, g, h)) => {
                    if sign * v <= sign * val + 1e-4 * alpha * slope {
                        accepted = Some((cand, v, g, h));
                        break;
                    }
                }
                Err(Error::WeightDomain) => {} // step left the domain: halve
                Err(e) => return Err(e),
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((cand, v, g, h)) => {
                xi = cand;
                val = v;
                grad = g;
                hess = h;
            }
            None => {
                return Err(match fam {
                    NewtonFamily::Cone { .. } => Error::WeightDomain,
                    _ => Error::NewtonDiverged("line search failed".into()),
                })
            }
        }
    }
    let residual = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let feasible = true; // both Newton families are positive on the domain
    Ok(SolitonSolution {
        xi,
        xi_exact: None,
        residual,
        iterations,
        feasible,
        potential: val,
    })
}

/// Weight at the solved vector, for downstream use.
pub fn weight_at(
    body: &Arc<QPolytope>,
    family: SolitonFamily,
    xi: &[f64],
) -> Result<Weight> {
    let xir: Vec<Rat> = xi.iter().map(|&v| rat_from_f64(v)).collect();
    match family {
        SolitonFamily::KahlerRicci => Weight::exponential(body.clone(), xir),
        SolitonFamily::ConePower { n } => Weight::cone_power(body.clone(), xir, n),
        SolitonFamily::Mabuchi => {
            let one = Weight::constant(body.clone(), Rat::one())?;
            let (_, bary, _) = moments_exact(body, &one)?;
            Weight::affine_pinned(body.clone(), xir, bary)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polykernel::Facet;
    use crate::Polytope;

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    fn rr(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    fn interval() -> Arc<QPolytope> {
        Arc::new(
            Polytope::from_hrep(
                1,
                vec![Facet::new(vec![r(1)], r(1)), Facet::new(vec![r(-1)], r(1))],
            )
            .unwrap(),
        )
    }

    fn bl1p2() -> Arc<QPolytope> {
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
    fn futaki_interval_zero() {
        let p = interval();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        assert_eq!(futaki(&p, &w, &[r(1)]).unwrap(), IntegralValue::Exact(r(0)));
    }

    #[test]
    fn futaki_bl1p2_exact() {
        let p = bl1p2();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        let v = futaki(&p, &w, &[r(1), r(1)]).unwrap();
        assert_eq!(v, IntegralValue::Exact(rr(-4, 3)));
    }

    #[test]
    fn futaki_interval_exponential() {
        let p = interval();
        let w = Weight::exponential(p.clone(), vec![r(1)]).unwrap();
        let v = futaki(&p, &w, &[r(1)]).unwrap().to_f64();
        // int_{-1}^{1} x e^x dx = 2/e, with the pinned minus sign.
        assert!((v + 2.0 / 1f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn kr_symmetric_interval() {
        let p = interval();
        let sol = solve_weight_vector(&p, SolitonFamily::KahlerRicci, Default::default()).unwrap();
        assert!(sol.xi[0].abs() < 1e-13);
        assert!(sol.residual < 1e-10);
    }

    /// Bisection oracle on F(t) = int_{-1}^{1} s (s+2) e^{t s} ds.
    fn kr_diagonal_oracle() -> f64 {
        let f = |t: f64| {
            crate::polykernel::weighted::adaptive_gl(
                &|s: f64| s * (s + 2.0) * (t * s).exp(),
                -1.0,
                1.0,
                1e-14,
                24,
            )
        };
        let (mut lo, mut hi) = (-0.7, -0.3);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn kr_bl1p2_matches_bisection_oracle() {
        let p = bl1p2();
        let sol = solve_weight_vector(&p, SolitonFamily::KahlerRicci, Default::default()).unwrap();
        // Solution lies on the diagonal by symmetry.
        assert!((sol.xi[0] - sol.xi[1]).abs() < 1e-10);
        let t = kr_diagonal_oracle();
        assert!((sol.xi[0] - t).abs() < 5e-3, "{} vs {}", sol.xi[0], t);
        assert!((sol.xi[0] + 0.528).abs() < 5e-3);
        assert!(sol.residual < 1e-10);
        // Futaki vanishes at the solved weight for both basis directions.
        let w = weight_at(&p, SolitonFamily::KahlerRicci, &sol.xi).unwrap();
        for zeta in [[r(1), r(0)], [r(0), r(1)]] {
            let f = futaki(&p, &w, &zeta).unwrap().to_f64();
            assert!(f.abs() < 1e-10);
        }
    }

    #[test]
    fn mabuchi_interval_trivial() {
        let p = interval();
        let sol = solve_weight_vector(&p, SolitonFamily::Mabuchi, Default::default()).unwrap();
        assert_eq!(sol.xi_exact.as_ref().unwrap()[0], r(0));
        assert!(sol.feasible);
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn cone_symmetric_square() {
        let sq = Arc::new(
            Polytope::from_vertices(
                2,
                vec![
                    Vector::new(vec![r(-1), r(-1)]),
                    Vector::new(vec![r(1), r(-1)]),
                    Vector::new(vec![r(-1), r(1)]),
                    Vector::new(vec![r(1), r(1)]),
                ],
            )
            .unwrap(),
        );
        let sol =
            solve_weight_vector(&sq, SolitonFamily::ConePower { n: 2 }, Default::default())
                .unwrap();
        assert!(sol.xi[0].abs() < 1e-12 && sol.xi[1].abs() < 1e-12);
    }

    #[test]
    fn kr_translation_change_of_variables() {
        // Translating P by t shifts the critical equation by exactly
        // t * V(xi): the solution xi_t of the translated problem satisfies
        // grad V(xi_t) + t V(xi_t) = 0 in the original coordinates. This is
        // the exact substitution identity; the critical point itself moves.
        let p = bl1p2();
        let t = Vector::new(vec![rr(2, 5), rr(-1, 3)]);
        let q = Arc::new(p.translate(&t));
        let sol_t =
            solve_weight_vector(&q, SolitonFamily::KahlerRicci, Default::default()).unwrap();
        let td = tri_data(&p);
        let (val, grad, _) = potential_data(&td, &NewtonFamily::Exp, 2, &sol_t.xi, false).unwrap();
        let tf = [t.coords[0].approx(), t.coords[1].approx()];
        for k in 0..2 {
            let resid = grad[k] + tf[k] * val;
            assert!(resid.abs() < 1e-9 * (1.0 + val), "component {k}: {resid}");
        }
        // And solving on the original polytope after shifting the weight
        // reference back reproduces the original critical point: the two
        // problems are exact substitutions of one another.
        let sol = solve_weight_vector(&p, SolitonFamily::KahlerRicci, Default::default()).unwrap();
        let (_, grad0, _) = potential_data(&td, &NewtonFamily::Exp, 2, &sol.xi, false).unwrap();
        for g in grad0 {
            assert!(g.abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = bl1p2();
        let td = tri_data(&p);
        for (fam, xi0) in [
            (NewtonFamily::Exp, [0.21, -0.37]),
            (NewtonFamily::Cone { n: 2 }, [0.1, -0.2]),
        ] {
            let (_, grad, _) = potential_data(&td, &fam, 2, &xi0, false).unwrap();
            let h = 1e-5;
            for k in 0..2 {
                let mut xp = xi0.to_vec();
                let mut xm = xi0.to_vec();
                xp[k] += h;
                xm[k] -= h;
                let (vp, _, _) = potential_data(&td, &fam, 2, &xp, false).unwrap();
                let (vm, _, _) = potential_data(&td, &fam, 2, &xm, false).unwrap();
                let fd = (vp - vm) / (2.0 * h);
                assert!(
                    (fd - grad[k]).abs() < 1e-6 * (1.0 + grad[k].abs()),
                    "fd {fd} vs grad {}",
                    grad[k]
                );
            }
        }
    }

    #[test]
    fn hessian_definiteness_random_points() {
        let p = bl1p2();
        let td = tri_data(&p);
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..20 {
            let xi = [rnd() * 0.8, rnd() * 0.8];
            let (_, _, h) = potential_data(&td, &NewtonFamily::Exp, 2, &xi, true).unwrap();
            // 2x2 positive definite: trace and determinant positive.
            let det = h.at(0, 0) * h.at(1, 1) - h.at(0, 1) * h.at(1, 0);
            assert!(*h.at(0, 0) > 0.0 && det > 0.0);
            let xi_c = [rnd() * 0.5, rnd() * 0.5];
            let (_, _, hc) =
                potential_data(&td, &NewtonFamily::Cone { n: 2 }, 2, &xi_c, true).unwrap();
            let detc = hc.at(0, 0) * hc.at(1, 1) - hc.at(0, 1) * hc.at(1, 0);
            assert!(*hc.at(0, 0) < 0.0 && detc > 0.0, "cone Hessian not negative definite");
        }
    }
}
