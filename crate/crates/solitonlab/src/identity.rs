//! The cross-module identity suite behind the `check` command.
//!
//! Each item exercises one of the structural identities with its pinned
//! tolerance and reports pass/fail; the suite stops at the first failure.

use crate::error::Result;
use crate::fanocone::FanoCone;
use crate::nastab::{
    delta_dual_lp, delta_estimate, na_energy, na_eval, valuation_report, DeltaOptions,
    PLFiltration, ToricValuation,
};
use crate::polykernel::weighted::{integrate, moments_exact, pushforward_1d, IntegralValue};
use crate::polykernel::Facet;
use crate::scalar::rat_from_f64;
use crate::solitons::futaki;
use crate::toricfunc::{functionals, geodesic, solve_gsoliton_1d, GridConfig, ToricPotential};
use crate::weights::Weight;
use crate::{cross_section, reeb_transform, Polytope, QPolytope, Rat, Vector};
use crate::scalar::Scalar;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn r(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

fn rr(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

fn interval() -> Arc<QPolytope> {
    Arc::new(
        Polytope::from_hrep(1, vec![Facet::new(vec![r(1)], r(1)), Facet::new(vec![r(-1)], r(1))])
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

fn p2() -> Arc<QPolytope> {
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

fn conifold() -> FanoCone {
    FanoCone::from_moment_generators(
        2,
        vec![
            vec![r(0), r(0), r(1)],
            vec![r(1), r(0), r(1)],
            vec![r(0), r(1), r(1)],
            vec![r(1), r(1), r(1)],
        ],
    )
    .unwrap()
}

struct Suite {
    items: Vec<CheckItem>,
    failed: bool,
}

impl Suite {
    fn new() -> Self {
        Suite { items: Vec::new(), failed: false }
    }

    fn check(&mut self, name: &str, run: impl FnOnce() -> Result<(bool, String)>) {
        if self.failed {
            return;
        }
        let (passed, detail) = match run() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            self.failed = true;
        }
        self.items.push(CheckItem { name: name.into(), passed, detail });
    }
}

/// Runs the identity suite; stops at the first violated tolerance.
pub fn run_identity_suite(seed: u64) -> Vec<CheckItem> {
    let mut s = Suite::new();

    s.check("polykernel/exact-area", || {
        let p = p2();
        let w = Weight::constant(p.clone(), Rat::one())?;
        let v = integrate(&p, &w, &[])?;
        Ok((v == IntegralValue::Exact(r(9)), format!("2! * area(P2) = {:?}", v.to_f64())))
    });

    s.check("polykernel/pushforward-moments", || {
        let p = bl1p2();
        let w = Weight::exponential(p.clone(), vec![rr(1, 3), rr(-1, 5)])?;
        let ell = Vector::new(vec![r(1), r(0)]);
        let m = pushforward_1d(&p, &w, &ell)?;
        let mut worst = 0.0f64;
        for k in 0..=4usize {
            let lhs = m.moment(k);
            let rhs = integrate(&p, &w, &[k, 0])?.to_f64();
            worst = worst.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
        }
        Ok((worst < 1e-12, format!("max relative moment defect {worst:.2e}")))
    });

    s.check("polykernel/barycenter-equivariance", || {
        let p = bl1p2();
        let one = Weight::constant(p.clone(), Rat::one())?;
        let (_, bary, cov) = moments_exact(&p, &one)?;
        let t = Vector::new(vec![rr(3, 7), rr(-2, 5)]);
        let q = Arc::new(p.translate(&t));
        let oneq = Weight::constant(q.clone(), Rat::one())?;
        let (_, bary_t, cov_t) = moments_exact(&q, &oneq)?;
        let ok = bary_t[0] == bary[0].clone() + t.coords[0].clone()
            && bary_t[1] == bary[1].clone() + t.coords[1].clone()
            && cov == cov_t;
        Ok((ok, "exact translation equivariance".into()))
    });

    s.check("weights/reeb-transform-roundtrip", || {
        let c = conifold();
        let from = c.section(&[r(0), r(0), rr(3, 2)])?;
        let to = c.section(&[rr(3, 4), rr(3, 4), rr(3, 4)])?;
        let xi_hat = Vector::new(vec![r(0), r(0), rr(3, 2)]);
        let chi_hat = Vector::new(vec![rr(3, 4), rr(3, 4), rr(3, 4)]);
        let g = Weight::exponential(Arc::new(from.polytope.clone()), vec![rr(1, 5), rr(-1, 7)])?;
        let g0 = reeb_transform(&g, &from, &to, &xi_hat, c.n())?;
        let back = reeb_transform(&g0, &to, &from, &chi_hat, c.n())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            // Random point in the source section (rejection sampling).
            let vs = from.polytope.vertices();
            let mut x = [0.0f64; 2];
            let mut wsum = 0.0;
            for v in vs {
                let wgt = rng.gen::<f64>();
                wsum += wgt;
                x[0] += wgt * v.coords[0].approx();
                x[1] += wgt * v.coords[1].approx();
            }
            let x = [x[0] / wsum, x[1] / wsum];
            let a = g.evaluate(&x)?;
            let b = back.evaluate(&x)?;
            worst = worst.max((a - b).abs() / (1.0 + a.abs()));
        }
        Ok((worst < 1e-12, format!("max pointwise roundtrip defect {worst:.2e}")))
    });

    s.check("solitons/futaki-sign-pin", || {
        let p = bl1p2();
        let w = Weight::constant(p.clone(), Rat::one())?;
        let v = futaki(&p, &w, &[r(1), r(1)])?;
        Ok((
            v == IntegralValue::Exact(rr(-4, 3)),
            format!("futaki(Bl1P2, 1, (1,1)) = {}", v.to_f64()),
        ))
    });

    s.check("solitons/potential-gradient-fd", || {
        // Finite differences of the exponential potential against the
        // closed-form gradient (step 1e-5, tolerance 1e-6).
        let p = bl1p2();
        let h = 1e-5;
        let val = |xi: &[f64]| -> Result<f64> {
            let xir: Vec<Rat> = xi.iter().map(|&v| rat_from_f64(v)).collect();
            let w = Weight::exponential(p.clone(), xir)?;
            integrate(&p, &w, &[]).map(|v| v.to_f64())
        };
        let grad = |xi: &[f64], k: usize| -> Result<f64> {
            let xir: Vec<Rat> = xi.iter().map(|&v| rat_from_f64(v)).collect();
            let w = Weight::exponential(p.clone(), xir)?;
            let mut alpha = vec![0usize; 2];
            alpha[k] = 1;
            integrate(&p, &w, &alpha).map(|v| v.to_f64())
        };
        let xi = [0.21, -0.13];
        let mut worst = 0.0f64;
        for k in 0..2 {
            let mut xp = xi;
            let mut xm = xi;
            xp[k] += h;
            xm[k] -= h;
            let fd = (val(&xp)? - val(&xm)?) / (2.0 * h);
            worst = worst.max((fd - grad(&xi, k)?).abs());
        }
        Ok((worst < 1e-6, format!("max gradient defect {worst:.2e}")))
    });

    s.check("fanocone/vol-homogeneity-exact", || {
        let c = conifold();
        let xi = [rr(1, 7), rr(2, 9), rr(5, 4)];
        let lam = rr(7, 3);
        let v1 = c.volume_exact(&xi)?;
        let scaled: Vec<Rat> = xi.iter().map(|x| x.clone() * lam.clone()).collect();
        let v2 = c.volume_exact(&scaled)?;
        let l3 = lam.clone() * lam.clone() * lam.clone();
        Ok((v2 * l3 == v1, "vol(lambda xi) = lambda^{-3} vol(xi) exactly".into()))
    });

    s.check("fanocone/msy-conifold", || {
        let c = conifold();
        let sol = c.msy_minimize()?;
        let ok = (sol.vol - 16.0 / 27.0).abs() < 1e-9
            && sol.xi[0].abs() < 1e-8
            && sol.xi[1].abs() < 1e-8
            && (sol.xi[2] - 1.5).abs() < 1e-8;
        Ok((ok, format!("vol* = {:.12}, xi* = {:?}", sol.vol, sol.xi)))
    });

    s.check("fanocone/dh-invariance", || {
        let c = conifold();
        let xi = [r(0), r(0), rr(3, 2)];
        let chi = [rr(3, 4), rr(3, 4), rr(3, 4)];
        let mut worst = 0.0f64;
        for alpha in [[0, 0, 0], [1, 0, 0], [0, 1, 1]] {
            let (l, rh) = c.dh_invariance_check(&xi, &chi, &alpha)?;
            worst = worst.max((l.to_f64() - rh.to_f64()).abs());
        }
        let (l, rh) = c.dh_invariance_negative_control(&xi, &chi, &[1, 0, 0])?;
        let control = (l.to_f64() - rh.to_f64()).abs();
        Ok((
            worst < 1e-10 && control > 1e-3,
            format!("identity defect {worst:.2e}; negative control gap {control:.3e}"),
        ))
    });

    s.check("fanocone/cone-quotient-correspondence", || {
        let c = conifold();
        let q = c.quotient(&[rr(3, 4), rr(3, 4), rr(3, 4)])?;
        let (sol, moved) = q.solve_soliton(Default::default())?;
        let msy = c.msy_minimize()?;
        let mut worst = 0.0f64;
        for k in 0..3 {
            worst = worst.max((moved[k] - msy.xi[k]).abs());
        }
        Ok((
            worst < 1e-8 && sol.residual < 1e-10,
            format!("two-path agreement {worst:.2e}; quotient residual {:.2e}", sol.residual),
        ))
    });

    s.check("nastab/twist-identities", || {
        let p = bl1p2();
        let w = Weight::exponential(p.clone(), vec![rr(1, 5), rr(-1, 7)])?;
        let vg = integrate(&p, &w, &[])?.to_f64();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
        let mut rand_rat = |half: i64| Rat::new(rng.gen_range(-32 * half..=32 * half).into(), 64.into());
        let mut worst_e = 0.0f64;
        let mut worst_as = 0.0f64;
        for _ in 0..50 {
            let xi = vec![rand_rat(1), rand_rat(1)];
            let fut = futaki(&p, &w, &xi)?.to_f64() / vg;
            let f = PLFiltration::new(
                p.clone(),
                vec![
                    (vec![rand_rat(1), rand_rat(1)], rand_rat(1)),
                    (vec![rand_rat(1), rand_rat(1)], rand_rat(1)),
                ],
            )?;
            let (e0, ..) = na_energy(&f, &w)?;
            let (e1, ..) = na_energy(&f.twist(&xi), &w)?;
            worst_e = worst_e.max(((e1 - e0) + fut).abs() / (1.0 + fut.abs()));
            let u = vec![rand_rat(1) + rr(1, 2), rand_rat(1) - rr(1, 8)];
            if u.iter().all(|c| c.is_zero()) {
                continue;
            }
            let v = ToricValuation::new(p.clone(), u)?;
            let vt = v.twist(&xi)?;
            if vt.u.coords.iter().all(|c| c.is_zero()) {
                continue;
            }
            let r0 = valuation_report(&v, &w)?;
            let r1 = valuation_report(&vt, &w)?;
            let lhs = (r1.a - r1.s) - (r0.a - r0.s);
            worst_as = worst_as.max((lhs - fut).abs() / (1.0 + fut.abs()));
        }
        Ok((
            worst_e < 1e-12 && worst_as < 1e-12,
            format!("E twist defect {worst_e:.2e}; A-S twist defect {worst_as:.2e}"),
        ))
    });

    s.check("nastab/dh-filtration-measure", || {
        let p = bl1p2();
        let w = Weight::exponential(p.clone(), vec![rr(1, 4), rr(1, 9)])?;
        let f = PLFiltration::new(
            p.clone(),
            vec![(vec![rr(1, 2), r(0)], r(1)), (vec![r(0), rr(-1, 3)], rr(3, 4))],
        )?;
        let rep = na_eval(&f, &w)?;
        let mass = (rep.dh.total_mass() - 1.0).abs();
        let mean = (rep.dh.moment(1) - rep.e_na).abs();
        Ok((
            mass < 1e-10 && mean < 1e-10,
            format!("mass defect {mass:.2e}; mean defect {mean:.2e}"),
        ))
    });

    s.check("nastab/delta-p2-and-bl1p2", || {
        let pp = p2();
        let w = Weight::constant(pp.clone(), Rat::one())?;
        let est = delta_estimate(&pp, &w, false, None, DeltaOptions { grid: 360, seed, refine_iters: 80 })?;
        let p = bl1p2();
        let wb = Weight::constant(p.clone(), Rat::one())?;
        let est_b =
            delta_estimate(&p, &wb, false, None, DeltaOptions { grid: 720, seed, refine_iters: 200 })?;
        let (lp, _) = delta_dual_lp(&p, &[rr(1, 12), rr(1, 12)])?;
        let ok = (est.delta - 1.0).abs() < 1e-12
            && (est_b.delta - 6.0 / 7.0).abs() < 1e-3
            && lp == rr(6, 7);
        Ok((
            ok,
            format!("delta(P2) = {}; delta(Bl1P2) = {} (LP oracle 6/7)", est.delta, est_b.delta),
        ))
    });

    s.check("toricfunc/ode-closed-form", || {
        let iv = interval();
        let w = Weight::constant(iv.clone(), Rat::one())?;
        let sol = solve_gsoliton_1d(&iv, &w, GridConfig::default())?;
        let mut err = 0.0f64;
        for (j, &x) in sol.potential.xs.iter().enumerate() {
            if x.abs() <= 20.0 {
                let fs = 2.0 * (x / 2.0).cosh().ln() + 2f64.ln();
                err = err.max((sol.potential.u[j] - fs).abs());
            }
        }
        Ok((
            err < 1e-6 && sol.residual < 1e-8,
            format!("sup error vs closed form {err:.2e}; residual {:.2e}", sol.residual),
        ))
    });

    s.check("toricfunc/geodesic-energies", || {
        let iv = interval();
        let w = Weight::exponential(iv.clone(), vec![rr(1, 5)])?;
        let cfg = GridConfig { box_radius: 30.0, points: 2049 };
        let u0 = ToricPotential::from_fn(cfg, -1.0, 1.0, |x| {
            2.0 * (x / 2.0).cosh().ln() + 2f64.ln()
        })?;
        let u1 = ToricPotential::from_fn(cfg, -1.0, 1.0, |x| {
            let t = (x - 0.8) / 2.4;
            1.2 * (2.0 * (if t.abs() > 20.0 { t.abs() - 2f64.ln() } else { t.cosh().ln() })
                + 2f64.ln())
                + 0.4 * (2.0 * ((x + 0.5) / 2.0).cosh().ln())
        })?;
        let phi0 = u0.legendre(1025);
        let phi1 = u1.legendre(1025);
        let ts: Vec<f64> = (0..=8).map(|k| k as f64 / 8.0).collect();
        let mut es = Vec::new();
        let mut ds = Vec::new();
        let mut ms = Vec::new();
        for &t in &ts {
            let ut = geodesic(&phi0, &phi1, t)?.potential(cfg);
            let f = functionals(&ut, &u0, &iv, &w)?;
            es.push(f.e_g);
            ds.push(f.d_g);
            ms.push(f.m_g);
            if f.m_g < f.d_g - 1e-8 {
                return Ok((false, format!("M {} < D {} at t = {t}", f.m_g, f.d_g)));
            }
        }
        let mut affine_defect = 0.0f64;
        let mut convex_defect = 0.0f64;
        for k in 1..ts.len() - 1 {
            let lin = es[0] + (es[ts.len() - 1] - es[0]) * ts[k];
            affine_defect = affine_defect.max((es[k] - lin).abs());
            convex_defect = convex_defect.min(ds[k + 1] - 2.0 * ds[k] + ds[k - 1]);
            convex_defect = convex_defect.min(ms[k + 1] - 2.0 * ms[k] + ms[k - 1]);
        }
        Ok((
            affine_defect < 1e-8 && convex_defect > -1e-8,
            format!("E affinity defect {affine_defect:.2e}; min second difference {convex_defect:.2e}"),
        ))
    });

    // Cross-section exactness last: cheap but fundamental.
    s.check("polykernel/cross-section-on-hyperplane", || {
        let c = conifold();
        let cs = cross_section(c.moment_cone(), &Vector::new(vec![rr(3, 4), rr(3, 4), rr(3, 4)]))?;
        let ok = cs.polytope.vertices().iter().all(|v| {
            let y = cs.frame.embed(&v.coords);
            y.pair(&cs.frame.chi) == Rat::one()
        });
        Ok((ok, "embedded vertices satisfy the section equation exactly".into()))
    });

    s.items
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_suite_passes() {
        let items = run_identity_suite(7);
        for item in &items {
            assert!(item.passed, "{}: {}", item.name, item.detail);
        }
        assert!(items.len() >= 14);
    }
}
