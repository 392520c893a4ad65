//! Toric Fano cones: Reeb cones, normalized volume, volume minimization,
//! quasi-regular quotients and the cross-section measure identities.
//!
//! Conventions: the normalized volume satisfies `vol(C^{n+1}) = 1` at the
//! symmetric Reeb vector; cross-section measures are the disintegration of
//! `(n+1)! * Lebesgue` on the moment cone along the radial flow.

use crate::error::{Error, Result};
use crate::linalg::{dot, primitive_direction, Mat};
use crate::polykernel::integrate::{bary_integral_exact, expand_monomial, ExactProfile};
use crate::polykernel::section::{cross_section, CrossSection};
use crate::polykernel::triangulate::triangulate_cone;
use crate::polykernel::weighted::IntegralValue;
use crate::polykernel::{LatM, MVector, NVector, PolyCone, SimplicialCone, Vector};
use crate::scalar::{rat_from_f64, Scalar};
use crate::solitons::{solve_weight_vector, SolitonFamily, SolitonSolution, SolveOptions};
use crate::weights::Weight;
use crate::{QPolytope, Rat};
use num_traits::{One, Signed, Zero};
use std::sync::Arc;

/// A polarized toric Fano cone: moment cone, Reeb cone and the Gorenstein
/// vector normalizing log discrepancies on the rays.
#[derive(Debug, Clone)]
pub struct FanoCone {
    n: usize,
    moment_cone: PolyCone<Rat, LatM>,
    /// Primitive generators of the Reeb (dual) cone.
    reeb_rays: Vec<NVector<Rat>>,
    gamma: MVector<Rat>,
    tri: Vec<SimplicialCone<Rat, LatM>>,
}

impl FanoCone {
    /// Builds from generators of the moment cone in `M`.
    pub fn from_moment_generators(n: usize, gens: Vec<Vec<Rat>>) -> Result<FanoCone> {
        let dim = n + 1;
        let cone = PolyCone::<Rat, LatM>::from_generators(
            dim,
            gens.into_iter().map(Vector::new).collect(),
        )?;
        Self::from_cone(n, cone)
    }

    /// Builds from rays of the Reeb cone in `N`.
    pub fn from_reeb_rays(n: usize, rays: Vec<Vec<Rat>>) -> Result<FanoCone> {
        let dim = n + 1;
        let cone = PolyCone::<Rat, LatM>::from_dual_rays(
            dim,
            rays.into_iter().map(Vector::new).collect(),
        )?;
        Self::from_cone(n, cone)
    }

    fn from_cone(n: usize, moment_cone: PolyCone<Rat, LatM>) -> Result<FanoCone> {
        if moment_cone.dim() != n + 1 {
            return Err(Error::Invalid("cone dimension must be n + 1".into()));
        }
        // Primitive Reeb ray generators.
        let mut reeb_rays = Vec::new();
        for r in moment_cone.dual_rays() {
            let (prim, _) = primitive_direction(&r.coords).ok_or(Error::NotPointed)?;
            reeb_rays.push(Vector::new(
                prim.into_iter().map(Rat::from_integer).collect::<Vec<Rat>>(),
            ));
        }
        // Gorenstein vector: <gamma, v> = 1 on every primitive ray.
        let rows: Vec<Vec<Rat>> = reeb_rays.iter().map(|r| r.coords.clone()).collect();
        let rhs = vec![Rat::one(); rows.len()];
        let gamma = Mat::from_rows(&rows)
            .solve(&rhs)
            .ok_or(Error::NonGorenstein)?;
        let tri = triangulate_cone(&moment_cone, false);
        Ok(FanoCone {
            n,
            moment_cone,
            reeb_rays,
            gamma: Vector::new(gamma),
            tri,
        })
    }

    /// Test-only constructor bypassing the Gorenstein solve.
    #[cfg(test)]
    pub(crate) fn with_gamma_unchecked(mut self, gamma: Vec<Rat>) -> FanoCone {
        self.gamma = Vector::new(gamma);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn moment_cone(&self) -> &PolyCone<Rat, LatM> {
        &self.moment_cone
    }

    pub fn reeb_rays(&self) -> &[NVector<Rat>] {
        &self.reeb_rays
    }

    pub fn gamma(&self) -> &MVector<Rat> {
        &self.gamma
    }

    /// Strict interior membership in the Reeb cone.
    pub fn is_reeb_interior(&self, xi: &NVector<Rat>) -> bool {
        self.moment_cone
            .generators()
            .iter()
            .all(|g| g.pair(xi).is_positive())
    }

    /// Rescales to the normalized slice `<gamma, xi> = n + 1`.
    pub fn normalize_reeb(&self, xi: &[Rat]) -> Result<Vec<Rat>> {
        let v = Vector::new(xi.to_vec());
        if !self.is_reeb_interior(&v) {
            return Err(Error::OutsideReebCone);
        }
        let c = self.gamma.pair(&v);
        if !c.is_positive() {
            return Err(Error::EmptySlice);
        }
        let s = Rat::from_integer((self.n as i64 + 1).into()) / c;
        Ok(xi.iter().map(|x| x.clone() * s.clone()).collect())
    }

    // ------------------------------------------------------------ volume

    /// Exact normalized volume at a rational Reeb vector:
    /// `vol(xi) = sum_sigma |det U| / prod_i <u_i, xi>`.
    pub fn volume_exact(&self, xi: &[Rat]) -> Result<Rat> {
        let v = Vector::new(xi.to_vec());
        if !self.is_reeb_interior(&v) {
            return Err(Error::OutsideReebCone);
        }
        let mut total = Rat::zero();
        for sc in &self.tri {
            let mut denom = Rat::one();
            for u in &sc.generators {
                denom = denom * u.pair(&v);
            }
            total = total + sc.det_abs.clone() / denom;
        }
        Ok(total)
    }

    /// Volume with exact gradient and Hessian of the rational closed form,
    /// evaluated in floating point.
    pub fn volume(&self, xi: &[f64]) -> Result<VolumeData> {
        let dim = self.dim();
        let mut vol = 0.0;
        let mut grad = vec![0.0; dim];
        let mut hess = Mat::<f64>::zeros(dim, dim);
        for sc in &self.tri {
            let us: Vec<Vec<f64>> = sc
                .generators
                .iter()
                .map(|u| u.coords.iter().map(|c| c.approx()).collect())
                .collect();
            let cs: Vec<f64> = us
                .iter()
                .map(|u| u.iter().zip(xi).map(|(a, b)| a * b).sum())
                .collect();
            if cs.iter().any(|&c| c <= 0.0) {
                return Err(Error::OutsideReebCone);
            }
            let term = sc.det_abs.approx() / cs.iter().product::<f64>();
            vol += term;
            let mut s = vec![0.0; dim];
            for (u, c) in us.iter().zip(&cs) {
                for k in 0..dim {
                    s[k] += u[k] / c;
                }
            }
            for k in 0..dim {
                grad[k] -= term * s[k];
                for l in 0..dim {
                    let mut second = s[k] * s[l];
                    for (u, c) in us.iter().zip(&cs) {
                        second += u[k] * u[l] / (c * c);
                    }
                    *hess.at_mut(k, l) += term * second;
                }
            }
        }
        Ok(VolumeData { vol, grad, hess })
    }

    /// Alternate triangulation of the moment cone (for invariance tests).
    pub fn volume_exact_alt(&self, xi: &[Rat]) -> Result<Rat> {
        let v = Vector::new(xi.to_vec());
        if !self.is_reeb_interior(&v) {
            return Err(Error::OutsideReebCone);
        }
        let alt = triangulate_cone(&self.moment_cone, true);
        let mut total = Rat::zero();
        for sc in &alt {
            let mut denom = Rat::one();
            for u in &sc.generators {
                denom = denom * u.pair(&v);
            }
            total = total + sc.det_abs.clone() / denom;
        }
        Ok(total)
    }

    // ------------------------------------------------- MSY minimization

    /// Minimizes the normalized volume over the slice `<gamma, xi> = n+1`
    /// inside the Reeb cone: log-barrier schedule followed by a plain
    /// damped Newton polish (the volume is its own barrier).
    pub fn msy_minimize(&self) -> Result<MsySolution> {
        let dim = self.dim();
        let np1 = self.n as f64 + 1.0;
        let gamma: Vec<f64> = self.gamma.coords.iter().map(|c| c.approx()).collect();
        // Slice tangent basis: kernel of gamma.
        let pivot = (0..dim)
            .max_by(|&a, &b| gamma[a].abs().partial_cmp(&gamma[b].abs()).unwrap())
            .unwrap();
        if gamma[pivot] == 0.0 {
            return Err(Error::EmptySlice);
        }
        let mut zbasis: Vec<Vec<f64>> = Vec::new();
        for k in 0..dim {
            if k == pivot {
                continue;
            }
            let mut v = vec![0.0; dim];
            v[k] = 1.0;
            v[pivot] = -gamma[k] / gamma[pivot];
            zbasis.push(v);
        }
        // Strictly feasible normalized start: sum of Reeb rays.
        let mut start = vec![Rat::zero(); dim];
        for r in &self.reeb_rays {
            for (s, c) in start.iter_mut().zip(&r.coords) {
                *s = s.clone() + c.clone();
            }
        }
        let start = self.normalize_reeb(&start).map_err(|_| Error::EmptySlice)?;
        let mut xi: Vec<f64> = start.iter().map(|c| c.approx()).collect();
        let constraints: Vec<Vec<f64>> = self
            .moment_cone
            .generators()
            .iter()
            .map(|g| g.coords.iter().map(|c| c.approx()).collect())
            .collect();
        let mut iterations = 0usize;
        let mut mu = 1.0f64;
        while mu > 1e-12 {
            for _ in 0..40 {
                let step = self.newton_step(&xi, &zbasis, &constraints, mu)?;
                iterations += 1;
                let (dz, gnorm) = step;
                if gnorm < mu.max(1e-13) {
                    break;
                }
                self.line_search(&mut xi, &zbasis, &constraints, &dz, mu)?;
            }
            mu /= 10.0;
        }
        // Polish on the volume itself.
        let mut grad_norm = f64::INFINITY;
        for _ in 0..60 {
            let (dz, gnorm) = self.newton_step(&xi, &zbasis, &constraints, 0.0)?;
            grad_norm = gnorm;
            if gnorm < 1e-13 * (1.0 + self.volume(&xi)?.vol) {
                break;
            }
            self.line_search(&mut xi, &zbasis, &constraints, &dz, 0.0)?;
            iterations += 1;
        }
        let vd = self.volume(&xi)?;
        // Strict convexity on the slice: reduced Hessian positive definite.
        let m = zbasis.len();
        let mut red = Mat::<f64>::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                let mut acc = 0.0;
                for k in 0..dim {
                    for l in 0..dim {
                        acc += zbasis[a][k] * vd.hess.at(k, l) * zbasis[b][l];
                    }
                }
                *red.at_mut(a, b) = acc;
            }
        }
        let reduced_hessian_pd = leading_minors_positive(&red);
        // Exactly re-normalize the slice constraint.
        let scale = np1 / gamma.iter().zip(&xi).map(|(g, x)| g * x).sum::<f64>();
        let xi: Vec<f64> = xi.iter().map(|x| x * scale).collect();
        let vd = self.volume(&xi)?;
        Ok(MsySolution {
            xi,
            vol: vd.vol,
            grad_norm,
            iterations,
            reduced_hessian_pd,
        })
    }

    /// Newton step in slice coordinates for `vol + mu * barrier`.
    /// Returns the step and the projected gradient norm of the target.
    fn newton_step(
        &self,
        xi: &[f64],
        zbasis: &[Vec<f64>],
        constraints: &[Vec<f64>],
        mu: f64,
    ) -> Result<(Vec<f64>, f64)> {
        let dim = self.dim();
        let m = zbasis.len();
        let vd = self.volume(xi)?;
        let mut grad = vd.grad.clone();
        let mut hess = vd.hess.clone();
        if mu > 0.0 {
            for c in constraints {
                let s: f64 = c.iter().zip(xi).map(|(a, b)| a * b).sum();
                for k in 0..dim {
                    grad[k] -= mu * c[k] / s;
                    for l in 0..dim {
                        *hess.at_mut(k, l) += mu * c[k] * c[l] / (s * s);
                    }
                }
            }
        }
        let mut gz = vec![0.0; m];
        let mut hz = Mat::<f64>::zeros(m, m);
        for a in 0..m {
            gz[a] = zbasis[a].iter().zip(&grad).map(|(z, g)| z * g).sum();
            for b in 0..m {
                let mut acc = 0.0;
                for k in 0..dim {
                    for l in 0..dim {
                        acc += zbasis[a][k] * hess.at(k, l) * zbasis[b][l];
                    }
                }
                *hz.at_mut(a, b) = acc;
            }
        }
        let gnorm = gz.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        let rhs: Vec<f64> = gz.iter().map(|g| -g).collect();
        let dz = hz
            .solve(&rhs)
            .ok_or_else(|| Error::NewtonDiverged("singular reduced Hessian".into()))?;
        Ok((dz, gnorm))
    }

    fn line_search(
        &self,
        xi: &mut Vec<f64>,
        zbasis: &[Vec<f64>],
        constraints: &[Vec<f64>],
        dz: &[f64],
        mu: f64,
    ) -> Result<()> {
        let dim = self.dim();
        let dir: Vec<f64> = (0..dim)
            .map(|k| zbasis.iter().zip(dz).map(|(z, d)| z[k] * d).sum())
            .collect();
        let value = |x: &[f64]| -> Option<f64> {
            for c in constraints {
                let s: f64 = c.iter().zip(x).map(|(a, b)| a * b).sum();
                if s <= 0.0 {
                    return None;
                }
            }
            let vd = self.volume(x).ok()?;
            let mut v = vd.vol;
            if mu > 0.0 {
                for c in constraints {
                    let s: f64 = c.iter().zip(x).map(|(a, b)| a * b).sum();
                    v -= mu * s.ln();
                }
            }
            Some(v)
        };
        let f0 = value(xi).ok_or(Error::OutsideReebCone)?;
        let mut alpha = 1.0f64;
        for _ in 0..60 {
            let cand: Vec<f64> = xi.iter().zip(&dir).map(|(x, d)| x + alpha * d).collect();
            if let Some(f) = value(&cand) {
                if f <= f0 {
                    *xi = cand;
                    return Ok(());
                }
            }
            alpha *= 0.5;
        }
        Err(Error::NewtonDiverged("volume line search failed".into()))
    }

    // ------------------------------------------------ section integrals

    /// Cross section of the moment cone at `{<y, chi> = 1}`.
    pub fn section(&self, chi: &[Rat]) -> Result<CrossSection> {
        cross_section(&self.moment_cone, &Vector::new(chi.to_vec()))
    }

    /// `int_{P_chi} v(y / l_xi(y)) l_xi(y)^{-extra} dDH^{chi,S}` with `v`
    /// the monomial `y^alpha`. Exact in the rational data (values may
    /// carry logarithms for some exponent combinations).
    pub fn section_pullback(
        &self,
        chi: &[Rat],
        xi: &[Rat],
        alpha: &[usize],
        extra: i64,
    ) -> Result<IntegralValue> {
        let dim = self.dim();
        if alpha.len() != dim && !alpha.is_empty() {
            return Err(Error::Invalid("monomial length must be the ambient dimension".into()));
        }
        let alpha = if alpha.is_empty() { vec![0; dim] } else { alpha.to_vec() };
        let chiv: NVector<Rat> = Vector::new(chi.to_vec());
        let xiv: NVector<Rat> = Vector::new(xi.to_vec());
        if !self.is_reeb_interior(&chiv) || !self.is_reeb_interior(&xiv) {
            return Err(Error::OutsideReebCone);
        }
        let d: usize = alpha.iter().sum();
        let q = d as i64 + extra;
        let profile = ExactProfile::Power { beta: Rat::zero(), q, scale: Rat::one() };
        let nfac = {
            let mut f = Rat::one();
            for j in 2..=self.n {
                f = f * Rat::from_integer((j as i64).into());
            }
            f
        };
        let mut total = crate::polykernel::integrate::LogLin::zero();
        for sc in &self.tri {
            let svals: Vec<Rat> = sc.generators.iter().map(|u| u.pair(&chiv)).collect();
            let w: Vec<Vec<Rat>> = sc
                .generators
                .iter()
                .zip(&svals)
                .map(|(u, s)| u.coords.iter().map(|c| c.clone() / s.clone()).collect())
                .collect();
            let mut detw = sc.det_abs.clone();
            for s in &svals {
                detw = detw / s.clone();
            }
            let cvals: Vec<Rat> = w.iter().map(|wi| dot(wi, &xiv.coords)).collect();
            let wrefs: Vec<&[Rat]> = w.iter().map(|v| &v[..]).collect();
            let terms = expand_monomial(&wrefs, &alpha);
            let v = bary_integral_exact(&detw, &cvals, &terms, &profile)?;
            total = total.add(&v);
        }
        let total = total.scale(&nfac);
        Ok(if total.is_exact_rational() {
            IntegralValue::Exact(total.rational_part().clone())
        } else {
            IntegralValue::Approx(total.approx())
        })
    }

    /// Monomial integral over the section `P_xi` against the
    /// cross-section measure: `int y^alpha dDH^{xi,S}`.
    pub fn section_monomial(&self, xi: &[Rat], alpha: &[usize]) -> Result<IntegralValue> {
        self.section_pullback(xi, xi, alpha, self.n as i64 + 1)
    }

    /// Both sides of the cross-section invariance identity: the direct
    /// integral over `P_xi` and the pullback through `P_chi` carrying the
    /// radial Jacobian `l_xi^{-(n+1)}`.
    pub fn dh_invariance_check(
        &self,
        xi: &[Rat],
        chi: &[Rat],
        alpha: &[usize],
    ) -> Result<(IntegralValue, IntegralValue)> {
        let lhs = self.section_monomial(xi, alpha)?;
        let rhs = self.section_pullback(chi, xi, alpha, self.n as i64 + 1)?;
        Ok((lhs, rhs))
    }

    /// The same pullback with the Jacobian factor dropped: a negative
    /// control that must disagree with the direct integral.
    pub fn dh_invariance_negative_control(
        &self,
        xi: &[Rat],
        chi: &[Rat],
        alpha: &[usize],
    ) -> Result<(IntegralValue, IntegralValue)> {
        let lhs = self.section_monomial(xi, alpha)?;
        let rhs = self.section_pullback(chi, xi, alpha, 0)?;
        Ok((lhs, rhs))
    }

    // ---------------------------------------------------------- quotient

    /// Quasi-regular quotient model at a rational interior Reeb vector.
    /// The vector is rescaled to the normalized slice; the quotient
    /// polytope is the frame image of the cross section, scaled by `n+1`
    /// and recentered at the image of `gamma/(n+1)` so that the cone
    /// weight reads `(n+1+<x, xi>)^{-(n+2)}`.
    pub fn quotient(&self, chi: &[Rat]) -> Result<QuotientModel> {
        let chi = self.normalize_reeb(chi)?;
        let section = self.section(&chi)?;
        let np1 = Rat::from_integer((self.n as i64 + 1).into());
        let base_ambient: Vec<Rat> = self
            .gamma
            .coords
            .iter()
            .map(|c| c.clone() / np1.clone())
            .collect();
        let base_frame = section.frame.coords(&Vector::new(base_ambient));
        let polytope = Arc::new(
            section
                .polytope
                .scale_about(&np1, &Vector::new(base_frame.clone()))?,
        );
        let mut weight_scale = Rat::one();
        for _ in 0..self.n + 2 {
            weight_scale = weight_scale * np1.clone();
        }
        let gamma_quot = np1 / section.frame.t.clone();
        Ok(QuotientModel {
            n: self.n,
            chi,
            gamma: self.gamma.coords.clone(),
            section,
            polytope,
            base_frame,
            gamma_quot,
            weight_scale,
        })
    }

    /// Float front end deciding quasi-regularity by rational
    /// reconstruction (continued fractions, denominators up to 10^6).
    pub fn quotient_f64(&self, chi: &[f64]) -> Result<QuotientModel> {
        let mut rat = Vec::with_capacity(chi.len());
        for &c in chi {
            rat.push(reconstruct_rational(c, 1_000_000, 1e-9).ok_or(Error::IrregularQuotient)?);
        }
        self.quotient(&rat)
    }
}

#[derive(Debug, Clone)]
pub struct VolumeData {
    pub vol: f64,
    pub grad: Vec<f64>,
    pub hess: Mat<f64>,
}

#[derive(Debug, Clone)]
pub struct MsySolution {
    pub xi: Vec<f64>,
    pub vol: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub reduced_hessian_pd: bool,
}

/// Quotient data: the cross section with its frame, the rescaled quotient
/// polytope, and the lift back to the normalized Reeb slice.
#[derive(Debug, Clone)]
pub struct QuotientModel {
    pub n: usize,
    /// Normalized quasi-regular Reeb vector.
    pub chi: Vec<Rat>,
    pub gamma: Vec<Rat>,
    pub section: CrossSection,
    /// Quotient polytope handed to the soliton solver.
    pub polytope: Arc<QPolytope>,
    /// Frame coordinates of `gamma/(n+1)` (the recentering base point).
    pub base_frame: Vec<Rat>,
    /// Fano index metadata `-(K+D) = gamma_quot * L`.
    pub gamma_quot: Rat,
    /// The transformed weight equals `weight_scale` times the cone-power
    /// normal form; ratios are unaffected.
    pub weight_scale: Rat,
}

impl QuotientModel {
    /// Ambient lift of a quotient direction: the unique representative of
    /// the class orthogonal to `gamma`, so `chi + lift` stays on the
    /// normalized slice.
    pub fn lift(&self, xt: &[Rat]) -> Vec<Rat> {
        let dim = self.chi.len();
        let mut v = vec![Rat::zero(); dim];
        for (coef, axis) in xt.iter().zip(&self.section.frame.axes) {
            for (vc, ac) in v.iter_mut().zip(axis) {
                *vc = vc.clone() + coef.clone() * ac.clone();
            }
        }
        let e0: Vec<Rat> = self
            .section
            .frame
            .e0
            .iter()
            .map(|c| Rat::from_integer(c.clone()))
            .collect();
        let num = dot(&self.gamma, &v);
        let den = dot(&self.gamma, &e0);
        let t0 = -num / den;
        for (vc, ec) in v.iter_mut().zip(&e0) {
            *vc = vc.clone() + t0.clone() * ec.clone();
        }
        v
    }

    /// Cone-power weight on the quotient polytope at direction `xt`.
    pub fn cone_weight(&self, xt: &[Rat]) -> Result<Weight> {
        Weight::cone_power(self.polytope.clone(), xt.to_vec(), self.n)
    }

    /// Solves the cone-family soliton equation on the quotient and maps
    /// the solution back to the Reeb cone: returns the solution and
    /// `chi + lift(xt*)`.
    pub fn solve_soliton(&self, opts: SolveOptions) -> Result<(SolitonSolution, Vec<f64>)> {
        let sol = solve_weight_vector(
            &self.polytope,
            SolitonFamily::ConePower { n: self.n },
            opts,
        )?;
        let xtr: Vec<Rat> = sol.xi.iter().map(|&v| rat_from_f64(v)).collect();
        let lift = self.lift(&xtr);
        let moved: Vec<f64> = self
            .chi
            .iter()
            .zip(&lift)
            .map(|(c, l)| (c.clone() + l.clone()).approx())
            .collect();
        Ok((sol, moved))
    }
}

fn leading_minors_positive(m: &Mat<f64>) -> bool {
    let n = m.rows;
    for k in 1..=n {
        let mut sub = Mat::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                *sub.at_mut(i, j) = *m.at(i, j);
            }
        }
        if sub.det() <= 0.0 {
            return false;
        }
    }
    true
}

/// Best rational approximation by continued fractions with bounded
/// denominator and the given tolerance.
pub fn reconstruct_rational(x: f64, max_den: u64, tol: f64) -> Option<Rat> {
    if !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (1i128, 0i128, x.floor() as i128, 1i128);
    let mut frac = x - x.floor();
    for _ in 0..64 {
        let approx = p1 as f64 / q1 as f64;
        if (approx - x).abs() <= tol * (1.0 + x.abs()) {
            return Some(Rat::new((p1 as i64).into(), (q1 as i64).into()));
        }
        if frac.abs() < 1e-15 {
            break;
        }
        let r = 1.0 / frac;
        let a = r.floor();
        frac = r - a;
        let p2 = a as i128 * p1 + p0;
        let q2 = a as i128 * q1 + q0;
        if q2 > max_den as i128 || p2.abs() > i64::MAX as i128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    None
}
