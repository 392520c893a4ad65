//! Non-Archimedean stability calculus on toric data.
//!
//! Toric valuations carry a log discrepancy `A(u) = -min_P <x, u>` and a
//! weighted expected vanishing order `S_g(u)`; concave piecewise-linear
//! functions on the polytope stand in for test configurations, with
//! energies `E^NA`, `Lambda^NA`, `J^NA` and a pushforward measure. Twists
//! shift everything by linear functions, which pins the Futaki sign.

use crate::error::{Error, Result};
use crate::lp::{maximize, LpResult};
use crate::polykernel::measure::{measure_from_mass, PiecewiseMeasure};
use crate::polykernel::weighted::{integrate, integrate_family, IntegralValue};
use crate::polykernel::{Facet, NVector, Polytope, Vector};
use crate::scalar::{cmp_s, rat_from_f64, Scalar};
use crate::weights::Weight;
use crate::{QPolytope, Rat};
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

// ----------------------------------------------------------- valuations

/// Toric valuation attached to an anticanonically normalized polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct ToricValuation {
    pub u: NVector<Rat>,
    pub polytope: Arc<QPolytope>,
}

impl ToricValuation {
    pub fn new(polytope: Arc<QPolytope>, u: Vec<Rat>) -> Result<Self> {
        if u.iter().all(|c| c.is_zero()) {
            return Err(Error::ZeroVector);
        }
        Ok(ToricValuation { u: Vector::new(u), polytope })
    }

    /// Twist `u -> u + xi`.
    pub fn twist(&self, xi: &[Rat]) -> Result<Self> {
        let u: Vec<Rat> = self
            .u
            .coords
            .iter()
            .zip(xi)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        ToricValuation::new(self.polytope.clone(), u)
    }
}

#[derive(Debug, Clone)]
pub struct ValuationReport {
    /// Log discrepancy `A(u) = -min_P <x, u>`.
    pub a: f64,
    /// `S_g(u) = (1/V_g) int g (<x,u> - min_P <.,u>) dDH`.
    pub s: f64,
    /// `A - S_g` (the Ding invariant of the induced special configuration).
    pub ding_special: f64,
    pub a_exact: Rat,
    pub s_exact: Option<Rat>,
}

/// Computes `A`, `S_g` and their difference for a toric valuation.
pub fn valuation_report(v: &ToricValuation, w: &Weight) -> Result<ValuationReport> {
    if w.polytope().as_ref() != v.polytope.as_ref() {
        return Err(Error::PolytopeMismatch);
    }
    let (lo, _) = v.polytope.range(&v.u);
    let a_exact = -lo;
    // S_g = <xbar_g, u> + A with the weighted barycenter.
    let mass = integrate(&v.polytope, w, &[])?;
    let dim = v.polytope.dim();
    let mut pair_exact = Some(Rat::zero());
    let mut pair_f = 0.0f64;
    for k in 0..dim {
        if v.u.coords[k].is_zero() {
            continue;
        }
        let mut alpha = vec![0usize; dim];
        alpha[k] = 1;
        match integrate(&v.polytope, w, &alpha)? {
            IntegralValue::Exact(r) => {
                let t = r * v.u.coords[k].clone();
                pair_f += t.approx();
                if let Some(e) = pair_exact.as_mut() {
                    *e = e.clone() + t;
                }
            }
            IntegralValue::Approx(x) => {
                pair_f += x * v.u.coords[k].approx();
                pair_exact = None;
            }
        }
    }
    let (s, s_exact) = match (&mass, &pair_exact) {
        (IntegralValue::Exact(m), Some(p)) => {
            let s = p.clone() / m.clone() + a_exact.clone();
            (s.approx(), Some(s))
        }
        _ => (pair_f / mass.to_f64() + a_exact.approx(), None),
    };
    Ok(ValuationReport {
        a: a_exact.approx(),
        s,
        ding_special: a_exact.approx() - s,
        a_exact,
        s_exact,
    })
}

// ----------------------------------------------------------- filtrations

/// Concave piecewise-linear function `f = min_i (<x, a_i> + b_i)` on a
/// polytope, the toric incarnation of a linearly bounded filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct PLFiltration {
    pub pieces: Vec<(NVector<Rat>, Rat)>,
    pub polytope: Arc<QPolytope>,
}

impl PLFiltration {
    pub fn new(polytope: Arc<QPolytope>, pieces: Vec<(Vec<Rat>, Rat)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::NotConcave("no affine pieces".into()));
        }
        let dim = polytope.dim();
        let mut out: Vec<(NVector<Rat>, Rat)> = Vec::new();
        for (a, b) in pieces {
            if a.len() != dim {
                return Err(Error::NotConcave("piece dimension mismatch".into()));
            }
            let cand = (Vector::new(a), b);
            if !out.iter().any(|p| *p == cand) {
                out.push(cand);
            }
        }
        Ok(PLFiltration { pieces: out, polytope })
    }

    /// Constant function.
    pub fn constant(polytope: Arc<QPolytope>, c: Rat) -> Result<Self> {
        let dim = polytope.dim();
        PLFiltration::new(polytope, vec![(vec![Rat::zero(); dim], c)])
    }

    /// The linear function `l_zeta`.
    pub fn linear(polytope: Arc<QPolytope>, zeta: Vec<Rat>) -> Result<Self> {
        PLFiltration::new(polytope, vec![(zeta, Rat::zero())])
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        self.pieces
            .iter()
            .map(|(a, b)| crate::linalg::dot(&a.coords, x) + b.clone())
            .min_by(cmp_s)
            .unwrap()
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|(a, b)| {
                x.iter().zip(&a.coords).map(|(p, q)| p * q.approx()).sum::<f64>() + b.approx()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Twist `f -> f + l_xi` (still concave piecewise linear).
    pub fn twist(&self, xi: &[Rat]) -> PLFiltration {
        PLFiltration {
            pieces: self
                .pieces
                .iter()
                .map(|(a, b)| {
                    (
                        Vector::new(
                            a.coords.iter().zip(xi).map(|(p, q)| p.clone() + q.clone()).collect(),
                        ),
                        b.clone(),
                    )
                })
                .collect(),
            polytope: self.polytope.clone(),
        }
    }

    /// Polyhedral cells on which one piece is minimal, with the active
    /// piece index. Cells with no volume are dropped.
    pub fn subdivision(&self) -> Result<Vec<(usize, QPolytope)>> {
        let mut out = Vec::new();
        for (i, (ai, bi)) in self.pieces.iter().enumerate() {
            let mut facets = self.polytope.facets().to_vec();
            for (j, (aj, bj)) in self.pieces.iter().enumerate() {
                if i == j {
                    continue;
                }
                // piece i <= piece j: <x, a_j - a_i> >= b_i - b_j
                let normal: Vec<Rat> = aj
                    .coords
                    .iter()
                    .zip(&ai.coords)
                    .map(|(p, q)| p.clone() - q.clone())
                    .collect();
                facets.push(Facet::new(normal, bj.clone() - bi.clone()));
            }
            match Polytope::from_hrep(self.polytope.dim(), facets) {
                Ok(p) => out.push((i, p)),
                Err(Error::Empty) | Err(Error::NotFullDim) => continue,
                Err(e) => return Err(e),
            }
        }
        if out.is_empty() {
            return Err(Error::NotConcave("subdivision produced no cells".into()));
        }
        Ok(out)
    }

    /// All subdivision vertices (where extrema and breakpoints live).
    pub fn critical_points(&self) -> Result<Vec<Vec<Rat>>> {
        let mut pts: Vec<Vec<Rat>> = Vec::new();
        for (_, cell) in self.subdivision()? {
            for v in cell.vertices() {
                if !pts.contains(&v.coords) {
                    pts.push(v.coords.clone());
                }
            }
        }
        Ok(pts)
    }

    /// Range of `f` over the polytope (exact).
    pub fn range(&self) -> Result<(Rat, Rat)> {
        let pts = self.critical_points()?;
        let mut vals: Vec<Rat> = pts.iter().map(|p| self.eval(p)).collect();
        vals.sort_by(cmp_s);
        Ok((vals.first().unwrap().clone(), vals.last().unwrap().clone()))
    }
}

// ------------------------------------------------------- NA functionals

#[derive(Debug, Clone)]
pub struct NaReport {
    pub e_na: f64,
    pub lambda_na: f64,
    pub j_na: f64,
    pub lambda_min: f64,
    pub dh: PiecewiseMeasure<f64>,
    pub e_na_exact: Option<Rat>,
}

/// Weighted integral of an affine function over a cell.
fn affine_integral(
    cell: &QPolytope,
    family: &crate::weights::WeightFamily,
    a: &NVector<Rat>,
    b: &Rat,
) -> Result<IntegralValue> {
    let dim = cell.dim();
    let mass = integrate_family(cell, family, &[])?;
    let mut exact = match &mass {
        IntegralValue::Exact(m) => Some(b.clone() * m.clone()),
        IntegralValue::Approx(_) => None,
    };
    let mut approx = b.approx() * mass.to_f64();
    for k in 0..dim {
        if a.coords[k].is_zero() {
            continue;
        }
        let mut alpha = vec![0usize; dim];
        alpha[k] = 1;
        match integrate_family(cell, family, &alpha)? {
            IntegralValue::Exact(r) => {
                let t = r * a.coords[k].clone();
                approx += t.approx();
                if let Some(e) = exact.as_mut() {
                    *e = e.clone() + t;
                }
            }
            IntegralValue::Approx(x) => {
                approx += x * a.coords[k].approx();
                exact = None;
            }
        }
    }
    Ok(match exact {
        Some(e) => IntegralValue::Exact(e),
        None => IntegralValue::Approx(approx),
    })
}

/// The energy part of [`na_eval`] without the pushforward measure
/// (cheap enough for search loops and oracles).
pub fn na_energy(f: &PLFiltration, w: &Weight) -> Result<(f64, f64, f64, f64, Option<Rat>)> {
    if w.polytope().as_ref() != f.polytope.as_ref() {
        return Err(Error::PolytopeMismatch);
    }
    let vg = integrate(&f.polytope, w, &[])?;
    let cells = f.subdivision()?;
    let mut e_exact = match &vg {
        IntegralValue::Exact(_) => Some(Rat::zero()),
        _ => None,
    };
    let mut e_f = 0.0;
    for (i, cell) in &cells {
        let (a, b) = &f.pieces[*i];
        match affine_integral(cell, w.family(), a, b)? {
            IntegralValue::Exact(r) => {
                e_f += r.approx();
                if let Some(e) = e_exact.as_mut() {
                    *e = e.clone() + r;
                }
            }
            IntegralValue::Approx(x) => {
                e_f += x;
                e_exact = None;
            }
        }
    }
    let e_na_exact = match (&vg, e_exact) {
        (IntegralValue::Exact(m), Some(e)) => Some(e / m.clone()),
        _ => None,
    };
    let e_na = e_na_exact
        .as_ref()
        .map(|r| r.approx())
        .unwrap_or(e_f / vg.to_f64());
    let (lo, hi) = f.range()?;
    Ok((e_na, hi.approx(), hi.approx() - e_na, lo.approx(), e_na_exact))
}

/// Non-Archimedean energies of a concave PL function against a weight:
/// `E^NA_g = (1/V_g) int f g dDH`, `Lambda^NA = max f`,
/// `J^NA = Lambda^NA - E^NA`, plus the pushforward measure `DH(F)` of the
/// probability `g dDH / V_g` under `f`.
pub fn na_eval(f: &PLFiltration, w: &Weight) -> Result<NaReport> {
    let (e_na, lambda_na, j_na, lambda_min, e_na_exact) = na_energy(f, w)?;
    let vg = integrate(&f.polytope, w, &[])?;
    let cells = f.subdivision()?;
    let (lo, hi) = f.range()?;
    // Pushforward measure. Cells where the active piece is constant push
    // forward to point masses; sloped cells contribute densities.
    let dh = if hi == lo {
        PiecewiseMeasure::single_atom(lambda_na, 1.0)
    } else {
        let vgf = vg.to_f64();
        let family = w.family().clone();
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let mut sloped: Vec<(usize, &QPolytope)> = Vec::new();
        for (i, cell) in &cells {
            let (a, b) = &f.pieces[*i];
            if a.is_zero() {
                let mass = integrate_family(cell, &family, &[])?.to_f64() / vgf;
                let loc = b.approx();
                match atoms.iter_mut().find(|(l, _)| *l == loc) {
                    Some((_, m)) => *m += mass,
                    None => atoms.push((loc, mass)),
                }
            } else {
                sloped.push((*i, cell));
            }
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut measure = if sloped.is_empty() {
            PiecewiseMeasure { breakpoints: vec![], densities: vec![], atoms: vec![] }
        } else {
            // Breakpoints: values of sloped pieces at their cell vertices.
            let mut breaks: Vec<Rat> = Vec::new();
            for (i, cell) in &sloped {
                let (a, b) = &f.pieces[*i];
                for v in cell.vertices() {
                    let val = v.pair(a) + b.clone();
                    if !breaks.contains(&val) {
                        breaks.push(val);
                    }
                }
            }
            breaks.sort_by(cmp_s);
            let deg = f.polytope.dim() + w.poly_degree().unwrap_or(12);
            let cheb = w.poly_degree().is_none();
            let breaks_f: Vec<f64> = breaks.iter().map(|b| b.approx()).collect();
            // mass(s) = weighted volume of {piece_i <= s} over sloped
            // cells, normalized by V_g.
            measure_from_mass(&breaks_f, deg, cheb, |s| {
                let sr = rat_from_f64(*s);
                let mut acc = 0.0;
                for (i, cell) in &sloped {
                    let (a, b) = &f.pieces[*i];
                    let normal: Vec<Rat> = a.coords.iter().map(|c| -c.clone()).collect();
                    let mut facets = cell.facets().to_vec();
                    facets.push(Facet::new(normal, sr.clone() - b.clone()));
                    match Polytope::from_hrep(cell.dim(), facets) {
                        Ok(p) => acc += integrate_family(&p, &family, &[])?.to_f64(),
                        Err(Error::Empty) | Err(Error::NotFullDim) => continue,
                        Err(e) => return Err(e),
                    }
                }
                Ok(acc / vgf)
            })?
        };
        measure.atoms = atoms;
        measure
    };
    Ok(NaReport { e_na, lambda_na, j_na, lambda_min, dh, e_na_exact })
}

// ------------------------------------------------------------ reduced J

#[derive(Debug, Clone)]
pub struct ReducedJ {
    pub value: f64,
    pub minimizer: Vec<f64>,
    pub value_exact: Option<Rat>,
}

/// Minimizes `xi -> J^NA_g(f + l_xi)` over a subspace of `N_R`.
///
/// On the finite candidate set of subdivision vertices the objective is
/// `max_v (f(v) + <v, xi>) - E^NA_g(f) - <m_g, xi>` with `m_g` the
/// weighted barycenter: a linear program, solved exactly.
pub fn reduced_jna(f: &PLFiltration, w: &Weight, basis: &[Vec<Rat>]) -> Result<ReducedJ> {
    if basis.is_empty() {
        return Err(Error::Invalid("empty twist basis".into()));
    }
    let (e_na, _, _, _, e_na_exact) = na_energy(f, w)?;
    let dim = f.polytope.dim();
    // Weighted barycenter: exact for polynomial weights, rationalized
    // floating value otherwise.
    let mg: Vec<Rat> = if w.poly_degree().is_some() {
        crate::polykernel::weighted::moments_exact(&f.polytope, w)?.1
    } else {
        crate::polykernel::weighted::moments(&f.polytope, w)?
            .barycenter
            .iter()
            .map(|&b| rat_from_f64(b))
            .collect()
    };
    let pts = f.critical_points()?;
    // LP variables (t, z_1..z_k): minimize t - sum_j <m_g, beta_j> z_j
    // s.t. t >= f(v) + sum_j <v, beta_j> z_j for all candidate vertices v.
    let k = basis.len();
    let mut c = vec![Rat::zero(); k + 1];
    c[0] = -Rat::one(); // maximize(-t + ...)
    for (j, beta) in basis.iter().enumerate() {
        if beta.len() != dim {
            return Err(Error::Invalid("basis dimension mismatch".into()));
        }
        c[j + 1] = crate::linalg::dot(&mg, beta);
    }
    let mut rows = Vec::with_capacity(pts.len());
    let mut rhs = Vec::with_capacity(pts.len());
    for v in &pts {
        // f(v) + sum_j <v, beta_j> z_j - t <= 0
        let mut row = vec![Rat::zero(); k + 1];
        row[0] = -Rat::one();
        for (j, beta) in basis.iter().enumerate() {
            row[j + 1] = crate::linalg::dot(v, beta);
        }
        rows.push(row);
        rhs.push(-f.eval(v));
    }
    match maximize(&c, &rows, &rhs) {
        LpResult::Optimal { x, value } => {
            // value = -(t*) + <m, xi*>; J = t* - E - <m, xi*> = -value - E.
            let minimizer: Vec<f64> = (0..dim)
                .map(|d| {
                    basis
                        .iter()
                        .zip(&x[1..])
                        .map(|(beta, z)| (beta[d].clone() * z.clone()).approx())
                        .sum()
                })
                .collect();
            let value_exact = e_na_exact.as_ref().map(|e| -value.clone() - e.clone());
            Ok(ReducedJ {
                value: (-value.approx()) - e_na,
                minimizer,
                value_exact,
            })
        }
        LpResult::Unbounded => Err(Error::Invalid("reduced J unbounded".into())),
        LpResult::Infeasible => Err(Error::Invalid("reduced J infeasible".into())),
    }
}

// -------------------------------------------------------- delta estimate

#[derive(Debug, Clone)]
pub struct DeltaEstimate {
    /// The estimated stability threshold (a search result, not a
    /// certificate).
    pub delta: f64,
    pub witness_u: Vec<f64>,
    /// Inner twist witness for the reduced version.
    pub witness_xi: Option<Vec<f64>>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct DeltaOptions {
    pub grid: usize,
    pub seed: u64,
    pub refine_iters: usize,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions { grid: 720, seed: 7, refine_iters: 200 }
    }
}

/// `A(u) / S_g(u)` as a function of the direction (vertices pre-sampled).
fn ratio(verts: &[Vec<f64>], xbar: &[f64], u: &[f64]) -> f64 {
    let mut amin = f64::INFINITY;
    for v in verts {
        let p: f64 = v.iter().zip(u).map(|(c, x)| c * x).sum();
        amin = amin.min(p);
    }
    let a = -amin;
    let s = a + xbar.iter().zip(u).map(|(b, x)| b * x).sum::<f64>();
    if s <= 0.0 {
        return f64::INFINITY;
    }
    a / s
}

fn sphere_grid(dim: usize, grid: usize, seed: u64) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..grid)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / grid as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci sphere.
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            (0..grid)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / grid as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = 2.0 * std::f64::consts::PI * (k as f64) / golden;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..grid)
                .map(|_| {
                    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                    for x in v.iter_mut() {
                        *x /= n;
                    }
                    v
                })
                .collect()
        }
    }
}

/// Nelder-Mead on a 0-homogeneous objective in R^dim.
fn nelder_mead(
    obj: &impl Fn(&[f64]) -> f64,
    start: &[f64],
    scale: f64,
    iters: usize,
    evals: &mut usize,
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        obj(x)
    };
    simplex.push((start.to_vec(), eval(start, evals)));
    for k in 0..dim {
        let mut p = start.to_vec();
        p[k] += scale;
        let v = eval(&p, evals);
        simplex.push((p, v));
    }
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let worst = simplex[dim].clone();
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(p, _)| p[k]).sum::<f64>() / dim as f64)
            .collect();
        let reflect: Vec<f64> = (0..dim)
            .map(|k| centroid[k] + (centroid[k] - worst.0[k]))
            .collect();
        let fr = eval(&reflect, evals);
        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..dim)
                .map(|k| centroid[k] + 2.0 * (centroid[k] - worst.0[k]))
                .collect();
            let fe = eval(&expand, evals);
            simplex[dim] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..dim)
                .map(|k| centroid[k] - 0.5 * (centroid[k] - worst.0[k]))
                .collect();
            let fc = eval(&contract, evals);
            if fc < worst.1 {
                simplex[dim] = (contract, fc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = (0..dim)
                        .map(|k| best[k] + 0.5 * (item.0[k] - best[k]))
                        .collect();
                    let fv = eval(&shrunk, evals);
                    *item = (shrunk, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex[0].clone()
}

/// Multistart estimate of `delta = inf_u A(u)/S_g(u)` over toric
/// valuations; with `reduced` the inner twist `sup_xi` over the given
/// subspace is solved by the same search. The result is labeled an
/// estimate: a grid plus local refinement, deterministic for a fixed seed.
pub fn delta_estimate(
    polytope: &Arc<QPolytope>,
    w: &Weight,
    reduced: bool,
    subspace: Option<&[Vec<Rat>]>,
    opts: DeltaOptions,
) -> Result<DeltaEstimate> {
    if w.polytope().as_ref() != polytope.as_ref() {
        return Err(Error::PolytopeMismatch);
    }
    let dim = polytope.dim();
    let mom = crate::polykernel::weighted::moments(polytope, w)?;
    let xbar = mom.barycenter.clone();
    let verts: Vec<Vec<f64>> = polytope.vertices().iter().map(|v| v.approx()).collect();
    let mut evals = 0usize;
    let outer = |u: &[f64], evals: &mut usize| -> (f64, Option<Vec<f64>>) {
        if !reduced {
            *evals += 1;
            return (ratio(&verts, &xbar, u), None);
        }
        // Inner sup over the twist subspace: search directions w in the
        // span of {u} + subspace (the twist orbit closure).
        let basis: Vec<Vec<f64>> = match subspace {
            Some(b) => b.iter().map(|v| v.iter().map(|c| c.approx()).collect()).collect(),
            None => (0..dim)
                .map(|k| (0..dim).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
                .collect(),
        };
        let obj = |z: &[f64]| {
            // w = u + sum z_j beta_j ; maximize ratio = minimize -ratio
            let mut wv = u.to_vec();
            for (j, beta) in basis.iter().enumerate() {
                for k in 0..dim {
                    wv[k] += z[j] * beta[k];
                }
            }
            let n = wv.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n < 1e-9 {
                return f64::INFINITY;
            }
            -ratio(&verts, &xbar, &wv)
        };
        let mut best = (vec![0.0; basis.len()], obj(&vec![0.0; basis.len()]));
        *evals += 1;
        for start_scale in [0.5, 2.0] {
            let starts = sphere_grid(basis.len().max(1), 16, opts.seed ^ 0x5ca1ab1e);
            for s in starts {
                let s: Vec<f64> = s.iter().map(|x| x * start_scale).collect();
                let (z, v) = nelder_mead(&obj, &s, 0.3, opts.refine_iters, evals);
                if v < best.1 {
                    best = (z, v);
                }
            }
        }
        let xi: Vec<f64> = (0..dim)
            .map(|k| basis.iter().zip(&best.0).map(|(b, z)| b[k] * z).sum())
            .collect();
        (-best.1, Some(xi))
    };
    let grid = sphere_grid(dim, opts.grid, opts.seed);
    let mut best: Option<(f64, Vec<f64>, Option<Vec<f64>>)> = None;
    for u in &grid {
        let (v, xi) = outer(u, &mut evals);
        if best.as_ref().map_or(true, |(bv, _, _)| v < *bv) {
            best = Some((v, u.clone(), xi));
        }
    }
    let (mut bv, mut bu, mut bxi) = best.ok_or_else(|| Error::Invalid("empty grid".into()))?;
    // Local refinement of the outer minimization.
    if !reduced {
        let obj = |u: &[f64]| {
            let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n < 1e-9 {
                return f64::INFINITY;
            }
            ratio(&verts, &xbar, u)
        };
        let (u, v) = nelder_mead(&obj, &bu, 0.05, opts.refine_iters, &mut evals);
        if v < bv {
            let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            bu = u.iter().map(|x| x / n).collect();
            bv = v;
        }
    } else {
        // Refine the outer direction coarsely (the inner search dominates
        // the cost); the grid winner is kept if refinement does not help.
        let coarse = sphere_grid(dim, 64, opts.seed ^ 0xfeed);
        for u in coarse {
            let mixed: Vec<f64> = u.iter().zip(&bu).map(|(a, b)| 0.2 * a + 0.8 * b).collect();
            let n = mixed.iter().map(|x| x * x).sum::<f64>().sqrt();
            let cand: Vec<f64> = mixed.iter().map(|x| x / n).collect();
            let (v, xi) = outer(&cand, &mut evals);
            if v < bv {
                bv = v;
                bu = cand;
                bxi = xi;
            }
        }
    }
    Ok(DeltaEstimate { delta: bv, witness_u: bu, witness_xi: bxi, evaluations: evals })
}

/// Exact toric threshold via linear programming: for polytopes with the
/// origin interior, `delta = 1 / (1 + max_{u in P^*} <xbar_g, u>)` where
/// `P^*` is the dual polytope. Used as an independent oracle for the
/// search-based estimate (exact when the weighted barycenter is exact).
pub fn delta_dual_lp(polytope: &QPolytope, xbar: &[Rat]) -> Result<(Rat, Vec<Rat>)> {
    let dim = polytope.dim();
    // P* = { u : <v, u> >= -1 for all vertices v } must be bounded.
    let rows: Vec<Vec<Rat>> = polytope
        .vertices()
        .iter()
        .map(|v| v.coords.iter().map(|c| -c.clone()).collect())
        .collect();
    let rhs = vec![Rat::one(); rows.len()];
    match maximize(xbar, &rows, &rhs) {
        LpResult::Optimal { x, value } => {
            if (Rat::one() + value.clone()).is_positive() {
                Ok((Rat::one() / (Rat::one() + value), x))
            } else {
                Err(Error::Invalid("degenerate dual optimum".into()))
            }
        }
        LpResult::Unbounded => Err(Error::Invalid(
            "dual polytope unbounded: origin not interior".into(),
        )),
        LpResult::Infeasible => Err(Error::Invalid("dual polytope empty".into())),
    }
    .map(|(d, x)| (d, x.into_iter().take(dim).collect()))
}

/// The shadow of a PL function at a toric valuation:
/// `phi_f(u) = max_P (f - l_u) + min_P l_u`,
/// the smallest shift `a` with the filtration of `f` contained in the
/// shifted valuation filtration — which is what the energy monotonicity
/// argument behind `phi(v) + S_g(v) >= E^NA_g(phi)` needs.
pub fn pl_shadow(f: &PLFiltration, u: &[Rat]) -> Result<Rat> {
    let uv: NVector<Rat> = Vector::new(u.to_vec());
    let (lo, _) = f.polytope.range(&uv);
    // max of the concave function f - l_u over P is attained at a vertex
    // of the subdivision induced by the pieces.
    let m = f
        .critical_points()?
        .iter()
        .map(|x| f.eval(x) - crate::linalg::dot(x, &uv.coords))
        .max_by(cmp_s)
        .ok_or(Error::Empty)?;
    Ok(m + lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightFamily;

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
    fn valuation_p1() {
        let p = interval();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        let v = ToricValuation::new(p, vec![r(1)]).unwrap();
        let rep = valuation_report(&v, &w).unwrap();
        assert_eq!(rep.a_exact, r(1));
        assert_eq!(rep.s_exact.unwrap(), r(1));
        assert_eq!(rep.ding_special, 0.0);
    }

    #[test]
    fn valuation_bl1p2() {
        let p = bl1p2();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        let v = ToricValuation::new(p, vec![r(1), r(1)]).unwrap();
        let rep = valuation_report(&v, &w).unwrap();
        assert_eq!(rep.a_exact, r(1));
        assert_eq!(rep.s_exact.unwrap(), rr(7, 6));
        assert!((rep.ding_special + 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn valuation_p2_every_direction() {
        let p = p2();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        for u in [
            vec![r(1), r(0)],
            vec![r(0), r(1)],
            vec![r(1), r(1)],
            vec![r(-2), r(3)],
            vec![rr(1, 2), rr(-5, 7)],
        ] {
            let v = ToricValuation::new(p.clone(), u).unwrap();
            let rep = valuation_report(&v, &w).unwrap();
            assert_eq!(rep.a_exact, rep.s_exact.unwrap(), "A = S on P^2");
        }
    }

    #[test]
    fn zero_vector_rejected() {
        let p = interval();
        assert_eq!(
            ToricValuation::new(p, vec![r(0)]).unwrap_err(),
            Error::ZeroVector
        );
    }

    #[test]
    fn homogeneity_of_a_and_s() {
        let p = bl1p2();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        let v1 = ToricValuation::new(p.clone(), vec![r(2), r(-1)]).unwrap();
        let v2 = ToricValuation::new(p, vec![r(6), r(-3)]).unwrap();
        let r1 = valuation_report(&v1, &w).unwrap();
        let r2 = valuation_report(&v2, &w).unwrap();
        assert_eq!(r2.a_exact, r(3) * r1.a_exact);
        assert_eq!(r2.s_exact.unwrap(), r(3) * r1.s_exact.unwrap());
    }

    #[test]
    fn na_eval_examples() {
        let p = interval();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        // f = c: E = c, J = 0, DH a point mass.
        let f = PLFiltration::constant(p.clone(), rr(5, 2)).unwrap();
        let rep = na_eval(&f, &w).unwrap();
        assert_eq!(rep.e_na_exact.unwrap(), rr(5, 2));
        assert_eq!(rep.j_na, 0.0);
        assert_eq!(rep.dh.atoms.len(), 1);

        // f = min(1, 1-x): E = 3/4, Lambda = 1, J = 1/4.
        let f = PLFiltration::new(
            p.clone(),
            vec![(vec![r(0)], r(1)), (vec![r(-1)], r(1))],
        )
        .unwrap();
        let rep = na_eval(&f, &w).unwrap();
        assert_eq!(rep.e_na_exact.unwrap(), rr(3, 4));
        assert_eq!(rep.lambda_na, 1.0);
        assert!((rep.j_na - 0.25).abs() < 1e-15);
        // Pushforward has mass 1, support [0, 1], mean E.
        assert!((rep.dh.total_mass() - 1.0).abs() < 1e-12);
        let (lo, hi) = rep.dh.support().unwrap();
        assert!((lo - 0.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        assert!((rep.dh.moment(1) - 0.75).abs() < 1e-12);

        // f = l_xi on P^1: E = 0, Lambda = 1, J = 1.
        let f = PLFiltration::linear(p.clone(), vec![r(1)]).unwrap();
        let rep = na_eval(&f, &w).unwrap();
        assert_eq!(rep.e_na_exact.unwrap(), r(0));
        assert_eq!(rep.lambda_na, 1.0);
        assert_eq!(rep.lambda_min, -1.0);
    }

    /// Small-denominator random rational in `(-half, half)`.
    fn rand_rat(rng: &mut ChaCha8Rng, half: i64) -> Rat {
        Rat::new(rng.gen_range(-32 * half..=32 * half).into(), 64.into())
    }

    #[test]
    fn twist_identities_pin_the_futaki_sign() {
        // E^NA(f + l_xi) - E^NA(f) = -Fut_g(xi) and
        // (A - S)(u + xi) - (A - S)(u) = +Fut_g(xi),
        // with Fut_g(xi) = futaki(xi) / V_g.
        let p = bl1p2();
        let w = Weight::exponential(p.clone(), vec![rr(1, 5), rr(-1, 7)]).unwrap();
        let vg = integrate(&p, &w, &[]).unwrap().to_f64();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let xi = vec![rand_rat(&mut rng, 1), rand_rat(&mut rng, 1)];
            let fut =
                crate::solitons::futaki(&p, &w, &xi).unwrap().to_f64() / vg;
            // Random concave PL f from two affine pieces.
            let f = PLFiltration::new(
                p.clone(),
                vec![
                    (
                        vec![rand_rat(&mut rng, 1), rand_rat(&mut rng, 1)],
                        rand_rat(&mut rng, 1),
                    ),
                    (
                        vec![rand_rat(&mut rng, 1), rand_rat(&mut rng, 1)],
                        rand_rat(&mut rng, 1),
                    ),
                ],
            )
            .unwrap();
            let (e0, ..) = na_energy(&f, &w).unwrap();
            let (e1, ..) = na_energy(&f.twist(&xi), &w).unwrap();
            assert!(
                ((e1 - e0) + fut).abs() < 1e-12 * (1.0 + fut.abs()),
                "E twist: {} vs {}",
                e1 - e0,
                -fut
            );
            // A - S twist invariance.
            let u = vec![
                rand_rat(&mut rng, 1) + rr(1, 2),
                rand_rat(&mut rng, 1) - rr(1, 8),
            ];
            if u.iter().all(|c| c.is_zero()) {
                continue;
            }
            let v = ToricValuation::new(p.clone(), u.clone()).unwrap();
            let vt = v.twist(&xi).unwrap();
            if vt.u.coords.iter().all(|c| c.is_zero()) {
                continue;
            }
            let r0 = valuation_report(&v, &w).unwrap();
            let r1 = valuation_report(&vt, &w).unwrap();
            let lhs = (r1.a - r1.s) - (r0.a - r0.s);
            assert!(
                (lhs - fut).abs() < 1e-12 * (1.0 + fut.abs()),
                "A-S twist: {lhs} vs {fut}"
            );
        }
    }

    #[test]
    fn shadow_inequality_random_instances() {
        // phi_f(u) + S_g(u) >= E^NA_g(f).
        let p = bl1p2();
        let w = Weight::affine_pinned(p.clone(), vec![rr(1, 6), rr(1, 9)], vec![r(0), r(0)])
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let f = PLFiltration::new(
                p.clone(),
                vec![
                    (
                        vec![rand_rat(&mut rng, 1), rand_rat(&mut rng, 1)],
                        rand_rat(&mut rng, 1),
                    ),
                    (
                        vec![rand_rat(&mut rng, 1), rand_rat(&mut rng, 1)],
                        rand_rat(&mut rng, 1),
                    ),
                ],
            )
            .unwrap();
            let u = vec![rand_rat(&mut rng, 2), rand_rat(&mut rng, 2)];
            if u.iter().all(|c| c.is_zero()) {
                continue;
            }
            let val = ToricValuation::new(p.clone(), u.clone()).unwrap();
            let rep = valuation_report(&val, &w).unwrap();
            let shadow = pl_shadow(&f, &u).unwrap().approx();
            let (e, ..) = na_energy(&f, &w).unwrap();
            assert!(
                shadow + rep.s >= e - 1e-10,
                "shadow {shadow} + S {} < E {e}",
                rep.s
            );
        }
    }

    #[test]
    fn reduced_j_product_configuration() {
        let p = bl1p2();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        let basis = vec![vec![r(1), r(0)], vec![r(0), r(1)]];
        // f = l_zeta: twisting by -zeta kills J entirely.
        let zeta = vec![rr(2, 3), rr(-1, 2)];
        let f = PLFiltration::linear(p.clone(), zeta.clone()).unwrap();
        let red = reduced_jna(&f, &w, &basis).unwrap();
        assert_eq!(red.value_exact.unwrap(), r(0));
        assert!((red.minimizer[0] + zeta[0].approx()).abs() < 1e-12);
        assert!((red.minimizer[1] + zeta[1].approx()).abs() < 1e-12);
        // f = 0: minimum 0 at 0.
        let f0 = PLFiltration::constant(p.clone(), r(0)).unwrap();
        let red0 = reduced_jna(&f0, &w, &basis).unwrap();
        assert_eq!(red0.value_exact.unwrap(), r(0));
    }

    #[test]
    fn reduced_j_interval_grid_oracle() {
        let p = interval();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        let f = PLFiltration::new(
            p.clone(),
            vec![(vec![r(0)], r(1)), (vec![r(-1)], r(1))],
        )
        .unwrap();
        let red = reduced_jna(&f, &w, &[vec![r(1)]]).unwrap();
        // Dense grid over t in [-2, 2].
        let mut best = f64::INFINITY;
        for k in 0..=800 {
            let t = Rat::new((-800 + 2 * k).into(), 400.into());
            let tw = f.twist(&[t]);
            let (_, _, j, _, _) = na_energy(&tw, &w).unwrap();
            best = best.min(j);
        }
        assert!(red.value <= best + 1e-9, "{} vs grid {}", red.value, best);
        assert!((red.value - best).abs() < 1e-3);
    }

    #[test]
    fn delta_p2_is_one() {
        let p = p2();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        let est = delta_estimate(&p, &w, false, None, Default::default()).unwrap();
        assert!((est.delta - 1.0).abs() < 1e-12, "{}", est.delta);
        let (lp, _) = delta_dual_lp(&p, &[r(0), r(0)]).unwrap();
        assert_eq!(lp, r(1));
    }

    #[test]
    fn delta_bl1p2() {
        let p = bl1p2();
        let w = Weight::constant(p.clone(), r(1)).unwrap();
        let est = delta_estimate(&p, &w, false, None, Default::default()).unwrap();
        assert!((est.delta - 6.0 / 7.0).abs() < 1e-3, "{}", est.delta);
        // Witness within one degree of the diagonal.
        let wu = &est.witness_u;
        let cosang = (wu[0] + wu[1]) / (2f64.sqrt() * (wu[0] * wu[0] + wu[1] * wu[1]).sqrt());
        assert!(cosang > (1f64.to_radians()).cos(), "witness {wu:?}");
        // LP oracle gives the exact value 6/7.
        let (lp, udir) = delta_dual_lp(&p, &[rr(1, 12), rr(1, 12)]).unwrap();
        assert_eq!(lp, rr(6, 7));
        assert_eq!(udir[0], udir[1]);
    }

    #[test]
    fn reduced_delta_at_kr_weight() {
        let p = bl1p2();
        let sol = crate::solitons::solve_weight_vector(
            &p,
            crate::solitons::SolitonFamily::KahlerRicci,
            Default::default(),
        )
        .unwrap();
        let w = crate::solitons::weight_at(&p, crate::solitons::SolitonFamily::KahlerRicci, &sol.xi)
            .unwrap();
        let est = delta_estimate(
            &p,
            &w,
            true,
            None,
            DeltaOptions { grid: 72, seed: 7, refine_iters: 120 },
        )
        .unwrap();
        assert!(est.delta >= 1.0 - 1e-6, "{}", est.delta);
        assert!(est.witness_xi.is_some());
    }

    #[test]
    fn dh_filtration_matches_e_na() {
        let p = bl1p2();
        let w = Weight::exponential(p.clone(), vec![rr(1, 4), rr(1, 9)]).unwrap();
        let f = PLFiltration::new(
            p.clone(),
            vec![
                (vec![rr(1, 2), r(0)], r(1)),
                (vec![r(0), rr(-1, 3)], rr(3, 4)),
            ],
        )
        .unwrap();
        let rep = na_eval(&f, &w).unwrap();
        assert!((rep.dh.total_mass() - 1.0).abs() < 1e-10);
        assert!((rep.dh.moment(1) - rep.e_na).abs() < 1e-10);
        let (lo, hi) = rep.dh.support().unwrap();
        assert!((lo - rep.lambda_min).abs() < 1e-12);
        assert!((hi - rep.lambda_na).abs() < 1e-12);
        // Density nonnegative on samples.
        assert!(rep.dh.density_min_on_samples(50) > -1e-10);
    }

    #[test]
    fn affine_pinned_weight_na_is_exact() {
        let p = interval();
        let w = Weight::affine_pinned(p.clone(), vec![rr(1, 3)], vec![r(0)]).unwrap();
        let f = PLFiltration::new(p.clone(), vec![(vec![r(1)], r(0)), (vec![r(0)], rr(1, 2))])
            .unwrap();
        let rep = na_eval(&f, &w).unwrap();
        assert!(rep.e_na_exact.is_some());
        // Cross-check against the measure mean.
        assert!((rep.dh.moment(1) - rep.e_na).abs() < 1e-12);
    }

    #[test]
    fn unchecked_family_na_guard() {
        // The affine integral path refuses nothing by itself; the report
        // still goes through the weight attachment check.
        let p = interval();
        let q = p2();
        let w = Weight::unchecked(WeightFamily::Constant(r(1)), q);
        let f = PLFiltration::constant(p, r(0)).unwrap();
        assert!(matches!(na_eval(&f, &w).unwrap_err(), Error::PolytopeMismatch));
    }
}
