//! Piecewise-polynomial measures on the real line.
//!
//! Pushforwards of weighted polytope measures under linear or piecewise
//! linear maps land here. Densities are stored per interval in the shifted
//! variable `u = s - breakpoints[i]`.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::{cmp_s, Scalar};


#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseMeasure<S> {
    /// Strictly increasing; intervals are `[b[i], b[i+1]]`.
    pub breakpoints: Vec<S>,
    /// `densities[i][k]` multiplies `(s - b[i])^k` on interval `i`.
    pub densities: Vec<Vec<S>>,
    /// Point masses `(location, mass)`.
    pub atoms: Vec<(S, S)>,
}

impl<S: Scalar> PiecewiseMeasure<S> {
    pub fn single_atom(location: S, mass: S) -> Self {
        PiecewiseMeasure { breakpoints: vec![], densities: vec![], atoms: vec![(location, mass)] }
    }

    pub fn support(&self) -> Option<(S, S)> {
        let mut lo: Option<S> = None;
        let mut hi: Option<S> = None;
        let mut upd = |v: &S| {
            if lo.as_ref().map_or(true, |l| cmp_s(v, l).is_lt()) {
                lo = Some(v.clone());
            }
            if hi.as_ref().map_or(true, |h| cmp_s(v, h).is_gt()) {
                hi = Some(v.clone());
            }
        };
        for b in &self.breakpoints {
            upd(b);
        }
        for (l, _) in &self.atoms {
            upd(l);
        }
        lo.zip(hi)
    }

    pub fn density_at(&self, s: &S) -> S {
        for i in 0..self.densities.len() {
            let a = &self.breakpoints[i];
            let b = &self.breakpoints[i + 1];
            if cmp_s(s, a).is_ge() && cmp_s(s, b).is_le() {
                let u = s.clone() - a.clone();
                return eval_poly(&self.densities[i], &u);
            }
        }
        S::zero()
    }

    pub fn total_mass(&self) -> S {
        self.moment(0)
    }

    /// `int s^k dmu` in the global coordinate.
    pub fn moment(&self, k: usize) -> S {
        let mut total = S::zero();
        for i in 0..self.densities.len() {
            let a = self.breakpoints[i].clone();
            let len = self.breakpoints[i + 1].clone() - a.clone();
            // int_0^len (u+a)^k rho(u) du ; expand (u+a)^k binomially.
            let mut binom = vec![S::one()]; // coefficients of (u+a)^k in u
            for _ in 0..k {
                // multiply by (u + a)
                let mut next = vec![S::zero(); binom.len() + 1];
                for (j, c) in binom.iter().enumerate() {
                    next[j + 1] = next[j + 1].clone() + c.clone();
                    next[j] = next[j].clone() + c.clone() * a.clone();
                }
                binom = next;
            }
            for (j, bc) in binom.iter().enumerate() {
                for (p, dc) in self.densities[i].iter().enumerate() {
                    // int_0^len u^{j+p} du = len^{j+p+1}/(j+p+1)
                    let e = j + p + 1;
                    let mut pw = S::one();
                    for _ in 0..e {
                        pw = pw * len.clone();
                    }
                    total = total
                        + bc.clone() * dc.clone() * pw / S::from_usize(e).unwrap();
                }
            }
        }
        for (loc, mass) in &self.atoms {
            let mut pw = S::one();
            for _ in 0..k {
                pw = pw * loc.clone();
            }
            total = total + pw * mass.clone();
        }
        total
    }

    /// Lossy conversion for reporting.
    pub fn approx(&self) -> PiecewiseMeasure<f64> {
        PiecewiseMeasure {
            breakpoints: self.breakpoints.iter().map(|b| b.approx()).collect(),
            densities: self
                .densities
                .iter()
                .map(|d| d.iter().map(|c| c.approx()).collect())
                .collect(),
            atoms: self.atoms.iter().map(|(l, m)| (l.approx(), m.approx())).collect(),
        }
    }

    /// Minimum of the density over sample points (nonnegativity check).
    pub fn density_min_on_samples(&self, per_interval: usize) -> S {
        let mut min: Option<S> = None;
        for i in 0..self.densities.len() {
            let a = self.breakpoints[i].clone();
            let len = self.breakpoints[i + 1].clone() - a.clone();
            for j in 0..=per_interval {
                let u = len.clone() * S::from_usize(j).unwrap()
                    / S::from_usize(per_interval).unwrap();
                let v = eval_poly(&self.densities[i], &u);
                if min.as_ref().map_or(true, |m| cmp_s(&v, m).is_lt()) {
                    min = Some(v);
                }
            }
        }
        min.unwrap_or_else(S::zero)
    }
}

pub fn eval_poly<S: Scalar>(coeffs: &[S], x: &S) -> S {
    let mut acc = S::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x.clone() + c.clone();
    }
    acc
}

pub fn poly_derivative<S: Scalar>(coeffs: &[S]) -> Vec<S> {
    if coeffs.len() <= 1 {
        return vec![S::zero()];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.clone() * S::from_usize(k).unwrap())
        .collect()
}

/// Power-basis interpolation through `(nodes[i], values[i])` (small
/// Vandermonde solve; exact over exact scalars).
pub fn interpolate_poly<S: Scalar>(nodes: &[S], values: &[S]) -> Result<Vec<S>> {
    let n = nodes.len();
    let rows: Vec<Vec<S>> = nodes
        .iter()
        .map(|x| {
            let mut r = Vec::with_capacity(n);
            let mut pw = S::one();
            for _ in 0..n {
                r.push(pw.clone());
                pw = pw * x.clone();
            }
            r
        })
        .collect();
    Mat::from_rows(&rows)
        .solve(values)
        .ok_or_else(|| Error::Invalid("interpolation nodes not distinct".into()))
}

/// Builds a measure from a cumulative mass function: on each interval the
/// mass is interpolated by a degree-`mass_degree` polynomial at interior
/// nodes and differentiated. The mass function is called at global
/// coordinates strictly inside intervals.
///
/// With `cheb_nodes` the interior nodes follow a Chebyshev distribution
/// (for floating data whose densities are analytic but not polynomial);
/// otherwise they are equispaced (exact polynomial recovery).
pub fn measure_from_mass<S: Scalar>(
    breakpoints: &[S],
    mass_degree: usize,
    cheb_nodes: bool,
    mut mass: impl FnMut(&S) -> Result<S>,
) -> Result<PiecewiseMeasure<S>> {
    assert!(breakpoints.len() >= 2);
    let mut densities = Vec::with_capacity(breakpoints.len() - 1);
    let npts = mass_degree + 1;
    for i in 0..breakpoints.len() - 1 {
        let a = breakpoints[i].clone();
        let len = breakpoints[i + 1].clone() - a.clone();
        let mut nodes = Vec::with_capacity(npts);
        let mut values = Vec::with_capacity(npts);
        for j in 0..npts {
            let frac = if cheb_nodes {
                let c = (1.0 - ((j as f64 + 0.5) * std::f64::consts::PI / npts as f64).cos()) / 2.0;
                S::from_f64(c).unwrap()
            } else {
                S::from_usize(j + 1).unwrap() / S::from_usize(npts + 1).unwrap()
            };
            let u = len.clone() * frac;
            let s = a.clone() + u.clone();
            nodes.push(u);
            values.push(mass(&s)?);
        }
        let massp = interpolate_poly(&nodes, &values)?;
        densities.push(poly_derivative(&massp));
    }
    Ok(PiecewiseMeasure {
        breakpoints: breakpoints.to_vec(),
        densities,
        atoms: vec![],
    })
}
