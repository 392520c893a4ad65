//! Weighted integration over simplices via divided differences.
//!
//! Every weight family in this crate is a profile `b` composed with a
//! linear functional: `g(x) = b(<x, xi>)`. Integrals of barycentric
//! monomials against such weights reduce to divided differences of an
//! iterated antiderivative of `b` at the vertex values, with monomial
//! factors handled by node repetition:
//!
//! `int_T lambda^r b(sum lambda_i c_i) dlambda = (prod r_i!) psi[c_0^(r_0+1), ...]`
//!
//! where `T` is the standard corner simplex, `psi` is the `M`-th
//! antiderivative of `b` and `M = n + |r|`. Rational profiles are handled
//! exactly (including the logarithmic antiderivatives); the exponential
//! profile uses a shifted complete-homogeneous series which is stable for
//! every node configuration, clustered or not.

use crate::error::{Error, Result};
use crate::scalar::{cmp_s, Scalar};
use crate::Rat;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

// ---------------------------------------------------------------- exp path

/// Divided difference of `exp` over the given nodes (repeats allowed).
pub fn expdd(nodes: &[f64]) -> f64 {
    let m = nodes.len() - 1;
    if m == 0 {
        return nodes[0].exp();
    }
    let s = nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let t: Vec<f64> = nodes.iter().map(|x| x - s).collect();
    debug_assert!(t.iter().all(|&x| x < 200.0), "node spread too large for series");
    // sum_{k>=0} h_k(t) / (m+k)!  with h_k complete homogeneous symmetric.
    let mut fact = (1..=m).map(|i| i as f64).product::<f64>();
    let mut sum = 1.0 / fact;
    let mut h = vec![1.0f64; t.len()];
    for k in 1..=4000usize {
        let prev = h.clone();
        h[0] = t[0] * prev[0];
        for j in 1..t.len() {
            h[j] = h[j - 1] + t[j] * prev[j];
        }
        fact *= (m + k) as f64;
        let term = h[t.len() - 1] / fact;
        sum += term;
        if term <= sum * 1e-18 && k as f64 > t[t.len() - 1] {
            break;
        }
    }
    s.exp() * sum
}

// ------------------------------------------------------------- exact path

/// Exact value of the form `rat + sum coeff_i * ln(arg_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLin {
    pub rat: Rat,
    /// (coefficient, argument) with argument > 0; kept sorted by argument.
    pub logs: Vec<(Rat, Rat)>,
}

impl LogLin {
    pub fn zero() -> Self {
        LogLin { rat: Rat::zero(), logs: vec![] }
    }

    pub fn from_rat(r: Rat) -> Self {
        LogLin { rat: r, logs: vec![] }
    }

    pub fn is_exact_rational(&self) -> bool {
        self.logs.iter().all(|(c, _)| c.is_zero())
    }

    pub fn rational_part(&self) -> &Rat {
        &self.rat
    }

    pub fn add_log(&mut self, coeff: Rat, arg: Rat) {
        if coeff.is_zero() {
            return;
        }
        if arg.is_one() {
            return; // ln 1 = 0
        }
        match self.logs.binary_search_by(|(_, a)| cmp_s(a, &arg)) {
            Ok(i) => {
                self.logs[i].0 = self.logs[i].0.clone() + coeff;
                if self.logs[i].0.is_zero() {
                    self.logs.remove(i);
                }
            }
            Err(i) => self.logs.insert(i, (coeff, arg)),
        }
    }

    pub fn add(&self, other: &LogLin) -> LogLin {
        let mut out = self.clone();
        out.rat = out.rat + other.rat.clone();
        for (c, a) in &other.logs {
            out.add_log(c.clone(), a.clone());
        }
        out
    }

    pub fn sub(&self, other: &LogLin) -> LogLin {
        let mut out = self.clone();
        out.rat = out.rat - other.rat.clone();
        for (c, a) in &other.logs {
            out.add_log(-c.clone(), a.clone());
        }
        out
    }

    pub fn scale(&self, k: &Rat) -> LogLin {
        if k.is_zero() {
            return LogLin::zero();
        }
        LogLin {
            rat: self.rat.clone() * k.clone(),
            logs: self.logs.iter().map(|(c, a)| (c.clone() * k.clone(), a.clone())).collect(),
        }
    }

    pub fn div(&self, k: &Rat) -> LogLin {
        LogLin {
            rat: self.rat.clone() / k.clone(),
            logs: self.logs.iter().map(|(c, a)| (c.clone() / k.clone(), a.clone())).collect(),
        }
    }

    pub fn approx(&self) -> f64 {
        let mut v = self.rat.approx();
        for (c, a) in &self.logs {
            v += c.approx() * a.approx().ln();
        }
        v
    }
}

/// Exact 1D profile `b(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactProfile {
    /// `b(t) = sum_p coeffs[p] t^p`
    Poly(Vec<Rat>),
    /// `b(t) = scale * (beta + t)^(-q)` with `q >= 1`
    Power { beta: Rat, q: i64, scale: Rat },
}

/// The `M`-th antiderivative of an exact profile, reduced modulo
/// polynomials of degree < M (which divided differences annihilate).
#[derive(Debug, Clone)]
enum Antideriv {
    Poly(Vec<Rat>),
    /// `scale * (beta + t)^k`
    Power { beta: Rat, k: i64, scale: Rat },
    /// `scale * (beta + t)^k * ln(beta + t)`
    PowerLog { beta: Rat, k: i64, scale: Rat },
}

fn antiderivative(profile: &ExactProfile, m: usize) -> Antideriv {
    match profile {
        ExactProfile::Poly(coeffs) => {
            let mut out = vec![Rat::zero(); coeffs.len() + m];
            for (p, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                // c * p! / (p+m)! t^{p+m}
                let mut k = Rat::one();
                for j in p + 1..=p + m {
                    k = k * Rat::from_integer((j as i64).into());
                }
                out[p + m] = c.clone() / k;
            }
            Antideriv::Poly(out)
        }
        ExactProfile::Power { beta, q, scale } => {
            let q = *q;
            let mi = m as i64;
            if q >= 1 && q <= mi {
                // (-1)^{q-1} / ((q-1)! (m-q)!) * (beta+t)^{m-q} ln(beta+t)
                let k = mi - q;
                let mut denom = Rat::one();
                for j in 1..q {
                    denom = denom * Rat::from_integer(j.into());
                }
                for j in 1..=k {
                    denom = denom * Rat::from_integer(j.into());
                }
                let sign = if (q - 1) % 2 == 0 { Rat::one() } else { -Rat::one() };
                Antideriv::PowerLog { beta: beta.clone(), k, scale: scale.clone() * sign / denom }
            } else {
                // (beta+t)^{m-q} / prod_{j=1..m} (j-q)
                let mut denom = Rat::one();
                for j in 1..=mi {
                    denom = denom * Rat::from_integer((j - q).into());
                }
                Antideriv::Power { beta: beta.clone(), k: mi - q, scale: scale.clone() / denom }
            }
        }
    }
}

/// `psi^{(d)}(c) / d!` for the antiderivative forms above.
fn deriv_at(psi: &Antideriv, c: &Rat, d: usize) -> Result<LogLin> {
    match psi {
        Antideriv::Poly(coeffs) => {
            // d-th derivative / d!: sum_{p>=d} C(p,d) coeffs[p] c^{p-d}
            let mut acc = Rat::zero();
            let mut cp = Rat::one(); // c^0
            for p in d..coeffs.len() {
                if !coeffs[p].is_zero() {
                    let mut binom = Rat::one();
                    for j in 0..d {
                        binom = binom * Rat::from_integer(((p - j) as i64).into())
                            / Rat::from_integer(((j + 1) as i64).into());
                    }
                    acc = acc + binom * coeffs[p].clone() * cp.clone();
                }
                cp = cp * c.clone();
            }
            Ok(LogLin::from_rat(acc))
        }
        Antideriv::Power { beta, k, scale } => {
            let base = beta.clone() + c.clone();
            if (*k < 0 || !is_int_power_safe(*k, d)) && base.is_zero() {
                return Err(Error::WeightNonpositive("pole at node".into()));
            }
            // d-th derivative/d!: C'(k,d) (beta+c)^{k-d} with falling factorial
            let mut coef = scale.clone();
            for j in 0..d as i64 {
                coef = coef * Rat::from_integer((*k - j).into());
            }
            let mut dfact = Rat::one();
            for j in 1..=d as i64 {
                dfact = dfact * Rat::from_integer(j.into());
            }
            coef = coef / dfact;
            if coef.is_zero() {
                return Ok(LogLin::zero());
            }
            Ok(LogLin::from_rat(coef * rat_pow(&base, *k - d as i64)?))
        }
        Antideriv::PowerLog { beta, k, scale } => {
            // Derivatives of (beta+t)^k ln(beta+t): maintain
            // a_j (beta+t)^{k-j} ln + b_j (beta+t)^{k-j}.
            let base = beta.clone() + c.clone();
            if !base.is_positive() {
                return Err(Error::WeightNonpositive("log of nonpositive value".into()));
            }
            let mut a = Rat::one();
            let mut b = Rat::zero();
            for j in 0..d as i64 {
                let e = *k - j;
                let na = Rat::from_integer(e.into()) * a.clone();
                let nb = Rat::from_integer(e.into()) * b.clone() + a.clone();
                a = na;
                b = nb;
            }
            let mut dfact = Rat::one();
            for j in 1..=d as i64 {
                dfact = dfact * Rat::from_integer(j.into());
            }
            let pw = rat_pow(&base, *k - d as i64)?;
            let mut out = LogLin::from_rat(scale.clone() * b * pw.clone() / dfact.clone());
            out.add_log(scale.clone() * a * pw / dfact, base);
            Ok(out)
        }
    }
}

fn is_int_power_safe(k: i64, d: usize) -> bool {
    k >= d as i64
}

fn rat_pow(base: &Rat, e: i64) -> Result<Rat> {
    if e >= 0 {
        let mut acc = Rat::one();
        for _ in 0..e {
            acc = acc * base.clone();
        }
        Ok(acc)
    } else {
        if base.is_zero() {
            return Err(Error::WeightNonpositive("pole at node".into()));
        }
        let mut acc = Rat::one();
        for _ in 0..(-e) {
            acc = acc * base.clone();
        }
        Ok(Rat::one() / acc)
    }
}

/// Exact confluent divided difference of the `m`-th antiderivative of the
/// profile over the given nodes (with multiplicities encoded by repeats).
pub fn exact_dd(profile: &ExactProfile, nodes: &[Rat]) -> Result<LogLin> {
    let mut nodes = nodes.to_vec();
    nodes.sort_by(cmp_s);
    let npts = nodes.len();
    let m = npts - 1;
    let psi = antiderivative(profile, m);
    // Confluent Neville table.
    let mut col: Vec<LogLin> = nodes
        .iter()
        .map(|c| deriv_at(&psi, c, 0))
        .collect::<Result<_>>()?;
    for level in 1..npts {
        let mut next = Vec::with_capacity(npts - level);
        for i in 0..npts - level {
            let j = i + level;
            if nodes[i] == nodes[j] {
                next.push(deriv_at(&psi, &nodes[i], level)?);
            } else {
                let diff = nodes[j].clone() - nodes[i].clone();
                next.push(col[i + 1].sub(&col[i]).div(&diff));
            }
        }
        col = next;
    }
    Ok(col.into_iter().next().unwrap())
}

// ------------------------------------------------ barycentric machinery

/// Expands the ambient monomial `x^alpha` at the given vertex list into
/// barycentric monomials: returns `(coefficient, exponent-per-vertex)`.
pub fn expand_monomial<S: Scalar>(verts: &[&[S]], alpha: &[usize]) -> Vec<(S, Vec<usize>)> {
    let nv = verts.len();
    let mut acc: BTreeMap<Vec<usize>, S> = BTreeMap::new();
    acc.insert(vec![0; nv], S::one());
    for (k, &ak) in alpha.iter().enumerate() {
        for _ in 0..ak {
            let mut next: BTreeMap<Vec<usize>, S> = BTreeMap::new();
            for (r, coef) in &acc {
                for (i, v) in verts.iter().enumerate() {
                    if v[k].is_zero() {
                        continue;
                    }
                    let mut nr = r.clone();
                    nr[i] += 1;
                    let add = coef.clone() * v[k].clone();
                    next.entry(nr)
                        .and_modify(|c| *c = c.clone() + add.clone())
                        .or_insert(add);
                }
            }
            acc = next;
        }
    }
    acc.into_iter().map(|(r, c)| (c, r)).collect()
}

fn factorial_rat(k: usize) -> Rat {
    let mut f = Rat::one();
    for j in 2..=k {
        f = f * Rat::from_integer((j as i64).into());
    }
    f
}

pub fn factorial_f64(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Exact integral over the corner-simplex parametrization:
/// `sum_terms coef * (prod r_i!) * dd(psi)[nodes(r)]`, all times `det_abs`.
///
/// `cvals[i]` is the profile argument at vertex `i`.
pub fn bary_integral_exact(
    det_abs: &Rat,
    cvals: &[Rat],
    terms: &[(Rat, Vec<usize>)],
    profile: &ExactProfile,
) -> Result<LogLin> {
    let mut total = LogLin::zero();
    for (coef, r) in terms {
        if coef.is_zero() {
            continue;
        }
        let mut nodes: Vec<Rat> = Vec::new();
        let mut rfact = Rat::one();
        for (i, &ri) in r.iter().enumerate() {
            for _ in 0..=ri {
                nodes.push(cvals[i].clone());
            }
            rfact = rfact * factorial_rat(ri);
        }
        let dd = exact_dd(profile, &nodes)?;
        total = total.add(&dd.scale(&(coef.clone() * rfact)));
    }
    Ok(total.scale(det_abs))
}

/// Floating variant for the exponential profile.
pub fn bary_integral_exp(det_abs: f64, cvals: &[f64], terms: &[(f64, Vec<usize>)]) -> f64 {
    let mut total = 0.0;
    for (coef, r) in terms {
        if *coef == 0.0 {
            continue;
        }
        let mut nodes: Vec<f64> = Vec::new();
        let mut rfact = 1.0;
        for (i, &ri) in r.iter().enumerate() {
            for _ in 0..=ri {
                nodes.push(cvals[i]);
            }
            rfact *= factorial_f64(ri);
        }
        total += coef * rfact * expdd(&nodes);
    }
    det_abs * total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    #[test]
    fn expdd_basics() {
        // exp[0,1] = e - 1
        assert!((expdd(&[0.0, 1.0]) - (1f64.exp() - 1.0)).abs() < 1e-14);
        // exp[a,a] = e^a
        assert!((expdd(&[0.3, 0.3]) - 0.3f64.exp()).abs() < 1e-14);
        // clustered nodes stay stable
        let v = expdd(&[1.0, 1.0 + 1e-13, 1.0 + 2e-13]);
        assert!((v - 1f64.exp() / 2.0).abs() < 1e-10);
        // wide spread
        let wide = expdd(&[0.0, 40.0]);
        assert!((wide - (40f64.exp() - 1.0) / 40.0).abs() / wide < 1e-13);
    }

    #[test]
    fn corner_simplex_area() {
        // int_T 1 over the standard triangle = 1/2.
        let profile = ExactProfile::Poly(vec![r(1, 1)]);
        let terms = vec![(r(1, 1), vec![0, 0, 0])];
        let v = bary_integral_exact(&r(1, 1), &[r(0, 1), r(0, 1), r(0, 1)], &terms, &profile)
            .unwrap();
        assert_eq!(v.rational_part(), &r(1, 2));
    }

    #[test]
    fn monomial_times_exp() {
        // int_0^1 x e^x dx = 1.
        let terms = vec![(1.0, vec![0usize, 1usize])];
        let v = bary_integral_exp(1.0, &[0.0, 1.0], &terms);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reciprocal_log_antiderivative() {
        // int_0^1 1/(1+t) dt = ln 2.
        let profile = ExactProfile::Power { beta: r(1, 1), q: 1, scale: r(1, 1) };
        let terms = vec![(r(1, 1), vec![0, 0])];
        let v = bary_integral_exact(&r(1, 1), &[r(0, 1), r(1, 1)], &terms, &profile).unwrap();
        assert!(!v.is_exact_rational());
        assert!((v.approx() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn inverse_square_exact() {
        // int_0^1 (1+t)^{-2} dt = 1/2, exact rational.
        let profile = ExactProfile::Power { beta: r(1, 1), q: 2, scale: r(1, 1) };
        let terms = vec![(r(1, 1), vec![0, 0])];
        let v = bary_integral_exact(&r(1, 1), &[r(0, 1), r(1, 1)], &terms, &profile).unwrap();
        assert!(v.is_exact_rational());
        assert_eq!(v.rational_part(), &r(1, 2));
    }

    #[test]
    fn confluent_power_nodes() {
        // int_0^1 x (1+x)^{-3} dx = 1/8 via repeated node at 1.
        let profile = ExactProfile::Power { beta: r(1, 1), q: 3, scale: r(1, 1) };
        let terms = vec![(r(1, 1), vec![0usize, 1usize])];
        let v = bary_integral_exact(&r(1, 1), &[r(0, 1), r(1, 1)], &terms, &profile).unwrap();
        assert_eq!(v.rational_part(), &r(1, 8));
    }

    #[test]
    fn expand_square_monomial() {
        // (l0*0 + l1*1)^2 over vertices 0, 1 -> l1^2.
        let v0 = [r(0, 1)];
        let v1 = [r(1, 1)];
        let terms = expand_monomial(&[&v0[..], &v1[..]], &[2]);
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].1, vec![0, 2]);
    }
}
