//! Weight functions on moment polytopes.
//!
//! Every supported weight is a positive profile composed with a linear
//! functional, `g(x) = b(<x, xi>)`. The families cover the soliton zoo:
//! constants (Einstein), exponentials (Ricci solitons), pinned affine
//! weights (Mabuchi), inverse powers (Ricci-flat cones) and a small
//! expression grammar for generic `b`.

use crate::error::{Error, Result};
use crate::polykernel::section::CrossSection;
use crate::polykernel::{MVector, NVector, Polytope, Vector};
use crate::scalar::Scalar;
use crate::Rat;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::sync::Arc;

// ------------------------------------------------------------ expressions

/// Smooth positive expression grammar for generic profiles `b(s)`.
///
/// Division only enters through `Recip`, which demands a positivity
/// certificate on the interval of use.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Rat),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Recip(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Expr::Const(c) => c.approx(),
            Expr::Var => s,
            Expr::Add(a, b) => a.eval(s) + b.eval(s),
            Expr::Mul(a, b) => a.eval(s) * b.eval(s),
            Expr::Pow(a, k) => a.eval(s).powi(*k),
            Expr::Exp(a) => a.eval(s).exp(),
            Expr::Recip(a) => 1.0 / a.eval(s),
        }
    }

    /// Symbolic derivative d/ds.
    pub fn deriv(&self) -> Expr {
        use Expr::*;
        match self {
            Const(_) => Const(Rat::zero()),
            Var => Const(Rat::one()),
            Add(a, b) => Add(Box::new(a.deriv()), Box::new(b.deriv())),
            Mul(a, b) => Add(
                Box::new(Mul(Box::new(a.deriv()), b.clone())),
                Box::new(Mul(a.clone(), Box::new(b.deriv()))),
            ),
            Pow(a, k) => Mul(
                Box::new(Mul(
                    Box::new(Const(Rat::from_integer((*k as i64).into()))),
                    Box::new(Pow(a.clone(), k - 1)),
                )),
                Box::new(a.deriv()),
            ),
            Exp(a) => Mul(Box::new(Exp(a.clone())), Box::new(a.deriv())),
            Recip(a) => Mul(
                Box::new(Const(-Rat::one())),
                Box::new(Mul(Box::new(a.deriv()), Box::new(Pow(a.clone(), -2)))),
            ),
        }
    }

    /// Interval bound `[lo, hi]` of the expression over `s in [lo_s, hi_s]`.
    /// Errors when a `Recip` operand is not certified positive.
    pub fn bounds(&self, lo_s: f64, hi_s: f64) -> Result<(f64, f64)> {
        match self {
            Expr::Const(c) => {
                let v = c.approx();
                Ok((v, v))
            }
            Expr::Var => Ok((lo_s, hi_s)),
            Expr::Add(a, b) => {
                let (al, ah) = a.bounds(lo_s, hi_s)?;
                let (bl, bh) = b.bounds(lo_s, hi_s)?;
                Ok((al + bl, ah + bh))
            }
            Expr::Mul(a, b) => {
                let (al, ah) = a.bounds(lo_s, hi_s)?;
                let (bl, bh) = b.bounds(lo_s, hi_s)?;
                let cands = [al * bl, al * bh, ah * bl, ah * bh];
                Ok((
                    cands.iter().cloned().fold(f64::INFINITY, f64::min),
                    cands.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                ))
            }
            Expr::Pow(a, k) => {
                let (al, ah) = a.bounds(lo_s, hi_s)?;
                if *k < 0 && al <= 0.0 && ah >= 0.0 {
                    return Err(Error::BadExpression(
                        "negative power of an interval containing zero".into(),
                    ));
                }
                let c1 = al.powi(*k);
                let c2 = ah.powi(*k);
                let mut lo = c1.min(c2);
                let hi = c1.max(c2);
                if *k % 2 == 0 && *k > 0 && al < 0.0 && ah > 0.0 {
                    lo = 0.0;
                }
                Ok((lo, hi))
            }
            Expr::Exp(a) => {
                let (al, ah) = a.bounds(lo_s, hi_s)?;
                Ok((al.exp(), ah.exp()))
            }
            Expr::Recip(a) => {
                let (al, ah) = a.bounds(lo_s, hi_s)?;
                if al <= 0.0 {
                    return Err(Error::BadExpression(
                        "reciprocal of a subexpression not certified positive".into(),
                    ));
                }
                Ok((1.0 / ah, 1.0 / al))
            }
        }
    }

    /// Parses expressions like `1 + s/2`, `exp(0.3*s)`, `1/(3+s)^4`.
    pub fn parse(input: &str) -> Result<Expr> {
        let mut p = Parser { src: input.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::BadExpression(format!(
                "unexpected trailing input at byte {}",
                p.pos
            )));
        }
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{}", c),
            Expr::Var => write!(f, "s"),
            Expr::Add(a, b) => write!(f, "({} + {})", a, b),
            Expr::Mul(a, b) => write!(f, "({} * {})", a, b),
            Expr::Pow(a, k) => write!(f, "{}^{}", a, k),
            Expr::Exp(a) => write!(f, "exp({})", a),
            Expr::Recip(a) => write!(f, "1/{}", a),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = Expr::Add(
                        Box::new(acc),
                        Box::new(Expr::Mul(Box::new(Expr::Const(-Rat::one())), Box::new(t))),
                    );
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.factor()?;
                    acc = Expr::Mul(Box::new(acc), Box::new(Expr::Recip(Box::new(d))));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let mut sign = 1i32;
            if self.peek() == Some(b'-') {
                sign = -1;
                self.pos += 1;
            }
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(Error::BadExpression("expected integer exponent".into()));
            }
            let k: i32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| Error::BadExpression("bad exponent".into()))?;
            return Ok(Expr::Pow(Box::new(base), sign * k));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(Error::BadExpression("expected ')'".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                let e = self.base()?;
                Ok(Expr::Mul(Box::new(Expr::Const(-Rat::one())), Box::new(e)))
            }
            Some(b's') => {
                self.pos += 1;
                Ok(Expr::Var)
            }
            Some(b'e') if self.src[self.pos..].starts_with(b"exp") => {
                self.pos += 3;
                if self.peek() != Some(b'(') {
                    return Err(Error::BadExpression("expected '(' after exp".into()));
                }
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(Error::BadExpression("expected ')'".into()));
                }
                self.pos += 1;
                Ok(Expr::Exp(Box::new(e)))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                let txt = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let r = parse_decimal(txt)?;
                Ok(Expr::Const(r))
            }
            other => Err(Error::BadExpression(format!("unexpected token {:?}", other))),
        }
    }
}

/// Parses `"3"`, `"3.25"` into an exact rational.
pub fn parse_decimal(txt: &str) -> Result<Rat> {
    if let Some(dot) = txt.find('.') {
        let (int, frac) = txt.split_at(dot);
        let frac = &frac[1..];
        if frac.is_empty() || frac.contains('.') {
            return Err(Error::BadExpression(format!("bad number {txt:?}")));
        }
        let mut denom = Rat::one();
        for _ in 0..frac.len() {
            denom = denom * Rat::from_integer(10.into());
        }
        let int_part: i64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| Error::BadExpression(format!("bad number {txt:?}")))?
        };
        let frac_part: i64 =
            frac.parse().map_err(|_| Error::BadExpression(format!("bad number {txt:?}")))?;
        Ok(Rat::from_integer(int_part.into()) + Rat::from_integer(frac_part.into()) / denom)
    } else {
        let v: i64 = txt.parse().map_err(|_| Error::BadExpression(format!("bad number {txt:?}")))?;
        Ok(Rat::from_integer(v.into()))
    }
}

// ---------------------------------------------------------------- weights

#[derive(Debug, Clone, PartialEq)]
pub enum WeightFamily {
    /// `g = c`
    Constant(Rat),
    /// `g = exp(<x, xi>)`
    Exponential { xi: NVector<Rat> },
    /// `g = 1 + <x - xbar, xi>`
    AffinePinned { xi: NVector<Rat>, xbar: MVector<Rat> },
    /// `g = (n + 1 + <x, xi>)^{-(n+2)}`
    ConePower { xi: NVector<Rat>, n: usize },
    /// `g = b(<x, xi>)`
    Composite { b: Expr, xi: NVector<Rat> },
    /// Cross-section transform `g0(x) = ell(x)^{-p} inner(proj(x))`,
    /// where `ell` is affine and `proj` linear-fractional in the frame
    /// coordinates of the target section.
    SectionTransformed {
        inner: Box<Weight>,
        ell_lin: Vec<Rat>,
        ell_const: Rat,
        proj_lin: Vec<Vec<Rat>>,
        proj_const: Vec<Rat>,
        power: i64,
    },
}

/// A weight attached to the polytope it lives on. Attachment is part of
/// the identity: using a weight against a different polytope is an error.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    family: WeightFamily,
    attached: Arc<Polytope<Rat>>,
}

impl Weight {
    /// Checked constructor: rejects weights that fail their positivity
    /// certificate on the attached polytope.
    pub fn new(family: WeightFamily, polytope: Arc<Polytope<Rat>>) -> Result<Weight> {
        let w = Weight::unchecked(family, polytope);
        if !w.is_positive()? {
            return Err(Error::WeightNonpositive(
                "weight not positive on the attached polytope".into(),
            ));
        }
        Ok(w)
    }

    /// Unchecked constructor for feasibility probing (the Mabuchi solver
    /// reports infeasibility instead of failing).
    pub fn unchecked(family: WeightFamily, polytope: Arc<Polytope<Rat>>) -> Weight {
        Weight { family, attached: polytope }
    }

    pub fn constant(polytope: Arc<Polytope<Rat>>, c: Rat) -> Result<Weight> {
        Weight::new(WeightFamily::Constant(c), polytope)
    }

    pub fn exponential(polytope: Arc<Polytope<Rat>>, xi: Vec<Rat>) -> Result<Weight> {
        Weight::new(WeightFamily::Exponential { xi: Vector::new(xi) }, polytope)
    }

    pub fn affine_pinned(
        polytope: Arc<Polytope<Rat>>,
        xi: Vec<Rat>,
        xbar: Vec<Rat>,
    ) -> Result<Weight> {
        Weight::new(
            WeightFamily::AffinePinned { xi: Vector::new(xi), xbar: Vector::new(xbar) },
            polytope,
        )
    }

    pub fn cone_power(polytope: Arc<Polytope<Rat>>, xi: Vec<Rat>, n: usize) -> Result<Weight> {
        Weight::new(WeightFamily::ConePower { xi: Vector::new(xi), n }, polytope)
    }

    pub fn composite(polytope: Arc<Polytope<Rat>>, b: Expr, xi: Vec<Rat>) -> Result<Weight> {
        Weight::new(WeightFamily::Composite { b, xi: Vector::new(xi) }, polytope)
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn polytope(&self) -> &Arc<Polytope<Rat>> {
        &self.attached
    }

    /// Polynomial degree of the profile, when the weight is polynomial.
    pub fn poly_degree(&self) -> Option<usize> {
        match &self.family {
            WeightFamily::Constant(_) => Some(0),
            WeightFamily::AffinePinned { .. } => Some(1),
            _ => None,
        }
    }

    /// Evaluates at a floating point in the attached polytope's
    /// coordinates; errors when the value is nonpositive.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.attached.dim() {
            return Err(Error::Invalid("evaluation point dimension mismatch".into()));
        }
        let v = self.evaluate_raw(x)?;
        if v <= 0.0 {
            return Err(Error::WeightNonpositive(format!("g(x) = {v} at {x:?}")));
        }
        Ok(v)
    }

    fn evaluate_raw(&self, x: &[f64]) -> Result<f64> {
        Ok(match &self.family {
            WeightFamily::Constant(c) => c.approx(),
            WeightFamily::Exponential { xi } => dot_f(x, &xi.coords).exp(),
            WeightFamily::AffinePinned { xi, xbar } => {
                1.0 + dot_f(x, &xi.coords) - dot_f(&xbar.approx(), &xi.coords)
            }
            WeightFamily::ConePower { xi, n } => {
                let base = (*n as f64) + 1.0 + dot_f(x, &xi.coords);
                if base <= 0.0 {
                    return Err(Error::WeightNonpositive(format!(
                        "cone weight base {base} at {x:?}"
                    )));
                }
                base.powi(-(*n as i32) - 2)
            }
            WeightFamily::Composite { b, xi } => b.eval(dot_f(x, &xi.coords)),
            WeightFamily::SectionTransformed {
                inner,
                ell_lin,
                ell_const,
                proj_lin,
                proj_const,
                power,
            } => {
                let ell = ell_const.approx() + dot_f(x, ell_lin);
                if ell <= 0.0 {
                    return Err(Error::WeightNonpositive(format!("section factor {ell}")));
                }
                let proj: Vec<f64> = proj_lin
                    .iter()
                    .zip(proj_const)
                    .map(|(row, c)| (dot_f(x, row) + c.approx()) / ell)
                    .collect();
                ell.powi(-(*power as i32)) * inner.evaluate_raw(&proj)?
            }
        })
    }

    /// Certified lower bound for the weight over the attached polytope.
    /// Exact (vertex) minimum for constant and affine families, monotone
    /// profile bound composed with the exact range of the linear form for
    /// the rest. Returns a nonpositive number for infeasible weights.
    pub fn positivity_min(&self) -> Result<f64> {
        Ok(match &self.family {
            WeightFamily::Constant(c) => c.approx(),
            WeightFamily::Exponential { xi } => {
                let (lo, _) = self.attached.range(xi);
                lo.approx().exp()
            }
            WeightFamily::AffinePinned { xi, xbar } => {
                let (lo, _) = self.attached.range(xi);
                (Rat::one() + lo - xbar.pair(xi)).approx()
            }
            WeightFamily::ConePower { xi, n } => {
                let (lo, hi) = self.attached.range(xi);
                let base_min = Rat::from_integer((*n as i64 + 1).into()) + lo;
                if !base_min.is_positive() {
                    // Outside the admissible set; report the (nonpositive)
                    // base so callers can flag infeasibility.
                    base_min.approx()
                } else {
                    let base_max = Rat::from_integer((*n as i64 + 1).into()) + hi;
                    base_max.approx().powi(-(*n as i32) - 2)
                }
            }
            WeightFamily::Composite { b, xi } => {
                let (lo, hi) = self.attached.range(xi);
                b.bounds(lo.approx(), hi.approx())?.0
            }
            WeightFamily::SectionTransformed { inner, ell_lin, ell_const, power, .. } => {
                let mut ell_min = f64::INFINITY;
                let mut ell_max = f64::NEG_INFINITY;
                for v in self.attached.vertices() {
                    let e = (ell_const.clone() + crate::linalg::dot(&v.coords, ell_lin)).approx();
                    ell_min = ell_min.min(e);
                    ell_max = ell_max.max(e);
                }
                if ell_min <= 0.0 {
                    ell_min
                } else {
                    ell_max.powi(-(*power as i32)) * inner.positivity_min()?
                }
            }
        })
    }

    /// Exact positivity decision where available; falls back on the
    /// certified bound.
    pub fn is_positive(&self) -> Result<bool> {
        Ok(match &self.family {
            WeightFamily::Constant(c) => c.is_positive(),
            WeightFamily::Exponential { .. } => true,
            WeightFamily::AffinePinned { xi, xbar } => {
                let (lo, _) = self.attached.range(xi);
                (Rat::one() + lo - xbar.pair(xi)).is_positive()
            }
            WeightFamily::ConePower { xi, n } => {
                let (lo, _) = self.attached.range(xi);
                (Rat::from_integer((*n as i64 + 1).into()) + lo).is_positive()
            }
            _ => self.positivity_min()? > 0.0,
        })
    }
}

fn dot_f(x: &[f64], y: &[Rat]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b.approx()).sum()
}

// -------------------------------------------------------- Reeb transform

/// Transforms a weight on the section `{<y, xi_hat> = 1}` to the section
/// `{<y, chi_hat> = 1}`:
///
/// `g0(y) = <y, xi_hat>^{-(n+2)} g(y / <y, xi_hat>)`
///
/// expressed in the frame coordinates of the target section. Applying the
/// transform back with the roles of the two sections swapped recovers the
/// original weight pointwise.
pub fn reeb_transform(
    g: &Weight,
    from: &CrossSection,
    to: &CrossSection,
    xi_hat: &NVector<Rat>,
    n: usize,
) -> Result<Weight> {
    if **g.polytope() != from.polytope {
        return Err(Error::PolytopeMismatch);
    }
    let (ell_lin, ell_const) = to.frame.pair_form(xi_hat);
    // ell must be positive over the target section (xi_hat interior).
    for v in to.polytope.vertices() {
        let e = ell_const.clone() + crate::linalg::dot(&v.coords, &ell_lin);
        if !e.is_positive() {
            return Err(Error::UnboundedSection);
        }
    }
    // proj(x) = (B x + c) / ell(x): from-frame coordinates of y/ell(y).
    let mut proj_lin = Vec::with_capacity(from.frame.section_dim());
    let mut proj_const = Vec::with_capacity(from.frame.section_dim());
    for axis in &from.frame.axes {
        let row: Vec<Rat> = to
            .frame
            .basis
            .iter()
            .map(|b| crate::linalg::dot(b, axis))
            .collect();
        proj_lin.push(row);
        proj_const.push(crate::linalg::dot(&to.frame.origin, axis));
    }
    Weight::new(
        WeightFamily::SectionTransformed {
            inner: Box::new(g.clone()),
            ell_lin,
            ell_const,
            proj_lin,
            proj_const,
            power: n as i64 + 2,
        },
        Arc::new(to.polytope.clone()),
    )
}
