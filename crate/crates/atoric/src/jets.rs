//! Exact truncated bivariate power series ("jets") in `X` and `Y`.
//!
//! A [`Jet2`] holds every coefficient of total degree at most its truncation
//! order, in the coefficient ring [`Coeff`].  All operations are exact and
//! total degree beyond the order is discarded; two jets interoperate only at
//! equal orders, mismatches are an error rather than a silent coercion.
//!
//! Besides ring arithmetic the module provides the substitution operators the
//! label calculus is built from: composition in the `Y` slot ([`compose_y`]),
//! compositional inversion in `Y` ([`invert_y`]), the parity pullback along
//! `(X, Y) -> (-X, -Y)` ([`gamma_pullback`]), full two-variable substitution
//! ([`compose2`]), and the triangular solver [`solve_substitution`] that
//! recovers `g` from `g(a, b) = rhs`.  Pairs of jets acting as plane maps are
//! wrapped in [`JetPair`].

use crate::coeff::{Coeff, Rational};
use std::fmt;

/// Number of coefficients of a jet of the given order.
fn tri(order: u32) -> usize {
    let n = order as usize;
    (n + 1) * (n + 2) / 2
}

/// Dense triangular index of `(p, q)` inside a jet of order `n`.
/// Row-major in `p`: row `p` holds `q = 0..=n-p`.
fn idx(n: u32, p: u32, q: u32) -> usize {
    debug_assert!(p + q <= n);
    let (n, p, q) = (n as usize, p as usize, q as usize);
    p * (2 * n + 3 - p) / 2 + q
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JetError {
    #[error("jet truncation orders differ: {left} vs {right}")]
    OrderMismatch { left: u32, right: u32 },
    #[error("substituted series has a nonzero constant term")]
    NonzeroConstantTerm,
    #[error("series is not invertible: {0}")]
    NotInvertible(&'static str),
    #[error("coefficient index ({p}, {q}) exceeds truncation order {order}")]
    DegreeOutOfRange { p: u32, q: u32, order: u32 },
}

/// Truncated power series in two variables with exact coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct Jet2 {
    order: u32,
    coeffs: Vec<Coeff>,
}

impl Jet2 {
    pub fn zero(order: u32) -> Self {
        Jet2 { order, coeffs: vec![Coeff::zero(); tri(order)] }
    }

    /// The monomial `c * X^p Y^q`.
    pub fn monomial(order: u32, p: u32, q: u32, c: Coeff) -> Result<Self, JetError> {
        if p + q > order {
            return Err(JetError::DegreeOutOfRange { p, q, order });
        }
        let mut j = Jet2::zero(order);
        j.coeffs[idx(order, p, q)] = c;
        Ok(j)
    }

    /// The coordinate series `X`.
    pub fn x(order: u32) -> Self {
        Jet2::monomial(order, 1, 0, Coeff::one()).expect("order >= 1")
    }

    /// The coordinate series `Y`.
    pub fn y(order: u32) -> Self {
        Jet2::monomial(order, 0, 1, Coeff::one()).expect("order >= 1")
    }

    /// Builds a jet from explicit entries; repeated positions accumulate.
    pub fn from_entries<I>(order: u32, entries: I) -> Result<Self, JetError>
    where
        I: IntoIterator<Item = ((u32, u32), Coeff)>,
    {
        let mut j = Jet2::zero(order);
        for ((p, q), c) in entries {
            if p + q > order {
                return Err(JetError::DegreeOutOfRange { p, q, order });
            }
            let i = idx(order, p, q);
            j.coeffs[i] = j.coeffs[i].add(&c);
        }
        Ok(j)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn get(&self, p: u32, q: u32) -> &Coeff {
        if p + q > self.order {
            return &crate::coeff::COEFF_ZERO;
        }
        &self.coeffs[idx(self.order, p, q)]
    }

    pub fn set(&mut self, p: u32, q: u32, c: Coeff) -> Result<(), JetError> {
        if p + q > self.order {
            return Err(JetError::DegreeOutOfRange { p, q, order: self.order });
        }
        self.coeffs[idx(self.order, p, q)] = c;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Coeff::is_zero)
    }

    /// All positions in graded order (total degree ascending, then `p`
    /// descending), zeros included.
    pub fn iter_graded(&self) -> impl Iterator<Item = ((u32, u32), &Coeff)> {
        let n = self.order;
        (0..=n).flat_map(move |d| {
            (0..=d).rev().map(move |p| ((p, d - p), self.get(p, d - p)))
        })
    }

    /// Nonzero entries in graded order.
    pub fn support(&self) -> impl Iterator<Item = ((u32, u32), &Coeff)> {
        self.iter_graded().filter(|(_, c)| !c.is_zero())
    }

    /// Largest `q` carrying a nonzero coefficient.
    pub fn max_y_degree(&self) -> u32 {
        self.support().map(|((_, q), _)| q).max().unwrap_or(0)
    }

    /// Drops all coefficients of total degree above `order`, lowering the
    /// truncation order.  Raising the order is not meaningful for jet data
    /// and is rejected.
    pub fn truncated(&self, order: u32) -> Result<Jet2, JetError> {
        if order > self.order {
            return Err(JetError::DegreeOutOfRange { p: order, q: 0, order: self.order });
        }
        let mut out = Jet2::zero(order);
        for ((p, q), c) in self.support() {
            if p + q <= order {
                out.coeffs[idx(order, p, q)] = c.clone();
            }
        }
        Ok(out)
    }

    fn check_order(&self, o: &Jet2) -> Result<(), JetError> {
        if self.order != o.order {
            return Err(JetError::OrderMismatch { left: self.order, right: o.order });
        }
        Ok(())
    }

    pub fn add(&self, o: &Jet2) -> Result<Jet2, JetError> {
        self.check_order(o)?;
        let mut out = self.clone();
        out.add_in_place(o);
        Ok(out)
    }

    pub fn sub(&self, o: &Jet2) -> Result<Jet2, JetError> {
        self.check_order(o)?;
        let mut out = self.clone();
        out.sub_in_place(o);
        Ok(out)
    }

    pub fn mul(&self, o: &Jet2) -> Result<Jet2, JetError> {
        self.check_order(o)?;
        Ok(self.mul_trunc(o, self.order))
    }

    pub fn neg(&self) -> Jet2 {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = c.neg();
        }
        out
    }

    pub fn scale(&self, r: &Rational) -> Jet2 {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = c.scale(r);
        }
        out
    }

    pub fn scale_coeff(&self, k: &Coeff) -> Jet2 {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = c.mul(k);
        }
        out
    }

    fn add_in_place(&mut self, o: &Jet2) {
        debug_assert_eq!(self.order, o.order);
        for (a, b) in self.coeffs.iter_mut().zip(&o.coeffs) {
            if !b.is_zero() {
                *a = a.add(b);
            }
        }
    }

    fn sub_in_place(&mut self, o: &Jet2) {
        debug_assert_eq!(self.order, o.order);
        for (a, b) in self.coeffs.iter_mut().zip(&o.coeffs) {
            if !b.is_zero() {
                *a = a.sub(b);
            }
        }
    }

    /// Product truncated to total degree `max_deg` (still stored at the
    /// common order).  Keeping `max_deg` below the order is what makes the
    /// ascending-degree solver cheap.
    fn mul_trunc(&self, o: &Jet2, max_deg: u32) -> Jet2 {
        let n = self.order;
        let mut out = Jet2::zero(n);
        let lhs: Vec<((u32, u32), &Coeff)> = self.support().collect();
        let rhs: Vec<((u32, u32), &Coeff)> = o.support().collect();
        for &((p1, q1), c1) in &lhs {
            let d1 = p1 + q1;
            if d1 > max_deg {
                break; // graded order: everything after is higher degree
            }
            for &((p2, q2), c2) in &rhs {
                if d1 + p2 + q2 > max_deg.min(n) {
                    break;
                }
                let i = idx(n, p1 + p2, q1 + q2);
                out.coeffs[i] = out.coeffs[i].add(&c1.mul(c2));
            }
        }
        out
    }

    /// Numeric evaluation at a point, with `t` read as the double nearest
    /// 2*pi.  Summation follows the graded coefficient order and is therefore
    /// reproducible.
    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for ((p, q), c) in self.support() {
            acc += c.eval_f64() * x.powi(p as i32) * y.powi(q as i32);
        }
        acc
    }
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet2[order {}: {}]", self.order, self)
    }
}

impl fmt::Display for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for ((p, q), c) in self.support() {
            if wrote {
                write!(f, " + ")?;
            }
            let mono = match (p, q) {
                (0, 0) => String::new(),
                (p, 0) if p == 1 => "X".into(),
                (p, 0) => format!("X^{p}"),
                (0, q) if q == 1 => "Y".into(),
                (0, q) => format!("Y^{q}"),
                (1, 1) => "X*Y".into(),
                (1, q) => format!("X*Y^{q}"),
                (p, 1) => format!("X^{p}*Y"),
                (p, q) => format!("X^{p}*Y^{q}"),
            };
            if mono.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{mono}")?;
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// The three ring operations, dispatched by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
}

/// Ring arithmetic on jets of equal order.
pub fn jet_arith(a: &Jet2, b: &Jet2, op: JetOp) -> Result<Jet2, JetError> {
    match op {
        JetOp::Add => a.add(b),
        JetOp::Sub => a.sub(b),
        JetOp::Mul => a.mul(b),
    }
}

/// Powers of a substituted series, shared between repeated compositions with
/// the same inner jet.
pub struct YPowers {
    // pows[k] = g^k, truncated; pows[0] is the constant 1
    pows: Vec<Jet2>,
}

impl YPowers {
    pub fn new(g: &Jet2, max_pow: u32) -> Result<Self, JetError> {
        if !g.get(0, 0).is_zero() {
            return Err(JetError::NonzeroConstantTerm);
        }
        let mut pows = Vec::with_capacity(max_pow as usize + 1);
        let one = Jet2::monomial(g.order(), 0, 0, Coeff::one())?;
        pows.push(one);
        for k in 1..=max_pow {
            let next = if k == 1 { g.clone() } else { pows[k as usize - 1].mul_trunc(g, g.order()) };
            pows.push(next);
        }
        Ok(YPowers { pows })
    }

    fn get(&self, k: u32) -> &Jet2 {
        &self.pows[k as usize]
    }

    pub fn max_pow(&self) -> u32 {
        self.pows.len() as u32 - 1
    }
}

/// `f(X, g(X, Y))`: substitution into the `Y` slot.  `g` must have zero
/// constant term; orders must match.
pub fn compose_y(f: &Jet2, g: &Jet2) -> Result<Jet2, JetError> {
    f.check_order(g)?;
    if !g.get(0, 0).is_zero() {
        return Err(JetError::NonzeroConstantTerm);
    }
    // Horner in Y: f = sum_q c_q(X) Y^q
    let n = f.order();
    let qmax = f.max_y_degree();
    let row = |q: u32| -> Jet2 {
        let mut r = Jet2::zero(n);
        for p in 0..=(n - q) {
            let c = f.get(p, q);
            if !c.is_zero() {
                r.coeffs[idx(n, p, 0)] = c.clone();
            }
        }
        r
    };
    let mut acc = row(qmax);
    for q in (0..qmax).rev() {
        acc = acc.mul_trunc(g, n);
        acc.add_in_place(&row(q));
    }
    Ok(acc)
}

/// `compose_y` against precomputed powers of the inner series.
pub fn compose_y_with(f: &Jet2, pows: &YPowers) -> Result<Jet2, JetError> {
    f.check_order(pows.get(0))?;
    assert!(f.max_y_degree() <= pows.max_pow(), "insufficient precomputed powers");
    let n = f.order();
    let mut acc = Jet2::zero(n);
    for q in 0..=f.max_y_degree() {
        let mut xrow_nonzero = false;
        let mut term = Jet2::zero(n);
        for p in 0..=(n - q) {
            let c = f.get(p, q);
            if !c.is_zero() {
                xrow_nonzero = true;
                term.coeffs[idx(n, p, 0)] = c.clone();
            }
        }
        if !xrow_nonzero {
            continue;
        }
        if q == 0 {
            acc.add_in_place(&term);
        } else {
            acc.add_in_place(&term.mul_trunc(pows.get(q), n));
        }
    }
    Ok(acc)
}

/// Compositional inverse in `Y` holding `X`: the unique `h` with
/// `g(X, h(X, Y)) = Y` and `h(X, g(X, Y)) = Y` to the truncation order.
///
/// Computed by damped substitution, `h <- h - (g o h - Y) / g^(0,1)`, which
/// gains one order of accuracy per sweep; `order` sweeps suffice.  The
/// leading coefficient must be a nonzero pure rational: transcendental
/// leading parts have no reciprocal in the coefficient ring.
pub fn invert_y(g: &Jet2) -> Result<Jet2, JetError> {
    if !g.get(0, 0).is_zero() {
        return Err(JetError::NonzeroConstantTerm);
    }
    let lead = g.get(0, 1);
    let inv_lead = match lead {
        Coeff::R(r) if !r.is_zero() => Rational::one().div(r),
        Coeff::R(_) => return Err(JetError::NotInvertible("zero leading Y coefficient")),
        Coeff::P(_) => {
            return Err(JetError::NotInvertible("leading Y coefficient has a transcendental part"))
        }
    };
    let n = g.order();
    let y = Jet2::y(n);
    let mut h = y.clone();
    for _ in 0..n {
        let mut e = compose_y(g, &h)?;
        e.sub_in_place(&y);
        if e.is_zero() {
            break;
        }
        h.sub_in_place(&e.scale(&inv_lead));
    }
    Ok(h)
}

/// Pullback along `(X, Y) -> (-X, -Y)`: negates coefficients of odd total
/// degree.
pub fn gamma_pullback(f: &Jet2) -> Jet2 {
    let mut out = f.clone();
    let n = out.order;
    for p in 0..=n {
        for q in 0..=(n - p) {
            if (p + q) % 2 == 1 {
                let i = idx(n, p, q);
                out.coeffs[i] = out.coeffs[i].neg();
            }
        }
    }
    out
}

/// Full substitution `f(a(X, Y), b(X, Y))`; `a` and `b` need zero constant
/// terms.
pub fn compose2(f: &Jet2, a: &Jet2, b: &Jet2) -> Result<Jet2, JetError> {
    f.check_order(a)?;
    f.check_order(b)?;
    if !a.get(0, 0).is_zero() || !b.get(0, 0).is_zero() {
        return Err(JetError::NonzeroConstantTerm);
    }
    let n = f.order();
    let pmax = f.support().map(|((p, _), _)| p).max().unwrap_or(0);
    let qmax = f.max_y_degree();
    let bp = YPowers::new(b, qmax)?;
    let ap = YPowers::new(a, pmax)?;
    let mut acc = Jet2::zero(n);
    for p in 0..=pmax {
        // row_p = sum_q f[(p,q)] b^q
        let mut row = Jet2::zero(n);
        let mut nonzero = false;
        for q in 0..=(n - p) {
            let c = f.get(p, q);
            if c.is_zero() {
                continue;
            }
            nonzero = true;
            if q == 0 {
                row.coeffs[0] = row.coeffs[0].add(c);
            } else {
                row.add_in_place(&bp.get(q).scale_coeff(c));
            }
        }
        if !nonzero {
            continue;
        }
        if p == 0 {
            acc.add_in_place(&row);
        } else {
            acc.add_in_place(&row.mul_trunc(ap.get(p), n));
        }
    }
    Ok(acc)
}

/// Coefficients over the `y`-degree of `(alpha x + beta y)^p`.
fn linear_power_row(alpha: &Rational, beta: &Rational, p: usize) -> Vec<Rational> {
    // binomial expansion, built incrementally
    let mut row = vec![Rational::one()];
    for _ in 0..p {
        let mut next = vec![Rational::zero(); row.len() + 1];
        for (j, c) in row.iter().enumerate() {
            next[j] = next[j].add(&c.mul(alpha));
            next[j + 1] = next[j + 1].add(&c.mul(beta));
        }
        row = next;
    }
    row
}

fn convolve(u: &[Rational], v: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); u.len() + v.len() - 1];
    for (i, a) in u.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in v.iter().enumerate() {
            out[i + j] = out[i + j].add(&a.mul(b));
        }
    }
    out
}

/// Solves a square rational system with `Coeff`-valued right-hand side by
/// exact Gaussian elimination.  Returns `None` when singular.
fn solve_rational_system(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Coeff>) -> Option<Vec<Coeff>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in (col + 1)..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].div(&m[col][col]);
            for c in col..n {
                let t = m[col][c].mul(&factor);
                m[r][c] = m[r][c].sub(&t);
            }
            let t = rhs[col].scale(&factor);
            rhs[r] = rhs[r].sub(&t);
        }
    }
    let mut x = vec![Coeff::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for c in (row + 1)..n {
            acc = acc.sub(&x[c].scale(&m[row][c]));
        }
        x[row] = acc.scale(&Rational::one().div(&m[row][row]));
    }
    Some(x)
}

/// Recovers `g` from `g(a, b) = rhs`, degree by degree.
///
/// `a` and `b` must vanish at the origin and have pure-rational, linearly
/// independent linear parts; then the degree-`d` unknowns of `g` satisfy an
/// invertible linear system whose matrix is the `d`-th symmetric power of the
/// linear part, and the solution is exact and unique.
pub fn solve_substitution(a: &Jet2, b: &Jet2, rhs: &Jet2) -> Result<Jet2, JetError> {
    a.check_order(b)?;
    a.check_order(rhs)?;
    if !a.get(0, 0).is_zero() || !b.get(0, 0).is_zero() {
        return Err(JetError::NonzeroConstantTerm);
    }
    let rat = |c: &Coeff| -> Result<Rational, JetError> {
        match c {
            Coeff::R(r) => Ok(r.clone()),
            Coeff::P(_) => {
                Err(JetError::NotInvertible("linear part has a transcendental coefficient"))
            }
        }
    };
    let (a10, a01) = (rat(a.get(1, 0))?, rat(a.get(0, 1))?);
    let (b10, b01) = (rat(b.get(1, 0))?, rat(b.get(0, 1))?);
    let det = a10.mul(&b01).sub(&a01.mul(&b10));
    if det.is_zero() {
        return Err(JetError::NotInvertible("linear parts are dependent"));
    }
    let n = a.order();
    let apows = YPowers::new(a, n)?;
    let bpows = YPowers::new(b, n)?;
    let mut g = Jet2::zero(n);
    let mut residual = rhs.clone();
    // constant term substitutes to itself
    g.coeffs[0] = residual.coeffs[0].clone();
    residual.coeffs[0] = Coeff::zero();
    for d in 1..=n {
        let rd: Vec<Coeff> = (0..=d).map(|i| residual.get(d - i, i).clone()).collect();
        if rd.iter().all(Coeff::is_zero) {
            continue;
        }
        // columns indexed by unknowns (p, q), p + q = d, p descending
        let mut cols = Vec::with_capacity(d as usize + 1);
        for p in (0..=d).rev() {
            let q = d - p;
            cols.push(convolve(
                &linear_power_row(&a10, &a01, p as usize),
                &linear_power_row(&b10, &b01, q as usize),
            ));
        }
        let dim = d as usize + 1;
        let mut m = vec![vec![Rational::zero(); dim]; dim];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..dim {
                m[i][j] = col[i].clone();
            }
        }
        let delta = solve_rational_system(m, rd)
            .ok_or(JetError::NotInvertible("degenerate symmetric power block"))?;
        for (j, p) in (0..=d).rev().enumerate() {
            let q = d - p;
            let dpq = &delta[j];
            if dpq.is_zero() {
                continue;
            }
            g.coeffs[idx(n, p, q)] = dpq.clone();
            let basis = apows.get(p).mul_trunc(bpows.get(q), n);
            residual.sub_in_place(&basis.scale_coeff(dpq));
        }
    }
    debug_assert!(residual.is_zero(), "substitution solve left a residual");
    Ok(g)
}

/// A pair of jets read as a plane map germ `(X, Y) -> (x-component, y-component)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetPair {
    pub x: Jet2,
    pub y: Jet2,
}

impl JetPair {
    pub fn new(x: Jet2, y: Jet2) -> Result<Self, JetError> {
        x.check_order(&y)?;
        Ok(JetPair { x, y })
    }

    pub fn identity(order: u32) -> Self {
        JetPair { x: Jet2::x(order), y: Jet2::y(order) }
    }

    pub fn order(&self) -> u32 {
        self.x.order()
    }

    pub fn fixes_origin(&self) -> bool {
        self.x.get(0, 0).is_zero() && self.y.get(0, 0).is_zero()
    }

    /// `self` after `inner`: the map `p -> self(inner(p))`.
    pub fn compose(&self, inner: &JetPair) -> Result<JetPair, JetError> {
        Ok(JetPair {
            x: compose2(&self.x, &inner.x, &inner.y)?,
            y: compose2(&self.y, &inner.x, &inner.y)?,
        })
    }

    /// Two-sided compositional inverse of an origin-fixing map with
    /// invertible linear part.
    pub fn invert(&self) -> Result<JetPair, JetError> {
        if !self.fixes_origin() {
            return Err(JetError::NonzeroConstantTerm);
        }
        let n = self.order();
        Ok(JetPair {
            x: solve_substitution(&self.x, &self.y, &Jet2::x(n))?,
            y: solve_substitution(&self.x, &self.y, &Jet2::y(n))?,
        })
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> (f64, f64) {
        (self.x.eval_f64(x, y), self.y.eval_f64(x, y))
    }
}
