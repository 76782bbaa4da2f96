//! Exact coefficient arithmetic.
//!
//! [`Rational`] is an exact rational with an `i64`-backed fast path and a
//! transparent promotion to `BigRational` on overflow, so series arithmetic
//! stays allocation-free for the small numbers that dominate in practice.
//!
//! [`Coeff`] is an element of the ring generated over the rationals by a
//! single formal constant `t` standing for 2*pi.  `t` is transcendental, so
//! equality of coefficient vectors is faithful to equality of the real
//! numbers they denote.  Values are polynomials in `t`; the degree-0 and
//! degree-1 components are the `rational_part` and `tau_part` seen by the
//! serialization layer, and higher powers only ever arise transiently inside
//! products.  Sign queries are decided exactly through a rational enclosure
//! of 2*pi.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

#[derive(Clone, Debug)]
enum Repr {
    // invariant: d > 0, gcd(|n|, d) = 1
    Small { n: i64, d: i64 },
    // invariant: does not fit Small
    Big(Box<BigRational>),
}

/// Exact rational number.
#[derive(Clone, Debug)]
pub struct Rational(Repr);

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small { n: 0, d: 1 })
    }

    pub fn one() -> Self {
        Rational(Repr::Small { n: 1, d: 1 })
    }

    pub fn from_int(n: i64) -> Self {
        Rational(Repr::Small { n, d: 1 })
    }

    /// `n/d`, reduced. Panics if `d == 0`.
    pub fn new(n: i64, d: i64) -> Self {
        assert!(d != 0, "rational with zero denominator");
        let neg = (n < 0) != (d < 0);
        let (un, ud) = (n.unsigned_abs(), d.unsigned_abs());
        let g = gcd_u64(un, ud).max(1);
        let (un, ud) = (un / g, ud / g);
        // un <= i64::MAX guaranteed except n = i64::MIN with d odd; handle via big
        if un <= i64::MAX as u64 && ud <= i64::MAX as u64 {
            let mut sn = un as i64;
            if neg {
                sn = -sn;
            }
            Rational(Repr::Small { n: sn, d: ud as i64 })
        } else {
            Rational::from_big(BigRational::new(BigInt::from(n), BigInt::from(d)))
        }
    }

    pub fn from_bigint(b: BigInt) -> Self {
        Rational::from_big(BigRational::from_integer(b))
    }

    /// Exact dyadic value of a finite double; `None` for NaN and infinities.
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        use num_traits::FromPrimitive;
        BigRational::from_f64(x).map(Rational::from_big)
    }

    pub fn from_big(b: BigRational) -> Self {
        if let (Some(n), Some(d)) = (b.numer().to_i64(), b.denom().to_i64()) {
            return Rational(Repr::Small { n, d });
        }
        Rational(Repr::Big(Box::new(b)))
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { n, d } => BigRational::new(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small { n, .. } => *n == 0,
            Repr::Big(_) => false, // a Big value never fits Small, so never 0
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(&self.0, Repr::Small { n: 1, d: 1 })
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { d, .. } => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small { n, .. } => (*n).signum() as i32,
            Repr::Big(b) => {
                if b.is_positive() {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn neg(&self) -> Rational {
        match &self.0 {
            Repr::Small { n, d } => {
                if let Some(m) = n.checked_neg() {
                    Rational(Repr::Small { n: m, d: *d })
                } else {
                    Rational::from_big(-self.to_big())
                }
            }
            Repr::Big(b) => Rational::from_big(-(**b).clone()),
        }
    }

    pub fn abs(&self) -> Rational {
        if self.signum() < 0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn add(&self, o: &Rational) -> Rational {
        if let (Repr::Small { n: n1, d: d1 }, Repr::Small { n: n2, d: d2 }) = (&self.0, &o.0) {
            let g = gcd_u64(d1.unsigned_abs(), d2.unsigned_abs()) as i64;
            let (e1, e2) = (d1 / g, d2 / g);
            let num = (|| {
                n1.checked_mul(e2)?.checked_add(n2.checked_mul(e1)?)
            })();
            let den = d1.checked_mul(e2);
            if let (Some(num), Some(den)) = (num, den) {
                return Rational::new(num, den);
            }
        }
        Rational::from_big(self.to_big() + o.to_big())
    }

    pub fn sub(&self, o: &Rational) -> Rational {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Rational) -> Rational {
        if let (Repr::Small { n: n1, d: d1 }, Repr::Small { n: n2, d: d2 }) = (&self.0, &o.0) {
            let g1 = gcd_u64(n1.unsigned_abs(), d2.unsigned_abs()).max(1) as i64;
            let g2 = gcd_u64(n2.unsigned_abs(), d1.unsigned_abs()).max(1) as i64;
            if let (Some(num), Some(den)) =
                ((n1 / g1).checked_mul(n2 / g2), (d1 / g2).checked_mul(d2 / g1))
            {
                // cross-reduced, so already in lowest terms
                return Rational(Repr::Small {
                    n: if den < 0 { -num } else { num },
                    d: den.abs(),
                });
            }
        }
        Rational::from_big(self.to_big() * o.to_big())
    }

    /// Panics if `o` is zero.
    pub fn div(&self, o: &Rational) -> Rational {
        assert!(!o.is_zero(), "division by zero rational");
        match &o.0 {
            Repr::Small { n, d } => self.mul(&Rational::new(*d, *n)),
            Repr::Big(b) => Rational::from_big(self.to_big() / (**b).clone()),
        }
    }

    pub fn floor(&self) -> BigInt {
        match &self.0 {
            Repr::Small { n, d } => BigInt::from(n.div_euclid(*d)),
            Repr::Big(b) => b.floor().to_integer(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small { n, d } => {
                const EXACT: i64 = 1 << 53;
                if n.abs() < EXACT && *d < EXACT {
                    return *n as f64 / *d as f64;
                }
                self.to_big().to_f64().unwrap_or(f64::NAN)
            }
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl PartialEq for Rational {
    fn eq(&self, o: &Self) -> bool {
        match (&self.0, &o.0) {
            (Repr::Small { n: n1, d: d1 }, Repr::Small { n: n2, d: d2 }) => n1 == n2 && d1 == d2,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            _ => false, // canonical: Big never equals a representable Small
        }
    }
}
impl Eq for Rational {}

impl PartialOrd for Rational {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Rational {
    fn cmp(&self, o: &Self) -> Ordering {
        if let (Repr::Small { n: n1, d: d1 }, Repr::Small { n: n2, d: d2 }) = (&self.0, &o.0) {
            // d > 0 on both sides; i64 products fit in i128 exactly
            return (*n1 as i128 * *d2 as i128).cmp(&(*n2 as i128 * *d1 as i128));
        }
        self.to_big().cmp(&o.to_big())
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { n, d } => {
                if *d == 1 {
                    write!(f, "{n}")
                } else {
                    write!(f, "{n}/{d}")
                }
            }
            Repr::Big(b) => write!(f, "{b}"),
        }
    }
}

/// Error from parsing a rational out of its `p/q` string form.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {text:?}: {reason}")]
pub struct ParseRationalError {
    pub text: String,
    pub reason: &'static str,
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason| ParseRationalError { text: s.to_string(), reason };
        let t = s.trim();
        let (num, den) = match t.split_once('/') {
            None => (t, "1"),
            Some((n, d)) => (n.trim(), d.trim()),
        };
        let n = BigInt::from_str(num).map_err(|_| bad("numerator is not an integer"))?;
        let d = BigInt::from_str(den).map_err(|_| bad("denominator is not an integer"))?;
        if d.is_zero() {
            return Err(bad("denominator is zero"));
        }
        Ok(Rational::from_big(BigRational::new(n, d)))
    }
}

/// Enclosure of 2*pi used for exact sign decisions: `TAU_LO < 2*pi < TAU_HI`.
/// 40 correct decimal digits; values whose sign this cannot separate would
/// need coefficients with hundreds of digits, which the exact layer never
/// produces from the inputs this crate accepts.
fn tau_bounds() -> &'static (Rational, Rational) {
    static BOUNDS: OnceLock<(Rational, Rational)> = OnceLock::new();
    BOUNDS.get_or_init(|| {
        let lo: Rational = "62831853071795864769252867665590057683943/10000000000000000000000000000000000000000"
            .parse()
            .expect("tau bound literal");
        let one_ulp: Rational = "1/10000000000000000000000000000000000000000".parse().unwrap();
        let hi = lo.add(&one_ulp);
        (lo, hi)
    })
}

#[derive(Clone)]
struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    fn point(r: &Rational) -> Self {
        Interval { lo: r.clone(), hi: r.clone() }
    }

    fn add(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.add(&o.lo), hi: self.hi.add(&o.hi) }
    }

    fn mul(&self, o: &Interval) -> Interval {
        let cands = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Interval { lo, hi }
    }
}

/// Coefficient: a polynomial in the formal constant `t` = 2*pi.
///
/// Canonical form: `R(x)` for pure rationals, `P(v)` with `v.len() >= 2` and
/// a nonzero leading entry otherwise, so derived equality is exact value
/// equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coeff {
    R(Rational),
    P(Vec<Rational>),
}

// shared zero for by-reference accessors
pub(crate) static COEFF_ZERO: Coeff = Coeff::R(Rational(Repr::Small { n: 0, d: 1 }));

impl Coeff {
    pub fn zero() -> Self {
        Coeff::R(Rational::zero())
    }

    pub fn one() -> Self {
        Coeff::R(Rational::one())
    }

    pub fn from_rational(r: Rational) -> Self {
        Coeff::R(r)
    }

    pub fn from_int(n: i64) -> Self {
        Coeff::R(Rational::from_int(n))
    }

    /// `r + t * tau`.
    pub fn from_parts(r: Rational, tau: Rational) -> Self {
        Coeff::normalized(vec![r, tau])
    }

    /// The formal constant `t` itself.
    pub fn tau() -> Self {
        Coeff::from_parts(Rational::zero(), Rational::one())
    }

    fn normalized(mut v: Vec<Rational>) -> Self {
        while v.len() > 1 && v.last().map_or(false, Rational::is_zero) {
            v.pop();
        }
        if v.len() == 1 {
            Coeff::R(v.pop().unwrap())
        } else if v.is_empty() {
            Coeff::zero()
        } else {
            Coeff::P(v)
        }
    }

    fn parts(&self) -> &[Rational] {
        match self {
            Coeff::R(r) => std::slice::from_ref(r),
            Coeff::P(v) => v,
        }
    }

    pub fn rational_part(&self) -> &Rational {
        &self.parts()[0]
    }

    pub fn tau_part(&self) -> Rational {
        self.parts().get(1).cloned().unwrap_or_else(Rational::zero)
    }

    /// Degree in `t`; 0 for pure rationals.
    pub fn tau_degree(&self) -> usize {
        self.parts().len() - 1
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coeff::R(r) if r.is_zero())
    }

    pub fn add(&self, o: &Coeff) -> Coeff {
        if let (Coeff::R(a), Coeff::R(b)) = (self, o) {
            return Coeff::R(a.add(b));
        }
        let (a, b) = (self.parts(), o.parts());
        let mut v = Vec::with_capacity(a.len().max(b.len()));
        for k in 0..a.len().max(b.len()) {
            let x = a.get(k).cloned().unwrap_or_else(Rational::zero);
            let y = b.get(k).cloned().unwrap_or_else(Rational::zero);
            v.push(x.add(&y));
        }
        Coeff::normalized(v)
    }

    pub fn sub(&self, o: &Coeff) -> Coeff {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Coeff {
        match self {
            Coeff::R(r) => Coeff::R(r.neg()),
            Coeff::P(v) => Coeff::P(v.iter().map(Rational::neg).collect()),
        }
    }

    pub fn mul(&self, o: &Coeff) -> Coeff {
        if let (Coeff::R(a), Coeff::R(b)) = (self, o) {
            return Coeff::R(a.mul(b));
        }
        if self.is_zero() || o.is_zero() {
            return Coeff::zero();
        }
        let (a, b) = (self.parts(), o.parts());
        let mut v = vec![Rational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                v[i + j] = v[i + j].add(&x.mul(y));
            }
        }
        Coeff::normalized(v)
    }

    pub fn scale(&self, r: &Rational) -> Coeff {
        if r.is_zero() {
            return Coeff::zero();
        }
        match self {
            Coeff::R(a) => Coeff::R(a.mul(r)),
            Coeff::P(v) => Coeff::normalized(v.iter().map(|x| x.mul(r)).collect()),
        }
    }

    /// Exact sign: `Some(-1 | 0 | 1)`, or `None` if the enclosure of 2*pi is
    /// too coarse to decide (practically unreachable).
    pub fn sign(&self) -> Option<i32> {
        match self {
            Coeff::R(r) => Some(r.signum()),
            Coeff::P(v) => {
                let (lo, hi) = tau_bounds().clone();
                let tau = Interval { lo, hi };
                // Horner from the top power
                let mut acc = Interval::point(v.last().unwrap());
                for r in v.iter().rev().skip(1) {
                    acc = acc.mul(&tau).add(&Interval::point(r));
                }
                if acc.lo.signum() > 0 {
                    Some(1)
                } else if acc.hi.signum() < 0 {
                    Some(-1)
                } else {
                    None
                }
            }
        }
    }

    /// Evaluation at `t = 2*pi` in doubles; the only place the formal
    /// constant becomes a float.
    pub fn eval_f64(&self) -> f64 {
        let mut acc = 0.0;
        for r in self.parts().iter().rev() {
            acc = acc * std::f64::consts::TAU + r.to_f64();
        }
        acc
    }
}

impl PartialOrd for Coeff {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Coeff {
    /// Componentwise order: rational part, then tau part, then higher powers.
    fn cmp(&self, o: &Self) -> Ordering {
        let (a, b) = (self.parts(), o.parts());
        for k in 0..a.len().max(b.len()) {
            let zero = Rational::zero();
            let x = a.get(k).unwrap_or(&zero);
            let y = b.get(k).unwrap_or(&zero);
            match x.cmp(y) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = self.parts();
        let mut wrote = false;
        for (k, r) in parts.iter().enumerate() {
            if r.is_zero() && !(k == 0 && parts.len() == 1) {
                continue;
            }
            if wrote {
                write!(f, "{}", if r.signum() < 0 { " - " } else { " + " })?;
            } else if r.signum() < 0 {
                write!(f, "-")?;
            }
            let a = r.abs();
            match k {
                0 => write!(f, "{a}")?,
                _ => {
                    if a.is_one() {
                        write!(f, "t")?;
                    } else {
                        write!(f, "{a}*t")?;
                    }
                    if k > 1 {
                        write!(f, "^{k}")?;
                    }
                }
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn small_arithmetic_reduces() {
        let a = Rational::new(2, 4);
        assert_eq!(a, Rational::new(1, 2));
        assert_eq!(a.add(&Rational::new(1, 3)), Rational::new(5, 6));
        assert_eq!(a.mul(&Rational::new(-2, 3)), Rational::new(-1, 3));
        assert_eq!(Rational::new(-3, -6), Rational::new(1, 2));
        assert_eq!(Rational::new(3, -6), Rational::new(-1, 2));
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rational::from_int(i64::MAX);
        let sq = big.mul(&big);
        assert_eq!(sq.to_big(), big.to_big() * big.to_big());
        // dividing back demotes to the small representation
        let back = sq.div(&big);
        assert_eq!(back, big);
        assert!(matches!(back.0, Repr::Small { .. }));
    }

    #[test]
    fn random_ops_match_bigrational() {
        let mut rng = crate::sampling::rng_from_env(0x5eed_c0ff);
        for _ in 0..2000 {
            let r = |rng: &mut rand_chacha::ChaCha8Rng| {
                let scale: u32 = rng.gen_range(0..3);
                let m = 10i64.pow(scale * 6) as i64;
                Rational::new(rng.gen_range(-50 * m..=50 * m), rng.gen_range(1..=30 * m))
            };
            let (a, b) = (r(&mut rng), r(&mut rng));
            assert_eq!(a.add(&b).to_big(), a.to_big() + b.to_big());
            assert_eq!(a.sub(&b).to_big(), a.to_big() - b.to_big());
            assert_eq!(a.mul(&b).to_big(), a.to_big() * b.to_big());
            if !b.is_zero() {
                assert_eq!(a.div(&b).to_big(), a.to_big() / b.to_big());
            }
            assert_eq!(a.cmp(&b), a.to_big().cmp(&b.to_big()));
        }
    }

    #[test]
    fn floor_matches_euclidean() {
        assert_eq!(Rational::new(7, 2).floor(), BigInt::from(3));
        assert_eq!(Rational::new(-7, 2).floor(), BigInt::from(-4));
        assert_eq!(Rational::new(-6, 2).floor(), BigInt::from(-3));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["3", "-3", "1/2", "-7/3", "0"] {
            let r: Rational = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
        }
        assert_eq!("2/4".parse::<Rational>().unwrap().to_string(), "1/2");
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
        let huge: Rational = "123456789012345678901234567891/7".parse().unwrap();
        assert_eq!(huge.to_string(), "123456789012345678901234567891/7");
    }

    #[test]
    fn from_f64_exact_is_lossless() {
        for x in [0.5, -0.1, 1.0 / 3.0, 12345.6789, 0.0, -2.0_f64.powi(-40)] {
            let r = Rational::from_f64_exact(x).unwrap();
            assert_eq!(r.to_f64(), x);
        }
        assert_eq!(
            Rational::from_f64_exact(0.25).unwrap(),
            Rational::new(1, 4)
        );
        assert!(Rational::from_f64_exact(f64::NAN).is_none());
        assert!(Rational::from_f64_exact(f64::INFINITY).is_none());
    }

    #[test]
    fn tau_enclosure_brackets_two_pi() {
        let (lo, hi) = tau_bounds();
        assert!(lo.to_f64() <= std::f64::consts::TAU);
        assert!(hi.to_f64() >= std::f64::consts::TAU);
        assert!(lo < hi);
    }

    #[test]
    fn coeff_products_track_tau_powers() {
        let t = Coeff::tau();
        let a = Coeff::from_parts(Rational::from_int(1), Rational::from_int(2)); // 1 + 2t
        let sq = a.mul(&a); // 1 + 4t + 4t^2
        assert_eq!(sq.rational_part(), &Rational::from_int(1));
        assert_eq!(sq.tau_part(), Rational::from_int(4));
        assert_eq!(sq.tau_degree(), 2);
        assert_eq!(t.mul(&t).tau_degree(), 2);
        assert_eq!(sq.sub(&sq), Coeff::zero());
        // equality is exact and componentwise: t != 6283185/1000000
        assert_ne!(t, Coeff::R("6283185/1000000".parse().unwrap()));
    }

    #[test]
    fn coeff_sign_uses_enclosure() {
        // t - 6 > 0, t - 7 < 0
        let m6 = Coeff::from_parts(Rational::from_int(-6), Rational::one());
        let m7 = Coeff::from_parts(Rational::from_int(-7), Rational::one());
        assert_eq!(m6.sign(), Some(1));
        assert_eq!(m7.sign(), Some(-1));
        assert_eq!(Coeff::zero().sign(), Some(0));
        // t^2 - 39 > 0 (4*pi^2 = 39.47...), t^2 - 40 < 0
        let t2 = Coeff::tau().mul(&Coeff::tau());
        assert_eq!(t2.add(&Coeff::from_int(-39)).sign(), Some(1));
        assert_eq!(t2.add(&Coeff::from_int(-40)).sign(), Some(-1));
    }

    #[test]
    fn coeff_eval_is_double_of_two_pi() {
        let c = Coeff::from_parts(Rational::new(1, 2), Rational::from_int(3));
        assert_eq!(c.eval_f64(), 0.5 + 3.0 * std::f64::consts::TAU);
    }

    #[test]
    fn coeff_display_forms() {
        assert_eq!(Coeff::zero().to_string(), "0");
        assert_eq!(Coeff::from_parts(Rational::new(-1, 2), Rational::from_int(2)).to_string(), "-1/2 + 2*t");
        assert_eq!(Coeff::tau().mul(&Coeff::tau()).to_string(), "t^2");
    }
}
