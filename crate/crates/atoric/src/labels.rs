//! Focus-focus labels: the truncated-series invariant attached to a nodal
//! fiber of multiplicity `m`.
//!
//! A label bundles one action series per local sheet `u` in `Z_m` with an
//! `m x m` family of transition series `g[u][v]` tying the sheets together.
//! [`verify_label`] checks the defining axioms to the truncation order:
//!
//! (a) every `g[u][v]` has strictly positive leading `Y` coefficient,
//! (b) `s[u] = s[v](X, g[u][v](X, Y))` as action series,
//! (c) `g[u][u] = Y`,
//! (d) the cocycle identity `g[u][w] = g[v][w](X, g[u][v](X, Y))`.
//!
//! Action series live in the quotient by integer multiples of `2*pi*X`; the
//! quotient is applied eagerly by normalizing the `t`-part of the `X`
//! coefficient into `[0, 1)`, so equality of representatives is equality in
//! the quotient.  Labels themselves are compared up to the cyclic relabeling
//! of sheets, through a minimal-rotation normal form.

use crate::coeff::{Coeff, Rational};
use crate::jets::{compose_y_with, gamma_pullback, Jet2, JetError, JetPair, YPowers};
use std::fmt;

/// Element of the action-series quotient: zero constant term, `t`-part of
/// the `X` coefficient normalized into `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSeries {
    rep: Jet2,
}

/// Unquotiented action series: zero constant term, no further normalization.
/// Kept only transiently; the twisting index reads the difference of two of
/// these.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelativeActionSeries {
    rep: Jet2,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("{0}")]
    Shape(#[from] LabelShapeError),
    #[error("label axioms violated: {0}")]
    Invalid(LabelReport),
}

/// Structural problems, kept distinct from axiom violations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelShapeError {
    #[error("multiplicity must be positive")]
    ZeroMultiplicity,
    #[error("expected {expected} action series, found {got}")]
    WrongSeriesCount { expected: usize, got: usize },
    #[error("expected an {expected}x{expected} transition array, found row of length {got}")]
    WrongTransitionShape { expected: usize, got: usize },
    #[error("jets mix truncation orders {first} and {other}")]
    MixedOrders { first: u32, other: u32 },
}

/// One failed axiom, with the indices it failed at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelViolation {
    /// (a): leading `Y` coefficient of `g[u][v]` not positive.
    NonPositiveLeading { u: usize, v: usize },
    /// (a): the sign of the leading coefficient could not be decided.
    UndecidableLeading { u: usize, v: usize },
    /// (b): `s[u] != s[v] o g[u][v]` after normalization.
    ActionMismatch { u: usize, v: usize },
    /// (c): `g[u][u] != Y`.
    DiagonalNotIdentity { u: usize },
    /// (d): `g[u][w] != g[v][w] o g[u][v]`.
    CocycleFailure { u: usize, v: usize, w: usize },
    /// A series that must vanish at the origin does not.
    NonzeroConstant { series: SeriesRef },
}

/// Which series a constant-term violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesRef {
    Action { u: usize },
    Transition { u: usize, v: usize },
}

impl fmt::Display for LabelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelViolation::NonPositiveLeading { u, v } => {
                write!(f, "(a) leading Y coefficient of g[{u}][{v}] is not positive")
            }
            LabelViolation::UndecidableLeading { u, v } => {
                write!(f, "(a) sign of leading Y coefficient of g[{u}][{v}] undecided")
            }
            LabelViolation::ActionMismatch { u, v } => {
                write!(f, "(b) s[{u}] does not match s[{v}] composed with g[{u}][{v}]")
            }
            LabelViolation::DiagonalNotIdentity { u } => {
                write!(f, "(c) g[{u}][{u}] is not Y")
            }
            LabelViolation::CocycleFailure { u, v, w } => {
                write!(f, "(d) cocycle fails: g[{u}][{w}] != g[{v}][{w}] o g[{u}][{v}]")
            }
            LabelViolation::NonzeroConstant { series: SeriesRef::Action { u } } => {
                write!(f, "s[{u}] has a nonzero constant term")
            }
            LabelViolation::NonzeroConstant { series: SeriesRef::Transition { u, v } } => {
                write!(f, "g[{u}][{v}] has a nonzero constant term")
            }
        }
    }
}

/// Outcome of [`verify_label`]: all violations found, not just the first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelReport {
    violations: Vec<LabelViolation>,
}

impl LabelReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[LabelViolation] {
        &self.violations
    }

    pub fn has_leading_violation(&self) -> bool {
        self.violations.iter().any(|v| {
            matches!(
                v,
                LabelViolation::NonPositiveLeading { .. } | LabelViolation::UndecidableLeading { .. }
            )
        })
    }

    pub fn has_cocycle_violation(&self) -> bool {
        self.violations.iter().any(|v| matches!(v, LabelViolation::CocycleFailure { .. }))
    }

    pub fn has_diagonal_violation(&self) -> bool {
        self.violations.iter().any(|v| matches!(v, LabelViolation::DiagonalNotIdentity { .. }))
    }

    pub fn has_constant_violation(&self) -> bool {
        self.violations.iter().any(|v| matches!(v, LabelViolation::NonzeroConstant { .. }))
    }

    pub fn has_action_mismatch_touching(&self, idx: usize) -> bool {
        self.violations.iter().any(
            |v| matches!(v, LabelViolation::ActionMismatch { u, v } if *u == idx || *v == idx),
        )
    }
}

impl fmt::Display for LabelReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "all axioms hold");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Normalizes the `t`-part of the `(1, 0)` coefficient into `[0, 1)` by
/// subtracting an integer multiple of `t*X`; exact, and the only place the
/// quotient acts.
fn normalize_rep(mut rep: Jet2) -> Jet2 {
    let c = rep.get(1, 0).clone();
    let t = c.tau_part();
    let k = t.floor();
    if k != num_bigint::BigInt::from(0) {
        let delta = Coeff::tau().scale(&Rational::from_bigint(k));
        rep.set(1, 0, c.sub(&delta)).expect("(1,0) within any positive order");
    }
    rep
}

impl ActionSeries {
    /// Wraps and normalizes; the constant term must vanish.
    pub fn new(rep: Jet2) -> Result<Self, LabelError> {
        if !rep.get(0, 0).is_zero() {
            return Err(LabelError::Invalid(LabelReport {
                violations: vec![LabelViolation::NonzeroConstant {
                    series: SeriesRef::Action { u: 0 },
                }],
            }));
        }
        Ok(ActionSeries { rep: normalize_rep(rep) })
    }

    pub fn rep(&self) -> &Jet2 {
        &self.rep
    }

    pub fn order(&self) -> u32 {
        self.rep.order()
    }
}

impl RelativeActionSeries {
    pub fn new(rep: Jet2) -> Result<Self, LabelError> {
        if !rep.get(0, 0).is_zero() {
            return Err(LabelError::Invalid(LabelReport {
                violations: vec![LabelViolation::NonzeroConstant {
                    series: SeriesRef::Action { u: 0 },
                }],
            }));
        }
        Ok(RelativeActionSeries { rep })
    }

    pub fn rep(&self) -> &Jet2 {
        &self.rep
    }
}

/// Checks the label axioms on raw series arrays.  Shape problems (wrong
/// lengths, mixed orders) are errors; axiom failures land in the report.
pub fn verify_label(m: usize, s: &[Jet2], g: &[Vec<Jet2>]) -> Result<LabelReport, LabelShapeError> {
    if m == 0 {
        return Err(LabelShapeError::ZeroMultiplicity);
    }
    if s.len() != m {
        return Err(LabelShapeError::WrongSeriesCount { expected: m, got: s.len() });
    }
    if g.len() != m {
        return Err(LabelShapeError::WrongTransitionShape { expected: m, got: g.len() });
    }
    for row in g {
        if row.len() != m {
            return Err(LabelShapeError::WrongTransitionShape { expected: m, got: row.len() });
        }
    }
    let order = s[0].order();
    for j in s.iter().chain(g.iter().flatten()) {
        if j.order() != order {
            return Err(LabelShapeError::MixedOrders { first: order, other: j.order() });
        }
    }

    let mut violations = Vec::new();
    for (u, su) in s.iter().enumerate() {
        if !su.get(0, 0).is_zero() {
            violations.push(LabelViolation::NonzeroConstant { series: SeriesRef::Action { u } });
        }
    }
    // usable[u][v]: g[u][v] admits substitution (zero constant term)
    let mut usable = vec![vec![true; m]; m];
    for u in 0..m {
        for v in 0..m {
            if !g[u][v].get(0, 0).is_zero() {
                violations.push(LabelViolation::NonzeroConstant {
                    series: SeriesRef::Transition { u, v },
                });
                usable[u][v] = false;
            }
            match g[u][v].get(0, 1).sign() {
                Some(sig) if sig > 0 => {}
                Some(_) => violations.push(LabelViolation::NonPositiveLeading { u, v }),
                None => violations.push(LabelViolation::UndecidableLeading { u, v }),
            }
        }
    }
    // (c)
    let y = Jet2::y(order);
    for u in 0..m {
        if g[u][u] != y {
            violations.push(LabelViolation::DiagonalNotIdentity { u });
        }
    }
    // powers of the off-diagonal transitions, shared by (b) and (d)
    let mut pows: Vec<Vec<Option<YPowers>>> = Vec::with_capacity(m);
    for u in 0..m {
        let mut row = Vec::with_capacity(m);
        for v in 0..m {
            row.push(if u != v && usable[u][v] {
                Some(YPowers::new(&g[u][v], order).expect("constant term checked"))
            } else {
                None
            });
        }
        pows.push(row);
    }
    // (b): skip u = v (trivial when (c) holds, reported through (c) otherwise)
    for u in 0..m {
        for v in 0..m {
            if u == v {
                continue;
            }
            let Some(p) = &pows[u][v] else { continue };
            let rhs = compose_y_with(&s[v], p).expect("orders checked");
            if normalize_rep(s[u].clone()) != normalize_rep(rhs) {
                violations.push(LabelViolation::ActionMismatch { u, v });
            }
        }
    }
    // (d): triples with u != v and v != w; the rest reduce to (c)
    for u in 0..m {
        for v in 0..m {
            if u == v {
                continue;
            }
            let Some(p) = &pows[u][v] else { continue };
            for w in 0..m {
                if v == w {
                    continue;
                }
                let rhs = compose_y_with(&g[v][w], p).expect("orders checked");
                if g[u][w] != rhs {
                    violations.push(LabelViolation::CocycleFailure { u, v, w });
                }
            }
        }
    }
    Ok(LabelReport { violations })
}

/// A validated focus-focus label of multiplicity `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FocusLabel {
    m: usize,
    order: u32,
    s: Vec<ActionSeries>,
    g: Vec<Vec<Jet2>>,
}

impl FocusLabel {
    /// Builds a label from raw series, verifying the axioms; `m` is the
    /// length of `s`.
    pub fn new(s: Vec<Jet2>, g: Vec<Vec<Jet2>>) -> Result<Self, LabelError> {
        let m = s.len();
        let report = verify_label(m, &s, &g)?;
        if !report.is_valid() {
            return Err(LabelError::Invalid(report));
        }
        let order = s[0].order();
        let s = s.into_iter().map(|rep| ActionSeries { rep: normalize_rep(rep) }).collect();
        Ok(FocusLabel { m, order, s, g })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn s(&self, u: usize) -> &ActionSeries {
        &self.s[u]
    }

    pub fn g(&self, u: usize, v: usize) -> &Jet2 {
        &self.g[u][v]
    }

    pub fn series(&self) -> &[ActionSeries] {
        &self.s
    }

    pub fn transitions(&self) -> &[Vec<Jet2>] {
        &self.g
    }
}

/// Relabels the sheets by `u -> u + w` modulo `m`.  Validity is preserved;
/// the axioms are symmetric in the cyclic index.
pub fn cyclic_act(w: i64, l: &FocusLabel) -> FocusLabel {
    let m = l.m as i64;
    let shift = |u: usize| ((u as i64 + w).rem_euclid(m)) as usize;
    let s = (0..l.m).map(|u| l.s[shift(u)].clone()).collect();
    let g = (0..l.m)
        .map(|u| (0..l.m).map(|v| l.g[shift(u)][shift(v)].clone()).collect())
        .collect();
    FocusLabel { m: l.m, order: l.order, s, g }
}

/// Serialization key for rotation comparison: coefficients in a fixed global
/// order (total degree ascending, `p` descending, then `s` by sheet, then
/// `g` row-major).
fn orbit_key(l: &FocusLabel) -> Vec<Coeff> {
    let n = l.order;
    let mut key = Vec::new();
    for d in 0..=n {
        for p in (0..=d).rev() {
            let q = d - p;
            for u in 0..l.m {
                key.push(l.s[u].rep.get(p, q).clone());
            }
            for u in 0..l.m {
                for v in 0..l.m {
                    key.push(l.g[u][v].get(p, q).clone());
                }
            }
        }
    }
    key
}

/// Canonical representative of the cyclic orbit: the rotation with the
/// smallest serialization key (ties broken by smallest shift).  A convention
/// of this crate; no canonical choice is standard.
pub fn orbit_normal_form(l: &FocusLabel) -> FocusLabel {
    let mut best = l.clone();
    let mut best_key = orbit_key(l);
    for w in 1..l.m {
        let cand = cyclic_act(w as i64, l);
        let key = orbit_key(&cand);
        if key < best_key {
            best = cand;
            best_key = key;
        }
    }
    best
}

/// Equality of labels as cyclic orbits at the same truncation order.
pub fn labels_equal(a: &FocusLabel, b: &FocusLabel) -> bool {
    if a.m != b.m || a.order != b.order {
        return false;
    }
    orbit_normal_form(a) == orbit_normal_form(b)
}

/// The sign-flip involution: `s'[u] = -s[-u] o gamma`, `g'[u][v] =
/// -g[-u][-v] o gamma`, with `gamma(X, Y) = (-X, -Y)`.
///
/// Panics if the result fails verification, which would mean a bug here: the
/// axioms are preserved by the flip.
pub fn flip_label(l: &FocusLabel) -> FocusLabel {
    let m = l.m as i64;
    let neg = |u: usize| ((-(u as i64)).rem_euclid(m)) as usize;
    let s: Vec<Jet2> = (0..l.m).map(|u| gamma_pullback(l.s[neg(u)].rep()).neg()).collect();
    let g: Vec<Vec<Jet2>> = (0..l.m)
        .map(|u| (0..l.m).map(|v| gamma_pullback(&l.g[neg(u)][neg(v)]).neg()).collect())
        .collect();
    FocusLabel::new(s, g).expect("flip of a valid label is valid")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransitionError {
    #[error("jet pairs do not share their first component")]
    MismatchedFirstComponents,
    #[error("jet pair does not fix the origin")]
    NotOriginFixing,
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Transition series between two coordinate presentations: the unique `g`
/// with `g(Eu) = proj2(Ev)`, i.e. the second component of `Ev o Eu^{-1}`.
/// Both pairs must fix the origin and share their first component, which
/// makes the composite triangular `(X, g(X, Y))`.
pub fn transition_series(eu: &JetPair, ev: &JetPair) -> Result<Jet2, TransitionError> {
    if eu.x != ev.x {
        return Err(TransitionError::MismatchedFirstComponents);
    }
    if !eu.fixes_origin() || !ev.fixes_origin() {
        return Err(TransitionError::NotOriginFixing);
    }
    Ok(crate::jets::solve_substitution(&eu.x, &eu.y, &ev.y)?)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TwistError {
    #[error("relative action series are not comparable: difference is not an integer multiple of t*X")]
    NotComparable,
    #[error("twisting index does not fit a machine integer")]
    Overflow,
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// The integer `k` with `st2 - st1 = k * t * X`, when it exists.
pub fn twisting_index(
    st1: &RelativeActionSeries,
    st2: &RelativeActionSeries,
) -> Result<i64, TwistError> {
    let diff = st2.rep.sub(&st1.rep)?;
    let mut k: Option<i64> = None;
    for ((p, q), c) in diff.iter_graded() {
        if (p, q) == (1, 0) {
            if !c.rational_part().is_zero() || c.tau_degree() > 1 {
                return Err(TwistError::NotComparable);
            }
            let t = c.tau_part();
            if !t.is_integer() {
                return Err(TwistError::NotComparable);
            }
            k = num_traits::ToPrimitive::to_i64(&t.floor());
            if k.is_none() {
                return Err(TwistError::Overflow);
            }
        } else if !c.is_zero() {
            return Err(TwistError::NotComparable);
        }
    }
    Ok(k.unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{compose_y, invert_y};
    use crate::sampling;
    use rand::Rng;

    fn c(n: i64) -> Coeff {
        Coeff::from_int(n)
    }

    fn simple_m1(order: u32) -> FocusLabel {
        // s0 = Y + Y^2, g00 = Y
        let s0 = Jet2::from_entries(order, [((0, 1), c(1)), ((0, 2), c(1))]).unwrap();
        FocusLabel::new(vec![s0], vec![vec![Jet2::y(order)]]).unwrap()
    }

    fn simple_m2(order: u32) -> FocusLabel {
        // g01 = Y + XY, g10 its inverse, s1 = Y, s0 = s1 o g01 = Y + XY
        let g01 = Jet2::from_entries(order, [((0, 1), c(1)), ((1, 1), c(1))]).unwrap();
        let g10 = invert_y(&g01).unwrap();
        let y = Jet2::y(order);
        let s0 = g01.clone();
        FocusLabel::new(vec![s0, y.clone()], vec![vec![y.clone(), g01], vec![g10, y]]).unwrap()
    }

    #[test]
    fn hand_built_labels_verify() {
        simple_m1(6);
        simple_m2(6);
    }

    #[test]
    fn negative_leading_coefficient_fails_condition_a() {
        let order = 4;
        let y = Jet2::y(order);
        let g01 = y.neg();
        let g10 = y.neg();
        let s = vec![y.clone(), y.clone()];
        let g = vec![vec![y.clone(), g01], vec![g10, y]];
        let report = verify_label(2, &s, &g).unwrap();
        assert!(!report.is_valid());
        assert!(report.has_leading_violation());
    }

    #[test]
    fn shape_problems_are_errors_not_violations() {
        let y = Jet2::y(4);
        assert!(matches!(
            verify_label(2, &[y.clone()], &[vec![y.clone()]]),
            Err(LabelShapeError::WrongSeriesCount { .. })
        ));
        assert!(matches!(
            verify_label(1, &[y.clone()], &[vec![Jet2::y(5)]]),
            Err(LabelShapeError::MixedOrders { .. })
        ));
        assert!(matches!(verify_label(0, &[], &[]), Err(LabelShapeError::ZeroMultiplicity)));
    }

    #[test]
    fn report_collects_every_violation() {
        let order = 4;
        let y = Jet2::y(order);
        // g00 wrong (c) and s0 with constant term
        let s0 = Jet2::from_entries(order, [((0, 0), c(1)), ((0, 1), c(1))]).unwrap();
        let g00 = Jet2::from_entries(order, [((0, 1), c(1)), ((1, 1), c(1))]).unwrap();
        let report = verify_label(1, &[s0], &[vec![g00]]).unwrap();
        assert!(report.has_constant_violation());
        assert!(report.has_diagonal_violation());
        assert_eq!(report.violations().len(), 2);
        let _ = y;
    }

    #[test]
    fn cyclic_act_is_periodic_and_matches_expected_rotation() {
        let l = simple_m2(5);
        assert_eq!(cyclic_act(0, &l), l);
        assert_eq!(cyclic_act(2, &l), l);
        assert_eq!(cyclic_act(-2, &l), l);
        let r = cyclic_act(1, &l);
        assert_eq!(r.s(0), l.s(1));
        assert_eq!(r.s(1), l.s(0));
        assert_eq!(r.g(0, 1), l.g(1, 0));
        assert_eq!(r.g(1, 0), l.g(0, 1));
    }

    #[test]
    fn orbit_normal_form_is_rotation_invariant_and_idempotent() {
        let mut rng = sampling::rng_from_env(0x04b17);
        for _ in 0..10 {
            let m = rng.gen_range(1..=3);
            let l = sampling::rand_valid_label(&mut rng, m, 6);
            let nf = orbit_normal_form(&l);
            assert_eq!(orbit_normal_form(&nf), nf, "not idempotent");
            for w in 0..m as i64 {
                assert_eq!(orbit_normal_form(&cyclic_act(w, &l)), nf);
            }
        }
        let l1 = simple_m1(5);
        assert_eq!(orbit_normal_form(&l1), l1);
    }

    #[test]
    fn labels_equal_respects_rotation_and_multiplicity() {
        let l = simple_m2(5);
        assert!(labels_equal(&l, &cyclic_act(1, &l)));
        assert!(!labels_equal(&l, &simple_m1(5)));
    }

    #[test]
    fn tau_x_multiples_are_quotiented_away() {
        let order = 4;
        let y = Jet2::y(order);
        let a = FocusLabel::new(vec![y.clone()], vec![vec![y.clone()]]).unwrap();
        // s0 = Y + t*X differs from Y by one full period
        let s0 = Jet2::from_entries(order, [((0, 1), c(1)), ((1, 0), Coeff::tau())]).unwrap();
        let b = FocusLabel::new(vec![s0], vec![vec![y.clone()]]).unwrap();
        assert!(labels_equal(&a, &b));
        // but a fractional multiple is a genuinely different label
        let half = Coeff::tau().scale(&Rational::new(1, 2));
        let s0 = Jet2::from_entries(order, [((0, 1), c(1)), ((1, 0), half)]).unwrap();
        let c_label = FocusLabel::new(vec![s0], vec![vec![y]]).unwrap();
        assert!(!labels_equal(&a, &c_label));
    }

    #[test]
    fn flip_matches_hand_computation() {
        let order = 4;
        // (s0, g00) = (Y^2, Y) flips to (-Y^2, Y)
        let s0 = Jet2::from_entries(order, [((0, 2), c(1))]).unwrap();
        let l = FocusLabel::new(vec![s0], vec![vec![Jet2::y(order)]]).unwrap();
        let f = flip_label(&l);
        let want = Jet2::from_entries(order, [((0, 2), c(-1))]).unwrap();
        assert_eq!(f.s(0).rep(), &want);
        assert_eq!(f.g(0, 0), &Jet2::y(order));
        // odd series are fixed points
        let l2 = FocusLabel::new(vec![Jet2::y(order)], vec![vec![Jet2::y(order)]]).unwrap();
        assert_eq!(flip_label(&l2), l2);
    }

    #[test]
    fn flip_is_an_orbit_level_involution() {
        let mut rng = sampling::rng_from_env(0xf11b);
        for _ in 0..10 {
            let m = rng.gen_range(1..=3);
            let l = sampling::rand_valid_label(&mut rng, m, 6);
            let ff = flip_label(&flip_label(&l));
            assert!(labels_equal(&ff, &l));
        }
    }

    #[test]
    fn transition_series_matches_direct_compositions() {
        let n = 5;
        let id = JetPair::identity(n);
        let double = JetPair::new(Jet2::x(n), Jet2::y(n).scale(&Rational::from_int(2))).unwrap();
        assert_eq!(
            transition_series(&id, &double).unwrap(),
            Jet2::y(n).scale(&Rational::from_int(2))
        );
        assert_eq!(transition_series(&double, &double).unwrap(), Jet2::y(n));
        // Eu = (X, Y + XY), Ev = (X, Y): the transition is invert_y(Y + XY)
        let g = Jet2::from_entries(n, [((0, 1), c(1)), ((1, 1), c(1))]).unwrap();
        let eu = JetPair::new(Jet2::x(n), g.clone()).unwrap();
        assert_eq!(transition_series(&eu, &id).unwrap(), invert_y(&g).unwrap());
        // and the other way around recovers g itself
        assert_eq!(transition_series(&id, &eu).unwrap(), g);
    }

    #[test]
    fn transition_series_rejects_mismatched_first_components() {
        let n = 4;
        let eu = JetPair::identity(n);
        let ev =
            JetPair::new(Jet2::x(n).scale(&Rational::from_int(2)), Jet2::y(n)).unwrap();
        assert!(matches!(
            transition_series(&eu, &ev),
            Err(TransitionError::MismatchedFirstComponents)
        ));
    }

    #[test]
    fn transition_cocycle_holds_on_random_triples() {
        let mut rng = sampling::rng_from_env(0xc0c1);
        for _ in 0..10 {
            let n = 8;
            let (eu, ev, ew) = sampling::rand_compatible_triple(&mut rng, n);
            let guv = transition_series(&eu, &ev).unwrap();
            let gvw = transition_series(&ev, &ew).unwrap();
            let guw = transition_series(&eu, &ew).unwrap();
            assert_eq!(guw, compose_y(&gvw, &guv).unwrap());
        }
    }

    #[test]
    fn twisting_index_reads_integer_tau_x_differences() {
        let n = 4;
        let base = RelativeActionSeries::new(Jet2::y(n)).unwrap();
        let plus2 = {
            let mut j = Jet2::y(n);
            j.set(1, 0, Coeff::tau().scale(&Rational::from_int(2))).unwrap();
            RelativeActionSeries::new(j).unwrap()
        };
        assert_eq!(twisting_index(&base, &plus2).unwrap(), 2);
        assert_eq!(twisting_index(&plus2, &base).unwrap(), -2);
        assert_eq!(twisting_index(&base, &base).unwrap(), 0);
        let half = {
            let mut j = Jet2::y(n);
            j.set(1, 0, Coeff::tau().scale(&Rational::new(1, 2))).unwrap();
            RelativeActionSeries::new(j).unwrap()
        };
        assert!(matches!(twisting_index(&base, &half), Err(TwistError::NotComparable)));
        // a rational (non-tau) difference at (1,0) is also not comparable
        let shifted = {
            let mut j = Jet2::y(n);
            j.set(1, 0, c(1)).unwrap();
            RelativeActionSeries::new(j).unwrap()
        };
        assert!(matches!(twisting_index(&base, &shifted), Err(TwistError::NotComparable)));
    }

    #[test]
    fn twisting_index_is_additive() {
        let mut rng = sampling::rng_from_env(0x77151);
        for _ in 0..20 {
            let n = 6;
            let rep = sampling::rand_jet(&mut rng, n, 0.4, true, true);
            let a = RelativeActionSeries::new(rep.clone()).unwrap();
            let shift = |j: &Jet2, k: i64| {
                let mut out = j.clone();
                let c0 = out.get(1, 0).add(&Coeff::tau().scale(&Rational::from_int(k)));
                out.set(1, 0, c0).unwrap();
                RelativeActionSeries::new(out).unwrap()
            };
            let b = shift(&rep, rng.gen_range(-5..=5));
            let cc = shift(&rep, rng.gen_range(-5..=5));
            let ab = twisting_index(&a, &b).unwrap();
            let bc = twisting_index(&b, &cc).unwrap();
            let ac = twisting_index(&a, &cc).unwrap();
            assert_eq!(ac, ab + bc);
        }
    }

    #[test]
    fn random_valid_labels_pass_and_mutations_fail() {
        let mut rng = sampling::rng_from_env(0x111);
        for _ in 0..12 {
            let m = rng.gen_range(1..=3);
            let l = sampling::rand_valid_label(&mut rng, m, 8);
            let mutation = sampling::mutate_label(&mut rng, &l);
            let report = verify_label(mutation.m, &mutation.s, &mutation.g).unwrap();
            assert!(
                sampling::mutation_detected(&mutation, &report),
                "mutation {:?} not flagged; report: {report}",
                mutation.expect
            );
        }
    }
}
