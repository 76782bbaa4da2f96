//! Seeded random generators for every structure in the crate.
//!
//! Tests and benchmarks draw their inputs from here so that randomized runs
//! are reproducible: each call site passes a fixed default seed, and setting
//! the `ATORIC_SEED` environment variable (decimal or `0x`-prefixed hex)
//! overrides all of them at once for fuzzing from a chosen point.

use crate::base::{AffineIso, BaseDiagram, CutSign, Node};
use crate::ingredients::CompleteIngredient;
use crate::coeff::{Coeff, Rational};
use crate::jets::{compose_y, invert_y, Jet2, JetPair};
use crate::labels::{FocusLabel, LabelReport};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for randomized tests: `ATORIC_SEED` if set, else the given default.
pub fn rng_from_env(default_seed: u64) -> ChaCha8Rng {
    let seed = std::env::var("ATORIC_SEED")
        .ok()
        .and_then(|s| {
            let t = s.trim();
            match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
                Some(h) => u64::from_str_radix(h, 16).ok(),
                None => t.parse().ok(),
            }
        })
        .unwrap_or(default_seed);
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rational with numerator in `[-max_abs_num, max_abs_num]` and denominator
/// in `[1, max_den]`.
pub fn rand_rational(rng: &mut ChaCha8Rng, max_abs_num: i64, max_den: i64) -> Rational {
    Rational::new(rng.gen_range(-max_abs_num..=max_abs_num), rng.gen_range(1..=max_den))
}

pub fn rand_nonzero_rational(rng: &mut ChaCha8Rng, max_abs_num: i64, max_den: i64) -> Rational {
    loop {
        let r = rand_rational(rng, max_abs_num, max_den);
        if !r.is_zero() {
            return r;
        }
    }
}

/// Small coefficient; with `with_tau`, a 2*pi part appears about 40% of the
/// time.
pub fn rand_coeff(rng: &mut ChaCha8Rng, with_tau: bool) -> Coeff {
    let r = rand_rational(rng, 6, 4);
    if with_tau && rng.gen_bool(0.4) {
        Coeff::from_parts(r, rand_rational(rng, 3, 3))
    } else {
        Coeff::from_rational(r)
    }
}

/// Jet whose entries are each nonzero with probability `density`.
pub fn rand_jet(
    rng: &mut ChaCha8Rng,
    order: u32,
    density: f64,
    zero_const: bool,
    with_tau: bool,
) -> Jet2 {
    let mut j = Jet2::zero(order);
    for p in 0..=order {
        for q in 0..=(order - p) {
            if p == 0 && q == 0 && zero_const {
                continue;
            }
            if rng.gen_bool(density) {
                j.set(p, q, rand_coeff(rng, with_tau)).expect("in range");
            }
        }
    }
    j
}

/// Sparse jet with `terms` nonzero entries of total degree in
/// `[min_deg, order]`, positions distinct from any in `skip`.
fn rand_sparse_terms(
    rng: &mut ChaCha8Rng,
    j: &mut Jet2,
    terms: u32,
    min_deg: u32,
    with_tau: bool,
    skip: &[(u32, u32)],
) {
    let order = j.order();
    let mut placed = 0;
    while placed < terms {
        let d = rng.gen_range(min_deg..=order);
        let p = rng.gen_range(0..=d);
        let q = d - p;
        if skip.contains(&(p, q)) || !j.get(p, q).is_zero() {
            continue;
        }
        let mut c = rand_coeff(rng, with_tau);
        if c.is_zero() {
            c = Coeff::one();
        }
        j.set(p, q, c).expect("in range");
        placed += 1;
    }
}

/// Series invertible in the `Y` slot: zero constant term, nonzero rational
/// leading `Y` coefficient, a few sparse higher terms.
pub fn rand_invertible_y(rng: &mut ChaCha8Rng, order: u32) -> Jet2 {
    rand_invertible_y_with(rng, order, true)
}

fn rand_invertible_y_with(rng: &mut ChaCha8Rng, order: u32, with_tau: bool) -> Jet2 {
    let mut g = Jet2::zero(order);
    g.set(0, 1, Coeff::from_rational(rand_nonzero_rational(rng, 4, 3))).expect("in range");
    let terms = rng.gen_range(2..=4).min(order);
    rand_sparse_terms(rng, &mut g, terms, 2.min(order), with_tau, &[(0, 0), (0, 1)]);
    g
}

/// Transition-shaped series: like [`rand_invertible_y`] but with a strictly
/// positive leading coefficient.
pub fn rand_transition(rng: &mut ChaCha8Rng, order: u32) -> Jet2 {
    rand_transition_with(rng, order, true)
}

fn rand_transition_with(rng: &mut ChaCha8Rng, order: u32, with_tau: bool) -> Jet2 {
    let mut g = rand_invertible_y_with(rng, order, with_tau);
    if matches!(g.get(0, 1).sign(), Some(s) if s < 0) {
        let lead = g.get(0, 1).neg();
        g.set(0, 1, lead).expect("in range");
    }
    g
}

/// Origin-fixing plane map with invertible rational linear part and sparse
/// higher terms.
pub fn rand_origin_diffeo(rng: &mut ChaCha8Rng, order: u32) -> JetPair {
    loop {
        let a = rand_rational(rng, 3, 2);
        let b = rand_rational(rng, 3, 2);
        let c = rand_rational(rng, 3, 2);
        let d = rand_rational(rng, 3, 2);
        if a.mul(&d).sub(&b.mul(&c)).is_zero() {
            continue;
        }
        let mut x = Jet2::zero(order);
        x.set(1, 0, Coeff::from_rational(a)).expect("in range");
        x.set(0, 1, Coeff::from_rational(b)).expect("in range");
        let mut y = Jet2::zero(order);
        y.set(1, 0, Coeff::from_rational(c)).expect("in range");
        y.set(0, 1, Coeff::from_rational(d)).expect("in range");
        if order >= 2 {
            let tx = rng.gen_range(1..=3);
            rand_sparse_terms(rng, &mut x, tx, 2, true, &[]);
            let ty = rng.gen_range(1..=3);
            rand_sparse_terms(rng, &mut y, ty, 2, true, &[]);
        }
        return JetPair::new(x, y).expect("equal orders");
    }
}

/// Three origin-fixing jet pairs sharing one first component, each with an
/// invertible linear part: the setting of the transition cocycle.
pub fn rand_compatible_triple(rng: &mut ChaCha8Rng, order: u32) -> (JetPair, JetPair, JetPair) {
    // shared abscissa component with nonzero rational linear part
    let (a, b) = loop {
        let a = rand_rational(rng, 3, 2);
        let b = rand_rational(rng, 3, 2);
        if !a.is_zero() || !b.is_zero() {
            break (a, b);
        }
    };
    let mut j = Jet2::zero(order);
    j.set(1, 0, Coeff::from_rational(a.clone())).expect("in range");
    j.set(0, 1, Coeff::from_rational(b.clone())).expect("in range");
    if order >= 2 {
        let tj = rng.gen_range(0..=2);
        rand_sparse_terms(rng, &mut j, tj, 2, true, &[]);
    }
    let mk = |rng: &mut ChaCha8Rng| loop {
        let c = rand_rational(rng, 3, 2);
        let d = rand_rational(rng, 3, 2);
        if a.mul(&d).sub(&b.mul(&c)).is_zero() {
            continue;
        }
        let mut y = Jet2::zero(order);
        y.set(1, 0, Coeff::from_rational(c)).expect("in range");
        y.set(0, 1, Coeff::from_rational(d)).expect("in range");
        if order >= 2 {
            let ty = rng.gen_range(1..=3);
            rand_sparse_terms(rng, &mut y, ty, 2, true, &[]);
        }
        return JetPair::new(j.clone(), y).expect("equal orders");
    };
    let eu = mk(rng);
    let ev = mk(rng);
    let ew = mk(rng);
    (eu, ev, ew)
}

/// Valid random label of multiplicity `m`, built by closing a free choice of
/// transitions from sheet 0 under the cocycle identity: `g[u][v] = g[0][v] o
/// g[u][0]` and `s[u] = s[0] o g[u][0]` satisfy every axiom by construction.
pub fn rand_valid_label(rng: &mut ChaCha8Rng, m: usize, order: u32) -> FocusLabel {
    rand_valid_label_with(rng, m, order, false)
}

/// Valid label every coefficient of which fits the document format: the free
/// transitions carry no period part, and cocycle products as well as the
/// pushed-forward action series are linear in the one series that does.
pub fn rand_valid_label_portable(rng: &mut ChaCha8Rng, m: usize, order: u32) -> FocusLabel {
    rand_valid_label_with(rng, m, order, true)
}

fn rand_valid_label_with(
    rng: &mut ChaCha8Rng,
    m: usize,
    order: u32,
    portable: bool,
) -> FocusLabel {
    assert!(m >= 1);
    let y = Jet2::y(order);
    let mut g0: Vec<Jet2> = vec![y.clone()];
    for _ in 1..m {
        g0.push(rand_transition_with(rng, order, !portable));
    }
    let gu0: Vec<Jet2> = g0.iter().map(|g| invert_y(g).expect("leading checked")).collect();
    let mut g: Vec<Vec<Jet2>> = Vec::with_capacity(m);
    for u in 0..m {
        let mut row = Vec::with_capacity(m);
        for v in 0..m {
            row.push(compose_y(&g0[v], &gu0[u]).expect("zero constant"));
        }
        g.push(row);
    }
    let mut s0 = Jet2::zero(order);
    let ts = rng.gen_range(3..=6).min(order);
    rand_sparse_terms(rng, &mut s0, ts, 1, true, &[]);
    let s: Vec<Jet2> =
        (0..m).map(|u| compose_y(&s0, &gu0[u]).expect("zero constant")).collect();
    FocusLabel::new(s, g).expect("closure construction satisfies the axioms")
}

/// Which axiom a [`mutate_label`] corruption is guaranteed to trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectedViolation {
    Leading,
    Diagonal,
    Constant,
    Action(usize),
    Cocycle,
}

/// A corrupted label as raw arrays, with the violation its corruption must
/// produce.
#[derive(Debug, Clone)]
pub struct LabelMutation {
    pub m: usize,
    pub s: Vec<Jet2>,
    pub g: Vec<Vec<Jet2>>,
    pub expect: ExpectedViolation,
}

/// Corrupts one coefficient of a valid label.  The mutation kinds are chosen
/// so that detection is certain, not merely likely: each targets an axiom
/// that provably fails after the change.
pub fn mutate_label(rng: &mut ChaCha8Rng, l: &FocusLabel) -> LabelMutation {
    let m = l.m();
    let order = l.order();
    let mut s: Vec<Jet2> = l.series().iter().map(|a| a.rep().clone()).collect();
    let mut g: Vec<Vec<Jet2>> = l.transitions().to_vec();
    // multiplicity 1 has no composition axioms to break
    let kind = if m == 1 { rng.gen_range(0..3) } else { rng.gen_range(0..5) };
    let rand_pos = |rng: &mut ChaCha8Rng, min_deg: u32| {
        let d = rng.gen_range(min_deg..=order);
        let p = rng.gen_range(0..=d);
        (p, d - p)
    };
    let expect = match kind {
        0 => {
            let (u, v) = (rng.gen_range(0..m), rng.gen_range(0..m));
            let lead = g[u][v].get(0, 1).neg();
            g[u][v].set(0, 1, lead).expect("in range");
            ExpectedViolation::Leading
        }
        1 => {
            let u = rng.gen_range(0..m);
            let (p, q) = rand_pos(rng, 1);
            let bump = Coeff::from_rational(rand_nonzero_rational(rng, 3, 2));
            let c = g[u][u].get(p, q).add(&bump);
            g[u][u].set(p, q, c).expect("in range");
            ExpectedViolation::Diagonal
        }
        2 => {
            let bump = Coeff::from_rational(rand_nonzero_rational(rng, 3, 2));
            if rng.gen_bool(0.5) {
                let u = rng.gen_range(0..m);
                let c = s[u].get(0, 0).add(&bump);
                s[u].set(0, 0, c).expect("in range");
            } else {
                let (u, v) = (rng.gen_range(0..m), rng.gen_range(0..m));
                let c = g[u][v].get(0, 0).add(&bump);
                g[u][v].set(0, 0, c).expect("in range");
            }
            ExpectedViolation::Constant
        }
        3 => {
            // rational bumps are never absorbed by the 2*pi*X quotient
            let u = rng.gen_range(0..m);
            let (p, q) = rand_pos(rng, 1);
            let bump = Coeff::from_rational(rand_nonzero_rational(rng, 3, 2));
            let c = s[u].get(p, q).add(&bump);
            s[u].set(p, q, c).expect("in range");
            ExpectedViolation::Action(u)
        }
        _ => {
            let u = rng.gen_range(0..m);
            let v = (u + rng.gen_range(1..m)) % m;
            let (p, q) = rand_pos(rng, 1);
            let bump = Coeff::from_rational(rand_nonzero_rational(rng, 3, 2));
            let c = g[u][v].get(p, q).add(&bump);
            g[u][v].set(p, q, c).expect("in range");
            ExpectedViolation::Cocycle
        }
    };
    LabelMutation { m, s, g, expect }
}

/// True when the report flags the axiom the mutation was built to break.
pub fn mutation_detected(mutation: &LabelMutation, report: &LabelReport) -> bool {
    if report.is_valid() {
        return false;
    }
    match mutation.expect {
        ExpectedViolation::Leading => report.has_leading_violation(),
        ExpectedViolation::Diagonal => report.has_diagonal_violation(),
        ExpectedViolation::Constant => report.has_constant_violation(),
        ExpectedViolation::Action(u) => report.has_action_mismatch_touching(u),
        ExpectedViolation::Cocycle => report.has_cocycle_violation(),
    }
}

fn rp(x: i64, y: i64) -> (Rational, Rational) {
    (Rational::from_int(x), Rational::from_int(y))
}

fn node(x: i64, y: i64, mult: u32, eigen: (i64, i64), cut: CutSign) -> Node {
    Node { pos: rp(x, y), mult, eigen, cut }
}

/// Hand-checked valid diagrams covering the corner cases of validation: no
/// nodes at all, a cut ending in a real bend, a cut hiding a corner inside a
/// straight edge, multiplicities above one, and two nodes sharing an edge.
pub fn seed_diagrams() -> Vec<(&'static str, BaseDiagram)> {
    vec![
        (
            "square",
            BaseDiagram {
                polygon: vec![rp(0, 0), rp(1, 0), rp(1, 1), rp(0, 1)],
                nodes: vec![],
            },
        ),
        (
            "one-cut-up",
            BaseDiagram {
                polygon: vec![rp(0, 0), rp(2, 0), rp(4, 2), rp(4, 6), rp(2, 4), rp(0, 4)],
                nodes: vec![node(2, 2, 1, (0, 1), CutSign::Plus)],
            },
        ),
        (
            "hidden-corner",
            BaseDiagram {
                polygon: vec![rp(0, 0), rp(4, 0), rp(4, 2), rp(4, 4), rp(0, 4)],
                nodes: vec![node(2, 2, 1, (1, 0), CutSign::Plus)],
            },
        ),
        (
            "mult-two",
            BaseDiagram {
                polygon: vec![rp(0, 0), rp(4, 0), rp(4, 2), rp(6, 4), rp(6, 6), rp(0, 6)],
                nodes: vec![node(2, 2, 2, (1, 0), CutSign::Plus)],
            },
        ),
        (
            "mult-three",
            BaseDiagram {
                polygon: vec![
                    rp(0, 0),
                    rp(4, 0),
                    rp(4, 2),
                    rp(8, 4),
                    rp(9, 5),
                    rp(9, 6),
                    rp(0, 6),
                ],
                nodes: vec![node(2, 2, 3, (1, 0), CutSign::Plus)],
            },
        ),
        (
            "two-nodes",
            BaseDiagram {
                polygon: vec![rp(0, 0), rp(4, 0), rp(4, 1), rp(4, 3), rp(4, 4), rp(0, 4)],
                nodes: vec![
                    node(2, 1, 1, (1, 0), CutSign::Plus),
                    node(2, 3, 1, (1, 0), CutSign::Plus),
                ],
            },
        ),
    ]
}

/// Complete ingredient over a given base: a fresh valid label per node with
/// the node's multiplicity, and small random twisting indices.  Labels are
/// portable so every generated ingredient serializes; the richer
/// coefficients are exercised by the label-level generators.
pub fn rand_ingredient(
    rng: &mut ChaCha8Rng,
    base: BaseDiagram,
    order: u32,
) -> CompleteIngredient {
    let labels = base
        .nodes
        .iter()
        .map(|n| rand_valid_label_portable(rng, n.mult as usize, order))
        .collect();
    let k = base.nodes.iter().map(|_| rng.gen_range(-5..=5)).collect();
    CompleteIngredient { base, labels, k }
}

/// Valid ingredient over a random seed diagram moved by a random affine map.
pub fn rand_complete_ingredient(rng: &mut ChaCha8Rng, order: u32) -> CompleteIngredient {
    let mut seeds = seed_diagrams();
    let pick = rng.gen_range(0..seeds.len());
    let (_, base) = seeds.swap_remove(pick);
    let g = rand_affine_iso(rng, 2);
    rand_ingredient(rng, base.transformed(&g), order)
}

/// Integer 2x2 matrix with determinant +1 and entries in `[-bound, bound]`.
pub fn rand_unimodular(rng: &mut ChaCha8Rng, bound: i64) -> [[i64; 2]; 2] {
    let bound = bound.max(1);
    loop {
        let m = [
            [rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound)],
            [rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound)],
        ];
        if m[0][0] * m[1][1] - m[0][1] * m[1][0] == 1 {
            return m;
        }
    }
}

/// Random integral affine map: unimodular linear part within `bound`, small
/// integer translation.
pub fn rand_affine_iso(rng: &mut ChaCha8Rng, bound: i64) -> AffineIso {
    AffineIso {
        linear: rand_unimodular(rng, bound),
        translate: (
            Rational::from_int(rng.gen_range(-5..=5)),
            Rational::from_int(rng.gen_range(-5..=5)),
        ),
    }
}
