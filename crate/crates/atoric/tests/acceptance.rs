//! Release gate: nine checks, each printed as one PASS/FAIL line with its
//! runtime.  Budgets are part of the contract; exceeding one fails the run
//! even when the assertions inside all hold.
//!
//! Seeded like every randomized test in the crate: set ATORIC_SEED (decimal
//! or 0x-hex) to reproduce a run.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use atoric::base::{
    node_monodromy, smith_normal_form_2x2, standard_lattice, verify_iso, Branch, LoopDirection,
};
use atoric::coeff::{Coeff, Rational};
use atoric::ingredients::{
    act_perm, act_sign, ingredients_equivalent, CompleteIngredient, SignVector,
};
use atoric::jets::{compose2, compose_y, solve_substitution, Jet2, JetPair};
use atoric::labels::{labels_equal, transition_series, verify_label};
use atoric::numerics::{extract_relative_series, k_plus, regularized_action, GridSpec};
use atoric::sampling::{
    mutate_label, mutation_detected, rand_affine_iso, rand_compatible_triple,
    rand_complete_ingredient, rand_ingredient, rand_valid_label, rng_from_env, seed_diagrams,
};

fn main() {
    let secs = Duration::from_secs;
    let checks: [(&str, fn(), Option<Duration>); 9] = [
        ("label_axiom_suite", label_axiom_suite, Some(secs(10))),
        ("transition_cocycle", transition_cocycle, Some(secs(5))),
        ("flip_involution", flip_involution, None),
        ("node_monodromy_matrices", node_monodromy_matrices, Some(secs(1))),
        ("lattice_branch_independence", lattice_branch_independence, None),
        ("action_roundtrip", action_roundtrip, Some(secs(30))),
        ("equivalence_witness", equivalence_witness, None),
        ("group_action_laws", group_action_laws, None),
        ("k_plus_continuity", k_plus_continuity, None),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let n = i + 1;
        match outcome {
            Ok(()) => match budget {
                Some(b) if elapsed > *b => {
                    println!(
                        "[{n}/9] {name}: FAIL ({elapsed:.2?} over the {b:.0?} budget)"
                    );
                    failures += 1;
                }
                _ => println!("[{n}/9] {name}: PASS ({elapsed:.2?})"),
            },
            Err(_) => {
                println!("[{n}/9] {name}: FAIL ({elapsed:.2?})");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance check(s) failed");
        std::process::exit(1);
    }
}

/// 200 randomized valid labels per multiplicity in 1..=3 all verify, and 200
/// single-coefficient corruptions are each caught under the axiom the
/// corruption targets.  Series order 8 throughout.
fn label_axiom_suite() {
    let mut rng = rng_from_env(0xacc1);
    let order = 8;
    for m in 1..=3usize {
        for round in 0..200 {
            let l = rand_valid_label(&mut rng, m, order);
            let s: Vec<Jet2> = l.series().iter().map(|a| a.rep().clone()).collect();
            let report = verify_label(m, &s, l.transitions()).expect("well-shaped");
            assert!(report.is_valid(), "m={m} round={round}: {report}");
        }
    }
    for round in 0..200 {
        let m = 1 + round % 3;
        let l = rand_valid_label(&mut rng, m, order);
        let bad = mutate_label(&mut rng, &l);
        let report = verify_label(bad.m, &bad.s, &bad.g).expect("mutation keeps the shape");
        assert!(
            mutation_detected(&bad, &report),
            "round={round}: {:?} corruption escaped; report says: {report}",
            bad.expect
        );
    }
}

/// Transitions between 100 random compatible chart triples compose as a
/// cocycle at order 8, coefficient-exactly.  Each transition is first checked
/// against its defining property through the full bivariate composition,
/// which exercises an independent code path.
fn transition_cocycle() {
    let mut rng = rng_from_env(0xacc2);
    let order = 8;
    for round in 0..100 {
        let (eu, ev, ew) = rand_compatible_triple(&mut rng, order);
        let guv = transition_series(&eu, &ev).expect("compatible");
        let gvw = transition_series(&ev, &ew).expect("compatible");
        let guw = transition_series(&eu, &ew).expect("compatible");
        for (g, from, to) in [(&guv, &eu, &ev), (&gvw, &ev, &ew), (&guw, &eu, &ew)] {
            let pushed = compose2(g, &from.x, &from.y).expect("orders match");
            assert_eq!(pushed, to.y, "round={round}: transition misses its defining property");
        }
        let composed = compose_y(&gvw, &guv).expect("zero constant term");
        assert_eq!(guw, composed, "round={round}: cocycle identity fails");
    }
}

/// Flipping a label is an involution up to cyclic relabeling, and every flip
/// is itself a valid label.
fn flip_involution() {
    let mut rng = rng_from_env(0xacc3);
    for round in 0..100 {
        let m = rng.gen_range(1..=3);
        let l = rand_valid_label(&mut rng, m, 6);
        let flipped = atoric::labels::flip_label(&l);
        let s: Vec<Jet2> = flipped.series().iter().map(|a| a.rep().clone()).collect();
        let report = verify_label(m, &s, flipped.transitions()).expect("well-shaped");
        assert!(report.is_valid(), "round={round}: flipped label invalid: {report}");
        let back = atoric::labels::flip_label(&flipped);
        assert!(labels_equal(&back, &l), "round={round}: flip is not involutive");
    }
}

/// Counterclockwise continuation around a node of multiplicity m produces
/// exactly the integer shear [[1, -m], [0, 1]]; its deviation from integrality
/// stays under 1e-6 (the continuation rejects anything worse), and the
/// elementary divisors of M - I are (m, 0).
fn node_monodromy_matrices() {
    for m in 1..=5u32 {
        let mm = node_monodromy(m, LoopDirection::Ccw, 0.5)
            .expect("integrality within 1e-6 is enforced internally");
        assert_eq!(mm, [[1, -(m as i64)], [0, 1]], "m={m}");
        let m_minus_i = [[mm[0][0] - 1, mm[0][1]], [mm[1][0], mm[1][1] - 1]];
        assert_eq!(smith_normal_form_2x2(m_minus_i), (m as i64, 0), "m={m}");
    }
}

/// The lattice spanned by the standard basis does not depend on the branch of
/// the logarithm: 500 random (m, z, winding gap) cases give change-of-basis
/// matrices that are integral with determinant +-1.  The change is solved
/// here directly from the covectors rather than through the library helper.
fn lattice_branch_independence() {
    let mut rng = rng_from_env(0xacc5);
    for round in 0..500 {
        let m = rng.gen_range(1..=5);
        let r = rng.gen_range(0.05..0.95);
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let z = Complex64::from_polar(r, theta);
        let w = rng.gen_range(-3..=3);
        let gap = loop {
            let k = rng.gen_range(-3..=3);
            if k != 0 {
                break k;
            }
        };
        let b1 = standard_lattice(m, z, Branch { winding: w }).expect("inside the model domain");
        let b2 = standard_lattice(m, z, Branch { winding: w + gap }).expect("same domain");

        let det = b1.v1.0 * b1.v2.1 - b1.v1.1 * b1.v2.0;
        let solve = |u: (f64, f64)| {
            (
                (u.0 * b1.v2.1 - u.1 * b1.v2.0) / det,
                (b1.v1.0 * u.1 - b1.v1.1 * u.0) / det,
            )
        };
        let c1 = solve(b2.v1);
        let c2 = solve(b2.v2);
        let mut near = [[0i64; 2]; 2];
        for (j, v) in [c1.0, c1.1, c2.0, c2.1].into_iter().enumerate() {
            let n = v.round();
            assert!(
                (v - n).abs() < 1e-6,
                "round={round}: change-of-basis entry {v} is not integral"
            );
            near[j % 2][j / 2] = n as i64;
        }
        let cdet = near[0][0] * near[1][1] - near[0][1] * near[1][0];
        assert!(cdet.abs() == 1, "round={round}: determinant {cdet}");

        // Sharper than integrality: one extra winding shears v2 by -m v1.
        let shift = -(m as f64) * (gap as f64);
        assert!((b2.v2.0 - b1.v2.0 - shift).abs() < 1e-9, "round={round}");
        assert!((b2.v2.1 - b1.v2.1).abs() < 1e-9, "round={round}");
    }
}

/// Synthesized action samples on the default 1e-2 grid return the polynomial
/// they came from: through order 2 within 1e-3, through order 3 within 1e-2,
/// for both the identity chart and a genuinely curved one.  Extraction in the
/// curved chart is compared against a directly solved substitution and then
/// composed back onto the input.
fn action_roundtrip() {
    let order = 4;
    let tau = Coeff::tau();
    let entry = |j: &mut Jet2, p: u32, q: u32, c: Coeff| j.set(p, q, c).expect("in range");
    let fixtures: Vec<Jet2> = {
        let mut out = vec![Jet2::zero(order)];
        let mut a = Jet2::zero(order);
        entry(&mut a, 0, 1, tau.clone());
        out.push(a.clone());
        entry(&mut a, 2, 0, Coeff::one());
        out.push(a.clone());
        entry(&mut a, 1, 1, Coeff::from_int(-3));
        entry(&mut a, 0, 3, Coeff::one());
        out.push(a);
        out
    };
    let identity = JetPair::identity(order);
    let curved = {
        let mut ey = Jet2::y(order);
        entry(&mut ey, 2, 0, Coeff::from_rational(Rational::new(1, 2)));
        JetPair::new(Jet2::x(order), ey).expect("equal orders")
    };
    let grid = GridSpec::default();
    assert_eq!(grid.h, 1e-2, "budgeted tolerances assume the default spacing");

    for stilde in &fixtures {
        for chart in [&identity, &curved] {
            let charts = std::slice::from_ref(chart);
            let a2 = regularized_action(stilde, charts, &grid).expect("grid avoids the cut");
            for n in [2u32, 3] {
                let tol = if n <= 2 { 1e-3 } else { 1e-2 };
                let got = extract_relative_series(&a2, charts, n).expect("order within range");
                let ex = chart.x.truncated(n).expect("lowering");
                let ey = chart.y.truncated(n).expect("lowering");
                let input = stilde.truncated(n).expect("lowering");
                let want = solve_substitution(&ex, &ey, &input).expect("invertible chart");
                let gap = max_coeff_gap(got.rep(), &want);
                assert!(gap <= tol, "order {n}: gap {gap:.3e} against the substituted input");
                let back = compose2(got.rep(), &ex, &ey).expect("orders match");
                let gap_back = max_coeff_gap(&back, &input);
                assert!(gap_back <= tol, "order {n}: gap {gap_back:.3e} after composing back");
            }
        }
    }
}

fn max_coeff_gap(a: &Jet2, b: &Jet2) -> f64 {
    let order = a.order().max(b.order());
    let mut worst: f64 = 0.0;
    for p in 0..=order {
        for q in 0..=(order - p) {
            worst = worst.max((a.get(p, q).eval_f64() - b.get(p, q).eval_f64()).abs());
        }
    }
    worst
}

/// Moving an ingredient by a random affine isomorphism is detected with a
/// witness inside the search bound, and bumping any one twisting index makes
/// the pair inequivalent.
fn equivalence_witness() {
    let mut rng = rng_from_env(0xacc7);
    let mut done = 0;
    while done < 50 {
        let ing = rand_complete_ingredient(&mut rng, 3);
        if ing.base.nodes.is_empty() {
            continue;
        }
        let g = rand_affine_iso(&mut rng, 3);
        let moved = CompleteIngredient {
            base: ing.base.transformed(&g),
            labels: ing.labels.clone(),
            k: ing.k.clone(),
        };
        let witness = ingredients_equivalent(&ing, &moved, 3)
            .expect("an in-bound witness exists by construction");
        for row in witness.linear {
            for e in row {
                assert!(e.abs() <= 3, "witness entry {e} outside the bound");
            }
        }
        assert!(verify_iso(&ing.base, &moved.base, &witness));
        for i in 0..moved.k.len() {
            let mut bumped = moved.clone();
            bumped.k[i] += 1;
            assert!(
                ingredients_equivalent(&ing, &bumped, 3).is_none(),
                "changing k[{i}] must break equivalence"
            );
        }
        done += 1;
    }
}

/// The permutation action satisfies the identity and compositionality laws on
/// the nose, and the sign action with zero offsets is involutive: the base
/// and the twisting indices return exactly, the labels up to relabeling.
fn group_action_laws() {
    let mut rng = rng_from_env(0xacc8);
    let two_nodes = seed_diagrams().swap_remove(5).1;
    for round in 0..100 {
        // every other round uses the two-node base so permutations act
        // nontrivially on a fair share of the samples
        let ing = if round % 2 == 0 {
            rand_complete_ingredient(&mut rng, 3)
        } else {
            rand_ingredient(&mut rng, two_nodes.clone(), 3)
        };
        let f = ing.base.nodes.len();

        let id: Vec<usize> = (0..f).collect();
        assert_eq!(act_perm(&id, &ing).expect("identity is a permutation"), ing);

        let perm = |rng: &mut ChaCha8Rng| {
            let mut v: Vec<usize> = (0..f).collect();
            v.shuffle(rng);
            v
        };
        let rho = perm(&mut rng);
        let sigma = perm(&mut rng);
        let nested =
            act_perm(&rho, &act_perm(&sigma, &ing).expect("valid")).expect("valid");
        let fused: Vec<usize> = (0..f).map(|i| sigma[rho[i]]).collect();
        assert_eq!(nested, act_perm(&fused, &ing).expect("valid"), "round={round}");

        let signs: Vec<i8> = (0..f).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        let sv = SignVector::new(signs, vec![0; f]).expect("matched lengths");
        let once = act_sign(&sv, &ing).expect("valid");
        let twice = act_sign(&sv, &once).expect("valid");
        assert_eq!(twice.base, ing.base, "round={round}");
        assert_eq!(twice.k, ing.k, "round={round}");
        for (a, b) in twice.labels.iter().zip(&ing.labels) {
            assert!(labels_equal(a, b), "round={round}: labels moved under the double flip");
        }
    }
}

/// The kernel is continuous across the negative real and negative imaginary
/// axes and vanishes identically on the positive real axis.
///
/// Continuity is measured by a two-scale straddle at total width 1e-6: the
/// difference across the axis at distance d minus twice the difference at
/// d/2.  For a continuous function the gradient term cancels and the residue
/// is third order in d; a genuine jump would survive in full.  The residue
/// must stay under 1e-8.
fn k_plus_continuity() {
    let f = |c: Complex64| k_plus(c).expect("off the cut");
    let jump = |center: Complex64, normal: Complex64| {
        let d = normal * 5e-7;
        let wide = f(center + d) - f(center - d);
        let narrow = f(center + d * 0.5) - f(center - d * 0.5);
        (wide - 2.0 * narrow).abs()
    };
    for i in 0..100 {
        let t = -3.0 + 3.0 * (i as f64) / 99.0;
        let r = 10f64.powf(t);
        let across_real = jump(Complex64::new(-r, 0.0), Complex64::new(0.0, 1.0));
        assert!(across_real < 1e-8, "jump {across_real:.3e} across the negative real axis at {r}");
        let across_imag = jump(Complex64::new(0.0, -r), Complex64::new(1.0, 0.0));
        assert!(
            across_imag < 1e-8,
            "jump {across_imag:.3e} across the negative imaginary axis at {r}"
        );
    }
    for i in 1..=1000 {
        let r = i as f64 / 1000.0;
        let v = f(Complex64::new(r, 0.0));
        assert!(v.abs() <= f64::EPSILON, "k_plus({r}) = {v:e} off zero");
    }
}
